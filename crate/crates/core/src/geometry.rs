//! Geometry of the symmetric inclusion pair and its Nystrom discretization.
//!
//! The pair is D1 above the x1-axis and D2 its exact mirror below, with the
//! gap of width epsilon attained at (0, +-eps/2). Curves are parametrized
//! with a gap-adapted node density (the density follows a Poisson kernel
//! centered at the contact point), so a moderate N resolves gaps down to
//! eps ~ 1e-4; the parametrization stays analytic and the mirror symmetry
//! of the node set is exact by construction.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("gap width epsilon = {0} must be positive")]
    NonPositiveGap(f64),
    #[error("contact curvature lambda = {0:.3e} is not positive (flat or concave contact)")]
    FlatContact(f64),
    #[error("closest approach is not attained at a unique point over x1 = 0")]
    AmbiguousContact,
    #[error("invalid curve specification: {0}")]
    BadSpec(String),
    #[error("x1 = {x1} outside the validated gap window |x1| < {limit}")]
    OutsideGapWindow { x1: f64, limit: f64 },
    #[error("N = {0} must be even and >= 32")]
    BadNodeCount(usize),
}

/// Closed C^2 curve shapes available for the inclusions.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Disk { radius: f64 },
    /// Semi-axes a (horizontal) and b (vertical).
    Ellipse { a: f64, b: f64 },
    /// Polar curve rho(t) = base_radius * (1 + sum_j coeffs[j-1] cos(j t)).
    FourierStar { base_radius: f64, coeffs: Vec<f64> },
}

impl CurveSpec {
    fn validate(&self) -> Result<(), GeometryError> {
        match self {
            CurveSpec::Disk { radius } if *radius > 0.0 => Ok(()),
            CurveSpec::Disk { radius } => {
                Err(GeometryError::BadSpec(format!("disk radius {radius} <= 0")))
            }
            CurveSpec::Ellipse { a, b } if *a > 0.0 && *b > 0.0 => Ok(()),
            CurveSpec::Ellipse { a, b } => {
                Err(GeometryError::BadSpec(format!("ellipse axes ({a}, {b}) must be positive")))
            }
            CurveSpec::FourierStar { base_radius, coeffs } => {
                if *base_radius <= 0.0 {
                    return Err(GeometryError::BadSpec("star base radius <= 0".into()));
                }
                let wiggle: f64 = coeffs.iter().map(|c| c.abs()).sum();
                if wiggle >= 0.5 {
                    return Err(GeometryError::BadSpec(format!(
                        "star coefficients too large (sum |c_j| = {wiggle} >= 0.5)"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Base point before placement.
    fn point(&self, t: f64) -> [f64; 2] {
        match self {
            CurveSpec::Disk { radius } => [radius * t.cos(), radius * t.sin()],
            CurveSpec::Ellipse { a, b } => [a * t.cos(), b * t.sin()],
            CurveSpec::FourierStar { base_radius, coeffs } => {
                let r = self.star_rho(t, base_radius, coeffs).0;
                [r * t.cos(), r * t.sin()]
            }
        }
    }

    fn d1(&self, t: f64) -> [f64; 2] {
        match self {
            CurveSpec::Disk { radius } => [-radius * t.sin(), radius * t.cos()],
            CurveSpec::Ellipse { a, b } => [-a * t.sin(), b * t.cos()],
            CurveSpec::FourierStar { base_radius, coeffs } => {
                let (r, dr, _) = self.star_rho(t, base_radius, coeffs);
                [dr * t.cos() - r * t.sin(), dr * t.sin() + r * t.cos()]
            }
        }
    }

    fn d2(&self, t: f64) -> [f64; 2] {
        match self {
            CurveSpec::Disk { radius } => [-radius * t.cos(), -radius * t.sin()],
            CurveSpec::Ellipse { a, b } => [-a * t.cos(), -b * t.sin()],
            CurveSpec::FourierStar { base_radius, coeffs } => {
                let (r, dr, ddr) = self.star_rho(t, base_radius, coeffs);
                [
                    ddr * t.cos() - 2.0 * dr * t.sin() - r * t.cos(),
                    ddr * t.sin() + 2.0 * dr * t.cos() - r * t.sin(),
                ]
            }
        }
    }

    fn star_rho(&self, t: f64, base: &f64, coeffs: &[f64]) -> (f64, f64, f64) {
        let mut r = 1.0;
        let mut dr = 0.0;
        let mut ddr = 0.0;
        for (i, c) in coeffs.iter().enumerate() {
            let j = (i + 1) as f64;
            r += c * (j * t).cos();
            dr -= c * j * (j * t).sin();
            ddr -= c * j * j * (j * t).cos();
        }
        (base * r, base * dr, base * ddr)
    }

    /// Signed curvature at parameter t (positive for counterclockwise convex).
    fn curvature(&self, t: f64) -> f64 {
        let d1 = self.d1(t);
        let d2 = self.d2(t);
        let sp2 = d1[0] * d1[0] + d1[1] * d1[1];
        (d1[0] * d2[1] - d1[1] * d2[0]) / (sp2 * sp2.sqrt())
    }
}

/// Gap-adapted reparametrization: node density in the base angle theta
/// proportional to 1 + c * P_r(theta), P_r the Poisson kernel centered at
/// the contact point. Closed-form antiderivative, inverted by bisection
/// plus Newton polish. r = 0 degenerates to the uniform parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradeMap {
    pub c: f64,
    pub r: f64,
}

impl GradeMap {
    pub fn uniform() -> Self {
        GradeMap { c: 0.0, r: 0.0 }
    }

    /// u(theta) on (-pi, pi], monotone odd bijection.
    fn u_of_theta(&self, th: f64) -> f64 {
        if self.c == 0.0 {
            return th;
        }
        if th.abs() >= PI {
            return th.signum() * PI;
        }
        let kap = (1.0 + self.r) / (1.0 - self.r);
        (th + 2.0 * self.c * (kap * (0.5 * th).tan()).atan()) / (1.0 + self.c)
    }

    /// Node density du/dtheta.
    fn psi(&self, th: f64) -> f64 {
        if self.c == 0.0 {
            return 1.0;
        }
        let q = 1.0 - 2.0 * self.r * th.cos() + self.r * self.r;
        let p = (1.0 - self.r * self.r) / q;
        (1.0 + self.c * p) / (1.0 + self.c)
    }

    /// theta(u) for u in (-pi, pi], by bisection then Newton.
    pub fn theta_of_u(&self, u: f64) -> f64 {
        if self.c == 0.0 {
            return u;
        }
        if u.abs() >= PI {
            return u.signum() * PI;
        }
        let mut lo = -PI + 1e-16;
        let mut hi = PI - 1e-16;
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if self.u_of_theta(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut th = 0.5 * (lo + hi);
        for _ in 0..4 {
            th -= (self.u_of_theta(th) - u) / self.psi(th);
            th = th.clamp(-PI + 1e-15, PI - 1e-15);
        }
        th
    }
}

/// One placed, possibly graded curve: base spec translated by `offset`,
/// parametrized by u with the contact point at u = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedCurve {
    pub spec: CurveSpec,
    pub offset: [f64; 2],
    pub t_apex: f64,
    pub grade: GradeMap,
    /// Mirrored curves evaluate through the partner's parametrization.
    pub mirrored: bool,
}

impl PlacedCurve {
    fn base_t(&self, u: f64) -> f64 {
        let uw = wrap_pi(u);
        self.t_apex + self.grade.theta_of_u(uw)
    }

    pub fn point(&self, u: f64) -> [f64; 2] {
        if self.mirrored {
            let p = self.unmirrored().point(-u);
            return [p[0], -p[1]];
        }
        let t = self.base_t(u);
        let p = self.spec.point(t);
        [p[0] + self.offset[0], p[1] + self.offset[1]]
    }

    /// Speed |dp/du|, exterior unit normal, and signed curvature at u.
    pub fn frame(&self, u: f64) -> (f64, [f64; 2], f64) {
        if self.mirrored {
            let (s, n, k) = self.unmirrored().frame(-u);
            return (s, [n[0], -n[1]], k);
        }
        let uw = wrap_pi(u);
        let th = self.grade.theta_of_u(uw);
        let t = self.t_apex + th;
        let d1 = self.spec.d1(t);
        let sp_t = (d1[0] * d1[0] + d1[1] * d1[1]).sqrt();
        let dth_du = 1.0 / self.grade.psi(th);
        let speed = sp_t * dth_du;
        let normal = [d1[1] / sp_t, -d1[0] / sp_t];
        let kappa = self.spec.curvature(t);
        (speed, normal, kappa)
    }

    fn unmirrored(&self) -> PlacedCurve {
        let mut c = self.clone();
        c.mirrored = false;
        c
    }
}

fn wrap_pi(u: f64) -> f64 {
    let mut v = (u + PI).rem_euclid(2.0 * PI) - PI;
    if v == -PI {
        v = PI;
    }
    v
}

/// The symmetric pair: D2 is the exact mirror of D1 across the x1-axis,
/// with dist(D1, D2) = epsilon attained at (0, +-eps/2).
#[derive(Debug, Clone)]
pub struct InclusionPair {
    pub spec: CurveSpec,
    pub epsilon: f64,
    /// Contact curvature of the boundary at (0, eps/2).
    pub lambda: f64,
    pub curve1: PlacedCurve,
    pub curve2: PlacedCurve,
    /// Validated gap half-window (graphs single-valued, |H'| <= 1 on |x1| < 2 R0).
    pub r0: f64,
    th_window: (f64, f64),
}

/// Quadrature data for one curve.
#[derive(Debug, Clone)]
pub struct CurveMesh {
    pub n: usize,
    pub nodes: Vec<[f64; 2]>,
    /// |dp/du| at the nodes.
    pub speed: Vec<f64>,
    pub normal: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
    /// Trapezoid weights (2 pi / n) * speed: sum = arclength.
    pub weights: Vec<f64>,
    pub area: f64,
    pub centroid: [f64; 2],
    pub curve: PlacedCurve,
}

impl CurveMesh {
    pub fn build(curve: &PlacedCurve, n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut speed = Vec::with_capacity(n);
        let mut normal = Vec::with_capacity(n);
        let mut curvature = Vec::with_capacity(n);
        for j in 0..n {
            let u = h * j as f64;
            nodes.push(curve.point(u));
            let (s, nu, k) = curve.frame(u);
            speed.push(s);
            normal.push(nu);
            curvature.push(k);
        }
        let weights: Vec<f64> = speed.iter().map(|s| h * s).collect();
        // shoelace with exact tangents: area = (1/2) oint (x dy - y dx)
        let mut area = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for j in 0..n {
            let p = nodes[j];
            let s = speed[j];
            let nu = normal[j];
            // tangent = rot(-90)(normal) * speed for CCW curves
            let tx = -nu[1] * s;
            let ty = nu[0] * s;
            area += 0.5 * (p[0] * ty - p[1] * tx) * h;
            cx += p[0] * (p[0] * ty - p[1] * tx) * 0.5 * h;
            cy += p[1] * (p[0] * ty - p[1] * tx) * 0.5 * h;
        }
        // centroid of the enclosed region via the same boundary reduction
        let centroid = [cx / (1.5 * area), cy / (1.5 * area)];
        CurveMesh {
            n,
            nodes,
            speed,
            normal,
            curvature,
            weights,
            area,
            centroid,
            curve: curve.clone(),
        }
    }

    /// Exact nodewise mirror of `self` across the x1-axis (index-reversed,
    /// so the result is positively oriented). Values are copied, not
    /// recomputed, keeping the symmetry exact in floating point.
    pub fn mirrored(&self) -> Self {
        let n = self.n;
        let map = |j: usize| (n - j) % n;
        let mut m = self.clone();
        for j in 0..n {
            let s = map(j);
            m.nodes[j] = [self.nodes[s][0], -self.nodes[s][1]];
            m.speed[j] = self.speed[s];
            m.normal[j] = [self.normal[s][0], -self.normal[s][1]];
            m.curvature[j] = self.curvature[s];
            m.weights[j] = self.weights[s];
        }
        m.centroid = [self.centroid[0], -self.centroid[1]];
        m.curve = PlacedCurve { mirrored: !self.curve.mirrored, ..self.curve.clone() };
        m
    }

    pub fn refined(&self, m: usize) -> Self {
        if m == self.n {
            return self.clone();
        }
        if self.curve.mirrored {
            let base = PlacedCurve { mirrored: false, ..self.curve.clone() };
            return CurveMesh::build(&base, m).mirrored();
        }
        CurveMesh::build(&self.curve, m)
    }

    pub fn arclength(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn max_spacing(&self) -> f64 {
        let mut h = 0.0f64;
        for j in 0..self.n {
            let a = self.nodes[j];
            let b = self.nodes[(j + 1) % self.n];
            h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        }
        h
    }
}

/// Discretization of the pair (or of a single curve, for the disk oracles).
#[derive(Debug, Clone)]
pub struct Mesh {
    pub curves: Vec<CurveMesh>,
    pub gap: Option<GapRegion>,
    /// Set when the apex spacing violates the resolution heuristic.
    pub under_resolved: bool,
}

impl Mesh {
    pub fn n_per_curve(&self) -> usize {
        self.curves[0].n
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.iter().map(|c| c.n).sum()
    }

    /// Flattened quadrature weights over partial(D) in curve order.
    pub fn all_weights(&self) -> Vec<f64> {
        self.curves.iter().flat_map(|c| c.weights.iter().copied()).collect()
    }

    pub fn diameter(&self) -> f64 {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &self.curves {
            for p in &c.nodes {
                xmin = xmin.min(p[0]);
                xmax = xmax.max(p[0]);
                ymin = ymin.min(p[1]);
                ymax = ymax.max(p[1]);
            }
        }
        ((xmax - xmin).powi(2) + (ymax - ymin).powi(2)).sqrt()
    }

    /// Uniform-parameter mesh of a single curve centered at the origin.
    pub fn single(spec: &CurveSpec, n: usize) -> Result<Mesh, GeometryError> {
        spec.validate()?;
        if n < 32 || n % 2 != 0 {
            return Err(GeometryError::BadNodeCount(n));
        }
        let curve = PlacedCurve {
            spec: spec.clone(),
            offset: [0.0, 0.0],
            t_apex: 0.0,
            grade: GradeMap::uniform(),
            mirrored: false,
        };
        Ok(Mesh { curves: vec![CurveMesh::build(&curve, n)], gap: None, under_resolved: false })
    }
}

/// Narrow-gap data: delta(x1) = eps + H1(x1) - H2(x1), validated window R0.
#[derive(Debug, Clone)]
pub struct GapRegion {
    pub epsilon: f64,
    pub lambda: f64,
    pub r0: f64,
    /// Base-parameter window around t_apex where the boundary is a graph
    /// with |H'| <= 1 (x strictly monotone there).
    th_window: (f64, f64),
    curve1: PlacedCurve,
}

impl GapRegion {
    /// Height of the lower boundary graph of D1 above eps/2 at x1, from the
    /// exact parametrization (bisection on the first coordinate).
    pub fn h1(&self, x1: f64) -> f64 {
        self.boundary_height(x1) - self.epsilon / 2.0
    }

    /// By the mirror symmetry H2(x1) = -H1(x1).
    pub fn h2(&self, x1: f64) -> f64 {
        -self.boundary_height(x1) + self.epsilon / 2.0
    }

    pub fn midline(&self, x1: f64) -> f64 {
        0.5 * (self.h1(x1) + self.h2(x1))
    }

    /// x2 on the lower branch of curve 1 at abscissa x1 (base parametrization,
    /// independent of the grading).
    fn boundary_height(&self, x1: f64) -> f64 {
        let c = &self.curve1;
        let (mut lo, mut hi) = (
            c.t_apex + self.th_window.0,
            c.t_apex + self.th_window.1,
        );
        let px = |t: f64| c.spec.point(t)[0] + c.offset[0];
        let increasing = px(hi) > px(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (px(mid) < x1) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        c.spec.point(t)[1] + c.offset[1]
    }
}

/// Constructs the symmetric pair: finds the unique lowest point of the base
/// curve, checks convex contact, translates it to (0, eps/2), and prepares
/// the gap-adapted parametrization.
pub fn make_pair(spec: &CurveSpec, epsilon: f64) -> Result<InclusionPair, GeometryError> {
    spec.validate()?;
    if epsilon <= 0.0 {
        return Err(GeometryError::NonPositiveGap(epsilon));
    }
    // locate the global minimum of the x2-coordinate on a fine scan + Newton
    let m = 4096;
    let mut t_best = 0.0;
    let mut y_best = f64::INFINITY;
    for j in 0..m {
        let t = 2.0 * PI * j as f64 / m as f64;
        let y = spec.point(t)[1];
        if y < y_best {
            y_best = y;
            t_best = t;
        }
    }
    // Newton on d/dt point(t).y = d1(t).y
    let mut t_apex = t_best;
    for _ in 0..60 {
        let dy = spec.d1(t_apex)[1];
        let ddy = spec.d2(t_apex)[1];
        if ddy.abs() < 1e-14 {
            break;
        }
        t_apex -= dy / ddy;
    }
    let y_apex = spec.point(t_apex)[1];
    // uniqueness: any other scan point near the global minimum away from t_apex?
    let d1a = spec.d1(t_apex);
    let speed_apex = (d1a[0] * d1a[0] + d1a[1] * d1a[1]).sqrt();
    let kappa_apex = spec.curvature(t_apex);
    if kappa_apex <= 1e-10 {
        return Err(GeometryError::FlatContact(kappa_apex));
    }
    for j in 0..m {
        let t = 2.0 * PI * j as f64 / m as f64;
        let dt = angular_dist(t, t_apex);
        if dt > 0.3 && spec.point(t)[1] < y_apex + 1e-5 * speed_apex.max(1.0) {
            return Err(GeometryError::AmbiguousContact);
        }
    }
    let lambda = kappa_apex;
    let apex = spec.point(t_apex);
    let offset = [-apex[0], epsilon / 2.0 - apex[1]];

    // graded parametrization: Poisson width = gap scale in parameter units
    let w = (epsilon / lambda).sqrt() / speed_apex;
    let grade = if w >= 0.5 {
        GradeMap::uniform()
    } else {
        GradeMap { c: 2.0, r: 1.0 - w }
    };
    let curve1 = PlacedCurve { spec: spec.clone(), offset, t_apex, grade, mirrored: false };
    let curve2 = PlacedCurve { mirrored: true, ..curve1.clone() };

    // R0: largest window with single-valued graphs and |H'| <= 1; march from
    // the apex until |dy/dx| = |d1.y/d1.x| reaches 1 on either side.
    let mut x_lim = f64::INFINITY;
    let mut th_window = (-PI / 2.0, PI / 2.0);
    for dir in [-1.0f64, 1.0] {
        let mut th = 0.0;
        let step = 1e-3;
        loop {
            th += step * dir;
            if th.abs() > PI {
                break;
            }
            let t = t_apex + th;
            let d = spec.d1(t);
            if d[0].abs() < 1e-14 || (d[1] / d[0]).abs() >= 1.0 {
                let x_here = (spec.point(t)[0] + offset[0]).abs();
                x_lim = x_lim.min(x_here);
                if dir < 0.0 {
                    th_window.0 = th;
                } else {
                    th_window.1 = th;
                }
                break;
            }
        }
    }
    let r0 = x_lim / 2.0;

    Ok(InclusionPair { spec: spec.clone(), epsilon, lambda, curve1, curve2, r0, th_window })
}

fn angular_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Discretizes the pair with n nodes per curve. Curve 2 is the exact
/// nodewise mirror of curve 1.
pub fn discretize(pair: &InclusionPair, n: usize) -> Result<Mesh, GeometryError> {
    if n < 32 || n % 2 != 0 {
        return Err(GeometryError::BadNodeCount(n));
    }
    let mesh1 = CurveMesh::build(&pair.curve1, n);
    let mesh2 = mesh1.mirrored();
    // resolution heuristic: spacing at the contact point vs gap scale
    let apex_spacing = {
        let a = mesh1.nodes[0];
        let b = mesh1.nodes[1];
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    };
    let under_resolved = apex_spacing > (pair.epsilon / pair.lambda).sqrt() / 4.0;
    let gap = GapRegion {
        epsilon: pair.epsilon,
        lambda: pair.lambda,
        r0: pair.r0,
        th_window: pair.th_window,
        curve1: pair.curve1.clone(),
    };
    Ok(Mesh { curves: vec![mesh1, mesh2], gap: Some(gap), under_resolved })
}

/// delta(x1) = eps + H1 - H2 from the exact parametrizations; by the mirror
/// symmetry this is twice the height of the lower boundary of D1.
pub fn gap_width(region: &GapRegion, x1: f64) -> Result<f64, GeometryError> {
    if x1.abs() >= 2.0 * region.r0 {
        return Err(GeometryError::OutsideGapWindow { x1, limit: 2.0 * region.r0 });
    }
    Ok(region.epsilon + region.h1(x1) - region.h2(x1))
}

/// Node count heuristic, clamped to the desk-scale window [256, 1024].
/// On the gap-adapted meshes the operator error decays like
/// exp(-c N sqrt(eps lambda)); resonance roots sit in an O(delta) balance
/// and need that error well below the contrast, hence N ~ 12 sqrt(lambda/eps).
pub fn auto_node_count(epsilon: f64, lambda: f64) -> usize {
    let raw = 12.0 * (lambda / epsilon).sqrt();
    let n = (raw.ceil() as usize).max(256).min(1024);
    n + n % 2
}
