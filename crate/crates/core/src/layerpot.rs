//! Nystrom discretization of the boundary operators and off-boundary
//! evaluation of layer potentials.
//!
//! Same-curve blocks split each kernel into a ln(4 sin^2((u-v)/2)) part,
//! integrated with the spectral product-quadrature weights, plus a smooth
//! remainder on the trapezoid rule; cross-curve blocks are smooth and use
//! the plain trapezoid rule. Off-boundary evaluation close to a curve
//! upsamples the density (trigonometric interpolation) and the geometry
//! (exact parametrization) before applying the plain rule.

use crate::geometry::{CurveMesh, Mesh};
use crate::linalg::{self, CMat};
use crate::specfun::{self, SpecfunError, EULER_GAMMA};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerpotError {
    #[error("evaluation point ({0}, {1}) lies on the boundary")]
    PointOnBoundary(f64, f64),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

/// Which operator a matrix realizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelTag {
    /// S_D with the pure log kernel (1/2pi) ln|x-y|.
    SingleStatic,
    /// hat-S_D^k = S_D + eta_k * integral.
    SingleHat { k: Complex64 },
    /// S_D^k with the exact Hankel kernel.
    SingleHelmholtz { k: Complex64 },
    /// K_D^* (static adjoint Neumann-Poincare).
    AdjointStatic,
    /// K_D^{k,*} with the exact Hankel kernel.
    AdjointHelmholtz { k: Complex64 },
    /// S^(1)_{D,1}: kernel b1 |x-y|^2.
    ExpansionS1,
    /// S^(2)_{D,1}: kernel |x-y|^2 (b1 ln|x-y| + c1).
    ExpansionS2,
    /// K^(1)_{D,1}: conormal derivative of the S^(1) kernel.
    ExpansionK1,
    /// K^(2)_{D,1}: conormal derivative of the S^(2) kernel.
    ExpansionK2,
}

/// Dense realization of a boundary operator on the full boundary
/// (block-indexed by curve).
#[derive(Debug, Clone)]
pub struct BoundaryOperatorMatrix {
    pub mat: CMat,
    pub tag: KernelTag,
    /// Start index of each curve's block.
    pub offsets: Vec<usize>,
}

impl BoundaryOperatorMatrix {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        linalg::matvec(self.mat.as_ref(), v)
    }
}

/// Complex boundary density with its cached integral.
#[derive(Debug, Clone)]
pub struct Density {
    pub values: Vec<Complex64>,
    pub integral: Complex64,
}

impl Density {
    pub fn new(mesh: &Mesh, values: Vec<Complex64>) -> Self {
        let w = mesh.all_weights();
        assert_eq!(w.len(), values.len());
        let integral = w.iter().zip(&values).map(|(wi, vi)| wi * vi).sum();
        Density { values, integral }
    }

    /// Indicator of curve `idx` as a density (the chi_{partial D_i} data).
    pub fn indicator(mesh: &Mesh, idx: usize) -> Self {
        let mut values = Vec::with_capacity(mesh.total_nodes());
        for (ci, c) in mesh.curves.iter().enumerate() {
            let v = if ci == idx { 1.0 } else { 0.0 };
            values.extend(std::iter::repeat(Complex64::new(v, 0.0)).take(c.n));
        }
        Density::new(mesh, values)
    }

    /// Integral over curve `idx` only.
    pub fn integral_over(&self, mesh: &Mesh, idx: usize) -> Complex64 {
        let mut start = 0;
        for c in mesh.curves.iter().take(idx) {
            start += c.n;
        }
        let c = &mesh.curves[idx];
        c.weights
            .iter()
            .zip(&self.values[start..start + c.n])
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Discrete L^2(partial D) norm.
    pub fn l2_norm(&self, mesh: &Mesh) -> f64 {
        let w = mesh.all_weights();
        w.iter()
            .zip(&self.values)
            .map(|(wi, vi)| wi * vi.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Quadrature weights R_m of the spectral rule for the ln(4 sin^2) kernel:
/// R(d) = -(2 pi / n) sum_{l<n} cos(l d)/l - (pi/n^2) cos(n d), n = N/2,
/// returned as the circulant profile over index distance m.
pub(crate) fn kress_profile(n_nodes: usize) -> Vec<f64> {
    let n = n_nodes / 2;
    let mut prof = vec![0.0f64; n_nodes];
    for (m, p) in prof.iter_mut().enumerate() {
        let d = 2.0 * PI * m as f64 / n_nodes as f64;
        let mut s = 0.0;
        for l in 1..n {
            s += (l as f64 * d).cos() / l as f64;
        }
        *p = -(2.0 * PI / n as f64) * s - PI / (n as f64 * n as f64) * (n as f64 * d).cos();
    }
    prof
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])
}

/// Smooth companion of the log split: 0.5 ln(r^2 / (4 sin^2((u_i-u_j)/2))),
/// with the diagonal limit ln|x'(u_i)|.
#[inline]
fn half_ln_ratio(c: &CurveMesh, i: usize, j: usize) -> f64 {
    if i == j {
        return c.speed[i].ln();
    }
    let d = PI * (i as f64 - j as f64) / c.n as f64;
    let s2 = 4.0 * d.sin().powi(2);
    0.5 * (dist2(c.nodes[i], c.nodes[j]) / s2).ln()
}

struct BlockCtx<'a> {
    target: &'a CurveMesh,
    source: &'a CurveMesh,
    same: bool,
    kress: Option<&'a [f64]>,
    h: f64,
}

impl BlockCtx<'_> {
    #[inline]
    fn kress_w(&self, i: usize, j: usize) -> f64 {
        let n = self.source.n;
        let m = (i as isize - j as isize).unsigned_abs() % n;
        self.kress.unwrap()[m.min(n - m)]
    }
}

fn locate(offsets: &[usize], row: usize) -> (usize, usize) {
    for (ci, &off) in offsets.iter().enumerate().rev() {
        if row >= off {
            return (ci, row - off);
        }
    }
    unreachable!()
}

/// Generic block assembly: `entry(ctx, i, j)` fills one matrix element,
/// row-parallel over the immutable mesh.
fn assemble_blocks(
    mesh: &Mesh,
    tag: KernelTag,
    entry: impl Fn(&BlockCtx<'_>, usize, usize) -> Complex64 + Sync,
) -> BoundaryOperatorMatrix {
    let total = mesh.total_nodes();
    let mut offsets = Vec::with_capacity(mesh.curves.len());
    let mut acc = 0;
    for c in &mesh.curves {
        offsets.push(acc);
        acc += c.n;
    }
    let profiles: Vec<Vec<f64>> = mesh.curves.iter().map(|c| kress_profile(c.n)).collect();
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    (0..total)
        .into_par_iter()
        .map(|row| {
            let (ti, i) = locate(&offsets, row);
            let mut r = vec![Complex64::default(); total];
            for (sj, src) in mesh.curves.iter().enumerate() {
                let same = sj == ti;
                let ctx = BlockCtx {
                    target: &mesh.curves[ti],
                    source: src,
                    same,
                    kress: if same { Some(&profiles[sj]) } else { None },
                    h: 2.0 * PI / src.n as f64,
                };
                for j in 0..src.n {
                    r[offsets[sj] + j] = entry(&ctx, i, j);
                }
            }
            r
        })
        .collect_into_vec(&mut rows);
    let mat = linalg::from_fn(total, total, |i, j| rows[i][j]);
    BoundaryOperatorMatrix { mat, tag, offsets }
}

/// H_0^(1)(z) via the ascending series for small |z|, falling back to the
/// validated large-argument branch otherwise.
#[inline]
fn h0_series(z: Complex64) -> Complex64 {
    if z.norm() > specfun::Z_SWITCH {
        return specfun::hankel1(0, z).expect("hankel argument out of validated range");
    }
    let j0 = specfun::bessel_j0(z);
    j0 + Complex64::i()
        * (2.0 / PI)
        * (((z * 0.5).ln() + EULER_GAMMA) * j0 + specfun::y0_series(z))
}

/// H_1^(1)(z) via the ascending series, same fallback.
#[inline]
fn h1_series(z: Complex64) -> Complex64 {
    if z.norm() > specfun::Z_SWITCH {
        return specfun::hankel1(1, z).expect("hankel argument out of validated range");
    }
    let j1 = specfun::bessel_j1(z);
    j1 + Complex64::i()
        * ((2.0 / PI) * ((z * 0.5).ln() + EULER_GAMMA) * j1
            - 2.0 / (PI * z)
            - z / (2.0 * PI) * specfun::y1_series(z))
}

/// Assembles S_D (static), hat-S_D^k, or S_D^k per the tag.
pub fn assemble_s(mesh: &Mesh, tag: KernelTag) -> BoundaryOperatorMatrix {
    match tag {
        KernelTag::SingleStatic => assemble_blocks(mesh, tag, |ctx, i, j| {
            let sj = ctx.source.speed[j];
            if ctx.same {
                let v = 0.5 * ctx.kress_w(i, j) + ctx.h * half_ln_ratio(ctx.source, i, j);
                Complex64::new(v / (2.0 * PI) * sj, 0.0)
            } else {
                let r2 = dist2(ctx.target.nodes[i], ctx.source.nodes[j]);
                Complex64::new(0.25 * r2.ln() / PI * ctx.h * sj, 0.0)
            }
        }),
        KernelTag::SingleHat { k } => {
            let mut op = assemble_s(mesh, KernelTag::SingleStatic);
            let eta = specfun::eta(k).expect("eta of nonzero k").eta_k;
            let w = mesh.all_weights();
            for i in 0..op.mat.nrows() {
                for (j, wj) in w.iter().enumerate() {
                    op.mat[(i, j)] += linalg::cf(eta * wj);
                }
            }
            op.tag = tag;
            op
        }
        KernelTag::SingleHelmholtz { k } => assemble_blocks(mesh, tag, move |ctx, i, j| {
            let sj = ctx.source.speed[j];
            if ctx.same {
                if i == j {
                    let eta = (k.ln() + EULER_GAMMA - std::f64::consts::LN_2) / (2.0 * PI)
                        - Complex64::i() * 0.25;
                    let m2 = ctx.source.speed[i].ln() / (2.0 * PI) + eta;
                    // M1(t,t) = J0(0)/(4 pi) still multiplies the log weight
                    return (ctx.kress_w(i, i) / (4.0 * PI) + ctx.h * m2) * sj;
                }
                let r = dist2(ctx.source.nodes[i], ctx.source.nodes[j]).sqrt();
                let kr = k * r;
                let j0 = specfun::bessel_j0(kr);
                let m1 = j0 / (4.0 * PI);
                let m2 = j0 * (half_ln_ratio(ctx.source, i, j) + (k * 0.5).ln() + EULER_GAMMA)
                    / (2.0 * PI)
                    + specfun::y0_series(kr) / (2.0 * PI)
                    - Complex64::i() * 0.25 * j0;
                (m1 * ctx.kress_w(i, j) + ctx.h * m2) * sj
            } else {
                let r = dist2(ctx.target.nodes[i], ctx.source.nodes[j]).sqrt();
                -Complex64::i() * 0.25 * h0_series(k * r) * ctx.h * sj
            }
        }),
        _ => panic!("assemble_s: {tag:?} is not a single-layer tag"),
    }
}

/// Assembles K_D^* (static) or K_D^{k,*} per the tag. The diagonal carries
/// the curvature limit kappa/(4 pi) of the static kernel; the Helmholtz
/// remainder vanishes there.
pub fn assemble_kstar(mesh: &Mesh, tag: KernelTag) -> BoundaryOperatorMatrix {
    match tag {
        KernelTag::AdjointStatic => assemble_blocks(mesh, tag, |ctx, i, j| {
            let sj = ctx.source.speed[j];
            if ctx.same && i == j {
                return Complex64::new(ctx.h * ctx.source.curvature[i] * sj / (4.0 * PI), 0.0);
            }
            let x = ctx.target.nodes[i];
            let y = ctx.source.nodes[j];
            let nu = ctx.target.normal[i];
            let r2 = dist2(x, y);
            let dot = (x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1];
            Complex64::new(ctx.h * dot / (2.0 * PI * r2) * sj, 0.0)
        }),
        KernelTag::AdjointHelmholtz { k } => assemble_blocks(mesh, tag, move |ctx, i, j| {
            let sj = ctx.source.speed[j];
            if ctx.same {
                if i == j {
                    return Complex64::new(ctx.h * ctx.source.curvature[i] * sj / (4.0 * PI), 0.0);
                }
                let x = ctx.source.nodes[i];
                let y = ctx.source.nodes[j];
                let nu = ctx.source.normal[i];
                let r = dist2(x, y).sqrt();
                let dot = (x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1];
                let dot_r = dot / r;
                let kr = k * r;
                let j1 = specfun::bessel_j1(kr);
                let n0 = dot / (2.0 * PI * r * r);
                let p = -(k / (2.0 * PI)) * j1 * dot_r;
                let q = (-(k / (2.0 * PI)) * ((k * 0.5).ln() + EULER_GAMMA) * j1
                    + Complex64::i() * 0.25 * k * j1
                    + k * k * r / (8.0 * PI) * specfun::y1_series(kr))
                    * dot_r;
                let m2 = n0 + p * half_ln_ratio(ctx.source, i, j) + q;
                (0.5 * p * ctx.kress_w(i, j) + ctx.h * m2) * sj
            } else {
                let x = ctx.target.nodes[i];
                let y = ctx.source.nodes[j];
                let nu = ctx.target.normal[i];
                let r = dist2(x, y).sqrt();
                let dot = (x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1];
                Complex64::i() * 0.25 * k * h1_series(k * r) * dot / r * ctx.h * sj
            }
        }),
        _ => panic!("assemble_kstar: {tag:?} is not an adjoint tag"),
    }
}

/// The four truncated first-order expansion operators
/// (S^(1)_{D,1}, S^(2)_{D,1}, K^(1)_{D,1}, K^(2)_{D,1}).
pub fn assemble_expansion_terms(
    mesh: &Mesh,
) -> (
    BoundaryOperatorMatrix,
    BoundaryOperatorMatrix,
    BoundaryOperatorMatrix,
    BoundaryOperatorMatrix,
) {
    let b1 = specfun::b1();
    let c1 = specfun::c1();

    let s1 = assemble_blocks(mesh, KernelTag::ExpansionS1, move |ctx, i, j| {
        if ctx.same && i == j {
            return Complex64::default();
        }
        let r2 = dist2(ctx.target.nodes[i], ctx.source.nodes[j]);
        Complex64::new(b1 * r2 * ctx.h * ctx.source.speed[j], 0.0)
    });

    let s2 = assemble_blocks(mesh, KernelTag::ExpansionS2, move |ctx, i, j| {
        let sj = ctx.source.speed[j];
        if ctx.same {
            if i == j {
                return Complex64::default();
            }
            let r2 = dist2(ctx.source.nodes[i], ctx.source.nodes[j]);
            let m1 = 0.5 * b1 * r2;
            let m2 = r2 * (b1 * half_ln_ratio(ctx.source, i, j) + c1);
            (m1 * ctx.kress_w(i, j) + ctx.h * m2) * sj
        } else {
            let r2 = dist2(ctx.target.nodes[i], ctx.source.nodes[j]);
            r2 * (0.5 * b1 * r2.ln() + c1) * ctx.h * sj
        }
    });

    let k1 = assemble_blocks(mesh, KernelTag::ExpansionK1, move |ctx, i, j| {
        if ctx.same && i == j {
            return Complex64::default();
        }
        let x = ctx.target.nodes[i];
        let y = ctx.source.nodes[j];
        let nu = ctx.target.normal[i];
        let dot = (x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1];
        Complex64::new(2.0 * b1 * dot * ctx.h * ctx.source.speed[j], 0.0)
    });

    let k2 = assemble_blocks(mesh, KernelTag::ExpansionK2, move |ctx, i, j| {
        let sj = ctx.source.speed[j];
        let x = ctx.target.nodes[i];
        let y = ctx.source.nodes[j];
        let nu = ctx.target.normal[i];
        if ctx.same {
            if i == j {
                return Complex64::default();
            }
            let dot = (x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1];
            let m1 = b1 * dot;
            let m2 = dot * (2.0 * b1 * half_ln_ratio(ctx.source, i, j) + b1 + 2.0 * c1);
            (m1 * ctx.kress_w(i, j) + ctx.h * m2) * sj
        } else {
            let r2 = dist2(x, y);
            let dot = (x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1];
            dot * (b1 * r2.ln() + b1 + 2.0 * c1) * ctx.h * sj
        }
    });

    (s1, s2, k1, k2)
}

/// Cap on the upsampling factor for close evaluation.
pub const UPSAMPLE_CAP: usize = 16;

/// Wavenumber of an evaluation: None selects the static log kernel.
pub type EvalWavenumber = Option<Complex64>;

/// Off-boundary evaluation plan: fine meshes and interpolated densities at
/// one upsampling level. Building the plan is the expensive part, so batch
/// evaluation reuses it across points.
pub struct EvalPlan {
    fine: Vec<(CurveMesh, Vec<Complex64>)>,
    pub m_per_curve: usize,
}

impl EvalPlan {
    pub fn new(mesh: &Mesh, density: &Density, m_per_curve: usize) -> Self {
        let mut fine = Vec::with_capacity(mesh.curves.len());
        let mut start = 0;
        for c in &mesh.curves {
            let vals = &density.values[start..start + c.n];
            start += c.n;
            if m_per_curve == c.n {
                fine.push((c.clone(), vals.to_vec()));
            } else {
                let cf = c.refined(m_per_curve);
                let vf = trig_upsample(vals, m_per_curve);
                fine.push((cf, vf));
            }
        }
        EvalPlan { fine, m_per_curve }
    }

    pub fn eval(&self, k: EvalWavenumber, x: [f64; 2]) -> Result<Complex64, LayerpotError> {
        let mut u = Complex64::default();
        for (c, v) in &self.fine {
            let h = 2.0 * PI / c.n as f64;
            for j in 0..c.n {
                let r = dist2(x, c.nodes[j]).sqrt();
                let g = match k {
                    Some(kk) => -Complex64::i() * 0.25 * h0_series(kk * r),
                    None => Complex64::new(r.ln() / (2.0 * PI), 0.0),
                };
                u += g * v[j] * h * c.speed[j];
            }
        }
        Ok(u)
    }

    pub fn eval_grad(
        &self,
        k: EvalWavenumber,
        x: [f64; 2],
    ) -> Result<[Complex64; 2], LayerpotError> {
        let mut g = [Complex64::default(); 2];
        for (c, v) in &self.fine {
            let h = 2.0 * PI / c.n as f64;
            for j in 0..c.n {
                let dx = [x[0] - c.nodes[j][0], x[1] - c.nodes[j][1]];
                let r = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
                let radial = match k {
                    Some(kk) => Complex64::i() * 0.25 * kk * h1_series(kk * r),
                    None => Complex64::new(1.0 / (2.0 * PI * r), 0.0),
                };
                let f = radial * v[j] * h * c.speed[j] / r;
                g[0] += f * dx[0];
                g[1] += f * dx[1];
            }
        }
        Ok(g)
    }
}

/// Trigonometric interpolation of periodic nodal values from n to m nodes.
pub fn trig_upsample(values: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = values.len();
    assert!(m >= n && n % 2 == 0);
    let half = (n / 2) as i64;
    let mut coeff = Vec::with_capacity(n);
    for f in (-half + 1)..half {
        let mut c = Complex64::default();
        for (j, v) in values.iter().enumerate() {
            let ang = -2.0 * PI * (f as f64) * (j as f64) / n as f64;
            c += v * Complex64::from_polar(1.0, ang);
        }
        coeff.push(c / n as f64);
    }
    // Nyquist mode interpolated symmetrically as cos((n/2) u)
    let mut nyq = Complex64::default();
    for (j, v) in values.iter().enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        nyq += v * sign;
    }
    nyq /= n as f64;
    (0..m)
        .map(|jf| {
            let u = 2.0 * PI * jf as f64 / m as f64;
            let mut v = Complex64::default();
            for (idx, f) in ((-half + 1)..half).enumerate() {
                v += coeff[idx] * Complex64::from_polar(1.0, f as f64 * u);
            }
            v + nyq * (half as f64 * u).cos()
        })
        .collect()
}

fn min_node_distance(mesh: &Mesh, x: [f64; 2]) -> f64 {
    let mut d2 = f64::INFINITY;
    for c in &mesh.curves {
        for p in &c.nodes {
            d2 = d2.min(dist2(x, *p));
        }
    }
    d2.sqrt()
}

fn max_spacing(mesh: &Mesh) -> f64 {
    mesh.curves.iter().map(|c| c.max_spacing()).fold(0.0, f64::max)
}

/// Upsampling level for a point at distance d: the direct rule when the
/// point is at least 5 node spacings away, otherwise m >= (8 h / d) n,
/// capped at 16 n.
pub fn upsample_level(mesh: &Mesh, d: f64) -> usize {
    let n = mesh.n_per_curve();
    let h = max_spacing(mesh);
    if d >= 5.0 * h {
        return n;
    }
    let factor = ((8.0 * h / d).ceil() as usize).max(1).min(UPSAMPLE_CAP);
    let m = factor * n;
    m + m % 2
}

fn guard_on_boundary(mesh: &Mesh, x: [f64; 2], d: f64) -> Result<(), LayerpotError> {
    if d < 1e-12 * mesh.diameter() {
        return Err(LayerpotError::PointOnBoundary(x[0], x[1]));
    }
    Ok(())
}

/// S_D^k[density](x) off the boundary (k = None for the static log kernel).
pub fn eval_potential(
    mesh: &Mesh,
    density: &Density,
    k: EvalWavenumber,
    x: [f64; 2],
) -> Result<Complex64, LayerpotError> {
    let d = min_node_distance(mesh, x);
    guard_on_boundary(mesh, x, d)?;
    let plan = EvalPlan::new(mesh, density, upsample_level(mesh, d));
    plan.eval(k, x)
}

/// Gradient of the single-layer potential at x (analytically differentiated
/// kernel: grad_x G = (ik/4) H_1^(1)(k r) (x-y)/r).
pub fn eval_gradient(
    mesh: &Mesh,
    density: &Density,
    k: EvalWavenumber,
    x: [f64; 2],
) -> Result<[Complex64; 2], LayerpotError> {
    let d = min_node_distance(mesh, x);
    guard_on_boundary(mesh, x, d)?;
    let plan = EvalPlan::new(mesh, density, upsample_level(mesh, d));
    plan.eval_grad(k, x)
}

/// Potential and gradient at many points, reusing one plan per upsampling
/// level.
pub fn eval_many(
    mesh: &Mesh,
    density: &Density,
    k: EvalWavenumber,
    points: &[[f64; 2]],
) -> Result<Vec<(Complex64, [Complex64; 2])>, LayerpotError> {
    let mut plans: Vec<(usize, EvalPlan)> = Vec::new();
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let d = min_node_distance(mesh, x);
        guard_on_boundary(mesh, x, d)?;
        let m = upsample_level(mesh, d);
        if !plans.iter().any(|(lm, _)| *lm == m) {
            plans.push((m, EvalPlan::new(mesh, density, m)));
        }
        let plan = &plans.iter().find(|(lm, _)| *lm == m).unwrap().1;
        out.push((plan.eval(k, x)?, plan.eval_grad(k, x)?));
    }
    Ok(out)
}

/// Distance from a boundary point to the nearest node of a different curve.
fn clearance_to_other_curves(mesh: &Mesh, ci: usize, x: [f64; 2]) -> f64 {
    let mut d2 = f64::INFINITY;
    for (cj, c) in mesh.curves.iter().enumerate() {
        if cj == ci {
            continue;
        }
        for p in &c.nodes {
            d2 = d2.min(dist2(x, *p));
        }
    }
    d2.sqrt()
}

/// Discrete-L2 relative residual of the jump relation
/// (d_nu S[phi])_+ - (d_nu S[phi])_- = phi, realized by second-order
/// one-sided extrapolation of the conormal traces along the normal.
/// `sign` flips the exterior trace and exists for the mutation smoke test;
/// the physical check uses sign = 1.
pub fn jump_relation_residual(
    mesh: &Mesh,
    density: &Density,
    k: EvalWavenumber,
    sign: f64,
) -> Result<f64, LayerpotError> {
    let plan = EvalPlan::new(mesh, density, UPSAMPLE_CAP * mesh.n_per_curve());
    let mut num = 0.0;
    let mut den = 0.0;
    let mut start = 0;
    for (ci, c) in mesh.curves.iter().enumerate() {
        for j in 0..c.n {
            let x = c.nodes[j];
            let nu = c.normal[j];
            let mut h = 0.02 / (1.0 + c.curvature[j].abs());
            let clear = clearance_to_other_curves(mesh, ci, x);
            if clear.is_finite() {
                h = h.min(0.2 * clear);
            }
            let trace = |side: f64| -> Result<Complex64, LayerpotError> {
                let g1 =
                    plan.eval_grad(k, [x[0] + side * h * nu[0], x[1] + side * h * nu[1]])?;
                let g2 = plan.eval_grad(
                    k,
                    [x[0] + 2.0 * side * h * nu[0], x[1] + 2.0 * side * h * nu[1]],
                )?;
                let d1 = g1[0] * nu[0] + g1[1] * nu[1];
                let d2 = g2[0] * nu[0] + g2[1] * nu[1];
                Ok(2.0 * d1 - d2)
            };
            let jump = sign * trace(1.0)? - trace(-1.0)?;
            let w = c.weights[j];
            num += w * (jump - density.values[start + j]).norm_sqr();
            den += w * density.values[start + j].norm_sqr();
        }
        start += c.n;
    }
    Ok((num / den).sqrt())
}

/// Area integral of hat-S^k_D[phi] over inclusion `idx` by a radial
/// Gauss-Legendre x angular trapezoid rule on the star-shaped interior,
/// with close evaluation near the boundary.
pub fn integrate_potential_over_inclusion(
    mesh: &Mesh,
    density: &Density,
    k: Complex64,
    idx: usize,
    n_radial: usize,
) -> Result<Complex64, LayerpotError> {
    let c = &mesh.curves[idx];
    let (gl_x, gl_w) = gauss_legendre(n_radial);
    let plan = EvalPlan::new(mesh, density, UPSAMPLE_CAP * mesh.n_per_curve());
    let eta = specfun::eta(k).expect("eta of nonzero k").eta_k;
    let h = 2.0 * PI / c.n as f64;
    let centroid = c.centroid;
    let mut total = Complex64::default();
    for j in 0..c.n {
        let p = c.nodes[j];
        let nu = c.normal[j];
        let sp = c.speed[j];
        // tangent = rot(-90) normal * speed; Jacobian = rho |(p - c0) x p'(u)|
        let tx = -nu[1] * sp;
        let ty = nu[0] * sp;
        let rel = [p[0] - centroid[0], p[1] - centroid[1]];
        let cross = rel[0] * ty - rel[1] * tx;
        for (xi, wi) in gl_x.iter().zip(&gl_w) {
            let rho = 0.5 * (xi + 1.0);
            let w = 0.5 * wi;
            let pt = [centroid[0] + rho * rel[0], centroid[1] + rho * rel[1]];
            let u = plan.eval(None, pt)? + eta * density.integral;
            total += u * rho * cross * w * h;
        }
    }
    Ok(total)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let legendre = |t: f64| -> (f64, f64) {
        let (mut p0, mut p1) = (1.0f64, t);
        for k in 2..=n {
            let p2 = ((2.0 * k as f64 - 1.0) * t * p1 - (k as f64 - 1.0) * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
        (p1, dp)
    };
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(t);
        x[i] = -t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize, make_pair, CurveSpec, Mesh};

    fn unit_circle(n: usize) -> Mesh {
        Mesh::single(&CurveSpec::Disk { radius: 1.0 }, n).unwrap()
    }

    fn circle(r: f64, n: usize) -> Mesh {
        Mesh::single(&CurveSpec::Disk { radius: r }, n).unwrap()
    }

    fn fourier_vec(mesh: &Mesh, m: i32) -> Vec<Complex64> {
        let n = mesh.curves[0].n;
        (0..n)
            .map(|j| Complex64::from_polar(1.0, m as f64 * 2.0 * PI * j as f64 / n as f64))
            .collect()
    }

    // Analytic Fourier oracle on a circle of radius R:
    //   S[e^{i m t}] = -R/(2|m|) e^{i m t}  (m != 0),  S[1] = R ln R.
    #[test]
    fn static_s_circle_fourier_eigenvalues() {
        for (r, n) in [(1.0, 128usize), (2.0, 128)] {
            let mesh = circle(r, n);
            let s = assemble_s(&mesh, KernelTag::SingleStatic);
            let ones = vec![Complex64::new(1.0, 0.0); n];
            let s1 = s.apply(&ones);
            for v in &s1 {
                assert!((v - r * r.ln()).norm() < 1e-10, "r={r}: S[1] = {v}");
            }
            for m in [1i32, 3, 7] {
                let v = fourier_vec(&mesh, m);
                let sv = s.apply(&v);
                let lam = -r / (2.0 * m as f64);
                for (a, b) in sv.iter().zip(&v) {
                    assert!((a - lam * b).norm() < 1e-10, "m={m}");
                }
            }
        }
    }

    // K*: on a circle the static adjoint NP operator is the rank-one
    // averaging (1/(4 pi R)) integral ds.
    #[test]
    fn static_kstar_circle_rank_one() {
        let n = 128;
        let r = 2.0;
        let mesh = circle(r, n);
        let kst = assemble_kstar(&mesh, KernelTag::AdjointStatic);
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let k1 = kst.apply(&ones);
        for v in &k1 {
            assert!((v - 0.5).norm() < 1e-10, "K*[1] = {v}");
        }
        for m in [1i32, 4] {
            let kv = kst.apply(&fourier_vec(&mesh, m));
            for v in &kv {
                assert!(v.norm() < 1e-10, "K*[e^{{i{m}t}}] = {v}");
            }
        }
        // entrywise it is the uniform row 1/(4 pi R) * weight
        let w = 2.0 * PI / n as f64 * r;
        for i in 0..n {
            for j in 0..n {
                let e = linalg::cn(kst.mat[(i, j)]);
                assert!((e - w / (4.0 * PI * r)).norm() < 1e-12);
            }
        }
    }

    // hat-S on the unit circle: constant eigenvalue 2 pi eta_k != 0 even
    // though S itself annihilates constants there.
    #[test]
    fn hat_s_invertible_on_unit_capacity_circle() {
        let n = 64;
        let mesh = unit_circle(n);
        let k = Complex64::new(1e-3, 0.0);
        let sh = assemble_s(&mesh, KernelTag::SingleHat { k });
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let sv = sh.apply(&ones);
        let expect = 2.0 * PI * specfun::eta(k).unwrap().eta_k;
        for v in &sv {
            assert!((v - expect).norm() < 1e-10 * expect.norm());
        }
        let smin = linalg::sigma_min(&sh.mat);
        assert!(smin > 1e-3, "hat-S stays invertible, sigma_min = {smin:.2e}");
        // while S itself has a near-null vector
        let s = assemble_s(&mesh, KernelTag::SingleStatic);
        assert!(linalg::sigma_min(&s.mat) < 1e-12);
    }

    // Helmholtz S via the Kress split agrees with the analytic circle value
    // S^k[1](x) = -(i pi R / 2) J0(kR) H0(kR) on a circle of radius R.
    #[test]
    fn helmholtz_s_circle_constant() {
        let n = 96;
        let r = 1.3;
        let k = Complex64::new(0.7, 0.0);
        let mesh = circle(r, n);
        let s = assemble_s(&mesh, KernelTag::SingleHelmholtz { k });
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let sv = s.apply(&ones);
        let kr = k * r;
        let exact = -Complex64::i() * 0.5 * PI * r * specfun::bessel_j0(kr) * h0_series(kr);
        for v in &sv {
            assert!(
                (v - exact).norm() < 1e-9 * exact.norm(),
                "S^k[1] = {v}, exact {exact}"
            );
        }
    }

    // W S symmetric in the arclength inner product (W = diag weights).
    #[test]
    fn static_s_weighted_symmetry() {
        let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, 1e-2).unwrap();
        let mesh = discretize(&pair, 96).unwrap();
        let s = assemble_s(&mesh, KernelTag::SingleStatic);
        let w = mesh.all_weights();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        let nn = s.dim();
        for i in 0..nn {
            for j in 0..nn {
                let a = w[i] * linalg::cn(s.mat[(i, j)]);
                let b = w[j] * linalg::cn(s.mat[(j, i)]);
                worst = worst.max((a - b).norm());
                scale = scale.max(a.norm());
            }
        }
        assert!(worst <= 1e-10 * scale.max(1.0), "asymmetry {worst:.2e}");
    }

    // Mirror symmetry: the matrix commutes with reflection-swap.
    #[test]
    fn operator_commutes_with_reflection_swap() {
        let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, 1e-2).unwrap();
        let mesh = discretize(&pair, 64).unwrap();
        let n = 64;
        let perm = |idx: usize| -> usize {
            // node j of curve c maps to node (n-j)%n of the other curve
            let (c, j) = (idx / n, idx % n);
            (1 - c) * n + (n - j) % n
        };
        for tag in [
            KernelTag::SingleStatic,
            KernelTag::SingleHelmholtz { k: Complex64::new(0.05, 0.0) },
        ] {
            let s = assemble_s(&mesh, tag);
            let mut worst = 0.0f64;
            for i in 0..2 * n {
                for j in 0..2 * n {
                    let a = linalg::cn(s.mat[(i, j)]);
                    let b = linalg::cn(s.mat[(perm(i), perm(j))]);
                    worst = worst.max((a - b).norm());
                }
            }
            assert!(worst <= 1e-12, "{tag:?}: commutator {worst:.2e}");
        }
    }

    // dim ker S_D <= 1: at most one singular value below 1e-6 ||S|| on every
    // test geometry; exactly one for the unit-capacity geometry.
    #[test]
    fn kernel_dimension_bound() {
        let geometries: Vec<Mesh> = vec![
            unit_circle(96),
            circle(2.0, 96),
            discretize(&make_pair(&CurveSpec::Disk { radius: 1.0 }, 1e-2).unwrap(), 96).unwrap(),
            discretize(&make_pair(&CurveSpec::Ellipse { a: 1.0, b: 0.5 }, 1e-2).unwrap(), 96)
                .unwrap(),
        ];
        for (gi, mesh) in geometries.iter().enumerate() {
            let s = assemble_s(mesh, KernelTag::SingleStatic);
            let sv = linalg::singular_values(&s.mat);
            let small = sv.iter().filter(|v| **v < 1e-6 * sv[0]).count();
            assert!(small <= 1, "geometry {gi}: {small} near-null singular values");
            if gi == 0 {
                assert_eq!(small, 1, "unit circle has exactly one near-null value");
            }
        }
    }

    // hat-S invertibility for k over [1e-5, 1e-1] including unit capacity.
    #[test]
    fn hat_s_sigma_min_bounded_below() {
        let mesh = unit_circle(96);
        for &k in &[1e-5, 1e-3, 1e-1] {
            let sh = assemble_s(&mesh, KernelTag::SingleHat { k: Complex64::new(k, 0.0) });
            assert!(linalg::sigma_min(&sh.mat) > 1e-3, "k={k}");
        }
    }

    #[test]
    fn trig_upsample_reproduces_band_limited() {
        let n = 32;
        let vals: Vec<Complex64> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                Complex64::new((3.0 * t).cos() + 0.4 * (5.0 * t).sin(), (2.0 * t).sin())
            })
            .collect();
        let fine = trig_upsample(&vals, 128);
        for (jf, v) in fine.iter().enumerate() {
            let t = 2.0 * PI * jf as f64 / 128.0;
            let exact =
                Complex64::new((3.0 * t).cos() + 0.4 * (5.0 * t).sin(), (2.0 * t).sin());
            assert!((v - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn far_field_is_monopole() {
        // for |x| >> diam, S^k[phi](x) ~ (integral phi) G^k(|x - centroid|)
        let mesh = unit_circle(64);
        let vals: Vec<Complex64> = (0..64)
            .map(|j| Complex64::new(1.0 + 0.3 * (2.0 * PI * j as f64 / 64.0).cos(), 0.0))
            .collect();
        let density = Density::new(&mesh, vals);
        let k = Complex64::new(0.04, 0.0);
        let x = [2000.0, 0.0];
        let u = eval_potential(&mesh, &density, Some(k), x).unwrap();
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let mono = density.integral * specfun::green(k, r).unwrap();
        assert!((u - mono).norm() <= 1e-2 * mono.norm());
    }

    #[test]
    fn gradient_consistent_with_finite_differences() {
        let mesh = unit_circle(64);
        let vals: Vec<Complex64> = (0..64)
            .map(|j| Complex64::new((2.0 * PI * j as f64 / 64.0).sin(), 0.2))
            .collect();
        let density = Density::new(&mesh, vals);
        let k = Some(Complex64::new(0.05, 0.0));
        let x = [1.3, 0.4];
        let g = eval_gradient(&mesh, &density, k, x).unwrap();
        let h = 1e-5;
        let fdx = (eval_potential(&mesh, &density, k, [x[0] + h, x[1]]).unwrap()
            - eval_potential(&mesh, &density, k, [x[0] - h, x[1]]).unwrap())
            / (2.0 * h);
        let fdy = (eval_potential(&mesh, &density, k, [x[0], x[1] + h]).unwrap()
            - eval_potential(&mesh, &density, k, [x[0], x[1] - h]).unwrap())
            / (2.0 * h);
        assert!((g[0] - fdx).norm() < 1e-6 * g[0].norm().max(1e-3));
        assert!((g[1] - fdy).norm() < 1e-6 * g[1].norm().max(1e-3));
    }

    #[test]
    fn jump_relation_on_pair() {
        let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, 1e-2).unwrap();
        let mesh = discretize(&pair, 128).unwrap();
        // density smooth and periodic on each curve separately
        let mut vals = Vec::new();
        for c in &mesh.curves {
            for j in 0..c.n {
                let t = 2.0 * PI * j as f64 / c.n as f64;
                vals.push(Complex64::new(1.0 + 0.5 * t.cos(), 0.3 * (2.0 * t).sin()));
            }
        }
        let density = Density::new(&mesh, vals);
        let res =
            jump_relation_residual(&mesh, &density, Some(Complex64::new(0.05, 0.0)), 1.0)
                .unwrap();
        assert!(res <= 1e-3, "jump relation residual {res:.2e}");
        // mutation smoke test: flipping the exterior-trace sign must fail
        let bad =
            jump_relation_residual(&mesh, &density, Some(Complex64::new(0.05, 0.0)), -1.0)
                .unwrap();
        assert!(bad > 0.5, "corrupted jump check must fail, residual {bad:.2e}");
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(8);
        // integrates x^k exactly for k <= 15
        for k in 0..=15u32 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "k={k}: {q} vs {exact}");
        }
    }

    #[test]
    fn area_integral_matches_disk_mean_value() {
        // hat-S[phi] is harmonic inside D1 plus a constant, so its average
        // over the disk equals the center value: an independent oracle for
        // the radial-angular quadrature.
        let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, 0.05).unwrap();
        let mesh = discretize(&pair, 96).unwrap();
        let n = mesh.total_nodes();
        let vals: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((7.0 * j as f64 * 0.13).sin(), (j as f64 * 0.29).cos()))
            .collect();
        let density = Density::new(&mesh, vals);
        let k = Complex64::new(1e-3, 0.0);
        let quad = integrate_potential_over_inclusion(&mesh, &density, k, 0, 24).unwrap();
        let center = mesh.curves[0].centroid;
        let at_center = eval_potential(&mesh, &density, None, center).unwrap()
            + specfun::eta(k).unwrap().eta_k * density.integral;
        let area = mesh.curves[0].area;
        let mean_value = at_center * area;
        assert!(
            (quad - mean_value).norm() <= 2e-5 * mean_value.norm(),
            "quad {quad} vs mean-value {mean_value}"
        );
    }
}
