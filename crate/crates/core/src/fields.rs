//! Resonant eigenmode fields off the boundary, gap-field profiles, and the
//! epsilon-sweep machinery that measures the gradient blow-up laws.

use crate::geometry::{self, CurveSpec, CurveMesh, Mesh};
use crate::layerpot::{self, Density, KernelTag, LayerpotError};
use crate::resonance::{self, MediumParams, ModeClass, ResonanceError, ResonanceResult};
use crate::statics;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldsError {
    #[error(transparent)]
    Layerpot(#[from] LayerpotError),
    #[error(transparent)]
    Resonance(#[from] ResonanceError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Statics(#[from] statics::StaticsError),
    #[error("blow-up fit needs >= 4 epsilon values spanning >= 2 decades")]
    FitUnderdetermined,
    #[error("blow-up fit rejected: r^2 = {0} < 0.99")]
    FitQuality(f64),
}

/// One field sample in the gap.
#[derive(Debug, Clone, Copy)]
pub struct GapSample {
    pub x1: f64,
    pub x2: f64,
    pub u: Complex64,
    pub grad: [Complex64; 2],
}

/// Field profile through the narrow region, normalized so the boundary
/// means are +-1 (dipole) or +1, +1 (monopole).
#[derive(Debug, Clone)]
pub struct GapProfile {
    pub epsilon: f64,
    pub mode: ModeClass,
    /// Samples along the mid-gap curve x2 = midline(x1), |x1| <= R0/2,
    /// followed by samples on the vertical segment x1 = 0.
    pub samples: Vec<GapSample>,
    /// delta(x1) at each sample.
    pub delta_of_x1: Vec<f64>,
    /// Count of midline samples at the head of `samples`.
    pub n_midline: usize,
}

/// Least-squares power-law fit of gap quantities against epsilon.
#[derive(Debug, Clone, Copy)]
pub struct BlowupFit {
    /// Exponent p in value = prefactor * eps^{-p}
    /// (log value = p log(1/eps) + const).
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Winding-number test against the discretized curve.
fn point_inside(c: &CurveMesh, x: [f64; 2]) -> bool {
    let mut total = 0.0f64;
    for j in 0..c.n {
        let a = c.nodes[j];
        let b = c.nodes[(j + 1) % c.n];
        let va = [a[0] - x[0], a[1] - x[1]];
        let vb = [b[0] - x[0], b[1] - x[1]];
        let cross = va[0] * vb[1] - va[1] * vb[0];
        let dot = va[0] * vb[0] + va[1] * vb[1];
        total += cross.atan2(dot);
    }
    total.abs() > std::f64::consts::PI
}

/// Eigenmode evaluation: u = S^{k_b}[phi] inside D, u = S^k[psi] outside.
pub fn eigenmode_field(
    mesh: &Mesh,
    medium: &MediumParams,
    result: &ResonanceResult,
    points: &[[f64; 2]],
) -> Result<Vec<Complex64>, FieldsError> {
    let k = medium.k(result.omega);
    let kb = medium.k_b(result.omega);
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let inside = mesh.curves.iter().any(|c| point_inside(c, x));
        let u = if inside {
            layerpot::eval_potential(mesh, &result.phi, Some(kb), x)?
        } else {
            layerpot::eval_potential(mesh, &result.psi, Some(k), x)?
        };
        out.push(u);
    }
    Ok(out)
}

/// Boundary trace means of the exterior field S^k[psi] over the two curves.
pub fn boundary_means(
    mesh: &Mesh,
    medium: &MediumParams,
    result: &ResonanceResult,
) -> [Complex64; 2] {
    let k = medium.k(result.omega);
    let s = layerpot::assemble_s(mesh, KernelTag::SingleHelmholtz { k });
    let trace = s.apply(&result.psi.values);
    let td = Density::new(mesh, trace);
    let mut means = [Complex64::default(); 2];
    for i in 0..2 {
        means[i] = td.integral_over(mesh, i) / mesh.curves[i].arclength();
    }
    means
}

/// Rescales the null pair so the boundary means match the normalization of
/// the gap laws: (+1, -1) for the dipole, (+1, +1) for the monopole.
/// Returns the scaled densities.
pub fn normalize_mode(
    mesh: &Mesh,
    medium: &MediumParams,
    result: &ResonanceResult,
) -> (Density, Density) {
    let means = boundary_means(mesh, medium, result);
    let factor = match result.mode {
        ModeClass::Dipole => 2.0 / (means[0] - means[1]),
        ModeClass::Monopole => 2.0 / (means[0] + means[1]),
    };
    let phi = Density::new(
        mesh,
        result.phi.values.iter().map(|v| v * factor).collect(),
    );
    let psi = Density::new(
        mesh,
        result.psi.values.iter().map(|v| v * factor).collect(),
    );
    (phi, psi)
}

/// Samples the normalized exterior mode along the mid-gap curve and the
/// vertical segment through the contact point.
pub fn gap_profile(
    mesh: &Mesh,
    medium: &MediumParams,
    result: &ResonanceResult,
    n_samples: usize,
) -> Result<GapProfile, FieldsError> {
    let gap = mesh.gap.as_ref().expect("gap_profile needs a pair mesh");
    let (.., psi) = normalize_mode(mesh, medium, result);
    let k = medium.k(result.omega);
    let r0 = gap.r0;
    let mut points = Vec::new();
    let mut deltas = Vec::new();
    let n_mid = n_samples.max(4);
    for i in 0..n_mid {
        let x1 = -r0 / 2.0 + r0 * i as f64 / (n_mid - 1) as f64;
        points.push([x1, gap.midline(x1)]);
        deltas.push(geometry::gap_width(gap, x1)?);
    }
    let n_vert = (n_samples / 4).max(3);
    let d0 = gap.epsilon;
    for i in 0..n_vert {
        let x2 = -0.4 * d0 + 0.8 * d0 * i as f64 / (n_vert - 1) as f64;
        points.push([0.0, x2]);
        deltas.push(d0);
    }
    let evals = layerpot::eval_many(mesh, &psi, Some(k), &points)?;
    let samples = points
        .iter()
        .zip(&evals)
        .map(|(p, (u, g))| GapSample { x1: p[0], x2: p[1], u: *u, grad: *g })
        .collect();
    Ok(GapProfile {
        epsilon: gap.epsilon,
        mode: result.mode,
        samples,
        delta_of_x1: deltas,
        n_midline: n_mid,
    })
}

/// |grad u| of the normalized mode at the gap center (0, 0).
pub fn gap_center_gradient(
    mesh: &Mesh,
    medium: &MediumParams,
    result: &ResonanceResult,
) -> Result<f64, FieldsError> {
    let (.., psi) = normalize_mode(mesh, medium, result);
    let k = medium.k(result.omega);
    let g = layerpot::eval_gradient(mesh, &psi, Some(k), [0.0, 0.0])?;
    Ok((g[0].norm_sqr() + g[1].norm_sqr()).sqrt())
}

/// One epsilon of the blow-up sweep.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub n_used: usize,
    pub alpha_diff: f64,
    pub dipole: Option<ModeRecord>,
    pub monopole: Option<ModeRecord>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ModeRecord {
    pub omega: Complex64,
    pub leading_order_omega: Complex64,
    pub sigma_min_rel: f64,
    pub grad_center: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub dipole_fit: Option<BlowupFit>,
    pub alpha_fit: Option<BlowupFit>,
}

/// Log-log least squares of value = prefactor eps^{-exponent}; requires at
/// least 4 points spanning at least 1.5 decades (the standard sweep ladder
/// 1e-2 .. 10^{-3.5}) and r^2 >= 0.99.
pub fn fit_blowup(points: &[(f64, f64)]) -> Result<BlowupFit, FieldsError> {
    if points.len() < 4 {
        return Err(FieldsError::FitUnderdetermined);
    }
    let (emin, emax) = points
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    if emax / emin < 30.0 {
        return Err(FieldsError::FitUnderdetermined);
    }
    let xs: Vec<f64> = points.iter().map(|p| (1.0 / p.0).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = 1.0 - ss_res / ss_tot;
    if r_squared < 0.99 {
        return Err(FieldsError::FitQuality(r_squared));
    }
    Ok(BlowupFit { exponent: slope, prefactor: intercept.exp(), r_squared })
}

/// Full sweep: for each epsilon build the pair, find both resonances,
/// normalize the modes, and record the gap-center gradients; fits the
/// dipole blow-up exponent and the capacitance exponent.
pub fn blowup_sweep(
    spec: &CurveSpec,
    medium: &MediumParams,
    epsilons: &[f64],
    n_cap: usize,
) -> SweepOutcome {
    let mut records = Vec::new();
    for &eps in epsilons {
        records.push(sweep_one(spec, medium, eps, n_cap));
    }
    let dip_pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.dipole.as_ref().map(|d| (r.epsilon, d.grad_center)))
        .collect();
    let alpha_pts: Vec<(f64, f64)> =
        records.iter().map(|r| (r.epsilon, r.alpha_diff)).collect();
    SweepOutcome {
        dipole_fit: fit_blowup(&dip_pts).ok(),
        alpha_fit: fit_blowup(&alpha_pts).ok(),
        records,
    }
}

fn sweep_one(spec: &CurveSpec, medium: &MediumParams, eps: f64, n_cap: usize) -> SweepRecord {
    let mut rec = SweepRecord {
        epsilon: eps,
        n_used: 0,
        alpha_diff: f64::NAN,
        dipole: None,
        monopole: None,
        failure: None,
    };
    let attempt = || -> Result<SweepRecord, FieldsError> {
        let pair = geometry::make_pair(spec, eps)?;
        let n = geometry::auto_node_count(eps, pair.lambda).min(n_cap);
        let mesh = geometry::discretize(&pair, n)?;
        let k_ref = Complex64::new(statics::K_REF, 0.0);
        let zs = statics::solve_zeta(&mesh, k_ref, k_ref)?;
        let alpha = statics::compute_alpha(&mesh, &zs);
        let area = mesh.curves[0].area;
        let seed1 = resonance::leading_order_omega1(medium, area)?;
        let seed2 = resonance::leading_order_omega2(medium, &alpha, area)?;
        let mut out = SweepRecord {
            epsilon: eps,
            n_used: n,
            alpha_diff: alpha.mutual_minus_self().re,
            dipole: None,
            monopole: None,
            failure: None,
        };
        for seed in [seed1, seed2] {
            let r = resonance::find_resonance(&mesh, medium, seed)?;
            let grad = gap_center_gradient(&mesh, medium, &r)?;
            let m = ModeRecord {
                omega: r.omega,
                leading_order_omega: r.leading_order_omega,
                sigma_min_rel: r.sigma_min_rel,
                grad_center: grad,
                iterations: r.iterations,
            };
            match r.mode {
                ModeClass::Dipole => out.dipole = Some(m),
                ModeClass::Monopole => out.monopole = Some(m),
            }
        }
        Ok(out)
    };
    match attempt() {
        Ok(r) => r,
        Err(e) => {
            rec.failure = Some(e.to_string());
            rec
        }
    }
}
