//! Resonance analysis: assembly of the transmission block operator
//! A(omega, delta), the leading-order frequency formulas, the
//! characteristic-value search in the complex plane, eigenfunction
//! extraction, and the driven scattering solve.
//!
//! The search minimizes the smallest singular value of A. On the exactly
//! mirror-symmetric meshes A commutes with the reflection-swap, so its
//! singular spectrum is the union of an even and an odd sector; each
//! search runs in the sector whose scalar characteristic root lies nearest
//! the seed (the monopole dip never touches the real axis, so the full
//! landscape hides it). The seed is refined through that scalar equation,
//! polished by Newton on the pencil value u^H A v, finished by a
//! safeguarded Muller iteration on sigma_min, and the converged root is
//! certified on the full operator.

use crate::geometry::Mesh;
use crate::layerpot::{self, Density, KernelTag};
use crate::linalg::{self, CMat};
use crate::statics::{self, AlphaMatrix};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResonanceError {
    #[error("medium parameter {name} = {value} must be positive")]
    BadMedium { name: &'static str, value: f64 },
    #[error("leading-order frequency iteration failed to converge")]
    LeadingOrderDiverged,
    #[error("alpha_12 - alpha_11 has nonpositive real part: {0}")]
    NegativeCapacitanceGap(f64),
    #[error("characteristic-value search did not converge in {0} iterations")]
    NonConvergence(usize),
    #[error("search converged to a spurious root omega = {0} (Re <= 0)")]
    SpuriousRoot(Complex64),
    #[error("scattering system near-singular: condition estimate {0:.3e}")]
    NearSingular(f64),
    #[error(transparent)]
    Statics(#[from] statics::StaticsError),
}

/// Physical parameters of the matrix (rho, kappa) and the inclusions
/// (rho_b, kappa_b), with the derived wave speeds and contrasts.
#[derive(Debug, Clone, Copy)]
pub struct MediumParams {
    pub rho: f64,
    pub kappa: f64,
    pub rho_b: f64,
    pub kappa_b: f64,
    pub v: f64,
    pub v_b: f64,
    /// Density contrast delta = rho_b / rho.
    pub delta: f64,
    /// tau = k_b / k = v / v_b.
    pub tau: f64,
}

impl MediumParams {
    pub fn new(rho: f64, kappa: f64, rho_b: f64, kappa_b: f64) -> Result<Self, ResonanceError> {
        for (name, value) in
            [("rho", rho), ("kappa", kappa), ("rho_b", rho_b), ("kappa_b", kappa_b)]
        {
            if value <= 0.0 {
                return Err(ResonanceError::BadMedium { name, value });
            }
        }
        let v = (kappa / rho).sqrt();
        let v_b = (kappa_b / rho_b).sqrt();
        Ok(MediumParams { rho, kappa, rho_b, kappa_b, v, v_b, delta: rho_b / rho, tau: v / v_b })
    }

    pub fn k(&self, omega: Complex64) -> Complex64 {
        omega / self.v
    }

    pub fn k_b(&self, omega: Complex64) -> Complex64 {
        omega / self.v_b
    }

    /// The resonance routines assume the high-contrast regime.
    pub fn is_subwavelength_regime(&self) -> bool {
        self.delta <= 0.1
    }
}

/// Mirror parity of a density pair under reflection-swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Mode class of a resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    Monopole,
    Dipole,
}

impl std::fmt::Display for ModeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeClass::Monopole => write!(f, "monopole"),
            ModeClass::Dipole => write!(f, "dipole"),
        }
    }
}

/// Dense realization of A(omega, delta): 2x2 blocks of boundary operators,
/// total (2 nb) x (2 nb) with nb boundary nodes.
pub struct BlockOperator {
    pub mat: CMat,
    pub omega: Complex64,
    /// Number of boundary nodes (half the matrix dimension).
    pub nb: usize,
    /// Scale applied to the second block row (1.0 = unscaled).
    pub row_scale: f64,
}

/// Assembles A(omega, delta) with exact Hankel kernels:
/// [[S^{k_b}, -S^k], [-1/2 I + K^{k_b,*}, -delta (1/2 I + K^{k,*})]].
pub fn assemble_a(mesh: &Mesh, medium: &MediumParams, omega: Complex64) -> BlockOperator {
    assemble_a_scaled(mesh, medium, omega, 1.0)
}

/// Same with the second block row multiplied by `row_scale` (the search
/// uses diam(D) to balance the H^1 x L^2 block scales).
pub fn assemble_a_scaled(
    mesh: &Mesh,
    medium: &MediumParams,
    omega: Complex64,
    row_scale: f64,
) -> BlockOperator {
    let nb = mesh.total_nodes();
    let k = medium.k(omega);
    let kb = medium.k_b(omega);
    let skb = layerpot::assemble_s(mesh, KernelTag::SingleHelmholtz { k: kb });
    let sk = layerpot::assemble_s(mesh, KernelTag::SingleHelmholtz { k });
    let kkb = layerpot::assemble_kstar(mesh, KernelTag::AdjointHelmholtz { k: kb });
    let kk = layerpot::assemble_kstar(mesh, KernelTag::AdjointHelmholtz { k });
    let delta = medium.delta;
    let mat = linalg::from_fn(2 * nb, 2 * nb, |i, j| {
        let (bi, ii) = (i / nb, i % nb);
        let (bj, jj) = (j / nb, j % nb);
        let v = match (bi, bj) {
            (0, 0) => linalg::cn(skb.mat[(ii, jj)]),
            (0, 1) => -linalg::cn(sk.mat[(ii, jj)]),
            (1, 0) => {
                let ident = if ii == jj { Complex64::new(0.5, 0.0) } else { Complex64::default() };
                linalg::cn(kkb.mat[(ii, jj)]) - ident
            }
            _ => {
                let ident = if ii == jj { Complex64::new(0.5, 0.0) } else { Complex64::default() };
                -delta * (ident + linalg::cn(kk.mat[(ii, jj)]))
            }
        };
        if bi == 1 {
            v * row_scale
        } else {
            v
        }
    });
    BlockOperator { mat, omega, nb, row_scale }
}

/// Reduces a boundary operator on the symmetric pair to one mirror sector:
/// O_sector = O_11 +- O_12 R with R the node reversal of the partner curve.
fn sector_reduce(op: &CMat, n: usize, parity: Parity) -> CMat {
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    linalg::from_fn(n, n, |i, j| {
        let a = linalg::cn(op[(i, j)]);
        let b = linalg::cn(op[(i, n + (n - j) % n)]);
        a + sign * b
    })
}

/// Sector-restricted A(omega, delta) of size 2n x 2n, n nodes per curve.
pub fn assemble_a_sector(
    mesh: &Mesh,
    medium: &MediumParams,
    omega: Complex64,
    parity: Parity,
    row_scale: f64,
) -> CMat {
    assert_eq!(mesh.curves.len(), 2, "sector reduction needs the symmetric pair");
    let n = mesh.n_per_curve();
    let k = medium.k(omega);
    let kb = medium.k_b(omega);
    let skb = sector_reduce(&layerpot::assemble_s(mesh, KernelTag::SingleHelmholtz { k: kb }).mat, n, parity);
    let sk = sector_reduce(&layerpot::assemble_s(mesh, KernelTag::SingleHelmholtz { k }).mat, n, parity);
    let kkb = sector_reduce(&layerpot::assemble_kstar(mesh, KernelTag::AdjointHelmholtz { k: kb }).mat, n, parity);
    let kk = sector_reduce(&layerpot::assemble_kstar(mesh, KernelTag::AdjointHelmholtz { k }).mat, n, parity);
    let delta = medium.delta;
    linalg::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let ident = if ii == jj { Complex64::new(0.5, 0.0) } else { Complex64::default() };
        match (bi, bj) {
            (0, 0) => linalg::cn(skb[(ii, jj)]),
            (0, 1) => -linalg::cn(sk[(ii, jj)]),
            (1, 0) => (linalg::cn(kkb[(ii, jj)]) - ident) * row_scale,
            _ => -delta * (ident + linalg::cn(kk[(ii, jj)])) * row_scale,
        }
    })
}

/// Leading-order monopole frequency: the root of
/// (omega^2 / v_b^2) ln(omega / v) |D_1| + pi delta = 0
/// nearest the positive real axis, by safeguarded Newton with the principal
/// log branch. Residual <= 1e-12 pi delta.
pub fn leading_order_omega1(medium: &MediumParams, area_d1: f64) -> Result<Complex64, ResonanceError> {
    let delta = medium.delta;
    let vb2 = medium.v_b * medium.v_b;
    let target = PI * delta;
    let f = |w: Complex64| w * w / vb2 * (w / medium.v).ln() * area_d1 + target;
    let df = |w: Complex64| (2.0 * w * (w / medium.v).ln() + w) / vb2 * area_d1;
    // fixed-point seed omega^2 = pi delta v_b^2 / (|D1| ln(v/omega))
    let mut w = Complex64::new(medium.v * 1e-2, 0.0);
    for _ in 0..50 {
        let lnw = (medium.v / w.re).max(1.0 + 1e-9).ln();
        w = Complex64::new((target * vb2 / (area_d1 * lnw)).sqrt(), 0.0);
    }
    let mut converged = false;
    for _ in 0..100 {
        let fv = f(w);
        if fv.norm() <= 1e-12 * target {
            converged = true;
            break;
        }
        let step = fv / df(w);
        let mut next = w - step;
        if next.re <= 0.0 {
            next = w * 0.5;
        }
        w = next;
    }
    if !converged && f(w).norm() > 1e-12 * target {
        return Err(ResonanceError::LeadingOrderDiverged);
    }
    Ok(w)
}

/// Leading-order dipole frequency: v_b sqrt((alpha_12 - alpha_11)/|D_1|) sqrt(delta).
pub fn leading_order_omega2(
    medium: &MediumParams,
    alpha: &AlphaMatrix,
    area_d1: f64,
) -> Result<Complex64, ResonanceError> {
    let gap = alpha.mutual_minus_self();
    if gap.re <= 0.0 {
        return Err(ResonanceError::NegativeCapacitanceGap(gap.re));
    }
    Ok(Complex64::new(
        medium.v_b * (gap.re / area_d1 * medium.delta).sqrt(),
        0.0,
    ))
}

/// Converged resonance: frequency, null densities, mode label, diagnostics.
#[derive(Debug, Clone)]
pub struct ResonanceResult {
    pub omega: Complex64,
    /// Smallest singular value of the (row-scaled) full operator at omega.
    pub sigma_min: f64,
    /// sigma_min relative to ||A||.
    pub sigma_min_rel: f64,
    pub phi: Density,
    pub psi: Density,
    pub mode: ModeClass,
    pub leading_order_omega: Complex64,
    pub iterations: usize,
    pub row_scale: f64,
    /// ||A [phi; psi]|| / ||[phi; psi]|| residual of the null pair.
    pub null_residual: f64,
}

struct MullerOutcome {
    omega: Complex64,
    sigma: f64,
    iterations: usize,
}

/// Muller iteration on f = sigma_min(A_sector(omega)).
///
/// sigma_min is the modulus of a holomorphic function near a simple
/// characteristic value, so the landscape is a cone in a plateau; plain
/// Muller from collinear real points degenerates there. Three safeguards
/// keep it convergent: the initial triple is rotated off the real axis,
/// steps that leave the seed basin or triple f are contracted toward the
/// best point, and stagnation restarts the triple around the best point
/// with a shrinking spread.
fn muller_search(
    mut f: impl FnMut(Complex64) -> f64,
    seed: Complex64,
    norm_a: f64,
    max_iters: usize,
    spread: f64,
) -> Result<MullerOutcome, ResonanceError> {
    let rot = Complex64::new((spread).cos(), -(spread).sin());
    let mut zs = vec![seed, seed * (1.0 + spread), seed * (1.0 - spread) * rot];
    let mut fs: Vec<f64> = zs.iter().map(|&z| f(z)).collect();
    let mut iterations = 3;
    let mut converged = false;
    let mut best = (0..3).min_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap()).unwrap();
    let mut since_improve = 0usize;
    let mut zoom = spread;
    while iterations < max_iters {
        let (z0, z1, z2) = (zs[zs.len() - 3], zs[zs.len() - 2], zs[zs.len() - 1]);
        let (f0, f1, f2) = (fs[fs.len() - 3], fs[fs.len() - 2], fs[fs.len() - 1]);
        let q = (z2 - z1) / (z1 - z0);
        let a = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
        let b = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
        let c = (1.0 + q) * f2;
        let disc = (b * b - 4.0 * a * c).sqrt();
        let (d1, d2) = (b + disc, b - disc);
        let den = if d1.norm() >= d2.norm() { d1 } else { d2 };
        let zb = zs[best];
        let mut z3 = if den.norm() > 0.0 {
            let mut dz = -(z2 - z1) * 2.0 * c / den;
            let cap = 0.15 * z2.norm();
            if dz.norm() > cap {
                dz *= cap / dz.norm();
            }
            z2 + dz
        } else {
            0.5 * (z2 + zb)
        };
        // basin anchor: stay within 40% of the seed and the lower half plane
        if (z3 - seed).norm() > 0.4 * seed.norm() || z3.re <= 0.0 {
            z3 = 0.25 * z3 + 0.75 * zb;
        }
        if z3.im > 0.0 {
            z3 = z3.conj();
        }
        let mut f3 = f(z3);
        iterations += 1;
        // descent anchor: a step far above the running best contracts once
        if f3 > 3.0 * fs[best] && (z3 - zb).norm() > 1e-9 * zb.norm() && iterations < max_iters {
            let z3c = 0.25 * z3 + 0.75 * zb;
            let f3c = f(z3c);
            iterations += 1;
            if f3c < f3 {
                z3 = z3c;
                f3 = f3c;
            }
        }
        zs.push(z3);
        fs.push(f3);
        if f3 < fs[best] {
            best = fs.len() - 1;
            since_improve = 0;
        } else {
            since_improve += 1;
        }
        if (z3 - z2).norm() <= 1e-8 * z3.norm() || f3 <= 1e-8 * norm_a {
            converged = true;
            break;
        }
        // stagnation: zoom the triple in around the best point
        if since_improve >= 8 && iterations + 3 <= max_iters {
            zoom = (zoom / 5.0).max(1e-9);
            let zb = zs[best];
            let fb = fs[best];
            let za = zb * (1.0 + zoom);
            let zc = zb * (1.0 - zoom) * Complex64::new(zoom.cos(), -zoom.sin());
            let (fa, fc) = (f(za), f(zc));
            iterations += 2;
            zs.extend_from_slice(&[za, zb, zc]);
            fs.extend_from_slice(&[fa, fb, fc]);
            if fa < fs[best] {
                best = fs.len() - 3;
            }
            if fc < fs[best] {
                best = fs.len() - 1;
            }
            since_improve = 0;
        }
    }
    if !converged {
        // a deep dip relative to the plateau still counts when the step
        // tolerance never fired (the cone tip makes |dz| oscillate)
        if fs[best] <= 1e-8 * norm_a {
            converged = true;
        }
    }
    if !converged {
        return Err(ResonanceError::NonConvergence(iterations));
    }
    Ok(MullerOutcome { omega: zs[best], sigma: fs[best], iterations })
}

/// Newton polish on the pencil value u^H A(omega) v = sigma, with u, v the
/// extreme singular pair. The pencil value is a smooth function of omega
/// even where sigma_min is conical, and its derivative comes from central
/// differences of the assembled operator. A couple of steps land inside
/// the sigma_min funnel even when it is needle-thin (the funnel radius
/// shrinks with the background sigma floor as eps decreases).
fn newton_polish(
    mesh: &Mesh,
    medium: &MediumParams,
    parity: Parity,
    row_scale: f64,
    mut omega: Complex64,
    steps: usize,
) -> (Complex64, f64) {
    let mut last_step = 1e-2;
    for _ in 0..steps {
        let m = assemble_a_sector(mesh, medium, omega, parity, row_scale);
        let (sigma, v) = linalg::sigma_min_vector(&m, 12);
        if sigma == 0.0 {
            return (omega, 0.0);
        }
        let av = linalg::matvec(m.as_ref(), &v);
        let u: Vec<Complex64> = av.iter().map(|z| z / sigma).collect();
        let h = 1e-5;
        let mp = assemble_a_sector(mesh, medium, omega * (1.0 + h), parity, row_scale);
        let mm = assemble_a_sector(mesh, medium, omega * (1.0 - h), parity, row_scale);
        let n = v.len();
        let mut uapv = Complex64::default();
        for j in 0..n {
            let mut col = Complex64::default();
            for i in 0..n {
                let d = (linalg::cn(mp[(i, j)]) - linalg::cn(mm[(i, j)])) / (2.0 * h * omega);
                col += u[i].conj() * d;
            }
            uapv += col * v[j];
        }
        if uapv.norm() == 0.0 {
            break;
        }
        let dz = -Complex64::new(sigma, 0.0) / uapv;
        let next = omega + dz;
        if !next.is_finite() || next.re <= 0.0 || dz.norm() > 0.3 * omega.norm() {
            break;
        }
        last_step = dz.norm() / omega.norm();
        omega = if next.im > 0.0 { next.conj() } else { next };
        if last_step < 1e-11 {
            break;
        }
    }
    (omega, last_step)
}

/// Refines a leading-order seed by solving the sector's scalar
/// characteristic equation k_b^2 |D_1| + delta lambda(k) = 0 with the
/// discrete complex capacitance eigenvalue lambda = alpha_11 +- alpha_12
/// evaluated at complex k. The imaginary part of lambda carries the
/// radiation damping, which places the refined seed inside the narrow
/// sigma_min funnel (the monopole funnel never touches the real axis).
fn refine_seed(
    mesh: &Mesh,
    medium: &MediumParams,
    omega0: Complex64,
    parity: Parity,
) -> Complex64 {
    let area = mesh.curves[0].area;
    let mut omega = omega0;
    for _ in 0..6 {
        let k = medium.k(omega);
        let Ok(zs) = statics::solve_zeta(mesh, k, k) else { return omega0 };
        let a = statics::compute_alpha(mesh, &zs);
        let lambda = match parity {
            Parity::Even => a.alpha[0][0] + a.alpha[0][1],
            Parity::Odd => a.alpha[0][0] - a.alpha[0][1],
        };
        let w2 = -medium.delta * medium.v_b * medium.v_b * lambda / area;
        let mut next = w2.sqrt();
        if next.re < 0.0 {
            next = -next;
        }
        if next.im > 0.0 {
            next = next.conj();
        }
        if !next.is_finite() || next.norm() < 1e-300 {
            return omega0;
        }
        if (next - omega).norm() <= 1e-10 * omega.norm() {
            omega = next;
            break;
        }
        omega = next;
    }
    omega
}

/// Full characteristic-value search seeded at `omega_init` (from the
/// matching leading-order formula). Returns the converged frequency, the
/// normalized null densities (||psi||_{L^2} = 1), and the symmetry-sector
/// mode label.
pub fn find_resonance(
    mesh: &Mesh,
    medium: &MediumParams,
    omega_init: Complex64,
) -> Result<ResonanceResult, ResonanceError> {
    let row_scale = mesh.diameter();
    // pick the sector whose scalar characteristic root sits nearest the
    // seed (plateau sigma levels are useless for this: the sector dips are
    // narrow funnels and the off-sector plateau can be the lower one)
    let r_even = refine_seed(mesh, medium, omega_init, Parity::Even);
    let r_odd = refine_seed(mesh, medium, omega_init, Parity::Odd);
    let d_even = (r_even - omega_init).norm();
    let d_odd = (r_odd - omega_init).norm();
    let (parity, mut seed) = if d_even <= d_odd {
        (Parity::Even, r_even)
    } else {
        (Parity::Odd, r_odd)
    };
    if (seed - omega_init).norm() > 0.5 * omega_init.norm() || !seed.is_finite() {
        seed = omega_init;
    }
    let norm_a = linalg::sigma_max(&assemble_a_sector(mesh, medium, omega_init, parity, row_scale));
    let (seed, polish_step) = newton_polish(mesh, medium, parity, row_scale, seed, 3);
    let objective = |omega: Complex64| -> f64 {
        linalg::sigma_min(&assemble_a_sector(mesh, medium, omega, parity, row_scale))
    };
    let spread = (2.0 * polish_step).clamp(1e-8, 1e-2);
    let out = muller_search(objective, seed, norm_a, 100, spread)?;
    if out.omega.re <= 0.0 {
        return Err(ResonanceError::SpuriousRoot(out.omega));
    }
    let omega = if out.omega.im > 0.0 { out.omega.conj() } else { out.omega };

    // certify on the full operator and extract the null pair
    let full = assemble_a_scaled(mesh, medium, omega, row_scale);
    let (sigma_full, null) = linalg::sigma_min_vector(&full.mat, 14);
    let norm_full = linalg::sigma_max(&full.mat);
    let nb = full.nb;
    let mut phi_vals = null[..nb].to_vec();
    let mut psi_vals = null[nb..].to_vec();
    // normalize ||psi|| = 1 in the discrete L^2(partial D) norm, with a
    // deterministic phase (largest |psi| entry made real positive)
    let psi_d = Density::new(mesh, psi_vals.clone());
    let nrm = psi_d.l2_norm(mesh);
    let pivot = psi_vals
        .iter()
        .cloned()
        .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
        .unwrap();
    let phase = pivot / pivot.norm();
    let scale = (phase * nrm).inv();
    for v in phi_vals.iter_mut().chain(psi_vals.iter_mut()) {
        *v *= scale;
    }
    let phi = Density::new(mesh, phi_vals);
    let psi = Density::new(mesh, psi_vals);
    // residual of the normalized pair
    let mut pair = phi.values.clone();
    pair.extend_from_slice(&psi.values);
    let apair = linalg::matvec(full.mat.as_ref(), &pair);
    let null_residual = linalg::vec_norm(&apair) / linalg::vec_norm(&pair);

    // mode label by symmetry-sector projection of psi onto zeta_1 +- zeta_2
    let zs = statics::solve_zeta(mesh, medium.k(omega), medium.k_b(omega))?;
    let w = mesh.all_weights();
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        w.iter().zip(a.iter().zip(b)).map(|(wi, (ai, bi))| wi * ai.conj() * bi).sum()
    };
    let plus: Vec<Complex64> = zs.zeta[0]
        .values
        .iter()
        .zip(&zs.zeta[1].values)
        .map(|(a, b)| a + b)
        .collect();
    let minus: Vec<Complex64> = zs.zeta[0]
        .values
        .iter()
        .zip(&zs.zeta[1].values)
        .map(|(a, b)| a - b)
        .collect();
    let proj_plus = inner(&plus, &psi.values).norm()
        / (inner(&plus, &plus).norm().sqrt() * psi.l2_norm(mesh));
    let proj_minus = inner(&minus, &psi.values).norm()
        / (inner(&minus, &minus).norm().sqrt() * psi.l2_norm(mesh));
    let mode = if proj_plus >= proj_minus { ModeClass::Monopole } else { ModeClass::Dipole };

    Ok(ResonanceResult {
        omega,
        sigma_min: sigma_full.min(out.sigma),
        sigma_min_rel: sigma_full.min(out.sigma) / norm_full,
        phi,
        psi,
        mode,
        leading_order_omega: omega_init,
        iterations: out.iterations,
        row_scale,
        null_residual,
    })
}

/// Incident plane wave amplitude * exp(i k d . x).
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub direction: [f64; 2],
    pub amplitude: Complex64,
}

impl PlaneWave {
    pub fn value(&self, k: Complex64, x: [f64; 2]) -> Complex64 {
        let d = self.direction;
        let nrm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let phase = Complex64::i() * k * (d[0] * x[0] + d[1] * x[1]) / nrm;
        self.amplitude * phase.exp()
    }

    pub fn normal_derivative(&self, k: Complex64, x: [f64; 2], nu: [f64; 2]) -> Complex64 {
        let d = self.direction;
        let nrm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        Complex64::i() * k * (d[0] * nu[0] + d[1] * nu[1]) / nrm * self.value(k, x)
    }
}

/// Driven solve A(omega, delta) [phi; psi] = [u_in; delta d_nu u_in] at a
/// real frequency away from resonance; returns the density pair and a
/// condition estimate of the scaled system.
pub fn solve_scattering(
    mesh: &Mesh,
    medium: &MediumParams,
    omega: f64,
    incident: &PlaneWave,
) -> Result<(Density, Density, f64), ResonanceError> {
    let row_scale = mesh.diameter();
    let a = assemble_a_scaled(mesh, medium, Complex64::new(omega, 0.0), row_scale);
    let k = medium.k(Complex64::new(omega, 0.0));
    let nb = a.nb;
    let mut rhs = Vec::with_capacity(2 * nb);
    for c in &mesh.curves {
        for j in 0..c.n {
            rhs.push(incident.value(k, c.nodes[j]));
        }
    }
    for c in &mesh.curves {
        for j in 0..c.n {
            rhs.push(
                medium.delta
                    * incident.normal_derivative(k, c.nodes[j], c.normal[j])
                    * row_scale,
            );
        }
    }
    let (sol, _res) = linalg::solve_refined(&a.mat, &rhs);
    let smin = linalg::sigma_min(&a.mat);
    let smax = linalg::sigma_max(&a.mat);
    let cond = smax / smin.max(1e-300);
    if cond > 1e14 {
        return Err(ResonanceError::NearSingular(cond));
    }
    let phi = Density::new(mesh, sol[..nb].to_vec());
    let psi = Density::new(mesh, sol[nb..].to_vec());
    Ok((phi, psi, cond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize, make_pair, CurveSpec};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn unit_medium(delta: f64) -> MediumParams {
        // v = v_b = 1, contrast delta
        MediumParams::new(1.0, 1.0, delta, delta).unwrap()
    }

    #[test]
    fn medium_params_derived_quantities() {
        let m = MediumParams::new(2.0, 8.0, 0.002, 0.018).unwrap();
        assert!((m.v - 2.0).abs() < 1e-15);
        assert!((m.v_b - 3.0).abs() < 1e-15);
        assert!((m.delta - 0.001).abs() < 1e-18);
        assert!((m.tau - 2.0 / 3.0).abs() < 1e-15);
        // k_b / k = tau exactly as constructed
        let w = c(0.37);
        assert!(((m.k_b(w) / m.k(w)).re - m.tau).abs() < 1e-15);
        assert!(m.is_subwavelength_regime());
        assert!(MediumParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn omega1_leading_root() {
        // v = v_b = 1, |D1| = pi, delta = 1e-4: root of w^2 ln w = -1e-4.
        // Oracle: scalar bisection on the real axis.
        let m = unit_medium(1e-4);
        let w = leading_order_omega1(&m, PI).unwrap();
        let f = |x: f64| x * x * x.ln() + 1e-4;
        let (mut lo, mut hi) = (1e-6f64, 0.1f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(
            (w.re - oracle).abs() < 1e-10 * oracle,
            "newton {w} vs bisection {oracle}"
        );
        assert!((w.re - 4.29e-3).abs() < 2e-5, "near 4.29e-3, got {w}");
        // residual pinned by the contract
        let resid = (w * w * w.ln() * PI + PI * 1e-4).norm();
        assert!(resid <= 1e-12 * PI * 1e-4);
        // monotonicity in delta
        let w4 = leading_order_omega1(&unit_medium(4e-4), PI).unwrap();
        assert!(w4.re > w.re);
    }

    #[test]
    fn omega2_leading_scalings() {
        let m = unit_medium(1e-4);
        let mut alpha = AlphaMatrix {
            alpha: [[c(0.0), c(62.86)], [c(62.86), c(0.0)]],
            k_used: c(1e-3),
            sum_alpha1: c(62.86),
            alpha_flux: [[c(0.0); 2]; 2],
        };
        let w = leading_order_omega2(&m, &alpha, PI).unwrap();
        assert!((w.re - (62.86 / PI * 1e-4).sqrt()).abs() < 1e-12);
        assert!((w.re - 4.47e-2).abs() < 5e-4);
        // delta scaling: omega2(4 delta) = 2 omega2(delta)
        let m4 = unit_medium(4e-4);
        let w4 = leading_order_omega2(&m4, &alpha, PI).unwrap();
        assert!((w4.re - 2.0 * w.re).abs() < 1e-12);
        // negative capacitance gap rejected
        alpha.alpha[0][1] = c(-1.0);
        assert!(leading_order_omega2(&m, &alpha, PI).is_err());
    }

    #[test]
    fn assemble_a_commutes_with_reflection_swap() {
        let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, 1e-2).unwrap();
        let mesh = discretize(&pair, 48).unwrap();
        let m = unit_medium(1.0); // delta = 1 per the symmetry example
        let a = assemble_a(&mesh, &m, c(0.3));
        let n = 48;
        let nb = 2 * n;
        // permutation on the pair-block vector [phi; psi]
        let perm = |idx: usize| -> usize {
            let (blk, r) = (idx / nb, idx % nb);
            let (curve, j) = (r / n, r % n);
            blk * nb + (1 - curve) * n + (n - j) % n
        };
        let mut worst = 0.0f64;
        for i in 0..2 * nb {
            for j in 0..2 * nb {
                let x = linalg::cn(a.mat[(i, j)]);
                let y = linalg::cn(a.mat[(perm(i), perm(j))]);
                worst = worst.max((x - y).norm());
            }
        }
        assert!(worst <= 1e-10, "commutator norm {worst:.2e}");
    }

    #[test]
    fn sector_singular_values_partition_full_spectrum() {
        let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, 1e-2).unwrap();
        let mesh = discretize(&pair, 32).unwrap();
        let m = unit_medium(1e-3);
        let omega = c(0.05);
        let rs = mesh.diameter();
        let full = assemble_a_scaled(&mesh, &m, omega, rs);
        let even = assemble_a_sector(&mesh, &m, omega, Parity::Even, rs);
        let odd = assemble_a_sector(&mesh, &m, omega, Parity::Odd, rs);
        let mut sv_full = linalg::singular_values(&full.mat);
        let mut sv_union = linalg::singular_values(&even);
        sv_union.extend(linalg::singular_values(&odd));
        sv_union.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv_full.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // the full singular spectrum is the union of the sector spectra
        for (a, b) in sv_full.iter().zip(&sv_union) {
            assert!((a - b).abs() <= 1e-10 * sv_full[0], "{a:.6e} vs {b:.6e}");
        }
    }

    // The two-sided search is exercised at acceptance scale in the
    // integration suite; here a single cheap dipole hunt keeps the module
    // honest.
    #[test]
    fn dipole_search_converges_small() {
        let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, 1e-2).unwrap();
        let mesh = discretize(&pair, 128).unwrap();
        let m = unit_medium(1e-4);
        let zs = statics::solve_zeta(&mesh, c(statics::K_REF), c(statics::K_REF)).unwrap();
        let alpha = statics::compute_alpha(&mesh, &zs);
        let seed = leading_order_omega2(&m, &alpha, mesh.curves[0].area).unwrap();
        let r = find_resonance(&mesh, &m, seed).unwrap();
        assert_eq!(r.mode, ModeClass::Dipole);
        assert!(r.omega.re > 0.0 && r.omega.im <= 0.0);
        assert!((r.omega - seed).norm() < 0.1 * seed.norm());
        assert!(r.sigma_min_rel <= 1e-8, "sigma_min_rel {:.2e}", r.sigma_min_rel);
        assert!(r.null_residual <= 1e-6);
    }
}
