//! Complex special functions for the 2D Helmholtz kernels.
//!
//! Provides the Hankel functions H_0^(1), H_1^(1) on the small-argument
//! ascending series and the large-argument asymptotic series, the
//! fundamental solution G^k(r) = -(i/4) H_0^(1)(kr), the log constant
//! eta_k and the expansion coefficients (b_j, c_j) of the small-k
//! expansion of G^k.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the ascending series and the asymptotic expansion;
/// both branches exceed 1e-10 relative accuracy for orders 0 and 1 there.
pub const Z_SWITCH: f64 = 12.0;

/// Largest |z| on the real axis for which the asymptotic branch is validated.
pub const Z_MAX_REAL: f64 = 1.0e3;
/// Validated half-strip for complex arguments: |Im z| <= 1, |Re z| <= 50.
pub const Z_MAX_COMPLEX_RE: f64 = 50.0;
pub const Z_MAX_COMPLEX_IM: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("hankel1: argument z = 0 (logarithmic singularity)")]
    ZeroArgument,
    #[error("hankel1: order {0} not supported (only 0 and 1)")]
    BadOrder(u32),
    #[error("hankel1: Re z = {re} < 0 outside supported half plane")]
    NegativeRealPart { re: f64 },
    #[error("hankel1: z = {z} outside validated accuracy range")]
    AccuracyLoss { z: Complex64 },
    #[error("green: separation r = {0} must be positive")]
    NonPositiveSeparation(f64),
    #[error("eta: wavenumber k = 0")]
    ZeroWavenumber,
}

/// Expansion order data (b_j, c_j) of the small-argument expansion
/// G^k = (1/2pi) ln r + eta_k + sum_j (b_j ln(kr) + c_j)(kr)^{2j}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoeffs {
    pub j: u32,
    pub b_j: f64,
    pub c_j: Complex64,
}

/// The constant eta_k = (1/2pi)(ln k + gamma - ln 2) - i/4 attached to a
/// wavenumber, with the principal branch of ln k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogConstant {
    pub k: Complex64,
    pub eta_k: Complex64,
}

fn in_validated_range(z: Complex64) -> bool {
    if z.im == 0.0 {
        z.re.abs() <= Z_MAX_REAL
    } else {
        z.im.abs() <= Z_MAX_COMPLEX_IM && z.re.abs() <= Z_MAX_COMPLEX_RE
    }
}

/// J_0 by the ascending power series.
pub(crate) fn bessel_j0(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..=60u32 {
        term *= -q / ((m * m) as f64);
        sum += term;
        if term.norm_sqr() < 1e-36 * sum.norm_sqr() {
            break;
        }
    }
    sum
}

/// J_1 by the ascending power series.
pub(crate) fn bessel_j1(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..=60u32 {
        term *= -q / ((m * (m + 1)) as f64);
        sum += term;
        if term.norm_sqr() < 1e-36 * sum.norm_sqr() {
            break;
        }
    }
    z * 0.5 * sum
}

/// Harmonic-number series sum_{m>=1} (-1)^{m+1} h_m (z^2/4)^m / (m!)^2
/// appearing in Y_0.
pub(crate) fn y0_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut h = 0.0f64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sign = 1.0;
    for m in 1..=60u32 {
        term *= q / ((m * m) as f64);
        h += 1.0 / m as f64;
        sum += sign * h * term;
        sign = -sign;
        if term.norm() * h < 1e-18 * (sum.norm() + 1e-30) {
            break;
        }
    }
    sum
}

/// Series sum_{m>=0} (-1)^m (h_m + h_{m+1}) (z^2/4)^m / (m!(m+1)!)
/// appearing in Y_1.
pub(crate) fn y1_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut h = 0.0f64;
    let mut sum = term; // m = 0: h_0 + h_1 = 1
    let mut sign = -1.0;
    for m in 1..=60u32 {
        term *= q / ((m * (m + 1)) as f64);
        h += 1.0 / m as f64;
        let hh = 2.0 * h + 1.0 / (m + 1) as f64;
        sum += sign * hh * term;
        sign = -sign;
        if term.norm() * hh < 1e-18 * (sum.norm() + 1e-30) {
            break;
        }
    }
    sum
}

fn y0_ascending(z: Complex64) -> Complex64 {
    let lg = (z * 0.5).ln() + EULER_GAMMA;
    (2.0 / PI) * (lg * bessel_j0(z) + y0_series(z))
}

fn y1_ascending(z: Complex64) -> Complex64 {
    let lg = (z * 0.5).ln() + EULER_GAMMA;
    (2.0 / PI) * lg * bessel_j1(z) - 2.0 / (PI * z) - z / (2.0 * PI) * y1_series(z)
}

/// Large-argument asymptotic series for H_order^(1)(z), truncated at the
/// smallest term.
fn hankel1_asymptotic(order: u32, z: Complex64) -> Complex64 {
    let nu2 = 4.0 * (order * order) as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for m in 1..=40u32 {
        let odd = (2 * m - 1) as f64;
        term *= Complex64::i() * (nu2 - odd * odd) / (8.0 * m as f64 * z);
        let mag = term.norm();
        if mag >= prev {
            break;
        }
        sum += term;
        prev = mag;
        if mag < 1e-18 {
            break;
        }
    }
    let phase = z - Complex64::new(0.0, 1.0) * 0.0 - Complex64::new((order as f64) * PI / 2.0 + PI / 4.0, 0.0);
    (2.0 / (PI * z)).sqrt() * (Complex64::i() * phase).exp() * sum
}

/// Hankel function of the first kind, H_order^(1)(z), for order 0 or 1.
///
/// Ascending series for |z| <= Z_SWITCH, asymptotic series above.
/// Validated on the real axis up to |z| = 1e3 and in the half strip
/// |Im z| <= 1, |Re z| <= 50 for complex arguments.
pub fn hankel1(order: u32, z: Complex64) -> Result<Complex64, SpecfunError> {
    if order > 1 {
        return Err(SpecfunError::BadOrder(order));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(SpecfunError::ZeroArgument);
    }
    if z.re < 0.0 {
        return Err(SpecfunError::NegativeRealPart { re: z.re });
    }
    if !in_validated_range(z) {
        return Err(SpecfunError::AccuracyLoss { z });
    }
    let h = if z.norm() <= Z_SWITCH {
        match order {
            0 => bessel_j0(z) + Complex64::i() * y0_ascending(z),
            _ => bessel_j1(z) + Complex64::i() * y1_ascending(z),
        }
    } else {
        hankel1_asymptotic(order, z)
    };
    Ok(h)
}

/// Fundamental solution of Delta + k^2 at separation r:
/// G^k(r) = -(i/4) H_0^(1)(kr). Its small-argument limit is
/// (1/2pi) ln r + eta_k.
pub fn green(k: Complex64, r: f64) -> Result<Complex64, SpecfunError> {
    if r <= 0.0 {
        return Err(SpecfunError::NonPositiveSeparation(r));
    }
    Ok(-Complex64::i() * 0.25 * hankel1(0, k * r)?)
}

/// Radial derivative dG^k/dr = (ik/4) H_1^(1)(kr); the gradient of the
/// fundamental solution is this times the unit vector (x-y)/r.
pub fn green_dr(k: Complex64, r: f64) -> Result<Complex64, SpecfunError> {
    if r <= 0.0 {
        return Err(SpecfunError::NonPositiveSeparation(r));
    }
    Ok(Complex64::i() * 0.25 * k * hankel1(1, k * r)?)
}

/// eta_k = (1/2pi)(ln k + gamma - ln 2) - i/4 with the principal branch.
pub fn eta(k: Complex64) -> Result<LogConstant, SpecfunError> {
    if k.re == 0.0 && k.im == 0.0 {
        return Err(SpecfunError::ZeroWavenumber);
    }
    let eta_k = (k.ln() + EULER_GAMMA - std::f64::consts::LN_2) / (2.0 * PI) - Complex64::i() * 0.25;
    Ok(LogConstant { k, eta_k })
}

/// Expansion coefficients b_j = (-1)^j / (2pi 2^{2j} (j!)^2) and
/// c_j = b_j (gamma - ln 2 - i pi/2 - sum_{n<=j} 1/n).
pub fn expansion_coeffs(j: u32) -> ExpansionCoeffs {
    assert!(j >= 1, "expansion order must be >= 1");
    let mut fact = 1.0f64;
    let mut harm = 0.0f64;
    for n in 1..=j {
        fact *= n as f64;
        harm += 1.0 / n as f64;
    }
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let b_j = sign / (2.0 * PI * 4f64.powi(j as i32) * fact * fact);
    let c_j = b_j * Complex64::new(EULER_GAMMA - std::f64::consts::LN_2 - harm, -PI / 2.0);
    ExpansionCoeffs { j, b_j, c_j }
}

/// b_1 = -1/(8 pi), used throughout the first-order expansion operators.
pub fn b1() -> f64 {
    expansion_coeffs(1).b_j
}

/// c_1 = -(1/8pi)(gamma - ln 2 - 1 - i pi/2).
pub fn c1() -> Complex64 {
    expansion_coeffs(1).c_j
}
