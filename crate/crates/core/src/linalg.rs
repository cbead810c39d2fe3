//! Dense complex linear algebra behind the solver contracts.
//!
//! Factorizations and SVDs are delegated to faer; this module adds the
//! smallest-singular-pair extraction by inverse iteration on an LU
//! factorization, which is what the resonance search loops on.

use faer::linalg::solvers::{PartialPivLu, Solve, SolveLstsq};
use faer::{Mat, MatRef};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Mat<faer::c64>;

pub fn cf(z: Complex64) -> faer::c64 {
    faer::c64::new(z.re, z.im)
}

pub fn cn(z: faer::c64) -> Complex64 {
    Complex64::new(z.re, z.im)
}

/// Dense complex matrix built from a row-major closure.
pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> Complex64) -> CMat {
    Mat::from_fn(nrows, ncols, |i, j| cf(f(i, j)))
}

pub fn zeros(nrows: usize, ncols: usize) -> CMat {
    Mat::zeros(nrows, ncols)
}

/// Frobenius norm.
pub fn norm_fro(a: MatRef<'_, faer::c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn matvec(a: MatRef<'_, faer::c64>, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = cf(x[j]);
        for i in 0..a.nrows() {
            let p = a[(i, j)] * xj;
            y[i] += Complex64::new(p.re, p.im);
        }
    }
    y
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// LU with partial pivoting; panics only on dimension mismatch.
pub struct LuFactors {
    lu: PartialPivLu<faer::c64>,
    n: usize,
}

pub fn lu(a: &CMat) -> LuFactors {
    LuFactors { lu: a.partial_piv_lu(), n: a.nrows() }
}

impl LuFactors {
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let rhs = Mat::from_fn(self.n, 1, |i, _| cf(b[i]));
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| cn(x[(i, 0)])).collect()
    }

    /// Solves A^H x = b via the transpose solve and conjugation.
    pub fn solve_adjoint_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let rhs = Mat::from_fn(self.n, 1, |i, _| cf(b[i].conj()));
        let x = self.lu.solve_transpose(&rhs);
        (0..self.n).map(|i| cn(x[(i, 0)]).conj()).collect()
    }

    pub fn solve_mat(&self, b: &CMat) -> CMat {
        self.lu.solve(b)
    }
}

/// Solves A x = b by LU with one step of iterative refinement; returns the
/// solution and the final residual norm ||A x - b||.
pub fn solve_refined(a: &CMat, b: &[Complex64]) -> (Vec<Complex64>, f64) {
    let f = lu(a);
    let mut x = f.solve_vec(b);
    for _ in 0..1 {
        let ax = matvec(a.as_ref(), &x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, yi)| bi - yi).collect();
        let dx = f.solve_vec(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    let ax = matvec(a.as_ref(), &x);
    let res = b
        .iter()
        .zip(&ax)
        .map(|(bi, yi)| (bi - yi).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (x, res)
}

/// Largest singular value by power iteration on A^H A (deterministic start).
pub fn sigma_max(a: &CMat) -> f64 {
    let n = a.ncols();
    let mut v: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(1.0 + (i as f64 * 0.7).sin(), (i as f64 * 0.3).cos())).collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let at = a.adjoint().to_owned();
    let mut s = 0.0;
    for _ in 0..30 {
        let av = matvec(a.as_ref(), &v);
        let atav = matvec(at.as_ref(), &av);
        let nn = vec_norm(&atav);
        s = nn.sqrt();
        if nn == 0.0 {
            return 0.0;
        }
        v = atav.into_iter().map(|z| z / nn).collect();
    }
    s
}

/// Smallest singular value and the corresponding right singular vector by
/// inverse iteration with an LU of A: power iteration on (A^H A)^{-1}.
///
/// The value is taken from the final amplification, sigma = ||z||^{-1/2}
/// with z = A^{-1} A^{-H} v: the Rayleigh form ||A v|| saturates at the
/// eps_mach * cond(A) * ||A|| rounding floor of the solves, orders of
/// magnitude above sigma_min near a characteristic value.
pub fn sigma_min_vector(a: &CMat, iters: usize) -> (f64, Vec<Complex64>) {
    let n = a.ncols();
    let f = lu(a);
    let mut v: Vec<Complex64> =
        (0..n).map(|i| Complex64::new((0.37 + i as f64 * 0.61).sin(), (1.3 + i as f64 * 0.211).cos())).collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut amp = 0.0f64;
    for _ in 0..iters {
        let y = f.solve_adjoint_vec(&v); // y = A^{-H} v
        let z = f.solve_vec(&y); // z = A^{-1} A^{-H} v
        let nz = vec_norm(&z);
        if !nz.is_finite() || nz == 0.0 {
            break;
        }
        amp = nz;
        v = z.into_iter().map(|w| w / nz).collect();
    }
    if amp == 0.0 {
        let av = matvec(a.as_ref(), &v);
        return (vec_norm(&av), v);
    }
    let sigma_amp = 1.0 / amp.sqrt();
    let av = matvec(a.as_ref(), &v);
    let sigma_rayleigh = vec_norm(&av);
    (sigma_amp.min(sigma_rayleigh), v)
}

/// sigma_min only (used as the objective of the characteristic-value search).
pub fn sigma_min(a: &CMat) -> f64 {
    sigma_min_vector(a, 10).0
}

/// Full singular values, descending (faer SVD; for the spectra diagnostics).
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let svd = a.svd().expect("svd failed to converge");
    let s = svd.S();
    (0..a.nrows().min(a.ncols())).map(|i| s[i].re).collect()
}

/// Least-squares solve (tall systems), for fits.
pub fn lstsq(a: &CMat, b: &[Complex64]) -> Vec<Complex64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| cf(b[i]));
    let q = a.qr();
    let x = q.solve_lstsq(&rhs);
    (0..a.ncols()).map(|i| cn(x[(i, 0)])).collect()
}
