//! Closed-form reference solution for two equal disks via bipolar
//! coordinates, used as ground truth by the validation checks and tests.
//!
//! For disks of radius R with centers (0, +-(R + eps/2)), the foci of the
//! bipolar system sit at (0, +-a) with a = sqrt(c^2 - R^2), c = R + eps/2,
//! and the disk boundaries are the coordinate circles tau = +-tau0 with
//! cosh(tau0) = c / R. The harmonic function equal to +1 on the upper disk
//! and -1 on the lower one is tau(x)/tau0 with
//! tau(x) = ln |x - f_minus| - ln |x - f_plus|.

/// Bipolar data for the symmetric pair of equal disks.
#[derive(Debug, Clone, Copy)]
pub struct TwoDisks {
    pub radius: f64,
    pub epsilon: f64,
    /// Focus height a.
    pub a: f64,
    /// Boundary coordinate tau0 = arccosh(1 + eps/(2R)).
    pub tau0: f64,
}

impl TwoDisks {
    pub fn new(radius: f64, epsilon: f64) -> Self {
        let c = radius + epsilon / 2.0;
        let a = (c * c - radius * radius).sqrt();
        let tau0 = (c / radius).acosh();
        TwoDisks { radius, epsilon, a, tau0 }
    }

    /// alpha_12 - alpha_11 = 2 pi / arccosh(1 + eps/(2R)).
    pub fn mutual_capacitance(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.tau0
    }

    /// Harmonic potential u with u = +1 on the upper disk boundary, -1 on the
    /// lower, u -> 0 at infinity.
    pub fn dipole_potential(&self, x: [f64; 2]) -> f64 {
        self.tau(x) / self.tau0
    }

    /// Gradient of `dipole_potential`.
    pub fn dipole_gradient(&self, x: [f64; 2]) -> [f64; 2] {
        // grad ln|x - f| = (x - f)/|x - f|^2
        let fp = [0.0, self.a];
        let fm = [0.0, -self.a];
        let gp = Self::grad_log(x, fp);
        let gm = Self::grad_log(x, fm);
        [(gm[0] - gp[0]) / self.tau0, (gm[1] - gp[1]) / self.tau0]
    }

    /// |grad u| at the gap center (0,0): 2 / (a tau0), which approaches
    /// 2/eps as eps -> 0.
    pub fn gap_center_gradient(&self) -> f64 {
        2.0 / (self.a * self.tau0)
    }

    fn tau(&self, x: [f64; 2]) -> f64 {
        let dp = (x[0] * x[0] + (x[1] - self.a) * (x[1] - self.a)).sqrt();
        let dm = (x[0] * x[0] + (x[1] + self.a) * (x[1] + self.a)).sqrt();
        (dm / dp).ln()
    }

    fn grad_log(x: [f64; 2], f: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - f[0], x[1] - f[1]];
        let r2 = d[0] * d[0] + d[1] * d[1];
        [d[0] / r2, d[1] / r2]
    }
}
