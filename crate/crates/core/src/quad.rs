//! Adaptive Gauss–Legendre quadrature on panels.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

const MAX_DEPTH: u32 = 40;

/// Failed subinterval: midpoint and the last estimate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Unconverged {
    pub at: f64,
    pub estimate: f64,
}

pub(crate) struct Adaptive {
    coarse: GaussLegendre,
    fine: GaussLegendre,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Adaptive {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        let rule = |n: usize| GaussLegendre::new(NonZeroUsize::new(n).unwrap());
        Self {
            coarse: rule(10),
            fine: rule(20),
            rel_tol,
            abs_tol,
        }
    }

    /// Integrate `f` over `[a, b]`, bisecting until the 10- and 20-point
    /// rules agree.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: &mut F) -> Result<f64, Unconverged> {
        self.step(a, b, f, self.abs_tol, 0)
    }

    /// Single 20-point rule, no error control.
    pub fn estimate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: &mut F) -> f64 {
        self.fine.integrate(a, b, f)
    }

    /// As [`Self::integrate`] with an explicit absolute tolerance.
    pub fn integrate_abs<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: &mut F, abs_tol: f64) -> Result<f64, Unconverged> {
        self.step(a, b, f, abs_tol, 0)
    }

    fn step<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: &mut F, abs_tol: f64, depth: u32) -> Result<f64, Unconverged> {
        let lo = self.coarse.integrate(a, b, &mut *f);
        let hi = self.fine.integrate(a, b, &mut *f);
        if (hi - lo).abs() <= (self.rel_tol * hi.abs()).max(abs_tol) {
            return Ok(hi);
        }
        if depth >= MAX_DEPTH {
            return Err(Unconverged {
                at: 0.5 * (a + b),
                estimate: hi,
            });
        }
        let m = 0.5 * (a + b);
        Ok(self.step(a, m, f, abs_tol, depth + 1)? + self.step(m, b, f, abs_tol, depth + 1)?)
    }

    /// Sum of adaptive integrals over consecutive breakpoints.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, breaks: &[f64], f: &mut F) -> Result<f64, Unconverged> {
        let mut total = crate::ensemble::KahanSum::default();
        for w in breaks.windows(2) {
            total.add(self.integrate(w[0], w[1], f)?);
        }
        Ok(total.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_and_oscillatory() {
        let q = Adaptive::new(1e-13, 1e-15);
        assert_abs_diff_eq!(q.integrate(0.0, 2.0, &mut |x| x.powi(7)).unwrap(), 32.0, epsilon = 1e-12);
        let v = q.integrate(0.0, 50.0, &mut |x: f64| (3.0 * x).cos()).unwrap();
        assert_abs_diff_eq!(v, (150.0f64).sin() / 3.0, epsilon = 1e-12);
        let breaks: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        assert_abs_diff_eq!(q.integrate_panels(&breaks, &mut |x| x).unwrap(), 50.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_integrand_reports_location() {
        let q = Adaptive::new(1e-14, 0.0);
        let err = q.integrate(-1.0, 1.0, &mut |x: f64| 1.0 / x.abs().max(1e-300)).unwrap_err();
        assert!(err.at.abs() < 1e-3);
    }
}
