use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar flux `f` with its first two derivatives.
#[derive(Clone)]
pub struct FluxSpec {
    pub name: String,
    pub f: ScalarFn,
    pub f_prime: ScalarFn,
    pub f_second: ScalarFn,
    /// Minimiser of a convex flux. When present the exact Godunov flux is
    /// used by the finite-volume solver.
    pub convex_min: Option<f64>,
}

impl fmt::Debug for FluxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxSpec").field("name", &self.name).field("convex_min", &self.convex_min).finish()
    }
}

impl FluxSpec {
    /// `f(u) = u^2 / 2`.
    pub fn burgers() -> Self {
        Self {
            name: "burgers".into(),
            f: Arc::new(|u| 0.5 * u * u),
            f_prime: Arc::new(|u| u),
            f_second: Arc::new(|_| 1.0),
            convex_min: Some(0.0),
        }
    }

    /// `f(u) = a u`.
    pub fn linear(a: f64) -> Self {
        Self {
            name: format!("linear({a})"),
            f: Arc::new(move |u| a * u),
            f_prime: Arc::new(move |_| a),
            f_second: Arc::new(|_| 0.0),
            convex_min: None,
        }
    }

    /// `f = 0`: the equation reduces to the heat equation with diffusivity `nu`.
    pub fn zero() -> Self {
        let mut f = Self::linear(0.0);
        f.name = "zero".into();
        f
    }

    /// Largest `|f'|` over `[lo, hi]` sampled on a fine grid plus endpoints.
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        let n = 256;
        (0..=n).map(|k| (self.f_prime)(lo + (hi - lo) * k as f64 / n as f64).abs()).fold(0.0, f64::max)
    }
}

/// Semilinear source `f(u)` of the heat equation with its derivative and a
/// global Lipschitz constant.
#[derive(Clone)]
pub struct SemilinearSource {
    pub f: ScalarFn,
    pub f_prime: ScalarFn,
    pub lipschitz: f64,
}

impl fmt::Debug for SemilinearSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemilinearSource").field("lipschitz", &self.lipschitz).finish()
    }
}

impl SemilinearSource {
    pub fn zero() -> Self {
        Self { f: Arc::new(|_| 0.0), f_prime: Arc::new(|_| 0.0), lipschitz: 0.0 }
    }

    /// `f(u) = c u`.
    pub fn linear(c: f64) -> Self {
        Self { f: Arc::new(move |u| c * u), f_prime: Arc::new(move |_| c), lipschitz: c.abs() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        for flux in [FluxSpec::burgers(), FluxSpec::linear(-2.5), FluxSpec::zero()] {
            for &u in &[-1.3, -0.2, 0.0, 0.7, 2.0] {
                let h = 1e-6;
                let fd = ((flux.f)(u + h) - (flux.f)(u - h)) / (2.0 * h);
                let fp = (flux.f_prime)(u);
                assert!((fd - fp).abs() <= 1e-6 * fp.abs().max(1.0));
                let fd2 = ((flux.f_prime)(u + h) - (flux.f_prime)(u - h)) / (2.0 * h);
                assert!((fd2 - (flux.f_second)(u)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn burgers_max_speed() {
        assert_eq!(FluxSpec::burgers().max_speed(-1.0, 0.5), 1.0);
    }
}
