use serde::{Deserialize, Serialize};

/// Scalar activation applied between affine layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    /// `max(0, x) + min(0, exp(x) - 1)`.
    Celu,
}

impl Activation {
    #[inline]
    pub fn value(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Celu => {
                if x > 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
        }
    }

    /// Value and the first three derivatives at `x`.
    ///
    /// Celu takes the exponential branch at exactly zero, so its second and
    /// third derivatives there are 1.
    #[inline]
    pub fn derivatives(self, x: f64) -> [f64; 4] {
        match self {
            Activation::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                [t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t)]
            }
            Activation::Celu => {
                if x > 0.0 {
                    [x, 1.0, 0.0, 0.0]
                } else {
                    let e = x.exp();
                    [e - 1.0, e, e, e]
                }
            }
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Activation::Tanh => f.write_str("tanh"),
            Activation::Celu => f.write_str("celu"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn celu_is_c1_at_origin() {
        for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
            let left = Activation::Celu.value(-eps);
            let right = Activation::Celu.value(eps);
            // slope 1 on both sides
            assert!((right - eps).abs() <= eps * eps);
            assert!((left + eps).abs() <= eps * eps);
        }
        assert_eq!(Activation::Celu.derivatives(0.0)[..2], [0.0, 1.0]);
        assert_eq!(Activation::Celu.derivatives(0.0)[2], 1.0);
        assert_eq!(Activation::Celu.derivatives(1e-12)[1], 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for act in [Activation::Tanh, Activation::Celu] {
            for &x in &[-2.1, -0.7, 0.3, 1.9] {
                let d = act.derivatives(x);
                let dp = act.derivatives(x + h);
                let dm = act.derivatives(x - h);
                for k in 0..3 {
                    let fd = (dp[k] - dm[k]) / (2.0 * h);
                    assert!((fd - d[k + 1]).abs() < 1e-6, "{act} k={k} x={x}");
                }
            }
        }
    }
}
