use nalgebra::DVector;

use super::MomentumMode;

/// Which candidate the monotone step kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Accepted {
    Cubic,
    Momentum,
}

impl Accepted {
    pub fn as_str(self) -> &'static str {
        match self {
            Accepted::Cubic => "cubic",
            Accepted::Momentum => "momentum",
        }
    }
}

impl std::fmt::Display for Accepted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Accepted {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cubic" => Ok(Accepted::Cubic),
            "momentum" => Ok(Accepted::Momentum),
            other => Err(format!("unknown branch {other:?}")),
        }
    }
}

/// Theory mode: `min(ρ, ||∇f(y)||, ||s||)`. Practical mode: `c ||s||`, unclamped.
pub fn momentum_coefficient(
    grad_norm_at_y: f64,
    step_norm: f64,
    rho: f64,
    mode: MomentumMode,
) -> f64 {
    match mode {
        MomentumMode::Theory => rho.min(grad_norm_at_y).min(step_norm),
        MomentumMode::Practical(c) => c * step_norm,
    }
}

/// `y_new + β (y_new - y_prev)`.
pub fn momentum_point(y_new: &DVector<f64>, y_prev: &DVector<f64>, beta: f64) -> DVector<f64> {
    let mut v = y_new - y_prev;
    v *= beta;
    v += y_new;
    v
}

/// Picks the momentum point only when its value is strictly lower and finite.
pub fn monotone_select(f_cubic: f64, f_momentum: f64) -> Accepted {
    if f_momentum.is_finite() && f_momentum < f_cubic {
        Accepted::Momentum
    } else {
        Accepted::Cubic
    }
}
