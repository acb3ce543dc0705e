use std::fmt;
use std::sync::Arc;

/// The weighting λ(t) inside the generalized Caputo kernel
/// `λ(t - η) / (t - η)^γ`.
#[derive(Clone)]
pub enum WeightingFunction {
    /// λ(t) ≡ value; `Constant(1.0)` is the classical Caputo derivative.
    Constant(f64),
    /// λ(t) = exp(-b t) with decay rate b ≥ 0 (tempered Caputo).
    Tempered { b: f64 },
    /// Any other positive, non-increasing weighting.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl WeightingFunction {
    pub fn classical() -> Self {
        WeightingFunction::Constant(1.0)
    }

    pub fn tempered(b: f64) -> Self {
        WeightingFunction::Tempered { b }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        WeightingFunction::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            WeightingFunction::Constant(c) => *c,
            WeightingFunction::Tempered { b } => (-b * t).exp(),
            WeightingFunction::Custom(f) => f(t),
        }
    }

    /// Decay rate when λ(t) = exp(-bt); `Constant(1.0)` counts as b = 0.
    pub fn tempered_rate(&self) -> Option<f64> {
        match self {
            WeightingFunction::Tempered { b } => Some(*b),
            WeightingFunction::Constant(c) if *c == 1.0 => Some(0.0),
            _ => None,
        }
    }
}

impl fmt::Debug for WeightingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightingFunction::Constant(c) => write!(f, "Constant({c})"),
            WeightingFunction::Tempered { b } => write!(f, "Tempered {{ b: {b} }}"),
            WeightingFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}
