use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::estimator::SamplerState;
use crate::error::{Error, Result};
use crate::grid::SystemLaplacian;
use crate::loads::InjectionBounds;

/// Constants of the confidence ellipsoid around `ψ̂_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceParams {
    /// Failure probability `δ`.
    pub delta: f64,
    /// `σ★ = ½ Δ ‖R + XK‖_op`.
    pub sigma_star: f64,
    /// `C = ‖Δ‖₂ √tr(R + XK)`.
    pub bound_c: f64,
}

impl ConfidenceParams {
    pub fn from_model(basis: &SystemLaplacian, bounds: &InjectionBounds, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("δ must lie in (0, 1), got {delta}")));
        }
        Error::check_dim(basis.dim(), bounds.len())?;
        let span = bounds.span();
        Ok(Self {
            delta,
            sigma_star: 0.5 * bounds.scalar_span() * basis.inverse_operator_norm(),
            bound_c: span.norm() * basis.inverse_trace().sqrt(),
        })
    }

    /// `c_t = σ★ √(2 log(det V_t^{1/2} / (δ det V₀^{1/2}))) + C`.
    ///
    /// The logarithm is clamped at zero.
    pub fn coefficient(&self, state: &SamplerState) -> f64 {
        let log_ratio = 0.5 * (state.log_det() - state.log_det_initial()) - self.delta.ln();
        self.sigma_star * (2.0 * log_ratio.max(0.0)).sqrt() + self.bound_c
    }
}

/// `c_t ‖w‖_{V_t⁻¹}`.
pub fn confidence_width(state: &SamplerState, w: &DVector<f64>, params: &ConfidenceParams) -> f64 {
    params.coefficient(state) * state.weighted_norm(w)
}

/// `d = max { i : (i − 1) λ_i ≤ m / log(1 + m / λ₁) }` for ascending `λ`.
pub fn effective_dimension(eigenvalues: &DVector<f64>, horizon: u64) -> Result<usize> {
    let first = *eigenvalues.iter().next().ok_or_else(|| Error::Domain("no eigenvalues".into()))?;
    if !(first > 0.0) {
        return Err(Error::Domain(format!("λ₁ must be positive, got {first}")));
    }
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let m = horizon as f64;
    let threshold = m / (m / first).ln_1p();
    Ok(eigenvalues
        .iter()
        .enumerate()
        .filter(|&(k, &l)| k as f64 * l <= threshold)
        .map(|(k, _)| k + 1)
        .max()
        .unwrap_or(1))
}
