use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How reactive injections follow active ones, `q = K p` with `K` diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PowerFactorProfile {
    /// `K = 0`.
    Unity,
    /// `K = κ I`.
    UniformKappa { kappa: f64 },
    /// `K_ii = sgn_i · √(1 − α_i²) / α_i`.
    PerNode { alphas: Vec<f64>, signs: Vec<i8> },
}

/// Reactive-to-active ratio of a load with power factor `alpha`.
pub fn kappa_from_power_factor(alpha: f64, sign: i8) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("power factor must lie in (0, 1], got {alpha}")));
    }
    if !(-1..=1).contains(&sign) {
        return Err(Error::Domain(format!("reactive sign must be -1, 0 or 1, got {sign}")));
    }
    Ok(f64::from(sign) * (1.0 - alpha * alpha).sqrt() / alpha)
}

impl PowerFactorProfile {
    /// Every node at power factor `alpha` with the same reactive sign.
    pub fn uniform(alpha: f64, sign: i8) -> Result<Self> {
        Ok(Self::UniformKappa { kappa: kappa_from_power_factor(alpha, sign)? })
    }

    /// Power factors drawn uniformly from `[alpha_min, 1]` with Rademacher signs.
    pub fn random<R: Rng + ?Sized>(n: usize, alpha_min: f64, rng: &mut R) -> Result<Self> {
        if !(alpha_min > 0.0 && alpha_min <= 1.0) {
            return Err(Error::Domain(format!("alpha_min must lie in (0, 1], got {alpha_min}")));
        }
        let alphas = (0..n).map(|_| rng.random_range(alpha_min..=1.0)).collect();
        let signs = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Ok(Self::PerNode { alphas, signs })
    }

    /// Diagonal of `K` for an `n`-node network.
    pub fn k_diagonal(&self, n: usize) -> Result<DVector<f64>> {
        match self {
            Self::Unity => Ok(DVector::zeros(n)),
            Self::UniformKappa { kappa } => {
                if !kappa.is_finite() {
                    return Err(Error::Domain(format!("kappa must be finite, got {kappa}")));
                }
                Ok(DVector::from_element(n, *kappa))
            }
            Self::PerNode { alphas, signs } => {
                Error::check_dim(n, alphas.len())?;
                Error::check_dim(n, signs.len())?;
                alphas
                    .iter()
                    .zip(signs)
                    .map(|(&a, &s)| kappa_from_power_factor(a, s))
                    .collect::<Result<Vec<_>>>()
                    .map(DVector::from_vec)
            }
        }
    }

    /// The common ratio `κ` when `K = κ I`, otherwise `None`.
    pub fn uniform_kappa(&self) -> Option<f64> {
        match self {
            Self::Unity => Some(0.0),
            Self::UniformKappa { kappa } => Some(*kappa),
            Self::PerNode { alphas, signs } => {
                let k = self.k_diagonal(alphas.len()).ok()?;
                let first = *k.iter().next()?;
                (k.iter().all(|&v| v == first) && signs.len() == alphas.len()).then_some(first)
            }
        }
    }

    pub fn is_unity(&self) -> bool {
        self.uniform_kappa() == Some(0.0)
    }
}
