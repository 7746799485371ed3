use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::confidence::ConfidenceParams;
use super::estimator::{feature_row, Regularizer, SamplerState};
use super::greedy::greedy_select;
use super::reward::ActionBudget;
use crate::error::{Error, Result};
use crate::grid::SystemLaplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// UCB on graph Fourier features with a spectral regularizer.
    SpectralUcb,
    /// UCB on one-hot node features with an `ℓ₂` regularizer.
    LinUcb,
    /// Uniformly random sets. Baseline.
    Random,
    /// Cycles through the nodes in index order. Baseline.
    RoundRobin,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::SpectralUcb, Self::LinUcb, Self::Random, Self::RoundRobin];

    pub fn name(self) -> &'static str {
        match self {
            Self::SpectralUcb => "spectral-ucb",
            Self::LinUcb => "lin-ucb",
            Self::Random => "random",
            Self::RoundRobin => "round-robin",
        }
    }

    pub fn learns(self) -> bool {
        matches!(self, Self::SpectralUcb | Self::LinUcb)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Exploration coefficient `c` in front of the confidence width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exploration {
    Fixed(f64),
    /// `c_t` from [`ConfidenceParams::coefficient`].
    Theoretical,
}

impl fmt::Display for Exploration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(c) => write!(f, "{c}"),
            Self::Theoretical => f.write_str("theoretical"),
        }
    }
}

impl FromStr for Exploration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "theoretical" {
            return Ok(Self::Theoretical);
        }
        match s.parse::<f64>() {
            Ok(c) if c >= 0.0 && c.is_finite() => Ok(Self::Fixed(c)),
            _ => Err(Error::Config(format!("exploration must be `theoretical` or a nonnegative number, got `{s}`"))),
        }
    }
}

/// `max_{i∈S} |f_iᵀ ψ̂| + c ‖f_i‖_{V⁻¹}` where `f_i` is row `i` of `features`.
pub fn optimistic_reward(set: &[usize], state: &SamplerState, features: &DMatrix<f64>, c: f64) -> f64 {
    set.iter()
        .map(|&i| {
            let f = feature_row(features, i);
            f.dot(state.psi_hat()).abs() + c * state.weighted_norm(&f)
        })
        .fold(0.0, f64::max)
}

/// The sampling loop's decision maker: picks `b` nodes per round and learns
/// from their centered readings.
#[derive(Debug, Clone)]
pub struct ExtremeSpectralSampler {
    algorithm: Algorithm,
    budget: ActionBudget,
    /// Row `i` is the feature vector of node `i`.
    features: DMatrix<f64>,
    state: SamplerState,
    exploration: Exploration,
    confidence: Option<ConfidenceParams>,
    seed: u64,
}

impl ExtremeSpectralSampler {
    /// Spectral learners use the rows of `W` as features; `LinUcb` uses the
    /// standard basis and needs an `L2` regularizer.
    pub fn new(
        algorithm: Algorithm,
        basis: &SystemLaplacian,
        budget: ActionBudget,
        regularizer: Regularizer,
        exploration: Exploration,
        confidence: Option<ConfidenceParams>,
        seed: u64,
    ) -> Result<Self> {
        let n = basis.dim();
        Error::check_dim(n, budget.n())?;
        if exploration == Exploration::Theoretical && confidence.is_none() && algorithm.learns() {
            return Err(Error::Config("theoretical exploration needs confidence parameters".into()));
        }
        let features = match algorithm {
            Algorithm::LinUcb => {
                if !matches!(regularizer, Regularizer::L2 { .. }) {
                    return Err(Error::Config("lin-ucb takes an l2 regularizer".into()));
                }
                DMatrix::identity(n, n)
            }
            _ => basis.basis().clone(),
        };
        let state = SamplerState::new(regularizer.initial_gram(&basis.regularizer_weights())?)?;
        Ok(Self { algorithm, budget, features, state, exploration, confidence, seed })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn state(&self) -> &SamplerState {
        &self.state
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// Current `c` (or `c_t`).
    pub fn exploration_coefficient(&self) -> f64 {
        match (self.exploration, &self.confidence) {
            (Exploration::Fixed(c), _) => c,
            (Exploration::Theoretical, Some(p)) => p.coefficient(&self.state),
            (Exploration::Theoretical, None) => 0.0,
        }
    }

    /// Per-node optimistic values `|f_iᵀψ̂| + c ‖f_i‖_{V⁻¹}`.
    pub fn ucb_values(&self) -> DVector<f64> {
        let c = self.exploration_coefficient();
        let predicted = &self.features * self.state.psi_hat();
        let projected = &self.features * self.state.gram_inv();
        DVector::from_iterator(
            self.features.nrows(),
            (0..self.features.nrows()).map(|i| {
                let var = projected.row(i).dot(&self.features.row(i)).max(0.0);
                predicted[i].abs() + c * var.sqrt()
            }),
        )
    }

    /// Nodes to read in round `t ≥ 1`.
    pub fn select(&self, t: u64) -> Vec<usize> {
        let (n, b) = (self.budget.n(), self.budget.b());
        match self.algorithm {
            Algorithm::SpectralUcb | Algorithm::LinUcb => greedy_select(&self.ucb_values(), self.budget),
            Algorithm::RoundRobin => {
                let start = (t.saturating_sub(1) as usize * b) % n;
                (0..b).map(|k| (start + k) % n).collect()
            }
            Algorithm::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(t);
                rand::seq::index::sample(&mut rng, n, b).into_vec()
            }
        }
    }

    /// Feeds the centered readings `v_i − v•` of the nodes in `set`.
    pub fn observe(&mut self, set: &[usize], centered: &[f64]) -> Result<()> {
        Error::check_dim(set.len(), centered.len())?;
        if !self.algorithm.learns() {
            return Ok(());
        }
        let feats: Vec<DVector<f64>> = set.iter().map(|&i| feature_row(&self.features, i)).collect();
        self.state.update(&feats, centered)
    }
}
