//! Reward, greedy selection, regularized least squares and the UCB sampler.

mod confidence;
mod estimator;
mod greedy;
mod reward;
mod sampler;

pub use confidence::{confidence_width, effective_dimension, ConfidenceParams};
pub use estimator::{regularized_ls, spectral_initial_gram, Regularizer, SamplerState};
pub use greedy::{exhaustive_maximize, greedy_maximize, greedy_select};
pub use reward::{max_deviation, reward, ActionBudget, RewardSample};
pub use sampler::{optimistic_reward, Algorithm, Exploration, ExtremeSpectralSampler};
