use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerflow::VoltageProfile;

/// At most `b` of `n` nodes may be read per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionBudget {
    b: usize,
    n: usize,
}

impl ActionBudget {
    pub fn new(b: usize, n: usize) -> Result<Self> {
        if b == 0 || b > n {
            return Err(Error::Config(format!("budget must satisfy 1 ≤ b ≤ n = {n}, got {b}")));
        }
        Ok(Self { b, n })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C(n, b)`, the number of sets of exactly `b` nodes, as a float.
    pub fn action_count(&self) -> f64 {
        (0..self.b).fold(1.0, |acc, k| acc * (self.n - k) as f64 / (k + 1) as f64)
    }
}

/// Observed nodes of one round with their deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSample {
    pub chosen: Vec<usize>,
    pub reward: f64,
    pub per_node_deviation: Vec<f64>,
}

impl RewardSample {
    pub fn observe(chosen: &[usize], profile: &VoltageProfile) -> Self {
        let per_node_deviation: Vec<f64> =
            chosen.iter().map(|&i| (profile.magnitudes[i] - profile.nominal).abs()).collect();
        let reward = per_node_deviation.iter().copied().fold(0.0, f64::max);
        Self { chosen: chosen.to_vec(), reward, per_node_deviation }
    }
}

/// `f(S) = max_{i∈S} |v_i − v•|`, with `f(∅) = 0`.
pub fn reward(set: &[usize], profile: &VoltageProfile) -> f64 {
    set.iter().map(|&i| (profile.magnitudes[i] - profile.nominal).abs()).fold(0.0, f64::max)
}

/// `max_{i∈S} values_i`, 0 on the empty set. Values are assumed nonnegative.
pub fn max_deviation(set: &[usize], values: &DVector<f64>) -> f64 {
    set.iter().map(|&i| values[i]).fold(0.0, f64::max)
}
