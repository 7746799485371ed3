#![allow(dead_code)]

use gridsense::grid::{Branch, Bus, NetworkCase};
use rand::Rng;

/// Random tree on buses `1..=n_buses` rooted at slack bus 1: bus `k` hangs
/// off a uniformly chosen earlier bus.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    n_buses: usize,
    r: std::ops::RangeInclusive<f64>,
    x: std::ops::RangeInclusive<f64>,
) -> NetworkCase {
    let buses = (1..=n_buses).map(|id| Bus { id, p_nominal: 0.0, q_nominal: 0.0 }).collect();
    let branches = (2..=n_buses)
        .map(|to| Branch {
            from: rng.random_range(1..to),
            to,
            r: rng.random_range(r.clone()),
            x: rng.random_range(x.clone()),
        })
        .collect();
    NetworkCase::new(1.0, 1.0, 1, buses, branches).expect("random tree is radial")
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            go(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

use gridsense::bandit::{ActionBudget, Algorithm, ConfidenceParams, Exploration, ExtremeSpectralSampler, Regularizer};
use gridsense::grid::SystemLaplacian;
use gridsense::loads::{Distribution, InjectionBounds, InjectionProcess};
use nalgebra::DVector;

/// Outcome of one confidence-ellipsoid run.
pub struct CoverageRun {
    /// Some round and node had `|w_iᵀ(ψ̂_t − ψ★)| > c_t ‖w_i‖_{V_t⁻¹}`.
    pub violated: bool,
    /// Every round satisfied `Σ min(1, ‖w‖²_{V⁻¹}) ≤ 2 log(det V_t / det V₀)`.
    pub potential_ok: bool,
}

/// SpectralUCB with the theoretical schedule and `V₀ = |Λ|` on `sys`, with
/// the learner reading `y = (R + XK) p_t` under uniform injections around
/// `p_star`.
pub fn coverage_run(sys: &SystemLaplacian, p_star: &DVector<f64>, span: f64, delta: f64, rounds: u64, seed: u64) -> CoverageRun {
    let n = sys.dim();
    let bounds = InjectionBounds::symmetric(n, span).unwrap();
    let conf = ConfidenceParams::from_model(sys, &bounds, delta).unwrap();
    let mut sampler = ExtremeSpectralSampler::new(
        Algorithm::SpectralUcb,
        sys,
        ActionBudget::new(1, n).unwrap(),
        Regularizer::Spectral { beta: 1.0 },
        Exploration::Theoretical,
        Some(conf),
        seed,
    )
    .unwrap();
    let proc = InjectionProcess::new(p_star.clone(), bounds, Distribution::Uniform, seed).unwrap();
    let psi_star = sys.basis().tr_mul(&(sys.l_inv() * p_star));
    let mut run = CoverageRun { violated: false, potential_ok: true };
    for t in 1..=rounds {
        let chosen = sampler.select(t);
        let y = sys.l_inv() * proc.sample_injection(t);
        let readings: Vec<f64> = chosen.iter().map(|&i| y[i]).collect();
        sampler.observe(&chosen, &readings).unwrap();
        let state = sampler.state();
        let c = conf.coefficient(state);
        let err = state.psi_hat() - &psi_star;
        for i in 0..n {
            let w = sys.node_feature(i);
            if w.dot(&err).abs() > c * state.weighted_norm(&w) {
                run.violated = true;
            }
        }
        if state.elliptical_potential() > 2.0 * (state.log_det() - state.log_det_initial()) + 1e-12 {
            run.potential_ok = false;
        }
    }
    run
}
