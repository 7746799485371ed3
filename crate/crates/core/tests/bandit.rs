mod common;

use gridsense::bandit::{
    effective_dimension, exhaustive_maximize, greedy_select, optimistic_reward, regularized_ls, reward,
    spectral_initial_gram, ActionBudget, Algorithm, Exploration, ExtremeSpectralSampler, Regularizer,
    SamplerState,
};
use gridsense::grid::{build_system_laplacian, case33bw, PowerFactorProfile, SystemLaplacian};
use gridsense::powerflow::{FlowModel, VoltageProfile};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn profile(values: Vec<f64>) -> VoltageProfile {
    VoltageProfile { magnitudes: DVector::from_vec(values), model: FlowModel::LinDistFlow, nominal: 1.0 }
}

fn voltages(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.9f64..1.1, n)
}

fn subset_of(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(any::<bool>(), n)
        .prop_map(|mask| mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect())
}

fn random_model(seed: u64, n_buses: usize) -> SystemLaplacian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let case = common::random_tree(&mut rng, n_buses, 0.5..=2.0, 0.1..=1.0);
    build_system_laplacian(&case, &PowerFactorProfile::Unity).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reward_is_monotone(v in voltages(10), s in subset_of(10), extra in subset_of(10)) {
        let mut t: Vec<usize> = s.iter().chain(&extra).copied().collect();
        t.sort_unstable();
        t.dedup();
        let v = profile(v);
        prop_assert!(reward(&s, &v) <= reward(&t, &v));
    }

    #[test]
    fn reward_is_submodular(v in voltages(10), s in subset_of(10), t in subset_of(10)) {
        let v = profile(v);
        let inter: Vec<usize> = s.iter().copied().filter(|i| t.contains(i)).collect();
        let mut union: Vec<usize> = s.iter().chain(&t).copied().collect();
        union.sort_unstable();
        union.dedup();
        prop_assert!(reward(&s, &v) + reward(&t, &v) >= reward(&inter, &v) + reward(&union, &v) - 1e-15);
    }

    #[test]
    fn reward_is_one_lipschitz(v in voltages(10), d in proptest::collection::vec(-0.05f64..0.05, 10), s in subset_of(10)) {
        let w: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + b).collect();
        let dist = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((reward(&s, &profile(v)) - reward(&s, &profile(w))).abs() <= dist + 1e-15);
    }

    #[test]
    fn greedy_meets_guarantee_and_ignores_scale(seed in any::<u64>(), n in 2usize..=12, b in 1usize..=3, scale in 0.01f64..100.0) {
        let b = b.min(n);
        let sys = random_model(seed, n + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut sampler = ExtremeSpectralSampler::new(
            Algorithm::SpectralUcb, &sys, ActionBudget::new(b, n).unwrap(),
            Regularizer::Spectral { beta: 1.0 }, Exploration::Fixed(0.2), None, 0,
        ).unwrap();
        for _ in 0..rng.random_range(0..20) {
            let i = rng.random_range(0..n);
            sampler.observe(&[i], &[rng.random_range(-0.1..0.1)]).unwrap();
        }
        let f = |s: &[usize]| optimistic_reward(s, sampler.state(), sampler.features(), 0.2);
        let budget = ActionBudget::new(b, n).unwrap();
        let ucb = sampler.ucb_values();
        let greedy = greedy_select(&ucb, budget);
        let (_, opt) = exhaustive_maximize(n, b, f);
        prop_assert!(f(&greedy) >= (1.0 - (-1f64).exp()) * opt - 1e-12);
        prop_assert_eq!(greedy_select(&(ucb * scale), budget), greedy);
    }
}

#[test]
fn incremental_matches_batch_every_round() {
    let sys = build_system_laplacian(&case33bw(), &PowerFactorProfile::Unity).unwrap();
    let v0 = spectral_initial_gram(&sys, Regularizer::Spectral { beta: 1.0 }).unwrap();
    let mut state = SamplerState::new(v0.clone()).unwrap();
    let mut history = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let picks = [rng.random_range(0..32), rng.random_range(0..32)];
        let feats: Vec<DVector<f64>> = picks.iter().map(|&i| sys.node_feature(i)).collect();
        let ys: Vec<f64> = picks.iter().map(|_| rng.random_range(-0.08..0.0)).collect();
        state.update(&feats, &ys).unwrap();
        history.extend(feats.into_iter().zip(ys));
        let batch = regularized_ls(&history, &v0).unwrap();
        assert!((state.psi_hat() - &batch).amax() < 1e-8);
        assert!(state.gram().clone().symmetric_eigenvalues().min() > 0.0);
    }
}

#[test]
fn lin_ucb_matches_rotated_features() {
    // LinUCB on one-hot features with λI equals LinUCB on rows of W with λI
    let sys = build_system_laplacian(&case33bw(), &PowerFactorProfile::Unity).unwrap();
    let budget = ActionBudget::new(1, 32).unwrap();
    let mut lin = ExtremeSpectralSampler::new(
        Algorithm::LinUcb, &sys, budget, Regularizer::L2 { lambda: 1.0 }, Exploration::Fixed(0.1), None, 0,
    )
    .unwrap();
    let mut rotated = SamplerState::new(DMatrix::identity(32, 32)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in 1..=100 {
        let ucb_rot = DVector::from_fn(32, |i, _| {
            let w = sys.node_feature(i);
            w.dot(rotated.psi_hat()).abs() + 0.1 * rotated.weighted_norm(&w)
        });
        assert!((lin.ucb_values() - &ucb_rot).amax() < 1e-10, "round {t}");
        let pick = lin.select(t);
        let y = rng.random_range(-0.06..0.0);
        lin.observe(&pick, &[y]).unwrap();
        rotated.update(&[sys.node_feature(pick[0])], &[y]).unwrap();
    }
}

#[test]
fn noiseless_estimate_converges() {
    let sys = build_system_laplacian(&case33bw(), &PowerFactorProfile::Unity).unwrap();
    let v0 = spectral_initial_gram(&sys, Regularizer::Spectral { beta: 1.0 }).unwrap();
    let mut state = SamplerState::new(v0.clone()).unwrap();
    let psi_star = sys.voltage_coefficients(&case33bw().nominal_injections()).unwrap();
    let mut errors = Vec::new();
    for t in 0..200 {
        let i = t % 32;
        let w = sys.node_feature(i);
        state.update(std::slice::from_ref(&w), &[w.dot(&psi_star)]).unwrap();
        if i == 31 {
            errors.push((state.psi_hat() - &psi_star).norm());
        }
    }
    assert!(errors.windows(2).all(|e| e[1] <= e[0]), "{errors:?}");
    // ψ̂ − ψ★ = −V⁻¹V₀ψ★
    let bias_bound = v0.diagonal().max() * psi_star.norm() / state.gram().clone().symmetric_eigenvalues().min();
    assert!(*errors.last().unwrap() <= bias_bound);
}

#[test]
fn effective_dimension_examples() {
    assert_eq!(effective_dimension(&DVector::from_element(50, 1.0), 100).unwrap(), 22);
    let steep = DVector::from_iterator(10, (1..=10).map(|i| i as f64 * 1e6));
    assert_eq!(effective_dimension(&steep, 100).unwrap(), 1);
    let sys = build_system_laplacian(&case33bw(), &PowerFactorProfile::Unity).unwrap();
    let d = effective_dimension(sys.eigenvalues(), 1000).unwrap();
    assert!((1..=32).contains(&d));
}

#[test]
fn confidence_coverage_small_sample() {
    let delta = 0.05;
    let mut violations = 0;
    let runs = 300;
    for run in 0..runs {
        let sys = random_model(run, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(run + 1000);
        let p_star = DVector::from_fn(5, |_, _| rng.random_range(-0.5..0.5));
        let out = common::coverage_run(&sys, &p_star, 1.0, delta, 30, run);
        assert!(out.potential_ok);
        violations += usize::from(out.violated);
    }
    let rate = violations as f64 / runs as f64;
    assert!(rate <= delta + 3.0 * (delta * (1.0 - delta) / runs as f64).sqrt(), "{rate}");
}
