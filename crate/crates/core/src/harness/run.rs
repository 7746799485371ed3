use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, GroundTruth, PfMode};
use crate::bandit::{
    exhaustive_maximize, greedy_maximize, max_deviation, ActionBudget, Algorithm, ConfidenceParams,
    ExtremeSpectralSampler,
};
use crate::error::{Error, Result};
use crate::grid::{LaplacianPair, NetworkCase, PowerFactorProfile, SystemLaplacian};
use crate::loads::{InjectionBounds, InjectionProcess};
use crate::powerflow::{ac_power_mismatch, ac_solve_with, reactive_from_active, RadialTopology};

/// Largest accepted AC power mismatch at a returned solution, pu.
pub const AC_RESIDUAL_LIMIT: f64 = 1e-8;

/// Stream reserved for per-seed power-factor draws; injections use `1..=m`.
const PF_STREAM: u64 = u64::MAX;
/// Mixed into the seed of the `random` baseline so it never shares a stream
/// with the injections.
const SELECTION_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// One round of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    /// Node indices in the order they were picked.
    pub chosen: Vec<usize>,
    pub reward: f64,
    pub clairvoyant_reward: f64,
    pub instant_regret: f64,
    pub cum_regret: f64,
    /// Against the single set that is best over the whole horizon.
    pub cum_regret_fixed_best: f64,
    /// Regret with rewards taken from AC voltages; AC runs only.
    pub cum_regret_ac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub config_digest: String,
    pub records: Vec<RoundRecord>,
    /// Worst AC power mismatch over the horizon; AC runs only.
    pub ac_max_residual: Option<f64>,
}

impl RegretTrace {
    /// `R_t`, 1-based.
    pub fn regret_at(&self, t: usize) -> f64 {
        self.records[t - 1].cum_regret
    }

    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }
}

/// Best set for one round of realized deviations: the largest deviation
/// alone attains the maximum for any budget. Ties go to the lowest index.
pub fn clairvoyant_oracle(deviations: &DVector<f64>, budget: ActionBudget) -> (Vec<usize>, f64) {
    debug_assert_eq!(deviations.len(), budget.n());
    let (mut best, mut value) = (0, f64::NEG_INFINITY);
    for (i, &d) in deviations.iter().enumerate() {
        if d > value {
            (best, value) = (i, d);
        }
    }
    (vec![best], value)
}

/// The set of `b` nodes with the largest total reward over all rounds.
/// Exhaustive for `b ≤ 2`, greedy beyond.
pub fn fixed_best_in_hindsight(deviations: &[DVector<f64>], budget: ActionBudget) -> Vec<usize> {
    let total = |s: &[usize]| deviations.iter().map(|d| max_deviation(s, d)).sum::<f64>();
    if budget.b() <= 2 {
        exhaustive_maximize(budget.n(), budget.b(), total).0
    } else {
        greedy_maximize(budget.n(), budget.b(), total)
    }
}

/// Everything an algorithm can face for one seed, generated once so that
/// every algorithm sees the same injections.
#[derive(Debug, Clone)]
pub struct Environment {
    pub seed: u64,
    pub pf: PowerFactorProfile,
    pub basis: SystemLaplacian,
    pub confidence: ConfidenceParams,
    /// `v_t − v•` under LinDistFlow, rounds `1..=m`.
    pub centered_lindistflow: Vec<DVector<f64>>,
    /// `v_t − v•` from the AC sweep, when the ground truth is AC.
    pub centered_ac: Option<Vec<DVector<f64>>>,
    pub ac_max_residual: Option<f64>,
}

impl Environment {
    pub fn build(cfg: &ExperimentConfig, case: &NetworkCase, pair: &LaplacianPair, seed: u64) -> Result<Self> {
        let n = case.node_count();
        let pf = match cfg.pf {
            PfMode::Unity => PowerFactorProfile::Unity,
            PfMode::Kappa(kappa) => PowerFactorProfile::UniformKappa { kappa },
            PfMode::Random { alpha_min } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(PF_STREAM);
                PowerFactorProfile::random(n, alpha_min, &mut rng)?
            }
        };
        let basis = SystemLaplacian::from_pair(pair, &pf)?;
        let bounds = InjectionBounds::symmetric(n, cfg.delta_span)?;
        let confidence = ConfidenceParams::from_model(&basis, &bounds, cfg.confidence_delta)?;
        let process = InjectionProcess::new(case.nominal_injections(), bounds, cfg.distribution, seed)?;
        let v_nom = case.nominal_voltage();
        let topology = (cfg.ground_truth == GroundTruth::Ac).then(|| RadialTopology::new(case));

        let mut centered_lindistflow = Vec::with_capacity(cfg.horizon as usize);
        let mut centered_ac = topology.as_ref().map(|_| Vec::with_capacity(cfg.horizon as usize));
        let mut worst = 0.0f64;
        for t in 1..=cfg.horizon {
            let p = process.sample_injection(t);
            centered_lindistflow.push(basis.l_inv() * &p);
            if let (Some(topo), Some(out)) = (&topology, centered_ac.as_mut()) {
                let at = |e: Error| Error::AtRound { round: t, source: Box::new(e) };
                let q = reactive_from_active(&p, &pf).map_err(at)?;
                let sol = ac_solve_with(topo, &p, &q, v_nom).map_err(at)?;
                let residual = ac_power_mismatch(case, &sol, &p, &q);
                if !(residual < AC_RESIDUAL_LIMIT) {
                    return Err(at(Error::Numeric(format!("AC power mismatch {residual:.3e} exceeds limit"))));
                }
                worst = worst.max(residual);
                out.push(sol.profile().centered());
            }
        }
        let ac_max_residual = centered_ac.as_ref().map(|_| worst);
        Ok(Self { seed, pf, basis, confidence, centered_lindistflow, centered_ac, ac_max_residual })
    }

    /// What the learner reads in round `t ≥ 1`.
    pub fn observed(&self, t: u64) -> &DVector<f64> {
        let k = (t - 1) as usize;
        self.centered_ac.as_ref().map_or(&self.centered_lindistflow[k], |ac| &ac[k])
    }

    /// Runs one algorithm over the whole horizon.
    pub fn run(&self, cfg: &ExperimentConfig, algorithm: Algorithm, digest: &str) -> Result<RegretTrace> {
        let n = self.basis.dim();
        let budget = ActionBudget::new(cfg.budget, n)?;
        let mut sampler = ExtremeSpectralSampler::new(
            algorithm,
            &self.basis,
            budget,
            cfg.regularizer(algorithm),
            cfg.exploration,
            Some(self.confidence),
            self.seed ^ SELECTION_SALT,
        )?;

        let dev_lin: Vec<DVector<f64>> = self.centered_lindistflow.iter().map(|y| y.abs()).collect();
        let dev_ac: Option<Vec<DVector<f64>>> = self.centered_ac.as_ref().map(|v| v.iter().map(|y| y.abs()).collect());
        let fixed = fixed_best_in_hindsight(&dev_lin, budget);

        let mut records = Vec::with_capacity(dev_lin.len());
        let (mut cum, mut cum_fixed, mut cum_ac) = (0.0, 0.0, 0.0);
        for t in 1..=cfg.horizon {
            let k = (t - 1) as usize;
            let chosen = sampler.select(t);
            let seen = self.observed(t);
            let readings: Vec<f64> = chosen.iter().map(|&i| seen[i]).collect();
            sampler.observe(&chosen, &readings).map_err(|e| Error::AtRound { round: t, source: Box::new(e) })?;

            let reward = max_deviation(&chosen, &dev_lin[k]);
            let (_, clairvoyant_reward) = clairvoyant_oracle(&dev_lin[k], budget);
            let instant_regret = clairvoyant_reward - reward;
            cum += instant_regret;
            cum_fixed += max_deviation(&fixed, &dev_lin[k]) - reward;
            let cum_regret_ac = dev_ac.as_ref().map(|d| {
                cum_ac += clairvoyant_oracle(&d[k], budget).1 - max_deviation(&chosen, &d[k]);
                cum_ac
            });
            records.push(RoundRecord {
                t,
                chosen,
                reward,
                clairvoyant_reward,
                instant_regret,
                cum_regret: cum,
                cum_regret_fixed_best: cum_fixed,
                cum_regret_ac,
            });
        }
        Ok(RegretTrace {
            algorithm,
            seed: self.seed,
            config_digest: digest.to_owned(),
            records,
            ac_max_residual: self.ac_max_residual,
        })
    }
}

/// Runs every configured algorithm on every seed. Seeds run in parallel;
/// traces come back ordered by seed, then by algorithm as configured.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RegretTrace>> {
    cfg.validate()?;
    let case = cfg.load_case()?;
    run_experiment_on(cfg, &case)
}

/// [`run_experiment`] on an already loaded case.
pub fn run_experiment_on(cfg: &ExperimentConfig, case: &NetworkCase) -> Result<Vec<RegretTrace>> {
    cfg.validate()?;
    ActionBudget::new(cfg.budget, case.node_count())?;
    let pair = LaplacianPair::from_case(case)?;
    let digest = cfg.digest();
    let per_seed: Vec<Vec<RegretTrace>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let env = Environment::build(cfg, case, &pair, seed)?;
            cfg.algorithms.iter().map(|&a| env.run(cfg, a, &digest)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}
