//! Bounded random injections `p_t = p★ + p̃_t` and the concentration bounds
//! they imply for nodal voltages.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SystemLaplacian;

/// Elementwise range `[p̲, p̄]` of the perturbation `p̃_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionBounds {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl InjectionBounds {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        Error::check_dim(lower.len(), upper.len())?;
        for (k, (lo, hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Domain(format!("bound {k} is not finite")));
            }
            if lo > hi {
                return Err(Error::Domain(format!("bound {k}: lower {lo} exceeds upper {hi}")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[−Δ/2, Δ/2]` at every node.
    pub fn symmetric(n: usize, span: f64) -> Result<Self> {
        if !(span >= 0.0) {
            return Err(Error::Domain(format!("span must be nonnegative, got {span}")));
        }
        Self::new(DVector::from_element(n, -0.5 * span), DVector::from_element(n, 0.5 * span))
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// `Δ = p̄ − p̲` per node.
    pub fn span(&self) -> DVector<f64> {
        &self.upper - &self.lower
    }

    /// Scalar `Δ`: the widest per-node span.
    pub fn scalar_span(&self) -> f64 {
        self.span().iter().copied().fold(0.0, f64::max)
    }
}

/// Bounds over time. Round `t` of a `PerRound` schedule uses entry
/// `(t − 1) mod len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSchedule {
    Constant(InjectionBounds),
    PerRound(Vec<InjectionBounds>),
}

impl BoundSchedule {
    pub fn at(&self, t: u64) -> &InjectionBounds {
        match self {
            Self::Constant(b) => b,
            Self::PerRound(list) => &list[(t.saturating_sub(1) % list.len() as u64) as usize],
        }
    }

    /// The constant bounds; time-varying schedules are rejected.
    pub fn constant(&self) -> Result<&InjectionBounds> {
        match self {
            Self::Constant(b) => Ok(b),
            Self::PerRound(_) => {
                Err(Error::Domain("concentration bounds need a constant span Δ over time".into()))
            }
        }
    }
}

impl From<InjectionBounds> for BoundSchedule {
    fn from(b: InjectionBounds) -> Self {
        Self::Constant(b)
    }
}

/// Law of each perturbation component within its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Uniform,
    /// Normal at the midpoint with standard deviation `span / 4`, resampled
    /// when it lands outside the bounds.
    #[serde(alias = "truncgauss")]
    TruncatedGaussian,
    /// One of the two endpoints with equal probability.
    #[serde(alias = "twopoint")]
    TwoPoint,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "truncgauss" | "truncated-gaussian" => Ok(Self::TruncatedGaussian),
            "twopoint" | "two-point" => Ok(Self::TwoPoint),
            other => Err(Error::Config(format!("unknown distribution `{other}`"))),
        }
    }
}

const MAX_REJECTIONS: usize = 64;

impl Distribution {
    fn draw<R: Rng + ?Sized>(self, lo: f64, hi: f64, rng: &mut R) -> f64 {
        if lo == hi {
            return lo;
        }
        match self {
            Self::Uniform => rng.random_range(lo..=hi),
            Self::TwoPoint => {
                if rng.random::<bool>() {
                    hi
                } else {
                    lo
                }
            }
            Self::TruncatedGaussian => {
                let normal = Normal::new(0.5 * (lo + hi), 0.25 * (hi - lo)).expect("positive sd");
                let mut x = normal.sample(rng);
                for _ in 0..MAX_REJECTIONS {
                    if (lo..=hi).contains(&x) {
                        return x;
                    }
                    x = normal.sample(rng);
                }
                x.clamp(lo, hi)
            }
        }
    }
}

/// `p_t = p★ + p̃_t` with independent components of `p̃_t`.
///
/// Stateless: round `t` draws from a ChaCha stream keyed by `(seed, t)`, so
/// any round can be regenerated in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionProcess {
    pub nominal: DVector<f64>,
    pub bounds: BoundSchedule,
    pub distribution: Distribution,
    pub seed: u64,
}

impl InjectionProcess {
    pub fn new(
        nominal: DVector<f64>,
        bounds: impl Into<BoundSchedule>,
        distribution: Distribution,
        seed: u64,
    ) -> Result<Self> {
        let bounds = bounds.into();
        let lens: Vec<usize> = match &bounds {
            BoundSchedule::Constant(b) => vec![b.len()],
            BoundSchedule::PerRound(list) if list.is_empty() => {
                return Err(Error::Config("per-round bound schedule is empty".into()))
            }
            BoundSchedule::PerRound(list) => list.iter().map(InjectionBounds::len).collect(),
        };
        for len in lens {
            Error::check_dim(nominal.len(), len)?;
        }
        Ok(Self { nominal, bounds, distribution, seed })
    }

    pub fn dim(&self) -> usize {
        self.nominal.len()
    }

    /// `p̃_t`.
    pub fn sample_perturbation(&self, t: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t);
        let b = self.bounds.at(t);
        DVector::from_iterator(
            self.dim(),
            b.lower().iter().zip(b.upper().iter()).map(|(&lo, &hi)| self.distribution.draw(lo, hi, &mut rng)),
        )
    }

    /// `p_t = p★ + p̃_t`.
    pub fn sample_injection(&self, t: u64) -> DVector<f64> {
        &self.nominal + self.sample_perturbation(t)
    }
}

/// Which power of `‖Λ⁻¹w_i‖₂` enters the expected-maximum bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationForm {
    /// `‖Λ⁻¹w_i‖₂`, the sub-Gaussian parameter of each node.
    #[default]
    Unsquared,
    /// `‖Λ⁻¹w_i‖₂²`.
    Squared,
}

fn filtered_norm(basis: &SystemLaplacian, i: usize) -> Result<f64> {
    if i >= basis.dim() {
        return Err(Error::Domain(format!("node {i} out of range for {} nodes", basis.dim())));
    }
    if basis.eigenvalues().iter().any(|l| *l == 0.0 || !l.is_finite()) {
        return Err(Error::Numeric("Λ has a zero or non-finite eigenvalue".into()));
    }
    Ok(basis.filtered_row_norm(i))
}

fn max_filtered_norm(basis: &SystemLaplacian, set: &[usize]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Domain("node set is empty".into()));
    }
    set.iter().try_fold(0.0, |acc, &i| Ok(f64::max(acc, filtered_norm(basis, i)?)))
}

/// `σ_i = ½ Δ ‖Λ⁻¹ w_i‖₂`: the voltage at node `i` minus its mean is
/// sub-Gaussian with this parameter.
pub fn subgaussian_parameter(basis: &SystemLaplacian, bounds: &BoundSchedule, i: usize) -> Result<f64> {
    let delta = bounds.constant()?.scalar_span();
    Ok(0.5 * delta * filtered_norm(basis, i)?)
}

/// `c · ½Δ · max_{i∈S} m_i · √(2 log b)` bounding `E max_{i∈S} |v_i − E v_i|`,
/// where `m_i` is `‖Λ⁻¹w_i‖₂` or its square per `form`. For `b = 1` the
/// logarithm is evaluated at `2b`.
pub fn max_fluctuation_expectation_bound(
    basis: &SystemLaplacian,
    bounds: &BoundSchedule,
    set: &[usize],
    form: ExpectationForm,
    constant: f64,
) -> Result<f64> {
    let delta = bounds.constant()?.scalar_span();
    let m = max_filtered_norm(basis, set)?;
    let m = match form {
        ExpectationForm::Unsquared => m,
        ExpectationForm::Squared => m * m,
    };
    let b = set.len() as f64;
    let log_b = if set.len() == 1 { (2.0 * b).ln() } else { b.ln() };
    Ok(constant * 0.5 * delta * m * (2.0 * log_b).sqrt())
}

/// `min(1, 2b · exp(−2ε² / (Δ² max_{i∈S} ‖Λ⁻¹w_i‖₂²)))` bounding
/// `P(max_{i∈S} |v_i − E v_i| ≥ ε)`.
pub fn max_fluctuation_tail_bound(basis: &SystemLaplacian, bounds: &BoundSchedule, set: &[usize], eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("ε must be positive, got {eps}")));
    }
    let delta = bounds.constant()?.scalar_span();
    let m = max_filtered_norm(basis, set)?;
    let scale = delta * delta * m * m;
    if scale == 0.0 {
        return Ok(0.0);
    }
    let b = set.len() as f64;
    Ok(f64::min(1.0, 2.0 * b * (-2.0 * eps * eps / scale).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_system_laplacian, Branch, Bus, NetworkCase, PowerFactorProfile};

    fn path3() -> SystemLaplacian {
        let buses = (1..=3).map(|id| Bus { id, p_nominal: 0.0, q_nominal: 0.0 }).collect();
        let branches = vec![Branch { from: 1, to: 2, r: 1.0, x: 1.0 }, Branch { from: 2, to: 3, r: 1.0, x: 1.0 }];
        let case = NetworkCase::new(1.0, 1.0, 1, buses, branches).unwrap();
        build_system_laplacian(&case, &PowerFactorProfile::Unity).unwrap()
    }

    fn process(span: f64, dist: Distribution) -> InjectionProcess {
        let nominal = DVector::from_vec(vec![-0.3, 0.2, 0.0]);
        InjectionProcess::new(nominal, InjectionBounds::symmetric(3, span).unwrap(), dist, 11).unwrap()
    }

    #[test]
    fn zero_span_returns_nominal() {
        let p = process(0.0, Distribution::Uniform);
        for t in 1..20 {
            assert_eq!(p.sample_injection(t), p.nominal);
        }
    }

    #[test]
    fn samples_stay_in_bounds() {
        for dist in [Distribution::Uniform, Distribution::TruncatedGaussian, Distribution::TwoPoint] {
            let p = process(0.2, dist);
            for t in 1..5_000 {
                let x = p.sample_perturbation(t);
                assert!(x.iter().all(|v| (-0.1..=0.1).contains(v)), "{dist:?} at t={t}: {x}");
            }
        }
    }

    #[test]
    fn two_point_hits_endpoints() {
        let p = process(0.2, Distribution::TwoPoint);
        let mut seen = [false; 2];
        for t in 1..200 {
            for v in p.sample_perturbation(t).iter() {
                assert!(*v == -0.1 || *v == 0.1);
                seen[usize::from(*v > 0.0)] = true;
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn uniform_mean_is_zero() {
        let p = process(0.2, Distribution::Uniform);
        let n = 100_000;
        let mean = (1..=n).map(|t| p.sample_perturbation(t)[0]).sum::<f64>() / n as f64;
        // sd of U[-0.1, 0.1] is 0.2 / √12
        let se = 0.2 / 12f64.sqrt() / (n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = process(0.2, Distribution::TruncatedGaussian);
        assert_eq!(p.sample_injection(7), p.sample_injection(7));
        assert_ne!(p.sample_injection(7), p.sample_injection(8));
        let q = InjectionProcess { seed: 12, ..p.clone() };
        assert_ne!(p.sample_injection(7), q.sample_injection(7));
    }

    #[test]
    fn per_round_schedule_cycles() {
        let wide = InjectionBounds::symmetric(3, 2.0).unwrap();
        let flat = InjectionBounds::symmetric(3, 0.0).unwrap();
        let p = InjectionProcess::new(
            DVector::zeros(3),
            BoundSchedule::PerRound(vec![flat, wide]),
            Distribution::TwoPoint,
            0,
        )
        .unwrap();
        assert_eq!(p.sample_perturbation(1), DVector::zeros(3));
        assert!(p.sample_perturbation(2).iter().all(|v| v.abs() == 1.0));
        assert_eq!(p.sample_perturbation(3), DVector::zeros(3));
    }

    #[test]
    fn bad_bounds_rejected() {
        let lo = DVector::from_vec(vec![0.0, 1.0]);
        let hi = DVector::from_vec(vec![1.0, 0.0]);
        assert!(InjectionBounds::new(lo, hi).is_err());
        assert!(InjectionBounds::symmetric(2, -1.0).is_err());
        let b = InjectionBounds::symmetric(2, 1.0).unwrap();
        assert!(matches!(
            InjectionProcess::new(DVector::zeros(3), b, Distribution::Uniform, 0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn subgaussian_parameter_values() {
        let sys = path3();
        let zero = BoundSchedule::from(InjectionBounds::symmetric(2, 0.0).unwrap());
        assert_eq!(subgaussian_parameter(&sys, &zero, 0).unwrap(), 0.0);

        // R = [[1,1],[1,2]]: rows have norms √2 and √5
        let unit = BoundSchedule::from(InjectionBounds::symmetric(2, 1.0).unwrap());
        assert!((subgaussian_parameter(&sys, &unit, 0).unwrap() - 0.5 * 2f64.sqrt()).abs() < 1e-12);
        assert!((subgaussian_parameter(&sys, &unit, 1).unwrap() - 0.5 * 5f64.sqrt()).abs() < 1e-12);

        let double = BoundSchedule::from(InjectionBounds::symmetric(2, 2.0).unwrap());
        let a = subgaussian_parameter(&sys, &unit, 1).unwrap();
        let b = subgaussian_parameter(&sys, &double, 1).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn scalar_node_is_half_span() {
        let sys = SystemLaplacian::from_inverse(nalgebra::DMatrix::identity(1, 1), false).unwrap();
        let b = BoundSchedule::from(InjectionBounds::symmetric(1, 0.6).unwrap());
        assert!((subgaussian_parameter(&sys, &b, 0).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn expectation_bound_forms() {
        let sys = path3();
        let b = BoundSchedule::from(InjectionBounds::symmetric(2, 1.0).unwrap());
        let one = max_fluctuation_expectation_bound(&sys, &b, &[1], ExpectationForm::Unsquared, 1.0).unwrap();
        assert!((one - 0.5 * 5f64.sqrt() * (2.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
        let sq = max_fluctuation_expectation_bound(&sys, &b, &[1], ExpectationForm::Squared, 1.0).unwrap();
        assert!((sq - 0.5 * 5.0 * (2.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
        let zero = BoundSchedule::from(InjectionBounds::symmetric(2, 0.0).unwrap());
        assert_eq!(max_fluctuation_expectation_bound(&sys, &zero, &[0, 1], ExpectationForm::Unsquared, 1.0).unwrap(), 0.0);
        assert!(matches!(
            max_fluctuation_expectation_bound(&sys, &b, &[], ExpectationForm::Unsquared, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tail_bound_limits() {
        let sys = path3();
        let b = BoundSchedule::from(InjectionBounds::symmetric(2, 1.0).unwrap());
        assert_eq!(max_fluctuation_tail_bound(&sys, &b, &[0, 1], 1e-9).unwrap(), 1.0);
        assert!(max_fluctuation_tail_bound(&sys, &b, &[0, 1], 1e3).unwrap() < 1e-300);
        assert!(max_fluctuation_tail_bound(&sys, &b, &[0], 0.0).is_err());
        let per_round = BoundSchedule::PerRound(vec![InjectionBounds::symmetric(2, 1.0).unwrap()]);
        assert!(matches!(max_fluctuation_tail_bound(&sys, &per_round, &[0], 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_bound_dominates_empirical_tail() {
        let sys = path3();
        let bounds = InjectionBounds::symmetric(2, 1.0).unwrap();
        let proc = InjectionProcess::new(DVector::zeros(2), bounds.clone(), Distribution::Uniform, 5).unwrap();
        let sched = BoundSchedule::from(bounds);
        let n = 100_000;
        let eps_grid = [0.01, 0.02, 0.05];
        let mut hits = [0usize; 3];
        for t in 1..=n {
            let dv = sys.l_inv() * proc.sample_perturbation(t);
            let worst = dv.amax();
            for (h, eps) in hits.iter_mut().zip(eps_grid) {
                *h += usize::from(worst >= eps);
            }
        }
        for (h, eps) in hits.iter().zip(eps_grid) {
            let bound = max_fluctuation_tail_bound(&sys, &sched, &[0, 1], eps).unwrap();
            let freq = *h as f64 / n as f64;
            assert!(freq <= bound + 3.0 / (n as f64).sqrt(), "ε={eps}: {freq} > {bound}");
        }
    }
}
