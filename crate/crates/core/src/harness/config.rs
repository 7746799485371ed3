use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bandit::{Algorithm, Exploration, Regularizer};
use crate::error::{Error, Result};
use crate::grid::{self, NetworkCase};
use crate::loads::Distribution;

/// How reactive power follows active power in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PfMode {
    Unity,
    Kappa(f64),
    /// Per-node power factors uniform on `[alpha_min, 1]` with random signs,
    /// drawn once per seed.
    Random { alpha_min: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundTruth {
    LinDistFlow,
    Ac,
}

impl FromStr for GroundTruth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lindistflow" => Ok(Self::LinDistFlow),
            "ac" => Ok(Self::Ac),
            other => Err(Error::Config(format!("ground truth must be lindistflow or ac, got `{other}`"))),
        }
    }
}

/// Reference the readings are centered on. Only the slack voltage is
/// supported: `y_i = v_i − v•`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NominalMode {
    #[default]
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseFormat {
    Matpower,
    Native,
}

impl FromStr for CaseFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matpower" => Ok(Self::Matpower),
            "native" => Ok(Self::Native),
            other => Err(Error::Config(format!("format must be matpower or native, got `{other}`"))),
        }
    }
}

/// A seed count (`0..n`) or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
    Text(String),
}

impl SeedSpec {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        let seeds = match self {
            Self::Count(n) => (0..*n).collect(),
            Self::List(list) => list.clone(),
            Self::Text(s) => {
                let s = s.trim();
                if s.contains(',') {
                    s.split(',')
                        .filter(|t| !t.trim().is_empty())
                        .map(|t| t.trim().parse::<u64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::Config(format!("bad seed list `{s}`: {e}")))?
                } else {
                    let n = s.parse::<u64>().map_err(|e| Error::Config(format!("bad seed count `{s}`: {e}")))?;
                    (0..n).collect()
                }
            }
        };
        if seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(seeds)
    }
}

/// A number or a string, for keys like `explore` that accept both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Self::Num(x) => x.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

/// Partial settings from a config file or the command line. Every key is
/// optional; [`ConfigOverrides::merge`] layers one set over another.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigOverrides {
    pub case: Option<String>,
    pub format: Option<String>,
    pub algo: Option<String>,
    pub horizon: Option<u64>,
    pub budget: Option<usize>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub hybrid: Option<bool>,
    pub explore: Option<Scalar>,
    pub confidence_delta: Option<f64>,
    pub pf: Option<String>,
    pub pf_alpha_min: Option<f64>,
    pub dist: Option<String>,
    pub delta_span: Option<f64>,
    pub seeds: Option<SeedSpec>,
    pub ground_truth: Option<String>,
    pub nominal_mode: Option<String>,
    pub out: Option<PathBuf>,
}

macro_rules! layer {
    ($base:ident, $top:ident, $($field:ident),*) => {
        ConfigOverrides { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ConfigOverrides {
    /// Reads a TOML file, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
    }

    /// Keys set in `top` win.
    pub fn merge(self, top: ConfigOverrides) -> ConfigOverrides {
        let base = self;
        layer!(
            base, top, case, format, algo, horizon, budget, beta, lambda, hybrid, explore, confidence_delta, pf,
            pf_alpha_min, dist, delta_span, seeds, ground_truth, nominal_mode, out
        )
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub case: String,
    pub format: Option<CaseFormat>,
    pub algorithms: Vec<Algorithm>,
    pub horizon: u64,
    pub budget: usize,
    pub beta: f64,
    pub lambda: f64,
    /// Spectral learner starts from `λI + |Λ|` instead of `β|Λ|`.
    pub hybrid: bool,
    pub exploration: Exploration,
    /// `δ` of the theoretical exploration schedule.
    pub confidence_delta: f64,
    pub pf: PfMode,
    pub distribution: Distribution,
    /// Width `Δ` of the symmetric per-node perturbation range, pu.
    pub delta_span: f64,
    pub seeds: Vec<u64>,
    pub ground_truth: GroundTruth,
    pub nominal_mode: NominalMode,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case: "case33bw".into(),
            format: None,
            algorithms: Algorithm::ALL.to_vec(),
            horizon: 1000,
            budget: 1,
            beta: 1.0,
            lambda: 1.0,
            hybrid: false,
            exploration: Exploration::Fixed(0.1),
            confidence_delta: 0.05,
            pf: PfMode::Unity,
            distribution: Distribution::Uniform,
            delta_span: 0.01,
            seeds: (0..20).collect(),
            ground_truth: GroundTruth::LinDistFlow,
            nominal_mode: NominalMode::Fixed,
            out: PathBuf::from("results"),
        }
    }
}

fn parse_pf(text: &str, alpha_min: f64) -> Result<PfMode> {
    match text {
        "unity" => Ok(PfMode::Unity),
        "random" => Ok(PfMode::Random { alpha_min }),
        other => {
            let value = other
                .strip_prefix("kappa=")
                .ok_or_else(|| Error::Config(format!("pf must be unity, kappa=FLOAT or random, got `{other}`")))?;
            let kappa = value.parse::<f64>().map_err(|e| Error::Config(format!("bad kappa `{value}`: {e}")))?;
            Ok(PfMode::Kappa(kappa))
        }
    }
}

impl ExperimentConfig {
    /// Fills unset keys with defaults and validates what does not depend on
    /// the network.
    pub fn resolve(o: ConfigOverrides) -> Result<Self> {
        let d = Self::default();
        let algorithms = match o.algo.as_deref() {
            None | Some("all") => d.algorithms,
            Some(list) => list.split(',').map(|s| s.trim().parse()).collect::<Result<Vec<Algorithm>>>()?,
        };
        let pf_alpha_min = o.pf_alpha_min.unwrap_or(0.90);
        let cfg = Self {
            case: o.case.unwrap_or(d.case),
            format: o.format.as_deref().map(str::parse).transpose()?,
            algorithms,
            horizon: o.horizon.unwrap_or(d.horizon),
            budget: o.budget.unwrap_or(d.budget),
            beta: o.beta.unwrap_or(d.beta),
            lambda: o.lambda.unwrap_or(d.lambda),
            hybrid: o.hybrid.unwrap_or(d.hybrid),
            exploration: o.explore.map(|s| s.text().parse()).transpose()?.unwrap_or(d.exploration),
            confidence_delta: o.confidence_delta.unwrap_or(d.confidence_delta),
            pf: o.pf.as_deref().map(|s| parse_pf(s, pf_alpha_min)).transpose()?.unwrap_or(d.pf),
            distribution: o.dist.as_deref().map(str::parse).transpose()?.unwrap_or(d.distribution),
            delta_span: o.delta_span.unwrap_or(d.delta_span),
            seeds: o.seeds.map(|s| s.resolve()).transpose()?.unwrap_or(d.seeds),
            ground_truth: o.ground_truth.as_deref().map(str::parse).transpose()?.unwrap_or(d.ground_truth),
            nominal_mode: match o.nominal_mode.as_deref() {
                None | Some("fixed") => NominalMode::Fixed,
                Some(other) => return Err(Error::Config(format!("nominal mode must be fixed, got `{other}`"))),
            },
            out: o.out.unwrap_or(d.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if self.budget == 0 {
            return fail("budget must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if self.algorithms.is_empty() {
            return fail("at least one algorithm is required".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) || !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail(format!("beta and lambda must be positive, got {} and {}", self.beta, self.lambda));
        }
        if !(self.delta_span >= 0.0 && self.delta_span.is_finite()) {
            return fail(format!("delta-span must be nonnegative, got {}", self.delta_span));
        }
        if !(self.confidence_delta > 0.0 && self.confidence_delta < 1.0) {
            return fail(format!("confidence-delta must lie in (0, 1), got {}", self.confidence_delta));
        }
        match self.pf {
            PfMode::Kappa(k) if !k.is_finite() => fail(format!("kappa must be finite, got {k}")),
            PfMode::Random { alpha_min } if !(alpha_min > 0.0 && alpha_min <= 1.0) => {
                fail(format!("pf-alpha-min must lie in (0, 1], got {alpha_min}"))
            }
            _ => Ok(()),
        }
    }

    /// Regularizer for a learner, `None` for the baselines.
    pub fn regularizer(&self, algorithm: Algorithm) -> Regularizer {
        match algorithm {
            Algorithm::LinUcb => Regularizer::L2 { lambda: self.lambda },
            _ if self.hybrid => Regularizer::Hybrid { lambda: self.lambda },
            _ => Regularizer::Spectral { beta: self.beta },
        }
    }

    /// Loads the case. `case33bw` and `case33bw.m` fall back to the bundled
    /// feeder when no such file exists.
    pub fn load_case(&self) -> Result<NetworkCase> {
        let path = Path::new(&self.case);
        if !path.exists() && matches!(self.case.as_str(), "case33bw" | "case33bw.m") {
            return Ok(grid::case33bw());
        }
        match self.format {
            None => grid::load_case(path),
            Some(CaseFormat::Matpower) => grid::parse_matpower_case(&std::fs::read_to_string(path)?),
            Some(CaseFormat::Native) => grid::parse_native_case(&std::fs::read_to_string(path)?),
        }
    }

    /// Hex FNV-1a hash of everything except seeds, algorithms and the output
    /// directory. Traces with different digests do not aggregate.
    pub fn digest(&self) -> String {
        let mut shared = self.clone();
        shared.seeds.clear();
        shared.algorithms.clear();
        shared.out = PathBuf::new();
        let json = serde_json::to_string(&shared).expect("config serializes");
        let hash = json.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3));
        format!("{hash:016x}")
    }
}
