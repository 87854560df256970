//! Declarative run configuration: a flat TOML file with space/potential/
//! measure/system/run sections, resolved against command-line overrides
//! and hashed for reproducibility.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nasym::bernoulli::BernoulliSpec;
use nasym::expansive::{BaseMetric, IntervalNds};
use nasym::potentials::{EnvelopePolicy, PotentialSeq};
use nasym::seqspace::AlphabetSeq;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub space: SpaceCfg,
    pub potential: Option<PotentialCfg>,
    pub measure: Option<MeasureCfg>,
    pub system: Option<SystemCfg>,
    #[serde(default)]
    pub run: RunCfg,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceCfg {
    #[serde(default)]
    pub head: Vec<u32>,
    pub period: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialCfg {
    pub kind: String,
    pub depth: Option<usize>,
    #[serde(default)]
    pub head: Vec<Vec<f64>>,
    pub period: Vec<Vec<f64>>,
    pub policy: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureCfg {
    #[serde(default)]
    pub head: Vec<Vec<f64>>,
    #[serde(default)]
    pub period: Vec<Vec<f64>>,
    #[serde(default)]
    pub equilibrium: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemCfg {
    pub kind: String,
    pub metric: Option<String>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub grid: Option<usize>,
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunCfg {
    pub n_hi: Option<usize>,
    pub window: Option<[usize; 2]>,
    pub depth_max: Option<usize>,
    pub rank_min: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub pairs: Option<usize>,
    pub eps_r_max: Option<usize>,
    pub lln_horizon: Option<usize>,
    pub gibbs_n: Option<usize>,
    pub code_depth: Option<usize>,
    pub code_steps: Option<usize>,
    pub points: Option<usize>,
}

/// Fully resolved configuration: file contents with CLI overrides applied,
/// plus the hash of the resolved form that every output embeds.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: FileConfig,
    pub hash: String,
}

impl Resolved {
    pub fn load(
        path: &std::path::Path,
        seed: Option<u64>,
        depth: Option<usize>,
        window: Option<(usize, usize)>,
    ) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut file: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{e}")))?;
        if let Some(seed) = seed {
            file.run.seed = Some(seed);
        }
        if let Some(depth) = depth {
            file.run.depth_max = Some(depth);
        }
        if let Some((lo, hi)) = window {
            file.run.window = Some([lo, hi]);
        }
        let canonical = toml::to_string(&file)
            .map_err(|e| CliError::Config(format!("cannot canonicalize config: {e}")))?;
        let hash = hex_digest(&canonical);
        Ok(Self { file, hash })
    }

    pub fn alphabet(&self) -> Result<AlphabetSeq, CliError> {
        AlphabetSeq::new(self.file.space.head.clone(), self.file.space.period.clone())
            .map_err(|e| CliError::Config(format!("space: {e}")))
    }

    /// The configured potential, or the zero potential when the section is
    /// absent (entropy mode).
    pub fn potential(&self, m: &AlphabetSeq) -> Result<PotentialSeq, CliError> {
        let Some(cfg) = &self.file.potential else {
            return Ok(PotentialSeq::zero(m));
        };
        match cfg.kind.as_str() {
            "first_coord" => {
                PotentialSeq::first_coord(m, cfg.head.clone(), cfg.period.clone())
                    .map_err(|e| CliError::Config(format!("potential: {e}")))
            }
            "depth" => {
                let depth = cfg.depth.ok_or_else(|| {
                    CliError::Config("potential: kind \"depth\" needs the depth key".into())
                })?;
                PotentialSeq::depth_d(m, depth, cfg.head.clone(), cfg.period.clone())
                    .map_err(|e| CliError::Config(format!("potential: {e}")))
            }
            other => Err(CliError::Config(format!(
                "potential: unknown kind {other:?} (expected \"first_coord\" or \"depth\")"
            ))),
        }
    }

    pub fn policy(&self) -> Result<EnvelopePolicy, CliError> {
        let name = self
            .file
            .potential
            .as_ref()
            .and_then(|p| p.policy.as_deref())
            .unwrap_or("midpoint");
        match name {
            "lower" => Ok(EnvelopePolicy::Lower),
            "midpoint" => Ok(EnvelopePolicy::Midpoint),
            "upper" => Ok(EnvelopePolicy::Upper),
            other => Err(CliError::Config(format!(
                "potential.policy: unknown policy {other:?}"
            ))),
        }
    }

    /// The configured Bernoulli measure.  A strictly non-positive entry is
    /// a hypothesis violation (exit 4), not a parse error.
    pub fn measure(&self, m: &AlphabetSeq) -> Result<BernoulliSpec, CliError> {
        let Some(cfg) = &self.file.measure else {
            return Err(CliError::Config("measure section is required".into()));
        };
        if cfg.equilibrium {
            let f = self.potential(m)?;
            return nasym::bernoulli::equilibrium_from_potential(m, &f, self.policy()?)
                .map_err(|e| CliError::Config(format!("measure: {e}")));
        }
        if cfg
            .head
            .iter()
            .chain(cfg.period.iter())
            .flat_map(|v| v.iter())
            .any(|&p| p <= 0.0)
        {
            return Err(CliError::Hypothesis(
                "measure vectors must be strictly positive (p_* > 0)".into(),
            ));
        }
        BernoulliSpec::new(m, cfg.head.clone(), cfg.period.clone())
            .map_err(|e| CliError::Config(format!("measure: {e}")))
    }

    pub fn system(&self, m: &AlphabetSeq) -> Result<SystemKind, CliError> {
        let Some(cfg) = &self.file.system else {
            return Err(CliError::Config("system section is required".into()));
        };
        let metric = match cfg.metric.as_deref().unwrap_or("circle") {
            "circle" => BaseMetric::Circle,
            "interval" => BaseMetric::Interval,
            other => {
                return Err(CliError::Config(format!(
                    "system.metric: unknown metric {other:?}"
                )))
            }
        };
        match cfg.kind.as_str() {
            "interval_expanding" => Ok(SystemKind::Interval(IntervalNds::new(m.clone(), metric))),
            "shift" => Ok(SystemKind::Shift),
            other => Err(CliError::Config(format!(
                "system.kind: unknown kind {other:?}"
            ))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.file.run.seed.ok_or_else(|| {
            CliError::Config("an explicit seed is required (run.seed or --seed)".into())
        })
    }

    pub fn window(&self, n_hi: usize) -> (usize, usize) {
        match self.file.run.window {
            Some([lo, hi]) => (lo.max(1), hi.max(lo.max(1))),
            None => ((n_hi / 2).max(1), n_hi),
        }
    }
}

pub enum SystemKind {
    Interval(IntervalNds),
    Shift,
}

pub fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
