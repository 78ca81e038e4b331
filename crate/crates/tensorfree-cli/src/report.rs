//! Experiment configuration and machine-readable reports.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Bumped whenever a field of [`ExperimentReport`] changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: String,
    /// One dims tuple per schedule point.
    #[serde(default)]
    pub dims: Vec<Vec<usize>>,
    /// `None` picks the scenario default; reports echo the value used.
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// The `k` in `|estimate - target| ≤ k · stderr`.
    #[serde(default)]
    pub tol_mult: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Scenario-specific settings.
    #[serde(default)]
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn new(scenario: &str) -> Self {
        ExperimentConfig {
            scenario: scenario.into(),
            dims: Vec::new(),
            trials: None,
            seed: 0,
            tol_mult: None,
            out: None,
            params: serde_json::Value::Null,
        }
    }

    /// Decay scenarios compare schedule points, so the smallest leg
    /// dimension has to grow along the schedule.
    pub fn check_schedule(&self, min_points: usize) -> anyhow::Result<()> {
        if self.dims.len() < min_points {
            anyhow::bail!("the dims schedule needs at least {min_points} points, got {}", self.dims.len());
        }
        if self.dims.iter().any(|d| d.is_empty() || d.contains(&0)) {
            anyhow::bail!("every dims tuple must be nonempty and positive");
        }
        let mins: Vec<usize> = self.dims.iter().map(|d| *d.iter().min().expect("nonempty")).collect();
        if mins.windows(2).any(|w| w[0] >= w[1]) {
            anyhow::bail!("dims schedule {:?} is not strictly increasing in the smallest dimension", self.dims);
        }
        Ok(())
    }

    pub fn param<T: serde::de::DeserializeOwned>(&self, key: &str) -> anyhow::Result<Option<T>> {
        match self.params.get(key) {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(v) => Ok(Some(
                serde_json::from_value(v.clone()).map_err(|e| anyhow::anyhow!("parameter {key:?}: {e}"))?,
            )),
        }
    }
}

/// One checked number. `rule` says what `pass` means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub name: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub target: f64,
    pub rule: String,
    pub pass: bool,
}

impl Stat {
    /// `|estimate - target| ≤ k · stderr`, with `floor` guarding a vanishing
    /// standard error.
    pub fn statistical(name: impl Into<String>, estimate: f64, stderr: f64, target: f64, k: f64, floor: f64) -> Self {
        let pass = (estimate - target).abs() <= (k * stderr).max(floor);
        Stat { name: name.into(), estimate, stderr: Some(stderr), target, rule: format!("|estimate - target| <= {k} stderr"), pass }
    }

    /// `|estimate - target| ≤ tol · max(|target|, 1)` for deterministic values.
    pub fn exact(name: impl Into<String>, estimate: f64, target: f64, tol: f64) -> Self {
        let pass = (estimate - target).abs() <= tol * target.abs().max(1.0);
        Stat { name: name.into(), estimate, stderr: None, target, rule: format!("relative error <= {tol:e}"), pass }
    }

    /// `estimate ≤ target`.
    pub fn at_most(name: impl Into<String>, estimate: f64, stderr: Option<f64>, target: f64) -> Self {
        Stat { name: name.into(), estimate, stderr, target, rule: "estimate <= target".into(), pass: estimate <= target }
    }

    /// `estimate ≥ target`.
    pub fn at_least(name: impl Into<String>, estimate: f64, stderr: Option<f64>, target: f64) -> Self {
        Stat { name: name.into(), estimate, stderr, target, rule: "estimate >= target".into(), pass: estimate >= target }
    }
}

/// Two-point decay check `value(d₁) / value(d₂) ≥ required_ratio`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub statistic: String,
    pub dims: [usize; 2],
    pub values: [f64; 2],
    pub stderrs: [Option<f64>; 2],
    pub ratio: f64,
    /// `log(value₂/value₁) / log(d₂/d₁)`.
    pub slope: f64,
    pub required_ratio: f64,
    pub pass: bool,
}

impl DecayFit {
    pub fn new(
        statistic: impl Into<String>,
        dims: [usize; 2],
        values: [f64; 2],
        stderrs: [Option<f64>; 2],
        required_ratio: f64,
    ) -> Self {
        let ratio = values[0] / values[1];
        let slope = (values[1] / values[0]).ln() / (dims[1] as f64 / dims[0] as f64).ln();
        DecayFit {
            statistic: statistic.into(),
            dims,
            values,
            stderrs,
            ratio,
            slope,
            required_ratio,
            pass: ratio.is_finite() && ratio >= required_ratio || values[1] == 0.0 && values[0] >= 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub stats: Vec<Stat>,
    pub decay_fits: Vec<DecayFit>,
    /// Scenario-specific tables (Weingarten values, scan maxima, ...).
    pub details: serde_json::Value,
    /// Files written next to the report.
    pub artifacts: Vec<PathBuf>,
    /// Omitted when timing is disabled, so that reruns are byte-identical.
    pub wall_time_s: Option<f64>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            config,
            stats: Vec::new(),
            decay_fits: Vec::new(),
            details: serde_json::Value::Object(Default::default()),
            artifacts: Vec::new(),
            wall_time_s: None,
            pass: true,
        }
    }

    pub fn push(&mut self, s: Stat) {
        self.stats.push(s);
    }

    pub fn push_decay(&mut self, f: DecayFit) {
        self.decay_fits.push(f);
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("details serialize");
        self.details.as_object_mut().expect("details is an object").insert(key.into(), v);
    }

    /// Recompute the overall verdict from the individual checks.
    pub fn finish(mut self) -> Self {
        self.pass = self.stats.iter().all(|s| s.pass) && self.decay_fits.iter().all(|f| f.pass);
        self
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .stats
            .iter()
            .filter(|s| !s.pass)
            .map(|s| format!("{}: estimate {:e}, target {:e}, stderr {:?} ({})", s.name, s.estimate, s.target, s.stderr, s.rule))
            .collect();
        out.extend(
            self.decay_fits
                .iter()
                .filter(|f| !f.pass)
                .map(|f| format!("{}: ratio {:.3} < {}", f.statistic, f.ratio, f.required_ratio)),
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
