//! JSON configuration: parsing with positional diagnostics, parameter
//! overrides, and validation into an executable [`Plan`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use u2x_core::analytic::ErgodicSeriesControl;
use u2x_core::model::{rician_k_to_nakagami_m, LosMixture, ValidationReport, Violation};
use u2x_core::montecarlo::MIN_TRIALS;
use u2x_core::{ChannelConfig, GeometryConfig, LinkBudget, Method, OutageInputs, RateTargets, Scenario};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: at `{field}`: {message}")]
    Parse {
        path: String,
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {0} (this build reads {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("`{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// A scalar parameter that can be swept or overridden by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "pu_dbm")]
    PuDbm,
    #[serde(rename = "sigma2_dbm")]
    Sigma2Dbm,
    #[serde(rename = "a_w2")]
    AW2,
    #[serde(rename = "a_v2")]
    AV2,
    #[serde(rename = "r_w")]
    RW,
    #[serde(rename = "r_v")]
    RV,
    #[serde(rename = "r_o")]
    RO,
    #[serde(rename = "r_ow")]
    ROw,
    #[serde(rename = "r_ov")]
    ROv,
    #[serde(rename = "r0")]
    R0,
    #[serde(rename = "near_radius")]
    NearRadius,
    #[serde(rename = "outer_radius")]
    OuterRadius,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "rician_k")]
    RicianK,
    #[serde(rename = "p_los")]
    PLos,
    #[serde(rename = "m_los")]
    MLos,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::PuDbm => "pu_dbm",
            Axis::Sigma2Dbm => "sigma2_dbm",
            Axis::AW2 => "a_w2",
            Axis::AV2 => "a_v2",
            Axis::RW => "r_w",
            Axis::RV => "r_v",
            Axis::RO => "r_o",
            Axis::ROw => "r_ow",
            Axis::ROv => "r_ov",
            Axis::R0 => "r0",
            Axis::NearRadius => "near_radius",
            Axis::OuterRadius => "outer_radius",
            Axis::Alpha => "alpha",
            Axis::M => "m",
            Axis::RicianK => "rician_k",
            Axis::PLos => "p_los",
            Axis::MLos => "m_los",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a sweep row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMetric {
    Outage,
    OutageLosMixture,
    Ergodic,
    /// `(1 − P_v)·r_v + (1 − P_w)·r_w` of the NOMA pair.
    OutageSumRate,
    /// Sum rate of a scheme: NOMA pair, OMA single user or OMA pair.
    SpectrumEfficiency,
    /// NOMA spectrum efficiency minus that of an OMA scheme.
    SpectrumGap,
}

impl SweepMetric {
    pub const ALL: [SweepMetric; 6] = [
        SweepMetric::Outage,
        SweepMetric::OutageLosMixture,
        SweepMetric::Ergodic,
        SweepMetric::OutageSumRate,
        SweepMetric::SpectrumEfficiency,
        SweepMetric::SpectrumGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepMetric::Outage => "outage",
            SweepMetric::OutageLosMixture => "outage_los_mixture",
            SweepMetric::Ergodic => "ergodic",
            SweepMetric::OutageSumRate => "outage_sum_rate",
            SweepMetric::SpectrumEfficiency => "spectrum_efficiency",
            SweepMetric::SpectrumGap => "spectrum_gap",
        }
    }

    /// Metrics of a whole access scheme rather than of one receiver.
    pub fn is_system_level(self) -> bool {
        matches!(
            self,
            SweepMetric::OutageSumRate | SweepMetric::SpectrumEfficiency | SweepMetric::SpectrumGap
        )
    }
}

impl fmt::Display for SweepMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepMetric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GeometrySection {
    r0: f64,
    near_radius: f64,
    outer_radius: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = GeometryConfig::default();
        Self {
            r0: g.r0,
            near_radius: g.near_radius,
            outer_radius: g.outer_radius,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LosSection {
    p_los: f64,
    m_los: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ChannelSection {
    alpha: f64,
    m: Option<f64>,
    rician_k: Option<f64>,
    los_mix: Option<LosSection>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            alpha: 4.0,
            m: None,
            rician_k: None,
            los_mix: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BudgetSection {
    pu_dbm: f64,
    sigma2_dbm: f64,
    a_w2: f64,
    a_v2: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            pu_dbm: 30.0,
            sigma2_dbm: -90.0,
            a_w2: 0.4,
            a_v2: 0.6,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RatesSection {
    r_w: f64,
    r_v: f64,
    r_o: f64,
    r_ow: f64,
    r_ov: f64,
}

impl Default for RatesSection {
    fn default() -> Self {
        let r = RateTargets::default();
        Self {
            r_w: r.r_w,
            r_v: r.r_v,
            r_o: r.r_o,
            r_ow: r.r_ow,
            r_ov: r.r_ov,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    axis: Axis,
    values: Vec<f64>,
    scenarios: Vec<Scenario>,
    metrics: Vec<SweepMetric>,
    methods: Vec<Method>,
    trials: Option<u64>,
    master_seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SeriesSection {
    k_max: usize,
    rel_tol: f64,
}

impl Default for SeriesSection {
    fn default() -> Self {
        let c = ErgodicSeriesControl::default();
        Self {
            k_max: c.k_max,
            rel_tol: c.rel_tol,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    label: String,
    #[serde(default)]
    set: BTreeMap<Axis, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    name: Option<String>,
    #[serde(default)]
    geometry: GeometrySection,
    #[serde(default)]
    channel: ChannelSection,
    #[serde(default)]
    budget: BudgetSection,
    #[serde(default)]
    rates: RatesSection,
    #[serde(default)]
    series: SeriesSection,
    sweep: Option<SweepSection>,
    #[serde(default)]
    runs: Vec<RunSection>,
}

/// Flat parameter set in configuration units (dBm for powers).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub r0: f64,
    pub near_radius: f64,
    pub outer_radius: f64,
    pub alpha: f64,
    pub m: Option<f64>,
    pub rician_k: Option<f64>,
    pub p_los: Option<f64>,
    pub m_los: Option<f64>,
    pub pu_dbm: f64,
    pub sigma2_dbm: f64,
    pub a_w2: f64,
    pub a_v2: f64,
    pub r_w: f64,
    pub r_v: f64,
    pub r_o: f64,
    pub r_ow: f64,
    pub r_ov: f64,
}

impl Params {
    /// Sets one parameter. The two power fractions move together so that
    /// they keep summing to one; `m` and `rician_k` replace each other.
    pub fn set(&mut self, axis: Axis, v: f64) {
        match axis {
            Axis::PuDbm => self.pu_dbm = v,
            Axis::Sigma2Dbm => self.sigma2_dbm = v,
            Axis::AW2 => {
                self.a_w2 = v;
                self.a_v2 = 1.0 - v;
            }
            Axis::AV2 => {
                self.a_v2 = v;
                self.a_w2 = 1.0 - v;
            }
            Axis::RW => self.r_w = v,
            Axis::RV => self.r_v = v,
            Axis::RO => self.r_o = v,
            Axis::ROw => self.r_ow = v,
            Axis::ROv => self.r_ov = v,
            Axis::R0 => self.r0 = v,
            Axis::NearRadius => self.near_radius = v,
            Axis::OuterRadius => self.outer_radius = v,
            Axis::Alpha => self.alpha = v,
            Axis::M => {
                self.m = Some(v);
                self.rician_k = None;
            }
            Axis::RicianK => {
                self.rician_k = Some(v);
                self.m = None;
            }
            Axis::PLos => self.p_los = Some(v),
            Axis::MLos => self.m_los = Some(v),
        }
    }

    pub fn with(mut self, axis: Axis, v: f64) -> Self {
        self.set(axis, v);
        self
    }

    /// Converts to evaluator inputs. Range checks are left to
    /// [`OutageInputs::validate`]; only structural problems fail here.
    pub fn inputs(&self) -> Result<OutageInputs, ConfigError> {
        let m = match (self.m, self.rician_k) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid("channel", "give either `m` or `rician_k`, not both"))
            }
            (Some(m), None) => m,
            (None, Some(k)) => rician_k_to_nakagami_m(k)
                .map_err(|e| ConfigError::invalid("channel.rician_k", e.to_string()))?,
            (None, None) => 1.0,
        };
        let los_mix = match (self.p_los, self.m_los) {
            (Some(p_los), Some(m_los)) => Some(LosMixture { p_los, m_los }),
            (None, None) => None,
            _ => {
                return Err(ConfigError::invalid(
                    "channel.los_mix",
                    "both `p_los` and `m_los` are needed",
                ))
            }
        };
        Ok(OutageInputs {
            geometry: GeometryConfig {
                r0: self.r0,
                near_radius: self.near_radius,
                outer_radius: self.outer_radius,
            },
            channel: ChannelConfig {
                alpha: self.alpha,
                m,
                los_mix,
            },
            budget: LinkBudget::from_dbm(self.pu_dbm, self.sigma2_dbm, self.a_w2, self.a_v2),
            rates: RateTargets {
                r_w: self.r_w,
                r_v: self.r_v,
                r_o: self.r_o,
                r_ow: self.r_ow,
                r_ov: self.r_ov,
            },
            scenario: Scenario::NomaFar,
        })
    }
}

/// A labelled parameter set; one CSV file per run.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub label: String,
    pub params: Params,
}

/// A parsed configuration, not yet checked for executability.
#[derive(Debug, Clone)]
pub struct Config {
    pub name: String,
    pub runs: Vec<Run>,
    pub series: ErgodicSeriesControl,
    sweep: Option<SweepSection>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

/// A validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub name: String,
    pub runs: Vec<Run>,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    pub metrics: Vec<SweepMetric>,
    pub methods: Vec<Method>,
    pub trials: Option<u64>,
    pub master_seed: Option<u64>,
    pub series: ErgodicSeriesControl,
}

fn label_ok(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') && !s.starts_with('.')
}

impl Config {
    pub fn load(path: &Path) -> Result<(Config, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let text = String::from_utf8_lossy(&bytes);
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
        let cfg = Config::parse(&text, &path.display().to_string(), stem)?;
        Ok((cfg, bytes))
    }

    /// Parses a JSON document. `origin` prefixes diagnostics and
    /// `default_name` is used when the file has no `name`.
    pub fn parse(text: &str, origin: &str, default_name: &str) -> Result<Config, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Parse {
                path: origin.to_string(),
                field,
                line: inner.line(),
                column: inner.column(),
                message: strip_position(&inner.to_string()),
            }
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(file.schema_version));
        }
        let ch = &file.channel;
        if ch.m.is_some() && ch.rician_k.is_some() {
            return Err(ConfigError::invalid("channel", "give either `m` or `rician_k`, not both"));
        }
        let base = Params {
            r0: file.geometry.r0,
            near_radius: file.geometry.near_radius,
            outer_radius: file.geometry.outer_radius,
            alpha: ch.alpha,
            m: ch.m,
            rician_k: ch.rician_k,
            p_los: ch.los_mix.as_ref().map(|l| l.p_los),
            m_los: ch.los_mix.as_ref().map(|l| l.m_los),
            pu_dbm: file.budget.pu_dbm,
            sigma2_dbm: file.budget.sigma2_dbm,
            a_w2: file.budget.a_w2,
            a_v2: file.budget.a_v2,
            r_w: file.rates.r_w,
            r_v: file.rates.r_v,
            r_o: file.rates.r_o,
            r_ow: file.rates.r_ow,
            r_ov: file.rates.r_ov,
        };
        let name = file.name.clone().unwrap_or_else(|| default_name.to_string());
        let runs = if file.runs.is_empty() {
            if !label_ok(&name) {
                return Err(ConfigError::invalid("name", format!("`{name}` is not usable as a file name")));
            }
            vec![Run { label: name.clone(), params: base }]
        } else {
            let mut seen = std::collections::BTreeSet::new();
            let mut runs = Vec::with_capacity(file.runs.len());
            for (i, r) in file.runs.iter().enumerate() {
                if !label_ok(&r.label) {
                    return Err(ConfigError::invalid(
                        format!("runs[{i}].label"),
                        format!("`{}` must be non-empty and use only [A-Za-z0-9_.-]", r.label),
                    ));
                }
                if !seen.insert(r.label.as_str()) {
                    return Err(ConfigError::invalid(format!("runs[{i}].label"), format!("duplicate label `{}`", r.label)));
                }
                let mut p = base;
                for (&axis, &v) in &r.set {
                    p.set(axis, v);
                }
                runs.push(Run { label: r.label.clone(), params: p });
            }
            runs
        };
        let series = ErgodicSeriesControl {
            k_max: file.series.k_max,
            rel_tol: file.series.rel_tol,
        };
        series
            .check()
            .map_err(|e| ConfigError::invalid("series", e.to_string()))?;
        Ok(Config {
            name,
            runs,
            series,
            sweep: file.sweep,
        })
    }

    pub fn trials(&self) -> Option<u64> {
        self.sweep.as_ref().and_then(|s| s.trials)
    }

    pub fn master_seed(&self) -> Option<u64> {
        self.sweep.as_ref().and_then(|s| s.master_seed)
    }

    pub fn run(&self, label: Option<&str>) -> Result<&Run, ConfigError> {
        match label {
            None => Ok(&self.runs[0]),
            Some(l) => self
                .runs
                .iter()
                .find(|r| r.label == l)
                .ok_or_else(|| ConfigError::invalid("runs", format!("no run labelled `{l}`"))),
        }
    }

    /// Model validation of every run at its base parameters.
    pub fn reports(&self) -> Result<Vec<(String, ValidationReport)>, ConfigError> {
        self.runs
            .iter()
            .map(|r| Ok((r.label.clone(), r.params.inputs()?.validate())))
            .collect()
    }

    /// Checks everything a sweep needs, including model validity at every
    /// grid point of every run.
    pub fn plan(&self, ov: Overrides) -> Result<Plan, ConfigError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError::invalid("sweep", "missing; the sweep command needs a `sweep` section"))?;
        if s.values.is_empty() {
            return Err(ConfigError::invalid("sweep.values", "must not be empty"));
        }
        if let Some(i) = s.values.iter().position(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(format!("sweep.values[{i}]"), "must be finite"));
        }
        if let Some(i) = s.values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(ConfigError::invalid(
                format!("sweep.values[{}]", i + 1),
                "values must be strictly increasing",
            ));
        }
        for (field, empty) in [
            ("sweep.scenarios", s.scenarios.is_empty()),
            ("sweep.metrics", s.metrics.is_empty()),
            ("sweep.methods", s.methods.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::invalid(field, "must not be empty"));
            }
        }
        let trials = ov.trials.or(s.trials);
        let master_seed = ov.seed.or(s.master_seed);
        if s.methods.contains(&Method::MonteCarlo) {
            match trials {
                None => return Err(ConfigError::invalid("sweep.trials", "required when monte_carlo is requested")),
                Some(t) if t < MIN_TRIALS => {
                    return Err(ConfigError::invalid("sweep.trials", format!("at least {MIN_TRIALS} trials are needed, got {t}")))
                }
                _ => {}
            }
            if master_seed.is_none() {
                return Err(ConfigError::invalid("sweep.master_seed", "required when monte_carlo is requested"));
            }
        }
        for run in &self.runs {
            for &v in &s.values {
                let inputs = run.params.with(s.axis, v).inputs()?;
                let report = inputs.validate();
                if !report.passed() {
                    return Err(ConfigError::invalid(
                        format!("runs[{}] at {}={}", run.label, s.axis, v),
                        join(&report.violations),
                    ));
                }
                if s.metrics.contains(&SweepMetric::OutageLosMixture) && inputs.channel.los_mix.is_none() {
                    return Err(ConfigError::invalid(
                        "channel.los_mix",
                        format!("run `{}` requests outage_los_mixture without a LoS mixture", run.label),
                    ));
                }
            }
        }
        Ok(Plan {
            name: self.name.clone(),
            runs: self.runs.clone(),
            axis: s.axis,
            values: s.values.clone(),
            scenarios: s.scenarios.clone(),
            metrics: s.metrics.clone(),
            methods: s.methods.clone(),
            trials: if s.methods.contains(&Method::MonteCarlo) { trials } else { None },
            master_seed: if s.methods.contains(&Method::MonteCarlo) { master_seed } else { None },
            series: self.series,
        })
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "sweep": {
            "axis": "pu_dbm",
            "values": [0, 10, 20],
            "scenarios": ["noma_far"],
            "metrics": ["outage"],
            "methods": ["exact"]
        }
    }"#;

    fn parse(s: &str) -> Result<Config, ConfigError> {
        Config::parse(s, "test.json", "test")
    }

    #[test]
    fn minimal_config_uses_documented_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.runs.len(), 1);
        assert_eq!(cfg.runs[0].label, "test");
        let inp = cfg.runs[0].params.inputs().unwrap();
        assert_eq!(inp.geometry, GeometryConfig::default());
        assert_eq!(inp.channel.alpha, 4.0);
        assert_eq!(inp.channel.m, 1.0);
        assert!((inp.budget.sigma2 - 1e-12).abs() < 1e-24);
        let plan = cfg.plan(Overrides::default()).unwrap();
        assert_eq!(plan.values, vec![0.0, 10.0, 20.0]);
        assert_eq!(plan.trials, None);
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let err = parse("{\n  \"schema_version\": 1,\n  \"channel\": {\"alpha\": }\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_error_reports_field_path() {
        let err = parse(r#"{"schema_version": 1, "channel": {"alpha": "four"}}"#).unwrap_err();
        match err {
            ConfigError::Parse { field, line, column, .. } => {
                assert_eq!(field, "channel.alpha");
                assert_eq!(line, 1);
                assert!(column > 30);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse(r#"{"schema_version": 1, "budget": {"pu_watts": 1}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { ref field, .. } if field.starts_with("budget")), "{err}");
    }

    #[test]
    fn wrong_schema_version() {
        assert!(matches!(parse(r#"{"schema_version": 7}"#), Err(ConfigError::Schema(7))));
    }

    #[test]
    fn empty_values_is_config_error() {
        let cfg = parse(&MINIMAL.replace("[0, 10, 20]", "[]")).unwrap();
        assert!(matches!(cfg.plan(Overrides::default()), Err(ConfigError::Invalid { ref field, .. }) if field == "sweep.values"));
    }

    #[test]
    fn unsorted_values_rejected() {
        let cfg = parse(&MINIMAL.replace("[0, 10, 20]", "[0, 20, 10]")).unwrap();
        assert!(cfg.plan(Overrides::default()).is_err());
    }

    #[test]
    fn monte_carlo_needs_trials_and_seed() {
        let text = MINIMAL.replace(r#"["exact"]"#, r#"["exact", "monte_carlo"]"#);
        let cfg = parse(&text).unwrap();
        assert!(cfg.plan(Overrides::default()).is_err());
        assert!(cfg.plan(Overrides { trials: Some(5000), seed: None }).is_err());
        let plan = cfg.plan(Overrides { trials: Some(5000), seed: Some(3) }).unwrap();
        assert_eq!((plan.trials, plan.master_seed), (Some(5000), Some(3)));
        assert!(cfg.plan(Overrides { trials: Some(10), seed: Some(3) }).is_err());
    }

    #[test]
    fn runs_override_parameters() {
        let text = MINIMAL.replace(
            "\"sweep\"",
            r#""runs": [{"label": "m1", "set": {"m": 1}}, {"label": "k10", "set": {"rician_k": 10, "a_w2": 0.3}}], "sweep""#,
        );
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.runs.len(), 2);
        let k = cfg.runs[1].params.inputs().unwrap();
        assert!((k.channel.m - 121.0 / 21.0).abs() < 1e-12);
        assert!((k.budget.a_v2 - 0.7).abs() < 1e-12);
    }

    #[test]
    fn duplicate_or_unsafe_labels_rejected() {
        for runs in [
            r#"[{"label": "a"}, {"label": "a"}]"#,
            r#"[{"label": "../x"}]"#,
            r#"[{"label": ""}]"#,
        ] {
            let text = MINIMAL.replace("\"sweep\"", &format!("\"runs\": {runs}, \"sweep\""));
            assert!(parse(&text).is_err(), "{runs}");
        }
    }

    #[test]
    fn invalid_grid_point_names_the_run_and_value() {
        let text = MINIMAL
            .replace("\"pu_dbm\"", "\"near_radius\"")
            .replace("[0, 10, 20]", "[20, 60, 150]");
        let err = parse(&text).unwrap().plan(Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("near_radius=150"), "{err}");
    }

    #[test]
    fn mixture_metric_requires_mixture() {
        let text = MINIMAL.replace(r#"["outage"]"#, r#"["outage_los_mixture"]"#);
        assert!(parse(&text).unwrap().plan(Overrides::default()).is_err());
    }

    #[test]
    fn m_and_rician_k_conflict() {
        assert!(parse(r#"{"schema_version": 1, "channel": {"m": 2, "rician_k": 1}}"#).is_err());
    }

    #[test]
    fn zero_exclusion_radius_fails_validation() {
        let cfg = parse(r#"{"schema_version": 1, "geometry": {"r0": 0}}"#).unwrap();
        let reports = cfg.reports().unwrap();
        assert!(!reports[0].1.passed());
    }

    #[test]
    fn swapped_power_split_is_valid_but_infeasible() {
        let cfg = parse(r#"{"schema_version": 1, "budget": {"a_w2": 0.6, "a_v2": 0.4}}"#).unwrap();
        let (_, rep) = &cfg.reports().unwrap()[0];
        assert!(rep.passed());
        assert!(!rep.is_feasible());
    }
}
