//! Domain parameters shared by the analytic and Monte-Carlo evaluators.
//!
//! Everything here is linear scale: powers in watts, lengths in meters, rates
//! in bits per channel use. Conversions from dBm happen at the edges via
//! [`dbm_to_watts`].

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

/// Converts a power level in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

/// Sphere radii: the exclusion radius `r0`, the near-ball radius and the
/// outer radius of the far shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub r0: f64,
    pub near_radius: f64,
    pub outer_radius: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            r0: 1.0,
            near_radius: 50.0,
            outer_radius: 100.0,
        }
    }
}

/// Placement region of a receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `r0 <= d <= R`
    NearBall,
    /// `R <= d <= D`
    FarShell,
    /// `r0 <= d <= D`, the single-user OMA placement.
    WholeSphere,
}

/// A spherical shell `inner <= r <= outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub inner: f64,
    pub outer: f64,
}

impl Shell {
    /// `outer³ − inner³`, the normaliser of the r² distance law.
    pub fn volume_factor(&self) -> f64 {
        self.outer.powi(3) - self.inner.powi(3)
    }
}

impl GeometryConfig {
    pub fn shell(&self, region: Region) -> Shell {
        match region {
            Region::NearBall => Shell {
                inner: self.r0,
                outer: self.near_radius,
            },
            Region::FarShell => Shell {
                inner: self.near_radius,
                outer: self.outer_radius,
            },
            Region::WholeSphere => Shell {
                inner: self.r0,
                outer: self.outer_radius,
            },
        }
    }
}

/// Bernoulli LoS/NLoS mixture. The NLoS branch is Rayleigh (m = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosMixture {
    pub p_los: f64,
    pub m_los: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Nakagami fading shape.
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los_mix: Option<LosMixture>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            alpha: 4.0,
            m: 2.0,
            los_mix: None,
        }
    }
}

impl ChannelConfig {
    /// The fading shape as an integer, if it is one.
    pub fn integer_m(&self) -> Option<u32> {
        integer_shape(self.m)
    }
}

pub(crate) fn integer_shape(m: f64) -> Option<u32> {
    if m.is_finite() && m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64 {
        Some(m as u32)
    } else {
        None
    }
}

/// Transmit power, noise power and the NOMA power split, all linear scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// UAV transmit power in watts.
    pub pu: f64,
    /// AWGN power in watts.
    pub sigma2: f64,
    /// Near-user power fraction α_w².
    pub a_w2: f64,
    /// Far-user power fraction α_v².
    pub a_v2: f64,
}

impl LinkBudget {
    pub fn from_dbm(pu_dbm: f64, sigma2_dbm: f64, a_w2: f64, a_v2: f64) -> Self {
        Self {
            pu: dbm_to_watts(pu_dbm),
            sigma2: dbm_to_watts(sigma2_dbm),
            a_w2,
            a_v2,
        }
    }

    /// Transmit SNR `pu / σ²`.
    pub fn snr(&self) -> f64 {
        self.pu / self.sigma2
    }
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self::from_dbm(30.0, -90.0, 0.4, 0.6)
    }
}

/// Target rates in BPCU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTargets {
    pub r_w: f64,
    pub r_v: f64,
    pub r_o: f64,
    pub r_ow: f64,
    pub r_ov: f64,
}

impl Default for RateTargets {
    fn default() -> Self {
        Self {
            r_w: 1.5,
            r_v: 1.0,
            r_o: 1.0,
            r_ow: 1.5,
            r_ov: 1.0,
        }
    }
}

/// SINR thresholds derived from [`RateTargets`]. OMA thresholds use the
/// half-duplex time share, hence the doubled exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub eps_w: f64,
    pub eps_v: f64,
    pub eps_o: f64,
    pub eps_ow: f64,
    pub eps_ov: f64,
}

impl RateTargets {
    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            eps_w: self.r_w.exp2() - 1.0,
            eps_v: self.r_v.exp2() - 1.0,
            eps_o: (2.0 * self.r_o).exp2() - 1.0,
            eps_ow: (2.0 * self.r_ow).exp2() - 1.0,
            eps_ov: (2.0 * self.r_ov).exp2() - 1.0,
        }
    }
}

/// The five receiver roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    NomaNear,
    NomaFar,
    OmaSingle,
    OmaPairNear,
    OmaPairFar,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::NomaNear,
        Scenario::NomaFar,
        Scenario::OmaSingle,
        Scenario::OmaPairNear,
        Scenario::OmaPairFar,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::NomaNear => "noma_near",
            Scenario::NomaFar => "noma_far",
            Scenario::OmaSingle => "oma_single",
            Scenario::OmaPairNear => "oma_pair_near",
            Scenario::OmaPairFar => "oma_pair_far",
        }
    }

    pub fn is_noma(self) -> bool {
        matches!(self, Scenario::NomaNear | Scenario::NomaFar)
    }

    pub fn region(self) -> Region {
        match self {
            Scenario::NomaNear | Scenario::OmaPairNear => Region::NearBall,
            Scenario::NomaFar | Scenario::OmaPairFar => Region::FarShell,
            Scenario::OmaSingle => Region::WholeSphere,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// One value per [`Scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerScenario<T>(pub [T; 5]);

impl<T> Index<Scenario> for PerScenario<T> {
    type Output = T;
    fn index(&self, s: Scenario) -> &T {
        &self.0[s.index()]
    }
}

impl<T> IndexMut<Scenario> for PerScenario<T> {
    fn index_mut(&mut self, s: Scenario) -> &mut T {
        &mut self.0[s.index()]
    }
}

/// How a metric value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Asymptotic,
    NoFadingLimit,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Exact,
        Method::Asymptotic,
        Method::NoFadingLimit,
        Method::MonteCarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asymptotic",
            Method::NoFadingLimit => "no_fading_limit",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Side information attached to an estimate.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// The NOMA feasibility condition failed; the outage is identically one.
    pub infeasible: bool,
    /// The raw value fell outside [0, 1] (or above the rate ceiling) and was clamped.
    pub clamped: bool,
    /// Value of the commonly typeset closed form
    /// (gamma order `n + 3/α + 1`, extra factor 2 for the OMA pair).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_form: Option<f64>,
    /// Absolute distance between the printed form and the returned value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_form_gap: Option<f64>,
    /// Estimated truncation error of an infinite series.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_error: Option<f64>,
    /// Near-user asymptote evaluated with M_v while M_w > M_v; it
    /// underestimates the outage in that case.
    pub asymptote_uses_mv_caveat: bool,
    /// A high-SNR rate ceiling replaced the raw expression.
    pub ceiling_enforced: bool,
}

impl Diagnostics {
    pub fn any(&self) -> bool {
        self.infeasible
            || self.clamped
            || self.printed_form.is_some()
            || self.truncation_error.is_some()
            || self.asymptote_uses_mv_caveat
            || self.ceiling_enforced
    }
}

/// A metric value together with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricEstimate {
    pub value: f64,
    /// Value before clamping.
    pub raw: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_half_width: Option<f64>,
    /// 95% confidence interval (Monte-Carlo only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<(f64, f64)>,
    pub diagnostics: Diagnostics,
}

impl MetricEstimate {
    /// Wraps a probability, clamping it to [0, 1] and flagging the clamp.
    pub fn probability(raw: f64, method: Method, mut diagnostics: Diagnostics) -> Self {
        let value = raw.clamp(0.0, 1.0);
        if value != raw {
            diagnostics.clamped = true;
        }
        Self {
            value,
            raw,
            method,
            trials: None,
            ci_half_width: None,
            ci: None,
            diagnostics,
        }
    }

    /// Wraps a rate in BPCU.
    pub fn rate(raw: f64, method: Method, diagnostics: Diagnostics) -> Self {
        Self {
            value: raw,
            raw,
            method,
            trials: None,
            ci_half_width: None,
            ci: None,
            diagnostics,
        }
    }
}

/// Every parameter the evaluators need, plus the receiver role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageInputs {
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub budget: LinkBudget,
    pub rates: RateTargets,
    pub scenario: Scenario,
}

impl Default for OutageInputs {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            channel: ChannelConfig::default(),
            budget: LinkBudget::default(),
            rates: RateTargets::default(),
            scenario: Scenario::NomaFar,
        }
    }
}

impl OutageInputs {
    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.channel.m = m;
        self
    }

    pub fn with_pu_dbm(mut self, pu_dbm: f64) -> Self {
        self.budget.pu = dbm_to_watts(pu_dbm);
        self
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.geometry, &self.channel, &self.budget, &self.rates)
    }

    /// Returns the validation report as an error if any invariant is violated.
    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(ModelError::Invalid(report.violations))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub feasibility: Feasibility,
    /// α_v² − ε_v·α_w²
    pub feasibility_margin: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_feasible(&self) -> bool {
        self.feasibility == Feasibility::Feasible
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("rician K factor must be non-negative and finite, got {0}")]
    NegativeRicianK(f64),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Checks every standing assumption on the parameters. NOMA infeasibility is
/// reported separately and is not a violation.
pub fn validate(
    geometry: &GeometryConfig,
    channel: &ChannelConfig,
    budget: &LinkBudget,
    rates: &RateTargets,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut fail = |field: &'static str, message: String| violations.push(Violation { field, message });

    let GeometryConfig {
        r0,
        near_radius,
        outer_radius,
    } = *geometry;
    if !(r0.is_finite() && near_radius.is_finite() && outer_radius.is_finite()) {
        fail("geometry", "radii must be finite".into());
    }
    if !(r0 > 0.0) {
        fail("geometry.r0", format!("exclusion radius must be positive, got {r0}"));
    }
    if !(r0 < near_radius) {
        fail(
            "geometry.near_radius",
            format!("r0 < R violated (r0 = {r0}, R = {near_radius})"),
        );
    }
    if !(near_radius < outer_radius) {
        fail(
            "geometry.outer_radius",
            format!("R < D violated (R = {near_radius}, D = {outer_radius})"),
        );
    }

    if !(channel.alpha >= 2.0 && channel.alpha.is_finite()) {
        fail("channel.alpha", format!("path-loss exponent must be >= 2, got {}", channel.alpha));
    }
    if !(channel.m >= 1.0 && channel.m.is_finite()) {
        fail("channel.m", format!("fading shape must be >= 1, got {}", channel.m));
    }
    if let Some(mix) = channel.los_mix {
        if !(0.0..=1.0).contains(&mix.p_los) {
            fail("channel.los_mix.p_los", format!("must lie in [0, 1], got {}", mix.p_los));
        }
        if !(mix.m_los >= 1.0 && mix.m_los.is_finite()) {
            fail("channel.los_mix.m_los", format!("must be >= 1, got {}", mix.m_los));
        }
    }

    if !(budget.pu > 0.0 && budget.pu.is_finite()) {
        fail("budget.pu", format!("transmit power must be positive, got {}", budget.pu));
    }
    if !(budget.sigma2 > 0.0 && budget.sigma2.is_finite()) {
        fail("budget.sigma2", format!("noise power must be positive, got {}", budget.sigma2));
    }
    if !(budget.a_w2 > 0.0 && budget.a_v2 > 0.0) {
        fail("budget", "power fractions must be positive".into());
    }
    if (budget.a_w2 + budget.a_v2 - 1.0).abs() > 1e-9 {
        fail(
            "budget",
            format!("power fractions must sum to 1, got {}", budget.a_w2 + budget.a_v2),
        );
    }

    for (field, r) in [
        ("rates.r_w", rates.r_w),
        ("rates.r_v", rates.r_v),
        ("rates.r_o", rates.r_o),
        ("rates.r_ow", rates.r_ow),
        ("rates.r_ov", rates.r_ov),
    ] {
        if !(r > 0.0 && r.is_finite()) {
            fail(field, format!("target rate must be positive, got {r}"));
        }
    }

    // Far user must get the larger share, but a split that violates this is
    // still a well-defined (infeasible) system, so it only shows up through
    // the feasibility margin below.
    let eps_v = rates.thresholds().eps_v;
    let feasibility_margin = budget.a_v2 - eps_v * budget.a_w2;
    let feasibility = if feasibility_margin > 0.0 {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible
    };

    ValidationReport {
        violations,
        feasibility,
        feasibility_margin,
    }
}

/// Which NOMA decoding threshold to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NomaUser {
    Far,
    Near,
}

/// `M_v` or `M_w* = max(M_v, M_w)`; infeasible when α_v² − ε_v·α_w² ≤ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdScale {
    Finite(f64),
    Infeasible,
}

impl ThresholdScale {
    pub fn finite(self) -> Option<f64> {
        match self {
            ThresholdScale::Finite(v) => Some(v),
            ThresholdScale::Infeasible => None,
        }
    }
}

pub fn noma_threshold_scale(budget: &LinkBudget, rates: &RateTargets, which: NomaUser) -> ThresholdScale {
    let eps = rates.thresholds();
    let margin = budget.a_v2 - eps.eps_v * budget.a_w2;
    if margin <= 0.0 {
        return ThresholdScale::Infeasible;
    }
    let m_v = eps.eps_v / (budget.pu * margin);
    match which {
        NomaUser::Far => ThresholdScale::Finite(m_v),
        NomaUser::Near => {
            let m_w = eps.eps_w / (budget.pu * budget.a_w2);
            ThresholdScale::Finite(m_v.max(m_w))
        }
    }
}

/// `M_w = ε_w / (pu·α_w²)` alone, without the max with `M_v`.
pub fn near_sic_free_threshold(budget: &LinkBudget, rates: &RateTargets) -> f64 {
    rates.thresholds().eps_w / (budget.pu * budget.a_w2)
}

/// Nakagami shape approximating a Rician channel with factor `k`.
pub fn rician_k_to_nakagami_m(k: f64) -> Result<f64, ModelError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(ModelError::NegativeRicianK(k));
    }
    Ok((k + 1.0).powi(2) / (2.0 * k + 1.0))
}
