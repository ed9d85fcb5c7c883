//! Monte-Carlo simulation of the downlink, used as the reference for the
//! closed forms.
//!
//! Trial `t` draws from its own ChaCha8 stream `(master_seed, t)` in a fixed
//! order: near, far and whole-sphere distances, then one gain per placement
//! (each preceded by a LoS coin in mixture mode). Trials are grouped in
//! fixed blocks whose partial sums are folded in block order, so estimates
//! are bit-identical whatever the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    Diagnostics, GeometryConfig, Method, MetricEstimate, ModelError, OutageInputs, PerScenario, RateTargets,
    Region, Scenario,
};

const BLOCK: u64 = 4096;
/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Below this the normal interval degenerates and Wilson is used.
const WILSON_BELOW: f64 = 1e-3;
pub const MIN_TRIALS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("fading shape must be positive and finite, got {0}")]
    BadShape(f64),
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("LoS mixture requested but the channel has no los_mix")]
    MissingLosMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// The random stream of trial `t`.
    pub fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }
}

/// Inverse-CDF draw from the r² law on the region's shell.
pub fn sample_distance(geometry: &GeometryConfig, region: Region, u: f64) -> f64 {
    let s = geometry.shell(region);
    let (a3, b3) = (s.inner.powi(3), s.outer.powi(3));
    (a3 + u * (b3 - a3)).cbrt().clamp(s.inner, s.outer)
}

/// `max(d, r0)^{−α}`
pub fn path_loss(d: f64, r0: f64, alpha: f64) -> f64 {
    d.max(r0).powf(-alpha)
}

/// Unit-mean gamma draw with shape `m`.
pub fn sample_gain<R: Rng + ?Sized>(m: f64, rng: &mut R) -> Result<f64, MonteCarloError> {
    Ok(GainSampler::new(m)?.sample(rng))
}

#[derive(Debug, Clone, Copy)]
struct GainSampler(Gamma<f64>);

impl GainSampler {
    fn new(m: f64) -> Result<Self, MonteCarloError> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(MonteCarloError::BadShape(m));
        }
        Gamma::new(m, 1.0 / m)
            .map(Self)
            .map_err(|_| MonteCarloError::BadShape(m))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.0.sample(rng)
    }
}

#[derive(Debug, Clone, Copy)]
enum Fading {
    Pure(GainSampler),
    Mixture { p_los: f64, los: GainSampler, nlos: GainSampler },
}

impl Fading {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Fading::Pure(g) => g.sample(rng),
            Fading::Mixture { p_los, los, nlos } => {
                if rng.random::<f64>() < *p_los {
                    los.sample(rng)
                } else {
                    nlos.sample(rng)
                }
            }
        }
    }
}

/// Placements and gains of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialDraws {
    pub dist_near: f64,
    pub dist_far: f64,
    /// The lone OMA receiver, anywhere in the sphere.
    pub dist_single: f64,
    pub gain_near: f64,
    pub gain_far: f64,
    pub gain_single: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub draws: TrialDraws,
    pub outage: PerScenario<bool>,
    /// Instantaneous achievable rates in BPCU.
    pub rate: PerScenario<f64>,
}

impl TrialOutcome {
    pub fn dist_near(&self) -> f64 {
        self.draws.dist_near
    }
    pub fn dist_far(&self) -> f64 {
        self.draws.dist_far
    }
    pub fn outage_near(&self) -> bool {
        self.outage[Scenario::NomaNear]
    }
    pub fn outage_far(&self) -> bool {
        self.outage[Scenario::NomaFar]
    }
}

/// Decides every scenario's outage and rate for fixed draws.
pub fn evaluate_trial(inputs: &OutageInputs, d: &TrialDraws) -> TrialOutcome {
    let OutageInputs {
        geometry,
        channel,
        budget,
        rates,
        ..
    } = inputs;
    let eps = rates.thresholds();
    let (pu, s2) = (budget.pu, budget.sigma2);
    let rx = |g: f64, dist: f64| g * path_loss(dist, geometry.r0, channel.alpha) * pu;

    // far user, near user's own link
    let p_far = rx(d.gain_far, d.dist_far);
    let sinr_far = p_far * budget.a_v2 / (s2 + p_far * budget.a_w2);
    let p_near = rx(d.gain_near, d.dist_near);
    let sinr_near_sic = p_near * budget.a_v2 / (s2 + p_near * budget.a_w2);
    let snr_near = p_near * budget.a_w2 / s2;

    let snr_single = rx(d.gain_single, d.dist_single) / s2;
    let snr_pair_near = p_near / s2;
    let snr_pair_far = p_far / s2;

    let mut outage = PerScenario([false; 5]);
    outage[Scenario::NomaFar] = !(sinr_far >= eps.eps_v);
    outage[Scenario::NomaNear] = !(sinr_near_sic >= eps.eps_v) || !(snr_near >= eps.eps_w);
    outage[Scenario::OmaSingle] = !(snr_single >= eps.eps_o);
    outage[Scenario::OmaPairNear] = !(snr_pair_near >= eps.eps_ow);
    outage[Scenario::OmaPairFar] = !(snr_pair_far >= eps.eps_ov);

    let mut rate = PerScenario([0.0; 5]);
    rate[Scenario::NomaFar] = sinr_far.ln_1p() / std::f64::consts::LN_2;
    rate[Scenario::NomaNear] = snr_near.ln_1p() / std::f64::consts::LN_2;
    rate[Scenario::OmaSingle] = snr_single.ln_1p() / std::f64::consts::LN_2;
    rate[Scenario::OmaPairNear] = 0.5 * snr_pair_near.ln_1p() / std::f64::consts::LN_2;
    rate[Scenario::OmaPairFar] = 0.5 * snr_pair_far.ln_1p() / std::f64::consts::LN_2;

    TrialOutcome {
        draws: *d,
        outage,
        rate,
    }
}

fn draw_trial<R: Rng + ?Sized>(geometry: &GeometryConfig, fading: &Fading, rng: &mut R) -> TrialDraws {
    let dist_near = sample_distance(geometry, Region::NearBall, rng.random());
    let dist_far = sample_distance(geometry, Region::FarShell, rng.random());
    let dist_single = sample_distance(geometry, Region::WholeSphere, rng.random());
    let gain_near = fading.draw(rng);
    let gain_far = fading.draw(rng);
    let gain_single = fading.draw(rng);
    TrialDraws {
        dist_near,
        dist_far,
        dist_single,
        gain_near,
        gain_far,
        gain_single,
    }
}

fn fading_for(inputs: &OutageInputs, mixture: bool) -> Result<Fading, MonteCarloError> {
    if mixture {
        let mix = inputs.channel.los_mix.ok_or(MonteCarloError::MissingLosMixture)?;
        Ok(Fading::Mixture {
            p_los: mix.p_los,
            los: GainSampler::new(mix.m_los)?,
            nlos: GainSampler::new(1.0)?,
        })
    } else {
        Ok(Fading::Pure(GainSampler::new(inputs.channel.m)?))
    }
}

/// One trial from the stream `rng`, pure Nakagami-m fading.
pub fn run_trial<R: Rng + ?Sized>(inputs: &OutageInputs, rng: &mut R) -> Result<TrialOutcome, MonteCarloError> {
    let fading = fading_for(inputs, false)?;
    Ok(evaluate_trial(inputs, &draw_trial(&inputs.geometry, &fading, rng)))
}

/// Sufficient statistics of a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BatchStats {
    pub trials: u64,
    pub outages: [u64; 5],
    pub rate_sum: [f64; 5],
    pub rate_sq_sum: [f64; 5],
    /// `(1−1_far)·r_v + (1−1_near)·r_w` per trial.
    pub sum_rate_sum: f64,
    pub sum_rate_sq_sum: f64,
}

impl BatchStats {
    fn push(&mut self, o: &TrialOutcome, rates: &RateTargets) {
        self.trials += 1;
        for s in Scenario::ALL {
            let i = s.index();
            self.outages[i] += o.outage[s] as u64;
            let r = o.rate[s];
            self.rate_sum[i] += r;
            self.rate_sq_sum[i] += r * r;
        }
        let sr = rates.r_v * (!o.outage_far() as u8 as f64) + rates.r_w * (!o.outage_near() as u8 as f64);
        self.sum_rate_sum += sr;
        self.sum_rate_sq_sum += sr * sr;
    }

    /// Order-sensitive merge; callers fold blocks in index order.
    pub fn merge(mut self, other: &BatchStats) -> Self {
        self.trials += other.trials;
        for i in 0..5 {
            self.outages[i] += other.outages[i];
            self.rate_sum[i] += other.rate_sum[i];
            self.rate_sq_sum[i] += other.rate_sq_sum[i];
        }
        self.sum_rate_sum += other.sum_rate_sum;
        self.sum_rate_sq_sum += other.sum_rate_sq_sum;
        self
    }
}

/// Runs `trials` trials. `mixture` selects LoS-mixture fading.
pub fn simulate(
    inputs: &OutageInputs,
    trials: u64,
    seeds: SeedPolicy,
    mixture: bool,
) -> Result<BatchStats, MonteCarloError> {
    inputs.ensure_valid()?;
    let fading = fading_for(inputs, mixture)?;
    let blocks = trials.div_ceil(BLOCK);
    let partial: Vec<BatchStats> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut st = BatchStats::default();
            let end = ((b + 1) * BLOCK).min(trials);
            for t in b * BLOCK..end {
                let mut rng = seeds.stream(t);
                let d = draw_trial(&inputs.geometry, &fading, &mut rng);
                st.push(&evaluate_trial(inputs, &d), &inputs.rates);
            }
            st
        })
        .collect();
    Ok(partial
        .iter()
        .fold(BatchStats::default(), |acc, b| acc.merge(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Outage,
    Ergodic,
    OutageSumRate,
    OutageLosMixture,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Ergodic => "ergodic",
            Metric::OutageSumRate => "outage_sum_rate",
            Metric::OutageLosMixture => "outage_los_mixture",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "outage" => Ok(Metric::Outage),
            "ergodic" => Ok(Metric::Ergodic),
            "outage_sum_rate" => Ok(Metric::OutageSumRate),
            "outage_los_mixture" => Ok(Metric::OutageLosMixture),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

/// 95% interval for a binomial proportion: normal approximation, or Wilson
/// when the estimate is below 1e−3. Returns `(half_width, (low, high))`.
pub fn proportion_interval(successes: u64, n: u64) -> (f64, (f64, f64)) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    if p < WILSON_BELOW {
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        (half, ((center - half).max(0.0), (center + half).min(1.0)))
    } else {
        let half = Z95 * (p * (1.0 - p) / nf).sqrt();
        (half, ((p - half).max(0.0), (p + half).min(1.0)))
    }
}

/// 95% normal interval for a sample mean from its sums.
pub fn mean_interval(sum: f64, sq_sum: f64, n: u64) -> (f64, f64, (f64, f64)) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sq_sum - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let half = Z95 * (var / nf).sqrt();
    (mean, half, (mean - half, mean + half))
}

/// Reads one metric for `scenario` out of batch statistics.
pub fn estimate_from_stats(stats: &BatchStats, scenario: Scenario, metric: Metric) -> MetricEstimate {
    let n = stats.trials;
    let i = scenario.index();
    let (value, half, ci) = match metric {
        Metric::Outage | Metric::OutageLosMixture => {
            let (half, ci) = proportion_interval(stats.outages[i], n);
            (stats.outages[i] as f64 / n as f64, half, ci)
        }
        Metric::Ergodic => mean_interval(stats.rate_sum[i], stats.rate_sq_sum[i], n),
        Metric::OutageSumRate => mean_interval(stats.sum_rate_sum, stats.sum_rate_sq_sum, n),
    };
    MetricEstimate {
        value,
        raw: value,
        method: Method::MonteCarlo,
        trials: Some(n),
        ci_half_width: Some(half),
        ci: Some(ci),
        diagnostics: Diagnostics::default(),
    }
}

/// Monte-Carlo estimate of `metric` for `inputs.scenario`.
pub fn estimate(
    inputs: &OutageInputs,
    metric: Metric,
    trials: u64,
    seeds: SeedPolicy,
) -> Result<MetricEstimate, MonteCarloError> {
    if trials < MIN_TRIALS {
        return Err(MonteCarloError::TooFewTrials(trials));
    }
    let stats = simulate(inputs, trials, seeds, metric == Metric::OutageLosMixture)?;
    Ok(estimate_from_stats(&stats, inputs.scenario, metric))
}
