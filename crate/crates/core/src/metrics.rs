//! Figures of merit derived from metric curves.

use serde::Serialize;
use thiserror::Error;

use crate::analytic::{self, AnalyticError, ErgodicSeriesControl};
use crate::model::{watts_to_dbm, OutageInputs, RateTargets, Scenario};
use crate::montecarlo::{self, Metric, MonteCarloError, SeedPolicy};

/// Default fitting window: the top five points of a 10-per-decade grid.
pub const DEFAULT_WINDOW: usize = 5;
/// Monte-Carlo points must have a 95% half-width below this fraction of
/// the value before they are used in a diversity fit.
pub const MC_MAX_REL_HALF_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("malformed curve: {0}")]
    Shape(String),
    #[error("fit window needs at least 3 points, got {0}")]
    WindowTooSmall(usize),
    #[error("non-positive outage {value} at point {index}; lower the SNR ceiling or raise the trial count")]
    NonPositive { index: usize, value: f64 },
    #[error("Monte-Carlo point {index} too noisy for a fit (half-width {rel_half_width:.3} of the value)")]
    ImpreciseMonteCarlo { index: usize, rel_half_width: f64 },
    #[error("grid spans {0} dB, at least 30 dB is required")]
    GridTooNarrow(f64),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    OutageProb,
    RateBpcu,
}

/// A metric against transmit SNR `P_u/σ²` in dB.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricCurve {
    pub x_db: Vec<f64>,
    pub y: Vec<f64>,
    pub kind: CurveKind,
}

impl MetricCurve {
    pub fn new(x_db: Vec<f64>, y: Vec<f64>, kind: CurveKind) -> Result<Self, MetricsError> {
        if x_db.len() != y.len() {
            return Err(MetricsError::Shape(format!(
                "{} abscissae but {} values",
                x_db.len(),
                y.len()
            )));
        }
        if x_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MetricsError::Shape("x_db must be strictly increasing".into()));
        }
        if let Some(v) = y.iter().find(|v| !(**v >= 0.0)) {
            return Err(MetricsError::Shape(format!("negative or NaN value {v}")));
        }
        Ok(Self { x_db, y, kind })
    }

    fn tail(&self, window: usize) -> Result<(usize, &[f64], &[f64]), MetricsError> {
        if window < 3 {
            return Err(MetricsError::WindowTooSmall(window));
        }
        if self.y.len() < window {
            return Err(MetricsError::WindowTooSmall(self.y.len()));
        }
        let start = self.y.len() - window;
        Ok((start, &self.x_db[start..], &self.y[start..]))
    }
}

/// Least-squares slope of `ys` on `xs`.
fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Slope of `−log10 P` against `log10 SNR` over the last `window` points.
pub fn diversity_order(curve: &MetricCurve, window: usize) -> Result<f64, MetricsError> {
    let (start, xs, ys) = curve.tail(window)?;
    if let Some((i, &v)) = ys.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(MetricsError::NonPositive {
            index: start + i,
            value: v,
        });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x / 10.0).collect();
    let ly: Vec<f64> = ys.iter().map(|p| -p.log10()).collect();
    Ok(ls_slope(&lx, &ly))
}

/// As [`diversity_order`] for a Monte-Carlo curve, refusing windows where
/// any point's 95% half-width exceeds 10% of its value.
pub fn diversity_order_monte_carlo(
    curve: &MetricCurve,
    half_widths: &[f64],
    window: usize,
) -> Result<f64, MetricsError> {
    if half_widths.len() != curve.y.len() {
        return Err(MetricsError::Shape("one half-width per point is required".into()));
    }
    let (start, _, ys) = curve.tail(window)?;
    for (i, (&y, &h)) in ys.iter().zip(&half_widths[start..]).enumerate() {
        if y > 0.0 && h / y >= MC_MAX_REL_HALF_WIDTH {
            return Err(MetricsError::ImpreciseMonteCarlo {
                index: start + i,
                rel_half_width: h / y,
            });
        }
    }
    diversity_order(curve, window)
}

/// Slope of the rate against `log2 SNR` over the last `window` points.
pub fn high_snr_slope(curve: &MetricCurve, window: usize) -> Result<f64, MetricsError> {
    let (_, xs, ys) = curve.tail(window)?;
    let l2: Vec<f64> = xs.iter().map(|x| x / 10.0 * 10f64.log2()).collect();
    Ok(ls_slope(&l2, ys))
}

/// `(1 − pV)·rV + (1 − pW)·rW`
pub fn outage_sum_rate(p_v: f64, p_w: f64, rates: &RateTargets) -> f64 {
    (1.0 - p_v) * rates.r_v + (1.0 - p_w) * rates.r_w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOneOptions {
    pub window: usize,
    pub series: ErgodicSeriesControl,
    /// Trials per point for the far-user rate curve, which has no exact form.
    pub far_trials: u64,
    pub seed: u64,
}

impl Default for TableOneOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            series: ErgodicSeriesControl::default(),
            far_trials: 100_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub scenario: Scenario,
    pub diversity: f64,
    pub slope: f64,
    pub expected_diversity: f64,
    pub expected_slope: f64,
    pub diversity_ok: bool,
    pub slope_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableOne {
    pub m: f64,
    pub rows: Vec<TableRow>,
}

impl TableOne {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.diversity_ok && r.slope_ok)
    }
}

/// Rows in table order with their reference pre-log factor.
pub const TABLE_ROWS: [(Scenario, f64); 5] = [
    (Scenario::NomaNear, 1.0),
    (Scenario::NomaFar, 0.0),
    (Scenario::OmaPairNear, 0.5),
    (Scenario::OmaPairFar, 0.5),
    (Scenario::OmaSingle, 1.0),
];

/// Diversity order and high-SNR slope for every scenario over a transmit
/// power grid (dBm). Diversity is fitted on exact outage curves, slopes on
/// ergodic curves (series for near and OMA users, Monte Carlo for the far user).
pub fn table_one(base: &OutageInputs, pu_dbm: &[f64], opts: &TableOneOptions) -> Result<TableOne, MetricsError> {
    if pu_dbm.len() < opts.window.max(3) {
        return Err(MetricsError::WindowTooSmall(pu_dbm.len()));
    }
    let span = pu_dbm.last().unwrap() - pu_dbm[0];
    if !(span >= 30.0) {
        return Err(MetricsError::GridTooNarrow(span));
    }
    let sigma_db = watts_to_dbm(base.budget.sigma2);
    let x_db: Vec<f64> = pu_dbm.iter().map(|p| p - sigma_db).collect();
    let mut rows = Vec::with_capacity(5);
    for (scenario, expected_slope) in TABLE_ROWS {
        let mut outage = Vec::with_capacity(pu_dbm.len());
        let mut rate = Vec::with_capacity(pu_dbm.len());
        for &p in pu_dbm {
            let inp = base.with_pu_dbm(p).with_scenario(scenario);
            outage.push(analytic::outage_exact(&inp)?.value);
            let r = if scenario == Scenario::NomaFar {
                montecarlo::estimate(&inp, Metric::Ergodic, opts.far_trials, SeedPolicy::new(opts.seed))?.value
            } else {
                analytic::ergodic_rate(&inp, &opts.series)?.value
            };
            rate.push(r);
        }
        let d = diversity_order(&MetricCurve::new(x_db.clone(), outage, CurveKind::OutageProb)?, opts.window)?;
        let s = high_snr_slope(&MetricCurve::new(x_db.clone(), rate, CurveKind::RateBpcu)?, opts.window)?;
        let m = base.channel.m;
        rows.push(TableRow {
            scenario,
            diversity: d,
            slope: s,
            expected_diversity: m,
            expected_slope,
            diversity_ok: (d - m).abs() <= 0.3,
            slope_ok: (s - expected_slope).abs() <= 0.05,
        });
    }
    Ok(TableOne {
        m: base.channel.m,
        rows,
    })
}
