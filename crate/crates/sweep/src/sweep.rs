//! Grid evaluation and output assembly.
//!
//! Grid points are evaluated concurrently; rows come back in input order
//! and are written by a single thread, so the CSV is independent of the
//! worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use u2x_core::analytic::{self, AnalyticError, ErgodicSeriesControl, SpectrumEfficiency};
use u2x_core::metrics::outage_sum_rate;
use u2x_core::model::Diagnostics;
use u2x_core::montecarlo::{self, BatchStats, Metric, SeedPolicy};
use u2x_core::{Method, MetricEstimate, OutageInputs, Scenario};

use crate::config::{Axis, Params, Plan, Run, SweepMetric};

pub const CSV_HEADER: [&str; 12] = [
    "axis_name",
    "axis_value",
    "scenario",
    "metric",
    "method",
    "estimate",
    "raw_unclamped",
    "ci_low",
    "ci_high",
    "trials",
    "seed",
    "series_truncation_error",
];

/// What a row describes: one receiver, or a whole access scheme for the
/// system-level metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Receiver(Scenario),
    NomaPair,
    OmaSinglePair,
    OmaPair,
}

impl Subject {
    pub fn name(self) -> &'static str {
        match self {
            Subject::Receiver(s) => s.name(),
            Subject::NomaPair => "noma_pair",
            Subject::OmaSinglePair => "oma_single",
            Subject::OmaPair => "oma_pair",
        }
    }

    fn scheme_of(s: Scenario) -> Subject {
        match s {
            Scenario::NomaNear | Scenario::NomaFar => Subject::NomaPair,
            Scenario::OmaSingle => Subject::OmaSinglePair,
            Scenario::OmaPairNear | Scenario::OmaPairFar => Subject::OmaPair,
        }
    }
}

/// Row subjects for `metric`: the scenarios themselves, or the schemes they
/// belong to (deduplicated, first appearance wins).
pub fn subjects(metric: SweepMetric, scenarios: &[Scenario]) -> Vec<Subject> {
    if !metric.is_system_level() {
        return scenarios.iter().map(|&s| Subject::Receiver(s)).collect();
    }
    let mut out = Vec::new();
    for &s in scenarios {
        let g = Subject::scheme_of(s);
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// One evaluated cell of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub axis_value: f64,
    pub subject: Subject,
    pub metric: SweepMetric,
    pub method: Method,
    /// Master seed, for Monte-Carlo cells.
    pub seed: Option<u64>,
    pub estimate: Option<MetricEstimate>,
    /// Set when the evaluation failed or did not converge; the estimate, if
    /// any, is the best available value.
    pub failure: Option<String>,
}

impl Cell {
    fn truncation_error(&self) -> Option<f64> {
        self.estimate.as_ref().and_then(|e| e.diagnostics.truncation_error)
    }
}

/// Per-point evaluation context: Monte-Carlo batches and the spectrum
/// efficiency are shared by every row of the point.
struct Point<'a> {
    inputs: OutageInputs,
    series: &'a ErgodicSeriesControl,
    plain: Option<Result<BatchStats, String>>,
    mixture: Option<Result<BatchStats, String>>,
    se: Option<Result<SpectrumEfficiency, AnalyticError>>,
    trials: Option<u64>,
    seed: Option<u64>,
}

type Outcome = Option<(Option<MetricEstimate>, Option<String>)>;

fn ok(e: MetricEstimate) -> Outcome {
    Some((Some(e), None))
}

fn analytic_outcome(r: Result<MetricEstimate, AnalyticError>) -> Outcome {
    match r {
        Ok(e) => ok(e),
        Err(AnalyticError::SeriesNotConverged {
            estimate,
            error_estimate,
            terms,
        }) => {
            let diag = Diagnostics {
                truncation_error: Some(error_estimate),
                ..Diagnostics::default()
            };
            Some((
                Some(MetricEstimate::rate(estimate, Method::Exact, diag)),
                Some(format!("series not converged after {terms} terms")),
            ))
        }
        Err(e) => Some((None, Some(e.to_string()))),
    }
}

fn mc_sum(parts: &[MetricEstimate], sign: &[f64]) -> MetricEstimate {
    // The parts share trials, so adding half-widths bounds the combined one.
    let value: f64 = parts.iter().zip(sign).map(|(p, s)| s * p.value).sum();
    let half: f64 = parts.iter().filter_map(|p| p.ci_half_width).sum();
    MetricEstimate {
        value,
        raw: value,
        method: Method::MonteCarlo,
        trials: parts[0].trials,
        ci_half_width: Some(half),
        ci: Some((value - half, value + half)),
        diagnostics: Diagnostics::default(),
    }
}

impl<'a> Point<'a> {
    fn stats(&mut self, mixture: bool) -> Result<BatchStats, String> {
        let slot = if mixture { &mut self.mixture } else { &mut self.plain };
        if slot.is_none() {
            let trials = self.trials.expect("plan guarantees trials for monte_carlo");
            let seed = SeedPolicy::new(self.seed.expect("plan guarantees a seed for monte_carlo"));
            *slot = Some(montecarlo::simulate(&self.inputs, trials, seed, mixture).map_err(|e| e.to_string()));
        }
        slot.clone().unwrap()
    }

    fn spectrum(&mut self) -> Result<SpectrumEfficiency, AnalyticError> {
        if self.se.is_none() {
            self.se = Some(analytic::spectrum_efficiency(&self.inputs, self.series));
        }
        self.se.clone().unwrap()
    }

    fn mc(&mut self, s: Scenario, metric: Metric) -> Result<MetricEstimate, String> {
        let stats = self.stats(metric == Metric::OutageLosMixture)?;
        Ok(montecarlo::estimate_from_stats(&stats, s, metric))
    }

    fn mc_outcome(&mut self, f: impl FnOnce(&mut Self) -> Result<MetricEstimate, String>) -> Outcome {
        match f(self) {
            Ok(e) => ok(e),
            Err(msg) => Some((None, Some(msg))),
        }
    }

    /// `None` means the combination is not defined and no row is emitted.
    fn evaluate(&mut self, subject: Subject, metric: SweepMetric, method: Method) -> Outcome {
        use Method::*;
        use SweepMetric as M;
        let inp = self.inputs;
        match (metric, subject) {
            (M::Outage, Subject::Receiver(s)) => match method {
                MonteCarlo => self.mc_outcome(|p| p.mc(s, Metric::Outage)),
                Asymptotic | NoFadingLimit if !s.is_noma() => None,
                _ => analytic_outcome(analytic::outage(&inp.with_scenario(s), method)),
            },
            (M::OutageLosMixture, Subject::Receiver(s)) => match method {
                Exact if s.is_noma() => analytic_outcome(analytic::outage_los_mixture(&inp.with_scenario(s))),
                MonteCarlo => self.mc_outcome(|p| p.mc(s, Metric::OutageLosMixture)),
                _ => None,
            },
            (M::Ergodic, Subject::Receiver(s)) => match method {
                Exact if s != Scenario::NomaFar => {
                    analytic_outcome(analytic::ergodic_rate(&inp.with_scenario(s), self.series))
                }
                Asymptotic if s == Scenario::NomaFar => {
                    analytic_outcome(analytic::ergodic_far_noma(&inp.with_scenario(s)))
                }
                MonteCarlo => self.mc_outcome(|p| p.mc(s, Metric::Ergodic)),
                _ => None,
            },
            (M::OutageSumRate, Subject::NomaPair) => match method {
                MonteCarlo => self.mc_outcome(|p| p.mc(Scenario::NomaFar, Metric::OutageSumRate)),
                _ => {
                    let pv = analytic::outage(&inp.with_scenario(Scenario::NomaFar), method);
                    let pw = analytic::outage(&inp.with_scenario(Scenario::NomaNear), method);
                    match (pv, pw) {
                        (Ok(v), Ok(w)) => {
                            let diag = merge_diagnostics(&v.diagnostics, &w.diagnostics);
                            let mut e = MetricEstimate::rate(outage_sum_rate(v.raw, w.raw, &inp.rates), method, diag);
                            e.value = outage_sum_rate(v.value, w.value, &inp.rates);
                            ok(e)
                        }
                        (Err(e), _) | (_, Err(e)) => Some((None, Some(e.to_string()))),
                    }
                }
            },
            (M::SpectrumEfficiency, g) => match method {
                Exact => match self.spectrum() {
                    Ok(se) => {
                        let v = match g {
                            Subject::NomaPair => se.tau_noma,
                            Subject::OmaSinglePair => se.oma_single,
                            Subject::OmaPair => se.oma_pair,
                            Subject::Receiver(_) => return None,
                        };
                        ok(se_estimate(v, &se))
                    }
                    Err(e) => analytic_outcome(Err(e)),
                },
                MonteCarlo => self.mc_outcome(|p| {
                    let r = |p: &mut Self, s| p.mc(s, Metric::Ergodic);
                    Ok(match g {
                        Subject::NomaPair => mc_sum(&[r(p, Scenario::NomaNear)?, r(p, Scenario::NomaFar)?], &[1.0, 1.0]),
                        Subject::OmaSinglePair => r(p, Scenario::OmaSingle)?,
                        Subject::OmaPair => mc_sum(&[r(p, Scenario::OmaPairNear)?, r(p, Scenario::OmaPairFar)?], &[1.0, 1.0]),
                        Subject::Receiver(_) => unreachable!("system metrics use scheme subjects"),
                    })
                }),
                _ => None,
            },
            (M::SpectrumGap, g @ (Subject::OmaSinglePair | Subject::OmaPair)) => match method {
                Exact => match self.spectrum() {
                    Ok(se) => {
                        let v = if g == Subject::OmaPair { se.gap_vs_oma2 } else { se.gap_vs_oma1 };
                        ok(se_estimate(v, &se))
                    }
                    Err(e) => analytic_outcome(Err(e)),
                },
                MonteCarlo => self.mc_outcome(|p| {
                    let r = |p: &mut Self, s| p.mc(s, Metric::Ergodic);
                    let mut parts = vec![r(p, Scenario::NomaNear)?, r(p, Scenario::NomaFar)?];
                    if g == Subject::OmaPair {
                        parts.push(r(p, Scenario::OmaPairNear)?);
                        parts.push(r(p, Scenario::OmaPairFar)?);
                        Ok(mc_sum(&parts, &[1.0, 1.0, -1.0, -1.0]))
                    } else {
                        parts.push(r(p, Scenario::OmaSingle)?);
                        Ok(mc_sum(&parts, &[1.0, 1.0, -1.0]))
                    }
                }),
                _ => None,
            },
            _ => None,
        }
    }
}

fn se_estimate(v: f64, se: &SpectrumEfficiency) -> MetricEstimate {
    let diag = Diagnostics {
        truncation_error: Some(se.truncation_error),
        ..Diagnostics::default()
    };
    MetricEstimate::rate(v, Method::Exact, diag)
}

fn merge_diagnostics(a: &Diagnostics, b: &Diagnostics) -> Diagnostics {
    let max = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    };
    Diagnostics {
        infeasible: a.infeasible || b.infeasible,
        clamped: a.clamped || b.clamped,
        printed_form: None,
        printed_form_gap: max(a.printed_form_gap, b.printed_form_gap),
        truncation_error: max(a.truncation_error, b.truncation_error),
        asymptote_uses_mv_caveat: a.asymptote_uses_mv_caveat || b.asymptote_uses_mv_caveat,
        ceiling_enforced: a.ceiling_enforced || b.ceiling_enforced,
    }
}

/// Evaluates every (subject, metric, method) cell at one parameter set, in
/// metric, subject, method order. Undefined combinations are left out.
pub fn evaluate_point(
    params: &Params,
    axis_value: f64,
    scenarios: &[Scenario],
    metrics: &[SweepMetric],
    methods: &[Method],
    series: &ErgodicSeriesControl,
    trials: Option<u64>,
    seed: Option<u64>,
) -> Vec<Cell> {
    let mut cells = Vec::new();
    let inputs = match params.inputs() {
        Ok(i) => i,
        Err(e) => {
            // plans are validated up front, so this only guards direct callers
            for &metric in metrics {
                for subject in subjects(metric, scenarios) {
                    for &method in methods {
                        cells.push(Cell {
                            axis_value,
                            subject,
                            metric,
                            method,
                            seed: None,
                            estimate: None,
                            failure: Some(e.to_string()),
                        });
                    }
                }
            }
            return cells;
        }
    };
    let mut point = Point {
        inputs,
        series,
        plain: None,
        mixture: None,
        se: None,
        trials,
        seed,
    };
    for &metric in metrics {
        for subject in subjects(metric, scenarios) {
            for &method in methods {
                if let Some((estimate, failure)) = point.evaluate(subject, metric, method) {
                    cells.push(Cell {
                        axis_value,
                        subject,
                        metric,
                        method,
                        seed: if method == Method::MonteCarlo { seed } else { None },
                        estimate,
                        failure,
                    });
                }
            }
        }
    }
    cells
}

/// All cells of one run, in axis order.
pub fn run_cells(plan: &Plan, run: &Run) -> Vec<Cell> {
    let per_point: Vec<Vec<Cell>> = plan
        .values
        .par_iter()
        .map(|&v| {
            evaluate_point(
                &run.params.with(plan.axis, v),
                v,
                &plan.scenarios,
                &plan.metrics,
                &plan.methods,
                &plan.series,
                plan.trials,
                plan.master_seed,
            )
        })
        .collect();
    per_point.into_iter().flatten().collect()
}

/// Fixed textual form of a float: plain decimal in the usual range,
/// scientific otherwise. Both are shortest round-trip representations.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, axis: Axis, cells: &[Cell]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for c in cells {
        let e = c.estimate.as_ref();
        let (lo, hi) = match e.and_then(|e| e.ci) {
            Some((lo, hi)) => (Some(lo), Some(hi)),
            None => (None, None),
        };
        w.write_record([
            axis.name().to_string(),
            fmt_f64(c.axis_value),
            c.subject.name().to_string(),
            c.metric.name().to_string(),
            c.method.name().to_string(),
            opt(e.map(|e| e.value)),
            opt(e.map(|e| e.raw)),
            opt(lo),
            opt(hi),
            e.and_then(|e| e.trials).map(|t| t.to_string()).unwrap_or_default(),
            c.seed.map(|s| s.to_string()).unwrap_or_default(),
            opt(c.truncation_error()),
        ])?;
    }
    w.flush()?;
    Ok(())
}


/// A row carrying diagnostics or a failure, as listed in the summary.
#[derive(Debug, Clone, Serialize)]
pub struct RowFlag {
    pub axis_value: f64,
    pub scenario: &'static str,
    pub metric: SweepMetric,
    pub method: Method,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FlagTotals {
    pub rows: usize,
    pub failed_rows: usize,
    pub infeasible_rows: usize,
    pub clamped_rows: usize,
    pub ceiling_enforced_rows: usize,
    pub asymptote_caveat_rows: usize,
    pub max_printed_form_gap: Option<f64>,
    pub max_truncation_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub csv: String,
    pub totals: FlagTotals,
    pub flagged: Vec<RowFlag>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub config: String,
    pub config_sha256: String,
    pub axis: Axis,
    pub trials: Option<u64>,
    pub master_seed: Option<u64>,
    pub jobs: usize,
    pub wall_time_s: f64,
    pub failed_rows: usize,
    pub runs: Vec<RunSummary>,
}

fn fmax(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    }
}

pub fn summarize(label: &str, csv: &str, cells: &[Cell]) -> RunSummary {
    let mut t = FlagTotals {
        rows: cells.len(),
        ..FlagTotals::default()
    };
    let mut flagged = Vec::new();
    for c in cells {
        let diag = c.estimate.as_ref().map(|e| e.diagnostics.clone()).unwrap_or_default();
        t.failed_rows += c.failure.is_some() as usize;
        t.infeasible_rows += diag.infeasible as usize;
        t.clamped_rows += diag.clamped as usize;
        t.ceiling_enforced_rows += diag.ceiling_enforced as usize;
        t.asymptote_caveat_rows += diag.asymptote_uses_mv_caveat as usize;
        t.max_printed_form_gap = fmax(t.max_printed_form_gap, diag.printed_form_gap);
        t.max_truncation_error = fmax(t.max_truncation_error, diag.truncation_error);
        if diag.any() || c.failure.is_some() {
            flagged.push(RowFlag {
                axis_value: c.axis_value,
                scenario: c.subject.name(),
                metric: c.metric,
                method: c.method,
                diagnostics: diag,
                failure: c.failure.clone(),
            });
        }
    }
    RunSummary {
        label: label.to_string(),
        csv: csv.to_string(),
        totals: t,
        flagged,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("summary output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs every run of `plan` on `jobs` workers, writing `<label>.csv` per run
/// and `summary.json` into `out_dir`.
pub fn execute(
    plan: &Plan,
    out_dir: &std::path::Path,
    config_label: &str,
    config_bytes: &[u8],
    jobs: usize,
) -> Result<Summary, SweepError> {
    use sha2::{Digest, Sha256};
    let started = std::time::Instant::now();
    let io = |path: &std::path::Path| {
        let path = path.display().to_string();
        move |source| SweepError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let mut runs = Vec::with_capacity(plan.runs.len());
    for run in &plan.runs {
        let cells = pool.install(|| run_cells(plan, run));
        let name = format!("{}.csv", run.label);
        let path = out_dir.join(&name);
        let file = std::fs::File::create(&path).map_err(io(&path))?;
        write_csv(std::io::BufWriter::new(file), plan.axis, &cells)?;
        runs.push(summarize(&run.label, &name, &cells));
    }
    let summary = Summary {
        name: plan.name.clone(),
        config: config_label.to_string(),
        config_sha256: hex::encode(Sha256::digest(config_bytes)),
        axis: plan.axis,
        trials: plan.trials,
        master_seed: plan.master_seed,
        jobs,
        wall_time_s: started.elapsed().as_secs_f64(),
        failed_rows: runs.iter().map(|r| r.totals.failed_rows).sum(),
        runs,
    };
    let path = out_dir.join("summary.json");
    let file = std::fs::File::create(&path).map_err(io(&path))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Config, Overrides};

    fn plan(metrics: &str, methods: &str, scenarios: &str) -> Plan {
        let text = format!(
            r#"{{"schema_version": 1, "channel": {{"m": 2, "los_mix": {{"p_los": 0.8, "m_los": 3}}}},
               "sweep": {{"axis": "pu_dbm", "values": [20, 30],
               "scenarios": {scenarios}, "metrics": {metrics}, "methods": {methods},
               "trials": 2000, "master_seed": 1}}}}"#
        );
        Config::parse(&text, "t", "t").unwrap().plan(Overrides::default()).unwrap()
    }

    const ALL_SCENARIOS: &str = r#"["noma_near", "noma_far", "oma_single", "oma_pair_near", "oma_pair_far"]"#;

    #[test]
    fn system_metrics_group_scenarios() {
        let all = Scenario::ALL;
        assert_eq!(
            subjects(SweepMetric::SpectrumEfficiency, &all),
            vec![Subject::NomaPair, Subject::OmaSinglePair, Subject::OmaPair]
        );
        assert_eq!(subjects(SweepMetric::Outage, &all).len(), 5);
    }

    #[test]
    fn undefined_combinations_are_omitted() {
        let p = plan(r#"["outage", "ergodic"]"#, r#"["asymptotic"]"#, ALL_SCENARIOS);
        let cells = run_cells(&p, &p.runs[0]);
        // outage asymptotes exist for the two NOMA users, the ergodic one only for the far user
        assert_eq!(cells.len(), 2 * 3);
        assert!(cells.iter().all(|c| c.failure.is_none()));
    }

    #[test]
    fn row_order_is_axis_metric_subject_method() {
        let p = plan(r#"["outage"]"#, r#"["exact", "monte_carlo"]"#, r#"["noma_far", "noma_near"]"#);
        let cells = run_cells(&p, &p.runs[0]);
        let key: Vec<_> = cells.iter().map(|c| (c.axis_value, c.subject.name(), c.method)).collect();
        assert_eq!(key[0], (20.0, "noma_far", Method::Exact));
        assert_eq!(key[1], (20.0, "noma_far", Method::MonteCarlo));
        assert_eq!(key[2], (20.0, "noma_near", Method::Exact));
        assert_eq!(key[4].0, 30.0);
        assert_eq!(cells[1].seed, Some(1));
        assert_eq!(cells[0].seed, None);
    }

    #[test]
    fn every_metric_evaluates() {
        let p = plan(
            r#"["outage", "outage_los_mixture", "ergodic", "outage_sum_rate", "spectrum_efficiency", "spectrum_gap"]"#,
            r#"["exact", "asymptotic", "no_fading_limit", "monte_carlo"]"#,
            ALL_SCENARIOS,
        );
        let cells = run_cells(&p, &p.runs[0]);
        for c in &cells {
            assert!(c.failure.is_none() && c.estimate.is_some(), "{c:?}");
        }
        let gap = cells
            .iter()
            .find(|c| c.metric == SweepMetric::SpectrumGap && c.method == Method::Exact)
            .unwrap();
        assert!(gap.estimate.as_ref().unwrap().value > 0.0);
    }

    #[test]
    fn unconverged_series_is_recorded_not_fatal() {
        let mut p = plan(r#"["ergodic"]"#, r#"["exact"]"#, r#"["noma_near", "oma_single"]"#);
        p.series.k_max = 40;
        p.values = vec![-30.0, 30.0];
        let cells = run_cells(&p, &p.runs[0]);
        assert_eq!(cells.len(), 4);
        let failed = cells.iter().filter(|c| c.failure.is_some()).count();
        assert!(failed >= 1);
        assert!(cells.iter().all(|c| c.estimate.is_some()));
        let s = summarize("t", "t.csv", &cells);
        assert_eq!(s.totals.failed_rows, failed);
    }

    #[test]
    fn csv_has_header_and_blank_optional_fields() {
        let p = plan(r#"["outage"]"#, r#"["exact"]"#, r#"["noma_far"]"#);
        let cells = run_cells(&p, &p.runs[0]);
        let mut buf = Vec::new();
        write_csv(&mut buf, p.axis, &cells).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&row[..5], &["pu_dbm", "20", "noma_far", "outage", "exact"]);
        assert_eq!(&row[7..11], &["", "", "", ""]);
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 1e-300, 3.3e-5, 0.1, 12345.678, 1e20, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(0.25), "0.25");
    }
}
