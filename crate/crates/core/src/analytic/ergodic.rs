use std::f64::consts::LN_2;

use super::{require_integer_m, AnalyticError};
use crate::model::{Diagnostics, Method, MetricEstimate, OutageInputs, Scenario, Shell};
use crate::specfun::scaled_exp_integral_table;

/// Truncation of the k-series in the ergodic-rate expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicSeriesControl {
    pub k_max: usize,
    pub rel_tol: f64,
}

impl Default for ErgodicSeriesControl {
    fn default() -> Self {
        Self {
            k_max: 1 << 20,
            rel_tol: 1e-10,
        }
    }
}

impl ErgodicSeriesControl {
    pub fn check(&self) -> Result<(), AnalyticError> {
        if self.k_max < 1 {
            return Err(AnalyticError::BadControl(format!("k_max must be >= 1, got {}", self.k_max)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(AnalyticError::BadControl(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// First checkpoint of the extrapolation; later ones double.
const FIRST_CHECKPOINT: usize = 16;
/// Differences below this many BPCU count as converged whatever the value.
const ABS_FLOOR: f64 = 1e-15;

/// One series instance: `share · 3/(α ln2 (b³−a³)) Σₖ Σₙ A(n,k)/n! [b³Hₙ₊ₖ(C bᵅ) − a³Hₙ₊ₖ(C aᵅ)]`
/// with `Hⱼ(μ) = e^μ E_{j+1}(μ) = μ^j e^μ Γ(−j, μ)`.
struct Series {
    m: u32,
    p: f64,
    a3: f64,
    b3: f64,
    mu_a: f64,
    mu_b: f64,
    prefactor: f64,
}

impl Series {
    fn new(m: u32, alpha: f64, c: f64, shell: Shell, share: f64) -> Self {
        Self {
            m,
            p: 3.0 / alpha,
            a3: shell.inner.powi(3),
            b3: shell.outer.powi(3),
            mu_a: c * shell.inner.powf(alpha),
            mu_b: c * shell.outer.powf(alpha),
            prefactor: share * 3.0 / (alpha * LN_2 * shell.volume_factor()),
        }
    }

    /// First `k` terms of the k-series, prefactor included.
    fn terms(&self, k: usize) -> Result<Vec<f64>, AnalyticError> {
        let len = self.m + k as u32;
        let hb = scaled_exp_integral_table(len, self.mu_b)?;
        let ha = scaled_exp_integral_table(len, self.mu_a)?;
        // coef[n] tracks A(n,k)/n!
        let mut coef: Vec<f64> = (0..self.m).map(|n| 1.0 / (n as f64 + self.p)).collect();
        let mut out = Vec::with_capacity(k);
        for kk in 0..k {
            let mut t = 0.0;
            for (n, cf) in coef.iter_mut().enumerate() {
                let j = n + kk;
                t += *cf * (self.b3 * hb[j] - self.a3 * ha[j]);
                let step = (n + kk + 1) as f64;
                *cf *= step / (step + self.p);
            }
            out.push(self.prefactor * t);
        }
        Ok(out)
    }

    /// Sums the series, extrapolating the algebraic tail `~K^{−3/α}`
    /// from partial sums at doubling checkpoints.
    fn evaluate(&self, ctl: &ErgodicSeriesControl) -> Result<(f64, f64), AnalyticError> {
        ctl.check()?;
        let mut checkpoints = vec![];
        // the tail is algebraic only once k is well past μ
        let mut kc = FIRST_CHECKPOINT.max((2.0 * self.mu_b).min(1e12) as usize).next_power_of_two();
        while kc <= ctl.k_max {
            checkpoints.push(kc);
            kc *= 2;
        }
        if checkpoints.len() < 2 {
            let terms = self.terms(ctl.k_max)?;
            let sum: f64 = terms.iter().sum();
            let last = *terms.last().expect("k_max >= 1");
            // tail of a k^{−1−p} sequence
            let err = (last * ctl.k_max as f64 / self.p).abs();
            return self.verdict(sum, err, ctl, ctl.k_max);
        }
        let kmax = *checkpoints.last().unwrap();
        let terms = self.terms(kmax)?;
        let mut prev_row: Vec<f64> = vec![];
        let mut prev_diag: Option<f64> = None;
        let mut sum = 0.0;
        let mut taken = 0;
        let mut last_err = f64::INFINITY;
        let mut best = 0.0;
        for (i, &k) in checkpoints.iter().enumerate() {
            sum += terms[taken..k].iter().sum::<f64>();
            taken = k;
            let mut row = vec![sum];
            for j in 1..=i {
                let factor = 2f64.powf(self.p + (j - 1) as f64) - 1.0;
                let v = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / factor;
                row.push(v);
            }
            let diag = row[i];
            if let Some(pd) = prev_diag {
                let err = (diag - pd).abs();
                last_err = err;
                best = diag;
                if err <= ctl.rel_tol * diag.abs() || err <= ABS_FLOOR {
                    return Ok((diag, err));
                }
            }
            prev_diag = Some(diag);
            prev_row = row;
        }
        Err(AnalyticError::SeriesNotConverged {
            estimate: best,
            error_estimate: last_err,
            terms: kmax,
        })
    }

    fn verdict(
        &self,
        value: f64,
        err: f64,
        ctl: &ErgodicSeriesControl,
        terms: usize,
    ) -> Result<(f64, f64), AnalyticError> {
        if err <= ctl.rel_tol * value.abs() || err <= ABS_FLOOR {
            Ok((value, err))
        } else {
            Err(AnalyticError::SeriesNotConverged {
                estimate: value,
                error_estimate: err,
                terms,
            })
        }
    }
}

fn series_for(inputs: &OutageInputs) -> Result<Series, AnalyticError> {
    inputs.ensure_valid()?;
    let m = require_integer_m(inputs.channel.m)?;
    let mf = m as f64;
    let OutageInputs {
        geometry,
        channel,
        budget,
        scenario,
        ..
    } = inputs;
    let shell = geometry.shell(scenario.region());
    let (c, share) = match scenario {
        Scenario::NomaNear => (mf * budget.sigma2 / (budget.pu * budget.a_w2), 1.0),
        Scenario::OmaSingle => (mf * budget.sigma2 / budget.pu, 1.0),
        Scenario::OmaPairNear | Scenario::OmaPairFar => (mf * budget.sigma2 / budget.pu, 0.5),
        Scenario::NomaFar => {
            return Err(AnalyticError::UnsupportedScenario {
                operation: "ergodic k-series",
                scenario: *scenario,
            })
        }
    };
    Ok(Series::new(m, channel.alpha, c, shell, share))
}

fn series_estimate(inputs: &OutageInputs, ctl: &ErgodicSeriesControl) -> Result<MetricEstimate, AnalyticError> {
    let (value, err) = series_for(inputs)?.evaluate(ctl)?;
    let diag = Diagnostics {
        truncation_error: Some(err),
        ..Diagnostics::default()
    };
    Ok(MetricEstimate::rate(value, Method::Exact, diag))
}

/// Running partial sums (BPCU) of the k-series after 1, 2, …, `k` terms.
pub fn ergodic_series_partial_sums(inputs: &OutageInputs, k: usize) -> Result<Vec<f64>, AnalyticError> {
    let terms = series_for(inputs)?.terms(k)?;
    let mut acc = 0.0;
    Ok(terms
        .into_iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect())
}

/// Ergodic rate of the near receiver after successful SIC.
pub fn ergodic_near_noma(inputs: &OutageInputs, ctl: &ErgodicSeriesControl) -> Result<MetricEstimate, AnalyticError> {
    let inputs = inputs.with_scenario(Scenario::NomaNear);
    series_estimate(&inputs, ctl)
}

/// Ergodic rate of an OMA receiver; `inputs.scenario` picks which one.
pub fn ergodic_oma(inputs: &OutageInputs, ctl: &ErgodicSeriesControl) -> Result<MetricEstimate, AnalyticError> {
    if inputs.scenario.is_noma() {
        return Err(AnalyticError::UnsupportedScenario {
            operation: "ergodic_oma",
            scenario: inputs.scenario,
        });
    }
    series_estimate(inputs, ctl)
}

/// High-SNR ergodic rate of the far receiver.
///
/// The expansion `log2(1 + αv²/αw²)(1 + Q1 − Q2)` tends to twice the
/// interference-limited ceiling, so the returned value is clamped to
/// `[0, log2(1 + αv²/αw²)]` with the unclamped number kept in `raw` and
/// `diagnostics.printed_form`.
pub fn ergodic_far_noma(inputs: &OutageInputs) -> Result<MetricEstimate, AnalyticError> {
    let inputs = inputs.with_scenario(Scenario::NomaFar);
    inputs.ensure_valid()?;
    let m = require_integer_m(inputs.channel.m)?;
    let OutageInputs {
        geometry,
        channel,
        budget,
        ..
    } = &inputs;
    let alpha = channel.alpha;
    let (r, d) = (geometry.near_radius, geometry.outer_radius);
    let v = d.powi(3) - r.powi(3);
    let x = m as f64 * budget.sigma2 / budget.pu;
    let moment = |n: u32| {
        let e = alpha * n as f64 + 3.0;
        3.0 * (d.powf(e) - r.powf(e)) / (v * e)
    };
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    let mut inv_fact = 1.0;
    for n in 0..m {
        if n > 0 {
            inv_fact /= n as f64;
        }
        q1 += inv_fact * x.powi(n as i32) * moment(n);
        q2 += inv_fact * x.powi(n as i32 + 1) * moment(n + 1);
    }
    let ceiling = (1.0 + budget.a_v2 / budget.a_w2).log2();
    let mut raw = ceiling * (1.0 + q1 - q2);
    if raw.is_nan() {
        raw = f64::NEG_INFINITY;
    }
    let value = raw.clamp(0.0, ceiling);
    let diag = Diagnostics {
        printed_form: Some(raw),
        printed_form_gap: Some((raw - value).abs()),
        ceiling_enforced: raw > ceiling,
        clamped: raw < 0.0,
        ..Diagnostics::default()
    };
    Ok(MetricEstimate {
        value,
        raw,
        method: Method::Asymptotic,
        trials: None,
        ci_half_width: None,
        ci: None,
        diagnostics: diag,
    })
}

/// Ergodic rate of `inputs.scenario` by its closed form.
pub fn ergodic_rate(inputs: &OutageInputs, ctl: &ErgodicSeriesControl) -> Result<MetricEstimate, AnalyticError> {
    match inputs.scenario {
        Scenario::NomaFar => ergodic_far_noma(inputs),
        Scenario::NomaNear => ergodic_near_noma(inputs, ctl),
        _ => ergodic_oma(inputs, ctl),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEfficiency {
    /// `log2(1 + αv²/αw²)` plus the near-user rate.
    pub tau_noma: f64,
    pub near_rate: f64,
    pub oma_single: f64,
    /// Sum of both OMA-pair user rates.
    pub oma_pair: f64,
    pub gap_vs_oma1: f64,
    pub gap_vs_oma2: f64,
    /// Largest series error estimate among the terms used.
    pub truncation_error: f64,
}

pub fn spectrum_efficiency(
    inputs: &OutageInputs,
    ctl: &ErgodicSeriesControl,
) -> Result<SpectrumEfficiency, AnalyticError> {
    let near = ergodic_near_noma(inputs, ctl)?;
    let single = ergodic_oma(&inputs.with_scenario(Scenario::OmaSingle), ctl)?;
    let pn = ergodic_oma(&inputs.with_scenario(Scenario::OmaPairNear), ctl)?;
    let pf = ergodic_oma(&inputs.with_scenario(Scenario::OmaPairFar), ctl)?;
    let b = &inputs.budget;
    let tau_noma = (1.0 + b.a_v2 / b.a_w2).log2() + near.value;
    let oma_pair = pn.value + pf.value;
    let truncation_error = [&near, &single, &pn, &pf]
        .iter()
        .filter_map(|e| e.diagnostics.truncation_error)
        .fold(0.0, f64::max);
    Ok(SpectrumEfficiency {
        tau_noma,
        near_rate: near.value,
        oma_single: single.value,
        oma_pair,
        gap_vs_oma1: tau_noma - single.value,
        gap_vs_oma2: tau_noma - oma_pair,
        truncation_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near(pu_dbm: f64, m: f64) -> OutageInputs {
        OutageInputs::default()
            .with_scenario(Scenario::NomaNear)
            .with_m(m)
            .with_pu_dbm(pu_dbm)
    }

    #[test]
    fn unit_fading_single_term_matches_closed_form() {
        // m = 1, no k dependence in H beyond the table: check term 0 by hand.
        let inp = near(30.0, 1.0);
        let s = series_for(&inp).unwrap();
        let t0 = s.terms(1).unwrap()[0];
        let h = |mu: f64| crate::specfun::scaled_exp_integral_en(1, mu).unwrap();
        let expected = s.prefactor / s.p * (s.b3 * h(s.mu_b) - s.a3 * h(s.mu_a));
        assert!((t0 - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn rate_vanishes_with_power() {
        let ctl = ErgodicSeriesControl::default();
        let mut last = f64::INFINITY;
        for pu in [-10.0, -20.0, -30.0, -40.0] {
            let r = ergodic_near_noma(&near(pu, 1.0), &ctl).unwrap().value;
            assert!(r < last);
            last = r;
        }
        assert!(last < 0.11, "{last}");
    }

    #[test]
    fn converges_and_reports_error() {
        let ctl = ErgodicSeriesControl::default();
        for m in [1.0, 2.0, 3.0] {
            for pu in [10.0, 30.0, 50.0] {
                let r = ergodic_near_noma(&near(pu, m), &ctl).unwrap();
                let err = r.diagnostics.truncation_error.unwrap();
                assert!(err <= 1e-10 * r.value, "m={m} pu={pu} err={err}");
            }
        }
    }

    #[test]
    fn tight_budget_is_reported() {
        let ctl = ErgodicSeriesControl { k_max: 20, rel_tol: 1e-12 };
        assert!(matches!(
            ergodic_near_noma(&near(30.0, 2.0), &ctl),
            Err(AnalyticError::SeriesNotConverged { .. })
        ));
    }

    #[test]
    fn bad_control_rejected() {
        let ctl = ErgodicSeriesControl { k_max: 0, rel_tol: 1e-8 };
        assert!(matches!(
            ergodic_near_noma(&near(30.0, 2.0), &ctl),
            Err(AnalyticError::BadControl(_))
        ));
        let ctl = ErgodicSeriesControl { k_max: 10, rel_tol: 1.5 };
        assert!(ctl.check().is_err());
    }

    #[test]
    fn far_ceiling() {
        let far = near(90.0, 2.0);
        let r = ergodic_far_noma(&far).unwrap();
        assert!((r.value - 2.5f64.log2()).abs() < 1e-12);
        assert!(r.diagnostics.ceiling_enforced);
        let mut half = far;
        half.budget.a_v2 = 0.5;
        half.budget.a_w2 = 0.5;
        assert!((ergodic_far_noma(&half).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_self_gap_and_constant() {
        let ctl = ErgodicSeriesControl::default();
        let inp = near(40.0, 1.0);
        let se = spectrum_efficiency(&inp, &ctl).unwrap();
        assert!((se.tau_noma - se.near_rate - 2.5f64.log2()).abs() < 1e-12);
        assert!(se.tau_noma > se.oma_single);
        assert_eq!(se.tau_noma - se.tau_noma, 0.0);
    }

    #[test]
    fn oma_rejects_noma_scenario() {
        let ctl = ErgodicSeriesControl::default();
        assert!(ergodic_oma(&near(30.0, 1.0), &ctl).is_err());
    }
}
