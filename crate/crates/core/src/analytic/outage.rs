use super::{require_integer_m, AnalyticError};
use crate::model::{
    noma_threshold_scale, near_sic_free_threshold, Diagnostics, Method, MetricEstimate, NomaUser,
    OutageInputs, Scenario, Shell, ThresholdScale,
};
use crate::specfun::{gamma, ln_lower_inc_gamma, regularized_lower_gamma};

/// Decoding threshold of a scenario: the receiver is in outage when its
/// fading gain falls below `scale · σ² · r^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageThreshold {
    Scale { shell: Shell, scale: f64 },
    Infeasible,
}

pub fn outage_threshold(inputs: &OutageInputs) -> OutageThreshold {
    let OutageInputs {
        geometry,
        budget,
        rates,
        scenario,
        ..
    } = inputs;
    let shell = geometry.shell(scenario.region());
    let eps = rates.thresholds();
    let scale = match scenario {
        Scenario::NomaFar => noma_threshold_scale(budget, rates, NomaUser::Far),
        Scenario::NomaNear => noma_threshold_scale(budget, rates, NomaUser::Near),
        Scenario::OmaSingle => ThresholdScale::Finite(eps.eps_o / budget.pu),
        Scenario::OmaPairNear => ThresholdScale::Finite(eps.eps_ow / budget.pu),
        Scenario::OmaPairFar => ThresholdScale::Finite(eps.eps_ov / budget.pu),
    };
    match scale {
        ThresholdScale::Finite(scale) => OutageThreshold::Scale { shell, scale },
        ThresholdScale::Infeasible => OutageThreshold::Infeasible,
    }
}

/// y^{−3/α} γ(s, y), kept finite for tiny y.
fn scaled_lower(s: f64, y: f64, p: f64) -> Result<f64, AnalyticError> {
    Ok((ln_lower_inc_gamma(s, y)? - p * y.ln()).exp())
}

/// Outage of a receiver uniform (r² law) on `shell`, gain Gamma(m, 1/m),
/// threshold `g < c/m · r^α` where `c = m·M·σ²`.
///
/// Two closed forms of the same integral are available: the success sum
/// `S = 3/(α V) Σₙ (1/n!)[b³ ĝₙ(c bᵅ) − a³ ĝₙ(c aᵅ)]` and, after integrating
/// by parts, `P = [b³P(m,c bᵅ) − a³P(m,c aᵅ) − (b³ ĝₘ(c bᵅ) − a³ ĝₘ(c aᵅ))/Γ(m)]/V`.
/// `1 − S` loses everything to cancellation once P is small, so the second
/// form takes over there.
pub(crate) fn shell_outage(m: u32, alpha: f64, shell: Shell, c: f64) -> Result<f64, AnalyticError> {
    let p = 3.0 / alpha;
    let (a, b) = (shell.inner, shell.outer);
    let (a3, b3) = (a.powi(3), b.powi(3));
    let v = shell.volume_factor();
    let (ya, yb) = (c * a.powf(alpha), c * b.powf(alpha));

    let mut success = 0.0;
    let mut inv_fact = 1.0;
    for n in 0..m {
        if n > 0 {
            inv_fact /= n as f64;
        }
        let s = n as f64 + p;
        success += inv_fact * (b3 * scaled_lower(s, yb, p)? - a3 * scaled_lower(s, ya, p)?);
    }
    success *= 3.0 / (alpha * v);
    if success <= 0.5 {
        return Ok(1.0 - success);
    }

    let mf = m as f64;
    let s = mf + p;
    let boundary = b3 * regularized_lower_gamma(mf, yb)? - a3 * regularized_lower_gamma(mf, ya)?;
    let interior = (b3 * scaled_lower(s, yb, p)? - a3 * scaled_lower(s, ya, p)?) / gamma(mf);
    Ok((boundary - interior) / v)
}

/// The same quantity in its commonly typeset closed form: gamma order
/// `n + 3/α + 1`, and a factor 2 in the denominator for the OMA pair.
fn printed_shell_outage(
    m: u32,
    alpha: f64,
    shell: Shell,
    c: f64,
    pair_factor: f64,
) -> Result<f64, AnalyticError> {
    let p = 3.0 / alpha;
    let (a, b) = (shell.inner, shell.outer);
    let (ya, yb) = (c * a.powf(alpha), c * b.powf(alpha));
    let mut sum = 0.0;
    let mut inv_fact = 1.0;
    for n in 0..m {
        if n > 0 {
            inv_fact /= n as f64;
        }
        let s = n as f64 + p + 1.0;
        sum += inv_fact * (b.powi(3) * scaled_lower(s, yb, p)? - a.powi(3) * scaled_lower(s, ya, p)?);
    }
    Ok(1.0 - 3.0 * sum / (alpha * pair_factor * shell.volume_factor()))
}

/// The typeset closed-form value for `inputs`, or 1 when infeasible.
pub fn printed_form_outage(inputs: &OutageInputs) -> Result<f64, AnalyticError> {
    inputs.ensure_valid()?;
    let m = require_integer_m(inputs.channel.m)?;
    match outage_threshold(inputs) {
        OutageThreshold::Infeasible => Ok(1.0),
        OutageThreshold::Scale { shell, scale } => {
            let c = m as f64 * scale * inputs.budget.sigma2;
            let pair = match inputs.scenario {
                Scenario::OmaPairNear | Scenario::OmaPairFar => 2.0,
                _ => 1.0,
            };
            printed_shell_outage(m, inputs.channel.alpha, shell, c, pair)
        }
    }
}

/// Exact outage probability of `inputs.scenario`.
pub fn outage_exact(inputs: &OutageInputs) -> Result<MetricEstimate, AnalyticError> {
    inputs.ensure_valid()?;
    let m = require_integer_m(inputs.channel.m)?;
    exact_with_m(inputs, m)
}

fn exact_with_m(inputs: &OutageInputs, m: u32) -> Result<MetricEstimate, AnalyticError> {
    let mut diag = Diagnostics::default();
    let raw = match outage_threshold(inputs) {
        OutageThreshold::Infeasible => {
            diag.infeasible = true;
            1.0
        }
        OutageThreshold::Scale { shell, scale } => {
            let c = m as f64 * scale * inputs.budget.sigma2;
            let value = shell_outage(m, inputs.channel.alpha, shell, c)?;
            let pair = match inputs.scenario {
                Scenario::OmaPairNear | Scenario::OmaPairFar => 2.0,
                _ => 1.0,
            };
            let printed = printed_shell_outage(m, inputs.channel.alpha, shell, c, pair)?;
            diag.printed_form = Some(printed);
            diag.printed_form_gap = Some((printed - value).abs());
            value
        }
    };
    Ok(MetricEstimate::probability(raw, Method::Exact, diag))
}

fn require_noma(inputs: &OutageInputs, operation: &'static str) -> Result<(), AnalyticError> {
    if inputs.scenario.is_noma() {
        Ok(())
    } else {
        Err(AnalyticError::UnsupportedScenario {
            operation,
            scenario: inputs.scenario,
        })
    }
}

/// High-SNR outage expansion, first order in the exponential.
///
/// Both NOMA users are evaluated with `M_v`; when `M_w > M_v` the near-user
/// value is flagged since it then underestimates the outage.
pub fn outage_asymptotic(inputs: &OutageInputs) -> Result<MetricEstimate, AnalyticError> {
    inputs.ensure_valid()?;
    require_noma(inputs, "outage_asymptotic")?;
    let m = require_integer_m(inputs.channel.m)?;
    let mut diag = Diagnostics::default();
    let m_v = match noma_threshold_scale(&inputs.budget, &inputs.rates, NomaUser::Far) {
        ThresholdScale::Finite(v) => v,
        ThresholdScale::Infeasible => {
            diag.infeasible = true;
            return Ok(MetricEstimate::probability(1.0, Method::Asymptotic, diag));
        }
    };
    if inputs.scenario == Scenario::NomaNear {
        diag.asymptote_uses_mv_caveat = near_sic_free_threshold(&inputs.budget, &inputs.rates) > m_v;
    }
    let shell = inputs.geometry.shell(inputs.scenario.region());
    let alpha = inputs.channel.alpha;
    let x = m as f64 * m_v * inputs.budget.sigma2;
    let (a, b) = (shell.inner, shell.outer);
    let v = shell.volume_factor();
    // xⁿ · 3(b^{αn+3} − a^{αn+3}) / (V (αn+3))
    let moment = |n: u32| {
        let nf = n as f64;
        3.0 * (b.powi(3) * (x * b.powf(alpha)).powf(nf) - a.powi(3) * (x * a.powf(alpha)).powf(nf))
            / (v * (alpha * nf + 3.0))
    };
    let mut raw = 1.0;
    let mut inv_fact = 1.0;
    for n in 0..m {
        if n > 0 {
            inv_fact /= n as f64;
        }
        raw += inv_fact * (moment(n + 1) - moment(n));
    }
    if raw.is_nan() {
        raw = f64::INFINITY;
    }
    Ok(MetricEstimate::probability(raw, Method::Asymptotic, diag))
}

/// Radius below which a receiver is never in outage without fading:
/// `z_f` for the far user, `min(z_n, z_f)` for the near user.
pub fn no_fading_radius(inputs: &OutageInputs) -> Option<f64> {
    let OutageInputs {
        channel,
        budget,
        rates,
        scenario,
        ..
    } = inputs;
    let m_v = noma_threshold_scale(budget, rates, NomaUser::Far).finite()?;
    let z_f = (1.0 / (m_v * budget.sigma2)).powf(1.0 / channel.alpha);
    match scenario {
        Scenario::NomaFar => Some(z_f),
        Scenario::NomaNear => {
            let z_n = (1.0 / (near_sic_free_threshold(budget, rates) * budget.sigma2)).powf(1.0 / channel.alpha);
            Some(z_n.min(z_f))
        }
        _ => None,
    }
}

/// m → ∞ outage: fraction of the shell lying beyond the threshold radius.
///
/// The typeset middle branch `(z³ − a³)/(b³ − a³)` is the in-coverage
/// fraction; it is kept in the diagnostics as the printed form.
pub fn outage_no_fading(inputs: &OutageInputs) -> Result<MetricEstimate, AnalyticError> {
    inputs.ensure_valid()?;
    require_noma(inputs, "outage_no_fading")?;
    let mut diag = Diagnostics::default();
    let Some(z) = no_fading_radius(inputs) else {
        diag.infeasible = true;
        return Ok(MetricEstimate::probability(1.0, Method::NoFadingLimit, diag));
    };
    let shell = inputs.geometry.shell(inputs.scenario.region());
    let (a, b) = (shell.inner, shell.outer);
    let raw = if z <= a {
        1.0
    } else if z >= b {
        0.0
    } else {
        let v = shell.volume_factor();
        let printed = (z.powi(3) - a.powi(3)) / v;
        let value = (b.powi(3) - z.powi(3)) / v;
        diag.printed_form = Some(printed);
        diag.printed_form_gap = Some((printed - value).abs());
        value
    };
    Ok(MetricEstimate::probability(raw, Method::NoFadingLimit, diag))
}

/// `p_los · P_los + (1 − p_los) · P_nlos`
pub fn los_mixture_combine(p_los: f64, los_branch: f64, nlos_branch: f64) -> f64 {
    p_los * los_branch + (1.0 - p_los) * nlos_branch
}

/// Outage averaged over the LoS (m = m_los) and NLoS (m = 1) branches.
pub fn outage_los_mixture(inputs: &OutageInputs) -> Result<MetricEstimate, AnalyticError> {
    inputs.ensure_valid()?;
    require_noma(inputs, "outage_los_mixture")?;
    let mix = inputs.channel.los_mix.ok_or(AnalyticError::MissingLosMixture)?;
    let m_los = require_integer_m(mix.m_los)?;
    let los = exact_with_m(inputs, m_los)?;
    let nlos = exact_with_m(inputs, 1)?;
    let raw = los_mixture_combine(mix.p_los, los.value, nlos.value);
    let diag = Diagnostics {
        infeasible: los.diagnostics.infeasible,
        ..Diagnostics::default()
    };
    Ok(MetricEstimate::probability(raw, Method::Exact, diag))
}

/// Dispatches on `method`; Monte-Carlo is not handled here.
pub fn outage(inputs: &OutageInputs, method: Method) -> Result<MetricEstimate, AnalyticError> {
    match method {
        Method::Exact => outage_exact(inputs),
        Method::Asymptotic => outage_asymptotic(inputs),
        Method::NoFadingLimit => outage_no_fading(inputs),
        Method::MonteCarlo => Err(AnalyticError::UnsupportedScenario {
            operation: "analytic outage with monte_carlo method",
            scenario: inputs.scenario,
        }),
    }
}
