use super::{SpecFunError, EPS, EULER_GAMMA, FPMIN, MAX_ITER};

fn check_positive(function: &'static str, x: f64) -> Result<(), SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain {
            function,
            detail: format!("need finite x > 0, got x = {x}"),
        });
    }
    Ok(())
}

/// E1(x) = ∫ₓ^∞ e^{−t}/t dt, x > 0.
pub fn exp_integral_e1(x: f64) -> Result<f64, SpecFunError> {
    check_positive("exp_integral_e1", x)?;
    if x <= 1.0 {
        e1_series(x)
    } else {
        Ok(en_continued_fraction(1, x)? * (-x).exp())
    }
}

fn e1_series(x: f64) -> Result<f64, SpecFunError> {
    // E1 = −γ − ln x − Σ_{k≥1} (−x)^k / (k·k!)
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..MAX_ITER {
        term *= -x / k as f64;
        let del = term / k as f64;
        sum += del;
        if del.abs() < EPS * sum.abs().max(1e-300) {
            return Ok(-EULER_GAMMA - x.ln() - sum);
        }
    }
    Err(SpecFunError::NoConvergence {
        function: "exp_integral_e1 series",
        iterations: MAX_ITER,
    })
}

/// e^x E_n(x) via the continued fraction; intended for x > 1.
fn en_continued_fraction(n: u32, x: f64) -> Result<f64, SpecFunError> {
    let nf = n as f64;
    let mut b = x + nf;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let a = -(i as f64) * (nf - 1.0 + i as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(SpecFunError::NoConvergence {
        function: "exp_integral_en continued fraction",
        iterations: MAX_ITER,
    })
}

/// E_n(x) power series for 0 < x ≤ 1, n ≥ 2.
fn en_series(n: u32, x: f64) -> Result<f64, SpecFunError> {
    let nm1 = (n - 1) as usize;
    let mut ans = 1.0 / nm1 as f64;
    let mut fact = 1.0;
    for i in 1..MAX_ITER {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i as f64 - nm1 as f64)
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * EPS {
            return Ok(ans);
        }
    }
    Err(SpecFunError::NoConvergence {
        function: "exp_integral_en series",
        iterations: MAX_ITER,
    })
}

/// e^x E_n(x) for n ≥ 1, x > 0.
pub fn scaled_exp_integral_en(n: u32, x: f64) -> Result<f64, SpecFunError> {
    check_positive("scaled_exp_integral_en", x)?;
    if n == 0 {
        return Err(SpecFunError::Domain {
            function: "scaled_exp_integral_en",
            detail: "order must be >= 1".into(),
        });
    }
    if x > 1.0 {
        en_continued_fraction(n, x)
    } else if n == 1 {
        Ok(x.exp() * e1_series(x)?)
    } else {
        Ok(x.exp() * en_series(n, x)?)
    }
}

/// `[e^x E_1(x), …, e^x E_{n_max}(x)]`.
///
/// For x ≤ 1 the table is filled by the recurrence
/// `e^x E_{n+1} = (1 − x·e^x E_n)/n` seeded from E1, whose error gain per
/// step is x/n ≤ 1. For x > 1 each entry comes from its own continued fraction.
pub fn scaled_exp_integral_table(n_max: u32, x: f64) -> Result<Vec<f64>, SpecFunError> {
    check_positive("scaled_exp_integral_table", x)?;
    let mut out = Vec::with_capacity(n_max as usize);
    if n_max == 0 {
        return Ok(out);
    }
    if x <= 1.0 {
        let mut h = x.exp() * e1_series(x)?;
        out.push(h);
        for n in 1..n_max {
            h = (1.0 - x * h) / n as f64;
            out.push(h);
        }
    } else {
        for n in 1..=n_max {
            out.push(en_continued_fraction(n, x)?);
        }
    }
    Ok(out)
}
