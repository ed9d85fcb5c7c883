//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! This is the reference integrator the special functions and the closed-form
//! evaluators are checked against. It shares no code with them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("no convergence within {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    NoConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at t = {0}")]
    NonFinite(f64),
    #[error("invalid interval [{0}, {1}]")]
    BadInterval(f64, f64),
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 20_000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite(c));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite(c - x));
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite(c + x));
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    })
}

/// ∫ₐᵇ f; `b` may be `f64::INFINITY`, handled by t = a + u/(1−u).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
) -> Result<f64, QuadratureError> {
    if a.is_nan() || b.is_nan() || a.is_infinite() || b < a {
        return Err(QuadratureError::BadInterval(a, b));
    }
    if b.is_infinite() {
        let g = |u: f64| {
            let w = 1.0 - u;
            f(a + u / w) / (w * w)
        };
        return integrate_finite(&g, 0.0, 1.0, opts);
    }
    integrate_finite(&f, a, b, opts)
}

fn integrate_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    let first = gk15(f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if subdivisions >= opts.max_subdivisions {
            return Err(QuadratureError::NoConvergence {
                estimate: total,
                error: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // resum to shed accumulated rounding in the running totals
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

/// Adaptive quadrature at absolute tolerance 1e−10.
pub fn quadrature_oracle<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64, QuadratureError> {
    integrate(f, a, b, QuadratureOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_exponential_mass() {
        let v = quadrature_oracle(|t| (-t).exp(), 0.0, f64::INFINITY).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polynomial() {
        let v = quadrature_oracle(|t| t, 0.0, 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_improper_integral() {
        let v = quadrature_oracle(|t| (-t).exp() / (t * t), 1.0, f64::INFINITY).unwrap();
        assert!((v - 0.148_495_506_775_922_05).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadratureOptions {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        let err = integrate(|t: f64| (1.0 / t).sin(), 1e-6, 1.0, opts).unwrap_err();
        assert!(matches!(err, QuadratureError::NoConvergence { .. }));
    }

    #[test]
    fn bad_interval() {
        assert!(integrate(|t| t, 2.0, 1.0, QuadratureOptions::default()).is_err());
    }
}
