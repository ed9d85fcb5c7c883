use proptest::prelude::*;
use u2x_core::analytic::{ergodic_near_noma, outage_exact, ErgodicSeriesControl};
use u2x_core::metrics::{diversity_order, high_snr_slope, outage_sum_rate, CurveKind, MetricCurve};
use u2x_core::model::RateTargets;
use u2x_core::{OutageInputs, Scenario};

fn scenario() -> impl Strategy<Value = Scenario> {
    prop::sample::select(Scenario::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn outage_nonincreasing_in_power(
        s in scenario(),
        m in 1u32..5,
        pu in -40.0f64..50.0,
        step in 0.5f64..10.0,
        r_v in 0.2f64..1.2,
    ) {
        let mut inp = OutageInputs::default().with_m(m as f64).with_scenario(s);
        inp.rates.r_v = r_v;
        let lo = outage_exact(&inp.with_pu_dbm(pu)).unwrap().value;
        let hi = outage_exact(&inp.with_pu_dbm(pu + step)).unwrap().value;
        prop_assert!(hi <= lo + 1e-12, "{} then {}", lo, hi);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn outage_nondecreasing_in_target_rates(
        s in scenario(),
        m in 1u32..4,
        pu in -20.0f64..30.0,
        bump in 0.01f64..0.3,
    ) {
        let base = OutageInputs::default().with_m(m as f64).with_pu_dbm(pu).with_scenario(s);
        let p0 = outage_exact(&base).unwrap().value;
        let mut more = base;
        more.rates = RateTargets {
            r_w: base.rates.r_w + bump,
            r_v: base.rates.r_v + bump,
            r_o: base.rates.r_o + bump,
            r_ow: base.rates.r_ow + bump,
            r_ov: base.rates.r_ov + bump,
        };
        let p1 = outage_exact(&more).unwrap().value;
        prop_assert!(p1 + 1e-12 >= p0);
    }

    #[test]
    fn slope_estimators_ignore_scale(k in 1e-3f64..1e3, d in 0.5f64..4.0, s in 0.1f64..2.0) {
        let x: Vec<f64> = (0..8).map(|i| 20.0 + 3.0 * i as f64).collect();
        let p: Vec<f64> = x.iter().map(|db| 0.5 * 10f64.powf(-d * db / 10.0) * (1.0 + 0.1 * (db / 7.0).sin())).collect();
        let scaled: Vec<f64> = p.iter().map(|v| v * k).collect();
        let d1 = diversity_order(&MetricCurve::new(x.clone(), p, CurveKind::OutageProb).unwrap(), 5).unwrap();
        let d2 = diversity_order(&MetricCurve::new(x.clone(), scaled, CurveKind::OutageProb).unwrap(), 5).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-9);

        let r: Vec<f64> = x.iter().map(|db| 1.0 + s * db / 10.0 * 10f64.log2()).collect();
        let r2: Vec<f64> = r.iter().map(|v| v * k).collect();
        let s1 = high_snr_slope(&MetricCurve::new(x.clone(), r, CurveKind::RateBpcu).unwrap(), 5).unwrap();
        let s2 = high_snr_slope(&MetricCurve::new(x, r2, CurveKind::RateBpcu).unwrap(), 5).unwrap();
        prop_assert!((s1 * k - s2).abs() < 1e-9 * k.max(1.0));
    }

    #[test]
    fn sum_rate_nonincreasing_in_outage(pv in 0.0f64..1.0, pw in 0.0f64..1.0, dv in 0.0f64..1.0, dw in 0.0f64..1.0) {
        let r = RateTargets::default();
        let base = outage_sum_rate(pv, pw, &r);
        prop_assert!(outage_sum_rate((pv + dv).min(1.0), pw, &r) <= base + 1e-15);
        prop_assert!(outage_sum_rate(pv, (pw + dw).min(1.0), &r) <= base + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn near_rate_nondecreasing_in_power(m in 1u32..4, pu in -10.0f64..50.0, step in 1.0f64..10.0) {
        let ctl = ErgodicSeriesControl::default();
        let inp = OutageInputs::default().with_m(m as f64);
        let a = ergodic_near_noma(&inp.with_pu_dbm(pu), &ctl).unwrap().value;
        let b = ergodic_near_noma(&inp.with_pu_dbm(pu + step), &ctl).unwrap().value;
        prop_assert!(b >= a);
    }
}

#[test]
fn far_outage_limits_in_power() {
    for m in [1.0, 2.0, 3.0] {
        let inp = OutageInputs::default().with_m(m).with_scenario(Scenario::NomaFar);
        assert!(outage_exact(&inp.with_pu_dbm(-80.0)).unwrap().value > 1.0 - 1e-9);
        assert!(outage_exact(&inp.with_pu_dbm(120.0)).unwrap().value < 1e-12);
    }
}
