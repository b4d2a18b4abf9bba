use evh_core::charge_pump::*;
use evh_core::optimizer::*;
use evh_core::switch_ctrl::{SwitchController, SwitchState};
use evh_core::transducer::*;
use proptest::prelude::*;

fn pump_params() -> impl Strategy<Value = PumpParams> {
    (
        1e-12..1e-9f64,
        1.5..10.0f64,
        3.0..100.0f64,
        10.0..1e4f64,
        0.5..20.0f64,
    )
        .prop_map(|(c_max, ratio, store_mult, res_mult, v0)| {
            let c_store = c_max * store_mult;
            PumpParams {
                c_res: c_store * res_mult,
                c_store,
                c_max,
                c_min: c_max / ratio,
                v0,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_rises_monotonically_to_saturation(p in pump_params()) {
        let v = vstore_recurrence(&p, 300).unwrap();
        let sat = saturation_voltage(&p).unwrap();
        for w in v.windows(2) {
            prop_assert!(w[1] >= w[0]);
            prop_assert!(w[1] <= sat * (1.0 + 1e-12));
        }
    }

    #[test]
    fn closed_form_matches_recurrence(p in pump_params(), n in 0u32..200) {
        let v = vstore_recurrence(&p, n as usize).unwrap();
        let c = vstore_closed_form(&p, n, VstoreVariant::Corrected).unwrap();
        let scale = saturation_voltage(&p).unwrap();
        prop_assert!((v[n as usize] - c).abs() <= 1e-9 * scale);
    }

    #[test]
    fn qv_area_is_cycle_energy(p in pump_params(), n in 1usize..80) {
        let area = qv_cycle(&p, n).unwrap().area();
        let e = pump_energy_per_cycle(&p, n, SeriesSource::Recurrence, Prefactor::Approx).unwrap();
        prop_assert!((area - e).abs() <= 1e-9 * e.abs().max(1e-30));
    }

    #[test]
    fn capacitance_stays_within_bounds(
        c_max in 1e-12..1e-9f64,
        ratio in 1.01..50.0f64,
        span in 1e-6..1e-3f64,
        x in -2e-3..2e-3f64,
    ) {
        let prof = CapacitanceProfile::analytic(c_max, c_max / ratio, span).unwrap();
        let c = prof.capacitance(x);
        prop_assert!(c >= c_max / ratio && c <= c_max);
        prop_assert_eq!(prof.bounds(), (c_max / ratio, c_max));
    }

    #[test]
    fn derivative_matches_finite_difference(
        frac in prop_oneof![-0.98..-0.02f64, 0.02..0.98f64, 1.05..3.0f64, -3.0..-1.05f64],
    ) {
        let prof = CapacitanceProfile::analytic(200e-12, 200e-12 / 3.5, 50e-6).unwrap();
        let x = frac * 50e-6;
        let h = 1e-9;
        let fd = (prof.capacitance(x + h) - prof.capacitance(x - h)) / (2.0 * h);
        let d = prof.dcapacitance_dx(x);
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-12), "x {x}: {fd} vs {d}");
    }

    #[test]
    fn table_profile_interpolates_analytic(x in -80e-6..80e-6f64) {
        let a = CapacitanceProfile::analytic(200e-12, 50e-12, 50e-6).unwrap();
        let t = CapacitanceProfile::table(vec![
            (-100e-6, 50e-12), (-50e-6, 50e-12), (0.0, 200e-12), (50e-6, 50e-12), (100e-6, 50e-12),
        ]).unwrap();
        prop_assert!((a.capacitance(x) - t.capacitance(x)).abs() <= 1e-24);
    }

    #[test]
    fn force_points_up_the_capacitance_gradient(x in -1e-4..1e-4f64, v in 0.0..50.0f64) {
        let prof = CapacitanceProfile::analytic(200e-12, 200e-12 / 3.5, 50e-6).unwrap();
        let f = electrostatic_force(&prof, x, v);
        prop_assert!(f * prof.dcapacitance_dx(x) >= 0.0);
        prop_assert_eq!(f, 0.5 * v * v * prof.dcapacitance_dx(x));
    }

    #[test]
    fn hysteresis_holds_state_inside_band(
        v1 in 0.0..10.0f64,
        gap in 0.1..10.0f64,
        samples in prop::collection::vec(0.0..1.0f64, 1..40),
        start_on in any::<bool>(),
    ) {
        let v2 = v1 + gap;
        let mut c = SwitchController::new(v1, v2).unwrap();
        if start_on {
            c = c.step(v2);
        }
        for s in samples {
            let v = v1 + s * gap;
            let before = c.state();
            c = c.step(v);
            if v > v1 && v < v2 {
                prop_assert_eq!(c.state(), before);
            }
            if v >= v2 {
                prop_assert_eq!(c.state(), SwitchState::On);
            }
            if v <= v1 {
                prop_assert_eq!(c.state(), SwitchState::Off);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimum_widens_with_switching_cost(a in 0.0..2.0f64, b in 0.0..2.0f64) {
        let base = OptimizerConfig { n_max: 80, ..Default::default() };
        let unit = optimize_window(&base).unwrap().power * base.t_cycle;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let w = |k: f64| {
            optimize_window(&OptimizerConfig { w_switch: k * unit, ..base }).unwrap().width()
        };
        prop_assert!(w(lo) <= w(hi));
    }

    #[test]
    fn optimizer_is_deterministic_and_maximal(k in 0.0..3.0f64) {
        let base = OptimizerConfig { n_max: 60, ..Default::default() };
        let cfg = OptimizerConfig { w_switch: k * 1e-9, ..base };
        let a = optimize_window(&cfg).unwrap();
        prop_assert_eq!(a, optimize_window(&cfg).unwrap());
        for pt in power_surface(&cfg).unwrap() {
            prop_assert!(pt.power <= a.power);
        }
    }
}
