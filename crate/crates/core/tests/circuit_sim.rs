use evh_core::charge_pump::{vstore_recurrence, PumpParams};
use evh_core::circuit_sim::*;
use evh_core::transducer::MechParams;
use evh_core::Error;

fn prescribed(cycles: f64) -> SimConfig {
    SimConfig {
        mode: SimMode::PrescribedCapacitance,
        thresholds: (6.5, f64::INFINITY),
        t_end: cycles / 298.0,
        ..Default::default()
    }
}

fn worst_oracle_error(cfg: &SimConfig, cycles: usize) -> f64 {
    let trace = simulate(cfg).unwrap();
    let peaks = cycle_peaks(&trace);
    assert!(peaks.len() >= cycles, "only {} cycles", peaks.len());
    let oracle = vstore_recurrence(&cfg.pump, cycles).unwrap();
    peaks[..cycles]
        .iter()
        .zip(&oracle[1..])
        .map(|(s, o)| (s - o).abs() / o)
        .fold(0.0, f64::max)
}

#[test]
fn prescribed_cycles_follow_recurrence() {
    let err = worst_oracle_error(&prescribed(50.5), 50);
    assert!(err < 5e-3, "worst relative deviation {err}");
}

#[test]
fn stiff_reservoir_makes_recurrence_exact() {
    // the recurrence holds V_res at V0; a huge reservoir does the same
    let mut cfg = prescribed(50.5);
    cfg.pump = PumpParams {
        c_res: 1.0,
        ..cfg.pump
    };
    let err = worst_oracle_error(&cfg, 50);
    assert!(err < 1e-7, "worst relative deviation {err}");
}

#[test]
fn dead_system_audits_to_zero() {
    let cfg = SimConfig {
        mech: MechParams {
            accel_amplitude: 0.0,
            ..Default::default()
        },
        t_end: 0.01,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    let a = energy_audit(&trace);
    for v in [
        a.w_mech_in,
        a.w_kinetic,
        a.w_spring,
        a.w_damp,
        a.w_elec_stored,
        a.w_diode,
    ] {
        assert_eq!(v, 0.0);
    }
    assert_eq!(a.residual, 0.0);
    assert!(a.is_valid());
}

#[test]
fn disabled_switch_reports_nothing() {
    let cfg = SimConfig {
        thresholds: (6.5, f64::INFINITY),
        t_end: 0.1,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    assert!(trace.flybacks().is_empty());
    assert!(amplitude_coupling_report(&trace).is_empty());
}

#[test]
fn default_run_cycles_between_thresholds() {
    let cfg = SimConfig::default();
    let trace = simulate(&cfg).unwrap();
    let flybacks = trace.flybacks();
    assert!(flybacks.len() >= 3, "{} flybacks", flybacks.len());

    for w in trace.records.windows(2) {
        assert!(w[1].t > w[0].t, "timestamps must increase at {}", w[0].t);
    }
    let vmax = trace.records.iter().map(|r| r.v_store).fold(0.0, f64::max);
    assert!((vmax - 13.0).abs() < 1e-6, "peak V_store {vmax}");
    for r in trace.with_event(EventFlags::SWITCH_OFF) {
        assert!(
            (r.v_store - 6.5).abs() < 1e-6,
            "V_store at switch-off {}",
            r.v_store
        );
        assert!(r.d3_on, "D3 takes the inductor current at switch-off");
    }

    let audit = energy_audit(&trace);
    assert!(audit.is_valid(), "{audit}");
}

#[test]
fn trace_invariants_hold() {
    let cfg = SimConfig {
        t_end: 0.25,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    let p = cfg.pump;
    let v_tol = 1e-6;
    let mut prev: Option<&TraceRecord> = None;
    for r in &trace.records {
        assert!(r.v_store >= 0.0 && r.v_res >= 0.0 && r.q_var >= 0.0);
        if !r.switch_on && !r.d3_on {
            assert_eq!(r.i_l, 0.0);
        }
        // blocking diodes never sit in forward bias
        if !r.d1_on {
            assert!(
                r.v_res - r.v_var <= v_tol,
                "D1 forward while off at {}",
                r.t
            );
        }
        if !r.d2_on {
            assert!(
                r.v_var - r.v_store <= v_tol,
                "D2 forward while off at {}",
                r.t
            );
        }
        if let Some(q) = prev {
            // dense-output noise only, far below any physical energy here
            let e_tol = 1e-12 * 0.5 * p.c_store * p.v0 * p.v0;
            assert!(r.w_damp >= q.w_damp - e_tol && r.w_diode >= q.w_diode - e_tol);
            let quiet = !q.switch_on && !q.d3_on && !r.switch_on && !r.d3_on;
            if quiet {
                let total = |x: &TraceRecord| p.c_res * x.v_res + x.q_var + p.c_store * x.v_store;
                let scale = p.c_res * p.v0;
                assert!(
                    (total(r) - total(q)).abs() < 1e-9 * scale,
                    "charge drift at {}",
                    r.t
                );
            }
            if q.switch_on && r.switch_on {
                assert!(r.v_store - r.v_res <= q.v_store - q.v_res + 1e-9);
            }
            if q.d3_on && r.d3_on {
                assert!(r.i_l <= q.i_l);
            }
        }
        prev = Some(r);
    }
}

#[test]
fn exponential_diodes_pump_and_balance() {
    let cfg = SimConfig {
        diode: DiodeModel::Exponential {
            i_sat: 1e-12,
            v_thermal: 0.02585,
            ideality: 1.0,
        },
        t_end: 0.05,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    assert!(trace.last().v_store > 5.5, "pump must still raise V_store");
    let audit = energy_audit(&trace);
    assert!(audit.w_diode > 0.0);
    assert!(audit.is_valid(), "{audit}");
}

#[test]
fn resistive_diodes_and_load_balance() {
    let cfg = SimConfig {
        diode: DiodeModel::IdealEvent { r_on: 1e3 },
        load_resistance: Some(1e7),
        t_end: 0.05,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    let audit = energy_audit(&trace);
    assert!(audit.w_diode > 0.0 && audit.w_load > 0.0);
    assert!(audit.is_valid(), "{audit}");
}

#[test]
fn switching_energy_estimate_counts_flybacks() {
    let cfg = SimConfig {
        switching_energy: 1e-9,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    let audit = energy_audit(&trace);
    assert_eq!(audit.w_switch_est, 1e-9 * trace.flybacks().len() as f64);
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let cfg = SimConfig {
        inductance: -1.0,
        ..Default::default()
    };
    assert!(matches!(simulate(&cfg), Err(Error::Domain(_))));
}

#[test]
fn csv_has_documented_header() {
    let cfg = SimConfig {
        t_end: 1e-4,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), TRACE_COLUMNS.len());
    assert_eq!(first[11], "init");
    assert!(text.lines().last().unwrap().contains("end"));
}
