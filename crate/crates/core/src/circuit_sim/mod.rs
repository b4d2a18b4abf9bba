//! Transient simulation of the full harvester: charge pump (D1, D2), flyback
//! branch (switch, L, D3) and the mass-spring-damper resonator, coupled
//! through the electrostatic force of `C_var`.
//!
//! Integration is piecewise smooth. Between events a Dormand-Prince stepper
//! advances the state under a fixed topology; after each step the event
//! functions of that topology are scanned on the dense output, the earliest
//! crossing is bisected, and the topology is re-resolved at that instant.

mod audit;
mod network;
mod trace;

use crate::charge_pump::PumpParams;
use crate::error::{Error, Result};
use crate::ode::{Dopri5, Tolerances};
use crate::switch_ctrl::{SwitchController, SwitchState};
use crate::transducer::{CapacitanceProfile, MechParams};

pub use audit::{
    amplitude_coupling_report, cycle_peaks, energy_audit, harvest_per_period, rank_correlation,
    voltage_amplitude_correlation, AmplitudeRecord, EnergyAudit, PeriodHarvest, AUDIT_TOLERANCE,
    COUPLING_WINDOW_PERIODS,
};
pub use network::Topology;
pub use trace::{format_float, EventFlags, Trace, TraceMeta, TraceRecord, TRACE_COLUMNS};

use network::{Network, Solution, StateVec, DIM, I_L, Q_RES, Q_STORE, Q_VAR, V, W_DIODE, X};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    /// Resonator and circuit integrated together.
    #[default]
    Coupled,
    /// `C_var(t)` swept sinusoidally between `c_min` and `c_max` of the pump
    /// parameters at the drive frequency; mechanics is not integrated.
    PrescribedCapacitance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiodeModel {
    /// Switched diodes with event-located transitions. `r_on = 0` merges the
    /// two terminals while conducting; `r_on > 0` conducts through a resistor.
    IdealEvent { r_on: f64 },
    /// Shockley characteristic for D1 and D2. D3 uses the same forward
    /// characteristic and still turns off when the inductor current reaches zero.
    Exponential {
        i_sat: f64,
        v_thermal: f64,
        ideality: f64,
    },
}

impl Default for DiodeModel {
    fn default() -> Self {
        Self::IdealEvent { r_on: 0.0 }
    }
}

impl DiodeModel {
    fn validate(&self) -> Result<()> {
        match *self {
            DiodeModel::IdealEvent { r_on } => {
                if !(r_on >= 0.0) || !r_on.is_finite() {
                    return Err(Error::domain(format!(
                        "diode r_on must be >= 0 (got {r_on})"
                    )));
                }
            }
            DiodeModel::Exponential {
                i_sat,
                v_thermal,
                ideality,
            } => {
                for (name, v) in [
                    ("i_sat", i_sat),
                    ("v_thermal", v_thermal),
                    ("ideality", ideality),
                ] {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::domain(format!("diode {name} must be > 0 (got {v})")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    /// Absolute tolerance as a fraction of each state's natural scale.
    pub abs_tol: f64,
    /// Largest step, also the trace sampling interval (s). Every accepted
    /// step is recorded while the flyback branch conducts.
    pub max_step: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub pump: PumpParams,
    pub mech: MechParams,
    pub profile: CapacitanceProfile,
    pub inductance: f64,
    pub diode: DiodeModel,
    /// `(v1, v2)`; `v2 = +inf` disables the flyback.
    pub thresholds: (f64, f64),
    pub mode: SimMode,
    pub integrator: IntegratorSettings,
    pub t_end: f64,
    /// Optional resistive load across `C_res`.
    pub load_resistance: Option<f64>,
    /// Lumped loss per flyback, only used by the audit's estimate.
    pub switching_energy: f64,
}

/// Default half-width of the capacitance peak (m).
pub const DEFAULT_X_SPAN: f64 = 50e-6;

impl Default for SimConfig {
    fn default() -> Self {
        let pump = PumpParams::default();
        Self {
            pump,
            mech: MechParams::default(),
            profile: CapacitanceProfile::AnalyticOverlap {
                c_max: pump.c_max,
                c_min: pump.c_min,
                x_span: DEFAULT_X_SPAN,
            },
            inductance: 2.5e-6,
            diode: DiodeModel::default(),
            thresholds: (6.5, 13.0),
            mode: SimMode::Coupled,
            integrator: IntegratorSettings::default(),
            t_end: 0.6,
            load_resistance: None,
            switching_energy: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pump.c_res > 0.0 && self.pump.c_store > 0.0 && self.pump.v0 > 0.0) {
            return Err(Error::domain("c_res, c_store and v0 must be > 0"));
        }
        if self.mode == SimMode::PrescribedCapacitance {
            self.pump.validate_saturating()?;
        }
        self.mech.validate()?;
        self.diode.validate()?;
        SwitchController::new(self.thresholds.0, self.thresholds.1)?;
        if !(self.inductance > 0.0) || !self.inductance.is_finite() {
            return Err(Error::domain(format!(
                "inductance must be > 0 (got {})",
                self.inductance
            )));
        }
        let s = &self.integrator;
        for (name, v) in [
            ("rel_tol", s.rel_tol),
            ("abs_tol", s.abs_tol),
            ("max_step", s.max_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be > 0 (got {v})")));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::domain(format!(
                "t_end must be >= 0 (got {})",
                self.t_end
            )));
        }
        if let Some(r) = self.load_resistance {
            if !(r > 0.0) {
                return Err(Error::domain(format!(
                    "load_resistance must be > 0 (got {r})"
                )));
            }
        }
        if !(self.switching_energy >= 0.0) {
            return Err(Error::domain("switching_energy must be >= 0"));
        }
        Ok(())
    }

    /// Ring period of L against the series `C_store`/`C_res` pair.
    pub fn flyback_ring_period(&self) -> f64 {
        2.0 * std::f64::consts::PI * (self.inductance * self.pump.series_capacitance()).sqrt()
    }
}

/// Continuous and discrete state in physical variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub q_var: f64,
    pub v_store: f64,
    pub v_res: f64,
    pub i_l: f64,
    pub switch: SwitchState,
    pub d1_on: bool,
    pub d2_on: bool,
    pub d3_on: bool,
}

impl SimState {
    /// Rest position, every capacitor at `v0`, no inductor current.
    pub fn initial(config: &SimConfig) -> Self {
        let v0 = config.pump.v0;
        let c_var = match config.mode {
            SimMode::Coupled => config.profile.capacitance(0.0),
            SimMode::PrescribedCapacitance => config.pump.c_max,
        };
        Self {
            t: 0.0,
            x: 0.0,
            v: 0.0,
            q_var: c_var * v0,
            v_store: v0,
            v_res: v0,
            i_l: 0.0,
            switch: SwitchState::Off,
            d1_on: false,
            d2_on: false,
            d3_on: false,
        }
    }

    fn topology(&self) -> Topology {
        Topology {
            d1: self.d1_on,
            d2: self.d2_on,
            d3: self.d3_on,
            switch_on: self.switch.is_on(),
        }
    }

    fn to_vec(self, config: &SimConfig) -> StateVec {
        let mut y = [0.0; DIM];
        y[X] = self.x;
        y[V] = self.v;
        y[Q_RES] = config.pump.c_res * self.v_res;
        y[Q_VAR] = self.q_var;
        y[Q_STORE] = config.pump.c_store * self.v_store;
        y[I_L] = self.i_l;
        y
    }
}

/// Time derivatives of the physical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivatives {
    pub dx: f64,
    pub dv: f64,
    pub dq_var: f64,
    pub dv_store: f64,
    pub dv_res: f64,
    pub di_l: f64,
}

/// Right-hand side for the topology encoded in `state`.
pub fn derivatives(state: &SimState, config: &SimConfig) -> Result<StateDerivatives> {
    let topo = state.topology();
    if topo.d3 && topo.switch_on {
        return Err(Error::Invariant {
            t: state.t,
            what: "D3 conducting while the switch is closed".into(),
        });
    }
    let net = Network::new(config);
    let dy = net.solve(state.t, &state.to_vec(config), &topo).dy;
    Ok(StateDerivatives {
        dx: dy[X],
        dv: dy[V],
        dq_var: dy[Q_VAR],
        dv_store: dy[Q_STORE] / config.pump.c_store,
        dv_res: dy[Q_RES] / config.pump.c_res,
        di_l: dy[I_L],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    fn crossed(self, g0: f64, g1: f64) -> bool {
        let up = g0 < 0.0 && g1 >= 0.0;
        let down = g0 > 0.0 && g1 <= 0.0;
        match self {
            Crossing::Rising => up,
            Crossing::Falling => down,
            Crossing::Either => up || down,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventFn {
    D1Forward,
    D1Current,
    D2Forward,
    D2Current,
    InductorCurrent,
    StoreAbove(f64),
    StoreBelow(f64),
    Position(f64),
    Velocity,
    CapacitanceRate,
}

struct Simulator<'a> {
    cfg: &'a SimConfig,
    net: Network<'a>,
    v_tol: f64,
    i_tol: f64,
}

const DETECT_SUBSTEPS: usize = 4;

impl<'a> Simulator<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let p = &cfg.pump;
        let i_scale = p.c_max * p.v0 * cfg.mech.drive_freq;
        Self {
            cfg,
            net: Network::new(cfg),
            v_tol: 1e-10 * p.v0,
            i_tol: 1e-9 * i_scale,
        }
    }

    fn ideal_diodes(&self) -> bool {
        matches!(self.cfg.diode, DiodeModel::IdealEvent { .. })
    }

    fn tolerances(&self) -> Tolerances<DIM> {
        let cfg = self.cfg;
        let p = &cfg.pump;
        let x_scale = match &cfg.profile {
            CapacitanceProfile::AnalyticOverlap { x_span, .. } => *x_span,
            CapacitanceProfile::Table(_) => cfg
                .profile
                .breakpoints()
                .iter()
                .fold(0.0_f64, |m, b| m.max(b.abs()))
                .max(1e-6),
        };
        let w = 2.0 * std::f64::consts::PI * cfg.mech.drive_freq;
        let e_scale = 0.5 * p.c_store * p.v0 * p.v0;
        let scales = [
            x_scale,
            x_scale * w,
            p.c_res * p.v0,
            p.c_max * p.v0,
            p.c_store * p.v0,
            p.v0 * (p.c_store / cfg.inductance).sqrt(),
            e_scale,
            e_scale,
            e_scale,
            e_scale,
            e_scale,
        ];
        let s = &cfg.integrator;
        Tolerances {
            rel: s.rel_tol,
            abs: scales.map(|sc| sc * s.abs_tol),
        }
    }

    fn event_functions(
        &self,
        topo: &Topology,
        ctrl: &SwitchController,
    ) -> Vec<(EventFn, Crossing)> {
        let mut ev = Vec::with_capacity(10);
        if self.ideal_diodes() {
            ev.push(if topo.d1 {
                (EventFn::D1Current, Crossing::Falling)
            } else {
                (EventFn::D1Forward, Crossing::Rising)
            });
            ev.push(if topo.d2 {
                (EventFn::D2Current, Crossing::Falling)
            } else {
                (EventFn::D2Forward, Crossing::Rising)
            });
        }
        if topo.d3 {
            ev.push((EventFn::InductorCurrent, Crossing::Falling));
        }
        match ctrl.state() {
            SwitchState::Off if ctrl.v2().is_finite() => {
                ev.push((EventFn::StoreAbove(ctrl.v2()), Crossing::Rising))
            }
            SwitchState::On => ev.push((EventFn::StoreBelow(ctrl.v1()), Crossing::Falling)),
            _ => {}
        }
        match self.cfg.mode {
            SimMode::Coupled => {
                for b in self.cfg.profile.breakpoints() {
                    ev.push((EventFn::Position(b), Crossing::Either));
                }
                ev.push((EventFn::Velocity, Crossing::Either));
            }
            SimMode::PrescribedCapacitance => {
                ev.push((EventFn::CapacitanceRate, Crossing::Either));
            }
        }
        ev
    }

    fn eval(&self, f: EventFn, y: &StateVec, s: &Solution) -> f64 {
        match f {
            EventFn::D1Forward => s.v_res - s.v_var - self.v_tol,
            EventFn::D2Forward => s.v_var - s.v_store - self.v_tol,
            EventFn::D1Current => s.i_d1 + self.i_tol,
            EventFn::D2Current => s.i_d2 + self.i_tol,
            EventFn::InductorCurrent => y[I_L],
            EventFn::StoreAbove(v2) => s.v_store - v2,
            EventFn::StoreBelow(v1) => s.v_store - v1,
            EventFn::Position(b) => y[X] - b,
            EventFn::Velocity => y[V],
            EventFn::CapacitanceRate => s.c_var_rate,
        }
    }

    /// Re-establishes diode complementarity at an event instant: conducting
    /// diodes carry non-negative current, blocking ones non-positive bias.
    /// Returns the energy dissipated by charge sharing.
    fn resolve(&self, t: f64, y: &mut StateVec, topo: &mut Topology) -> Result<f64> {
        let mut lost = self.net.share_charge(t, y, topo);
        if !self.ideal_diodes() {
            return Ok(lost);
        }
        for _ in 0..8 {
            let s = self.net.solve(t, y, topo);
            let mut changed = false;
            if topo.d1 && s.i_d1 <= -self.i_tol {
                topo.d1 = false;
                changed = true;
            }
            if topo.d2 && s.i_d2 <= -self.i_tol {
                topo.d2 = false;
                changed = true;
            }
            if !changed {
                if !topo.d1 && s.v_res - s.v_var >= self.v_tol {
                    topo.d1 = true;
                    changed = true;
                }
                if !topo.d2 && s.v_var - s.v_store >= self.v_tol {
                    topo.d2 = true;
                    changed = true;
                }
                lost += self.net.share_charge(t, y, topo);
            }
            if !changed {
                return Ok(lost);
            }
        }
        Err(Error::Invariant {
            t,
            what: format!("diode states do not settle ({})", topo.describe()),
        })
    }

    fn record(&self, t: f64, y: &StateVec, topo: &Topology, events: EventFlags) -> TraceRecord {
        let s = self.net.solve(t, y, topo);
        let m = &self.cfg.mech;
        let coupled = self.cfg.mode == SimMode::Coupled;
        TraceRecord {
            t,
            x: y[X],
            v: y[V],
            q_var: y[Q_VAR],
            c_var: s.c_var,
            v_var: s.v_var,
            v_store: s.v_store,
            v_res: s.v_res,
            i_l: y[I_L],
            switch_on: topo.switch_on,
            d1_on: topo.d1,
            d2_on: topo.d2,
            d3_on: topo.d3,
            f_elec: s.f_elec,
            events,
            w_mech_in: y[network::W_IN],
            w_kinetic: if coupled {
                0.5 * m.mass * y[V] * y[V]
            } else {
                0.0
            },
            w_spring: if coupled {
                0.5 * m.stiffness * y[X] * y[X]
            } else {
                0.0
            },
            w_elec_stored: self.net.field_energy(t, y),
            w_damp: y[network::W_DAMP],
            w_diode: y[W_DIODE],
            w_load: y[network::W_LOAD],
            w_converted: y[network::W_CONV],
        }
    }

    fn run(&self) -> Result<Trace> {
        let cfg = self.cfg;
        let init = SimState::initial(cfg);
        let mut y = init.to_vec(cfg);
        let mut topo = Topology::default();
        let mut ctrl = SwitchController::new(cfg.thresholds.0, cfg.thresholds.1)?;
        let mut t = 0.0;

        let s0 = self.net.solve(t, &y, &topo);
        ctrl = ctrl.step(s0.v_store);
        topo.switch_on = ctrl.state().is_on();
        y[W_DIODE] += self.resolve(t, &mut y, &mut topo)?;

        let meta = TraceMeta {
            mode: cfg.mode,
            drive_period: cfg.mech.drive_period(),
            v1: cfg.thresholds.0,
            v2: cfg.thresholds.1,
            switching_energy: cfg.switching_energy,
        };
        let mut records = vec![self.record(t, &y, &topo, EventFlags::INIT)];
        if cfg.t_end == 0.0 {
            return Ok(Trace { meta, records });
        }

        let solver = Dopri5::new(self.tolerances());
        let max_step = cfg.integrator.max_step;
        let fast_step = max_step.min(cfg.flyback_ring_period() / 50.0);
        let sample_dt = max_step;
        let mut next_sample: u64 = 1;
        let mut h = max_step.min(cfg.t_end) * 1e-3;
        let mut stalled = 0u32;

        while t < cfg.t_end {
            let h_max = if topo.switch_on || topo.d3 {
                fast_step
            } else {
                max_step
            };
            let rhs = |tt: f64, yy: &StateVec| self.net.solve(tt, yy, &topo).dy;
            let remaining = cfg.t_end - t;
            let adv = solver
                .advance(&rhs, t, &y, h.min(remaining).min(h_max), h_max)
                .ok_or_else(|| Error::StepUnderflow {
                    t,
                    topology: topo.describe(),
                })?;
            let step = adv.step;
            let mut t1 = step.t1();
            if cfg.t_end - t1 <= 4.0 * f64::EPSILON * cfg.t_end {
                t1 = cfg.t_end;
            }

            let events = self.event_functions(&topo, &ctrl);
            let g_at = |tt: f64| -> (StateVec, Vec<f64>) {
                let yy = step.at(tt);
                let s = self.net.solve(tt, &yy, &topo);
                let g = events.iter().map(|(f, _)| self.eval(*f, &yy, &s)).collect();
                (yy, g)
            };

            let (_, g_start) = g_at(t);
            let mut earliest: Option<f64> = None;
            let mut prev_t = t;
            let mut prev_g = g_start.clone();
            for j in 1..=DETECT_SUBSTEPS {
                let tj = if j == DETECT_SUBSTEPS {
                    t1
                } else {
                    t + (t1 - t) * j as f64 / DETECT_SUBSTEPS as f64
                };
                let (_, gj) = g_at(tj);
                for (k, (f, dir)) in events.iter().enumerate() {
                    if dir.crossed(prev_g[k], gj[k]) {
                        let tc = self.bisect(&step, &topo, *f, *dir, prev_t, tj, prev_g[k])?;
                        earliest = Some(earliest.map_or(tc, |e: f64| e.min(tc)));
                    }
                }
                if earliest.is_some() {
                    break;
                }
                prev_t = tj;
                prev_g = gj;
            }

            let t_stop = earliest.unwrap_or(t1);
            while (next_sample as f64) * sample_dt < t_stop {
                let ts = next_sample as f64 * sample_dt;
                if ts > t {
                    records.push(self.record(ts, &step.at(ts), &topo, EventFlags::NONE));
                }
                next_sample += 1;
            }

            let Some(t_e) = earliest else {
                t = t1;
                y = if t1 == step.t1() {
                    step.y1
                } else {
                    step.at(t1)
                };
                // the flyback is far shorter than the sample grid; keep its steps
                let fast = topo.switch_on || topo.d3;
                if fast && records.last().is_some_and(|r| r.t < t) {
                    records.push(self.record(t, &y, &topo, EventFlags::NONE));
                }
                h = adv.h_next;
                stalled = 0;
                continue;
            };

            let (mut y_e, g_end) = g_at(t_e);
            let mut flags = EventFlags::NONE;
            let fired: Vec<EventFn> = events
                .iter()
                .zip(g_start.iter().zip(&g_end))
                .filter(|((_, dir), (g0, g1))| dir.crossed(**g0, **g1))
                .map(|((f, _), _)| *f)
                .collect();

            let mid = 0.5 * (t + t_e);
            let rate_before = self.net.solve(mid, &step.at(mid), &topo).c_var_rate;
            let before = topo;

            for f in &fired {
                match f {
                    EventFn::StoreAbove(_) | EventFn::StoreBelow(_) => {
                        let v_store = self.net.solve(t_e, &y_e, &topo).v_store;
                        ctrl = ctrl.step(v_store);
                        let on = ctrl.state().is_on();
                        if on && !topo.switch_on {
                            topo.switch_on = true;
                            topo.d3 = false;
                            flags.insert(EventFlags::SWITCH_ON);
                        } else if !on && topo.switch_on {
                            topo.switch_on = false;
                            topo.d3 = y_e[I_L] > 0.0;
                            flags.insert(EventFlags::SWITCH_OFF);
                        }
                    }
                    EventFn::InductorCurrent => {
                        y_e[W_DIODE] += 0.5 * cfg.inductance * y_e[I_L] * y_e[I_L];
                        y_e[I_L] = 0.0;
                        topo.d3 = false;
                    }
                    EventFn::Velocity => flags.insert(EventFlags::TURNING),
                    EventFn::Position(_) => flags.insert(EventFlags::KINK),
                    _ => {}
                }
            }
            y_e[W_DIODE] += self.resolve(t_e, &mut y_e, &mut topo)?;

            let rate_after = self.net.solve(t_e, &y_e, &topo).c_var_rate;
            if rate_before > 0.0 && rate_after <= 0.0 {
                flags.insert(EventFlags::C_MAX);
            }
            if rate_before < 0.0 && rate_after >= 0.0 {
                flags.insert(EventFlags::C_MIN);
            }
            for (was, is, on, off) in [
                (before.d1, topo.d1, EventFlags::D1_ON, EventFlags::D1_OFF),
                (before.d2, topo.d2, EventFlags::D2_ON, EventFlags::D2_OFF),
                (before.d3, topo.d3, EventFlags::D3_ON, EventFlags::D3_OFF),
            ] {
                if is && !was {
                    flags.insert(on);
                }
                if was && !is {
                    flags.insert(off);
                }
            }

            let rec = self.record(t_e, &y_e, &topo, flags);
            match records.last_mut() {
                Some(last) if last.t >= t_e => {
                    let merged = last.events | flags;
                    *last = TraceRecord {
                        events: merged,
                        ..rec
                    };
                }
                _ => records.push(rec),
            }

            if t_e - t <= 1e-12 * cfg.mech.drive_period() {
                stalled += 1;
                if stalled > 1000 {
                    return Err(Error::EventBracket {
                        t: t_e,
                        what: format!("events chatter without progress ({})", topo.describe()),
                    });
                }
            } else {
                stalled = 0;
            }
            t = t_e;
            y = y_e;
            h = adv.h_next.max(step.h * 1e-3);
        }

        let end = self.record(t, &y, &topo, EventFlags::END);
        match records.last_mut() {
            Some(last) if last.t >= t => last.events.insert(EventFlags::END),
            _ => records.push(end),
        }
        Ok(Trace { meta, records })
    }

    /// Narrows `[lo, hi]` around a crossing of `f` and returns the smallest
    /// representable time at which the post-crossing condition holds.
    #[allow(clippy::too_many_arguments)]
    fn bisect(
        &self,
        step: &crate::ode::DenseStep<DIM>,
        topo: &Topology,
        f: EventFn,
        dir: Crossing,
        mut lo: f64,
        mut hi: f64,
        g_lo: f64,
    ) -> Result<f64> {
        let g = |tt: f64| {
            let yy = step.at(tt);
            let s = self.net.solve(tt, &yy, topo);
            self.eval(f, &yy, &s)
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(hi);
            }
            if dir.crossed(g_lo, g(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::EventBracket {
            t: lo,
            what: format!("{f:?} did not converge"),
        })
    }
}

/// Integrates the configured system from the rest state to `t_end`.
pub fn simulate(config: &SimConfig) -> Result<Trace> {
    config.validate()?;
    Simulator::new(config).run()
}
