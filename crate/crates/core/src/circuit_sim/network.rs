//! Branch equations of the harvester for a fixed discrete topology.
//!
//! Nodes: `res` (C_res), `var` (C_var), `store` (C_store), plus the switch
//! node X between the switch, L and D3. D1 runs res -> var, D2 var -> store,
//! the switch connects store to X, L runs X -> res and D3 ground -> X.
//!
//! An ideal conducting diode with zero on-resistance merges its two nodes
//! into one equal-voltage group. Group voltage follows from the group charge
//! and capacitance, and each member's charge rate from `d(C_k V)/dt`.

use std::f64::consts::PI;

use super::{DiodeModel, SimConfig, SimMode};
use crate::transducer::external_force;

pub(crate) const X: usize = 0;
pub(crate) const V: usize = 1;
pub(crate) const Q_RES: usize = 2;
pub(crate) const Q_VAR: usize = 3;
pub(crate) const Q_STORE: usize = 4;
pub(crate) const I_L: usize = 5;
pub(crate) const W_IN: usize = 6;
pub(crate) const W_DAMP: usize = 7;
pub(crate) const W_DIODE: usize = 8;
pub(crate) const W_CONV: usize = 9;
pub(crate) const W_LOAD: usize = 10;
pub(crate) const DIM: usize = 11;

pub(crate) type StateVec = [f64; DIM];

/// Conduction state of the switching elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Topology {
    pub d1: bool,
    pub d2: bool,
    pub d3: bool,
    pub switch_on: bool,
}

impl Topology {
    pub fn describe(&self) -> String {
        let flag = |on: bool| if on { "on" } else { "off" };
        format!(
            "D1 {}, D2 {}, D3 {}, switch {}",
            flag(self.d1),
            flag(self.d2),
            flag(self.d3),
            flag(self.switch_on)
        )
    }
}

/// Everything derived from one state evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Solution {
    pub c_var: f64,
    pub c_var_rate: f64,
    pub v_res: f64,
    pub v_var: f64,
    pub v_store: f64,
    pub i_d1: f64,
    pub i_d2: f64,
    pub f_elec: f64,
    pub dy: StateVec,
}

pub(crate) struct Network<'a> {
    cfg: &'a SimConfig,
}

/// Above this many thermal voltages the exponential is continued linearly.
const EXP_LIMIT: f64 = 40.0;

impl<'a> Network<'a> {
    pub fn new(cfg: &'a SimConfig) -> Self {
        Self { cfg }
    }

    fn merges(&self) -> bool {
        matches!(self.cfg.diode, DiodeModel::IdealEvent { r_on } if r_on == 0.0)
    }

    /// `(C_var, dC_var/dt, dC_var/dx)`.
    pub fn var_capacitance(&self, t: f64, y: &StateVec) -> (f64, f64, f64) {
        match self.cfg.mode {
            SimMode::Coupled => {
                let profile = &self.cfg.profile;
                let slope = if y[V] != 0.0 {
                    profile.slope_toward(y[X], y[V])
                } else {
                    // at rest the side is set by where the other forces push
                    let m = &self.cfg.mech;
                    let push = external_force(m, t) - m.stiffness * y[X];
                    if push != 0.0 {
                        profile.slope_toward(y[X], push)
                    } else {
                        0.5 * (profile.slope_toward(y[X], 1.0) + profile.slope_toward(y[X], -1.0))
                    }
                };
                (profile.capacitance(y[X]), slope * y[V], slope)
            }
            SimMode::PrescribedCapacitance => {
                let (c_max, c_min) = (self.cfg.pump.c_max, self.cfg.pump.c_min);
                let w = 2.0 * PI * self.cfg.mech.drive_freq;
                let mid = 0.5 * (c_max + c_min);
                let amp = 0.5 * (c_max - c_min);
                (mid + amp * (w * t).cos(), -amp * w * (w * t).sin(), 0.0)
            }
        }
    }

    /// Current and dissipated power of a D1/D2 branch that is not merged.
    fn branch_diode(&self, on: bool, vf: f64) -> (f64, f64) {
        match self.cfg.diode {
            DiodeModel::IdealEvent { r_on } => {
                if on && r_on > 0.0 {
                    let i = vf / r_on;
                    (i, i * i * r_on)
                } else {
                    (0.0, 0.0)
                }
            }
            DiodeModel::Exponential {
                i_sat,
                v_thermal,
                ideality,
            } => {
                let i = shockley(vf, i_sat, ideality * v_thermal);
                (i, vf * i)
            }
        }
    }

    /// Drop across a conducting D3 carrying `i` (ground -> X is forward).
    fn d3_drop(&self, i: f64) -> f64 {
        match self.cfg.diode {
            DiodeModel::IdealEvent { r_on } => i * r_on,
            DiodeModel::Exponential {
                i_sat,
                v_thermal,
                ideality,
            } => ideality * v_thermal * (i.max(0.0) / i_sat).ln_1p(),
        }
    }

    pub fn solve(&self, t: f64, y: &StateVec, topo: &Topology) -> Solution {
        let cfg = self.cfg;
        let (c_var, c_var_rate, slope) = self.var_capacitance(t, y);
        let caps = [cfg.pump.c_res, c_var, cfg.pump.c_store];
        let rates = [0.0, c_var_rate, 0.0];
        let q = [y[Q_RES], y[Q_VAR], y[Q_STORE]];

        let merged1 = self.merges() && topo.d1;
        let merged2 = self.merges() && topo.d2;
        let g_var = if merged1 { 0 } else { 1 };
        let group = [0, g_var, if merged2 { g_var } else { 2 }];

        let mut gq = [0.0; 3];
        let mut gc = [0.0; 3];
        let mut grate = [0.0; 3];
        for k in 0..3 {
            gq[group[k]] += q[k];
            gc[group[k]] += caps[k];
            grate[group[k]] += rates[k];
        }
        let gv = |g: usize| if gc[g] > 0.0 { gq[g] / gc[g] } else { 0.0 };
        let volt = [gv(group[0]), gv(group[1]), gv(group[2])];

        let mut ext = [0.0; 3];
        let i_l = y[I_L];
        let conducting_l = topo.switch_on || topo.d3;
        if conducting_l {
            ext[0] += i_l;
        }
        if topo.switch_on {
            ext[2] -= i_l;
        }
        let mut p_load = 0.0;
        if let Some(r) = cfg.load_resistance {
            let i = volt[0] / r;
            ext[0] -= i;
            p_load = volt[0] * i;
        }

        let mut p_diode = 0.0;
        let mut i_d1 = 0.0;
        let mut i_d2 = 0.0;
        if !merged1 {
            let (i, p) = self.branch_diode(topo.d1, volt[0] - volt[1]);
            ext[0] -= i;
            ext[1] += i;
            i_d1 = i;
            p_diode += p;
        }
        if !merged2 {
            let (i, p) = self.branch_diode(topo.d2, volt[1] - volt[2]);
            ext[1] -= i;
            ext[2] += i;
            i_d2 = i;
            p_diode += p;
        }

        let mut gin = [0.0; 3];
        for k in 0..3 {
            gin[group[k]] += ext[k];
        }
        let mut dq = [0.0; 3];
        for k in 0..3 {
            let g = group[k];
            let dv = (gin[g] - volt[k] * grate[g]) / gc[g];
            dq[k] = caps[k] * dv + rates[k] * volt[k];
        }
        if merged1 {
            i_d1 = ext[0] - dq[0];
        }
        if merged2 {
            i_d2 = dq[2] - ext[2];
        }

        let di_l = if topo.switch_on {
            (volt[2] - volt[0]) / cfg.inductance
        } else if topo.d3 {
            let drop = self.d3_drop(i_l);
            p_diode += drop * i_l;
            (-drop - volt[0]) / cfg.inductance
        } else {
            0.0
        };

        let v_var = volt[1];
        let p_conv = -0.5 * v_var * v_var * c_var_rate;
        let mut dy = [0.0; DIM];
        let mut f_elec = 0.0;
        match cfg.mode {
            SimMode::Coupled => {
                let m = &cfg.mech;
                let f_ext = external_force(m, t);
                f_elec = 0.5 * v_var * v_var * slope;
                dy[X] = y[V];
                dy[V] = (f_ext - m.stiffness * y[X] - m.damping * y[V] + f_elec) / m.mass;
                dy[W_IN] = f_ext * y[V];
                dy[W_DAMP] = m.damping * y[V] * y[V];
            }
            SimMode::PrescribedCapacitance => {
                dy[W_IN] = p_conv;
            }
        }
        dy[Q_RES] = dq[0];
        dy[Q_VAR] = dq[1];
        dy[Q_STORE] = dq[2];
        dy[I_L] = di_l;
        dy[W_DIODE] = p_diode;
        dy[W_CONV] = p_conv;
        dy[W_LOAD] = p_load;

        Solution {
            c_var,
            c_var_rate,
            v_res: volt[0],
            v_var,
            v_store: volt[2],
            i_d1,
            i_d2,
            f_elec,
            dy,
        }
    }

    /// Equalizes the charges inside merged groups, returning the energy lost
    /// by doing so (zero when the members already sat at one voltage).
    pub fn share_charge(&self, t: f64, y: &mut StateVec, topo: &Topology) -> f64 {
        if !self.merges() || !(topo.d1 || topo.d2) {
            return 0.0;
        }
        let (c_var, _, _) = self.var_capacitance(t, y);
        let caps = [self.cfg.pump.c_res, c_var, self.cfg.pump.c_store];
        let idx = [Q_RES, Q_VAR, Q_STORE];
        let members: Vec<usize> = match (topo.d1, topo.d2) {
            (true, true) => vec![0, 1, 2],
            (true, false) => vec![0, 1],
            (false, true) => vec![1, 2],
            (false, false) => unreachable!(),
        };
        let before: f64 = members
            .iter()
            .map(|&k| y[idx[k]].powi(2) / (2.0 * caps[k]))
            .sum();
        let q: f64 = members.iter().map(|&k| y[idx[k]]).sum();
        let c: f64 = members.iter().map(|&k| caps[k]).sum();
        let v = q / c;
        for &k in &members {
            y[idx[k]] = caps[k] * v;
        }
        let after: f64 = members
            .iter()
            .map(|&k| y[idx[k]].powi(2) / (2.0 * caps[k]))
            .sum();
        before - after
    }

    /// Electric field energy in the three capacitors and the inductor.
    pub fn field_energy(&self, t: f64, y: &StateVec) -> f64 {
        let (c_var, _, _) = self.var_capacitance(t, y);
        let p = &self.cfg.pump;
        y[Q_RES].powi(2) / (2.0 * p.c_res)
            + y[Q_VAR].powi(2) / (2.0 * c_var)
            + y[Q_STORE].powi(2) / (2.0 * p.c_store)
            + 0.5 * self.cfg.inductance * y[I_L].powi(2)
    }
}

/// Shockley characteristic, continued linearly far in forward bias so the
/// stiff trial stages of a rejected step cannot overflow.
pub(crate) fn shockley(vf: f64, i_sat: f64, n_vt: f64) -> f64 {
    let u = vf / n_vt;
    if u > EXP_LIMIT {
        let e = EXP_LIMIT.exp();
        i_sat * (e * (1.0 + (u - EXP_LIMIT)) - 1.0)
    } else {
        i_sat * u.exp_m1()
    }
}
