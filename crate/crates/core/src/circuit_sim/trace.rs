use std::fmt;
use std::io::{self, Write};

use super::SimMode;

/// Bit set of the discrete events that happened at one trace instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct EventFlags(u16);

impl EventFlags {
    pub const NONE: Self = Self(0);
    pub const INIT: Self = Self(1 << 0);
    pub const D1_ON: Self = Self(1 << 1);
    pub const D1_OFF: Self = Self(1 << 2);
    pub const D2_ON: Self = Self(1 << 3);
    pub const D2_OFF: Self = Self(1 << 4);
    pub const D3_ON: Self = Self(1 << 5);
    pub const D3_OFF: Self = Self(1 << 6);
    pub const SWITCH_ON: Self = Self(1 << 7);
    pub const SWITCH_OFF: Self = Self(1 << 8);
    pub const C_MAX: Self = Self(1 << 9);
    pub const C_MIN: Self = Self(1 << 10);
    pub const TURNING: Self = Self(1 << 11);
    pub const KINK: Self = Self(1 << 12);
    pub const END: Self = Self(1 << 13);

    const NAMES: [(Self, &'static str); 14] = [
        (Self::INIT, "init"),
        (Self::D1_ON, "d1_on"),
        (Self::D1_OFF, "d1_off"),
        (Self::D2_ON, "d2_on"),
        (Self::D2_OFF, "d2_off"),
        (Self::D3_ON, "d3_on"),
        (Self::D3_OFF, "d3_off"),
        (Self::SWITCH_ON, "switch_on"),
        (Self::SWITCH_OFF, "switch_off"),
        (Self::C_MAX, "c_max"),
        (Self::C_MIN, "c_min"),
        (Self::TURNING, "turning"),
        (Self::KINK, "kink"),
        (Self::END, "end"),
    ];

    pub fn contains(self, other: Self) -> bool {
        other.0 != 0 && self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn insert(&mut self, other: Self) {
        self.0 |= other.0;
    }
}

impl std::ops::BitOr for EventFlags {
    type Output = Self;
    fn bitor(self, rhs: Self) -> Self {
        Self(self.0 | rhs.0)
    }
}

impl fmt::Display for EventFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("sample");
        }
        let mut first = true;
        for (flag, name) in Self::NAMES {
            if self.contains(flag) {
                if !first {
                    f.write_str("+")?;
                }
                f.write_str(name)?;
                first = false;
            }
        }
        Ok(())
    }
}

/// One time-stamped snapshot of the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub q_var: f64,
    pub c_var: f64,
    pub v_var: f64,
    pub v_store: f64,
    pub v_res: f64,
    pub i_l: f64,
    pub switch_on: bool,
    pub d1_on: bool,
    pub d2_on: bool,
    pub d3_on: bool,
    pub f_elec: f64,
    pub events: EventFlags,
    pub w_mech_in: f64,
    pub w_kinetic: f64,
    pub w_spring: f64,
    pub w_elec_stored: f64,
    pub w_damp: f64,
    pub w_diode: f64,
    pub w_load: f64,
    pub w_converted: f64,
}

/// Run-level facts needed to interpret a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMeta {
    pub mode: SimMode,
    pub drive_period: f64,
    pub v1: f64,
    pub v2: f64,
    /// Lumped loss charged per flyback in the audit's switching estimate.
    pub switching_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
}

/// Column order of [`Trace::write_csv`].
pub const TRACE_COLUMNS: [&str; 23] = [
    "t",
    "x",
    "v",
    "q_var",
    "c_var",
    "v_var",
    "v_store",
    "v_res",
    "i_l",
    "switch",
    "f_elec",
    "event_type",
    "w_mech_in",
    "w_kinetic",
    "w_spring",
    "w_elec_stored",
    "w_damp",
    "w_diode",
    "w_load",
    "w_converted",
    "d1_on",
    "d2_on",
    "d3_on",
];

/// Scientific notation with 9 significant digits, independent of locale.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        // normalize -0
        return format!("{:.8e}", 0.0);
    }
    format!("{v:.8e}")
}

impl Trace {
    pub fn first(&self) -> &TraceRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace is never empty")
    }

    pub fn with_event(&self, flag: EventFlags) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.events.contains(flag))
    }

    /// `(t_switch_on, t_switch_off)` of each completed flyback.
    pub fn flybacks(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut on_at = None;
        for r in &self.records {
            if r.events.contains(EventFlags::SWITCH_ON) {
                on_at = Some(r.t);
            }
            if r.events.contains(EventFlags::SWITCH_OFF) {
                if let Some(t_on) = on_at.take() {
                    out.push((t_on, r.t));
                }
            }
        }
        out
    }

    /// Largest `|x|` over records with `t` in `[from, to]`.
    pub fn peak_displacement(&self, from: f64, to: f64) -> Option<f64> {
        let start = self.records.partition_point(|r| r.t < from);
        self.records[start..]
            .iter()
            .take_while(|r| r.t <= to)
            .map(|r| r.x.abs())
            .reduce(f64::max)
    }

    /// Time-weighted mean of `V_store` over `[from, to]` (trapezoidal).
    pub fn mean_v_store(&self, from: f64, to: f64) -> Option<f64> {
        let start = self.records.partition_point(|r| r.t < from);
        let rows: Vec<_> = self.records[start..]
            .iter()
            .take_while(|r| r.t <= to)
            .collect();
        if rows.len() < 2 {
            return rows.first().map(|r| r.v_store);
        }
        let mut area = 0.0;
        for w in rows.windows(2) {
            area += 0.5 * (w[0].v_store + w[1].v_store) * (w[1].t - w[0].t);
        }
        Some(area / (rows.last().unwrap().t - rows[0].t))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
        let b = |v: bool| if v { "1" } else { "0" };
        for r in &self.records {
            let nums = [
                r.t, r.x, r.v, r.q_var, r.c_var, r.v_var, r.v_store, r.v_res, r.i_l,
            ];
            for n in nums {
                write!(out, "{},", format_float(n))?;
            }
            write!(
                out,
                "{},{},{},",
                b(r.switch_on),
                format_float(r.f_elec),
                r.events
            )?;
            let energies = [
                r.w_mech_in,
                r.w_kinetic,
                r.w_spring,
                r.w_elec_stored,
                r.w_damp,
                r.w_diode,
                r.w_load,
                r.w_converted,
            ];
            for n in energies {
                write!(out, "{},", format_float(n))?;
            }
            writeln!(out, "{},{},{}", b(r.d1_on), b(r.d2_on), b(r.d3_on))?;
        }
        Ok(())
    }
}
