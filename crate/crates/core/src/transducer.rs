//! Variable-capacitance transducer and resonator forces.

use std::f64::consts::PI;
use std::io::Read;

use crate::error::{Error, Result};

/// Capacitance as a function of proof-mass displacement.
#[derive(Debug, Clone, PartialEq)]
pub enum CapacitanceProfile {
    /// Symmetric triangular peak at `x = 0`: linear flanks down to `c_min`
    /// at `|x| = x_span`, flat beyond.
    AnalyticOverlap { c_max: f64, c_min: f64, x_span: f64 },
    /// Piecewise-linear interpolation of measured knots, clamped at both ends.
    Table(TableProfile),
}

/// Knots with strictly increasing `x` and positive capacitance.
#[derive(Debug, Clone, PartialEq)]
pub struct TableProfile {
    x: Vec<f64>,
    c: Vec<f64>,
}

impl TableProfile {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::config("capacitance table needs at least two knots"));
        }
        for (i, &(x, c)) in knots.iter().enumerate() {
            if !x.is_finite() || !c.is_finite() || c <= 0.0 {
                return Err(Error::config(format!(
                    "capacitance table knot {i} ({x}, {c}) must be finite with c > 0"
                )));
            }
        }
        if let Some(i) = knots.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::config(format!(
                "capacitance table x must be strictly increasing (knot {} at {} after {})",
                i + 1,
                knots[i + 1].0,
                knots[i].0
            )));
        }
        let (x, c) = knots.into_iter().unzip();
        Ok(Self { x, c })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.c.iter().copied())
    }

    /// Index `i` such that `x[i] <= x < x[i+1]`, or `None` outside the table.
    fn segment(&self, x: f64) -> Option<usize> {
        let last = self.x.len() - 1;
        if x < self.x[0] || x >= self.x[last] {
            return None;
        }
        Some(self.x.partition_point(|&k| k <= x) - 1)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.c[i + 1] - self.c[i]) / (self.x[i + 1] - self.x[i])
    }

    fn value(&self, x: f64) -> f64 {
        let last = self.x.len() - 1;
        if x <= self.x[0] {
            return self.c[0];
        }
        if x >= self.x[last] {
            return self.c[last];
        }
        let i = self.segment(x).expect("x inside table");
        self.c[i] + self.slope(i) * (x - self.x[i])
    }

    fn right_slope(&self, x: f64) -> f64 {
        self.segment(x).map_or(0.0, |i| self.slope(i))
    }

    fn left_slope(&self, x: f64) -> f64 {
        let last = self.x.len() - 1;
        if x <= self.x[0] || x > self.x[last] {
            return 0.0;
        }
        // first knot strictly right of x, minus one, is the segment ending at or after x
        let j = self.x.partition_point(|&k| k < x);
        self.slope(j - 1)
    }
}

impl CapacitanceProfile {
    pub fn analytic(c_max: f64, c_min: f64, x_span: f64) -> Result<Self> {
        if !(c_max > c_min) || !(c_min > 0.0) || !c_max.is_finite() {
            return Err(Error::config(format!(
                "analytic profile needs c_max > c_min > 0 (got {c_max:e}, {c_min:e})"
            )));
        }
        if !(x_span > 0.0) || !x_span.is_finite() {
            return Err(Error::config(format!(
                "x_span must be > 0 (got {x_span:e})"
            )));
        }
        Ok(Self::AnalyticOverlap {
            c_max,
            c_min,
            x_span,
        })
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        TableProfile::new(knots).map(Self::Table)
    }

    /// Reads `x_meters, capacitance_farads` rows. A non-numeric first row is
    /// taken as a header.
    pub fn table_from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut knots = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::config(format!("capacitance table: {e}")))?;
            if rec.len() != 2 {
                return Err(Error::config(format!(
                    "capacitance table row {} has {} columns, expected 2",
                    line + 1,
                    rec.len()
                )));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(c)) => knots.push((x, c)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::config(format!(
                        "capacitance table row {}: cannot parse '{}, {}'",
                        line + 1,
                        &rec[0],
                        &rec[1]
                    )))
                }
            }
        }
        Self::table(knots)
    }

    pub fn capacitance(&self, x: f64) -> f64 {
        match self {
            Self::AnalyticOverlap {
                c_max,
                c_min,
                x_span,
            } => (c_max - (c_max - c_min) * (x.abs() / x_span).min(1.0)).max(*c_min),
            Self::Table(t) => t.value(x),
        }
    }

    /// dC/dx, one-sided from the positive side at kinks.
    pub fn dcapacitance_dx(&self, x: f64) -> f64 {
        self.slope_toward(x, 1.0)
    }

    /// One-sided dC/dx in the direction of `dir` (right side for `dir >= 0`).
    pub fn slope_toward(&self, x: f64, dir: f64) -> f64 {
        match self {
            Self::AnalyticOverlap {
                c_max,
                c_min,
                x_span,
            } => {
                let k = (c_max - c_min) / x_span;
                let inside = if dir >= 0.0 {
                    x >= -x_span && x < *x_span
                } else {
                    x > -x_span && x <= *x_span
                };
                if !inside {
                    0.0
                } else if x > 0.0 || (x == 0.0 && dir >= 0.0) {
                    -k
                } else {
                    k
                }
            }
            Self::Table(t) => {
                if dir >= 0.0 {
                    t.right_slope(x)
                } else {
                    t.left_slope(x)
                }
            }
        }
    }

    /// Displacements where the slope is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::AnalyticOverlap { x_span, .. } => vec![-x_span, 0.0, *x_span],
            Self::Table(t) => t.x.clone(),
        }
    }

    /// `(min, max)` of the capacitance over all `x`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Self::AnalyticOverlap { c_max, c_min, .. } => (*c_min, *c_max),
            Self::Table(t) => {
                t.c.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                        (lo.min(c), hi.max(c))
                    })
            }
        }
    }

    /// True when the peak capacitance sits strictly inside the displacement
    /// range, so a symmetric stroke crosses it twice per mechanical period.
    pub fn has_interior_peak(&self) -> bool {
        match self {
            Self::AnalyticOverlap { .. } => true,
            Self::Table(t) => {
                let (_, hi) = self.bounds();
                let first = t.c.iter().position(|&c| c == hi).unwrap_or(0);
                first > 0 && first < t.c.len() - 1
            }
        }
    }
}

/// Force of the field on the proof mass, `0.5 V^2 dC/dx`. It always points
/// toward higher capacitance.
pub fn electrostatic_force(profile: &CapacitanceProfile, x: f64, v_var: f64) -> f64 {
    0.5 * v_var * v_var * profile.dcapacitance_dx(x)
}

/// Resonator and base excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechParams {
    pub mass: f64,
    pub stiffness: f64,
    pub damping: f64,
    pub accel_amplitude: f64,
    pub drive_freq: f64,
}

impl Default for MechParams {
    fn default() -> Self {
        Self {
            mass: 46.0e-6,
            stiffness: 152.6,
            damping: 2.19e-3,
            accel_amplitude: 10.0,
            drive_freq: 298.0,
        }
    }
}

impl MechParams {
    /// Mass, stiffness, damping and frequency must be > 0. A zero
    /// acceleration amplitude (undriven resonator) is accepted.
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mass", self.mass),
            ("stiffness", self.stiffness),
            ("damping", self.damping),
            ("drive_freq", self.drive_freq),
        ];
        for (name, v) in named {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be > 0 (got {v})")));
            }
        }
        if !(self.accel_amplitude >= 0.0) || !self.accel_amplitude.is_finite() {
            return Err(Error::domain(format!(
                "accel_amplitude must be >= 0 (got {})",
                self.accel_amplitude
            )));
        }
        Ok(())
    }

    pub fn natural_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt() / (2.0 * PI)
    }

    pub fn drive_period(&self) -> f64 {
        1.0 / self.drive_freq
    }
}

/// Inertial force of the sinusoidal base acceleration, `m a sin(2 pi f t)`.
pub fn external_force(mech: &MechParams, t: f64) -> f64 {
    mech.mass * mech.accel_amplitude * (2.0 * PI * mech.drive_freq * t).sin()
}
