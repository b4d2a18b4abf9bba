//! Post-processing of a finished trace: energy balance, amplitude coupling
//! around flybacks and per-period harvest.

use std::fmt;

use super::trace::{format_float, EventFlags, Trace, TraceRecord};

/// Energy balance over a whole run. Stored-energy terms are changes between
/// the first and last record; the dissipation and work terms are cumulative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit {
    pub w_mech_in: f64,
    pub w_kinetic: f64,
    pub w_spring: f64,
    pub w_damp: f64,
    pub w_elec_stored: f64,
    pub w_diode: f64,
    pub w_load: f64,
    pub w_converted: f64,
    /// Flyback count times the configured lumped switching energy. Reported
    /// only; the simulated switch itself is lossless.
    pub w_switch_est: f64,
    pub residual: f64,
    /// `residual / max(w_mech_in, |w_elec_stored|)`, zero for a dead system.
    pub relative: f64,
}

/// Acceptance bound on [`EnergyAudit::relative`].
pub const AUDIT_TOLERANCE: f64 = 1e-3;

impl EnergyAudit {
    pub fn is_valid(&self) -> bool {
        self.relative <= AUDIT_TOLERANCE
    }
}

impl fmt::Display for EnergyAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("w_mech_in", self.w_mech_in),
            ("w_kinetic", self.w_kinetic),
            ("w_spring", self.w_spring),
            ("w_damp", self.w_damp),
            ("w_elec_stored", self.w_elec_stored),
            ("w_diode", self.w_diode),
            ("w_load", self.w_load),
            ("w_converted", self.w_converted),
            ("w_switch_est", self.w_switch_est),
            ("residual", self.residual),
            ("relative_residual", self.relative),
        ];
        for (k, v) in rows {
            writeln!(f, "{k} = {}", format_float(v))?;
        }
        writeln!(f, "valid = {}", self.is_valid())
    }
}

pub fn energy_audit(trace: &Trace) -> EnergyAudit {
    let (a, b) = (trace.first(), trace.last());
    let w_kinetic = b.w_kinetic - a.w_kinetic;
    let w_spring = b.w_spring - a.w_spring;
    let w_elec_stored = b.w_elec_stored - a.w_elec_stored;
    let w_mech_in = b.w_mech_in - a.w_mech_in;
    let w_damp = b.w_damp - a.w_damp;
    let w_diode = b.w_diode - a.w_diode;
    let w_load = b.w_load - a.w_load;
    let residual =
        (w_mech_in - (w_kinetic + w_spring + w_elec_stored) - w_damp - w_diode - w_load).abs();
    let scale = w_mech_in.max(w_elec_stored.abs());
    let relative = if scale > 0.0 {
        residual / scale
    } else if residual == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    EnergyAudit {
        w_mech_in,
        w_kinetic,
        w_spring,
        w_damp,
        w_elec_stored,
        w_diode,
        w_load,
        w_converted: b.w_converted - a.w_converted,
        w_switch_est: trace.flybacks().len() as f64 * trace.meta.switching_energy,
        residual,
        relative,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeRecord {
    /// Zero-based index among all completed flybacks.
    pub flyback_index: usize,
    pub amp_before: f64,
    pub amp_after: f64,
}

/// Number of drive periods inspected on each side of a flyback.
pub const COUPLING_WINDOW_PERIODS: f64 = 5.0;

/// Peak `|x|` over the five drive periods before each switch-on and after the
/// matching switch-off. Flybacks whose windows fall outside the trace are
/// skipped.
pub fn amplitude_coupling_report(trace: &Trace) -> Vec<AmplitudeRecord> {
    let span = COUPLING_WINDOW_PERIODS * trace.meta.drive_period;
    let end = trace.last().t;
    trace
        .flybacks()
        .into_iter()
        .enumerate()
        .filter(|(_, (on, off))| on - span >= 0.0 && off + span <= end)
        .filter_map(|(i, (on, off))| {
            Some(AmplitudeRecord {
                flyback_index: i,
                amp_before: trace.peak_displacement(on - span, on)?,
                amp_after: trace.peak_displacement(off, off + span)?,
            })
        })
        .collect()
}

/// Spearman rank correlation, ties given their average rank. `None` for
/// fewer than three pairs or a constant series.
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in &idx[i..=j] {
            out[*k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Rank correlation between the mean `V_store` and peak `|x|` of each whole
/// drive period, counted from the first switch-on so that the start-up
/// build-up of both signals does not dominate.
pub fn voltage_amplitude_correlation(trace: &Trace) -> Option<f64> {
    let start = trace.with_event(EventFlags::SWITCH_ON).next()?.t;
    let period = trace.meta.drive_period;
    let end = trace.last().t;
    let (mut v, mut x) = (Vec::new(), Vec::new());
    let mut k = 0.0;
    while start + (k + 1.0) * period <= end {
        let (a, b) = (start + k * period, start + (k + 1.0) * period);
        v.push(trace.mean_v_store(a, b)?);
        x.push(trace.peak_displacement(a, b)?);
        k += 1.0;
    }
    rank_correlation(&v, &x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodHarvest {
    pub index: usize,
    pub t_start: f64,
    /// Mechanical energy converted to electrical during the period (J).
    pub energy: f64,
    pub peak_displacement: f64,
}

/// Converted energy per whole drive period.
pub fn harvest_per_period(trace: &Trace) -> Vec<PeriodHarvest> {
    let period = trace.meta.drive_period;
    let end = trace.last().t;
    let mut out = Vec::new();
    let mut k = 0usize;
    while (k + 1) as f64 * period <= end {
        let (a, b) = (k as f64 * period, (k + 1) as f64 * period);
        let energy = converted_at(&trace.records, b) - converted_at(&trace.records, a);
        let peak = trace.peak_displacement(a, b).unwrap_or(0.0);
        out.push(PeriodHarvest {
            index: k,
            t_start: a,
            energy,
            peak_displacement: peak,
        });
        k += 1;
    }
    out
}

fn converted_at(rows: &[TraceRecord], t: f64) -> f64 {
    let i = rows.partition_point(|r| r.t < t);
    if i == 0 {
        return rows[0].w_converted;
    }
    if i == rows.len() {
        return rows[i - 1].w_converted;
    }
    let (r0, r1) = (&rows[i - 1], &rows[i]);
    let s = (t - r0.t) / (r1.t - r0.t);
    r0.w_converted + s * (r1.w_converted - r0.w_converted)
}

/// `V_store` at each capacitance minimum, i.e. the end of each pump transfer.
pub fn cycle_peaks(trace: &Trace) -> Vec<f64> {
    trace
        .with_event(EventFlags::C_MIN)
        .map(|r| r.v_store)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_basics() {
        assert_eq!(
            rank_correlation(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]),
            Some(1.0)
        );
        assert_eq!(
            rank_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]),
            Some(-1.0)
        );
        assert_eq!(rank_correlation(&[1.0, 1.0, 1.0], &[3.0, 2.0, 1.0]), None);
        assert_eq!(rank_correlation(&[1.0, 2.0], &[3.0, 2.0]), None);
        // ties get the average rank: ranks (1.5, 1.5, 3) vs (1, 2, 3)
        let r = rank_correlation(&[5.0, 5.0, 9.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.75_f64.sqrt()).abs() < 1e-12, "{r}");
    }
}
