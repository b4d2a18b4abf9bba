//! Cycle-indexed models of the charge pump in isolation.
//!
//! The pump ratchets charge from the reservoir `C_res` into `C_store` through
//! the variable capacitor. Everything here assumes ideal diodes and holds
//! `V_res` at the constant `v0`; reservoir droop is only visible in the
//! transient simulator.
//!
//! Per cycle, charge conservation at `C_min` gives
//!
//! ```text
//! V_n = (C_max * v0 + C_store * V_{n-1}) / (C_min + C_store)
//! ```
//!
//! which converges geometrically, with ratio `C_store / (C_store + C_min)`,
//! to the saturation voltage `v0 * C_max / C_min`.

use crate::error::{Error, Result};

/// Capacitances and initial voltage of the isolated pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpParams {
    pub c_res: f64,
    pub c_store: f64,
    pub c_max: f64,
    pub c_min: f64,
    pub v0: f64,
}

/// Ratio `C_max / C_min` of the measured transducer.
pub const DEFAULT_CAPACITANCE_RATIO: f64 = 3.5;

impl Default for PumpParams {
    fn default() -> Self {
        let c_max = 200e-12;
        Self {
            c_res: 1e-6,
            c_store: 3.3e-9,
            c_max,
            c_min: c_max / DEFAULT_CAPACITANCE_RATIO,
            v0: 5.0,
        }
    }
}

impl PumpParams {
    /// Checks `c_res > c_store > c_max > c_min >= 0` and `v0 > 0`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.c_res, self.c_store, self.c_max, self.c_min, self.v0];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("pump parameters must be finite"));
        }
        if self.c_store <= 0.0 {
            return Err(Error::domain(format!(
                "c_store must be > 0 (got {:e})",
                self.c_store
            )));
        }
        if self.c_res <= self.c_store {
            return Err(Error::domain(format!(
                "c_res ({:e}) must exceed c_store ({:e})",
                self.c_res, self.c_store
            )));
        }
        if self.c_store <= self.c_max {
            return Err(Error::domain(format!(
                "c_store ({:e}) must exceed c_max ({:e})",
                self.c_store, self.c_max
            )));
        }
        if self.c_max <= self.c_min {
            return Err(Error::domain(format!(
                "c_max ({:e}) must exceed c_min ({:e})",
                self.c_max, self.c_min
            )));
        }
        if self.c_min < 0.0 {
            return Err(Error::domain(format!(
                "c_min must be >= 0 (got {:e})",
                self.c_min
            )));
        }
        if self.v0 <= 0.0 {
            return Err(Error::domain(format!("v0 must be > 0 (got {})", self.v0)));
        }
        Ok(())
    }

    /// As [`validate`](Self::validate), additionally requiring `c_min > 0`.
    pub fn validate_saturating(&self) -> Result<()> {
        self.validate()?;
        if self.c_min <= 0.0 {
            return Err(Error::domain(
                "c_min must be > 0 here: with c_min = 0 the pump never saturates",
            ));
        }
        Ok(())
    }

    /// Per-cycle geometric ratio of the distance to saturation.
    pub fn decay_ratio(&self) -> f64 {
        self.c_store / (self.c_store + self.c_min)
    }

    /// Series combination of `C_res` and `C_store`.
    pub fn series_capacitance(&self) -> f64 {
        self.c_res * self.c_store / (self.c_res + self.c_store)
    }
}

/// Which decay base to use in the closed-form `V_store` expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VstoreVariant {
    /// Base `C_store / (C_store + C_min)`, the solution of the recurrence.
    #[default]
    Corrected,
    /// Base `C_max / (C_store + C_max)`, as the formula is usually quoted.
    AsPrinted,
}

/// Prefactor of the accumulated-energy expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prefactor {
    /// `C_res C_store / (2 (C_res + C_store))`: the series capacitor.
    #[default]
    Exact,
    /// `C_store / 2`: the infinite-reservoir limit.
    Approx,
}

impl Prefactor {
    fn value(self, p: &PumpParams) -> f64 {
        match self {
            Prefactor::Exact => 0.5 * p.series_capacitance(),
            Prefactor::Approx => 0.5 * p.c_store,
        }
    }
}

/// Where per-cycle voltages come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeriesSource {
    ClosedFormCorrected,
    #[default]
    Recurrence,
}

/// `V_store` after `n` cycles from the closed-form geometric solution.
pub fn vstore_closed_form(params: &PumpParams, n: u32, variant: VstoreVariant) -> Result<f64> {
    params.validate_saturating()?;
    let ratio = params.c_max / params.c_min;
    let base = match variant {
        VstoreVariant::Corrected => params.decay_ratio(),
        VstoreVariant::AsPrinted => params.c_max / (params.c_store + params.c_max),
    };
    let decay = base.powi(n as i32);
    Ok(params.v0 * ((1.0 - ratio) * decay + ratio))
}

/// Brute-force per-cycle charge balance, `n_max + 1` voltages starting at `v0`.
///
/// `c_min = 0` is accepted and yields the linear law `v0 (1 + n C_max / C_store)`.
pub fn vstore_recurrence(params: &PumpParams, n_max: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut v = params.v0;
    out.push(v);
    let injected = params.c_max * params.v0;
    let denom = params.c_min + params.c_store;
    for _ in 0..n_max {
        v = (injected + params.c_store * v) / denom;
        out.push(v);
    }
    Ok(out)
}

/// Energy accumulated by the pump once `C_store` has reached `v_store_n`.
pub fn pump_energy_cumulative(
    params: &PumpParams,
    v_store_n: f64,
    prefactor: Prefactor,
) -> Result<f64> {
    params.validate()?;
    if !(v_store_n >= params.v0) {
        return Err(Error::domain(format!(
            "v_store ({v_store_n}) below v0 ({}): the pump cannot run backward",
            params.v0
        )));
    }
    let dv = v_store_n - params.v0;
    Ok(prefactor.value(params) * dv * dv)
}

/// Energy added between two successive stored voltages, in product form so
/// that tiny increments near saturation keep their relative precision.
fn cycle_increment(params: &PumpParams, v_prev: f64, v_next: f64, prefactor: Prefactor) -> f64 {
    // rounding can leave a one-ulp negative step once the pump has saturated
    let step = (v_next - v_prev).max(0.0);
    prefactor.value(params) * step * (v_next + v_prev - 2.0 * params.v0)
}

fn voltages(params: &PumpParams, n_max: usize, source: SeriesSource) -> Result<Vec<f64>> {
    match source {
        SeriesSource::Recurrence => vstore_recurrence(params, n_max),
        SeriesSource::ClosedFormCorrected => (0..=n_max)
            .map(|n| vstore_closed_form(params, n as u32, VstoreVariant::Corrected))
            .collect(),
    }
}

/// Energy harvested during cycle `n` alone, `W(1->n) - W(1->n-1)`.
pub fn pump_energy_per_cycle(
    params: &PumpParams,
    n: usize,
    source: SeriesSource,
    prefactor: Prefactor,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("cycle index must be >= 1"));
    }
    let v = voltages(params, n, source)?;
    Ok(cycle_increment(params, v[n - 1], v[n], prefactor))
}

/// Small-`n` linear-regime estimate `(C_max v0^2 / 2)(C_max / C_store)(2n - 1)`.
pub fn pump_energy_linear_approx(params: &PumpParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("cycle index must be >= 1"));
    }
    let p = params;
    Ok(0.5 * p.c_max * p.v0 * p.v0 * (p.c_max / p.c_store) * (2 * n - 1) as f64)
}

/// `v0 * C_max / C_min`, the asymptote of `V_store`.
///
/// Only `c_min > 0` is required, so the degenerate cases `c_max = c_min` and
/// `v0 = 0` evaluate to `v0` and zero.
pub fn saturation_voltage(params: &PumpParams) -> Result<f64> {
    if !(params.c_min > 0.0) || !params.c_max.is_finite() || !params.v0.is_finite() {
        return Err(Error::domain(
            "saturation voltage needs a finite c_max, v0 and c_min > 0",
        ));
    }
    Ok(params.v0 * params.c_max / params.c_min)
}

/// One row of [`PumpSeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpRecord {
    pub n: usize,
    pub v_store: f64,
    pub w_cum: f64,
    pub w_cycle: f64,
}

/// Per-cycle evolution of the pump from `n = 0` to `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSeries {
    pub entries: Vec<PumpRecord>,
}

impl PumpSeries {
    pub fn build(
        params: &PumpParams,
        n_max: usize,
        source: SeriesSource,
        prefactor: Prefactor,
    ) -> Result<Self> {
        let v = voltages(params, n_max, source)?;
        let mut entries = Vec::with_capacity(v.len());
        let mut w_cum = 0.0;
        entries.push(PumpRecord {
            n: 0,
            v_store: v[0],
            w_cum: 0.0,
            w_cycle: 0.0,
        });
        for n in 1..v.len() {
            let w_cycle = cycle_increment(params, v[n - 1], v[n], prefactor);
            w_cum += w_cycle;
            entries.push(PumpRecord {
                n,
                v_store: v[n],
                w_cum,
                w_cycle,
            });
        }
        Ok(Self { entries })
    }

    /// Cycle index with the largest per-cycle harvest (first one on ties).
    pub fn peak_cycle(&self) -> Option<usize> {
        self.entries
            .iter()
            .skip(1)
            .fold(None::<&PumpRecord>, |best, r| match best {
                Some(b) if b.w_cycle >= r.w_cycle => Some(b),
                _ => Some(r),
            })
            .map(|r| r.n)
    }
}

/// Role of a corner of the QV polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QvCorner {
    /// `C = C_max`, charged to `v0` through D1.
    Start,
    /// D2 starts conducting at `V = V_store_{n-1}`.
    StoreReached,
    /// `C = C_min`, end of the transfer into `C_store`.
    TransferEnd,
    /// D1 starts conducting again at `V = v0`.
    RechargeStart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvVertex {
    pub q: f64,
    pub v: f64,
    pub corner: QvCorner,
}

/// Polygon traced by `(Q_var, V_var)` during one pump cycle, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct QvCycle {
    pub n: usize,
    pub vertices: Vec<QvVertex>,
}

impl QvCycle {
    /// Enclosed area, positive for a clockwise loop in the (V, Q) plane.
    /// This is the energy moved from the mechanical into the electrical domain.
    pub fn area(&self) -> f64 {
        let m = self.vertices.len();
        let mut twice = 0.0;
        for i in 0..m {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % m];
            twice += a.v * b.q - b.v * a.q;
        }
        -0.5 * twice
    }
}

/// Vertices of the `n`-th pump cycle: a triangle for `n = 1`, a trapezoid
/// with the extra corner at `V_store_{n-1}` afterwards.
pub fn qv_cycle(params: &PumpParams, n: usize) -> Result<QvCycle> {
    if n == 0 {
        return Err(Error::domain("cycle index must be >= 1"));
    }
    params.validate_saturating()?;
    let v = vstore_recurrence(params, n)?;
    let (v_prev, v_n) = (v[n - 1], v[n]);
    let q_top = params.c_max * params.v0;
    let q_bottom = params.c_min * v_n;

    let mut vertices = vec![QvVertex {
        q: q_top,
        v: params.v0,
        corner: QvCorner::Start,
    }];
    if n >= 2 {
        vertices.push(QvVertex {
            q: q_top,
            v: v_prev,
            corner: QvCorner::StoreReached,
        });
    }
    vertices.push(QvVertex {
        q: q_bottom,
        v: v_n,
        corner: QvCorner::TransferEnd,
    });
    vertices.push(QvVertex {
        q: q_bottom,
        v: params.v0,
        corner: QvCorner::RechargeStart,
    });
    Ok(QvCycle { n, vertices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults() -> PumpParams {
        PumpParams::default()
    }

    #[test]
    fn closed_form_starts_at_v0() {
        for variant in [VstoreVariant::Corrected, VstoreVariant::AsPrinted] {
            assert_eq!(vstore_closed_form(&defaults(), 0, variant).unwrap(), 5.0);
        }
    }

    #[test]
    fn closed_form_first_cycle() {
        // one charge-balance step by hand: (C_max v0 + C_store v0) / (C_min + C_store)
        let p = defaults();
        let expected = (200e-12 * 5.0 + 3.3e-9 * 5.0) / (200e-12 / 3.5 + 3.3e-9);
        let v1 = vstore_closed_form(&p, 1, VstoreVariant::Corrected).unwrap();
        assert_relative_eq!(v1, expected, max_relative = 1e-14);
        assert_relative_eq!(v1, 5.2128, max_relative = 1e-4);
    }

    #[test]
    fn both_variants_saturate() {
        let p = defaults();
        for variant in [VstoreVariant::Corrected, VstoreVariant::AsPrinted] {
            let v = vstore_closed_form(&p, 2000, variant).unwrap();
            assert_relative_eq!(v, 17.5, max_relative = 1e-3);
        }
    }

    #[test]
    fn variants_diverge_after_first_cycle() {
        let p = defaults();
        let a = vstore_closed_form(&p, 1, VstoreVariant::Corrected).unwrap();
        let b = vstore_closed_form(&p, 1, VstoreVariant::AsPrinted).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn closed_form_rejects_zero_c_min() {
        let p = PumpParams {
            c_min: 0.0,
            ..defaults()
        };
        assert!(matches!(
            vstore_closed_form(&p, 3, VstoreVariant::Corrected),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ordering_violations_rejected() {
        let bad = [
            PumpParams {
                c_store: 2e-6,
                ..defaults()
            },
            PumpParams {
                c_max: 4e-9,
                ..defaults()
            },
            PumpParams {
                c_min: 300e-12,
                ..defaults()
            },
            PumpParams {
                c_min: -1e-12,
                ..defaults()
            },
            PumpParams {
                v0: 0.0,
                ..defaults()
            },
            PumpParams {
                c_store: -1.0,
                ..defaults()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn recurrence_small_cases() {
        let p = defaults();
        assert_eq!(vstore_recurrence(&p, 0).unwrap(), vec![5.0]);
        let v = vstore_recurrence(&p, 1).unwrap();
        assert_eq!(v[0], 5.0);
        assert_relative_eq!(v[1], 5.2128, max_relative = 1e-4);
    }

    #[test]
    fn recurrence_linear_without_c_min() {
        let p = PumpParams {
            c_min: 0.0,
            ..defaults()
        };
        let v = vstore_recurrence(&p, 3).unwrap();
        for (got, want) in v.iter().zip([5.0, 5.303, 5.606, 5.909]) {
            assert_relative_eq!(*got, want, max_relative = 2e-4);
        }
    }

    #[test]
    fn cumulative_energy_values() {
        let p = defaults();
        assert_eq!(
            pump_energy_cumulative(&p, 5.0, Prefactor::Exact).unwrap(),
            0.0
        );
        let approx = pump_energy_cumulative(&p, 13.0, Prefactor::Approx).unwrap();
        assert_relative_eq!(approx, 3.3e-9 / 2.0 * 64.0, max_relative = 1e-14);
        assert_relative_eq!(approx, 1.056e-7, max_relative = 1e-12);
        let exact = pump_energy_cumulative(&p, 13.0, Prefactor::Exact).unwrap();
        assert_relative_eq!(exact, 1.0525e-7, max_relative = 5e-4);
        assert!(exact <= approx);
        assert!(matches!(
            pump_energy_cumulative(&p, 4.0, Prefactor::Exact),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn per_cycle_energy_edges() {
        let p = defaults();
        assert!(pump_energy_per_cycle(&p, 0, SeriesSource::Recurrence, Prefactor::Exact).is_err());
        let late =
            pump_energy_per_cycle(&p, 2000, SeriesSource::Recurrence, Prefactor::Exact).unwrap();
        assert!((0.0..1e-15).contains(&late));

        let lin = PumpParams {
            c_min: 0.0,
            ..defaults()
        };
        let w1 =
            pump_energy_per_cycle(&lin, 1, SeriesSource::Recurrence, Prefactor::Approx).unwrap();
        assert_relative_eq!(w1, 1.5152e-10, max_relative = 1e-4);
        let w1_exact =
            pump_energy_per_cycle(&lin, 1, SeriesSource::Recurrence, Prefactor::Exact).unwrap();
        assert_relative_eq!(w1_exact / w1, 1e-6 / (1e-6 + 3.3e-9), max_relative = 1e-12);
    }

    #[test]
    fn linear_approx_values() {
        let p = defaults();
        let w1 = pump_energy_linear_approx(&p, 1).unwrap();
        let w2 = pump_energy_linear_approx(&p, 2).unwrap();
        assert_relative_eq!(w1, 1.5152e-10, max_relative = 1e-4);
        assert_relative_eq!(w2 / w1, 3.0, max_relative = 1e-14);
        assert!(pump_energy_linear_approx(&p, 0).is_err());
    }

    #[test]
    fn saturation_values() {
        assert_relative_eq!(
            saturation_voltage(&defaults()).unwrap(),
            17.5,
            max_relative = 1e-14
        );
        let flat = PumpParams {
            c_min: 200e-12,
            ..defaults()
        };
        assert_eq!(saturation_voltage(&flat).unwrap(), 5.0);
        let dead = PumpParams {
            v0: 0.0,
            ..defaults()
        };
        assert_eq!(saturation_voltage(&dead).unwrap(), 0.0);
        let open = PumpParams {
            c_min: 0.0,
            ..defaults()
        };
        assert!(saturation_voltage(&open).is_err());
    }

    #[test]
    fn series_peak_is_interior() {
        let s = PumpSeries::build(&defaults(), 500, SeriesSource::Recurrence, Prefactor::Exact)
            .unwrap();
        let n_star = s.peak_cycle().unwrap();
        assert!(n_star > 1 && n_star < 500);
        assert_eq!(s.entries[0].w_cum, 0.0);
        assert_eq!(s.entries[0].v_store, 5.0);
    }

    #[test]
    fn qv_first_cycle_is_triangle() {
        let p = defaults();
        let c = qv_cycle(&p, 1).unwrap();
        assert_eq!(c.vertices.len(), 3);
        let v1 = vstore_recurrence(&p, 1).unwrap()[1];
        assert_relative_eq!(c.vertices[0].q, 200e-12 * 5.0);
        assert_relative_eq!(c.vertices[1].v, v1);
        assert_relative_eq!(c.vertices[1].q, p.c_min * v1);
        assert_relative_eq!(c.vertices[2].v, 5.0);
    }

    #[test]
    fn qv_second_cycle_has_store_corner() {
        let p = defaults();
        let c = qv_cycle(&p, 2).unwrap();
        assert_eq!(c.vertices.len(), 4);
        let v = vstore_recurrence(&p, 1).unwrap();
        assert_eq!(c.vertices[1].corner, QvCorner::StoreReached);
        assert_relative_eq!(c.vertices[1].v, v[1]);
        assert_relative_eq!(c.vertices[1].q, p.c_max * p.v0);
    }

    #[test]
    fn qv_rejects_cycle_zero_and_degenerates_at_saturation() {
        let p = defaults();
        assert!(qv_cycle(&p, 0).is_err());
        let c = qv_cycle(&p, 2000).unwrap();
        assert!(c.area().abs() < 1e-15);
    }
}
