//! Exhaustive search of the flyback activation window.
//!
//! The pump runs from cycle `n1` (just after a flyback) to cycle `n2` (when the
//! next flyback fires). Average power over the window is the accumulated
//! energy difference, less one switching loss, divided by the window duration.

use crate::charge_pump::{
    vstore_closed_form, Prefactor, PumpParams, PumpSeries, SeriesSource, VstoreVariant,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub pump: PumpParams,
    /// Energy lost per flyback activation (J).
    pub w_switch: f64,
    /// Duration of one pump cycle (s).
    pub t_cycle: f64,
    /// Largest cycle index considered.
    pub n_max: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            pump: PumpParams::default(),
            w_switch: 0.0,
            // two capacitance cycles per 298 Hz mechanical period
            t_cycle: 0.5 / 298.0,
            n_max: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        self.pump.validate_saturating()?;
        if !(self.w_switch >= 0.0) || !self.w_switch.is_finite() {
            return Err(Error::domain(format!(
                "w_switch must be >= 0 (got {})",
                self.w_switch
            )));
        }
        if !(self.t_cycle > 0.0) || !self.t_cycle.is_finite() {
            return Err(Error::domain(format!(
                "t_cycle must be > 0 (got {})",
                self.t_cycle
            )));
        }
        if self.n_max < 2 {
            return Err(Error::domain(format!(
                "n_max must be >= 2 (got {})",
                self.n_max
            )));
        }
        Ok(())
    }
}

/// Best window and the thresholds it maps to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowOptimum {
    pub n1: usize,
    pub n2: usize,
    pub v1: f64,
    pub v2: f64,
    pub power: f64,
}

impl WindowOptimum {
    pub fn width(&self) -> usize {
        self.n2 - self.n1
    }
}

/// One point of the power surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub n1: usize,
    pub n2: usize,
    pub power: f64,
}

/// Cumulative energies `W(1->n)` for `n = 0..=n_max` on the corrected series.
struct Harvest {
    cumulative: Vec<f64>,
}

impl Harvest {
    fn new(config: &OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let series = PumpSeries::build(
            &config.pump,
            config.n_max,
            SeriesSource::ClosedFormCorrected,
            Prefactor::Exact,
        )?;
        Ok(Self {
            cumulative: series.entries.iter().map(|r| r.w_cum).collect(),
        })
    }

    fn power(&self, config: &OptimizerConfig, n1: usize, n2: usize) -> f64 {
        let gained = self.cumulative[n2] - self.cumulative[n1];
        (gained - config.w_switch) / (config.t_cycle * (n2 - n1) as f64)
    }
}

fn check_window(config: &OptimizerConfig, n1: usize, n2: usize) -> Result<()> {
    if n1 >= n2 {
        return Err(Error::domain(format!(
            "window needs n1 < n2 (got {n1}, {n2})"
        )));
    }
    if n2 > config.n_max {
        return Err(Error::domain(format!(
            "n2 = {n2} exceeds n_max = {}",
            config.n_max
        )));
    }
    Ok(())
}

/// Average harvested power over cycles `n1..n2`, net of one switching loss.
/// Negative when the switching cost exceeds what the window collects.
pub fn average_power(config: &OptimizerConfig, n1: usize, n2: usize) -> Result<f64> {
    check_window(config, n1, n2)?;
    Ok(Harvest::new(config)?.power(config, n1, n2))
}

/// Every window `0 <= n1 < n2 <= n_max`, row-major by `n1`.
pub fn power_surface(config: &OptimizerConfig) -> Result<Vec<SurfacePoint>> {
    let harvest = Harvest::new(config)?;
    let n_max = config.n_max;
    let mut grid = Vec::with_capacity(n_max * (n_max + 1) / 2);
    for n1 in 0..n_max {
        for n2 in (n1 + 1)..=n_max {
            grid.push(SurfacePoint {
                n1,
                n2,
                power: harvest.power(config, n1, n2),
            });
        }
    }
    Ok(grid)
}

/// True when `a` should replace the incumbent `b`: higher power, then the
/// narrower window, then the earlier start.
fn better(a: &SurfacePoint, b: &SurfacePoint) -> bool {
    if a.power != b.power {
        return a.power > b.power;
    }
    let (wa, wb) = (a.n2 - a.n1, b.n2 - b.n1);
    if wa != wb {
        return wa < wb;
    }
    a.n1 < b.n1
}

/// Argmax of a surface under the deterministic tie-break.
pub fn surface_argmax(grid: &[SurfacePoint]) -> Option<SurfacePoint> {
    grid.iter()
        .copied()
        .reduce(|best, p| if better(&p, &best) { p } else { best })
}

/// Exhaustive maximization of [`average_power`].
///
/// If every window loses energy the least negative one is still returned;
/// callers should check the sign of `power`.
pub fn optimize_window(config: &OptimizerConfig) -> Result<WindowOptimum> {
    let grid = power_surface(config)?;
    let best = surface_argmax(&grid).expect("n_max >= 2 gives a non-empty grid");
    let (v1, v2) = thresholds_from_cycles(&config.pump, best.n1, best.n2)?;
    Ok(WindowOptimum {
        n1: best.n1,
        n2: best.n2,
        v1,
        v2,
        power: best.power,
    })
}

/// Switch thresholds matching a window on the corrected closed form.
pub fn thresholds_from_cycles(pump: &PumpParams, n1: usize, n2: usize) -> Result<(f64, f64)> {
    if n1 >= n2 {
        return Err(Error::domain(format!(
            "window needs n1 < n2 (got {n1}, {n2})"
        )));
    }
    let v1 = vstore_closed_form(pump, n1 as u32, VstoreVariant::Corrected)?;
    let v2 = vstore_closed_form(pump, n2 as u32, VstoreVariant::Corrected)?;
    Ok((v1, v2))
}
