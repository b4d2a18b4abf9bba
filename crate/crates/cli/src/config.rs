//! Flat `key = value` run configuration.
//!
//! One assignment per line, SI units, `#` starts a comment. Precedence is
//! built-in defaults, then the file, then `--set` overrides. The resolved
//! configuration can be written back with [`RunConfig::to_text`] and reloads
//! to the same values.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use evh_core::charge_pump::PumpParams;
use evh_core::circuit_sim::{DiodeModel, IntegratorSettings, SimConfig, SimMode, DEFAULT_X_SPAN};
use evh_core::optimizer::OptimizerConfig;
use evh_core::transducer::{CapacitanceProfile, MechParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    /// Triangular peak built from `c_max`, `c_min` and `x_span`.
    Analytic,
    /// Two-column CSV of `(x, C)` knots.
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiodeKind {
    Ideal,
    Exponential,
}

/// Every tunable of every command, defaults from the measured prototype.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pump: PumpParams,
    pub mech: MechParams,
    pub profile: ProfileSpec,
    pub x_span: f64,
    pub w_switch: f64,
    /// `None` derives the pump cycle from the drive frequency and profile.
    pub t_cycle: Option<f64>,
    pub n_max: usize,
    pub inductance: f64,
    pub diode: DiodeKind,
    pub r_on: f64,
    pub i_sat: f64,
    pub v_thermal: f64,
    pub ideality: f64,
    pub v1: f64,
    pub v2: f64,
    pub mode: SimMode,
    pub integrator: IntegratorSettings,
    pub t_end: f64,
    pub load_resistance: Option<f64>,
    pub switching_energy: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        let opt = OptimizerConfig::default();
        Self {
            pump: sim.pump,
            mech: sim.mech,
            profile: ProfileSpec::Analytic,
            x_span: DEFAULT_X_SPAN,
            w_switch: opt.w_switch,
            t_cycle: None,
            n_max: opt.n_max,
            inductance: sim.inductance,
            diode: DiodeKind::Ideal,
            r_on: 0.0,
            i_sat: 1e-12,
            v_thermal: 0.02585,
            ideality: 1.0,
            v1: sim.thresholds.0,
            v2: sim.thresholds.1,
            mode: sim.mode,
            integrator: sim.integrator,
            t_end: sim.t_end,
            load_resistance: sim.load_resistance,
            switching_energy: sim.switching_energy,
        }
    }
}

/// Recognized keys, in the order they are echoed.
pub const KEYS: [&str; 31] = [
    "c_res",
    "c_store",
    "c_max",
    "c_min",
    "v0",
    "mass",
    "stiffness",
    "damping",
    "accel_amplitude",
    "drive_freq",
    "profile",
    "x_span",
    "w_switch",
    "t_cycle",
    "n_max",
    "inductance",
    "diode",
    "r_on",
    "i_sat",
    "v_thermal",
    "ideality",
    "v1",
    "v2",
    "mode",
    "rel_tol",
    "abs_tol",
    "max_step",
    "t_end",
    "load_resistance",
    "switching_energy",
    "profile_table",
];

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("{key}: '{value}' is not a number"))
}

impl RunConfig {
    /// Applies one assignment. `base` resolves relative table paths.
    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        let num = || parse_f64(key, value);
        match key {
            "c_res" => self.pump.c_res = num()?,
            "c_store" => self.pump.c_store = num()?,
            "c_max" => self.pump.c_max = num()?,
            "c_min" => self.pump.c_min = num()?,
            "v0" => self.pump.v0 = num()?,
            "mass" => self.mech.mass = num()?,
            "stiffness" => self.mech.stiffness = num()?,
            "damping" => self.mech.damping = num()?,
            "accel_amplitude" => self.mech.accel_amplitude = num()?,
            "drive_freq" => self.mech.drive_freq = num()?,
            "profile" => {
                self.profile = match value {
                    "analytic" => ProfileSpec::Analytic,
                    "table" => match &self.profile {
                        ProfileSpec::Table(p) => ProfileSpec::Table(p.clone()),
                        ProfileSpec::Analytic => ProfileSpec::Table(PathBuf::new()),
                    },
                    _ => {
                        return Err(format!(
                            "profile: expected 'analytic' or 'table', got '{value}'"
                        ))
                    }
                }
            }
            "profile_table" => self.profile = ProfileSpec::Table(base.join(value)),
            "x_span" => self.x_span = num()?,
            "w_switch" => self.w_switch = num()?,
            "t_cycle" => self.t_cycle = if value == "auto" { None } else { Some(num()?) },
            "n_max" => {
                self.n_max = value
                    .parse()
                    .map_err(|_| format!("n_max: '{value}' is not a non-negative integer"))?
            }
            "inductance" => self.inductance = num()?,
            "diode" => {
                self.diode = match value {
                    "ideal" => DiodeKind::Ideal,
                    "exponential" => DiodeKind::Exponential,
                    _ => {
                        return Err(format!(
                            "diode: expected 'ideal' or 'exponential', got '{value}'"
                        ))
                    }
                }
            }
            "r_on" => self.r_on = num()?,
            "i_sat" => self.i_sat = num()?,
            "v_thermal" => self.v_thermal = num()?,
            "ideality" => self.ideality = num()?,
            "v1" => self.v1 = num()?,
            "v2" => self.v2 = num()?,
            "mode" => {
                self.mode = match value {
                    "coupled" => SimMode::Coupled,
                    "prescribed" => SimMode::PrescribedCapacitance,
                    _ => {
                        return Err(format!(
                            "mode: expected 'coupled' or 'prescribed', got '{value}'"
                        ))
                    }
                }
            }
            "rel_tol" => self.integrator.rel_tol = num()?,
            "abs_tol" => self.integrator.abs_tol = num()?,
            "max_step" => self.integrator.max_step = num()?,
            "t_end" => self.t_end = num()?,
            "load_resistance" => {
                self.load_resistance = if value == "none" { None } else { Some(num()?) }
            }
            "switching_energy" => self.switching_energy = num()?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults. Relative table paths are
    /// taken from `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_assignment(line).ok_or_else(|| {
                CliError::parse(i + 1, format!("expected 'key = value', got '{line}'"))
            })?;
            cfg.set(key, value, base)
                .map_err(|m| CliError::parse(i + 1, m))?;
        }
        Ok(cfg)
    }

    /// Defaults, then `path` if given, then `overrides` (`key=value`), then
    /// validation.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                let base = p.parent().unwrap_or(Path::new("."));
                Self::parse(&text, base)?
            }
            None => Self::default(),
        };
        for o in overrides {
            let (key, value) = split_assignment(o)
                .ok_or_else(|| CliError::Override(format!("expected key=value, got '{o}'")))?;
            cfg.set(key, value, Path::new("."))
                .map_err(CliError::Override)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not depend on which command runs. The
    /// analytic profile and the optimizer additionally need `c_min > 0`, which
    /// their commands check.
    pub fn validate(&self) -> Result<(), CliError> {
        self.pump.validate()?;
        self.mech.validate()?;
        if !(self.x_span > 0.0) || !self.x_span.is_finite() {
            return Err(CliError::invalid("x_span", "must be > 0"));
        }
        if let ProfileSpec::Table(p) = &self.profile {
            if p.as_os_str().is_empty() {
                return Err(CliError::invalid(
                    "profile_table",
                    "required when profile = table",
                ));
            }
        }
        if !(self.w_switch >= 0.0) || !self.w_switch.is_finite() {
            return Err(CliError::invalid("w_switch", "must be >= 0"));
        }
        if let Some(t) = self.t_cycle {
            if !(t > 0.0) || !t.is_finite() {
                return Err(CliError::invalid("t_cycle", "must be > 0 or 'auto'"));
            }
        }
        if self.n_max < 2 {
            return Err(CliError::invalid("n_max", "must be >= 2"));
        }
        // remaining simulator fields are checked by the simulator's own rules
        let mut sim = self.sim_config_with(CapacitanceProfile::AnalyticOverlap {
            c_max: self.pump.c_max,
            c_min: self.pump.c_min,
            x_span: self.x_span,
        });
        sim.mode = SimMode::Coupled;
        sim.validate()?;
        Ok(())
    }

    pub fn diode_model(&self) -> DiodeModel {
        match self.diode {
            DiodeKind::Ideal => DiodeModel::IdealEvent { r_on: self.r_on },
            DiodeKind::Exponential => DiodeModel::Exponential {
                i_sat: self.i_sat,
                v_thermal: self.v_thermal,
                ideality: self.ideality,
            },
        }
    }

    pub fn capacitance_profile(&self) -> Result<CapacitanceProfile, CliError> {
        match &self.profile {
            ProfileSpec::Analytic => Ok(CapacitanceProfile::analytic(
                self.pump.c_max,
                self.pump.c_min,
                self.x_span,
            )?),
            ProfileSpec::Table(p) => {
                let f = fs::File::open(p).map_err(|e| CliError::Io {
                    path: p.clone(),
                    source: e,
                })?;
                Ok(CapacitanceProfile::table_from_csv(f)?)
            }
        }
    }

    fn sim_config_with(&self, profile: CapacitanceProfile) -> SimConfig {
        SimConfig {
            pump: self.pump,
            mech: self.mech,
            profile,
            inductance: self.inductance,
            diode: self.diode_model(),
            thresholds: (self.v1, self.v2),
            mode: self.mode,
            integrator: self.integrator,
            t_end: self.t_end,
            load_resistance: self.load_resistance,
            switching_energy: self.switching_energy,
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let profile = match self.mode {
            SimMode::Coupled => self.capacitance_profile()?,
            // the sweep uses the pump's c_max/c_min; the profile is unused
            SimMode::PrescribedCapacitance => CapacitanceProfile::AnalyticOverlap {
                c_max: self.pump.c_max,
                c_min: self.pump.c_min,
                x_span: self.x_span,
            },
        };
        Ok(self.sim_config_with(profile))
    }

    /// Pump cycle duration: explicit, or half the drive period for a profile
    /// peaking inside the stroke (two capacitance cycles per oscillation),
    /// else the full period.
    pub fn resolved_t_cycle(&self) -> f64 {
        if let Some(t) = self.t_cycle {
            return t;
        }
        let peaked = match self.profile {
            ProfileSpec::Analytic => true,
            ProfileSpec::Table(_) => self
                .capacitance_profile()
                .map(|p| p.has_interior_peak())
                .unwrap_or(true),
        };
        let period = self.mech.drive_period();
        if peaked {
            0.5 * period
        } else {
            period
        }
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            pump: self.pump,
            w_switch: self.w_switch,
            t_cycle: self.resolved_t_cycle(),
            n_max: self.n_max,
        }
    }

    /// Fully resolved configuration in the input syntax.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# effective configuration\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let f = |v: f64| format!("{v:e}");
        let p = &self.pump;
        let m = &self.mech;
        kv("c_res", f(p.c_res));
        kv("c_store", f(p.c_store));
        kv("c_max", f(p.c_max));
        kv("c_min", f(p.c_min));
        kv("v0", f(p.v0));
        kv("mass", f(m.mass));
        kv("stiffness", f(m.stiffness));
        kv("damping", f(m.damping));
        kv("accel_amplitude", f(m.accel_amplitude));
        kv("drive_freq", f(m.drive_freq));
        match &self.profile {
            ProfileSpec::Analytic => kv("profile", "analytic".into()),
            ProfileSpec::Table(path) => {
                kv("profile", "table".into());
                kv("profile_table", path.display().to_string());
            }
        }
        kv("x_span", f(self.x_span));
        kv("w_switch", f(self.w_switch));
        kv("t_cycle", f(self.resolved_t_cycle()));
        kv("n_max", self.n_max.to_string());
        kv("inductance", f(self.inductance));
        kv(
            "diode",
            match self.diode {
                DiodeKind::Ideal => "ideal".into(),
                DiodeKind::Exponential => "exponential".into(),
            },
        );
        kv("r_on", f(self.r_on));
        kv("i_sat", f(self.i_sat));
        kv("v_thermal", f(self.v_thermal));
        kv("ideality", f(self.ideality));
        kv("v1", f(self.v1));
        kv("v2", f(self.v2));
        kv(
            "mode",
            match self.mode {
                SimMode::Coupled => "coupled".into(),
                SimMode::PrescribedCapacitance => "prescribed".into(),
            },
        );
        kv("rel_tol", f(self.integrator.rel_tol));
        kv("abs_tol", f(self.integrator.abs_tol));
        kv("max_step", f(self.integrator.max_step));
        kv("t_end", f(self.t_end));
        kv(
            "load_resistance",
            self.load_resistance.map_or("none".into(), f),
        );
        kv("switching_energy", f(self.switching_energy));
        s
    }
}

fn split_assignment(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty() && !v.is_empty()).then_some((k, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = RunConfig::parse("", Path::new(".")).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.pump.c_res, 1e-6);
        assert_eq!(c.pump.c_store, 3.3e-9);
        assert_eq!(c.inductance, 2.5e-6);
        assert_eq!(c.mech.mass, 46.0e-6);
        assert_eq!(c.mech.stiffness, 152.6);
        assert_eq!(c.mech.damping, 2.19e-3);
        assert_eq!(c.mech.accel_amplitude, 10.0);
        assert_eq!(c.mech.drive_freq, 298.0);
        assert_eq!(c.pump.v0, 5.0);
    }

    #[test]
    fn comments_and_spacing() {
        let text = "# header\n\n  v0 = 3.0   # volts\nmode=prescribed\nv2 = inf\n";
        let c = RunConfig::parse(text, Path::new(".")).unwrap();
        assert_eq!(c.pump.v0, 3.0);
        assert_eq!(c.mode, SimMode::PrescribedCapacitance);
        assert!(c.v2.is_infinite());
    }

    #[test]
    fn errors_name_line_and_key() {
        let err = RunConfig::parse("v0 = 5\nbogus = 1\n", Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("bogus"), "{msg}");
        let err = RunConfig::parse("v0 5\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = RunConfig::parse("v0 = five\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("v0"));
    }

    #[test]
    fn effective_text_round_trips() {
        let c = RunConfig {
            load_resistance: Some(1e6),
            diode: DiodeKind::Exponential,
            v2: f64::INFINITY,
            ..Default::default()
        };
        let back = RunConfig::parse(&c.to_text(), Path::new(".")).unwrap();
        let expected = RunConfig {
            t_cycle: Some(c.resolved_t_cycle()),
            ..c
        };
        assert_eq!(back, expected);
    }

    #[test]
    fn every_key_is_accepted() {
        let c = RunConfig::default();
        let text = c.to_text();
        for k in KEYS.iter().filter(|k| **k != "profile_table") {
            assert!(text.contains(&format!("\n{k} = ")), "{k} missing from echo");
        }
    }
}
