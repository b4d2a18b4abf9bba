//! Simulation and optimization toolkit for a capacitive vibration-energy
//! harvester built from a charge pump (D1, D2, `C_res`, `C_var`, `C_store`)
//! and an inductive flyback branch (switch, L, D3).
//!
//! The crate is split by subsystem:
//!
//! * [`charge_pump`]: cycle-indexed analytic models of the pump with ideal
//!   diodes and a stiff reservoir.
//! * [`optimizer`]: exhaustive search of the flyback window `(n1, n2)` that
//!   maximizes average harvested power net of switching cost.
//! * [`switch_ctrl`]: the one-bit hysteresis automaton driving the flyback.
//! * [`transducer`]: capacitance profiles, electrostatic and drive forces.
//! * [`ode`]: a Dormand-Prince 5(4) stepper with dense output, used for
//!   event localization.
//! * [`circuit_sim`]: the coupled electromechanical transient simulator and
//!   its energy audit.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charge_pump;
pub mod circuit_sim;
pub mod error;
pub mod ode;
pub mod optimizer;
pub mod switch_ctrl;
pub mod transducer;

pub use error::{Error, Result};
