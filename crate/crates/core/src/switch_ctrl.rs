//! Flyback switch command: a hysteresis comparator on `V_store` with one bit
//! of memory. It sees nothing but `V_store`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum SwitchState {
    #[default]
    Off,
    On,
}

impl SwitchState {
    pub fn is_on(self) -> bool {
        self == SwitchState::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchController {
    v1: f64,
    v2: f64,
    state: SwitchState,
}

impl SwitchController {
    /// Builds an `Off` controller. Requires `v1 < v2`; `v2 = +inf` gives a
    /// switch that never closes.
    pub fn new(v1: f64, v2: f64) -> Result<Self> {
        if v1.is_nan() || v2.is_nan() || !(v1 < v2) {
            return Err(Error::config(format!(
                "switch thresholds need v1 < v2 (got {v1}, {v2})"
            )));
        }
        Ok(Self {
            v1,
            v2,
            state: SwitchState::Off,
        })
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }

    pub fn state(&self) -> SwitchState {
        self.state
    }

    /// Successor state after observing `v_store`. Both comparisons are inclusive.
    #[must_use]
    pub fn step(self, v_store: f64) -> Self {
        let state = match self.state {
            SwitchState::Off if v_store >= self.v2 => SwitchState::On,
            SwitchState::On if v_store <= self.v1 => SwitchState::Off,
            s => s,
        };
        Self { state, ..self }
    }

    /// Folds a sequence of observations.
    #[must_use]
    pub fn run<I: IntoIterator<Item = f64>>(self, samples: I) -> Self {
        samples.into_iter().fold(self, Self::step)
    }
}
