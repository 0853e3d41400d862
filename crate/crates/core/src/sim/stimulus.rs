// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::Time;

/// A free-running clock on a module input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockSpec {
    pub net: String,
    pub period: Time,
    pub duty: f64,
    pub start_high: bool,
}

impl ClockSpec {
    pub fn new(net: impl Into<String>, period: Time) -> Self {
        ClockSpec {
            net: net.into(),
            period,
            duty: 0.5,
            start_high: false,
        }
    }

    pub fn starting_high(mut self) -> Self {
        self.start_high = true;
        self
    }

    /// Duration of the high phase, rounded to the nearest picosecond and kept
    /// strictly inside the period.
    pub fn high_time(&self) -> Time {
        let h = (self.period as f64 * self.duty).round() as Time;
        h.clamp(1, self.period.saturating_sub(1).max(1))
    }

    pub fn low_time(&self) -> Time {
        self.period - self.high_time()
    }

    /// Level just after any transition scheduled at `t` has been applied.
    pub fn level_at(&self, t: Time) -> bool {
        let p = t % self.period;
        if self.start_high {
            p < self.high_time()
        } else {
            p >= self.low_time()
        }
    }

    /// Times of root-clock edges in `(0, until]`, with `true` for rising.
    pub fn edges(&self, until: Time) -> impl Iterator<Item = (Time, bool)> + '_ {
        let first = if self.start_high {
            self.high_time()
        } else {
            self.low_time()
        };
        let mut t = first;
        let mut rising = !self.start_high;
        std::iter::from_fn(move || {
            if t > until {
                return None;
            }
            let e = (t, rising);
            t += if rising {
                self.high_time()
            } else {
                self.low_time()
            };
            rising = !rising;
            Some(e)
        })
    }
}

/// A value forced onto a module input at a given time. Drives at time 0 set
/// the initial value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drive {
    pub net: String,
    pub time: Time,
    pub value: u8,
}

/// Clocks, input drives and the nets to trace.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Stimulus {
    #[serde(default)]
    pub clocks: Vec<ClockSpec>,
    #[serde(default)]
    pub drives: Vec<Drive>,
    #[serde(default)]
    pub watch: Vec<String>,
}

impl Stimulus {
    pub fn clock(mut self, spec: ClockSpec) -> Self {
        self.clocks.push(spec);
        self
    }

    pub fn drive(mut self, net: impl Into<String>, time: Time, value: bool) -> Self {
        self.drives.push(Drive {
            net: net.into(),
            time,
            value: value as u8,
        });
        self
    }

    pub fn watch(mut self, net: impl Into<String>) -> Self {
        self.watch.push(net.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
