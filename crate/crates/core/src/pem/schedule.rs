use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleRule {
    Constant,
    /// `base / (index / divider + 1)`
    DivideByIndex,
    /// `base / (1 + ln(index / divider + 2))`
    DivideByLogIndex,
    /// `base / (index + 1)`
    DivideByLoopIndex,
    /// `base / (index * divider + 1)`
    DivideBySlowLoopIndex,
}

impl ScheduleRule {
    pub const ALL: [ScheduleRule; 5] = [
        ScheduleRule::Constant,
        ScheduleRule::DivideByIndex,
        ScheduleRule::DivideByLogIndex,
        ScheduleRule::DivideByLoopIndex,
        ScheduleRule::DivideBySlowLoopIndex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleRule::Constant => "constant",
            ScheduleRule::DivideByIndex => "divide_by_index",
            ScheduleRule::DivideByLogIndex => "divide_by_log_index",
            ScheduleRule::DivideByLoopIndex => "divide_by_loop_index",
            ScheduleRule::DivideBySlowLoopIndex => "divide_by_slow_loop_index",
        }
    }
}

impl fmt::Display for ScheduleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScheduleRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScheduleRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| invalid(format!("unknown schedule rule {s:?}")))
    }
}

/// Step-size schedule indexed either by sample (`α_W`) or by inner step (`η_y`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub rule: ScheduleRule,
    pub base: f64,
    pub divider: f64,
    pub floor: f64,
}

impl StepSchedule {
    pub fn constant(base: f64) -> Self {
        Self {
            rule: ScheduleRule::Constant,
            base,
            divider: 1.0,
            floor: 0.0,
        }
    }

    pub fn new(rule: ScheduleRule, base: f64, divider: f64, floor: f64) -> Self {
        Self {
            rule,
            base,
            divider,
            floor,
        }
    }

    pub fn value(&self, index: u64) -> f64 {
        let k = index as f64;
        let decayed = match self.rule {
            ScheduleRule::Constant => return self.base,
            ScheduleRule::DivideByIndex => self.base / (k / self.divider + 1.0),
            ScheduleRule::DivideByLogIndex => self.base / (1.0 + (k / self.divider + 2.0).ln()),
            ScheduleRule::DivideByLoopIndex => self.base / (k + 1.0),
            ScheduleRule::DivideBySlowLoopIndex => self.base / (k * self.divider + 1.0),
        };
        decayed.max(self.floor)
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if !(self.base > 0.0 && self.base.is_finite()) {
            return Err(invalid(format!("{what}: base must be positive")));
        }
        if !(self.divider > 0.0 && self.divider.is_finite()) {
            return Err(invalid(format!("{what}: divider must be positive")));
        }
        if !(self.floor >= 0.0 && self.floor <= self.base) {
            return Err(invalid(format!("{what}: floor must lie in [0, base]")));
        }
        Ok(())
    }
}
