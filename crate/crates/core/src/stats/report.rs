use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cascade::CascadeParams;

/// One asserted statistic: it passes when `value <= threshold`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// A statistic that is recorded but not asserted.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    pub name: String,
    pub value: f64,
}

/// Outcome of a Monte-Carlo check. `pass` holds iff every check passes.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StatReport {
    pub test: String,
    pub params: CascadeParams,
    pub label: String,
    pub seed: u64,
    pub depths: Vec<u32>,
    pub reps: u64,
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub pass: bool,
    /// Wall-clock seconds; absent without `std`.
    pub runtime_seconds: Option<f64>,
}

impl StatReport {
    pub(crate) fn new(test: &str, params: &CascadeParams, depths: Vec<u32>, reps: u64) -> Self {
        Self {
            test: test.to_string(),
            params: *params,
            label: params.label(),
            seed: params.seed(),
            depths,
            reps,
            checks: Vec::new(),
            observations: Vec::new(),
            pass: true,
            runtime_seconds: None,
        }
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        // NaN never passes.
        let pass = value <= threshold;
        self.pass &= pass;
        self.checks.push(Check {
            name: name.into(),
            value,
            threshold,
            pass,
        });
    }

    pub(crate) fn observe(&mut self, name: impl Into<String>, value: f64) {
        self.observations.push(Observation {
            name: name.into(),
            value,
        });
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn observation(&self, name: &str) -> Option<f64> {
        self.observations.iter().find(|o| o.name == name).map(|o| o.value)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[cfg(feature = "std")]
pub(crate) struct Timer(std::time::Instant);

#[cfg(feature = "std")]
impl Timer {
    pub(crate) fn start() -> Self {
        Self(std::time::Instant::now())
    }

    pub(crate) fn finish(self, report: &mut StatReport) {
        report.runtime_seconds = Some(self.0.elapsed().as_secs_f64());
    }
}

#[cfg(not(feature = "std"))]
pub(crate) struct Timer;

#[cfg(not(feature = "std"))]
impl Timer {
    pub(crate) fn start() -> Self {
        Self
    }

    pub(crate) fn finish(self, _report: &mut StatReport) {}
}
