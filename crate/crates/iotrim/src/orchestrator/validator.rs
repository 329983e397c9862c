//! Auto-validation: comparing state crops against a known-good baseline,
//! the stand-in for the screenshot-matching pipeline.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::netlab::StateSnapshot;

/// Validated outcome of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, thiserror::Error)]
#[error("validator unreachable")]
pub struct ValidatorUnreachable;

/// Compares a post-interaction crop with the baseline crop.
pub trait Validator: Send {
    fn validate(
        &mut self,
        baseline: &StateSnapshot,
        current: &StateSnapshot,
    ) -> Result<Outcome, ValidatorUnreachable>;
}

/// Field-for-field equality over the crop.
#[derive(Default)]
pub struct SnapshotValidator;

impl Validator for SnapshotValidator {
    fn validate(
        &mut self,
        baseline: &StateSnapshot,
        current: &StateSnapshot,
    ) -> Result<Outcome, ValidatorUnreachable> {
        if baseline.fields == current.fields {
            Ok(Outcome::Pass)
        } else {
            Ok(Outcome::Fail)
        }
    }
}

/// Test-harness validator that is unreachable on chosen call indices
/// (1-based), exercising the retry path.
pub struct FlakyValidator {
    unreachable_on: HashSet<u64>,
    calls: u64,
    inner: SnapshotValidator,
}

impl FlakyValidator {
    pub fn unreachable_on(calls: impl IntoIterator<Item = u64>) -> FlakyValidator {
        FlakyValidator {
            unreachable_on: calls.into_iter().collect(),
            calls: 0,
            inner: SnapshotValidator,
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }
}

impl Validator for FlakyValidator {
    fn validate(
        &mut self,
        baseline: &StateSnapshot,
        current: &StateSnapshot,
    ) -> Result<Outcome, ValidatorUnreachable> {
        self.calls += 1;
        if self.unreachable_on.contains(&self.calls) {
            return Err(ValidatorUnreachable);
        }
        self.inner.validate(baseline, current)
    }
}
