//! Per-device classification of destinations, the end product of a campaign.

use serde::{Deserialize, Serialize};

use super::destination::DestinationKey;
use super::Mode;
use crate::time::VirtualTime;

/// Final verdict for one destination of one device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Blocking never broke any validated experiment.
    BlockableAll,
    /// Blocking broke some experiments and not others.
    BlockableSome,
    /// Blocking broke every validated experiment.
    Unblockable,
}

impl Verdict {
    /// Aggregate from whether any validated blocked experiment passed/failed.
    pub fn from_outcomes(any_pass: bool, any_fail: bool) -> Option<Verdict> {
        match (any_pass, any_fail) {
            (true, false) => Some(Verdict::BlockableAll),
            (false, true) => Some(Verdict::Unblockable),
            (true, true) => Some(Verdict::BlockableSome),
            (false, false) => None,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::BlockableAll => write!(f, "BLOCKABLE_ALL"),
            Verdict::BlockableSome => write!(f, "BLOCKABLE_SOME"),
            Verdict::Unblockable => write!(f, "UNBLOCKABLE"),
        }
    }
}

/// Outcome of blocking a destination within one (functionality, mode) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    Pass,
    Fail,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellVerdict {
    pub functionality: String,
    pub mode: Mode,
    pub outcome: CellOutcome,
}

/// Delivered traffic attributed to a destination over the whole campaign.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DestStats {
    pub flows: u64,
    pub bytes: u64,
    /// Destination bytes over total device bytes, pooled across the
    /// campaign, in percent.
    pub share_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationEntry {
    pub key: DestinationKey,
    pub verdict: Verdict,
    pub first_seen: VirtualTime,
    pub cells: Vec<CellVerdict>,
    pub evidence: Vec<String>,
    pub stats: DestStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub destinations: usize,
    pub blockable: usize,
}

/// Every destination observed during a campaign, each with exactly one
/// verdict, ordered by first observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub device: String,
    pub epoch: String,
    pub entries: Vec<ClassificationEntry>,
    pub summary: Summary,
}

impl Classification {
    pub fn verdict_of(&self, key: &DestinationKey) -> Option<Verdict> {
        self.entries.iter().find(|e| &e.key == key).map(|e| e.verdict)
    }

    pub fn entry(&self, key: &DestinationKey) -> Option<&ClassificationEntry> {
        self.entries.iter().find(|e| &e.key == key)
    }

    /// Recompute the summary from the entries.
    pub fn summarize(device: &str, epoch: &str, entries: Vec<ClassificationEntry>) -> Self {
        let blockable = entries.iter().filter(|e| e.verdict == Verdict::BlockableAll).count();
        Classification {
            device: device.to_string(),
            epoch: epoch.to_string(),
            summary: Summary { destinations: entries.len(), blockable },
            entries,
        }
    }
}
