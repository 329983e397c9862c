//! Cross-device analysis: generalization over destination groupings,
//! longitudinal diffs between campaign epochs, ownership lookup for
//! hard-coded addresses, and the traffic characterization table.

pub mod tables;

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::model::{second_level_label, Classification, DestName, DestinationKey, Transport, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("classifications are for different devices: {0:?} vs {1:?}")]
    DeviceMismatch(String, String),
    #[error("no ownership entry covers {0}")]
    UnknownOwner(Ipv4Addr),
    #[error("bad prefix {0:?}")]
    BadPrefix(String),
    #[error("ownership fixture is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("need at least one classification")]
    Empty,
}

/// Bundled service-class map; the paper's "NTP servers" generalization
/// needs destinations grouped by what the port speaks.
pub fn service_class(transport: Transport, port: Option<u16>) -> Option<&'static str> {
    match (transport, port) {
        (Transport::Udp, Some(123)) => Some("NTP"),
        (Transport::Tcp, Some(80)) => Some("HTTP"),
        (Transport::Tcp, Some(443)) => Some("HTTPS"),
        (Transport::Udp, Some(53)) | (Transport::Tcp, Some(53)) => Some("DNS"),
        (Transport::Tcp, Some(8883)) | (Transport::Tcp, Some(1883)) => Some("MQTT"),
        (Transport::Icmp, _) => Some("ICMP"),
        _ => None,
    }
}

// ---- ownership ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnershipRecord {
    pub ip: Ipv4Addr,
    pub organization: String,
    pub registry: String,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
struct OwnershipEntry {
    prefix: String,
    organization: String,
    registry: String,
}

#[derive(Debug, Clone, Copy)]
struct Prefix {
    base: u32,
    len: u8,
}

impl Prefix {
    fn parse(text: &str) -> Result<Prefix, AnalysisError> {
        let (addr, len) = text.split_once('/').ok_or_else(|| AnalysisError::BadPrefix(text.into()))?;
        let base: Ipv4Addr = addr.parse().map_err(|_| AnalysisError::BadPrefix(text.into()))?;
        let len: u8 = len.parse().map_err(|_| AnalysisError::BadPrefix(text.into()))?;
        if len > 32 {
            return Err(AnalysisError::BadPrefix(text.into()));
        }
        Ok(Prefix { base: u32::from(base), len })
    }

    fn contains(&self, ip: Ipv4Addr) -> bool {
        let mask = if self.len == 0 { 0 } else { u32::MAX << (32 - self.len) };
        (u32::from(ip) & mask) == (self.base & mask)
    }
}

/// Offline WHOIS stand-in: a fixture of prefixes, never a live query.
pub struct OwnershipTable {
    entries: Vec<(Prefix, String, String)>,
    source: String,
}

impl OwnershipTable {
    pub fn from_json(text: &str, source: &str) -> Result<OwnershipTable, AnalysisError> {
        let raw: Vec<OwnershipEntry> = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(raw.len());
        for entry in raw {
            entries.push((Prefix::parse(&entry.prefix)?, entry.organization, entry.registry));
        }
        Ok(OwnershipTable { entries, source: source.to_string() })
    }

    pub fn bundled() -> OwnershipTable {
        OwnershipTable::from_json(crate::bundled::OWNERSHIP_JSON, "bundled")
            .expect("bundled ownership fixture is valid")
    }

    /// Longest-prefix match; an address outside every prefix is an error,
    /// never a guess.
    pub fn owner_lookup(&self, ip: Ipv4Addr) -> Result<OwnershipRecord, AnalysisError> {
        self.entries
            .iter()
            .filter(|(prefix, _, _)| prefix.contains(ip))
            .max_by_key(|(prefix, _, _)| prefix.len)
            .map(|(_, organization, registry)| OwnershipRecord {
                ip,
                organization: organization.clone(),
                registry: registry.clone(),
                source: self.source.clone(),
            })
            .ok_or(AnalysisError::UnknownOwner(ip))
    }
}

// ---- generalization ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Grouping {
    Port,
    Domain,
    SecondLevel,
    Organization,
    ServiceClass,
}

impl std::fmt::Display for Grouping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Grouping::Port => "PORT",
            Grouping::Domain => "DOMAIN",
            Grouping::SecondLevel => "SECOND_LEVEL",
            Grouping::Organization => "ORGANIZATION",
            Grouping::ServiceClass => "SERVICE_CLASS",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GroupConsistency {
    AlwaysBlockable,
    NeverBlockable,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub grouping: Grouping,
    pub label: String,
    pub devices: BTreeSet<String>,
    pub members: usize,
    pub consistency: GroupConsistency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationReport {
    pub groups: Vec<GroupEntry>,
}

impl GeneralizationReport {
    pub fn group(&self, grouping: Grouping, label: &str) -> Option<&GroupEntry> {
        self.groups.iter().find(|g| g.grouping == grouping && g.label == label)
    }
}

fn group_labels(key: &DestinationKey, ownership: &OwnershipTable) -> Vec<(Grouping, String)> {
    let mut labels = Vec::with_capacity(5);
    labels.push((
        Grouping::Port,
        key.port().map(|p| p.to_string()).unwrap_or_else(|| "-".to_string()),
    ));
    labels.push((Grouping::Domain, key.name().to_string()));
    match key.name() {
        DestName::Dns(name) => {
            if let Ok(label) = second_level_label(name) {
                labels.push((Grouping::SecondLevel, label.clone()));
                labels.push((Grouping::Organization, label));
            }
        }
        DestName::Ip(addr) => {
            // Second-level grouping is not applicable to literals; the
            // organization comes from the ownership fixture when known.
            if let Ok(record) = ownership.owner_lookup(*addr) {
                labels.push((Grouping::Organization, record.organization));
            }
        }
    }
    let class = service_class(key.transport(), key.port())
        .map(str::to_string)
        .unwrap_or_else(|| format!("{}/{}", key.transport(), key.port().unwrap_or(0)));
    labels.push((Grouping::ServiceClass, class));
    labels
}

/// Group every classified destination by port, domain, second-level
/// domain, organization, and service class; report whether each group is
/// blockable for all members across all devices, for none, or mixed.
pub fn generalize(
    classifications: &[Classification],
    ownership: &OwnershipTable,
) -> Result<GeneralizationReport, AnalysisError> {
    if classifications.is_empty() {
        return Err(AnalysisError::Empty);
    }
    struct Acc {
        devices: BTreeSet<String>,
        members: usize,
        all_blockable: bool,
        all_unblockable: bool,
    }
    let mut acc: BTreeMap<(Grouping, String), Acc> = BTreeMap::new();
    for classification in classifications {
        for entry in &classification.entries {
            for (grouping, label) in group_labels(&entry.key, ownership) {
                let slot = acc.entry((grouping, label)).or_insert(Acc {
                    devices: BTreeSet::new(),
                    members: 0,
                    all_blockable: true,
                    all_unblockable: true,
                });
                slot.devices.insert(classification.device.clone());
                slot.members += 1;
                slot.all_blockable &= entry.verdict == Verdict::BlockableAll;
                slot.all_unblockable &= entry.verdict == Verdict::Unblockable;
            }
        }
    }
    let groups = acc
        .into_iter()
        .map(|((grouping, label), a)| GroupEntry {
            grouping,
            label,
            devices: a.devices,
            members: a.members,
            consistency: if a.all_blockable {
                GroupConsistency::AlwaysBlockable
            } else if a.all_unblockable {
                GroupConsistency::NeverBlockable
            } else {
                GroupConsistency::Mixed
            },
        })
        .collect();
    Ok(GeneralizationReport { groups })
}

// ---- longitudinal ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictChange {
    pub key: DestinationKey,
    pub before: Verdict,
    pub after: Verdict,
}

/// Destinations added, removed, or re-classified between two epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub device: String,
    pub epoch_a: String,
    pub epoch_b: String,
    pub added: Vec<DestinationKey>,
    pub removed: Vec<DestinationKey>,
    pub changed: Vec<VerdictChange>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.changed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.added.len() + self.removed.len() + self.changed.len()
    }
}

pub fn longitudinal_diff(
    epoch_a: &Classification,
    epoch_b: &Classification,
) -> Result<ChangeSet, AnalysisError> {
    if epoch_a.device != epoch_b.device {
        return Err(AnalysisError::DeviceMismatch(epoch_a.device.clone(), epoch_b.device.clone()));
    }
    let mut change = ChangeSet {
        device: epoch_a.device.clone(),
        epoch_a: epoch_a.epoch.clone(),
        epoch_b: epoch_b.epoch.clone(),
        added: Vec::new(),
        removed: Vec::new(),
        changed: Vec::new(),
    };
    for entry in &epoch_b.entries {
        match epoch_a.verdict_of(&entry.key) {
            None => change.added.push(entry.key.clone()),
            Some(before) if before != entry.verdict => change.changed.push(VerdictChange {
                key: entry.key.clone(),
                before,
                after: entry.verdict,
            }),
            Some(_) => {}
        }
    }
    for entry in &epoch_a.entries {
        if epoch_b.verdict_of(&entry.key).is_none() {
            change.removed.push(entry.key.clone());
        }
    }
    Ok(change)
}

// ---- traffic characterization ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficRow {
    pub destination: String,
    pub devices: usize,
    pub protocol: String,
    pub port: Option<u16>,
    pub share_pct: f64,
}

/// One row per destination that is BLOCKABLE_ALL for every device
/// contacting it: device count, protocol (service class when known),
/// port, and the average of per-device pooled shares.
pub fn characterize_traffic(classifications: &[Classification]) -> Vec<TrafficRow> {
    let mut order: Vec<DestinationKey> = Vec::new();
    let mut per_key: BTreeMap<DestinationKey, (usize, f64, bool)> = BTreeMap::new();
    for classification in classifications {
        for entry in &classification.entries {
            let slot = per_key.entry(entry.key.clone()).or_insert_with(|| {
                order.push(entry.key.clone());
                (0, 0.0, true)
            });
            slot.0 += 1;
            slot.1 += entry.stats.share_pct;
            slot.2 &= entry.verdict == Verdict::BlockableAll;
        }
    }
    order
        .into_iter()
        .filter_map(|key| {
            let (devices, share_sum, blockable) = per_key[&key];
            if !blockable {
                return None;
            }
            let protocol = service_class(key.transport(), key.port())
                .map(str::to_string)
                .unwrap_or_else(|| key.transport().to_string());
            Some(TrafficRow {
                destination: key.name().to_string(),
                devices,
                protocol,
                port: key.port(),
                share_pct: share_sum / devices as f64,
            })
        })
        .collect()
}

/// Fleet-wide summary: distinct destinations and how many are blockable
/// for every device that contacts them.
pub fn fleet_summary(classifications: &[Classification]) -> (usize, usize) {
    let mut blockable: BTreeMap<DestinationKey, bool> = BTreeMap::new();
    for classification in classifications {
        for entry in &classification.entries {
            let slot = blockable.entry(entry.key.clone()).or_insert(true);
            *slot &= entry.verdict == Verdict::BlockableAll;
        }
    }
    let total = blockable.len();
    let blockable = blockable.values().filter(|b| **b).count();
    (total, blockable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClassificationEntry, DestStats};
    use crate::time::VirtualTime;

    fn key(name: &str, transport: Transport, port: Option<u16>) -> DestinationKey {
        DestinationKey::named(name, transport, port).unwrap()
    }

    fn entry(key: DestinationKey, verdict: Verdict, share: f64) -> ClassificationEntry {
        ClassificationEntry {
            key,
            verdict,
            first_seen: VirtualTime::ZERO,
            cells: Vec::new(),
            evidence: Vec::new(),
            stats: DestStats { flows: 1, bytes: 100, share_pct: share },
        }
    }

    fn classification(device: &str, entries: Vec<ClassificationEntry>) -> Classification {
        Classification::summarize(device, "epoch-0", entries)
    }

    fn sample() -> Vec<Classification> {
        vec![
            classification(
                "bulb",
                vec![
                    entry(key("ntp.org", Transport::Udp, Some(123)), Verdict::BlockableAll, 1.5),
                    entry(key("nist.gov", Transport::Udp, Some(123)), Verdict::BlockableAll, 1.4),
                    entry(key("amazonaws.com", Transport::Tcp, Some(443)), Verdict::Unblockable, 40.0),
                ],
            ),
            classification(
                "cam",
                vec![
                    entry(key("amazonaws.com", Transport::Tcp, Some(443)), Verdict::Unblockable, 30.0),
                    entry(
                        DestinationKey::literal("210.72.145.44".parse().unwrap(), Transport::Icmp, None)
                            .unwrap(),
                        Verdict::BlockableAll,
                        0.12,
                    ),
                ],
            ),
        ]
    }

    #[test]
    fn ntp_class_always_blockable_and_aws_never() {
        let report = generalize(&sample(), &OwnershipTable::bundled()).unwrap();
        let ntp = report.group(Grouping::ServiceClass, "NTP").unwrap();
        assert_eq!(ntp.consistency, GroupConsistency::AlwaysBlockable);
        assert_eq!(ntp.members, 2);
        let aws = report.group(Grouping::SecondLevel, "amazonaws.com").unwrap();
        assert_eq!(aws.consistency, GroupConsistency::NeverBlockable);
        assert_eq!(aws.devices.len(), 2);
        // Hard-coded address groups by fixture organization.
        let org = report
            .group(Grouping::Organization, "Computer Network Information Center")
            .unwrap();
        assert_eq!(org.consistency, GroupConsistency::AlwaysBlockable);
    }

    #[test]
    fn single_member_groups_are_never_mixed() {
        let report = generalize(&sample(), &OwnershipTable::bundled()).unwrap();
        for group in &report.groups {
            if group.members == 1 {
                assert_ne!(group.consistency, GroupConsistency::Mixed, "{:?}", group.label);
            }
        }
    }

    #[test]
    fn generalize_is_permutation_invariant() {
        let mut reversed = sample();
        reversed.reverse();
        assert_eq!(
            generalize(&sample(), &OwnershipTable::bundled()).unwrap(),
            generalize(&reversed, &OwnershipTable::bundled()).unwrap()
        );
    }

    #[test]
    fn diff_of_identical_epochs_is_empty() {
        let a = &sample()[0];
        let diff = longitudinal_diff(a, a).unwrap();
        assert!(diff.is_empty());
    }

    #[test]
    fn diff_reports_additions_removals_and_flips() {
        let a = sample().remove(0);
        let mut b = a.clone();
        b.epoch = "epoch-1".into();
        // Flip one verdict, drop one destination, add one.
        b.entries[0].verdict = Verdict::Unblockable;
        b.entries.remove(2);
        b.entries.push(entry(key("new.example.com", Transport::Tcp, Some(80)), Verdict::BlockableAll, 1.0));
        let diff = longitudinal_diff(&a, &b).unwrap();
        assert_eq!(diff.added.len(), 1);
        assert_eq!(diff.removed.len(), 1);
        assert_eq!(diff.changed.len(), 1);
        assert_eq!(diff.changed[0].before, Verdict::BlockableAll);
        assert_eq!(diff.changed[0].after, Verdict::Unblockable);

        let other = classification("other-device", Vec::new());
        assert!(matches!(longitudinal_diff(&a, &other), Err(AnalysisError::DeviceMismatch(..))));
    }

    #[test]
    fn owner_lookup_longest_prefix_and_unknown() {
        let table = OwnershipTable::bundled();
        let record = table.owner_lookup("210.72.145.44".parse().unwrap()).unwrap();
        assert_eq!(record.organization, "Computer Network Information Center");
        let record = table.owner_lookup("52.1.2.3".parse().unwrap()).unwrap();
        assert_eq!(record.organization, "Amazon Technologies Inc.");
        assert!(matches!(
            table.owner_lookup("127.0.0.1".parse().unwrap()),
            Err(AnalysisError::UnknownOwner(_))
        ));

        // Longest prefix wins over a shorter covering one.
        let table = OwnershipTable::from_json(
            r#"[
                { "prefix": "10.0.0.0/8", "organization": "Wide", "registry": "X" },
                { "prefix": "10.1.0.0/16", "organization": "Narrow", "registry": "X" }
            ]"#,
            "test",
        )
        .unwrap();
        assert_eq!(table.owner_lookup("10.1.2.3".parse().unwrap()).unwrap().organization, "Narrow");
        assert_eq!(table.owner_lookup("10.2.0.1".parse().unwrap()).unwrap().organization, "Wide");
    }

    #[test]
    fn traffic_rows_only_for_universally_blockable_keys() {
        let rows = characterize_traffic(&sample());
        let names: Vec<_> = rows.iter().map(|r| r.destination.as_str()).collect();
        assert_eq!(names, vec!["ntp.org", "nist.gov", "210.72.145.44"]);
        let ntp = &rows[0];
        assert_eq!(ntp.devices, 1);
        assert_eq!(ntp.protocol, "NTP");
        assert_eq!(ntp.port, Some(123));
        let ping = &rows[2];
        assert_eq!(ping.protocol, "ICMP");
        assert_eq!(ping.port, None);
    }

    #[test]
    fn fleet_summary_counts_distinct_keys() {
        let (total, blockable) = fleet_summary(&sample());
        assert_eq!(total, 4); // amazonaws shared between the two devices
        assert_eq!(blockable, 3);
    }
}
