//! Brute-force oracles for test harnesses.
//!
//! Everything here recomputes results from first principles, independent of
//! the capture/orchestrator implementations it is used to check: shares by
//! walking raw flow records, classifications by enumerating the model's
//! hidden ground truth cell by cell. Production code never calls this.

use std::collections::BTreeMap;

use crate::capture::CaptureWindow;
use crate::dnsctl::SINKHOLE;
use crate::model::{DestinationKey, DeviceModel, Verdict};

/// Naive per-destination byte shares: join each delivered flow to a DNS
/// answer from the same window by scanning, key by (name, transport, port)
/// strings, and divide. No reuse of the capture module's extraction.
pub fn brute_force_shares(windows: &[CaptureWindow]) -> BTreeMap<String, f64> {
    let mut bytes_by_key: BTreeMap<String, u64> = BTreeMap::new();
    let mut total: u64 = 0;
    for window in windows {
        for flow in &window.flows {
            if !flow.delivered || flow.dst_ip == SINKHOLE {
                continue;
            }
            let mut name: Option<(&str, crate::time::VirtualTime)> = None;
            for event in &window.dns_events {
                if event.addresses.contains(&flow.dst_ip)
                    && event.addresses != [SINKHOLE]
                    && event.at <= flow.t_start
                {
                    match name {
                        Some((_, best)) if best >= event.at => {}
                        _ => name = Some((&event.name, event.at)),
                    }
                }
            }
            let label = match name {
                Some((n, _)) => n.to_string(),
                None => flow.dst_ip.to_string(),
            };
            let key = match flow.dst_port {
                Some(p) => format!("{label}|{}|{p}", flow.transport),
                None => format!("{label}|{}|-", flow.transport),
            };
            *bytes_by_key.entry(key).or_default() += flow.bytes;
            total += flow.bytes;
        }
    }
    bytes_by_key
        .into_iter()
        .map(|(k, b)| (k, b as f64 * 100.0 / total as f64))
        .collect()
}

/// Share of one destination by display name (for example `"ntp.org"` or
/// `"210.72.145.44"`), summed over ports/transports it appears with.
pub fn brute_force_share_of(windows: &[CaptureWindow], name: &str) -> f64 {
    brute_force_shares(windows)
        .iter()
        .filter(|(k, _)| k.split('|').next() == Some(name))
        .map(|(_, v)| *v)
        .sum()
}

/// Ground-truth classification by exhaustive enumeration of
/// (destination, functionality, mode) cells, reading the model's hidden
/// critical sets directly.
///
/// Blocking follows the real mechanism: blocking a named key sinkholes its
/// DNS name (so every key sharing that name goes dark), and blocking a
/// literal key drops its address. A blocked cell fails iff the blocked
/// name/address covers any critical destination of that cell.
pub fn ground_truth_classification(model: &DeviceModel) -> BTreeMap<DestinationKey, Verdict> {
    // Destinations per cell, by enumerating boot + functionality contacts.
    let mut cells: Vec<(Vec<DestinationKey>, Vec<DestinationKey>)> = Vec::new(); // (detected, critical)
    for func in &model.functionalities {
        for &mode in &func.modes {
            let mut detected: Vec<DestinationKey> = Vec::new();
            for contact in model.boot_contacts_in(mode).chain(func.contacts_in(mode).iter()) {
                let key = contact.key();
                if !detected.contains(&key) {
                    detected.push(key);
                }
            }
            let critical = func.critical_in(mode).to_vec();
            cells.push((detected, critical));
        }
    }

    let covers = |blocked: &DestinationKey, critical: &DestinationKey| -> bool {
        match (blocked.dns_name(), critical.dns_name()) {
            (Some(a), Some(b)) => a == b,
            (None, None) => blocked.ip_literal() == critical.ip_literal(),
            _ => false,
        }
    };

    let mut verdicts = BTreeMap::new();
    for (detected, _) in &cells {
        for key in detected {
            if verdicts.contains_key(key) {
                continue;
            }
            let mut any_pass = false;
            let mut any_fail = false;
            for (cell_detected, cell_critical) in &cells {
                if !cell_detected.contains(key) {
                    continue;
                }
                let breaks = cell_critical.iter().any(|c| covers(key, c));
                if breaks {
                    any_fail = true;
                } else {
                    any_pass = true;
                }
            }
            if let Some(verdict) = Verdict::from_outcomes(any_pass, any_fail) {
                verdicts.insert(key.clone(), verdict);
            }
        }
    }
    verdicts
}
