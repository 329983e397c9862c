//! Report tables, as aligned plain text and as serializable rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{fleet_summary, ChangeSet, GeneralizationReport, TrafficRow};
use crate::model::{CellOutcome, Classification, DestName, DeviceModel, Mode};
use crate::orchestrator::SweepReport;

/// Per-device presentation info derived from its model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceMeta {
    pub label: String,
    pub activity: String,
}

pub fn device_meta(model: &DeviceModel) -> DeviceMeta {
    let mut modes: Vec<Mode> = Vec::new();
    let mut names: Vec<&str> = Vec::new();
    for func in &model.functionalities {
        for mode in &func.modes {
            if !modes.contains(mode) {
                modes.push(*mode);
            }
        }
        names.push(&func.name);
    }
    modes.sort();
    let modes = modes.iter().map(Mode::to_string).collect::<Vec<_>>().join("/");
    let activity = if names.is_empty() {
        "power".to_string()
    } else {
        format!("{modes} {}, power", names.join("/"))
    };
    DeviceMeta { label: model.label.clone(), activity }
}

/// Contacted-destination summary, one row per device.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DestinationsRow {
    pub device: String,
    pub activity: String,
    pub domains: usize,
    pub hardcoded_ips: usize,
    pub destinations: Vec<String>,
}

pub fn destinations_rows(
    classifications: &[Classification],
    meta: &BTreeMap<String, DeviceMeta>,
) -> Vec<DestinationsRow> {
    classifications
        .iter()
        .map(|c| {
            let mut names: Vec<String> = Vec::new();
            let mut domains = 0;
            let mut hardcoded = 0;
            for entry in &c.entries {
                let display = entry.key.name().to_string();
                if !names.contains(&display) {
                    match entry.key.name() {
                        DestName::Dns(_) => domains += 1,
                        DestName::Ip(_) => hardcoded += 1,
                    }
                    names.push(display);
                }
            }
            let m = meta.get(&c.device);
            DestinationsRow {
                device: m.map(|m| m.label.clone()).unwrap_or_else(|| c.device.clone()),
                activity: m.map(|m| m.activity.clone()).unwrap_or_default(),
                domains,
                hardcoded_ips: hardcoded,
                destinations: names,
            }
        })
        .collect()
}

/// Per-cell blockability, one row per (device, activity, destination).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockableRow {
    pub device: String,
    pub activity: String,
    pub destination: String,
    /// True = blockable in that cell, false = not, None = mixed outcomes.
    pub blockable: Option<bool>,
}

pub fn blockable_rows(
    classifications: &[Classification],
    meta: &BTreeMap<String, DeviceMeta>,
) -> Vec<BlockableRow> {
    let mut rows = Vec::new();
    for c in classifications {
        let label = meta.get(&c.device).map(|m| m.label.clone()).unwrap_or_else(|| c.device.clone());
        // Cells in campaign order, deduplicated.
        let mut cells: Vec<(String, Mode)> = Vec::new();
        for entry in &c.entries {
            for cell in &entry.cells {
                let id = (cell.functionality.clone(), cell.mode);
                if !cells.contains(&id) {
                    cells.push(id);
                }
            }
        }
        for (functionality, mode) in cells {
            for entry in &c.entries {
                let Some(cell) = entry
                    .cells
                    .iter()
                    .find(|cl| cl.functionality == functionality && cl.mode == mode)
                else {
                    continue;
                };
                rows.push(BlockableRow {
                    device: label.clone(),
                    activity: format!("{mode} {functionality}"),
                    destination: entry.key.name().to_string(),
                    blockable: match cell.outcome {
                        CellOutcome::Pass => Some(true),
                        CellOutcome::Fail => Some(false),
                        CellOutcome::Mixed => None,
                    },
                });
            }
        }
    }
    rows
}

fn mark(blockable: Option<bool>) -> &'static str {
    match blockable {
        Some(true) => "\u{2713}",  // ✓
        Some(false) => "\u{2717}", // ✗
        None => "±",
    }
}

fn align(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: &[String], widths: &[usize]| -> String {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:<width$}", c, width = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    out.push_str(&fmt_row(&header_cells, &widths));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_row(row, &widths));
        out.push('\n');
    }
    out
}

pub fn render_destinations(rows: &[DestinationsRow]) -> String {
    align(
        &["Device", "Activity", "#domains", "#hard-coded IPs", "Domains/hard-coded IPs"],
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.device.clone(),
                    r.activity.clone(),
                    r.domains.to_string(),
                    r.hardcoded_ips.to_string(),
                    r.destinations.join(", "),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn render_blockable(rows: &[BlockableRow]) -> String {
    align(
        &["Device", "Activity", "Destination", "Blockable"],
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.device.clone(),
                    r.activity.clone(),
                    r.destination.clone(),
                    mark(r.blockable).to_string(),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn render_traffic(rows: &[TrafficRow]) -> String {
    align(
        &["Destination", "#Devices", "Protocol", "Port", "Traffic (%)"],
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.destination.clone(),
                    r.devices.to_string(),
                    r.protocol.clone(),
                    r.port.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
                    format!("{:.2}", r.share_pct),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn render_generalization(report: &GeneralizationReport) -> String {
    align(
        &["Grouping", "Label", "Devices", "Members", "Consistency"],
        &report
            .groups
            .iter()
            .map(|g| {
                vec![
                    g.grouping.to_string(),
                    g.label.clone(),
                    g.devices.len().to_string(),
                    g.members.to_string(),
                    format!("{:?}", g.consistency)
                        .chars()
                        .flat_map(|c| {
                            if c.is_uppercase() { vec!['_', c] } else { vec![c.to_ascii_uppercase()] }
                        })
                        .skip(1)
                        .collect::<String>(),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

pub fn render_sweep(report: &SweepReport) -> String {
    let mut text = align(
        &["Off duration (s)", "Unique DNS queries"],
        &report
            .counts
            .iter()
            .map(|(d, n)| vec![format!("{}", d.as_secs_f64()), n.to_string()])
            .collect::<Vec<_>>(),
    );
    text.push_str(&format!(
        "minimum off duration for the full query set: {}s\n",
        report.min_duration_for_max.as_secs_f64()
    ));
    text
}

pub fn render_diff(change: &ChangeSet) -> String {
    let mut out = format!(
        "{}: {} -> {}\n",
        change.device, change.epoch_a, change.epoch_b
    );
    if change.is_empty() {
        out.push_str("no differences\n");
        return out;
    }
    for key in &change.added {
        out.push_str(&format!("added    {key}\n"));
    }
    for key in &change.removed {
        out.push_str(&format!("removed  {key}\n"));
    }
    for vc in &change.changed {
        out.push_str(&format!("changed  {} {} -> {}\n", vc.key, vc.before, vc.after));
    }
    out
}

pub fn render_summary(classifications: &[Classification]) -> String {
    let (total, blockable) = fleet_summary(classifications);
    format!("{total} destinations, {blockable} blockable")
}
