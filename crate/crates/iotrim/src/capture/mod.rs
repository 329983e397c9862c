//! Flow and DNS capture, the tcpdump-split-by-MAC analog.
//!
//! The lab appends every DNS transaction and flow to a per-device log.
//! Capture windows bracket experiments; destination extraction joins flows
//! to the DNS answers observed in the same window and collapses them into
//! destination keys with per-key traffic accounting.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::dnsctl::SINKHOLE;
use crate::model::{DestinationKey, Transport};
use crate::time::VirtualTime;

#[derive(Debug, thiserror::Error)]
pub enum CaptureError {
    #[error("device {0:?} already has an open capture window")]
    DoubleOpen(String),
    #[error("no open window with id {0}")]
    UnknownWindow(WindowId),
    #[error("no traffic captured; share undefined over zero total bytes")]
    ZeroTotal,
    #[error("flow log line {line}: {source}")]
    Import { line: usize, source: serde_json::Error },
}

/// One observed flow. `delivered` is false when an address drop rule ate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRecord {
    pub device: String,
    pub dst_ip: Ipv4Addr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_port: Option<u16>,
    pub transport: Transport,
    pub bytes: u64,
    pub t_start: VirtualTime,
    pub t_end: VirtualTime,
    pub delivered: bool,
}

/// One DNS transaction as seen by the capture point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnsEvent {
    pub device: String,
    pub name: String,
    /// Answer addresses; `[127.0.0.1]` means the query was sinkholed.
    pub addresses: Vec<Ipv4Addr>,
    pub ttl: u32,
    pub rcode: String,
    pub at: VirtualTime,
}

impl DnsEvent {
    pub fn sinkholed(&self) -> bool {
        self.addresses == [SINKHOLE]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowId(pub u64);

impl fmt::Display for WindowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "win-{}", self.0)
    }
}

/// Everything one device did between an open and a close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureWindow {
    pub id: WindowId,
    pub device: String,
    pub opened_at: VirtualTime,
    pub closed_at: VirtualTime,
    pub dns_events: Vec<DnsEvent>,
    pub flows: Vec<FlowRecord>,
}

struct OpenWindow {
    id: WindowId,
    device: String,
    opened_at: VirtualTime,
    dns_from: usize,
    flows_from: usize,
}

/// Append-only per-device event log with window bookkeeping.
#[derive(Default)]
pub struct CaptureLog {
    dns: HashMap<String, Vec<DnsEvent>>,
    flows: HashMap<String, Vec<FlowRecord>>,
    open: Vec<OpenWindow>,
    next_window: u64,
}

impl CaptureLog {
    pub fn new() -> CaptureLog {
        CaptureLog::default()
    }

    pub fn record_dns(&mut self, event: DnsEvent) {
        self.dns.entry(event.device.clone()).or_default().push(event);
    }

    pub fn record_flow(&mut self, flow: FlowRecord) {
        self.flows.entry(flow.device.clone()).or_default().push(flow);
    }

    /// Start capturing for a device. At most one window per device.
    pub fn open_window(&mut self, device: &str, at: VirtualTime) -> Result<WindowId, CaptureError> {
        if self.open.iter().any(|w| w.device == device) {
            return Err(CaptureError::DoubleOpen(device.to_string()));
        }
        let id = WindowId(self.next_window);
        self.next_window += 1;
        self.open.push(OpenWindow {
            id,
            device: device.to_string(),
            opened_at: at,
            dns_from: self.dns.get(device).map_or(0, Vec::len),
            flows_from: self.flows.get(device).map_or(0, Vec::len),
        });
        Ok(id)
    }

    /// Stop capturing and hand back everything recorded in between.
    pub fn close_window(&mut self, id: WindowId, at: VirtualTime) -> Result<CaptureWindow, CaptureError> {
        let idx = self
            .open
            .iter()
            .position(|w| w.id == id)
            .ok_or(CaptureError::UnknownWindow(id))?;
        let open = self.open.remove(idx);
        Ok(CaptureWindow {
            id: open.id,
            device: open.device.clone(),
            opened_at: open.opened_at,
            closed_at: at,
            dns_events: self.dns.get(&open.device).map_or(&[][..], |v| &v[open.dns_from..]).to_vec(),
            flows: self.flows.get(&open.device).map_or(&[][..], |v| &v[open.flows_from..]).to_vec(),
        })
    }

    /// Full flow log for a device, windowed or not.
    pub fn flows_of(&self, device: &str) -> &[FlowRecord] {
        self.flows.get(device).map_or(&[], Vec::as_slice)
    }

    pub fn dns_events_of(&self, device: &str) -> &[DnsEvent] {
        self.dns.get(device).map_or(&[], Vec::as_slice)
    }
}

/// Per-key traffic stats within a window set. Only delivered flows count
/// toward `flows`/`bytes`; a key can appear with zeros when its name
/// resolved but nothing was delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KeyStats {
    pub flows: u64,
    pub bytes: u64,
    pub first_seen: VirtualTime,
}

/// Collapse a window into destination keys with stats, ordered by first
/// observation. Flows to the loopback sinkhole are the blocker at work, not
/// destinations, and are excluded.
pub fn extract_destinations(window: &CaptureWindow) -> Vec<(DestinationKey, KeyStats)> {
    extract_many(std::slice::from_ref(window))
}

/// Same as [`extract_destinations`] over several windows; DNS-to-flow joins
/// never cross a window boundary.
pub fn extract_many(windows: &[CaptureWindow]) -> Vec<(DestinationKey, KeyStats)> {
    let mut stats: BTreeMap<DestinationKey, KeyStats> = BTreeMap::new();
    for window in windows {
        for flow in &window.flows {
            if flow.dst_ip == SINKHOLE {
                continue;
            }
            let name = join_name(&window.dns_events, flow);
            let key = match DestinationKey::from_observation(
                name,
                flow.dst_ip,
                flow.transport,
                flow.dst_port,
            ) {
                Ok(key) => key,
                // A malformed name cannot come out of the resolver; skip
                // defensively rather than poison the whole extraction.
                Err(_) => continue,
            };
            let entry = stats.entry(key).or_insert(KeyStats {
                flows: 0,
                bytes: 0,
                first_seen: flow.t_start,
            });
            entry.first_seen = entry.first_seen.min(flow.t_start);
            if flow.delivered {
                entry.flows += 1;
                entry.bytes += flow.bytes;
            }
        }
    }
    let mut out: Vec<(DestinationKey, KeyStats)> = stats.into_iter().collect();
    out.sort_by(|a, b| a.1.first_seen.cmp(&b.1.first_seen).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Most recent non-sinkhole answer containing the flow's address, at or
/// before the flow started.
fn join_name<'a>(dns_events: &'a [DnsEvent], flow: &FlowRecord) -> Option<&'a str> {
    dns_events
        .iter()
        .filter(|e| {
            e.device == flow.device
                && e.at <= flow.t_start
                && !e.sinkholed()
                && e.addresses.contains(&flow.dst_ip)
        })
        .max_by_key(|e| e.at)
        .map(|e| e.name.as_str())
}

/// Total delivered, non-sinkhole bytes across windows.
pub fn total_bytes(windows: &[CaptureWindow]) -> u64 {
    windows
        .iter()
        .flat_map(|w| &w.flows)
        .filter(|f| f.delivered && f.dst_ip != SINKHOLE)
        .map(|f| f.bytes)
        .sum()
}

/// Percentage of the device's campaign traffic sent to `key`, pooled over
/// all repetitions (bytes to key over total bytes, not a mean of per-run
/// percentages).
pub fn traffic_share(windows: &[CaptureWindow], key: &DestinationKey) -> Result<f64, CaptureError> {
    let shares = traffic_shares(windows)?;
    Ok(shares.get(key).copied().unwrap_or(0.0))
}

/// Pooled share per destination key; values sum to 100 up to rounding.
pub fn traffic_shares(
    windows: &[CaptureWindow],
) -> Result<BTreeMap<DestinationKey, f64>, CaptureError> {
    let total = total_bytes(windows);
    if total == 0 {
        return Err(CaptureError::ZeroTotal);
    }
    Ok(extract_many(windows)
        .into_iter()
        .map(|(key, stats)| (key, stats.bytes as f64 * 100.0 / total as f64))
        .collect())
}

/// Write flows as newline-delimited JSON, one record per line.
pub fn export_flows<W: Write>(mut out: W, flows: &[FlowRecord]) -> std::io::Result<()> {
    for flow in flows {
        serde_json::to_writer(&mut out, flow)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a flow log exported by [`export_flows`]. Errors carry the 1-based
/// line number of the offending record.
pub fn import_flows<R: BufRead>(reader: R) -> Result<Vec<FlowRecord>, CaptureError> {
    let mut flows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CaptureError::Import {
            line: idx + 1,
            source: serde_json::Error::io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        flows.push(
            serde_json::from_str(&line)
                .map_err(|source| CaptureError::Import { line: idx + 1, source })?,
        );
    }
    Ok(flows)
}
