//! DNS control: the blocking mechanism.
//!
//! A resolver with per-device views. Overriding a name for a device makes
//! every later answer to that device exactly one A record, 127.0.0.1, TTL 0
//! — traffic for the name goes nowhere while other devices keep the real
//! answers. Hard-coded addresses, which DNS override cannot touch, get
//! address drop rules instead; those are enforced at flow delivery.

mod server;
pub mod wire;
mod zone;

pub use server::DnsServer;
pub use zone::{Zone, ZoneEntry, ZoneError};

use std::fmt;
use std::net::Ipv4Addr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::model::{normalize_name, NameError};
use crate::time::VirtualTime;
use wire::{Message, Rcode, Record, TYPE_A, TYPE_AAAA};

/// The loopback sinkhole every override answers with.
pub const SINKHOLE: Ipv4Addr = Ipv4Addr::new(127, 0, 0, 1);

#[derive(Debug, thiserror::Error)]
pub enum DnsCtlError {
    #[error(transparent)]
    Name(#[from] NameError),
    #[error("no rule with id {0}")]
    UnknownRule(RuleId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleId(u64);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule-{}", self.0)
    }
}

/// Which device a rule applies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RuleScope {
    All,
    #[serde(untagged)]
    Device(String),
}

impl RuleScope {
    fn applies_to(&self, device: Option<&str>) -> bool {
        match self {
            RuleScope::All => true,
            RuleScope::Device(id) => device == Some(id.as_str()),
        }
    }

    fn is_device_specific(&self) -> bool {
        matches!(self, RuleScope::Device(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    DnsOverride { name: String },
    IpDrop { address: Ipv4Addr },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRule {
    pub id: RuleId,
    pub scope: RuleScope,
    pub kind: RuleKind,
    pub created_at: VirtualTime,
}

/// Result of an A lookup through a device's view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup {
    /// An override matched: exactly one A record, 127.0.0.1, TTL 0.
    Override,
    /// Zone answer, addresses rotated by the round-robin cursor.
    Zone { addresses: Vec<Ipv4Addr>, ttl: u32 },
    NxDomain,
}

#[derive(Default)]
struct ResolverState {
    rules: Vec<BlockRule>,
    next_rule: u64,
    cursors: std::collections::HashMap<String, usize>,
}

/// Authoritative resolver with per-device override views.
///
/// Queries and rule mutations may come from any thread; a query observes
/// either the pre- or post-mutation rule set, never a blend.
pub struct Resolver {
    zone: Zone,
    seed: u64,
    state: Mutex<ResolverState>,
}

impl Resolver {
    pub fn new(zone: Zone, seed: u64) -> Resolver {
        Resolver { zone, seed, state: Mutex::new(ResolverState::default()) }
    }

    pub fn zone(&self) -> &Zone {
        &self.zone
    }

    /// Resolve an A question for `requester`'s view. Device-specific
    /// overrides win over ALL-scoped ones; both win over zone data.
    pub fn resolve_a(&self, name: &str, requester: Option<&str>) -> Result<Lookup, NameError> {
        let name = normalize_name(name)?;
        let mut state = self.state.lock().unwrap();
        if Self::override_matches(&state.rules, &name, requester) {
            return Ok(Lookup::Override);
        }
        match self.zone.get(&name) {
            Some(entry) => {
                let len = entry.addresses.len();
                let cursor = state
                    .cursors
                    .entry(name.clone())
                    .or_insert_with(|| (fnv1a(name.as_bytes()) ^ self.seed) as usize % len);
                let start = *cursor % len;
                *cursor = (start + 1) % len;
                let mut addresses = Vec::with_capacity(len);
                addresses.extend_from_slice(&entry.addresses[start..]);
                addresses.extend_from_slice(&entry.addresses[..start]);
                Ok(Lookup::Zone { addresses, ttl: entry.ttl })
            }
            None => Ok(Lookup::NxDomain),
        }
    }

    fn override_matches(rules: &[BlockRule], name: &str, requester: Option<&str>) -> bool {
        let matching = |device_specific: bool| {
            rules.iter().any(|rule| {
                rule.scope.is_device_specific() == device_specific
                    && rule.scope.applies_to(requester)
                    && matches!(&rule.kind, RuleKind::DnsOverride { name: n } if n == name)
            })
        };
        matching(true) || matching(false)
    }

    /// Whether flows from `device` to `address` are dropped.
    pub fn ip_dropped(&self, device: Option<&str>, address: Ipv4Addr) -> bool {
        let state = self.state.lock().unwrap();
        state.rules.iter().any(|rule| {
            rule.scope.applies_to(device)
                && matches!(rule.kind, RuleKind::IpDrop { address: a } if a == address)
        })
    }

    /// Whether `device`'s view of `name` is currently sinkholed.
    pub fn overridden(&self, device: Option<&str>, name: &str) -> bool {
        match normalize_name(name) {
            Ok(name) => {
                let state = self.state.lock().unwrap();
                Self::override_matches(&state.rules, &name, device)
            }
            Err(_) => false,
        }
    }

    /// Install a DNS override. Duplicate rules succeed idempotently,
    /// returning the existing id.
    pub fn set_block(
        &self,
        scope: RuleScope,
        name: &str,
        at: VirtualTime,
    ) -> Result<RuleId, DnsCtlError> {
        let name = normalize_name(name)?;
        self.install(scope, RuleKind::DnsOverride { name }, at)
    }

    /// Install an address drop rule for a hard-coded destination.
    pub fn set_ip_drop(&self, scope: RuleScope, address: Ipv4Addr, at: VirtualTime) -> RuleId {
        self.install(scope, RuleKind::IpDrop { address }, at)
            .expect("ip drop installation is infallible")
    }

    fn install(
        &self,
        scope: RuleScope,
        kind: RuleKind,
        at: VirtualTime,
    ) -> Result<RuleId, DnsCtlError> {
        let mut state = self.state.lock().unwrap();
        if let Some(existing) =
            state.rules.iter().find(|r| r.scope == scope && r.kind == kind)
        {
            return Ok(existing.id);
        }
        let id = RuleId(state.next_rule);
        state.next_rule += 1;
        state.rules.push(BlockRule { id, scope, kind, created_at: at });
        Ok(id)
    }

    /// Remove a rule (override or drop). Takes effect before the next query.
    pub fn clear_rule(&self, id: RuleId) -> Result<(), DnsCtlError> {
        let mut state = self.state.lock().unwrap();
        match state.rules.iter().position(|r| r.id == id) {
            Some(idx) => {
                state.rules.remove(idx);
                Ok(())
            }
            None => Err(DnsCtlError::UnknownRule(id)),
        }
    }

    pub fn rules(&self) -> Vec<BlockRule> {
        self.state.lock().unwrap().rules.clone()
    }

    pub fn active_rule_count(&self) -> usize {
        self.state.lock().unwrap().rules.len()
    }

    /// Answer one wire-format message through `requester`'s view.
    pub fn handle_query(&self, query: &Message, requester: Option<&str>) -> Message {
        if query.flags.response || query.flags.opcode != 0 || query.questions.len() != 1 {
            return Message::response_to(query, Rcode::FormErr, Vec::new());
        }
        let question = &query.questions[0];
        if question.qclass != wire::CLASS_IN {
            return Message::response_to(query, Rcode::FormErr, Vec::new());
        }
        let name = match normalize_name(&question.name) {
            Ok(name) => name,
            Err(_) => return Message::response_to(query, Rcode::FormErr, Vec::new()),
        };
        match question.qtype {
            TYPE_A => {}
            // IPv4-only lab: AAAA gets an empty authoritative NOERROR.
            TYPE_AAAA => return Message::response_to(query, Rcode::NoError, Vec::new()),
            _ => return Message::response_to(query, Rcode::NotImp, Vec::new()),
        }
        match self.resolve_a(&name, requester).expect("name validated above") {
            Lookup::Override => Message::response_to(
                query,
                Rcode::NoError,
                vec![Record::a(&question.name, SINKHOLE, 0)],
            ),
            Lookup::Zone { addresses, ttl } => Message::response_to(
                query,
                Rcode::NoError,
                addresses.iter().map(|a| Record::a(&question.name, *a, ttl)).collect(),
            ),
            Lookup::NxDomain => Message::response_to(query, Rcode::NxDomain, Vec::new()),
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
