//! Destination identity.
//!
//! A destination is keyed by `(name, transport, port)`. The same domain on
//! two different ports is two destinations; two addresses returned for the
//! same domain collapse into one. Flows to addresses that never appeared in
//! a DNS answer are keyed by the literal address instead.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Transport protocol of a destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Transport {
    Tcp,
    Udp,
    Icmp,
}

impl fmt::Display for Transport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transport::Tcp => write!(f, "TCP"),
            Transport::Udp => write!(f, "UDP"),
            Transport::Icmp => write!(f, "ICMP"),
        }
    }
}

/// Either a DNS name or, when no query preceded the flow, a literal address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DestName {
    Dns(String),
    Ip(Ipv4Addr),
}

impl fmt::Display for DestName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DestName::Dns(name) => write!(f, "{name}"),
            DestName::Ip(ip) => write!(f, "{ip}"),
        }
    }
}

/// Errors produced while forming destination keys or labels.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NameError {
    #[error("malformed DNS name {0:?}: {1}")]
    MalformedName(String, &'static str),
    #[error("ICMP destinations carry no port")]
    IcmpWithPort,
    #[error("{0} destinations require a port")]
    MissingPort(Transport),
    #[error("{0:?} is not a DNS name")]
    NotADnsName(String),
    #[error("{0:?} is itself a public suffix; no registrable domain")]
    NotRegistrable(String),
}

/// Canonical identity of a network destination.
///
/// Keys compare equal iff name, transport, and port are all equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "KeyRepr", into = "KeyRepr")]
pub struct DestinationKey {
    name: DestName,
    transport: Transport,
    port: Option<u16>,
}

impl DestinationKey {
    /// Key for a destination known by DNS name. The name is normalized to
    /// lowercase with no trailing dot before keying.
    pub fn named(name: &str, transport: Transport, port: Option<u16>) -> Result<Self, NameError> {
        let name = normalize_name(name)?;
        let port = check_port(transport, port)?;
        Ok(Self { name: DestName::Dns(name), transport, port })
    }

    /// Key for a hard-coded address that was never seen in a DNS answer.
    pub fn literal(ip: Ipv4Addr, transport: Transport, port: Option<u16>) -> Result<Self, NameError> {
        let port = check_port(transport, port)?;
        Ok(Self { name: DestName::Ip(ip), transport, port })
    }

    /// Canonical key for one observed contact: a resolved DNS name wins,
    /// otherwise the flow is keyed by its literal destination address.
    pub fn from_observation(
        dns_name: Option<&str>,
        dst_ip: Ipv4Addr,
        transport: Transport,
        port: Option<u16>,
    ) -> Result<Self, NameError> {
        match dns_name {
            Some(name) => Self::named(name, transport, port),
            None => Self::literal(dst_ip, transport, port),
        }
    }

    pub fn name(&self) -> &DestName {
        &self.name
    }

    /// DNS name, if this key carries one.
    pub fn dns_name(&self) -> Option<&str> {
        match &self.name {
            DestName::Dns(name) => Some(name),
            DestName::Ip(_) => None,
        }
    }

    /// Literal address, if this key is a hard-coded destination.
    pub fn ip_literal(&self) -> Option<Ipv4Addr> {
        match &self.name {
            DestName::Dns(_) => None,
            DestName::Ip(ip) => Some(*ip),
        }
    }

    pub fn transport(&self) -> Transport {
        self.transport
    }

    pub fn port(&self) -> Option<u16> {
        self.port
    }
}

impl fmt::Display for DestinationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.port {
            Some(port) => write!(f, "({}, {}, {})", self.name, self.transport, port),
            None => write!(f, "({}, {}, -)", self.name, self.transport),
        }
    }
}

fn check_port(transport: Transport, port: Option<u16>) -> Result<Option<u16>, NameError> {
    match (transport, port) {
        (Transport::Icmp, Some(_)) => Err(NameError::IcmpWithPort),
        (Transport::Icmp, None) => Ok(None),
        (t, None) => Err(NameError::MissingPort(t)),
        (_, Some(p)) => Ok(Some(p)),
    }
}

/// Lowercase, strip a single trailing dot, and validate label structure.
pub fn normalize_name(name: &str) -> Result<String, NameError> {
    let lowered = name.to_ascii_lowercase();
    let trimmed = lowered.strip_suffix('.').unwrap_or(&lowered);
    if trimmed.is_empty() {
        return Err(NameError::MalformedName(name.to_string(), "empty name"));
    }
    if trimmed.len() > 253 {
        return Err(NameError::MalformedName(name.to_string(), "name longer than 253 octets"));
    }
    for label in trimmed.split('.') {
        if label.is_empty() {
            return Err(NameError::MalformedName(name.to_string(), "empty label"));
        }
        if label.len() > 63 {
            return Err(NameError::MalformedName(name.to_string(), "label longer than 63 octets"));
        }
        if !label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_') {
            return Err(NameError::MalformedName(name.to_string(), "invalid character in label"));
        }
    }
    Ok(trimmed.to_string())
}

/// Wire shape used for ledgers and fixtures: exactly one of `name`/`ip`.
#[derive(Serialize, Deserialize)]
struct KeyRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ip: Option<String>,
    transport: Transport,
    #[serde(skip_serializing_if = "Option::is_none")]
    port: Option<u16>,
}

impl TryFrom<KeyRepr> for DestinationKey {
    type Error = String;

    fn try_from(repr: KeyRepr) -> Result<Self, Self::Error> {
        match (&repr.name, &repr.ip) {
            (Some(name), None) => DestinationKey::named(name, repr.transport, repr.port),
            (None, Some(ip)) => {
                let addr = Ipv4Addr::from_str(ip).map_err(|e| format!("bad ip {ip:?}: {e}"))?;
                DestinationKey::literal(addr, repr.transport, repr.port)
            }
            _ => return Err("destination needs exactly one of `name` or `ip`".to_string()),
        }
        .map_err(|e| e.to_string())
    }
}

impl From<DestinationKey> for KeyRepr {
    fn from(key: DestinationKey) -> Self {
        let (name, ip) = match key.name {
            DestName::Dns(name) => (Some(name), None),
            DestName::Ip(addr) => (None, Some(addr.to_string())),
        };
        KeyRepr { name, ip, transport: key.transport, port: key.port }
    }
}
