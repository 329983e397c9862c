//! Zone data: the addresses the lab's DNS hands out when nothing is blocked.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::model::{normalize_name, NameError};

#[derive(Debug, thiserror::Error)]
pub enum ZoneError {
    #[error("zone file is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Name(#[from] NameError),
    #[error("zone entry {0:?} has no addresses")]
    EmptyEntry(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneEntry {
    pub addresses: Vec<Ipv4Addr>,
    pub ttl: u32,
}

/// Immutable name-to-address data backing the resolver.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Zone {
    entries: BTreeMap<String, ZoneEntry>,
}

impl Zone {
    pub fn new() -> Zone {
        Zone::default()
    }

    pub fn from_json(text: &str) -> Result<Zone, ZoneError> {
        let raw: BTreeMap<String, ZoneEntry> = serde_json::from_str(text)?;
        let mut zone = Zone::new();
        for (name, entry) in raw {
            zone.insert(&name, entry)?;
        }
        Ok(zone)
    }

    pub fn insert(&mut self, name: &str, entry: ZoneEntry) -> Result<(), ZoneError> {
        let name = normalize_name(name)?;
        if entry.addresses.is_empty() {
            return Err(ZoneError::EmptyEntry(name));
        }
        self.entries.insert(name, entry);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ZoneEntry> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes_names() {
        let zone = Zone::from_json(
            r#"{ "NTP.Org": { "addresses": ["1.2.3.4", "5.6.7.8"], "ttl": 300 } }"#,
        )
        .unwrap();
        let entry = zone.get("ntp.org").unwrap();
        assert_eq!(entry.addresses.len(), 2);
        assert_eq!(entry.ttl, 300);
    }

    #[test]
    fn rejects_empty_address_lists() {
        let err = Zone::from_json(r#"{ "x.example": { "addresses": [], "ttl": 60 } }"#);
        assert!(matches!(err, Err(ZoneError::EmptyEntry(_))));
    }
}
