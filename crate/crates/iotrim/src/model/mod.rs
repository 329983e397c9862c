//! Domain types: destination identity, device behavior models, and the
//! classification verdicts a campaign produces.

mod classification;
mod destination;
mod psl;

pub use classification::{CellOutcome, CellVerdict, Classification, ClassificationEntry, DestStats, Summary, Verdict};
pub use destination::{normalize_name, DestName, DestinationKey, NameError, Transport};
pub use psl::second_level_label;

use std::collections::BTreeMap;
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::time::VirtualDuration;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("device model is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Name(#[from] NameError),
    #[error("bad MAC address {0:?}")]
    BadMac(String),
    #[error("device id must not be empty")]
    EmptyId,
    #[error("duplicate device id {0:?}")]
    DuplicateId(String),
    #[error("functionality {0:?}: periodic contacts need interval > 0")]
    PeriodicIntervalZero(String),
    #[error("boot contact {0}: periodic contacts need interval > 0")]
    BootPeriodicIntervalZero(usize),
    #[error("functionality {0:?} declares no modes")]
    NoModes(String),
    #[error("functionality {functionality:?} has contacts for undeclared mode {mode}")]
    UndeclaredMode { functionality: String, mode: Mode },
    #[error("functionality {functionality:?}, mode {mode}: critical destination {key} is neither a boot contact nor a functionality contact")]
    CriticalNotDeclared { functionality: String, mode: Mode, key: DestinationKey },
    #[error("functionality {functionality:?}: state field {field:?} is not in the device state surface")]
    UnknownStateField { functionality: String, field: String },
}

/// Probe placement for an experiment: companion on the same network as the
/// device, or on a remote one (forcing the cloud path).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Lan,
    Wan,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Lan, Mode::Wan];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Lan => write!(f, "LAN"),
            Mode::Wan => write!(f, "WAN"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Bulb,
    Camera,
    Hub,
    Other,
}

/// 48-bit hardware address used for flow attribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MacAddr(pub [u8; 6]);

impl FromStr for MacAddr {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut octets = [0u8; 6];
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 6 {
            return Err(ModelError::BadMac(s.to_string()));
        }
        for (slot, part) in octets.iter_mut().zip(parts) {
            *slot = u8::from_str_radix(part, 16).map_err(|_| ModelError::BadMac(s.to_string()))?;
        }
        Ok(MacAddr(octets))
    }
}

impl TryFrom<String> for MacAddr {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse().map_err(|e: ModelError| e.to_string())
    }
}

impl From<MacAddr> for String {
    fn from(mac: MacAddr) -> String {
        mac.to_string()
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.0;
        write!(f, "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", o[0], o[1], o[2], o[3], o[4], o[5])
    }
}

/// How often a contact fires while the device is powered on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    OneShot,
    Periodic { interval_s: VirtualDuration },
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence::OneShot
    }
}

/// One declared contact: destination template, cadence, and payload size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ip: Option<String>,
    pub transport: Transport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub port: Option<u16>,
    pub bytes_per_contact: u64,
    #[serde(default, skip_serializing_if = "is_default_cadence")]
    pub cadence: Cadence,
    /// Probe placements under which this contact fires. Absent means both.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<Mode>>,
    /// Minimum power-off duration before the contact reappears at boot
    /// (models state that survives short power cycles).
    #[serde(default, skip_serializing_if = "VirtualDuration::is_zero")]
    pub min_off_s: VirtualDuration,
}

fn is_default_cadence(c: &Cadence) -> bool {
    *c == Cadence::OneShot
}

impl ContactSpec {
    /// Destination key this contact resolves to. Models are validated at
    /// load, so this cannot fail afterwards.
    pub fn key(&self) -> DestinationKey {
        self.try_key().expect("contact validated at model load")
    }

    fn try_key(&self) -> Result<DestinationKey, ModelError> {
        match (&self.name, &self.ip) {
            (Some(name), None) => Ok(DestinationKey::named(name, self.transport, self.port)?),
            (None, Some(ip)) => {
                let addr: Ipv4Addr = ip
                    .parse()
                    .map_err(|_| NameError::MalformedName(ip.clone(), "not a dotted quad"))?;
                Ok(DestinationKey::literal(addr, self.transport, self.port)?)
            }
            (Some(name), Some(_)) => {
                Err(NameError::MalformedName(name.clone(), "contact has both name and ip").into())
            }
            (None, None) => {
                Err(NameError::MalformedName(String::new(), "contact has neither name nor ip").into())
            }
        }
    }

    pub fn active_in_mode(&self, mode: Mode) -> bool {
        match &self.modes {
            None => true,
            Some(modes) => modes.contains(&mode),
        }
    }

    /// Whether the contact fires at boot after being off for `off_duration`.
    pub fn active_at_boot(&self, mode: Mode, off_duration: VirtualDuration) -> bool {
        self.active_in_mode(mode) && off_duration >= self.min_off_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEffect {
    pub field: String,
    pub value: String,
}

/// A device functionality: what it contacts per mode, which of those
/// destinations are secretly required (ground truth), and the state change
/// visible on success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalitySpec {
    pub name: String,
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub contacts: BTreeMap<Mode, Vec<ContactSpec>>,
    #[serde(default)]
    pub critical: BTreeMap<Mode, Vec<DestinationKey>>,
    pub state_effect: StateEffect,
}

impl FunctionalitySpec {
    pub fn contacts_in(&self, mode: Mode) -> &[ContactSpec] {
        self.contacts.get(&mode).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn critical_in(&self, mode: Mode) -> &[DestinationKey] {
        self.critical.get(&mode).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Declarative behavior of one emulated device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceModel {
    pub id: String,
    pub label: String,
    pub category: Category,
    pub mac: MacAddr,
    /// State surface the companion probe can snapshot, with power-on defaults.
    #[serde(default)]
    pub state: BTreeMap<String, String>,
    #[serde(default)]
    pub boot_contacts: Vec<ContactSpec>,
    #[serde(default)]
    pub functionalities: Vec<FunctionalitySpec>,
}

impl DeviceModel {
    /// Parse and validate a device model file. Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let model: DeviceModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn functionality(&self, name: &str) -> Option<&FunctionalitySpec> {
        self.functionalities.iter().find(|f| f.name == name)
    }

    /// Boot contacts that fire in `mode` regardless of off duration.
    pub fn boot_contacts_in(&self, mode: Mode) -> impl Iterator<Item = &ContactSpec> {
        self.boot_contacts.iter().filter(move |c| c.active_in_mode(mode))
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        for (idx, contact) in self.boot_contacts.iter().enumerate() {
            contact.try_key()?;
            if let Cadence::Periodic { interval_s } = contact.cadence {
                if interval_s.is_zero() {
                    return Err(ModelError::BootPeriodicIntervalZero(idx));
                }
            }
        }
        for func in &self.functionalities {
            if func.modes.is_empty() {
                return Err(ModelError::NoModes(func.name.clone()));
            }
            for (&mode, contacts) in &func.contacts {
                if !func.modes.contains(&mode) {
                    return Err(ModelError::UndeclaredMode {
                        functionality: func.name.clone(),
                        mode,
                    });
                }
                for contact in contacts {
                    contact.try_key()?;
                    if let Cadence::Periodic { interval_s } = contact.cadence {
                        if interval_s.is_zero() {
                            return Err(ModelError::PeriodicIntervalZero(func.name.clone()));
                        }
                    }
                }
            }
            for (&mode, critical) in &func.critical {
                if !func.modes.contains(&mode) {
                    return Err(ModelError::UndeclaredMode {
                        functionality: func.name.clone(),
                        mode,
                    });
                }
                // Every critical destination must be declared somewhere the
                // device would actually contact it in that mode.
                for key in critical {
                    let declared = self
                        .boot_contacts
                        .iter()
                        .filter(|c| c.active_in_mode(mode))
                        .chain(func.contacts_in(mode))
                        .any(|c| &c.key() == key);
                    if !declared {
                        return Err(ModelError::CriticalNotDeclared {
                            functionality: func.name.clone(),
                            mode,
                            key: key.clone(),
                        });
                    }
                }
            }
            if !self.state.contains_key(&func.state_effect.field) {
                return Err(ModelError::UnknownStateField {
                    functionality: func.name.clone(),
                    field: func.state_effect.field.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Reject duplicate device ids within one lab configuration.
pub fn check_unique_ids(models: &[DeviceModel]) -> Result<(), ModelError> {
    let mut seen = std::collections::HashSet::new();
    for model in models {
        if !seen.insert(model.id.as_str()) {
            return Err(ModelError::DuplicateId(model.id.clone()));
        }
    }
    Ok(())
}
