//! The emulated lab: devices, power control, and the event loop.
//!
//! One lab owns all of its device state plus a resolver and a capture log;
//! commands are serialized through it. Devices are pure functions of their
//! model and the active rules: a power-on replays the model's boot
//! contacts (DNS query, then one flow per resolution), a functionality
//! trigger replays that functionality's contacts and applies its state
//! effect iff every ground-truth critical destination is reachable. That
//! biconditional is what a campaign has to rediscover from the outside.

mod clock;

pub use clock::{VirtualClock, DEFAULT_SCALE};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::capture::{CaptureError, CaptureLog, CaptureWindow, DnsEvent, FlowRecord, WindowId};
use crate::dnsctl::{DnsCtlError, Lookup, Resolver, RuleId, RuleScope, Zone, SINKHOLE};
use crate::model::{
    check_unique_ids, Cadence, ContactSpec, DestName, DestinationKey, DeviceModel, Mode,
    ModelError, Transport,
};
use crate::time::{VirtualDuration, VirtualTime};

/// Virtual time from trigger to the device's functionality-complete signal.
pub const TRIGGER_COMPLETE_AFTER: VirtualDuration = VirtualDuration::from_secs(2);
/// Nominal duration of one emitted flow.
const FLOW_DURATION: VirtualDuration = VirtualDuration::from_secs(1);
/// Consecutive contacts of one batch fire this far apart, so first
/// observation times reflect declaration order.
const CONTACT_STAGGER: VirtualDuration = VirtualDuration::from_millis(10);
/// Reserved state field updated from NTP reachability at boot.
const CLOCK_FIELD: &str = "clock";

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("unknown device {0:?}")]
    UnknownDevice(String),
    #[error("device {0:?} is powered off")]
    DeviceOff(String),
    #[error("device {device:?} has no functionality {functionality:?}")]
    UnknownFunctionality { device: String, functionality: String },
    #[error("functionality {functionality:?} of {device:?} is not declared for {mode}")]
    ModeNotDeclared { device: String, functionality: String, mode: Mode },
    #[error("device {device:?} has no state field {field:?}")]
    UnknownStateField { device: String, field: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error(transparent)]
    Dns(#[from] DnsCtlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Power {
    On,
    Off,
}

/// Companion-probe view of device state at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub device: String,
    pub fields: BTreeMap<String, String>,
    pub taken_at: VirtualTime,
}

/// Handle for one triggered functionality run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionToken(u64);

/// Test-harness fault injection. Trigger indices are 1-based and count
/// every trigger of the device across the lab's lifetime.
#[derive(Debug, Clone)]
pub enum Fault {
    /// Functionality triggers stop succeeding after this many triggers.
    BreakAfterTriggers(u64),
    /// Triggers with index in this inclusive range fail.
    BreakTriggerRange(u64, u64),
    /// The functionality-complete signal stops arriving after this many
    /// triggers (the companion probe then times out).
    HangAfterTriggers(u64),
}

struct Device {
    model: DeviceModel,
    power: Power,
    state: BTreeMap<String, String>,
    network_mode: Mode,
    // Bumped on every power transition; stale scheduled events check it.
    epoch: u64,
    off_since: Option<VirtualTime>,
    last_off_duration: VirtualDuration,
    dns_cache: HashMap<String, CachedAnswer>,
    trigger_count: u64,
    faults: Vec<Fault>,
}

struct CachedAnswer {
    addresses: Vec<std::net::Ipv4Addr>,
    expires_at: VirtualTime,
}

#[derive(Debug)]
enum Event {
    PowerOn { device: String, epoch: u64 },
    Contact { device: String, epoch: u64, contact: ContactSpec },
    Complete { token: u64 },
}

struct Scheduled {
    at: VirtualTime,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for earliest-first.
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

pub struct LabBuilder {
    zone: Zone,
    models: Vec<DeviceModel>,
    seed: u64,
    scale: f64,
}

impl LabBuilder {
    pub fn zone(mut self, zone: Zone) -> Self {
        self.zone = zone;
        self
    }

    pub fn device(mut self, model: DeviceModel) -> Self {
        self.models.push(model);
        self
    }

    pub fn devices(mut self, models: impl IntoIterator<Item = DeviceModel>) -> Self {
        self.models.extend(models);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Real seconds slept per virtual second; zero runs instantly.
    pub fn scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn build(self) -> Result<Lab, LabError> {
        check_unique_ids(&self.models)?;
        let devices = self
            .models
            .into_iter()
            .map(|model| {
                let device = Device {
                    state: model.state.clone(),
                    power: Power::On,
                    network_mode: Mode::Wan,
                    epoch: 0,
                    off_since: None,
                    last_off_duration: VirtualDuration::ZERO,
                    dns_cache: HashMap::new(),
                    trigger_count: 0,
                    faults: Vec::new(),
                    model,
                };
                (device.model.id.clone(), device)
            })
            .collect();
        Ok(Lab {
            clock: VirtualClock::new(self.scale),
            resolver: Arc::new(Resolver::new(self.zone, self.seed)),
            capture: CaptureLog::new(),
            devices,
            queue: BinaryHeap::new(),
            seq: 0,
            next_token: 0,
        })
    }
}

/// One lab instance: devices on a shared virtual clock behind one resolver.
pub struct Lab {
    clock: VirtualClock,
    resolver: Arc<Resolver>,
    capture: CaptureLog,
    devices: BTreeMap<String, Device>,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    next_token: u64,
}

impl Lab {
    pub fn builder() -> LabBuilder {
        LabBuilder { zone: Zone::new(), models: Vec::new(), seed: 0, scale: DEFAULT_SCALE }
    }

    pub fn now(&self) -> VirtualTime {
        self.clock.now()
    }

    pub fn resolver(&self) -> &Arc<Resolver> {
        &self.resolver
    }

    pub fn device_ids(&self) -> impl Iterator<Item = &str> {
        self.devices.keys().map(String::as_str)
    }

    pub fn model_of(&self, device: &str) -> Result<&DeviceModel, LabError> {
        Ok(&self.device(device)?.model)
    }

    pub fn power_is_on(&self, device: &str) -> Result<bool, LabError> {
        Ok(self.device(device)?.power == Power::On)
    }

    pub fn network_mode(&self, device: &str) -> Result<Mode, LabError> {
        Ok(self.device(device)?.network_mode)
    }

    /// Place the companion probe on the device's LAN or on a remote network.
    pub fn set_network_mode(&mut self, device: &str, mode: Mode) -> Result<(), LabError> {
        self.device_mut(device)?.network_mode = mode;
        Ok(())
    }

    fn device(&self, id: &str) -> Result<&Device, LabError> {
        self.devices.get(id).ok_or_else(|| LabError::UnknownDevice(id.to_string()))
    }

    fn device_mut(&mut self, id: &str) -> Result<&mut Device, LabError> {
        self.devices.get_mut(id).ok_or_else(|| LabError::UnknownDevice(id.to_string()))
    }

    fn schedule(&mut self, at: VirtualTime, event: Event) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Scheduled { at, seq, event });
    }

    /// Cut power for `duration`. The device emits nothing and holds no
    /// state while off; on expiry it powers up and replays its boot
    /// contacts (during whatever advance crosses that instant).
    pub fn power_off(&mut self, device: &str, duration: VirtualDuration) -> Result<(), LabError> {
        let now = self.clock.now();
        let dev = self.device_mut(device)?;
        dev.power = Power::Off;
        dev.state.clear();
        dev.dns_cache.clear();
        dev.epoch += 1;
        if dev.off_since.is_none() {
            dev.off_since = Some(now);
        }
        let epoch = dev.epoch;
        self.schedule(now + duration, Event::PowerOn { device: device.to_string(), epoch });
        Ok(())
    }

    /// Process every scheduled event up to and including `now + d`.
    pub fn advance(&mut self, d: VirtualDuration) {
        let target = self.clock.now() + d;
        self.run_until(target);
    }

    fn run_until(&mut self, target: VirtualTime) {
        loop {
            match self.queue.peek() {
                Some(next) if next.at <= target => {}
                _ => break,
            }
            let ev = self.queue.pop().unwrap();
            self.clock.advance_to(ev.at);
            self.dispatch(ev.event);
        }
        self.clock.advance_to(target);
    }

    /// Run until the given trigger signals completion. Returns false if the
    /// signal does not arrive within `timeout`.
    pub fn advance_until_complete(&mut self, token: CompletionToken, timeout: VirtualDuration) -> bool {
        let deadline = self.clock.now() + timeout;
        loop {
            match self.queue.peek() {
                Some(next) if next.at <= deadline => {}
                _ => break,
            }
            let ev = self.queue.pop().unwrap();
            self.clock.advance_to(ev.at);
            let completed = matches!(ev.event, Event::Complete { token: t } if t == token.0);
            self.dispatch(ev.event);
            if completed {
                return true;
            }
        }
        self.clock.advance_to(deadline);
        false
    }

    fn dispatch(&mut self, event: Event) {
        match event {
            Event::PowerOn { device, epoch } => self.handle_power_on(&device, epoch),
            Event::Contact { device, epoch, contact } => {
                let current = match self.devices.get(&device) {
                    Some(dev) => (dev.epoch, dev.power),
                    None => return,
                };
                if current.0 == epoch && current.1 == Power::On {
                    self.run_contact(&device, &contact);
                }
            }
            Event::Complete { .. } => {}
        }
    }

    /// Queue a batch of contacts at staggered instants from now.
    fn schedule_contacts(&mut self, device: &str, epoch: u64, contacts: &[ContactSpec]) {
        let now = self.clock.now();
        for (idx, contact) in contacts.iter().enumerate() {
            let at = now + VirtualDuration::from_millis(CONTACT_STAGGER.as_millis() * idx as u64);
            self.schedule(
                at,
                Event::Contact {
                    device: device.to_string(),
                    epoch,
                    contact: contact.clone(),
                },
            );
        }
    }

    fn handle_power_on(&mut self, device: &str, epoch: u64) {
        let now = self.clock.now();
        let (off_duration, boot): (VirtualDuration, Vec<ContactSpec>) = {
            let dev = match self.devices.get(device) {
                Some(dev) => dev,
                None => return,
            };
            if dev.epoch != epoch || dev.power == Power::On {
                return; // superseded by a later power transition
            }
            let off = now - dev.off_since.unwrap_or(now);
            let mode = dev.network_mode;
            let boot = dev
                .model
                .boot_contacts
                .iter()
                .filter(|c| c.active_at_boot(mode, off))
                .cloned()
                .collect();
            (off, boot)
        };

        // Clock state reflects whether NTP-class boot contacts can sync.
        let ntp_synced = boot
            .iter()
            .filter(|c| c.transport == Transport::Udp && c.port == Some(123))
            .all(|c| self.contact_reachable(device, c));
        let has_ntp = boot
            .iter()
            .any(|c| c.transport == Transport::Udp && c.port == Some(123));

        let dev = self.devices.get_mut(device).unwrap();
        dev.power = Power::On;
        dev.state = dev.model.state.clone();
        dev.last_off_duration = off_duration;
        dev.off_since = None;
        if has_ntp && dev.model.state.contains_key(CLOCK_FIELD) {
            let value = if ntp_synced { "synced" } else { "drift" };
            dev.state.insert(CLOCK_FIELD.to_string(), value.to_string());
        }

        self.schedule_contacts(device, epoch, &boot);
    }

    /// One contact: DNS resolution through the device's view (unless the
    /// answer is still cached within TTL), then a flow to the first
    /// resolved address. Address drop rules mark the flow undelivered.
    fn run_contact(&mut self, device: &str, contact: &ContactSpec) {
        let now = self.clock.now();
        let dst_ip = match &contact.name {
            Some(name) => {
                let cached = {
                    let dev = self.devices.get(device).unwrap();
                    dev.dns_cache
                        .get(name)
                        .filter(|c| c.expires_at > now)
                        .map(|c| c.addresses.clone())
                };
                let addresses = match cached {
                    Some(addresses) => addresses,
                    None => {
                        let (addresses, ttl, rcode) =
                            match self.resolver.resolve_a(name, Some(device)) {
                                Ok(Lookup::Override) => (vec![SINKHOLE], 0, "NOERROR"),
                                Ok(Lookup::Zone { addresses, ttl }) => {
                                    (addresses, ttl, "NOERROR")
                                }
                                Ok(Lookup::NxDomain) => (Vec::new(), 0, "NXDOMAIN"),
                                // Names are validated at model load.
                                Err(_) => (Vec::new(), 0, "FORMERR"),
                            };
                        self.capture.record_dns(DnsEvent {
                            device: device.to_string(),
                            name: name.clone(),
                            addresses: addresses.clone(),
                            ttl,
                            rcode: rcode.to_string(),
                            at: now,
                        });
                        let dev = self.devices.get_mut(device).unwrap();
                        dev.dns_cache.insert(
                            name.clone(),
                            CachedAnswer {
                                addresses: addresses.clone(),
                                expires_at: now + VirtualDuration::from_secs(ttl as u64),
                            },
                        );
                        addresses
                    }
                };
                match addresses.first() {
                    Some(ip) => *ip,
                    None => return, // NXDOMAIN: nothing to contact
                }
            }
            None => contact
                .ip
                .as_ref()
                .and_then(|s| s.parse().ok())
                .expect("contact validated at model load"),
        };

        let delivered = dst_ip == SINKHOLE || !self.resolver.ip_dropped(Some(device), dst_ip);
        self.capture.record_flow(FlowRecord {
            device: device.to_string(),
            dst_ip,
            dst_port: contact.port,
            transport: contact.transport,
            bytes: contact.bytes_per_contact,
            t_start: now,
            t_end: now + FLOW_DURATION,
            delivered,
        });

        if let Cadence::Periodic { interval_s } = contact.cadence {
            let epoch = self.devices.get(device).unwrap().epoch;
            self.schedule(
                now + interval_s,
                Event::Contact {
                    device: device.to_string(),
                    epoch,
                    contact: contact.clone(),
                },
            );
        }
    }

    /// Trigger a functionality through the companion probe. Contacts are
    /// attempted in order; the state effect applies iff every critical
    /// destination for (functionality, mode) is currently reachable. The
    /// returned token completes a little later on the event queue.
    pub fn trigger_functionality(
        &mut self,
        device: &str,
        functionality: &str,
        mode: Mode,
    ) -> Result<CompletionToken, LabError> {
        let func = {
            let dev = self.device(device)?;
            if dev.power == Power::Off {
                return Err(LabError::DeviceOff(device.to_string()));
            }
            let func = dev.model.functionality(functionality).ok_or_else(|| {
                LabError::UnknownFunctionality {
                    device: device.to_string(),
                    functionality: functionality.to_string(),
                }
            })?;
            if !func.modes.contains(&mode) {
                return Err(LabError::ModeNotDeclared {
                    device: device.to_string(),
                    functionality: functionality.to_string(),
                    mode,
                });
            }
            func.clone()
        };

        let (broken, hang) = {
            let dev = self.device_mut(device)?;
            dev.network_mode = mode;
            dev.trigger_count += 1;
            let index = dev.trigger_count;
            let broken = dev.faults.iter().any(|f| match f {
                Fault::BreakAfterTriggers(n) => index > *n,
                Fault::BreakTriggerRange(from, to) => index >= *from && index <= *to,
                Fault::HangAfterTriggers(_) => false,
            });
            let hang = dev
                .faults
                .iter()
                .any(|f| matches!(f, Fault::HangAfterTriggers(n) if index > *n));
            (broken, hang)
        };

        let epoch = self.device(device)?.epoch;
        self.schedule_contacts(device, epoch, func.contacts_in(mode));

        let success = !broken
            && func
                .critical_in(mode)
                .iter()
                .all(|key| self.reachable(device, key).unwrap_or(false));
        if success {
            let effect = &func.state_effect;
            let dev = self.devices.get_mut(device).unwrap();
            dev.state.insert(effect.field.clone(), effect.value.clone());
        }

        let token = self.next_token;
        self.next_token += 1;
        let now = self.clock.now();
        if !hang {
            self.schedule(now + TRIGGER_COMPLETE_AFTER, Event::Complete { token });
        }
        Ok(CompletionToken(token))
    }

    /// Crop of the device state (full state when `fields` is None).
    pub fn snapshot(&self, device: &str, fields: Option<&[String]>) -> Result<StateSnapshot, LabError> {
        let dev = self.device(device)?;
        if dev.power == Power::Off {
            return Err(LabError::DeviceOff(device.to_string()));
        }
        let fields = match fields {
            None => dev.state.clone(),
            Some(wanted) => {
                let mut out = BTreeMap::new();
                for field in wanted {
                    match dev.state.get(field) {
                        Some(value) => {
                            out.insert(field.clone(), value.clone());
                        }
                        None => {
                            return Err(LabError::UnknownStateField {
                                device: device.to_string(),
                                field: field.clone(),
                            })
                        }
                    }
                }
                out
            }
        };
        Ok(StateSnapshot { device: device.to_string(), fields, taken_at: self.clock.now() })
    }

    /// Ground-truth reachability oracle for harnesses: would a contact from
    /// `device` to `destination` currently succeed? Never consulted by the
    /// orchestrator.
    pub fn reachable(&self, device: &str, destination: &DestinationKey) -> Result<bool, LabError> {
        self.device(device)?;
        Ok(match destination.name() {
            DestName::Dns(name) => {
                if self.resolver.overridden(Some(device), name) {
                    false
                } else {
                    match self.resolver.zone().get(name) {
                        Some(entry) => entry
                            .addresses
                            .iter()
                            .all(|addr| !self.resolver.ip_dropped(Some(device), *addr)),
                        None => false,
                    }
                }
            }
            DestName::Ip(addr) => !self.resolver.ip_dropped(Some(device), *addr),
        })
    }

    fn contact_reachable(&self, device: &str, contact: &ContactSpec) -> bool {
        self.reachable(device, &contact.key()).unwrap_or(false)
    }

    // ---- blocking rules (timestamped on the lab clock) ----

    pub fn set_block(&mut self, scope: RuleScope, name: &str) -> Result<RuleId, LabError> {
        Ok(self.resolver.set_block(scope, name, self.clock.now())?)
    }

    pub fn set_ip_drop(&mut self, scope: RuleScope, address: std::net::Ipv4Addr) -> RuleId {
        self.resolver.set_ip_drop(scope, address, self.clock.now())
    }

    pub fn clear_rule(&mut self, id: RuleId) -> Result<(), LabError> {
        Ok(self.resolver.clear_rule(id)?)
    }

    /// Block a destination key the way the orchestrator does: DNS override
    /// for named keys, address drop for hard-coded literals.
    pub fn block_key(&mut self, device: &str, key: &DestinationKey) -> Result<RuleId, LabError> {
        let scope = RuleScope::Device(device.to_string());
        match key.name() {
            DestName::Dns(name) => self.set_block(scope, name),
            DestName::Ip(addr) => Ok(self.set_ip_drop(scope, *addr)),
        }
    }

    // ---- capture ----

    pub fn open_window(&mut self, device: &str) -> Result<WindowId, LabError> {
        self.device(device)?;
        Ok(self.capture.open_window(device, self.clock.now())?)
    }

    pub fn close_window(&mut self, id: WindowId) -> Result<CaptureWindow, LabError> {
        Ok(self.capture.close_window(id, self.clock.now())?)
    }

    pub fn flows_of(&self, device: &str) -> &[FlowRecord] {
        self.capture.flows_of(device)
    }

    pub fn dns_events_of(&self, device: &str) -> &[DnsEvent] {
        self.capture.dns_events_of(device)
    }

    // ---- test harness hooks ----

    pub fn inject_fault(&mut self, device: &str, fault: Fault) -> Result<(), LabError> {
        self.device_mut(device)?.faults.push(fault);
        Ok(())
    }

    pub fn trigger_count(&self, device: &str) -> Result<u64, LabError> {
        Ok(self.device(device)?.trigger_count)
    }
}
