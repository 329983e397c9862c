//! iotrim: a desk-scale lab that discovers which network destinations an
//! IoT device actually needs.
//!
//! Emulated devices contact destinations through a wire-faithful DNS layer;
//! an orchestrator powers them off and on, blocks one destination at a
//! time by overriding its DNS answer with loopback, validates device
//! functionality against a clean baseline, and classifies every destination
//! as blockable or not. See the guide under `book/` for a walkthrough.

pub mod model;
pub mod netlab;
pub mod orchestrator;
pub mod analysis;
#[cfg(doctest)]
mod book;
pub mod bundled;
pub mod capture;
pub mod cli;
pub mod dnsctl;
pub mod testkit;
pub mod time;

pub use model::{Classification, DestinationKey, DeviceModel, Mode, Transport, Verdict};
pub use time::{VirtualDuration, VirtualTime};
