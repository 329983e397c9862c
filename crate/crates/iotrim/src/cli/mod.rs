//! Command implementations behind the `iotrim` binary. Kept in the library
//! so the acceptance suite can drive them directly.

mod ledger;

pub use ledger::{list_epochs, read_classifications, read_experiments};

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    self,
    tables::{self, DeviceMeta},
    OwnershipTable,
};
use crate::dnsctl::Zone;
use crate::model::{Classification, DeviceModel};
use crate::netlab::Lab;
use crate::orchestrator::{CampaignConfig, CampaignError, Orchestrator};

/// Exit status mapping: usage 1, campaign abort 2, I/O 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("campaign aborted: {0}")]
    Abort(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Abort(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    fn io(path: &Path, err: impl fmt::Display) -> CliError {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    fn json(path: &Path, err: serde_json::Error) -> CliError {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }
}

/// Lab configuration file: fixture paths plus run knobs. Relative paths
/// resolve against the config file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfigFile {
    pub devices: Vec<PathBuf>,
    pub zone: Option<PathBuf>,
    pub ownership: Option<PathBuf>,
    pub campaign: Option<PathBuf>,
    pub scale: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

/// Everything loaded and validated before any experiment starts.
pub struct LoadedLab {
    pub models: Vec<DeviceModel>,
    pub zone: Zone,
    pub ownership: OwnershipTable,
    pub campaign: CampaignConfig,
    pub scale: f64,
    pub output_dir: PathBuf,
}

impl LoadedLab {
    /// The bundled three-device lab.
    pub fn bundled() -> LoadedLab {
        LoadedLab {
            models: crate::bundled::all_devices(),
            zone: crate::bundled::zone(),
            ownership: OwnershipTable::bundled(),
            campaign: CampaignConfig::default(),
            scale: crate::netlab::DEFAULT_SCALE,
            output_dir: PathBuf::from("iotrim-out"),
        }
    }

    pub fn from_config_file(path: &Path) -> Result<LoadedLab, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: LabConfigFile =
            serde_json::from_str(&text).map_err(|e| CliError::json(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };

        if file.devices.is_empty() {
            return Err(CliError::Usage(format!(
                "{}: config lists no device model files",
                path.display()
            )));
        }
        let mut models = Vec::new();
        for dev in &file.devices {
            let dev = resolve(dev);
            let text = fs::read_to_string(&dev).map_err(|e| CliError::io(&dev, e))?;
            models.push(DeviceModel::from_json(&text).map_err(|e| CliError::io(&dev, e))?);
        }
        let zone = match &file.zone {
            Some(p) => {
                let p = resolve(p);
                let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                Zone::from_json(&text).map_err(|e| CliError::io(&p, e))?
            }
            None => crate::bundled::zone(),
        };
        let ownership = match &file.ownership {
            Some(p) => {
                let p = resolve(p);
                let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                OwnershipTable::from_json(&text, &p.display().to_string())
                    .map_err(|e| CliError::io(&p, e))?
            }
            None => OwnershipTable::bundled(),
        };
        let campaign = match &file.campaign {
            Some(p) => {
                let p = resolve(p);
                let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                CampaignConfig::from_json(&text).map_err(|e| CliError::io(&p, e))?
            }
            None => CampaignConfig::default(),
        };
        Ok(LoadedLab {
            models,
            zone,
            ownership,
            campaign,
            scale: file.scale.unwrap_or(crate::netlab::DEFAULT_SCALE),
            output_dir: file.output_dir.map(|p| resolve(&p)).unwrap_or_else(|| "iotrim-out".into()),
        })
    }

    fn model(&self, device: &str) -> Result<&DeviceModel, CliError> {
        self.models.iter().find(|m| m.id == device).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown device {device:?}; configured: {}",
                self.models.iter().map(|m| m.id.as_str()).collect::<Vec<_>>().join(", ")
            ))
        })
    }

    fn build_lab(&self, model: DeviceModel, seed: u64) -> Result<Lab, CliError> {
        Lab::builder()
            .zone(self.zone.clone())
            .device(model)
            .seed(seed)
            .scale(self.scale)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Run the DNS-behavior sweep for one device and print the table.
pub fn cmd_sweep(
    lab: &LoadedLab,
    device: &str,
    seed: u64,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let model = lab.model(device)?.clone();
    let sim = lab.build_lab(model, seed)?;
    let mut orch = Orchestrator::new(sim, lab.campaign.clone());
    let report = orch
        .dns_behavior_sweep(device)
        .map_err(|e| CliError::Abort(e.to_string()))?;
    if json {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() })?;
        writeln!(out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    } else {
        write!(out, "{}", tables::render_sweep(&report))
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    }
    Ok(())
}

pub struct TrimOptions {
    pub devices: Vec<String>,
    pub all: bool,
    pub epochs: u32,
    pub seed: u64,
    pub json: bool,
}

/// Run full campaigns, persist ledgers, and print the three tables plus
/// the fleet summary. Alerts stream to stderr as they fire.
pub fn cmd_trim(
    lab: &LoadedLab,
    options: &TrimOptions,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let selected: Vec<DeviceModel> = if options.all {
        lab.models.clone()
    } else if options.devices.is_empty() {
        return Err(CliError::Usage("trim needs --all or at least one --device".into()));
    } else {
        options
            .devices
            .iter()
            .map(|id| lab.model(id).cloned())
            .collect::<Result<Vec<_>, _>>()?
    };
    if selected.is_empty() {
        return Err(CliError::Usage("no devices configured".into()));
    }
    let epochs = options.epochs.max(1);

    let meta: BTreeMap<String, DeviceMeta> =
        selected.iter().map(|m| (m.id.clone(), tables::device_meta(m))).collect();

    fs::create_dir_all(&lab.output_dir).map_err(|e| CliError::io(&lab.output_dir, e))?;
    let alerts_path = lab.output_dir.join("alerts.log");
    let alerts_file = std::sync::Mutex::new(
        fs::File::create(&alerts_path).map_err(|e| CliError::io(&alerts_path, e))?,
    );

    let mut epoch_classifications: Vec<Vec<Classification>> = Vec::new();
    for epoch_idx in 0..epochs {
        let epoch = format!("epoch-{epoch_idx}");
        // One campaign per device, each on its own lab, in parallel.
        let results: Vec<Result<(String, CampaignOutputs), CliError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = selected
                .iter()
                .map(|model| {
                    let model = model.clone();
                    let epoch = epoch.clone();
                    let alerts_file = &alerts_file;
                    scope.spawn(move || run_one_campaign(lab, model, &epoch, options.seed, alerts_file))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("campaign thread panicked")).collect()
        });

        let dir = ledger::epoch_dir(&lab.output_dir, &epoch);
        let mut classifications = Vec::new();
        let mut abort: Option<CliError> = None;
        for result in results {
            match result {
                Ok((device, outputs)) => {
                    ledger::write_device_ledger(
                        &dir,
                        &ledger::DeviceLedger {
                            device: &device,
                            records: &outputs.records,
                            flows: &outputs.flows,
                            classification: &outputs.classification,
                        },
                    )?;
                    classifications.push(outputs.classification);
                }
                Err(e) => abort = Some(abort.unwrap_or(e)),
            }
        }
        ledger::write_meta(&dir, &meta)?;
        if let Some(e) = abort {
            return Err(e);
        }
        write_reports(lab, &epoch, &classifications, &meta)?;
        epoch_classifications.push(classifications);
    }

    // Print the final epoch's tables and the fleet summary.
    let last = epoch_classifications.last().expect("at least one epoch");
    print_tables(last, &meta, options.json, out)?;

    // Longitudinal mode: diff first and last epochs per device.
    if epochs > 1 {
        let first = &epoch_classifications[0];
        for (a, b) in first.iter().zip(last.iter()) {
            let diff = analysis::longitudinal_diff(a, b)
                .map_err(|e| CliError::Abort(e.to_string()))?;
            write!(out, "{}", tables::render_diff(&diff))
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}

struct CampaignOutputs {
    records: Vec<crate::orchestrator::ExperimentRecord>,
    flows: Vec<crate::capture::FlowRecord>,
    classification: Classification,
}

fn run_one_campaign(
    lab: &LoadedLab,
    model: DeviceModel,
    epoch: &str,
    seed: u64,
    alerts_file: &std::sync::Mutex<fs::File>,
) -> Result<(String, CampaignOutputs), CliError> {
    let device = model.id.clone();
    let sim = lab.build_lab(model, seed)?;
    let mut orch = Orchestrator::new(sim, lab.campaign.clone()).with_epoch(epoch);
    {
        let epoch = epoch.to_string();
        orch.on_alert(Box::new(move |alert| {
            let line = format!(
                "[{epoch}] t={} device={} control#{} {}",
                alert.at, alert.device, alert.control_index, alert.message
            );
            eprintln!("ALERT {line}");
        }));
    }
    let outcome = match orch.run_campaign(&device) {
        Ok(outcome) => outcome,
        Err(CampaignError::DeviceBroken { device, reason, alert }) => {
            if let Some(alert) = &alert {
                let mut file = alerts_file.lock().unwrap();
                let _ = writeln!(
                    file,
                    "[{epoch}] t={} device={} control#{} {}",
                    alert.at, alert.device, alert.control_index, alert.message
                );
            }
            return Err(CliError::Abort(format!("device {device:?}: {reason}")));
        }
        Err(e) => return Err(CliError::Abort(e.to_string())),
    };
    let flows = orch.lab().flows_of(&device).to_vec();
    Ok((
        device,
        CampaignOutputs { records: outcome.records, flows, classification: outcome.classification },
    ))
}

fn write_reports(
    lab: &LoadedLab,
    epoch: &str,
    classifications: &[Classification],
    meta: &BTreeMap<String, DeviceMeta>,
) -> Result<(), CliError> {
    let dir = ledger::reports_dir(&lab.output_dir, epoch);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let write = |name: &str, text: String| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    };
    write("destinations.txt", tables::render_destinations(&tables::destinations_rows(classifications, meta)))?;
    write("blockable.txt", tables::render_blockable(&tables::blockable_rows(classifications, meta)))?;
    write("traffic.txt", tables::render_traffic(&analysis::characterize_traffic(classifications)))?;
    let generalization = analysis::generalize(classifications, &lab.ownership)
        .map_err(|e| CliError::Abort(e.to_string()))?;
    write("generalization.txt", tables::render_generalization(&generalization))?;
    write("summary.txt", tables::render_summary(classifications) + "\n")?;
    Ok(())
}

fn print_tables(
    classifications: &[Classification],
    meta: &BTreeMap<String, DeviceMeta>,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let stdout_err = |e: std::io::Error| CliError::io(Path::new("<stdout>"), e);
    let destinations = tables::destinations_rows(classifications, meta);
    let blockable = tables::blockable_rows(classifications, meta);
    let traffic = analysis::characterize_traffic(classifications);
    let (total, blockable_count) = analysis::fleet_summary(classifications);
    if json {
        let doc = serde_json::json!({
            "destinations": destinations,
            "blockable": blockable,
            "traffic": traffic,
            "summary": { "destinations": total, "blockable": blockable_count },
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("tables serialize"))
            .map_err(stdout_err)?;
    } else {
        writeln!(out, "{}", tables::render_destinations(&destinations)).map_err(stdout_err)?;
        writeln!(out, "{}", tables::render_blockable(&blockable)).map_err(stdout_err)?;
        writeln!(out, "{}", tables::render_traffic(&traffic)).map_err(stdout_err)?;
        writeln!(out, "{}", tables::render_summary(classifications)).map_err(stdout_err)?;
    }
    Ok(())
}

/// One persisted resolver rule, as stored in a rules file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub scope: crate::dnsctl::RuleScope,
    pub kind: crate::dnsctl::RuleKind,
}

/// Load a rules file; a missing file is an empty rule set.
pub fn load_rules(path: &Path) -> Result<Vec<RuleSpec>, CliError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
}

pub fn save_rules(path: &Path, rules: &[RuleSpec]) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(rules).expect("rules serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Add a rule to the file, idempotently.
pub fn cmd_dns_add_rule(path: &Path, rule: RuleSpec) -> Result<(), CliError> {
    let mut rules = load_rules(path)?;
    if !rules.contains(&rule) {
        rules.push(rule);
    }
    save_rules(path, &rules)
}

/// Remove a rule from the file; unknown rules are a usage error.
pub fn cmd_dns_remove_rule(path: &Path, rule: &RuleSpec) -> Result<(), CliError> {
    let mut rules = load_rules(path)?;
    let before = rules.len();
    rules.retain(|r| r != rule);
    if rules.len() == before {
        return Err(CliError::Usage("no matching rule in rules file".into()));
    }
    save_rules(path, &rules)
}

/// Build a resolver from the lab zone plus a rules file.
pub fn build_resolver(
    lab: &LoadedLab,
    rules_path: Option<&Path>,
    seed: u64,
) -> Result<crate::dnsctl::Resolver, CliError> {
    let resolver = crate::dnsctl::Resolver::new(lab.zone.clone(), seed);
    if let Some(path) = rules_path {
        for rule in load_rules(path)? {
            match rule.kind {
                crate::dnsctl::RuleKind::DnsOverride { name } => {
                    resolver
                        .set_block(rule.scope, &name, crate::time::VirtualTime::ZERO)
                        .map_err(|e| CliError::io(path, e))?;
                }
                crate::dnsctl::RuleKind::IpDrop { address } => {
                    resolver.set_ip_drop(rule.scope, address, crate::time::VirtualTime::ZERO);
                }
            }
        }
    }
    Ok(resolver)
}

/// One-shot resolution through a device's view, printing the answer.
pub fn cmd_dns_resolve(
    lab: &LoadedLab,
    rules_path: Option<&Path>,
    name: &str,
    device: Option<&str>,
    seed: u64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let resolver = build_resolver(lab, rules_path, seed)?;
    let lookup = resolver
        .resolve_a(name, device)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let text = match lookup {
        crate::dnsctl::Lookup::Override => "127.0.0.1 (override, ttl 0)".to_string(),
        crate::dnsctl::Lookup::Zone { addresses, ttl } => format!(
            "{} (ttl {ttl})",
            addresses.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
        ),
        crate::dnsctl::Lookup::NxDomain => "NXDOMAIN".to_string(),
    };
    writeln!(out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// Spawn the datagram endpoint on `bind_addr`, rules preloaded.
pub fn start_dns_server(
    lab: &LoadedLab,
    rules_path: Option<&Path>,
    bind_addr: &str,
    seed: u64,
) -> Result<crate::dnsctl::DnsServer, CliError> {
    let resolver = std::sync::Arc::new(build_resolver(lab, rules_path, seed)?);
    crate::dnsctl::DnsServer::spawn(resolver, bind_addr)
        .map_err(|e| CliError::Io { path: bind_addr.to_string(), message: e.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Destinations,
    Blockable,
    Traffic,
    Generalize,
    Diff,
}

impl std::str::FromStr for ReportKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "destinations" => Ok(ReportKind::Destinations),
            "blockable" => Ok(ReportKind::Blockable),
            "traffic" => Ok(ReportKind::Traffic),
            "generalize" => Ok(ReportKind::Generalize),
            "diff" => Ok(ReportKind::Diff),
            other => Err(CliError::Usage(format!(
                "unknown report kind {other:?}; expected destinations|blockable|traffic|generalize|diff"
            ))),
        }
    }
}

/// Render a table from persisted ledgers without re-running experiments.
pub fn cmd_report(
    kind: ReportKind,
    ledger_dir: &Path,
    ledger_b: Option<&Path>,
    ownership: &OwnershipTable,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let stdout_err = |e: std::io::Error| CliError::io(Path::new("<stdout>"), e);
    let epochs = ledger::list_epochs(ledger_dir)?;
    let first_epoch = epochs
        .first()
        .ok_or_else(|| CliError::Usage("ledger holds no epochs".into()))?;

    if kind == ReportKind::Diff {
        // Two epochs from one ledger, or one epoch from each of two.
        let (dir_a, dir_b) = match ledger_b {
            Some(b) => {
                let epochs_b = ledger::list_epochs(b)?;
                let last = epochs_b
                    .last()
                    .ok_or_else(|| CliError::Usage("second ledger holds no epochs".into()))?;
                (ledger::epoch_dir(ledger_dir, first_epoch), ledger::epoch_dir(b, last))
            }
            None => {
                if epochs.len() < 2 {
                    return Err(CliError::Usage("need two epochs".into()));
                }
                (
                    ledger::epoch_dir(ledger_dir, first_epoch),
                    ledger::epoch_dir(ledger_dir, epochs.last().unwrap()),
                )
            }
        };
        let a = ledger::read_classifications(&dir_a)?;
        let b = ledger::read_classifications(&dir_b)?;
        for ca in &a {
            let Some(cb) = b.iter().find(|c| c.device == ca.device) else { continue };
            let diff =
                analysis::longitudinal_diff(ca, cb).map_err(|e| CliError::Abort(e.to_string()))?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&diff).expect("diff serializes"))
                    .map_err(stdout_err)?;
            } else {
                write!(out, "{}", tables::render_diff(&diff)).map_err(stdout_err)?;
            }
        }
        return Ok(());
    }

    let dir = ledger::epoch_dir(ledger_dir, first_epoch);
    let classifications = ledger::read_classifications(&dir)?;
    let meta = ledger::read_meta(&dir).unwrap_or_default();
    match kind {
        ReportKind::Destinations => {
            let rows = tables::destinations_rows(&classifications, &meta);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("rows serialize"))
                    .map_err(stdout_err)?;
            } else {
                write!(out, "{}", tables::render_destinations(&rows)).map_err(stdout_err)?;
            }
        }
        ReportKind::Blockable => {
            let rows = tables::blockable_rows(&classifications, &meta);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("rows serialize"))
                    .map_err(stdout_err)?;
            } else {
                write!(out, "{}", tables::render_blockable(&rows)).map_err(stdout_err)?;
                writeln!(out, "{}", tables::render_summary(&classifications)).map_err(stdout_err)?;
            }
        }
        ReportKind::Traffic => {
            let rows = analysis::characterize_traffic(&classifications);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("rows serialize"))
                    .map_err(stdout_err)?;
            } else {
                write!(out, "{}", tables::render_traffic(&rows)).map_err(stdout_err)?;
            }
        }
        ReportKind::Generalize => {
            let report = analysis::generalize(&classifications, ownership)
                .map_err(|e| CliError::Abort(e.to_string()))?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))
                    .map_err(stdout_err)?;
            } else {
                write!(out, "{}", tables::render_generalization(&report)).map_err(stdout_err)?;
            }
        }
        ReportKind::Diff => unreachable!("handled above"),
    }
    Ok(())
}
