//! The experiment engine: destination discovery, the block-and-validate
//! loop, repetition with interleaved controls, alerting, and verdicts.
//!
//! The orchestrator only ever observes a device the way an operator could:
//! DNS and flow capture plus state crops through the companion probe. It
//! never reads the model's hidden critical sets — those it has to
//! rediscover by blocking destinations one at a time.

mod validator;

pub use validator::{FlakyValidator, Outcome, SnapshotValidator, Validator, ValidatorUnreachable};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::capture::{extract_many, CaptureError, CaptureWindow, KeyStats, WindowId};
use crate::model::{
    CellOutcome, CellVerdict, Classification, ClassificationEntry, DestStats, DestinationKey,
    Mode, Verdict,
};
use crate::netlab::{Lab, LabError, StateSnapshot};
use crate::time::{VirtualDuration, VirtualTime};

/// Capture tail after a power-on, per the two-more-minutes protocol.
const POWER_CAPTURE_TAIL: VirtualDuration = VirtualDuration::from_secs(120);
/// Boot traffic settles this long before a functionality is triggered.
const BOOT_SETTLE: VirtualDuration = VirtualDuration::from_secs(5);
/// Waiting longer than this for functionality completion is a failure.
const TRIGGER_TIMEOUT: VirtualDuration = VirtualDuration::from_secs(60);
/// A control (unblocked) run is interleaved after every N block experiments.
const CONTROL_INTERVAL: u32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error("campaign config: {0}")]
    BadConfig(String),
    #[error("device {device:?} broken: {reason}")]
    DeviceBroken { device: String, reason: String, alert: Option<AlertEvent> },
    #[error("no baseline for ({device}, {functionality}, {mode}); run a clean interaction first")]
    MissingBaseline { device: String, functionality: String, mode: Mode },
    #[error("isolation violated: {active} rules already active")]
    IsolationViolated { active: usize },
    #[error("validator unreachable on both attempts for {device}/{functionality}")]
    ValidatorUnavailable { device: String, functionality: String },
}

/// Knobs of one campaign. Defaults follow the reference protocol: thirty
/// repetitions, two-minute power-offs and gaps, alert at three consecutive
/// control failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub repetitions: u32,
    pub off_duration: VirtualDuration,
    pub inter_experiment_gap: VirtualDuration,
    pub consecutive_failure_alert_threshold: u32,
    pub dns_sweep_schedule: Vec<VirtualDuration>,
    /// After classification, verify that blocking every BLOCKABLE_ALL key
    /// at once still validates, once per (functionality, mode).
    pub joint_block_check: bool,
    /// Run the DNS sweep first and stretch `off_duration` to the sweep's
    /// reported minimum when that is longer.
    pub calibrate_off_duration: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            repetitions: 30,
            off_duration: VirtualDuration::from_secs(120),
            inter_experiment_gap: VirtualDuration::from_secs(120),
            consecutive_failure_alert_threshold: 3,
            dns_sweep_schedule: [2u64, 240, 480, 960, 1920, 3840, 7680, 11280]
                .into_iter()
                .map(VirtualDuration::from_secs)
                .collect(),
            joint_block_check: true,
            calibrate_off_duration: false,
        }
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self, CampaignError> {
        let config: CampaignConfig =
            serde_json::from_str(text).map_err(|e| CampaignError::BadConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.repetitions < 1 {
            return Err(CampaignError::BadConfig("repetitions must be >= 1".into()));
        }
        if self.consecutive_failure_alert_threshold < 1 {
            return Err(CampaignError::BadConfig("alert threshold must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ExperimentKind {
    Power,
    Interaction,
}

/// What part of the protocol produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Detect,
    Block,
    Control,
    JointCheck,
}

/// One power or interaction run: what was blocked, what the validator said.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub id: String,
    pub device: String,
    pub kind: ExperimentKind,
    pub role: Role,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functionality: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocked: Option<DestinationKey>,
    pub window: WindowId,
    pub validated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Outcome>,
    pub at: VirtualTime,
}

/// Raised when the auto-validation of controls keeps failing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertEvent {
    pub device: String,
    pub at: VirtualTime,
    pub consecutive_failures: u32,
    pub control_index: u32,
    pub message: String,
}

/// DNS-behavior sweep result: unique query names per off duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub device: String,
    pub counts: Vec<(VirtualDuration, usize)>,
    /// Shortest off duration already exposing the maximal query set.
    pub min_duration_for_max: VirtualDuration,
}

/// Everything a finished campaign hands back.
#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub classification: Classification,
    pub records: Vec<ExperimentRecord>,
    pub windows: Vec<CaptureWindow>,
    pub alerts: Vec<AlertEvent>,
    /// Per (functionality, mode): did the joint block of all
    /// BLOCKABLE_ALL keys still validate?
    pub joint_check: Vec<(String, Mode, Outcome)>,
}

type AlertSink = Box<dyn FnMut(&AlertEvent) + Send>;

/// Runs experiment protocols end to end against one lab.
pub struct Orchestrator {
    lab: Lab,
    config: CampaignConfig,
    validator: Box<dyn Validator>,
    epoch: String,
    next_exp: u64,
    baselines: HashMap<(String, String, Mode), StateSnapshot>,
    alert_sink: Option<AlertSink>,
}

impl Orchestrator {
    pub fn new(lab: Lab, config: CampaignConfig) -> Orchestrator {
        Orchestrator {
            lab,
            config,
            validator: Box::new(SnapshotValidator),
            epoch: "epoch-0".to_string(),
            next_exp: 0,
            baselines: HashMap::new(),
            alert_sink: None,
        }
    }

    pub fn with_validator(mut self, validator: Box<dyn Validator>) -> Orchestrator {
        self.validator = validator;
        self
    }

    /// Label campaigns for longitudinal comparison.
    pub fn with_epoch(mut self, epoch: &str) -> Orchestrator {
        self.epoch = epoch.to_string();
        self
    }

    /// Called the moment an alert fires, before the campaign aborts.
    pub fn on_alert(&mut self, sink: AlertSink) {
        self.alert_sink = Some(sink);
    }

    pub fn lab(&self) -> &Lab {
        &self.lab
    }

    pub fn lab_mut(&mut self) -> &mut Lab {
        &mut self.lab
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.config
    }

    fn next_id(&mut self) -> String {
        let id = format!("exp-{:06}", self.next_exp);
        self.next_exp += 1;
        id
    }

    fn crop_of(&self, device: &str, functionality: &str) -> Result<Vec<String>, CampaignError> {
        let model = self.lab.model_of(device)?;
        let func = model.functionality(functionality).ok_or_else(|| {
            CampaignError::Lab(LabError::UnknownFunctionality {
                device: device.to_string(),
                functionality: functionality.to_string(),
            })
        })?;
        Ok(vec![func.state_effect.field.clone()])
    }

    /// Power the device off for each scheduled duration and count the
    /// unique DNS names it queries in the two minutes after power-up.
    pub fn dns_behavior_sweep(&mut self, device: &str) -> Result<SweepReport, CampaignError> {
        // WAN placement exposes the full boot surface.
        self.lab.set_network_mode(device, Mode::Wan)?;
        let schedule = self.config.dns_sweep_schedule.clone();
        let mut counts = Vec::with_capacity(schedule.len());
        for &duration in &schedule {
            let id = self.lab.open_window(device)?;
            self.lab.power_off(device, duration)?;
            self.lab.advance(duration);
            self.lab.advance(POWER_CAPTURE_TAIL);
            let window = self.lab.close_window(id)?;
            let unique: std::collections::BTreeSet<&str> =
                window.dns_events.iter().map(|e| e.name.as_str()).collect();
            counts.push((duration, unique.len()));
        }
        let max = counts.iter().map(|(_, n)| *n).max().unwrap_or(0);
        let min_duration_for_max = counts
            .iter()
            .find(|(_, n)| *n == max)
            .map(|(d, _)| *d)
            .unwrap_or(VirtualDuration::ZERO);
        Ok(SweepReport { device: device.to_string(), counts, min_duration_for_max })
    }

    fn ensure_isolation(&self) -> Result<(), CampaignError> {
        let active = self.lab.resolver().active_rule_count();
        if active != 0 {
            return Err(CampaignError::IsolationViolated { active });
        }
        Ok(())
    }

    /// One power epoch inside a capture window: off, boot, two-minute tail.
    fn power_run(
        &mut self,
        device: &str,
        mode: Mode,
        off: VirtualDuration,
        role: Role,
        records: &mut Vec<ExperimentRecord>,
        windows: &mut Vec<CaptureWindow>,
    ) -> Result<usize, CampaignError> {
        let id = self.lab.open_window(device)?;
        self.lab.power_off(device, off)?;
        self.lab.advance(off);
        self.lab.advance(POWER_CAPTURE_TAIL);
        let window = self.lab.close_window(id)?;
        records.push(ExperimentRecord {
            id: self.next_id(),
            device: device.to_string(),
            kind: ExperimentKind::Power,
            role,
            functionality: None,
            mode: Some(mode),
            blocked: None,
            window: window.id,
            validated: false,
            verdict: None,
            at: window.closed_at,
        });
        windows.push(window);
        Ok(windows.len() - 1)
    }

    /// One interaction epoch: off, boot, trigger, wait for completion,
    /// validate against the cell baseline when one exists.
    #[allow(clippy::too_many_arguments)]
    fn interaction_run(
        &mut self,
        device: &str,
        functionality: &str,
        mode: Mode,
        off: VirtualDuration,
        blocked: Option<&DestinationKey>,
        role: Role,
        records: &mut Vec<ExperimentRecord>,
        windows: &mut Vec<CaptureWindow>,
    ) -> Result<usize, CampaignError> {
        let id = self.lab.open_window(device)?;
        self.lab.power_off(device, off)?;
        self.lab.advance(off);
        self.lab.advance(BOOT_SETTLE);
        let token = self.lab.trigger_functionality(device, functionality, mode)?;
        let completed = self.lab.advance_until_complete(token, TRIGGER_TIMEOUT);
        let window = self.lab.close_window(id)?;

        let key = (device.to_string(), functionality.to_string(), mode);
        let (validated, verdict) = if !completed {
            // Never finishing is a functional failure in its own right.
            (true, Some(Outcome::Fail))
        } else if let Some(baseline) = self.baselines.get(&key) {
            let crop = self.crop_of(device, functionality)?;
            let current = self.lab.snapshot(device, Some(&crop))?;
            match self.validator.validate(baseline, &current) {
                Ok(outcome) => (true, Some(outcome)),
                Err(ValidatorUnreachable) => (false, None),
            }
        } else {
            (false, None) // detect run: this run will install the baseline
        };

        records.push(ExperimentRecord {
            id: self.next_id(),
            device: device.to_string(),
            kind: ExperimentKind::Interaction,
            role,
            functionality: Some(functionality.to_string()),
            mode: Some(mode),
            blocked: blocked.cloned(),
            window: window.id,
            validated,
            verdict,
            at: window.closed_at,
        });
        windows.push(window);
        Ok(records.len() - 1)
    }

    /// Discover the destinations one (functionality, mode) cell touches:
    /// a power window plus an interaction window, unioned in
    /// first-observation order. Also captures the validation baseline from
    /// the clean run.
    pub fn detect_destinations(
        &mut self,
        device: &str,
        functionality: &str,
        mode: Mode,
    ) -> Result<Vec<(DestinationKey, KeyStats)>, CampaignError> {
        let mut records = Vec::new();
        let mut windows = Vec::new();
        let detected =
            self.detect_into(device, functionality, mode, &mut records, &mut windows)?;
        Ok(detected)
    }

    fn detect_into(
        &mut self,
        device: &str,
        functionality: &str,
        mode: Mode,
        records: &mut Vec<ExperimentRecord>,
        windows: &mut Vec<CaptureWindow>,
    ) -> Result<Vec<(DestinationKey, KeyStats)>, CampaignError> {
        self.ensure_isolation()?;
        let off = self.config.off_duration;
        self.lab.set_network_mode(device, mode)?;

        let power_idx = self.power_run(device, mode, off, Role::Detect, records, windows)?;
        let rec_idx = self.interaction_run(
            device,
            functionality,
            mode,
            off,
            None,
            Role::Detect,
            records,
            windows,
        )?;

        // The clean run must complete; a timeout here means the device is
        // broken before any blocking began.
        if records[rec_idx].verdict == Some(Outcome::Fail) {
            return Err(CampaignError::DeviceBroken {
                device: device.to_string(),
                reason: format!("clean {functionality}/{mode} run never completed"),
                alert: None,
            });
        }

        // Baseline crop from the known-good run.
        let crop = self.crop_of(device, functionality)?;
        let baseline = self.lab.snapshot(device, Some(&crop))?;
        self.baselines
            .insert((device.to_string(), functionality.to_string(), mode), baseline);

        let interaction_idx = windows.len() - 1;
        let pair = [windows[power_idx].clone(), windows[interaction_idx].clone()];
        Ok(extract_many(&pair))
    }

    /// Baseline-compare the device state right now (the standalone
    /// validation op; campaign runs validate inline).
    pub fn validate(
        &mut self,
        device: &str,
        functionality: &str,
        mode: Mode,
    ) -> Result<Outcome, CampaignError> {
        let key = (device.to_string(), functionality.to_string(), mode);
        let baseline = self.baselines.get(&key).cloned().ok_or_else(|| {
            CampaignError::MissingBaseline {
                device: device.to_string(),
                functionality: functionality.to_string(),
                mode,
            }
        })?;
        let crop = self.crop_of(device, functionality)?;
        let current = self.lab.snapshot(device, Some(&crop))?;
        self.validator
            .validate(&baseline, &current)
            .map_err(|_| CampaignError::ValidatorUnavailable {
                device: device.to_string(),
                functionality: functionality.to_string(),
            })
    }

    /// Block one destination, run the functionality, validate, unblock.
    /// An unvalidated attempt (validator unreachable) is retried once.
    pub fn block_and_validate(
        &mut self,
        device: &str,
        key: &DestinationKey,
        functionality: &str,
        mode: Mode,
    ) -> Result<ExperimentRecord, CampaignError> {
        let mut records = Vec::new();
        let mut windows = Vec::new();
        let idx =
            self.block_and_validate_into(device, key, functionality, mode, &mut records, &mut windows)?;
        Ok(records.swap_remove(idx))
    }

    #[allow(clippy::too_many_arguments)]
    fn block_and_validate_into(
        &mut self,
        device: &str,
        key: &DestinationKey,
        functionality: &str,
        mode: Mode,
        records: &mut Vec<ExperimentRecord>,
        windows: &mut Vec<CaptureWindow>,
    ) -> Result<usize, CampaignError> {
        let baseline_key = (device.to_string(), functionality.to_string(), mode);
        if !self.baselines.contains_key(&baseline_key) {
            return Err(CampaignError::MissingBaseline {
                device: device.to_string(),
                functionality: functionality.to_string(),
                mode,
            });
        }
        let off = self.config.off_duration;
        for attempt in 0..2 {
            self.ensure_isolation()?;
            let rule = self.lab.block_key(device, key)?;
            let idx = self.interaction_run(
                device,
                functionality,
                mode,
                off,
                Some(key),
                Role::Block,
                records,
                windows,
            );
            self.lab.clear_rule(rule)?;
            let idx = idx?;
            if records[idx].validated {
                return Ok(idx);
            }
            if attempt == 1 {
                return Err(CampaignError::ValidatorUnavailable {
                    device: device.to_string(),
                    functionality: functionality.to_string(),
                });
            }
        }
        unreachable!("loop returns on both branches")
    }

    /// The whole protocol for one device: detect destinations per
    /// (functionality, mode), block each one `repetitions` times with
    /// controls interleaved every five experiments, classify, and
    /// optionally verify the joint block set.
    pub fn run_campaign(&mut self, device: &str) -> Result<CampaignOutcome, CampaignError> {
        self.config.validate()?;
        self.ensure_isolation()?;
        let model = self.lab.model_of(device)?.clone();
        let mut records: Vec<ExperimentRecord> = Vec::new();
        let mut windows: Vec<CaptureWindow> = Vec::new();
        let mut alerts: Vec<AlertEvent> = Vec::new();

        if self.config.calibrate_off_duration {
            let report = self.dns_behavior_sweep(device)?;
            if report.min_duration_for_max > self.config.off_duration {
                self.config.off_duration = report.min_duration_for_max;
            }
        }

        // (functionality, mode, key) -> detected order index
        let mut cells: Vec<(String, Mode, Vec<DestinationKey>)> = Vec::new();
        let mut streak: u32 = 0;
        let mut controls_run: u32 = 0;

        for func in &model.functionalities {
            for &mode in &func.modes {
                let detected =
                    self.detect_into(device, &func.name, mode, &mut records, &mut windows)?;
                let keys: Vec<DestinationKey> =
                    detected.into_iter().map(|(key, _)| key).collect();
                cells.push((func.name.clone(), mode, keys.clone()));

                let mut experiments_in_cell: u32 = 0;
                for key in &keys {
                    for _ in 0..self.config.repetitions {
                        self.block_and_validate_into(
                            device,
                            key,
                            &func.name,
                            mode,
                            &mut records,
                            &mut windows,
                        )?;
                        experiments_in_cell += 1;

                        if experiments_in_cell % CONTROL_INTERVAL == 0 {
                            let idx = self.interaction_run(
                                device,
                                &func.name,
                                mode,
                                self.config.off_duration,
                                None,
                                Role::Control,
                                &mut records,
                                &mut windows,
                            )?;
                            controls_run += 1;
                            match records[idx].verdict {
                                Some(Outcome::Fail) => {
                                    streak += 1;
                                    if streak >= self.config.consecutive_failure_alert_threshold {
                                        let alert = AlertEvent {
                                            device: device.to_string(),
                                            at: self.lab.now(),
                                            consecutive_failures: streak,
                                            control_index: controls_run,
                                            message: format!(
                                                "auto-validation failed {streak} controls in a row"
                                            ),
                                        };
                                        if let Some(sink) = &mut self.alert_sink {
                                            sink(&alert);
                                        }
                                        alerts.push(alert.clone());
                                        return Err(CampaignError::DeviceBroken {
                                            device: device.to_string(),
                                            reason: "control runs keep failing".into(),
                                            alert: Some(alert),
                                        });
                                    }
                                }
                                Some(Outcome::Pass) => streak = 0,
                                None => {}
                            }
                        }
                    }
                }
            }
        }

        // Verdicts per destination over every validated blocked experiment.
        let verdicts = self.aggregate_verdicts(device, &records, &cells)?;

        // Optional post-pass: all BLOCKABLE_ALL keys blocked at once.
        let mut joint_check = Vec::new();
        if self.config.joint_block_check {
            let blockable: Vec<DestinationKey> = verdicts
                .iter()
                .filter(|v| v.verdict == Verdict::BlockableAll)
                .map(|v| v.key.clone())
                .collect();
            if !blockable.is_empty() {
                // Keys sharing a DNS name share one override rule.
                let mut rules = Vec::with_capacity(blockable.len());
                for key in &blockable {
                    let rule = self.lab.block_key(device, key)?;
                    if !rules.contains(&rule) {
                        rules.push(rule);
                    }
                }
                for (func, mode, _) in &cells {
                    let func = func.clone();
                    let idx = self.interaction_run(
                        device,
                        &func,
                        *mode,
                        self.config.off_duration,
                        None,
                        Role::JointCheck,
                        &mut records,
                        &mut windows,
                    )?;
                    let outcome = records[idx].verdict.unwrap_or(Outcome::Fail);
                    joint_check.push((func, *mode, outcome));
                }
                for rule in rules {
                    self.lab.clear_rule(rule)?;
                }
            }
        }

        // Traffic stats pool over the whole campaign, joint epochs included.
        let pooled = extract_many(&windows);
        let total: u64 = pooled.iter().map(|(_, s)| s.bytes).sum();
        let mut entries: Vec<ClassificationEntry> = verdicts
            .into_iter()
            .map(|v| {
                let stats =
                    pooled.iter().find(|(k, _)| *k == v.key).map(|(_, s)| *s).unwrap_or_default();
                ClassificationEntry {
                    key: v.key,
                    verdict: v.verdict,
                    first_seen: stats.first_seen,
                    cells: v.cells,
                    evidence: v.evidence,
                    stats: DestStats {
                        flows: stats.flows,
                        bytes: stats.bytes,
                        share_pct: if total > 0 {
                            stats.bytes as f64 * 100.0 / total as f64
                        } else {
                            0.0
                        },
                    },
                }
            })
            .collect();
        entries.sort_by(|a, b| a.first_seen.cmp(&b.first_seen).then_with(|| a.key.cmp(&b.key)));
        let classification = Classification::summarize(device, &self.epoch, entries);

        Ok(CampaignOutcome { classification, records, windows, alerts, joint_check })
    }

    fn aggregate_verdicts(
        &self,
        device: &str,
        records: &[ExperimentRecord],
        cells: &[(String, Mode, Vec<DestinationKey>)],
    ) -> Result<Vec<PendingVerdict>, CampaignError> {
        let mut out = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (_, _, keys) in cells {
            for key in keys {
                if !seen.insert(key.clone()) {
                    continue;
                }
                let mut any_pass = false;
                let mut any_fail = false;
                let mut evidence = Vec::new();
                let mut cell_verdicts: Vec<CellVerdict> = Vec::new();
                for (func, mode, cell_keys) in cells {
                    if !cell_keys.contains(key) {
                        continue;
                    }
                    let mut cell_pass = false;
                    let mut cell_fail = false;
                    for rec in records.iter().filter(|r| {
                        r.validated
                            && r.blocked.as_ref() == Some(key)
                            && r.functionality.as_deref() == Some(func.as_str())
                            && r.mode == Some(*mode)
                    }) {
                        evidence.push(rec.id.clone());
                        match rec.verdict {
                            Some(Outcome::Pass) => cell_pass = true,
                            Some(Outcome::Fail) => cell_fail = true,
                            None => {}
                        }
                    }
                    any_pass |= cell_pass;
                    any_fail |= cell_fail;
                    let outcome = match (cell_pass, cell_fail) {
                        (true, false) => CellOutcome::Pass,
                        (false, true) => CellOutcome::Fail,
                        _ => CellOutcome::Mixed,
                    };
                    cell_verdicts.push(CellVerdict {
                        functionality: func.clone(),
                        mode: *mode,
                        outcome,
                    });
                }
                let verdict = Verdict::from_outcomes(any_pass, any_fail).ok_or_else(|| {
                    CampaignError::ValidatorUnavailable {
                        device: device.to_string(),
                        functionality: "classification".to_string(),
                    }
                })?;
                out.push(PendingVerdict {
                    key: key.clone(),
                    verdict,
                    cells: cell_verdicts,
                    evidence,
                });
            }
        }
        Ok(out)
    }
}

struct PendingVerdict {
    key: DestinationKey,
    verdict: Verdict,
    cells: Vec<CellVerdict>,
    evidence: Vec<String>,
}
