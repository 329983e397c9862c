//! Campaign ledger persistence: newline-delimited experiment records, the
//! raw flow log, and the classification summary, per device per epoch.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::analysis::tables::DeviceMeta;
use crate::capture::{export_flows, FlowRecord};
use crate::model::Classification;
use crate::orchestrator::ExperimentRecord;

use super::CliError;

pub fn epoch_dir(out_dir: &Path, epoch: &str) -> PathBuf {
    out_dir.join("ledger").join(epoch)
}

pub fn reports_dir(out_dir: &Path, epoch: &str) -> PathBuf {
    out_dir.join("reports").join(epoch)
}

pub struct DeviceLedger<'a> {
    pub device: &'a str,
    pub records: &'a [ExperimentRecord],
    pub flows: &'a [FlowRecord],
    pub classification: &'a Classification,
}

pub fn write_device_ledger(dir: &Path, ledger: &DeviceLedger<'_>) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let path = dir.join(format!("{}.experiments.jsonl", ledger.device));
    let mut file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    for record in ledger.records {
        serde_json::to_writer(&mut file, record).map_err(|e| CliError::json(&path, e))?;
        file.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
    }

    let path = dir.join(format!("{}.flows.jsonl", ledger.device));
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    export_flows(file, ledger.flows).map_err(|e| CliError::io(&path, e))?;

    let path = dir.join(format!("{}.classification.json", ledger.device));
    let text = serde_json::to_string_pretty(ledger.classification)
        .map_err(|e| CliError::json(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(())
}

pub fn write_meta(dir: &Path, meta: &BTreeMap<String, DeviceMeta>) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join("meta.json");
    let text = serde_json::to_string_pretty(meta).map_err(|e| CliError::json(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
}

pub fn read_meta(dir: &Path) -> Result<BTreeMap<String, DeviceMeta>, CliError> {
    let path = dir.join("meta.json");
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(&path, e))
}

/// All classification files of one epoch directory, sorted by file name.
pub fn read_classifications(dir: &Path) -> Result<Vec<Classification>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".classification.json")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Io {
            path: dir.display().to_string(),
            message: "no classification files in ledger".to_string(),
        });
    }
    paths
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
        })
        .collect()
}

/// Experiment records back from a ledger, errors carrying line numbers.
pub fn read_experiments(path: &Path) -> Result<Vec<ExperimentRecord>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: format!("line {}: {e}", idx + 1),
        })?);
    }
    Ok(records)
}

/// Epoch labels present under `out_dir/ledger`, sorted.
pub fn list_epochs(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let dir = out_dir.join("ledger");
    let mut epochs: Vec<String> = fs::read_dir(&dir)
        .map_err(|e| CliError::io(&dir, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    epochs.sort();
    Ok(epochs)
}
