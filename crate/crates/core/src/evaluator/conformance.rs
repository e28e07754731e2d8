//! Drives a plugin through the protocol surface with a tiny synthetic
//! dataset: handshake, evaluation, warm-start round trip, an in-band error
//! and clean shutdown. Needs no EEG recordings.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::external::{PluginClient, PluginCommand, Timeouts};
use super::protocol::ProtocolError;
use super::ChannelSubset;
use crate::tensorio::{save_dataset, Dataset, TensorError};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformanceReport {
    pub plugin_name: Option<String>,
    pub checks: Vec<CheckResult>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

pub const PROBE_CHANNELS: usize = 4;

/// Two classes, 40 trials, channel 0 carries a class-dependent amplitude.
pub fn probe_dataset(n_trials: usize, phase: u32) -> Dataset {
    let t_len = 64;
    let mut data = Vec::with_capacity(n_trials * PROBE_CHANNELS * t_len);
    let mut labels = Vec::with_capacity(n_trials);
    for trial in 0..n_trials {
        let label = (trial % 2) as u16;
        labels.push(label);
        for ch in 0..PROBE_CHANNELS {
            let amp = if ch == 0 {
                0.2 + 0.6 * label as f32
            } else {
                0.4
            };
            for t in 0..t_len {
                let x = (t as f32 * (0.3 + 0.1 * ch as f32) + trial as f32 + phase as f32).sin();
                data.push(amp * x);
            }
        }
    }
    Dataset::new(
        (n_trials, PROBE_CHANNELS, t_len),
        data,
        labels,
        vec![false; n_trials],
        128.0,
    )
    .expect("probe shape is valid")
}

/// Writes the probe train/validation files into `dir`.
pub fn write_probe_files(dir: &Path) -> Result<(PathBuf, PathBuf), TensorError> {
    let train = dir.join("probe_train.sft");
    let valid = dir.join("probe_valid.sft");
    save_dataset(&probe_dataset(32, 0), &train)?;
    save_dataset(&probe_dataset(8, 1), &valid)?;
    Ok((train, valid))
}

fn check(name: &'static str, result: Result<String, String>) -> CheckResult {
    match result {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

pub fn run_conformance(cmd: &PluginCommand, dir: &Path, timeouts: Timeouts) -> ConformanceReport {
    let mut checks = Vec::new();
    let (train, valid) = match write_probe_files(dir) {
        Ok(p) => p,
        Err(e) => {
            checks.push(check("probe-data", Err(e.to_string())));
            return ConformanceReport {
                plugin_name: None,
                checks,
            };
        }
    };

    let mut client = match PluginClient::spawn(cmd, timeouts) {
        Ok(c) => {
            checks.push(check("handshake", Ok(format!("name {:?}", c.name()))));
            c
        }
        Err(e) => {
            checks.push(check("handshake", Err(e.to_string())));
            return ConformanceReport {
                plugin_name: None,
                checks,
            };
        }
    };
    let name = Some(client.name().to_string());

    let informative = ChannelSubset::new([0], PROBE_CHANNELS).expect("in range");
    let first = client.evaluate(&informative, None, &train, &valid);
    checks.push(check(
        "evaluate",
        first
            .as_ref()
            .map(|r| format!("fitness {}", r.score))
            .map_err(|e| e.to_string()),
    ));

    if let Ok(rec) = &first {
        let warm = client.evaluate(&informative, rec.state_key.as_deref(), &train, &valid);
        checks.push(check(
            "warm-start",
            warm.map(|r| {
                format!(
                    "fitness {} with warm key {:?}",
                    r.score,
                    rec.state_key.as_deref()
                )
            })
            .map_err(|e| e.to_string()),
        ));
    }

    // Channel 4 does not exist in the probe files; the plugin must say so in band.
    let bogus = ChannelSubset::new([PROBE_CHANNELS], PROBE_CHANNELS + 1).expect("in range");
    let in_band = match client.evaluate(&bogus, None, &train, &valid) {
        Err(ProtocolError::PluginError(msg)) => Ok(format!("reported {msg:?}")),
        Err(e) => Err(format!("expected in-band error, got {e}")),
        Ok(r) => Err(format!("expected in-band error, got fitness {}", r.score)),
    };
    checks.push(check("error-in-band", in_band));

    checks.push(check(
        "shutdown",
        client
            .shutdown()
            .map(|s| format!("exited with {s}"))
            .map_err(|e| e.to_string()),
    ));

    ConformanceReport {
        plugin_name: name,
        checks,
    }
}
