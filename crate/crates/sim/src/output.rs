//! File formats: sweep CSV, its JSON sidecar, the bound-only CSV and the
//! codebook dump.
//!
//! Sweep CSV columns are `ue, snr_db, ber_sim, ber_bound, ber_private,
//! ber_common, bits, errors, flag`, one row per (user, grid point), users
//! numbered from 1. Multiple flags are joined with `;`. Nothing
//! run-dependent (timing, thread count) goes into the CSV, so identical specs
//! produce byte-identical files.

use std::io::{Read, Write};

use grcim_core::analysis::{db_to_linear, is_loose, upper_bound_ber, BoundParams};
use grcim_core::channel::SystemConfig;
use grcim_core::codebook::{CodeGrouping, WalshCodebook};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::sweep::{BerSweepResult, SweepSpec};
use crate::SweepError;

pub const SWEEP_COLUMNS: [&str; 9] = [
    "ue",
    "snr_db",
    "ber_sim",
    "ber_bound",
    "ber_private",
    "ber_common",
    "bits",
    "errors",
    "flag",
];

fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

pub fn write_sweep_csv<W: Write>(result: &BerSweepResult, out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for user in 0..result.spec.config.num_users {
        for p in &result.points {
            let u = &p.users[user];
            let flags: Vec<String> = u.flags.iter().map(ToString::to_string).collect();
            w.write_record([
                (user + 1).to_string(),
                p.snr_db.to_string(),
                sci(u.ber()),
                sci(p.bound_ber),
                sci(u.ber_private()),
                sci(u.ber_common()),
                u.bits().to_string(),
                u.errors().to_string(),
                flags.join(";"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reproducibility record written next to a sweep CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub label: String,
    pub spec: SweepSpec,
    pub config_hash: String,
    pub wall_time_s: f64,
    pub chip_snr_db: Vec<f64>,
    pub symbols: Vec<u64>,
}

impl Sidecar {
    pub fn new(result: &BerSweepResult) -> Self {
        Self {
            label: result.label(),
            spec: result.spec.clone(),
            config_hash: result.config_hash.clone(),
            wall_time_s: result.wall_time.as_secs_f64(),
            chip_snr_db: result.points.iter().map(|p| p.chip_snr_db).collect(),
            symbols: result.points.iter().map(|p| p.symbols).collect(),
        }
    }
}

pub fn write_sidecar<W: Write>(result: &BerSweepResult, out: W) -> Result<(), SweepError> {
    serde_json::to_writer_pretty(out, &Sidecar::new(result))?;
    Ok(())
}

/// Reads either a sidecar or a bare [`SweepSpec`].
pub fn read_spec<R: Read>(input: R) -> Result<SweepSpec, SweepError> {
    let value: Value = serde_json::from_reader(input)?;
    let spec_value = match value.get("spec") {
        Some(spec) => spec.clone(),
        None => value,
    };
    let spec: SweepSpec = serde_json::from_value(spec_value)?;
    spec.validate()?;
    Ok(spec)
}

/// Bound-only table: `snr_db, bound_ber, flags` on the chip-SNR axis.
pub fn write_bound_csv<W: Write>(config: &SystemConfig, grid_db: &[f64], out: W) -> Result<(), SweepError> {
    config.validate()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snr_db", "bound_ber", "flags"])?;
    for &db in grid_db {
        let bound = upper_bound_ber(&BoundParams::from_config(config, db_to_linear(db)));
        let flag = if is_loose(bound) { "bound_loose" } else { "" };
        w.write_record([db.to_string(), sci(bound), flag.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `{"length": L_c, "rows": [[±1, ...]], "assignment": {"1": [...], ...}}`
pub fn codebook_json(codebook: &WalshCodebook, grouping: &CodeGrouping) -> Value {
    let assignment: Map<String, Value> = grouping
        .assignment()
        .iter()
        .enumerate()
        .map(|(k, rows)| ((k + 1).to_string(), json!(rows)))
        .collect();
    json!({
        "length": codebook.length(),
        "rows": codebook.rows().collect::<Vec<_>>(),
        "assignment": assignment,
    })
}

/// Checks that a sweep CSV header carries every documented column.
pub fn check_sweep_header<R: Read>(input: R) -> Result<(), SweepError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?;
    for col in SWEEP_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(SweepError::Format(format!("missing column {col:?}")));
        }
    }
    Ok(())
}
