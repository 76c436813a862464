use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{Format, RunConfig};

/// Version of the `report.json` wrapper.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct ReportFile<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    seed: u64,
    passed: bool,
    summary: &'a str,
    report: &'a T,
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    seed: u64,
    tool_version: &'a str,
    timestamp_unix: u64,
    files: Vec<&'a str>,
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes the requested reports plus `config.resolved.json` and the
/// timestamped `meta.json` sidecar.
pub fn write_outputs<T: Serialize, R: Serialize>(
    cfg: &RunConfig,
    passed: bool,
    summary: &str,
    report: &T,
    rows: &[R],
) -> Result<(), Box<dyn std::error::Error>> {
    let dir = &cfg.out;
    fs::create_dir_all(dir)?;
    let mut files = vec!["config.resolved.json"];
    if cfg.wants(Format::Json) {
        let wrapped = ReportFile {
            schema_version: SCHEMA_VERSION,
            command: &cfg.command,
            seed: cfg.seed,
            passed,
            summary,
            report,
        };
        write_json(&dir.join("report.json"), &wrapped)?;
        files.push("report.json");
    }
    if cfg.wants(Format::Csv) {
        let mut w = csv::Writer::from_path(dir.join("report.csv"))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        files.push("report.csv");
    }
    write_json(&dir.join("config.resolved.json"), cfg)?;
    let timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Meta {
        command: &cfg.command,
        seed: cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp_unix,
        files,
    };
    write_json(&dir.join("meta.json"), &meta)?;
    Ok(())
}

pub fn write_body<T: Serialize>(dir: &Path, body: &T) -> io::Result<()> {
    write_json(&dir.join("body.json"), body)
}
