//! Reproducibility manifest written as comment lines at the top of CSV
//! outputs. The timestamp line is explicitly excluded from byte-identity
//! guarantees; everything else pins the run.

use std::time::{SystemTime, UNIX_EPOCH};

pub fn manifest_lines(command_line: &str, seed: Option<u64>) -> Vec<String> {
    let mut lines = vec![
        format!("# tool: bscap {}", env!("CARGO_PKG_VERSION")),
        format!("# command: {command_line}"),
    ];
    if let Some(s) = seed {
        lines.push(format!("# seed: {s}"));
    }
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    lines.push(format!("# timestamp: {ts}"));
    lines
}
