//! Report CSV rendering and atomic file writes.

use std::fs;
use std::io;
use std::path::Path;

use gclab_core::harness::VerificationReport;

/// Twelve significant digits, locale independent.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x:.11e}")
    }
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";").replace('"', "'")
}

/// `claim_id,instance_id,seed,status,lhs,rhs,tolerance,detail` with one
/// row per executed check.
pub fn render_csv(report: &VerificationReport) -> String {
    let mut out = String::from("claim_id,instance_id,seed,status,lhs,rhs,tolerance,detail\n");
    for check in &report.checks {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            check.claim,
            csv_field(&check.instance),
            check.seed,
            check.status.name(),
            sig12(check.lhs),
            sig12(check.rhs),
            sig12(check.tolerance),
            csv_field(&check.detail),
        ));
    }
    out
}

/// Write-temp-then-rename, so readers never observe a partial file.
pub fn write_atomically(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = Path::new(&tmp);
    fs::write(tmp_path, contents)?;
    fs::rename(tmp_path, path)
}
