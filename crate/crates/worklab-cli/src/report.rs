//! CSV/JSON artifact writing and simple least-squares fits.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// A CSV table under construction: RFC-4180 body (UTF-8, `.` decimal
/// separator) preceded by `#` comment lines carrying the config hash
/// and library version.
pub struct CsvTable {
    buf: String,
}

impl CsvTable {
    /// Starts a table with the provenance comments and the header row.
    pub fn new(config_hash: &str, version: &str, header: &[&str]) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# config_sha256: {config_hash}");
        let _ = writeln!(buf, "# worklab_version: {version}");
        let _ = writeln!(buf, "{}", header.join(","));
        Self { buf }
    }

    /// Appends one row of already-formatted fields.
    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    /// Writes the table to `dir/name`, creating the directory.
    pub fn write(&self, dir: &Path, name: &str) -> Result<(), String> {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {dir:?}: {e}"))?;
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path)
            .map_err(|e| format!("cannot create {path:?}: {e}"))?;
        f.write_all(self.buf.as_bytes())
            .map_err(|e| format!("cannot write {path:?}: {e}"))
    }
}

/// Shortest-roundtrip decimal formatting; `NaN` for missing points.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

/// Ordinary least squares for `y = a x + b`; returns `(a, b, r2)`.
///
/// `r2` is 1 exactly when the fit is perfect and can be negative for a
/// fit worse than the mean; pairs with non-finite entries are skipped.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let a = (n * sxy - sx * sy) / denom;
    let b = (sy - a * sx) / n;
    let mean = sy / n;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - a * p.0 - b).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, b, r2)
}

/// Sample mean and half-width of the normal-approximation 95%
/// confidence interval.
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}
