//! CSV and JSON artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use rym_core::flow::DiagnosticRecord;
use rym_core::SpectrumReport;
use serde::Serialize;

use crate::config::RunConfig;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const DIAGNOSTICS_HEADER: &str = "t,volume,r,f,ym_energy,gauge_norm,harm1,harm2,du_norm,da_norm";
pub const SPECTRUM_HEADER: &str = "mode,eigenvalue,multiplicity";

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn diagnostics_csv(records: &[DiagnosticRecord]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        let row = [r.t, r.volume, r.r, r.f, r.ym_energy, r.gauge_norm, r.harmonic[0], r.harmonic[1], r.du_norm, r.da_norm];
        let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One row per `(mode, eigenvalue)` pair.
pub fn spectrum_csv(rows: impl IntoIterator<Item = (String, f64, usize)>) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for (mode, mu, mult) in rows {
        let _ = writeln!(out, "{mode},{},{mult}", fmt_num(mu));
    }
    out
}

pub fn report_rows(report: &SpectrumReport) -> Vec<(String, f64, usize)> {
    report.entries.iter().map(|e| (e.mode.to_string(), e.eigenvalue, e.multiplicity)).collect()
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residuals {
    /// `max |Vol(t) − Vol(0)| / Vol(0)` over the samples.
    pub volume_rel: f64,
    /// `|∫φ dV_h − 2πc|` at the final state.
    pub chern_abs: f64,
    /// Largest change of either harmonic component over the samples.
    pub harmonic_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub max_eigenvalue: f64,
    pub gap: Option<f64>,
    pub zero_dim: usize,
    pub unstable: bool,
}

impl From<&SpectrumReport> for SpectrumSummary {
    fn from(r: &SpectrumReport) -> Self {
        Self { max_eigenvalue: r.max_eigenvalue, gap: r.gap, zero_dim: r.zero_dim, unstable: r.is_unstable() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictSummary {
    /// `unstable`, `stable` or `marginal`.
    pub kind: String,
    /// Top eigenvalue, gap or kernel dimension, matching `kind`.
    pub value: f64,
}

impl From<&rym_core::sphere::Verdict> for VerdictSummary {
    fn from(v: &rym_core::sphere::Verdict) -> Self {
        use rym_core::sphere::Verdict;
        let value = match *v {
            Verdict::Unstable { top } => top,
            Verdict::StrictlyStable { gap } => gap,
            Verdict::Marginal { zero_dim } => zero_dim as f64,
        };
        Self { kind: v.label().into(), value }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSummary {
    pub alpha: f64,
    pub delta: f64,
    /// Whether the computed spectrum satisfies `max ≤ −δ`.
    pub spectrum_below_minus_delta: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassRow {
    pub chern: i64,
    pub lambda: f64,
    pub verdict: VerdictSummary,
    pub max_eigenvalue: f64,
    pub zero_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_rhs_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_decay_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    /// Gap the fitted rate is compared against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_monotone: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifications: Option<Vec<ClassRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckRow>>,
    pub version: String,
    pub config: RunConfig,
}

impl RunSummary {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.into(),
            status: Status::Ok,
            failure: None,
            converged: None,
            final_time: None,
            steps: None,
            dt: None,
            final_rhs_norm: None,
            fitted_decay_rate: None,
            r_squared: None,
            spectral_gap: None,
            residuals: None,
            spectrum: None,
            verdict: None,
            tail_monotone: None,
            bound: None,
            classifications: None,
            checks: None,
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
        }
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.status = Status::Failed;
        self.failure = Some(reason.into());
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        write_file(dir, SUMMARY_FILE, &json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for &x in &[0.0, 1.0, -0.1, 1.0 / 3.0, 1e-300, 6.02e23, 123456.789, f64::MIN_POSITIVE, -2.5e-7] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1e-9), "1e-9");
    }

    #[test]
    fn spectrum_rows() {
        let csv = spectrum_csv(vec![("0:1".into(), -1.0, 2), ("3".into(), 0.25, 7)]);
        assert_eq!(csv, "mode,eigenvalue,multiplicity\n0:1,-1,2\n3,0.25,7\n");
    }

    #[test]
    fn summary_skips_absent_fields() {
        let s = RunSummary::new("spectrum", &RunConfig::default());
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["status"], "ok");
        assert!(json.get("failure").is_none());
        assert_eq!(json["config"]["variant"], "NGRYM");
    }
}
