//! Spectrum bookkeeping shared by the torus and sphere analyses.

use std::fmt;

/// Default threshold for calling an eigenvalue zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Which invariant subspace the spectrum is reported on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub zero_tol: f64,
    /// Drop the constant conformal-factor direction (perturbations that change
    /// the volume).
    pub volume_preserving: bool,
    /// Sphere only: drop the degree-1 null direction generated by conformal
    /// (Möbius) reparametrizations of S².
    pub modulo_conformal: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { zero_tol: DEFAULT_ZERO_TOL, volume_preserving: false, modulo_conformal: false }
    }
}

impl SpectrumOptions {
    pub fn volume_preserving() -> Self {
        Self { volume_preserving: true, ..Self::default() }
    }
}

/// Label of the invariant block an eigenvalue came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Torus Fourier mode with integer frequencies `(m₁, m₂)`.
    Wave(i64, i64),
    /// Spherical-harmonic degree.
    Degree(u32),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Wave(m1, m2) => write!(f, "{m1}:{m2}"),
            Mode::Degree(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub mode: Mode,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// Per-block eigenvalues in block order.
    pub entries: Vec<SpectrumEntry>,
    pub max_eigenvalue: f64,
    /// Number of eigenvalues (with multiplicity) with `|μ| < zero_tol`.
    pub zero_dim: usize,
    /// Smallest `|μ|` among eigenvalues `μ < -zero_tol`; `None` if there are none.
    pub gap: Option<f64>,
    pub zero_tol: f64,
}

impl SpectrumReport {
    pub fn from_entries(entries: Vec<SpectrumEntry>, zero_tol: f64) -> Self {
        let max_eigenvalue = entries.iter().map(|e| e.eigenvalue).fold(f64::NEG_INFINITY, f64::max);
        let zero_dim = entries
            .iter()
            .filter(|e| e.eigenvalue.abs() < zero_tol)
            .map(|e| e.multiplicity)
            .sum();
        let gap = entries
            .iter()
            .filter(|e| e.eigenvalue < -zero_tol)
            .map(|e| -e.eigenvalue)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
        Self { entries, max_eigenvalue, zero_dim, gap, zero_tol }
    }

    /// All eigenvalues repeated by multiplicity, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.eigenvalue, e.multiplicity))
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn is_unstable(&self) -> bool {
        self.max_eigenvalue > self.zero_tol
    }

    /// Largest eigenvalue strictly below `-zero_tol` (the top of the stable part).
    pub fn top_nonzero(&self) -> Option<f64> {
        self.gap.map(|g| -g)
    }
}

/// Groups eigenvalues of one block that agree to `1e-12` relative.
pub(crate) fn merge_block(mode: Mode, mut eigs: Vec<f64>, base_multiplicity: usize) -> Vec<SpectrumEntry> {
    eigs.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<SpectrumEntry> = Vec::with_capacity(eigs.len());
    for mu in eigs {
        match out.last_mut() {
            Some(last) if (last.eigenvalue - mu).abs() <= 1e-12 * last.eigenvalue.abs().max(1.0) => {
                last.multiplicity += base_multiplicity;
            }
            _ => out.push(SpectrumEntry { mode, eigenvalue: mu, multiplicity: base_multiplicity }),
        }
    }
    out
}

/// Center-space dimension read off a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CenterDimension {
    pub dim: usize,
    /// Set when some eigenvalue exceeds `zero_tol`.
    pub unstable: bool,
}

pub fn center_dimension(report: &SpectrumReport) -> CenterDimension {
    CenterDimension { dim: report.zero_dim, unstable: report.is_unstable() }
}
