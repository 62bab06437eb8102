//! Linearized spectrum on the unit round sphere and the Chern-number
//! stability classifier.
//!
//! Write the connection perturbation as `b = df + ★dg` (no harmonic part on
//! S²) and restrict to degree-`k` spherical harmonics with `Δ Y = μ Y`,
//! `μ = −k(k+1)`. In the orthonormal coordinates `v`, `F = κ f`, `G = κ g`
//! with `κ = √(k(k+1))` the operator acts by
//!
//! ```text
//! ⎡ μ + 2 − λ²   0    −λκ ⎤
//! ⎢ 0            μ     0  ⎥
//! ⎣ −λκ          0     μ  ⎦
//! ```
//!
//! The `(v, G)` determinant is `μ(μ + 2)`, so degree 1 always carries a
//! zero eigenvalue: the infinitesimal Möbius transformations, which move
//! the constant-curvature metric and its Yang-Mills connection together.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::spectrum::{merge_block, Mode, SpectrumEntry, SpectrumOptions, SpectrumReport};

/// Scalar curvature of the unit sphere.
pub const SPHERE_CURVATURE: f64 = 2.0;
pub const DEFAULT_K_MAX: u32 = 32;
pub const MIN_K_MAX: u32 = 8;
/// Grid resolution of the `α` search in [`find_feasible_bound`].
pub const ALPHA_GRID: usize = 10_000;

/// `μ_k = −k(k+1)`.
pub fn laplacian_eig(k: u32) -> f64 {
    let k = k as f64;
    -k * (k + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicBlock {
    pub degree: u32,
    pub lambda: f64,
    /// 1×1 for `k = 0` (only `v`), otherwise 3×3 on `(v, F, G)`.
    pub matrix: DMatrix<f64>,
}

pub fn block_matrix(k: u32, lambda: f64) -> HarmonicBlock {
    let mu = laplacian_eig(k);
    let matrix = if k == 0 {
        DMatrix::from_element(1, 1, SPHERE_CURVATURE - lambda * lambda)
    } else {
        let kappa = (-mu).sqrt();
        let c = -lambda * kappa;
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(3, 3, &[
            mu + SPHERE_CURVATURE - lambda * lambda, 0.0, c,
            0.0, mu, 0.0,
            c, 0.0, mu,
        ]);
        m
    };
    HarmonicBlock { degree: k, lambda, matrix }
}

impl HarmonicBlock {
    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }

    /// Eigenvalues with the requested directions removed.
    fn reported_eigenvalues(&self, opts: &SpectrumOptions) -> Vec<f64> {
        match self.degree {
            0 if opts.volume_preserving => Vec::new(),
            1 if opts.modulo_conformal => {
                // the (v, G) block has eigenvalues 0 and μ + 2 − λ² + μ; keep the latter
                let mut e = self.eigenvalues();
                let null = e
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                e.remove(null);
                e
            }
            _ => self.eigenvalues(),
        }
    }
}

fn check_k_max(k_max: u32) -> Result<()> {
    if k_max < MIN_K_MAX {
        return Err(Error::InvalidParams(format!("k_max = {k_max} below {MIN_K_MAX}")));
    }
    Ok(())
}

/// Eigenvalues of all blocks `k = 0..=k_max`, each with multiplicity `2k + 1`.
pub fn sphere_full_spectrum(lambda: f64, k_max: u32, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    check_k_max(k_max)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidParams(format!("lambda = {lambda}")));
    }
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for k in 0..=k_max {
        let block = block_matrix(k, lambda);
        entries.extend(merge_block(Mode::Degree(k), block.reported_eigenvalues(opts), 2 * k as usize + 1));
    }
    Ok(SpectrumReport::from_entries(entries, opts.zero_tol))
}

/// Largest eigenvalue of the degree-`k` block.
pub fn block_top(k: u32, lambda: f64) -> f64 {
    block_matrix(k, lambda).eigenvalues()[0]
}

/// Whether the block maxima decrease strictly on `k ∈ [8, k_max]`, so the
/// maximum over that range sits at `k = 8`.
pub fn tail_is_monotone(lambda: f64, k_max: u32) -> bool {
    let tops: Vec<f64> = (MIN_K_MAX..=k_max).map(|k| block_top(k, lambda)).collect();
    tops.windows(2).all(|w| w[1] < w[0])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Unstable { top: f64 },
    StrictlyStable { gap: f64 },
    /// No positive eigenvalue but a kernel of dimension `zero_dim`.
    Marginal { zero_dim: usize },
}

impl Verdict {
    pub fn from_report(report: &SpectrumReport) -> Self {
        if report.is_unstable() {
            Verdict::Unstable { top: report.max_eigenvalue }
        } else if report.zero_dim > 0 {
            Verdict::Marginal { zero_dim: report.zero_dim }
        } else {
            Verdict::StrictlyStable { gap: -report.max_eigenvalue }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Unstable { .. } => "unstable",
            Verdict::StrictlyStable { .. } => "stable",
            Verdict::Marginal { .. } => "marginal",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChernClassification {
    pub chern: i64,
    pub lambda: f64,
    pub verdict: Verdict,
    pub spectrum: SpectrumReport,
}

pub fn classify_chern(n: i64, k_max: u32) -> Result<ChernClassification> {
    classify_chern_with(n, k_max, &SpectrumOptions::default())
}

pub fn classify_chern_with(n: i64, k_max: u32, opts: &SpectrumOptions) -> Result<ChernClassification> {
    let lambda = n as f64 / 2.0;
    let spectrum = sphere_full_spectrum(lambda, k_max, opts)?;
    let verdict = Verdict::from_report(&spectrum);
    Ok(ChernClassification { chern: n, lambda, verdict, spectrum })
}

/// Whether `α ∈ (0, 1)`, `δ > 0` satisfy `(2 + δ)/α ≤ λ² ≤ 8/α − 4δ/α²`.
pub fn bound_feasibility(lambda: f64, alpha: f64, delta: f64) -> bool {
    if !(alpha > 0.0 && alpha < 1.0 && delta > 0.0) {
        return false;
    }
    let l2 = lambda * lambda;
    (2.0 + delta) / alpha <= l2 && l2 <= 8.0 / alpha - 4.0 * delta / (alpha * alpha)
}

/// Largest admissible `δ` for a given `α`: `min(αλ² − 2, 2α − λ²α²/4)`.
pub fn delta_bound(lambda: f64, alpha: f64) -> f64 {
    let l2 = lambda * lambda;
    (alpha * l2 - 2.0).min(2.0 * alpha - l2 * alpha * alpha / 4.0)
}

/// Grid search over `α = i/ALPHA_GRID` for the pair with the largest `δ`.
/// `δ` is shrunk by one part in 10¹² so the returned pair passes
/// [`bound_feasibility`] despite rounding.
pub fn find_feasible_bound(lambda: f64) -> Option<(f64, f64)> {
    let best = (1..ALPHA_GRID)
        .map(|i| i as f64 / ALPHA_GRID as f64)
        .map(|a| (a, delta_bound(lambda, a)))
        .max_by(|x, y| x.1.total_cmp(&y.1))?;
    let (alpha, delta) = (best.0, best.1 * (1.0 - 1e-12));
    (delta > 0.0 && bound_feasibility(lambda, alpha, delta)).then_some((alpha, delta))
}
