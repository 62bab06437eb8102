//! Linearization of the gauge-fixed flow at an Einstein Yang-Mills point on
//! the flat torus, one Fourier mode at a time.
//!
//! At `u ≡ C`, `ã` harmonic, the linearized operator acting on `(v, b)`
//! is constant-coefficient, so each mode `e^{i k·x}` is invariant and the
//! operator reduces to a 3×3 matrix on `(v̂, b̂₁, b̂₂)`. In coordinates
//! orthonormal for the metric `e^C h` it is the Hermitian symbol
//!
//! ```text
//! ⎡ −|k|² + R − λ²   −iλk₂    iλk₁  ⎤
//! ⎢  iλk₂            −|k|²     0    ⎥
//! ⎣ −iλk₁             0       −|k|² ⎦
//! ```
//!
//! The first row carries `λ⟨db, dV⟩`, the first column `−λ div(v dV)`. The
//! coupling signs are the ones produced by the implemented right-hand side;
//! [`jacobian_check`] compares the two.

use num_complex::Complex64;
use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::bundle::BundleParams;
use crate::error::{Error, Result};
use crate::fields::{OneForm, ScalarField};
use crate::flow::{rhs, FlowState, TangentState, Variant};
use crate::grid::TorusGrid;
use crate::perturb::{band_limited_field, rng_from_seed, DEFAULT_MAX_MODE};
use crate::spectrum::{merge_block, Mode, SpectrumEntry, SpectrumOptions, SpectrumReport};

pub use crate::spectrum::{center_dimension, CenterDimension};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolMatrix {
    pub k: [f64; 2],
    pub lambda: f64,
    pub r_h: f64,
    pub entries: Matrix3<Complex64>,
}

/// Symbol of the linearized operator on the mode with wavevector `k`.
pub fn symbol_matrix(k: [f64; 2], lambda: f64, r_h: f64) -> SymbolMatrix {
    let [k1, k2] = k;
    let kk = k1 * k1 + k2 * k2;
    let re = |x: f64| Complex64::new(x, 0.0);
    let z = re(0.0);
    #[rustfmt::skip]
    let entries = Matrix3::new(
        re(-kk + r_h - lambda * lambda), -I * lambda * k2, I * lambda * k1,
        I * lambda * k2,                 re(-kk),          z,
        -I * lambda * k1,                z,                re(-kk),
    );
    SymbolMatrix { k, lambda, r_h, entries }
}

impl SymbolMatrix {
    /// `max |M − Mᴴ|` entrywise.
    pub fn hermitian_residual(&self) -> f64 {
        let m = &self.entries;
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let eig = SymmetricEigen::new(self.entries);
        let mut e = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }

    /// Unit eigenvectors matching [`Self::eigenvalues`].
    pub fn eigenpairs(&self) -> Vec<(f64, Vector3<Complex64>)> {
        let eig = SymmetricEigen::new(self.entries);
        let mut pairs: Vec<_> = (0..3)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs
    }
}

/// Resolved grid frequencies: every `(m₁, m₂)` strictly inside the Nyquist band.
pub fn resolved_frequencies(grid: &TorusGrid) -> impl Iterator<Item = (i64, i64)> + '_ {
    let c1 = grid.n1() as i64 / 2 - 1;
    let c2 = grid.n2() as i64 / 2 - 1;
    (-c1..=c1).flat_map(move |m1| (-c2..=c2).map(move |m2| (m1, m2)))
}

/// Symbol of the mode `(m₁, m₂)` at the fixed point `u ≡ u_const`, in
/// coordinates orthonormal for `e^{u_const} h`.
pub fn mode_symbol(grid: &TorusGrid, bundle: &BundleParams, u_const: f64, m: (i64, i64)) -> SymbolMatrix {
    let s = (-0.5 * u_const).exp();
    let k = [
        std::f64::consts::TAU * m.0 as f64 / grid.l1() * s,
        std::f64::consts::TAU * m.1 as f64 / grid.l2() * s,
    ];
    symbol_matrix(k, bundle.lambda_at(u_const), bundle.r_h * (-u_const).exp())
}

/// Union of the mode spectra over all resolved wavevectors.
///
/// With `volume_preserving` the constant-`v` direction at `k = 0` (the
/// only one that changes `∫ dV_g`) is dropped.
pub fn torus_spectrum(
    grid: &TorusGrid,
    bundle: &BundleParams,
    u_const: f64,
    opts: &SpectrumOptions,
) -> SpectrumReport {
    if bundle.r_h > 0.0 {
        log::debug!("torus spectrum with R_h = {} > 0 is an operator-level sweep", bundle.r_h);
    }
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for m in resolved_frequencies(grid) {
        let sym = mode_symbol(grid, bundle, u_const, m);
        let eigs = if m == (0, 0) {
            // diagonal: (R − λ², 0, 0) with the first slot the v direction
            let v = sym.entries[(0, 0)].re;
            let mut e = vec![0.0, 0.0];
            if !opts.volume_preserving {
                e.push(v);
            }
            e
        } else {
            sym.eigenvalues().to_vec()
        };
        entries.extend(merge_block(Mode::Wave(m.0, m.1), eigs, 1));
    }
    SpectrumReport::from_entries(entries, opts.zero_tol)
}

/// Largest Hermitian residual over all resolved mode symbols.
pub fn max_hermitian_residual(grid: &TorusGrid, bundle: &BundleParams, u_const: f64) -> f64 {
    resolved_frequencies(grid)
        .map(|m| mode_symbol(grid, bundle, u_const, m).hermitian_residual())
        .fold(0.0, f64::max)
}

/// Returns the constant `C` if `state` is an Einstein Yang-Mills point
/// (`u` constant, `ã` constant).
fn fixed_point_constant(state: &FlowState) -> Result<f64> {
    let c = state.u.mean();
    let spread = state.u.values.iter().fold(0.0_f64, |m, v| m.max((v - c).abs()));
    let h = state.atilde.mean();
    let a_spread = state
        .atilde
        .c1
        .iter()
        .map(|v| (v - h[0]).abs())
        .chain(state.atilde.c2.iter().map(|v| (v - h[1]).abs()))
        .fold(0.0_f64, f64::max);
    if spread > 1e-12 * c.abs().max(1.0) || a_spread > 1e-12 * h[0].abs().max(h[1].abs()).max(1.0) {
        return Err(Error::InvalidParams(
            "linearization point is not an Einstein Yang-Mills state (u and ã must be constant)".into(),
        ));
    }
    Ok(c)
}

/// Action of the linearized right-hand side at `fixed_point`, assembled
/// mode by mode from [`symbol_matrix`].
///
/// The symbol is conjugated back to flat coordinates with
/// `S = diag(e^{C/2}, 1, 1)`. RYM lacks the `−dd*` gauge term, which
/// restores `+e^{-C} k kᵀ` in the connection block. NGRYM adds the
/// linearized averages `r − ½f`, a rank-one term on the mean of `v`:
/// `(λ² − R_h e^{-C}) · mean(v)`.
pub fn linearized_action(
    grid: &TorusGrid,
    fixed_point: &FlowState,
    bundle: &BundleParams,
    variant: Variant,
    tangent: &TangentState,
) -> Result<TangentState> {
    let c = fixed_point_constant(fixed_point)?;
    tangent.du.validate(grid, "tangent v")?;
    tangent.datilde.validate(grid, "tangent b")?;
    let lambda = bundle.lambda_at(c);
    let weight = (-c).exp();
    let s = (0.5 * c).exp();
    let scale = (-0.5 * c).exp();

    let v = grid.forward(&tangent.du.values);
    let b1 = grid.forward(&tangent.datilde.c1);
    let b2 = grid.forward(&tangent.datilde.c2);
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut ov, mut o1, mut o2) = (vec![zero; n], vec![zero; n], vec![zero; n]);
    for idx in 0..n {
        let (k1, k2) = grid.wavenumber(idx);
        let sym = symbol_matrix([k1 * scale, k2 * scale], lambda, bundle.r_h * weight);
        let mut m = sym.entries;
        for j in 1..3 {
            m[(0, j)] /= s;
            m[(j, 0)] *= s;
        }
        match variant {
            Variant::Grym | Variant::Ngrym => {}
            Variant::Rym => {
                let k = [k1, k2];
                for i in 0..2 {
                    for j in 0..2 {
                        m[(i + 1, j + 1)] += weight * k[i] * k[j];
                    }
                }
            }
            Variant::YangMills => {
                return Err(Error::InvalidParams("no linearization for the frozen-metric flow".into()))
            }
        }
        let out = m * Vector3::new(v[idx], b1[idx], b2[idx]);
        ov[idx] = out[0];
        o1[idx] = out[1];
        o2[idx] = out[2];
    }
    if variant == Variant::Ngrym {
        ov[0] += (lambda * lambda - bundle.r_h * weight) * v[0];
    }
    Ok(TangentState {
        du: ScalarField::new(grid.inverse_real(ov)),
        datilde: OneForm::new(grid.inverse_real(o1), grid.inverse_real(o2)),
    })
}

/// Finite-difference vs. assembled action along one direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    /// Flat L² norm of the central difference quotient.
    pub fd_norm: f64,
    /// Flat L² norm of the assembled linear action.
    pub linear_norm: f64,
    /// Flat L² norm of their difference.
    pub error_norm: f64,
}

impl ProbeResult {
    /// Relative error, falling back to absolute when the action vanishes.
    pub fn relative_error(&self) -> f64 {
        if self.linear_norm > 1e-12 {
            self.error_norm / self.linear_norm
        } else {
            self.error_norm
        }
    }
}

pub fn jacobian_probe(
    grid: &TorusGrid,
    fixed_point: &FlowState,
    bundle: &BundleParams,
    variant: Variant,
    direction: &TangentState,
    h_fd: f64,
) -> Result<ProbeResult> {
    let plus = rhs(grid, &fixed_point.displaced(h_fd, direction), bundle, variant)?;
    let minus = rhs(grid, &fixed_point.displaced(-h_fd, direction), bundle, variant)?;
    let fd = plus.axpy(-1.0, &minus).scaled(0.5 / h_fd);
    let lin = linearized_action(grid, fixed_point, bundle, variant, direction)?;
    Ok(ProbeResult {
        fd_norm: fd.l2_norm(grid),
        linear_norm: lin.l2_norm(grid),
        error_norm: fd.axpy(-1.0, &lin).l2_norm(grid),
    })
}

/// Random probe: band-limited `v`, `b₁`, `b₂` of unit sup norm plus random
/// constants, so the mean of `v` and the harmonic directions are exercised.
pub fn random_direction(grid: &TorusGrid, seed: u64) -> TangentState {
    use rand::Rng;
    let mut rng = rng_from_seed(seed);
    let v = band_limited_field(grid, &mut rng, DEFAULT_MAX_MODE);
    let b1 = band_limited_field(grid, &mut rng, DEFAULT_MAX_MODE);
    let b2 = band_limited_field(grid, &mut rng, DEFAULT_MAX_MODE);
    let cv: f64 = rng.random_range(-0.5..0.5);
    let c1: f64 = rng.random_range(-0.5..0.5);
    let c2: f64 = rng.random_range(-0.5..0.5);
    TangentState {
        du: v.map(|x| x + cv),
        datilde: OneForm::new(
            b1.values.iter().map(|x| x + c1).collect(),
            b2.values.iter().map(|x| x + c2).collect(),
        ),
    }
}

/// Max relative L² error between central differences of the nonlinear
/// right-hand side and the assembled linearization over `n_probes`
/// seeded random directions.
pub fn jacobian_check(
    grid: &TorusGrid,
    fixed_point: &FlowState,
    bundle: &BundleParams,
    variant: Variant,
    n_probes: usize,
    h_fd: f64,
    seed: u64,
) -> Result<f64> {
    if !(1e-6..=1e-4).contains(&h_fd) {
        return Err(Error::InvalidParams(format!("h_fd = {h_fd:e} outside [1e-6, 1e-4]")));
    }
    let mut worst = 0.0_f64;
    for p in 0..n_probes {
        let dir = random_direction(grid, seed.wrapping_add(p as u64));
        let probe = jacobian_probe(grid, fixed_point, bundle, variant, &dir, h_fd)?;
        worst = worst.max(probe.relative_error());
    }
    Ok(worst)
}
