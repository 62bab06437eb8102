//! Time integration of the Ricci Yang-Mills flow on the flat torus.
//!
//! The state is the conformal factor `u` of `g = e^u h` and the periodic
//! part `ã` of the connection. For Chern number `c ≠ 0` the connection is
//! not a global 1-form; only `ã` is stored and the curvature density is
//! assembled as `φ = λ₀ + ∂₁ã₂ − ∂₂ã₁`, so `∫ φ dV_h = 2πc` holds exactly.
//! The fiducial potential has zero flat divergence, so `d*a = d*ã`.
//!
//! Right-hand sides, with `|F|²_g = e^{-2u} φ²` and `R_g = e^{-u}(R_h − Δ_h u)`:
//!
//! ```text
//! RYM    ∂u = Δ_g u − R_h e^{-u} + ½|F|²              ∂ã = −d*F
//! GRYM   ∂u = Δ_g u − R_h e^{-u} + ½|F|²              ∂ã = −d*F − d d*ã
//! NGRYM  ∂u = Δ_g u − R_h e^{-u} + ½|F|² + r − ½f     ∂ã = −d*F − d d*ã
//! YM     ∂u = 0                                        ∂ã = −d*F
//! ```
//!
//! where `r` and `f` are the `g`-averages of `R_g` and `|F|²_g`. The last
//! variant is the Yang-Mills heat flow with the metric frozen.

use std::fmt;
use std::str::FromStr;

use thiserror::Error as ThisError;

use crate::bundle::BundleParams;
use crate::error::{Error, Result};
use crate::fields::{OneForm, ScalarField, TwoForm};
use crate::geometry::{codiff1_g, codiff2_g, exterior_d0, exterior_d1, integrate_g, laplacian_g};
use crate::grid::TorusGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Rym,
    Grym,
    Ngrym,
    /// Yang-Mills heat flow with `u` frozen.
    YangMills,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Rym => "RYM",
            Variant::Grym => "GRYM",
            Variant::Ngrym => "NGRYM",
            Variant::YangMills => "YM",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RYM" => Ok(Variant::Rym),
            "GRYM" => Ok(Variant::Grym),
            "NGRYM" => Ok(Variant::Ngrym),
            "YM" => Ok(Variant::YangMills),
            other => Err(Error::InvalidParams(format!("unknown flow variant {other:?}"))),
        }
    }
}

pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-9;
pub const DEFAULT_SAFETY: f64 = 0.5;
pub const DEFAULT_CFL_CONSTANT: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    pub bundle: BundleParams,
    pub variant: Variant,
    pub dt: f64,
    pub t_end: f64,
    pub convergence_tol: f64,
    /// CFL safety factor in `(0, 1]`.
    pub safety: f64,
    /// Denominator of the explicit stability heuristic.
    pub cfl_constant: f64,
}

impl FlowParams {
    pub fn new(bundle: BundleParams, variant: Variant, dt: f64, t_end: f64) -> Self {
        Self {
            bundle,
            variant,
            dt,
            t_end,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            safety: DEFAULT_SAFETY,
            cfl_constant: DEFAULT_CFL_CONSTANT,
        }
    }

    /// Same parameters with `dt` set to the stability limit for `u`.
    pub fn with_cfl_dt(mut self, grid: &TorusGrid, u: &ScalarField) -> Self {
        self.dt = cfl_limit(grid, u, self.safety, self.cfl_constant);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end = {} must be non-negative", self.t_end));
        }
        if !(self.convergence_tol > 0.0) {
            return bad(format!("convergence_tol = {} must be positive", self.convergence_tol));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety = {} must lie in (0, 1]", self.safety));
        }
        if !(self.cfl_constant > 0.0) {
            return bad(format!("cfl_constant = {} must be positive", self.cfl_constant));
        }
        Ok(())
    }
}

/// Explicit-step heuristic `safety · min(h₁,h₂)² · e^{min u} / constant`.
pub fn cfl_limit(grid: &TorusGrid, u: &ScalarField, safety: f64, constant: f64) -> f64 {
    let h = grid.h1().min(grid.h2());
    safety * h * h * u.min().exp() / constant
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub u: ScalarField,
    pub atilde: OneForm,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentState {
    pub du: ScalarField,
    pub datilde: OneForm,
}

impl TangentState {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self { du: ScalarField::zeros(grid), datilde: OneForm::zeros(grid) }
    }

    pub fn sup_norm(&self) -> f64 {
        self.du.sup_norm().max(self.datilde.sup_norm())
    }

    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        Self {
            du: self.du.axpy(alpha, &other.du),
            datilde: self.datilde.axpy(alpha, &other.datilde),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { du: self.du.scaled(alpha), datilde: self.datilde.scaled(alpha) }
    }

    /// Flat L² norm over `(v, b₁, b₂)`.
    pub fn l2_norm(&self, grid: &TorusGrid) -> f64 {
        let s: f64 = self
            .du
            .values
            .iter()
            .chain(&self.datilde.c1)
            .chain(&self.datilde.c2)
            .map(|x| x * x)
            .sum();
        (s * grid.cell_area()).sqrt()
    }
}

impl FlowState {
    pub fn validate(&self, grid: &TorusGrid) -> Result<()> {
        self.u.validate(grid, "conformal factor")?;
        self.atilde.validate(grid, "connection")
    }

    /// `self + h · tangent`, with time advanced by `h`.
    pub fn advance(&self, h: f64, tangent: &TangentState) -> FlowState {
        FlowState {
            u: self.u.axpy(h, &tangent.du),
            atilde: self.atilde.axpy(h, &tangent.datilde),
            t: self.t + h,
        }
    }

    /// Displaces the fields (not the time) along `tangent`.
    pub fn displaced(&self, h: f64, tangent: &TangentState) -> FlowState {
        FlowState { t: self.t, ..self.advance(h, tangent) }
    }
}

/// Einstein Yang-Mills point: `u ≡ u_const`, `ã` the constant 1-form
/// `harmonic`. Then `dã = 0`, `d*ã = 0` and `F = λ₀ dV_h = λ dV_g` with
/// `λ = λ₀ e^{-u_const}`.
pub fn einstein_ym(grid: &TorusGrid, u_const: f64, harmonic: [f64; 2]) -> FlowState {
    FlowState {
        u: ScalarField::constant(grid, u_const),
        atilde: OneForm::constant(grid, harmonic),
        t: 0.0,
    }
}

/// `φ = λ₀ + density(d1 ã)`.
pub fn curvature_density(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams) -> Result<TwoForm> {
    let mut phi = exterior_d1(grid, &state.atilde)?;
    phi.density.iter_mut().for_each(|p| *p += bundle.lambda0);
    Ok(phi)
}

/// `R_g = e^{-u}(R_h − Δ_h u)`.
pub fn scalar_curvature(grid: &TorusGrid, u: &ScalarField, r_h: f64) -> Result<ScalarField> {
    let lap = laplacian_g(grid, u, u)?;
    Ok(ScalarField::new(
        u.values
            .iter()
            .zip(&lap.values)
            .map(|(uu, l)| r_h * (-uu).exp() - l)
            .collect(),
    ))
}

/// Pointwise `|F|²_g = e^{-2u} φ²`.
fn curvature_norm_sq(u: &ScalarField, phi: &TwoForm) -> ScalarField {
    ScalarField::new(
        u.values
            .iter()
            .zip(&phi.density)
            .map(|(uu, p)| (-2.0 * uu).exp() * p * p)
            .collect(),
    )
}

fn blowup(t: f64, what: &str) -> Error {
    Error::Blowup { t, reason: format!("non-finite {what}") }
}

fn check_finite(values: &[f64], t: f64, what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(blowup(t, what))
    }
}

/// Averages `(r, f)` and the volume `∫ dV_g`.
fn normalization(
    grid: &TorusGrid,
    u: &ScalarField,
    r_h: f64,
    f_sq: &ScalarField,
) -> Result<(f64, f64, f64)> {
    let vol = integrate_g(grid, &ScalarField::constant(grid, 1.0), u)?;
    let r = integrate_g(grid, &scalar_curvature(grid, u, r_h)?, u)? / vol;
    let f = integrate_g(grid, f_sq, u)? / vol;
    Ok((vol, r, f))
}

fn rhs_impl(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams, variant: Variant) -> Result<TangentState> {
    state.validate(grid)?;
    let u = &state.u;
    let phi = curvature_density(grid, state, bundle)?;
    let f_sq = curvature_norm_sq(u, &phi);
    check_finite(&f_sq.values, state.t, "|F|^2")?;

    let du = if variant == Variant::YangMills {
        ScalarField::zeros(grid)
    } else {
        let lap = laplacian_g(grid, u, u)?;
        let mut du: Vec<f64> = (0..grid.len())
            .map(|i| lap.values[i] - bundle.r_h * (-u.values[i]).exp() + 0.5 * f_sq.values[i])
            .collect();
        if variant == Variant::Ngrym {
            let (_, r, f) = normalization(grid, u, bundle.r_h, &f_sq)?;
            du.iter_mut().for_each(|d| *d += r - 0.5 * f);
        }
        ScalarField::new(du)
    };

    let mut da = codiff2_g(grid, &phi, u)?.scaled(-1.0);
    if matches!(variant, Variant::Grym | Variant::Ngrym) {
        let gauge = exterior_d0(grid, &codiff1_g(grid, &state.atilde, u)?)?;
        da = da.axpy(-1.0, &gauge);
    }
    check_finite(&du.values, state.t, "du")?;
    check_finite(&da.c1, state.t, "da")?;
    check_finite(&da.c2, state.t, "da")?;
    Ok(TangentState { du, datilde: da })
}

pub fn rhs_ngrym(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams) -> Result<TangentState> {
    rhs_impl(grid, state, bundle, Variant::Ngrym)
}

pub fn rhs_grym(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams) -> Result<TangentState> {
    rhs_impl(grid, state, bundle, Variant::Grym)
}

pub fn rhs_rym(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams) -> Result<TangentState> {
    rhs_impl(grid, state, bundle, Variant::Rym)
}

pub fn rhs_yang_mills(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams) -> Result<TangentState> {
    rhs_impl(grid, state, bundle, Variant::YangMills)
}

/// Right-hand side of the selected variant.
pub fn rhs(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams, variant: Variant) -> Result<TangentState> {
    rhs_impl(grid, state, bundle, variant)
}

fn rk4(
    grid: &TorusGrid,
    state: &FlowState,
    params: &FlowParams,
    h: f64,
    k1: TangentState,
) -> Result<FlowState> {
    let f = |s: &FlowState| rhs_impl(grid, s, &params.bundle, params.variant);
    let k2 = f(&state.advance(0.5 * h, &k1))?;
    let k3 = f(&state.advance(0.5 * h, &k2))?;
    let k4 = f(&state.advance(h, &k3))?;
    let incr = k1.axpy(2.0, &k2).axpy(2.0, &k3).axpy(1.0, &k4);
    let next = state.advance(h / 6.0, &incr);
    check_finite(&next.u.values, next.t, "u")?;
    Ok(FlowState { t: state.t + h, ..next })
}

/// One classical RK4 step of length `params.dt`.
pub fn step(grid: &TorusGrid, state: &FlowState, params: &FlowParams) -> Result<FlowState> {
    params.validate()?;
    let limit = cfl_limit(grid, &state.u, params.safety, params.cfl_constant);
    if params.dt > limit {
        log::warn!("dt = {:e} exceeds the stability heuristic {:e}", params.dt, limit);
    }
    let k1 = rhs_impl(grid, state, &params.bundle, params.variant)?;
    rk4(grid, state, params, params.dt, k1)
}

/// `W³ = −d*_g ã` and its sup norm. The horizontal components vanish for
/// conformal metrics and the fiducial potential is divergence-free.
pub fn gauge_field_w(grid: &TorusGrid, state: &FlowState) -> Result<(ScalarField, f64)> {
    let w = codiff1_g(grid, &state.atilde, &state.u)?.scaled(-1.0);
    let norm = w.sup_norm();
    Ok((w, norm))
}

/// `½ ∫ |F|²_g dV_g`.
pub fn yang_mills_energy(grid: &TorusGrid, state: &FlowState, bundle: &BundleParams) -> Result<f64> {
    let phi = curvature_density(grid, state, bundle)?;
    Ok(0.5 * integrate_g(grid, &curvature_norm_sq(&state.u, &phi), &state.u)?)
}

/// One sample of the flow diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `∫ dV_g`.
    pub volume: f64,
    /// Mean scalar curvature.
    pub r: f64,
    /// Mean `|F|²_g`.
    pub f: f64,
    pub ym_energy: f64,
    /// `‖d*ã‖_∞`.
    pub gauge_norm: f64,
    /// `‖d*ã‖` in `L²(dV_g)`.
    pub gauge_l2: f64,
    /// Harmonic part of `ã`.
    pub harmonic: [f64; 2],
    /// `‖u − ū‖_∞` with `ū = ln(Vol_g / Vol_h)`, the volume-matched constant.
    pub du_norm: f64,
    /// `‖ã − harmonic‖_∞`.
    pub da_norm: f64,
    /// `‖Ψ(state)‖_∞` of the flow's right-hand side.
    pub rhs_norm: f64,
}

impl DiagnosticRecord {
    /// Distance to the limiting fixed point (sup-norm proxy).
    pub fn perturbation_norm(&self) -> f64 {
        self.du_norm.max(self.da_norm)
    }
}

pub fn diagnose(grid: &TorusGrid, state: &FlowState, params: &FlowParams) -> Result<DiagnosticRecord> {
    let bundle = &params.bundle;
    let phi = curvature_density(grid, state, bundle)?;
    let f_sq = curvature_norm_sq(&state.u, &phi);
    let (volume, r, f) = normalization(grid, &state.u, bundle.r_h, &f_sq)?;
    let (w, gauge_norm) = gauge_field_w(grid, state)?;
    let gauge_l2 = integrate_g(grid, &w.map(|x| x * x), &state.u)?.sqrt();
    let harmonic = state.atilde.mean();
    let u_bar = (volume / grid.area()).ln();
    let du_norm = state.u.values.iter().fold(0.0_f64, |m, v| m.max((v - u_bar).abs()));
    let da_norm = state
        .atilde
        .c1
        .iter()
        .map(|v| (v - harmonic[0]).abs())
        .chain(state.atilde.c2.iter().map(|v| (v - harmonic[1]).abs()))
        .fold(0.0_f64, f64::max);
    let rhs_norm = rhs_impl(grid, state, bundle, params.variant)?.sup_norm();
    Ok(DiagnosticRecord {
        t: state.t,
        volume,
        r,
        f,
        ym_energy: 0.5 * volume * f,
        gauge_norm,
        gauge_l2,
        harmonic,
        du_norm,
        da_norm,
        rhs_norm,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub records: Vec<DiagnosticRecord>,
}

impl Diagnostics {
    /// `(t, value)` pairs for one column.
    pub fn series(&self, column: impl Fn(&DiagnosticRecord) -> f64) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, column(r))).collect()
    }

    pub fn last(&self) -> Option<&DiagnosticRecord> {
        self.records.last()
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOutcome {
    pub state: FlowState,
    pub diagnostics: Diagnostics,
    pub converged: bool,
    pub steps: usize,
    pub final_rhs_norm: f64,
}

/// Failure during [`evolve`], carrying the last finite state and the
/// diagnostics gathered so far.
#[derive(ThisError)]
#[error("{source}")]
pub struct EvolveError {
    #[source]
    pub source: Error,
    pub last_good: Box<FlowState>,
    pub diagnostics: Diagnostics,
}

impl std::fmt::Debug for EvolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolveError")
            .field("source", &self.source)
            .field("last_good_t", &self.last_good.t)
            .field("samples", &self.diagnostics.records.len())
            .finish()
    }
}

/// Integrates to `t_end` or until `‖rhs‖_∞ < convergence_tol`, sampling
/// diagnostics every `sample_every` steps (and at the final state).
pub fn evolve(
    grid: &TorusGrid,
    initial: FlowState,
    params: &FlowParams,
    sample_every: usize,
) -> std::result::Result<EvolveOutcome, EvolveError> {
    let sample_every = sample_every.max(1);
    let mut diagnostics = Diagnostics::default();
    let mut state = initial;
    macro_rules! bail {
        ($e:expr, $state:expr) => {
            match $e {
                Ok(v) => v,
                Err(source) => {
                    let source = match source {
                        Error::NonFinite { what, .. } => blowup($state.t, what),
                        other => other,
                    };
                    return Err(EvolveError {
                        source,
                        last_good: Box::new($state.clone()),
                        diagnostics,
                    });
                }
            }
        };
    }
    bail!(params.validate(), state);
    bail!(state.validate(grid), state);
    let limit = cfl_limit(grid, &state.u, params.safety, params.cfl_constant);
    if params.dt > limit {
        log::warn!("dt = {:e} exceeds the stability heuristic {:e}", params.dt, limit);
    }

    let t_stop = params.t_end - 1e-9 * params.dt;
    let mut steps = 0usize;
    let (converged, final_rhs_norm) = loop {
        let k1 = bail!(rhs_impl(grid, &state, &params.bundle, params.variant), state);
        let norm = k1.sup_norm();
        if steps % sample_every == 0 {
            let rec = bail!(diagnose(grid, &state, params), state);
            diagnostics.records.push(rec);
        }
        if norm < params.convergence_tol {
            break (true, norm);
        }
        if state.t >= t_stop {
            break (false, norm);
        }
        let h = params.dt.min(params.t_end - state.t);
        let next = bail!(rk4(grid, &state, params, h, k1), state);
        state = next;
        steps += 1;
    };
    if diagnostics.last().is_none_or(|r| r.t < state.t) {
        let rec = bail!(diagnose(grid, &state, params), state);
        diagnostics.records.push(rec);
    }
    Ok(EvolveOutcome { state, diagnostics, converged, steps, final_rhs_norm })
}
