//! Ricci Yang-Mills flow on U(1)-bundles over constant-curvature surfaces.
//!
//! The crate has two halves. The torus half discretizes the conformal
//! factor `u` (with `g = e^u h`, `h` flat) and the periodic part of the
//! connection on a Fourier-spectral grid and integrates the RYM, GRYM and
//! NGRYM flows. The stability half computes the spectrum of the linearized
//! flow at Einstein Yang-Mills fixed points, per Fourier mode on the torus
//! and per spherical-harmonic degree on the round sphere.
//!
//! Module map:
//!
//! - [`grid`], [`fields`], [`geometry`]: spectral exterior calculus on the flat torus.
//! - [`flow`]: right-hand sides, RK4 stepping, diagnostics, fixed points.
//! - [`fit`]: exponential decay-rate fitting.
//! - [`torus`]: Fourier symbol of the linearization, torus spectrum, Jacobian check.
//! - [`sphere`]: harmonic-degree blocks on S², Chern-number classification.

pub mod bundle;
pub mod error;
pub mod fields;
pub mod fit;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod perturb;
pub mod spectrum;
pub mod sphere;
pub mod torus;

pub use bundle::BundleParams;
pub use error::{Error, Result};
pub use fields::{OneForm, ScalarField, TwoForm};
pub use flow::{FlowParams, FlowState, TangentState, Variant};
pub use grid::TorusGrid;
pub use spectrum::{Mode, SpectrumEntry, SpectrumOptions, SpectrumReport};
