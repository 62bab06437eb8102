//! Sampled functions and forms on a [`TorusGrid`].

use crate::error::{Error, Result};
use crate::grid::TorusGrid;

fn first_non_finite(values: &[f64]) -> Option<usize> {
    values.iter().position(|v| !v.is_finite())
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Function on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

/// 1-form `c1 dx¹ + c2 dx²`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

/// 2-form `density dx¹ ∧ dx²`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub density: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        Self { values: vec![c; grid.len()] }
    }

    /// Samples `f(x¹, x²)` at the grid points.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: (0..grid.len())
                .map(|idx| {
                    let (x, y) = grid.coords(idx);
                    f(x, y)
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    /// Arithmetic mean over grid points (the `h`-average).
    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub(crate) fn validate(&self, grid: &TorusGrid, what: &'static str) -> Result<()> {
        grid.check_len(self.values.len())?;
        if let Some(index) = first_non_finite(&self.values) {
            return Err(Error::NonFinite { what, index });
        }
        Ok(())
    }
}

impl OneForm {
    pub fn new(c1: Vec<f64>, c2: Vec<f64>) -> Self {
        Self { c1, c2 }
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self::constant(grid, [0.0, 0.0])
    }

    pub fn constant(grid: &TorusGrid, c: [f64; 2]) -> Self {
        Self { c1: vec![c[0]; grid.len()], c2: vec![c[1]; grid.len()] }
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let (c1, c2) = (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.coords(idx);
                let [a, b] = f(x, y);
                (a, b)
            })
            .unzip();
        Self { c1, c2 }
    }

    pub fn from_components(c1: ScalarField, c2: ScalarField) -> Self {
        Self { c1: c1.values, c2: c2.values }
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.c1).max(sup(&self.c2))
    }

    /// Component means, which on the flat torus are the harmonic part.
    pub fn mean(&self) -> [f64; 2] {
        [mean(&self.c1), mean(&self.c2)]
    }

    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + alpha * y).collect();
        Self { c1: f(&self.c1, &other.c1), c2: f(&self.c2, &other.c2) }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            c1: self.c1.iter().map(|v| alpha * v).collect(),
            c2: self.c2.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Flat Hodge star, `★dx¹ = dx²`, `★dx² = -dx¹`.
    pub fn star(&self) -> Self {
        Self { c1: self.c2.iter().map(|v| -v).collect(), c2: self.c1.clone() }
    }

    pub(crate) fn validate(&self, grid: &TorusGrid, what: &'static str) -> Result<()> {
        grid.check_len(self.c1.len())?;
        grid.check_len(self.c2.len())?;
        if let Some(index) = first_non_finite(&self.c1).or_else(|| first_non_finite(&self.c2)) {
            return Err(Error::NonFinite { what, index });
        }
        Ok(())
    }
}

impl TwoForm {
    pub fn new(density: Vec<f64>) -> Self {
        Self { density }
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        Self { density: vec![c; grid.len()] }
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.density)
    }

    pub(crate) fn validate(&self, grid: &TorusGrid, what: &'static str) -> Result<()> {
        grid.check_len(self.density.len())?;
        if let Some(index) = first_non_finite(&self.density) {
            return Err(Error::NonFinite { what, index });
        }
        Ok(())
    }
}
