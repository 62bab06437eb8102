//! Periodic rectangular grid on the flat torus `[0, L1) x [0, L2)` and the
//! 2-D FFT used by every differential operator.
//!
//! Storage is row-major with `x¹` as the slow index: the value at grid
//! point `(i, j)` lives at `i * n2 + j`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default grid points per axis.
pub const DEFAULT_N: usize = 64;
/// Default period per axis.
pub const DEFAULT_PERIOD: f64 = TAU;

#[derive(Clone)]
pub struct TorusGrid {
    n1: usize,
    n2: usize,
    l1: f64,
    l2: f64,
    /// Derivative wavenumbers per spectral index, Nyquist entry zeroed.
    k1: Vec<f64>,
    k2: Vec<f64>,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .field("l1", &self.l1)
            .field("l2", &self.l2)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n1 == other.n1 && self.n2 == other.n2 && self.l1 == other.l1 && self.l2 == other.l2
    }
}

/// Signed integer frequency for spectral index `p` on an axis of `n` points.
/// The Nyquist index `n/2` maps to `+n/2`.
pub fn signed_frequency(p: usize, n: usize) -> i64 {
    if p <= n / 2 {
        p as i64
    } else {
        p as i64 - n as i64
    }
}

impl TorusGrid {
    pub fn new(n1: usize, n2: usize, l1: f64, l2: f64) -> Result<Self> {
        for (n, axis) in [(n1, 1), (n2, 2)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "n{axis} = {n}; need an even count >= 4"
                )));
            }
        }
        for (l, axis) in [(l1, 1), (l2, 2)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("period L{axis} = {l} must be positive")));
            }
        }
        let mut planner = FftPlanner::new();
        let wavenumbers = |n: usize, l: f64| -> Vec<f64> {
            (0..n)
                .map(|p| {
                    if p == n / 2 {
                        0.0
                    } else {
                        TAU * signed_frequency(p, n) as f64 / l
                    }
                })
                .collect()
        };
        Ok(Self {
            n1,
            n2,
            l1,
            l2,
            k1: wavenumbers(n1, l1),
            k2: wavenumbers(n2, l2),
            fwd1: planner.plan_fft_forward(n1),
            inv1: planner.plan_fft_inverse(n1),
            fwd2: planner.plan_fft_forward(n2),
            inv2: planner.plan_fft_inverse(n2),
        })
    }

    /// Square grid with `n` points per axis and both periods `2π`.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, DEFAULT_PERIOD, DEFAULT_PERIOD)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h1(&self) -> f64 {
        self.l1 / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        self.l2 / self.n2 as f64
    }

    /// Area of one grid cell, the quadrature weight of `dV_h`.
    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    /// Total flat area `L1 * L2`.
    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }

    /// Physical coordinates of flat index `idx`.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (i, j) = (idx / self.n2, idx % self.n2);
        (i as f64 * self.h1(), j as f64 * self.h2())
    }

    /// Derivative wavenumber pair at spectral flat index `idx` (Nyquist zeroed).
    pub fn wavenumber(&self, idx: usize) -> (f64, f64) {
        (self.k1[idx / self.n2], self.k2[idx % self.n2])
    }

    /// Signed integer frequencies at spectral flat index `idx`.
    pub fn frequency(&self, idx: usize) -> (i64, i64) {
        (
            signed_frequency(idx / self.n2, self.n1),
            signed_frequency(idx % self.n2, self.n2),
        )
    }

    /// True if either frequency sits on the Nyquist index.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx / self.n2 == self.n1 / 2 || idx % self.n2 == self.n2 / 2
    }

    /// Spectral flat index of the signed frequency pair `(m1, m2)`.
    pub fn spectral_index(&self, m1: i64, m2: i64) -> usize {
        let p1 = m1.rem_euclid(self.n1 as i64) as usize;
        let p2 = m2.rem_euclid(self.n2 as i64) as usize;
        p1 * self.n2 + p2
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got: len });
        }
        Ok(())
    }

    /// Unnormalized forward 2-D DFT of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, false);
        buf
    }

    /// Inverse 2-D DFT (normalized by `1/(n1 n2)`), keeping the real part.
    pub fn inverse_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut coeffs, true);
        let scale = 1.0 / self.len() as f64;
        coeffs.iter().map(|c| c.re * scale).collect()
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let (along2, along1) = if inverse {
            (&self.inv2, &self.inv1)
        } else {
            (&self.fwd2, &self.fwd1)
        };
        along2.process(buf);
        let (n1, n2) = (self.n1, self.n2);
        let mut cols = vec![Complex64::new(0.0, 0.0); buf.len()];
        for i in 0..n1 {
            for j in 0..n2 {
                cols[j * n1 + i] = buf[i * n2 + j];
            }
        }
        along1.process(&mut cols);
        for j in 0..n2 {
            for i in 0..n1 {
                buf[i * n2 + j] = cols[j * n1 + i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_sizes() {
        assert!(TorusGrid::new(5, 8, 1.0, 1.0).is_err());
        assert!(TorusGrid::new(2, 8, 1.0, 1.0).is_err());
        assert!(TorusGrid::new(8, 8, 0.0, 1.0).is_err());
        assert!(TorusGrid::new(8, 8, 1.0, f64::NAN).is_err());
        assert!(TorusGrid::new(4, 6, 1.0, 2.0).is_ok());
    }

    #[test]
    fn nyquist_wavenumber_is_zeroed() {
        let g = TorusGrid::new(8, 6, 2.0, 3.0).unwrap();
        let idx = g.spectral_index(4, 1);
        assert!(g.is_nyquist(idx));
        assert_eq!(g.wavenumber(idx).0, 0.0);
        assert!((g.wavenumber(idx).1 - TAU / 3.0).abs() < 1e-15);
        assert_eq!(g.frequency(g.spectral_index(-3, -2)), (-3, -2));
    }

    #[test]
    fn forward_inverse_roundtrip() {
        let g = TorusGrid::new(8, 12, 1.0, 2.0).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let back = g.inverse_real(g.forward(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_on_its_index() {
        let g = TorusGrid::new(8, 8, TAU, TAU).unwrap();
        let v: Vec<f64> = (0..g.len())
            .map(|idx| {
                let (x, y) = g.coords(idx);
                (2.0 * x + 3.0 * y).cos()
            })
            .collect();
        let hat = g.forward(&v);
        let n = g.len() as f64;
        let p = g.spectral_index(2, 3);
        let q = g.spectral_index(-2, -3);
        assert!((hat[p].re - n / 2.0).abs() < 1e-9);
        assert!((hat[q].re - n / 2.0).abs() < 1e-9);
    }
}
