//! Spectral exterior calculus for the conformal metric `g = e^u h` on the
//! flat torus.
//!
//! Derivatives are Fourier-spectral with the Nyquist coefficient zeroed, so
//! `d∘d = 0` and the adjoint pairs below hold to rounding. The signs of the
//! codifferentials are fixed by
//!
//! ```text
//! ⟨d0 s, ω⟩_g = ⟨s, codiff1_g ω⟩_g        ⟨d1 β, Φ⟩_g = ⟨β, codiff2_g Φ⟩_g
//! ```
//!
//! with `dV_g = e^u dV_h`, `|ω|²_g = e^{-u}|ω|²_h` on 1-forms and
//! `|Φ|²_g = e^{-2u} φ²` on 2-forms `Φ = φ dx¹∧dx²`.

use num_complex::Complex64;

use crate::error::Result;
use crate::fields::{OneForm, ScalarField, TwoForm};
use crate::grid::TorusGrid;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn exp_neg(u: &ScalarField) -> Vec<f64> {
    u.values.iter().map(|v| (-v).exp()).collect()
}

/// `d` on functions: `(∂₁s, ∂₂s)`.
pub fn exterior_d0(grid: &TorusGrid, s: &ScalarField) -> Result<OneForm> {
    s.validate(grid, "scalar field")?;
    let hat = grid.forward(&s.values);
    let mut h1 = hat.clone();
    let mut h2 = hat;
    for idx in 0..grid.len() {
        let (k1, k2) = grid.wavenumber(idx);
        h1[idx] *= I * k1;
        h2[idx] *= I * k2;
    }
    Ok(OneForm { c1: grid.inverse_real(h1), c2: grid.inverse_real(h2) })
}

/// `d` on 1-forms: density `∂₁ω₂ − ∂₂ω₁`.
pub fn exterior_d1(grid: &TorusGrid, omega: &OneForm) -> Result<TwoForm> {
    omega.validate(grid, "1-form")?;
    let a = grid.forward(&omega.c1);
    let b = grid.forward(&omega.c2);
    let curl = (0..grid.len())
        .map(|idx| {
            let (k1, k2) = grid.wavenumber(idx);
            I * k1 * b[idx] - I * k2 * a[idx]
        })
        .collect();
    Ok(TwoForm { density: grid.inverse_real(curl) })
}

/// Flat divergence `∂₁ω₁ + ∂₂ω₂`.
fn divergence(grid: &TorusGrid, omega: &OneForm) -> Vec<f64> {
    let a = grid.forward(&omega.c1);
    let b = grid.forward(&omega.c2);
    let div = (0..grid.len())
        .map(|idx| {
            let (k1, k2) = grid.wavenumber(idx);
            I * k1 * a[idx] + I * k2 * b[idx]
        })
        .collect();
    grid.inverse_real(div)
}

/// `d*_g` on 1-forms: `-e^{-u} (∂₁ω₁ + ∂₂ω₂)`.
pub fn codiff1_g(grid: &TorusGrid, omega: &OneForm, u: &ScalarField) -> Result<ScalarField> {
    omega.validate(grid, "1-form")?;
    u.validate(grid, "conformal factor")?;
    let div = divergence(grid, omega);
    Ok(ScalarField {
        values: div.iter().zip(&u.values).map(|(d, uu)| -(-uu).exp() * d).collect(),
    })
}

/// `d*_g` on 2-forms: with `ψ = e^{-u} φ`, returns `(∂₂ψ, −∂₁ψ)`.
pub fn codiff2_g(grid: &TorusGrid, phi: &TwoForm, u: &ScalarField) -> Result<OneForm> {
    phi.validate(grid, "2-form")?;
    u.validate(grid, "conformal factor")?;
    let psi: Vec<f64> = phi.density.iter().zip(exp_neg(u)).map(|(p, e)| p * e).collect();
    let hat = grid.forward(&psi);
    let mut h1 = hat.clone();
    let mut h2 = hat;
    for idx in 0..grid.len() {
        let (k1, k2) = grid.wavenumber(idx);
        h1[idx] *= I * k2;
        h2[idx] *= -I * k1;
    }
    Ok(OneForm { c1: grid.inverse_real(h1), c2: grid.inverse_real(h2) })
}

/// `Δ_g s = e^{-u} (∂₁² + ∂₂²) s`, using the same (Nyquist-zeroed)
/// wavenumbers as the first derivatives so that `Δ_g = −d*_g d` exactly.
pub fn laplacian_g(grid: &TorusGrid, s: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
    s.validate(grid, "scalar field")?;
    u.validate(grid, "conformal factor")?;
    let mut hat = grid.forward(&s.values);
    for (idx, c) in hat.iter_mut().enumerate() {
        let (k1, k2) = grid.wavenumber(idx);
        *c *= -(k1 * k1 + k2 * k2);
    }
    let lap = grid.inverse_real(hat);
    Ok(ScalarField {
        values: lap.iter().zip(&u.values).map(|(l, uu)| (-uu).exp() * l).collect(),
    })
}

/// `∫ s dV_g` by the trapezoidal rule (spectrally accurate for periodic data).
pub fn integrate_g(grid: &TorusGrid, s: &ScalarField, u: &ScalarField) -> Result<f64> {
    s.validate(grid, "scalar field")?;
    u.validate(grid, "conformal factor")?;
    let sum: f64 = s.values.iter().zip(&u.values).map(|(a, b)| a * b.exp()).sum();
    Ok(sum * grid.cell_area())
}

/// `∫ s dV_h`.
pub fn integrate_h(grid: &TorusGrid, s: &[f64]) -> f64 {
    s.iter().sum::<f64>() * grid.cell_area()
}

/// `⟨a, b⟩_g` for functions.
pub fn inner_scalar_g(grid: &TorusGrid, a: &ScalarField, b: &ScalarField, u: &ScalarField) -> f64 {
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .zip(&u.values)
        .map(|((x, y), w)| x * y * w.exp())
        .sum();
    sum * grid.cell_area()
}

/// `⟨α, β⟩_g` for 1-forms; conformally invariant in two dimensions.
pub fn inner_one_form(grid: &TorusGrid, a: &OneForm, b: &OneForm) -> f64 {
    let s1: f64 = a.c1.iter().zip(&b.c1).map(|(x, y)| x * y).sum();
    let s2: f64 = a.c2.iter().zip(&b.c2).map(|(x, y)| x * y).sum();
    (s1 + s2) * grid.cell_area()
}

/// `⟨Φ, Ψ⟩_g` for 2-forms: `∫ φ ψ e^{-u} dV_h`.
pub fn inner_two_form_g(grid: &TorusGrid, a: &TwoForm, b: &TwoForm, u: &ScalarField) -> f64 {
    let sum: f64 = a
        .density
        .iter()
        .zip(&b.density)
        .zip(&u.values)
        .map(|((x, y), w)| x * y * (-w).exp())
        .sum();
    sum * grid.cell_area()
}

/// Hodge decomposition of a 1-form on the flat torus.
#[derive(Clone, Debug)]
pub struct HodgeParts {
    /// Constant (harmonic) coefficients `(h₁, h₂)`.
    pub harmonic: [f64; 2],
    /// Mean-zero `α` with exact part `d0 α`.
    pub exact_potential: ScalarField,
    /// Mean-zero `β` with co-exact part `★d0 β`.
    pub coexact_potential: ScalarField,
    /// Content on the pure-Nyquist modes, where every spectral derivative
    /// vanishes. Zero for band-limited input.
    pub unresolved: OneForm,
}

impl HodgeParts {
    /// Sum of the four parts.
    pub fn reconstruct(&self, grid: &TorusGrid) -> Result<OneForm> {
        let exact = exterior_d0(grid, &self.exact_potential)?;
        let coexact = exterior_d0(grid, &self.coexact_potential)?.star();
        let harmonic = OneForm::constant(grid, self.harmonic);
        Ok(harmonic.axpy(1.0, &exact).axpy(1.0, &coexact).axpy(1.0, &self.unresolved))
    }
}

/// Splits `ω = h + d0 α + ★d0 β (+ unresolved Nyquist content)`.
pub fn hodge_decompose(grid: &TorusGrid, omega: &OneForm) -> Result<HodgeParts> {
    omega.validate(grid, "1-form")?;
    let a = grid.forward(&omega.c1);
    let b = grid.forward(&omega.c2);
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut alpha = vec![zero; n];
    let mut beta = vec![zero; n];
    let mut rest1 = vec![zero; n];
    let mut rest2 = vec![zero; n];
    for idx in 1..n {
        let (k1, k2) = grid.wavenumber(idx);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            rest1[idx] = a[idx];
            rest2[idx] = b[idx];
            continue;
        }
        alpha[idx] = -I * (k1 * a[idx] + k2 * b[idx]) / kk;
        beta[idx] = -I * (k1 * b[idx] - k2 * a[idx]) / kk;
    }
    let scale = 1.0 / n as f64;
    Ok(HodgeParts {
        harmonic: [a[0].re * scale, b[0].re * scale],
        exact_potential: ScalarField::new(grid.inverse_real(alpha)),
        coexact_potential: ScalarField::new(grid.inverse_real(beta)),
        unresolved: OneForm::new(grid.inverse_real(rest1), grid.inverse_real(rest2)),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::error::Error;

    fn grid() -> TorusGrid {
        TorusGrid::new(16, 12, TAU, 3.0).unwrap()
    }

    fn smooth(grid: &TorusGrid, seed: f64) -> ScalarField {
        let (l1, l2) = (grid.l1(), grid.l2());
        ScalarField::from_fn(grid, |x, y| {
            let (p, q) = (TAU * x / l1, TAU * y / l2);
            seed * p.sin() + (2.0 * q + seed).cos() * 0.5 + (p - q + 0.3 * seed).sin() * 0.25
        })
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn d0_of_constant_vanishes() {
        let g = grid();
        let w = exterior_d0(&g, &ScalarField::constant(&g, 3.5)).unwrap();
        assert!(w.sup_norm() < 1e-13);
    }

    #[test]
    fn d0_of_sine_is_analytic_derivative() {
        let g = grid();
        let kx = TAU / g.l1();
        let s = ScalarField::from_fn(&g, |x, _| (kx * x).sin());
        let w = exterior_d0(&g, &s).unwrap();
        let expect = ScalarField::from_fn(&g, |x, _| kx * (kx * x).cos());
        assert_close(&w.c1, &expect.values, 1e-13);
        assert!(w.c2.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn d0_is_linear() {
        let g = grid();
        let (s, t) = (smooth(&g, 1.0), smooth(&g, -0.7));
        let (alpha, beta) = (1.3, -2.1);
        let lhs = exterior_d0(&g, &s.scaled(alpha).axpy(beta, &t)).unwrap();
        let rhs = exterior_d0(&g, &s).unwrap().scaled(alpha).axpy(beta, &exterior_d0(&g, &t).unwrap());
        assert_close(&lhs.c1, &rhs.c1, 1e-12);
        assert_close(&lhs.c2, &rhs.c2, 1e-12);
    }

    #[test]
    fn d1_examples() {
        let g = grid();
        let kx = TAU / g.l1();
        let w = OneForm::from_fn(&g, |x, _| [0.0, (kx * x).sin()]);
        let f = exterior_d1(&g, &w).unwrap();
        let expect = ScalarField::from_fn(&g, |x, _| kx * (kx * x).cos());
        assert_close(&f.density, &expect.values, 1e-13);
        let c = exterior_d1(&g, &OneForm::constant(&g, [1.0, -2.0])).unwrap();
        assert!(c.sup_norm() < 1e-13);
    }

    #[test]
    fn codiff1_conformal_weight() {
        let g = grid();
        let w = OneForm::from_components(smooth(&g, 0.4), smooth(&g, 1.7));
        let u = smooth(&g, 0.2).scaled(0.3);
        let flat = codiff1_g(&g, &w, &ScalarField::zeros(&g)).unwrap();
        let curved = codiff1_g(&g, &w, &u).unwrap();
        for i in 0..g.len() {
            assert!((curved.values[i] - (-u.values[i]).exp() * flat.values[i]).abs() < 1e-13);
        }
        let c = codiff1_g(&g, &OneForm::constant(&g, [2.0, 1.0]), &ScalarField::zeros(&g)).unwrap();
        assert!(c.sup_norm() < 1e-13);
    }

    #[test]
    fn codiff2_of_constant_density_vanishes() {
        let g = grid();
        let eta = codiff2_g(&g, &TwoForm::constant(&g, 0.8), &ScalarField::zeros(&g)).unwrap();
        assert!(eta.sup_norm() < 1e-13);
    }

    #[test]
    fn laplacian_examples() {
        let g = grid();
        let zero = ScalarField::zeros(&g);
        assert!(laplacian_g(&g, &ScalarField::constant(&g, 2.0), &zero).unwrap().sup_norm() < 1e-12);
        let kx = TAU / g.l1();
        let s = ScalarField::from_fn(&g, |x, _| (kx * x).sin());
        let lap = laplacian_g(&g, &s, &zero).unwrap();
        assert_close(&lap.values, &s.scaled(-kx * kx).values, 1e-13);
    }

    #[test]
    fn laplacian_is_minus_codiff_d() {
        let g = grid();
        let s = smooth(&g, 0.9);
        let u = smooth(&g, -0.4).scaled(0.5);
        let lap = laplacian_g(&g, &s, &u).unwrap();
        let composed = codiff1_g(&g, &exterior_d0(&g, &s).unwrap(), &u).unwrap();
        assert_close(&lap.values, &composed.scaled(-1.0).values, 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let g = grid();
        let one = ScalarField::constant(&g, 1.0);
        let area = g.area();
        assert!((integrate_g(&g, &one, &ScalarField::zeros(&g)).unwrap() - area).abs() < 1e-12);
        let c = 0.37;
        let v = integrate_g(&g, &one, &ScalarField::constant(&g, c)).unwrap();
        assert!((v - c.exp() * area).abs() < 1e-12);
        let kx = TAU / g.l1();
        let s = ScalarField::from_fn(&g, |x, _| (kx * x).sin());
        assert!(integrate_g(&g, &s, &ScalarField::zeros(&g)).unwrap().abs() < 1e-13);
    }

    #[test]
    fn hodge_of_exact_form() {
        let g = grid();
        let s = smooth(&g, 1.1);
        let s = s.map(|v| v - s.mean());
        let parts = hodge_decompose(&g, &exterior_d0(&g, &s).unwrap()).unwrap();
        assert!(parts.harmonic[0].abs() < 1e-13 && parts.harmonic[1].abs() < 1e-13);
        assert_close(&parts.exact_potential.values, &s.values, 1e-12);
        assert!(parts.coexact_potential.sup_norm() < 1e-12);
    }

    #[test]
    fn hodge_of_constant_form() {
        let g = grid();
        let parts = hodge_decompose(&g, &OneForm::constant(&g, [0.25, -1.5])).unwrap();
        assert!((parts.harmonic[0] - 0.25).abs() < 1e-14);
        assert!((parts.harmonic[1] + 1.5).abs() < 1e-14);
        assert!(parts.exact_potential.sup_norm() < 1e-14);
        assert!(parts.coexact_potential.sup_norm() < 1e-14);
    }

    #[test]
    fn hodge_keeps_pure_nyquist_content_separately() {
        let g = TorusGrid::new(8, 8, 1.0, 1.0).unwrap();
        // (-1)^i is the x¹ Nyquist mode; every derivative of it is zero.
        let w = OneForm::from_fn(&g, |x, _| {
            let i = (x * 8.0).round() as i64;
            [if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0]
        });
        let parts = hodge_decompose(&g, &w).unwrap();
        assert!((parts.unresolved.c1[0] - 1.0).abs() < 1e-14);
        let back = parts.reconstruct(&g).unwrap();
        assert_close(&back.c1, &w.c1, 1e-14);
    }

    #[test]
    fn rejects_non_finite_and_bad_shape() {
        let g = grid();
        let mut s = ScalarField::zeros(&g);
        s.values[5] = f64::NAN;
        assert!(matches!(exterior_d0(&g, &s), Err(Error::NonFinite { index: 5, .. })));
        let short = ScalarField::new(vec![0.0; 3]);
        assert!(matches!(exterior_d0(&g, &short), Err(Error::ShapeMismatch { .. })));
        let mut w = OneForm::zeros(&g);
        w.c2[0] = f64::INFINITY;
        assert!(exterior_d1(&g, &w).is_err());
        assert!(hodge_decompose(&g, &w).is_err());
    }
}
