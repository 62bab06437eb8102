use std::f64::consts::TAU;

use crate::grid::TorusGrid;

/// Background curvature and topological data of the U(1)-bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BundleParams {
    /// Scalar curvature of the background metric `h`.
    pub r_h: f64,
    /// Chern number `c = (1/2π) ∫ F`.
    pub chern: i64,
    /// Fiducial curvature density `λ₀ = 2πc / (L1 L2)` with respect to `dV_h`.
    pub lambda0: f64,
}

impl BundleParams {
    /// Operator-level parameters on an `L1 x L2` torus with arbitrary `R_h`.
    pub fn new(r_h: f64, chern: i64, l1: f64, l2: f64) -> Self {
        Self { r_h, chern, lambda0: TAU * chern as f64 / (l1 * l2) }
    }

    /// Geometric flat torus: `R_h = 0`.
    pub fn torus(chern: i64, grid: &TorusGrid) -> Self {
        Self::new(0.0, chern, grid.l1(), grid.l2())
    }

    /// Curvature density `λ = λ₀ e^{-C}` with respect to `dV_g` for `g = e^C h`.
    pub fn lambda_at(&self, u_const: f64) -> f64 {
        self.lambda0 * (-u_const).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda0_quantizes_chern_number() {
        for c in -3..=3 {
            let b = BundleParams::new(0.0, c, 2.0, 5.0);
            assert!((b.lambda0 * 10.0 - TAU * c as f64).abs() < 1e-14);
        }
        let g = TorusGrid::square(8).unwrap();
        let b = BundleParams::torus(1, &g);
        assert!((b.lambda0 - 1.0 / TAU).abs() < 1e-16);
        assert_eq!(b.r_h, 0.0);
    }
}
