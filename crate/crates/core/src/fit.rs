//! Log-linear fit of exponential decay `norm ≈ C e^{-rate · t}`.

use crate::error::{Error, Result};

/// Samples below this are treated as rounding noise; the fit window ends
/// at the first one.
pub const ROUNDING_FLOOR: f64 = 1e-13;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.2;
pub const MIN_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
    /// Samples entering the regression.
    pub samples: usize,
}

/// Least-squares slope of `ln(norm)` against `t`, negated, after
/// discarding the leading `transient_fraction` of the usable window.
pub fn decay_rate_fit(series: &[(f64, f64)], transient_fraction: f64) -> Result<DecayFit> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::InvalidParams(format!(
            "transient fraction {transient_fraction} must lie in [0, 1)"
        )));
    }
    let usable = series
        .iter()
        .position(|&(_, n)| !(n >= ROUNDING_FLOOR && n.is_finite()))
        .unwrap_or(series.len());
    if usable < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: usable });
    }
    let skip = (transient_fraction * usable as f64).floor() as usize;
    let window = &series[skip..usable];
    let n = window.len() as f64;
    let mean_t = window.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = window.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in window {
        let (dt, dy) = (t - mean_t, v.ln() - mean_y);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::InvalidParams("decay fit needs distinct sample times".into()));
    }
    let slope = sty / stt;
    let ss_res = (syy - slope * sty).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit { rate: -slope, r_squared, samples: window.len() })
}
