//! Run configuration, read from a TOML file.
//!
//! Every key is optional; unknown keys are rejected. Defaults:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `surface` | `"torus"` | `"torus"` or `"sphere"` |
//! | `n1`, `n2` | 64 | grid points per direction (even, ≥ 4) |
//! | `l1`, `l2` | 2π | torus periods |
//! | `chern` | 0 | Chern number |
//! | `variant` | `"NGRYM"` | `"RYM"`, `"GRYM"`, `"NGRYM"` or `"YM"` (frozen metric) |
//! | `dt` | stability heuristic | time step |
//! | `t_end` | 40 | final time |
//! | `convergence_tol` | 1e-9 | stop when `‖rhs‖_∞` falls below this |
//! | `sample_every` | 10 | steps between diagnostic samples |
//! | `seed` | 0 | perturbation seed |
//! | `perturbation_amplitude` | 1e-3 | sup norm of the initial perturbation |
//! | `output_dir` | `"out"` | where CSV and JSON files go |
//! | `r_h` | 0 | background curvature on the torus (ignored on the sphere) |
//! | `u_const` | 0 | conformal factor of the fixed point |
//! | `harmonic` | `[0, 0]` | harmonic part of the fixed-point connection |
//! | `safety` | 0.5 | fraction of the stability heuristic used for the default `dt` |
//! | `transient_fraction` | 0.2 | leading fraction of samples skipped by the decay fit |
//! | `k_max` | 32 | highest spherical-harmonic degree |
//! | `zero_tol` | 1e-10 | eigenvalues below this in magnitude count as zero |
//! | `volume_preserving` | false | drop the constant conformal direction from spectra |
//! | `modulo_conformal` | false | sphere: drop the degree-1 Möbius null direction |
//! | `chern_min`, `chern_max` | 0, 6 | range swept by `classify` |

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rym_core::flow::{DEFAULT_CONVERGENCE_TOL, DEFAULT_SAFETY};
use rym_core::fit::DEFAULT_TRANSIENT_FRACTION;
use rym_core::grid::DEFAULT_N;
use rym_core::sphere::DEFAULT_K_MAX;
use rym_core::spectrum::DEFAULT_ZERO_TOL;
use rym_core::Variant;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    #[default]
    Torus,
    Sphere,
}

mod variant_name {
    use rym_core::Variant;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Variant, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Variant, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub surface: Surface,
    pub n1: usize,
    pub n2: usize,
    pub l1: f64,
    pub l2: f64,
    pub chern: i64,
    #[serde(with = "variant_name")]
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub convergence_tol: f64,
    pub sample_every: usize,
    pub seed: u64,
    pub perturbation_amplitude: f64,
    pub output_dir: PathBuf,
    pub r_h: f64,
    pub u_const: f64,
    pub harmonic: [f64; 2],
    pub safety: f64,
    pub transient_fraction: f64,
    pub k_max: u32,
    pub zero_tol: f64,
    pub volume_preserving: bool,
    pub modulo_conformal: bool,
    pub chern_min: i64,
    pub chern_max: i64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            surface: Surface::Torus,
            n1: DEFAULT_N,
            n2: DEFAULT_N,
            l1: TAU,
            l2: TAU,
            chern: 0,
            variant: Variant::Ngrym,
            dt: None,
            t_end: 40.0,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            sample_every: 10,
            seed: 0,
            perturbation_amplitude: 1e-3,
            output_dir: PathBuf::from("out"),
            r_h: 0.0,
            u_const: 0.0,
            harmonic: [0.0, 0.0],
            safety: DEFAULT_SAFETY,
            transient_fraction: DEFAULT_TRANSIENT_FRACTION,
            k_max: DEFAULT_K_MAX,
            zero_tol: DEFAULT_ZERO_TOL,
            volume_preserving: false,
            modulo_conformal: false,
            chern_min: 0,
            chern_max: 6,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    /// Range checks that do not need a grid; grid shape errors surface
    /// when the grid is built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        let finite = [
            ("l1", self.l1),
            ("l2", self.l2),
            ("t_end", self.t_end),
            ("perturbation_amplitude", self.perturbation_amplitude),
            ("r_h", self.r_h),
            ("u_const", self.u_const),
            ("harmonic[0]", self.harmonic[0]),
            ("harmonic[1]", self.harmonic[1]),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} = {v} is not finite"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt = {dt} must be positive"));
            }
        }
        if self.t_end < 0.0 {
            return bad(format!("t_end = {} must be nonnegative", self.t_end));
        }
        if !(self.convergence_tol > 0.0) {
            return bad(format!("convergence_tol = {} must be positive", self.convergence_tol));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if self.perturbation_amplitude < 0.0 {
            return bad("perturbation_amplitude must be nonnegative".into());
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety = {} outside (0, 1]", self.safety));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return bad(format!("transient_fraction = {} outside [0, 1)", self.transient_fraction));
        }
        if !(self.zero_tol > 0.0) {
            return bad(format!("zero_tol = {} must be positive", self.zero_tol));
        }
        if self.chern_min > self.chern_max {
            return bad(format!("chern_min = {} exceeds chern_max = {}", self.chern_min, self.chern_max));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_fields() {
        let cfg = RunConfig::from_toml(
            "surface = \"sphere\"\nchern = 3\nvariant = \"GRYM\"\ndt = 1e-3\nharmonic = [0.5, -1.0]\n",
        )
        .unwrap();
        assert_eq!(cfg.surface, Surface::Sphere);
        assert_eq!(cfg.chern, 3);
        assert_eq!(cfg.variant, Variant::Grym);
        assert_eq!(cfg.dt, Some(1e-3));
        assert_eq!(cfg.harmonic, [0.5, -1.0]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(RunConfig::from_toml("gird = 3"), Err(ConfigError::Parse(_))));
        assert!(matches!(RunConfig::from_toml("variant = \"RF\""), Err(ConfigError::Parse(_))));
        assert!(matches!(RunConfig::from_toml("dt = -1.0"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_toml("sample_every = 0"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_toml("chern_min = 3\nchern_max = 1"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig { chern: -2, dt: Some(0.01), ..RunConfig::default() };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }
}
