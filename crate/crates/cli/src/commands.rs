//! The four subcommands. Each writes its artifacts plus `summary.json` into
//! `config.output_dir` and returns the summary; numerical failures are
//! recorded in the summary rather than returned as errors.

use std::f64::consts::TAU;

use anyhow::Context;
use rym_core::fit::{decay_rate_fit, MIN_SAMPLES};
use rym_core::flow::{curvature_density, einstein_ym, evolve, DiagnosticRecord, FlowParams};
use rym_core::geometry::{
    codiff1_g, codiff2_g, exterior_d0, exterior_d1, hodge_decompose, inner_one_form, inner_scalar_g,
    inner_two_form_g, integrate_h,
};
use rym_core::perturb::{band_limited_field, perturb_state, rng_from_seed};
use rym_core::sphere::{
    block_matrix, classify_chern_with, find_feasible_bound, tail_is_monotone, ChernClassification,
};
use rym_core::torus::{jacobian_check, mode_symbol, resolved_frequencies, torus_spectrum};
use rym_core::{BundleParams, FlowState, OneForm, SpectrumOptions, TorusGrid, TwoForm, Variant};

use crate::config::{RunConfig, Surface};
use crate::report::{
    diagnostics_csv, report_rows, spectrum_csv, write_file, BoundSummary, CheckRow, ClassRow, Residuals,
    RunSummary, SpectrumSummary, VerdictSummary, DIAGNOSTICS_FILE, SPECTRUM_FILE,
};

/// Tolerances of the `verify` suite.
pub const STRUCTURE_TOL: f64 = 1e-10;
pub const JACOBIAN_TOL: f64 = 1e-5;
pub const JACOBIAN_STEP: f64 = 1e-5;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const VOLUME_TOL: f64 = 1e-8;
pub const CHERN_TOL: f64 = 1e-12;
pub const HARMONIC_TOL: f64 = 1e-10;
/// Length and largest step of the short conservation run in `verify`.
pub const VERIFY_RUN_TIME: f64 = 0.1;
pub const VERIFY_MAX_DT: f64 = 1e-3;

fn spectrum_options(cfg: &RunConfig) -> SpectrumOptions {
    SpectrumOptions {
        zero_tol: cfg.zero_tol,
        volume_preserving: cfg.volume_preserving,
        modulo_conformal: cfg.modulo_conformal,
    }
}

fn torus_setup(cfg: &RunConfig) -> rym_core::Result<(TorusGrid, BundleParams)> {
    let grid = TorusGrid::new(cfg.n1, cfg.n2, cfg.l1, cfg.l2)?;
    let bundle = BundleParams::new(cfg.r_h, cfg.chern, cfg.l1, cfg.l2);
    Ok((grid, bundle))
}

/// Conservation residuals over a sampled run ending at `last`.
pub fn residuals(grid: &TorusGrid, bundle: &BundleParams, records: &[DiagnosticRecord], last: &FlowState) -> Residuals {
    let (volume_rel, harmonic_drift) = match records.first() {
        Some(first) => records.iter().fold((0.0_f64, 0.0_f64), |(v, h), r| {
            let dv = ((r.volume - first.volume) / first.volume).abs();
            let dh = (r.harmonic[0] - first.harmonic[0]).abs().max((r.harmonic[1] - first.harmonic[1]).abs());
            (v.max(dv), h.max(dh))
        }),
        None => (0.0, 0.0),
    };
    let chern_abs = match curvature_density(grid, last, bundle) {
        Ok(phi) => (integrate_h(grid, &phi.density) - TAU * bundle.chern as f64).abs(),
        Err(_) => f64::NAN,
    };
    Residuals { volume_rel, chern_abs, harmonic_drift }
}

pub fn cmd_evolve(cfg: &RunConfig) -> anyhow::Result<RunSummary> {
    let mut summary = RunSummary::new("evolve", cfg);
    if cfg.surface != Surface::Torus {
        summary.fail("evolve supports only surface = \"torus\"");
    } else if let Err(e) = evolve_into(cfg, &mut summary) {
        summary.fail(e.to_string());
    }
    summary.write(&cfg.output_dir)?;
    Ok(summary)
}

fn evolve_into(cfg: &RunConfig, summary: &mut RunSummary) -> anyhow::Result<()> {
    let (grid, bundle) = torus_setup(cfg)?;
    let initial = perturb_state(&grid, &einstein_ym(&grid, cfg.u_const, cfg.harmonic), cfg.perturbation_amplitude, cfg.seed);
    let mut params = FlowParams::new(bundle, cfg.variant, cfg.dt.unwrap_or(0.0), cfg.t_end);
    params.convergence_tol = cfg.convergence_tol;
    params.safety = cfg.safety;
    if cfg.dt.is_none() {
        params = params.with_cfl_dt(&grid, &initial.u);
    }
    summary.dt = Some(params.dt);

    let (records, last) = match evolve(&grid, initial, &params, cfg.sample_every) {
        Ok(out) => {
            summary.converged = Some(out.converged);
            summary.final_time = Some(out.state.t);
            summary.steps = Some(out.steps);
            summary.final_rhs_norm = Some(out.final_rhs_norm);
            (out.diagnostics.records, out.state)
        }
        Err(e) => {
            summary.converged = Some(false);
            summary.final_time = Some(e.last_good.t);
            summary.fail(e.to_string());
            (e.diagnostics.records, *e.last_good)
        }
    };
    write_file(&cfg.output_dir, DIAGNOSTICS_FILE, &diagnostics_csv(&records))?;
    summary.residuals = Some(residuals(&grid, &bundle, &records, &last));

    let norms: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.perturbation_norm())).collect();
    if norms.len() >= MIN_SAMPLES {
        match decay_rate_fit(&norms, cfg.transient_fraction) {
            Ok(fit) => {
                summary.fitted_decay_rate = Some(fit.rate);
                summary.r_squared = Some(fit.r_squared);
            }
            Err(e) => log::warn!("no decay fit: {e}"),
        }
    }
    if matches!(cfg.variant, Variant::Ngrym | Variant::Grym) {
        if let Some(first) = records.first() {
            // the limit has the initial volume, so u → ln(Vol/area)
            let u_limit = (first.volume / grid.area()).ln();
            let opts = SpectrumOptions { zero_tol: cfg.zero_tol, ..SpectrumOptions::volume_preserving() };
            summary.spectral_gap = torus_spectrum(&grid, &bundle, u_limit, &opts).gap;
        }
    }
    Ok(())
}

pub fn cmd_spectrum(cfg: &RunConfig) -> anyhow::Result<RunSummary> {
    let mut summary = RunSummary::new("spectrum", cfg);
    let opts = spectrum_options(cfg);
    let rows = match cfg.surface {
        Surface::Torus => torus_setup(cfg).map(|(grid, bundle)| {
            let report = torus_spectrum(&grid, &bundle, cfg.u_const, &opts);
            summary.spectrum = Some(SpectrumSummary::from(&report));
            report_rows(&report)
        }),
        Surface::Sphere => classify_chern_with(cfg.chern, cfg.k_max, &opts).map(|c| {
            fill_sphere(cfg, &c, &mut summary);
            report_rows(&c.spectrum)
        }),
    };
    match rows {
        Ok(rows) => write_file(&cfg.output_dir, SPECTRUM_FILE, &spectrum_csv(rows))?,
        Err(e) => summary.fail(e.to_string()),
    }
    summary.write(&cfg.output_dir)?;
    Ok(summary)
}

fn fill_sphere(cfg: &RunConfig, c: &ChernClassification, summary: &mut RunSummary) {
    summary.spectrum = Some(SpectrumSummary::from(&c.spectrum));
    summary.verdict = Some(VerdictSummary::from(&c.verdict));
    summary.tail_monotone = Some(tail_is_monotone(c.lambda, cfg.k_max));
    summary.bound = find_feasible_bound(c.lambda).map(|(alpha, delta)| BoundSummary {
        alpha,
        delta,
        spectrum_below_minus_delta: c.spectrum.max_eigenvalue <= -delta,
    });
}

/// Multiplicity of the largest eigenvalue.
fn top_multiplicity(c: &ChernClassification) -> usize {
    let top = c.spectrum.max_eigenvalue;
    c.spectrum.entries.iter().filter(|e| e.eigenvalue == top).map(|e| e.multiplicity).sum()
}

/// Sphere sweep over `chern_min..=chern_max`. `spectrum.csv` holds one row
/// per Chern number: the top eigenvalue and its multiplicity.
pub fn cmd_classify(cfg: &RunConfig) -> anyhow::Result<RunSummary> {
    let mut summary = RunSummary::new("classify", cfg);
    let opts = spectrum_options(cfg);
    let sweep: rym_core::Result<Vec<ChernClassification>> =
        (cfg.chern_min..=cfg.chern_max).map(|n| classify_chern_with(n, cfg.k_max, &opts)).collect();
    match sweep {
        Ok(all) => {
            let rows = all.iter().map(|c| (c.chern.to_string(), c.spectrum.max_eigenvalue, top_multiplicity(c)));
            write_file(&cfg.output_dir, SPECTRUM_FILE, &spectrum_csv(rows))?;
            summary.classifications = Some(
                all.iter()
                    .map(|c| ClassRow {
                        chern: c.chern,
                        lambda: c.lambda,
                        verdict: VerdictSummary::from(&c.verdict),
                        max_eigenvalue: c.spectrum.max_eigenvalue,
                        zero_dim: c.spectrum.zero_dim,
                    })
                    .collect(),
            );
        }
        Err(e) => summary.fail(e.to_string()),
    }
    summary.write(&cfg.output_dir)?;
    Ok(summary)
}

fn check(name: &str, value: f64, tolerance: f64) -> CheckRow {
    CheckRow { name: name.into(), value, tolerance, passed: value.is_finite() && value < tolerance }
}

/// Runs the structural, linearization and conservation checks on the
/// configured grid. `flip_coupling` negates one side of the metric-gauge
/// coupling in the symbols so the Hermitian check has a negative control.
pub fn cmd_verify(cfg: &RunConfig, flip_coupling: bool) -> anyhow::Result<RunSummary> {
    let mut summary = RunSummary::new("verify", cfg);
    match verify_checks(cfg, flip_coupling) {
        Ok(checks) => {
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                summary.fail(format!("failed checks: {}", failed.join(", ")));
            }
            summary.checks = Some(checks);
        }
        Err(e) => summary.fail(e.to_string()),
    }
    summary.write(&cfg.output_dir)?;
    Ok(summary)
}

fn verify_checks(cfg: &RunConfig, flip_coupling: bool) -> anyhow::Result<Vec<CheckRow>> {
    let (grid, bundle) = torus_setup(cfg)?;
    let mut rng = rng_from_seed(cfg.seed);
    let mode = (grid.n1().min(grid.n2()) as i64 / 2 - 1).min(6);
    let s = band_limited_field(&grid, &mut rng, mode);
    let u = band_limited_field(&grid, &mut rng, mode).scaled(0.5);
    let w = OneForm::from_components(band_limited_field(&grid, &mut rng, mode), band_limited_field(&grid, &mut rng, mode));
    let p = TwoForm::new(band_limited_field(&grid, &mut rng, mode).values);
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));

    let mut checks = Vec::new();
    let ds = exterior_d0(&grid, &s)?;
    checks.push(check("d1 ∘ d0", exterior_d1(&grid, &ds)?.sup_norm(), STRUCTURE_TOL));
    let a0 = rel(inner_one_form(&grid, &ds, &w), inner_scalar_g(&grid, &s, &codiff1_g(&grid, &w, &u)?, &u));
    checks.push(check("adjoint d0 / codiff1", a0, STRUCTURE_TOL));
    let a1 = rel(
        inner_two_form_g(&grid, &exterior_d1(&grid, &w)?, &p, &u),
        inner_one_form(&grid, &w, &codiff2_g(&grid, &p, &u)?),
    );
    checks.push(check("adjoint d1 / codiff2", a1, STRUCTURE_TOL));
    checks.push(check("Stokes", integrate_h(&grid, &exterior_d1(&grid, &w)?.density).abs(), STRUCTURE_TOL));
    let back = hodge_decompose(&grid, &w)?.reconstruct(&grid)?;
    checks.push(check("Hodge reconstruction", back.axpy(-1.0, &w).sup_norm(), STRUCTURE_TOL));

    let fixed_point = einstein_ym(&grid, cfg.u_const, cfg.harmonic);
    let variant = if cfg.variant == Variant::YangMills { Variant::Ngrym } else { cfg.variant };
    let jac = jacobian_check(&grid, &fixed_point, &bundle, variant, 3, JACOBIAN_STEP, cfg.seed)?;
    checks.push(check("Jacobian vs finite differences", jac, JACOBIAN_TOL));

    let mut herm = 0.0_f64;
    for chern in [cfg.chern, 1, 2] {
        let b = BundleParams { chern, lambda0: TAU * chern as f64 / (cfg.l1 * cfg.l2), ..bundle };
        for m in resolved_frequencies(&grid) {
            let mut sym = mode_symbol(&grid, &b, cfg.u_const, m);
            if flip_coupling {
                sym.entries[(1, 0)] = -sym.entries[(1, 0)];
                sym.entries[(2, 0)] = -sym.entries[(2, 0)];
            }
            herm = herm.max(sym.hermitian_residual());
        }
    }
    checks.push(check("torus symbols Hermitian", herm, HERMITIAN_TOL));
    let sym = (0..=cfg.k_max)
        .map(|k| block_matrix(k, cfg.chern as f64 / 2.0).symmetry_residual())
        .fold(0.0, f64::max);
    checks.push(check("sphere blocks symmetric", sym, HERMITIAN_TOL));

    let start = perturb_state(&grid, &fixed_point, 0.05, cfg.seed);
    let mut params = FlowParams::new(bundle, Variant::Ngrym, 0.0, VERIFY_RUN_TIME);
    params.safety = cfg.safety;
    let mut params = params.with_cfl_dt(&grid, &start.u);
    params.dt = params.dt.min(VERIFY_MAX_DT);
    let out = evolve(&grid, start, &params, 1).context("short conservation run")?;
    let res = residuals(&grid, &bundle, &out.diagnostics.records, &out.state);
    checks.push(check("volume conservation", res.volume_rel, VOLUME_TOL));
    checks.push(check("Chern conservation", res.chern_abs, CHERN_TOL));
    checks.push(check("harmonic conservation", res.harmonic_drift, HARMONIC_TOL));
    Ok(checks)
}

/// Fixed-width pass/fail table.
pub fn render_checks(checks: &[CheckRow]) -> String {
    let width = checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    checks
        .iter()
        .map(|c| {
            let pad = width - c.name.chars().count();
            format!(
                "{}{}  {:>10.3e}  < {:<8.0e} {}\n",
                c.name,
                " ".repeat(pad),
                c.value,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            )
        })
        .collect()
}
