//! Subcommand implementations.  Every command reads a config, runs the
//! library, and writes deterministic CSV/JSON artifacts into the output
//! directory.  Floats are written with Rust's shortest round-trip
//! formatting, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use qlga::complexity::estimate_all;
use qlga::evolve::{step, step_matrix};
use qlga::oracle::{arbitrate_mass_formulas, dispersion_curve, fit_mass};
use qlga::spectral::{eigendecompose, eigenphase_to_energy, oscillator_eigenstate_experiment};
use qlga::state::{total_amplitude, SectorState};

use crate::config::RunConfig;
use crate::{write_file, CliError};

/// `evolve`: run a state forward and record the trajectory.
///
/// Writes `evolution.csv` (`t,norm,field_norm`; `field_norm` is the norm of
/// the rescaled per-site total amplitude and is empty for n > 1),
/// `marginal.csv` (`site,probability` of the final state), and
/// `final_state.json` (amplitude snapshot).
pub fn evolve(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let model = config.model()?;
    let run = config
        .run
        .as_ref()
        .ok_or_else(|| CliError::Usage("evolve needs a [run] section".into()))?;
    if run.observe_every == 0 {
        return Err(CliError::Usage("run.observe_every must be at least 1".into()));
    }
    let mut state = config.initial_state()?;

    let field_norm = |s: &SectorState, t: usize| -> Option<f64> {
        if s.n() != 1 {
            return None;
        }
        let field = total_amplitude(s, t, model.global_phase()).ok()?;
        Some(field.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
    };
    let mut rows = String::from("t,norm,field_norm\n");
    let record = |t: usize, s: &SectorState, rows: &mut String| {
        let field = field_norm(s, t).map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(rows, "{t},{},{field}", s.norm());
    };
    record(0, &state, &mut rows);
    for t in 1..=run.steps {
        state = step(&state, &model)?;
        if t % run.observe_every == 0 || t == run.steps {
            record(t, &state, &mut rows);
        }
    }
    write_file(out, "evolution.csv", &rows)?;

    let mut marginal = String::from("site,probability\n");
    for (site, p) in state.site_marginal().iter().enumerate() {
        let _ = writeln!(marginal, "{site},{p}");
    }
    write_file(out, "marginal.csv", &marginal)?;

    let snapshot = serde_json::to_string_pretty(&state.to_snapshot())
        .map_err(|e| CliError::Usage(format!("cannot serialize snapshot: {e}")))?;
    write_file(out, "final_state.json", &(snapshot + "\n"))?;
    Ok(())
}

/// `spectrum`: diagonalize the one-step operator.
///
/// Writes `spectrum.csv` (`index,eigenphase,energy,residual`, sorted by
/// eigenphase) and, when `spectrum.oscillator_levels` is set on a 1D
/// quadratic-well model, `oscillator.json` with the bound-state comparison.
pub fn spectrum(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let model = config.model()?;
    let section = config
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::Usage("spectrum needs a [spectrum] section".into()))?;
    let u = step_matrix(&model, section.n)?;
    let eig = eigendecompose(&u, 1e-8)?;
    let mut rows = String::from("index,eigenphase,energy,residual\n");
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        let energy = eigenphase_to_energy(*lambda, model.global_phase(), 1, model.eps());
        let _ = writeln!(rows, "{i},{},{energy},{}", lambda.arg(), eig.residuals[i]);
    }
    write_file(out, "spectrum.csv", &rows)?;

    if let Some(levels) = section.oscillator_levels {
        let report = oscillator_eigenstate_experiment(&model, levels)?;
        let json = serde_json::json!({
            "mass": report.mass,
            "expected_spacing": report.expected_spacing,
            "grid": report.grid,
            "levels": report.levels.iter().map(|lv| serde_json::json!({
                "level": lv.level,
                "energy": lv.energy,
                "overlap": lv.overlap,
                "node_count": lv.node_count,
                "profile": lv.profile.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
        let text = serde_json::to_string_pretty(&json)
            .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
        write_file(out, "oscillator.json", &(text + "\n"))?;
    }
    Ok(())
}

/// `dispersion`: measure omega(k) along one axis and fit the mass.
///
/// Writes `dispersion.csv` (`k,omega,margin`) and `mass_fit.json`.
pub fn dispersion(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let model = config.model()?;
    let section = config
        .dispersion
        .as_ref()
        .ok_or_else(|| CliError::Usage("dispersion needs a [dispersion] section".into()))?;
    if section.ks.is_empty() {
        return Err(CliError::Usage("dispersion.ks must not be empty".into()));
    }
    let points = dispersion_curve(&model, &section.ks, section.axis)?;
    let mut rows = String::from("k,omega,margin\n");
    for p in &points {
        let _ = writeln!(rows, "{},{},{}", p.k[section.axis], p.omega, p.margin);
    }
    write_file(out, "dispersion.csv", &rows)?;

    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.k[section.axis], p.omega)).collect();
    let fit = fit_mass(&pairs)?;
    let json = serde_json::json!({
        "curvature": fit.curvature,
        "mass": fit.mass,
        "r_squared": fit.r_squared,
        "points": pairs.len(),
    });
    let text = serde_json::to_string_pretty(&json)
        .map_err(|e| CliError::Usage(format!("cannot serialize fit: {e}")))?;
    write_file(out, "mass_fit.json", &(text + "\n"))?;
    Ok(())
}

/// `arbitrate`: compare the two closed-form mass expressions against the
/// measured dispersion of an isotropic collision.
///
/// Writes `arbitration.csv` (`k,omega_measured,omega_primary,omega_alternate`)
/// and `arbitration.json` with the verdict.
pub fn arbitrate(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let model = config.model()?;
    let section = config
        .arbitrate
        .as_ref()
        .ok_or_else(|| CliError::Usage("arbitrate needs an [arbitrate] section".into()))?;
    let params = match model.collision() {
        qlga::evolve::CollisionRule::Isotropic(p) => p.clone(),
        qlga::evolve::CollisionRule::OneD(_) => {
            return Err(CliError::Usage("arbitrate requires an isotropic collision rule".into()));
        }
    };
    let report = arbitrate_mass_formulas(&params, &section.ks)?;
    let mut rows = String::from("k,omega_measured,omega_primary,omega_alternate\n");
    for r in &report.rows {
        let _ = writeln!(
            rows,
            "{},{},{},{}",
            r.k, r.omega_measured, r.omega_primary, r.omega_alternate
        );
    }
    write_file(out, "arbitration.csv", &rows)?;

    let json = serde_json::json!({
        "dimension": report.dimension,
        "mass_measured": report.mass_measured,
        "mass_primary": report.mass_primary,
        "mass_alternate": report.mass_alternate,
        "rel_err_primary": report.rel_err_primary,
        "rel_err_alternate": report.rel_err_alternate,
        "winner": report.winner,
        "r_squared": report.fit.r_squared,
    });
    let text = serde_json::to_string_pretty(&json)
        .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
    write_file(out, "arbitration.json", &(text + "\n"))?;
    println!(
        "winner: {} (measured mass {}, primary {}, alternate {})",
        report.winner, report.mass_measured, report.mass_primary, report.mass_alternate
    );
    Ok(())
}

/// `estimate`: closed-form resource counts for a problem size.
///
/// Writes `estimate.json` and prints a short human-readable summary.
pub fn estimate(q: u64, d: u32, n: u64, out: &Path) -> Result<(), CliError> {
    let (vars, costs) = estimate_all(q, d, n)?;
    let exact = |e: Option<u128>| e.map(|v| v.to_string());
    let json = serde_json::json!({
        "sites_per_axis": q,
        "dimension": d,
        "particles": n,
        "variables": {
            "slots": vars.slots.to_string(),
            "log10_exact": vars.log10_exact,
            "log10_approx": vars.log10_approx,
            "exact": exact(vars.exact),
        },
        "classical_step": { "log10_ops": costs[0].log10_ops },
        "quantum_step": {
            "log10_ops": costs[1].log10_ops,
            "exact_ops": exact(costs[1].exact_ops),
        },
        "quantum_pairwise_step": {
            "log10_ops": costs[2].log10_ops,
            "exact_ops": exact(costs[2].exact_ops),
        },
    });
    let text = serde_json::to_string_pretty(&json)
        .map_err(|e| CliError::Usage(format!("cannot serialize estimate: {e}")))?;
    write_file(out, "estimate.json", &(text + "\n"))?;
    println!("variables:        log10 = {:.4}", vars.log10_exact);
    println!("classical step:   log10 = {:.4}", costs[0].log10_ops);
    match costs[1].exact_ops {
        Some(v) => println!("quantum step:     log10 = {:.4} (exact {v})", costs[1].log10_ops),
        None => println!("quantum step:     log10 = {:.4}", costs[1].log10_ops),
    }
    match costs[2].exact_ops {
        Some(v) => println!("quantum pairwise: log10 = {:.4} (exact {v})", costs[2].log10_ops),
        None => println!("quantum pairwise: log10 = {:.4}", costs[2].log10_ops),
    }
    Ok(())
}
