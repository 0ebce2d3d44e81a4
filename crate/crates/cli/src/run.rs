//! One function per mode. Each writes its artifacts before reporting a failure.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use stripes_core::energy::energy_reduced;
use stripes_core::full::{
    compare_to_reduced, full_grid, initial_guess, minimize_full, FullOptions, FullResiduals, FullSolution,
};
use stripes_core::oracle::{predicted_energy_with, OraclePrediction, OracleSettings};
use stripes_core::rates::{fit_rate, fit_rate_with_floor, RateFit};
use stripes_core::reduced::{solve_reduced, ShootingOptions, ShootingResult, ShootingSummary};
use stripes_core::{EnergyBreakdown, FullParams, Grid, ReducedParams, Regime, RegimeTag};

use crate::config::{Drive, Mode, RunConfig, SweepError, SweepParameter};
use crate::error::CliError;
use crate::output::{finite, format_float, write_json, write_profile, write_text};

/// What a successful run leaves behind, for the caller to report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub message: String,
    /// Printed to stdout regardless of `--quiet` (the oracle's prediction).
    pub stdout: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleDeltas {
    /// Solver minus prediction.
    pub phi_end: f64,
    /// `|F/F_leading − 1|`; absent for a vanishing prediction.
    pub energy_ratio_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSummary {
    pub params: ReducedParams,
    pub grid_nodes: usize,
    pub regime: Regime,
    pub shooting: ShootingSummary,
    pub energy: EnergyBreakdown,
    pub oracle: OraclePrediction,
    pub oracle_deltas: OracleDeltas,
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullComparison {
    pub energy_ratio_error: Option<f64>,
    pub v_sup_deviation: f64,
    pub phi_end_difference: f64,
    pub v_energy: f64,
    pub v_energy_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSummary {
    pub params: FullParams,
    pub grid_nodes: usize,
    pub energy: EnergyBreakdown,
    pub lambda: f64,
    pub residuals: FullResiduals,
    pub layer_ratio: f64,
    pub segregation_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    pub negative_v_flag: bool,
    pub max_energy_increase: f64,
    pub reduced: ShootingSummary,
    pub comparison: FullComparison,
    pub oracle: OraclePrediction,
    pub oracle_deltas: OracleDeltas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub parameter: f64,
    pub error: Option<f64>,
    /// Set when the solve failed, was flagged or did not converge.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub error: SweepError,
    /// The fit is against the refinement variable `1/parameter`, so decaying errors give negative slopes.
    pub abscissa: String,
    pub entries: Vec<SweepEntry>,
    pub fit: Option<RateFit>,
    pub fit_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub params: ReducedParams,
    #[serde(flatten)]
    pub prediction: OraclePrediction,
}

pub fn run(mode: Mode, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate(mode)?;
    match mode {
        Mode::Reduced => run_reduced(cfg),
        Mode::Full => run_full(cfg),
        Mode::Sweep => run_sweep(cfg),
        Mode::Oracle => run_oracle(cfg),
        Mode::PhaseDiagram => run_phase_diagram(cfg),
    }
}

fn reduced_params(beta: f64, drive: Drive) -> Result<ReducedParams, CliError> {
    Ok(match drive {
        Drive::Kappa(k) => ReducedParams::new(beta, k)?,
        Drive::KappaTilde(kt) => ReducedParams::with_kappa_tilde(beta, kt)?,
    })
}

fn full_params(epsilon: f64, delta: f64, drive: Drive) -> Result<FullParams, CliError> {
    Ok(match drive {
        Drive::Kappa(k) => FullParams::new(epsilon, delta, k)?,
        Drive::KappaTilde(kt) => FullParams::with_kappa_tilde(epsilon, delta, kt)?,
    })
}

fn shooting_options(cfg: &RunConfig) -> ShootingOptions {
    ShootingOptions {
        tol_bc: cfg.tolerances.tol_bc,
        tol_first_integral: cfg.tolerances.tol_first_integral,
        threshold_tol: cfg.tolerances.threshold_tol,
        ..ShootingOptions::default()
    }
}

fn full_options(cfg: &RunConfig) -> FullOptions {
    FullOptions {
        stop_tol: cfg.tolerances.stop_tol,
        tol_el: cfg.tolerances.tol_el,
        ..FullOptions::default()
    }
}

fn oracle_settings(cfg: &RunConfig) -> OracleSettings {
    OracleSettings {
        threshold_tol: cfg.tolerances.threshold_tol,
        ..OracleSettings::default()
    }
}

fn reduced_grid(cfg: &RunConfig, beta: f64) -> Result<Grid, CliError> {
    Ok(match cfg.grid {
        Some(n) => Grid::unit(n)?,
        None => Grid::resolving(beta)?,
    })
}

fn deltas(phi_end: f64, energy: f64, oracle: &OraclePrediction) -> OracleDeltas {
    OracleDeltas {
        phi_end: phi_end - oracle.phi_end,
        energy_ratio_error: (oracle.energy_leading != 0.0)
            .then(|| (energy / oracle.energy_leading - 1.0).abs())
            .and_then(finite),
    }
}

fn shoot(cfg: &RunConfig, p: &ReducedParams) -> Result<ShootingResult, CliError> {
    Ok(solve_reduced(p, &reduced_grid(cfg, p.beta)?, &shooting_options(cfg))?)
}

fn run_reduced(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.epsilon.is_some() || cfg.delta.is_some() {
        return Err(CliError::Config("epsilon: the reduced problem takes beta and a drive only".into()));
    }
    let p = reduced_params(cfg.beta(), cfg.drive())?;
    let r = shoot(cfg, &p)?;
    let oracle = predicted_energy_with(&p, &oracle_settings(cfg))?;
    let summary = ReducedSummary {
        params: p,
        grid_nodes: r.profile.grid().n(),
        regime: r.regime,
        shooting: r.summary(),
        energy: energy_reduced(&r.profile, &p),
        oracle_deltas: deltas(r.phi_end, r.energy, &oracle),
        oracle,
        flagged: r.flagged,
    };
    let out = cfg.out_dir();
    write_profile(&out, "profile.csv", &r.profile)?;
    write_json(&out, "summary.json", &summary)?;
    if r.flagged {
        return Err(CliError::Solver(format!(
            "shooting result flagged (Neumann residual {:e}, first-integral residual {:e}, regime {:?}); artifacts in {}",
            r.neumann_residual,
            r.first_integral_residual,
            r.regime.tag,
            out.display()
        )));
    }
    Ok(Outcome {
        message: format!(
            "reduced: β = {}, κ̃ = {}, φ(1) = {}, F = {}; wrote {}",
            p.beta,
            p.kappa_tilde,
            r.phi_end,
            r.energy,
            out.display()
        ),
        stdout: None,
    })
}

struct FullRun {
    solution: FullSolution,
    reduced: ShootingResult,
    comparison: FullComparison,
}

fn solve_full(cfg: &RunConfig, p: &FullParams) -> Result<FullRun, CliError> {
    let grid = match cfg.grid {
        Some(n) => Grid::unit(n)?,
        None => full_grid(p)?,
    };
    let init = initial_guess(p, &grid)?;
    let solution = minimize_full(p, &grid, (&init.0, &init.1), &full_options(cfg))?;
    let rp = p.reduced();
    let reduced = solve_reduced(&rp, &Grid::resolving(rp.beta)?, &shooting_options(cfg))?;
    let c = compare_to_reduced(&solution, &reduced)?;
    let comparison = FullComparison {
        energy_ratio_error: finite(c.energy_ratio_error),
        v_sup_deviation: c.v_sup_deviation,
        phi_end_difference: c.phi_end_difference,
        v_energy: c.v_energy,
        v_energy_ratio: c.v_energy_ratio,
    };
    Ok(FullRun {
        solution,
        reduced,
        comparison,
    })
}

fn run_full(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.beta.is_some() {
        return Err(CliError::Config("beta: in full mode β = ε/√δ is derived from epsilon and delta".into()));
    }
    let p = full_params(cfg.epsilon(), cfg.delta(), cfg.drive())?;
    let FullRun {
        solution: s,
        reduced,
        comparison,
    } = solve_full(cfg, &p)?;
    let oracle = predicted_energy_with(&p.reduced(), &oracle_settings(cfg))?;
    let summary = FullSummary {
        params: p,
        grid_nodes: s.v.grid().n(),
        energy: s.energy,
        lambda: s.lambda,
        residuals: s.residuals,
        layer_ratio: s.layer_ratio,
        segregation_ratio: s.segregation_ratio,
        iterations: s.iterations,
        converged: s.converged,
        negative_v_flag: s.negative_v_flag,
        max_energy_increase: s.max_energy_increase,
        reduced: reduced.summary(),
        comparison,
        oracle_deltas: deltas(s.phi.last(), s.energy.total, &oracle),
        oracle,
    };
    let out = cfg.out_dir();
    write_profile(&out, "profile_v.csv", &s.v)?;
    write_profile(&out, "profile_phi.csv", &s.phi)?;
    write_json(&out, "summary.json", &summary)?;
    if !s.converged {
        return Err(CliError::Solver(format!(
            "full solver stopped after {} iterations without converging (residuals {:?}); artifacts in {}",
            s.iterations,
            s.residuals.el,
            out.display()
        )));
    }
    Ok(Outcome {
        message: format!(
            "full: ε = {}, δ = {}, β = {}, G = {}, {} iterations; wrote {}",
            p.epsilon,
            p.delta,
            p.beta,
            s.energy.total,
            s.iterations,
            out.display()
        ),
        stdout: None,
    })
}

fn sweep_entry(cfg: &RunConfig, value: f64) -> Result<f64, CliError> {
    let s = &cfg.sweep;
    match s.parameter {
        SweepParameter::Beta => {
            let p = reduced_params(value, cfg.drive())?;
            let r = shoot(cfg, &p)?;
            if r.flagged {
                return Err(CliError::Solver("shooting result flagged".into()));
            }
            let oracle = predicted_energy_with(&p, &oracle_settings(cfg))?;
            Ok(match s.error {
                SweepError::PhiEnd => r.phi_end_deficit.unwrap_or((r.phi_end - oracle.phi_end).abs()),
                SweepError::Energy => deltas(r.phi_end, r.energy, &oracle)
                    .energy_ratio_error
                    .ok_or_else(|| CliError::Solver("vanishing leading-order energy".into()))?,
                SweepError::FirstIntegral => r.first_integral_residual,
                SweepError::VDeviation => unreachable!("rejected by validation"),
            })
        }
        SweepParameter::Epsilon => {
            let p = full_params(value, value.powf(cfg.delta_exponent()), cfg.drive())?;
            let run = solve_full(cfg, &p)?;
            if !run.solution.converged {
                return Err(CliError::Solver("full solver did not converge".into()));
            }
            Ok(match s.error {
                SweepError::Energy => run
                    .comparison
                    .energy_ratio_error
                    .ok_or_else(|| CliError::Solver("vanishing reduced energy".into()))?,
                SweepError::VDeviation => run.comparison.v_sup_deviation,
                _ => unreachable!("rejected by validation"),
            })
        }
    }
}

fn run_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.sweep;
    let name = match s.parameter {
        SweepParameter::Beta => {
            if cfg.beta.is_some() || cfg.epsilon.is_some() || cfg.delta.is_some() {
                return Err(CliError::Config("beta: a β sweep takes its values from sweep.start/factor/count".into()));
            }
            "beta"
        }
        SweepParameter::Epsilon => {
            if cfg.beta.is_some() || cfg.epsilon.is_some() || cfg.delta.is_some() {
                return Err(CliError::Config(
                    "epsilon: an ε sweep takes ε from the schedule and δ = ε^delta_exponent".into(),
                ));
            }
            "epsilon"
        }
    };
    let values = s.values();
    let results: Vec<Result<f64, CliError>> = values.par_iter().map(|&v| sweep_entry(cfg, v)).collect();
    // Configuration problems are the same for every entry; report the first instead of a table.
    if let Some(Err(e @ CliError::Config(_))) = results.iter().find(|r| matches!(r, Err(CliError::Config(_)))) {
        return Err(CliError::Config(e.to_string()));
    }
    let entries: Vec<SweepEntry> = values
        .iter()
        .zip(results)
        .map(|(&parameter, r)| match r {
            Ok(e) => SweepEntry {
                parameter,
                error: Some(e),
                failure: None,
            },
            Err(e) => SweepEntry {
                parameter,
                error: None,
                failure: Some(e.to_string()),
            },
        })
        .collect();
    let pairs: Vec<(f64, f64)> = entries.iter().filter_map(|e| e.error.map(|err| (1.0 / e.parameter, err))).collect();
    // The φ(1) deficit is evaluated in closed form, so its tiny values are data, not round-off.
    let fit = match s.error {
        SweepError::PhiEnd => fit_rate_with_floor(&pairs, 0.0),
        _ => fit_rate(&pairs),
    };
    let (fit, fit_failure) = match fit {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = SweepReport {
        parameter: s.parameter,
        error: s.error,
        abscissa: format!("1/{name}"),
        entries,
        fit,
        fit_failure,
    };
    let mut table = String::from("parameter,error\n");
    for e in &report.entries {
        let err = e.error.map(format_float).unwrap_or_else(|| "nan".into());
        let _ = writeln!(table, "{},{}", format_float(e.parameter), err);
    }
    let out = cfg.out_dir();
    write_text(&out, "rate_table.csv", &table)?;
    write_json(&out, "rate_fit.json", &report)?;
    let failed = report.entries.iter().filter(|e| e.failure.is_some()).count();
    if failed > 0 || report.fit.is_none() {
        return Err(CliError::Solver(format!(
            "sweep: {failed} of {} entries failed{}; artifacts in {}",
            report.entries.len(),
            report.fit_failure.as_deref().map(|f| format!(", fit: {f}")).unwrap_or_default(),
            out.display()
        )));
    }
    let fit = report.fit.as_ref().expect("checked above");
    Ok(Outcome {
        message: format!("sweep: slope {} against 1/{name} (r² = {}); wrote {}", fit.slope, fit.r2, out.display()),
        stdout: None,
    })
}

fn run_oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.epsilon.is_some() || cfg.delta.is_some() || cfg.grid.is_some() {
        return Err(CliError::Config("epsilon: the oracle takes beta and a drive only".into()));
    }
    let p = reduced_params(cfg.beta(), cfg.drive())?;
    let report = OracleReport {
        params: p,
        prediction: predicted_energy_with(&p, &oracle_settings(cfg))?,
    };
    let out = cfg.out_dir();
    write_json(&out, "oracle.json", &report)?;
    Ok(Outcome {
        message: format!("oracle: wrote {}", out.join("oracle.json").display()),
        stdout: Some(serde_json::to_string_pretty(&report)?),
    })
}

fn regime_name(tag: RegimeTag) -> &'static str {
    match tag {
        RegimeTag::Subcritical => "subcritical",
        RegimeTag::Threshold => "threshold",
        RegimeTag::NearThreshold => "near_threshold",
        RegimeTag::Supercritical => "supercritical",
    }
}

fn run_phase_diagram(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.beta.is_some() || cfg.kappa.is_some() || cfg.kappa_tilde.is_some() {
        return Err(CliError::Config("beta: the phase diagram takes its points from phase_diagram".into()));
    }
    let spec = &cfg.phase_diagram;
    let points: Vec<(f64, f64)> = spec
        .kappa_tilde
        .values()
        .into_iter()
        .flat_map(|kt| spec.betas.iter().map(move |&b| (kt, b)))
        .collect();
    let rows: Vec<(String, Option<String>)> = points
        .par_iter()
        .map(|&(kt, b)| {
            let lead = format!("{},{}", format_float(kt), format_float(b));
            let solved = ReducedParams::with_kappa_tilde(b, kt)
                .map_err(CliError::from)
                .and_then(|p| shoot(cfg, &p));
            match solved {
                Ok(r) => {
                    let status = if r.flagged { "flagged" } else { "ok" };
                    let n = r.period.map_or(0, |per| per.n);
                    let line = format!(
                        "{lead},{},{n},{},{},{status}",
                        regime_name(r.regime.tag),
                        format_float(r.phi_end),
                        format_float(r.energy * b * b)
                    );
                    (line, r.flagged.then(|| format!("κ̃ = {kt}, β = {b}: flagged")))
                }
                Err(e) => (format!("{lead},failed,0,nan,nan,failed"), Some(format!("κ̃ = {kt}, β = {b}: {e}"))),
            }
        })
        .collect();
    let mut table = String::from("kappa_tilde,beta,regime,n,phi_end,energy_beta2,status\n");
    for (line, _) in &rows {
        let _ = writeln!(table, "{line}");
    }
    let out = cfg.out_dir();
    write_text(&out, "phase_diagram.csv", &table)?;
    let problems: Vec<&str> = rows.iter().filter_map(|(_, p)| p.as_deref()).collect();
    if !problems.is_empty() {
        return Err(CliError::Solver(format!(
            "phase diagram: {} of {} points failed or flagged ({}); artifacts in {}",
            problems.len(),
            rows.len(),
            problems.join("; "),
            out.display()
        )));
    }
    Ok(Outcome {
        message: format!("phase diagram: {} points; wrote {}", rows.len(), out.join("phase_diagram.csv").display()),
        stdout: None,
    })
}

/// Read back a summary written by the reduced mode.
pub fn read_reduced_summary(path: &Path) -> Result<ReducedSummary, CliError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
