//! Command-line driver. Exit codes: 0 when every check passes, 2 when an
//! estimate or residual check fails, 1 on usage, config or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::bv::tv_history;
use crate::config::RunConfig;
use crate::entropy::{certify_limit, ViscousDefect};
use crate::error::{Error, Result};
use crate::estimates::{regularize_data, run_single, run_sweep, W11_CONTRACTION};
use crate::grid::{fmt17, write_text, Grid};
use crate::models::{validate_hypothesis, FluxModel, Hypothesis, InitialData, ViscosityModel};
use crate::mollify::{verify_mollifier_bounds, W11Approximant};
use crate::oracle::{godunov_reference, ReferenceConfig};
use crate::report::{write_estimates_csv, EstimateReport};
use crate::solver::write_diagnostics;

#[derive(Debug, Parser)]
#[command(name = "viscoflow", version, about = "Viscous approximation of scalar conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regularize initial data and check the mollifier bounds.
    Prepare(PrepareArgs),
    /// Solve the viscous problem for one eps and check the estimates.
    Solve(RunArgs),
    /// Compute the inviscid Godunov reference.
    Reference(RunArgs),
    /// Solve for every eps in eps_list and check convergence.
    Sweep(RunArgs),
    /// Check entropy and boundary residuals of stored slices.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `eps` in the config.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    hypothesis: Option<String>,
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Directory holding `slices.csv` and `run.cfg`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    c_tol: Option<f64>,
}

/// Parses `args` (program name first), dispatches and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let outcome = match cli.command {
        Command::Prepare(a) => prepare(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Reference(a) => reference_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load(config: Option<&Path>) -> Result<RunConfig> {
    match config {
        Some(p) => RunConfig::from_path(p),
        None => Ok(RunConfig::default()),
    }
}

fn out_dir(cfg: &mut RunConfig, out: Option<PathBuf>) -> Result<PathBuf> {
    if let Some(o) = out {
        cfg.out = o;
    }
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    Ok(cfg.out.clone())
}

struct Models {
    data: InitialData,
    flux: FluxModel,
    visc: ViscosityModel,
}

fn models(cfg: &RunConfig) -> Result<Models> {
    let data = cfg.initial_data()?;
    let flux = cfg.flux_model(&data)?;
    let visc = cfg.viscosity_model()?;
    let report = validate_hypothesis(&flux, &visc, &data);
    if !report.passed() {
        let failed: Vec<String> = report
            .failures()
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        return Err(Error::Config(format!(
            "hypothesis {} not satisfied: {}",
            report.hypothesis,
            failed.join("; ")
        )));
    }
    Ok(Models { data, flux, visc })
}

fn print_reports<'a>(rows: impl IntoIterator<Item = (Option<f64>, &'a EstimateReport)>) {
    for (eps, r) in rows {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        let eps = eps.map(|e| format!("eps={e} ")).unwrap_or_default();
        println!("{tag} {eps}{}: {} <= {} (tol {})", r.name, fmt17(r.lhs), fmt17(r.rhs), r.tolerance);
    }
}

fn prepare(a: PrepareArgs) -> Result<bool> {
    let mut cfg = load(a.config.as_deref())?;
    if let Some(h) = a.hypothesis {
        cfg.hypothesis = Some(h.parse()?);
    }
    if let Some(d) = a.data {
        cfg.data = d;
    }
    if let Some(e) = a.eps {
        cfg.eps = e;
    }
    let dir = out_dir(&mut cfg, a.out)?;
    let data = cfg.initial_data()?;
    let grid = Grid::new(cfg.domain, cfg.n_cells)?;
    let u0eps = regularize_data(&data, cfg.eps, &grid)?;
    u0eps.write_csv(&dir.join("u0eps.csv"))?;
    let eps_list = [cfg.eps, cfg.eps / 2.0, cfg.eps / 4.0];
    let tol = cfg.tol;
    let pass = match data.hypothesis() {
        Hypothesis::E => {
            let bounds = verify_mollifier_bounds(&data, &eps_list)?;
            let path = dir.join("mollifier_bounds.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["eps", "sup_ratio", "tv_ratio", "c_eps"])?;
            for r in &bounds.rows {
                w.write_record([fmt17(r.eps), fmt17(r.sup_ratio), fmt17(r.tv_ratio), fmt17(r.c_eps)])?;
                println!(
                    "eps={}: sup_ratio {} tv_ratio {} c_eps {}",
                    r.eps,
                    fmt17(r.sup_ratio),
                    fmt17(r.tv_ratio),
                    fmt17(r.c_eps)
                );
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            bounds
                .rows
                .iter()
                .all(|r| r.sup_ratio <= 1.0 + tol.mollifier && r.tv_ratio <= 1.0 + tol.mollifier)
                && bounds.c_growth <= tol.const_variation
        }
        Hypothesis::F => {
            let path = dir.join("w11_bounds.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["eps", "sup", "a_bound", "w11_error"])?;
            let mut errors = Vec::new();
            let mut pass = true;
            for &e in &eps_list {
                let sup = crate::grid::norm_linf(&regularize_data(&data, e, &grid)?);
                let err = W11Approximant::new(&data, e)?.w11_error();
                pass &= sup <= data.a_bound();
                errors.push(err);
                w.write_record([fmt17(e), fmt17(sup), fmt17(data.a_bound()), fmt17(err)])?;
                println!("eps={e}: sup {} w11_error {}", fmt17(sup), fmt17(err));
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            pass && errors.windows(2).all(|p| p[1] <= W11_CONTRACTION * p[0])
        }
    };
    write_text(&dir.join("run.cfg"), &cfg.to_text())?;
    Ok(pass)
}

fn solve_cmd(a: RunArgs) -> Result<bool> {
    let mut cfg = load(a.config.as_deref())?;
    if let Some(e) = a.eps {
        cfg.eps = e;
    }
    let dir = out_dir(&mut cfg, a.out)?;
    let m = models(&cfg)?;
    let run = run_single(&m.flux, &m.visc, &m.data, &cfg.solver_config(cfg.eps), &cfg.tol, None)?;
    run.result.solution.write_csv(&dir.join("slices.csv"))?;
    write_diagnostics(&dir.join("diagnostics.csv"), &run.result.diagnostics)?;
    let rows: Vec<(Option<f64>, EstimateReport)> = run.reports.iter().map(|r| (Some(run.eps), r.clone())).collect();
    write_estimates_csv(&dir.join("estimates.csv"), &rows)?;
    print_reports(rows.iter().map(|(e, r)| (*e, r)));
    println!(
        "space-time aggregate int_0^T TV dt = {} (per-slice bound x T = {})",
        fmt17(run.space_bv_aggregate),
        fmt17(run.tv_sup * cfg.t_final)
    );
    cfg.slices_eps = Some(cfg.eps);
    write_text(&dir.join("run.cfg"), &cfg.to_text())?;
    Ok(run.passed())
}

fn reference_cmd(a: RunArgs) -> Result<bool> {
    let mut cfg = load(a.config.as_deref())?;
    let dir = out_dir(&mut cfg, a.out)?;
    let m = models(&cfg)?;
    let mut rc = ReferenceConfig::new(cfg.n_cells, cfg.t_final);
    rc.domain = cfg.domain;
    if cfg.oracle_refine > 0 {
        rc.refine = cfg.oracle_refine;
    }
    let r = godunov_reference(&m.flux, &m.data, &rc)?;
    r.coarse.write_csv(&dir.join("slices.csv"))?;
    write_diagnostics(&dir.join("diagnostics.csv"), &r.diagnostics)?;
    let tv_sup = tv_history(&r.fine).into_iter().fold(0.0, f64::max);
    let linf = r.diagnostics.iter().fold(0.0, |a: f64, d| a.max(d.linf));
    let reports = vec![
        EstimateReport::new(
            "max_principle",
            linf,
            m.data.linf_bound(),
            cfg.tol.maxp,
            "sup_t |u(t)|_inf <= |u0|_inf",
        ),
        EstimateReport::new("bv_space", tv_sup, m.data.tv_bound(), cfg.tol.bv, "sup_t TV(u(t)) <= TV(u0)"),
        EstimateReport::new(
            "mass_ledger",
            r.mass_defect,
            1e-10,
            0.0,
            "|M(t) - M(0) - boundary inflow| <= 1e-10",
        ),
    ];
    let rows: Vec<(Option<f64>, EstimateReport)> = reports.into_iter().map(|r| (Some(0.0), r)).collect();
    write_estimates_csv(&dir.join("estimates.csv"), &rows)?;
    print_reports(rows.iter().map(|(e, r)| (*e, r)));
    cfg.slices_eps = Some(0.0);
    write_text(&dir.join("run.cfg"), &cfg.to_text())?;
    Ok(rows.iter().all(|(_, r)| r.pass))
}

fn sweep_cmd(a: RunArgs) -> Result<bool> {
    let mut cfg = load(a.config.as_deref())?;
    let dir = out_dir(&mut cfg, a.out)?;
    let m = models(&cfg)?;
    let sweep = run_sweep(&m.flux, &m.visc, &m.data, &cfg.sweep_config())?;
    write_estimates_csv(&dir.join("sweep_report.csv"), &sweep.reports)?;

    let path = dir.join("convergence.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["eps", "cauchy_l1", "oracle_l1"])?;
    for (k, eps) in sweep.eps_list.iter().enumerate() {
        w.write_record([
            fmt17(*eps),
            sweep.cauchy_l1.get(k).map(|v| fmt17(*v)).unwrap_or_default(),
            sweep.oracle_l1.get(k).map(|v| fmt17(*v)).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let smallest = sweep.smallest();
    smallest.result.solution.write_csv(&dir.join("slices.csv"))?;
    print_reports(sweep.reports.iter().map(|(e, r)| (*e, r)));
    if let Some(p) = sweep.rate_exponent {
        println!("oracle rate exponent {}", fmt17(p));
    }
    cfg.slices_eps = Some(smallest.eps);
    write_text(&dir.join("run.cfg"), &cfg.to_text())?;
    Ok(sweep.passed())
}

fn verify_cmd(a: VerifyArgs) -> Result<bool> {
    let mut cfg = RunConfig::from_path(&a.input.join("run.cfg"))?;
    if let Some(c) = a.c_tol {
        cfg.tol.c_tol = c;
    }
    let m = models(&cfg)?;
    let stf = crate::grid::SpaceTimeField::read_csv(&a.input.join("slices.csv"), cfg.domain)?;
    let eps = cfg.slices_eps.unwrap_or(cfg.eps);
    let defect = if eps > 0.0 {
        let sup = stf.slices().iter().map(crate::grid::norm_linf).fold(0.0, f64::max);
        Some(ViscousDefect::new(&m.flux, &m.visc, eps, sup)?)
    } else {
        None
    };
    let report = certify_limit(&stf, &m.flux, cfg.tol.c_tol, defect.as_ref())?;
    if let Some(parent) = a.report.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    report.write_csv(&a.report)?;
    let failures = report.failures().count();
    println!(
        "{} residual rows, {failures} above tolerance",
        report.rows.len()
    );
    for r in report.failures() {
        println!(
            "FAIL {} k={} testfn={}: {} > {}",
            r.kind,
            r.k.map(fmt17).unwrap_or_default(),
            r.testfn_id.map(|i| i.to_string()).unwrap_or_default(),
            fmt17(r.residual),
            fmt17(r.tolerance)
        );
    }
    Ok(report.passed())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["viscoflow"]), 1);
        assert_eq!(run(["viscoflow", "frobnicate"]), 1);
        assert_eq!(run(["viscoflow", "solve", "--bogus"]), 1);
        assert_eq!(run(["viscoflow", "--help"]), 0);
    }

    #[test]
    fn missing_config_exits_one() {
        assert_eq!(run(["viscoflow", "solve", "--config", "/nonexistent/run.cfg"]), 1);
        assert_eq!(run(["viscoflow", "verify", "--in", "/nonexistent", "--report", "/tmp/x.csv"]), 1);
    }
}
