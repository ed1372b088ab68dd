//! Estimate reports for single runs and eps-sweeps.

use log::info;
use rayon::prelude::*;

use crate::bv::{space_bv_l1, time_deriv_l1, total_variation, tv_history};
use crate::entropy::{certify_limit, EntropyReport, ViscousDefect, DEFAULT_C_TOL};
use crate::error::{Error, Result};
use crate::grid::{l1_spacetime_distance, norm_linf, Domain1D, Grid, ScalarField};
use crate::models::{clamp_flux, FluxModel, Hypothesis, InitialData, ViscosityModel};
use crate::mollify::{approximate_w11, mollify_data, verify_mollifier_bounds, MollifierBounds, W11Approximant};
use crate::oracle::{godunov_reference, ReferenceConfig, ReferenceResult, DEFAULT_REFINE};
use crate::report::EstimateReport;
use crate::solver::{
    energy_estimate_check, energy_volume_check, max_principle_check, solve, Scheme, SolveResult, SolverConfig,
};

/// Uniform instants used for space-time `L^1` distances.
pub const SPACETIME_SAMPLES: usize = 513;

/// Largest allowed ratio of successive W11 errors. Rate-agnostic: data with
/// square-root edges converge like `eps^(1/2)`, a ratio near 0.71 per halving.
pub const W11_CONTRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub maxp: f64,
    pub energy: f64,
    pub bv: f64,
    pub time: f64,
    /// Sup and gradient bounds of mollified data, checked by quadrature.
    pub mollifier: f64,
    /// Second-derivative bound against the explicit kernel constant.
    pub laplacian: f64,
    /// Allowed relative variation of measured constants across eps-halving.
    pub const_variation: f64,
    pub c_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            maxp: 1e-10,
            energy: 0.05,
            bv: 0.05,
            time: 0.05,
            mollifier: 1e-8,
            laplacian: 1e-6,
            const_variation: 0.10,
            c_tol: DEFAULT_C_TOL,
        }
    }
}

/// Clamps `flux` linearly outside the interval `I` the data lives in.
pub fn clamp_to_data(flux: &FluxModel, data: &InitialData) -> Result<FluxModel> {
    let m = data.interval_half_width();
    let m = if m > 0.0 { m } else { 1.0 };
    clamp_flux(flux, -m, m)
}

/// Mollified data for hypothesis E, cutoff-then-mollify for F.
pub fn regularize_data(data: &InitialData, eps: f64, grid: &Grid) -> Result<ScalarField> {
    match data.hypothesis() {
        Hypothesis::E => mollify_data(data, eps, grid),
        Hypothesis::F => approximate_w11(data, eps, grid),
    }
}

/// `sup_t TV(u(., t)) <= TV(u0)`.
pub fn bv_space_report(result: &SolveResult, u0: &InitialData, tol: f64) -> EstimateReport {
    EstimateReport::new(
        "bv_space",
        tv_history(&result.solution).into_iter().fold(0.0, f64::max),
        u0.tv_bound(),
        tol,
        "sup_t TV(u_eps(t)) <= TV(u0)",
    )
}

/// `sup_t TV(u(., t)) <= C` with `C` the measured gradient bound of the data.
pub fn bv_space_bounded_report(result: &SolveResult, c_measured: f64, tol: f64) -> EstimateReport {
    EstimateReport::new(
        "bv_space_bounded",
        tv_history(&result.solution).into_iter().fold(0.0, f64::max),
        c_measured,
        tol,
        "sup_t |u_eps,x(t)|_L1 <= C, C = |u0eps'|_L1",
    )
}

/// `2 |B'|_{L^inf(I)} Vol/(2r) m^2 + 2 sup_I |f'| tv + 2 m Vol` with `I = [-m, m]`.
pub fn time_bound_rhs(flux: &FluxModel, visc: &ViscosityModel, m: f64, tv: f64, domain: Domain1D) -> f64 {
    let vol = domain.volume();
    2.0 * visc.sup_abs_derivative(m) * vol / (2.0 * visc.r_lower()) * m * m
        + 2.0 * flux.sup_abs_derivative(-m, m) * tv
        + 2.0 * m * vol
}

/// `|u_t|_{L^1(Omega_T)}` against the explicit three-term bound.
pub fn bv_time_report(
    result: &SolveResult,
    flux: &FluxModel,
    visc: &ViscosityModel,
    u0: &InitialData,
    tol: f64,
) -> Result<EstimateReport> {
    Ok(EstimateReport::new(
        "bv_time",
        time_deriv_l1(&result.solution)?,
        time_bound_rhs(flux, visc, u0.linf_bound(), u0.tv_bound(), u0.domain()),
        tol,
        "|u_t|_L1 <= 2|B'| Vol/(2r) |u0|^2 + 2 sup|f'| TV(u0) + 2 |u0| Vol",
    ))
}

/// Hypothesis F form with `A` and the measured `C` in place of `|u0|` and `TV`.
pub fn bv_time_report_bounded(
    result: &SolveResult,
    flux: &FluxModel,
    visc: &ViscosityModel,
    u0: &InitialData,
    c_measured: f64,
    tol: f64,
) -> Result<EstimateReport> {
    Ok(EstimateReport::new(
        "bv_time",
        time_deriv_l1(&result.solution)?,
        time_bound_rhs(flux, visc, u0.a_bound(), c_measured, u0.domain()),
        tol,
        "|u_t|_L1 <= 2|B'| Vol/(2r) A^2 + 2 sup|f'| C + 2 A Vol",
    ))
}

/// One solved eps level with its report set.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub eps: f64,
    pub result: SolveResult,
    pub u0eps: ScalarField,
    pub reports: Vec<EstimateReport>,
    /// `int_0^T TV(u(t)) dt`, reported next to the per-slice bound.
    pub space_bv_aggregate: f64,
    /// `sup_t TV(u(t))`.
    pub tv_sup: f64,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Regularizes the data, solves and assembles the report set of one run.
///
/// `flux` is the clamped flux; the solver mollifies it internally.
/// `mollifier` supplies the data-bound rows under hypothesis E.
pub fn run_single(
    flux: &FluxModel,
    visc: &ViscosityModel,
    data: &InitialData,
    cfg: &SolverConfig,
    tol: &Tolerances,
    mollifier: Option<&MollifierBounds>,
) -> Result<RunOutcome> {
    let grid = cfg.grid()?;
    let u0eps = regularize_data(data, cfg.epsilon, &grid)?;
    let result = solve(flux, visc, &u0eps, cfg)?;
    let tv_sup = tv_history(&result.solution).into_iter().fold(0.0, f64::max);
    let mut reports = Vec::new();
    match data.hypothesis() {
        Hypothesis::E => {
            reports.push(max_principle_check(&result, data, tol.maxp));
            reports.push(energy_estimate_check(&result, visc, &u0eps, tol.energy)?);
            reports.push(bv_space_report(&result, data, tol.bv));
            reports.push(bv_time_report(&result, flux, visc, data, tol.time)?);
            let owned;
            let bounds = match mollifier {
                Some(b) if b.rows.iter().any(|r| r.eps == cfg.epsilon) => b,
                _ => {
                    owned = verify_mollifier_bounds(data, &[cfg.epsilon])?;
                    &owned
                }
            };
            reports.extend(bounds.estimates_at(cfg.epsilon, data, tol.mollifier, tol.laplacian));
        }
        Hypothesis::F => {
            let c_measured = total_variation(&u0eps);
            let a = data.a_bound();
            reports.push(EstimateReport::new(
                "max_principle",
                result.diagnostics.iter().fold(0.0, |m, d| m.max(d.linf)),
                a,
                tol.maxp,
                "sup_t |u_eps(t)|_inf <= A",
            ));
            reports.push(energy_volume_check(&result, visc, data, tol.energy)?);
            reports.push(bv_space_bounded_report(&result, c_measured, tol.bv));
            reports.push(bv_time_report_bounded(&result, flux, visc, data, c_measured, tol.time)?);
            reports.push(EstimateReport::new(
                "w11_sup",
                norm_linf(&u0eps),
                a,
                tol.mollifier,
                "|u0eps|_inf <= A",
            ));
        }
    }
    Ok(RunOutcome {
        eps: cfg.epsilon,
        space_bv_aggregate: space_bv_l1(&result.solution)?,
        tv_sup,
        result,
        u0eps,
        reports,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
    pub n_cells: usize,
    pub t_final: f64,
    pub cfl_safety: f64,
    pub store_every: usize,
    pub scheme: Scheme,
    pub domain: Domain1D,
    /// Refinement of the Godunov reference; 0 skips the reference.
    pub oracle_refine: usize,
    pub tol: Tolerances,
}

impl SweepConfig {
    pub fn new(eps_list: Vec<f64>, n_cells: usize, t_final: f64) -> Self {
        Self {
            eps_list,
            n_cells,
            t_final,
            cfl_safety: 0.9,
            store_every: 0,
            scheme: Scheme::EngquistOsher,
            domain: Domain1D::unit(),
            oracle_refine: DEFAULT_REFINE,
            tol: Tolerances::default(),
        }
    }

    pub fn solver_config(&self, eps: f64) -> SolverConfig {
        SolverConfig {
            epsilon: eps,
            n_cells: self.n_cells,
            t_final: self.t_final,
            cfl_safety: self.cfl_safety,
            store_every: self.store_every,
            scheme: self.scheme,
            domain: self.domain,
            anti_diffusion: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.eps_list.len() < 3 {
            return Err(Error::InvalidConfig("a sweep needs at least three eps values".into()));
        }
        if self.eps_list.iter().any(|e| e.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) || self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("eps_list must be positive and strictly decreasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub eps_list: Vec<f64>,
    pub runs: Vec<RunOutcome>,
    /// `|u^{eps_k} - u^{eps_{k+1}}|_{L^1(Omega_T)}`, one shorter than `runs`.
    pub cauchy_l1: Vec<f64>,
    /// Distance of each run to the Godunov reference; empty without one.
    pub oracle_l1: Vec<f64>,
    /// Least-squares slope of `log oracle_l1` against `log eps`.
    pub rate_exponent: Option<f64>,
    pub reference: Option<ReferenceResult>,
    pub mollifier: Option<MollifierBounds>,
    /// Per-run reports tagged with their eps, then sweep-level rows.
    pub reports: Vec<(Option<f64>, EstimateReport)>,
}

impl SweepResult {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.pass)
    }

    /// `cauchy_l1[k+1] / cauchy_l1[k]`.
    pub fn cauchy_ratios(&self) -> Vec<f64> {
        self.cauchy_l1.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn smallest(&self) -> &RunOutcome {
        self.runs.last().expect("sweep has runs")
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn max_ratio(v: &[f64]) -> f64 {
    v.windows(2)
        .map(|w| if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max)
}

fn relative_spread(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(0.0, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    if hi == 0.0 {
        0.0
    } else {
        (hi - lo) / hi
    }
}

/// Solves every eps on one shared grid, compares successive levels and,
/// optionally, the inviscid reference.
///
/// `flux` is the raw flux; it is clamped to the data interval first.
pub fn run_sweep(
    flux: &FluxModel,
    visc: &ViscosityModel,
    data: &InitialData,
    cfg: &SweepConfig,
) -> Result<SweepResult> {
    cfg.validate()?;
    let clamped = clamp_to_data(flux, data)?;
    let mollifier = match data.hypothesis() {
        Hypothesis::E => Some(verify_mollifier_bounds(data, &cfg.eps_list)?),
        Hypothesis::F => None,
    };

    let runs = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            info!("solving eps = {eps}");
            run_single(&clamped, visc, data, &cfg.solver_config(eps), &cfg.tol, mollifier.as_ref()).map_err(|e| {
                Error::Sweep {
                    eps,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cauchy_l1 = runs
        .windows(2)
        .map(|w| l1_spacetime_distance(&w[0].result.solution, &w[1].result.solution, SPACETIME_SAMPLES))
        .collect::<Result<Vec<_>>>()?;

    let reference = if cfg.oracle_refine > 0 {
        let mut rc = ReferenceConfig::new(cfg.n_cells, cfg.t_final);
        rc.refine = cfg.oracle_refine;
        rc.domain = cfg.domain;
        Some(godunov_reference(&clamped, data, &rc)?)
    } else {
        None
    };
    let oracle_l1 = match &reference {
        Some(r) => runs
            .iter()
            .map(|run| l1_spacetime_distance(&run.result.solution, &r.coarse, SPACETIME_SAMPLES))
            .collect::<Result<Vec<_>>>()?,
        None => vec![],
    };
    let rate_exponent = fit_log_slope(&cfg.eps_list, &oracle_l1);

    let mut reports: Vec<(Option<f64>, EstimateReport)> = runs
        .iter()
        .flat_map(|r| r.reports.iter().map(move |rep| (Some(r.eps), rep.clone())))
        .collect();
    let tol = &cfg.tol;
    match data.hypothesis() {
        Hypothesis::E => {
            let m = mollifier.as_ref().expect("computed for hypothesis E");
            reports.push((
                None,
                EstimateReport::new(
                    "mollifier_c_stability",
                    m.c_growth,
                    tol.const_variation,
                    0.0,
                    "sup eps |u0eps''|_L1 / TV(u0) grows at most by the allowed variation",
                ),
            ));
        }
        Hypothesis::F => {
            let errors = cfg
                .eps_list
                .iter()
                .map(|&e| W11Approximant::new(data, e).map(|w| w.w11_error()))
                .collect::<Result<Vec<_>>>()?;
            reports.push((
                None,
                EstimateReport::new(
                    "w11_convergence",
                    max_ratio(&errors),
                    W11_CONTRACTION,
                    0.0,
                    "|u0eps - u0|_W11 shrinks along the eps list",
                ),
            ));
            let sups: Vec<f64> = runs.iter().map(|r| r.tv_sup).collect();
            reports.push((
                None,
                EstimateReport::new(
                    "bv_bounded_stability",
                    relative_spread(&sups),
                    tol.const_variation,
                    0.0,
                    "sup_t |u_eps,x|_L1 stays bounded across eps",
                ),
            ));
        }
    }
    if !cauchy_l1.is_empty() {
        reports.push((
            None,
            EstimateReport::new(
                "cauchy_contraction",
                max_ratio(&cauchy_l1),
                0.9,
                0.0,
                "|u^eps_k+1 - u^eps_k+2|_L1 <= 0.9 |u^eps_k - u^eps_k+1|_L1",
            ),
        ));
    }
    if !oracle_l1.is_empty() {
        reports.push((
            None,
            EstimateReport::new(
                "oracle_decreasing",
                max_ratio(&oracle_l1),
                1.0,
                0.0,
                "|u^eps - u|_L1 decreases with eps",
            ),
        ));
        let p = rate_exponent.unwrap_or(f64::NAN);
        reports.push((
            None,
            EstimateReport::new("oracle_rate_min", 0.3, p, 0.0, "fitted exponent of |u^eps - u|_L1 >= 0.3"),
        ));
        reports.push((
            None,
            EstimateReport::new("oracle_rate_max", p, 1.1, 0.0, "fitted exponent of |u^eps - u|_L1 <= 1.1"),
        ));
    }

    Ok(SweepResult {
        eps_list: cfg.eps_list.clone(),
        runs,
        cauchy_l1,
        oracle_l1,
        rate_exponent,
        reference,
        mollifier,
        reports,
    })
}

/// Entropy certification of the smallest-eps solution of a convergent sweep.
///
/// `flux` is the clamped flux the sweep ran with.
pub fn certify_sweep(
    sweep: &SweepResult,
    flux: &FluxModel,
    visc: &ViscosityModel,
    c_tol: f64,
) -> Result<EntropyReport> {
    let ratios = sweep.cauchy_ratios();
    if sweep.cauchy_l1.is_empty() || ratios.iter().any(|r| r.partial_cmp(&1.0) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::NotCauchy(format!("successive ratios {ratios:?}")));
    }
    let run = sweep.smallest();
    let m = run.result.max_abs;
    let defect = ViscousDefect::new(flux, visc, run.eps, m)?;
    certify_limit(&run.result.solution, flux, c_tol, Some(&defect))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit_recovers_power_law() {
        let x = [0.04, 0.02, 0.01, 0.005];
        let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.powf(0.7)).collect();
        assert!((fit_log_slope(&x, &y).unwrap() - 0.7).abs() < 1e-12);
        assert!(fit_log_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn ratios_and_spread() {
        assert_eq!(max_ratio(&[4.0, 2.0, 1.5]), 0.75);
        assert_eq!(max_ratio(&[0.0, 0.0]), 0.0);
        assert!((relative_spread(&[2.0, 1.8, 2.0]) - 0.1).abs() < 1e-12);
        assert_eq!(relative_spread(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn constant_viscosity_drops_first_term() {
        let f = FluxModel::clamped_burgers(1.0).unwrap();
        let rhs = time_bound_rhs(&f, &ViscosityModel::constant(), 1.0, 2.0, Domain1D::unit());
        assert!((rhs - (2.0 * 1.0 * 2.0 + 2.0)).abs() < 1e-12);
        let with_b = time_bound_rhs(&f, &ViscosityModel::rational(), 1.0, 2.0, Domain1D::unit());
        assert!(with_b > rhs);
    }

    #[test]
    fn sweep_config_is_validated() {
        let z = InitialData::zero(Hypothesis::E);
        let f = FluxModel::zero();
        let v = ViscosityModel::constant();
        assert!(run_sweep(&f, &v, &z, &SweepConfig::new(vec![0.1, 0.05], 32, 0.1)).is_err());
        assert!(run_sweep(&f, &v, &z, &SweepConfig::new(vec![0.1, 0.2, 0.05], 32, 0.1)).is_err());
    }

    #[test]
    fn zero_sweep_is_all_zero() {
        let z = InitialData::zero(Hypothesis::E);
        let mut cfg = SweepConfig::new(vec![0.2, 0.1, 0.05], 64, 0.05);
        cfg.oracle_refine = 2;
        let s = run_sweep(&FluxModel::burgers(), &ViscosityModel::rational(), &z, &cfg).unwrap();
        assert!(s.cauchy_l1.iter().all(|d| *d == 0.0));
        assert!(s.oracle_l1.iter().all(|d| *d == 0.0));
        for r in &s.runs {
            for rep in &r.reports {
                assert_eq!(rep.lhs, 0.0, "{}", rep.name);
            }
        }
    }
}
