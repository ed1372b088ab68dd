//! Explicit finite-volume solver for the regularized problem
//!
//! ```text
//! u_t + f_eps(u)_x = eps (B(u) u_x)_x   in (a, b) x (0, T)
//! u = 0 on the boundary,  u(., 0) = u0eps
//! ```
//!
//! The update is conservative: every cell changes by the difference of a
//! face flux `G = F(u_L, u_R) - eps B((u_L + u_R)/2) (u_R - u_L)/h`, with a
//! monotone numerical flux `F` and ghost value 0 outside both boundaries.
//! Under the step restriction used here each new cell value is a convex
//! combination of its old neighbourhood (ghosts included), which gives the
//! discrete maximum principle and TV diminution.

use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::grid::{fmt17, norm_l2_sq, norm_linf, Domain1D, Grid, ScalarField, SpaceTimeField};
use crate::models::{FluxModel, InitialData, ViscosityModel};
use crate::mollify::mollify_flux;
use crate::report::EstimateReport;

/// Relative tolerance for the maximum principle under monotone schemes.
pub const TOL_MAXP: f64 = 1e-10;
/// Relative tolerance for integral estimates.
pub const TOL_ENERGY: f64 = 0.05;
/// Target number of stored slices when `store_every` is 0.
pub const AUTO_SLICES: usize = 256;
/// Growth factor of `max |u|` that flags a run as unstable.
const GROWTH_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EngquistOsher,
    Godunov,
    LaxFriedrichs,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::EngquistOsher => "engquist_osher",
            Scheme::Godunov => "godunov_flux",
            Scheme::LaxFriedrichs => "lax_friedrichs",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "engquist_osher" => Ok(Scheme::EngquistOsher),
            "godunov_flux" | "godunov" => Ok(Scheme::Godunov),
            "lax_friedrichs" => Ok(Scheme::LaxFriedrichs),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Monotone two-point flux built from a flux with known critical points.
#[derive(Debug, Clone)]
pub struct NumericalFlux {
    scheme: Scheme,
    alpha: f64,
    /// `(u_c, f(u_c))`, sorted by `u_c`.
    critical: Vec<(f64, f64)>,
}

impl NumericalFlux {
    pub fn new(flux: &FluxModel, scheme: Scheme) -> Self {
        let mut critical: Vec<(f64, f64)> = flux
            .critical_points()
            .iter()
            .map(|&c| (c, flux.f(c)))
            .collect();
        critical.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            scheme,
            alpha: flux.lipschitz_bound(),
            critical,
        }
    }

    /// Flux across a face with left state `a` and right state `b`, given
    /// `fa = f(a)` and `fb = f(b)`.
    #[inline]
    pub fn eval(&self, a: f64, fa: f64, b: f64, fb: f64) -> f64 {
        match self.scheme {
            Scheme::LaxFriedrichs => 0.5 * (fa + fb) - 0.5 * self.alpha * (b - a),
            Scheme::Godunov => {
                if a <= b {
                    self.inner(a, b).fold(fa.min(fb), f64::min)
                } else {
                    self.inner(b, a).fold(fa.max(fb), f64::max)
                }
            }
            Scheme::EngquistOsher => {
                // total variation of f between a and b, through its monotone pieces
                let (lo, flo, hi, fhi) = if a <= b { (a, fa, b, fb) } else { (b, fb, a, fa) };
                let mut var = 0.0;
                let mut prev = flo;
                for fc in self.inner(lo, hi) {
                    var += (fc - prev).abs();
                    prev = fc;
                }
                var += (fhi - prev).abs();
                // oriented integral of |f'| from a to b
                if a <= b {
                    0.5 * (fa + fb) - 0.5 * var
                } else {
                    0.5 * (fa + fb) + 0.5 * var
                }
            }
        }
    }

    fn inner(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        self.critical
            .iter()
            .filter(move |(c, _)| *c > lo && *c < hi)
            .map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub n_cells: usize,
    pub t_final: f64,
    pub cfl_safety: f64,
    /// Store a slice every this many steps; 0 picks a cadence giving about
    /// [`AUTO_SLICES`] slices.
    pub store_every: usize,
    pub scheme: Scheme,
    pub domain: Domain1D,
    /// Test hook: strength of an anti-diffusive face flux `+kappa (u_R - u_L)/h`.
    pub anti_diffusion: f64,
}

impl SolverConfig {
    pub fn new(epsilon: f64, n_cells: usize, t_final: f64) -> Self {
        Self {
            epsilon,
            n_cells,
            t_final,
            cfl_safety: 0.9,
            store_every: 0,
            scheme: Scheme::EngquistOsher,
            domain: Domain1D::unit(),
            anti_diffusion: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("final time must be positive");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if self.n_cells == 0 {
            return bad("n_cells must be positive");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain, self.n_cells)
    }

    /// Largest stable step: `cfl / (2 L / h + 2 eps sup B / h^2)`.
    pub fn max_dt(&self, lipschitz: f64, b_sup: f64) -> f64 {
        let h = self.domain.volume() / self.n_cells as f64;
        let rate = 2.0 * lipschitz / h + 2.0 * (self.epsilon * b_sup + self.anti_diffusion.abs()) / (h * h);
        self.cfl_safety / rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub linf: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: SpaceTimeField,
    pub dt_used: f64,
    pub steps: usize,
    pub max_abs: f64,
    pub epsilon: f64,
    /// One entry per step, including the initial state.
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Single explicit step of the conservative update.
pub struct Stepper {
    flux: FluxModel,
    visc: ViscosityModel,
    numerical: NumericalFlux,
    h: f64,
    epsilon: f64,
    anti: f64,
    f_ghost: f64,
    u: Vec<f64>,
    fu: Vec<f64>,
    faces: Vec<f64>,
}

impl Stepper {
    /// `flux` is used as given (callers mollify it first).
    pub fn new(flux: FluxModel, visc: ViscosityModel, cfg: &SolverConfig, u0: &ScalarField) -> Self {
        let n = u0.values().len();
        Self {
            numerical: NumericalFlux::new(&flux, cfg.scheme),
            f_ghost: flux.f(0.0),
            flux,
            visc,
            h: u0.h(),
            epsilon: cfg.epsilon,
            anti: cfg.anti_diffusion,
            u: u0.values().to_vec(),
            fu: vec![0.0; n],
            faces: vec![0.0; n + 1],
        }
    }

    pub fn state(&self) -> &[f64] {
        &self.u
    }

    pub fn mass(&self) -> f64 {
        self.h * self.u.iter().sum::<f64>()
    }

    #[inline]
    fn face_flux(&self, a: f64, fa: f64, b: f64, fb: f64) -> f64 {
        let adv = self.numerical.eval(a, fa, b, fb);
        let diff = self.epsilon * self.visc.b(0.5 * (a + b)) * (b - a) / self.h;
        adv - diff + self.anti * (b - a) / self.h
    }

    /// Advances by `dt` and returns the net inflow `G_left - G_right`
    /// through the two boundary faces, so that the mass changes by exactly
    /// `dt` times it.
    pub fn step(&mut self, dt: f64) -> f64 {
        let n = self.u.len();
        for (fu, &u) in self.fu.iter_mut().zip(&self.u) {
            *fu = self.flux.f(u);
        }
        self.faces[0] = self.face_flux(0.0, self.f_ghost, self.u[0], self.fu[0]);
        for j in 1..n {
            self.faces[j] = self.face_flux(self.u[j - 1], self.fu[j - 1], self.u[j], self.fu[j]);
        }
        self.faces[n] = self.face_flux(self.u[n - 1], self.fu[n - 1], 0.0, self.f_ghost);
        let lambda = dt / self.h;
        for (i, u) in self.u.iter_mut().enumerate() {
            *u -= lambda * (self.faces[i + 1] - self.faces[i]);
        }
        self.faces[0] - self.faces[n]
    }
}

fn store_cadence(cfg: &SolverConfig, steps: usize) -> usize {
    if cfg.store_every > 0 {
        cfg.store_every
    } else {
        (steps / AUTO_SLICES).max(1)
    }
}

/// Solves the regularized problem from mollified data `u0eps`.
///
/// The flux is mollified with the same `eps` as the viscosity.
pub fn solve(
    flux: &FluxModel,
    visc: &ViscosityModel,
    u0eps: &ScalarField,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    if *u0eps.grid() != grid {
        return Err(Error::InvalidConfig(format!(
            "initial field has {} cells on {:?}, config expects {} on {:?}",
            u0eps.grid().n_cells(),
            u0eps.grid().domain(),
            grid.n_cells(),
            grid.domain()
        )));
    }
    if grid.h() > cfg.epsilon / 4.0 {
        warn!(
            "h = {:.3e} exceeds eps/4 = {:.3e}; boundary layers are under-resolved",
            grid.h(),
            cfg.epsilon / 4.0
        );
    }
    let flux_eps = mollify_flux(flux, cfg.epsilon)?;
    let dt_max = cfg.max_dt(flux_eps.lipschitz_bound(), visc.b_sup());
    let steps = (cfg.t_final / dt_max).ceil().max(1.0) as usize;
    let dt = cfg.t_final / steps as f64;
    let cadence = store_cadence(cfg, steps);

    let mut stepper = Stepper::new(flux_eps, visc.clone(), cfg, u0eps);
    let initial_max = norm_linf(u0eps);
    let mut max_abs = initial_max;
    let mut times = vec![0.0];
    let mut slices = vec![u0eps.clone()];
    let mut diagnostics = Vec::with_capacity(steps + 1);
    diagnostics.push(StepDiagnostics {
        step: 0,
        t: 0.0,
        mass: stepper.mass(),
        linf: initial_max,
    });

    for k in 1..=steps {
        stepper.step(dt);
        let linf = stepper.state().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !linf.is_finite() {
            return Err(Error::Blowup { step: k });
        }
        max_abs = max_abs.max(linf);
        let t = if k == steps { cfg.t_final } else { k as f64 * dt };
        diagnostics.push(StepDiagnostics {
            step: k,
            t,
            mass: stepper.mass(),
            linf,
        });
        if k % cadence == 0 || k == steps {
            times.push(t);
            slices.push(ScalarField::new(grid, stepper.state().to_vec())?);
        }
    }
    if max_abs > GROWTH_LIMIT * initial_max {
        return Err(Error::Unstable {
            initial: initial_max,
            observed: max_abs,
        });
    }

    Ok(SolveResult {
        solution: SpaceTimeField::new(grid, times, slices)?,
        dt_used: dt,
        steps,
        max_abs,
        epsilon: cfg.epsilon,
        diagnostics,
    })
}

/// Writes `step,t,mass,linf` rows.
pub fn write_diagnostics(path: &std::path::Path, rows: &[StepDiagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "t", "mass", "linf"])?;
    for d in rows {
        w.write_record([d.step.to_string(), fmt17(d.t), fmt17(d.mass), fmt17(d.linf)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// `sup_t |u(., t)|_inf <= |u0|_inf`, checked over every step.
pub fn max_principle_check(result: &SolveResult, u0: &InitialData, tol: f64) -> EstimateReport {
    let lhs = result.diagnostics.iter().fold(0.0f64, |m, d| m.max(d.linf));
    EstimateReport::new(
        "max_principle",
        lhs,
        u0.linf_bound(),
        tol,
        "sup_t |u_eps(t)|_inf <= |u0|_inf",
    )
}

/// `sum over faces (u_R - u_L)^2 / h`, boundary faces against the zero ghost.
pub fn grad_l2_sq(field: &ScalarField) -> f64 {
    let v = field.values();
    let h = field.h();
    let interior: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    (interior + v[0].powi(2) + v[v.len() - 1].powi(2)) / h
}

/// `eps |u_x|^2_{L^2(Omega_T)}`.
pub fn dissipated_energy(result: &SolveResult) -> Result<f64> {
    Ok(result.epsilon * crate::grid::integrate_time(&result.solution, grad_l2_sq)?)
}

/// `eps |u_x|^2_{L^2(Omega_T)} <= |u0eps|^2_{L^2} / (2 r)`.
pub fn energy_estimate_check(
    result: &SolveResult,
    visc: &ViscosityModel,
    u0eps: &ScalarField,
    tol: f64,
) -> Result<EstimateReport> {
    Ok(EstimateReport::new(
        "energy",
        dissipated_energy(result)?,
        norm_l2_sq(u0eps) / (2.0 * visc.r_lower()),
        tol,
        "eps |u_x|^2_L2(Omega_T) <= |u0eps|^2_L2 / (2r)",
    ))
}

/// `eps |u_x|^2_{L^2(Omega_T)} <= Vol A^2 / (2 r)` for hypothesis F data.
pub fn energy_volume_check(
    result: &SolveResult,
    visc: &ViscosityModel,
    u0: &InitialData,
    tol: f64,
) -> Result<EstimateReport> {
    let a = u0.a_bound();
    Ok(EstimateReport::new(
        "energy_vol",
        dissipated_energy(result)?,
        u0.domain().volume() * a * a / (2.0 * visc.r_lower()),
        tol,
        "eps |u_x|^2_L2(Omega_T) <= Vol A^2 / (2r)",
    ))
}
