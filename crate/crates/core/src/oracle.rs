//! Inviscid reference: a first-order Godunov scheme on a refined grid and
//! exact Riemann solutions for convex fluxes.
//!
//! Nothing here shares code with the viscous solver, so the two can be
//! compared as independent computations of the same limit.

use crate::error::{Error, Result};
use crate::grid::{restrict_spacetime, Domain1D, Grid, ScalarField, SpaceTimeField};
use crate::models::{FluxModel, InitialData};
use crate::solver::StepDiagnostics;

/// Default ratio between the reference grid and the solver grid.
pub const DEFAULT_REFINE: usize = 8;
pub const DEFAULT_REFERENCE_CFL: f64 = 0.45;
const REFERENCE_SLICES: usize = 256;
const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Constant,
    Shock { speed: f64 },
    Rarefaction { head: f64, tail: f64 },
}

/// Entropy solution of the Riemann problem centred at `x0`.
#[derive(Debug, Clone)]
pub struct RiemannSolution {
    flux: FluxModel,
    left: f64,
    right: f64,
    x0: f64,
    wave: Wave,
}

/// Solves the Riemann problem for a flux convex on `[min, max]` of the states.
pub fn solve_riemann(flux: &FluxModel, left: f64, right: f64, x0: f64) -> Result<RiemannSolution> {
    let (lo, hi) = (left.min(right), left.max(right));
    if lo < hi && !flux.is_convex_on(lo, hi) {
        return Err(Error::NonConvexFlux { lo, hi });
    }
    let wave = if left == right {
        Wave::Constant
    } else if left > right {
        Wave::Shock {
            speed: (flux.f(left) - flux.f(right)) / (left - right),
        }
    } else {
        Wave::Rarefaction {
            tail: flux.f_prime(left),
            head: flux.f_prime(right),
        }
    };
    Ok(RiemannSolution {
        flux: flux.clone(),
        left,
        right,
        x0,
        wave,
    })
}

impl RiemannSolution {
    pub fn wave(&self) -> Wave {
        self.wave
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return if x < self.x0 { self.left } else { self.right };
        }
        let xi = (x - self.x0) / t;
        match self.wave {
            Wave::Constant => self.left,
            Wave::Shock { speed } => {
                if xi < speed {
                    self.left
                } else {
                    self.right
                }
            }
            Wave::Rarefaction { tail, head } => {
                if xi <= tail {
                    self.left
                } else if xi >= head {
                    self.right
                } else {
                    // f' is increasing on [left, right]; invert by bisection
                    let (mut a, mut b) = (self.left, self.right);
                    for _ in 0..BISECTION_STEPS {
                        let m = 0.5 * (a + b);
                        if self.flux.f_prime(m) < xi {
                            a = m;
                        } else {
                            b = m;
                        }
                        if b - a <= f64::EPSILON * (1.0 + m.abs()) {
                            break;
                        }
                    }
                    0.5 * (a + b)
                }
            }
        }
    }

    /// Cell averages at time `t`, computed from a fine midpoint sampling.
    pub fn cell_averages(&self, grid: &Grid, t: f64, samples: usize) -> Result<ScalarField> {
        let h = grid.h();
        let s = samples.max(1);
        let vals = (0..grid.n_cells())
            .map(|i| {
                let x0 = grid.face(i);
                (0..s)
                    .map(|k| self.eval(x0 + (k as f64 + 0.5) * h / s as f64, t))
                    .sum::<f64>()
                    / s as f64
            })
            .collect();
        ScalarField::new(*grid, vals)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceConfig {
    /// Cells of the grid the result is compared on.
    pub n_cells: usize,
    pub refine: usize,
    pub t_final: f64,
    pub cfl: f64,
    pub domain: Domain1D,
}

impl ReferenceConfig {
    pub fn new(n_cells: usize, t_final: f64) -> Self {
        Self {
            n_cells,
            refine: DEFAULT_REFINE,
            t_final,
            cfl: DEFAULT_REFERENCE_CFL,
            domain: Domain1D::unit(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_cells == 0 || self.refine == 0 {
            return bad("reference grid must have at least one cell");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("final time must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("reference cfl must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceResult {
    /// Slices on the refined grid.
    pub fine: SpaceTimeField,
    /// The same slices averaged onto the comparison grid.
    pub coarse: SpaceTimeField,
    pub dt: f64,
    pub steps: usize,
    pub diagnostics: Vec<StepDiagnostics>,
    /// `max_t |M(t) - M(0) - int_0^t (F_left - F_right) ds|`.
    pub mass_defect: f64,
}

fn godunov_face(flux: &FluxModel, crit: &[f64], a: f64, b: f64) -> f64 {
    let (fa, fb) = (flux.f(a), flux.f(b));
    if a <= b {
        crit.iter()
            .filter(|&&c| c > a && c < b)
            .fold(fa.min(fb), |m, &c| m.min(flux.f(c)))
    } else {
        crit.iter()
            .filter(|&&c| c > b && c < a)
            .fold(fa.max(fb), |m, &c| m.max(flux.f(c)))
    }
}

/// First-order Godunov solution of `u_t + f(u)_x = 0` with zero ghost cells.
///
/// `flux` must have a finite Lipschitz bound (clamp unbounded fluxes first).
pub fn godunov_reference(flux: &FluxModel, data: &InitialData, cfg: &ReferenceConfig) -> Result<ReferenceResult> {
    cfg.validate()?;
    let lip = flux.lipschitz_bound();
    if !lip.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "reference flux '{}' has no finite Lipschitz bound",
            flux.name()
        )));
    }
    let coarse_grid = Grid::new(cfg.domain, cfg.n_cells)?;
    let grid = coarse_grid.refined(cfg.refine)?;
    let h = grid.h();
    let dt_max = if lip > 0.0 { cfg.cfl * h / lip } else { cfg.t_final };
    let steps = (cfg.t_final / dt_max).ceil().max(1.0) as usize;
    let dt = cfg.t_final / steps as f64;
    let cadence = (steps / REFERENCE_SLICES).max(1);
    let crit = flux.critical_points().to_vec();

    let u0 = data.cell_averages(&grid)?;
    let mut u = u0.values().to_vec();
    let n = u.len();
    let mut g = vec![0.0; n + 1];
    let mass = |u: &[f64]| h * u.iter().sum::<f64>();
    let linf = |u: &[f64]| u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let m0 = mass(&u);
    let mut inflow = 0.0;
    let mut mass_defect = 0.0f64;
    let mut diagnostics = vec![StepDiagnostics {
        step: 0,
        t: 0.0,
        mass: m0,
        linf: linf(&u),
    }];
    let mut times = vec![0.0];
    let mut slices = vec![u0];

    for k in 1..=steps {
        g[0] = godunov_face(flux, &crit, 0.0, u[0]);
        for j in 1..n {
            g[j] = godunov_face(flux, &crit, u[j - 1], u[j]);
        }
        g[n] = godunov_face(flux, &crit, u[n - 1], 0.0);
        for j in 0..n {
            u[j] -= dt / h * (g[j + 1] - g[j]);
        }
        inflow += dt * (g[0] - g[n]);
        let m = mass(&u);
        mass_defect = mass_defect.max((m - m0 - inflow).abs());
        let t = if k == steps { cfg.t_final } else { k as f64 * dt };
        let l = linf(&u);
        if !l.is_finite() {
            return Err(Error::Blowup { step: k });
        }
        diagnostics.push(StepDiagnostics { step: k, t, mass: m, linf: l });
        if k % cadence == 0 || k == steps {
            times.push(t);
            slices.push(ScalarField::new(grid, u.clone())?);
        }
    }
    let fine = SpaceTimeField::new(grid, times, slices)?;
    let coarse = restrict_spacetime(&fine, &coarse_grid)?;
    Ok(ReferenceResult {
        fine,
        coarse,
        dt,
        steps,
        diagnostics,
        mass_defect,
    })
}
