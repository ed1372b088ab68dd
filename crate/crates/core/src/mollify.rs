//! Bump-kernel mollification of initial data and fluxes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::models::{FluxModel, Hypothesis, InitialData, Profile, Profile1D, RealFn};
use crate::quad::{adaptive_simpson, adaptive_simpson_split};
use crate::report::EstimateReport;

/// Sub-samples per cell when restricting a mollified function to cell averages.
pub const SUBSAMPLES: usize = 4;

/// Nodes in the fixed rule used to convolve fluxes.
pub const FLUX_NODES: usize = 32;

const INNER_TOL: f64 = 1e-13;
const OUTER_TOL: f64 = 1e-11;

/// `exp(-1/(1 - s^2))` on `(-1, 1)`.
#[inline]
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// `d/ds exp(-1/(1 - s^2))`.
#[inline]
pub fn bump_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - s * s;
        -2.0 * s / (d * d) * (-1.0 / d).exp()
    }
}

/// `rho_eps(z) = k_eps exp(-1/(1 - (z/eps)^2))`, normalized to unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierKernel {
    epsilon: f64,
    normalization: f64,
}

impl MollifierKernel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::NonPositiveEpsilon(epsilon));
        }
        let mass = adaptive_simpson(&|z: f64| bump(z / epsilon), -epsilon, epsilon, 1e-16 * epsilon);
        Ok(Self {
            epsilon,
            normalization: 1.0 / mass,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        self.normalization * bump(z / self.epsilon)
    }

    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        self.normalization * bump_derivative(z / self.epsilon) / self.epsilon
    }

    /// `eps * |rho_eps'|_{L^1} = 2 eps rho_eps(0)`, independent of `eps`.
    ///
    /// For any BV function `|(u * rho_eps)''|_1 <= TV(u) |rho_eps'|_1`, so
    /// this is an explicit constant for the second-derivative bound.
    pub fn laplacian_constant(&self) -> f64 {
        2.0 * self.epsilon * self.eval(0.0)
    }

    /// Symmetric midpoint nodes with weights summing to one.
    pub fn nodes(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let dz = 2.0 * self.epsilon / n as f64;
        let z: Vec<f64> = (0..n)
            .map(|k| -self.epsilon + (k as f64 + 0.5) * dz)
            .collect();
        let mut w: Vec<f64> = z.iter().map(|&z| self.eval(z)).collect();
        // enforce exact symmetry before normalizing
        for k in 0..n / 2 {
            let avg = 0.5 * (w[k] + w[n - 1 - k]);
            w[k] = avg;
            w[n - 1 - k] = avg;
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        (z, w)
    }
}

/// `u * rho_eps` for a profile with finitely many jumps and kinks.
pub struct Mollified<'a, P: Profile1D + ?Sized> {
    profile: &'a P,
    kernel: MollifierKernel,
    jumps: Vec<(f64, f64)>,
    breaks: Vec<f64>,
}

impl<'a, P: Profile1D + ?Sized> Mollified<'a, P> {
    pub fn new(profile: &'a P, kernel: MollifierKernel) -> Self {
        let mut breaks = profile.breakpoints();
        breaks.extend(profile.jumps().iter().map(|j| j.0));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Self {
            jumps: profile.jumps(),
            profile,
            kernel,
            breaks,
        }
    }

    pub fn kernel(&self) -> MollifierKernel {
        self.kernel
    }

    fn inner(&self, x: f64, g: impl Fn(f64) -> f64) -> f64 {
        let eps = self.kernel.epsilon;
        // u(x - z) is non-smooth where x - z hits a breakpoint
        let splits: Vec<f64> = self.breaks.iter().map(|b| x - b).collect();
        adaptive_simpson_split(&g, -eps, eps, &splits, INNER_TOL)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.inner(x, |z| self.profile.value(x - z) * self.kernel.eval(z))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let smooth = self.inner(x, |z| self.profile.derivative(x - z) * self.kernel.eval(z));
        smooth
            + self
                .jumps
                .iter()
                .map(|&(p, j)| j * self.kernel.eval(x - p))
                .sum::<f64>()
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let smooth = self.inner(x, |z| self.profile.derivative(x - z) * self.kernel.derivative(z));
        smooth
            + self
                .jumps
                .iter()
                .map(|&(p, j)| j * self.kernel.derivative(x - p))
                .sum::<f64>()
    }

    /// Points where the mollified function may change character: every
    /// breakpoint shifted by `-eps`, `0`, `+eps`.
    fn outer_breaks(&self) -> Vec<f64> {
        let eps = self.kernel.epsilon;
        self.breaks
            .iter()
            .flat_map(|&b| [b - eps, b, b + eps])
            .collect()
    }

    pub fn gradient_l1(&self, a: f64, b: f64) -> f64 {
        adaptive_simpson_split(&|x| self.derivative(x).abs(), a, b, &self.outer_breaks(), OUTER_TOL)
    }

    /// Tolerance scales with `1/eps`, the size of `|u''|_1`.
    pub fn laplacian_l1(&self, a: f64, b: f64) -> f64 {
        adaptive_simpson_split(
            &|x| self.second_derivative(x).abs(),
            a,
            b,
            &self.outer_breaks(),
            OUTER_TOL / self.kernel.epsilon,
        )
    }

    /// `max |u * rho|` over `n` samples of `[a, b]` plus every breakpoint.
    pub fn sup_abs(&self, a: f64, b: f64, n: usize) -> f64 {
        let pts = (0..=n)
            .map(|j| a + (b - a) * j as f64 / n as f64)
            .chain(self.outer_breaks());
        pts.filter(|x| *x >= a && *x <= b)
            .fold(0.0, |m, x| m.max(self.value(x).abs()))
    }

    /// Cell averages from `SUBSAMPLES` point values per cell.
    pub fn cell_averages(&self, grid: &Grid) -> Result<ScalarField> {
        let h = grid.h();
        let values = (0..grid.n_cells())
            .map(|i| {
                let x0 = grid.face(i);
                (0..SUBSAMPLES)
                    .map(|s| self.value(x0 + (s as f64 + 0.5) * h / SUBSAMPLES as f64))
                    .sum::<f64>()
                    / SUBSAMPLES as f64
            })
            .collect();
        ScalarField::new(*grid, values)
    }
}

fn require(data: &InitialData, expected: Hypothesis) -> Result<()> {
    if data.hypothesis() != expected {
        return Err(Error::WrongHypothesis {
            expected: expected.label(),
            found: data.hypothesis().label(),
        });
    }
    Ok(())
}

fn admissible_kernel(data: &InitialData, eps: f64) -> Result<MollifierKernel> {
    let kernel = MollifierKernel::new(eps)?;
    let margin = data.support_margin();
    if eps >= margin {
        return Err(Error::SupportEscapesDomain { eps, margin });
    }
    Ok(kernel)
}

/// `u0 * rho_eps` as cell averages on `grid` (hypothesis E).
pub fn mollify_data(data: &InitialData, eps: f64, grid: &Grid) -> Result<ScalarField> {
    require(data, Hypothesis::E)?;
    let kernel = admissible_kernel(data, eps)?;
    Mollified::new(data.profile(), kernel).cell_averages(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MollifierBoundsRow {
    pub eps: f64,
    /// `|u0eps|_inf / |u0|_inf`
    pub sup_ratio: f64,
    /// `|u0eps'|_1 / TV(u0)`
    pub tv_ratio: f64,
    /// `eps |u0eps''|_1 / TV(u0)`
    pub c_eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MollifierBounds {
    pub rows: Vec<MollifierBoundsRow>,
    /// `sup c(eps)` over the list: the measured second-derivative constant.
    pub c_empirical: f64,
    /// Largest relative increase of the running supremum of `c(eps)` when
    /// the next, smaller `eps` is added.
    pub c_growth: f64,
    /// Explicit constant `eps |rho_eps'|_1`.
    pub c_kernel: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Measures the sup, gradient and second-derivative bounds of `u0 * rho_eps`
/// for each `eps`, using continuous quadrature rather than grid values.
pub fn verify_mollifier_bounds(data: &InitialData, eps_list: &[f64]) -> Result<MollifierBounds> {
    require(data, Hypothesis::E)?;
    let dom = data.domain();
    let (sup0, tv0) = (data.linf_bound(), data.tv_bound());
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut c_kernel = 0.0;
    for &eps in eps_list {
        let kernel = admissible_kernel(data, eps)?;
        c_kernel = kernel.laplacian_constant();
        let m = Mollified::new(data.profile(), kernel);
        let sup = m.sup_abs(dom.a(), dom.b(), 4096);
        let grad = m.gradient_l1(dom.a(), dom.b());
        let lap = m.laplacian_l1(dom.a(), dom.b());
        rows.push(MollifierBoundsRow {
            eps,
            sup_ratio: ratio(sup, sup0),
            tv_ratio: ratio(grad, tv0),
            c_eps: ratio(eps * lap, tv0),
        });
    }
    let mut running = 0.0f64;
    let mut c_growth = 0.0f64;
    for (k, row) in rows.iter().enumerate() {
        if k > 0 && running > 0.0 {
            c_growth = c_growth.max(running.max(row.c_eps) / running - 1.0);
        }
        running = running.max(row.c_eps);
    }
    Ok(MollifierBounds {
        rows,
        c_empirical: running,
        c_growth,
        c_kernel,
    })
}

impl MollifierBounds {
    /// Sup, gradient and second-derivative reports for the row at `eps`.
    pub fn estimates_at(&self, eps: f64, data: &InitialData, tol_exact: f64, tol_lap: f64) -> Vec<EstimateReport> {
        let Some(row) = self.rows.iter().find(|r| r.eps == eps) else {
            return vec![];
        };
        let (sup0, tv0) = (data.linf_bound(), data.tv_bound());
        vec![
            EstimateReport::new(
                "mollifier_sup",
                row.sup_ratio * sup0,
                sup0,
                tol_exact,
                "|u0eps|_inf <= |u0|_inf",
            ),
            EstimateReport::new(
                "mollifier_grad",
                row.tv_ratio * tv0,
                tv0,
                tol_exact,
                "|u0eps'|_L1 <= TV(u0)",
            ),
            EstimateReport::new(
                "mollifier_laplacian",
                row.c_eps * tv0 / eps,
                self.c_kernel / eps * tv0,
                tol_lap,
                "|u0eps''|_L1 <= (C/eps) TV(u0), C = eps |rho_eps'|_L1",
            ),
        ]
    }
}

/// `u0 * psi` with `psi` a piecewise linear cutoff vanishing within
/// `inner` of the boundary and equal to one beyond `inner + ramp`.
pub struct CutoffProfile<'a> {
    base: &'a Profile,
    a: f64,
    b: f64,
    inner: f64,
    ramp: f64,
}

impl CutoffProfile<'_> {
    fn psi(&self, x: f64) -> (f64, f64) {
        let dl = x - self.a;
        let dr = self.b - x;
        let (d, sign) = if dl <= dr { (dl, 1.0) } else { (dr, -1.0) };
        let s = (d - self.inner) / self.ramp;
        if s <= 0.0 {
            (0.0, 0.0)
        } else if s >= 1.0 {
            (1.0, 0.0)
        } else {
            (s, sign / self.ramp)
        }
    }
}

impl Profile1D for CutoffProfile<'_> {
    fn value(&self, x: f64) -> f64 {
        self.base.value(x) * self.psi(x).0
    }

    fn derivative(&self, x: f64) -> f64 {
        let (p, dp) = self.psi(x);
        if p == 0.0 && dp == 0.0 {
            return 0.0;
        }
        self.base.derivative(x) * p + self.base.value(x) * dp
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = (self.a + self.inner, self.b - self.inner);
        self.base
            .jumps()
            .into_iter()
            .filter(|(p, _)| *p > lo && *p < hi)
            .map(|(p, j)| (p, j * self.psi(p).0))
            .collect()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .base
            .breakpoints()
            .into_iter()
            .filter(|p| *p > self.a + self.inner && *p < self.b - self.inner)
            .collect();
        b.extend([
            self.a + self.inner,
            self.a + self.inner + self.ramp,
            self.b - self.inner - self.ramp,
            self.b - self.inner,
        ]);
        b
    }
}

/// Cutoff-then-mollify approximant for hypothesis F data.
///
/// The cutoff vanishes within `2 eps` of the boundary and ramps to one over
/// a further `eps`, so after mollification the support stays at least `eps`
/// away from the boundary.
pub struct W11Approximant<'a> {
    cut: CutoffProfile<'a>,
    kernel: MollifierKernel,
}

impl<'a> W11Approximant<'a> {
    pub fn new(data: &'a InitialData, eps: f64) -> Result<Self> {
        require(data, Hypothesis::F)?;
        let kernel = MollifierKernel::new(eps)?;
        let dom = data.domain();
        let cut = CutoffProfile {
            base: data.profile(),
            a: dom.a(),
            b: dom.b(),
            inner: 2.0 * eps,
            ramp: eps,
        };
        Ok(Self { cut, kernel })
    }

    pub fn mollified(&self) -> Mollified<'_, CutoffProfile<'a>> {
        Mollified::new(&self.cut, self.kernel)
    }

    /// `|u0eps - u0|_{L^1} + |u0eps' - u0'|_{L^1}` by adaptive quadrature.
    pub fn w11_error(&self) -> f64 {
        let m = self.mollified();
        let base = self.cut.base;
        let mut breaks = m.outer_breaks();
        breaks.extend(base.breakpoints());
        let (a, b) = (self.cut.a, self.cut.b);
        let l1 = adaptive_simpson_split(&|x| (m.value(x) - base.value(x)).abs(), a, b, &breaks, 1e-9);
        let d1 = adaptive_simpson_split(
            &|x| (m.derivative(x) - base.derivative(x)).abs(),
            a,
            b,
            &breaks,
            1e-9,
        );
        l1 + d1
    }
}

/// Compactly supported smooth approximation of hypothesis F data.
pub fn approximate_w11(data: &InitialData, eps: f64, grid: &Grid) -> Result<ScalarField> {
    W11Approximant::new(data, eps)?.mollified().cell_averages(grid)
}

/// `f * rho_eps` by a fixed symmetric rule with unit total weight.
///
/// Every value is a convex combination of shifted values of `f`, so the
/// Lipschitz bound carries over unchanged and `|f_eps - f| <= L eps`;
/// affine fluxes are reproduced exactly.
pub fn mollify_flux(flux: &FluxModel, eps: f64) -> Result<FluxModel> {
    let kernel = MollifierKernel::new(eps)?;
    let (z, w) = kernel.nodes(FLUX_NODES);
    let nodes: Arc<Vec<(f64, f64)>> = Arc::new(z.into_iter().zip(w).collect());
    let src = flux.clone();
    let n1 = nodes.clone();
    let f: RealFn = Arc::new(move |y| n1.iter().map(|&(z, w)| w * src.f(y - z)).sum());
    let src = flux.clone();
    let n2 = nodes;
    let fp: RealFn = Arc::new(move |y| n2.iter().map(|&(z, w)| w * src.f_prime(y - z)).sum());
    let scan = flux.interval().unwrap_or((-1.0, 1.0));
    let crit = sign_changes(&*fp, scan.0 - 1.0 - 2.0 * eps, scan.1 + 1.0 + 2.0 * eps);
    Ok(FluxModel::new(
        format!("{} (mollified, eps={eps})", flux.name()),
        f,
        fp,
        flux.lipschitz_bound(),
        crit,
    )
    .with_interval(flux.interval()))
}

/// Sign changes of `g` on `[lo, hi]`, refined by bisection.
fn sign_changes(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = 4000;
    let xs: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut out = Vec::new();
    let mut j = 0;
    while j < n {
        if gs[j] == 0.0 {
            // a zero sample: record it if the sign actually flips across it
            let left = gs[..j].iter().rev().find(|v| **v != 0.0);
            let right = gs[j + 1..].iter().find(|v| **v != 0.0);
            if let (Some(l), Some(r)) = (left, right) {
                if l.signum() != r.signum() {
                    out.push(xs[j]);
                }
            }
        } else if gs[j + 1] != 0.0 && gs[j].signum() != gs[j + 1].signum() {
            let (mut a, mut b) = (xs[j], xs[j + 1]);
            let sa = gs[j].signum();
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if g(m).signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        j += 1;
    }
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}
