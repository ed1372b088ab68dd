//! Flux functions, viscosity coefficients and initial data.
//!
//! Catalog entries and their certified constants:
//!
//! | model | constants |
//! |---|---|
//! | flux `zero` | `f = 0`, Lipschitz bound 0 |
//! | flux `linear` | `f = c u`, Lipschitz bound `|c|` |
//! | flux `burgers` | `u^2/2` on `I`, extended linearly outside, bound `max |I|` |
//! | viscosity `constant` | `B = 1`, `r = 1`, `sup B = 1`, `B' = 0` |
//! | viscosity `rational` | `B = 1 + 1/(1+u^2)`, `r = 1` (infimum as `|u| -> inf`), `sup B = 2` at `u = 0`, `sup |B'| = 3 sqrt(3)/8` at `u = 1/sqrt(3)` |
//! | data `step` | unit indicator of `[0.3, 0.7]`: `|u0|_inf = 1`, `TV = 2`, margin 0.3 |
//! | data `hat` | tent of height 1 on `[0.3, 0.7]`: `|u0|_inf = 1`, `TV = 2`, margin 0.3 |
//! | data `sqrt` | `2 sqrt(s(1-s))`: continuous, zero on the boundary, `|u0'|_1 = 2`, not in `H^1` |
//! | data `tent` | tent of height 1 on the whole domain, zero on the boundary |
//!
//! `B` is only ever evaluated numerically together with `B'`; its third
//! derivative is never needed here.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Domain1D, Grid, ScalarField};
use crate::quad::adaptive_simpson_split;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of samples used by the dense-sampling certificates.
pub const DENSE_SAMPLES: usize = 10_000;

/// Evenly spaced samples over `[-1.1 m, 1.1 m]`.
pub(crate) fn expanded_samples(half_width: f64) -> impl Iterator<Item = f64> {
    let w = 1.1 * half_width;
    (0..DENSE_SAMPLES).map(move |j| -w + 2.0 * w * j as f64 / (DENSE_SAMPLES - 1) as f64)
}

#[derive(Clone)]
pub struct FluxModel {
    name: String,
    f: RealFn,
    f_prime: RealFn,
    lipschitz_bound: f64,
    /// Points where `f'` changes sign; `f` is monotone between them.
    critical_points: Vec<f64>,
    /// Interval on which the flux agrees with its raw formula, if clamped.
    interval: Option<(f64, f64)>,
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxModel")
            .field("name", &self.name)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("critical_points", &self.critical_points)
            .field("interval", &self.interval)
            .finish()
    }
}

impl FluxModel {
    pub fn new(
        name: impl Into<String>,
        f: RealFn,
        f_prime: RealFn,
        lipschitz_bound: f64,
        critical_points: Vec<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            f,
            f_prime,
            lipschitz_bound,
            critical_points,
            interval: None,
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", Arc::new(|_| 0.0), Arc::new(|_| 0.0), 0.0, vec![])
    }

    pub fn linear(c: f64) -> Self {
        Self::new(
            "linear",
            Arc::new(move |u| c * u),
            Arc::new(move |_| c),
            c.abs(),
            vec![],
        )
    }

    /// Raw Burgers flux `u^2/2`; not globally Lipschitz until clamped.
    pub fn burgers() -> Self {
        Self::new(
            "burgers",
            Arc::new(|u| 0.5 * u * u),
            Arc::new(|u| u),
            f64::INFINITY,
            vec![0.0],
        )
    }

    pub fn clamped_burgers(half_width: f64) -> Result<Self> {
        clamp_flux(&Self::burgers(), -half_width, half_width)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    #[inline]
    pub fn f_prime(&self, u: f64) -> f64 {
        (self.f_prime)(u)
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn critical_points(&self) -> &[f64] {
        &self.critical_points
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval
    }

    pub(crate) fn with_interval(mut self, interval: Option<(f64, f64)>) -> Self {
        self.interval = interval;
        self
    }

    /// `sup |f'|` over dense samples of `[lo, hi]`.
    pub fn sup_abs_derivative(&self, lo: f64, hi: f64) -> f64 {
        (0..DENSE_SAMPLES)
            .map(|j| lo + (hi - lo) * j as f64 / (DENSE_SAMPLES - 1) as f64)
            .fold(0.0, |m, y| m.max(self.f_prime(y).abs()))
    }

    /// Whether `f'` is nondecreasing on dense samples of `[lo, hi]`.
    pub fn is_convex_on(&self, lo: f64, hi: f64) -> bool {
        if lo == hi {
            return true;
        }
        let n = 2000;
        let mut prev = self.f_prime(lo);
        for j in 1..=n {
            let d = self.f_prime(lo + (hi - lo) * j as f64 / n as f64);
            if d < prev - 1e-12 * (1.0 + prev.abs()) {
                return false;
            }
            prev = d;
        }
        true
    }
}

/// Extends `raw` linearly outside `[lo, hi]`, matching value and slope at
/// the junctions. The result is globally Lipschitz with bound `sup_I |f'|`.
pub fn clamp_flux(raw: &FluxModel, lo: f64, hi: f64) -> Result<FluxModel> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    let (f_lo, f_hi) = (raw.f(lo), raw.f(hi));
    let (d_lo, d_hi) = (raw.f_prime(lo), raw.f_prime(hi));
    let f_raw = raw.f.clone();
    let fp_raw = raw.f_prime.clone();
    let f: RealFn = Arc::new(move |u| {
        if u < lo {
            f_lo + d_lo * (u - lo)
        } else if u > hi {
            f_hi + d_hi * (u - hi)
        } else {
            f_raw(u)
        }
    });
    let f_prime: RealFn = Arc::new(move |u| fp_raw(u.clamp(lo, hi)));
    let lipschitz_bound = raw.sup_abs_derivative(lo, hi);
    let mut critical_points: Vec<f64> = raw
        .critical_points
        .iter()
        .copied()
        .filter(|&c| c >= lo && c <= hi)
        .collect();
    critical_points.dedup();
    let name = if raw.name.starts_with("clamped ") {
        raw.name.clone()
    } else {
        format!("clamped {}", raw.name)
    };
    Ok(FluxModel::new(name, f, f_prime, lipschitz_bound, critical_points)
        .with_interval(Some((lo, hi))))
}

#[derive(Clone)]
pub struct ViscosityModel {
    name: String,
    b: RealFn,
    b_prime: RealFn,
    r_lower: f64,
    b_sup: f64,
}

impl fmt::Debug for ViscosityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ViscosityModel")
            .field("name", &self.name)
            .field("r_lower", &self.r_lower)
            .field("b_sup", &self.b_sup)
            .finish()
    }
}

impl ViscosityModel {
    pub fn new(name: impl Into<String>, b: RealFn, b_prime: RealFn, r_lower: f64, b_sup: f64) -> Self {
        Self {
            name: name.into(),
            b,
            b_prime,
            r_lower,
            b_sup,
        }
    }

    /// Artificial viscosity `B = 1`.
    pub fn constant() -> Self {
        Self::new("constant", Arc::new(|_| 1.0), Arc::new(|_| 0.0), 1.0, 1.0)
    }

    /// `B(u) = 1 + 1/(1 + u^2)`.
    pub fn rational() -> Self {
        Self::new(
            "rational",
            Arc::new(|u| 1.0 + 1.0 / (1.0 + u * u)),
            Arc::new(|u| {
                let d = 1.0 + u * u;
                -2.0 * u / (d * d)
            }),
            1.0,
            2.0,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn b(&self, u: f64) -> f64 {
        (self.b)(u)
    }

    #[inline]
    pub fn b_prime(&self, u: f64) -> f64 {
        (self.b_prime)(u)
    }

    pub fn r_lower(&self) -> f64 {
        self.r_lower
    }

    pub fn b_sup(&self) -> f64 {
        self.b_sup
    }

    /// `sup |B'|` over dense samples of `[-m, m]`.
    pub fn sup_abs_derivative(&self, m: f64) -> f64 {
        (0..DENSE_SAMPLES)
            .map(|j| -m + 2.0 * m * j as f64 / (DENSE_SAMPLES - 1) as f64)
            .fold(0.0, |acc, y| acc.max(self.b_prime(y).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// BV data with compact support inside the domain.
    E,
    /// Continuous `W^{1,1}_0` data vanishing on the boundary.
    F,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::E => "E",
            Hypothesis::F => "F",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "E" | "e" => Ok(Hypothesis::E),
            "F" | "f" => Ok(Hypothesis::F),
            other => Err(Error::Config(format!("unknown hypothesis '{other}'"))),
        }
    }
}

/// A function of one variable with finitely many jumps and kinks.
///
/// This is the interface the mollification code integrates against:
/// `derivative` is the absolutely continuous part of the distributional
/// derivative and `jumps` carries the atoms.
pub trait Profile1D: Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// `(position, right limit - left limit)` for every discontinuity.
    fn jumps(&self) -> Vec<(f64, f64)>;
    /// Points where the profile or its derivative is not smooth.
    fn breakpoints(&self) -> Vec<f64>;
}

/// Closed-form initial profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    /// `height` on `[left, right]`, zero elsewhere.
    Step { left: f64, right: f64, height: f64 },
    /// Tent rising from `center - half_width` to `height` at `center`.
    Hat {
        center: f64,
        half_width: f64,
        height: f64,
    },
    /// `height * 2 sqrt(s (1 - s))` with `s` the normalized position in `(a, b)`.
    SqrtBump { a: f64, b: f64, height: f64 },
    /// Continuous piecewise linear interpolant, zero outside the breakpoints.
    PiecewiseLinear { xs: Vec<f64>, vs: Vec<f64> },
}

impl Profile {
    pub fn unit_step() -> Self {
        Profile::Step {
            left: 0.3,
            right: 0.7,
            height: 1.0,
        }
    }

    pub fn unit_hat() -> Self {
        Profile::Hat {
            center: 0.5,
            half_width: 0.2,
            height: 1.0,
        }
    }

    /// Reads `x,value` breakpoints (header optional).
    pub fn from_breakpoints_csv(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let (mut xs, mut vs) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            let x = rec.get(0).and_then(|s| s.parse::<f64>().ok());
            let v = rec.get(1).and_then(|s| s.parse::<f64>().ok());
            match (x, v) {
                (Some(x), Some(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if xs.is_empty() => continue, // header
                _ => return Err(Error::Config(format!("{}: malformed breakpoint row", path.display()))),
            }
        }
        if xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "{}: need at least two strictly increasing breakpoints",
                path.display()
            )));
        }
        Ok(Profile::PiecewiseLinear { xs, vs })
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Step { height, .. } | Profile::Hat { height, .. } | Profile::SqrtBump { height, .. } => {
                height.abs()
            }
            Profile::PiecewiseLinear { vs, .. } => vs.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Total variation of the zero extension to the whole line.
    pub fn total_variation(&self) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Step { height, .. } | Profile::Hat { height, .. } | Profile::SqrtBump { height, .. } => {
                2.0 * height.abs()
            }
            Profile::PiecewiseLinear { vs, .. } => {
                vs.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
                    + vs[0].abs()
                    + vs[vs.len() - 1].abs()
            }
        }
    }

    /// Closed interval outside of which the profile vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Zero => None,
            Profile::Step { left, right, height } => (*height != 0.0).then_some((*left, *right)),
            Profile::Hat {
                center,
                half_width,
                height,
            } => (*height != 0.0).then_some((center - half_width, center + half_width)),
            Profile::SqrtBump { a, b, height } => (*height != 0.0).then_some((*a, *b)),
            Profile::PiecewiseLinear { xs, vs } => {
                let first = vs.iter().position(|v| *v != 0.0)?;
                let last = vs.iter().rposition(|v| *v != 0.0)?;
                let lo = if first == 0 { xs[0] } else { xs[first - 1] };
                let hi = if last + 1 == xs.len() { xs[last] } else { xs[last + 1] };
                Some((lo, hi))
            }
        }
    }
}

impl Profile1D for Profile {
    fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Step { left, right, height } => {
                if x >= *left && x <= *right {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Hat {
                center,
                half_width,
                height,
            } => height * (1.0 - (x - center).abs() / half_width).max(0.0),
            Profile::SqrtBump { a, b, height } => {
                let s = (x - a) / (b - a);
                if s <= 0.0 || s >= 1.0 {
                    0.0
                } else {
                    2.0 * height * (s * (1.0 - s)).sqrt()
                }
            }
            Profile::PiecewiseLinear { xs, vs } => {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|&p| p <= x).clamp(1, xs.len() - 1);
                let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                (1.0 - w) * vs[k - 1] + w * vs[k]
            }
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match self {
            Profile::Zero | Profile::Step { .. } => 0.0,
            Profile::Hat {
                center,
                half_width,
                height,
            } => {
                let d = x - center;
                if d.abs() >= *half_width {
                    0.0
                } else {
                    -height * d.signum() / half_width
                }
            }
            Profile::SqrtBump { a, b, height } => {
                // keep the integrable endpoint singularity finite
                let s = ((x - a) / (b - a)).clamp(1e-14, 1.0 - 1e-14);
                if x <= *a || x >= *b {
                    return 0.0;
                }
                height * (1.0 - 2.0 * s) / (s * (1.0 - s)).sqrt() / (b - a)
            }
            Profile::PiecewiseLinear { xs, vs } => {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|&p| p <= x).clamp(1, xs.len() - 1);
                (vs[k] - vs[k - 1]) / (xs[k] - xs[k - 1])
            }
        }
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        match self {
            Profile::Step { left, right, height } if *height != 0.0 => {
                vec![(*left, *height), (*right, -*height)]
            }
            Profile::PiecewiseLinear { xs, vs } => {
                let mut j = Vec::new();
                if vs[0] != 0.0 {
                    j.push((xs[0], vs[0]));
                }
                if vs[vs.len() - 1] != 0.0 {
                    j.push((xs[xs.len() - 1], -vs[vs.len() - 1]));
                }
                j
            }
            _ => vec![],
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Zero => vec![],
            Profile::Step { left, right, .. } => vec![*left, *right],
            Profile::Hat {
                center, half_width, ..
            } => vec![center - half_width, *center, center + half_width],
            Profile::SqrtBump { a, b, .. } => vec![*a, 0.5 * (a + b), *b],
            Profile::PiecewiseLinear { xs, .. } => xs.clone(),
        }
    }
}

/// Initial data registered under one of the two hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    name: String,
    profile: Profile,
    hypothesis: Hypothesis,
    domain: Domain1D,
}

impl InitialData {
    pub fn new(name: impl Into<String>, profile: Profile, hypothesis: Hypothesis, domain: Domain1D) -> Self {
        Self {
            name: name.into(),
            profile,
            hypothesis,
            domain,
        }
    }

    pub fn zero(hypothesis: Hypothesis) -> Self {
        Self::new("zero", Profile::Zero, hypothesis, Domain1D::unit())
    }

    /// Same profile posed on another domain.
    pub fn with_domain(mut self, domain: Domain1D) -> Self {
        self.domain = domain;
        self
    }

    pub fn step() -> Self {
        Self::new("step", Profile::unit_step(), Hypothesis::E, Domain1D::unit())
    }

    pub fn hat() -> Self {
        Self::new("hat", Profile::unit_hat(), Hypothesis::E, Domain1D::unit())
    }

    pub fn sqrt_bump() -> Self {
        Self::new(
            "sqrt",
            Profile::SqrtBump {
                a: 0.0,
                b: 1.0,
                height: 1.0,
            },
            Hypothesis::F,
            Domain1D::unit(),
        )
    }

    pub fn tent() -> Self {
        Self::new(
            "tent",
            Profile::Hat {
                center: 0.5,
                half_width: 0.5,
                height: 1.0,
            },
            Hypothesis::F,
            Domain1D::unit(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.hypothesis
    }

    pub fn domain(&self) -> Domain1D {
        self.domain
    }

    pub fn linf_bound(&self) -> f64 {
        self.profile.sup_abs()
    }

    /// `TV(u0)` including the jumps against the zero exterior.
    pub fn tv_bound(&self) -> f64 {
        self.profile.total_variation()
    }

    /// `|u0'|_{L^1}`; equals the total variation for continuous data.
    pub fn w11_seminorm(&self) -> f64 {
        self.profile.total_variation()
    }

    /// Distance of the support to the boundary (infinite for zero data).
    pub fn support_margin(&self) -> f64 {
        match self.profile.support() {
            None => f64::INFINITY,
            Some((lo, hi)) => (lo - self.domain.a()).min(self.domain.b() - hi),
        }
    }

    /// Uniform bound on the approximants under hypothesis F.
    pub fn a_bound(&self) -> f64 {
        self.linf_bound() + 1.0
    }

    /// Half-width of the interval `I` the solution takes values in.
    pub fn interval_half_width(&self) -> f64 {
        match self.hypothesis {
            Hypothesis::E => self.linf_bound(),
            Hypothesis::F => self.a_bound(),
        }
    }

    /// Exact cell averages of `u0`.
    pub fn cell_averages(&self, grid: &Grid) -> Result<ScalarField> {
        let breaks = self.profile.breakpoints();
        let h = grid.h();
        let values = (0..grid.n_cells())
            .map(|i| {
                let (lo, hi) = (grid.face(i), grid.face(i + 1));
                adaptive_simpson_split(&|x| self.profile.value(x), lo, hi, &breaks, 1e-13) / h
            })
            .collect();
        ScalarField::new(*grid, values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Per-clause outcome of [`validate_hypothesis`].
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub hypothesis: Hypothesis,
    pub clauses: Vec<Clause>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.pass)
    }
}

/// Checks the structural assumptions on `(f, B, u0)` by dense sampling over
/// `I` expanded by 10%. Failures are reported, never raised.
pub fn validate_hypothesis(flux: &FluxModel, visc: &ViscosityModel, data: &InitialData) -> HypothesisReport {
    let m = data.interval_half_width();
    let mut clauses = Vec::new();

    let sampled_lip = expanded_samples(m).fold(0.0f64, |acc, y| acc.max(flux.f_prime(y).abs()));
    let lip = flux.lipschitz_bound();
    clauses.push(Clause {
        name: "f' bounded",
        pass: lip.is_finite() && sampled_lip <= lip * (1.0 + 1e-12) + 1e-300,
        detail: format!("sampled sup|f'| = {sampled_lip}, declared bound = {lip}"),
    });

    let ys: Vec<f64> = expanded_samples(m).collect();
    let continuous = ys.windows(2).all(|w| {
        let jump = (flux.f(w[1]) - flux.f(w[0])).abs();
        jump <= sampled_lip.max(lip.min(1e300)) * (w[1] - w[0]) * (1.0 + 1e-9) + 1e-12
    });
    clauses.push(Clause {
        name: "f continuous",
        pass: continuous,
        detail: "sampled increments within Lipschitz bound".into(),
    });

    let r = visc.r_lower();
    let b_min = ys.iter().fold(f64::INFINITY, |acc, &y| acc.min(visc.b(y)));
    let b_max = ys.iter().fold(0.0f64, |acc, &y| acc.max(visc.b(y).abs()));
    clauses.push(Clause {
        name: "B >= r > 0",
        pass: r > 0.0 && b_min >= r * (1.0 - 1e-12),
        detail: if r > 0.0 && b_min >= r * (1.0 - 1e-12) {
            format!("min B = {b_min} >= r = {r}")
        } else {
            format!("B >= r violated: min B = {b_min}, r = {r}")
        },
    });
    clauses.push(Clause {
        name: "B bounded",
        pass: b_max <= visc.b_sup() * (1.0 + 1e-12),
        detail: format!("sampled sup|B| = {b_max}, declared = {}", visc.b_sup()),
    });

    let dom = data.domain();
    match data.hypothesis() {
        Hypothesis::E => {
            let margin = data.support_margin();
            clauses.push(Clause {
                name: "compact support",
                pass: margin > 0.0,
                detail: format!("support margin = {margin}"),
            });
            clauses.push(Clause {
                name: "BV and bounded",
                pass: data.tv_bound().is_finite() && data.linf_bound().is_finite(),
                detail: format!("TV = {}, sup = {}", data.tv_bound(), data.linf_bound()),
            });
        }
        Hypothesis::F => {
            let p = data.profile();
            let ends = p.value(dom.a()).abs().max(p.value(dom.b()).abs());
            clauses.push(Clause {
                name: "zero boundary values",
                pass: ends == 0.0,
                detail: format!("max boundary value = {ends}"),
            });
            clauses.push(Clause {
                name: "continuous",
                pass: p.jumps().is_empty(),
                detail: format!("{} jumps", p.jumps().len()),
            });
            let semi = data.w11_seminorm();
            clauses.push(Clause {
                name: "finite W11 seminorm",
                pass: semi.is_finite(),
                detail: format!("|u0'|_1 = {semi}"),
            });
        }
    }

    HypothesisReport {
        hypothesis: data.hypothesis(),
        clauses,
    }
}

pub fn flux_by_name(name: &str, speed: f64, half_width: f64) -> Result<FluxModel> {
    match name {
        "zero" => Ok(FluxModel::zero()),
        "linear" => Ok(FluxModel::linear(speed)),
        "burgers" => FluxModel::clamped_burgers(half_width.max(f64::MIN_POSITIVE.sqrt())),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

pub fn viscosity_by_name(name: &str) -> Result<ViscosityModel> {
    match name {
        "constant" | "artificial" => Ok(ViscosityModel::constant()),
        "rational" => Ok(ViscosityModel::rational()),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Catalog lookup; `csv:<path>` loads a piecewise linear profile.
pub fn data_by_name(name: &str, hypothesis: Option<Hypothesis>) -> Result<InitialData> {
    let mut data = match name {
        "zero" => InitialData::zero(hypothesis.unwrap_or(Hypothesis::E)),
        "step" => InitialData::step(),
        "hat" => InitialData::hat(),
        "sqrt" => InitialData::sqrt_bump(),
        "tent" => InitialData::tent(),
        other => match other.strip_prefix("csv:") {
            Some(path) => {
                let profile = Profile::from_breakpoints_csv(Path::new(path))?;
                let dom = Domain1D::unit();
                let d = InitialData::new(other, profile, Hypothesis::E, dom);
                let hyp = if d.support_margin() > 0.0 {
                    Hypothesis::E
                } else {
                    Hypothesis::F
                };
                InitialData::new(other, d.profile, hyp, dom)
            }
            None => return Err(Error::UnknownModel(other.to_string())),
        },
    };
    if let Some(h) = hypothesis {
        data.hypothesis = h;
    }
    Ok(data)
}
