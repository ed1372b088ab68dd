//! Discrete Kruzhkov entropy residuals and the boundary (BLN) condition.
//!
//! For a field `u`, a level `k` and a nonnegative test function `phi`
//! supported in the open space-time cylinder, the interior residual is
//!
//! ```text
//! R(k, phi) = - int int ( |u - k| phi_t + q_k(u) phi_x ) dx dt,
//! q_k(u) = sg(u - k) (f(u) - f(k)).
//! ```
//!
//! An entropy solution has `R <= 0`. On a boundary with outward normal
//! `nu` and trace `g`, the boundary residual
//! `-sg(g) (f(g) - f(k)) nu` is `<= 0` for every `k` between 0 and `g`.
//!
//! A viscous solution `u^eps` only satisfies the interior inequality up to
//! `eps int int B(u) |u_x| |phi_x| + 2 sup |f - f_eps| int int |phi_x|`.
//! [`ViscousDefect`] adds that computable bound to the tolerance.

use std::fmt;
use std::path::Path;

use crate::bv::sg_eval;
use crate::error::{Error, Result};
use crate::grid::{fmt17, Domain1D, SpaceTimeField};
use crate::models::{FluxModel, ViscosityModel, DENSE_SAMPLES};
use crate::mollify::{bump, bump_derivative, mollify_flux};

/// Multiplier of `h + dt` in the residual tolerance, calibrated on the
/// inviscid reference for a Burgers shock and rarefaction.
pub const DEFAULT_C_TOL: f64 = 0.25;
/// Equispaced levels across `[-M, M]`.
pub const K_LEVELS: usize = 9;

const E2: f64 = std::f64::consts::E * std::f64::consts::E;
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 18.0),
    (0.0, 8.0 / 18.0),
    (0.774_596_669_241_483_4, 5.0 / 18.0),
];

/// `phi(x, t) = e^2 b((x - xc)/rx) b((t - tc)/rt)`, peak value 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestBump {
    pub id: usize,
    pub xc: f64,
    pub rx: f64,
    pub tc: f64,
    pub rt: f64,
}

impl TestBump {
    pub fn new(id: usize, xc: f64, rx: f64, tc: f64, rt: f64) -> Self {
        Self { id, xc, rx, tc, rt }
    }

    fn sx(&self, x: f64) -> f64 {
        (x - self.xc) / self.rx
    }

    fn st(&self, t: f64) -> f64 {
        (t - self.tc) / self.rt
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        E2 * bump(self.sx(x)) * bump(self.st(t))
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        E2 * bump_derivative(self.sx(x)) * bump(self.st(t)) / self.rx
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        E2 * bump(self.sx(x)) * bump_derivative(self.st(t)) / self.rt
    }

    /// Errors unless the closed support lies inside `domain x (0, t_final)`.
    pub fn check_inside(&self, domain: Domain1D, t_final: f64) -> Result<()> {
        let inside = self.rx > 0.0
            && self.rt > 0.0
            && self.xc - self.rx > domain.a()
            && self.xc + self.rx < domain.b()
            && self.tc - self.rt > 0.0
            && self.tc + self.rt < t_final;
        if inside {
            Ok(())
        } else {
            Err(Error::TestFunctionOutside(format!(
                "bump {} with x in [{}, {}] and t in [{}, {}] leaves ({}, {}) x (0, {})",
                self.id,
                self.xc - self.rx,
                self.xc + self.rx,
                self.tc - self.rt,
                self.tc + self.rt,
                domain.a(),
                domain.b(),
                t_final
            )))
        }
    }
}

/// Four spatial centres times three temporal windows.
pub fn battery_12(domain: Domain1D, t_final: f64) -> Vec<TestBump> {
    let (a, vol) = (domain.a(), domain.volume());
    let windows = [(0.25, 0.2), (0.5, 0.45), (0.75, 0.2)];
    let mut out = Vec::with_capacity(12);
    for (j, &(tc, rt)) in windows.iter().enumerate() {
        for (i, &xc) in [0.2, 0.4, 0.6, 0.8].iter().enumerate() {
            out.push(TestBump::new(
                4 * j + i,
                a + xc * vol,
                0.15 * vol,
                tc * t_final,
                rt * t_final,
            ));
        }
    }
    out
}

/// `K_LEVELS` equispaced levels over `[-m, m]` plus the sentinels `+-2m`.
pub fn k_levels(m: f64) -> Vec<f64> {
    let m = if m > 0.0 { m } else { 1.0 };
    let mut ks: Vec<f64> = (0..K_LEVELS)
        .map(|j| -m + 2.0 * m * j as f64 / (K_LEVELS - 1) as f64)
        .collect();
    ks.push(-2.0 * m);
    ks.push(2.0 * m);
    ks
}

pub fn entropy_flux(flux: &FluxModel, u: f64, k: f64) -> f64 {
    sg_eval(u - k) * (flux.f(u) - flux.f(k))
}

/// Per-cell spatial weights of one bump: `int_cell b_x` (Gauss) and the
/// face values of `b_x`, both without the time factor.
struct SpatialWeights {
    cell: Vec<f64>,
    faces: Vec<f64>,
}

fn spatial_weights(stf: &SpaceTimeField, bump_fn: &TestBump) -> SpatialWeights {
    let g = stf.grid();
    let h = g.h();
    let shape = |x: f64| std::f64::consts::E * bump(bump_fn.sx(x));
    let cell = (0..g.n_cells())
        .map(|i| {
            let c = g.center(i);
            GAUSS3.iter().map(|(s, w)| w * shape(c + 0.5 * h * s)).sum::<f64>() * h
        })
        .collect();
    let faces = (0..=g.n_cells()).map(|i| shape(g.face(i))).collect();
    SpatialWeights { cell, faces }
}

fn time_factors(bump_fn: &TestBump, t: f64) -> (f64, f64) {
    let st = bump_fn.st(t);
    let e = std::f64::consts::E;
    (e * bump(st), e * bump_derivative(st) / bump_fn.rt)
}

/// Space-time integral `int int ( eta(u) phi_t + q(u) phi_x )`, with the
/// `x` derivative integrated exactly per cell and the trapezoid rule in time.
fn weak_integral(
    stf: &SpaceTimeField,
    bump_fn: &TestBump,
    eta: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
) -> Result<f64> {
    let times = stf.times();
    if times.len() < 2 {
        return Err(Error::TooFewSlices(times.len()));
    }
    bump_fn.check_inside(stf.grid().domain(), stf.final_time())?;
    let w = spatial_weights(stf, bump_fn);
    let per_slice: Vec<f64> = stf
        .slices()
        .iter()
        .zip(times)
        .map(|(s, &t)| {
            let (bt, dbt) = time_factors(bump_fn, t);
            if bt == 0.0 && dbt == 0.0 {
                return 0.0;
            }
            s.values()
                .iter()
                .enumerate()
                .map(|(i, &u)| dbt * eta(u) * w.cell[i] + bt * q(u) * (w.faces[i + 1] - w.faces[i]))
                .sum()
        })
        .collect();
    Ok(times
        .windows(2)
        .zip(per_slice.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum())
}

/// Viscous consistency defect of a solution of the regularized problem.
#[derive(Debug, Clone)]
pub struct ViscousDefect {
    pub epsilon: f64,
    pub visc: ViscosityModel,
    /// `sup_I |f - f_eps|`.
    pub flux_gap: f64,
}

impl ViscousDefect {
    /// Measures `sup |f - f_eps|` on dense samples of `[-m, m]`.
    pub fn new(flux: &FluxModel, visc: &ViscosityModel, epsilon: f64, m: f64) -> Result<Self> {
        let fe = mollify_flux(flux, epsilon)?;
        let m = if m > 0.0 { m } else { 1.0 };
        let flux_gap = (0..DENSE_SAMPLES)
            .map(|j| -m + 2.0 * m * j as f64 / (DENSE_SAMPLES - 1) as f64)
            .fold(0.0f64, |g, y| g.max((flux.f(y) - fe.f(y)).abs()));
        Ok(Self {
            epsilon,
            visc: visc.clone(),
            flux_gap,
        })
    }

    /// `eps int int B |u_x| |phi_x| + 2 gap int int |phi_x|`, with `u_x`
    /// taken across faces (zero ghosts) and the trapezoid rule in time.
    pub fn bound(&self, stf: &SpaceTimeField, bump_fn: &TestBump) -> f64 {
        let g = stf.grid();
        let n = g.n_cells();
        let h = g.h();
        let e = std::f64::consts::E;
        let dphi: Vec<f64> = (0..=n).map(|i| e * bump_derivative(bump_fn.sx(g.face(i))).abs() / bump_fn.rx).collect();
        let abs_phi_x: f64 = (0..n)
            .map(|i| {
                let c = g.center(i);
                GAUSS3
                    .iter()
                    .map(|(s, w)| w * e * bump_derivative(bump_fn.sx(c + 0.5 * h * s)).abs() / bump_fn.rx)
                    .sum::<f64>()
                    * h
            })
            .sum();
        let per_slice: Vec<f64> = stf
            .slices()
            .iter()
            .zip(stf.times())
            .map(|(s, &t)| {
                let bt = e * bump(bump_fn.st(t));
                if bt == 0.0 {
                    return 0.0;
                }
                let v = s.values();
                let at = |i: usize| if i == 0 || i > n { 0.0 } else { v[i - 1] };
                let visc: f64 = (0..=n)
                    .map(|i| {
                        let (a, b) = (at(i), at(i + 1));
                        self.visc.b(0.5 * (a + b)) * (b - a).abs() * dphi[i]
                    })
                    .sum();
                bt * (self.epsilon * visc + 2.0 * self.flux_gap * abs_phi_x)
            })
            .collect();
        stf.times()
            .windows(2)
            .zip(per_slice.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum()
    }
}

pub fn interior_residual(stf: &SpaceTimeField, flux: &FluxModel, bump_fn: &TestBump, k: f64) -> Result<f64> {
    let fk = flux.f(k);
    let r = weak_integral(stf, bump_fn, |u| (u - k).abs(), |u| sg_eval(u - k) * (flux.f(u) - fk))?;
    Ok(-r)
}

/// `-int int ( u phi_t + f(u) phi_x )`, zero for weak solutions.
pub fn conservation_residual(stf: &SpaceTimeField, flux: &FluxModel, bump_fn: &TestBump) -> Result<f64> {
    Ok(-weak_integral(stf, bump_fn, |u| u, |u| flux.f(u))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn outward_normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// Pointwise boundary residual `-sg(g) (f(g) - f(k)) nu`.
pub fn boundary_residual(flux: &FluxModel, trace: f64, k: f64, normal: f64) -> f64 {
    -sg_eval(trace) * (flux.f(trace) - flux.f(k)) * normal
}

/// Largest boundary residual over the stored slices at positive times,
/// counting only instants where `k` lies between 0 and the trace.
/// Returns 0 when no instant qualifies.
pub fn bln_residual(stf: &SpaceTimeField, flux: &FluxModel, side: Side, k: f64) -> f64 {
    let nu = side.outward_normal();
    stf.slices()
        .iter()
        .zip(stf.times())
        .filter(|(_, &t)| t > 0.0)
        .map(|(s, _)| {
            let v = s.values();
            match side {
                Side::Left => v[0],
                Side::Right => v[v.len() - 1],
            }
        })
        .filter(|&g| k >= g.min(0.0) && k <= g.max(0.0))
        .map(|g| boundary_residual(flux, g, k, nu))
        .fold(0.0f64, f64::max)
}

/// `c_tol (h + dt)` with `dt` the largest spacing of stored slices.
pub fn residual_tolerance(stf: &SpaceTimeField, c_tol: f64) -> f64 {
    let dt = stf.times().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    c_tol * (stf.grid().h() + dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Interior,
    Conservation,
    BoundaryLeft,
    BoundaryRight,
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualKind::Interior => "interior",
            ResidualKind::Conservation => "conservation",
            ResidualKind::BoundaryLeft => "bln_left",
            ResidualKind::BoundaryRight => "bln_right",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    pub kind: ResidualKind,
    pub k: Option<f64>,
    pub testfn_id: Option<usize>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntropyReport {
    pub rows: Vec<EntropyRow>,
}

impl EntropyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EntropyRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Largest residual among rows of `kind`.
    pub fn worst(&self, kind: ResidualKind) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.residual)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["kind", "k", "testfn_id", "residual", "tolerance", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.kind.to_string(),
                r.k.map(fmt17).unwrap_or_default(),
                r.testfn_id.map(|i| i.to_string()).unwrap_or_default(),
                fmt17(r.residual),
                fmt17(r.tolerance),
                r.pass.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Runs the interior battery, the conservation check and both boundary
/// conditions on a candidate limit. With `defect`, each interior and
/// conservation row also allows that bump's viscous defect.
pub fn certify_limit(
    stf: &SpaceTimeField,
    flux: &FluxModel,
    c_tol: f64,
    defect: Option<&ViscousDefect>,
) -> Result<EntropyReport> {
    let base = residual_tolerance(stf, c_tol);
    let m = stf
        .slices()
        .iter()
        .flat_map(|s| s.values())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let ks = k_levels(m);
    let mut rows = Vec::new();
    for b in battery_12(stf.grid().domain(), stf.final_time()) {
        let tol = base + defect.map_or(0.0, |d| d.bound(stf, &b));
        for &k in &ks {
            let r = interior_residual(stf, flux, &b, k)?;
            rows.push(EntropyRow {
                kind: ResidualKind::Interior,
                k: Some(k),
                testfn_id: Some(b.id),
                residual: r,
                tolerance: tol,
                pass: r <= tol,
            });
        }
        let r = conservation_residual(stf, flux, &b)?;
        rows.push(EntropyRow {
            kind: ResidualKind::Conservation,
            k: None,
            testfn_id: Some(b.id),
            residual: r,
            tolerance: tol,
            pass: r.abs() <= tol,
        });
    }
    for (side, kind) in [
        (Side::Left, ResidualKind::BoundaryLeft),
        (Side::Right, ResidualKind::BoundaryRight),
    ] {
        for &k in &ks {
            let r = bln_residual(stf, flux, side, k);
            rows.push(EntropyRow {
                kind,
                k: Some(k),
                testfn_id: None,
                residual: r,
                tolerance: base,
                pass: r <= base,
            });
        }
    }
    Ok(EntropyReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, ScalarField};

    fn field_from(grid: Grid, times: &[f64], u: impl Fn(f64, f64) -> f64) -> SpaceTimeField {
        let slices = times
            .iter()
            .map(|&t| ScalarField::from_fn(grid, |x| u(x, t)).unwrap())
            .collect();
        SpaceTimeField::new(grid, times.to_vec(), slices).unwrap()
    }

    #[test]
    fn bump_peak_is_one() {
        let b = TestBump::new(0, 0.5, 0.1, 0.5, 0.2);
        assert!((b.value(0.5, 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(b.value(0.61, 0.5), 0.0);
    }

    #[test]
    fn battery_is_inside() {
        for (d, t) in [(Domain1D::unit(), 1.0), (Domain1D::new(-2.0, 3.0).unwrap(), 0.1)] {
            let bs = battery_12(d, t);
            assert_eq!(bs.len(), 12);
            for b in &bs {
                b.check_inside(d, t).unwrap();
            }
        }
        let out = TestBump::new(0, 0.05, 0.1, 0.5, 0.2);
        assert!(out.check_inside(Domain1D::unit(), 1.0).is_err());
    }

    #[test]
    fn levels_include_sentinels() {
        let ks = k_levels(0.5);
        assert_eq!(ks.len(), K_LEVELS + 2);
        assert_eq!(ks[0], -0.5);
        assert_eq!(ks[K_LEVELS - 1], 0.5);
        assert!(ks.contains(&1.0) && ks.contains(&-1.0));
    }

    #[test]
    fn constant_state_has_zero_residual() {
        let g = Grid::new(Domain1D::unit(), 200).unwrap();
        let times: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let u = field_from(g, &times, |_, _| 0.3);
        let f = FluxModel::clamped_burgers(1.0).unwrap();
        for b in battery_12(g.domain(), 1.0) {
            for k in k_levels(0.3) {
                assert!(interior_residual(&u, &f, &b, k).unwrap().abs() < 1e-12);
            }
            assert!(conservation_residual(&u, &f, &b).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_expansion_shock_matches_hand_value() {
        // u = -1 left of 1/2, +1 right: [q] = 1 for k = 0, so R = int phi(1/2, t) dt
        let g = Grid::new(Domain1D::unit(), 400).unwrap();
        let times: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        let u = field_from(g, &times, |x, _| if x < 0.5 { -1.0 } else { 1.0 });
        let f = FluxModel::clamped_burgers(1.0).unwrap();
        let b = TestBump::new(0, 0.5, 0.15, 0.5, 0.45);
        let i0 = crate::quad::adaptive_simpson(&bump, -1.0, 1.0, 1e-13);
        let hand = b.rt * std::f64::consts::E * i0;
        let r = interior_residual(&u, &f, &b, 0.0).unwrap();
        assert!((r - hand).abs() < 1e-3 * hand, "{r} vs {hand}");
        assert!(r >= 0.1);
    }

    #[test]
    fn admissible_shock_has_nonpositive_residual() {
        // Burgers shock 1 -> 0 moving at speed 1/2
        let g = Grid::new(Domain1D::unit(), 800).unwrap();
        let times: Vec<f64> = (0..=400).map(|i| 0.5 * i as f64 / 400.0).collect();
        let u = field_from(g, &times, |x, t| if x < 0.3 + 0.5 * t { 1.0 } else { 0.0 });
        let f = FluxModel::clamped_burgers(1.0).unwrap();
        let tol = residual_tolerance(&u, 0.1);
        for b in battery_12(g.domain(), 0.5) {
            for k in k_levels(1.0) {
                assert!(interior_residual(&u, &f, &b, k).unwrap() <= tol);
            }
            assert!(conservation_residual(&u, &f, &b).unwrap().abs() <= tol);
        }
    }

    #[test]
    fn boundary_residual_signs() {
        let f = FluxModel::clamped_burgers(1.0).unwrap();
        // inflow trace +1 at the left boundary is inadmissible
        assert!((boundary_residual(&f, 1.0, 0.5, Side::Left.outward_normal()) - 0.375).abs() < 1e-15);
        // outflow trace -1 at the left boundary is admissible
        assert!(boundary_residual(&f, -1.0, -0.5, Side::Left.outward_normal()) <= 0.0);
        // outflow trace +1 at the right boundary is admissible
        assert!(boundary_residual(&f, 1.0, 0.5, Side::Right.outward_normal()) <= 0.0);
        assert_eq!(boundary_residual(&f, 0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn bln_scans_only_levels_between_zero_and_trace() {
        let g = Grid::new(Domain1D::unit(), 10).unwrap();
        let u = field_from(g, &[0.0, 0.5, 1.0], |_, _| 1.0);
        let f = FluxModel::clamped_burgers(1.0).unwrap();
        assert!((bln_residual(&u, &f, Side::Left, 0.5) - 0.375).abs() < 1e-15);
        assert_eq!(bln_residual(&u, &f, Side::Left, -0.5), 0.0);
        assert!(bln_residual(&u, &f, Side::Right, 0.5) <= 0.0);
    }

    #[test]
    fn report_csv_has_blank_fields() {
        let rep = EntropyReport {
            rows: vec![EntropyRow {
                kind: ResidualKind::BoundaryLeft,
                k: Some(0.5),
                testfn_id: None,
                residual: -0.25,
                tolerance: 0.01,
                pass: true,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        rep.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "bln_left,5.0000000000000000e-1,,-2.5000000000000000e-1,1.0000000000000000e-2,true");
    }
}
