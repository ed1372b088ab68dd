//! Entropy residuals on fields whose admissibility is known in advance.

use viscoflow::entropy::{
    battery_12, bln_residual, certify_limit, interior_residual, residual_tolerance, ResidualKind, Side, TestBump,
    DEFAULT_C_TOL,
};
use viscoflow::estimates::{certify_sweep, SweepResult};
use viscoflow::grid::{Domain1D, Grid, ScalarField, SpaceTimeField};
use viscoflow::models::{FluxModel, InitialData, ViscosityModel};
use viscoflow::oracle::{godunov_reference, ReferenceConfig};
use viscoflow::Error;

fn field(grid: Grid, t_final: f64, slices: usize, u: impl Fn(f64, f64) -> f64) -> SpaceTimeField {
    let times: Vec<f64> = (0..=slices).map(|j| t_final * j as f64 / slices as f64).collect();
    let s = times
        .iter()
        .map(|&t| ScalarField::from_fn(grid, |x| u(x, t)).unwrap())
        .collect();
    SpaceTimeField::new(grid, times, s).unwrap()
}

/// Transport of the unit hat at speed `c`, with zero inflow.
fn transported_hat(c: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, t| {
        let y = x - c * t;
        (1.0 - (y - 0.5).abs() / 0.2).max(0.0)
    }
}

#[test]
fn godunov_oracle_is_certified() {
    let f = FluxModel::clamped_burgers(1.0).unwrap();
    for (data, t) in [(InitialData::step(), 0.5), (InitialData::step(), 1.5), (InitialData::hat(), 1.0)] {
        let r = godunov_reference(&f, &data, &ReferenceConfig::new(256, t)).unwrap();
        let rep = certify_limit(&r.coarse, &f, DEFAULT_C_TOL, None).unwrap();
        assert!(rep.passed(), "{} T={t}: {:?}", data.name(), rep.failures().next());
    }
}

#[test]
fn transport_with_outflow_is_certified() {
    // the hat leaves through the right wall, whose trace is then positive
    let g = Grid::new(Domain1D::unit(), 400).unwrap();
    let f = FluxModel::linear(1.0);
    let stf = field(g, 0.6, 240, transported_hat(1.0));
    let rep = certify_limit(&stf, &f, DEFAULT_C_TOL, None).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures().next());
    assert!(stf.last().values()[399] > 0.1);
}

#[test]
fn inflow_that_ignores_the_boundary_data_is_rejected() {
    // leftward transport: the right wall is an inflow boundary, so a trace of 1 there breaks the condition
    let g = Grid::new(Domain1D::unit(), 200).unwrap();
    let f = FluxModel::linear(-1.0);
    let stf = field(g, 0.5, 100, |_, _| 1.0);
    let r = bln_residual(&stf, &f, Side::Right, 0.5);
    assert!((r - 0.5).abs() < 1e-12, "{r}");
    assert_eq!(bln_residual(&stf, &f, Side::Left, 0.5), 0.0);
    let rep = certify_limit(&stf, &f, DEFAULT_C_TOL, None).unwrap();
    assert!(rep.failures().any(|r| r.kind == ResidualKind::BoundaryRight));
    assert!(rep.failures().all(|r| r.kind == ResidualKind::BoundaryRight));
}

#[test]
fn stationary_expansion_shock_is_rejected() {
    let g = Grid::new(Domain1D::new(-1.0, 1.0).unwrap(), 400).unwrap();
    let f = FluxModel::clamped_burgers(1.0).unwrap();
    let stf = field(g, 1.0, 200, |x, _| if x < 0.0 { -1.0 } else { 1.0 });
    let b = TestBump::new(0, 0.0, 0.5, 0.5, 0.4);
    let r = interior_residual(&stf, &f, &b, 0.0).unwrap();
    assert!(r >= 0.1, "residual {r}");
    let rep = certify_limit(&stf, &f, DEFAULT_C_TOL, None).unwrap();
    assert!(rep.worst(ResidualKind::Interior) >= 0.1);
    assert!(!rep.passed());
}

#[test]
fn residual_scales_with_the_state_for_linear_flux() {
    let g = Grid::new(Domain1D::unit(), 300).unwrap();
    let f = FluxModel::linear(0.8);
    // a non-admissible field, so the residuals are not all zero
    let u = |x: f64, t: f64| transported_hat(0.8)(x, t) + if x > 0.5 { 0.3 * t } else { 0.0 };
    let base = field(g, 0.5, 100, u);
    let scaled = field(g, 0.5, 100, |x, t| 2.5 * u(x, t));
    for b in battery_12(g.domain(), 0.5) {
        for k in [0.0, 0.2, 0.5] {
            let r1 = interior_residual(&base, &f, &b, k).unwrap();
            let r2 = interior_residual(&scaled, &f, &b, 2.5 * k).unwrap();
            assert!((r2 - 2.5 * r1).abs() < 1e-10, "bump {} k {k}: {r1} {r2}", b.id);
        }
    }
}

#[test]
fn residual_is_translation_invariant() {
    let g = Grid::new(Domain1D::unit(), 400).unwrap();
    let f = FluxModel::clamped_burgers(1.0).unwrap();
    let shift = 40.0 * g.h();
    let u = |x: f64, _t: f64| if x < 0.4 { -0.5 } else { 0.8 };
    let a = field(g, 0.5, 100, u);
    let b = field(g, 0.5, 100, |x, t| u(x - shift, t));
    let ba = TestBump::new(0, 0.4, 0.15, 0.25, 0.2);
    let bb = TestBump::new(1, 0.4 + shift, 0.15, 0.25, 0.2);
    for k in [-0.4, 0.0, 0.3] {
        let ra = interior_residual(&a, &f, &ba, k).unwrap();
        let rb = interior_residual(&b, &f, &bb, k).unwrap();
        assert!((ra - rb).abs() < 1e-12, "{ra} {rb}");
    }
}

#[test]
fn tolerance_follows_grid_and_slice_spacing() {
    let g = Grid::new(Domain1D::unit(), 100).unwrap();
    let stf = field(g, 0.5, 50, |_, _| 0.0);
    assert!((residual_tolerance(&stf, 0.25) - 0.25 * (0.01 + 0.01)).abs() < 1e-15);
}

#[test]
fn non_contracting_sweep_cannot_be_certified() {
    let sweep = SweepResult {
        eps_list: vec![0.04, 0.02, 0.01],
        runs: vec![],
        cauchy_l1: vec![0.1, 0.12],
        oracle_l1: vec![],
        rate_exponent: None,
        reference: None,
        mollifier: None,
        reports: vec![],
    };
    let f = FluxModel::clamped_burgers(1.0).unwrap();
    let e = certify_sweep(&sweep, &f, &ViscosityModel::rational(), DEFAULT_C_TOL).unwrap_err();
    assert!(matches!(e, Error::NotCauchy(_)));
    let empty = SweepResult { cauchy_l1: vec![], ..sweep };
    assert!(matches!(
        certify_sweep(&empty, &f, &ViscosityModel::rational(), DEFAULT_C_TOL),
        Err(Error::NotCauchy(_))
    ));
}
