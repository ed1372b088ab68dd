//! Godunov reference against exact Riemann solutions.

use viscoflow::bv::tv_history;
use viscoflow::grid::{norm_l1, Domain1D, Grid};
use viscoflow::models::{FluxModel, Hypothesis, InitialData, Profile};
use viscoflow::oracle::{godunov_reference, solve_riemann, ReferenceConfig, Wave};

const T: f64 = 0.5;

fn burgers() -> FluxModel {
    FluxModel::clamped_burgers(1.0).unwrap()
}

fn step(left: f64, right: f64, height: f64) -> InitialData {
    InitialData::new("riemann", Profile::Step { left, right, height }, Hypothesis::E, Domain1D::unit())
}

/// L1 distance to the exact solution on `[lo, hi]`, for each grid size.
fn errors(data: &InitialData, exact: &dyn Fn(f64) -> f64, lo: f64, hi: f64, sizes: &[usize]) -> Vec<f64> {
    sizes
        .iter()
        .map(|&n| {
            let mut cfg = ReferenceConfig::new(n, T);
            cfg.refine = 1;
            let r = godunov_reference(&burgers(), data, &cfg).unwrap();
            let g = Grid::new(Domain1D::unit(), n).unwrap();
            let u = r.coarse.last();
            (0..n)
                .filter(|&i| g.face(i) >= lo && g.face(i + 1) <= hi)
                .map(|i| {
                    let s = 16;
                    let avg = (0..s)
                        .map(|k| exact(g.face(i) + (k as f64 + 0.5) * g.h() / s as f64))
                        .sum::<f64>()
                        / s as f64;
                    (u.values()[i] - avg).abs() * g.h()
                })
                .sum()
        })
        .collect()
}

fn rates(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn exact_waves_have_the_right_shape() {
    let f = burgers();
    let s = solve_riemann(&f, 1.0, 0.0, 0.7).unwrap();
    assert_eq!(s.wave(), Wave::Shock { speed: 0.5 });
    assert_eq!(s.eval(0.94, T), 1.0);
    assert_eq!(s.eval(0.96, T), 0.0);
    let r = solve_riemann(&f, 0.0, 1.0, 0.3).unwrap();
    assert!(matches!(r.wave(), Wave::Rarefaction { .. }));
    assert!((r.eval(0.4, T) - 0.2).abs() < 1e-12);
    assert_eq!(solve_riemann(&f, 0.4, 0.4, 0.5).unwrap().wave(), Wave::Constant);
}

#[test]
fn shock_converges_at_least_at_half_order() {
    // states 0 | -1: shock at 0.5 moving left at speed 1/2; the rarefaction
    // leaving the right wall stays in [0.5, 1] up to T
    let data = step(0.5, 1.0, -1.0);
    let shock = solve_riemann(&burgers(), 0.0, -1.0, 0.5).unwrap();
    let e = errors(&data, &|x| shock.eval(x, T), 0.0, 0.5, &[100, 200, 400, 800]);
    let p = rates(&e);
    assert!(p.iter().all(|r| *r >= 0.5), "errors {e:?} rates {p:?}");
}

#[test]
fn rarefaction_converges() {
    let data = InitialData::step();
    let fan = solve_riemann(&burgers(), 0.0, 1.0, 0.3).unwrap();
    let e = errors(&data, &|x| fan.eval(x, T), 0.0, 0.8, &[100, 200, 400, 800]);
    let p = rates(&e);
    assert!(p.iter().all(|r| *r >= 0.5), "errors {e:?} rates {p:?}");
}

#[test]
fn whole_step_matches_superposed_waves() {
    let f = burgers();
    let fan = solve_riemann(&f, 0.0, 1.0, 0.3).unwrap();
    let shock = solve_riemann(&f, 1.0, 0.0, 0.7).unwrap();
    let exact = |x: f64| if x < 0.8 { fan.eval(x, T) } else { shock.eval(x, T) };
    let cfg = ReferenceConfig::new(256, T);
    let r = godunov_reference(&f, &InitialData::step(), &cfg).unwrap();
    let g = Grid::new(Domain1D::unit(), 256).unwrap();
    let ex = viscoflow::grid::ScalarField::from_fn(g, exact).unwrap();
    let err = norm_l1(&r.coarse.last().sub(&ex).unwrap());
    assert!(err < 5e-3, "L1 error {err}");
}

#[test]
fn reference_is_tvd_and_keeps_the_bounds() {
    for data in [InitialData::step(), InitialData::hat(), step(0.2, 0.6, -0.8)] {
        let r = godunov_reference(&burgers(), &data, &ReferenceConfig::new(128, 1.0)).unwrap();
        let tv = tv_history(&r.fine);
        assert!(tv.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{}", data.name());
        assert!(r.diagnostics.iter().all(|d| d.linf <= data.linf_bound() + 1e-14));
    }
}

#[test]
fn mass_ledger_accounts_for_boundary_outflow() {
    // the shock reaches the right wall at t = 0.6 and mass starts leaving
    let r = godunov_reference(&burgers(), &InitialData::step(), &ReferenceConfig::new(128, 1.5)).unwrap();
    let m0 = r.diagnostics[0].mass;
    let m1 = r.diagnostics.last().unwrap().mass;
    assert!(m0 - m1 > 0.05, "mass {m0} -> {m1}");
    assert!(r.mass_defect < 1e-12, "defect {}", r.mass_defect);
}

#[test]
fn refinement_then_restriction_beats_the_coarse_grid() {
    let f = burgers();
    let fan = solve_riemann(&f, 0.0, 1.0, 0.3).unwrap();
    let shock = solve_riemann(&f, 1.0, 0.0, 0.7).unwrap();
    let g = Grid::new(Domain1D::unit(), 128).unwrap();
    let ex = viscoflow::grid::ScalarField::from_fn(g, |x| if x < 0.8 { fan.eval(x, T) } else { shock.eval(x, T) })
        .unwrap();
    let err = |refine| {
        let mut cfg = ReferenceConfig::new(128, T);
        cfg.refine = refine;
        let r = godunov_reference(&f, &InitialData::step(), &cfg).unwrap();
        norm_l1(&r.coarse.last().sub(&ex).unwrap())
    };
    assert!(err(8) < 0.5 * err(1));
}
