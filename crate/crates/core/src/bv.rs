//! Discrete total variation and the approximate signum family.

use crate::error::{Error, Result};
use crate::grid::{integrate_time, ScalarField, SpaceTimeField};

/// Piecewise linear approximation of the signum with slope `n` on `[-1/n, 1/n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgApprox {
    n: u32,
}

impl SgApprox {
    pub fn new(n: u32) -> Option<Self> {
        (n >= 1).then_some(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eval(&self, s: f64) -> f64 {
        sg_n_eval(self.n, s)
    }
}

pub fn sg_n_eval(n: u32, s: f64) -> f64 {
    let n = f64::from(n);
    if s > 1.0 / n {
        1.0
    } else if s < -1.0 / n {
        -1.0
    } else {
        n * s
    }
}

/// Signum with `sg(0) = 0`.
pub fn sg_eval(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Total variation of the cell values extended by zero on both sides.
pub fn total_variation(field: &ScalarField) -> f64 {
    let v = field.values();
    let interior: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    interior + v[0].abs() + v[v.len() - 1].abs()
}

/// `int_0^T TV(u(., t)) dt`, the space part of the space-time variation.
pub fn space_bv_l1(stf: &SpaceTimeField) -> Result<f64> {
    integrate_time(stf, total_variation)
}

/// `h * sum_i sum_k |u_{i,k+1} - u_{i,k}|` over stored slices.
pub fn time_deriv_l1(stf: &SpaceTimeField) -> Result<f64> {
    let slices = stf.slices();
    if slices.len() < 2 {
        return Err(Error::TooFewSlices(slices.len()));
    }
    let h = stf.grid().h();
    Ok(h * slices
        .windows(2)
        .map(|w| {
            w[0].values()
                .iter()
                .zip(w[1].values())
                .map(|(a, b)| (b - a).abs())
                .sum::<f64>()
        })
        .sum::<f64>())
}

/// Per-slice total variation.
pub fn tv_history(stf: &SpaceTimeField) -> Vec<f64> {
    stf.slices().iter().map(total_variation).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain1D, Grid};
    use proptest::prelude::*;

    fn field(vals: Vec<f64>) -> ScalarField {
        ScalarField::new(Grid::new(Domain1D::unit(), vals.len()).unwrap(), vals).unwrap()
    }

    #[test]
    fn sg_n_formula() {
        assert!((sg_n_eval(4, 0.1) - 0.4).abs() < 1e-15);
        assert_eq!(sg_n_eval(7, 0.0), 0.0);
        assert_eq!(sg_n_eval(10, 0.5), 1.0);
        assert_eq!(sg_n_eval(10, -0.5), -1.0);
        assert!(SgApprox::new(0).is_none());
    }

    #[test]
    fn sg_values() {
        assert_eq!(sg_eval(0.0), 0.0);
        assert_eq!(sg_eval(-7.0), -1.0);
        assert_eq!(sg_eval(2.0), 1.0);
    }

    #[test]
    fn sg_n_saturates_to_sg() {
        for n in 5..50 {
            assert_eq!(sg_n_eval(n, 0.3), sg_eval(0.3));
            assert_eq!(sg_n_eval(n, -0.3), sg_eval(-0.3));
        }
        assert_ne!(sg_n_eval(3, 0.3), 1.0);
    }

    #[test]
    fn tv_cases() {
        assert_eq!(total_variation(&field(vec![0.0; 6])), 0.0);
        assert_eq!(total_variation(&field(vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0])), 2.0);
        assert_eq!(total_variation(&field(vec![1.0; 10])), 2.0);
    }

    fn stf(rows: Vec<Vec<f64>>, times: Vec<f64>) -> SpaceTimeField {
        let g = Grid::new(Domain1D::unit(), rows[0].len()).unwrap();
        let slices = rows.into_iter().map(|r| ScalarField::new(g, r).unwrap()).collect();
        SpaceTimeField::new(g, times, slices).unwrap()
    }

    #[test]
    fn time_derivative_cases() {
        let s = stf(vec![vec![0.5, 0.2]; 3], vec![0.0, 0.5, 1.0]);
        assert_eq!(time_deriv_l1(&s).unwrap(), 0.0);
        // one cell, h = 1, u = t on [0, 1]
        let s = stf(vec![vec![0.0], vec![0.25], vec![1.0]], vec![0.0, 0.25, 1.0]);
        assert_eq!(time_deriv_l1(&s).unwrap(), 1.0);
        assert!((space_bv_l1(&s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn needs_two_slices() {
        let s = stf(vec![vec![1.0]], vec![0.0]);
        assert!(time_deriv_l1(&s).is_err());
        assert!(space_bv_l1(&s).is_err());
    }

    proptest! {
        #[test]
        fn sg_n_properties(n in 1u32..200, s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let (a, b) = (sg_n_eval(n, s), sg_n_eval(n, t));
            prop_assert_eq!(sg_n_eval(n, -s), -a);
            prop_assert!(a.abs() <= 1.0);
            if s <= t { prop_assert!(a <= b); }
            prop_assert!((a - b).abs() <= f64::from(n) * (s - t).abs() * (1.0 + 1e-12));
        }

        #[test]
        fn tv_homogeneous_and_shift(vals in prop::collection::vec(-5.0f64..5.0, 2..30), lambda in -4.0f64..4.0, c in -3.0f64..3.0) {
            let u = field(vals.clone());
            let tv = total_variation(&u);
            prop_assert!((total_variation(&u.scaled(lambda)) - lambda.abs() * tv).abs() <= 1e-10 * (1.0 + tv));
            let shifted = field(vals.iter().map(|v| v + c).collect());
            let interior = |f: &ScalarField| f.values().windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
            prop_assert!((interior(&shifted) - interior(&u)).abs() <= 1e-10 * (1.0 + tv));
            let n = vals.len();
            let boundary_shift = total_variation(&shifted) - interior(&shifted);
            prop_assert!((boundary_shift - (vals[0] + c).abs() - (vals[n - 1] + c).abs()).abs() <= 1e-10);
        }
    }
}
