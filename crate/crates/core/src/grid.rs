//! Bounded 1D domains, uniform cell-centred grids, and discrete norms.
//!
//! Fields hold cell averages. Every norm is the exact norm of the piecewise
//! constant reconstruction, so `norm_l1` of a field equals the `L^1` norm of
//! the step function it represents.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// The open interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain1D {
    a: f64,
    b: f64,
}

impl Domain1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn volume(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    /// Distance from `x` to the nearer endpoint.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        (x - self.a).min(self.b - x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    domain: Domain1D,
    n_cells: usize,
    h: f64,
}

impl Grid {
    pub fn new(domain: Domain1D, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::EmptyGrid);
        }
        let h = domain.volume() / n_cells as f64;
        Ok(Self { domain, n_cells, h })
    }

    pub fn domain(&self) -> Domain1D {
        self.domain
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn center(&self, i: usize) -> f64 {
        self.domain.a + (i as f64 + 0.5) * self.h
    }

    /// Position of face `i`; face 0 is the left boundary, face `n` the right.
    pub fn face(&self, i: usize) -> f64 {
        self.domain.a + i as f64 * self.h
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(move |i| self.center(i))
    }

    /// Same domain, `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Grid::new(self.domain, self.n_cells * factor)
    }
}

/// Cell averages of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::LengthMismatch {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.n_cells()],
            grid,
        }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.centers().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    /// Pointwise difference; both fields must live on the same grid.
    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::LengthMismatch {
                expected: self.grid.n_cells(),
                got: other.grid.n_cells(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    /// Averages blocks of cells down to a coarser grid on the same domain.
    pub fn restrict_to(&self, coarse: &Grid) -> Result<Self> {
        let n = self.grid.n_cells();
        let m = coarse.n_cells();
        if coarse.domain() != self.grid.domain() || m == 0 || !n.is_multiple_of(m) {
            return Err(Error::Config(format!(
                "cannot restrict {n} cells onto {m} cells"
            )));
        }
        let r = n / m;
        let values = self
            .values
            .chunks(r)
            .map(|c| c.iter().sum::<f64>() / r as f64)
            .collect();
        ScalarField::new(*coarse, values)
    }

    /// Writes `x,value` rows at cell centres with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "value"])?;
        for (x, v) in self.grid.centers().zip(&self.values) {
            w.write_record([fmt17(x), fmt17(*v)])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `h * sum |u_i|`.
pub fn norm_l1(field: &ScalarField) -> f64 {
    field.h() * field.values.iter().map(|v| v.abs()).sum::<f64>()
}

/// `h * sum u_i^2`.
pub fn norm_l2_sq(field: &ScalarField) -> f64 {
    field.h() * field.values.iter().map(|v| v * v).sum::<f64>()
}

pub fn norm_linf(field: &ScalarField) -> f64 {
    field.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// A sequence of slices `u(., t_k)` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<ScalarField>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, times: Vec<f64>, slices: Vec<ScalarField>) -> Result<Self> {
        if times.len() != slices.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: slices.len(),
            });
        }
        if times.first() != Some(&0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadTimes);
        }
        if let Some(s) = slices.iter().find(|s| *s.grid() != grid) {
            return Err(Error::LengthMismatch {
                expected: grid.n_cells(),
                got: s.grid().n_cells(),
            });
        }
        Ok(Self {
            grid,
            times,
            slices,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[ScalarField] {
        &self.slices
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn last(&self) -> &ScalarField {
        self.slices.last().expect("nonempty")
    }

    /// Linear interpolation in time between stored slices.
    pub fn sample_at(&self, t: f64) -> Vec<f64> {
        let times = &self.times;
        if t <= times[0] {
            return self.slices[0].values.clone();
        }
        if t >= self.final_time() {
            return self.last().values.clone();
        }
        let k = times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (times[k], times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        self.slices[k]
            .values
            .iter()
            .zip(&self.slices[k + 1].values)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect()
    }

    /// Writes `t,x,value` rows, one block per stored slice.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(["t", "x", "value"])?;
        for (t, s) in self.times.iter().zip(&self.slices) {
            let ts = fmt17(*t);
            for (x, v) in self.grid.centers().zip(&s.values) {
                w.write_record([ts.as_str(), &fmt17(x), &fmt17(*v)])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads the `t,x,value` layout written by [`SpaceTimeField::write_csv`].
    pub fn read_csv(path: &Path, domain: Domain1D) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut times: Vec<f64> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Config(format!("{}: malformed row", path.display())))
            };
            let (t, v) = (parse(0)?, parse(2)?);
            if times.last() != Some(&t) {
                times.push(t);
                rows.push(Vec::new());
            }
            rows.last_mut().expect("pushed").push(v);
        }
        let n = rows.first().map_or(0, Vec::len);
        let grid = Grid::new(domain, n)?;
        let slices = rows
            .into_iter()
            .map(|v| ScalarField::new(grid, v))
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(grid, times, slices)
    }
}

/// Trapezoidal time integral of a per-slice functional.
pub fn integrate_time(stf: &SpaceTimeField, functional: impl Fn(&ScalarField) -> f64) -> Result<f64> {
    if stf.times.len() < 2 {
        return Err(Error::TooFewSlices(stf.times.len()));
    }
    let vals: Vec<f64> = stf.slices.iter().map(functional).collect();
    Ok(stf
        .times
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum())
}

/// `L^1(Omega_T)` distance between two space-time fields on the same grid,
/// evaluated on `n_times` uniform instants with linear interpolation in time.
pub fn l1_spacetime_distance(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    n_times: usize,
) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::LengthMismatch {
            expected: u.grid.n_cells(),
            got: v.grid.n_cells(),
        });
    }
    let t_end = u.final_time().min(v.final_time());
    let n = n_times.max(2);
    let h = u.grid.h();
    let dist: Vec<f64> = (0..n)
        .map(|k| {
            let t = t_end * k as f64 / (n - 1) as f64;
            let a = u.sample_at(t);
            let b = v.sample_at(t);
            h * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>()
        })
        .collect();
    let dt = t_end / (n - 1) as f64;
    Ok(dist.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum())
}

/// Restricts every slice of a fine field onto a coarser grid.
pub fn restrict_spacetime(stf: &SpaceTimeField, coarse: &Grid) -> Result<SpaceTimeField> {
    let slices = stf
        .slices
        .iter()
        .map(|s| s.restrict_to(coarse))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(*coarse, stf.times.clone(), slices)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit_grid(n: usize) -> Grid {
        Grid::new(Domain1D::unit(), n).unwrap()
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Domain1D::new(1.0, 1.0).is_err());
        assert!(Domain1D::new(2.0, 1.0).is_err());
        assert!(Grid::new(Domain1D::unit(), 0).is_err());
    }

    #[test]
    fn centers_strictly_inside() {
        let g = unit_grid(7);
        assert!(g.centers().all(|x| g.domain().contains(x)));
    }

    #[test]
    fn zero_field_norms_vanish() {
        let z = ScalarField::zeros(unit_grid(16));
        assert_eq!(norm_l1(&z), 0.0);
        assert_eq!(norm_l2_sq(&z), 0.0);
        assert_eq!(norm_linf(&z), 0.0);
    }

    #[test]
    fn small_hand_cases() {
        let f = ScalarField::new(unit_grid(2), vec![1.0, -1.0]).unwrap();
        assert_eq!(norm_l1(&f), 1.0);
        let f = ScalarField::new(unit_grid(1), vec![2.0]).unwrap();
        assert_eq!(norm_l2_sq(&f), 4.0);
        let f = ScalarField::new(unit_grid(2), vec![-3.0, 2.0]).unwrap();
        assert_eq!(norm_linf(&f), 3.0);
    }

    #[test]
    fn rejects_nan_and_wrong_length() {
        assert!(ScalarField::new(unit_grid(2), vec![1.0]).is_err());
        assert!(matches!(
            ScalarField::new(unit_grid(2), vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn l2_of_sine_matches_closed_form() {
        // int_0^1 sin^2(pi x) dx = 1/2
        let f = ScalarField::from_fn(unit_grid(1024), |x| (PI * x).sin()).unwrap();
        let v = norm_l2_sq(&f);
        assert!(((v - 0.5) / 0.5).abs() < 1e-4, "{v}");
    }

    #[test]
    fn refinement_changes_norms_by_o_h2() {
        let f = |x: f64| (PI * x).sin() + 0.3 * x;
        let exact = 2.0 / PI + 0.15;
        let e1 = (norm_l1(&ScalarField::from_fn(unit_grid(64), f).unwrap()) - exact).abs();
        let e2 = (norm_l1(&ScalarField::from_fn(unit_grid(128), f).unwrap()) - exact).abs();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    fn constant_stf(c: f64, t_end: f64, n: usize) -> SpaceTimeField {
        let g = unit_grid(4);
        let times: Vec<f64> = (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect();
        let slices = times
            .iter()
            .map(|_| ScalarField::new(g, vec![c; 4]).unwrap())
            .collect();
        SpaceTimeField::new(g, times, slices).unwrap()
    }

    #[test]
    fn integrate_constant_functional() {
        let stf = constant_stf(0.0, 0.7, 11);
        let v = integrate_time(&stf, |_| 2.5).unwrap();
        assert!((v - 2.5 * 0.7).abs() < 1e-12);
        assert_eq!(integrate_time(&stf, norm_l1).unwrap(), 0.0);
    }

    #[test]
    fn integrate_time_needs_two_slices() {
        let g = unit_grid(4);
        let stf = SpaceTimeField::new(g, vec![0.0], vec![ScalarField::zeros(g)]).unwrap();
        assert!(matches!(
            integrate_time(&stf, norm_l1),
            Err(Error::TooFewSlices(1))
        ));
    }

    #[test]
    fn times_must_increase_from_zero() {
        let g = unit_grid(2);
        let s = ScalarField::zeros(g);
        assert!(SpaceTimeField::new(g, vec![0.1, 0.2], vec![s.clone(), s.clone()]).is_err());
        assert!(SpaceTimeField::new(g, vec![0.0, 0.0], vec![s.clone(), s]).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = unit_grid(5);
        let times = vec![0.0, 0.1, 0.3];
        let slices = times
            .iter()
            .map(|t| ScalarField::from_fn(g, |x| (x * 7.0 + t).sin() / 3.0).unwrap())
            .collect();
        let stf = SpaceTimeField::new(g, times, slices).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        stf.write_csv(&p).unwrap();
        let back = SpaceTimeField::read_csv(&p, Domain1D::unit()).unwrap();
        assert_eq!(back, stf);
    }

    #[test]
    fn restriction_preserves_mass() {
        let f = ScalarField::from_fn(unit_grid(64), |x| x * x).unwrap();
        let c = f.restrict_to(&unit_grid(8)).unwrap();
        assert!((norm_l1(&f) - norm_l1(&c)).abs() < 1e-14);
        assert!(f.restrict_to(&unit_grid(7)).is_err());
    }

    proptest! {
        #[test]
        fn norms_are_homogeneous(vals in prop::collection::vec(-10.0f64..10.0, 1..40), lambda in -5.0f64..5.0) {
            let g = unit_grid(vals.len());
            let u = ScalarField::new(g, vals).unwrap();
            let v = u.scaled(lambda);
            let tol = 1e-12 * (1.0 + norm_l1(&u) * lambda.abs());
            prop_assert!(norm_l1(&u) >= 0.0 && norm_l2_sq(&u) >= 0.0 && norm_linf(&u) >= 0.0);
            prop_assert!((norm_l1(&v) - lambda.abs() * norm_l1(&u)).abs() <= tol);
            prop_assert!((norm_linf(&v) - lambda.abs() * norm_linf(&u)).abs() <= tol);
            prop_assert!((norm_l2_sq(&v) - lambda * lambda * norm_l2_sq(&u)).abs() <= 1e-12 * (1.0 + norm_l2_sq(&v)));
            let zero = norm_linf(&u) == 0.0;
            prop_assert_eq!(norm_l1(&u) == 0.0, zero);
        }
    }
}
