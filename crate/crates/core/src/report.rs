use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::fmt17;

/// One measured inequality `lhs <= rhs` with a relative tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// The inequality being checked, written out.
    pub provenance: String,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, provenance: impl Into<String>) -> Self {
        let pass = lhs.is_finite() && lhs <= rhs * (1.0 + tolerance);
        Self {
            name: name.into(),
            lhs,
            rhs,
            tolerance,
            pass,
            provenance: provenance.into(),
        }
    }

    /// `lhs / rhs`, or 0 when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Writes `eps,estimate,lhs,rhs,tol,pass` rows. A `None` eps marks a
/// sweep-level row and is written as an empty field.
pub fn write_estimates_csv(path: &Path, rows: &[(Option<f64>, EstimateReport)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["eps", "estimate", "lhs", "rhs", "tol", "pass"])?;
    for (eps, r) in rows {
        w.write_record([
            eps.map(fmt17).unwrap_or_default(),
            r.name.clone(),
            fmt17(r.lhs),
            fmt17(r.rhs),
            fmt17(r.tolerance),
            r.pass.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
