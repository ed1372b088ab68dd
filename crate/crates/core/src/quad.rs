//! Adaptive composite Simpson quadrature.

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to an absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // below rounding level of the panel sums further halving only chases noise
    let noise = 16.0 * f64::EPSILON * (b - a) * (fa.abs() + flm.abs() + fm.abs() + frm.abs() + fb.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(noise) {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates over `[a, b]`, splitting at the given interior points first.
///
/// Breakpoints outside `(a, b)` are ignored. The tolerance is shared evenly
/// between the pieces.
pub fn adaptive_simpson_split<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // seed every piece with a few panels so narrow features are not skipped
    let pieces = pts.len() - 1;
    let per = tol / pieces as f64;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let panels = 4;
        let step = (hi - lo) / panels as f64;
        for p in 0..panels {
            let x0 = lo + p as f64 * step;
            let x1 = if p + 1 == panels { hi } else { x0 + step };
            total += adaptive_simpson(f, x0, x1, per / panels as f64);
        }
    }
    total
}
