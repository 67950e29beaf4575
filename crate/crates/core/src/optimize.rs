//! Derivative-free minimization over the test-function exponent `beta`.

use crate::bounds::ellipsoid_beta_bound;
use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_ITERATIONS: usize = 200;

/// Default upper end of the `beta` bracket.
pub const DEFAULT_BETA_HI: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub beta_star: f64,
    pub value: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    /// The minimizer sits within `tol` of a bracket end.
    pub pinned_at_boundary: bool,
    /// Multi-start runs landed on minimizers more than `10 tol` apart.
    pub starts_disagree: bool,
}

fn eval<F: Fn(f64) -> Result<f64>>(f: &F, x: f64) -> Result<f64> {
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x, value: v })
    }
}

fn check_bracket(lo: f64, hi: f64, tol: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("degenerate bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Golden-section search on `[lo, hi]` for a fallible objective. Bracket
/// ends are compared at the end so a monotone objective is pinned at the
/// better end.
pub fn minimize_scalar_fallible<F>(objective: F, lo: f64, hi: f64, tol: f64) -> Result<OptimizationResult>
where
    F: Fn(f64) -> Result<f64>,
{
    check_bracket(lo, hi, tol)?;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(&objective, c)?;
    let mut fd = eval(&objective, d)?;
    let mut iterations = 0;
    while b - a > tol && iterations < MAX_ITERATIONS {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(&objective, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(&objective, d)?;
        }
    }
    let (mut x, mut fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    for end in [lo, hi] {
        let fe = eval(&objective, end)?;
        if fe < fx {
            x = end;
            fx = fe;
        }
    }
    Ok(OptimizationResult {
        beta_star: x,
        value: fx,
        iterations,
        bracket: (lo, hi),
        pinned_at_boundary: x - lo <= tol || hi - x <= tol,
        starts_disagree: false,
    })
}

pub fn minimize_scalar<F>(objective: F, lo: f64, hi: f64, tol: f64) -> Result<OptimizationResult>
where
    F: Fn(f64) -> f64,
{
    minimize_scalar_fallible(|x| Ok(objective(x)), lo, hi, tol)
}

/// Minimize `beta -> ellipsoid_beta_bound(a, beta)` over `[lo, hi]`.
///
/// Unimodality is not known for finite `a`, so the bracket is cut at the
/// start points 0.6, 1.2 and 5 (where they fall inside) and each piece is
/// searched separately; the best is returned and disagreement flagged.
pub fn optimize_beta(a: f64, lo: f64, hi: f64, tol: f64) -> Result<OptimizationResult> {
    if !(lo > 0.5) {
        return Err(Error::invalid(format!(
            "beta bracket must lie above 1/2, got lo = {lo}"
        )));
    }
    check_bracket(lo, hi, tol)?;
    let quad_tol = (tol * 1e-3).clamp(1e-13, 1e-9);
    let objective = |b: f64| Ok(ellipsoid_beta_bound(a, b, quad_tol)?.value);

    let mut cuts = vec![lo];
    cuts.extend([0.6, 1.2, 5.0].into_iter().filter(|&s| s > lo && s < hi));
    cuts.push(hi);
    let mut runs = Vec::new();
    for w in cuts.windows(2) {
        if w[1] - w[0] > tol {
            runs.push(minimize_scalar_fallible(objective, w[0], w[1], tol)?);
        }
    }
    if runs.is_empty() {
        runs.push(minimize_scalar_fallible(objective, lo, hi, tol)?);
    }
    let best = runs
        .iter()
        .copied()
        .min_by(|x, y| x.value.total_cmp(&y.value))
        .expect("at least one run");
    // Interior local minima other than the best one signal non-unimodality.
    let interior_minima: Vec<f64> = runs
        .iter()
        .filter(|r| {
            let (l, h) = r.bracket;
            r.beta_star - l > tol && h - r.beta_star > tol
        })
        .map(|r| r.beta_star)
        .collect();
    let starts_disagree = interior_minima.iter().any(|&b| (b - best.beta_star).abs() > 10.0 * tol);
    Ok(OptimizationResult {
        iterations: runs.iter().map(|r| r.iterations).sum(),
        bracket: (lo, hi),
        pinned_at_boundary: best.beta_star - lo <= tol || hi - best.beta_star <= tol,
        starts_disagree,
        ..best
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{beta_limit_large_a, beta_limit_small_a};

    #[test]
    fn small_a_limit_optimum() {
        let r = minimize_scalar_fallible(beta_limit_small_a, 0.5 + 1e-9, 10.0, 1e-9).unwrap();
        assert!((r.beta_star - (0.5 + 0.5f64.sqrt())).abs() < 1e-6);
        assert!((r.value - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(!r.pinned_at_boundary);
    }

    #[test]
    fn quadratic() {
        let r = minimize_scalar(|b| (b - 2.0).powi(2), 0.0, 5.0, 1e-10).unwrap();
        assert!((r.beta_star - 2.0).abs() < 1e-8);
        assert!(r.value < 1e-15);
        assert!(r.bracket.0 < r.beta_star && r.beta_star < r.bracket.1);
    }

    #[test]
    fn monotone_objective_pins_at_upper_end() {
        let r = minimize_scalar_fallible(|b| beta_limit_large_a(b, 1e-12), 0.55, 20.0, 1e-6).unwrap();
        assert!(r.pinned_at_boundary);
        assert_eq!(r.beta_star, 20.0);
        assert!(r.value > 0.25 && r.value < 0.26);
    }

    #[test]
    fn bad_brackets() {
        assert!(minimize_scalar(|b| b, 1.0, 1.0, 1e-6).is_err());
        assert!(optimize_beta(0.5, 0.5, 2.0, 1e-6).is_err());
        assert!(matches!(
            minimize_scalar(|_| f64::NAN, 0.0, 1.0, 1e-3),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn beta_optimum_examples() {
        let round = optimize_beta(1.0, 0.6, 20.0, 1e-5).unwrap();
        assert!((round.value - 1.0).abs() < 1e-10);

        let small = optimize_beta(1e-3, 0.55, DEFAULT_BETA_HI, 1e-6).unwrap();
        assert!(
            (small.value / (3.0 + 2.0 * 2f64.sqrt()) - 1.0).abs() < 0.02,
            "{small:?}"
        );
        assert!((small.beta_star - (0.5 + 0.5f64.sqrt())).abs() < 0.05);
        let at_one = ellipsoid_beta_bound(1e-3, 1.0, 1e-12).unwrap().value;
        assert!(small.value <= at_one);
        let again = ellipsoid_beta_bound(1e-3, small.beta_star, 1e-9).unwrap().value;
        assert_eq!(again, small.value);

        let large = optimize_beta(1e3, 0.55, DEFAULT_BETA_HI, 1e-6).unwrap();
        assert!((large.value / 0.25 - 1.0).abs() < 0.05, "{large:?}");
        assert!(large.pinned_at_boundary);
    }
}
