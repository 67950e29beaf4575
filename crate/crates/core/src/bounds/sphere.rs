//! Intrinsic bounds on genus-0 surfaces via a uniformization `g = h^4 g_0`
//! over the round sphere.

use std::cell::Cell;
use std::f64::consts::PI;

use super::{check_tol, ratio_with_error, BoundKind, BoundValue};
use crate::conformal::{AnalyticFactor, ConformalFactorField};
use crate::error::{Error, Result};
use crate::geometry::ellipsoid_volume;
use crate::quadrature::{integrate_periodic_converged, integrate_real_line, QuadratureResult};
use crate::uniformization::{i1, ln_cosh};

/// `(4 pi + i1) / vol`, where `i1` is the Dirichlet energy of `log h` for
/// some uniformization.
pub fn intrinsic_sphere_bound(vol: f64, i1: f64) -> Result<BoundValue> {
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::invalid(format!("volume must be positive, got {vol}")));
    }
    if !(i1 >= 0.0 && i1.is_finite()) {
        return Err(Error::invalid(format!("energy must be nonnegative, got {i1}")));
    }
    Ok(BoundValue::exact(BoundKind::UpperT2, (4.0 * PI + i1) / vol))
}

/// [`intrinsic_sphere_bound`] for the ellipsoid `E(a)` with `I_1(a)`.
pub fn intrinsic_sphere_bound_ellipsoid(a: f64, tol: f64) -> Result<BoundValue> {
    check_tol(tol)?;
    let vol = ellipsoid_volume(a, 0.25 * tol)?;
    let energy = i1(a, 0.25 * tol * vol.min(1.0))?;
    let mut b = intrinsic_sphere_bound(vol, energy.value)?;
    // Volume quadrature is run at 0.25 tol; take that as its error.
    b.error = (energy.error_estimate + b.value * 0.25 * tol) / vol;
    Ok(b)
}

fn dlog_c(h: &AnalyticFactor, c: f64, phi: f64) -> [f64; 2] {
    if let Some(g) = h.log_gradient() {
        return g(c, phi);
    }
    let step = 1e-3 * c.abs().max(1.0);
    let d = |f: &dyn Fn(f64) -> f64, x: f64| {
        (8.0 * (f(x + step) - f(x - step)) - (f(x + 2.0 * step) - f(x - 2.0 * step))) / (12.0 * step)
    };
    let dc = d(&|x| h.log_h(x, phi), c);
    let dphi = if h.is_rotational() {
        0.0
    } else {
        d(&|x| h.log_h(c, x), phi)
    };
    [dc, dphi]
}

/// Integral over the cylinder `R x [0, 2 pi)` of `f(c, phi)`.
fn cylinder_integral<F>(h: &AnalyticFactor, f: F, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64, f64) -> f64,
{
    if h.is_rotational() {
        return Ok(integrate_real_line(|c| f(c, 0.0), tol / (2.0 * PI))?.scale(2.0 * PI));
    }
    let failure = Cell::new(None);
    let outer = integrate_real_line(
        |c| match integrate_periodic_converged(|phi| f(c, phi), 2.0 * PI, 0.1 * tol) {
            Ok(r) => r.value,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        },
        0.5 * tol,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    outer
}

/// `(4 pi + int |grad log h|^2 dS^2) / int h^4 dS^2` for a factor given in
/// the cylinder chart `(c, phi)`, `c = ln x`.
///
/// The Dirichlet energy is conformally invariant, so it is integrated with
/// the flat gradient in `(c, phi)`; the round area element is
/// `sech^2(c) dc dphi`.
pub fn conformal_sphere_bound(h: &ConformalFactorField, tol: f64) -> Result<BoundValue> {
    check_tol(tol)?;
    let h = match h {
        ConformalFactorField::Analytic(a) => a,
        ConformalFactorField::Grid(_) => {
            return Err(Error::invalid("grid conformal factors are only supported on tori"));
        }
    };
    let vol = cylinder_integral(h, |c, phi| (4.0 * h.log_h(c, phi) - 2.0 * ln_cosh(c)).exp(), 0.25 * tol)?;
    if !(vol.value > 0.0 && vol.value.is_finite()) {
        return Err(Error::NonPositiveFactor {
            index: 0,
            value: vol.value,
        });
    }
    let energy = cylinder_integral(
        h,
        |c, phi| {
            let [gc, gp] = dlog_c(h, c, phi);
            gc * gc + gp * gp
        },
        0.25 * tol * vol.value.min(1.0),
    )?;
    let (v, err) = ratio_with_error(
        4.0 * PI + energy.value,
        energy.error_estimate,
        vol.value,
        vol.error_estimate,
    )?;
    Ok(BoundValue::with_error(BoundKind::UpperT2, v, err))
}
