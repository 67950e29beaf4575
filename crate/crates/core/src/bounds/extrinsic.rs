//! Bounds from the immersion: the volume lower bound, the mean-curvature
//! bound, and the Rayleigh quotient with test functions `f`, `G(f)`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{check_tol, ratio_with_error, BoundKind, BoundValue};
use crate::error::{Error, Result};
use crate::geometry::{delta_a, ellipsoid_quantities, tube_area_density, tube_mean_curvature, tube_volume};
use crate::geometry::{EllipsoidParam, TubeParam};
use crate::quadrature::{integrate_adaptive, integrate_periodic_converged, QuadratureResult};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The surfaces with an extrinsic bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Ellipsoid(EllipsoidParam),
    Tube(TubeParam),
}

impl From<EllipsoidParam> for Surface {
    fn from(e: EllipsoidParam) -> Self {
        Surface::Ellipsoid(e)
    }
}

impl From<TubeParam> for Surface {
    fn from(t: TubeParam) -> Self {
        Surface::Tube(t)
    }
}

/// Test functions `f(w)` on a surface of revolution and `G: R -> R`.
///
/// `G` defaults to zero. Without an explicit `df/dw`, the derivative is
/// taken by a five-point centered difference.
#[derive(Clone)]
pub struct TestFunctionPair {
    f: RealFn,
    df: Option<RealFn>,
    g: Option<(RealFn, RealFn)>,
}

impl TestFunctionPair {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TestFunctionPair {
            f: Arc::new(f),
            df: None,
            g: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        TestFunctionPair::new(move |_| c).with_derivative(|_| 0.0)
    }

    /// `f = Delta_a(w)^beta` with its exact derivative.
    pub fn ellipsoid_power(a: f64, beta: f64) -> Self {
        TestFunctionPair::new(move |w| delta_a(a, w).powf(beta))
            .with_derivative(move |w| 2.0 * beta * (1.0 - a) * (1.0 + a) * w * delta_a(a, w).powf(beta - 1.0))
    }

    pub fn with_derivative<F>(mut self, df: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.df = Some(Arc::new(df));
        self
    }

    /// Set `G` and its derivative `G'`.
    pub fn with_g<G, DG>(mut self, g: G, dg: DG) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        DG: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.g = Some((Arc::new(g), Arc::new(dg)));
        self
    }

    pub fn f(&self, w: f64) -> f64 {
        (self.f)(w)
    }

    pub fn df(&self, w: f64) -> f64 {
        if let Some(df) = &self.df {
            return df(w);
        }
        let h = 1e-3f64.min(0.25 * (1.0 - w.abs()));
        if !(h > 0.0) {
            return 0.0;
        }
        let f = &self.f;
        (8.0 * (f(w + h) - f(w - h)) - (f(w + 2.0 * h) - f(w - 2.0 * h))) / (12.0 * h)
    }

    /// `(G(y), G'(y))`, zero when `G` is unset.
    pub fn g(&self, y: f64) -> (f64, f64) {
        match &self.g {
            Some((g, dg)) => (g(y), dg(y)),
            None => (0.0, 0.0),
        }
    }
}

/// `4 pi / vol`, valid for every metric on the sphere.
pub fn lower_bound_genus0(vol: f64) -> Result<BoundValue> {
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::invalid(format!("volume must be positive, got {vol}")));
    }
    Ok(BoundValue::exact(BoundKind::LowerLb, 4.0 * PI / vol))
}

/// `int H^2 dM / vol`.
pub fn classical_h2_bound(surface: impl Into<Surface>, tol: f64) -> Result<BoundValue> {
    check_tol(tol)?;
    match surface.into() {
        Surface::Ellipsoid(e) => {
            let a = e.a();
            let den = integrate_adaptive(|w| delta_a(a, w).sqrt(), 0.0, 1.0, 0.25 * tol)?;
            let num = integrate_adaptive(
                |w| {
                    let q = ellipsoid_quantities(a, w);
                    q.h2 * q.area_density
                },
                0.0,
                1.0,
                0.25 * tol * den.value,
            )?;
            let (v, err) = ratio_with_error(num.value, num.error_estimate, den.value, den.error_estimate)?;
            Ok(BoundValue::with_error(BoundKind::UpperH2, v, err))
        }
        Surface::Tube(t) => {
            let total = tube_h2_integral(&t, tol)?;
            let vol = tube_volume(&t);
            Ok(BoundValue::with_error(
                BoundKind::TubeH2,
                total.value / vol,
                total.error_estimate / vol,
            ))
        }
    }
}

/// `int H^2 dM` over the tube: `L int_0^{2 pi} H^2 r (1 - r kappa cos phi) dphi`.
pub(crate) fn tube_h2_integral(t: &TubeParam, tol: f64) -> Result<QuadratureResult> {
    let len = t.length();
    let inner = integrate_periodic_converged(
        |phi| tube_mean_curvature(t, phi).powi(2) * tube_area_density(t, phi),
        2.0 * PI,
        tol / len,
    )?;
    Ok(inner.scale(len))
}

/// Rayleigh quotient
/// `[int H^2 (f^2 + G(f)^2) + int |grad f|^2 (1 + G'(f)^2)] / int (f^2 + G(f)^2)`
/// on the ellipsoid, with `|grad f|^2 = (1 - w^2) / Delta_a(w) * (df/dw)^2`.
pub fn extrinsic_bound_t1(e: &EllipsoidParam, tf: &TestFunctionPair, tol: f64) -> Result<BoundValue> {
    check_tol(tol)?;
    let a = e.a();
    let mass = |w: f64| {
        let f = tf.f(w);
        let (g, _) = tf.g(f);
        f * f + g * g
    };
    let energy = |w: f64| {
        let q = ellipsoid_quantities(a, w);
        let f = tf.f(w);
        let (g, dg) = tf.g(f);
        let df = tf.df(w);
        let grad2 = (1.0 - w) * (1.0 + w) / delta_a(a, w) * df * df;
        (q.h2 * (f * f + g * g) + grad2 * (1.0 + dg * dg)) * q.area_density
    };
    let over_sphere = |h: &dyn Fn(f64) -> f64, tol: f64| -> Result<QuadratureResult> {
        let left = integrate_adaptive(h, -1.0, 0.0, 0.5 * tol)?;
        let right = integrate_adaptive(h, 0.0, 1.0, 0.5 * tol)?;
        Ok(left.combine(right))
    };
    let den = over_sphere(&|w| mass(w) * delta_a(a, w).sqrt(), 0.25 * tol)?;
    let num = over_sphere(&energy, 0.25 * tol * den.value.abs().min(1.0))?;
    let (v, err) = ratio_with_error(num.value, num.error_estimate, den.value, den.error_estimate)?;
    Ok(BoundValue::with_error(BoundKind::UpperT1, v, err))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.5 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("beta must exceed 1/2, got {beta}")))
    }
}

/// The quotient for `f = Delta_a^beta`, `G = 0`, using the closed-form
/// gradient `|grad f|^2 = 4 beta^2 (1-a^2)^2 Delta^{2 beta - 3} w^2 (1 - w^2)`.
pub fn ellipsoid_beta_bound(a: f64, beta: f64, tol: f64) -> Result<BoundValue> {
    let e = EllipsoidParam::new(a)?;
    check_beta(beta)?;
    check_tol(tol)?;
    let a = e.a();
    // Work with Delta / s, s = max(1, a^2), so that large a and beta stay in range.
    let s = (a * a).max(1.0);
    let one_minus_a2 = (1.0 - a) * (1.0 + a);
    let c1 = a * a / (4.0 * s);
    let c2 = 4.0 * beta * beta * (one_minus_a2 / s).powi(2) / s;
    let den = integrate_adaptive(|w| (delta_a(a, w) / s).powf(2.0 * beta + 0.5), 0.0, 1.0, 0.25 * tol)?;
    let num = integrate_adaptive(
        |w| {
            let d = delta_a(a, w) / s;
            let p = d.powf(2.0 * beta - 2.5);
            c1 * (d + 1.0 / s).powi(2) * p + c2 * p * w * w * (1.0 - w) * (1.0 + w)
        },
        0.0,
        1.0,
        0.25 * tol * den.value.min(1.0),
    )?;
    let (v, err) = ratio_with_error(num.value, num.error_estimate, den.value, den.error_estimate)?;
    Ok(BoundValue::with_error(BoundKind::UpperT1, v, err))
}

/// `f(a)`: `-artanh(s)/s` with `s = sqrt(1 - a^2)` for `a < 1`,
/// `-arctan(t)/t` with `t = sqrt(a^2 - 1)` for `a > 1`, and `-1` at `a = 1`.
pub(crate) fn beta1_aux(a: f64) -> f64 {
    let m = (1.0 - a) * (1.0 + a);
    if m.abs() < 1e-3 {
        // -sum m^k / (2k + 1), shared by both branches.
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..12 {
            sum += term / (2 * k + 1) as f64;
            term *= m;
        }
        -sum
    } else if m > 0.0 {
        let s = m.sqrt();
        -s.atanh() / s
    } else {
        let t = (-m).sqrt();
        -t.atan() / t
    }
}

/// Exact value of the `beta = 1` quotient.
pub fn ellipsoid_beta1_closed_form(a: f64) -> Result<BoundValue> {
    EllipsoidParam::new(a)?;
    let f = beta1_aux(a);
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let num = (2.0 + 13.0 * a2 / 8.0 + 3.0 * a4 / 16.0) + (3.5 * a2 - 1.5 * a4 - 3.0 * a6 / 16.0) * f;
    let den = (1.0 / 3.0 + 5.0 * a2 / 12.0 + 5.0 * a4 / 8.0) - 5.0 * a6 * f / 8.0;
    Ok(BoundValue::exact(BoundKind::UpperT1Beta1Closed, num / den))
}

/// `lim sup_{a -> 0}` of the beta quotient: `2 beta (2 beta + 1) / (2 beta - 1)`.
pub fn beta_limit_small_a(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(2.0 * beta * (2.0 * beta + 1.0) / (2.0 * beta - 1.0))
}

/// `lim_{a -> inf}` of the beta quotient:
/// `(1/4) int_0^1 (1-w^2)^{2 beta - 1/2} / int_0^1 (1-w^2)^{2 beta + 1/2}`.
pub fn beta_limit_large_a(beta: f64, tol: f64) -> Result<f64> {
    check_beta(beta)?;
    check_tol(tol)?;
    let num = integrate_adaptive(|w| ((1.0 - w) * (1.0 + w)).powf(2.0 * beta - 0.5), 0.0, 1.0, tol)?;
    let den = integrate_adaptive(|w| ((1.0 - w) * (1.0 + w)).powf(2.0 * beta + 0.5), 0.0, 1.0, tol)?;
    Ok(0.25 * num.value / den.value)
}
