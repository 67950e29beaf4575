//! Conformal uniformizations of the ellipsoid and of the tube.
//!
//! The ellipsoid is reached from the round sphere by a rotationally symmetric
//! map `(x, phi) -> (w(x), phi)` where `x` is the stereographic radius. The
//! profile obeys the separable equation
//!
//! ```text
//! Delta_a^{1/2}(w) / (1 - w^2) * dw/dx = -1/x,   w(0) = 1, w(inf) = -1.
//! ```
//!
//! With `w = tanh y` and `tau = -ln x` it integrates to
//! `tau = T(y) = int_0^y Delta_a^{1/2}(tanh s) ds`, whose integrand is bounded
//! between `min(1,a)` and `max(1,a)`. The solver tabulates `T` on a uniform
//! `y` grid and inverts it with safeguarded Newton steps, so `w(1) = 0` holds
//! by construction and `1 - w^2 = sech^2 y` keeps full relative precision
//! near the poles.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::TubeParam;
use crate::quadrature::{integrate_adaptive, integrate_semi_infinite, QuadratureResult};

const NODE_STEP: f64 = 0.25;
const MIN_TABLE_TAU: f64 = 40.0;
const MAX_NODES: usize = 1_000_000;

/// `ln cosh x` without overflow.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
}

/// `Delta_a(tanh y)^{1/2}` written as `sqrt(tanh^2 y + a^2 sech^2 y)`.
fn radial_speed(a: f64, y: f64) -> f64 {
    let th = y.tanh();
    let sech = 1.0 / y.cosh();
    (th * th + a * a * sech * sech).sqrt()
}

/// Profile value at one point, with derived quantities kept accurate near
/// the poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub w: f64,
    /// `1 - w^2`, computed as `sech^2 y`.
    pub one_minus_w2: f64,
    /// `Delta_a(w)^{1/2}`.
    pub sqrt_delta: f64,
    /// `artanh |w|`.
    pub y: f64,
}

impl ProfilePoint {
    /// `1 - |w| / Delta_a^{1/2}(w)`, using `Delta - w^2 = a^2 (1 - w^2)`.
    pub fn defect(&self, a: f64) -> f64 {
        let aw = self.w.abs();
        a * a * self.one_minus_w2 / (self.sqrt_delta * (self.sqrt_delta + aw))
    }
}

/// Solution `w_a(x)` of the ellipsoid uniformization equation.
///
/// Immutable after construction; evaluation is on demand.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    a: f64,
    tol: f64,
    /// `T(k * NODE_STEP)` for `k = 0, 1, ...`.
    table: Vec<f64>,
}

pub fn solve_profile(a: f64, tol: f64) -> Result<ProfileSolution> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!(
            "ellipsoid parameter a must be positive, got {a}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let seg_tol = tol * 1e-3;
    let mut table = vec![0.0];
    let mut y = 0.0;
    let mut acc = 0.0;
    // Extend until the integrand has settled at its limit 1 and the table
    // covers x down to e^-40.
    while acc < MIN_TABLE_TAU || (radial_speed(a, y) - 1.0).abs() > 1e-9 {
        if table.len() >= MAX_NODES {
            return Err(Error::Nonconvergence {
                lo: 0.0,
                hi: y,
                error: f64::INFINITY,
            });
        }
        let seg = integrate_adaptive(|s| radial_speed(a, s), y, y + NODE_STEP, seg_tol)?;
        acc += seg.value;
        y += NODE_STEP;
        table.push(acc);
    }
    Ok(ProfileSolution { a, tol, table })
}

impl ProfileSolution {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `T(y) - T(y0)` for `y >= y0`.
    fn partial(&self, y0: f64, y: f64) -> Result<f64> {
        let a = self.a;
        Ok(integrate_adaptive(|s| radial_speed(a, s), y0, y, self.tol * 1e-3)?.value)
    }

    /// Solve `T(y) = tau` for `tau >= 0`.
    fn invert(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::RootBracket { target: tau });
        }
        let last = self.table.len() - 1;
        let k = self.table.partition_point(|&t| t <= tau).saturating_sub(1);
        let base_y = k as f64 * NODE_STEP;
        let base_t = self.table[k];
        let (mut lo, mut hi) = if k < last {
            (base_y, base_y + NODE_STEP)
        } else {
            let slow = self.a.min(1.0);
            (base_y, base_y + (tau - base_t) / slow + NODE_STEP)
        };
        let target_tol = self.tol * 1e-2;

        let mut y = (base_y + (tau - base_t) / radial_speed(self.a, base_y)).clamp(lo, hi);
        for _ in 0..200 {
            let g = base_t + self.partial(base_y, y)? - tau;
            if g.abs() <= target_tol {
                return Ok(y);
            }
            if g < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let mut next = y - g / radial_speed(self.a, y);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::RootBracket { target: tau })
    }

    fn point_from_y(&self, y: f64, sign: f64) -> ProfilePoint {
        let sech = 1.0 / y.cosh();
        ProfilePoint {
            w: sign * y.tanh(),
            one_minus_w2: sech * sech,
            sqrt_delta: radial_speed(self.a, y),
            y,
        }
    }

    /// Profile at `x > 0`; `x > 1` uses `w(x) = -w(1/x)`.
    pub fn eval(&self, x: f64) -> Result<ProfilePoint> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("profile argument must be positive, got {x}")));
        }
        self.eval_log(x.ln())
    }

    /// Profile at `x = e^c`.
    pub fn eval_log(&self, c: f64) -> Result<ProfilePoint> {
        let y = self.invert(c.abs())?;
        Ok(self.point_from_y(y, if c <= 0.0 { 1.0 } else { -1.0 }))
    }

    pub fn w(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.w)
    }

    /// `log h_a` in the cylinder coordinate `c = ln x`:
    /// `h_a^4 = (1 - w^2) cosh^2 c`.
    pub fn log_h_cylinder(&self, c: f64) -> Result<f64> {
        let p = self.eval_log(c)?;
        Ok(0.5 * (ln_cosh(c) - ln_cosh(p.y)))
    }

    /// `d(log h_a)/dc = (tanh c + w / Delta^{1/2}) / 2`.
    pub fn dlog_h_cylinder(&self, c: f64) -> Result<f64> {
        let p = self.eval_log(c)?;
        // tanh c + w/D, arranged to cancel exactly where both are near -+1.
        let s = c.signum();
        let one_minus_tanh = 2.0 / (1.0 + (2.0 * c.abs()).exp());
        Ok(0.5 * s * (p.defect(self.a) - one_minus_tanh))
    }
}

/// `h_a^4(x) = (1 - w_a^2(x)) (1 + x^2)^2 / (4 x^2)`.
pub fn conformal_factor_h4(sol: &ProfileSolution, x: f64) -> Result<f64> {
    let p = sol.eval(x)?;
    let q = (1.0 + x * x) / (2.0 * x);
    Ok(p.one_minus_w2 * q * q)
}

/// Dirichlet energy of `log h_a` on the round sphere, in the symmetric
/// reduced form `pi int_0^1 (1/x) (w/Delta^{1/2}(w) + (x^2-1)/(x^2+1))^2 dx`.
///
/// Integrated in `tau = -ln x` over `[0, inf)`, where the integrand is
/// `pi ((1 - tanh tau) - (1 - w/Delta^{1/2}))^2`; for large `a` the mass sits
/// at `x ~ exp(-pi a / 2)`, far below what bisection in `x` can resolve.
pub fn i1(a: f64, tol: f64) -> Result<QuadratureResult> {
    if a == 1.0 {
        // Integrand vanishes identically.
        return Ok(QuadratureResult::ZERO);
    }
    let sol = solve_profile(a, tol * 1e-2)?;
    let failure = Cell::new(None);
    let integrand = |tau: f64| match sol.eval_log(-tau) {
        Ok(p) => {
            let one_minus_tanh = 2.0 / (1.0 + (2.0 * tau).exp());
            let diff = one_minus_tanh - p.defect(a);
            PI * diff * diff
        }
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let result = integrate_semi_infinite(integrand, 0.0, tol);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    result
}

/// The three-part split of `I_1` obtained by expanding
/// `((w/D - 1) + 2x^2/(1+x^2))^2 / x`:
/// `4 pi int x^3/(1+x^2)^2 + 4 pi int (w/D - 1) x/(1+x^2) dx + pi int (1/x)(w/D - 1)^2 dx`.
#[derive(Debug, Clone, Copy)]
pub struct I1Split {
    pub rational: f64,
    pub linear: f64,
    pub quadratic: f64,
}

impl I1Split {
    pub fn total(&self) -> f64 {
        self.rational + self.linear + self.quadratic
    }
}

pub fn i1_split(a: f64, tol: f64) -> Result<I1Split> {
    let sol = solve_profile(a, tol * 1e-2)?;
    let rational = 4.0 * PI * (0.5 * std::f64::consts::LN_2 - 0.25);
    let failure = Cell::new(None);
    let defect = |tau: f64| match sol.eval_log(-tau) {
        Ok(p) => p.defect(a),
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    // x/(1+x^2) dx = x^2/(1+x^2) d(ln x).
    let weight = |t: f64| {
        let q = (-2.0 * t).exp();
        q / (1.0 + q)
    };
    let linear = -4.0 * PI * integrate_semi_infinite(|t| defect(t) * weight(t), 0.0, tol)?.value;
    let quadratic = PI * integrate_semi_infinite(|t| defect(t).powi(2), 0.0, tol)?.value;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(I1Split {
        rational,
        linear,
        quadratic,
    })
}

fn tube_half_angle(t: &TubeParam, theta: f64) -> f64 {
    let rk = t.rk();
    ((1.0 - rk).sqrt() * theta.sin()).atan2((1.0 + rk).sqrt() * theta.cos())
}

/// `theta = sqrt(1 - r^2 kappa^2) psi / (2 r)`, which runs over `[0, pi]`
/// as `psi` runs over one period.
fn tube_theta(t: &TubeParam, psi: f64) -> f64 {
    t.cofactor() * psi / (2.0 * t.r())
}

fn check_psi(t: &TubeParam, psi: f64) -> Result<()> {
    let period = t.conformal_period();
    if psi >= 0.0 && psi <= period {
        Ok(())
    } else {
        Err(Error::invalid(format!("psi = {psi} outside [0, {period}]")))
    }
}

/// Angle `phi(psi)` of the conformal tube coordinate, continuous and
/// increasing from `phi(0) = 0` to `phi(A) = 2 pi`.
pub fn tube_phi(t: &TubeParam, psi: f64) -> Result<f64> {
    check_psi(t, psi)?;
    Ok(tube_phi_unwrapped(t, psi))
}

/// [`tube_phi`] continued to all of `R` with `phi(psi + A) = phi(psi) + 2 pi`.
pub fn tube_phi_unwrapped(t: &TubeParam, psi: f64) -> f64 {
    let period = t.conformal_period();
    let turns = (psi / period).floor();
    let local = psi - turns * period;
    let theta = tube_theta(t, local).clamp(0.0, PI);
    // atan2 of a nonnegative sine stays in [0, pi]; at theta = pi force the top.
    let half = if theta >= PI { PI } else { tube_half_angle(t, theta) };
    2.0 * PI * turns + 2.0 * half
}

/// Conformal factor `h^2(psi)` of the tube in its pole-free form
/// `(1 - r^2 kappa^2) / (1 + r kappa cos(2 theta))`.
pub fn tube_h2(t: &TubeParam, psi: f64) -> Result<f64> {
    check_psi(t, psi)?;
    Ok(tube_h2_periodic(t, psi))
}

/// [`tube_h2`] without the range check; periodic with period `A`.
pub fn tube_h2_periodic(t: &TubeParam, psi: f64) -> f64 {
    let rk = t.rk();
    (1.0 - rk) * (1.0 + rk) / (1.0 + rk * (2.0 * tube_theta(t, psi)).cos())
}

/// `h^2 = 1 - r kappa cos(phi(psi))`.
pub fn tube_h2_via_phi(t: &TubeParam, psi: f64) -> Result<f64> {
    Ok(1.0 - t.rk() * tube_phi(t, psi)?.cos())
}

/// `h^2 = (1 - r^2 kappa^2)(1 + T^2) / ((1 + r kappa) + (1 - r kappa) T^2)`
/// with `T = tan(theta)`; singular where `theta = pi/2`.
pub fn tube_h2_tangent_form(t: &TubeParam, psi: f64) -> Result<f64> {
    check_psi(t, psi)?;
    let rk = t.rk();
    let tt = tube_theta(t, psi).tan().powi(2);
    Ok((1.0 - rk * rk) * (1.0 + tt) / ((1.0 + rk) + (1.0 - rk) * tt))
}
