//! Closed forms for tubes of radius `r` around a circle of curvature
//! `kappa`, written in `a = r kappa`.

use std::f64::consts::PI;

use super::{check_tol, BoundKind, BoundValue};
use crate::error::{Error, Result};
use crate::geometry::{tube_lattice, SpinStructure, TubeParam};
use crate::quadrature::integrate_periodic_converged;

fn eps(s: SpinStructure) -> Result<(f64, f64)> {
    if s.is_trivial() {
        return Err(Error::TrivialSpin);
    }
    let (e1, e2) = s.eps();
    Ok((e1 as f64, e2 as f64))
}

/// `int h^-2 dT / int h^2 dT = (1 - a^2)^{-3/2}`.
pub fn tube_ratio(t: &TubeParam) -> f64 {
    t.cofactor().powi(-3)
}

/// `(1/4)(kappa^2 eps1 + (1 - a^2) eps2 / r^2)(1 - a^2)^{-3/2}`.
pub fn tube_bound_star(t: &TubeParam, s: SpinStructure) -> Result<BoundValue> {
    let (e1, e2) = eps(s)?;
    let k = t.kappa();
    let r = t.r();
    let one_minus = t.cofactor().powi(2);
    let v = 0.25 * (k * k * e1 + one_minus * e2 / (r * r)) * tube_ratio(t);
    Ok(BoundValue::exact(BoundKind::TubeStar, v))
}

/// `pi^2 (a eps1 + (1 - a^2) eps2 / a)(1 - a^2)^{-3/2}`, i.e. the previous
/// bound times `4 pi^2 r / kappa`.
pub fn tube_bound_star_normalized(t: &TubeParam, s: SpinStructure) -> Result<BoundValue> {
    let (e1, e2) = eps(s)?;
    let a = t.rk();
    let one_minus = t.cofactor().powi(2);
    let v = PI * PI * (a * e1 + one_minus * e2 / a) * tube_ratio(t);
    Ok(BoundValue {
        normalized: true,
        ..BoundValue::exact(BoundKind::TubeStar, v)
    })
}

/// `pi^2 (a eps1 + (1 - a^2) eps2 / a) / sqrt(1 - a^2) + (pi^2 / a)(1 - sqrt(1 - a^2))`,
/// volume-normalized.
pub fn tube_bound_dstar(t: &TubeParam, s: SpinStructure) -> Result<BoundValue> {
    let (e1, e2) = eps(s)?;
    let a = t.rk();
    let c = t.cofactor();
    let v = PI * PI * (a * e1 + c * c * e2 / a) / c + PI * PI / a * (1.0 - c);
    Ok(BoundValue {
        normalized: true,
        ..BoundValue::exact(BoundKind::TubeDstar, v)
    })
}

/// `int H^2 dM = pi^2 / (a sqrt(1 - a^2))`, volume-normalized.
pub fn tube_h2_closed_form(t: &TubeParam) -> BoundValue {
    BoundValue {
        normalized: true,
        ..BoundValue::exact(BoundKind::TubeH2, PI * PI / (t.rk() * t.cofactor()))
    }
}

/// Prefactor of the trivial-structure tube bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrivialPrefactor {
    /// `min(2 kappa^2, 1/r^2)`.
    #[default]
    Nominal,
    /// `4 pi^2 min |v*|^2 = min(kappa^2, (1 - a^2)/r^2)` for the tube lattice.
    Lattice,
}

/// `min(2 kappa^2, 1/r^2) int (1 - a cos)^-4 / int (1 - a cos)^-2`.
pub fn tube_trivial_bound(t: &TubeParam, tol: f64) -> Result<BoundValue> {
    tube_trivial_bound_with(t, tol, TrivialPrefactor::Nominal)
}

pub fn tube_trivial_bound_with(t: &TubeParam, tol: f64, factor: TrivialPrefactor) -> Result<BoundValue> {
    check_tol(tol)?;
    let a = t.rk();
    let k = t.kappa();
    let r = t.r();
    let pre = match factor {
        TrivialPrefactor::Nominal => (2.0 * k * k).min(1.0 / (r * r)),
        TrivialPrefactor::Lattice => 4.0 * PI * PI * tube_lattice(t).dual().min_norm_sq(),
    };
    let num = integrate_periodic_converged(|p| (1.0 - a * p.cos()).powi(-4), 2.0 * PI, 0.1 * tol)?;
    let den = integrate_periodic_converged(|p| (1.0 - a * p.cos()).powi(-2), 2.0 * PI, 0.1 * tol)?;
    let ratio = num.value / den.value;
    let err = pre * (num.error_estimate + ratio * den.error_estimate) / den.value;
    Ok(BoundValue::with_error(BoundKind::TubeTrivial, pre * ratio, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::extrinsic::tube_h2_integral;
    use crate::bounds::torus::{torus_curvature_bound, torus_spin_bound_gradient, torus_spin_bound_ratio};
    use crate::conformal::ConformalFactorField;

    fn tube(kappa: f64, r: f64) -> TubeParam {
        TubeParam::new(kappa, r).unwrap()
    }

    fn spin(e1: u8, e2: u8) -> SpinStructure {
        SpinStructure::new(e1, e2).unwrap()
    }

    #[test]
    fn ratio_matches_periodic_quadrature() {
        for i in 1..10 {
            let a = i as f64 / 10.0;
            let t = tube(1.0, a);
            let q = integrate_periodic_converged(|p| (1.0 - a * p.cos()).powi(-2), 2.0 * PI, 1e-13).unwrap();
            assert!((q.value / (2.0 * PI) - tube_ratio(&t)).abs() < 1e-10);
        }
    }

    #[test]
    fn normalized_star_is_star_times_volume() {
        for (k, r) in [(1.0, 0.5), (3.0, 0.01), (0.2, 4.0)] {
            let t = tube(k, r);
            for s in [spin(1, 0), spin(0, 1), spin(1, 1)] {
                let a = tube_bound_star(&t, s)
                    .unwrap()
                    .to_normalized(crate::geometry::tube_volume(&t))
                    .value;
                let b = tube_bound_star_normalized(&t, s).unwrap().value;
                assert!((a - b).abs() < 1e-12 * b);
            }
        }
        assert!(matches!(
            tube_bound_star(&tube(1.0, 0.5), SpinStructure::TRIVIAL),
            Err(Error::TrivialSpin)
        ));
    }

    #[test]
    fn case_examples() {
        // eps = (1, 0) vanishes as a -> 0.
        for a in [1e-2, 1e-3, 1e-4] {
            let t = tube(1.0, a);
            let star = tube_bound_star_normalized(&t, spin(1, 0)).unwrap().value;
            let dstar = tube_bound_dstar(&t, spin(1, 0)).unwrap().value;
            assert!(star < 2.0 * PI * PI * a);
            assert!(dstar < 2.0 * PI * PI * a);
        }
        // eps = (0, 1): the gradient-form bound collapses to pi^2 / a.
        for a in [0.1, 0.5, 0.999] {
            let t = tube(2.0, a / 2.0);
            let d = tube_bound_dstar(&t, spin(0, 1)).unwrap().value;
            assert!((d - PI * PI / a).abs() < 1e-12 * d);
            let s = tube_bound_star_normalized(&t, spin(0, 1)).unwrap().value;
            assert!((s - PI * PI / (a * t.cofactor())).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn extrinsic_dominates_for_induced_structure() {
        for i in 1..100 {
            let a = i as f64 / 100.0;
            let t = tube(1.0, a);
            let h2 = tube_h2_closed_form(&t).value;
            let star = tube_bound_star_normalized(&t, spin(1, 1)).unwrap().value;
            let dstar = tube_bound_dstar(&t, spin(1, 1)).unwrap().value;
            assert!(h2 <= star && h2 <= dstar, "a={a}");
        }
    }

    #[test]
    fn h2_closed_form_matches_quadrature() {
        let t = tube(1.3, 0.5);
        let q = tube_h2_integral(&t, 1e-11).unwrap().value;
        assert!((q - tube_h2_closed_form(&t).value).abs() < 1e-8);
    }

    #[test]
    fn closed_forms_match_torus_paths() {
        for (k, r) in [(1.0, 0.5), (2.0, 0.2), (0.5, 1.4)] {
            let t = tube(k, r);
            let lat = tube_lattice(&t);
            let h = ConformalFactorField::tube(t);
            for s in [spin(1, 0), spin(0, 1), spin(1, 1)] {
                let star = tube_bound_star(&t, s).unwrap().value;
                let ratio = torus_spin_bound_ratio(&h, &lat, s, 1e-12).unwrap().value;
                assert!((star - ratio).abs() < 1e-8, "{star} vs {ratio}");
                let dstar = tube_bound_dstar(&t, s).unwrap().value;
                let grad = torus_spin_bound_gradient(&h, &lat, s, 1e-12).unwrap().value;
                assert!((dstar - grad).abs() < 1e-8, "{dstar} vs {grad}");
                let curv = torus_curvature_bound(&h, &lat, s, 1e-12).unwrap().value;
                assert!((dstar - curv).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn gradient_energy_closed_form() {
        let t = tube(1.0, 0.6);
        let lat = tube_lattice(&t);
        let h = ConformalFactorField::tube(t);
        let e = crate::bounds::torus::torus_dirichlet_energy(&h, &lat, 1e-12).unwrap();
        let a = t.rk();
        assert!((e - PI * PI / a * (1.0 - t.cofactor())).abs() < 1e-8);
    }

    /// `int_0^{2 pi} (1 - a cos)^{-m}` from the binomial series and
    /// `int cos^{2j} = 2 pi binom(2j, j) / 4^j`.
    fn series_integral(a: f64, m: u32) -> f64 {
        let mut total = 0.0;
        let mut j = 0u32;
        loop {
            let n = 2 * j;
            // binom(n + m - 1, m - 1)
            let mut coef = 1.0;
            for i in 1..m {
                coef *= (n + i) as f64 / i as f64;
            }
            let mut central = 1.0;
            for i in 0..j {
                central *= (2 * i + 1) as f64 / (2 * i + 2) as f64;
            }
            let term = coef * a.powi(n as i32) * 2.0 * PI * central;
            total += term;
            if term < 1e-18 * total {
                return total;
            }
            j += 1;
        }
    }

    #[test]
    fn trivial_bound_ratio_and_limits() {
        let t = tube(1.0, 0.5);
        let b = tube_trivial_bound(&t, 1e-12).unwrap().value;
        let oracle = series_integral(0.5, 4) / series_integral(0.5, 2);
        assert!((b - 2.0 * oracle).abs() < 1e-10, "{b} vs {oracle}");
        // kappa -> 0 with r fixed.
        let small = tube_trivial_bound(&tube(1e-4, 1.0), 1e-12).unwrap().value;
        assert!(small < 1e-7);
        // r -> 0 with kappa fixed approaches 2 kappa^2.
        let k = 1.5;
        let thin = tube_trivial_bound(&tube(k, 1e-5), 1e-12).unwrap().value;
        assert!(thin <= 2.0 * k * k * (1.0 + 1e-8));
        let lat = tube_trivial_bound_with(&tube(k, 1e-5), 1e-12, TrivialPrefactor::Lattice)
            .unwrap()
            .value;
        assert!((lat - k * k).abs() < 1e-6);
    }
}
