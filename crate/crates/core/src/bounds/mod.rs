//! Upper and lower bounds for the first eigenvalue `lambda_1^2` of the
//! squared Dirac operator.
//!
//! Values are in units of `1/length^2` unless [`BoundValue::normalized`] is
//! set, in which case they carry `lambda_1^2 * vol` (dimensionless).

mod extrinsic;
mod sphere;
mod torus;
mod tube;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use extrinsic::{
    beta_limit_large_a, beta_limit_small_a, classical_h2_bound, ellipsoid_beta1_closed_form, ellipsoid_beta_bound,
    extrinsic_bound_t1, lower_bound_genus0, Surface, TestFunctionPair,
};
pub use sphere::{conformal_sphere_bound, intrinsic_sphere_bound, intrinsic_sphere_bound_ellipsoid};
pub use torus::{
    curvature_log_integral, flat_spin_constant, torus_curvature_bound, torus_dirichlet_energy,
    torus_spin_bound_gradient, torus_spin_bound_gradient_with, torus_spin_bound_ratio, torus_trivial_bound,
    torus_volume, ConstantForm, FlatSpinConstant, TORUS_MAX_RESOLUTION,
};
pub use tube::{
    tube_bound_dstar, tube_bound_star, tube_bound_star_normalized, tube_h2_closed_form, tube_ratio, tube_trivial_bound,
    tube_trivial_bound_with, TrivialPrefactor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    LowerLb,
    UpperH2,
    UpperT1,
    UpperT1Beta1Closed,
    UpperT2,
    UpperT3,
    UpperT4Star,
    UpperT4Dstar,
    UpperT4Curv,
    TubeStar,
    TubeDstar,
    TubeH2,
    TubeTrivial,
}

impl BoundKind {
    pub const ALL: [BoundKind; 13] = [
        BoundKind::LowerLb,
        BoundKind::UpperH2,
        BoundKind::UpperT1,
        BoundKind::UpperT1Beta1Closed,
        BoundKind::UpperT2,
        BoundKind::UpperT3,
        BoundKind::UpperT4Star,
        BoundKind::UpperT4Dstar,
        BoundKind::UpperT4Curv,
        BoundKind::TubeStar,
        BoundKind::TubeDstar,
        BoundKind::TubeH2,
        BoundKind::TubeTrivial,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BoundKind::LowerLb => "LOWER_LB",
            BoundKind::UpperH2 => "UPPER_H2",
            BoundKind::UpperT1 => "UPPER_T1",
            BoundKind::UpperT1Beta1Closed => "UPPER_T1_BETA1_CLOSED",
            BoundKind::UpperT2 => "UPPER_T2",
            BoundKind::UpperT3 => "UPPER_T3",
            BoundKind::UpperT4Star => "UPPER_T4_STAR",
            BoundKind::UpperT4Dstar => "UPPER_T4_DSTAR",
            BoundKind::UpperT4Curv => "UPPER_T4_CURV",
            BoundKind::TubeStar => "TUBE_STAR",
            BoundKind::TubeDstar => "TUBE_DSTAR",
            BoundKind::TubeH2 => "TUBE_H2",
            BoundKind::TubeTrivial => "TUBE_TRIVIAL",
        }
    }

    pub fn is_lower(self) -> bool {
        self == BoundKind::LowerLb
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_uppercase().replace('-', "_");
        BoundKind::ALL
            .into_iter()
            .find(|k| k.label() == wanted)
            .ok_or_else(|| Error::invalid(format!("unknown bound kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub value: f64,
    /// Absolute error estimate from the quadratures involved; 0 for closed forms.
    pub error: f64,
    /// `value` is `lambda_1^2 * vol` rather than `lambda_1^2`.
    pub normalized: bool,
}

impl BoundValue {
    pub fn exact(kind: BoundKind, value: f64) -> Self {
        BoundValue {
            kind,
            value,
            error: 0.0,
            normalized: false,
        }
    }

    pub fn with_error(kind: BoundKind, value: f64, error: f64) -> Self {
        BoundValue {
            kind,
            value,
            error,
            normalized: false,
        }
    }

    /// Multiply by `vol`; no-op if already normalized.
    pub fn to_normalized(self, vol: f64) -> Self {
        if self.normalized {
            return self;
        }
        BoundValue {
            value: self.value * vol,
            error: self.error * vol,
            normalized: true,
            ..self
        }
    }

    /// Divide by `vol`; no-op if not normalized.
    pub fn to_unnormalized(self, vol: f64) -> Self {
        if !self.normalized {
            return self;
        }
        BoundValue {
            value: self.value / vol,
            error: self.error / vol,
            normalized: false,
            ..self
        }
    }
}

/// `num / den` with first-order error propagation.
pub(crate) fn ratio_with_error(num: f64, num_err: f64, den: f64, den_err: f64) -> Result<(f64, f64)> {
    if !(den.abs() > 0.0) || !den.is_finite() {
        return Err(Error::invalid(format!(
            "vanishing denominator {den:e} in Rayleigh quotient"
        )));
    }
    let r = num / den;
    Ok((r, (num_err + r.abs() * den_err) / den.abs()))
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("tolerance must be positive, got {tol}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_labels_round_trip() {
        for k in BoundKind::ALL {
            assert_eq!(k.label().parse::<BoundKind>().unwrap(), k);
        }
        assert_eq!("upper-t4-star".parse::<BoundKind>().unwrap(), BoundKind::UpperT4Star);
        assert!("UPPER_T9".parse::<BoundKind>().is_err());
    }

    #[test]
    fn normalization_round_trip() {
        let b = BoundValue::with_error(BoundKind::TubeStar, 2.0, 0.1);
        let n = b.to_normalized(3.0);
        assert!(n.normalized && n.value == 6.0 && (n.error - 0.3).abs() < 1e-15);
        assert_eq!(n.to_normalized(3.0), n);
        let back = n.to_unnormalized(3.0);
        assert!(!back.normalized && back.value == 2.0 && (back.error - 0.1).abs() < 1e-15);
    }
}
