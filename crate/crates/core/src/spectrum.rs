//! Dirac spectrum of a flat torus `R^2 / Gamma`.
//!
//! For the spin structure `(eps1, eps2)` the eigenvalues of `D^2` are
//! `4 pi^2 |gamma* + (eps1 v1* + eps2 v2*)/2|^2`, `gamma*` in the dual
//! lattice, each with multiplicity 2.

use std::f64::consts::PI;

use crate::bounds::flat_spin_constant;
use crate::error::{Error, Result};
use crate::geometry::{Lattice2, SpinStructure};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    /// The smallest `count` eigenvalues of `D^2`, ascending, repeated by multiplicity.
    pub eigenvalue_squares: Vec<f64>,
    pub structure: SpinStructure,
    pub lattice: Lattice2,
}

impl SpectrumSlice {
    /// Smallest strictly positive value (`lambda_1^2`).
    pub fn first_positive(&self) -> Option<f64> {
        let scale = self.eigenvalue_squares.last().copied().unwrap_or(0.0).max(1.0);
        self.eigenvalue_squares.iter().copied().find(|&v| v > 1e-12 * scale)
    }

    /// Number of (numerically) zero eigenvalues.
    pub fn kernel_dimension(&self) -> usize {
        let scale = self.eigenvalue_squares.last().copied().unwrap_or(0.0).max(1.0);
        self.eigenvalue_squares.iter().filter(|&&v| v <= 1e-12 * scale).count()
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Squared norms `|m v1* + n v2* + shift|^2` with `|.| <= radius`.
fn shifted_norms(dual: &Lattice2, shift: [f64; 2], radius: f64) -> Vec<f64> {
    // The coefficient of v1* in x is <x, v1>, so |m + e1/2| <= radius |v1|.
    let primal = dual.dual();
    let half = [dot(shift, primal.v1), dot(shift, primal.v2)];
    let r1 = radius * dot(primal.v1, primal.v1).sqrt();
    let r2 = radius * dot(primal.v2, primal.v2).sqrt();
    let r_sq = radius * radius;
    let mut out = Vec::new();
    for m in (-r1 - half[0]).floor() as i64..=(r1 - half[0]).ceil() as i64 {
        for n in (-r2 - half[1]).floor() as i64..=(r2 - half[1]).ceil() as i64 {
            let p = dual.point(m as f64 + half[0], n as f64 + half[1]);
            let q = dot(p, p);
            if q <= r_sq {
                out.push(q);
            }
        }
    }
    out
}

/// The `count` smallest eigenvalues of `D^2` (with multiplicity).
pub fn flat_spectrum(lat: &Lattice2, s: SpinStructure, count: usize) -> Result<SpectrumSlice> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let lat = Lattice2::new(lat.v1, lat.v2)?;
    let dual = lat.dual();
    let (e1, e2) = s.eps();
    let shift = dual.point(0.5 * e1 as f64, 0.5 * e2 as f64);
    let need = count.div_ceil(2);
    let mut radius = dual.min_norm_sq().sqrt();
    let mut prev: Option<Vec<f64>> = None;
    loop {
        let mut norms = shifted_norms(&dual, shift, radius);
        norms.sort_by(f64::total_cmp);
        // Everything inside the disc is enumerated, so the first `need`
        // values are final once the disc holds that many.
        if norms.len() >= need {
            norms.truncate(need);
            // One extra doubling confirms stability against boundary round-off.
            if prev.as_ref() == Some(&norms) {
                let eigenvalue_squares = norms.iter().flat_map(|&q| [4.0 * PI * PI * q; 2]).take(count).collect();
                return Ok(SpectrumSlice {
                    eigenvalue_squares,
                    structure: s,
                    lattice: lat,
                });
            }
            prev = Some(norms);
        }
        radius *= 2.0;
    }
}

/// Comparison of the flat `lambda_1^2 vol` with the constant used in the
/// gradient-form bound for nontrivial structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewReport {
    /// Brute-force `lambda_1^2 vol(T, g_0)`.
    pub spectral: f64,
    pub constant_squared: f64,
    pub constant_unsquared: Option<f64>,
    /// The brute-force value lies below the squared constant.
    pub undercuts: bool,
}

pub fn skew_lattice_report(lat: &Lattice2, s: SpinStructure) -> Result<SkewReport> {
    let c = flat_spin_constant(lat, s)?;
    let slice = flat_spectrum(lat, s, 2)?;
    let spectral = slice.eigenvalue_squares[0] * lat.covolume();
    Ok(SkewReport {
        spectral,
        constant_squared: c.squared,
        constant_unsquared: c.unsquared,
        undercuts: spectral < c.squared * (1.0 - 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spin(e1: u8, e2: u8) -> SpinStructure {
        SpinStructure::new(e1, e2).unwrap()
    }

    #[test]
    fn square_torus_trivial_structure() {
        let lat = Lattice2::square(2.0 * PI).unwrap();
        let s = flat_spectrum(&lat, SpinStructure::TRIVIAL, 12).unwrap();
        assert_eq!(s.kernel_dimension(), 2);
        assert_eq!(&s.eigenvalue_squares[..2], &[0.0, 0.0]);
        assert!((s.first_positive().unwrap() - 1.0).abs() < 1e-12);
        // Four neighbours at distance 1/(2 pi), two spinor states each.
        assert_eq!(
            s.eigenvalue_squares[2..10]
                .iter()
                .filter(|v| (**v - 1.0).abs() < 1e-12)
                .count(),
            8
        );
    }

    #[test]
    fn rectangular_nontrivial_matches_constant() {
        let lat = Lattice2::rectangular(1.3, 0.7).unwrap();
        for s in [spin(1, 0), spin(0, 1), spin(1, 1)] {
            let r = skew_lattice_report(&lat, s).unwrap();
            assert!((r.spectral - r.constant_squared).abs() < 1e-10);
            assert!((r.constant_unsquared.unwrap() - r.constant_squared).abs() < 1e-10);
            assert_eq!(flat_spectrum(&lat, s, 4).unwrap().kernel_dimension(), 0);
        }
    }

    #[test]
    fn skewed_lattice_undercuts_constant() {
        // v2*/2 - v1* is much shorter than v2*/2 when v2* is nearly 2 v1*.
        let lat = Lattice2::new([1.0, 0.0], [1.9, 0.3]).unwrap().dual();
        let r = skew_lattice_report(&lat, spin(0, 1)).unwrap();
        assert!(r.undercuts, "{r:?}");
    }

    fn unimodular() -> impl Strategy<Value = (i64, i64, i64, i64)> {
        (-3i64..=3, -3i64..=3, -3i64..=3).prop_filter_map("det = 1", |(p, q, r)| {
            // [[p, q], [r, s]] with p s - q r = 1.
            if p != 0 && (1 + q * r) % p == 0 {
                Some((p, q, r, (1 + q * r) / p))
            } else {
                None
            }
        })
    }

    proptest! {
        #[test]
        fn rebasing_preserves_spectrum(
            x in 0.5f64..2.0, y in -0.8f64..0.8, z in 0.5f64..2.0,
            (p, q, r, t) in unimodular(),
            e1 in 0u8..2, e2 in 0u8..2,
        ) {
            let lat = Lattice2::new([x, 0.0], [y, z]).unwrap();
            let s = spin(e1, e2);
            let w1 = lat.point(p as f64, q as f64);
            let w2 = lat.point(r as f64, t as f64);
            let rebased = Lattice2::new(w1, w2).unwrap();
            // The structure is a character on Gamma: eps'_i = eps(w_i) mod 2.
            let f1 = ((p * e1 as i64 + q * e2 as i64).rem_euclid(2)) as u8;
            let f2 = ((r * e1 as i64 + t * e2 as i64).rem_euclid(2)) as u8;
            let a = flat_spectrum(&lat, s, 10).unwrap();
            let b = flat_spectrum(&rebased, spin(f1, f2), 10).unwrap();
            for (u, v) in a.eigenvalue_squares.iter().zip(&b.eigenvalue_squares) {
                prop_assert!((u - v).abs() <= 1e-10 * u.abs().max(1.0));
            }
        }

        #[test]
        fn dilation_scales_spectrum(
            x in 0.5f64..2.0, y in -0.8f64..0.8, z in 0.5f64..2.0, c in 0.2f64..5.0,
            e1 in 0u8..2, e2 in 0u8..2,
        ) {
            let lat = Lattice2::new([x, 0.0], [y, z]).unwrap();
            let big = Lattice2::new([c * x, 0.0], [c * y, c * z]).unwrap();
            let a = flat_spectrum(&lat, spin(e1, e2), 8).unwrap();
            let b = flat_spectrum(&big, spin(e1, e2), 8).unwrap();
            for (u, v) in a.eigenvalue_squares.iter().zip(&b.eigenvalue_squares) {
                prop_assert!((u / (c * c) - v).abs() <= 1e-10 * u.max(1.0));
            }
        }
    }
}
