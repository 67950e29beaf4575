//! Surface families, lattices and spin structures, with the pointwise
//! geometric quantities of the ellipsoid `x^2 + y^2 + z^2/a^2 = 1` and of
//! the tube of radius `r` around a circle of curvature `kappa`.
//!
//! The ellipsoid is parametrized by `(w, phi)` with
//! `(x, y, z) = (sqrt(1-w^2) cos phi, sqrt(1-w^2) sin phi, a w)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Ellipsoid with axis ratio `a`; `a = 1` is the round unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidParam {
    a: f64,
}

impl EllipsoidParam {
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(EllipsoidParam { a })
        } else {
            Err(Error::invalid(format!(
                "ellipsoid parameter a must be positive, got {a}"
            )))
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// Tube of radius `r` around a planar circle of curvature `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeParam {
    kappa: f64,
    r: f64,
}

impl TubeParam {
    pub fn new(kappa: f64, r: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("tube radius must be positive, got {r}")));
        }
        if r * kappa >= 1.0 {
            return Err(Error::Embedding(r * kappa));
        }
        Ok(TubeParam { kappa, r })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Dimensionless product `r * kappa` in `(0, 1)`.
    pub fn rk(&self) -> f64 {
        self.r * self.kappa
    }

    /// Length of the core circle, `2 pi / kappa`.
    pub fn length(&self) -> f64 {
        2.0 * PI / self.kappa
    }

    /// `sqrt(1 - r^2 kappa^2)`.
    pub fn cofactor(&self) -> f64 {
        let rk = self.rk();
        ((1.0 - rk) * (1.0 + rk)).sqrt()
    }

    /// Period `A = 2 pi r / sqrt(1 - r^2 kappa^2)` of the conformal coordinate.
    pub fn conformal_period(&self) -> f64 {
        2.0 * PI * self.r / self.cofactor()
    }
}

/// A lattice in the plane given by a basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice2 {
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl Lattice2 {
    pub fn new(v1: [f64; 2], v2: [f64; 2]) -> Result<Self> {
        if !(v1.iter().chain(v2.iter()).all(|c| c.is_finite())) {
            return Err(Error::invalid("lattice basis must be finite"));
        }
        let lat = Lattice2 { v1, v2 };
        let det = lat.det();
        let scale = dot(v1, v1).sqrt() * dot(v2, v2).sqrt();
        if !(det.abs() > 1e-12 * scale) || scale == 0.0 {
            return Err(Error::DegenerateLattice { det });
        }
        Ok(lat)
    }

    pub fn square(side: f64) -> Result<Self> {
        Lattice2::new([side, 0.0], [0.0, side])
    }

    pub fn rectangular(width: f64, height: f64) -> Result<Self> {
        Lattice2::new([width, 0.0], [0.0, height])
    }

    pub fn det(&self) -> f64 {
        self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0]
    }

    /// Area of a fundamental domain, i.e. the flat volume of `R^2 / Gamma`.
    pub fn covolume(&self) -> f64 {
        self.det().abs()
    }

    pub fn is_rectangular(&self) -> bool {
        let scale = dot(self.v1, self.v1).sqrt() * dot(self.v2, self.v2).sqrt();
        dot(self.v1, self.v2).abs() <= 1e-14 * scale
    }

    /// Point `s1 v1 + s2 v2`.
    pub fn point(&self, s1: f64, s2: f64) -> [f64; 2] {
        [s1 * self.v1[0] + s2 * self.v2[0], s1 * self.v1[1] + s2 * self.v2[1]]
    }

    /// Gram matrix entries `(|v1|^2, <v1,v2>, |v2|^2)`.
    pub fn gram(&self) -> (f64, f64, f64) {
        (dot(self.v1, self.v1), dot(self.v1, self.v2), dot(self.v2, self.v2))
    }

    /// Dual basis with `<v_i, v_j*> = delta_ij`.
    pub fn dual(&self) -> Lattice2 {
        let det = self.det();
        Lattice2 {
            v1: [self.v2[1] / det, -self.v2[0] / det],
            v2: [-self.v1[1] / det, self.v1[0] / det],
        }
    }

    /// Squared length of the shortest nonzero lattice vector, by enumeration.
    pub fn min_norm_sq(&self) -> f64 {
        // x = m v1 + n v2 has m = <x, v1*>, so |x| <= R forces |m| <= R |v1*|.
        let dual = self.dual();
        let bound = dot(self.v1, self.v1).min(dot(self.v2, self.v2));
        let radius = bound.sqrt();
        let mmax = (radius * dot(dual.v1, dual.v1).sqrt()).ceil() as i64;
        let nmax = (radius * dot(dual.v2, dual.v2).sqrt()).ceil() as i64;
        let mut best = bound;
        for m in -mmax..=mmax {
            for n in -nmax..=nmax {
                if m == 0 && n == 0 {
                    continue;
                }
                let p = self.point(m as f64, n as f64);
                best = best.min(dot(p, p));
            }
        }
        best
    }
}

pub fn dual_lattice(lat: &Lattice2) -> Lattice2 {
    lat.dual()
}

/// Spin structure `(eps1, eps2)` on a torus; `(0, 0)` is the trivial one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinStructure {
    eps1: u8,
    eps2: u8,
}

impl SpinStructure {
    pub const TRIVIAL: SpinStructure = SpinStructure { eps1: 0, eps2: 0 };

    pub fn new(eps1: u8, eps2: u8) -> Result<Self> {
        if eps1 > 1 || eps2 > 1 {
            return Err(Error::invalid(format!(
                "spin structure entries must be 0 or 1, got ({eps1},{eps2})"
            )));
        }
        Ok(SpinStructure { eps1, eps2 })
    }

    pub fn eps(&self) -> (u8, u8) {
        (self.eps1, self.eps2)
    }

    pub fn is_trivial(&self) -> bool {
        self.eps1 == 0 && self.eps2 == 0
    }

    /// All four structures in the order (0,0), (1,0), (0,1), (1,1).
    pub fn all() -> [SpinStructure; 4] {
        [
            SpinStructure { eps1: 0, eps2: 0 },
            SpinStructure { eps1: 1, eps2: 0 },
            SpinStructure { eps1: 0, eps2: 1 },
            SpinStructure { eps1: 1, eps2: 1 },
        ]
    }

    /// `eps1 v1* + eps2 v2*` for the dual basis of `lat`.
    pub fn dual_vector(&self, lat: &Lattice2) -> [f64; 2] {
        let dual = lat.dual();
        dual.point(self.eps1 as f64, self.eps2 as f64)
    }
}

impl std::fmt::Display for SpinStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.eps1, self.eps2)
    }
}

/// `Delta_a(w) = (1 - a^2) w^2 + a^2`, evaluated as `w^2 + a^2 (1-w)(1+w)`
/// to avoid cancellation for large `a` near `|w| = 1`.
pub fn delta_a(a: f64, w: f64) -> f64 {
    w * w + a * a * ((1.0 - w) * (1.0 + w))
}

/// Pointwise geometry of the ellipsoid at `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidQuantities {
    /// Squared mean curvature.
    pub h2: f64,
    /// Gaussian curvature.
    pub k_gauss: f64,
    /// Area density with respect to `dw dphi`.
    pub area_density: f64,
}

pub fn ellipsoid_quantities(a: f64, w: f64) -> EllipsoidQuantities {
    let d = delta_a(a, w);
    EllipsoidQuantities {
        h2: 0.25 * a * a * (d + 1.0).powi(2) / d.powi(3),
        k_gauss: a * a / (d * d),
        area_density: d.sqrt(),
    }
}

/// Area of the ellipsoid, `4 pi int_0^1 Delta_a^{1/2}(w) dw`.
pub fn ellipsoid_volume(a: f64, tol: f64) -> Result<f64> {
    EllipsoidParam::new(a)?;
    let r = integrate_adaptive(|w| delta_a(a, w).sqrt(), 0.0, 1.0, tol / (4.0 * PI))?;
    Ok(4.0 * PI * r.value)
}

/// Conformally flat lattice of the tube: `v1 = (L, 0)`, `v2 = (0, A)`.
pub fn tube_lattice(t: &TubeParam) -> Lattice2 {
    Lattice2 {
        v1: [t.length(), 0.0],
        v2: [0.0, t.conformal_period()],
    }
}

/// Area of the tube, `4 pi^2 r / kappa`.
pub fn tube_volume(t: &TubeParam) -> f64 {
    4.0 * PI * PI * t.r() / t.kappa()
}

/// Mean curvature of the tube at angle `phi` (unsigned convention that
/// makes the outer equator `(1 - 2 r kappa)/(2 r (1 - r kappa))`).
pub fn tube_mean_curvature(t: &TubeParam, phi: f64) -> f64 {
    let c = t.rk() * phi.cos();
    (1.0 - 2.0 * c) / (2.0 * t.r() * (1.0 - c))
}

/// Area density of the tube with respect to `ds dphi`.
pub fn tube_area_density(t: &TubeParam, phi: f64) -> f64 {
    t.r() * (1.0 - t.rk() * phi.cos())
}
