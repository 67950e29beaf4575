//! Conformal factors `h > 0` with `g = h^4 g_0`.
//!
//! A factor is either analytic (closures for `log h` and optionally its
//! gradient and Laplacian) or a periodic grid of samples over a torus
//! fundamental domain.
//!
//! Chart conventions:
//! * torus: Euclidean coordinates of the plane covering `R^2 / Gamma`;
//! * sphere: the cylinder chart `(c, phi)` with `c = ln x`, `x` the
//!   stereographic radius, where `g_0 = sech^2(c) (dc^2 + dphi^2)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{Lattice2, TubeParam};
use crate::uniformization::{tube_h2_periodic, tube_phi_unwrapped, ProfileSolution};

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub struct AnalyticFactor {
    log_h: ScalarFn,
    log_gradient: Option<VectorFn>,
    log_laplacian: Option<ScalarFn>,
    rotational: bool,
}

impl AnalyticFactor {
    pub fn log_h(&self, x: f64, y: f64) -> f64 {
        (self.log_h)(x, y)
    }

    pub fn log_gradient(&self) -> Option<&VectorFn> {
        self.log_gradient.as_ref()
    }

    pub fn log_laplacian(&self) -> Option<&ScalarFn> {
        self.log_laplacian.as_ref()
    }

    /// Independent of the second chart coordinate.
    pub fn is_rotational(&self) -> bool {
        self.rotational
    }
}

/// Samples of `h` at `s = (i/nx, j/ny)` in lattice coordinates, stored
/// row-major (`values[i * ny + j]`), with no duplicated boundary row or column.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid(format!(
                "grid dimensions must be positive, got {nx}x{ny}"
            )));
        }
        if values.len() != nx * ny {
            return Err(Error::invalid(format!(
                "grid {nx}x{ny} needs {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveFactor { index, value });
        }
        Ok(PeriodicGrid { nx, ny, values })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone)]
pub enum ConformalFactorField {
    Analytic(AnalyticFactor),
    Grid(PeriodicGrid),
}

impl fmt::Debug for ConformalFactorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalFactorField::Analytic(a) => f
                .debug_struct("Analytic")
                .field("log_gradient", &a.log_gradient.is_some())
                .field("log_laplacian", &a.log_laplacian.is_some())
                .field("rotational", &a.rotational)
                .finish(),
            ConformalFactorField::Grid(g) => f.debug_tuple("Grid").field(&g.dims()).finish(),
        }
    }
}

impl ConformalFactorField {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonPositiveFactor { index: 0, value: c });
        }
        let log_c = c.ln();
        Ok(ConformalFactorField::Analytic(AnalyticFactor {
            log_h: Arc::new(move |_, _| log_c),
            log_gradient: Some(Arc::new(|_, _| [0.0, 0.0])),
            log_laplacian: Some(Arc::new(|_, _| 0.0)),
            rotational: true,
        }))
    }

    /// Factor given by `h` itself; derivatives are taken numerically.
    pub fn from_fn<F>(h: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_log_fn(move |x, y| {
            let v = h(x, y);
            if v > 0.0 {
                v.ln()
            } else {
                f64::NAN
            }
        })
    }

    pub fn from_log_fn<F>(log_h: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        ConformalFactorField::Analytic(AnalyticFactor {
            log_h: Arc::new(log_h),
            log_gradient: None,
            log_laplacian: None,
            rotational: false,
        })
    }

    /// Attach the exact gradient of `log h`. No effect on grids.
    pub fn with_log_gradient<F>(self, grad: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        match self {
            ConformalFactorField::Analytic(mut a) => {
                a.log_gradient = Some(Arc::new(grad));
                ConformalFactorField::Analytic(a)
            }
            grid => grid,
        }
    }

    /// Attach the exact flat Laplacian of `log h`. No effect on grids.
    pub fn with_log_laplacian<F>(self, lap: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        match self {
            ConformalFactorField::Analytic(mut a) => {
                a.log_laplacian = Some(Arc::new(lap));
                ConformalFactorField::Analytic(a)
            }
            grid => grid,
        }
    }

    /// Mark the factor as depending on the first chart coordinate only.
    pub fn rotational(self) -> Self {
        match self {
            ConformalFactorField::Analytic(mut a) => {
                a.rotational = true;
                ConformalFactorField::Analytic(a)
            }
            grid => grid,
        }
    }

    pub fn grid(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        Ok(ConformalFactorField::Grid(PeriodicGrid::new(nx, ny, values)?))
    }

    /// `c h`; every conformal bound scales by `c^-4`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonPositiveFactor { index: 0, value: c });
        }
        Ok(match self {
            ConformalFactorField::Analytic(a) => {
                let inner = a.log_h.clone();
                let log_c = c.ln();
                ConformalFactorField::Analytic(AnalyticFactor {
                    log_h: Arc::new(move |x, y| inner(x, y) + log_c),
                    ..a.clone()
                })
            }
            ConformalFactorField::Grid(g) => ConformalFactorField::Grid(PeriodicGrid {
                values: g.values.iter().map(|v| v * c).collect(),
                ..g.clone()
            }),
        })
    }

    /// Uniformizing factor `h_a` of the ellipsoid, in the sphere cylinder chart.
    pub fn ellipsoid(profile: ProfileSolution) -> Self {
        let profile = Arc::new(profile);
        let p1 = profile.clone();
        ConformalFactorField::Analytic(AnalyticFactor {
            log_h: Arc::new(move |c, _| p1.log_h_cylinder(c).unwrap_or(f64::NAN)),
            log_gradient: Some(Arc::new(move |c, _| {
                [profile.dlog_h_cylinder(c).unwrap_or(f64::NAN), 0.0]
            })),
            log_laplacian: None,
            rotational: true,
        })
    }

    /// Uniformizing factor of the tube on its conformal lattice
    /// `(L, 0), (0, A)`: `h^2 = 1 - r kappa cos(phi(psi))` with `psi` the
    /// second coordinate.
    pub fn tube(t: TubeParam) -> Self {
        let kappa = t.kappa();
        let r = t.r();
        ConformalFactorField::Analytic(AnalyticFactor {
            log_h: Arc::new(move |_, psi| 0.5 * tube_h2_periodic(&t, psi).ln()),
            // d/dpsi log h = kappa sin(phi) / 2, using r phi' = h^2.
            log_gradient: Some(Arc::new(move |_, psi| {
                [0.0, 0.5 * kappa * tube_phi_unwrapped(&t, psi).sin()]
            })),
            log_laplacian: Some(Arc::new(move |_, psi| {
                let phi = tube_phi_unwrapped(&t, psi);
                0.5 * kappa / r * phi.cos() * tube_h2_periodic(&t, psi)
            })),
            rotational: false,
        })
    }
}

/// Samples of `log h`, `|grad log h|^2` and `Laplacian(log h)` on an
/// `n1 x n2` grid over a torus fundamental domain.
#[derive(Debug, Clone)]
pub struct TorusSamples {
    pub n1: usize,
    pub n2: usize,
    pub log_h: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub laplacian: Vec<f64>,
    pub covolume: f64,
}

impl TorusSamples {
    /// Trapezoid integral over the fundamental domain of `f(log h, |grad log h|^2, lap)`.
    pub fn integrate<F: Fn(f64, f64, f64) -> f64>(&self, f: F) -> f64 {
        let mut sum = 0.0;
        for k in 0..self.log_h.len() {
            sum += f(self.log_h[k], self.grad_sq[k], self.laplacian[k]);
        }
        sum * self.covolume / self.log_h.len() as f64
    }
}

fn fft2(data: &mut [Complex64], n1: usize, n2: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (f1, f2) = if inverse {
        (planner.plan_fft_inverse(n1), planner.plan_fft_inverse(n2))
    } else {
        (planner.plan_fft_forward(n1), planner.plan_fft_forward(n2))
    };
    for row in data.chunks_exact_mut(n2) {
        f2.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n1];
    for j in 0..n2 {
        for i in 0..n1 {
            col[i] = data[i * n2 + j];
        }
        f1.process(&mut col);
        for i in 0..n1 {
            data[i * n2 + j] = col[i];
        }
    }
}

fn wavenumber(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Spectral derivatives of periodic samples on the unit square (lattice
/// coordinates): returns `(d/ds1, d/ds2, second-derivative Hessian entries)`.
struct SpectralDerivatives {
    d1: Vec<f64>,
    d2: Vec<f64>,
    d11: Vec<f64>,
    d12: Vec<f64>,
    d22: Vec<f64>,
}

fn spectral_derivatives(f: &[f64], n1: usize, n2: usize) -> SpectralDerivatives {
    let mut hat: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut hat, n1, n2, false);
    let scale = 1.0 / (n1 * n2) as f64;
    let two_pi = 2.0 * PI;
    let mut spectra: [Vec<Complex64>; 5] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n1 * n2]);
    for i in 0..n1 {
        let k1 = wavenumber(i, n1);
        let nyq1 = n1.is_multiple_of(2) && 2 * i == n1;
        for j in 0..n2 {
            let k2 = wavenumber(j, n2);
            let nyq2 = n2.is_multiple_of(2) && 2 * j == n2;
            let c = hat[i * n2 + j] * scale;
            let idx = i * n2 + j;
            let ik1 = Complex64::new(0.0, two_pi * k1);
            let ik2 = Complex64::new(0.0, two_pi * k2);
            if !nyq1 {
                spectra[0][idx] = c * ik1;
            }
            if !nyq2 {
                spectra[1][idx] = c * ik2;
            }
            spectra[2][idx] = c * (-(two_pi * k1).powi(2));
            if !nyq1 && !nyq2 {
                spectra[3][idx] = c * ik1 * ik2;
            }
            spectra[4][idx] = c * (-(two_pi * k2).powi(2));
        }
    }
    let [mut s0, mut s1, mut s2, mut s3, mut s4] = spectra;
    let back = |s: &mut Vec<Complex64>| {
        fft2(s, n1, n2, true);
        s.iter().map(|z| z.re).collect::<Vec<f64>>()
    };
    SpectralDerivatives {
        d1: back(&mut s0),
        d2: back(&mut s1),
        d11: back(&mut s2),
        d12: back(&mut s3),
        d22: back(&mut s4),
    }
}

fn grid_points(n1: usize, n2: usize) -> impl Iterator<Item = (usize, f64, f64)> {
    (0..n1 * n2).map(move |k| {
        let i = k / n2;
        let j = k % n2;
        (k, i as f64 / n1 as f64, j as f64 / n2 as f64)
    })
}

/// Sample a factor over the fundamental domain of `lat`. Grids are used at
/// their native resolution; analytic factors at `n1 x n2`.
pub fn sample_torus(field: &ConformalFactorField, lat: &Lattice2, n1: usize, n2: usize) -> Result<TorusSamples> {
    let dual = lat.dual();
    let (g11, g12, g22) = dual.gram();

    let (n1, n2, log_h, exact_grad, exact_lap) = match field {
        ConformalFactorField::Grid(g) => {
            let log_h: Vec<f64> = g.values.iter().map(|v| v.ln()).collect();
            (g.nx, g.ny, log_h, None, None)
        }
        ConformalFactorField::Analytic(a) => {
            let mut log_h = Vec::with_capacity(n1 * n2);
            let mut grad = a.log_gradient.as_ref().map(|_| Vec::with_capacity(n1 * n2));
            let mut lap = a.log_laplacian.as_ref().map(|_| Vec::with_capacity(n1 * n2));
            for (k, s1, s2) in grid_points(n1, n2) {
                let [x, y] = lat.point(s1, s2);
                let v = a.log_h(x, y);
                if !v.is_finite() {
                    return Err(Error::NonPositiveFactor {
                        index: k,
                        value: v.exp(),
                    });
                }
                log_h.push(v);
                if let (Some(buf), Some(gf)) = (grad.as_mut(), a.log_gradient.as_ref()) {
                    let [gx, gy] = gf(x, y);
                    buf.push(gx * gx + gy * gy);
                }
                if let (Some(buf), Some(lf)) = (lap.as_mut(), a.log_laplacian.as_ref()) {
                    buf.push(lf(x, y));
                }
            }
            (n1, n2, log_h, grad, lap)
        }
    };

    let (grad_sq, laplacian) = match (exact_grad, exact_lap) {
        (Some(g), Some(l)) => (g, l),
        (g, l) => {
            let d = spectral_derivatives(&log_h, n1, n2);
            // grad f = f_1 v1* + f_2 v2*, Laplacian = sum_ij <vi*, vj*> f_ij.
            let grad_sq = g.unwrap_or_else(|| {
                (0..n1 * n2)
                    .map(|k| g11 * d.d1[k] * d.d1[k] + 2.0 * g12 * d.d1[k] * d.d2[k] + g22 * d.d2[k] * d.d2[k])
                    .collect()
            });
            let laplacian = l.unwrap_or_else(|| {
                (0..n1 * n2)
                    .map(|k| g11 * d.d11[k] + 2.0 * g12 * d.d12[k] + g22 * d.d22[k])
                    .collect()
            });
            (grad_sq, laplacian)
        }
    };

    Ok(TorusSamples {
        n1,
        n2,
        log_h,
        grad_sq,
        laplacian,
        covolume: lat.covolume(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(PeriodicGrid::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            PeriodicGrid::new(2, 2, vec![1.0, 1.0, -0.5, 1.0]),
            Err(Error::NonPositiveFactor { index: 2, .. })
        ));
        assert!(ConformalFactorField::constant(0.0).is_err());
    }

    #[test]
    fn spectral_derivative_of_band_limited_field() {
        // f = sin(2 pi s1) cos(4 pi s2) on a 16 x 16 grid.
        let (n1, n2) = (16, 16);
        let f: Vec<f64> = grid_points(n1, n2)
            .map(|(_, s1, s2)| (2.0 * PI * s1).sin() * (4.0 * PI * s2).cos())
            .collect();
        let d = spectral_derivatives(&f, n1, n2);
        for (k, s1, s2) in grid_points(n1, n2) {
            let d1 = 2.0 * PI * (2.0 * PI * s1).cos() * (4.0 * PI * s2).cos();
            let d2 = -4.0 * PI * (2.0 * PI * s1).sin() * (4.0 * PI * s2).sin();
            let d12 = -8.0 * PI * PI * (2.0 * PI * s1).cos() * (4.0 * PI * s2).sin();
            let lap = -(4.0 + 16.0) * PI * PI * f[k];
            assert!((d.d1[k] - d1).abs() < 1e-11);
            assert!((d.d2[k] - d2).abs() < 1e-11);
            assert!((d.d12[k] - d12).abs() < 1e-10);
            assert!((d.d11[k] + d.d22[k] - lap).abs() < 1e-10);
        }
    }

    #[test]
    fn sampled_gradient_on_oblique_lattice() {
        // log h = 0.3 cos(2 pi <v1*, p>) has gradient -0.6 pi sin(.) v1*.
        let lat = Lattice2::new([2.0, 0.0], [0.7, 1.5]).unwrap();
        let dual = lat.dual();
        let field =
            ConformalFactorField::from_log_fn(move |x, y| 0.3 * (2.0 * PI * (dual.v1[0] * x + dual.v1[1] * y)).cos());
        let s = sample_torus(&field, &lat, 24, 24).unwrap();
        let (g11, _, _) = dual.gram();
        for (k, s1, _) in grid_points(24, 24) {
            let expected = (0.6 * PI * (2.0 * PI * s1).sin()).powi(2) * g11;
            assert!((s.grad_sq[k] - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn tube_factor_derivatives_match_spectral() {
        let t = TubeParam::new(1.0, 0.4).unwrap();
        let lat = crate::geometry::tube_lattice(&t);
        let exact = sample_torus(&ConformalFactorField::tube(t), &lat, 8, 128).unwrap();
        let numeric = sample_torus(
            &ConformalFactorField::from_log_fn(move |_, psi| 0.5 * tube_h2_periodic(&t, psi).ln()),
            &lat,
            8,
            128,
        )
        .unwrap();
        for k in 0..exact.log_h.len() {
            assert!((exact.grad_sq[k] - numeric.grad_sq[k]).abs() < 1e-10);
            assert!((exact.laplacian[k] - numeric.laplacian[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_shifts_log() {
        let f = ConformalFactorField::from_fn(|x, _| 2.0 + x.cos());
        let g = f.scaled(3.0).unwrap();
        let lat = Lattice2::square(2.0 * PI).unwrap();
        let a = sample_torus(&f, &lat, 8, 8).unwrap();
        let b = sample_torus(&g, &lat, 8, 8).unwrap();
        for k in 0..64 {
            assert!((b.log_h[k] - a.log_h[k] - 3f64.ln()).abs() < 1e-14);
        }
    }
}
