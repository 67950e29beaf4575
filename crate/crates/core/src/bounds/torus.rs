//! Intrinsic bounds on tori `R^2 / Gamma` with a conformal factor `h`.

use std::f64::consts::PI;

use super::{check_tol, ratio_with_error, BoundKind, BoundValue};
use crate::conformal::{sample_torus, ConformalFactorField, TorusSamples};
use crate::error::{Error, Result};
use crate::geometry::{Lattice2, SpinStructure};

/// Largest per-axis resolution used when refining an analytic factor.
pub const TORUS_MAX_RESOLUTION: usize = 4096;
const MAX_POINTS: usize = 1 << 22;
const START_RESOLUTION: usize = 16;

/// Integrals `int q_k dT` over the fundamental domain.
///
/// Analytic factors are refined per axis until doubling changes every
/// integral by at most `0.1 tol max(|q|, 1)`; grids are used as given with
/// zero error estimate.
fn torus_integrals<F>(field: &ConformalFactorField, lat: &Lattice2, tol: f64, quantities: F) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&TorusSamples) -> Vec<f64>,
{
    if let ConformalFactorField::Grid(_) = field {
        let s = sample_torus(field, lat, 0, 0)?;
        return Ok((quantities(&s), 0.0));
    }
    let eval = |n1: usize, n2: usize| -> Result<Vec<f64>> { Ok(quantities(&sample_torus(field, lat, n1, n2)?)) };
    let max_diff = |p: &[f64], q: &[f64]| {
        p.iter()
            .zip(q)
            .map(|(x, y)| (x - y).abs() / (0.1 * tol * x.abs().max(1.0)))
            .fold(0.0f64, f64::max)
    };
    let (mut n1, mut n2) = (START_RESOLUTION, START_RESOLUTION);
    let mut base = eval(n1, n2)?;
    loop {
        let fine1 = eval(2 * n1, n2)?;
        let fine2 = eval(n1, 2 * n2)?;
        let d1 = max_diff(&fine1, &base);
        let d2 = max_diff(&fine2, &base);
        if d1 <= 1.0 && d2 <= 1.0 {
            let err = fine1
                .iter()
                .chain(&fine2)
                .zip(base.iter().chain(&base))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            return Ok((base, err));
        }
        if d1 > 1.0 {
            n1 *= 2;
        }
        if d2 > 1.0 {
            n2 *= 2;
        }
        if n1 > TORUS_MAX_RESOLUTION || n2 > TORUS_MAX_RESOLUTION || n1 * n2 > MAX_POINTS {
            return Err(Error::Nonconvergence {
                lo: n1 as f64,
                hi: n2 as f64,
                error: d1.max(d2) * 0.1 * tol,
            });
        }
        base = if d1 > 1.0 && d2 <= 1.0 {
            fine1
        } else if d2 > 1.0 && d1 <= 1.0 {
            fine2
        } else {
            eval(n1, n2)?
        };
    }
}

fn mean_of<F: Fn(usize) -> f64>(s: &TorusSamples, f: F) -> f64 {
    let n = s.log_h.len();
    (0..n).map(f).sum::<f64>() * s.covolume / n as f64
}

/// `vol(M, g) = int h^4 dT`.
pub fn torus_volume(h: &ConformalFactorField, lat: &Lattice2, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let (q, _) = torus_integrals(h, lat, tol, |s| vec![mean_of(s, |k| (4.0 * s.log_h[k]).exp())])?;
    Ok(q[0])
}

/// `int G log h dM = -2 int Laplacian(log h) log h dT`, with the Gaussian
/// curvature from `h^4 G = -2 Laplacian(log h)`.
pub fn curvature_log_integral(h: &ConformalFactorField, lat: &Lattice2, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let (q, _) = torus_integrals(h, lat, tol, |s| {
        vec![mean_of(s, |k| -2.0 * s.laplacian[k] * s.log_h[k])]
    })?;
    Ok(q[0])
}

/// `int |grad h|^2 / h^2 dT`.
pub fn torus_dirichlet_energy(h: &ConformalFactorField, lat: &Lattice2, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let (q, _) = torus_integrals(h, lat, tol, |s| vec![mean_of(s, |k| s.grad_sq[k])])?;
    Ok(q[0])
}

/// Trivial spin structure: with `lambda_0^2 = 4 pi^2 min |v*|^2`,
/// `[int (lambda_0^2 + 4 |grad h|^2 / h^2) h^-6 dT] / int h^-2 dT`.
pub fn torus_trivial_bound(h: &ConformalFactorField, lat: &Lattice2, tol: f64) -> Result<BoundValue> {
    check_tol(tol)?;
    let flat = 4.0 * PI * PI * lat.dual().min_norm_sq();
    let (q, err) = torus_integrals(h, lat, tol, |s| {
        vec![
            mean_of(s, |k| (flat + 4.0 * s.grad_sq[k]) * (-6.0 * s.log_h[k]).exp()),
            mean_of(s, |k| (-2.0 * s.log_h[k]).exp()),
        ]
    })?;
    let (v, e) = ratio_with_error(q[0], err, q[1], err)?;
    Ok(BoundValue::with_error(BoundKind::UpperT3, v, e))
}

fn nontrivial(s: SpinStructure) -> Result<()> {
    if s.is_trivial() {
        Err(Error::TrivialSpin)
    } else {
        Ok(())
    }
}

fn shift_norm_sq(lat: &Lattice2, s: SpinStructure) -> f64 {
    let v = s.dual_vector(lat);
    v[0] * v[0] + v[1] * v[1]
}

/// `pi^2 |eps1 v1* + eps2 v2*|^2 int h^-2 dT / int h^2 dT`.
pub fn torus_spin_bound_ratio(
    h: &ConformalFactorField,
    lat: &Lattice2,
    s: SpinStructure,
    tol: f64,
) -> Result<BoundValue> {
    nontrivial(s)?;
    check_tol(tol)?;
    let c = PI * PI * shift_norm_sq(lat, s);
    let (q, err) = torus_integrals(h, lat, tol, |smp| {
        vec![
            mean_of(smp, |k| (-2.0 * smp.log_h[k]).exp()),
            mean_of(smp, |k| (2.0 * smp.log_h[k]).exp()),
        ]
    })?;
    let (v, e) = ratio_with_error(q[0], err, q[1], err)?;
    Ok(BoundValue::with_error(BoundKind::UpperT4Star, c * v, c * e))
}

/// Which radicand to use in `lambda_1^2(g_0) vol(T, g_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantForm {
    /// `|v1*|^2 |v2*|^2 - <v1*, v2*>^2`, i.e. the constant equals
    /// `pi^2 |eps v*|^2 covol(Gamma)`.
    #[default]
    Squared,
    /// `|v1*|^2 |v2*|^2 - <v1*, v2*>` with the inner product unsquared.
    Unsquared,
}

/// Both forms of `pi^2 |eps v*|^2 / sqrt(...)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatSpinConstant {
    pub squared: f64,
    /// `None` when the unsquared radicand is not positive.
    pub unsquared: Option<f64>,
}

impl FlatSpinConstant {
    pub fn get(&self, form: ConstantForm) -> Result<f64> {
        match form {
            ConstantForm::Squared => Ok(self.squared),
            ConstantForm::Unsquared => self
                .unsquared
                .ok_or_else(|| Error::invalid("unsquared radicand is not positive for this lattice")),
        }
    }

    /// `|unsquared - squared|`, infinite when the unsquared form is undefined.
    pub fn discrepancy(&self) -> f64 {
        self.unsquared.map_or(f64::INFINITY, |p| (p - self.squared).abs())
    }
}

pub fn flat_spin_constant(lat: &Lattice2, s: SpinStructure) -> Result<FlatSpinConstant> {
    nontrivial(s)?;
    let num = PI * PI * shift_norm_sq(lat, s);
    let (g11, g12, g22) = lat.dual().gram();
    let squared = num / (g11 * g22 - g12 * g12).sqrt();
    let rad = g11 * g22 - g12;
    let unsquared = (rad > 0.0).then(|| num / rad.sqrt());
    Ok(FlatSpinConstant { squared, unsquared })
}

/// Volume-normalized gradient form:
/// `lambda_1^2 vol <= lambda_1^2(g_0) vol(T, g_0) + int |grad h|^2 / h^2 dT`.
pub fn torus_spin_bound_gradient(
    h: &ConformalFactorField,
    lat: &Lattice2,
    s: SpinStructure,
    tol: f64,
) -> Result<BoundValue> {
    torus_spin_bound_gradient_with(h, lat, s, tol, ConstantForm::Squared)
}

pub fn torus_spin_bound_gradient_with(
    h: &ConformalFactorField,
    lat: &Lattice2,
    s: SpinStructure,
    tol: f64,
    form: ConstantForm,
) -> Result<BoundValue> {
    let c = flat_spin_constant(lat, s)?.get(form)?;
    check_tol(tol)?;
    let (q, err) = torus_integrals(h, lat, tol, |smp| vec![mean_of(smp, |k| smp.grad_sq[k])])?;
    Ok(BoundValue {
        kind: BoundKind::UpperT4Dstar,
        value: c + q[0],
        error: err,
        normalized: true,
    })
}

/// Volume-normalized curvature form
/// `lambda_1^2 vol <= lambda_1^2(g_0) vol(T, g_0) + (1/2) int G log h dM`.
///
/// Integrating `h^4 G = -2 Laplacian(log h)` by parts gives
/// `int G log h dM = +2 int |grad h|^2 / h^2 dT`, so this agrees with
/// [`torus_spin_bound_gradient`].
pub fn torus_curvature_bound(
    h: &ConformalFactorField,
    lat: &Lattice2,
    s: SpinStructure,
    tol: f64,
) -> Result<BoundValue> {
    let c = flat_spin_constant(lat, s)?.squared;
    check_tol(tol)?;
    let (q, err) = torus_integrals(h, lat, tol, |smp| {
        vec![mean_of(smp, |k| -2.0 * smp.laplacian[k] * smp.log_h[k])]
    })?;
    Ok(BoundValue {
        kind: BoundKind::UpperT4Curv,
        value: c + 0.5 * q[0],
        error: 0.5 * err,
        normalized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(e1: u8, e2: u8) -> SpinStructure {
        SpinStructure::new(e1, e2).unwrap()
    }

    #[test]
    fn flat_square_torus() {
        let lat = Lattice2::square(2.0 * PI).unwrap();
        let one = ConformalFactorField::constant(1.0).unwrap();
        let b = torus_trivial_bound(&one, &lat, 1e-10).unwrap();
        assert!((b.value - 1.0).abs() < 1e-12);
        let unit = Lattice2::square(1.0).unwrap();
        let r = torus_spin_bound_ratio(&one, &unit, spin(1, 0), 1e-10).unwrap();
        assert!((r.value - PI * PI).abs() < 1e-12);
        assert!(matches!(
            torus_spin_bound_ratio(&one, &unit, SpinStructure::TRIVIAL, 1e-10),
            Err(Error::TrivialSpin)
        ));
    }

    #[test]
    fn trivial_bound_matches_hand_integration() {
        // h = 1 + 0.1 cos(2 pi x / |v1|) on a rectangle; reduces to 1D integrals in x.
        let (w, ht) = (3.0, 1.3);
        let lat = Lattice2::rectangular(w, ht).unwrap();
        let k = 2.0 * PI / w;
        let h = ConformalFactorField::from_fn(move |x, _| 1.0 + 0.1 * (k * x).cos());
        let b = torus_trivial_bound(&h, &lat, 1e-10).unwrap();
        let flat = 4.0 * PI * PI / (w * w);
        let n = 4000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) * w / n as f64;
            let hv = 1.0 + 0.1 * (k * x).cos();
            let dh = -0.1 * k * (k * x).sin();
            num += (flat + 4.0 * dh * dh / (hv * hv)) * hv.powi(-6);
            den += hv.powi(-2);
        }
        assert!((b.value - num / den).abs() < 1e-6, "{} vs {}", b.value, num / den);
    }

    #[test]
    fn homothety() {
        let lat = Lattice2::new([1.0, 0.0], [0.3, 0.9]).unwrap();
        let dual = lat.dual();
        let h = ConformalFactorField::from_log_fn(move |x, y| {
            let s1 = dual.v1[0] * x + dual.v1[1] * y;
            let s2 = dual.v2[0] * x + dual.v2[1] * y;
            0.2 * (2.0 * PI * s1).sin() * (2.0 * PI * s2).cos()
        });
        let c = 1.6;
        let hc = h.scaled(c).unwrap();
        let s = spin(1, 1);
        let r0 = torus_spin_bound_ratio(&h, &lat, s, 1e-10).unwrap().value;
        let r1 = torus_spin_bound_ratio(&hc, &lat, s, 1e-10).unwrap().value;
        assert!((r1 - r0 * c.powi(-4)).abs() < 1e-10);
        let t0 = torus_trivial_bound(&h, &lat, 1e-10).unwrap().value;
        let t1 = torus_trivial_bound(&hc, &lat, 1e-10).unwrap().value;
        assert!((t1 - t0 * c.powi(-4)).abs() < 1e-10);
        let g0 = torus_spin_bound_gradient(&h, &lat, s, 1e-10).unwrap().value;
        let g1 = torus_spin_bound_gradient(&hc, &lat, s, 1e-10).unwrap().value;
        assert!((g1 - g0).abs() < 1e-10);
        let constant = ConformalFactorField::constant(2.5).unwrap();
        let gc = torus_spin_bound_gradient(&constant, &lat, s, 1e-10).unwrap().value;
        assert!((gc - flat_spin_constant(&lat, s).unwrap().squared).abs() < 1e-14);
    }

    #[test]
    fn constant_forms_agree_on_rectangles_only() {
        let rect = Lattice2::rectangular(2.0, 0.5).unwrap();
        let c = flat_spin_constant(&rect, spin(1, 0)).unwrap();
        assert!(c.discrepancy() < 1e-14);
        // For a rectangle the constant is pi^2 |eps v*|^2 covol.
        assert!((c.squared - PI * PI * 0.25 * 1.0).abs() < 1e-14);
        let skew = Lattice2::new([1.0, 0.0], [0.5, 1.0]).unwrap();
        let c = flat_spin_constant(&skew, spin(0, 1)).unwrap();
        assert!(c.discrepancy() > 1e-3);
        let scaled = Lattice2::new([3.0, 0.0], [1.5, 3.0]).unwrap();
        let c3 = flat_spin_constant(&scaled, spin(0, 1)).unwrap();
        // The squared form is scale invariant; the unsquared one is not.
        assert!((c3.squared - c.squared).abs() < 1e-12);
        assert!((c3.unsquared.unwrap() - c.unsquared.unwrap()).abs() > 1e-3);
    }

    #[test]
    fn curvature_form_equals_gradient_form() {
        let skew = Lattice2::new([1.2, 0.0], [0.4, 0.8]).unwrap();
        let dual = skew.dual();
        let fields = [
            ConformalFactorField::from_fn(move |x, y| 1.0 + 0.2 * (2.0 * PI * (dual.v1[0] * x + dual.v1[1] * y)).cos()),
            ConformalFactorField::from_log_fn(move |x, y| {
                let s1 = dual.v1[0] * x + dual.v1[1] * y;
                let s2 = dual.v2[0] * x + dual.v2[1] * y;
                0.3 * (2.0 * PI * s1).sin() * (2.0 * PI * s2).cos()
            }),
        ];
        for h in &fields {
            for s in [spin(1, 0), spin(1, 1)] {
                let g = torus_spin_bound_gradient(h, &skew, s, 1e-11).unwrap().value;
                let c = torus_curvature_bound(h, &skew, s, 1e-11).unwrap().value;
                assert!((g - c).abs() < 1e-7, "{g} vs {c}");
            }
            let e = torus_dirichlet_energy(h, &skew, 1e-11).unwrap();
            let gl = curvature_log_integral(h, &skew, 1e-11).unwrap();
            assert!(e > 1e-3);
            assert!((gl - 2.0 * e).abs() < 1e-7);
        }
    }

    #[test]
    fn grid_input_matches_analytic() {
        let lat = Lattice2::new([1.0, 0.0], [0.2, 1.1]).unwrap();
        let dual = lat.dual();
        let log_h = move |x: f64, y: f64| 0.25 * (2.0 * PI * (dual.v2[0] * x + dual.v2[1] * y)).sin();
        let analytic = ConformalFactorField::from_log_fn(log_h);
        let (nx, ny) = (32, 32);
        let mut values = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                let [x, y] = lat.point(i as f64 / nx as f64, j as f64 / ny as f64);
                values.push(log_h(x, y).exp());
            }
        }
        let grid = ConformalFactorField::grid(nx, ny, values).unwrap();
        let s = spin(0, 1);
        let a = torus_spin_bound_gradient(&analytic, &lat, s, 1e-11).unwrap().value;
        let g = torus_spin_bound_gradient(&grid, &lat, s, 1e-11).unwrap().value;
        assert!((a - g).abs() < 1e-9);
        let a = torus_trivial_bound(&analytic, &lat, 1e-11).unwrap().value;
        let g = torus_trivial_bound(&grid, &lat, 1e-11).unwrap().value;
        assert!((a - g).abs() < 1e-9);
    }
}
