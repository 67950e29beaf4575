use std::f64::consts::PI;

use spinbound_core::bounds::{
    classical_h2_bound, conformal_sphere_bound, ellipsoid_beta1_closed_form, ellipsoid_beta_bound, extrinsic_bound_t1,
    intrinsic_sphere_bound_ellipsoid, lower_bound_genus0, torus_spin_bound_ratio, torus_trivial_bound,
};
use spinbound_core::geometry::{delta_a, ellipsoid_volume};
use spinbound_core::{ConformalFactorField, EllipsoidParam, Lattice2, SpinStructure, TestFunctionPair};

fn grid() -> Vec<f64> {
    (0..25).map(|k| 10f64.powf(-1.5 + k as f64 * 0.125)).collect()
}

#[test]
fn every_upper_bound_dominates_the_lower_bound() {
    for a in grid() {
        let vol = ellipsoid_volume(a, 1e-12).unwrap();
        let lower = lower_bound_genus0(vol).unwrap().value;
        let e = EllipsoidParam::new(a).unwrap();
        let uppers = [
            classical_h2_bound(e, 1e-10).unwrap(),
            ellipsoid_beta_bound(a, 1.0, 1e-10).unwrap(),
            ellipsoid_beta_bound(a, 2.0, 1e-10).unwrap(),
            ellipsoid_beta1_closed_form(a).unwrap(),
            intrinsic_sphere_bound_ellipsoid(a, 1e-9).unwrap(),
            extrinsic_bound_t1(&e, &TestFunctionPair::new(move |w| delta_a(a, w).sqrt()), 1e-10).unwrap(),
        ];
        for u in uppers {
            assert!(
                u.value + u.error >= lower * (1.0 - 1e-12),
                "a={a} {:?} below {lower}",
                u.kind
            );
        }
    }
}

#[test]
fn closed_form_agrees_on_the_reference_grid() {
    let mut worst: f64 = 0.0;
    let params = (1..10)
        .map(|k| k as f64 / 10.0)
        .chain((11..=50).map(|k| k as f64 / 10.0));
    for a in params {
        let c = ellipsoid_beta1_closed_form(a).unwrap().value;
        let q = ellipsoid_beta_bound(a, 1.0, 1e-12).unwrap().value;
        worst = worst.max((c - q).abs());
    }
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn homothety_on_conformal_bounds() {
    let c: f64 = 1.3;
    let h = ConformalFactorField::from_log_fn(|x: f64, _| 0.2 * (2.0 * PI * x).cos());
    let lat = Lattice2::square(1.0).unwrap();
    let s = SpinStructure::new(0, 1).unwrap();
    let scaled = h.scaled(c).unwrap();
    let pairs = [
        (
            torus_trivial_bound(&h, &lat, 1e-10).unwrap().value,
            torus_trivial_bound(&scaled, &lat, 1e-10).unwrap().value,
        ),
        (
            torus_spin_bound_ratio(&h, &lat, s, 1e-10).unwrap().value,
            torus_spin_bound_ratio(&scaled, &lat, s, 1e-10).unwrap().value,
        ),
    ];
    for (base, sc) in pairs {
        assert!((sc - base / c.powi(4)).abs() < 1e-10 * base);
    }
    let sphere = ConformalFactorField::from_log_fn(|x: f64, _| 0.3 / x.cosh()).rotational();
    let b = conformal_sphere_bound(&sphere, 1e-10).unwrap().value;
    let bs = conformal_sphere_bound(&sphere.scaled(c).unwrap(), 1e-10).unwrap().value;
    assert!((bs - b / c.powi(4)).abs() < 1e-9 * b);
}
