mod common;

use glm_gee::catalog;
use glm_gee::stability::{scan_region, spectral_radius_at, stability_function, stability_matrix, stability_matrix_neumann, stability_order};
use num::complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn region_scan_is_continuous_and_matches_point_checks() {
    let t = catalog::tableau("GLM-A2").unwrap();
    let scan = scan_region(&t, (-4.0, 1.0), (-3.0, 3.0), 400, 400).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..400 {
        for i in 0..400 {
            if i + 1 < 400 {
                worst = worst.max((scan.rho[j][i + 1] - scan.rho[j][i]).abs());
            }
            if j + 1 < 400 {
                worst = worst.max((scan.rho[j + 1][i] - scan.rho[j][i]).abs());
            }
        }
    }
    assert!(worst < 0.5, "{worst}");
    assert!(scan.nearest(c(0.0, 0.0)).1);
    assert!(scan.nearest(c(-0.75, 0.75)).1);
    assert!(!scan.nearest(c(-1.0, 1.0)).1);
    // The region is symmetric about the real axis.
    for j in 0..200 {
        for i in 0..400 {
            assert!((scan.rho[j][i] - scan.rho[399 - j][i]).abs() < 1e-9);
        }
    }
}

#[test]
fn explicit_methods_have_bounded_regions() {
    for name in common::GEE_METHODS.iter().copied().chain(["RK4", "Midpoint"]) {
        let t = catalog::get(name).unwrap().integrable().unwrap();
        assert!(spectral_radius_at(&t, c(-100.0, 0.0)).unwrap() > 1.0, "{name}");
        assert!((spectral_radius_at(&t, c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15, "{name}");
    }
}

#[test]
fn stability_function_at_zero_is_a_power_of_w_minus_one() {
    for name in common::GEE_METHODS {
        let t = catalog::tableau(name).unwrap();
        for w in [c(2.0, 0.0), c(0.5, -1.0)] {
            let phi = stability_function(&t, w, c(0.0, 0.0)).unwrap();
            assert!((phi - (w - 1.0) * (w - 1.0)).norm() < 1e-14, "{name}");
        }
    }
}

#[test]
fn stability_orders_reach_at_least_p_plus_one() {
    for name in common::GEE_METHODS {
        let t = catalog::tableau(name).unwrap();
        let s = stability_order(&t).unwrap();
        println!("{name}: stability order {} (series {:?}, slope {:.3})", s.describe(), s.series_order, s.slope);
        let q = s.series_order.expect("nonzero series");
        assert!(q > t.p, "{name}: {q}");
        assert_eq!(s.q, Some(q), "{name}: fitted slope disagrees with the series");
    }
}

proptest! {
    #[test]
    fn resolvent_and_neumann_forms_agree(idx in 0usize..common::GEE_METHODS.len(), r in 0.0f64..4.0, th in 0.0f64..std::f64::consts::TAU) {
        let t = catalog::tableau(common::GEE_METHODS[idx]).unwrap();
        let z = Complex64::from_polar(r, th);
        let a = stability_matrix(&t, z).unwrap();
        let b = stability_matrix_neumann(&t, z).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).norm() <= 1e-13 * x.norm().max(1.0));
        }
    }

    #[test]
    fn plain_rk_stability_function_is_w_minus_r(re in -3.0f64..0.5, im in -3.0f64..3.0) {
        let t = catalog::rk4().to_gl();
        let z = c(re, im);
        let r = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
        let w = c(0.3, 0.1);
        prop_assert!((stability_function(&t, w, z).unwrap() - (w - r)).norm() < 1e-13 * r.norm().max(1.0));
    }
}
