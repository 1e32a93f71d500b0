//! Linear stability: the matrix R(z), its characteristic function Φ(w, z),
//! region scans and the order to which Φ(eᶻ, z) vanishes.

use num::complex::Complex64;
use num::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{fmt17, loglog_slope};
use crate::linalg::{q_to_f64, solve, Mat, Q};
use crate::tableau::Tableau;

fn to_c(m: &Mat<Q>) -> Mat<Complex64> {
    m.map(|x| Complex64::new(q_to_f64(x), 0.0))
}

/// R(z) = V + z B (I − zA)⁻¹ U.
pub fn stability_matrix(t: &Tableau, z: Complex64) -> Result<Mat<Complex64>> {
    let s = t.s();
    let a = to_c(&t.a);
    let lhs = Mat::<Complex64>::identity(s).sub(&a.scale(&z));
    let x = solve(&lhs, &to_c(&t.u), |v: &Complex64| v.norm())
        .ok_or_else(|| Error::Singular(format!("I - zA is singular at z = {z}")))?;
    Ok(to_c(&t.v).add(&to_c(&t.b).mul(&x).scale(&z)))
}

/// Exact polynomial coefficients of R(z) for explicit methods:
/// R(z) = V + Σ_k z^(k+1) B A^k U.
pub fn stability_polynomial(t: &Tableau) -> Result<Vec<Mat<Q>>> {
    if !t.is_explicit() {
        return Err(Error::Capability("polynomial form needs an explicit method".into()));
    }
    let mut coeffs = vec![t.v.clone()];
    let mut ak_u = t.u.clone();
    for _ in 0..t.s() {
        coeffs.push(t.b.mul(&ak_u));
        ak_u = t.a.mul(&ak_u);
    }
    Ok(coeffs)
}

/// R(z) from the finite Neumann expansion.
pub fn stability_matrix_neumann(t: &Tableau, z: Complex64) -> Result<Mat<Complex64>> {
    let coeffs = stability_polynomial(t)?;
    let r = t.r();
    let mut acc = Mat::<Complex64>::zeros(r, r);
    for c in coeffs.iter().rev() {
        acc = acc.scale(&z).add(&to_c(c));
    }
    Ok(acc)
}

fn det(m: &Mat<Complex64>) -> Complex64 {
    match m.rows() {
        1 => *m.get(0, 0),
        2 => m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0),
        n => {
            // Elimination with partial pivoting.
            let mut a = m.clone();
            let mut d = Complex64::one();
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&x, &y| a.get(x, col).norm().total_cmp(&a.get(y, col).norm()))
                    .expect("nonempty");
                if a.get(piv, col).is_zero() {
                    return Complex64::zero();
                }
                if piv != col {
                    for j in 0..n {
                        let t = *a.get(col, j);
                        a.set(col, j, *a.get(piv, j));
                        a.set(piv, j, t);
                    }
                    d = -d;
                }
                let p = *a.get(col, col);
                d *= p;
                for i in col + 1..n {
                    let f = a.get(i, col) / p;
                    for j in col..n {
                        let v = a.get(i, j) - f * a.get(col, j);
                        a.set(i, j, v);
                    }
                }
            }
            d
        }
    }
}

/// Φ(w, z) = det(wI − R(z)).
pub fn stability_function(t: &Tableau, w: Complex64, z: Complex64) -> Result<Complex64> {
    let r = stability_matrix(t, z)?;
    let n = r.rows();
    Ok(det(&Mat::<Complex64>::identity(n).scale(&w).sub(&r)))
}

/// Largest eigenvalue modulus of a 1×1 or 2×2 matrix, in closed form.
pub fn spectral_radius(m: &Mat<Complex64>) -> f64 {
    match m.rows() {
        1 => m.get(0, 0).norm(),
        2 => {
            let tr = m.get(0, 0) + m.get(1, 1);
            let d = det(m);
            let disc = (tr * tr - 4.0 * d).sqrt();
            ((tr + disc) / 2.0).norm().max(((tr - disc) / 2.0).norm())
        }
        n => panic!("closed-form spectral radius supports r <= 2, got {n}"),
    }
}

pub fn spectral_radius_at(t: &Tableau, z: Complex64) -> Result<f64> {
    Ok(spectral_radius(&stability_matrix(t, z)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityScan {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// `rho[j][i]` is ρ(R(re[i] + i·im[j])).
    pub rho: Vec<Vec<f64>>,
    pub inside: Vec<Vec<bool>>,
}

impl StabilityScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,rho,inside\n");
        for (j, y) in self.im.iter().enumerate() {
            for (i, x) in self.re.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt17(*x),
                    fmt17(*y),
                    fmt17(self.rho[j][i]),
                    u8::from(self.inside[j][i])
                ));
            }
        }
        s
    }

    /// Value at the grid node nearest to z.
    pub fn nearest(&self, z: Complex64) -> (f64, bool) {
        let near = |v: &[f64], x: f64| {
            (0..v.len()).min_by(|&a, &b| (v[a] - x).abs().total_cmp(&(v[b] - x).abs())).expect("nonempty")
        };
        let (i, j) = (near(&self.re, z.re), near(&self.im, z.im));
        (self.rho[j][i], self.inside[j][i])
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Spectral radius over a rectangular grid (rows are imaginary parts).
pub fn scan_region(
    t: &Tableau,
    re_range: (f64, f64),
    im_range: (f64, f64),
    n_re: usize,
    n_im: usize,
) -> Result<StabilityScan> {
    if n_re == 0 || n_im == 0 {
        return Err(Error::InvalidArgument("scan resolution must be positive".into()));
    }
    let re = linspace(re_range.0, re_range.1, n_re);
    let im = linspace(im_range.0, im_range.1, n_im);
    let coeffs: Option<Vec<Mat<Complex64>>> =
        stability_polynomial(t).ok().map(|c| c.iter().map(to_c).collect());
    let eval = |z: Complex64| -> Result<f64> {
        match &coeffs {
            Some(c) => {
                let r = t.r();
                let mut acc = Mat::<Complex64>::zeros(r, r);
                for m in c.iter().rev() {
                    acc = acc.scale(&z).add(m);
                }
                Ok(spectral_radius(&acc))
            }
            None => spectral_radius_at(t, z),
        }
    };
    let rho = im
        .par_iter()
        .map(|&y| re.iter().map(|&x| eval(Complex64::new(x, y))).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let inside = rho.iter().map(|r| r.iter().map(|v| *v <= 1.0).collect()).collect();
    Ok(StabilityScan { re, im, rho, inside })
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityOrder {
    /// Rounded log-log slope, or `None` when every sample is at round-off.
    pub q: Option<u32>,
    pub slope: f64,
    /// Index of the first nonzero series coefficient above the noise floor.
    pub series_order: Option<u32>,
    /// (z, |Φ(eᶻ, z)| from the exact series, |Φ(eᶻ, z)| evaluated directly).
    pub samples: Vec<(f64, f64, f64)>,
    pub k_max: u32,
}

impl StabilityOrder {
    pub fn describe(&self) -> String {
        match self.q {
            Some(q) => q.to_string(),
            None => format!(">= {}", self.k_max),
        }
    }
}

const SERIES_TERMS: usize = 16;
const SERIES_NOISE: f64 = 1e-15;

fn series_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().min(b.len());
    (0..n).map(|k| (0..=k).fold(Q::zero(), |acc, i| acc + a[i].clone() * b[k - i].clone())).collect()
}

/// Power-series coefficients of Φ(eᶻ, z) in exact arithmetic (r ≤ 2).
pub fn phi_exp_series(t: &Tableau) -> Result<Vec<Q>> {
    let coeffs = stability_polynomial(t)?;
    let r = t.r();
    if r > 2 {
        return Err(Error::Capability("series form supports r <= 2".into()));
    }
    let mut exp = vec![Q::one(); SERIES_TERMS];
    for k in 1..SERIES_TERMS {
        exp[k] = exp[k - 1].clone() / Q::from_integer((k as i64).into());
    }
    // Entry (i, j) of eᶻ I − R(z) as a series.
    let entry = |i: usize, j: usize| -> Vec<Q> {
        (0..SERIES_TERMS)
            .map(|k| {
                let e = if i == j { exp[k].clone() } else { Q::zero() };
                let rk = coeffs.get(k).map_or_else(Q::zero, |c| c.get(i, j).clone());
                e - rk
            })
            .collect()
    };
    Ok(if r == 1 {
        entry(0, 0)
    } else {
        let ad = series_mul(&entry(0, 0), &entry(1, 1));
        let bc = series_mul(&entry(0, 1), &entry(1, 0));
        ad.into_iter().zip(bc).map(|(x, y)| x - y).collect()
    })
}

/// Measures the order of Φ(eᶻ, z) at z = 0 from samples at z = 10^−k, k = 1..6.
///
/// The samples come from the exact series, which avoids the cancellation that
/// ruins direct evaluation at small z; the directly evaluated values are
/// reported alongside.
pub fn stability_order(t: &Tableau) -> Result<StabilityOrder> {
    let series = phi_exp_series(t)?;
    let cf: Vec<f64> = series.iter().map(q_to_f64).map(|c| if c.abs() < SERIES_NOISE { 0.0 } else { c }).collect();
    let series_order = cf.iter().position(|c| *c != 0.0).map(|k| k as u32);
    let k_max = 6u32;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut samples = Vec::new();
    for k in 1..=k_max {
        let z = 10f64.powi(-(k as i32));
        let v = cf.iter().rev().fold(0.0, |acc, c| acc * z + c).abs();
        let direct = stability_function(t, Complex64::new(z.exp(), 0.0), Complex64::new(z, 0.0))?.norm();
        samples.push((z, v, direct));
        if v > 0.0 {
            xs.push(z);
            ys.push(v);
        }
    }
    if xs.len() < 2 {
        return Ok(StabilityOrder { q: None, slope: f64::NAN, series_order, samples, k_max });
    }
    let slope = loglog_slope(&xs, &ys);
    Ok(StabilityOrder { q: Some(slope.round() as u32), slope, series_order, samples, k_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::tableau::Form;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_at_origin() {
        for name in ["GLM-A2", "GLM-A9", "RK32G1-GL"] {
            let r = stability_matrix(&catalog::tableau(name).unwrap(), c(0.0, 0.0)).unwrap();
            assert_eq!(r, Mat::identity(2));
        }
    }

    #[test]
    fn rk4_matches_truncated_exponential() {
        let t = catalog::rk4().to_gl();
        for z in [c(-1.0, 0.5), c(0.3, -2.0), c(-2.5, 0.0)] {
            let want = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
            let got = *stability_matrix(&t, z).unwrap().get(0, 0);
            assert!((got - want).norm() < 1e-14);
            let phi = stability_function(&t, c(0.7, 0.1), z).unwrap();
            assert!((phi - (c(0.7, 0.1) - want)).norm() < 1e-14);
        }
    }

    #[test]
    fn origin_gives_double_root() {
        let t = catalog::glm_a2();
        let w = c(0.3, 0.4);
        let phi = stability_function(&t, w, c(0.0, 0.0)).unwrap();
        assert!((phi - (w - 1.0) * (w - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn far_left_is_outside() {
        let t = catalog::glm_a2();
        assert!(spectral_radius_at(&t, c(-100.0, 0.0)).unwrap() > 1.0);
    }

    #[test]
    fn rk4_stability_order_is_five() {
        let o = stability_order(&catalog::rk4().to_gl()).unwrap();
        assert_eq!(o.q, Some(5));
        assert_eq!(o.series_order, Some(5));
    }

    #[test]
    fn pass_through_tableau_has_order_r() {
        let mut t = catalog::glm_a2();
        t.b = Mat::zeros(2, 3);
        let o = stability_order(&t).unwrap();
        assert_eq!(o.q, Some(2));
        assert_eq!(t.form, Form::Yeps);
    }

    #[test]
    fn resolvent_and_neumann_agree() {
        for name in ["GLM-s3-p2-g0", "GLM-A4", "GLM-s5-p3-g0", "RK32G1-GL"] {
            let t = catalog::tableau(name).unwrap();
            for z in [c(-3.9, 0.3), c(1.0, 2.0), c(-0.5, -2.5), c(2.0, -2.0)] {
                let a = stability_matrix(&t, z).unwrap();
                let b = stability_matrix_neumann(&t, z).unwrap();
                let d = a.sub(&b).iter().fold(0.0f64, |m, x| m.max(x.norm()));
                assert!(d < 1e-13, "{name} at {z}: {d}");
            }
        }
    }

    #[test]
    fn scan_contains_origin() {
        let s = scan_region(&catalog::glm_s3_p2_g0(), (-1.0, 1.0), (-1.0, 1.0), 5, 5).unwrap();
        assert!(s.nearest(c(0.0, 0.0)).1);
        assert!(scan_region(&catalog::glm_a2(), (0.0, 1.0), (0.0, 1.0), 0, 3).is_err());
    }
}
