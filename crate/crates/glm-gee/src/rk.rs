//! Classical explicit Runge-Kutta ingredients: Butcher tableaux, embedded
//! pairs, dense output and triplets.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{q_to_f64, Mat, Q};
use crate::tableau::{Form, Tableau};

#[derive(Clone, Debug, PartialEq)]
pub struct RkTableau {
    pub name: String,
    pub a: Mat<Q>,
    pub b: Vec<Q>,
    pub c: Vec<Q>,
    pub p: u32,
}

impl RkTableau {
    /// Abscissae are taken as the row sums of `a`.
    pub fn new(name: impl Into<String>, a: Mat<Q>, b: Vec<Q>, p: u32) -> Result<Self> {
        let s = b.len();
        if a.rows() != s || a.cols() != s {
            return Err(Error::Dimension(format!("A is {}x{}, b has {s} entries", a.rows(), a.cols())));
        }
        if !a.is_strictly_lower() {
            return Err(Error::Capability("only explicit Runge-Kutta methods are supported".into()));
        }
        let c = a.row_sums();
        Ok(RkTableau { name: name.into(), a, b, c, p })
    }

    pub fn s(&self) -> usize {
        self.b.len()
    }

    /// The method as a one-value GL tableau.
    pub fn to_gl(&self) -> Tableau {
        let s = self.s();
        Tableau::new(
            self.name.clone(),
            Form::PlainRK,
            Q::zero(),
            self.p,
            self.a.clone(),
            Mat::from_fn(s, 1, |_, _| Q::one()),
            Mat::from_rows(vec![self.b.clone()]).expect("one row"),
        )
        .expect("RK tableau shapes are consistent")
    }

    pub fn to_f64(&self) -> RkF64 {
        RkF64 {
            a: self.a.to_f64(),
            b: self.b.iter().map(q_to_f64).collect(),
            c: self.c.iter().map(q_to_f64).collect(),
        }
    }
}

/// Floating-point copy of an explicit RK tableau.
#[derive(Clone, Debug)]
pub struct RkF64 {
    pub a: Mat<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl RkF64 {
    /// Stage derivatives `f(t + c_i h, Y_i)` for one step from `y`.
    pub fn stages(
        &self,
        f: &dyn Fn(f64, &[f64], &mut [f64]),
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Vec<Vec<f64>> {
        let s = self.b.len();
        let m = y.len();
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(s);
        let mut yi = vec![0.0; m];
        for i in 0..s {
            yi.copy_from_slice(y);
            for (j, kj) in k.iter().enumerate() {
                let aij = *self.a.get(i, j);
                if aij != 0.0 {
                    for (v, d) in yi.iter_mut().zip(kj) {
                        *v += h * aij * d;
                    }
                }
            }
            let mut out = vec![0.0; m];
            f(t + self.c[i] * h, &yi, &mut out);
            k.push(out);
        }
        k
    }

    /// `y + h Σ w_i k_i`.
    pub fn combine(y: &[f64], h: f64, w: &[f64], k: &[Vec<f64>]) -> Vec<f64> {
        let mut out = y.to_vec();
        for (wi, ki) in w.iter().zip(k) {
            if *wi != 0.0 {
                for (o, d) in out.iter_mut().zip(ki) {
                    *o += h * wi * d;
                }
            }
        }
        out
    }

    pub fn step(&self, f: &dyn Fn(f64, &[f64], &mut [f64]), t: f64, y: &[f64], h: f64) -> Vec<f64> {
        let k = self.stages(f, t, y, h);
        Self::combine(y, h, &self.b, &k)
    }
}

/// An explicit method with a second, lower-order weight vector on the same stages.
#[derive(Clone, Debug, PartialEq)]
pub struct RkPair {
    /// Higher-order method (order `p + 1`).
    pub high: RkTableau,
    /// Weights of the order-`p` solution that is propagated.
    pub b_low: Vec<Q>,
    pub p_low: u32,
}

/// RK method with a continuous extension `b*_i(θ) = Σ_j B*_ij θ^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RkWithDenseOutput {
    pub rk: RkTableau,
    /// s × p* interpolation weights; column `j` multiplies θ^(j+1).
    pub bstar: Mat<Q>,
    /// `D*_ij = B*_ij · j` (one-based `j`); column `j` multiplies θ^j.
    pub dstar: Mat<Q>,
}

impl RkWithDenseOutput {
    pub fn new(rk: RkTableau, bstar: Mat<Q>) -> Result<Self> {
        if bstar.rows() != rk.s() {
            return Err(Error::Dimension(format!(
                "B* has {} rows for {} stages",
                bstar.rows(),
                rk.s()
            )));
        }
        let dstar = Mat::from_fn(bstar.rows(), bstar.cols(), |i, j| {
            bstar.get(i, j).clone() * Q::from_integer((j as i64 + 1).into())
        });
        Ok(RkWithDenseOutput { rk, bstar, dstar })
    }

    /// Interpolation weights at θ.
    pub fn b_theta(&self, theta: &Q) -> Vec<Q> {
        poly_rows(&self.bstar, theta, 1)
    }

    /// Weights of dP/dt at θ (to be multiplied by the stage derivatives).
    pub fn d_theta(&self, theta: &Q) -> Vec<Q> {
        poly_rows(&self.dstar, theta, 0)
    }

    pub fn b_theta_f64(&self, theta: f64) -> Vec<f64> {
        poly_rows_f64(&self.bstar.to_f64(), theta, 1)
    }

    pub fn d_theta_f64(&self, theta: f64) -> Vec<f64> {
        poly_rows_f64(&self.dstar.to_f64(), theta, 0)
    }
}

// Row i evaluates Σ_j m_ij θ^(j + shift).
fn poly_rows(m: &Mat<Q>, theta: &Q, shift: usize) -> Vec<Q> {
    (0..m.rows())
        .map(|i| {
            let mut pw = num::pow(theta.clone(), shift);
            let mut acc = Q::zero();
            for x in m.row(i) {
                acc += x.clone() * pw.clone();
                pw *= theta.clone();
            }
            acc
        })
        .collect()
}

fn poly_rows_f64(m: &Mat<f64>, theta: f64, shift: usize) -> Vec<f64> {
    (0..m.rows())
        .map(|i| {
            let mut pw = theta.powi(shift as i32);
            let mut acc = 0.0;
            for x in m.row(i) {
                acc += x * pw;
                pw *= theta;
            }
            acc
        })
        .collect()
}

/// Starting method S, main method M and comparison method F.
#[derive(Clone, Debug, PartialEq)]
pub struct RkTriplet {
    pub name: String,
    pub s: RkTableau,
    pub m: RkTableau,
    pub f: RkTableau,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn dstar_scales_columns() {
        let rk = RkTableau::new("e", Mat::zeros(1, 1), vec![q(1, 1)], 1).unwrap();
        let d = RkWithDenseOutput::new(rk, Mat::from_rows(vec![vec![q(1, 1), q(1, 2), q(1, 3)]]).unwrap())
            .unwrap();
        assert_eq!(d.dstar.row(0), &[q(1, 1), q(1, 1), q(1, 1)]);
        assert_eq!(d.b_theta(&q(1, 1)), vec![q(11, 6)]);
    }

    #[test]
    fn implicit_rk_is_rejected() {
        let a = Mat::from_rows(vec![vec![q(1, 2)]]).unwrap();
        assert!(RkTableau::new("imp", a, vec![q(1, 1)], 2).is_err());
    }

    #[test]
    fn euler_step_on_exponential() {
        let rk = RkTableau::new("e", Mat::zeros(1, 1), vec![q(1, 1)], 1).unwrap().to_f64();
        let y = rk.step(&|_, y, o| o[0] = y[0], 0.0, &[1.0], 0.1);
        assert_eq!(y, vec![1.1]);
    }
}
