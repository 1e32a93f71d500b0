//! GL method coefficients, structural validation and the change of carried
//! variables between the (y, ε) and (y, ỹ) forms.

use std::collections::BTreeMap;

use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ones, parse_q, q_abs_f64, q_to_f64, Mat, Q};

/// Which quantities the two carried slots hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    /// Solution and global error estimate.
    Yeps,
    /// Two solutions whose leading errors differ by the factor γ.
    Yytilde,
    /// A single-value Runge-Kutta method (r = 1).
    PlainRK,
}

/// How faithfully the stored rationals represent the intended method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Precision {
    /// Coefficients are the exact intended values.
    Exact,
    /// Coefficients are exact fractions truncated from an irrational solution;
    /// algebraic identities hold to the given absolute tolerance only.
    Truncated(f64),
    /// Coefficients came from binary floating point.
    Float,
}

impl Precision {
    /// Tolerance for consistency and decoupling residuals.
    pub fn validation_tol(self) -> f64 {
        match self {
            Precision::Exact => 0.0,
            Precision::Truncated(t) => t,
            Precision::Float => 1e-12,
        }
    }

    /// Tolerance for order-condition residuals.
    pub fn order_tol(self) -> f64 {
        match self {
            Precision::Exact => 0.0,
            Precision::Truncated(t) => t,
            Precision::Float => 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tableau {
    pub name: String,
    pub form: Form,
    pub gamma: Q,
    pub p: u32,
    pub a: Mat<Q>,
    pub u: Mat<Q>,
    pub b: Mat<Q>,
    pub v: Mat<Q>,
    pub precision: Precision,
}

impl Tableau {
    /// Checks dimensions and the γ ≠ 1 requirement. `V` defaults to the identity.
    pub fn new(
        name: impl Into<String>,
        form: Form,
        gamma: Q,
        p: u32,
        a: Mat<Q>,
        u: Mat<Q>,
        b: Mat<Q>,
    ) -> Result<Self> {
        let r = u.cols();
        let t = Tableau {
            name: name.into(),
            form,
            gamma,
            p,
            a,
            u,
            b,
            v: Mat::identity(r),
            precision: Precision::Exact,
        };
        t.check_structure()?;
        Ok(t)
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_v(mut self, v: Mat<Q>) -> Result<Self> {
        self.v = v;
        self.check_structure()?;
        Ok(self)
    }

    pub fn s(&self) -> usize {
        self.a.rows()
    }

    pub fn r(&self) -> usize {
        self.u.cols()
    }

    pub fn is_explicit(&self) -> bool {
        self.a.is_strictly_lower()
    }

    pub fn check_structure(&self) -> Result<()> {
        let (s, r) = (self.a.rows(), self.u.cols());
        let dims = |what: &str, m: &Mat<Q>, rows: usize, cols: usize| {
            if m.rows() == rows && m.cols() == cols {
                Ok(())
            } else {
                Err(Error::Dimension(format!(
                    "{what} is {}x{}, expected {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )))
            }
        };
        if s == 0 {
            return Err(Error::Dimension("tableau has no stages".into()));
        }
        dims("A", &self.a, s, s)?;
        dims("U", &self.u, s, r)?;
        dims("B", &self.b, r, s)?;
        dims("V", &self.v, r, r)?;
        match self.form {
            Form::PlainRK if r != 1 => {
                return Err(Error::Dimension(format!("plain RK tableau must have r = 1, got {r}")))
            }
            Form::Yeps | Form::Yytilde if r != 2 => {
                return Err(Error::Dimension(format!("GEE tableau must have r = 2, got {r}")))
            }
            Form::Yeps | Form::Yytilde if self.gamma.is_one() => return Err(Error::SingularTransform),
            _ => {}
        }
        Ok(())
    }

    /// Stage abscissae `c = A·1 + U·q1`.
    pub fn abscissae(&self, q1: &[Q]) -> Vec<Q> {
        let a1 = self.a.row_sums();
        let uq = self.u.mul_vec(q1);
        a1.into_iter().zip(uq).map(|(x, y)| x + y).collect()
    }

    pub fn abscissae_f64(&self) -> Vec<f64> {
        let q1 = vec![Q::zero(); self.r()];
        self.abscissae(&q1).iter().map(q_to_f64).collect()
    }

    pub fn gamma_f64(&self) -> f64 {
        q_to_f64(&self.gamma)
    }

    /// Transfer matrix `T = [[1, 0], [1, 1 - γ]]` mapping (y, ε) to (y, ỹ).
    fn transfer(&self) -> (Mat<Q>, Mat<Q>) {
        let one = Q::one();
        let g = one.clone() - self.gamma.clone();
        let t = Mat::from_rows(vec![vec![one.clone(), Q::zero()], vec![one.clone(), g.clone()]])
            .expect("2x2");
        let tinv = Mat::from_rows(vec![
            vec![one.clone(), Q::zero()],
            vec![-(one.clone() / g.clone()), one / g],
        ])
        .expect("2x2");
        (t, tinv)
    }

    /// Re-expresses a (y, ε) tableau as an equivalent (y, ỹ) tableau.
    pub fn to_yytilde(&self) -> Result<Tableau> {
        if self.form != Form::Yeps {
            return Err(Error::Capability(format!("to_yytilde needs Yeps form, got {:?}", self.form)));
        }
        if self.gamma.is_one() {
            return Err(Error::SingularTransform);
        }
        let (t, tinv) = self.transfer();
        Ok(Tableau {
            form: Form::Yytilde,
            u: self.u.mul(&tinv),
            b: t.mul(&self.b),
            v: t.mul(&self.v).mul(&tinv),
            ..self.clone()
        })
    }

    /// Inverse of [`Tableau::to_yytilde`].
    pub fn to_yeps(&self) -> Result<Tableau> {
        if self.form != Form::Yytilde {
            return Err(Error::Capability(format!("to_yeps needs Yytilde form, got {:?}", self.form)));
        }
        if self.gamma.is_one() {
            return Err(Error::SingularTransform);
        }
        let (t, tinv) = self.transfer();
        Ok(Tableau {
            form: Form::Yeps,
            u: self.u.mul(&t),
            b: tinv.mul(&self.b),
            v: tinv.mul(&self.v).mul(&t),
            ..self.clone()
        })
    }

    /// The same method in (y, ỹ) form, whichever form it is stored in.
    pub fn as_yytilde(&self) -> Result<Tableau> {
        match self.form {
            Form::Yytilde => Ok(self.clone()),
            Form::Yeps => self.to_yytilde(),
            Form::PlainRK => Err(Error::Capability("plain RK has a single carried value".into())),
        }
    }

    /// The same method in (y, ε) form, whichever form it is stored in.
    pub fn as_yeps(&self) -> Result<Tableau> {
        match self.form {
            Form::Yeps => Ok(self.clone()),
            Form::Yytilde => self.to_yeps(),
            Form::PlainRK => Err(Error::Capability("plain RK has a single carried value".into())),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TableauDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Tableau> {
        let doc: TableauDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Preconsistency vectors: inputs are `q0·y(t) + Δt·q1·y'(t) + ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreconsistencyVectors {
    pub q0: Vec<Q>,
    pub q1: Vec<Q>,
}

impl PreconsistencyVectors {
    /// The vectors every catalog method uses in the given form.
    pub fn standard(form: Form) -> Self {
        let q0 = match form {
            Form::Yeps => vec![Q::one(), Q::zero()],
            Form::Yytilde => vec![Q::one(), Q::one()],
            Form::PlainRK => vec![Q::one()],
        };
        let q1 = vec![Q::zero(); q0.len()];
        PreconsistencyVectors { q0, q1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoupling {
    pub bu_diagonal: bool,
    pub bau_diagonal: bool,
    pub bdiag_a1u_diagonal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub consistency_ok: bool,
    pub preconsistency_ok: bool,
    pub abscissae: Vec<f64>,
    pub decoupling: Decoupling,
    pub residuals: BTreeMap<String, f64>,
    pub tolerance: f64,
}

/// Exact residuals of the consistency conditions and decoupling products.
pub fn validate(t: &Tableau, q: &PreconsistencyVectors) -> Result<ValidationReport> {
    t.check_structure()?;
    if q.q0.len() != t.r() || q.q1.len() != t.r() {
        return Err(Error::Dimension(format!(
            "preconsistency vectors have length {}, expected {}",
            q.q0.len(),
            t.r()
        )));
    }
    let s = t.s();
    let tol = t.precision.validation_tol();
    let max_dev = |xs: Vec<Q>, target: &[Q]| -> Q {
        xs.into_iter()
            .zip(target)
            .map(|(x, y)| (x - y).abs())
            .max()
            .unwrap_or_else(Q::zero)
    };
    let pre = max_dev(t.u.mul_vec(&q.q0), &ones::<Q>(s));
    let cons = max_dev(t.b.mul_vec(&ones::<Q>(s)), &q.q0);
    // The error slot is a fixed point of V exactly when V·q0 = q0.
    let vfix = max_dev(t.v.mul_vec(&q.q0), &q.q0);
    let c = t.abscissae(&q.q1);
    let a1 = t.a.row_sums();
    let bu = t.b.mul(&t.u);
    let bau = t.b.mul(&t.a).mul(&t.u);
    let bdu = t.b.mul(&Mat::diag(&a1)).mul(&t.u);

    let mut residuals = BTreeMap::new();
    let mut put = |k: &str, v: &Q| {
        residuals.insert(k.to_string(), q_abs_f64(v));
    };
    put("U_q0_minus_1", &pre);
    put("B_1_minus_q0", &cons);
    put("V_q0_minus_q0", &vfix);
    put("BU_offdiag", &bu.max_off_diagonal());
    put("BAU_offdiag", &bau.max_off_diagonal());
    put("BdiagA1U_offdiag", &bdu.max_off_diagonal());
    let ok = |k: &str| residuals[k] <= tol;
    Ok(ValidationReport {
        consistency_ok: ok("B_1_minus_q0") && ok("V_q0_minus_q0"),
        preconsistency_ok: ok("U_q0_minus_1"),
        abscissae: c.iter().map(q_to_f64).collect(),
        decoupling: Decoupling {
            bu_diagonal: ok("BU_offdiag"),
            bau_diagonal: ok("BAU_offdiag"),
            bdiag_a1u_diagonal: ok("BdiagA1U_offdiag"),
        },
        residuals,
        tolerance: tol,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    fn parse(&self, floats: &mut bool) -> Result<Q> {
        match self {
            Entry::Text(s) => {
                if let Some(v) = parse_q(s) {
                    return Ok(v);
                }
                let x: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad entry `{s}`")))?;
                *floats = true;
                from_float(x)
            }
            Entry::Number(x) => {
                if x.fract() != 0.0 {
                    *floats = true;
                }
                from_float(*x)
            }
        }
    }
}

fn from_float(x: f64) -> Result<Q> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite entry {x}")))
}

fn q_text(x: &Q) -> Entry {
    if x.is_integer() {
        Entry::Text(x.numer().to_string())
    } else {
        Entry::Text(format!("{}/{}", x.numer(), x.denom()))
    }
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct TableauDoc {
    name: String,
    s: usize,
    r: usize,
    form: Form,
    gamma: Entry,
    p: u32,
    A: Vec<Vec<Entry>>,
    U: Vec<Vec<Entry>>,
    B: Vec<Vec<Entry>>,
    V: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    residual_tolerance: Option<f64>,
}

impl From<&Tableau> for TableauDoc {
    fn from(t: &Tableau) -> Self {
        let m = |m: &Mat<Q>| m.to_rows().iter().map(|r| r.iter().map(q_text).collect()).collect();
        TableauDoc {
            name: t.name.clone(),
            s: t.s(),
            r: t.r(),
            form: t.form,
            gamma: q_text(&t.gamma),
            p: t.p,
            A: m(&t.a),
            U: m(&t.u),
            B: m(&t.b),
            V: m(&t.v),
            residual_tolerance: match t.precision {
                Precision::Truncated(x) => Some(x),
                _ => None,
            },
        }
    }
}

impl TryFrom<TableauDoc> for Tableau {
    type Error = Error;

    fn try_from(d: TableauDoc) -> Result<Tableau> {
        let mut floats = false;
        let mut m = |rows: &[Vec<Entry>], what: &str| -> Result<Mat<Q>> {
            let parsed = rows
                .iter()
                .map(|r| r.iter().map(|e| e.parse(&mut floats)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Mat::from_rows(parsed).ok_or_else(|| Error::Dimension(format!("{what} has ragged rows")))
        };
        let a = m(&d.A, "A")?;
        let u = m(&d.U, "U")?;
        let b = m(&d.B, "B")?;
        let v = m(&d.V, "V")?;
        let gamma = d.gamma.parse(&mut floats)?;
        if a.rows() != d.s || u.cols() != d.r {
            return Err(Error::Dimension(format!(
                "declared s={}, r={} but matrices give s={}, r={}",
                d.s,
                d.r,
                a.rows(),
                u.cols()
            )));
        }
        let precision = match (d.residual_tolerance, floats) {
            (_, true) => Precision::Float,
            (Some(x), false) => Precision::Truncated(x),
            (None, false) => Precision::Exact,
        };
        Tableau::new(d.name, d.form, gamma, d.p, a, u, b)?
            .with_v(v)
            .map(|t| t.with_precision(precision))
    }
}
