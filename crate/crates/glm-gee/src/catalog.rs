//! Built-in methods with their declared properties.
//!
//! Every entry is checked against its declarations by [`self_check`]; the
//! unit tests run that check over the whole catalog.

use std::sync::OnceLock;

use num::{One, Zero};
use serde::Serialize;

use crate::constructors::build_extrapolation;
use crate::error::{Error, Result};
use crate::linalg::{parse_q, q, Mat, Q};
use crate::order::verify_order;
use crate::rk::{RkPair, RkTableau, RkTriplet, RkWithDenseOutput};
use crate::tableau::{validate, Decoupling, Form, PreconsistencyVectors, Precision, Tableau};

/// How many of the decoupling products are diagonal, in (y, ỹ) form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecouplingLevel {
    None,
    /// BU diagonal.
    Bu,
    /// BU and BAU diagonal.
    BuBau,
    /// BU, BAU and B·diag(A𝟙)·U diagonal.
    Full,
}

impl DecouplingLevel {
    pub fn of(d: Decoupling) -> Self {
        match (d.bu_diagonal, d.bau_diagonal, d.bdiag_a1u_diagonal) {
            (true, true, true) => DecouplingLevel::Full,
            (true, true, false) => DecouplingLevel::BuBau,
            (true, _, _) => DecouplingLevel::Bu,
            _ => DecouplingLevel::None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Method {
    Gl(Tableau),
    Rk(RkTableau),
    Dense(RkWithDenseOutput),
    Pair(RkPair),
    Triplet(RkTriplet),
}

#[derive(Clone, Debug, Serialize)]
pub struct Declared {
    pub p: u32,
    #[serde(serialize_with = "ser_q")]
    pub gamma: Q,
    pub decoupling: Option<DecouplingLevel>,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub method: Method,
    pub declared: Declared,
    pub notes: &'static str,
}

impl CatalogEntry {
    pub fn tableau(&self) -> Option<&Tableau> {
        match &self.method {
            Method::Gl(t) => Some(t),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.method {
            Method::Gl(_) => "gl",
            Method::Rk(_) => "rk",
            Method::Dense(_) => "rk-dense",
            Method::Pair(_) => "rk-pair",
            Method::Triplet(_) => "rk-triplet",
        }
    }

    /// A GL tableau for anything that can be integrated directly.
    pub fn integrable(&self) -> Option<Tableau> {
        match &self.method {
            Method::Gl(t) => Some(t.clone()),
            Method::Rk(r) => Some(r.to_gl()),
            Method::Dense(d) => Some(d.rk.to_gl()),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match &self.method {
            Method::Gl(t) => t.to_json(),
            Method::Rk(r) => r.to_gl().to_json(),
            Method::Dense(d) => d.rk.to_gl().to_json(),
            Method::Pair(p) => p.high.to_gl().to_json(),
            Method::Triplet(t) => {
                let parts: Vec<serde_json::Value> = [&t.s, &t.m, &t.f]
                    .iter()
                    .map(|r| serde_json::from_str(&r.to_gl().to_json()?).map_err(Error::from))
                    .collect::<Result<_>>()?;
                Ok(serde_json::to_string_pretty(&parts)?)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ListItem {
    pub name: String,
    pub kind: String,
    pub p: u32,
    pub gamma: String,
    pub form: String,
    pub stages: usize,
}

fn mq(rows: &[&[&str]]) -> Mat<Q> {
    Mat::from_rows(rows.iter().map(|r| r.iter().map(|x| parse_q(x).expect("fraction")).collect()).collect())
        .expect("rectangular")
}

fn vq(xs: &[&str]) -> Vec<Q> {
    xs.iter().map(|x| parse_q(x).expect("fraction")).collect()
}

fn gl(name: &str, form: Form, gamma: Q, p: u32, a: Mat<Q>, u: Mat<Q>, b: Mat<Q>) -> Tableau {
    Tableau::new(name, form, gamma, p, a, u, b).expect("catalog shapes")
}

fn a_s3() -> Mat<Q> {
    mq(&[&["0", "0", "0"], &["1", "0", "0"], &["1/4", "1/4", "0"]])
}

/// Three-stage, second-order method with γ = 0 in (y, ε) form.
pub fn glm_s3_p2_g0() -> Tableau {
    gl(
        "GLM-s3-p2-g0",
        Form::Yeps,
        Q::zero(),
        2,
        a_s3(),
        mq(&[&["1", "0"], &["1", "10"], &["1", "-1"]]),
        mq(&[&["1/12", "1/12", "5/6"], &["1/12", "1/12", "-1/6"]]),
    )
}

/// The same method stored in (y, ỹ) form.
pub fn glm_s3_p2_g0_yy() -> Tableau {
    gl(
        "GLM-s3-p2-g0-yy",
        Form::Yytilde,
        Q::zero(),
        2,
        a_s3(),
        mq(&[&["1", "0"], &["-9", "10"], &["2", "-1"]]),
        mq(&[&["1/12", "1/12", "5/6"], &["1/6", "1/6", "2/3"]]),
    )
}

pub fn glm_a2() -> Tableau {
    gl(
        "GLM-A2",
        Form::Yeps,
        Q::zero(),
        2,
        mq(&[&["0", "0", "0"], &["1", "0", "0"], &["4/9", "2/9", "0"]]),
        mq(&[&["1", "4"], &["1", "0"], &["1", "0"]]),
        mq(&[&["0", "-1/2", "3/2"], &["1/4", "1/2", "-3/4"]]),
    )
}

fn a4_with(a: Mat<Q>) -> Tableau {
    gl(
        "GLM-A4",
        Form::Yeps,
        q(1, 2),
        2,
        a,
        mq(&[&["1", "-11/10"], &["1", "13/30"], &["1", "5/3"]]),
        mq(&[&["5/12", "5/12", "1/6"], &["-1/4", "-1/4", "1/2"]]),
    )
}

/// Second-order method built on two second-order solutions (γ = 1/2).
///
/// The third stage row is (1/4, 1/4); with (4/9, 2/9), as in [`a2_as_printed`],
/// the y output is only first order.
pub fn glm_a4() -> Tableau {
    a4_with(a_s3())
}

/// `GLM-A4` with the third stage row (4/9, 2/9) shared with `GLM-A2`.
pub fn a2_as_printed() -> Tableau {
    let mut t = a4_with(mq(&[&["0", "0", "0"], &["1", "0", "0"], &["4/9", "2/9", "0"]]));
    t.name = "GLM-A4-printed".into();
    t
}

/// Four-stage method whose BU and BAU are both diagonal, in (y, ỹ) form.
pub fn glm_a9() -> Tableau {
    gl(
        "GLM-A9",
        Form::Yytilde,
        Q::zero(),
        2,
        mq(&[
            &["0", "0", "0", "0"],
            &["3/4", "0", "0", "0"],
            &["1/4", "29/60", "0", "0"],
            &["-21/44", "145/44", "-20/11", "0"],
        ]),
        mq(&[&["0", "1"], &["75/58", "-17/58"], &["0", "1"], &["0", "1"]]),
        mq(&[&["109/275", "58/75", "-37/110", "1/6"], &["3/11", "0", "75/88", "-1/8"]]),
    )
}

/// Five-stage third-order method (γ = 0) with coefficients known to about 40 digits.
pub fn glm_s5_p3_g0() -> Tableau {
    let a = mq(&[
        &["0", "0", "0", "0", "0"],
        &["-2169604947363702313/24313474998937147335", "0", "0", "0", "0"],
        &[
            "46526746497697123895/94116917485856474137",
            "-10297879244026594958/49199457603717988219",
            "0",
            "0",
            "0",
        ],
        &[
            "23364788935845982499/87425311444725389446",
            "-79205144337496116638/148994349441340815519",
            "40051189859317443782/36487615018004984309",
            "0",
            "0",
        ],
        &[
            "42089522664062539205/124911313006412840286",
            "-15074384760342762939/137927286865289746282",
            "-62274678522253371016/125918573676298591413",
            "13755475729852471739/79257927066651693390",
            "0",
        ],
    ]);
    let b = mq(&[
        &[
            "61546696837458703723/56982519523786160813",
            "-55810892792806293355/206957624151308356511",
            "24061048952676379087/158739347956038723465",
            "3577972206874351339/7599733370677197135",
            "-59449832954780563947/137360038685338563670",
        ],
        &[
            "-9738262186984159168/99299082461487742983",
            "-32797097931948613195/61521565616362163366",
            "42895514606418420631/71714201188501437336",
            "22608567633166065068/55371917805607957003",
            "94655809487476459565/151517167160302729021",
        ],
    ]);
    let u = mq(&[
        &["70820309139834661559/80863923579509469826", "10043614439674808267/80863923579509469826"],
        &["161694774978034105510/106187653640211060371", "-55507121337823045139/106187653640211060371"],
        &["78486094644566264568/88171030896733822981", "9684936252167558413/88171030896733822981"],
        &["65394922146334854435/84570853840405479554", "19175931694070625119/84570853840405479554"],
        &["8607282770183754108/108658046436496925911", "100050763666313171803/108658046436496925911"],
    ]);
    gl("GLM-s5-p3-g0", Form::Yytilde, Q::zero(), 3, a, u, b).with_precision(Precision::Truncated(1e-25))
}

/// Dormand and Prince's RK3(2)G1 together with its continuous extension.
pub fn rk32g1() -> RkWithDenseOutput {
    let rk = RkTableau::new(
        "RK32G1",
        mq(&[
            &["0", "0", "0", "0"],
            &["1/2", "0", "0", "0"],
            &["-1", "2", "0", "0"],
            &["1/6", "2/3", "1/6", "0"],
        ]),
        vq(&["1/6", "2/3", "1/6", "0"]),
        3,
    )
    .expect("explicit");
    let bstar = mq(&[&["1", "-3/2", "2/3"], &["0", "2", "-4/3"], &["0", "1/2", "-1/3"], &["0", "-1", "1"]]);
    RkWithDenseOutput::new(rk, bstar).expect("shapes")
}

/// RK3(2)G1 combined with solving for the correction, as a single GL tableau.
pub fn rk32g1_gl() -> Tableau {
    let a = mq(&[
        &["0", "0", "0", "0", "0", "0", "0", "0"],
        &["1/2", "0", "0", "0", "0", "0", "0", "0"],
        &["-1", "2", "0", "0", "0", "0", "0", "0"],
        &["1/6", "2/3", "1/6", "0", "0", "0", "0", "0"],
        &["0", "0", "0", "0", "0", "0", "0", "0"],
        &["-7/24", "1/3", "1/12", "-1/8", "1/2", "0", "0", "0"],
        &["7/6", "-4/3", "-1/3", "1/2", "-1", "2", "0", "0"],
        &["0", "0", "0", "0", "1/6", "2/3", "1/6", "0"],
    ]);
    let u = mq(&[
        &["1", "0"],
        &["1", "0"],
        &["1", "0"],
        &["1", "0"],
        &["1", "1"],
        &["1", "1"],
        &["1", "1"],
        &["1", "1"],
    ]);
    let b = mq(&[
        &["1/6", "2/3", "1/6", "0", "0", "0", "0", "0"],
        &["-1/6", "-2/3", "-1/6", "0", "1/6", "2/3", "1/6", "0"],
    ]);
    gl("RK32G1-GL", Form::Yeps, Q::zero(), 3, a, u, b)
}

pub fn rk4() -> RkTableau {
    RkTableau::new(
        "RK4",
        mq(&[&["0", "0", "0", "0"], &["1/2", "0", "0", "0"], &["0", "1/2", "0", "0"], &["0", "0", "1", "0"]]),
        vq(&["1/6", "1/3", "1/3", "1/6"]),
        4,
    )
    .expect("explicit")
}

pub fn midpoint() -> RkTableau {
    RkTableau::new("Midpoint", mq(&[&["0", "0"], &["1/2", "0"]]), vq(&["0", "1"]), 2).expect("explicit")
}

/// Kutta's third-order method with the explicit midpoint rule embedded.
pub fn kutta3_mid2() -> RkPair {
    let high = RkTableau::new(
        "Kutta3-Mid2",
        mq(&[&["0", "0", "0"], &["1/2", "0", "0"], &["-1", "2", "0"]]),
        vq(&["1/6", "2/3", "1/6"]),
        3,
    )
    .expect("explicit");
    RkPair { high, b_low: vq(&["0", "1", "0"]), p_low: 2 }
}

fn triplet_with(f_b: &[&str]) -> RkTriplet {
    let a_m = mq(&[&["0", "0", "0"], &["1/2", "0", "0"], &["1/2", "1/4", "0"]]);
    RkTriplet {
        name: "Triplet-SMF".into(),
        s: RkTableau::new(
            "S",
            mq(&[&["0", "0", "0"], &["1/2", "0", "0"], &["0", "5/8", "0"]]),
            vq(&["-1/30", "1/2", "8/15"]),
            1,
        )
        .expect("explicit"),
        m: RkTableau::new("M", a_m.clone(), vq(&["2/3", "-1", "4/3"]), 2).expect("explicit"),
        f: RkTableau::new("F", a_m, vq(f_b), 1).expect("explicit"),
    }
}

/// Starting, main and comparison methods with an exact principal error equation.
pub fn triplet_smf() -> RkTriplet {
    triplet_with(&["29/42", "-31/42", "22/21"])
}

/// The triplet with the comparison weights (−29/42, −31/42, 22/21), which do not sum to one.
pub fn triplet_as_printed() -> RkTriplet {
    triplet_with(&["-29/42", "-31/42", "22/21"])
}

pub fn entries() -> &'static [CatalogEntry] {
    static E: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    E.get_or_init(|| {
        let gl_entry = |name, source, t: Tableau, level, notes| CatalogEntry {
            name,
            source,
            declared: Declared { p: t.p, gamma: t.gamma.clone(), decoupling: Some(level) },
            method: Method::Gl(t),
            notes,
        };
        let extrap = build_extrapolation(&midpoint(), 2).expect("midpoint extrapolation");
        vec![
            gl_entry(
                "GLM-s3-p2-g0",
                "GEE method s=3, p=2, gamma=0, (y, eps) form",
                glm_s3_p2_g0(),
                DecouplingLevel::Bu,
                "companion solution is third order",
            ),
            gl_entry(
                "GLM-s3-p2-g0-yy",
                "GEE method s=3, p=2, gamma=0, (y, ytilde) form",
                glm_s3_p2_g0_yy(),
                DecouplingLevel::Bu,
                "same method as GLM-s3-p2-g0",
            ),
            gl_entry(
                "GLM-A2",
                "GEE method s=3, p=2, gamma=0",
                glm_a2(),
                DecouplingLevel::Bu,
                "used for the linear stability experiment",
            ),
            gl_entry(
                "GLM-A4",
                "GEE method s=3, p=2, gamma=1/2",
                glm_a4(),
                DecouplingLevel::Bu,
                "third stage row is (1/4, 1/4); see a2_as_printed",
            ),
            gl_entry(
                "GLM-A9",
                "GEE method s=4, p=2, gamma=0, (y, ytilde) form",
                glm_a9(),
                DecouplingLevel::BuBau,
                "BU and BAU diagonal",
            ),
            gl_entry(
                "GLM-s5-p3-g0",
                "GEE method s=5, p=3, gamma=0, (y, ytilde) form, 40-digit coefficients",
                glm_s5_p3_g0(),
                DecouplingLevel::Bu,
                "identities hold to the precision of the stored fractions",
            ),
            gl_entry(
                "RK32G1-GL",
                "Dormand-Prince RK3(2)G1 with solving for the correction",
                rk32g1_gl(),
                DecouplingLevel::Full,
                "equals build_solving_for_correction(RK32G1)",
            ),
            gl_entry(
                "Extrap-Midpoint",
                "step-doubling extrapolation of the explicit midpoint rule",
                extrap,
                DecouplingLevel::Full,
                "built by build_extrapolation",
            ),
            CatalogEntry {
                name: "RK32G1",
                source: "Dormand-Prince RK3(2)G1",
                declared: Declared { p: 3, gamma: Q::zero(), decoupling: None },
                method: Method::Dense(rk32g1()),
                notes: "continuous extension of degree 3",
            },
            CatalogEntry {
                name: "RK4",
                source: "classical fourth-order Runge-Kutta",
                declared: Declared { p: 4, gamma: Q::zero(), decoupling: None },
                method: Method::Rk(rk4()),
                notes: "reference oracle",
            },
            CatalogEntry {
                name: "Midpoint",
                source: "explicit midpoint rule",
                declared: Declared { p: 2, gamma: Q::zero(), decoupling: None },
                method: Method::Rk(midpoint()),
                notes: "",
            },
            CatalogEntry {
                name: "Kutta3-Mid2",
                source: "Kutta's third-order method with embedded midpoint rule",
                declared: Declared { p: 2, gamma: Q::zero(), decoupling: None },
                method: Method::Pair(kutta3_mid2()),
                notes: "pair for the error-equation runner",
            },
            CatalogEntry {
                name: "Triplet-SMF",
                source: "Prince (1978) style triplet with exact principal error equation",
                declared: Declared { p: 2, gamma: Q::zero(), decoupling: None },
                method: Method::Triplet(triplet_smf()),
                notes: "first comparison weight is +29/42; see triplet_as_printed",
            },
        ]
    })
}

pub fn names() -> Vec<String> {
    entries().iter().map(|e| e.name.to_string()).collect()
}

pub fn get(name: &str) -> Result<&'static CatalogEntry> {
    entries()
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownMethod { name: name.into(), available: names() })
}

/// The GL tableau of a catalog entry (plain RK entries as one-value tableaux).
pub fn tableau(name: &str) -> Result<Tableau> {
    let e = get(name)?;
    e.integrable()
        .ok_or_else(|| Error::Capability(format!("{} is a {} entry, not a single tableau", e.name, e.kind())))
}

pub fn list() -> Vec<ListItem> {
    entries()
        .iter()
        .map(|e| {
            let (form, stages) = match &e.method {
                Method::Gl(t) => (format!("{:?}", t.form), t.s()),
                Method::Rk(r) => ("PlainRK".into(), r.s()),
                Method::Dense(d) => ("PlainRK".into(), d.rk.s()),
                Method::Pair(p) => ("PlainRK".into(), p.high.s()),
                Method::Triplet(t) => ("PlainRK".into(), t.m.s()),
            };
            ListItem {
                name: e.name.into(),
                kind: e.kind().into(),
                p: e.declared.p,
                gamma: e.declared.gamma.to_string(),
                form,
                stages,
            }
        })
        .collect()
}

/// Outcome of checking one entry against its declarations.
#[derive(Clone, Debug, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub ok: bool,
    pub failures: Vec<String>,
}

fn rk_order(r: &RkTableau) -> Result<usize> {
    Ok(verify_order(&r.to_gl())?.order_y)
}

/// Confirms every declared property of an entry.
pub fn self_check(e: &CatalogEntry) -> Result<SelfCheck> {
    let mut failures = Vec::new();
    let mut want = |cond: bool, what: String| {
        if !cond {
            failures.push(what);
        }
    };
    let p = e.declared.p as usize;
    match &e.method {
        Method::Gl(t) => {
            let v = validate(t, &PreconsistencyVectors::standard(t.form))?;
            want(v.preconsistency_ok, format!("U q0 != 1 (residual {:e})", v.residuals["U_q0_minus_1"]));
            want(v.consistency_ok, format!("B 1 != q0 (residual {:e})", v.residuals["B_1_minus_q0"]));
            want(t.is_explicit(), "A is not strictly lower triangular".into());
            want(t.v == Mat::identity(t.r()), "V is not the identity".into());
            want(t.gamma == e.declared.gamma, "gamma differs from declaration".into());
            let r = verify_order(t)?;
            want(r.order_y == p, format!("order of y is {}, declared {p}", r.order_y));
            want(r.gamma_relation_ok, "gamma relation fails at order p+1".into());
            want(r.order_companion > p, format!("companion order {} not above {p}", r.order_companion));
            if let Some(level) = e.declared.decoupling {
                let got = DecouplingLevel::of(r.decoupling);
                want(got == level, format!("decoupling is {got:?}, declared {level:?}"));
            }
        }
        Method::Rk(r) => {
            let o = rk_order(r)?;
            want(o == p, format!("order {o}, declared {p}"));
        }
        Method::Dense(d) => {
            let o = rk_order(&d.rk)?;
            want(o == p, format!("order {o}, declared {p}"));
            want(d.b_theta(&Q::one()) == d.rk.b, "b*(1) != b".into());
            want(d.b_theta(&Q::zero()).iter().all(Zero::is_zero), "b*(0) != 0".into());
        }
        Method::Pair(pair) => {
            let hi = rk_order(&pair.high)?;
            let mut low = pair.high.clone();
            low.b = pair.b_low.clone();
            let lo = rk_order(&low)?;
            want(lo == pair.p_low as usize && lo == p, format!("low order {lo}, declared {p}"));
            want(hi == lo + 1, format!("high order {hi}, expected {}", lo + 1));
        }
        Method::Triplet(t) => {
            for (r, label) in [(&t.s, "S"), (&t.m, "M"), (&t.f, "F")] {
                let o = rk_order(r)?;
                want(o == r.p as usize, format!("{label} has order {o}, declared {}", r.p));
            }
            want(t.m.p as usize == p, "M order differs from entry declaration".into());
        }
    }
    Ok(SelfCheck { name: e.name.into(), ok: failures.is_empty(), failures })
}

pub fn self_check_all() -> Result<Vec<SelfCheck>> {
    entries().iter().map(self_check).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_matches_its_declarations() {
        for c in self_check_all().unwrap() {
            assert!(c.ok, "{}: {:?}", c.name, c.failures);
        }
    }

    #[test]
    fn lookup_reports_available_names() {
        let err = get("nope").unwrap_err().to_string();
        assert!(err.contains("GLM-A2") && err.contains("RK4"));
    }

    #[test]
    fn named_examples() {
        let t = get("GLM-s3-p2-g0").unwrap().tableau().unwrap();
        assert_eq!(t.b.row(1), vq(&["1/12", "1/12", "-1/6"]).as_slice());
        let t = get("GLM-A2").unwrap().tableau().unwrap();
        assert_eq!(t.u.transpose().row(1), vq(&["4", "0", "0"]).as_slice());
        let t = get("RK32G1-GL").unwrap().tableau().unwrap();
        assert_eq!(t.s() + t.r(), 10);
        assert_eq!(t.a.row(5), vq(&["-7/24", "1/3", "1/12", "-1/8", "1/2", "0", "0", "0"]).as_slice());
    }

    #[test]
    fn listing_is_deterministic_and_large_enough() {
        let l = list();
        assert!(l.len() >= 7);
        assert_eq!(l.iter().map(|i| i.name.clone()).collect::<Vec<_>>(), names());
        let e = l.iter().find(|i| i.name == "GLM-s5-p3-g0").unwrap();
        assert_eq!((e.p, e.gamma.as_str(), e.stages), (3, "0", 5));
        assert_eq!(get("Triplet-SMF").unwrap().kind(), "rk-triplet");
    }

    #[test]
    fn forty_digit_fraction_is_stored_verbatim() {
        let t = glm_s5_p3_g0();
        assert_eq!(
            t.a.get(1, 0),
            &parse_q("-2169604947363702313/24313474998937147335").unwrap()
        );
    }

    #[test]
    fn printed_a4_is_only_first_order() {
        let r = verify_order(&a2_as_printed()).unwrap();
        assert_eq!(r.order_y, 1);
    }

    #[test]
    fn printed_comparison_method_is_inconsistent() {
        let t = triplet_as_printed();
        let sum: Q = t.f.b.iter().cloned().sum();
        assert_eq!(sum, q(-8, 21));
        assert_eq!(rk_order(&t.f).unwrap(), 0);
    }
}
