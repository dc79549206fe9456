//! The numerical polynomials `θ_k` and the identity `T^q + π·θ_1(T) = T`.
//!
//! ```text
//! θ_0(T) = T
//! θ_k(T) = −π^{−k} [ Σ_{0≤i<k} π^i θ_i(T)^{q^{k−i}} − T ]
//! ```
//!
//! The coefficients of `θ_k` carry denominators up to roughly
//! `π^{-(q^k-1)/(q-1)}`, so polynomials are built at the largest admissible
//! precision of the field. Values `θ_k(a)` are computed by running the same
//! recursion on `a` itself: every step is an exact division by `π^k`, which
//! decides integrality without ever rounding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldError, LaurentScalar, OElement};
use crate::series::{PowerSeries, SeriesError, SeriesJson};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThetaError {
    #[error("θ_{k}({a}) is not integral")]
    NotIntegral { k: usize, a: String },
    #[error("θ_{k} has degree {degree}, beyond the supported bound")]
    TooLarge { k: usize, degree: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Degree cap for polynomial construction.
pub const MAX_THETA_DEGREE: u64 = 1 << 12;

/// `θ_k` with coefficients in `L`, held at the field's largest precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaPolynomial {
    pub k: usize,
    pub poly: PowerSeries<LaurentScalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaJson {
    pub k: usize,
    pub poly: SeriesJson,
}

impl ThetaPolynomial {
    pub fn field(&self) -> &Field {
        self.poly.field()
    }

    pub fn degree(&self) -> usize {
        self.poly.deg()
    }

    /// `θ_k(a)` by Horner evaluation of the polynomial.
    pub fn eval(&self, a: &OElement) -> Result<LaurentScalar, ThetaError> {
        let x = LaurentScalar::integral(a.lift_exact(self.field())?);
        Ok(self.poly.eval(&x))
    }

    pub fn to_json(&self) -> ThetaJson {
        ThetaJson { k: self.k, poly: self.poly.to_json() }
    }

    /// Reads a polynomial written by [`ThetaPolynomial::to_json`]; `field` may
    /// be given at any precision.
    pub fn from_json(field: &Field, repr: &ThetaJson) -> Result<Self, ThetaError> {
        let poly = PowerSeries::from_json(&field.with_max_precision(), &repr.poly)?;
        Ok(ThetaPolynomial { k: repr.k, poly })
    }
}

fn degree_for(field: &Field, k: usize) -> Result<usize, ThetaError> {
    let degree = field.q().checked_pow(k as u32).filter(|&d| d <= MAX_THETA_DEGREE);
    degree.map(|d| d as usize).ok_or(ThetaError::TooLarge { k, degree: field.q().saturating_pow(k as u32) })
}

fn pad(p: &PowerSeries<LaurentScalar>, deg: usize) -> PowerSeries<LaurentScalar> {
    let mut coeffs = p.coeffs().to_vec();
    coeffs.resize(deg + 1, LaurentScalar::zero(p.field()));
    PowerSeries::new(p.field(), coeffs)
}

/// `θ_0, …, θ_k`.
pub fn theta_polys(field: &Field, k: usize) -> Result<Vec<ThetaPolynomial>, ThetaError> {
    let work = field.with_max_precision();
    let q = field.q();
    let mut out: Vec<ThetaPolynomial> = vec![ThetaPolynomial { k: 0, poly: PowerSeries::var_t(&work, 1) }];
    for j in 1..=k {
        let deg = degree_for(field, j)?;
        let t = PowerSeries::<LaurentScalar>::var_t(&work, deg);
        let mut acc = t.neg();
        for (i, th) in out.iter().enumerate() {
            let power = pad(&th.poly, deg).pow(q.pow((j - i) as u32));
            acc = acc.add(&power.map(|c| c.mul_pi_pow(i as i64)));
        }
        let poly = acc.map(|c| c.mul_pi_pow(-(j as i64)).neg());
        out.push(ThetaPolynomial { k: j, poly });
    }
    Ok(out)
}

pub fn theta_poly(field: &Field, k: usize) -> Result<ThetaPolynomial, ThetaError> {
    Ok(theta_polys(field, k)?.pop().expect("θ_0 is always present"))
}

/// `θ_0(a), …, θ_k(a)` for the canonical lift of `a`, reduced to the field
/// of `a`. Fails with [`ThetaError::NotIntegral`] at the first `j` whose
/// value leaves `o_L`.
pub fn theta_values(a: &OElement, k: usize) -> Result<Vec<OElement>, ThetaError> {
    let field = a.field().clone();
    let work = field.with_max_precision();
    let q = field.q();
    let x = a.lift_exact(&work)?;
    let mut vals = vec![x.clone()];
    for j in 1..=k {
        let mut acc = x.neg();
        for (i, v) in vals.iter().enumerate() {
            acc = acc.add(&v.pow(q.pow((j - i) as u32)).mul_pi_pow(i as u32));
        }
        let v = acc.neg().div_pi_exact(j as u32).map_err(|_| ThetaError::NotIntegral { k: j, a: format!("{a}") })?;
        vals.push(v);
    }
    vals.iter().map(|v| v.change_field(&field).map_err(ThetaError::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaEvalReport {
    pub k: usize,
    pub checked: usize,
    pub pass: bool,
    /// Samples where the polynomial value was precise enough to compare.
    pub cross_checked: usize,
    pub failures: Vec<String>,
}

/// Integrality of `θ_k(a)` on each sample, cross-checked against the
/// polynomial where its precision allows.
pub fn theta_eval_check(field: &Field, k: usize, samples: &[OElement]) -> Result<ThetaEvalReport, ThetaError> {
    let poly = theta_poly(field, k).ok();
    let mut report = ThetaEvalReport { k, checked: 0, pass: true, cross_checked: 0, failures: vec![] };
    for a in samples {
        report.checked += 1;
        let value = match theta_values(a, k) {
            Ok(v) => v[k].clone(),
            Err(e) => {
                report.pass = false;
                report.failures.push(e.to_string());
                continue;
            }
        };
        if let Some(p) = &poly {
            let y = p.eval(a)?;
            if y.abs_prec() > 0 {
                report.cross_checked += 1;
                let lifted = LaurentScalar::integral(value.change_field(p.field())?);
                if y != lifted {
                    report.pass = false;
                    report.failures.push(format!("θ_{k}({a}): recursion and polynomial disagree"));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusIdentityReport {
    /// `T^q + π·θ_1(T) = T` as polynomials.
    pub polynomial_identity: bool,
    /// `θ_1 = π^{-1}(T − T^q)` coefficientwise.
    pub theta1_closed_form: bool,
    pub samples: usize,
    /// `a^q + π·θ_1(a) = a` on every sample.
    pub value_identity: bool,
    /// `a^q ≡ a mod π` on every sample.
    pub residue_congruence: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<String>,
}

pub fn frobenius_identity_check(field: &Field, samples: &[OElement]) -> Result<FrobeniusIdentityReport, ThetaError> {
    let q = field.q() as usize;
    let th1 = theta_poly(field, 1)?;
    let work = th1.field().clone();
    let t = PowerSeries::<LaurentScalar>::var_t(&work, q);
    let tq = PowerSeries::monomial(&work, LaurentScalar::one(&work), q, q);
    let lhs = tq.add(&th1.poly.map(|c| c.mul_pi_pow(1)));
    let polynomial_identity = lhs == t;
    let closed = t.sub(&tq).map(|c| c.mul_pi_pow(-1));
    let theta1_closed_form = th1.poly == closed;
    let mut report = FrobeniusIdentityReport {
        polynomial_identity,
        theta1_closed_form,
        samples: samples.len(),
        value_identity: true,
        residue_congruence: true,
        pass: true,
        counterexample: None,
    };
    for a in samples {
        let vals = theta_values(a, 1)?;
        let aq = a.pow(field.q());
        if aq.add(&vals[1].mul_pi_pow(1)) != *a {
            report.value_identity = false;
            report.counterexample.get_or_insert_with(|| format!("a^q + π·θ_1(a) ≠ a at a = {a}"));
        }
        if !aq.sub(a).residue().is_zero() {
            report.residue_congruence = false;
            report.counterexample.get_or_insert_with(|| format!("a^q ≢ a mod π at a = {a}"));
        }
    }
    report.pass = report.polynomial_identity && report.theta1_closed_form && report.value_identity && report.residue_congruence;
    Ok(report)
}

/// `Σ_{0≤i≤k} π^i θ_i(T)^{q^{k−i}} = T` as polynomials.
pub fn derived_identity_check(field: &Field, k: usize) -> Result<bool, ThetaError> {
    let polys = theta_polys(field, k)?;
    let work = polys[0].field().clone();
    let deg = degree_for(field, k)?;
    let mut acc = PowerSeries::<LaurentScalar>::zero(&work, deg);
    for (i, th) in polys.iter().enumerate() {
        let power = pad(&th.poly, deg).pow(field.q().pow((k - i) as u32));
        acc = acc.add(&power.map(|c| c.mul_pi_pow(i as i64)));
    }
    Ok(acc == PowerSeries::var_t(&work, deg))
}

/// Leading coefficients from `L_0 = 1`, `L_k = −π^{−k} Σ_{i<k} π^i L_i^{q^{k−i}}`.
pub fn leading_coefficients(field: &Field, k: usize) -> Vec<LaurentScalar> {
    let work = field.with_max_precision();
    let q = field.q();
    let mut out = vec![LaurentScalar::one(&work)];
    for j in 1..=k {
        let mut acc = LaurentScalar::zero(&work);
        for (i, l) in out.iter().enumerate() {
            acc = acc.add(&l.pow(q.pow((j - i) as u32)).mul_pi_pow(i as i64));
        }
        out.push(acc.mul_pi_pow(-(j as i64)).neg());
    }
    out
}

/// `θ_k` has degree exactly `q^k`, its top coefficient follows
/// [`leading_coefficients`], and `θ_k(0) = 0`.
pub fn shape_check(field: &Field, k: usize) -> Result<bool, ThetaError> {
    let polys = theta_polys(field, k)?;
    let leads = leading_coefficients(field, k);
    Ok(polys.iter().zip(&leads).all(|(th, l)| {
        let top = th.poly.coeff(th.degree());
        th.degree() as u64 == field.q().pow(th.k as u32) && !top.is_zero() && top == l && th.poly.coeff(0).is_zero()
    }))
}
