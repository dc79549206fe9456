//! Truncated univariate and bivariate power series.
//!
//! A [`PowerSeries`] carries exactly `D + 1` coefficients and represents a
//! series known modulo `T^{D+1}`. Arithmetic never extends `D`: binary
//! operations truncate at the smaller bound.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::field::{Field, FieldError, LaurentScalar, OElement, Residue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series belong to different fields or variables")]
    SpecMismatch,
    #[error("inner series has nonzero constant term")]
    NonzeroConstant,
    #[error("constant term is not a unit")]
    NotUnit,
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("malformed series: {0}")]
    Malformed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Coefficient ring of a series: `o_L` itself or `L` via [`LaurentScalar`].
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero(field: &Field) -> Self;
    fn one(field: &Field) -> Self;
    fn from_integral(x: &OElement) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Zero at the available precision.
    fn is_zero(&self) -> bool;
    /// Zero with full precision; such terms can be skipped in products
    /// without changing the tracked precision of the result.
    fn is_exact_zero(&self) -> bool;
    fn inverse(&self) -> Option<Self>;
    /// Coefficients `0..=d` of the product of two coefficient lists, when the
    /// scalar type has a faster route than term-by-term arithmetic.
    fn convolve(_a: &[Self], _b: &[Self], _d: usize) -> Option<Vec<Self>> {
        None
    }
    fn to_value(&self) -> Value;
    fn from_value(field: &Field, value: &Value) -> Result<Self, String>;
}

impl Scalar for OElement {
    fn zero(field: &Field) -> Self {
        OElement::zero(field)
    }
    fn one(field: &Field) -> Self {
        OElement::one(field)
    }
    fn from_integral(x: &OElement) -> Self {
        x.clone()
    }
    fn add(&self, rhs: &Self) -> Self {
        OElement::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        OElement::sub(self, rhs)
    }
    fn neg(&self) -> Self {
        OElement::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        OElement::mul(self, rhs)
    }
    fn is_zero(&self) -> bool {
        OElement::is_zero(self)
    }
    fn is_exact_zero(&self) -> bool {
        self.pi_prec() == self.field().max_pi_prec() && self.residues().iter().all(|&x| x == 0)
    }
    fn inverse(&self) -> Option<Self> {
        OElement::inverse(self).ok()
    }
    fn convolve(a: &[Self], b: &[Self], d: usize) -> Option<Vec<Self>> {
        OElement::convolve(a, b, d)
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.to_json()).expect("serializable")
    }
    fn from_value(field: &Field, value: &Value) -> Result<Self, String> {
        let repr = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        OElement::from_json(field, &repr).map_err(|e| e.to_string())
    }
}

impl Scalar for LaurentScalar {
    fn zero(field: &Field) -> Self {
        LaurentScalar::zero(field)
    }
    fn one(field: &Field) -> Self {
        LaurentScalar::one(field)
    }
    fn from_integral(x: &OElement) -> Self {
        LaurentScalar::integral(x.clone())
    }
    fn add(&self, rhs: &Self) -> Self {
        LaurentScalar::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        LaurentScalar::sub(self, rhs)
    }
    fn neg(&self) -> Self {
        LaurentScalar::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        LaurentScalar::mul(self, rhs)
    }
    fn is_zero(&self) -> bool {
        LaurentScalar::is_zero(self)
    }
    fn is_exact_zero(&self) -> bool {
        self.denom_exp() == 0 && Scalar::is_exact_zero(self.num())
    }
    fn inverse(&self) -> Option<Self> {
        LaurentScalar::inverse(self).ok()
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.to_json()).expect("serializable")
    }
    fn from_value(field: &Field, value: &Value) -> Result<Self, String> {
        let repr = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        LaurentScalar::from_json(field, &repr).map_err(|e| e.to_string())
    }
}

/// Truncated power series `Σ_{k ≤ D} c_k T^k`.
#[derive(Clone)]
pub struct PowerSeries<C = OElement> {
    field: Field,
    var: String,
    coeffs: Vec<C>,
}

impl<C: Scalar> PowerSeries<C> {
    pub fn new(field: &Field, coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        PowerSeries { field: field.clone(), var: "T".into(), coeffs }
    }

    pub fn with_var(mut self, var: &str) -> Self {
        self.var = var.to_string();
        self
    }

    pub fn zero(field: &Field, deg: usize) -> Self {
        Self::new(field, vec![C::zero(field); deg + 1])
    }

    pub fn one(field: &Field, deg: usize) -> Self {
        Self::monomial(field, C::one(field), 0, deg)
    }

    /// `c·T^k` truncated at `deg` (zero if `k > deg`).
    pub fn monomial(field: &Field, c: C, k: usize, deg: usize) -> Self {
        let mut s = Self::zero(field, deg);
        if k <= deg {
            s.coeffs[k] = c;
        }
        s
    }

    /// The variable `T`.
    pub fn var_t(field: &Field, deg: usize) -> Self {
        Self::monomial(field, C::one(field), 1, deg)
    }

    pub fn from_ints(field: &Field, ints: &[i64], deg: usize) -> Self {
        let mut s = Self::zero(field, deg);
        for (k, &x) in ints.iter().enumerate().take(deg + 1) {
            s.coeffs[k] = C::from_integral(&OElement::from_int(field, x));
        }
        s
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    /// Truncation degree `D`.
    pub fn deg(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, c: C) {
        self.coeffs[k] = c;
    }

    pub fn truncate(&self, deg: usize) -> Self {
        let mut s = self.clone();
        s.coeffs.truncate(deg + 1);
        s
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> PowerSeries<D> {
        PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }

    fn compatible(&self, other: &Self) -> bool {
        self.var == other.var && (std::sync::Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field)
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(SeriesError::SpecMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        Ok(self.add(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        Ok(self.mul(other))
    }

    /// # Panics
    /// On field or variable mismatch; see [`PowerSeries::try_add`].
    pub fn add(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "{}", SeriesError::SpecMismatch);
        let d = self.deg().min(other.deg());
        let coeffs = (0..=d).map(|k| self.coeffs[k].add(&other.coeffs[k])).collect();
        PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "{}", SeriesError::SpecMismatch);
        let d = self.deg().min(other.deg());
        let coeffs = (0..=d).map(|k| self.coeffs[k].sub(&other.coeffs[k])).collect();
        PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "{}", SeriesError::SpecMismatch);
        let d = self.deg().min(other.deg());
        self.mul_to(other, d)
    }

    /// Product truncated at `d ≤ min(D_self, D_other)`.
    fn mul_to(&self, other: &Self, d: usize) -> Self {
        if let Some(coeffs) = C::convolve(&self.coeffs, &other.coeffs, d) {
            return PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs };
        }
        let mut acc: Vec<Option<C>> = vec![None; d + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(d + 1) {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(d + 1 - i) {
                if b.is_exact_zero() {
                    continue;
                }
                let t = a.mul(b);
                acc[i + j] = Some(match acc[i + j].take() {
                    None => t,
                    Some(s) => s.add(&t),
                });
            }
        }
        let coeffs = acc.into_iter().map(|c| c.unwrap_or_else(|| C::zero(&self.field))).collect();
        PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs }
    }

    pub fn pow(&self, n: u64) -> Self {
        let mut result = Self::one(&self.field, self.deg()).with_var(&self.var);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Multiplication by `T^k`. The product is known modulo `T^{D+k+1}`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![C::zero(&self.field); k];
        coeffs.extend(self.coeffs.iter().cloned());
        PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs }
    }

    /// Index of the first coefficient that is nonzero at precision, if any.
    pub fn t_valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.t_valuation().is_none()
    }

    /// `g∘h` by Horner's scheme. Requires `h(0) = 0`; the result is known
    /// modulo `T^{min(D_g, D_h)+1}`.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        self.check(inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let d = self.deg().min(inner.deg());
        let inner = inner.truncate(d);
        let top = match self.coeffs[..=d].iter().rposition(|c| !c.is_exact_zero()) {
            Some(t) => t,
            None => return Ok(Self::zero(&self.field, d).with_var(&self.var)),
        };
        let mut acc = Self::monomial(&self.field, self.coeffs[top].clone(), 0, d).with_var(&self.var);
        for k in (0..top).rev() {
            acc = acc.mul_to(&inner, d);
            acc.coeffs[0] = acc.coeffs[0].add(&self.coeffs[k]);
        }
        Ok(acc)
    }

    /// Multiplicative inverse of a series with unit constant term.
    pub fn invert_unit(&self) -> Result<Self, SeriesError> {
        let h0 = self.coeffs[0].inverse().ok_or(SeriesError::NotUnit)?;
        let d = self.deg();
        let mut out: Vec<C> = Vec::with_capacity(d + 1);
        out.push(h0.clone());
        for k in 1..=d {
            let mut s = C::zero(&self.field);
            for i in 1..=k {
                if self.coeffs[i].is_exact_zero() {
                    continue;
                }
                s = s.add(&self.coeffs[i].mul(&out[k - i]));
            }
            out.push(s.mul(&h0).neg());
        }
        Ok(PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs: out })
    }

    /// `g / h` for `h = T^k·u` with `u` a unit series and `T^k | g`. The
    /// quotient is known modulo `T^{min(D_g, D_h) - k + 1}`.
    pub fn exact_divide(&self, h: &Self) -> Result<Self, SeriesError> {
        self.check(h)?;
        let k = h
            .t_valuation()
            .ok_or_else(|| SeriesError::NotDivisible("divisor is zero at this truncation".into()))?;
        let d = self.deg().min(h.deg());
        if k > d {
            return Err(SeriesError::NotDivisible("divisor vanishes below the truncation".into()));
        }
        if let Some(j) = self.coeffs[..k].iter().position(|c| !c.is_zero()) {
            return Err(SeriesError::NotDivisible(format!(
                "coefficient of T^{j} is nonzero but the divisor has T-valuation {k}"
            )));
        }
        let u = PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs: h.coeffs[k..=d].to_vec() };
        let g = PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs: self.coeffs[k..=d].to_vec() };
        let u_inv = u.invert_unit().map_err(|_| {
            SeriesError::NotDivisible(format!("divisor is T^{k} times a non-unit series"))
        })?;
        Ok(g.mul(&u_inv))
    }

    /// Polynomial evaluation `Σ c_k x^k` over all `D + 1` coefficients.
    pub fn eval(&self, x: &C) -> C {
        let mut acc = C::zero(&self.field);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson { var: self.var.clone(), deg: self.deg(), coeffs: self.coeffs.iter().map(|c| c.to_value()).collect() }
    }

    pub fn from_json(field: &Field, repr: &SeriesJson) -> Result<Self, SeriesError> {
        if repr.coeffs.len() != repr.deg + 1 {
            return Err(SeriesError::Malformed(format!(
                "D = {} needs {} coefficients, got {}",
                repr.deg,
                repr.deg + 1,
                repr.coeffs.len()
            )));
        }
        let coeffs = repr
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, v)| C::from_value(field, v).map_err(|e| SeriesError::Malformed(format!("coeffs[{k}]: {e}"))))
            .collect::<Result<_, _>>()?;
        Ok(PowerSeries { field: field.clone(), var: repr.var.clone(), coeffs })
    }
}

impl PowerSeries<OElement> {
    /// Coefficientwise division by `π^k`, each coefficient required divisible.
    pub fn div_pi_exact(&self, k: u32) -> Result<Self, SeriesError> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.div_pi_exact(k)
                    .map_err(|e| SeriesError::NotDivisible(format!("coefficient of T^{i}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs })
    }

    pub fn mul_pi_pow(&self, k: u32) -> Self {
        self.map(|c| c.mul_pi_pow(k))
    }

    /// Smallest π-valuation among the coefficients.
    pub fn pi_valuation(&self) -> Option<u32> {
        self.coeffs.iter().filter_map(|c| c.val_pi().finite()).min()
    }

    /// Reduction modulo π and the `T`-adic valuation of that reduction.
    pub fn reduce_mod_pi(&self) -> Reduction {
        let residue = ResidueSeries { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.residue()).collect() };
        let first = residue.coeffs.iter().position(|r| !r.is_zero());
        Reduction {
            t_valuation: first.unwrap_or(self.deg() + 1),
            exhausted: first.is_none(),
            residue,
        }
    }

    pub fn to_laurent(&self) -> PowerSeries<LaurentScalar> {
        self.map(|c| LaurentScalar::integral(c.clone()))
    }

    pub fn change_field(&self, target: &Field) -> Result<Self, SeriesError> {
        let coeffs = self.coeffs.iter().map(|c| c.change_field(target)).collect::<Result<_, _>>()?;
        Ok(PowerSeries { field: target.clone(), var: self.var.clone(), coeffs })
    }

    /// Smallest π-adic precision among the coefficients.
    pub fn min_pi_prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.pi_prec()).min().unwrap_or(0)
    }
}

impl PowerSeries<LaurentScalar> {
    /// Integral form, if every coefficient normalizes to denominator 1.
    pub fn to_integral(&self) -> Option<PowerSeries<OElement>> {
        let coeffs = self.coeffs.iter().map(|c| c.to_integral()).collect::<Option<Vec<_>>>()?;
        Some(PowerSeries { field: self.field.clone(), var: self.var.clone(), coeffs })
    }

    /// Smallest absolute π-adic precision among the coefficients.
    pub fn min_abs_prec(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs_prec()).min().unwrap_or(0)
    }
}

impl<C: Scalar> PartialEq for PowerSeries<C> {
    /// Equal when every coefficient up to the smaller truncation agrees.
    fn eq(&self, other: &Self) -> bool {
        self.compatible(other) && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a == b)
    }
}

impl<C: Scalar> fmt::Debug for PowerSeries<C> {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c:?})·{}^{k}", self.var))
            .collect();
        write!(fmt, "{} + O({}^{})", if terms.is_empty() { "0".into() } else { terms.join(" + ") }, self.var, self.deg() + 1)
    }
}

/// Wire form `{ "var": "T", "D": int, "coeffs": [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub var: String,
    #[serde(rename = "D")]
    pub deg: usize,
    pub coeffs: Vec<Value>,
}

/// Coefficientwise reduction of a series modulo π, over `k_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueSeries {
    field: Field,
    pub coeffs: Vec<Residue>,
}

impl ResidueSeries {
    pub fn add(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b, &self.field)).collect();
        ResidueSeries { field: self.field.clone(), coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![Residue::zero(&self.field); d];
        for i in 0..d {
            for j in 0..d - i {
                let t = self.coeffs[i].mul(&other.coeffs[j], &self.field);
                coeffs[i + j] = coeffs[i + j].add(&t, &self.field);
            }
        }
        ResidueSeries { field: self.field.clone(), coeffs }
    }

    /// Residues as `F_p` integers when `f = 1`; convenient for display.
    pub fn to_ints(&self) -> Vec<u64> {
        self.coeffs.iter().map(|r| r.coeffs[0]).collect()
    }
}

/// Result of [`PowerSeries::reduce_mod_pi`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub residue: ResidueSeries,
    /// Index of the first nonzero residue, `D + 1` if there is none.
    pub t_valuation: usize,
    /// Set when no residue is nonzero below the truncation.
    pub exhausted: bool,
}

/// Truncated series in two variables: `c[i][j]` is the coefficient of
/// `X^i Y^j`, stored for `i + j ≤ D`.
#[derive(Clone)]
pub struct BivariateSeries<C = OElement> {
    field: Field,
    rows: Vec<Vec<C>>,
}

impl<C: Scalar> BivariateSeries<C> {
    pub fn zero(field: &Field, deg: usize) -> Self {
        let rows = (0..=deg).map(|i| vec![C::zero(field); deg + 1 - i]).collect();
        BivariateSeries { field: field.clone(), rows }
    }

    pub fn from_fn(field: &Field, deg: usize, f: impl Fn(usize, usize) -> C) -> Self {
        let rows = (0..=deg).map(|i| (0..=deg - i).map(|j| f(i, j)).collect()).collect();
        BivariateSeries { field: field.clone(), rows }
    }

    /// `X`.
    pub fn var_x(field: &Field, deg: usize) -> Self {
        let mut s = Self::zero(field, deg);
        if deg >= 1 {
            s.rows[1][0] = C::one(field);
        }
        s
    }

    /// `Y`.
    pub fn var_y(field: &Field, deg: usize) -> Self {
        let mut s = Self::zero(field, deg);
        if deg >= 1 {
            s.rows[0][1] = C::one(field);
        }
        s
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn deg(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: C) {
        self.rows[i][j] = c;
    }

    pub fn rows(&self) -> &[Vec<C>] {
        &self.rows
    }

    pub fn truncate(&self, deg: usize) -> Self {
        Self::from_fn(&self.field, deg.min(self.deg()), |i, j| self.rows[i][j].clone())
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> BivariateSeries<D> {
        BivariateSeries { field: self.field.clone(), rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    fn compatible(&self, other: &Self) -> bool {
        std::sync::Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SeriesError> {
        if !self.compatible(other) {
            return Err(SeriesError::SpecMismatch);
        }
        Ok(self.add(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        if !self.compatible(other) {
            return Err(SeriesError::SpecMismatch);
        }
        Ok(self.mul(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "{}", SeriesError::SpecMismatch);
        let d = self.deg().min(other.deg());
        Self::from_fn(&self.field, d, |i, j| self.rows[i][j].add(&other.rows[i][j]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "{}", SeriesError::SpecMismatch);
        let d = self.deg().min(other.deg());
        Self::from_fn(&self.field, d, |i, j| self.rows[i][j].sub(&other.rows[i][j]))
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "{}", SeriesError::SpecMismatch);
        let d = self.deg().min(other.deg());
        let mut acc: Vec<Vec<Option<C>>> = (0..=d).map(|i| vec![None; d + 1 - i]).collect();
        for (i1, row) in self.rows.iter().enumerate().take(d + 1) {
            for (j1, a) in row.iter().enumerate().take(d + 1 - i1) {
                if a.is_exact_zero() {
                    continue;
                }
                let rest = d - i1 - j1;
                for i2 in 0..=rest {
                    for j2 in 0..=rest - i2 {
                        let b = &other.rows[i2][j2];
                        if b.is_exact_zero() {
                            continue;
                        }
                        let t = a.mul(b);
                        let slot = &mut acc[i1 + i2][j1 + j2];
                        *slot = Some(match slot.take() {
                            None => t,
                            Some(s) => s.add(&t),
                        });
                    }
                }
            }
        }
        let rows = acc
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.unwrap_or_else(|| C::zero(&self.field))).collect())
            .collect();
        BivariateSeries { field: self.field.clone(), rows }
    }

    pub fn pow(&self, n: u64) -> Self {
        let mut result = Self::zero(&self.field, self.deg());
        result.rows[0][0] = C::one(&self.field);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `F(Y, X)`.
    pub fn swap(&self) -> Self {
        Self::from_fn(&self.field, self.deg(), |i, j| self.rows[j][i].clone())
    }

    /// `F(X, 0)` as a series in `X`.
    pub fn restrict_x(&self) -> PowerSeries<C> {
        PowerSeries::new(&self.field, self.rows.iter().map(|r| r[0].clone()).collect()).with_var("X")
    }

    /// `F(0, Y)` as a series in `Y`.
    pub fn restrict_y(&self) -> PowerSeries<C> {
        PowerSeries::new(&self.field, self.rows[0].clone()).with_var("Y")
    }

    /// `F(T, T)`.
    pub fn diagonal(&self) -> PowerSeries<C> {
        let d = self.deg();
        let mut coeffs = vec![C::zero(&self.field); d + 1];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(c);
            }
        }
        PowerSeries::new(&self.field, coeffs)
    }

    /// `g(F(X, Y))`; requires `F(0, 0) = 0`.
    pub fn substitute_into(&self, outer: &PowerSeries<C>) -> Result<Self, SeriesError> {
        if !self.rows[0][0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let d = self.deg().min(outer.deg());
        let inner = self.truncate(d);
        let top = match outer.coeffs()[..=d].iter().rposition(|c| !c.is_exact_zero()) {
            Some(t) => t,
            None => return Ok(Self::zero(&self.field, d)),
        };
        let mut acc = Self::zero(&self.field, d);
        acc.rows[0][0] = outer.coeff(top).clone();
        for k in (0..top).rev() {
            acc = acc.mul(&inner);
            acc.rows[0][0] = acc.rows[0][0].add(outer.coeff(k));
        }
        Ok(acc)
    }

    /// `F(u(X), v(Y))` for series `u`, `v` without constant term.
    pub fn eval_series(&self, u: &PowerSeries<C>, v: &PowerSeries<C>) -> Result<Self, SeriesError> {
        if !u.coeff(0).is_zero() || !v.coeff(0).is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let d = self.deg().min(u.deg()).min(v.deg());
        let powers = |s: &PowerSeries<C>| {
            let s = s.truncate(d);
            let mut out = vec![PowerSeries::one(&self.field, d).with_var(s.var())];
            for k in 1..=d {
                out.push(out[k - 1].mul(&s));
            }
            out
        };
        let up = powers(u);
        let vp = powers(v);
        let mut acc: Vec<Vec<C>> = (0..=d).map(|i| vec![C::zero(&self.field); d + 1 - i]).collect();
        for i in 0..=d {
            for j in 0..=d - i {
                let c = &self.rows[i][j];
                if c.is_exact_zero() {
                    continue;
                }
                // u^i has T-valuation ≥ i, v^j ≥ j
                for a in i..=d - j {
                    let ua = up[i].coeff(a);
                    if ua.is_exact_zero() {
                        continue;
                    }
                    let cu = c.mul(ua);
                    for b in j..=d - a {
                        let vb = vp[j].coeff(b);
                        if vb.is_exact_zero() {
                            continue;
                        }
                        acc[a][b] = acc[a][b].add(&cu.mul(vb));
                    }
                }
            }
        }
        Ok(BivariateSeries { field: self.field.clone(), rows: acc })
    }

    pub fn to_json(&self) -> BivariateJson {
        BivariateJson { deg: self.deg(), coeffs: self.rows.iter().map(|r| r.iter().map(|c| c.to_value()).collect()).collect() }
    }

    pub fn from_json(field: &Field, repr: &BivariateJson) -> Result<Self, SeriesError> {
        let d = repr.deg;
        if repr.coeffs.len() != d + 1 || repr.coeffs.iter().enumerate().any(|(i, r)| r.len() != d + 1 - i) {
            return Err(SeriesError::Malformed(format!("bivariate D = {d} needs triangular rows")));
        }
        let rows = repr
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| C::from_value(field, v).map_err(|e| SeriesError::Malformed(format!("coeffs[{i}][{j}]: {e}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(BivariateSeries { field: field.clone(), rows })
    }
}

impl BivariateSeries<OElement> {
    pub fn change_field(&self, target: &Field) -> Result<Self, SeriesError> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.change_field(target)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        Ok(BivariateSeries { field: target.clone(), rows })
    }

    pub fn to_laurent(&self) -> BivariateSeries<LaurentScalar> {
        self.map(|c| LaurentScalar::integral(c.clone()))
    }

    pub fn min_pi_prec(&self) -> u32 {
        self.rows.iter().flatten().map(|c| c.pi_prec()).min().unwrap_or(0)
    }
}

impl<C: Scalar> PartialEq for BivariateSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        self.compatible(other)
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x == y))
    }
}

impl<C: Scalar> fmt::Debug for BivariateSeries<C> {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    terms.push(format!("({c:?})·X^{i}Y^{j}"));
                }
            }
        }
        write!(fmt, "{} + O(deg {})", if terms.is_empty() { "0".into() } else { terms.join(" + ") }, self.deg() + 1)
    }
}

/// Wire form `{ "D": int, "coeffs": [[...], ...] }`, row `i` holding the
/// coefficients of `X^i Y^j` for `j = 0..=D-i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateJson {
    #[serde(rename = "D")]
    pub deg: usize,
    pub coeffs: Vec<Vec<Value>>,
}
