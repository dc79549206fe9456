//! Length-two ramified Witt vectors and δ-structures.
//!
//! `W(A)` is modelled on pairs `(a0, a1)` over a [`Carrier`] with
//!
//! ```text
//! a +_W b = (a0 + b0, a1 + b1 + ⟨a0,b0⟩_q / π),  ⟨x,y⟩_q = x^q + y^q − (x+y)^q
//! a ×_W b = (a0·b0, π·a1·b1 + a1·b0^q + b1·a0^q)
//! ```
//!
//! and checked against the ghost map `(a0, a1) ↦ (a0, a0^q + π·a1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::field::{Field, OElement};
use crate::series::PowerSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error("not divisible by π: {0}")]
    NotDivisible(String),
    #[error("components live in different carrier instances")]
    Mismatch,
    #[error("malformed value: {0}")]
    Malformed(String),
}

/// A commutative `o_L`-algebra with enough structure for length-two Witt
/// vectors: ring operations, the `q`-th power, and multiplication and exact
/// division by `π`.
pub trait Carrier: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self {
        self.zero_like().sub(self)
    }
    fn q(&self) -> u64;
    fn pow_q(&self) -> Self {
        let mut acc = self.one_like();
        for _ in 0..self.q() {
            acc = acc.mul(self);
        }
        acc
    }
    fn mul_pi(&self) -> Self;
    fn div_pi(&self) -> Result<Self, WittError>;
    fn same_instance(&self, other: &Self) -> bool;
    fn to_value(&self) -> Value;
    /// Parses a value living in the same instance as `self`.
    fn from_value_like(&self, v: &Value) -> Result<Self, WittError>;
}

/// `Z/p^M` with `π = p` and `q = p`, tracking how many `p`-adic digits of the
/// value are known.
#[derive(Clone, Copy)]
pub struct ZMod {
    p: u64,
    m: u32,
    value: u64,
    prec: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZModJson {
    pub p: u64,
    #[serde(rename = "M")]
    pub m: u32,
    pub value: u64,
    pub prec: u32,
}

impl ZMod {
    /// `x mod p^m`; requires `p^m < 2^62`.
    pub fn new(p: u64, m: u32, x: i64) -> Self {
        let modulus = p.checked_pow(m).filter(|&n| n < 1 << 62).expect("p^M must stay below 2^62");
        let v = x.rem_euclid(modulus as i64) as u64;
        ZMod { p, m, value: v, prec: m }
    }

    fn modulus(&self) -> u64 {
        self.p.pow(self.m)
    }

    fn canonical(p: u64, m: u32, value: u64, prec: u32) -> Self {
        let prec = prec.min(m);
        ZMod { p, m, value: value % p.pow(prec), prec }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn modulus_exponent(&self) -> u32 {
        self.m
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// `p`-adic valuation, capped at the known precision.
    pub fn valuation(&self) -> u32 {
        let mut v = 0;
        let mut x = self.value;
        while v < self.prec && x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    fn assert_same(&self, other: &Self) {
        assert!(self.same_instance(other), "ZMod instances differ");
    }

    pub fn to_json(&self) -> ZModJson {
        ZModJson { p: self.p, m: self.m, value: self.value, prec: self.prec }
    }

    pub fn from_json(repr: &ZModJson) -> Result<Self, WittError> {
        let ok = repr.p >= 2 && repr.p.checked_pow(repr.m).is_some_and(|n| n < 1 << 62) && repr.prec <= repr.m;
        if !ok {
            return Err(WittError::Malformed(format!("bad Z/p^M parameters p = {}, M = {}", repr.p, repr.m)));
        }
        if repr.value >= repr.p.pow(repr.prec) {
            return Err(WittError::Malformed("value exceeds p^prec".into()));
        }
        Ok(ZMod { p: repr.p, m: repr.m, value: repr.value, prec: repr.prec })
    }
}

impl PartialEq for ZMod {
    fn eq(&self, other: &Self) -> bool {
        if !self.same_instance(other) {
            return false;
        }
        let n = self.p.pow(self.prec.min(other.prec));
        self.value % n == other.value % n
    }
}

impl fmt::Debug for ZMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.value, self.p, self.prec)
    }
}

impl Carrier for ZMod {
    fn zero_like(&self) -> Self {
        ZMod::new(self.p, self.m, 0)
    }
    fn one_like(&self) -> Self {
        ZMod::new(self.p, self.m, 1)
    }
    fn add(&self, other: &Self) -> Self {
        self.assert_same(other);
        let n = self.modulus();
        Self::canonical(self.p, self.m, (self.value + other.value) % n, self.prec.min(other.prec))
    }
    fn sub(&self, other: &Self) -> Self {
        self.assert_same(other);
        let n = self.modulus();
        Self::canonical(self.p, self.m, (self.value + n - other.value) % n, self.prec.min(other.prec))
    }
    fn mul(&self, other: &Self) -> Self {
        self.assert_same(other);
        let n = self.modulus() as u128;
        let v = (self.value as u128 * other.value as u128 % n) as u64;
        let prec = (self.prec + other.valuation()).min(other.prec + self.valuation());
        Self::canonical(self.p, self.m, v, prec)
    }
    fn q(&self) -> u64 {
        self.p
    }
    fn mul_pi(&self) -> Self {
        let n = self.modulus() as u128;
        Self::canonical(self.p, self.m, (self.value as u128 * self.p as u128 % n) as u64, self.prec + 1)
    }
    fn div_pi(&self) -> Result<Self, WittError> {
        if self.prec == 0 || self.value % self.p != 0 {
            return Err(WittError::NotDivisible(format!("{self:?}")));
        }
        Ok(Self::canonical(self.p, self.m, self.value / self.p, self.prec - 1))
    }
    fn same_instance(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.to_json()).expect("plain struct")
    }
    fn from_value_like(&self, v: &Value) -> Result<Self, WittError> {
        let repr: ZModJson = serde_json::from_value(v.clone()).map_err(|e| WittError::Malformed(e.to_string()))?;
        let z = ZMod::from_json(&repr)?;
        if !z.same_instance(self) {
            return Err(WittError::Mismatch);
        }
        Ok(z)
    }
}

impl Carrier for OElement {
    fn zero_like(&self) -> Self {
        OElement::zero(self.field())
    }
    fn one_like(&self) -> Self {
        OElement::one(self.field())
    }
    fn add(&self, other: &Self) -> Self {
        OElement::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        OElement::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        OElement::mul(self, other)
    }
    fn neg(&self) -> Self {
        OElement::neg(self)
    }
    fn q(&self) -> u64 {
        self.field().q()
    }
    fn pow_q(&self) -> Self {
        self.pow(self.field().q())
    }
    fn mul_pi(&self) -> Self {
        self.mul_pi_pow(1)
    }
    fn div_pi(&self) -> Result<Self, WittError> {
        self.div_pi_exact(1).map_err(|_| WittError::NotDivisible(format!("{self:?}")))
    }
    fn same_instance(&self, other: &Self) -> bool {
        self.same_field(other)
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.to_json()).expect("plain struct")
    }
    fn from_value_like(&self, v: &Value) -> Result<Self, WittError> {
        let repr = serde_json::from_value(v.clone()).map_err(|e| WittError::Malformed(e.to_string()))?;
        OElement::from_json(self.field(), &repr).map_err(|e| WittError::Malformed(e.to_string()))
    }
}

impl Carrier for PowerSeries {
    fn zero_like(&self) -> Self {
        PowerSeries::zero(self.field(), self.deg()).with_var(self.var())
    }
    fn one_like(&self) -> Self {
        PowerSeries::one(self.field(), self.deg()).with_var(self.var())
    }
    fn add(&self, other: &Self) -> Self {
        PowerSeries::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        PowerSeries::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        PowerSeries::mul(self, other)
    }
    fn neg(&self) -> Self {
        PowerSeries::neg(self)
    }
    fn q(&self) -> u64 {
        self.field().q()
    }
    fn pow_q(&self) -> Self {
        self.pow(self.field().q())
    }
    fn mul_pi(&self) -> Self {
        self.mul_pi_pow(1)
    }
    fn div_pi(&self) -> Result<Self, WittError> {
        self.div_pi_exact(1).map_err(|e| WittError::NotDivisible(e.to_string()))
    }
    fn same_instance(&self, other: &Self) -> bool {
        self.deg() == other.deg() && self.var() == other.var() && self.coeff(0).same_field(other.coeff(0))
    }
    fn to_value(&self) -> Value {
        serde_json::to_value(self.to_json()).expect("plain struct")
    }
    fn from_value_like(&self, v: &Value) -> Result<Self, WittError> {
        let repr = serde_json::from_value(v.clone()).map_err(|e| WittError::Malformed(e.to_string()))?;
        PowerSeries::from_json(self.field(), &repr).map_err(|e| WittError::Malformed(e.to_string()))
    }
}

/// A length-two Witt vector `(a0, a1)`.
#[derive(Clone, PartialEq)]
pub struct WittPair<C> {
    pub a0: C,
    pub a1: C,
}

impl<C: Carrier> fmt::Debug for WittPair<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.a0, self.a1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WittJson {
    pub a0: Value,
    pub a1: Value,
}

impl<C: Carrier> WittPair<C> {
    pub fn new(a0: C, a1: C) -> Result<Self, WittError> {
        if !a0.same_instance(&a1) {
            return Err(WittError::Mismatch);
        }
        Ok(WittPair { a0, a1 })
    }

    pub fn zero_like(x: &C) -> Self {
        WittPair { a0: x.zero_like(), a1: x.zero_like() }
    }

    pub fn one_like(x: &C) -> Self {
        WittPair { a0: x.one_like(), a1: x.zero_like() }
    }

    /// The Teichmüller-style embedding `a ↦ (a, 0)`.
    pub fn constant(a: C) -> Self {
        let z = a.zero_like();
        WittPair { a0: a, a1: z }
    }

    pub fn to_json(&self) -> WittJson {
        WittJson { a0: self.a0.to_value(), a1: self.a1.to_value() }
    }

    pub fn from_json(like: &C, repr: &WittJson) -> Result<Self, WittError> {
        Self::new(like.from_value_like(&repr.a0)?, like.from_value_like(&repr.a1)?)
    }
}

/// `⟨x,y⟩_q = x^q + y^q − (x+y)^q`.
pub fn bracket<C: Carrier>(x: &C, y: &C) -> C {
    x.pow_q().add(&y.pow_q()).sub(&x.add(y).pow_q())
}

fn check_instances<C: Carrier>(a: &WittPair<C>, b: &WittPair<C>) -> Result<(), WittError> {
    if a.a0.same_instance(&b.a0) && a.a0.same_instance(&a.a1) && b.a0.same_instance(&b.a1) {
        Ok(())
    } else {
        Err(WittError::Mismatch)
    }
}

pub fn witt_add<C: Carrier>(a: &WittPair<C>, b: &WittPair<C>) -> Result<WittPair<C>, WittError> {
    check_instances(a, b)?;
    let carry = bracket(&a.a0, &b.a0).div_pi()?;
    Ok(WittPair { a0: a.a0.add(&b.a0), a1: a.a1.add(&b.a1).add(&carry) })
}

/// Additive inverse: `(−a0, −a1 − ⟨a0, −a0⟩_q / π)`.
pub fn witt_neg<C: Carrier>(a: &WittPair<C>) -> Result<WittPair<C>, WittError> {
    let n0 = a.a0.neg();
    let carry = bracket(&a.a0, &n0).div_pi()?;
    Ok(WittPair { a0: n0, a1: a.a1.neg().sub(&carry) })
}

/// Which second component the product uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MulLaw {
    /// `π·a1·b1 + a1·b0^q + b1·a0^q`, compatible with the ghost map.
    #[default]
    Crossed,
    /// `π·a1·b1 + a1·a0^q + b1·b0^q`, kept as a known-bad regression target.
    Literal,
}

pub fn witt_mul<C: Carrier>(a: &WittPair<C>, b: &WittPair<C>) -> Result<WittPair<C>, WittError> {
    witt_mul_with(a, b, MulLaw::Crossed)
}

pub fn witt_mul_with<C: Carrier>(a: &WittPair<C>, b: &WittPair<C>, law: MulLaw) -> Result<WittPair<C>, WittError> {
    check_instances(a, b)?;
    let (x, y) = match law {
        MulLaw::Crossed => (b.a0.pow_q(), a.a0.pow_q()),
        MulLaw::Literal => (a.a0.pow_q(), b.a0.pow_q()),
    };
    let a1 = a.a1.mul(&b.a1).mul_pi().add(&a.a1.mul(&x)).add(&b.a1.mul(&y));
    Ok(WittPair { a0: a.a0.mul(&b.a0), a1 })
}

/// Ghost components `(a0, a0^q + π·a1)`.
pub fn ghost_map<C: Carrier>(a: &WittPair<C>) -> (C, C) {
    (a.a0.clone(), a.a0.pow_q().add(&a.a1.mul_pi()))
}

type LiftFn<C> = dyn Fn(&C) -> Result<C, WittError> + Send + Sync;

/// A Frobenius lift `φ` on a carrier, with `δ(a) = (φ(a) − a^q)/π`.
#[derive(Clone)]
pub struct DeltaOperator<C> {
    name: String,
    lift: Arc<LiftFn<C>>,
}

impl<C> fmt::Debug for DeltaOperator<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DeltaOperator({})", self.name)
    }
}

impl<C: Carrier + 'static> DeltaOperator<C> {
    pub fn from_lift(name: &str, lift: impl Fn(&C) -> Result<C, WittError> + Send + Sync + 'static) -> Self {
        DeltaOperator { name: name.to_string(), lift: Arc::new(lift) }
    }

    /// `φ = id`, a lift on rings whose residue ring is `F_q`-valued pointwise
    /// (`a^q ≡ a mod π`), e.g. `o_L` and `Z/p^M`.
    pub fn identity() -> Self {
        Self::from_lift("identity", |a: &C| Ok(a.clone()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phi(&self, a: &C) -> Result<C, WittError> {
        (self.lift)(a)
    }
}

impl DeltaOperator<PowerSeries> {
    /// The canonical `δ_L` on `o_L[[T]]`: `φ` fixes `o_L` and sends `T ↦ f(T)`.
    pub fn lubin_tate(f: &PowerSeries) -> Self {
        let f = f.clone();
        Self::from_lift("lubin-tate", move |g: &PowerSeries| {
            let inner = f.truncate(g.deg().min(f.deg())).with_var(g.var());
            g.compose(&inner).map_err(|e| WittError::Malformed(e.to_string()))
        })
    }
}

/// `δ(a) = (φ(a) − a^q)/π`; a failed division means `φ` is not a lift at `a`.
pub fn delta_apply<C: Carrier + 'static>(delta: &DeltaOperator<C>, a: &C) -> Result<C, WittError> {
    let diff = delta.phi(a)?.sub(&a.pow_q());
    diff.div_pi()
        .map_err(|_| WittError::NotDivisible(format!("φ(a) − a^q is not divisible by π at a = {a:?}")))
}

/// `a ↦ (a, δ(a))`.
pub fn section<C: Carrier + 'static>(delta: &DeltaOperator<C>, a: &C) -> Result<WittPair<C>, WittError> {
    Ok(WittPair { a0: a.clone(), a1: delta_apply(delta, a)? })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub pass: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<String>,
}

impl CheckResult {
    fn new() -> Self {
        CheckResult { pass: true, checked: 0, counterexample: None }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.pass {
            self.pass = false;
            self.counterexample = Some(describe());
        }
    }
}

/// Named checks, each with a verdict and the first counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckReport {
    pub checks: BTreeMap<String, CheckResult>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    fn record(&mut self, name: &str, ok: bool, describe: impl FnOnce() -> String) {
        self.checks.entry(name.to_string()).or_insert_with(CheckResult::new).record(ok, describe);
    }

    /// Records `Ok(true)` as a pass and anything else as a failure.
    fn record_result(&mut self, name: &str, r: Result<bool, WittError>, describe: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.record(name, ok, describe),
            Err(e) => self.record(name, false, || format!("{}: {e}", describe())),
        }
    }
}

/// Checks that `a ↦ (a, δ(a))` preserves `+_W` and `×_W` on each sample pair.
pub fn section_check<C: Carrier + 'static>(delta: &DeltaOperator<C>, samples: &[(C, C)]) -> CheckReport {
    let mut report = CheckReport::default();
    for (a, b) in samples {
        let describe = || format!("a = {a:?}, b = {b:?}");
        let sums = (|| {
            let lhs = section(delta, &a.add(b))?;
            let rhs = witt_add(&section(delta, a)?, &section(delta, b)?)?;
            Ok(lhs == rhs)
        })();
        report.record_result("preserves +_W", sums, describe);
        let prods = (|| {
            let lhs = section(delta, &a.mul(b))?;
            let rhs = witt_mul(&section(delta, a)?, &section(delta, b)?)?;
            Ok(lhs == rhs)
        })();
        report.record_result("preserves ×_W", prods, describe);
        let lift = (|| {
            let phi = delta.phi(a)?;
            Ok(phi == a.pow_q().add(&delta_apply(delta, a)?.mul_pi()))
        })();
        report.record_result("φ = a^q + π·δ", lift, describe);
    }
    report
}

/// Ring axioms for `W(A)` and the ghost homomorphism on sample triples.
pub fn ring_axioms<C: Carrier>(triples: &[(WittPair<C>, WittPair<C>, WittPair<C>)], law: MulLaw) -> CheckReport {
    let mut report = CheckReport::default();
    let add = |x: &WittPair<C>, y: &WittPair<C>| witt_add(x, y);
    let mul = |x: &WittPair<C>, y: &WittPair<C>| witt_mul_with(x, y, law);
    for (a, b, c) in triples {
        let describe = || format!("a = {a:?}, b = {b:?}, c = {c:?}");
        let zero = WittPair::zero_like(&a.a0);
        let one = WittPair::one_like(&a.a0);
        report.record_result("add associative", (|| Ok(add(&add(a, b)?, c)? == add(a, &add(b, c)?)?))(), describe);
        report.record_result("add commutative", (|| Ok(add(a, b)? == add(b, a)?))(), describe);
        report.record_result("add neutral", (|| Ok(add(a, &zero)? == *a))(), describe);
        report.record_result("add inverse", (|| Ok(add(a, &witt_neg(a)?)? == zero))(), describe);
        report.record_result("mul associative", (|| Ok(mul(&mul(a, b)?, c)? == mul(a, &mul(b, c)?)?))(), describe);
        report.record_result("mul commutative", (|| Ok(mul(a, b)? == mul(b, a)?))(), describe);
        report.record_result("mul neutral", (|| Ok(mul(a, &one)? == *a))(), describe);
        report.record_result(
            "distributive",
            (|| Ok(mul(a, &add(b, c)?)? == add(&mul(a, b)?, &mul(a, c)?)?))(),
            describe,
        );
        report.record_result(
            "ghost additive",
            (|| {
                let (s0, s1) = ghost_map(&add(a, b)?);
                let (x0, x1) = ghost_map(a);
                let (y0, y1) = ghost_map(b);
                Ok(s0 == x0.add(&y0) && s1 == x1.add(&y1))
            })(),
            describe,
        );
        report.record_result(
            "ghost multiplicative",
            (|| {
                let (s0, s1) = ghost_map(&mul(a, b)?);
                let (x0, x1) = ghost_map(a);
                let (y0, y1) = ghost_map(b);
                Ok(s0 == x0.mul(&y0) && s1 == x1.mul(&y1))
            })(),
            describe,
        );
        report.record_result(
            "kernel squares to π·ab",
            (|| {
                let x = WittPair { a0: a.a0.zero_like(), a1: a.a1.clone() };
                let y = WittPair { a0: b.a0.zero_like(), a1: b.a1.clone() };
                let z = mul(&x, &y)?;
                Ok(z.a0 == a.a0.zero_like() && z.a1 == a.a1.mul(&b.a1).mul_pi())
            })(),
            describe,
        );
    }
    report
}

/// Carriers available to reports and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CarrierKind {
    Zmod,
    Ofield,
    Series,
}

impl CarrierKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zmod" => Some(CarrierKind::Zmod),
            "ofield" => Some(CarrierKind::Ofield),
            "series" => Some(CarrierKind::Series),
            _ => None,
        }
    }
}

/// `Z/p^M` matching an unramified-prime presentation of `field`: `p` and the
/// field's precision.
pub fn zmod_for(field: &Field) -> ZMod {
    ZMod::new(field.p(), field.precision(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn z2(x: i64) -> ZMod {
        ZMod::new(2, 12, x)
    }

    fn w(a0: i64, a1: i64) -> WittPair<ZMod> {
        WittPair::new(z2(a0), z2(a1)).unwrap()
    }

    #[test]
    fn hand_values_over_z2() {
        assert_eq!(witt_add(&w(1, 1), &w(1, 1)).unwrap(), w(2, 1));
        assert_eq!(witt_mul(&w(1, 1), &w(1, 1)).unwrap(), w(1, 4));
        assert_eq!(witt_mul(&w(2, 0), &w(0, 1)).unwrap(), w(0, 4));
        assert_eq!(witt_add(&w(5, 0), &w(0, 7)).unwrap(), w(5, 7));
        let (g0, g1) = ghost_map(&witt_add(&w(1, 1), &w(1, 1)).unwrap());
        assert_eq!((g0, g1), (z2(2), z2(6)));
        assert_eq!(ghost_map(&w(0, 1)), (z2(0), z2(2)));
    }

    #[test]
    fn literal_law_breaks_ghost() {
        // (1,1)×(2,0): ghost (1,3)·(2,4) = (2,12), so a1 = (12 − 4)/2 = 4
        let good = witt_mul(&w(1, 1), &w(2, 0)).unwrap();
        assert_eq!(good, w(2, 4));
        let bad = witt_mul_with(&w(1, 1), &w(2, 0), MulLaw::Literal).unwrap();
        assert_ne!(bad, good);
    }

    #[test]
    fn delta_on_constants() {
        let d = DeltaOperator::<ZMod>::identity();
        let z3 = |x| ZMod::new(3, 12, x);
        assert_eq!(delta_apply(&d, &z3(2)).unwrap(), z3(-2));
        assert_eq!(delta_apply(&d, &z3(1)).unwrap(), z3(0));
        let samples: Vec<_> = (0..20).map(|i| (z3(i * 7 + 1), z3(i * i - 5))).collect();
        assert!(section_check(&d, &samples).pass());
    }

    #[test]
    fn delta_on_series() {
        for (_, field) in presets::all() {
            let deg = 12;
            let f = crate::lubin_tate::FrobeniusSeries::default_for(&field, deg);
            let d = DeltaOperator::lubin_tate(f.series());
            let t = PowerSeries::var_t(&field, deg);
            assert_eq!(delta_apply(&d, &t).unwrap(), t);
            // δ(T²) = πT² + 2T^{q+1}
            let q = field.q() as usize;
            let mut expect = PowerSeries::zero(&field, deg);
            expect.set_coeff(2, OElement::pi(&field));
            expect.set_coeff(q + 1, OElement::from_int(&field, 2));
            assert_eq!(delta_apply(&d, &t.mul(&t)).unwrap(), expect);
        }
    }

    #[test]
    fn non_lift_is_reported() {
        let d = DeltaOperator::<ZMod>::from_lift("shift", |a: &ZMod| Ok(a.add(&a.one_like())));
        assert!(matches!(delta_apply(&d, &z2(0)), Err(WittError::NotDivisible(_))));
    }

    #[test]
    fn axioms_on_small_triples() {
        let field = presets::q2_ramified();
        let el = |a: i64, b: i64| OElement::from_coeffs(&field, &[vec![a], vec![b]]).unwrap();
        let pair = |a, b, c, d| WittPair::new(el(a, b), el(c, d)).unwrap();
        let triples = vec![(pair(1, 2, 3, 1), pair(0, 1, 1, 1), pair(5, 3, -2, 7))];
        assert!(ring_axioms(&triples, MulLaw::Crossed).pass());
        let bad = ring_axioms(&triples, MulLaw::Literal);
        assert!(!bad.checks["ghost multiplicative"].pass);
    }

    #[test]
    fn zmod_json_round_trip() {
        let x = z2(76).div_pi().unwrap();
        assert_eq!(ZMod::from_json(&x.to_json()).unwrap().to_json(), x.to_json());
        let p = w(3, 9);
        assert_eq!(WittPair::from_json(&z2(0), &p.to_json()).unwrap(), p);
    }
}
