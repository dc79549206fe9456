//! Finite-precision arithmetic in `o_L = W(k_L)[π]/E(π)`.
//!
//! An element is stored on the basis `π^i ω^j` (`i < e`, `j < f`) with integer
//! residues modulo `p^M`, where `ω` is the class of `y` modulo the unramified
//! polynomial `g`. Precision is tracked per element in π-adic units: an element
//! with precision `N` is known modulo `π^N`, and `N ≤ e·M`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Shared handle to a validated field presentation.
pub type Field = Arc<LocalFieldSpec>;

type Coeffs = SmallVec<[u64; 4]>;

/// Largest admissible `p^M`; residue products are formed in `u128`.
const MODULUS_LIMIT: u128 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("E is not Eisenstein: {0}")]
    NotEisenstein(String),
    #[error("g is reducible modulo p")]
    ReducibleResidual,
    #[error("bad precision: {0}")]
    BadPrecision(String),
    #[error("malformed polynomial: {0}")]
    Malformed(String),
    #[error("elements belong to different fields")]
    SpecMismatch,
    #[error("element has π-valuation {valuation}, cannot divide by π^{k}")]
    NotDivisible { valuation: u32, k: u32 },
    #[error("element is not a unit")]
    NotUnit,
    #[error("precision exhausted: known modulo π^{precision}, need more than {needed}")]
    PrecisionExhausted { precision: u32, needed: u32 },
}

/// Wire form of a field presentation: `{ "p", "g", "E", "M" }`.
///
/// `g` lists integer coefficients in ascending degree. `E` lists its
/// coefficients in ascending degree, each one an element of `W(k_L)` written
/// as integer coefficients of `1, ω, …, ω^{f-1}` (short rows are zero padded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpecJson {
    pub p: u64,
    pub g: Vec<i64>,
    #[serde(rename = "E")]
    pub e_poly: Vec<Vec<i64>>,
    #[serde(rename = "M")]
    pub m: u32,
}

/// A validated presentation of `L/Q_p` together with a working precision.
#[derive(Clone)]
pub struct LocalFieldSpec {
    p: u64,
    g: Vec<i64>,
    e_poly: Vec<Vec<i64>>,
    m: u32,
    f: usize,
    e: usize,
    q: u64,
    /// `p^k` for `k = 0..=M`.
    ppow: Vec<u64>,
    /// `ω^f = Σ g_red[j] ω^j`.
    g_red: Vec<u64>,
    /// `π^e = Σ e_red[i] π^i`, each `e_red[i] ∈ W(k_L)`.
    e_red: Vec<Vec<u64>>,
    /// The unit `w` with `π^e = p·w`, and its inverse.
    w: Coeffs,
    w_inv: Coeffs,
}

impl fmt::Debug for LocalFieldSpec {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("LocalFieldSpec")
            .field("p", &self.p)
            .field("g", &self.g)
            .field("E", &self.e_poly)
            .field("M", &self.m)
            .finish()
    }
}

impl PartialEq for LocalFieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.g == other.g && self.e_poly == other.e_poly && self.m == other.m
    }
}

impl Eq for LocalFieldSpec {}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn vp_int(x: i64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut x = x.unsigned_abs();
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Dense polynomials over `F_p`, ascending coefficients, used for the
/// irreducibility test of `g`.
mod fp_poly {
    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    fn inv(a: u64, p: u64) -> u64 {
        let mut r = 1u64;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead_inv = inv(b[db], p);
        while r.len() > db {
            let top = r.len() - 1;
            let c = r[top] * lead_inv % p;
            for (k, bk) in b.iter().enumerate() {
                let idx = top - db + k;
                r[idx] = (r[idx] + p - c * bk % p) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&out, m, p)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }
}

/// Ben-Or: a polynomial of degree f over F_p is irreducible iff it shares no
/// factor with `y^{p^i} - y` for `1 ≤ i ≤ f/2`.
fn irreducible_mod_p(g: &[i64], p: u64) -> bool {
    let gm: Vec<u64> = g.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
    let f = gm.len() - 1;
    let mut frob = vec![0u64, 1];
    for _ in 1..=f / 2 {
        // frob <- frob^p mod g
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = fp_poly::mul_mod(&acc, &frob, &gm, p);
        }
        frob = acc;
        let mut h = frob.clone();
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        fp_poly::trim(&mut h);
        let d = fp_poly::gcd(&gm, &h, p);
        if d.len() != 1 {
            return false;
        }
    }
    true
}

impl LocalFieldSpec {
    /// Validates `(p, g, E, M)` and precomputes the reduction tables.
    pub fn new(p: u64, g: Vec<i64>, e_poly: Vec<Vec<i64>>, m: u32) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if m < 2 {
            return Err(FieldError::BadPrecision(format!("M = {m} < 2")));
        }
        let mut pm: u128 = 1;
        for _ in 0..m {
            pm *= p as u128;
            if pm >= MODULUS_LIMIT {
                return Err(FieldError::BadPrecision(format!("p^M = {p}^{m} exceeds 2^62")));
            }
        }
        if g.len() < 2 || *g.last().unwrap() != 1 {
            return Err(FieldError::Malformed("g must be monic of degree ≥ 1".into()));
        }
        let f = g.len() - 1;
        if !irreducible_mod_p(&g, p) {
            return Err(FieldError::ReducibleResidual);
        }
        if e_poly.len() < 2 {
            return Err(FieldError::Malformed("E must have degree ≥ 1".into()));
        }
        let e = e_poly.len() - 1;
        let mut e_poly: Vec<Vec<i64>> = e_poly;
        for c in e_poly.iter_mut() {
            if c.len() > f {
                if c[f..].iter().any(|&x| x != 0) {
                    return Err(FieldError::Malformed(
                        "coefficient of E has ω-degree ≥ f".into(),
                    ));
                }
                c.truncate(f);
            }
            c.resize(f, 0);
        }
        let lead = &e_poly[e];
        if lead[0] != 1 || lead[1..].iter().any(|&x| x != 0) {
            return Err(FieldError::Malformed("E must be monic".into()));
        }
        for (i, c) in e_poly[..e].iter().enumerate() {
            let v = c.iter().map(|&x| vp_int(x, p)).min().unwrap();
            if v == 0 {
                return Err(FieldError::NotEisenstein(format!(
                    "coefficient of x^{i} is not divisible by {p}"
                )));
            }
            if i == 0 && v != 1 {
                return Err(FieldError::NotEisenstein(format!(
                    "constant term has {p}-valuation {}",
                    if v == u32::MAX { "∞".to_string() } else { v.to_string() }
                )));
            }
        }

        let mut ppow = Vec::with_capacity(m as usize + 1);
        let mut acc = 1u64;
        for _ in 0..=m {
            ppow.push(acc);
            acc = acc.wrapping_mul(p);
        }
        let pm = ppow[m as usize];
        let red = |x: i64| x.rem_euclid(pm as i64) as u64;
        let g_red = g[..f].iter().map(|&c| red(-c)).collect();
        let e_red = e_poly[..e]
            .iter()
            .map(|c| c.iter().map(|&x| red(-x)).collect())
            .collect();

        let mut spec = LocalFieldSpec {
            p,
            g,
            e_poly,
            m,
            f,
            e,
            q: p.pow(f as u32),
            ppow,
            g_red,
            e_red,
            w: Coeffs::new(),
            w_inv: Coeffs::new(),
        };
        // w = -Σ_{i<e} (E_i / p) π^i
        let mut w: Coeffs = smallvec::smallvec![0; e * f];
        for i in 0..e {
            for j in 0..f {
                let c = spec.e_poly[i][j] / p as i64;
                w[i * f + j] = red(-c);
            }
        }
        spec.w_inv = spec.raw_unit_inverse(&w);
        spec.w = w;
        Ok(Arc::new(spec))
    }

    pub fn from_json(repr: &FieldSpecJson) -> Result<Field, FieldError> {
        Self::new(repr.p, repr.g.clone(), repr.e_poly.clone(), repr.m)
    }

    pub fn to_json(&self) -> FieldSpecJson {
        FieldSpecJson {
            p: self.p,
            g: self.g.clone(),
            e_poly: self.e_poly.clone(),
            m: self.m,
        }
    }

    /// Same presentation at a different working precision.
    pub fn with_precision(&self, m: u32) -> Result<Field, FieldError> {
        Self::new(self.p, self.g.clone(), self.e_poly.clone(), m)
    }

    /// Largest `M` with `p^M < 2^62`.
    pub fn max_precision(&self) -> u32 {
        let mut m = 1;
        while self.p.checked_pow(m + 1).is_some_and(|n| n < 1 << 62) {
            m += 1;
        }
        m
    }

    /// Same presentation at the largest admissible precision.
    pub fn with_max_precision(&self) -> Field {
        self.with_guard_digits(self.max_precision().saturating_sub(self.m))
    }

    /// Same presentation at `M + guard`, clamped to the largest admissible `M`.
    pub fn with_guard_digits(&self, guard: u32) -> Field {
        let mut target = (self.m + guard).min(self.max_precision().max(self.m));
        loop {
            match self.with_precision(target) {
                Ok(f) => return f,
                Err(_) if target > self.m => target -= 1,
                Err(_) => unreachable!("spec already validated at its own precision"),
            }
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    /// Residue degree.
    pub fn f(&self) -> usize {
        self.f
    }
    /// Ramification index.
    pub fn e(&self) -> usize {
        self.e
    }
    /// Residue field size `p^f`.
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Absolute degree `e·f`.
    pub fn n(&self) -> usize {
        self.e * self.f
    }
    /// Working precision exponent `M` (elements are exact modulo `p^M`).
    pub fn precision(&self) -> u32 {
        self.m
    }
    /// Largest π-adic precision an element can carry, `e·M`.
    pub fn max_pi_prec(&self) -> u32 {
        self.e as u32 * self.m
    }
    pub fn modulus(&self) -> u64 {
        self.ppow[self.m as usize]
    }
    pub fn g_coeffs(&self) -> &[i64] {
        &self.g
    }
    pub fn e_coeffs(&self) -> &[Vec<i64>] {
        &self.e_poly
    }

    fn len(&self) -> usize {
        self.e * self.f
    }

    #[inline]
    fn addm(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        let pm = self.modulus();
        if s >= pm {
            s - pm
        } else {
            s
        }
    }

    #[inline]
    fn subm(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus() - b
        }
    }

    #[inline]
    fn mulm(&self, a: u64, b: u64) -> u64 {
        let pm = self.modulus();
        if pm <= 1 << 32 {
            (a * b) % pm
        } else {
            ((a as u128 * b as u128) % pm as u128) as u64
        }
    }

    fn reduce_int(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus() as i64) as u64
    }

    /// Product in `W(k_L)/p^M`, reducing by `g`.
    fn w_mul(&self, a: &[u64], b: &[u64]) -> SmallVec<[u64; 8]> {
        let f = self.f;
        let mut prod: SmallVec<[u64; 8]> = smallvec::smallvec![0; 2 * f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    prod[i + j] = self.addm(prod[i + j], self.mulm(x, y));
                }
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for j in 0..f {
                let t = self.mulm(c, self.g_red[j]);
                prod[k - f + j] = self.addm(prod[k - f + j], t);
            }
        }
        prod.truncate(f);
        prod
    }

    fn raw_mul(&self, a: &[u64], b: &[u64]) -> Coeffs {
        let (e, f) = (self.e, self.f);
        if e == 1 && f == 1 {
            return smallvec::smallvec![self.mulm(a[0], b[0])];
        }
        if e == 1 {
            return self.w_mul(a, b).into_iter().collect();
        }
        let mut prod: Vec<SmallVec<[u64; 8]>> = vec![smallvec::smallvec![0; f]; 2 * e - 1];
        for i in 0..e {
            let ai = &a[i * f..(i + 1) * f];
            if ai.iter().all(|&x| x == 0) {
                continue;
            }
            for k in 0..e {
                let bk = &b[k * f..(k + 1) * f];
                if bk.iter().all(|&x| x == 0) {
                    continue;
                }
                let t = self.w_mul(ai, bk);
                for j in 0..f {
                    prod[i + k][j] = self.addm(prod[i + k][j], t[j]);
                }
            }
        }
        for k in (e..2 * e - 1).rev() {
            let c = std::mem::replace(&mut prod[k], smallvec::smallvec![0; f]);
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for i in 0..e {
                let t = self.w_mul(&c, &self.e_red[i]);
                for j in 0..f {
                    prod[k - e + i][j] = self.addm(prod[k - e + i][j], t[j]);
                }
            }
        }
        let mut out = Coeffs::with_capacity(e * f);
        for row in prod.iter().take(e) {
            out.extend_from_slice(row);
        }
        out
    }

    fn raw_one(&self) -> Coeffs {
        let mut c: Coeffs = smallvec::smallvec![0; self.len()];
        c[0] = 1 % self.modulus();
        c
    }

    fn raw_pow(&self, a: &[u64], mut n: u64) -> Coeffs {
        let mut result = self.raw_one();
        let mut base: Coeffs = a.into();
        while n > 0 {
            if n & 1 == 1 {
                result = self.raw_mul(&result, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.raw_mul(&base, &base);
            }
        }
        result
    }

    /// Inverse of a unit by Newton iteration seeded with `x^{q-2}`, which
    /// inverts `x` modulo π since `k_L^×` has order `q - 1`.
    fn raw_unit_inverse(&self, x: &[u64]) -> Coeffs {
        let mut y = self.raw_pow(x, self.q - 2);
        let mut reached = 1u32;
        let two = {
            let mut c: Coeffs = smallvec::smallvec![0; self.len()];
            c[0] = 2 % self.modulus();
            c
        };
        while reached < self.max_pi_prec() {
            let xy = self.raw_mul(x, &y);
            let corr: Coeffs = two.iter().zip(&xy).map(|(&a, &b)| self.subm(a, b)).collect();
            y = self.raw_mul(&y, &corr);
            reached *= 2;
        }
        y
    }

    /// `p`-adic valuation of the `W(k_L)` block at π-degree `i`, or `M` if zero.
    fn block_vp(&self, c: &[u64], i: usize) -> u32 {
        let f = self.f;
        c[i * f..(i + 1) * f]
            .iter()
            .map(|&x| {
                if x == 0 {
                    self.m
                } else if self.p == 2 {
                    x.trailing_zeros()
                } else {
                    let mut v = 0;
                    let mut x = x;
                    while x % self.p == 0 {
                        x /= self.p;
                        v += 1;
                    }
                    v
                }
            })
            .min()
            .unwrap()
    }

    /// Zeroes every digit beyond π-precision `prec`: the block at `π^i` is
    /// known modulo `p^{⌈(prec - i)/e⌉}`.
    fn canonicalize(&self, c: &mut [u64], prec: u32) {
        let (e, f) = (self.e as u32, self.f);
        for i in 0..self.e {
            let digits = if prec > i as u32 { (prec - i as u32).div_ceil(e).min(self.m) } else { 0 };
            if digits == self.m {
                continue;
            }
            let md = self.ppow[digits as usize];
            for x in &mut c[i * f..(i + 1) * f] {
                *x %= md;
            }
        }
    }

    fn raw_valuation(&self, c: &[u64]) -> u32 {
        (0..self.e)
            .map(|i| self.e as u32 * self.block_vp(c, i) + i as u32)
            .min()
            .unwrap()
    }

    /// One exact division by π. Requires the `π^0` block to be divisible by `p`.
    /// Uses `a/π = Σ_{i≥1} c_i π^{i-1} + (c_0/p)·π^{e-1}·w^{-1}`.
    fn raw_div_pi(&self, c: &[u64]) -> Coeffs {
        let (e, f) = (self.e, self.f);
        let mut out: Coeffs = smallvec::smallvec![0; e * f];
        out[..(e - 1) * f].copy_from_slice(&c[f..]);
        let mut t: Coeffs = smallvec::smallvec![0; e * f];
        for j in 0..f {
            debug_assert_eq!(c[j] % self.p, 0);
            t[(e - 1) * f + j] = c[j] / self.p;
        }
        let t = self.raw_mul(&t, &self.w_inv);
        for (o, x) in out.iter_mut().zip(&t) {
            *o = self.addm(*o, *x);
        }
        out
    }
}

/// π-adic valuation, or the precision bound when the element is
/// indistinguishable from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    /// Zero at the available precision: the true valuation is at least `precision`.
    Infinite { precision: u32 },
}

impl Valuation {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite { .. })
    }

    pub fn finite(&self) -> Option<u32> {
        match *self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite { .. } => None,
        }
    }

    /// Valuation if finite, else the precision bound.
    pub fn lower_bound(&self) -> u32 {
        match *self {
            Valuation::Finite(v) => v,
            Valuation::Infinite { precision } => precision,
        }
    }
}

/// Element of `o_L` known modulo `π^prec`.
///
/// Equality compares at the smaller of the two precisions.
#[derive(Clone)]
pub struct OElement {
    field: Field,
    coeffs: Coeffs,
    prec: u32,
}

impl OElement {
    fn from_raw(field: &Field, mut coeffs: Coeffs, prec: u32) -> Self {
        let prec = prec.min(field.max_pi_prec());
        field.canonicalize(&mut coeffs, prec);
        OElement { field: field.clone(), coeffs, prec }
    }

    pub fn zero(field: &Field) -> Self {
        OElement {
            field: field.clone(),
            coeffs: smallvec::smallvec![0; field.len()],
            prec: field.max_pi_prec(),
        }
    }

    pub fn one(field: &Field) -> Self {
        Self::from_int(field, 1)
    }

    pub fn from_int(field: &Field, x: i64) -> Self {
        let mut c: Coeffs = smallvec::smallvec![0; field.len()];
        c[0] = field.reduce_int(x);
        OElement { field: field.clone(), coeffs: c, prec: field.max_pi_prec() }
    }

    /// `π^i ω^j`.
    pub fn basis(field: &Field, i: usize, j: usize) -> Self {
        assert!(i < field.e && j < field.f, "basis index out of range");
        let mut c: Coeffs = smallvec::smallvec![0; field.len()];
        c[i * field.f + j] = 1;
        OElement { field: field.clone(), coeffs: c, prec: field.max_pi_prec() }
    }

    /// The uniformizer π.
    pub fn pi(field: &Field) -> Self {
        Self::pi_pow(field, 1)
    }

    /// `π^k`, exact.
    pub fn pi_pow(field: &Field, k: u32) -> Self {
        let s = k as usize / field.e;
        let r = k as usize % field.e;
        let mut c: Coeffs = smallvec::smallvec![0; field.len()];
        // π^k = p^s π^r w^s
        if s <= field.m as usize {
            c[r * field.f] = field.ppow[s.min(field.m as usize)] % field.modulus();
        }
        let base = OElement { field: field.clone(), coeffs: c, prec: field.max_pi_prec() };
        if s == 0 || s > field.m as usize {
            return base;
        }
        let ws = field.raw_pow(&field.w, s as u64);
        OElement::from_raw(field, field.raw_mul(&base.coeffs, &ws), field.max_pi_prec())
    }

    /// Builds an element from row-major `(i, j)` integer coefficients, exact.
    pub fn from_coeffs(field: &Field, rows: &[Vec<i64>]) -> Result<Self, FieldError> {
        Self::from_coeffs_with_prec(field, rows, field.max_pi_prec())
    }

    pub fn from_coeffs_with_prec(field: &Field, rows: &[Vec<i64>], prec: u32) -> Result<Self, FieldError> {
        if rows.len() > field.e || rows.iter().any(|r| r.len() > field.f) {
            return Err(FieldError::Malformed(format!(
                "expected at most {}×{} coefficients",
                field.e, field.f
            )));
        }
        let mut c: Coeffs = smallvec::smallvec![0; field.len()];
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                c[i * field.f + j] = field.reduce_int(x);
            }
        }
        Ok(Self::from_raw(field, c, prec))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Residues in row-major `(i, j)` order.
    pub fn residues(&self) -> &[u64] {
        &self.coeffs
    }

    /// Absolute π-adic precision.
    pub fn pi_prec(&self) -> u32 {
        self.prec
    }

    /// Absolute `p`-adic precision `⌊prec/e⌋`.
    pub fn valid_prec(&self) -> u32 {
        self.prec / self.field.e as u32
    }

    /// Same residues with precision lowered to `prec` (never raised).
    pub fn truncate_prec(&self, prec: u32) -> Self {
        Self::from_raw(&self.field, self.coeffs.clone(), prec.min(self.prec))
    }

    /// Overrides the tracked precision. Used by solvers whose error bound is
    /// established analytically rather than by per-operation tracking.
    pub(crate) fn with_pi_prec(&self, prec: u32) -> Self {
        Self::from_raw(&self.field, self.coeffs.clone(), prec)
    }

    pub fn same_field(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if self.same_field(other) {
            Ok(())
        } else {
            Err(FieldError::SpecMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.add(other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.sub(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.mul(other))
    }

    /// # Panics
    /// If the operands belong to different fields; see [`OElement::try_add`].
    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_field(other), "{}", FieldError::SpecMismatch);
        let f = &self.field;
        let c = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f.addm(a, b)).collect();
        Self::from_raw(f, c, self.prec.min(other.prec))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.same_field(other), "{}", FieldError::SpecMismatch);
        let f = &self.field;
        let c = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f.subm(a, b)).collect();
        Self::from_raw(f, c, self.prec.min(other.prec))
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        let c = self.coeffs.iter().map(|&a| f.subm(0, a)).collect();
        Self::from_raw(f, c, self.prec)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert!(self.same_field(other), "{}", FieldError::SpecMismatch);
        let va = self.val_pi().lower_bound();
        let vb = other.val_pi().lower_bound();
        let prec = (self.prec + vb).min(other.prec + va);
        let c = self.field.raw_mul(&self.coeffs, &other.coeffs);
        Self::from_raw(&self.field, c, prec)
    }

    /// Truncated product of two coefficient lists over one field, working on
    /// raw residues. Precision follows [`OElement::mul`] and [`OElement::add`]
    /// term by term; exact zeros are skipped.
    pub(crate) fn convolve(a: &[Self], b: &[Self], d: usize) -> Option<Vec<Self>> {
        let field = a.first().or(b.first())?.field.clone();
        if !a.iter().chain(b).all(|x| Arc::ptr_eq(&x.field, &field)) {
            return None;
        }
        let full = field.max_pi_prec();
        // (exact zero, valuation lower bound, precision)
        let info = |x: &Self| {
            let v = x.val_pi().lower_bound();
            (x.prec >= full && x.coeffs.iter().all(|&c| c == 0), v, x.prec)
        };
        let ia: Vec<_> = a.iter().take(d + 1).map(info).collect();
        let ib: Vec<_> = b.iter().take(d + 1).map(info).collect();
        let scalar = field.len() == 1;
        let mut out = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut acc: Coeffs = smallvec::smallvec![0; field.len()];
            let mut prec = u32::MAX;
            for i in k.saturating_sub(ib.len().saturating_sub(1))..=k.min(ia.len().saturating_sub(1)) {
                let j = k - i;
                let ((za, va, pa), (zb, vb, pb)) = (ia[i], ib[j]);
                if za || zb {
                    continue;
                }
                prec = prec.min((pa + vb).min(pb + va));
                if scalar {
                    acc[0] = field.addm(acc[0], field.mulm(a[i].coeffs[0], b[j].coeffs[0]));
                } else {
                    let t = field.raw_mul(&a[i].coeffs, &b[j].coeffs);
                    for (x, y) in acc.iter_mut().zip(&t) {
                        *x = field.addm(*x, *y);
                    }
                }
            }
            out.push(if prec == u32::MAX { Self::zero(&field) } else { Self::from_raw(&field, acc, prec) });
        }
        Some(out)
    }

    pub fn pow(&self, n: u64) -> Self {
        let mut result = Self::one(&self.field);
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

    pub fn mul_int(&self, k: i64) -> Self {
        self.mul(&Self::from_int(&self.field, k))
    }

    /// Multiplication by `π^k`; precision rises by `k` (capped at `e·M`).
    pub fn mul_pi_pow(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        self.mul(&Self::pi_pow(&self.field, k))
    }

    /// Largest `k` with `a ∈ (π^k)` detectable at the element's precision.
    pub fn val_pi(&self) -> Valuation {
        let v = self.field.raw_valuation(&self.coeffs);
        if v >= self.prec {
            Valuation::Infinite { precision: self.prec }
        } else {
            Valuation::Finite(v)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.val_pi().is_infinite()
    }

    pub fn is_unit(&self) -> bool {
        self.val_pi() == Valuation::Finite(0)
    }

    /// `b` with `b·π^k = a`; precision drops by `k` π-units, that is by
    /// `⌈k/e⌉` p-adic digits when the input precision is a multiple of `e`.
    pub fn div_pi_exact(&self, k: u32) -> Result<Self, FieldError> {
        if k == 0 {
            return Ok(self.clone());
        }
        match self.val_pi() {
            Valuation::Finite(v) if v < k => Err(FieldError::NotDivisible { valuation: v, k }),
            Valuation::Infinite { precision } if precision < k => {
                Err(FieldError::PrecisionExhausted { precision, needed: k })
            }
            _ => {
                let mut c = self.coeffs.clone();
                for _ in 0..k {
                    c = self.field.raw_div_pi(&c);
                }
                Ok(Self::from_raw(&self.field, c, self.prec - k))
            }
        }
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Result<Self, FieldError> {
        if !self.is_unit() {
            return Err(FieldError::NotUnit);
        }
        let c = self.field.raw_unit_inverse(&self.coeffs);
        Ok(Self::from_raw(&self.field, c, self.prec))
    }

    /// Reduction modulo π as an element of `k_L = F_p[ω]/g`.
    pub fn residue(&self) -> Residue {
        let f = self.field.f;
        let known = self.prec > 0;
        Residue {
            coeffs: self.coeffs[..f]
                .iter()
                .map(|&x| if known { x % self.field.p } else { 0 })
                .collect(),
        }
    }

    /// Re-expresses the element in `target` (same presentation, other `M`),
    /// keeping its π-adic precision where the target allows.
    pub fn change_field(&self, target: &Field) -> Result<Self, FieldError> {
        let same = self.field.p == target.p
            && self.field.g == target.g
            && self.field.e_poly == target.e_poly;
        if !same {
            return Err(FieldError::SpecMismatch);
        }
        let pm = target.modulus();
        let c = self.coeffs.iter().map(|&x| x % pm).collect();
        Ok(Self::from_raw(target, c, self.prec.min(target.max_pi_prec())))
    }

    /// Reads the residues as an exact element of `target`, i.e. the canonical
    /// lift, known to the full precision of `target`.
    pub fn lift_exact(&self, target: &Field) -> Result<Self, FieldError> {
        let x = self.change_field(target)?;
        Ok(Self::from_raw(target, x.coeffs, target.max_pi_prec()))
    }

    /// Row-major coefficient table, rows indexed by π-degree.
    pub fn coeff_rows(&self) -> Vec<Vec<u64>> {
        self.coeffs.chunks(self.field.f).map(|r| r.to_vec()).collect()
    }

    pub fn to_json(&self) -> OElementJson {
        OElementJson {
            coeffs: self.coeff_rows(),
            valid_prec: self.valid_prec(),
            pi_prec: Some(self.prec),
        }
    }

    pub fn from_json(field: &Field, repr: &OElementJson) -> Result<Self, FieldError> {
        if repr.coeffs.len() != field.e || repr.coeffs.iter().any(|r| r.len() != field.f) {
            return Err(FieldError::Malformed(format!(
                "OElement needs {}×{} coefficients",
                field.e, field.f
            )));
        }
        let prec = repr.pi_prec.unwrap_or(repr.valid_prec.saturating_mul(field.e as u32));
        if prec > field.max_pi_prec() || repr.valid_prec > field.m {
            return Err(FieldError::BadPrecision("element precision exceeds field precision".into()));
        }
        let pm = field.modulus();
        let c = repr.coeffs.iter().flatten().map(|&x| x % pm).collect();
        Ok(Self::from_raw(field, c, prec))
    }
}

impl PartialEq for OElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.sub(other).is_zero()
    }
}

impl fmt::Debug for OElement {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, fmt)
    }
}

impl fmt::Display for OElement {
    /// Integers (e = f = 1) print as signed residues; otherwise the `π^i ω^j`
    /// coefficients are listed.
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pm = self.field.modulus();
        let signed = |x: u64| if x > pm / 2 { x as i128 - pm as i128 } else { x as i128 };
        if self.field.len() == 1 {
            write!(fmt, "{}", signed(self.coeffs[0]))?;
        } else {
            let terms: Vec<String> = self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(k, &x)| {
                    let (i, j) = (k / self.field.f, k % self.field.f);
                    let mut s = signed(x).to_string();
                    if i > 0 {
                        s += &format!("·π^{i}");
                    }
                    if j > 0 {
                        s += &format!("·ω^{j}");
                    }
                    s
                })
                .collect();
            if terms.is_empty() {
                write!(fmt, "0")?;
            } else {
                write!(fmt, "{}", terms.join(" + "))?;
            }
        }
        write!(fmt, " + O(π^{})", self.prec)
    }
}

impl std::ops::Add<&OElement> for &OElement {
    type Output = OElement;
    fn add(self, rhs: &OElement) -> OElement {
        OElement::add(self, rhs)
    }
}

impl std::ops::Sub<&OElement> for &OElement {
    type Output = OElement;
    fn sub(self, rhs: &OElement) -> OElement {
        OElement::sub(self, rhs)
    }
}

impl std::ops::Mul<&OElement> for &OElement {
    type Output = OElement;
    fn mul(self, rhs: &OElement) -> OElement {
        OElement::mul(self, rhs)
    }
}

impl std::ops::Neg for &OElement {
    type Output = OElement;
    fn neg(self) -> OElement {
        OElement::neg(self)
    }
}

/// Wire form `{ "coeffs": [[…]…], "valid_prec": int, "pi_prec": int }`.
///
/// `valid_prec` is the absolute `p`-adic precision. `pi_prec` carries the exact
/// π-adic precision and may be omitted, in which case it is `e·valid_prec`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OElementJson {
    pub coeffs: Vec<Vec<u64>>,
    pub valid_prec: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_prec: Option<u32>,
}

/// Element of the residue field `k_L = F_p[ω]/g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    pub coeffs: Vec<u64>,
}

impl Residue {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0)
    }

    pub fn zero(field: &Field) -> Self {
        Residue { coeffs: vec![0; field.f] }
    }

    pub fn add(&self, other: &Self, field: &Field) -> Self {
        let p = field.p;
        Residue { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a + b) % p).collect() }
    }

    pub fn mul(&self, other: &Self, field: &Field) -> Self {
        let p = field.p;
        let g: Vec<u64> = field.g.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
        let mut out = fp_poly::mul_mod(&self.coeffs, &other.coeffs, &g, p);
        out.resize(field.f, 0);
        Residue { coeffs: out }
    }
}

/// `π^{-m}·num`, an element of `L`.
///
/// Normalized so that `m = 0` or `num` is a unit whenever the valuation of
/// `num` is decidable at its precision. Absolute precision is `prec(num) - m`
/// and may be negative.
#[derive(Clone)]
pub struct LaurentScalar {
    num: OElement,
    denom_exp: u32,
}

impl LaurentScalar {
    pub fn new(num: OElement, denom_exp: u32) -> Self {
        let mut s = LaurentScalar { num, denom_exp };
        s.normalize();
        s
    }

    pub fn integral(num: OElement) -> Self {
        LaurentScalar { num, denom_exp: 0 }
    }

    pub fn zero(field: &Field) -> Self {
        Self::integral(OElement::zero(field))
    }

    pub fn one(field: &Field) -> Self {
        Self::integral(OElement::one(field))
    }

    /// `π^k` for any integer `k`.
    pub fn pi_power(field: &Field, k: i64) -> Self {
        if k >= 0 {
            Self::integral(OElement::pi_pow(field, k as u32))
        } else {
            LaurentScalar { num: OElement::one(field), denom_exp: (-k) as u32 }
        }
    }

    fn normalize(&mut self) {
        if self.denom_exp == 0 {
            return;
        }
        let v = self.num.val_pi().lower_bound();
        let k = v.min(self.denom_exp);
        if k == 0 {
            return;
        }
        if self.num.val_pi().is_infinite() && k == self.num.prec {
            // nothing known beyond the precision bound
            self.num = OElement::zero(&self.num.field).truncate_prec(0);
        } else {
            self.num = self.num.div_pi_exact(k).expect("valuation checked");
        }
        self.denom_exp -= k;
    }

    pub fn num(&self) -> &OElement {
        &self.num
    }

    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    pub fn field(&self) -> &Field {
        self.num.field()
    }

    /// Absolute π-adic precision.
    pub fn abs_prec(&self) -> i64 {
        self.num.prec as i64 - self.denom_exp as i64
    }

    pub fn is_integral(&self) -> bool {
        self.denom_exp == 0
    }

    /// The element as an `OElement`, if integral.
    pub fn to_integral(&self) -> Option<OElement> {
        self.is_integral().then(|| self.num.clone())
    }

    /// π-adic valuation: `val(num) - m`.
    pub fn valuation(&self) -> Option<i64> {
        self.num.val_pi().finite().map(|v| v as i64 - self.denom_exp as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn aligned(&self, m: u32) -> OElement {
        self.num.mul_pi_pow(m - self.denom_exp)
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.denom_exp.max(other.denom_exp);
        Self::new(self.aligned(m).add(&other.aligned(m)), m)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let m = self.denom_exp.max(other.denom_exp);
        Self::new(self.aligned(m).sub(&other.aligned(m)), m)
    }

    pub fn neg(&self) -> Self {
        LaurentScalar { num: self.num.neg(), denom_exp: self.denom_exp }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.num.mul(&other.num), self.denom_exp + other.denom_exp)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self::new(self.num.mul_int(k), self.denom_exp)
    }

    /// Multiplication by `π^k`, `k` of either sign.
    pub fn mul_pi_pow(&self, k: i64) -> Self {
        if k >= 0 {
            let k = k as u32;
            if k <= self.denom_exp {
                LaurentScalar { num: self.num.clone(), denom_exp: self.denom_exp - k }
            } else {
                Self::integral(self.num.mul_pi_pow(k - self.denom_exp))
            }
        } else {
            Self::new(self.num.clone(), self.denom_exp + (-k) as u32)
        }
    }

    pub fn pow(&self, n: u64) -> Self {
        Self::new(self.num.pow(n), self.denom_exp * n as u32)
    }

    /// Inverse of a nonzero element: `(π^v u)^{-1} = π^{-v} u^{-1}`.
    pub fn inverse(&self) -> Result<Self, FieldError> {
        let v = self.num.val_pi().finite().ok_or(FieldError::NotUnit)?;
        let unit = self.num.div_pi_exact(v)?;
        let inv = unit.inverse()?;
        Ok(Self::integral(inv).mul_pi_pow(self.denom_exp as i64 - v as i64))
    }

    pub fn to_json(&self) -> LaurentJson {
        LaurentJson { num: self.num.to_json(), denom_exp: self.denom_exp }
    }

    pub fn from_json(field: &Field, repr: &LaurentJson) -> Result<Self, FieldError> {
        Ok(LaurentScalar { num: OElement::from_json(field, &repr.num)?, denom_exp: repr.denom_exp })
    }
}

impl PartialEq for LaurentScalar {
    fn eq(&self, other: &Self) -> bool {
        self.num.same_field(&other.num) && self.sub(other).is_zero()
    }
}

impl fmt::Debug for LaurentScalar {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom_exp == 0 {
            write!(fmt, "{}", self.num)
        } else {
            write!(fmt, "π^-{}·({})", self.denom_exp, self.num)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentJson {
    pub num: OElementJson,
    pub denom_exp: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn q2() -> Field {
        presets::q2()
    }

    fn q2r() -> Field {
        presets::q2_ramified()
    }

    #[test]
    fn make_field_spec_examples() {
        let f = LocalFieldSpec::new(2, vec![0, 1], vec![vec![-2], vec![1]], 12).unwrap();
        assert_eq!((f.q(), f.e(), f.f(), f.n()), (2, 1, 1, 1));
        let f = LocalFieldSpec::new(2, vec![0, 1], vec![vec![-2], vec![0], vec![1]], 12).unwrap();
        assert_eq!((f.q(), f.e(), f.n()), (2, 2, 2));
        let err = LocalFieldSpec::new(2, vec![0, 1], vec![vec![-4], vec![0], vec![1]], 12).unwrap_err();
        assert!(matches!(err, FieldError::NotEisenstein(_)));
        let err = LocalFieldSpec::new(2, vec![0, 1], vec![vec![-2], vec![1], vec![1]], 12).unwrap_err();
        assert!(matches!(err, FieldError::NotEisenstein(_)));
        let err = LocalFieldSpec::new(2, vec![0, 1], vec![vec![-2], vec![1]], 1).unwrap_err();
        assert!(matches!(err, FieldError::BadPrecision(_)));
        // y^2 + 1 = (y + 1)^2 mod 2
        let err = LocalFieldSpec::new(2, vec![1, 0, 1], vec![vec![-2], vec![1]], 12).unwrap_err();
        assert_eq!(err, FieldError::ReducibleResidual);
        let f = LocalFieldSpec::new(2, vec![1, 1, 1], vec![vec![-2], vec![1]], 12).unwrap();
        assert_eq!((f.q(), f.e(), f.f(), f.n()), (4, 1, 2, 2));
        assert!(LocalFieldSpec::new(3, vec![1, 0, 1], vec![vec![-3], vec![1]], 8).is_ok());
        assert!(matches!(
            LocalFieldSpec::new(3, vec![2, 0, 1], vec![vec![-3], vec![1]], 8),
            Err(FieldError::ReducibleResidual)
        ));
        assert!(matches!(
            LocalFieldSpec::new(4, vec![0, 1], vec![vec![-2], vec![1]], 8),
            Err(FieldError::NotPrime(4))
        ));
    }

    #[test]
    fn ring_examples() {
        let f = q2r();
        let pi = OElement::pi(&f);
        assert_eq!(pi.mul(&pi), OElement::from_int(&f, 2));
        let one = OElement::one(&f);
        let a = one.add(&pi);
        let b = one.sub(&pi);
        assert_eq!(a.mul(&b), OElement::from_int(&f, -1));
        assert_eq!(a.add(&OElement::zero(&f)), a);
        assert_eq!(a.mul(&one), a);
    }

    #[test]
    fn spec_mismatch() {
        let a = OElement::one(&q2());
        let b = OElement::one(&q2r());
        assert_eq!(a.try_add(&b).unwrap_err(), FieldError::SpecMismatch);
        assert_eq!(a.try_mul(&b).unwrap_err(), FieldError::SpecMismatch);
    }

    #[test]
    fn valuation_examples() {
        let f = q2();
        assert!(OElement::zero(&f).val_pi().is_infinite());
        assert_eq!(OElement::from_int(&f, 12).val_pi(), Valuation::Finite(2));
        let r = q2r();
        assert_eq!(OElement::from_int(&r, 2).val_pi(), Valuation::Finite(2));
        assert_eq!(OElement::pi(&r).val_pi(), Valuation::Finite(1));
    }

    #[test]
    fn division_examples() {
        let f = q2();
        let x = OElement::from_int(&f, 12).div_pi_exact(2).unwrap();
        assert_eq!(x, OElement::from_int(&f, 3));
        assert_eq!(x.valid_prec(), 10);
        let r = q2r();
        let y = OElement::from_int(&r, 2).div_pi_exact(1).unwrap();
        assert_eq!(y, OElement::pi(&r));
        assert_eq!(
            OElement::from_int(&f, 3).div_pi_exact(1).unwrap_err(),
            FieldError::NotDivisible { valuation: 0, k: 1 }
        );
    }

    #[test]
    fn valid_prec_drops_by_ceil_k_over_e() {
        let r = q2r();
        let x = OElement::from_int(&r, 8);
        for k in 0..=6u32 {
            let y = x.div_pi_exact(k).unwrap();
            assert_eq!(y.valid_prec(), 12 - k.div_ceil(2));
        }
    }

    #[test]
    fn pi_powers_in_unramified_and_ramified() {
        let r = q2r();
        assert_eq!(OElement::pi_pow(&r, 3), OElement::pi(&r).mul_int(2));
        let u = presets::q4_unramified();
        assert_eq!(OElement::pi_pow(&u, 3), OElement::from_int(&u, 8));
        let w = OElement::basis(&u, 0, 1);
        // ω^2 + ω + 1 = 0
        assert!(w.mul(&w).add(&w).add(&OElement::one(&u)).is_zero());
    }

    #[test]
    fn unit_inverse() {
        let u = presets::q4_unramified();
        let w = OElement::basis(&u, 0, 1).add(&OElement::from_int(&u, 4));
        let inv = w.inverse().unwrap();
        assert_eq!(w.mul(&inv), OElement::one(&u));
        assert_eq!(OElement::from_int(&u, 2).inverse().unwrap_err(), FieldError::NotUnit);
    }

    #[test]
    fn laurent_normalizes() {
        let f = q2();
        let x = LaurentScalar::new(OElement::from_int(&f, 12), 3);
        assert_eq!(x.denom_exp(), 1);
        assert_eq!(x.num(), &OElement::from_int(&f, 3));
        let half = LaurentScalar::pi_power(&f, -1);
        assert_eq!(half.add(&half), LaurentScalar::one(&f));
        let inv = LaurentScalar::integral(OElement::from_int(&f, 12)).inverse().unwrap();
        assert_eq!(inv.mul_int(12), LaurentScalar::one(&f));
    }

    #[test]
    fn json_round_trip() {
        let r = q2r();
        let x = OElement::from_coeffs(&r, &[vec![5], vec![-3]]).unwrap().div_pi_exact(0).unwrap();
        let y = OElement::from_json(&r, &x.to_json()).unwrap();
        assert_eq!(x.residues(), y.residues());
        assert_eq!(x.pi_prec(), y.pi_prec());
        let spec = LocalFieldSpec::from_json(&r.to_json()).unwrap();
        assert_eq!(*spec, *r);
    }
}
