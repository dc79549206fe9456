//! Lubin–Tate formal group laws, their endomorphisms and logarithms.
//!
//! Everything is driven by a Frobenius series `f ≡ πT mod T²`, `f ≡ T^q mod π`.
//! The group law `F` and the endomorphisms `[a]` are solved degree by degree
//! from `f(F(X,Y)) = F(f(X), f(Y))` and `f∘[a] = [a]∘f`; each new homogeneous
//! part is an error term divided by `π^d - π`.
//!
//! The solvers work at `M + G` guard digits. A coefficient error at π-level `N`
//! only survives the division through the `(X^q)^a (Y^q)^b` terms of
//! `F(f(X), f(Y))`, so errors in degree `d` trace back through at most
//! `⌊log_q d⌋` divisions. Solved coefficients are therefore assigned precision
//! `N_in - 1 - ⌊log_q d⌋` directly instead of the much smaller bound that
//! per-operation tracking would report.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldError, LaurentScalar, OElement};
use crate::series::{BivariateSeries, PowerSeries, Scalar, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtError {
    #[error("bad linear term: {0}")]
    BadLinearTerm(String),
    #[error("f is not T^q modulo π: {0}")]
    BadFrobeniusReduction(String),
    #[error("correction in degree {degree} is not divisible by π; raise the precision")]
    DivisionObstruction { degree: usize },
    #[error("integrality failure: {0}")]
    IntegralityFailure(String),
    #[error("index {index} out of range for truncation degree {deg}")]
    OutOfRange { index: usize, deg: usize },
    #[error("truncation degree {0} is too small")]
    BadDegree(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `⌊log_q d⌋` for `d ≥ 1`.
pub(crate) fn floor_log(q: u64, d: usize) -> u32 {
    let mut k = 0;
    let mut x = q;
    while x as usize <= d {
        k += 1;
        x = x.saturating_mul(q);
    }
    k
}

/// Guard digits for a solve of truncation degree `deg`.
fn guard_digits(field: &Field, deg: usize) -> u32 {
    (floor_log(field.q(), deg.max(1)) + 2).div_ceil(field.e() as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrobeniusKind {
    /// `πT + T^q`, exact at every precision.
    Default,
    /// Supplied by the caller, known to the precision of its coefficients.
    Custom,
}

/// A validated Frobenius series `f ∈ F_π`.
#[derive(Clone, PartialEq)]
pub struct FrobeniusSeries {
    series: PowerSeries,
    kind: FrobeniusKind,
}

impl fmt::Debug for FrobeniusSeries {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fmt, "FrobeniusSeries({:?}, {:?})", self.kind, self.series)
    }
}

impl FrobeniusSeries {
    /// `πT + T^q` truncated at `deg`.
    pub fn default_for(field: &Field, deg: usize) -> Self {
        let mut s = PowerSeries::zero(field, deg);
        if deg >= 1 {
            s.set_coeff(1, OElement::pi(field));
        }
        if deg >= field.q() as usize {
            s.set_coeff(field.q() as usize, OElement::one(field));
        }
        FrobeniusSeries { series: s, kind: FrobeniusKind::Default }
    }

    /// Checks `f ≡ πT mod T²` and `f ≡ T^q mod π`.
    pub fn validate(f: PowerSeries) -> Result<Self, LtError> {
        let field = f.field().clone();
        let q = field.q() as usize;
        if f.deg() < q {
            return Err(LtError::BadFrobeniusReduction(format!(
                "truncation degree {} is below q = {q}",
                f.deg()
            )));
        }
        if !f.coeff(0).is_zero() {
            return Err(LtError::BadLinearTerm("nonzero constant term".into()));
        }
        if *f.coeff(1) != OElement::pi(&field) {
            return Err(LtError::BadLinearTerm(format!("coefficient of T is {:?}, expected π", f.coeff(1))));
        }
        for k in 2..=f.deg() {
            let c = if k == q { f.coeff(k).sub(&OElement::one(&field)) } else { f.coeff(k).clone() };
            if c.val_pi() == crate::Valuation::Finite(0) {
                return Err(LtError::BadFrobeniusReduction(format!("coefficient of T^{k} is wrong modulo π")));
            }
        }
        Ok(FrobeniusSeries { series: f, kind: FrobeniusKind::Custom })
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }

    pub fn kind(&self) -> FrobeniusKind {
        self.kind
    }

    pub fn field(&self) -> &Field {
        self.series.field()
    }

    pub fn deg(&self) -> usize {
        self.series.deg()
    }

    /// Same series truncated at `deg` (custom series cannot be extended).
    pub fn truncated(&self, deg: usize) -> Self {
        match self.kind {
            FrobeniusKind::Default => Self::default_for(self.field(), deg),
            FrobeniusKind::Custom => FrobeniusSeries { series: self.series.truncate(deg), kind: self.kind },
        }
    }

    /// Coefficients in `work`, truncated at `deg`; the default series is
    /// rebuilt exactly there.
    fn coeffs_in(&self, work: &Field, deg: usize) -> Result<Vec<OElement>, LtError> {
        Ok(match self.kind {
            FrobeniusKind::Default => Self::default_for(work, deg).series.coeffs().to_vec(),
            FrobeniusKind::Custom => self.series.truncate(deg).change_field(work)?.coeffs().to_vec(),
        })
    }

    /// Largest truncation `≤ deg` this series supports.
    pub(crate) fn usable_deg(&self, deg: usize) -> usize {
        match self.kind {
            FrobeniusKind::Default => deg,
            FrobeniusKind::Custom => deg.min(self.deg()),
        }
    }

    fn input_prec(&self, work: &Field) -> u32 {
        match self.kind {
            FrobeniusKind::Default => work.max_pi_prec(),
            FrobeniusKind::Custom => self.series.min_pi_prec(),
        }
    }
}

fn raw(x: OElement) -> OElement {
    let max = x.field().max_pi_prec();
    x.with_pi_prec(max)
}

/// `(π(1 - π^{d-1}))`-division of a value known to be divisible by π.
fn divide_by_pi_d_minus_pi(x: &OElement, d: usize) -> Option<OElement> {
    let field = x.field();
    let unit = OElement::one(field).sub(&OElement::pi_pow(field, d as u32 - 1));
    let y = x.div_pi_exact(1).ok()?;
    Some(raw(y.mul(&unit.inverse().expect("1 - π^k is a unit for k ≥ 1"))))
}

fn powers_of(f: &PowerSeries, count: usize) -> Vec<PowerSeries> {
    let mut out = vec![PowerSeries::one(f.field(), f.deg())];
    for i in 1..=count {
        out.push(out[i - 1].mul(f));
    }
    out
}

/// Highest index carrying a coefficient that is not exactly zero.
fn top_degree(coeffs: &[OElement]) -> usize {
    coeffs.iter().rposition(|c| !Scalar::is_exact_zero(c)).unwrap_or(0)
}

/// Degree-by-degree solve of the group law in the working field. Returns the
/// law with the analytic precision of each coefficient.
fn solve_group_law(work: &Field, f: &[OElement], deg: usize, input_prec: u32) -> Result<BivariateSeries, LtError> {
    let fs = PowerSeries::new(work, f.to_vec());
    let p = powers_of(&fs, deg);
    let fdeg = top_degree(f);
    let zero = OElement::zero(work);
    let mut law = BivariateSeries::<OElement>::zero(work, deg);
    if deg >= 1 {
        law.set(1, 0, OElement::one(work));
        law.set(0, 1, OElement::one(work));
    }
    // powers[k] holds the solved homogeneous parts of F^k, k = 2..=fdeg
    let mut powers: Vec<BivariateSeries> = (0..=fdeg).map(|_| BivariateSeries::zero(work, deg)).collect();
    for d in 2..=deg {
        for k in 2..=fdeg.min(d) {
            for a in 0..=d {
                let mut acc = zero.clone();
                // (F^{k-1})_s · F_{d-s}, s ≥ k-1 and d - s ≥ 1
                for s in (k - 1)..d {
                    let t = d - s;
                    for i1 in a.saturating_sub(t)..=a.min(s) {
                        let lhs = if k - 1 == 1 { law.get(i1, s - i1) } else { powers[k - 1].get(i1, s - i1) };
                        if Scalar::is_exact_zero(lhs) {
                            continue;
                        }
                        let i2 = a - i1;
                        let rhs = law.get(i2, t - i2);
                        if Scalar::is_exact_zero(rhs) {
                            continue;
                        }
                        acc = acc.add(&lhs.mul(rhs));
                    }
                }
                powers[k].set(a, d - a, raw(acc));
            }
        }
        for a in 0..=d {
            let b = d - a;
            // f(F) at X^a Y^b, without the unknown f_1·F_d
            let mut lhs = zero.clone();
            for (k, pk) in powers.iter().enumerate().take(fdeg.min(d) + 1).skip(2) {
                if Scalar::is_exact_zero(&f[k]) {
                    continue;
                }
                lhs = lhs.add(&f[k].mul(pk.get(a, b)));
            }
            // F_{<d}(f(X), f(Y)) at X^a Y^b
            let mut rhs = zero.clone();
            for i in 0..=a {
                let pa = p[i].coeff(a);
                if Scalar::is_exact_zero(pa) {
                    continue;
                }
                for j in 0..=b {
                    if i + j == 0 || i + j >= d {
                        continue;
                    }
                    let c = law.get(i, j);
                    let pb = p[j].coeff(b);
                    if Scalar::is_exact_zero(c) || Scalar::is_exact_zero(pb) {
                        continue;
                    }
                    rhs = rhs.add(&c.mul(pa).mul(pb));
                }
            }
            let err = raw(rhs.sub(&lhs));
            let coeff = divide_by_pi_d_minus_pi(&err, d).ok_or(LtError::DivisionObstruction { degree: d })?;
            law.set(a, b, coeff);
        }
    }
    Ok(BivariateSeries::from_fn(work, deg, |i, j| {
        let c = law.get(i, j).clone();
        let d = i + j;
        if d <= 1 {
            c.with_pi_prec(input_prec)
        } else {
            c.with_pi_prec(input_prec.saturating_sub(1 + floor_log(work.q(), d)))
        }
    }))
}

/// The Lubin–Tate group law of `f`, truncated at total degree `deg`.
pub fn build_group_law(f: &FrobeniusSeries, deg: usize) -> Result<BivariateSeries, LtError> {
    if deg < 2 {
        return Err(LtError::BadDegree(deg));
    }
    let field = f.field().clone();
    let work = field.with_guard_digits(guard_digits(&field, deg));
    let coeffs = f.coeffs_in(&work, f.usable_deg(deg))?;
    let deg = deg.min(coeffs.len() - 1);
    let law = solve_group_law(&work, &coeffs, deg, f.input_prec(&work))?;
    Ok(law.change_field(&field)?)
}

fn solve_endomorphism(work: &Field, f: &[OElement], a: &OElement, deg: usize, input_prec: u32) -> Result<PowerSeries, LtError> {
    let fs = PowerSeries::new(work, f.to_vec());
    let p = powers_of(&fs, deg);
    let fdeg = top_degree(f);
    let zero = OElement::zero(work);
    let mut b = vec![zero.clone(); deg + 1];
    if deg >= 1 {
        b[1] = raw(a.clone());
    }
    // pw[k][d] = coefficient of T^d in [a]^k
    let mut pw: Vec<Vec<OElement>> = vec![vec![zero.clone(); deg + 1]; fdeg + 1];
    for d in 2..=deg {
        for k in 2..=fdeg.min(d) {
            let mut acc = zero.clone();
            for s in (k - 1)..d {
                let lhs = if k - 1 == 1 { &b[s] } else { &pw[k - 1][s] };
                acc = acc.add(&lhs.mul(&b[d - s]));
            }
            pw[k][d] = raw(acc);
        }
        let mut lhs = zero.clone();
        for k in 2..=fdeg.min(d) {
            lhs = lhs.add(&f[k].mul(&pw[k][d]));
        }
        let mut rhs = zero.clone();
        for (i, pi) in p.iter().enumerate().take(d).skip(1) {
            rhs = rhs.add(&b[i].mul(pi.coeff(d)));
        }
        let err = raw(rhs.sub(&lhs));
        b[d] = divide_by_pi_d_minus_pi(&err, d).ok_or(LtError::DivisionObstruction { degree: d })?;
    }
    let coeffs = b
        .into_iter()
        .enumerate()
        .map(|(d, c)| {
            if d <= 1 {
                c.with_pi_prec(input_prec)
            } else {
                c.with_pi_prec(input_prec.saturating_sub(1 + floor_log(work.q(), d)))
            }
        })
        .collect();
    Ok(PowerSeries::new(work, coeffs))
}

/// The endomorphism `[a]` with `[a] ≡ aT mod T²` and `f∘[a] = [a]∘f`.
///
/// `a` is read as an exact element: below the working precision it stands
/// for the canonical lift of its residues, at or above it for itself. The
/// coefficients of `[a]` in degree `d` depend on `a` modulo roughly
/// `π^{N + ⌊log_q d⌋}`, so products and sums of scalars that should satisfy
/// `[a]∘[b] = [ab]` exactly must be formed at the field's maximal precision.
pub fn build_endomorphism(f: &FrobeniusSeries, a: &OElement, deg: usize) -> Result<PowerSeries, LtError> {
    let field = f.field().clone();
    let work = field.with_guard_digits(guard_digits(&field, deg));
    let coeffs = f.coeffs_in(&work, f.usable_deg(deg))?;
    let deg = coeffs.len() - 1;
    let a_work = if a.field().precision() >= work.precision() { a.change_field(&work)? } else { a.lift_exact(&work)? };
    let e = solve_endomorphism(&work, &coeffs, &raw(a_work), deg, f.input_prec(&work))?;
    Ok(e.change_field(&field)?)
}

/// `[π^n] = f∘…∘f`, with `[π^0] = T`.
pub fn iterate_pi(f: &FrobeniusSeries, n: usize, deg: usize) -> Result<PowerSeries, LtError> {
    let fs = f.truncated(f.usable_deg(deg)).series;
    let mut acc = PowerSeries::var_t(f.field(), fs.deg());
    for _ in 0..n {
        acc = fs.compose(&acc)?;
    }
    Ok(acc)
}

/// The logarithm `log ≡ T mod T²` with `log∘f = π·log`, coefficients in `L`.
pub fn logarithm(f: &FrobeniusSeries, deg: usize) -> Result<PowerSeries<LaurentScalar>, LtError> {
    let field = f.field().clone();
    let fs = f.truncated(f.usable_deg(deg)).series;
    let deg = fs.deg();
    let p = powers_of(&fs, deg);
    let mut c: Vec<LaurentScalar> = vec![LaurentScalar::zero(&field); deg + 1];
    if deg >= 1 {
        c[1] = LaurentScalar::one(&field);
    }
    for d in 2..=deg {
        let mut acc = LaurentScalar::zero(&field);
        for (k, pk) in p.iter().enumerate().take(d).skip(1) {
            let coeff = pk.coeff(d);
            if Scalar::is_exact_zero(coeff) {
                continue;
            }
            acc = acc.add(&c[k].mul(&LaurentScalar::integral(coeff.clone())));
        }
        // divide by π(1 - π^{d-1})
        let unit = OElement::one(&field).sub(&OElement::pi_pow(&field, d as u32 - 1));
        let inv = LaurentScalar::integral(unit.inverse()?);
        c[d] = acc.mul(&inv).mul_pi_pow(-1);
    }
    Ok(PowerSeries::new(&field, c))
}

/// `log_H = Σ_k π^{-k} T^{q^k}` truncated at `deg`.
pub fn honda_logarithm(field: &Field, deg: usize) -> PowerSeries<LaurentScalar> {
    let mut s = PowerSeries::<LaurentScalar>::zero(field, deg);
    let mut k = 0i64;
    let mut d = 1usize;
    while d <= deg {
        s.set_coeff(d, LaurentScalar::pi_power(field, -k));
        k += 1;
        d = d.saturating_mul(field.q() as usize);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSource {
    FromF,
    Honda,
}

/// A formal group law with its `[π]`, its logarithm and its provenance.
#[derive(Clone, Debug)]
pub struct FormalGroupModel {
    pub law: BivariateSeries,
    pub frobenius: FrobeniusSeries,
    pub log: PowerSeries<LaurentScalar>,
    pub source: ModelSource,
}

impl FormalGroupModel {
    /// Law, logarithm and `[π] = f` built from a Frobenius series.
    pub fn from_frobenius(f: &FrobeniusSeries, deg: usize) -> Result<Self, LtError> {
        Ok(FormalGroupModel {
            law: build_group_law(f, deg)?,
            frobenius: f.truncated(deg),
            log: logarithm(f, deg)?,
            source: ModelSource::FromF,
        })
    }

    pub fn field(&self) -> &Field {
        self.law.field()
    }

    pub fn deg(&self) -> usize {
        self.law.deg()
    }

    /// `[a]` for this model.
    pub fn endomorphism(&self, a: &OElement) -> Result<PowerSeries, LtError> {
        build_endomorphism(&self.frobenius, a, self.deg())
    }
}

/// Solves `log_H([π](T)) = π·log_H(T)` degree by degree. Each step clears a
/// `π^K` denominator, `K = ⌊log_q D⌋`; a failed division is an integrality
/// failure of `[π]`.
fn solve_honda_pi(work: &Field, deg: usize) -> Result<Vec<OElement>, LtError> {
    let q = work.q() as usize;
    let big_k = floor_log(work.q(), deg);
    let zero = OElement::zero(work);
    let mut a = vec![zero.clone(); deg + 1];
    a[1] = OElement::pi(work);
    // pw[j][d] = coefficient of T^d in [π]^j
    let mut pw: Vec<Vec<OElement>> = vec![vec![zero.clone(); deg + 1]; deg + 1];
    pw[1][1] = a[1].clone();
    for j in 2..=deg {
        pw[j][j] = pw[j - 1][j - 1].mul(&a[1]);
    }
    for d in 2..=deg {
        for j in 2..d {
            let mut acc = zero.clone();
            for s in (j - 1)..d {
                if Scalar::is_exact_zero(&pw[j - 1][s]) || Scalar::is_exact_zero(&a[d - s]) {
                    continue;
                }
                acc = acc.add(&pw[j - 1][s].mul(&a[d - s]));
            }
            pw[j][d] = raw(acc);
        }
        let mut numer = zero.clone();
        let mut qk = q;
        let mut k = 1u32;
        while qk <= d {
            numer = numer.sub(&pw[qk][d].mul_pi_pow(big_k - k));
            k += 1;
            qk *= q;
        }
        // target π^{1-k0} when d = q^{k0}
        let mut t = 1usize;
        let mut k0 = 0u32;
        while t < d {
            t *= q;
            k0 += 1;
        }
        if t == d {
            numer = numer.add(&OElement::pi_pow(work, big_k + 1 - k0));
        }
        let ad = raw(numer).div_pi_exact(big_k).map_err(|_| {
            LtError::IntegralityFailure(format!("coefficient of T^{d} in [π] has a π-denominator"))
        })?;
        a[d] = raw(ad);
        pw[1][d] = a[d].clone();
    }
    Ok(a)
}

/// The Honda-coordinate model: `log = Σ π^{-k} T^{q^k}`, with `[π]` and `F`
/// solved from `log([π]) = π·log` and `log(F(X,Y)) = log X + log Y`. Both
/// solves clear a `π^K` denominator by exact division, so a non-integral
/// coefficient surfaces as [`LtError::IntegralityFailure`]; `[π] ≡ T^q mod π`
/// is checked as well.
pub fn honda_model(field: &Field, deg: usize) -> Result<FormalGroupModel, LtError> {
    let q = field.q() as usize;
    if deg < q || deg < 2 {
        return Err(LtError::BadDegree(deg));
    }
    let big_k = floor_log(field.q(), deg);
    let guard = 2 * guard_digits(field, deg) + big_k.div_ceil(field.e() as u32);
    let work = field.with_guard_digits(guard);
    let coeffs = solve_honda_pi(&work, deg)?;
    let pi_prec = work.max_pi_prec().saturating_sub(big_k + 1);
    let pi_series = PowerSeries::new(&work, coeffs.iter().map(|c| c.with_pi_prec(pi_prec)).collect());
    let f_work = FrobeniusSeries::validate(pi_series.clone())
        .map_err(|e| LtError::IntegralityFailure(format!("[π] fails the Frobenius congruences: {e}")))?;
    let law = solve_honda_law(&work, deg)?;
    let law = BivariateSeries::from_fn(&work, deg, |i, j| law.get(i, j).with_pi_prec(pi_prec));
    let f = FrobeniusSeries::validate(f_work.series().change_field(field)?)?;
    Ok(FormalGroupModel {
        law: law.change_field(field)?,
        frobenius: f,
        log: honda_logarithm(field, deg),
        source: ModelSource::Honda,
    })
}

/// Solves `log_H(F(X,Y)) = log_H X + log_H Y` degree by degree. The degree-`d`
/// part of `F^{q^k}` (`k ≥ 1`) only involves `F` below degree `d`, so it is
/// maintained along the chain `F^{q^{k-1}·i}`, `i = 1..q`.
fn solve_honda_law(work: &Field, deg: usize) -> Result<BivariateSeries, LtError> {
    let q = work.q() as usize;
    let big_k = floor_log(work.q(), deg) as usize;
    let zero = OElement::zero(work);
    let mut law = BivariateSeries::<OElement>::zero(work, deg);
    law.set(1, 0, OElement::one(work));
    law.set(0, 1, OElement::one(work));
    // chain[k][i-1] = F^{q^k·i}; chain[k][q-1] = F^{q^{k+1}} = chain[k+1][0]
    let mut chain: Vec<Vec<BivariateSeries>> = (0..big_k).map(|_| vec![BivariateSeries::zero(work, deg); q]).collect();
    let mut qk = vec![1usize; big_k + 1];
    for k in 1..=big_k {
        qk[k] = qk[k - 1] * q;
    }
    for d in 2..=deg {
        for k in 0..big_k {
            for i in 2..=q {
                if qk[k] * i > d {
                    break;
                }
                for a in 0..=d {
                    let mut acc = zero.clone();
                    let base = |i1: usize, j1: usize| if k == 0 { law.get(i1, j1) } else { chain[k - 1][q - 1].get(i1, j1) };
                    // (F^{q^k(i-1)})_s · (F^{q^k})_{d-s}
                    for s in qk[k] * (i - 1)..=d - qk[k] {
                        let t = d - s;
                        for i1 in a.saturating_sub(t)..=a.min(s) {
                            let lhs = if i == 2 { base(i1, s - i1) } else { chain[k][i - 2].get(i1, s - i1) };
                            if Scalar::is_exact_zero(lhs) {
                                continue;
                            }
                            let rhs = base(a - i1, t - (a - i1));
                            if Scalar::is_exact_zero(rhs) {
                                continue;
                            }
                            acc = acc.add(&lhs.mul(rhs));
                        }
                    }
                    chain[k][i - 1].set(a, d - a, raw(acc));
                }
            }
        }
        let target = (0..=big_k).find(|&k| qk[k] == d);
        for a in 0..=d {
            let mut numer = zero.clone();
            for k in 1..=big_k {
                if qk[k] > d {
                    break;
                }
                numer = numer.sub(&chain[k - 1][q - 1].get(a, d - a).mul_pi_pow((big_k - k) as u32));
            }
            if let Some(k0) = target {
                if a == 0 || a == d {
                    numer = numer.add(&OElement::pi_pow(work, (big_k - k0) as u32));
                }
            }
            let c = raw(numer).div_pi_exact(big_k as u32).map_err(|_| {
                LtError::IntegralityFailure(format!("coefficient of X^{a}Y^{} has a π-denominator", d - a))
            })?;
            law.set(a, d - a, raw(c));
        }
    }
    Ok(law)
}

/// Genus of `CP^m`: `(m+1)·c_{m+1}` where `log = Σ c_j T^j`.
pub fn genus_cp(model: &FormalGroupModel, m: usize) -> Result<LaurentScalar, LtError> {
    let deg = model.log.deg();
    if m + 1 > deg {
        return Err(LtError::OutOfRange { index: m, deg });
    }
    Ok(model.log.coeff(m + 1).mul_int(m as i64 + 1))
}

/// Structural checks on a group law, used by the property suites.
pub mod checks {
    use super::*;

    /// `f(F(X,Y)) = F(f(X), f(Y))` modulo total degree `D + 1`.
    pub fn equivariance(f: &FrobeniusSeries, law: &BivariateSeries) -> Result<bool, LtError> {
        let deg = law.deg().min(f.deg());
        let fs = f.truncated(deg).series().clone();
        let lhs = law.truncate(deg).substitute_into(&fs)?;
        let fx = fs.clone().with_var("X");
        let rhs = law.truncate(deg).eval_series(&fx, &fx)?;
        Ok(lhs == rhs)
    }

    pub fn commutative(law: &BivariateSeries) -> bool {
        law.swap() == *law
    }

    /// `F(X,0) = X` and `F(0,Y) = Y`.
    pub fn unit_law(law: &BivariateSeries) -> bool {
        let field = law.field();
        let x = PowerSeries::var_t(field, law.deg());
        law.restrict_x().with_var("T") == x && law.restrict_y().with_var("T") == x
    }

    /// `F(F(X,Y),Z) = F(X,F(Y,Z))` modulo total degree `deg + 1`.
    pub fn associative(law: &BivariateSeries, deg: usize) -> bool {
        let law = law.truncate(deg);
        let d = law.deg();
        let field = law.field().clone();
        let mut powers = vec![BivariateSeries::<OElement>::zero(&field, d)];
        powers[0].set(0, 0, OElement::one(&field));
        for k in 1..=d {
            powers.push(powers[k - 1].mul(&law));
        }
        let idx = |i: usize, j: usize, k: usize| (i * (d + 1) + j) * (d + 1) + k;
        let mut left = vec![OElement::zero(&field); (d + 1).pow(3)];
        let mut right = left.clone();
        for i in 0..=d {
            for j in 0..=d - i {
                let c = law.get(i, j);
                if Scalar::is_exact_zero(c) {
                    continue;
                }
                // c·F(X,Y)^i·Z^j and c·X^i·F(Y,Z)^j
                for a in 0..=d - j {
                    for b in 0..=d - j - a {
                        let t = powers[i].get(a, b);
                        if !Scalar::is_exact_zero(t) {
                            let s = &mut left[idx(a, b, j)];
                            *s = s.add(&c.mul(t));
                        }
                    }
                }
                for a in 0..=d - i {
                    for b in 0..=d - i - a {
                        let t = powers[j].get(a, b);
                        if !Scalar::is_exact_zero(t) {
                            let s = &mut right[idx(i, a, b)];
                            *s = s.add(&c.mul(t));
                        }
                    }
                }
            }
        }
        left.iter().zip(&right).all(|(a, b)| a == b)
    }

    /// `[a+b](T) = F([a](T), [b](T))` modulo `T^{D+1}`.
    pub fn additive(law: &BivariateSeries, ea: &PowerSeries, eb: &PowerSeries, eab: &PowerSeries) -> Result<bool, LtError> {
        let deg = law.deg().min(ea.deg()).min(eb.deg()).min(eab.deg());
        let ex = ea.truncate(deg).with_var("X");
        let ey = eb.truncate(deg).with_var("X");
        // F(u(T), v(T)) as the diagonal of F(u(X), v(Y))
        let two = law.truncate(deg).eval_series(&ex, &ey)?;
        Ok(two.diagonal() == eab.truncate(deg))
    }

    /// `log∘[a] = a·log` modulo `T^{D+1}`.
    pub fn log_linear(log: &PowerSeries<LaurentScalar>, ea: &PowerSeries, a: &OElement) -> Result<bool, LtError> {
        let deg = log.deg().min(ea.deg());
        let lhs = log.truncate(deg).compose(&ea.truncate(deg).to_laurent())?;
        let rhs = log.truncate(deg).map(|c| c.mul(&LaurentScalar::integral(a.clone())));
        Ok(lhs == rhs)
    }

    /// `T`-adic valuation of `[p](T) mod π`, and whether the truncation was exhausted.
    pub fn height_valuation(f: &FrobeniusSeries, deg: usize) -> Result<(usize, bool), LtError> {
        let p = OElement::from_int(f.field(), f.field().p() as i64);
        let ep = build_endomorphism(f, &p, deg)?;
        let r = ep.reduce_mod_pi();
        Ok((r.t_valuation, r.exhausted))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn series(field: &Field, ints: &[i64], deg: usize) -> PowerSeries {
        PowerSeries::from_ints(field, ints, deg)
    }

    #[test]
    fn validate_examples() {
        let f2 = presets::q2();
        assert!(FrobeniusSeries::validate(series(&f2, &[0, 2, 1], 4)).is_ok());
        let f3 = presets::q3();
        assert!(FrobeniusSeries::validate(series(&f3, &[0, 3, 3, 1], 4)).is_ok());
        assert!(matches!(
            FrobeniusSeries::validate(series(&f2, &[0, 0, 1], 4)),
            Err(LtError::BadLinearTerm(_))
        ));
        assert!(matches!(
            FrobeniusSeries::validate(series(&f3, &[0, 3, 1, 1], 4)),
            Err(LtError::BadFrobeniusReduction(_))
        ));
        assert!(matches!(
            FrobeniusSeries::validate(series(&f3, &[0, 3, 0, 2], 4)),
            Err(LtError::BadFrobeniusReduction(_))
        ));
    }

    #[test]
    fn multiplicative_group_law() {
        let f2 = presets::q2();
        let f = FrobeniusSeries::validate(series(&f2, &[0, 2, 1], 12)).unwrap();
        let law = build_group_law(&f, 12).unwrap();
        let expect = BivariateSeries::from_fn(&f2, 12, |i, j| match (i, j) {
            (1, 0) | (0, 1) | (1, 1) => OElement::one(&f2),
            _ => OElement::zero(&f2),
        });
        assert_eq!(law, expect);
        // f is exact integer data: every coefficient comes back at full precision
        assert!(law.min_pi_prec() >= f2.max_pi_prec() - 1 - floor_log(2, 12));
    }

    #[test]
    fn q3_xy_coefficient_vanishes() {
        let f3 = presets::q3();
        let f = FrobeniusSeries::validate(series(&f3, &[0, 3, 0, 1], 10)).unwrap();
        let law = build_group_law(&f, 10).unwrap();
        assert!(law.get(1, 1).is_zero());
        assert!(checks::equivariance(&f, &law).unwrap());
    }

    #[test]
    fn endomorphism_examples() {
        let f2 = presets::q2();
        let f = FrobeniusSeries::validate(series(&f2, &[0, 2, 1], 10)).unwrap();
        assert_eq!(build_endomorphism(&f, &OElement::one(&f2), 10).unwrap(), PowerSeries::var_t(&f2, 10));
        assert_eq!(build_endomorphism(&f, &OElement::pi(&f2), 10).unwrap(), f.series().clone());
        assert_eq!(build_endomorphism(&f, &OElement::from_int(&f2, 3), 10).unwrap(), series(&f2, &[0, 3, 3, 1], 10));
    }

    #[test]
    fn iterate_examples() {
        let f2 = presets::q2();
        let f = FrobeniusSeries::validate(series(&f2, &[0, 2, 1], 8)).unwrap();
        assert_eq!(iterate_pi(&f, 0, 8).unwrap(), PowerSeries::var_t(&f2, 8));
        assert_eq!(iterate_pi(&f, 2, 8).unwrap(), series(&f2, &[0, 4, 6, 4, 1], 8));
        let r = presets::q2_ramified();
        let f = FrobeniusSeries::default_for(&r, 8);
        let pi = OElement::pi(&r);
        let two = OElement::from_int(&r, 2);
        let mut expect = PowerSeries::zero(&r, 8);
        expect.set_coeff(1, two.clone());
        expect.set_coeff(2, pi.add(&two));
        expect.set_coeff(3, pi.mul(&two));
        expect.set_coeff(4, OElement::one(&r));
        assert_eq!(iterate_pi(&f, 2, 8).unwrap(), expect);
    }

    #[test]
    fn logarithm_examples() {
        let f2 = presets::q2();
        let f = FrobeniusSeries::validate(series(&f2, &[0, 2, 1], 8)).unwrap();
        let log = logarithm(&f, 8).unwrap();
        assert_eq!(*log.coeff(1), LaurentScalar::one(&f2));
        assert_eq!(*log.coeff(2), LaurentScalar::pi_power(&f2, -1).neg());
        let f3 = presets::q3();
        let f = FrobeniusSeries::validate(series(&f3, &[0, 3, 0, 1], 8)).unwrap();
        assert!(logarithm(&f, 8).unwrap().coeff(2).is_zero());
    }

    #[test]
    fn honda_q2_pi_series() {
        let f2 = presets::q2();
        let model = honda_model(&f2, 16).unwrap();
        assert_eq!(*model.frobenius.series().coeff(1), OElement::from_int(&f2, 2));
        assert_eq!(*model.frobenius.series().coeff(2), OElement::from_int(&f2, -1));
        let r = model.frobenius.series().reduce_mod_pi();
        assert_eq!(r.t_valuation, 2);
    }

    #[test]
    fn honda_law_is_equivariant() {
        for (_, field) in presets::all() {
            let model = honda_model(&field, 24).unwrap();
            assert!(model.law.min_pi_prec() >= field.max_pi_prec());
            assert!(checks::equivariance(&model.frobenius, &model.law).unwrap());
            assert!(checks::commutative(&model.law));
            assert!(checks::associative(&model.law, 12));
        }
    }

    #[test]
    fn honda_genus_over_ramified_field() {
        let r = presets::q2_ramified();
        let model = honda_model(&r, 16).unwrap();
        assert_eq!(genus_cp(&model, 1).unwrap(), LaurentScalar::integral(OElement::pi(&r)));
        assert_eq!(genus_cp(&model, 3).unwrap(), LaurentScalar::integral(OElement::from_int(&r, 2)));
        assert!(genus_cp(&model, 2).unwrap().is_zero());
    }

    #[test]
    fn log_is_linear_under_endomorphisms() {
        for (_, field) in presets::all() {
            let f = FrobeniusSeries::default_for(&field, 16);
            let log = logarithm(&f, 16).unwrap();
            let a = OElement::from_int(&field, 5);
            let ea = build_endomorphism(&f, &a, 16).unwrap();
            assert!(checks::log_linear(&log, &ea, &a).unwrap());
            let honda = honda_model(&field, 16).unwrap();
            let eh = honda.endomorphism(&a).unwrap();
            assert!(checks::log_linear(&honda.log, &eh, &a).unwrap());
        }
    }

    #[test]
    fn genus_out_of_range() {
        let model = honda_model(&presets::q2(), 8).unwrap();
        assert!(matches!(genus_cp(&model, 8), Err(LtError::OutOfRange { .. })));
        assert_eq!(genus_cp(&model, 1).unwrap(), LaurentScalar::one(&presets::q2()));
    }

    #[test]
    fn floor_log_values() {
        assert_eq!(floor_log(2, 1), 0);
        assert_eq!(floor_log(2, 64), 6);
        assert_eq!(floor_log(3, 26), 2);
        assert_eq!(floor_log(3, 27), 3);
    }
}
