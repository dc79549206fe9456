//! The `o_L`-typical prism `(o_L[[T]], (q_n(T)))`.
//!
//! `q_n = [π^n] / [π^{n-1}]` is computed as `q_1∘[π^{n-1}]` with
//! `q_1 = f/T`. Writing `π = q_1(T) + T·f̃(T)` and applying `φ^n`
//! (`T ↦ [π^n](T)`) gives
//!
//! ```text
//! π = q_{n+1}(T) + q_n(T) · [π^{n-1}](T) · f̃([π^n](T))
//! ```
//!
//! so `c = [π^{n-1}]·(f̃∘[π^n])` certifies `π ∈ (q_n) + φ((q_n))·A` by one
//! multiplication.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, OElement};
use crate::lubin_tate::{iterate_pi, FrobeniusSeries, LtError};
use crate::series::{PowerSeries, SeriesError, SeriesJson};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrismError {
    #[error("level n must be at least 1")]
    BadLevel,
    #[error("truncation degree {0} is too small")]
    BadDegree(usize),
    #[error("certificate identity fails at level {n}")]
    CertificateFailure { n: usize },
    #[error("φ(q_{n}) differs from q_{}", n + 1)]
    MismatchAgainstQnPlus1 { n: usize },
    #[error(transparent)]
    Lt(#[from] LtError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Largest degree at which `q_1 = f/T` is known, given a request for `deg`.
fn q1_degree(f: &FrobeniusSeries, deg: usize) -> usize {
    f.usable_deg(deg + 1) - 1
}

fn q1(f: &FrobeniusSeries, deg: usize) -> PowerSeries {
    let d = q1_degree(f, deg);
    let full = f.truncated(d + 1);
    PowerSeries::new(f.field(), full.series().coeffs()[1..].to_vec())
}

/// `q_n(T)` truncated at `deg` (or lower if a custom `f` is shorter).
pub fn compute_qn(f: &FrobeniusSeries, n: usize, deg: usize) -> Result<PowerSeries, PrismError> {
    if n == 0 {
        return Err(PrismError::BadLevel);
    }
    let g = q1(f, deg);
    let inner = iterate_pi(f, n - 1, g.deg())?;
    Ok(g.compose(&inner)?)
}

/// A re-checkable witness of `π = q_{n+1} + c·q_n mod T^{D+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrismCertificate {
    pub n: usize,
    pub q_n: PowerSeries,
    pub q_n1: PowerSeries,
    pub cofactor: PowerSeries,
    pub checked_mod_degree: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub n: usize,
    pub q_n: SeriesJson,
    pub q_n1: SeriesJson,
    pub cofactor: SeriesJson,
    pub checked_mod_degree: usize,
    pub pass: bool,
}

impl PrismCertificate {
    /// Re-verifies the identity using multiplication only.
    pub fn recheck(&self) -> bool {
        let field = self.q_n.field();
        let d = self.checked_mod_degree;
        let pi = PowerSeries::monomial(field, OElement::pi(field), 0, d);
        let rhs = self.q_n1.truncate(d).add(&self.cofactor.truncate(d).mul(&self.q_n.truncate(d)));
        rhs.deg() == d && rhs == pi
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            n: self.n,
            q_n: self.q_n.to_json(),
            q_n1: self.q_n1.to_json(),
            cofactor: self.cofactor.to_json(),
            checked_mod_degree: self.checked_mod_degree,
            pass: self.pass,
        }
    }

    pub fn from_json(field: &Field, repr: &CertificateJson) -> Result<Self, PrismError> {
        Ok(PrismCertificate {
            n: repr.n,
            q_n: PowerSeries::from_json(field, &repr.q_n)?,
            q_n1: PowerSeries::from_json(field, &repr.q_n1)?,
            cofactor: PowerSeries::from_json(field, &repr.cofactor)?,
            checked_mod_degree: repr.checked_mod_degree,
            pass: repr.pass,
        })
    }
}

/// Builds and verifies the certificate at level `n`.
pub fn prism_certificate(f: &FrobeniusSeries, n: usize, deg: usize) -> Result<PrismCertificate, PrismError> {
    if n == 0 {
        return Err(PrismError::BadLevel);
    }
    let field = f.field().clone();
    let g = q1(f, deg);
    let d = g.deg();
    if d < 1 {
        return Err(PrismError::BadDegree(deg));
    }
    // f̃ = (π − q_1)/T, known to degree d − 1
    let pi = PowerSeries::monomial(&field, OElement::pi(&field), 0, d);
    let diff = pi.sub(&g);
    let ftilde = PowerSeries::new(&field, diff.coeffs()[1..].to_vec());
    let prev = iterate_pi(f, n - 1, d)?;
    let cur = iterate_pi(f, n, d)?;
    // [π^{n-1}] = T·h
    let h = PowerSeries::new(&field, prev.coeffs()[1..].to_vec());
    let cofactor = h.mul(&ftilde.compose(&cur.truncate(d - 1))?).shift_up(1);
    let cert = PrismCertificate {
        n,
        q_n: g.compose(&prev)?,
        q_n1: g.compose(&cur)?,
        cofactor,
        checked_mod_degree: d,
        pass: true,
    };
    if !cert.recheck() {
        return Err(PrismError::CertificateFailure { n });
    }
    Ok(cert)
}

/// `φ(q_n) = q_n∘f`, checked against `q_{n+1}`.
pub fn phi_ideal_image(f: &FrobeniusSeries, n: usize, deg: usize) -> Result<PowerSeries, PrismError> {
    let qn = compute_qn(f, n, deg)?;
    let fs = f.truncated(qn.deg()).series().clone();
    let image = qn.compose(&fs)?;
    if image != compute_qn(f, n + 1, deg)? {
        return Err(PrismError::MismatchAgainstQnPlus1 { n });
    }
    Ok(image)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub pass: bool,
    pub detail: String,
}

impl Clause {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Clause { pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrismReport {
    pub n: usize,
    pub deg: usize,
    /// (i) `φ(q_n) = q_{n+1}`.
    pub phi_compatible: Clause,
    /// (ii) `π = q_{n+1} + c·q_n`, hence `π ∈ (q_n) + φ((q_n))·A`.
    pub certificate: Clause,
    /// (iii) `q_n(0) = π`.
    pub distinguished_at_origin: Clause,
    /// `q_n·[π^{n-1}] = [π^n]`.
    pub defining_quotient: Clause,
    /// `q_n mod π` has `T`-valuation `(q−1)q^{n−1}`.
    pub leading_term: Clause,
    /// `δ(q_n) mod (π, T)` as residue coordinates; informational only.
    pub delta_residue: Vec<u64>,
    pub pass: bool,
}

/// Runs every prism clause at level `n`; failures are report content.
pub fn verify_prism_condition(f: &FrobeniusSeries, n: usize, deg: usize) -> Result<PrismReport, PrismError> {
    if n == 0 {
        return Err(PrismError::BadLevel);
    }
    let field = f.field().clone();
    let q = field.q() as usize;

    let phi_compatible = match phi_ideal_image(f, n, deg) {
        Ok(_) => Clause::new(true, "q_n∘f = q_{n+1}"),
        Err(PrismError::MismatchAgainstQnPlus1 { .. }) => Clause::new(false, "q_n∘f ≠ q_{n+1}"),
        Err(e) => return Err(e),
    };
    let (certificate, cert) = match prism_certificate(f, n, deg) {
        Ok(c) => (Clause::new(true, format!("π = q_{{n+1}} + c·q_n mod T^{}", c.checked_mod_degree + 1)), Some(c)),
        Err(PrismError::CertificateFailure { .. }) => (Clause::new(false, "certificate identity fails"), None),
        Err(e) => return Err(e),
    };
    let qn = compute_qn(f, n, deg)?;
    let origin = qn.coeff(0).clone();
    let distinguished_at_origin = Clause::new(origin == OElement::pi(&field), format!("q_n(0) = {origin}"));

    let d = qn.deg();
    let prev = iterate_pi(f, n - 1, d)?;
    let cur = iterate_pi(f, n, d)?;
    let defining_quotient = Clause::new(qn.mul(&prev) == cur, "q_n·[π^{n-1}] vs [π^n]");

    let expected = (q - 1) * q.pow(n as u32 - 1);
    let wide = if expected > d { compute_qn(f, n, expected)? } else { qn.clone() };
    let r = wide.reduce_mod_pi();
    let leading_term = if r.exhausted {
        Clause::new(false, format!("q_n ≡ 0 mod π up to T^{}; expected valuation {expected}", wide.deg()))
    } else {
        Clause::new(r.t_valuation == expected, format!("valuation {} (expected {expected})", r.t_valuation))
    };

    // δ(q_n) = (q_{n+1} − q_n^q)/π; its constant term is (π − π^q)/π
    let delta_residue = match &cert {
        Some(c) => {
            let c0 = c.q_n1.coeff(0).sub(&c.q_n.coeff(0).pow(q as u64));
            c0.div_pi_exact(1).map(|x| x.residue().coeffs).unwrap_or_default()
        }
        None => vec![],
    };

    let pass = phi_compatible.pass
        && certificate.pass
        && distinguished_at_origin.pass
        && defining_quotient.pass
        && leading_term.pass;
    Ok(PrismReport {
        n,
        deg: d,
        phi_compatible,
        certificate,
        distinguished_at_origin,
        defining_quotient,
        leading_term,
        delta_residue,
        pass,
    })
}

/// `(π, q_n)^k ⊂ (π, T)^k`: every generator `π^a q_n^b` (`a + b = k`) has
/// `v_π(coefficient of T^j) ≥ k − j` for `j < k`.
pub fn completeness_proxy(f: &FrobeniusSeries, n: usize, k: usize, deg: usize) -> Result<bool, PrismError> {
    let qn = compute_qn(f, n, deg.max(k))?;
    let mut power = PowerSeries::one(f.field(), qn.deg());
    let mut gens = vec![];
    for b in 0..=k {
        gens.push(power.mul_pi_pow((k - b) as u32));
        power = power.mul(&qn);
    }
    Ok(gens.iter().all(|g| {
        (0..k.min(g.deg() + 1)).all(|j| g.coeff(j).val_pi().lower_bound() as usize >= k - j)
    }))
}
