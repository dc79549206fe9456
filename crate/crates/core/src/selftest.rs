//! Deterministic aggregate self-test over the presets.
//!
//! Every suite draws from its own ChaCha8 stream seeded by `(seed, suite
//! name)`, and results are keyed in a `BTreeMap`, so the report is a pure
//! function of the configuration.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::{Field, LaurentScalar, OElement};
use crate::lubin_tate::{self, checks, FrobeniusSeries};
use crate::prism;
use crate::random;
use crate::series::PowerSeries;
use crate::theta;
use crate::witt::{self, CheckReport, CheckResult, DeltaOperator, MulLaw, WittPair, ZMod};
use crate::presets;

/// A deliberately broken ingredient, used to show that the suites notice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Witt multiplication with the uncrossed second component.
    LiteralWittMul,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestConfig {
    pub seed: u64,
    pub deg: usize,
    pub trials: usize,
    pub presets: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fault: Option<Fault>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 0,
            deg: 24,
            trials: 20,
            presets: presets::NAMES.iter().map(|s| s.to_string()).collect(),
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub config: SelftestConfig,
    pub suites: BTreeMap<String, CheckResult>,
    pub failed: Vec<String>,
    pub pass: bool,
}

fn rng_for(seed: u64, suite: &str) -> ChaCha8Rng {
    // FNV-1a over the suite name keeps streams independent of run order
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in suite.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

struct Suites {
    out: BTreeMap<String, CheckResult>,
}

impl Suites {
    fn single(&mut self, name: String, ok: bool, checked: usize, counterexample: impl FnOnce() -> String) {
        self.out.insert(
            name,
            CheckResult { pass: ok, checked, counterexample: if ok { None } else { Some(counterexample()) } },
        );
    }

    fn merge(&mut self, prefix: &str, report: CheckReport) {
        for (k, v) in report.checks {
            self.out.insert(format!("{prefix}/{k}"), v);
        }
    }

    fn error(&mut self, name: String, e: impl std::fmt::Display) {
        self.single(name, false, 0, || e.to_string());
    }
}

pub fn run(config: &SelftestConfig) -> SelftestReport {
    let mut s = Suites { out: BTreeMap::new() };
    for name in &config.presets {
        match presets::lookup(name) {
            Ok(field) => run_preset(&mut s, config, name, &field),
            Err(e) => s.error(format!("{name}/preset"), e),
        }
    }
    let failed: Vec<String> = s.out.iter().filter(|(_, v)| !v.pass).map(|(k, _)| k.clone()).collect();
    SelftestReport { config: config.clone(), pass: failed.is_empty(), failed, suites: s.out }
}

fn run_preset(s: &mut Suites, cfg: &SelftestConfig, name: &str, field: &Field) {
    let key = |suite: &str| format!("{name}/{suite}");
    field_suite(s, cfg, &key("field/ring"), field);
    lt_suites(s, cfg, name, field);
    honda_suites(s, cfg, name, field);
    witt_suites(s, cfg, name, field);
    delta_suites(s, cfg, name, field);
    theta_suites(s, cfg, name, field);
    prism_suites(s, cfg, name, field);
}

fn field_suite(s: &mut Suites, cfg: &SelftestConfig, key: &str, field: &Field) {
    let mut rng = rng_for(cfg.seed, key);
    let mut result = CheckResult { pass: true, checked: 0, counterexample: None };
    for _ in 0..cfg.trials {
        let a = random::oelement(field, &mut rng);
        let b = random::oelement(field, &mut rng);
        let c = random::oelement(field, &mut rng);
        let ok = a.add(&b).mul(&c) == a.mul(&c).add(&b.mul(&c))
            && a.mul(&b) == b.mul(&a)
            && (!a.is_unit() || a.mul(&a.inverse().expect("unit")) == OElement::one(field));
        result.checked += 1;
        if !ok && result.pass {
            result.pass = false;
            result.counterexample = Some(format!("a = {a}, b = {b}, c = {c}"));
        }
    }
    s.out.insert(key.to_string(), result);
}

fn lt_suites(s: &mut Suites, cfg: &SelftestConfig, name: &str, field: &Field) {
    let key = |suite: &str| format!("{name}/lt/{suite}");
    let d = cfg.deg;
    let f = FrobeniusSeries::default_for(field, d);
    let model = match lubin_tate::FormalGroupModel::from_frobenius(&f, d) {
        Ok(m) => m,
        Err(e) => return s.error(key("group-law"), e),
    };
    let law = &model.law;
    s.single(key("equivariance"), checks::equivariance(&f, law).unwrap_or(false), 1, || "f(F) ≠ F(f, f)".into());
    s.single(key("commutative"), checks::commutative(law), 1, || "F(X,Y) ≠ F(Y,X)".into());
    s.single(key("associative"), checks::associative(law, d / 2), 1, || "associativity fails".into());
    s.single(key("unit"), checks::unit_law(law), 1, || "F(X,0) ≠ X".into());
    let pi_endo = model.endomorphism(&OElement::pi(field));
    s.single(key("pi-is-f"), pi_endo.as_ref().is_ok_and(|e| e == f.series()), 1, || "[π] ≠ f".into());
    match checks::height_valuation(&f, d.max(field.p().pow(field.n() as u32) as usize)) {
        Ok((v, _)) => {
            let expect = field.p().pow(field.n() as u32) as usize;
            s.single(key("height"), v == expect, 1, || format!("[p] mod π has valuation {v}, expected {expect}"));
        }
        Err(e) => s.error(key("height"), e),
    }

    let mut rng = rng_for(cfg.seed, &key("endomorphisms"));
    let pairs = (cfg.trials / 4).max(2);
    let mut comp = CheckResult { pass: true, checked: 0, counterexample: None };
    let mut add = comp.clone();
    let mut lin = comp.clone();
    let exact = field.with_max_precision();
    for _ in 0..pairs {
        // scalars are exact lifts, so their products are formed at full precision
        let a = random::oelement(field, &mut rng).lift_exact(&exact).expect("same presentation");
        let b = random::oelement(field, &mut rng).lift_exact(&exact).expect("same presentation");
        let built = (|| {
            Ok::<_, lubin_tate::LtError>((
                model.endomorphism(&a)?,
                model.endomorphism(&b)?,
                model.endomorphism(&a.mul(&b))?,
                model.endomorphism(&a.add(&b))?,
            ))
        })();
        let (ea, eb, eab, esum) = match built {
            Ok(t) => t,
            Err(e) => return s.error(key("endomorphisms"), e),
        };
        let describe = || format!("a = {a}, b = {b}");
        let ok = ea.compose(&eb).is_ok_and(|c| c == eab);
        record(&mut comp, ok, describe);
        record(&mut add, checks::additive(law, &ea, &eb, &esum).unwrap_or(false), describe);
        let a_here = a.change_field(field).expect("same presentation");
        record(&mut lin, checks::log_linear(&model.log, &ea, &a_here).unwrap_or(false), describe);
    }
    s.out.insert(key("composition"), comp);
    s.out.insert(key("additive"), add);
    s.out.insert(key("log-linear"), lin);
}

fn record(r: &mut CheckResult, ok: bool, describe: impl FnOnce() -> String) {
    r.checked += 1;
    if !ok && r.pass {
        r.pass = false;
        r.counterexample = Some(describe());
    }
}

fn honda_suites(s: &mut Suites, cfg: &SelftestConfig, name: &str, field: &Field) {
    let key = |suite: &str| format!("{name}/honda/{suite}");
    let d = cfg.deg;
    let model = match lubin_tate::honda_model(field, d) {
        Ok(m) => m,
        Err(e) => return s.error(key("model"), e),
    };
    let integral = model.law.rows().iter().flatten().all(|c| c.pi_prec() > 0);
    s.single(key("integral"), integral, 1, || "coefficient with no known digits".into());
    let q = field.q() as usize;
    let mut genus = CheckResult { pass: true, checked: 0, counterexample: None };
    for m in 0..d {
        let expect = match (0..).map(|k| (k, q.pow(k as u32))).take_while(|&(_, qk)| qk <= m + 1).find(|&(_, qk)| qk == m + 1) {
            Some((k, qk)) => LaurentScalar::integral(OElement::from_int(field, qk as i64)).mul_pi_pow(-k),
            None => LaurentScalar::zero(field),
        };
        let got = lubin_tate::genus_cp(&model, m);
        record(&mut genus, got.as_ref().is_ok_and(|g| *g == expect), || format!("m = {m}: {got:?}"));
    }
    s.out.insert(key("genus"), genus);
    s.single(key("equivariance"), checks::equivariance(&model.frobenius, &model.law.truncate(d / 2)).unwrap_or(false), 1, || {
        "[π]_H(F_H) ≠ F_H([π]_H, [π]_H)".into()
    });
}

fn witt_suites(s: &mut Suites, cfg: &SelftestConfig, name: &str, field: &Field) {
    let law = match cfg.fault {
        Some(Fault::LiteralWittMul) => MulLaw::Literal,
        None => MulLaw::Crossed,
    };
    let n = cfg.trials;
    if field.e() == 1 && field.f() == 1 {
        let key = format!("{name}/witt/zmod");
        let mut rng = rng_for(cfg.seed, &key);
        let (p, m) = (field.p(), field.precision());
        let mut sample = |r: &mut ChaCha8Rng| random::zmod(p, m, r);
        let triples: Vec<(WittPair<ZMod>, _, _)> = (0..n)
            .map(|_| {
                (random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng))
            })
            .collect();
        s.merge(&key, witt::ring_axioms(&triples, law));
    }
    let key = format!("{name}/witt/ofield");
    let mut rng = rng_for(cfg.seed, &key);
    let mut sample = |r: &mut ChaCha8Rng| random::oelement(field, r);
    let triples: Vec<_> = (0..n)
        .map(|_| (random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng)))
        .collect();
    s.merge(&key, witt::ring_axioms(&triples, law));

    let key = format!("{name}/witt/series");
    let mut rng = rng_for(cfg.seed, &key);
    let mut sample = |r: &mut ChaCha8Rng| random::small_series(field, 6, r);
    let triples: Vec<_> = (0..(n / 4).max(2))
        .map(|_| (random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng)))
        .collect();
    s.merge(&key, witt::ring_axioms(&triples, law));
}

fn delta_suites(s: &mut Suites, cfg: &SelftestConfig, name: &str, field: &Field) {
    let key = format!("{name}/delta");
    let d = cfg.deg.min(16);
    let f = FrobeniusSeries::default_for(field, d);
    let delta = DeltaOperator::lubin_tate(f.series());
    let t = PowerSeries::var_t(field, d);
    let q = field.q() as usize;
    let mut t2 = PowerSeries::zero(field, d);
    t2.set_coeff(2, OElement::pi(field));
    if q < d {
        t2.set_coeff(q + 1, OElement::from_int(field, 2));
    }
    let ok = witt::delta_apply(&delta, &t).is_ok_and(|x| x == t) && witt::delta_apply(&delta, &t.mul(&t)).is_ok_and(|x| x == t2);
    s.single(format!("{key}/examples"), ok, 2, || "δ(T) ≠ T or δ(T²) ≠ πT² + 2T^{q+1}".into());
    let mut rng = rng_for(cfg.seed, &key);
    let samples: Vec<_> = (0..cfg.trials)
        .map(|_| (random::series(field, d, 0, &mut rng), random::series(field, d, 0, &mut rng)))
        .collect();
    s.merge(&format!("{key}/section"), witt::section_check(&delta, &samples));
    let consts = DeltaOperator::<OElement>::identity();
    let samples: Vec<_> = (0..cfg.trials).map(|_| (random::oelement(field, &mut rng), random::oelement(field, &mut rng))).collect();
    s.merge(&format!("{key}/constants"), witt::section_check(&consts, &samples));
}

fn theta_suites(s: &mut Suites, cfg: &SelftestConfig, name: &str, field: &Field) {
    let key = format!("{name}/theta");
    let mut rng = rng_for(cfg.seed, &key);
    let samples: Vec<_> = (0..cfg.trials).map(|_| random::oelement(field, &mut rng)).collect();
    match theta::frobenius_identity_check(field, &samples) {
        Ok(r) => s.single(format!("{key}/frobenius-identity"), r.pass, r.samples, || r.counterexample.clone().unwrap_or_default()),
        Err(e) => s.error(format!("{key}/frobenius-identity"), e),
    }
    for k in 1..=3 {
        match theta::theta_eval_check(field, k, &samples) {
            Ok(r) => s.single(format!("{key}/integrality/k={k}"), r.pass, r.checked, || r.failures.join("; ")),
            Err(e) => s.error(format!("{key}/integrality/k={k}"), e),
        }
    }
    let shape = theta::shape_check(field, 3).unwrap_or(false) && theta::derived_identity_check(field, 3).unwrap_or(false);
    s.single(format!("{key}/shape"), shape, 1, || "degree, leading coefficient or derived identity fails".into());
}

fn prism_suites(s: &mut Suites, cfg: &SelftestConfig, name: &str, field: &Field) {
    let d = cfg.deg;
    let f = FrobeniusSeries::default_for(field, d);
    for n in 1..=3 {
        let key = format!("{name}/prism/n={n}");
        match prism::verify_prism_condition(&f, n, d) {
            Ok(r) => s.single(key, r.pass, 1, || serde_json::to_string(&r).unwrap_or_default()),
            Err(e) => s.error(key, e),
        }
    }
    let ok = (1..=4).all(|k| prism::completeness_proxy(&f, 2, k, d).unwrap_or(false));
    s.single(format!("{name}/prism/completeness"), ok, 4, || "(π, q_2)^k ⊄ (π, T)^k".into());
}
