// Randomized invariants. Each case draws a preset and a seed; the seed
// drives a ChaCha stream for the algebraic samples, so failures shrink to a
// small (preset, seed) pair that reproduces exactly.

use pitypical::lubin_tate::{self, checks, FrobeniusSeries};
use pitypical::witt::{self, DeltaOperator, MulLaw, WittPair};
use pitypical::{presets, prism, random, theta};
use pitypical::{Field, LaurentScalar, OElement, PowerSeries};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(preset: usize, seed: u64) -> (Field, ChaCha8Rng) {
    (presets::all()[preset].1.clone(), ChaCha8Rng::seed_from_u64(seed))
}

fn exact(a: &OElement) -> OElement {
    a.lift_exact(&a.field().with_max_precision()).unwrap()
}

/// πT + T^q plus random multiples of π in the other degrees.
fn random_frobenius(field: &Field, deg: usize, rng: &mut ChaCha8Rng) -> FrobeniusSeries {
    let q = field.q() as usize;
    let mut s = PowerSeries::zero(field, deg);
    s.set_coeff(1, OElement::pi(field));
    for k in 2..=deg {
        let mut c = random::oelement(field, rng).mul_pi_pow(1);
        if k == q {
            c = c.add(&OElement::one(field));
        }
        s.set_coeff(k, c);
    }
    FrobeniusSeries::validate(s).unwrap()
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn residue_field_has_q_elements(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let a = random::oelement(&field, &mut rng);
        prop_assert!(a.pow(field.q()).sub(&a).val_pi().lower_bound() >= 1);
        prop_assert!(a.residues().iter().all(|&x| x < field.modulus()));
    }

    #[test]
    fn division_by_pi_undoes_multiplication(preset in 0..4usize, seed: u64, k in 0..=4u32) {
        let (field, mut rng) = setup(preset, seed);
        let k = k.min(2 * field.e() as u32);
        let a = random::oelement(&field, &mut rng);
        let x = a.mul_pi_pow(k);
        let y = x.div_pi_exact(k).unwrap();
        prop_assert_eq!(&y, &a);
        prop_assert_eq!(y.pi_prec(), x.pi_prec() - k);
        let lost = x.valid_prec() - y.valid_prec();
        prop_assert!(lost <= k.div_ceil(field.e() as u32));
    }

    #[test]
    fn ring_axioms_in_o_l(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let [a, b, c] = [0; 3].map(|_| random::oelement(&field, &mut rng));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.sub(&a), OElement::zero(&field));
    }

    #[test]
    fn valuation_is_additive(preset in 0..4usize, seed: u64, i in 0..6u32, j in 0..6u32) {
        let (field, mut rng) = setup(preset, seed);
        let unit = |rng: &mut ChaCha8Rng| loop {
            let u = random::oelement(&field, rng);
            if u.is_unit() {
                break u;
            }
        };
        let a = unit(&mut rng).mul_pi_pow(i);
        let b = unit(&mut rng).mul_pi_pow(j);
        prop_assume!(i + j < field.max_pi_prec());
        prop_assert_eq!(a.mul(&b).val_pi().finite(), Some(i + j));
    }

    #[test]
    fn composition_is_associative(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let [g, h, k] = [0; 3].map(|_| random::series(&field, 10, 1, &mut rng));
        prop_assert_eq!(g.compose(&h).unwrap().compose(&k).unwrap(), g.compose(&h.compose(&k).unwrap()).unwrap());
    }

    #[test]
    fn exact_division_recovers_quotient(preset in 0..4usize, seed: u64, k in 0..4usize) {
        let (field, mut rng) = setup(preset, seed);
        let g = random::series(&field, 12, 0, &mut rng);
        let mut u = random::series(&field, 12, 0, &mut rng);
        u.set_coeff(0, OElement::one(&field));
        let h = u.shift_up(k).truncate(12);
        let q = g.mul(&h).exact_divide(&h).unwrap();
        prop_assert_eq!(q.deg(), 12 - k);
        prop_assert_eq!(q, g.truncate(12 - k));
    }

    #[test]
    fn reduction_mod_pi_is_a_homomorphism(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let g = random::series(&field, 10, 0, &mut rng);
        let h = random::series(&field, 10, 0, &mut rng);
        let (rg, rh) = (g.reduce_mod_pi().residue, h.reduce_mod_pi().residue);
        prop_assert_eq!(g.add(&h).reduce_mod_pi().residue, rg.add(&rh));
        prop_assert_eq!(g.mul(&h).reduce_mod_pi().residue, rg.mul(&rh));
    }

    #[test]
    fn series_truncation_takes_the_minimum(preset in 0..4usize, seed: u64, d1 in 0..12usize, d2 in 0..12usize) {
        let (field, mut rng) = setup(preset, seed);
        let g = random::series(&field, d1, 0, &mut rng);
        let h = random::series(&field, d2, 0, &mut rng);
        prop_assert_eq!(g.add(&h).deg(), d1.min(d2));
        prop_assert_eq!(g.mul(&h).deg(), d1.min(d2));
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn lubin_tate_laws_for_random_f(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let deg = 10;
        let f = random_frobenius(&field, deg, &mut rng);
        let law = lubin_tate::build_group_law(&f, deg).unwrap();
        prop_assert!(checks::commutative(&law));
        prop_assert!(checks::unit_law(&law));
        prop_assert!(checks::associative(&law, deg / 2));
        prop_assert!(checks::equivariance(&f, &law).unwrap());

        let a = exact(&random::oelement(&field, &mut rng));
        let b = exact(&random::oelement(&field, &mut rng));
        let ea = lubin_tate::build_endomorphism(&f, &a, deg).unwrap();
        let eb = lubin_tate::build_endomorphism(&f, &b, deg).unwrap();
        let eab = lubin_tate::build_endomorphism(&f, &a.add(&b), deg).unwrap();
        prop_assert_eq!(ea.coeff(0), &OElement::zero(&field));
        prop_assert_eq!(ea.coeff(1), &a.change_field(&field).unwrap());
        prop_assert!(checks::additive(&law, &ea, &eb, &eab).unwrap());
        let e_ab = lubin_tate::build_endomorphism(&f, &a.mul(&b), deg).unwrap();
        prop_assert_eq!(ea.compose(&eb).unwrap(), e_ab);

        let log = lubin_tate::logarithm(&f, deg).unwrap();
        prop_assert!(checks::log_linear(&log, &ea, &a.change_field(&field).unwrap()).unwrap());
    }

    #[test]
    fn honda_model_is_integral_and_log_linear(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let deg = 12.max(field.q() as usize);
        let model = lubin_tate::honda_model(&field, deg).unwrap();
        prop_assert!(model.law.min_pi_prec() > 0);
        prop_assert!(checks::commutative(&model.law));
        let a = exact(&random::oelement(&field, &mut rng));
        let ea = model.endomorphism(&a).unwrap();
        prop_assert!(checks::log_linear(&model.log, &ea, &a.change_field(&field).unwrap()).unwrap());
    }

    #[test]
    fn witt_ring_and_ghost(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let mut sample = |r: &mut ChaCha8Rng| random::oelement(&field, r);
        let t = (random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng));
        let report = witt::ring_axioms(std::slice::from_ref(&t), MulLaw::Crossed);
        prop_assert!(report.pass(), "{:?}", report.checks);

        let (x, y) = (random::oelement(&field, &mut rng), random::oelement(&field, &mut rng));
        let zero = OElement::zero(&field);
        let k = witt::witt_mul(&WittPair::new(zero.clone(), x.clone()).unwrap(), &WittPair::new(zero.clone(), y.clone()).unwrap()).unwrap();
        prop_assert_eq!(k.a0, zero);
        prop_assert_eq!(k.a1, x.mul(&y).mul_pi_pow(1));
    }

    #[test]
    fn delta_lift_congruence(preset in 0..4usize, seed: u64) {
        let (field, mut rng) = setup(preset, seed);
        let deg = 12;
        let f = random_frobenius(&field, deg, &mut rng);
        let delta = DeltaOperator::lubin_tate(f.series());
        let one = PowerSeries::one(&field, deg);
        prop_assert!(witt::delta_apply(&delta, &one).unwrap().is_zero());
        let g = random::series(&field, deg, 0, &mut rng);
        let phi = delta.phi(&g).unwrap();
        let diff = phi.sub(&g.pow(field.q()));
        prop_assert!(diff.coeffs().iter().all(|c| c.val_pi().lower_bound() >= 1));
        let samples = [(g, random::series(&field, deg, 0, &mut rng))];
        prop_assert!(witt::section_check(&delta, &samples).pass());
    }

    #[test]
    fn theta_values_are_integral(preset in 0..4usize, seed: u64, k in 0..=4usize) {
        let (field, mut rng) = setup(preset, seed);
        let a = random::oelement(&field, &mut rng);
        let values = theta::theta_values(&a, k).unwrap();
        prop_assert_eq!(values.len(), k + 1);
        prop_assert_eq!(&values[0], &a);
    }

    #[test]
    fn certificate_is_stable_under_raising_d(preset in 0..4usize, n in 1..=4usize, d in 8..40usize) {
        let field = presets::all()[preset].1.clone();
        let f = FrobeniusSeries::default_for(&field, d + 17);
        let small = prism::prism_certificate(&f, n, d).unwrap();
        let large = prism::prism_certificate(&f, n, d + 16).unwrap();
        prop_assert!(small.pass && large.pass && large.recheck());
        prop_assert_eq!(large.q_n.truncate(d), small.q_n);
        prop_assert_eq!(large.cofactor.truncate(d), small.cofactor);
    }
}

#[test]
fn theta_shape() {
    for (_, field) in presets::all() {
        let q = field.q() as usize;
        let mut leads: Vec<LaurentScalar> = vec![];
        for k in 0..=3usize {
            let th = theta::theta_poly(&field, k).unwrap();
            let work = th.field().clone();
            assert_eq!(th.degree(), q.pow(k as u32));
            assert!(th.poly.coeff(0).is_zero());
            // lead(θ_k) = −π^{−k} Σ_{i<k} π^i lead(θ_i)^{q^{k−i}}, with lead(θ_0) = 1.
            let lead = if k == 0 {
                LaurentScalar::one(&work)
            } else {
                let mut s = LaurentScalar::zero(&work);
                for (i, l) in leads.iter().enumerate() {
                    let mut p = LaurentScalar::pi_power(&work, i as i64);
                    for _ in 0..q.pow((k - i) as u32) {
                        p = p.mul(l);
                    }
                    s = s.add(&p);
                }
                s.mul(&LaurentScalar::pi_power(&work, -(k as i64))).neg()
            };
            assert_eq!(th.poly.coeff(th.degree()), &lead, "k = {k}");
            leads.push(lead);
            assert!(theta::derived_identity_check(&field, k).unwrap());
        }
    }
}

#[test]
fn qn_times_previous_iterate() {
    for (_, field) in presets::all() {
        let deg = 32;
        let f = FrobeniusSeries::default_for(&field, deg + 1);
        for n in 1..=4 {
            let qn = prism::compute_qn(&f, n, deg).unwrap();
            let prev = lubin_tate::iterate_pi(&f, n - 1, deg).unwrap();
            let next = lubin_tate::iterate_pi(&f, n, deg).unwrap();
            assert_eq!(qn.mul(&prev), next, "n = {n}");
        }
    }
}

#[test]
fn cyclotomic_oracle_at_p_3() {
    let field = presets::q3();
    let deg = 40;
    let binom = |n: u64, k: u64| (0..k).fold(1i128, |a, i| a * (n - i) as i128 / (i + 1) as i128) as i64;
    let f = FrobeniusSeries::validate(PowerSeries::from_ints(&field, &[0, 3, 3, 1], deg + 1)).unwrap();
    for n in 1..=3u32 {
        let step = 3u64.pow(n - 1);
        let mut want = vec![0i64; (2 * step + 1) as usize];
        for i in 0..3 {
            for k in 0..=i * step {
                want[k as usize] += binom(i * step, k);
            }
        }
        let qn = prism::compute_qn(&f, n as usize, deg).unwrap();
        assert_eq!(qn, PowerSeries::from_ints(&field, &want, deg), "n = {n}");
    }
}

#[test]
fn completeness_proxy_holds() {
    for (_, field) in presets::all() {
        let f = FrobeniusSeries::default_for(&field, 25);
        for n in 1..=3 {
            for k in 1..=4 {
                assert!(prism::completeness_proxy(&f, n, k, 24).unwrap());
            }
        }
    }
}
