// The δ-structure on o_L[[T]] with Frobenius lift g(T) ↦ g(f(T)).

use pitypical::lubin_tate::FrobeniusSeries;
use pitypical::witt::{self, DeltaOperator};
use pitypical::{presets, random, PowerSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let field = presets::q3();
    let deg = 12;
    let f = FrobeniusSeries::default_for(&field, deg);
    let delta = DeltaOperator::lubin_tate(f.series());

    let t = PowerSeries::var_t(&field, deg);
    let d1 = witt::delta_apply(&delta, &t).unwrap();
    let d2 = witt::delta_apply(&delta, &t.mul(&t)).unwrap();
    println!("δ(T)  = {:?}", d1.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>()[..4].to_vec());
    println!("δ(T²) has T^2 coefficient {} and T^4 coefficient {}", d2.coeff(2), d2.coeff(4));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples: Vec<_> = (0..20).map(|_| (random::series(&field, deg, 0, &mut rng), random::series(&field, deg, 0, &mut rng))).collect();
    for (name, r) in witt::section_check(&delta, &samples).checks {
        println!("{name:<24} {} ({} checked)", if r.pass { "ok" } else { "FAIL" }, r.checked);
    }
}
