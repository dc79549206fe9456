// Length-two ramified Witt vectors over Z/2^12 and over o_L: ring axioms
// and the ghost map, with the crossed and the literal multiplication.

use pitypical::witt::{self, Carrier, MulLaw, WittPair, ZMod};
use pitypical::{presets, random};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = WittPair::new(ZMod::new(2, 12, 3), ZMod::new(2, 12, 5)).unwrap();
    let b = WittPair::new(ZMod::new(2, 12, 6), ZMod::new(2, 12, 1)).unwrap();
    let s = witt::witt_add(&a, &b).unwrap();
    let p = witt::witt_mul(&a, &b).unwrap();
    println!("a + b = ({}, {})", s.a0.value(), s.a1.value());
    println!("a * b = ({}, {})", p.a0.value(), p.a1.value());
    let (g0, g1) = witt::ghost_map(&p);
    let (x0, x1) = witt::ghost_map(&a);
    let (y0, y1) = witt::ghost_map(&b);
    println!("ghost(a*b) = ({}, {}), ghost(a)·ghost(b) = ({}, {})", g0.value(), g1.value(), x0.mul(&y0).value(), x1.mul(&y1).value());

    let field = presets::q2_ramified();
    let mut sample = |r: &mut ChaCha8Rng| random::oelement(&field, r);
    let triples: Vec<_> = (0..50)
        .map(|_| (random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng), random::witt_pair(&mut sample, &mut rng)))
        .collect();
    for law in [MulLaw::Crossed, MulLaw::Literal] {
        let report = witt::ring_axioms(&triples, law);
        println!("\n{law:?} multiplication over o_Q2(√2):");
        for (name, r) in &report.checks {
            println!("  {:<28} {}", name, if r.pass { "ok" } else { "FAIL" });
        }
    }
}
