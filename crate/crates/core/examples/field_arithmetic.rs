// Build a few local fields, do arithmetic in their rings of integers and
// watch precision move when dividing by the uniformizer.

use pitypical::{presets, LocalFieldSpec, OElement};

fn main() {
    for (name, field) in presets::all() {
        println!("{name:>14}: p={} f={} e={} q={} M={}", field.p(), field.f(), field.e(), field.q(), field.precision());
    }

    // Q_2(sqrt 2) from its Eisenstein polynomial x^2 - 2.
    let l = LocalFieldSpec::new(2, vec![0, 1], vec![vec![-2], vec![0], vec![1]], 12).expect("Eisenstein");
    let pi = OElement::pi(&l);
    let three = OElement::from_int(&l, 3);
    println!("pi^2 = {}", pi.pow(2));
    println!("3 has valuation {:?}, inverse {}", three.val_pi(), three.inverse().unwrap());

    let x = OElement::from_int(&l, 12);
    let y = x.div_pi_exact(3).unwrap();
    println!("12 / pi^3 = {y}");
    assert_eq!(y.mul_pi_pow(3), x.truncate_prec(y.pi_prec() + 3));

    // x^2 - 4 is not Eisenstein: the constant term is divisible by p^2.
    match LocalFieldSpec::new(2, vec![0, 1], vec![vec![-4], vec![0], vec![1]], 12) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
}
