// The Lubin–Tate group law attached to f = 2T + T² over Z_2 is the
// multiplicative group, so everything can be read off from (1 + T).

use pitypical::lubin_tate::{self, FrobeniusSeries};
use pitypical::{presets, OElement, PowerSeries};

fn show(s: &PowerSeries) -> String {
    let terms: Vec<String> = (0..=s.deg())
        .filter(|&k| !s.coeff(k).is_zero())
        .take(8)
        .map(|k| format!("{}·T^{k}", s.coeff(k).to_string().split(" + O").next().unwrap()))
        .collect();
    terms.join(" + ")
}

fn main() {
    let field = presets::q2();
    let deg = 16;
    let f = FrobeniusSeries::default_for(&field, deg);
    println!("f = {}", show(f.series()));

    let law = lubin_tate::build_group_law(&f, deg).expect("group law");
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| law.get(i, j).to_string().split(" + O").next().unwrap().to_string()).collect();
        println!("F[{i}][·] = {}", row.join(", "));
    }
    println!("commutative: {}", lubin_tate::checks::commutative(&law));
    println!("associative to degree 8: {}", lubin_tate::checks::associative(&law, 8));

    let exact = field.with_max_precision();
    for a in [3, 5, -1] {
        let e = lubin_tate::build_endomorphism(&f, &OElement::from_int(&exact, a), deg).unwrap();
        println!("[{a}](T) = {} + …", show(&e));
    }

    let (v, exhausted) = lubin_tate::checks::height_valuation(&f, deg).unwrap();
    assert!(!exhausted);
    println!("[2] mod 2 starts at T^{v}, so the height is 1");

    let log = lubin_tate::logarithm(&f, 6).unwrap();
    for k in 1..=6 {
        println!("log coefficient {k}: {:?}", log.coeff(k));
    }
}
