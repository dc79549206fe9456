// q_n = [π^n]/[π^{n-1}] and the certificate π = q_{n+1} + c·q_n that makes
// (o_L[[T]], (q_n)) a prism.

use pitypical::lubin_tate::FrobeniusSeries;
use pitypical::{presets, prism};

fn main() {
    let deg = 64;
    for (name, field) in presets::all() {
        let f = FrobeniusSeries::default_for(&field, deg + 1);
        for n in 1..=3 {
            let report = prism::verify_prism_condition(&f, n, deg).unwrap();
            let cert = prism::prism_certificate(&f, n, deg).unwrap();
            println!(
                "{name:>14} n={n}: certificate {} (recheck {}), q_n mod π from T^{}, all clauses {}",
                cert.pass,
                cert.recheck(),
                report.leading_term.detail,
                report.pass
            );
        }
    }

    let field = presets::q2();
    let f = FrobeniusSeries::default_for(&field, 9);
    let cert = prism::prism_certificate(&f, 1, 8).unwrap();
    println!("\nQ_2, n = 1 certificate:\n{}", serde_json::to_string_pretty(&cert.to_json()).unwrap());
}
