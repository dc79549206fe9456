// Numerical polynomials θ_k: their coefficients have growing denominators
// but their values on o_L stay integral.

use pitypical::theta;
use pitypical::{presets, OElement};

fn main() {
    let field = presets::q2();
    for k in 0..=3 {
        let th = theta::theta_poly(&field, k).unwrap();
        println!("θ_{k}: degree {}", th.degree());
    }

    for a in 0..6 {
        let v = theta::theta_values(&OElement::from_int(&field, a), 2).unwrap();
        println!("θ_2({a}) = {}", v[2]);
    }

    let samples: Vec<OElement> = (-10..10).map(|a| OElement::from_int(&field, a)).collect();
    let report = theta::frobenius_identity_check(&field, &samples).unwrap();
    println!("T^q + π·θ_1 = T as polynomials: {}", report.polynomial_identity);
    for k in 1..=4 {
        let r = theta::theta_eval_check(&field, k, &samples).unwrap();
        println!("θ_{k} integral on {} samples: {}", r.checked, r.pass);
    }
}
