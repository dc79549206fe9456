// Genus values from the Honda model: only degrees q^k - 1 contribute.

use pitypical::lubin_tate::{genus_cp, honda_model};
use pitypical::presets;

fn main() {
    for (name, field) in presets::all().into_iter().take(3) {
        let model = honda_model(&field, 48).expect("honda model");
        print!("{name:>12}:");
        for m in 0..=40 {
            let v = genus_cp(&model, m).unwrap();
            if !v.is_zero() {
                print!("  CP({m}) -> {v:?}");
            }
        }
        println!();
    }
}
