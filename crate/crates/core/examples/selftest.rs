// Run the whole invariant battery on the presets, then again with the
// literal Witt multiplication injected to show it gets caught.

use pitypical::selftest::{self, Fault, SelftestConfig};

fn main() {
    let config = SelftestConfig { seed: 42, deg: 16, trials: 8, ..Default::default() };
    let report = selftest::run(&config);
    println!("{} suites, pass = {}", report.suites.len(), report.pass);

    let faulty = selftest::run(&SelftestConfig { fault: Some(Fault::LiteralWittMul), ..config });
    println!("with literal Witt multiplication, failing suites:");
    for name in &faulty.failed {
        println!("  {name}");
    }
    assert!(!faulty.pass);
}
