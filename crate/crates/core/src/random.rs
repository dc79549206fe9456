//! Seeded samplers shared by the self-test, the examples and the test suites.

use rand::Rng;

use crate::field::{Field, OElement};
use crate::series::PowerSeries;
use crate::witt::{WittPair, ZMod};

/// Uniform element of `o_L / π^{eM}`.
pub fn oelement<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> OElement {
    let rows: Vec<Vec<i64>> = (0..field.e())
        .map(|_| (0..field.f()).map(|_| rng.gen_range(0..field.modulus()) as i64).collect())
        .collect();
    OElement::from_coeffs(field, &rows).expect("residues are in range")
}

/// Uniform element of `Z / p^m`.
pub fn zmod<R: Rng + ?Sized>(p: u64, m: u32, rng: &mut R) -> ZMod {
    ZMod::new(p, m, rng.gen_range(0..p.pow(m)) as i64)
}

/// Series with uniform coefficients in degrees `lowest..=deg`.
pub fn series<R: Rng + ?Sized>(field: &Field, deg: usize, lowest: usize, rng: &mut R) -> PowerSeries {
    let coeffs = (0..=deg)
        .map(|i| if i < lowest { OElement::zero(field) } else { oelement(field, rng) })
        .collect();
    PowerSeries::new(field, coeffs)
}

/// Series whose coefficients are small integers, which keeps printed
/// counterexamples readable.
pub fn small_series<R: Rng + ?Sized>(field: &Field, deg: usize, rng: &mut R) -> PowerSeries {
    let ints: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-4..=4)).collect();
    PowerSeries::from_ints(field, &ints, deg)
}

pub fn witt_pair<C, R: Rng + ?Sized>(mut sample: impl FnMut(&mut R) -> C, rng: &mut R) -> WittPair<C>
where
    C: crate::witt::Carrier,
{
    let a0 = sample(rng);
    let a1 = sample(rng);
    WittPair { a0, a1 }
}
