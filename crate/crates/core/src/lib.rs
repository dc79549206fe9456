//! Exact arithmetic for Lubin–Tate formal groups over rings of integers of
//! `p`-adic fields, length-two ramified Witt vectors, δ-structures, the
//! numerical polynomials `θ_k`, and the `o_L`-typical prism
//! `(o_L[[T]], (q_n(T)))` with re-checkable membership certificates.

pub mod cli;
pub mod field;
pub mod lubin_tate;
pub mod presets;
pub mod prism;
pub mod random;
pub mod selftest;
pub mod series;
pub mod theta;
pub mod witt;

pub use field::{Field, FieldError, LaurentScalar, LocalFieldSpec, OElement, Valuation};
pub use series::{BivariateSeries, PowerSeries, Scalar, SeriesError};
