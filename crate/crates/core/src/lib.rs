//! Exact arithmetic for modular units on X0(N).
//!
//! The building blocks are the functions `F_{m,h}` indexed by pairs `(m, h)`
//! with `m | N`, `m != N` and `h` modulo `l(m)`. The crate computes their
//! divisors at every cusp, decides which products are modular units, builds
//! the replacement operators that rewrite exponent vectors into a basis, and
//! derives the cuspidal class groups `C_N`, `C(N)` and `C_N(Q)`.

pub mod analysis;
pub mod checks;
pub mod classgroup;
pub mod criterion;
pub mod cusps;
pub mod error;
pub mod json;
pub mod linalg;
pub mod numtheory;
pub mod psi;
pub mod units;

pub use error::{Error, Result};
pub use numtheory::Rational;
