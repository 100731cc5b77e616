//! Counting multi-quadratic number fields `Q(sqrt(a_1), ..., sqrt(a_k))` of
//! bounded discriminant: exact enumeration, closed-form counting by radical,
//! summed counts up to a discriminant bound, and numeric checks of the
//! leading-order asymptotics.
//!
//! Layering, bottom to top:
//!
//! * [`arith`] - factor sieve and squarefree profiles; every factorization
//!   in the crate goes through here.
//! * [`fields`] - presentations, field keys, normal forms, mod-4 classes,
//!   discriminants.
//! * [`oracle`] - small-parameter brute-force enumeration, two independent
//!   implementations.
//! * [`countform`] - exact closed-form counting families in the number of
//!   prime factors of the radical.
//! * [`globalcount`] - counts of fields with discriminant up to `x`, by a
//!   single sieve pass.
//! * [`asymptotics`] - Euler products, the leading constant, regression
//!   against the closed counts.
//! * [`verify`] - deterministic self-check suites used by the CLI.

pub mod arith;
pub mod asymptotics;
pub mod countform;
pub mod error;
pub mod fields;
pub mod globalcount;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
