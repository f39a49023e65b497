//! Population recovery over the binary deletion channel.
//!
//! A population is a distribution over a few binary strings of a common
//! length `n`. Each trace is produced by drawing a string from the population
//! and deleting every bit independently with probability `delta`. This crate
//! implements:
//!
//! * the string/population model and its exact arithmetic ([`model`]),
//! * a reproducible counter-based deletion channel ([`channel`]),
//! * exact and estimated k-decks ([`deck`]),
//! * brute-force recovery from estimated k-decks ([`recovery`]),
//! * exact rational polynomials and the Chebyshev-based damping chain ([`poly`]),
//! * the constructive separation pipeline and its exact identities ([`separation`]),
//! * hard-instance construction and exact trace distances ([`lower_bound`]).
//!
//! Everything that can be exact is exact: weights, decks of explicit
//! populations, polynomial coefficients and lower-bound distances are
//! arbitrary-precision rationals. Floating point only appears where the
//! quantity is an empirical estimate or an irrational bound.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod arith;
pub mod channel;
pub mod deck;
pub mod error;
pub mod lower_bound;
pub mod model;
pub mod poly;
pub mod recovery;
pub mod separation;

pub use error::{Error, Result};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use model::{BitString, Population, Restriction};
