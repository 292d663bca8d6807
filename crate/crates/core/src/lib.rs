//! Deterministic sparse interpolation of polynomials given as straight-line
//! programs.
//!
//! The unknown polynomial is only ever touched through *probes*: the program
//! is evaluated under a monomial substitution `x_i -> x^{a_i}` with all
//! arithmetic carried out in `R[x]/(x^p - 1)`. From probes at a deterministic
//! family of small primes the interpolators pick an "ok" prime (one at which
//! at least half of the terms do not collide), reconstruct candidate terms,
//! and keep exactly those candidates that pass a term-membership test
//! evaluated over many primes.
//!
//! Three interpolators are provided:
//!
//! * [`uni_interp::ui_poly`] for univariate targets,
//! * [`multi_interp::mpoly_kron`], plain Kronecker packing followed by
//!   `ui_poly`,
//! * [`multi_interp::mpoly_si`], which uses the shifted substitution
//!   `x_k -> x^{(D^{k-1} mod p) + p}` to read off one exponent per probe
//!   family and keeps probe degrees small.
//!
//! All of them work over any [`Ring`] with decidable equality; [`Integers`]
//! and [`ZMod`] are supplied.
//!
//! ```
//! use slpinterp_core::{multi_interp, oracle, Integers, ProbeMeter, SparsePoly};
//!
//! let ring = Integers;
//! // 3*x1^2*x2^3 + 2
//! let f = SparsePoly::from_terms(&ring, 2, [(3.into(), vec![2, 3]), (2.into(), vec![0, 0])]).unwrap();
//! let prog = oracle::sparse_to_slp(&ring, &f);
//! let meter = ProbeMeter::new();
//! let g = multi_interp::mpoly_si(&ring, &prog, 10, 2, &meter).unwrap();
//! assert_eq!(g, f);
//! ```
//!
//! The crate is `no_std` (it needs `alloc`) unless the default `std` feature
//! is enabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod multi_interp;
pub mod oracle;
pub mod poly;
pub mod primes;
pub mod ring;
pub mod slp;
pub mod uni_interp;

pub use error::Error;
pub use poly::{CyclicPoly, ExponentMap, SparsePoly, UniPoly};
pub use ring::{Integers, Ring, RingSpec, ZMod};
pub use slp::{Blackbox, Instr, ProbeMeter, ProbeOracle, ProbeStats, SlpProgram};

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
