//! Horizon-bounded certificates for filter convergence on the natural numbers.
//!
//! Everything in this crate inspects finitely many indices and says so. A
//! density, a filter membership, or a limit claim is never "true", it `Holds`
//! at a stated horizon and tolerance, `Fails` with a witness, or stays
//! `Inconclusive`. The modules layer as follows:
//!
//! * [`modulus`]: gauges f with f(0) = 0, monotone and subadditive, used to
//!   rescale counting densities.
//! * [`natset`]: symbolic subsets of the naturals with closed-form or swept
//!   counting, and the gauged density estimator built on them.
//! * [`filters`]: the free filters the toolkit certifies against, with
//!   tri-state membership, stationarity and inclusion checks.
//! * [`spaces`]: finite truncations of the vector spaces sequences live in,
//!   with seminorms and the dual pairing.
//! * [`converge`]: limit, Cauchy and cluster-point certificates for sequences
//!   relative to a filter, plus Cesaro and index-map transforms.
//! * [`gallery`]: packaged experiments that replay the classical summability
//!   constructions and counterexamples with fixed seeds.
//!
//! The crate is `no_std` compatible (with `alloc`); all float math goes
//! through `libm` so results do not depend on the platform's libm.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod converge;
pub mod filters;
pub mod gallery;
pub mod modulus;
pub mod natset;
pub mod spaces;
pub mod verdict;

mod fmath;

pub use verdict::{Check, Outcome, Verdict};
