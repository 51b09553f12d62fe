// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Certified numerics for rearrangements, Lorentz norms and the Fourier
//! transform of scaled indicator functions.
//!
//! The crate is organised bottom-up:
//!
//! - [`measure`]: exact distribution functions and nonincreasing
//!   rearrangements of piecewise-constant functions, plus bracketed
//!   rearrangements of sampled even functions ([`measure::GridEnclosure`]).
//! - [`lorentz`]: closed-form Lorentz `(r, s)` norms of step rearrangements,
//!   certified brackets for enclosures, Lebesgue norms and sequence Lorentz
//!   norms with truncation tails.
//! - [`fourier`]: the transforms `2 sin(x/a)/x` of interval indicators, their
//!   cell enclosures and the reference constant `c_p`.
//! - [`witness`]: the lacunary family `g_{a_1}, g_{a_2}, ...` with machine
//!   checked per-level inequalities and exact disjointness.
//! - [`probe`]: upper/lower estimates over the span of the family and
//!   min-ratio probes against Lorentz and Lebesgue targets.
//! - [`torus`]: Fourier coefficients on the circle and the discrete
//!   discrepancy study.
//!
//! Heavy inner loops run through [`exec::Exec`], which dispatches to rayon
//! when the `parallel` feature is enabled and to a plain loop otherwise.
//! Both strategies produce bit-identical results.

pub mod bracket;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod lorentz;
pub mod measure;
pub mod probe;
pub mod selfcheck;
pub mod torus;
pub mod witness;

pub use bracket::Bracket;
pub use error::{LabError, Result};
pub use exec::Exec;

/// Hölder conjugate `p / (p - 1)`.
#[inline]
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}
