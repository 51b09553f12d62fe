// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Relative slack applied when a floating-point result is turned into a
/// certified bound. It dominates the accumulated rounding of the sums and
/// elementary functions used in this crate by several orders of magnitude.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// A closed real interval `[lo, hi]` guaranteed to contain a quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(LabError::Validation(format!(
                "bracket endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo > hi {
            return Err(LabError::Validation(format!(
                "bracket is inverted: [{lo}, {hi}]"
            )));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Bracket { lo: v, hi: v }
    }

    pub fn zero() -> Self {
        Bracket { lo: 0.0, hi: 0.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersects(&self, other: &Bracket) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_subset_of(&self, other: &Bracket) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Widens both ends by [`ROUNDING_SLACK`] relative to their magnitude.
    pub fn outward(self) -> Self {
        Bracket {
            lo: self.lo - self.lo.abs() * ROUNDING_SLACK,
            hi: self.hi + self.hi.abs() * ROUNDING_SLACK,
        }
    }

    /// Bracket of `|x - y|` for `x` in `self`, `y` in `other`.
    pub fn abs_diff(&self, other: &Bracket) -> Bracket {
        let lo = (self.lo - other.hi).max(other.lo - self.hi).max(0.0);
        let hi = (self.hi - other.lo).max(other.hi - self.lo);
        Bracket { lo, hi }
    }

    pub fn scale(&self, c: f64) -> Bracket {
        if c >= 0.0 {
            Bracket {
                lo: self.lo * c,
                hi: self.hi * c,
            }
        } else {
            Bracket {
                lo: self.hi * c,
                hi: self.lo * c,
            }
        }
    }
}

impl std::fmt::Display for Bracket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.9}, {:.9}]", self.lo, self.hi)
    }
}
