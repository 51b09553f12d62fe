// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! Sequential or data-parallel execution of the crate's inner loops.
//!
//! Every operation here is order-preserving: `map_range` returns results in
//! index order and sorts use a total order on their keys, so switching the
//! strategy never changes a result bit.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for data-parallel loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exec {
    /// Run on the calling thread.
    Sequential,
    /// Run on the global rayon pool.
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// All strategies compiled into this build.
    pub fn available() -> &'static [Exec] {
        #[cfg(feature = "parallel")]
        {
            &[Exec::Sequential, Exec::Parallel]
        }
        #[cfg(not(feature = "parallel"))]
        {
            &[Exec::Sequential]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Exec::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Exec::Parallel => "parallel",
        }
    }

    /// `(0..n).map(f).collect()`, in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().with_min_len(1024).map(f).collect(),
        }
    }

    /// Like [`Exec::map_range`] but without a minimum chunk length; use for
    /// a handful of expensive items (optimizer starts, whole grids).
    pub fn map_coarse<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Sorts nonincreasingly under `f64::total_cmp`.
    pub fn sort_desc(self, values: &mut [f64]) {
        match self {
            Exec::Sequential => values.sort_unstable_by(|a, b| b.total_cmp(a)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => values.par_sort_unstable_by(|a, b| b.total_cmp(a)),
        }
    }

    /// Sorts `(value, weight)` pairs nonincreasingly by value, ties by weight.
    pub fn sort_pairs_desc(self, pairs: &mut [(f64, f64)]) {
        let cmp = |a: &(f64, f64), b: &(f64, f64)| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1));
        match self {
            Exec::Sequential => pairs.sort_unstable_by(cmp),
            #[cfg(feature = "parallel")]
            Exec::Parallel => pairs.par_sort_unstable_by(cmp),
        }
    }
}
