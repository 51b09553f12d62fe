// Copyright (c) 2026 The lorentz-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    /// Input data violates a structural invariant (overlapping pieces,
    /// inverted cell bounds, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The enclosure is too coarse to certify the requested inequality.
    /// Retrying at a finer resolution may succeed.
    #[error("unresolved {context}: achieved {achieved:.6e}, required {required:.6e}")]
    Unresolved {
        context: String,
        achieved: f64,
        required: f64,
    },

    /// A theorem-backed inequality failed to certify. This indicates a bug,
    /// not a resolution problem.
    #[error("certification failed: {0}")]
    Uncertified(String),
}

impl LabError {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        LabError::Domain {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn unresolved(context: impl Into<String>, achieved: f64, required: f64) -> Self {
        LabError::Unresolved {
            context: context.into(),
            achieved,
            required,
        }
    }
}
