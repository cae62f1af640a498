use alloc::string::String;

use crate::mpc::ConstraintKind;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{field} must be finite (got {value})")]
    NonFinite { field: &'static str, value: f64 },

    #[error("{field} = {value} is out of range: expected {expected}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("infeasible decision in window {window}: {constraint} violated by {violation}")]
    InfeasibleDecision {
        window: usize,
        constraint: ConstraintKind,
        violation: f64,
    },

    #[error("{what} is unbounded")]
    Unbounded { what: &'static str },

    #[error("search space of {nodes:.3e} nodes exceeds the limit of {limit:.0e}")]
    SearchTooLarge { nodes: f64, limit: f64 },

    #[error("{what}: expected length {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid OCV curve: {0}")]
    Curve(String),

    #[error("{0}")]
    Mismatch(String),
}

/// Rejects NaN and infinities.
pub(crate) fn finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { field, value })
    }
}

pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64> {
    finite(field, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            field,
            value,
            expected: "> 0",
        })
    }
}

pub(crate) fn nonnegative(field: &'static str, value: f64) -> Result<f64> {
    finite(field, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            field,
            value,
            expected: ">= 0",
        })
    }
}

pub(crate) fn unit_interval(field: &'static str, value: f64) -> Result<f64> {
    finite(field, value)?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            field,
            value,
            expected: "in [0, 1]",
        })
    }
}
