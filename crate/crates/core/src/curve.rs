use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One non-negative value per depth `d = 1..=D`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthCurve<S> {
    values: Vec<S>,
}

impl<S: Scalar> DepthCurve<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyCurve);
        }
        for (idx, value) in values.iter().enumerate() {
            if !value.is_finite() || *value < S::zero() {
                return Err(Error::InvalidCurveValue { depth: idx + 1, value: value.to_string() });
            }
        }
        Ok(Self { values })
    }

    pub(crate) fn new_unchecked(values: Vec<S>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Value at 1-based depth `d`.
    pub fn at(&self, depth: usize) -> Option<S> {
        depth.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// Largest depth `D`.
    pub fn max_depth(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, S)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }
}

pub(crate) fn check_lengths<S: Scalar>(curves: &[DepthCurve<S>]) -> Result<usize> {
    let first = curves.first().ok_or(Error::NoCurves)?.max_depth();
    for curve in curves {
        if curve.max_depth() != first {
            return Err(Error::LengthMismatch { expected: first, found: curve.max_depth() });
        }
    }
    Ok(first)
}
