//! Euclidean projection onto `{y : a_i · y <= b_i}` by dual coordinate
//! ascent (Hildreth's method).
//!
//! Rows are stored sparse and scaled to unit norm. The dual vector is kept
//! between calls so that nearby projections, as produced by a line search,
//! start close to their solution.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

#[derive(Debug, Clone)]
struct Row {
    idx: Vec<usize>,
    coef: Vec<f64>,
    rhs: f64,
}

impl Row {
    fn dot(&self, y: &[f64]) -> f64 {
        self.idx.iter().zip(&self.coef).map(|(&i, &a)| a * y[i]).sum()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Polytope {
    dim: usize,
    rows: Vec<Row>,
}

/// Warm-startable dual state for one projection stream.
#[derive(Debug, Clone)]
pub(crate) struct Dual {
    lambda: Vec<f64>,
}

impl Polytope {
    pub(crate) fn new(dim: usize) -> Self {
        Self { dim, rows: Vec::new() }
    }

    /// Adds `Σ coef·y[idx] <= rhs`. All-zero rows are dropped.
    pub(crate) fn push(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let norm = sqrt(terms.iter().map(|t| t.1 * t.1).sum());
        if norm == 0.0 {
            return;
        }
        self.rows.push(Row {
            idx: terms.iter().map(|t| t.0).collect(),
            coef: terms.iter().map(|t| t.1 / norm).collect(),
            rhs: rhs / norm,
        });
    }

    pub(crate) fn dual(&self) -> Dual {
        Dual {
            lambda: vec![0.0; self.rows.len()],
        }
    }

    /// Largest violation `a_i · y - b_i` (in unit-row distance).
    #[cfg(test)]
    pub(crate) fn max_violation(&self, y: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.dot(y) - r.rhs)
            .fold(0.0, f64::max)
    }

    /// Projects `p` into `out`. Returns the number of sweeps used.
    pub(crate) fn project(&self, p: &[f64], dual: &mut Dual, out: &mut [f64], tol: f64, max_sweeps: usize) -> usize {
        debug_assert_eq!(p.len(), self.dim);
        out.copy_from_slice(p);
        for (row, &l) in self.rows.iter().zip(&dual.lambda) {
            if l != 0.0 {
                for (&i, &a) in row.idx.iter().zip(&row.coef) {
                    out[i] -= l * a;
                }
            }
        }
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            let mut largest = 0.0f64;
            for (row, l) in self.rows.iter().zip(dual.lambda.iter_mut()) {
                let r = row.dot(out) - row.rhs;
                let step = r.max(-*l);
                if step != 0.0 {
                    *l += step;
                    for (&i, &a) in row.idx.iter().zip(&row.coef) {
                        out[i] -= step * a;
                    }
                    largest = largest.max(step.abs());
                }
            }
            if largest <= tol {
                break;
            }
        }
        sweeps
    }
}
