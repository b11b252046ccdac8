//! Self-contained linear programming layer.
//!
//! Problems are stated in one canonical form: minimize `c'x` subject to
//! sparse inequality rows `a'x <= rhs` and per-variable bounds
//! `lower <= x <= upper`. Every lower bound must be finite; upper bounds
//! may be `f64::INFINITY`. Equality of bounds fixes a variable.
//!
//! The bundled solver is a bounded-variable primal simplex
//! ([`simplex::solve`]); [`brute`] holds an independent vertex-enumeration
//! reference used to cross-check it on small problems.

pub mod brute;
pub mod simplex;

use std::io::Write;

use crate::error::{Error, Result};

/// One inequality row `sum coeffs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    /// Sparse coefficients as `(column, value)`, columns strictly increasing.
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// A bounded linear program in canonical form (minimization).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Checks the structural invariants: consistent dimensions, finite
    /// coefficients, ordered bounds, finite lower bounds.
    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::LpShape(format!(
                "{} objective coefficients, {} lower bounds, {} upper bounds",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (j, &c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::LpShape(format!("objective coefficient {j} is {c}")));
            }
        }
        for j in 0..n {
            if !self.lower[j].is_finite() {
                return Err(Error::LpShape(format!("variable {j} lower bound {} must be finite", self.lower[j])));
            }
            if self.upper[j].is_nan() || self.upper[j] < self.lower[j] {
                return Err(Error::LpShape(format!(
                    "variable {j} has bounds [{}, {}]",
                    self.lower[j], self.upper[j]
                )));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::LpShape(format!("row {i} right-hand side is {}", row.rhs)));
            }
            let mut last = None;
            for &(col, v) in &row.coeffs {
                if col >= n {
                    return Err(Error::LpShape(format!("row {i} references column {col} of {n}")));
                }
                if !v.is_finite() {
                    return Err(Error::LpShape(format!("row {i} column {col} coefficient is {v}")));
                }
                if let Some(prev) = last {
                    if col <= prev {
                        return Err(Error::LpShape(format!("row {i} columns are not strictly increasing")));
                    }
                }
                last = Some(col);
            }
        }
        Ok(())
    }

    /// Writes the problem in the plain-text tableau format used for external
    /// cross-checking:
    ///
    /// ```text
    /// lp minimize vars N rows M
    /// c <N objective coefficients>
    /// v <lower> <upper>            (N lines, `inf` for an infinite upper bound)
    /// r <rhs> <nnz> col:coef ...   (M lines)
    /// ```
    pub fn write_tableau(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "lp minimize vars {} rows {}", self.num_vars(), self.num_rows())?;
        let coeffs: Vec<String> = self.objective.iter().map(|c| c.to_string()).collect();
        writeln!(out, "c {}", coeffs.join(" "))?;
        for j in 0..self.num_vars() {
            let ub = if self.upper[j].is_infinite() {
                "inf".to_string()
            } else {
                self.upper[j].to_string()
            };
            writeln!(out, "v {} {}", self.lower[j], ub)?;
        }
        for row in &self.rows {
            let terms: Vec<String> = row.coeffs.iter().map(|(c, v)| format!("{c}:{v}")).collect();
            writeln!(out, "r {} {} {}", row.rhs, row.coeffs.len(), terms.join(" "))?;
        }
        Ok(())
    }
}

/// Solve statuses. `Optimal` solutions satisfy every row within `1e-6` and
/// every bound within `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `values` are the structural variables only.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

/// Solver abstraction; the extension point for plugging alternative
/// relaxation solvers.
pub trait LpBackend: Sync {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution>;
}

/// The bundled simplex solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimplexBackend;

impl LpBackend for SimplexBackend {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution> {
        simplex::solve(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_format_is_stable() {
        let p = LpProblem {
            objective: vec![1.0, -2.0],
            rows: vec![LpRow {
                coeffs: vec![(0, 1.0), (1, 1.0)],
                rhs: 4.0,
            }],
            lower: vec![0.0, 0.0],
            upper: vec![10.0, f64::INFINITY],
        };
        let mut buf = Vec::new();
        p.write_tableau(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "lp minimize vars 2 rows 1\nc 1 -2\nv 0 10\nv 0 inf\nr 4 2 0:1 1:1\n"
        );
    }

    #[test]
    fn validate_catches_shape_errors() {
        let mut p = LpProblem {
            objective: vec![1.0],
            rows: vec![],
            lower: vec![0.0],
            upper: vec![1.0],
        };
        assert!(p.validate().is_ok());
        p.rows.push(LpRow {
            coeffs: vec![(3, 1.0)],
            rhs: 0.0,
        });
        assert!(p.validate().is_err());
        p.rows.clear();
        p.lower[0] = f64::NEG_INFINITY;
        assert!(p.validate().is_err());
    }
}
