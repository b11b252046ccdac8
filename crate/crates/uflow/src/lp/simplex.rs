//! Bounded-variable primal simplex with an explicit basis inverse.
//!
//! Phase 1 starts from the slack basis and introduces artificial columns
//! only on rows whose slack would start negative. Pricing is Dantzig's
//! rule; after a long run of degenerate steps the solver switches to
//! Bland's rule until the objective moves again, which prevents cycling.
//! Ties in the ratio test prefer the largest pivot magnitude. If a pivot
//! below `PIVOT_MIN` is ever forced, the solve restarts once with a tiny
//! deterministic right-hand-side perturbation and the final basis is
//! re-evaluated against the original data.
//!
//! Everything is deterministic: identical problems yield identical
//! solutions, iteration counts included.

use super::{LpProblem, LpSolution, LpStatus};
use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-9;
const ROW_TOL: f64 = 1e-6;
const COST_TOL: f64 = 1e-9;
const PIVOT_MIN: f64 = 1e-11;
const PIVOT_SKIP: f64 = 1e-13;
const STALL_LIMIT: usize = 600;
const REFRESH_EVERY: usize = 512;
const MAX_ITERATIONS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    /// Sparse columns of the full matrix (structural + slack + artificial).
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    value: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Row-major dense basis inverse.
    binv: Vec<f64>,
    num_structural: usize,
    first_artificial: usize,
    iterations: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Moved,
    PivotBreakdown,
}

impl Tableau {
    fn new(problem: &LpProblem, rhs: Vec<f64>) -> Self {
        let n = problem.num_vars();
        let m = problem.num_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in problem.rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                cols[j].push((i, v));
            }
        }
        let mut lower = problem.lower.clone();
        let mut upper = problem.upper.clone();
        let mut cost = problem.objective.clone();
        let mut value: Vec<f64> = problem.lower.clone();
        let mut state = vec![VarState::AtLower; n];
        for j in 0..n {
            // Start fixed and lower-bounded variables at their lower bound;
            // a variable with only a finite upper bound starts there.
            if !lower[j].is_finite() {
                state[j] = VarState::AtUpper;
                value[j] = upper[j];
            }
        }
        // Slack columns.
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            cost.push(0.0);
            value.push(0.0);
            state.push(VarState::Basic(i));
            basis.push(n + i);
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Tableau {
            m,
            cols,
            lower,
            upper,
            cost,
            rhs,
            value,
            state,
            basis,
            binv,
            num_structural: n,
            first_artificial: n + m,
            iterations: 0,
        }
    }

    /// Residual `b - A x_N` over the nonbasic columns.
    fn nonbasic_residual(&self) -> Vec<f64> {
        let mut r = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.value[j];
            if v != 0.0 {
                for &(i, a) in col {
                    r[i] -= a * v;
                }
            }
        }
        r
    }

    /// Recomputes the basic values as `binv * (b - A x_N)`.
    fn refresh_basic_values(&mut self) {
        let r = self.nonbasic_residual();
        let m = self.m;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for (x, &w) in r.iter().zip(row) {
                acc += w * x;
            }
            self.value[self.basis[i]] = acc;
        }
    }

    /// Rebuilds the dense inverse from the basis columns (Gauss-Jordan).
    /// Only called when the incrementally maintained inverse has drifted.
    fn refactorize(&mut self) -> Result<()> {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                mat[i * m + pos] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut best = col;
            for r in col + 1..m {
                if mat[r * m + col].abs() > mat[best * m + col].abs() {
                    best = r;
                }
            }
            let piv = mat[best * m + col];
            if piv.abs() < PIVOT_MIN {
                return Err(Error::LpShape("singular basis during refactorization".into()));
            }
            if best != col {
                for c in 0..m {
                    mat.swap(col * m + c, best * m + c);
                    inv.swap(col * m + c, best * m + c);
                }
            }
            let inv_piv = 1.0 / piv;
            for c in 0..m {
                mat[col * m + c] *= inv_piv;
                inv[col * m + c] *= inv_piv;
            }
            for r in 0..m {
                if r != col {
                    let f = mat[r * m + col];
                    if f != 0.0 {
                        for c in 0..m {
                            mat[r * m + c] -= f * mat[col * m + c];
                            inv[r * m + c] -= f * inv[col * m + c];
                        }
                    }
                }
            }
        }
        // Gauss-Jordan produced the inverse of the column-permuted basis in
        // equation order already, since we eliminated in equation order.
        self.binv = inv;
        Ok(())
    }

    /// Dual values for the current basis: `y = c_B' * binv`, exploiting
    /// that most basic columns carry zero cost.
    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yv, &w) in y.iter_mut().zip(row) {
                    *yv += cb * w;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        for &(i, v) in &self.cols[j] {
            d -= y[i] * v;
        }
        d
    }

    /// Chooses the entering column, Dantzig or Bland style.
    fn choose_entering(&self, y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols.len() {
            match self.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower => {
                    if self.upper[j] - self.lower[j] <= 0.0 {
                        continue; // fixed variable
                    }
                    let d = self.reduced_cost(j, y);
                    if d < -COST_TOL {
                        if bland {
                            return Some((j, d));
                        }
                        if best.map_or(true, |(_, bd)| d.abs() > bd.abs()) {
                            best = Some((j, d));
                        }
                    }
                }
                VarState::AtUpper => {
                    if self.upper[j] - self.lower[j] <= 0.0 {
                        continue;
                    }
                    let d = self.reduced_cost(j, y);
                    if d > COST_TOL {
                        if bland {
                            return Some((j, d));
                        }
                        if best.map_or(true, |(_, bd)| d.abs() > bd.abs()) {
                            best = Some((j, d));
                        }
                    }
                }
            }
        }
        best
    }

    /// `binv * a_q` for a sparse column.
    fn ftran(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let col = &self.cols[q];
        let mut alpha = vec![0.0; m];
        for (r, slot) in alpha.iter_mut().enumerate() {
            let row = &self.binv[r * m..(r + 1) * m];
            let mut acc = 0.0;
            for &(i, v) in col {
                acc += v * row[i];
            }
            *slot = acc;
        }
        alpha
    }

    /// One simplex step with the current costs.
    fn step(&mut self, bland: bool) -> StepOutcome {
        let y = self.duals();
        let Some((q, dq)) = self.choose_entering(&y, bland) else {
            return StepOutcome::Optimal;
        };
        let sigma = if matches!(self.state[q], VarState::AtLower) { 1.0 } else { -1.0 };
        let alpha = self.ftran(q);

        // Ratio test: how far can the entering variable move?
        let own_range = self.upper[q] - self.lower[q];
        let mut t_block = f64::INFINITY;
        let mut leaving: Option<usize> = None; // row position
        let mut leaving_to_upper = false;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_SKIP {
                continue;
            }
            let delta = -sigma * a; // movement of basic value per unit of t
            let b = self.basis[i];
            let v = self.value[b];
            let (t_i, to_upper) = if delta < 0.0 {
                (((v - self.lower[b]) / -delta).max(0.0), false)
            } else if self.upper[b].is_finite() {
                (((self.upper[b] - v) / delta).max(0.0), true)
            } else {
                continue;
            };
            let better = match leaving {
                None => t_i < t_block,
                Some(r) => {
                    if t_i < t_block - 1e-12 {
                        true
                    } else if t_i <= t_block + 1e-12 {
                        if bland {
                            // Bland: leaving variable of lowest column index.
                            self.basis[i] < self.basis[r]
                        } else {
                            alpha[i].abs() > alpha[r].abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                t_block = t_i.min(t_block);
                leaving = Some(i);
                leaving_to_upper = to_upper;
            }
        }

        let t = own_range.min(t_block);
        if t.is_infinite() {
            return StepOutcome::Unbounded;
        }

        if own_range <= t_block {
            // Bound flip: the entering variable crosses to its other bound.
            let t = own_range;
            if t > 0.0 {
                for (i, &a) in alpha.iter().enumerate() {
                    if a.abs() > PIVOT_SKIP {
                        let b = self.basis[i];
                        self.value[b] -= sigma * a * t;
                    }
                }
            }
            if sigma > 0.0 {
                self.state[q] = VarState::AtUpper;
                self.value[q] = self.upper[q];
            } else {
                self.state[q] = VarState::AtLower;
                self.value[q] = self.lower[q];
            }
            let _ = dq;
            return StepOutcome::Moved;
        }

        let r = leaving.expect("blocking row exists when t_block is finite");
        if alpha[r].abs() < PIVOT_MIN {
            return StepOutcome::PivotBreakdown;
        }

        // Move values.
        for (i, &a) in alpha.iter().enumerate() {
            if i != r && a.abs() > PIVOT_SKIP {
                let b = self.basis[i];
                self.value[b] -= sigma * a * t;
            }
        }
        let new_value = if sigma > 0.0 { self.lower[q] + t } else { self.upper[q] - t };
        let old = self.basis[r];
        self.value[old] = if leaving_to_upper { self.upper[old] } else { self.lower[old] };
        self.state[old] = if leaving_to_upper { VarState::AtUpper } else { VarState::AtLower };
        self.value[q] = new_value;
        self.state[q] = VarState::Basic(r);
        self.basis[r] = q;

        // Rank-one update of the inverse.
        let m = self.m;
        let inv_piv = 1.0 / alpha[r];
        {
            let row = &mut self.binv[r * m..(r + 1) * m];
            for w in row.iter_mut() {
                *w *= inv_piv;
            }
        }
        let pivot_row = self.binv[r * m..(r + 1) * m].to_vec();
        for (i, &a) in alpha.iter().enumerate() {
            if i == r || a.abs() <= PIVOT_SKIP {
                continue;
            }
            let row = &mut self.binv[i * m..(i + 1) * m];
            for (w, &p) in row.iter_mut().zip(&pivot_row) {
                *w -= a * p;
            }
        }
        StepOutcome::Moved
    }

    fn objective_of(&self, cost: &[f64]) -> f64 {
        let mut obj = 0.0;
        for (j, &c) in cost.iter().enumerate() {
            if c != 0.0 {
                obj += c * self.value[j];
            }
        }
        obj
    }

    /// Runs simplex steps with the current cost vector until optimality.
    fn optimize(&mut self) -> Result<()> {
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_objective = f64::INFINITY;
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(Error::LpShape("iteration limit exceeded".into()));
            }
            self.iterations += 1;
            if self.iterations % REFRESH_EVERY == 0 {
                self.refresh_basic_values();
            }
            match self.step(bland) {
                StepOutcome::Optimal => return Ok(()),
                StepOutcome::Unbounded => return Err(Error::LpUnbounded),
                StepOutcome::PivotBreakdown => {
                    return Err(Error::LpShape("pivot breakdown".into()));
                }
                StepOutcome::Moved => {
                    let obj = self.objective_of(&self.cost.clone());
                    if obj < last_objective - 1e-12 {
                        stall = 0;
                        bland = false;
                        last_objective = obj;
                    } else {
                        stall += 1;
                        if stall > STALL_LIMIT {
                            bland = true;
                        }
                    }
                }
            }
        }
    }

    /// Installs artificial columns on rows whose slack starts negative and
    /// returns the phase-1 cost vector, or `None` when the slack basis is
    /// already feasible.
    fn install_artificials(&mut self) -> Option<Vec<f64>> {
        self.refresh_basic_values();
        let mut any = false;
        let m = self.m;
        for i in 0..m {
            let b = self.basis[i];
            if self.value[b] < self.lower[b] - FEAS_TOL {
                any = true;
            }
        }
        if !any {
            return None;
        }
        let mut phase1_cost = vec![0.0; self.cols.len()];
        for i in 0..m {
            let b = self.basis[i];
            let v = self.value[b];
            if v < self.lower[b] - FEAS_TOL {
                // Slack would start below zero: replace it with an
                // artificial of coefficient -1 so the basis stays diagonal.
                let art = self.cols.len();
                self.cols.push(vec![(i, -1.0)]);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.cost.push(0.0);
                self.value.push(self.lower[b] - v);
                self.state.push(VarState::Basic(i));
                phase1_cost.push(1.0);
                self.state[b] = VarState::AtLower;
                self.value[b] = self.lower[b];
                self.basis[i] = art;
                self.binv[i * m + i] = -1.0;
            }
        }
        Some(phase1_cost)
    }

    /// Drives leftover basic artificials out of the basis (or pins the row)
    /// after phase 1.
    fn retire_artificials(&mut self) {
        let m = self.m;
        for i in 0..m {
            let b = self.basis[i];
            if b < self.first_artificial {
                continue;
            }
            // Try to swap in any non-artificial column with a usable pivot.
            let row: Vec<f64> = self.binv[i * m..(i + 1) * m].to_vec();
            let mut entering = None;
            for j in 0..self.first_artificial {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                let mut t = 0.0;
                for &(r, v) in &self.cols[j] {
                    t += row[r] * v;
                }
                if t.abs() > 1e-7 {
                    entering = Some((j, t));
                    break;
                }
            }
            match entering {
                Some((j, t)) => {
                    // Degenerate swap: the artificial sits at zero.
                    self.state[b] = VarState::AtLower;
                    self.value[b] = 0.0;
                    self.state[j] = VarState::Basic(i);
                    self.basis[i] = j;
                    let inv_piv = 1.0 / t;
                    let alpha = self.ftran(j);
                    {
                        let prow = &mut self.binv[i * m..(i + 1) * m];
                        for w in prow.iter_mut() {
                            *w *= inv_piv;
                        }
                    }
                    let prow = self.binv[i * m..(i + 1) * m].to_vec();
                    for (r, &a) in alpha.iter().enumerate() {
                        if r != i && a.abs() > PIVOT_SKIP {
                            let dst = &mut self.binv[r * m..(r + 1) * m];
                            for (w, &p) in dst.iter_mut().zip(&prow) {
                                *w -= a * p;
                            }
                        }
                    }
                    self.refresh_basic_values();
                }
                None => {
                    // Redundant row: pin the artificial at zero forever.
                    self.lower[b] = 0.0;
                    self.upper[b] = 0.0;
                }
            }
        }
        // All remaining artificial columns may never re-enter.
        for j in self.first_artificial..self.cols.len() {
            if !matches!(self.state[j], VarState::Basic(_)) {
                self.lower[j] = 0.0;
                self.upper[j] = 0.0;
                self.value[j] = 0.0;
            }
        }
    }

    /// Largest row violation `a'x - rhs` over all rows.
    fn max_row_violation(&self, problem: &LpProblem) -> f64 {
        let mut activity = vec![0.0; self.m];
        for (j, col) in self.cols.iter().enumerate().take(self.num_structural) {
            let v = self.value[j];
            if v != 0.0 {
                for &(i, a) in col {
                    activity[i] += a * v;
                }
            }
        }
        let mut worst = 0.0f64;
        for (i, row) in problem.rows.iter().enumerate() {
            worst = worst.max(activity[i] - row.rhs);
        }
        worst
    }
}

fn solve_with_rhs(problem: &LpProblem, rhs: Vec<f64>) -> Result<(Tableau, LpStatus)> {
    let mut t = Tableau::new(problem, rhs);
    if let Some(phase1_cost) = t.install_artificials() {
        let real_cost = std::mem::replace(&mut t.cost, phase1_cost);
        t.optimize()?;
        let infeasibility = t.objective_of(&t.cost.clone());
        if infeasibility > 1e-7 {
            return Ok((t, LpStatus::Infeasible));
        }
        t.retire_artificials();
        t.cost = real_cost;
        t.cost.resize(t.cols.len(), 0.0);
    }
    match t.optimize() {
        Ok(()) => Ok((t, LpStatus::Optimal)),
        Err(Error::LpUnbounded) => Ok((t, LpStatus::Unbounded)),
        Err(e) => Err(e),
    }
}

/// Solves a bounded LP. See the module docs for the algorithm outline.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    if problem.num_vars() == 0 {
        let feasible = problem.rows.iter().all(|r| r.rhs >= -FEAS_TOL);
        return Ok(LpSolution {
            status: if feasible { LpStatus::Optimal } else { LpStatus::Infeasible },
            values: Vec::new(),
            objective_value: 0.0,
            iterations: 0,
        });
    }

    let rhs: Vec<f64> = problem.rows.iter().map(|r| r.rhs).collect();
    let attempt = solve_with_rhs(problem, rhs.clone());
    let (mut tableau, status) = match attempt {
        Ok(pair) => pair,
        Err(Error::LpShape(msg)) if msg == "pivot breakdown" => {
            // Degeneracy fallback: restart once with a deterministic
            // right-hand-side perturbation, then re-evaluate the final
            // basis against the unperturbed data.
            let perturbed: Vec<f64> = rhs
                .iter()
                .enumerate()
                .map(|(i, &b)| b + 1e-9 * (i + 1) as f64 * b.abs().max(1.0))
                .collect();
            let (mut t, status) = solve_with_rhs(problem, perturbed)?;
            t.rhs = rhs;
            t.refresh_basic_values();
            (t, status)
        }
        Err(e) => return Err(e),
    };

    if status != LpStatus::Optimal {
        return Ok(LpSolution {
            status,
            values: Vec::new(),
            objective_value: 0.0,
            iterations: tableau.iterations,
        });
    }

    tableau.refresh_basic_values();
    if tableau.max_row_violation(problem) > ROW_TOL / 10.0 {
        // The incremental inverse drifted; rebuild it and recompute.
        tableau.refactorize()?;
        tableau.refresh_basic_values();
    }

    // Clamp round-off on the basic values and read the solution out.
    let mut values = Vec::with_capacity(problem.num_vars());
    for j in 0..problem.num_vars() {
        let v = tableau.value[j].clamp(tableau.lower[j], tableau.upper[j]);
        values.push(v);
    }
    let objective_value = values
        .iter()
        .zip(&problem.objective)
        .map(|(v, c)| v * c)
        .sum();
    if tableau.max_row_violation(problem) > ROW_TOL {
        return Err(Error::LpShape(format!(
            "solution violates a row by {:.3e}",
            tableau.max_row_violation(problem)
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
        iterations: tableau.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpRow;

    fn lp(objective: Vec<f64>, rows: Vec<(Vec<(usize, f64)>, f64)>, bounds: Vec<(f64, f64)>) -> LpProblem {
        LpProblem {
            objective,
            rows: rows
                .into_iter()
                .map(|(coeffs, rhs)| LpRow { coeffs, rhs })
                .collect(),
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
        }
    }

    #[test]
    fn single_variable_pushes_to_row_bound() {
        let p = lp(vec![-1.0], vec![(vec![(0, 1.0)], 5.0)], vec![(0.0, 10.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 5.0).abs() < 1e-9);
        assert!((s.objective_value + 5.0).abs() < 1e-9);
    }

    #[test]
    fn greater_equal_row_via_negation() {
        // min x1 + x2 s.t. x1 + x2 >= 3, x >= 0.
        let p = lp(
            vec![1.0, 1.0],
            vec![(vec![(0, -1.0), (1, -1.0)], -3.0)],
            vec![(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x <= -1 with x >= 0.
        let p = lp(vec![1.0], vec![(vec![(0, 1.0)], -1.0)], vec![(0.0, 5.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let p = lp(vec![-1.0], vec![], vec![(0.0, f64::INFINITY)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn respects_upper_bounds_via_flip() {
        // min -x1 - x2, x1 + x2 <= 1.5, boxes [0, 1].
        let p = lp(
            vec![-1.0, -1.0],
            vec![(vec![(0, 1.0), (1, 1.0)], 1.5)],
            vec![(0.0, 1.0), (0.0, 1.0)],
        );
        let s = solve(&p).unwrap();
        assert!((s.objective_value + 1.5).abs() < 1e-9);
    }

    #[test]
    fn handles_fixed_variables() {
        let p = lp(
            vec![1.0, 0.0],
            vec![(vec![(0, -1.0), (1, -1.0)], -4.0)],
            vec![(0.0, f64::INFINITY), (2.5, 2.5)],
        );
        let s = solve(&p).unwrap();
        assert!((s.values[1] - 2.5).abs() < 1e-12);
        assert!((s.objective_value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn deterministic_resolve() {
        let p = lp(
            vec![-2.0, -3.0, 1.0],
            vec![
                (vec![(0, 1.0), (1, 2.0), (2, -1.0)], 4.0),
                (vec![(0, 3.0), (1, 1.0)], 6.0),
            ],
            vec![(0.0, 5.0), (0.0, 5.0), (0.0, 5.0)],
        );
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective_value, b.objective_value);
    }
}
