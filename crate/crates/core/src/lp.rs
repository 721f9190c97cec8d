//! Dense bounded-variable primal simplex with Bland's anti-cycling rule.
//!
//! Problems are `min cᵀx` subject to linear rows (`≤`, `≥`, `=`) and simple
//! bounds `l ≤ x ≤ u` (either side may be infinite). The solver runs a
//! two-phase method on a full tableau with one artificial per row; the
//! artificial columns double as `B⁻¹`, which is how row duals are read off.
//! Instances here are small (tens of rows, hundreds of columns), so the
//! dense tableau is the simple and deterministic choice.

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// Every improving column was blocked only by pivots below tolerance.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `y` with `c − Aᵀy` the reduced costs.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// Phase-one infeasibility (sum of artificials) at termination.
    pub infeasibility: f64,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    rel: Relation,
    rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
    max_iter: usize,
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = l + x'
    Shifted { col: usize, lower: f64 },
    /// x = u − x'
    Mirrored { col: usize, upper: f64 },
    /// x = x⁺ − x⁻
    Split { pos: usize, neg: usize },
}

impl LinearProgram {
    pub fn new() -> Self {
        Self { max_iter: 200_000, ..Default::default() }
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        assert!(lower <= upper, "empty bound interval");
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.cost.len()));
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_max_iter(&mut self, it: usize) {
        self.max_iter = it;
    }

    /// Fails with [`Error::Lp`] when an optimal point found by the tableau
    /// violates the original rows (accumulated round-off).
    pub fn solve(&self) -> Result<LpSolution> {
        let sol = Tableau::build(self)?.run(self)?;
        if sol.status == LpStatus::Optimal {
            let violation = self.violation(&sol.x);
            let scale = 1.0 + self.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if violation > 1e-7 * scale {
                return Err(Error::Lp(format!("numerical breakdown: rows violated by {violation:.3e}")));
            }
        }
        Ok(sol)
    }

    /// Largest violation of a row or bound at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let gap = match r.rel {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

struct Tableau {
    m: usize,
    ncols: usize,
    t: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    cost: Vec<f64>,
    art_start: usize,
    row_sign: Vec<f64>,
    vars: Vec<VarMap>,
    iterations: usize,
    /// Initial tableau and right-hand side, kept for reinversion.
    a0: Vec<f64>,
    b0: Vec<f64>,
}

/// Iterations between reinversions of the basis.
const REINVERT_EVERY: usize = 50;
/// Consecutive degenerate pivots before the ratio test switches to Bland's rule.
const STALL_LIMIT: usize = 20;

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let m = lp.rows.len();
        let mut vars = Vec::with_capacity(lp.cost.len());
        let mut col_cost = Vec::new();
        let mut col_upper = Vec::new();
        // (column, multiplier) pairs per original variable
        let mut col_of: Vec<Vec<(usize, f64)>> = Vec::with_capacity(lp.cost.len());
        for j in 0..lp.cost.len() {
            let (l, u, c) = (lp.lower[j], lp.upper[j], lp.cost[j]);
            if !l.is_nan() && l.is_finite() {
                let col = col_cost.len();
                col_cost.push(c);
                col_upper.push(u - l);
                vars.push(VarMap::Shifted { col, lower: l });
                col_of.push(vec![(col, 1.0)]);
            } else if u.is_finite() {
                let col = col_cost.len();
                col_cost.push(-c);
                col_upper.push(f64::INFINITY);
                vars.push(VarMap::Mirrored { col, upper: u });
                col_of.push(vec![(col, -1.0)]);
            } else {
                let pos = col_cost.len();
                col_cost.extend([c, -c]);
                col_upper.extend([f64::INFINITY, f64::INFINITY]);
                vars.push(VarMap::Split { pos, neg: pos + 1 });
                col_of.push(vec![(pos, 1.0), (pos + 1, -1.0)]);
            }
        }
        let n_struct = col_cost.len();
        let n_slack = lp.rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let art_start = n_struct + n_slack;
        let ncols = art_start + m;
        let mut t = vec![0.0; m * ncols];
        let mut rhs = vec![0.0; m];
        let mut slack = n_struct;
        for (i, row) in lp.rows.iter().enumerate() {
            let mut b = row.rhs;
            for &(j, a) in &row.coeffs {
                if a == 0.0 {
                    continue;
                }
                if !a.is_finite() {
                    return Err(Error::Lp(format!("non-finite coefficient in row {i}")));
                }
                match vars[j] {
                    VarMap::Shifted { lower, .. } => b -= a * lower,
                    VarMap::Mirrored { upper, .. } => b -= a * upper,
                    VarMap::Split { .. } => {}
                }
                for &(col, s) in &col_of[j] {
                    t[i * ncols + col] += s * a;
                }
            }
            match row.rel {
                Relation::Le => {
                    t[i * ncols + slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    t[i * ncols + slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            rhs[i] = b;
        }
        col_cost.extend(std::iter::repeat_n(0.0, n_slack + m));
        col_upper.extend(std::iter::repeat_n(f64::INFINITY, n_slack + m));
        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            if rhs[i] < 0.0 {
                row_sign[i] = -1.0;
                rhs[i] = -rhs[i];
                for v in &mut t[i * ncols..(i + 1) * ncols] {
                    *v = -*v;
                }
            }
            t[i * ncols + art_start + i] = 1.0;
        }
        let basis: Vec<usize> = (art_start..ncols).collect();
        let mut is_basic = vec![false; ncols];
        basis.iter().for_each(|&b| is_basic[b] = true);
        Ok(Self {
            m,
            ncols,
            a0: t.clone(),
            b0: rhs.clone(),
            t,
            xb: rhs,
            basis,
            upper: col_upper,
            at_upper: vec![false; ncols],
            is_basic,
            cost: col_cost,
            art_start,
            row_sign,
            vars,
            iterations: 0,
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.ncols + j]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
            for (dj, &tij) in d.iter_mut().zip(row) {
                *dj -= cb * tij;
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let nc = self.ncols;
        let piv = self.at(r, q);
        for v in &mut self.t[r * nc..(r + 1) * nc] {
            *v /= piv;
        }
        let pivot_row: Vec<f64> = self.t[r * nc..(r + 1) * nc].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * nc..(i + 1) * nc];
            for (v, &p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            row[q] = 0.0;
        }
        let f = d[q];
        if f != 0.0 {
            for (dj, &p) in d.iter_mut().zip(&pivot_row) {
                *dj -= f * p;
            }
            d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    /// Rebuilds `B⁻¹A` and the basic values from the original data, discarding
    /// accumulated round-off. Leaves the tableau alone if `B` is singular.
    fn reinvert(&mut self) {
        let (m, nc) = (self.m, self.ncols);
        let b = nalgebra::DMatrix::from_fn(m, m, |i, k| self.a0[i * nc + self.basis[k]]);
        let lu = b.lu();
        let a0 = nalgebra::DMatrix::from_row_slice(m, nc, &self.a0);
        let Some(t) = lu.solve(&a0) else {
            return;
        };
        let mut rhs = nalgebra::DVector::from_column_slice(&self.b0);
        for j in 0..nc {
            if self.at_upper[j] && !self.is_basic[j] {
                for i in 0..m {
                    rhs[i] -= self.a0[i * nc + j] * self.upper[j];
                }
            }
        }
        let Some(xb) = lu.solve(&rhs) else {
            return;
        };
        for i in 0..m {
            for j in 0..nc {
                self.t[i * nc + j] = t[(i, j)];
            }
            self.xb[i] = xb[i];
        }
    }

    /// Runs simplex iterations on the given cost vector until optimality.
    fn optimize(&mut self, cost: &[f64], max_iter: usize) -> LpStatus {
        let mut d = self.reduced_costs(cost);
        let mut since_reinvert = 0;
        let mut stalled = 0usize;
        // columns whose only blocking pivots were below tolerance this round
        let mut rejected = vec![false; self.ncols];
        let mut rejected_retry = false;
        loop {
            if self.iterations >= max_iter {
                return LpStatus::IterationLimit;
            }
            if since_reinvert >= REINVERT_EVERY {
                self.reinvert();
                d = self.reduced_costs(cost);
                since_reinvert = 0;
            }
            // Bland: lowest-index eligible column
            let mut entering = None;
            for j in 0..self.ncols {
                if self.is_basic[j] || self.upper[j] <= 0.0 || rejected[j] {
                    continue;
                }
                if (!self.at_upper[j] && d[j] < -COST_TOL) || (self.at_upper[j] && d[j] > COST_TOL) {
                    entering = Some(j);
                    break;
                }
            }
            let Some(q) = entering else {
                if rejected.iter().any(|&r| r) {
                    // retry the rejected columns on a fresh factorization once
                    if rejected_retry {
                        return LpStatus::Stalled;
                    }
                    rejected_retry = true;
                    rejected.iter_mut().for_each(|r| *r = false);
                    since_reinvert = REINVERT_EVERY;
                    continue;
                }
                if since_reinvert > 0 {
                    // confirm optimality on a fresh factorization
                    since_reinvert = REINVERT_EVERY;
                    continue;
                }
                return LpStatus::Optimal;
            };
            self.iterations += 1;
            since_reinvert += 1;
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };
            // Harris ratio test: the bound is relaxed by FEAS_TOL, then the
            // largest pivot within it leaves (lowest basic index on ties)
            let colmax = (0..self.m).map(|i| self.at(i, q).abs()).fold(0.0, f64::max);
            let bland = stalled >= STALL_LIMIT;
            let (best, tiny_block) = self.ratio_test(q, dir, PIVOT_TOL.max(1e-9 * colmax), bland);
            let (theta, leave) = match best {
                Some((r, to_upper, l)) if l < self.upper[q] => (l, Some((r, to_upper))),
                _ => (self.upper[q], None),
            };
            if theta.is_infinite() {
                if tiny_block {
                    rejected[q] = true;
                    continue;
                }
                return LpStatus::Unbounded;
            }
            if theta <= 1e-12 {
                stalled += 1;
            } else if stalled < STALL_LIMIT {
                stalled = 0;
            }
            for i in 0..self.m {
                let tiq = self.at(i, q);
                if tiq != 0.0 {
                    self.xb[i] -= dir * theta * tiq;
                }
            }
            rejected.iter_mut().for_each(|r| *r = false);
            rejected_retry = false;
            match leave {
                None => {
                    // bound flip
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((r, to_upper)) => {
                    let entering_value = if dir > 0.0 { theta } else { self.upper[q] - theta };
                    let leaving = self.basis[r];
                    self.at_upper[leaving] = to_upper;
                    self.at_upper[q] = false;
                    self.pivot(r, q, &mut d);
                    self.xb[r] = entering_value;
                }
            }
            for (i, v) in self.xb.iter_mut().enumerate() {
                if *v < 0.0 && *v > -FEAS_TOL {
                    *v = 0.0;
                }
                let ub = self.upper[self.basis[i]];
                if *v > ub && *v < ub + FEAS_TOL {
                    *v = ub;
                }
            }
        }
    }

    /// Leaving row for entering column `q`, as `(row, to_upper, step)`, and
    /// whether some pivot at or below `piv_tol` would have blocked.
    fn ratio_test(&self, q: usize, dir: f64, piv_tol: f64, bland: bool) -> (Option<(usize, bool, f64)>, bool) {
        let mut candidates: Vec<(usize, bool, f64, f64)> = Vec::new();
        let mut relaxed = f64::INFINITY;
        let mut tiny_block = false;
        for i in 0..self.m {
            let rate = dir * self.at(i, q);
            let b = self.basis[i];
            if rate.abs() <= piv_tol {
                tiny_block |= rate > 0.0 || (rate < 0.0 && self.upper[b].is_finite());
                continue;
            }
            let (gap, to_upper) = if rate > 0.0 {
                (self.xb[i].max(0.0), false)
            } else if self.upper[b].is_finite() {
                ((self.upper[b] - self.xb[i]).max(0.0), true)
            } else {
                continue;
            };
            let a = rate.abs();
            relaxed = relaxed.min((gap + FEAS_TOL) / a);
            candidates.push((i, to_upper, gap / a, a));
        }
        let exact_min = candidates.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        let mut best: Option<(usize, bool, f64, f64)> = None;
        for &(i, to_upper, limit, a) in &candidates {
            if limit > relaxed || (bland && limit > exact_min) {
                continue;
            }
            let take = best.is_none_or(|(r, _, _, ba)| {
                if bland {
                    self.basis[i] < self.basis[r]
                } else {
                    a > ba * (1.0 + 1e-9) || (a >= ba * (1.0 - 1e-9) && self.basis[i] < self.basis[r])
                }
            });
            if take {
                best = Some((i, to_upper, limit, a));
            }
        }
        (best.map(|(r, to_upper, l, _)| (r, to_upper, l)), tiny_block)
    }

    fn column_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.ncols)
            .map(|j| if self.at_upper[j] { self.upper[j] } else { 0.0 })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.xb[i];
        }
        x
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let mut phase1 = vec![0.0; self.ncols];
        phase1[self.art_start..].iter_mut().for_each(|c| *c = 1.0);
        let status = self.optimize(&phase1, lp.max_iter);
        let cols = self.column_values();
        let infeasibility: f64 = cols[self.art_start..].iter().sum();
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if matches!(status, LpStatus::IterationLimit | LpStatus::Stalled) {
            return Ok(self.finish(lp, status, infeasibility));
        }
        if infeasibility > FEAS_TOL * scale {
            return Ok(self.finish(lp, LpStatus::Infeasible, infeasibility));
        }
        for j in self.art_start..self.ncols {
            self.upper[j] = 0.0;
            self.at_upper[j] = false;
        }
        let cost = self.cost.clone();
        let status = self.optimize(&cost, lp.max_iter);
        let cols = self.column_values();
        let infeasibility: f64 = cols[self.art_start..].iter().sum();
        Ok(self.finish(lp, status, infeasibility))
    }

    fn finish(&self, lp: &LinearProgram, status: LpStatus, infeasibility: f64) -> LpSolution {
        let cols = self.column_values();
        let x: Vec<f64> = self
            .vars
            .iter()
            .map(|v| match *v {
                VarMap::Shifted { col, lower } => lower + cols[col],
                VarMap::Mirrored { col, upper } => upper - cols[col],
                VarMap::Split { pos, neg } => cols[pos] - cols[neg],
            })
            .collect();
        let objective = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
        let duals = (0..self.m)
            .map(|i| {
                let col = self.art_start + i;
                let y: f64 = (0..self.m).map(|k| self.cost[self.basis[k]] * self.at(k, col)).sum();
                y * self.row_sign[i]
            })
            .collect();
        LpSolution { status, x, objective, duals, iterations: self.iterations, infeasibility }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_max_problem() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-3.0, 0.0, f64::INFINITY);
        let y = lp.add_var(-5.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0)], Relation::Le, 4.0);
        lp.add_row(vec![(y, 2.0)], Relation::Le, 12.0);
        lp.add_row(vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        // duals: (0, 1.5, 1) for the max problem, negated for min
        assert!((s.duals[1] + 1.5).abs() < 1e-9);
        assert!((s.duals[2] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(0.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min |x - 3| via x free, t ≥ x - 3, t ≥ 3 - x
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
        let t = lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(vec![(t, 1.0), (x, -1.0)], Relation::Ge, -3.0);
        lp.add_row(vec![(t, 1.0), (x, 1.0)], Relation::Ge, 3.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective.abs() < 1e-9);
        assert!((s.x[0] - 3.0).abs() < 1e-9);

        let mut lp = LinearProgram::new();
        let z = lp.add_var(-1.0, f64::NEG_INFINITY, 2.5);
        lp.add_row(vec![(z, 1.0)], Relation::Ge, -10.0);
        let s = lp.solve().unwrap();
        assert!((s.x[z] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn bound_flips_and_equalities() {
        // min -x - y - z, x + y + z = 2, all in [0, 1]
        let mut lp = LinearProgram::new();
        let v: Vec<usize> = (0..3).map(|_| lp.add_var(-1.0, 0.0, 1.0)).collect();
        lp.add_row(v.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 2.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 2.0).abs() < 1e-9);
        // and with upper bounds active without the row
        let mut lp = LinearProgram::new();
        let v: Vec<usize> = (0..3).map(|_| lp.add_var(-1.0, -1.0, 1.0)).collect();
        lp.add_row(vec![(v[0], 1.0)], Relation::Le, 5.0);
        let s = lp.solve().unwrap();
        assert!((s.objective + 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the textbook rule; Bland terminates
        let mut lp = LinearProgram::new();
        let x: Vec<usize> = [-0.75, 150.0, -0.02, 6.0]
            .iter()
            .map(|&c| lp.add_var(c, 0.0, f64::INFINITY))
            .collect();
        lp.add_row(vec![(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)], Relation::Le, 0.0);
        lp.add_row(vec![(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)], Relation::Le, 0.0);
        lp.add_row(vec![(x[2], 1.0)], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-9);
    }

    /// Brute-force oracle: min cᵀx over {Ax ≤ b, 0 ≤ x ≤ u} by enumerating
    /// every vertex (n active constraints solved exactly).
    fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64], u: &[f64]) -> Option<f64> {
        let n = c.len();
        let mut cons: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            cons.push((e.clone(), 0.0));
            e[j] = 1.0;
            cons.push((e, u[j]));
        }
        let mut best: Option<f64> = None;
        let idx: Vec<usize> = (0..cons.len()).collect();
        for subset in crate::exterior::combinatorics::combinations(idx.len(), n) {
            let m = nalgebra::DMatrix::from_fn(n, n, |r, k| cons[subset[r]].0[k]);
            let rhs = nalgebra::DVector::from_fn(n, |r, _| cons[subset[r]].1);
            let Some(x) = m.lu().solve(&rhs) else { continue };
            if cons.iter().all(|(row, bb)| row.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= bb + 1e-9) {
                let v: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(v, |bv: f64| bv.min(v)));
            }
        }
        best
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            n in 2usize..4,
            m in 1usize..4,
            seed in proptest::collection::vec(-3.0f64..3.0, 40),
        ) {
            let c: Vec<f64> = seed[..n].to_vec();
            let a: Vec<Vec<f64>> = (0..m).map(|i| seed[4 + 4 * i..4 + 4 * i + n].to_vec()).collect();
            let b: Vec<f64> = (0..m).map(|i| seed[20 + i]).collect();
            let u: Vec<f64> = (0..n).map(|j| seed[30 + j].abs() + 0.5).collect();
            let mut lp = LinearProgram::new();
            for j in 0..n {
                lp.add_var(c[j], 0.0, u[j]);
            }
            for i in 0..m {
                lp.add_row((0..n).map(|j| (j, a[i][j])).collect(), Relation::Le, b[i]);
            }
            let sol = lp.solve().unwrap();
            match vertex_oracle(&c, &a, &b, &u) {
                None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
                Some(v) => {
                    prop_assert_eq!(sol.status, LpStatus::Optimal);
                    prop_assert!((sol.objective - v).abs() < 1e-7, "{} vs {}", sol.objective, v);
                    // complementary check: c − Aᵀy has the right sign pattern at bounds
                    for j in 0..n {
                        let dj = c[j] - (0..m).map(|i| a[i][j] * sol.duals[i]).sum::<f64>();
                        if sol.x[j] > 1e-7 && sol.x[j] < u[j] - 1e-7 {
                            prop_assert!(dj.abs() < 1e-6);
                        }
                    }
                }
            }
        }
    }
}
