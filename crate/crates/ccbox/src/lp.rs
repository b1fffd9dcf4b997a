//! Exact linear programming over big rationals.
//!
//! A dense two-phase primal simplex with Bland's anti-cycling rule solves
//! `min cᵀx  s.t.  Ax = b, x ≥ 0` exactly. Two *independent* geometric
//! front-ends are built on it and cross-check each other in tests:
//!
//! - [`hull_membership`] poses convex-hull membership as an equality-form
//!   feasibility program over the mixture weights. Infeasibility is
//!   returned as a Farkas separation functional φ(z) = g·z + g₀ with
//!   φ(target) > 0 ≥ φ(pᵢ) for every hull point pᵢ; feasibility returns
//!   the weights. Both certificates are re-verified exactly before being
//!   returned, so a defect in the solver can surface only as an internal
//!   error, never as a wrong answer.
//! - [`hull_distance`] poses the L∞ distance from a point to the hull as
//!   an inequality-form program (mixture weights, a distance variable,
//!   and explicit slacks) and returns the exact minimum distance with
//!   optimal weights. Distance zero is equivalent to membership.
//!
//! Pivoting is deterministic: the entering column is the lowest-index
//! column with negative reduced cost; the leaving row minimizes the
//! ratio, ties broken by smallest basis variable. Identical inputs give
//! identical runs on every platform.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rat;

/// Outcome of an exact LP solve.
#[derive(Clone, Debug)]
pub enum LpOutcome {
    /// Optimal solution `x` with objective value `objective`.
    Optimal { x: Vec<Rat>, objective: Rat },
    /// No feasible point; `farkas` is a vector y with yᵀA ≤ 0 componentwise
    /// on the columns and yᵀb > 0.
    Infeasible { farkas: Vec<Rat> },
}

/// Dense simplex state: tableau rows, right-hand side, current basis.
struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    ncols: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        debug_assert!(!p.is_zero());
        for v in self.rows[r].iter_mut() {
            *v /= p.clone();
        }
        self.rhs[r] /= p;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..self.ncols {
                let delta = &f * &self.rows[r][j];
                self.rows[i][j] -= delta;
            }
            let delta = &f * &self.rhs[r];
            self.rhs[i] -= delta;
        }
        self.basis[r] = c;
    }

    /// Reduced cost of column `j` under cost vector `cost`.
    fn reduced_cost(&self, cost: &[Rat], j: usize) -> Rat {
        let mut rc = cost[j].clone();
        for (i, row) in self.rows.iter().enumerate() {
            if !row[j].is_zero() && !cost[self.basis[i]].is_zero() {
                rc -= &cost[self.basis[i]] * &row[j];
            }
        }
        rc
    }

    /// Minimize `cost·x` from the current basic feasible solution.
    ///
    /// Pricing uses Dantzig's rule (most negative reduced cost) while the
    /// objective strictly decreases; after `STALL_LIMIT` consecutive
    /// degenerate pivots it falls back to Bland's rule, which cannot cycle,
    /// until the objective moves again. Columns with `enterable[j] == false`
    /// never enter.
    fn optimize(&mut self, cost: &[Rat], enterable: &[bool]) -> Step {
        const STALL_LIMIT: u32 = 12;
        let mut stalled: u32 = 0;
        let mut last_obj = self.objective(cost);
        loop {
            let bland = stalled >= STALL_LIMIT;
            let mut entering: Option<(usize, Rat)> = None;
            for j in 0..self.ncols {
                if !enterable[j] || self.basis.contains(&j) {
                    continue;
                }
                let rc = self.reduced_cost(cost, j);
                if rc.is_negative() {
                    if bland {
                        entering = Some((j, rc));
                        break;
                    }
                    let better = match &entering {
                        None => true,
                        Some((_, best)) => rc < *best,
                    };
                    if better {
                        entering = Some((j, rc));
                    }
                }
            }
            let Some((c, _)) = entering else {
                return Step::Optimal;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][c];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Step::Unbounded;
            };
            self.pivot(r, c);
            let obj = self.objective(cost);
            if obj < last_obj {
                stalled = 0;
                last_obj = obj;
            } else {
                stalled += 1;
            }
        }
    }

    /// Objective value of the current basic solution.
    fn objective(&self, cost: &[Rat]) -> Rat {
        let mut obj = Rat::zero();
        for (i, &bj) in self.basis.iter().enumerate() {
            obj += &cost[bj] * &self.rhs[i];
        }
        obj
    }
}

/// Solve `min cost·x  s.t.  rows·x = rhs, x ≥ 0` exactly.
///
/// `rows` is a list of m rows of equal length n; `rhs` has length m and
/// `cost` length n. Returns the optimum or a verified-by-caller Farkas
/// vector. Errors if the program is unbounded (the callers in this crate
/// only pose bounded programs, so unboundedness is an internal error).
pub fn solve_lp(rows: &[Vec<Rat>], rhs: &[Rat], cost: &[Rat]) -> Result<LpOutcome> {
    let m = rows.len();
    let n = if m == 0 { cost.len() } else { rows[0].len() };
    if rhs.len() != m || cost.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Internal("LP dimension mismatch".into()));
    }
    if m == 0 {
        return Ok(LpOutcome::Optimal {
            x: vec![Rat::zero(); n],
            objective: Rat::zero(),
        });
    }

    // Sign-normalize rows so the right-hand side is nonnegative, then add
    // one artificial column per row as the starting identity basis.
    let mut flipped = vec![false; m];
    let total = n + m;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: (n..total).collect(),
        ncols: total,
    };
    for i in 0..m {
        let flip = rhs[i].is_negative();
        flipped[i] = flip;
        let mut row: Vec<Rat> = rows[i]
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        row.resize(total, Rat::zero());
        row[n + i] = Rat::one();
        tab.rows.push(row);
        tab.rhs.push(if flip { -rhs[i].clone() } else { rhs[i].clone() });
    }

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = vec![Rat::zero(); total];
    for c in cost1.iter_mut().skip(n) {
        *c = Rat::one();
    }
    let enterable1 = vec![true; total];
    match tab.optimize(&cost1, &enterable1) {
        Step::Optimal => {}
        Step::Unbounded => {
            return Err(Error::Internal("phase-1 LP unbounded".into()));
        }
    }
    let infeas = tab.objective(&cost1);
    if infeas.is_positive() {
        // Farkas vector from the phase-1 duals: for the sign-normalized
        // system, yᵢ = 1 − (reduced cost of artificial i); un-flip rows.
        let mut farkas = Vec::with_capacity(m);
        for i in 0..m {
            let yi = Rat::one() - tab.reduced_cost(&cost1, n + i);
            farkas.push(if flipped[i] { -yi } else { yi });
        }
        return Ok(LpOutcome::Infeasible { farkas });
    }

    // Drive any degenerate artificials out of the basis; a row whose
    // structural entries are all zero is redundant and is dropped.
    let mut i = 0;
    while i < tab.basis.len() {
        if tab.basis[i] >= n {
            let pivot_col = (0..n).find(|&j| !tab.rows[i][j].is_zero());
            match pivot_col {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.rows.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 on the structural columns only.
    for row in tab.rows.iter_mut() {
        row.truncate(n);
    }
    tab.ncols = n;
    let mut cost2 = cost.to_vec();
    cost2.resize(n, Rat::zero());
    match tab.optimize(&cost2, &vec![true; n]) {
        Step::Optimal => {}
        Step::Unbounded => {
            return Err(Error::Internal("phase-2 LP unbounded".into()));
        }
    }
    let mut x = vec![Rat::zero(); n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        x[bj] = tab.rhs[i].clone();
    }
    let objective = tab.objective(&cost2);
    Ok(LpOutcome::Optimal { x, objective })
}

/// Separating affine functional φ(z) = normal·z + offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    /// Linear part g.
    pub normal: Vec<Rat>,
    /// Constant part g₀.
    pub offset: Rat,
}

impl Separation {
    /// Evaluate φ(z).
    pub fn eval(&self, z: &[Rat]) -> Rat {
        let mut v = self.offset.clone();
        for (g, zi) in self.normal.iter().zip(z) {
            v += g * zi;
        }
        v
    }
}

/// Verified answer to a convex-hull membership query.
#[derive(Clone, Debug)]
pub enum HullMembership {
    /// `target = Σ weightsᵢ · pointᵢ` with weights ≥ 0 summing to 1.
    Inside { weights: Vec<Rat> },
    /// φ separates: φ(target) > 0 ≥ φ(pointᵢ) for every point.
    Outside { separation: Separation },
}

impl HullMembership {
    /// True for the `Inside` case.
    pub fn is_inside(&self) -> bool {
        matches!(self, HullMembership::Inside { .. })
    }
}

/// Decide whether `target` lies in the convex hull of `points`, exactly.
///
/// Poses the equality-form feasibility program over mixture weights
/// (one equality per coordinate plus the normalization row) and verifies
/// the returned certificate — weights or separating functional — before
/// handing it out.
pub fn hull_membership(points: &[Vec<Rat>], target: &[Rat]) -> Result<HullMembership> {
    if points.is_empty() {
        return Err(Error::BadParameter("hull of no points".into()));
    }
    let dim = target.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Internal("hull point dimension mismatch".into()));
    }
    let n = points.len();
    let mut rows = Vec::with_capacity(dim + 1);
    for d in 0..dim {
        rows.push(points.iter().map(|p| p[d].clone()).collect::<Vec<_>>());
    }
    rows.push(vec![Rat::one(); n]);
    let mut rhs = target.to_vec();
    rhs.push(Rat::one());
    let cost = vec![Rat::zero(); n];

    match solve_lp(&rows, &rhs, &cost)? {
        LpOutcome::Optimal { x, .. } => {
            let mut total = Rat::zero();
            let mut combo = vec![Rat::zero(); dim];
            for (w, p) in x.iter().zip(points) {
                if w.is_negative() {
                    return Err(Error::Internal("negative weight from LP".into()));
                }
                total += w;
                for (c, v) in combo.iter_mut().zip(p) {
                    *c += w * v;
                }
            }
            if !total.is_one() || combo != target {
                return Err(Error::Internal(
                    "membership weights failed exact verification".into(),
                ));
            }
            Ok(HullMembership::Inside { weights: x })
        }
        LpOutcome::Infeasible { farkas } => {
            let separation = Separation {
                normal: farkas[..dim].to_vec(),
                offset: farkas[dim].clone(),
            };
            if !separation.eval(target).is_positive()
                || points.iter().any(|p| separation.eval(p).is_positive())
            {
                return Err(Error::Internal(
                    "separating functional failed exact verification".into(),
                ));
            }
            Ok(HullMembership::Outside { separation })
        }
    }
}

/// Exact L∞ distance from `target` to the convex hull of `points`, with
/// optimal mixture weights. Distance zero is equivalent to membership.
///
/// Poses the inequality-form program
/// `min t  s.t.  −t ≤ (Σ wᵢ pᵢ − target)_d ≤ t,  w ≥ 0,  Σ wᵢ = 1`
/// with explicit slack variables — an independent formulation from the
/// equality-form membership program.
pub fn hull_distance(points: &[Vec<Rat>], target: &[Rat]) -> Result<(Rat, Vec<Rat>)> {
    if points.is_empty() {
        return Err(Error::BadParameter("hull of no points".into()));
    }
    let dim = target.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Internal("hull point dimension mismatch".into()));
    }
    let n = points.len();
    // Columns: weights (n), distance t (1), slacks (2·dim).
    let ncols = n + 1 + 2 * dim;
    let t_col = n;
    let mut rows = Vec::with_capacity(2 * dim + 1);
    let mut rhs = Vec::with_capacity(2 * dim + 1);
    for d in 0..dim {
        // Σ wᵢ pᵢ[d] − t + s_d = target[d]
        let mut row = vec![Rat::zero(); ncols];
        for (j, p) in points.iter().enumerate() {
            row[j] = p[d].clone();
        }
        row[t_col] = -Rat::one();
        row[n + 1 + d] = Rat::one();
        rows.push(row);
        rhs.push(target[d].clone());
        // −Σ wᵢ pᵢ[d] − t + s_{dim+d} = −target[d]
        let mut row = vec![Rat::zero(); ncols];
        for (j, p) in points.iter().enumerate() {
            row[j] = -p[d].clone();
        }
        row[t_col] = -Rat::one();
        row[n + 1 + dim + d] = Rat::one();
        rows.push(row);
        rhs.push(-target[d].clone());
    }
    let mut norm_row = vec![Rat::zero(); ncols];
    for c in norm_row.iter_mut().take(n) {
        *c = Rat::one();
    }
    rows.push(norm_row);
    rhs.push(Rat::one());
    let mut cost = vec![Rat::zero(); ncols];
    cost[t_col] = Rat::one();

    match solve_lp(&rows, &rhs, &cost)? {
        LpOutcome::Optimal { x, objective } => {
            let weights = x[..n].to_vec();
            let mut total = Rat::zero();
            let mut achieved = Rat::zero();
            let mut combo = vec![Rat::zero(); dim];
            for (w, p) in weights.iter().zip(points) {
                if w.is_negative() {
                    return Err(Error::Internal("negative weight from LP".into()));
                }
                total += w;
                for (c, v) in combo.iter_mut().zip(p) {
                    *c += w * v;
                }
            }
            for d in 0..dim {
                let dev = (&combo[d] - &target[d]).abs();
                if dev > achieved {
                    achieved = dev;
                }
            }
            if !total.is_one() || achieved != objective {
                return Err(Error::Internal(
                    "distance solution failed exact verification".into(),
                ));
            }
            Ok((objective, weights))
        }
        LpOutcome::Infeasible { .. } => Err(Error::Internal(
            "distance LP is feasible by construction".into(),
        )),
    }
}
