//! Small dense linear-program solver.
//!
//! Minimizes `c·v` subject to `row·v <= b`, `row·v = b` and per-variable
//! bounds (either side may be infinite). The problem is brought to standard
//! form (shifted / split variables, explicit upper-bound rows) and solved with
//! a two-phase tableau simplex. Pricing is Dantzig's rule with lowest-index
//! tie-breaking; after a run of degenerate pivots the solver switches to
//! Bland's rule for the rest of the solve, which rules out cycling.

use thiserror::Error;

/// Constraint satisfaction tolerance for reported optima.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Entries smaller than this are never pivoted on.
pub const PIVOT_TOL: f64 = 1e-10;
/// Reduced costs above `-OPTIMALITY_TOL` count as non-negative.
const OPTIMALITY_TOL: f64 = 1e-10;
/// Consecutive degenerate pivots tolerated before falling back to Bland's rule.
const DEGENERATE_STREAK_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    name: String,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    inequalities: Vec<(Vec<f64>, f64)>,
    equalities: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    /// `variable_count` variables with zero objective and bounds `[0, +inf)`.
    pub fn new(name: impl Into<String>, variable_count: usize) -> Self {
        Self {
            name: name.into(),
            objective: vec![0.0; variable_count],
            lower: vec![0.0; variable_count],
            upper: vec![f64::INFINITY; variable_count],
            inequalities: Vec::new(),
            equalities: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, var: usize, coefficient: f64) {
        self.objective[var] = coefficient;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn set_free(&mut self, var: usize) {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY);
    }

    /// `row·v <= bound`
    pub fn add_le(&mut self, row: Vec<f64>, bound: f64) {
        self.inequalities.push((row, bound));
    }

    /// `row·v >= bound`
    pub fn add_ge(&mut self, row: Vec<f64>, bound: f64) {
        self.inequalities
            .push((row.into_iter().map(|a| -a).collect(), -bound));
    }

    /// `row·v = value`
    pub fn add_eq(&mut self, row: Vec<f64>, value: f64) {
        self.equalities.push((row, value));
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn inequalities(&self) -> &[(Vec<f64>, f64)] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[(Vec<f64>, f64)] {
        &self.equalities
    }

    /// Largest violation of any constraint or bound at `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, b) in &self.inequalities {
            worst = worst.max(dot(row, values) - b);
        }
        for (row, b) in &self.equalities {
            worst = worst.max((dot(row, values) - b).abs());
        }
        for (j, &v) in values.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        dot(&self.objective, values)
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.variable_count();
        let bad = |reason: String| LpError::Malformed {
            name: self.name.clone(),
            reason,
        };
        for (idx, (row, b)) in self.inequalities.iter().chain(&self.equalities).enumerate() {
            if row.len() != n {
                return Err(bad(format!("row {idx} has length {}, expected {n}", row.len())));
            }
            if !b.is_finite() || row.iter().any(|a| !a.is_finite()) {
                return Err(bad(format!("row {idx} has a non-finite entry")));
            }
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(bad(format!("objective coefficient {j} is not finite")));
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(bad(format!("variable {j} has empty bounds")));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(bad(format!("variable {j} has an infinite bound on the wrong side")));
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the original variables; meaningful when optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program `{name}` is malformed: {reason}")]
    Malformed { name: String, reason: String },
    #[error("linear program `{name}` ended with status {status:?} after {pivots} pivots")]
    NotOptimal {
        name: String,
        status: LpStatus,
        pivots: usize,
    },
}

impl LpSolution {
    /// Converts a non-optimal status into an error naming the program.
    pub fn into_optimal(self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            status => Err(LpError::NotOptimal {
                name: lp.name.clone(),
                status,
                pivots: self.pivots,
            }),
        }
    }
}

/// How an original variable is recovered from standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `v = offset + y_col`
    Shifted { col: usize, offset: f64 },
    /// `v = offset - y_col`
    Mirrored { col: usize, offset: f64 },
    /// `v = y_pos - y_neg`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`, last column is the right-hand side.
    a: Vec<f64>,
    /// Reduced costs, last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may never enter (artificials in phase 2).
    barred: Vec<bool>,
    pivots: usize,
    pivot_limit: usize,
    bland: bool,
    degenerate_streak: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.a[pr * w + pc];
        for c in 0..w {
            self.a[pr * w + c] /= p;
        }
        self.a[pr * w + pc] = 1.0;
        let pivot_row: Vec<f64> = self.a[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let factor = self.a[r * w + pc];
            if factor != 0.0 {
                for c in 0..w {
                    self.a[r * w + c] -= factor * pivot_row[c];
                }
                self.a[r * w + pc] = 0.0;
            }
        }
        let factor = self.cost[pc];
        if factor != 0.0 {
            for c in 0..w {
                self.cost[c] -= factor * pivot_row[c];
            }
            self.cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    fn entering(&self) -> Option<usize> {
        let candidates = (0..self.cols).filter(|&c| !self.barred[c] && self.cost[c] < -OPTIMALITY_TOL);
        if self.bland {
            candidates.min()
        } else {
            // strict comparison keeps the lowest index among equal costs
            candidates.fold(None, |best: Option<usize>, c| match best {
                Some(b) if self.cost[b] <= self.cost[c] => Some(b),
                _ => Some(c),
            })
        }
    }

    fn leaving(&self, pc: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let coef = self.at(r, pc);
            if coef <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(r).max(0.0) / coef;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * bratio.abs().max(1.0);
                    if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn run(&mut self) -> PhaseEnd {
        loop {
            let Some(pc) = self.entering() else {
                return PhaseEnd::Optimal;
            };
            let Some(pr) = self.leaving(pc) else {
                return PhaseEnd::Unbounded;
            };
            if self.pivots >= self.pivot_limit {
                return PhaseEnd::IterationLimit;
            }
            if self.rhs(pr).abs() <= PIVOT_TOL {
                self.degenerate_streak += 1;
                if self.degenerate_streak > DEGENERATE_STREAK_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
            }
            self.pivot(pr, pc);
        }
    }

    fn set_costs(&mut self, c: &[f64]) {
        let w = self.cols + 1;
        self.cost = c.to_vec();
        self.cost.push(0.0);
        for r in 0..self.rows {
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                for j in 0..w {
                    self.cost[j] -= cb * self.a[r * w + j];
                }
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.cols + 1;
        self.a.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Solves `lp`. Malformed input is an error; infeasible, unbounded and
/// iteration-limited runs are reported through [`LpSolution::status`].
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.variable_count();

    // standard-form columns for the original variables
    let mut maps = Vec::with_capacity(n);
    let mut structural = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo.is_finite() {
            maps.push(VarMap::Shifted {
                col: structural,
                offset: lo,
            });
            if hi.is_finite() {
                upper_rows.push((structural, hi - lo));
            }
            structural += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirrored {
                col: structural,
                offset: hi,
            });
            structural += 1;
        } else {
            maps.push(VarMap::Split {
                pos: structural,
                neg: structural + 1,
            });
            structural += 2;
        }
    }

    // translate a row over original variables into (columns, adjusted rhs)
    let translate = |row: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; structural];
        let mut rhs = b;
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, offset } => {
                    out[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirrored { col, offset } => {
                    out[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, rhs)
    };

    let mut le_rows: Vec<(Vec<f64>, f64)> = lp
        .inequalities
        .iter()
        .map(|(row, b)| translate(row, *b))
        .collect();
    for &(col, width) in &upper_rows {
        let mut row = vec![0.0; structural];
        row[col] = 1.0;
        le_rows.push((row, width));
    }
    let eq_rows: Vec<(Vec<f64>, f64)> = lp
        .equalities
        .iter()
        .map(|(row, b)| translate(row, *b))
        .collect();

    let slack_count = le_rows.len();
    let artificial_count =
        le_rows.iter().filter(|(_, b)| *b < 0.0).count() + eq_rows.len();
    let rows = le_rows.len() + eq_rows.len();
    let cols = structural + slack_count + artificial_count;
    let w = cols + 1;
    let mut a = vec![0.0; rows * w];
    let mut basis = vec![0usize; rows];
    let mut next_art = structural + slack_count;
    for (r, (row, b)) in le_rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (c, &v) in row.iter().enumerate() {
            a[r * w + c] = sign * v;
        }
        a[r * w + structural + r] = sign;
        a[r * w + cols] = sign * b;
        if sign > 0.0 {
            basis[r] = structural + r;
        } else {
            a[r * w + next_art] = 1.0;
            basis[r] = next_art;
            next_art += 1;
        }
    }
    for (k, (row, b)) in eq_rows.iter().enumerate() {
        let r = le_rows.len() + k;
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (c, &v) in row.iter().enumerate() {
            a[r * w + c] = sign * v;
        }
        a[r * w + cols] = sign * b;
        a[r * w + next_art] = 1.0;
        basis[r] = next_art;
        next_art += 1;
    }
    let first_artificial = structural + slack_count;

    let mut t = Tableau {
        rows,
        cols,
        a,
        cost: Vec::new(),
        basis,
        barred: vec![false; cols],
        pivots: 0,
        pivot_limit: 50 * (rows + cols),
        bland: false,
        degenerate_streak: 0,
    };

    let finish = |t: &Tableau, status: LpStatus| -> LpSolution {
        LpSolution {
            status,
            values: vec![0.0; n],
            objective: f64::NAN,
            pivots: t.pivots,
        }
    };

    // phase 1
    if artificial_count > 0 {
        let mut c1 = vec![0.0; cols];
        c1[first_artificial..].iter_mut().for_each(|c| *c = 1.0);
        t.set_costs(&c1);
        match t.run() {
            PhaseEnd::Optimal => {}
            PhaseEnd::IterationLimit => return Ok(finish(&t, LpStatus::IterationLimit)),
            PhaseEnd::Unbounded => unreachable!("phase 1 objective is bounded below by zero"),
        }
        let scale = le_rows
            .iter()
            .chain(&eq_rows)
            .map(|(_, b)| b.abs())
            .fold(1.0, f64::max);
        if -t.cost[cols] > FEASIBILITY_TOL * scale {
            return Ok(finish(&t, LpStatus::Infeasible));
        }
        // drive remaining (zero-level) artificials out of the basis
        let mut r = 0;
        while r < t.rows {
            if t.basis[r] >= first_artificial {
                let replacement = (0..first_artificial).find(|&c| t.at(r, c).abs() > PIVOT_TOL);
                match replacement {
                    Some(c) => {
                        t.pivot(r, c);
                        r += 1;
                    }
                    None => t.remove_row(r),
                }
            } else {
                r += 1;
            }
        }
        for c in first_artificial..cols {
            t.barred[c] = true;
        }
    }

    // phase 2
    let mut c2 = vec![0.0; cols];
    for (j, m) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *m {
            VarMap::Shifted { col, .. } => c2[col] += c,
            VarMap::Mirrored { col, .. } => c2[col] -= c,
            VarMap::Split { pos, neg } => {
                c2[pos] += c;
                c2[neg] -= c;
            }
        }
    }
    t.set_costs(&c2);
    t.degenerate_streak = 0;
    match t.run() {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => return Ok(finish(&t, LpStatus::Unbounded)),
        PhaseEnd::IterationLimit => return Ok(finish(&t, LpStatus::IterationLimit)),
    }

    let mut y = vec![0.0; cols];
    for r in 0..t.rows {
        y[t.basis[r]] = t.rhs(r);
    }
    let values: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, offset } => offset + y[col],
            VarMap::Mirrored { col, offset } => offset - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = lp.objective_value(&values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        pivots: t.pivots,
    })
}
