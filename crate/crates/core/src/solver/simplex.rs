//! Bounded-variable revised primal simplex with an explicit dense basis
//! inverse. Two phases via artificial variables; Dantzig pricing with a
//! Bland's-rule fallback after a run of degenerate pivots; periodic
//! refactorization of the basis inverse.

pub const FEAS_TOL: f64 = 1e-7;
pub const OPT_TOL: f64 = 1e-7;
pub const PIVOT_TOL: f64 = 1e-9;
const DEGEN_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 64;

/// Equality-form LP: `A x = rhs`, `lb <= x <= ub`, minimize `obj . x`.
/// Columns are sparse; slack columns must already be present.
pub struct StandardLp {
    pub num_rows: usize,
    pub num_vars: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Minimized objective over the first `num_vars` columns.
    pub obj: Vec<f64>,
}

#[derive(Debug)]
pub enum SimplexOutcome {
    /// Optimal basic solution; `x` covers the `num_vars` original columns,
    /// `obj` is the minimized objective value in the solver's own scaling
    /// (callers recompute objectives in problem space).
    Optimal {
        x: Vec<f64>,
        #[allow(dead_code)]
        obj: f64,
    },
    Infeasible,
    Unbounded,
    Numerical(String),
}

#[derive(Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    FreeZero,
}

struct Simplex {
    m: usize,
    /// Total columns including artificials.
    n: usize,
    n_orig: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    binv: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    pivots_since_refactor: usize,
    degen_streak: usize,
    bland: bool,
}

pub fn solve_standard(lp: &StandardLp) -> SimplexOutcome {
    let m = lp.num_rows;
    let n = lp.num_vars;

    let mut cols = lp.cols.clone();
    let mut lb = lp.lb.clone();
    let mut ub = lp.ub.clone();

    // initial nonbasic point: every original column at a finite bound
    let mut x = vec![0.0; n];
    let mut state = Vec::with_capacity(n + m);
    for j in 0..n {
        if lb[j].is_finite() {
            x[j] = lb[j];
            state.push(VarState::AtLower);
        } else if ub[j].is_finite() {
            x[j] = ub[j];
            state.push(VarState::AtUpper);
        } else {
            x[j] = 0.0;
            state.push(VarState::FreeZero);
        }
    }

    // artificial basis absorbing the residual of each row
    let mut residual = lp.rhs.clone();
    for (j, col) in cols.iter().enumerate().take(n) {
        if x[j] != 0.0 {
            for &(i, a) in col {
                residual[i] -= a * x[j];
            }
        }
    }
    let mut basis = Vec::with_capacity(m);
    let mut binv = identity(m);
    for (i, &r) in residual.iter().enumerate() {
        let sign = if r >= 0.0 { 1.0 } else { -1.0 };
        cols.push(vec![(i, sign)]);
        lb.push(0.0);
        ub.push(f64::INFINITY);
        x.push(r.abs());
        state.push(VarState::Basic(i));
        basis.push(n + i);
        // the initial basis matrix is diag(sign), which is its own inverse
        binv[i * m + i] = sign;
    }

    let mut phase1_cost = vec![0.0; n + m];
    for c in phase1_cost.iter_mut().skip(n) {
        *c = 1.0;
    }

    let mut solver = Simplex {
        m,
        n: n + m,
        n_orig: n,
        cols,
        lb,
        ub,
        rhs: lp.rhs.clone(),
        cost: phase1_cost,
        binv,
        basis,
        state,
        x,
        pivots_since_refactor: 0,
        degen_streak: 0,
        bland: false,
    };

    let scale = lp.rhs.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    match solver.run() {
        LoopExit::Optimal => {}
        LoopExit::Unbounded => {
            return SimplexOutcome::Numerical("phase 1 reported unbounded".into())
        }
        LoopExit::Numerical(e) => return SimplexOutcome::Numerical(e),
    }
    let infeas: f64 = (solver.n_orig..solver.n).map(|j| solver.x[j].abs()).sum();
    if infeas > FEAS_TOL * scale.max(1.0) * 10.0 {
        return SimplexOutcome::Infeasible;
    }

    // phase 2: pin artificials at zero and optimize the real objective
    for j in solver.n_orig..solver.n {
        solver.lb[j] = 0.0;
        solver.ub[j] = 0.0;
        if !matches!(solver.state[j], VarState::Basic(_)) {
            solver.x[j] = 0.0;
            solver.state[j] = VarState::AtLower;
        }
    }
    let mut cost = vec![0.0; solver.n];
    cost[..n].copy_from_slice(&lp.obj);
    solver.cost = cost;
    solver.bland = false;
    solver.degen_streak = 0;

    match solver.run() {
        LoopExit::Optimal => {}
        LoopExit::Unbounded => return SimplexOutcome::Unbounded,
        LoopExit::Numerical(e) => return SimplexOutcome::Numerical(e),
    }

    if let Err(e) = solver.refresh_basics() {
        return SimplexOutcome::Numerical(e);
    }
    if let Some(e) = solver.feasibility_error(scale) {
        return SimplexOutcome::Numerical(e);
    }
    let x: Vec<f64> = solver.x[..n].to_vec();
    let obj = lp.obj.iter().zip(&x).map(|(c, v)| c * v).sum();
    SimplexOutcome::Optimal { x, obj }
}

enum LoopExit {
    Optimal,
    Unbounded,
    Numerical(String),
}

impl Simplex {
    fn run(&mut self) -> LoopExit {
        let max_iters = 200 * (self.m + self.n) + 10_000;
        for _ in 0..max_iters {
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                if let Err(e) = self.refactorize() {
                    return LoopExit::Numerical(e);
                }
            }
            let y = self.dual_prices();
            let entering = self.price(&y);
            let (q, dir) = match entering {
                None => return LoopExit::Optimal,
                Some(e) => e,
            };
            let w = self.ftran(q);
            match self.ratio_test(q, dir, &w) {
                Step::Unbounded => return LoopExit::Unbounded,
                Step::BoundFlip(t) => {
                    self.apply_move(q, dir, t, &w);
                    self.state[q] = if dir > 0.0 {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                    self.note_degeneracy(t);
                }
                Step::Pivot { row, t, to_upper } => {
                    self.apply_move(q, dir, t, &w);
                    let leaving = self.basis[row];
                    self.x[leaving] = if to_upper {
                        self.ub[leaving]
                    } else {
                        self.lb[leaving]
                    };
                    self.state[leaving] = if to_upper {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.basis[row] = q;
                    self.state[q] = VarState::Basic(row);
                    if let Err(e) = self.update_binv(row, &w) {
                        return LoopExit::Numerical(e);
                    }
                    self.pivots_since_refactor += 1;
                    self.note_degeneracy(t);
                }
            }
        }
        LoopExit::Numerical("iteration limit exceeded".into())
    }

    fn note_degeneracy(&mut self, t: f64) {
        if t <= DEGEN_TOL {
            self.degen_streak += 1;
            if self.degen_streak > 2 * (self.m + self.n) {
                self.bland = true;
            }
        } else {
            self.degen_streak = 0;
            self.bland = false;
        }
    }

    fn dual_prices(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (k, yk) in y.iter_mut().enumerate() {
                    *yk += cb * row[k];
                }
            }
        }
        y
    }

    /// Pick the entering variable and its direction (+1 from lower/free,
    /// -1 from upper). Dantzig rule, or lowest eligible index under Bland.
    fn price(&self, y: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n {
            match self.state[j] {
                VarState::Basic(_) => continue,
                _ => {}
            }
            if self.ub[j] - self.lb[j] <= 1e-12 {
                continue; // fixed
            }
            let mut d = self.cost[j];
            for &(i, a) in &self.cols[j] {
                d -= y[i] * a;
            }
            let dir = match self.state[j] {
                VarState::AtLower if d < -OPT_TOL => 1.0,
                VarState::AtUpper if d > OPT_TOL => -1.0,
                VarState::FreeZero if d < -OPT_TOL => 1.0,
                VarState::FreeZero if d > OPT_TOL => -1.0,
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d.abs();
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ftran(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(r, a) in &self.cols[q] {
            for i in 0..m {
                w[i] += self.binv[i * m + r] * a;
            }
        }
        w
    }

    fn ratio_test(&self, q: usize, dir: f64, w: &[f64]) -> Step {
        let span = self.ub[q] - self.lb[q];
        let mut t_min = if span.is_finite() { span } else { f64::INFINITY };
        let mut choice: Option<(usize, f64, bool)> = None; // row, |w|, to_upper

        // first pass: tightest ratio
        for (i, &wi) in w.iter().enumerate() {
            let coeff = dir * wi;
            let b = self.basis[i];
            let t = if coeff > PIVOT_TOL {
                if self.lb[b].is_finite() {
                    ((self.x[b] - self.lb[b]) / coeff).max(0.0)
                } else {
                    continue;
                }
            } else if coeff < -PIVOT_TOL {
                if self.ub[b].is_finite() {
                    ((self.ub[b] - self.x[b]) / -coeff).max(0.0)
                } else {
                    continue;
                }
            } else {
                continue;
            };
            if t < t_min {
                t_min = t;
            }
        }
        if t_min.is_infinite() {
            return Step::Unbounded;
        }

        // second pass: pick the leaving row among near-ties
        for (i, &wi) in w.iter().enumerate() {
            let coeff = dir * wi;
            let b = self.basis[i];
            let (t, to_upper) = if coeff > PIVOT_TOL {
                if self.lb[b].is_finite() {
                    (((self.x[b] - self.lb[b]) / coeff).max(0.0), false)
                } else {
                    continue;
                }
            } else if coeff < -PIVOT_TOL {
                if self.ub[b].is_finite() {
                    (((self.ub[b] - self.x[b]) / -coeff).max(0.0), true)
                } else {
                    continue;
                }
            } else {
                continue;
            };
            if t > t_min + DEGEN_TOL {
                continue;
            }
            let better = match choice {
                None => true,
                Some((ci, cw, _)) => {
                    if self.bland {
                        self.basis[i] < self.basis[ci]
                    } else {
                        wi.abs() > cw || (wi.abs() == cw && self.basis[i] < self.basis[ci])
                    }
                }
            };
            if better {
                choice = Some((i, wi.abs(), to_upper));
            }
        }

        match choice {
            Some((row, _, to_upper)) => Step::Pivot {
                row,
                t: t_min,
                to_upper,
            },
            // no limiting row: the entering variable runs to its other bound
            None => Step::BoundFlip(t_min),
        }
    }

    fn apply_move(&mut self, q: usize, dir: f64, t: f64, w: &[f64]) {
        if t == 0.0 {
            return;
        }
        self.x[q] += dir * t;
        for (i, &wi) in w.iter().enumerate() {
            if wi != 0.0 {
                let b = self.basis[i];
                self.x[b] -= dir * t * wi;
            }
        }
    }

    fn update_binv(&mut self, row: usize, w: &[f64]) -> Result<(), String> {
        let m = self.m;
        let pivot = w[row];
        if pivot.abs() < PIVOT_TOL {
            return Err("pivot element below tolerance".into());
        }
        let inv_pivot = 1.0 / pivot;
        for k in 0..m {
            self.binv[row * m + k] *= inv_pivot;
        }
        for i in 0..m {
            if i == row {
                continue;
            }
            let factor = w[i];
            if factor != 0.0 {
                for k in 0..m {
                    self.binv[i * m + k] -= factor * self.binv[row * m + k];
                }
            }
        }
        Ok(())
    }

    fn refactorize(&mut self) -> Result<(), String> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (i, &j) in self.basis.iter().enumerate() {
            for &(r, a) in &self.cols[j] {
                b[r * m + i] = a;
            }
        }
        self.binv = invert(&mut b, m).ok_or_else(|| "singular basis".to_string())?;
        self.pivots_since_refactor = 0;
        self.refresh_basics()
    }

    /// Recompute basic values from the nonbasic point for accuracy.
    fn refresh_basics(&mut self) -> Result<(), String> {
        let m = self.m;
        let mut resid = self.rhs.clone();
        for j in 0..self.n {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            if self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    resid[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let mut v = 0.0;
            let row = &self.binv[i * m..(i + 1) * m];
            for (k, &r) in resid.iter().enumerate() {
                if r != 0.0 {
                    v += row[k] * r;
                }
            }
            if !v.is_finite() {
                return Err("non-finite basic value".into());
            }
            self.x[self.basis[i]] = v;
        }
        Ok(())
    }

    fn feasibility_error(&self, scale: f64) -> Option<String> {
        let tol = FEAS_TOL * scale.max(1.0) * 100.0;
        for j in 0..self.n {
            if self.x[j] < self.lb[j] - tol || self.x[j] > self.ub[j] + tol {
                return Some(format!(
                    "variable {j} out of bounds: {} not in [{}, {}]",
                    self.x[j], self.lb[j], self.ub[j]
                ));
            }
        }
        let mut lhs = vec![0.0; self.m];
        for j in 0..self.n {
            if self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    lhs[i] += a * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            if (lhs[i] - self.rhs[i]).abs() > tol {
                return Some(format!(
                    "row {i} violated: {} vs rhs {}",
                    lhs[i], self.rhs[i]
                ));
            }
        }
        None
    }
}

enum Step {
    Unbounded,
    BoundFlip(f64),
    Pivot { row: usize, t: f64, to_upper: bool },
}

fn identity(m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        out[i * m + i] = 1.0;
    }
    out
}

/// Gauss-Jordan inversion with partial pivoting; destroys `mat`.
fn invert(mat: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let mut inv = identity(m);
    for col in 0..m {
        let mut pivot_row = col;
        let mut best = mat[col * m + col].abs();
        for r in (col + 1)..m {
            let v = mat[r * m + col].abs();
            if v > best {
                best = v;
                pivot_row = r;
            }
        }
        if best < PIVOT_TOL {
            return None;
        }
        if pivot_row != col {
            for k in 0..m {
                mat.swap(col * m + k, pivot_row * m + k);
                inv.swap(col * m + k, pivot_row * m + k);
            }
        }
        let p = mat[col * m + col];
        let inv_p = 1.0 / p;
        for k in 0..m {
            mat[col * m + k] *= inv_p;
            inv[col * m + k] *= inv_p;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = mat[r * m + col];
            if f != 0.0 {
                for k in 0..m {
                    mat[r * m + k] -= f * mat[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &StandardLp) -> SimplexOutcome {
        solve_standard(lp)
    }

    #[test]
    fn maximizes_simple_bounded_lp() {
        // max x + y s.t. x + y <= 1.5, x,y in [0,1]  (min form: negate)
        let lp = StandardLp {
            num_rows: 1,
            num_vars: 3,
            cols: vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, 1.0)]],
            lb: vec![0.0, 0.0, 0.0],
            ub: vec![1.0, 1.0, f64::INFINITY],
            rhs: vec![1.5],
            obj: vec![-1.0, -1.0, 0.0],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { obj, .. } => assert!((obj + 1.5).abs() < 1e-9),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_system() {
        // x = 2 with x in [0,1]
        let lp = StandardLp {
            num_rows: 1,
            num_vars: 1,
            cols: vec![vec![(0, 1.0)]],
            lb: vec![0.0],
            ub: vec![1.0],
            rhs: vec![2.0],
            obj: vec![0.0],
        };
        assert!(matches!(solve(&lp), SimplexOutcome::Infeasible));
    }

    #[test]
    fn detects_unbounded_objective() {
        // min -x s.t. x - y = 0, x,y >= 0
        let lp = StandardLp {
            num_rows: 1,
            num_vars: 2,
            cols: vec![vec![(0, 1.0)], vec![(0, -1.0)]],
            lb: vec![0.0, 0.0],
            ub: vec![f64::INFINITY, f64::INFINITY],
            rhs: vec![0.0],
            obj: vec![-1.0, 0.0],
        };
        assert!(matches!(solve(&lp), SimplexOutcome::Unbounded));
    }

    #[test]
    fn handles_equality_and_negative_bounds() {
        // min x + y s.t. x + 2y = 4, x in [-3, 10], y in [0, 5] -> x=-3? then y=3.5, obj=0.5
        let lp = StandardLp {
            num_rows: 1,
            num_vars: 2,
            cols: vec![vec![(0, 1.0)], vec![(0, 2.0)]],
            lb: vec![-3.0, 0.0],
            ub: vec![10.0, 5.0],
            rhs: vec![4.0],
            obj: vec![1.0, 1.0],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { x, obj } => {
                assert!((obj - 0.5).abs() < 1e-9, "obj = {obj}");
                assert!((x[0] + 3.0).abs() < 1e-9);
                assert!((x[1] - 3.5).abs() < 1e-9);
            }
            _ => panic!("expected optimal"),
        }
    }

    #[test]
    fn degenerate_problem_terminates() {
        // several redundant rows pinning the same vertex
        let lp = StandardLp {
            num_rows: 3,
            num_vars: 5,
            cols: vec![
                vec![(0, 1.0), (1, 1.0), (2, 2.0)],
                vec![(0, 1.0), (1, 1.0), (2, 2.0)],
                vec![(0, 1.0)],
                vec![(1, 1.0)],
                vec![(2, 1.0)],
            ],
            lb: vec![0.0, 0.0, 0.0, 0.0, 0.0],
            ub: vec![f64::INFINITY; 5],
            rhs: vec![1.0, 1.0, 2.0],
            obj: vec![-1.0, -1.0, 0.0, 0.0, 0.0],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { obj, .. } => assert!((obj + 1.0).abs() < 1e-9),
            _ => panic!("expected optimal"),
        }
    }
}
