//! Structure-aware node relaxation for the carrier-aggregation MILP.
//!
//! At any branch-and-bound node each association variable is either fixed
//! or free. For the LP relaxation the pair variables collapse: a fixed-0
//! pair contributes nothing; for every other pair the fill and product
//! variables coincide at the optimum (`f = lambda`), and a free association
//! can sit at `a = lambda` unless the swap-budget row rewards keeping it
//! high (previous association 1), in which case a small dedicated variable
//! remains. Substituting accordingly gives an LP with one variable per
//! eligible pair instead of three plus four product rows, with exactly the
//! same optimal value as the full relaxation.

use super::lp::LinProg;
use crate::milp::{MilpProblem, RowKind, Sense};
use std::collections::BTreeMap;

/// Parsed structure of a problem produced by `build_milp` (plus any extra
/// rows over supply/psi, e.g. the lexicographic second phase).
pub(crate) struct PairModel {
    pub num_carriers: usize,
    pub num_users: usize,
    /// Association fixed by the model's own bounds (ineligible pairs).
    pub base_fix: Vec<Option<bool>>,
    /// Coefficient of each pair in the swap-budget row: +1 (prev 0),
    /// -1 (prev 1), or 0 when no such row exists.
    pub prev_coeff: Vec<f64>,
    /// Per-user association limit, read back from the carrier-limit rows.
    pub maxc: Vec<f64>,
    /// Right-hand side of the swap-budget row, when present.
    pub swap_rhs: Option<f64>,
}

impl PairModel {
    /// Extract structure; errors describe why the model is outside the
    /// supported family (callers fall back to the plain relaxation).
    pub fn extract(p: &MilpProblem) -> Result<PairModel, String> {
        let nc = p.layout.num_carriers;
        let nu = p.layout.num_users;
        let np = nc * nu;

        let mut base_fix = vec![None; np];
        for c in 0..nc {
            for u in 0..nu {
                let v = &p.variables[p.layout.association(c, u)];
                base_fix[c * nu + u] = if v.ub < 0.5 {
                    Some(false)
                } else if v.lb > 0.5 {
                    Some(true)
                } else {
                    None
                };
            }
        }
        for c in 0..nc {
            for u in 0..nu {
                for var in [p.layout.fill(c, u), p.layout.product(c, u)] {
                    let v = &p.variables[var];
                    if v.lb != 0.0 || v.ub != 1.0 {
                        return Err("fill/product bounds are not [0,1]".into());
                    }
                }
            }
        }

        let mut prev_coeff = vec![0.0; np];
        let mut swap_rhs = None;
        let mut maxc = vec![f64::INFINITY; nu];
        for row in &p.constraints {
            match row.kind {
                RowKind::SwapBudget => {
                    if swap_rhs.is_some() {
                        return Err("more than one swap-budget row".into());
                    }
                    swap_rhs = Some(row.rhs);
                    for &(var, w) in &row.terms {
                        match p.layout.kind(var) {
                            crate::milp::VarKind::Association(c, u) => prev_coeff[c * nu + u] = w,
                            _ => return Err("swap row touches a non-association variable".into()),
                        }
                    }
                }
                RowKind::CarrierLimit(u) => {
                    maxc[u] = maxc[u].min(row.rhs);
                    for &(var, _) in &row.terms {
                        match p.layout.kind(var) {
                            crate::milp::VarKind::Association(_, uu) if uu == u => {}
                            _ => return Err("unexpected term in a carrier-limit row".into()),
                        }
                    }
                }
                RowKind::Extra => {
                    for &(var, _) in &row.terms {
                        match p.layout.kind(var) {
                            crate::milp::VarKind::Supply(_) | crate::milp::VarKind::Psi => {}
                            _ => return Err("extra row touches pair variables".into()),
                        }
                    }
                }
                _ => {}
            }
        }

        for row in &p.constraints {
            if let RowKind::SupplyDef(u) = row.kind {
                for &(var, w) in &row.terms {
                    match p.layout.kind(var) {
                        crate::milp::VarKind::Product(_, uu) if uu == u => {}
                        crate::milp::VarKind::Supply(uu) if uu == u && w == 1.0 => {}
                        _ => return Err("unexpected term in a supply row".into()),
                    }
                }
            }
        }

        for &(var, _) in &p.objective {
            match p.layout.kind(var) {
                crate::milp::VarKind::Supply(_) | crate::milp::VarKind::Psi => {}
                _ => return Err("objective touches eliminated variables".into()),
            }
        }

        Ok(PairModel {
            num_carriers: nc,
            num_users: nu,
            base_fix,
            prev_coeff,
            maxc,
            swap_rhs,
        })
    }

    pub fn num_pairs(&self) -> usize {
        self.num_carriers * self.num_users
    }

    pub fn fix_of(&self, pair: usize, fixings: &BTreeMap<usize, bool>) -> Option<bool> {
        fixings.get(&pair).copied().or(self.base_fix[pair])
    }
}

#[derive(Clone, Copy)]
enum Subst {
    Const(f64),
    Var(usize),
}

/// Reduced LP for one node plus the index maps needed to lift solutions
/// back to the full variable space.
pub(crate) struct NodeLp {
    pub lin: LinProg,
    pub lambda_var: Vec<Option<usize>>,
    pub assoc_var: Vec<Option<usize>>,
    pub supply_var: Vec<usize>,
    pub psi_var: usize,
}

pub(crate) fn build_node_lp(
    p: &MilpProblem,
    pm: &PairModel,
    fixings: &BTreeMap<usize, bool>,
) -> NodeLp {
    let np = pm.num_pairs();
    let nu = pm.num_users;

    let mut lambda_var = vec![None; np];
    let mut assoc_var = vec![None; np];
    let mut lb = Vec::new();
    let mut ub = Vec::new();
    let mut next = 0usize;
    for pair in 0..np {
        if pm.fix_of(pair, fixings) != Some(false) {
            lambda_var[pair] = Some(next);
            lb.push(0.0);
            ub.push(1.0);
            next += 1;
        }
    }
    for pair in 0..np {
        if pm.fix_of(pair, fixings).is_none() && pm.prev_coeff[pair] < 0.0 {
            assoc_var[pair] = Some(next);
            lb.push(0.0);
            ub.push(1.0);
            next += 1;
        }
    }
    let supply_var: Vec<usize> = (0..nu)
        .map(|u| {
            let v = &p.variables[p.layout.supply(u)];
            lb.push(v.lb);
            ub.push(v.ub);
            let idx = next;
            next += 1;
            idx
        })
        .collect();
    let psi_var = next;
    {
        let v = &p.variables[p.layout.psi()];
        lb.push(v.lb);
        ub.push(v.ub);
        next += 1;
    }

    // substitution table over the full variable space
    let subst: Vec<Subst> = (0..p.variables.len())
        .map(|var| match p.layout.kind(var) {
            crate::milp::VarKind::Association(c, u) => {
                let pair = c * nu + u;
                match pm.fix_of(pair, fixings) {
                    Some(v) => Subst::Const(if v { 1.0 } else { 0.0 }),
                    None => match assoc_var[pair] {
                        Some(av) => Subst::Var(av),
                        None => Subst::Var(lambda_var[pair].expect("free pair has lambda")),
                    },
                }
            }
            crate::milp::VarKind::Fill(c, u) | crate::milp::VarKind::Product(c, u) => {
                let pair = c * nu + u;
                match lambda_var[pair] {
                    Some(lv) => Subst::Var(lv),
                    None => Subst::Const(0.0),
                }
            }
            crate::milp::VarKind::Supply(u) => Subst::Var(supply_var[u]),
            crate::milp::VarKind::Psi => Subst::Var(psi_var),
        })
        .collect();

    let mut rows = Vec::with_capacity(p.constraints.len());
    let mut scratch = vec![0.0f64; next];
    let mut touched: Vec<usize> = Vec::new();
    for row in &p.constraints {
        let mut rhs = row.rhs;
        for &(var, w) in &row.terms {
            match subst[var] {
                Subst::Const(v) => rhs -= w * v,
                Subst::Var(rv) => {
                    // a partial sum can pass through zero, so `touched` may
                    // collect duplicates; they are removed after sorting
                    if scratch[rv] == 0.0 {
                        touched.push(rv);
                    }
                    scratch[rv] += w;
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let terms: Vec<(usize, f64)> = touched
            .iter()
            .filter(|&&rv| scratch[rv] != 0.0)
            .map(|&rv| (rv, scratch[rv]))
            .collect();
        for &rv in &touched {
            scratch[rv] = 0.0;
        }
        touched.clear();
        if !terms.is_empty() || rhs != 0.0 {
            rows.push((terms, row.sense, rhs));
        }
    }

    let mut obj = vec![0.0; next];
    for &(var, w) in &p.objective {
        if let Subst::Var(rv) = subst[var] {
            obj[rv] += w;
        }
    }

    NodeLp {
        lin: LinProg { lb, ub, obj, rows },
        lambda_var,
        assoc_var,
        supply_var,
        psi_var,
    }
}

/// Lift a reduced solution and an integral association assignment back to
/// the full variable space: `f = lambda` on live pairs, zero elsewhere.
pub(crate) fn lift_solution(
    p: &MilpProblem,
    node: &NodeLp,
    reduced_x: &[f64],
    assoc: &[f64],
) -> Vec<f64> {
    let nu = p.layout.num_users;
    let mut x = vec![0.0; p.variables.len()];
    for c in 0..p.layout.num_carriers {
        for u in 0..nu {
            let pair = c * nu + u;
            x[p.layout.association(c, u)] = assoc[pair];
            if let Some(lv) = node.lambda_var[pair] {
                let lam = reduced_x[lv];
                x[p.layout.product(c, u)] = lam;
                x[p.layout.fill(c, u)] = lam;
            }
        }
    }
    for u in 0..nu {
        x[p.layout.supply(u)] = reduced_x[node.supply_var[u]];
    }
    x[p.layout.psi()] = reduced_x[node.psi_var];
    x
}

/// Evaluate the model objective at a full-space point.
pub(crate) fn objective_value(p: &MilpProblem, x: &[f64]) -> f64 {
    p.objective.iter().map(|&(j, w)| w * x[j]).sum()
}

/// Check a full-space point against all bounds and rows, with tolerances
/// scaled to each row.
pub(crate) fn is_feasible(p: &MilpProblem, x: &[f64], tol: f64) -> bool {
    for (j, v) in p.variables.iter().enumerate() {
        if x[j] < v.lb - tol || x[j] > v.ub + tol {
            return false;
        }
        if v.binary && (x[j] - x[j].round()).abs() > tol {
            return false;
        }
    }
    for row in &p.constraints {
        let mut lhs = 0.0;
        let mut scale: f64 = row.rhs.abs();
        for &(j, w) in &row.terms {
            lhs += w * x[j];
            scale = scale.max((w * x[j]).abs());
        }
        let t = tol * scale.max(1.0);
        let ok = match row.sense {
            Sense::Le => lhs <= row.rhs + t,
            Sense::Eq => (lhs - row.rhs).abs() <= t,
            Sense::Ge => lhs >= row.rhs - t,
        };
        if !ok {
            return false;
        }
    }
    true
}
