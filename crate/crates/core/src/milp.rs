//! Construction of the max-min carrier-aggregation MILP: association,
//! fill-rate and product variables, the demand-ratio slack, and the
//! linearized constraint system, as a solver-agnostic linear model.

use crate::model::{AssociationMatrix, RateMatrix, Scenario, SwapBudget};
use crate::CaError;

/// Role of a variable in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Binary association a_{c,u}.
    Association(usize, usize),
    /// Fill rate f_{c,u} in [0,1].
    Fill(usize, usize),
    /// Product variable lambda_{c,u} = a*f.
    Product(usize, usize),
    /// Per-user supply s_u, bit/s.
    Supply(usize),
    /// Max-min slack psi.
    Psi,
}

/// Variable bounds and integrality.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub lb: f64,
    pub ub: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Role of a constraint row, used for reporting and for the solver's
/// structure-aware node relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// s_u = sum_c lambda_{c,u} r_{c,u}.
    SupplyDef(usize),
    /// s_u >= psi d_u.
    DemandRatio(usize),
    /// sum_c a_{c,u} <= max_carriers(u).
    CarrierLimit(usize),
    /// sum_u f_{c,u} <= 1.
    FillCapacity(usize),
    /// s_u <= d_u (no-oversupply flag).
    SupplyCap(usize),
    /// L1 distance to the previous association <= Q.
    SwapBudget,
    /// lambda <= a.
    ProductUpperA(usize, usize),
    /// lambda >= 0.
    ProductNonneg(usize, usize),
    /// lambda <= f.
    ProductUpperF(usize, usize),
    /// lambda >= f - (1 - a).
    ProductLower(usize, usize),
    /// Extra row added by callers (e.g. the lexicographic second phase).
    Extra,
}

/// Sparse linear row.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub kind: RowKind,
}

/// Fixed variable ordering: a (carrier-major), f, lambda, s, psi.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub num_carriers: usize,
    pub num_users: usize,
}

impl VarLayout {
    pub fn association(&self, c: usize, u: usize) -> usize {
        c * self.num_users + u
    }

    pub fn fill(&self, c: usize, u: usize) -> usize {
        self.num_carriers * self.num_users + c * self.num_users + u
    }

    pub fn product(&self, c: usize, u: usize) -> usize {
        2 * self.num_carriers * self.num_users + c * self.num_users + u
    }

    pub fn supply(&self, u: usize) -> usize {
        3 * self.num_carriers * self.num_users + u
    }

    pub fn psi(&self) -> usize {
        3 * self.num_carriers * self.num_users + self.num_users
    }

    pub fn total(&self) -> usize {
        3 * self.num_carriers * self.num_users + self.num_users + 1
    }

    pub fn kind(&self, idx: usize) -> VarKind {
        let block = self.num_carriers * self.num_users;
        if idx < block {
            VarKind::Association(idx / self.num_users, idx % self.num_users)
        } else if idx < 2 * block {
            let i = idx - block;
            VarKind::Fill(i / self.num_users, i % self.num_users)
        } else if idx < 3 * block {
            let i = idx - 2 * block;
            VarKind::Product(i / self.num_users, i % self.num_users)
        } else if idx < 3 * block + self.num_users {
            VarKind::Supply(idx - 3 * block)
        } else {
            VarKind::Psi
        }
    }

    /// LP-format name: `a_c_u`, `f_c_u`, `l_c_u`, `s_u`, `psi`.
    pub fn name(&self, idx: usize) -> String {
        match self.kind(idx) {
            VarKind::Association(c, u) => format!("a_{c}_{u}"),
            VarKind::Fill(c, u) => format!("f_{c}_{u}"),
            VarKind::Product(c, u) => format!("l_{c}_{u}"),
            VarKind::Supply(u) => format!("s_{u}"),
            VarKind::Psi => "psi".to_string(),
        }
    }
}

/// Solver-agnostic mixed-integer linear model; the objective is maximized.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem {
    pub layout: VarLayout,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
}

impl MilpProblem {
    pub fn num_binary(&self) -> usize {
        self.variables.iter().filter(|v| v.binary).count()
    }
}

/// Four rows that force `lambda = a * f` at binary `a` with `f` in [0,1].
pub fn linearize_product_rows(layout: &VarLayout, c: usize, u: usize) -> [Constraint; 4] {
    let a = layout.association(c, u);
    let f = layout.fill(c, u);
    let l = layout.product(c, u);
    [
        Constraint {
            terms: vec![(l, 1.0), (a, -1.0)],
            sense: Sense::Le,
            rhs: 0.0,
            kind: RowKind::ProductUpperA(c, u),
        },
        Constraint {
            terms: vec![(l, 1.0)],
            sense: Sense::Ge,
            rhs: 0.0,
            kind: RowKind::ProductNonneg(c, u),
        },
        Constraint {
            terms: vec![(l, 1.0), (f, -1.0)],
            sense: Sense::Le,
            rhs: 0.0,
            kind: RowKind::ProductUpperF(c, u),
        },
        Constraint {
            terms: vec![(l, 1.0), (f, -1.0), (a, -1.0)],
            sense: Sense::Ge,
            rhs: -1.0,
            kind: RowKind::ProductLower(c, u),
        },
    ]
}

/// Single linear row equivalent to `sum |a - a_prev| <= q` for constant
/// binary `a_prev`: entries with prev 0 contribute `a`, entries with prev 1
/// contribute `1 - a`.
pub fn linearize_swap_budget(
    layout: &VarLayout,
    prev: &AssociationMatrix,
    q: usize,
) -> Constraint {
    let mut terms = Vec::new();
    let mut rhs = q as f64;
    for c in 0..layout.num_carriers {
        for u in 0..layout.num_users {
            if prev.get(c, u) > 0.5 {
                terms.push((layout.association(c, u), -1.0));
                rhs -= 1.0;
            } else {
                terms.push((layout.association(c, u), 1.0));
            }
        }
    }
    Constraint {
        terms,
        sense: Sense::Le,
        rhs,
        kind: RowKind::SwapBudget,
    }
}

/// Build the full MILP from a scenario and its rate matrix.
pub fn build_milp(s: &Scenario, rates: &RateMatrix) -> Result<MilpProblem, CaError> {
    let nc = s.carriers.len();
    let nu = s.users.len();
    if rates.shape() != (nc, nu) {
        return Err(CaError::ShapeMismatch {
            expected: (nc, nu),
            got: rates.shape(),
        });
    }
    let layout = VarLayout {
        num_carriers: nc,
        num_users: nu,
    };

    let mut variables = Vec::with_capacity(layout.total());
    for c in 0..nc {
        for u in 0..nu {
            // ineligible pairs stay in the model with a pinned to 0
            let ub = if rates.get(c, u) > 0.0 { 1.0 } else { 0.0 };
            variables.push(Variable {
                lb: 0.0,
                ub,
                binary: true,
            });
        }
    }
    for _ in 0..2 * nc * nu {
        variables.push(Variable {
            lb: 0.0,
            ub: 1.0,
            binary: false,
        });
    }
    for _ in 0..nu {
        variables.push(Variable {
            lb: 0.0,
            ub: f64::INFINITY,
            binary: false,
        });
    }
    variables.push(Variable {
        lb: 0.0,
        ub: if s.solver.no_oversupply { 1.0 } else { f64::INFINITY },
        binary: false,
    });

    let mut constraints = Vec::new();
    // C1: s_u - sum_c lambda r = 0
    for u in 0..nu {
        let mut terms = vec![(layout.supply(u), 1.0)];
        for c in 0..nc {
            let r = rates.get(c, u);
            if r > 0.0 {
                terms.push((layout.product(c, u), -r));
            }
        }
        constraints.push(Constraint {
            terms,
            sense: Sense::Eq,
            rhs: 0.0,
            kind: RowKind::SupplyDef(u),
        });
    }
    // C2: s_u - psi d_u >= 0, only for users with positive demand
    for (u, user) in s.users.iter().enumerate() {
        if user.demand_bps > 0.0 {
            constraints.push(Constraint {
                terms: vec![(layout.supply(u), 1.0), (layout.psi(), -user.demand_bps)],
                sense: Sense::Ge,
                rhs: 0.0,
                kind: RowKind::DemandRatio(u),
            });
        }
    }
    // C3: per-user carrier count
    for (u, user) in s.users.iter().enumerate() {
        constraints.push(Constraint {
            terms: (0..nc).map(|c| (layout.association(c, u), 1.0)).collect(),
            sense: Sense::Le,
            rhs: user.max_carriers as f64,
            kind: RowKind::CarrierLimit(u),
        });
    }
    // C4: per-carrier fill budget
    for c in 0..nc {
        constraints.push(Constraint {
            terms: (0..nu).map(|u| (layout.fill(c, u), 1.0)).collect(),
            sense: Sense::Le,
            rhs: 1.0,
            kind: RowKind::FillCapacity(c),
        });
    }
    // supply caps under no_oversupply
    if s.solver.no_oversupply {
        for (u, user) in s.users.iter().enumerate() {
            constraints.push(Constraint {
                terms: vec![(layout.supply(u), 1.0)],
                sense: Sense::Le,
                rhs: user.demand_bps,
                kind: RowKind::SupplyCap(u),
            });
        }
    }
    // C7, only when a previous association constrains this epoch
    if let (Some(prev), SwapBudget::Limit(q)) = (&s.prev_association, s.solver.swap_budget_q) {
        if prev.shape() != (nc, nu) {
            return Err(CaError::ShapeMismatch {
                expected: (nc, nu),
                got: prev.shape(),
            });
        }
        constraints.push(linearize_swap_budget(&layout, prev, q));
    }
    // C8: product linearization, four rows per pair
    for c in 0..nc {
        for u in 0..nu {
            constraints.extend(linearize_product_rows(&layout, c, u));
        }
    }

    Ok(MilpProblem {
        layout,
        variables,
        constraints,
        objective: vec![(layout.psi(), 1.0)],
    })
}
