//! Domain types for the multibeam satellite system: beams, carriers, users,
//! scenario files, and the dense matrices shared by the allocation pipeline.

use crate::linkbudget::LinkParams;
use serde::{Deserialize, Serialize};

/// Current scenario / result file schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// One spot beam of the satellite payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub id: usize,
    /// Boresight pointing in a flat angular plane (degrees). Used only by
    /// scenario generation; rate computation works from per-user off-axis
    /// angles directly.
    pub boresight_deg: [f64; 2],
    pub peak_gain_dbi: f64,
    /// Full half-power beamwidth in degrees (the -3 dB point sits at half
    /// this angle off boresight).
    pub half_power_beamwidth_deg: f64,
    pub tx_power_w: f64,
}

/// One component carrier within a transponder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    pub id: usize,
    pub transponder_id: usize,
    pub beam_id: usize,
    pub bandwidth_hz: f64,
    pub center_freq_hz: f64,
}

/// Service level agreement class of a terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sla {
    Premium,
    Standard,
}

/// A user terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: usize,
    pub beam_id: usize,
    /// Off-axis angle from each beam's boresight, degrees, indexed by beam
    /// position in `Scenario::beams`.
    pub position: Vec<f64>,
    pub demand_bps: f64,
    pub sla: Sla,
    /// Carriers this terminal can decode simultaneously. Always 1 for
    /// standard SLA.
    pub max_carriers: usize,
}

/// Swap budget between consecutive allocation epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapBudget {
    Limit(usize),
    Unconstrained,
}

impl Serialize for SwapBudget {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SwapBudget::Limit(n) => s.serialize_u64(*n as u64),
            SwapBudget::Unconstrained => s.serialize_str("unconstrained"),
        }
    }
}

impl<'de> Deserialize<'de> for SwapBudget {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(SwapBudget::Limit(n as usize)),
            Raw::Str(s) if s == "unconstrained" => Ok(SwapBudget::Unconstrained),
            Raw::Str(s) => Err(D::Error::custom(format!(
                "swap_budget_q must be a count or \"unconstrained\", got {s:?}"
            ))),
        }
    }
}

/// Solver configuration carried inside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub swap_budget_q: SwapBudget,
    pub mip_gap: f64,
    pub time_limit_s: f64,
    /// Cap supply at demand (and psi at 1).
    pub no_oversupply: bool,
    /// After maximizing psi, re-optimize total supply at fixed psi.
    pub lexicographic_phase2: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            swap_budget_q: SwapBudget::Unconstrained,
            mip_gap: 1e-6,
            time_limit_s: 60.0,
            no_oversupply: true,
            lexicographic_phase2: false,
        }
    }
}

/// Dense row-major matrix with carriers as rows and users as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Achievable rate per (carrier, user) at fill rate 1, bit/s.
pub type RateMatrix = Matrix;
/// Binary user-carrier association.
pub type AssociationMatrix = Matrix;
/// Fraction of each carrier's bandwidth assigned to each user.
pub type FillRateMatrix = Matrix;
/// Elementwise product a*f kept by the linearization.
pub type LambdaMatrix = Matrix;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err("matrix rows have inconsistent lengths".into());
        }
        Ok(Matrix {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, &v)| ((i / cols, i % cols), v))
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect()
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Full problem instance: system geometry, users, demands, and solve options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: u32,
    pub beams: Vec<Beam>,
    pub carriers: Vec<Carrier>,
    pub users: Vec<User>,
    pub link: LinkParams,
    pub solver: SolverParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prev_association: Option<AssociationMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_matrix_override: Option<RateMatrix>,
}

impl Scenario {
    pub fn num_carriers(&self) -> usize {
        self.carriers.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A single broken invariant found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

fn violation(entity: impl Into<String>, rule: impl Into<String>) -> Violation {
    Violation {
        entity: entity.into(),
        rule: rule.into(),
    }
}

/// Check every type invariant of the scenario. Violations are data, not
/// errors: an empty list means the scenario is well formed.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();

    if s.schema != SCHEMA_VERSION {
        out.push(violation(
            "scenario",
            format!("schema must be {SCHEMA_VERSION}, got {}", s.schema),
        ));
    }

    let mut beam_ids = std::collections::BTreeSet::new();
    for b in &s.beams {
        if !beam_ids.insert(b.id) {
            out.push(violation(format!("beam {}", b.id), "beam ids must be unique"));
        }
        if !(b.half_power_beamwidth_deg > 0.0) {
            out.push(violation(
                format!("beam {}", b.id),
                "half-power beamwidth must be > 0",
            ));
        }
        if !(b.tx_power_w > 0.0) {
            out.push(violation(format!("beam {}", b.id), "tx power must be > 0"));
        }
    }

    let mut carrier_ids = std::collections::BTreeSet::new();
    for c in &s.carriers {
        if !carrier_ids.insert(c.id) {
            out.push(violation(
                format!("carrier {}", c.id),
                "carrier ids must be unique",
            ));
        }
        if !(c.bandwidth_hz > 0.0) {
            out.push(violation(
                format!("carrier {}", c.id),
                "bandwidth_hz must be > 0",
            ));
        }
        if !beam_ids.contains(&c.beam_id) {
            out.push(violation(
                format!("carrier {}", c.id),
                format!("beam_id {} does not exist", c.beam_id),
            ));
        }
    }

    let mut user_ids = std::collections::BTreeSet::new();
    for u in &s.users {
        let entity = format!("user {}", u.id);
        if !user_ids.insert(u.id) {
            out.push(violation(&entity, "user ids must be unique"));
        }
        if !beam_ids.contains(&u.beam_id) {
            out.push(violation(
                &entity,
                format!("beam_id {} does not exist", u.beam_id),
            ));
        }
        if u.position.len() != s.beams.len() {
            out.push(violation(
                &entity,
                format!(
                    "position must list one off-axis angle per beam ({} beams, {} angles)",
                    s.beams.len(),
                    u.position.len()
                ),
            ));
        }
        if !(u.demand_bps >= 0.0) {
            out.push(violation(&entity, "demand_bps must be >= 0"));
        }
        if u.max_carriers < 1 {
            out.push(violation(&entity, "max_carriers must be >= 1"));
        }
        if u.sla == Sla::Standard && u.max_carriers != 1 {
            out.push(violation(&entity, "standard SLA must have max_carriers=1"));
        }
    }

    if !(s.link.slant_range_m > 0.0) {
        out.push(violation("link", "slant_range_m must be > 0"));
    }
    if !(0.0..1.0).contains(&s.link.rolloff) {
        out.push(violation("link", "rolloff must be in [0, 1)"));
    }
    if !(s.link.downlink_freq_hz > 0.0) {
        out.push(violation("link", "downlink_freq_hz must be > 0"));
    }

    if !(s.solver.mip_gap >= 0.0) {
        out.push(violation("solver", "mip_gap must be >= 0"));
    }
    if !(s.solver.time_limit_s > 0.0) {
        out.push(violation("solver", "time_limit_s must be > 0"));
    }

    let shape = (s.carriers.len(), s.users.len());
    if let Some(prev) = &s.prev_association {
        if prev.shape() != shape {
            out.push(violation(
                "prev_association",
                format!("shape {:?} must match (carriers, users) {:?}", prev.shape(), shape),
            ));
        }
        if !prev.is_binary() {
            out.push(violation("prev_association", "association must be binary"));
        }
    }
    if let Some(r) = &s.rate_matrix_override {
        if r.shape() != shape {
            out.push(violation(
                "rate_matrix_override",
                format!("shape {:?} must match (carriers, users) {:?}", r.shape(), shape),
            ));
        }
        if r.iter().any(|(_, v)| !(v >= 0.0)) {
            out.push(violation(
                "rate_matrix_override",
                "all entries must be >= 0",
            ));
        }
    }

    out
}

/// Number of association entries that differ between two epochs,
/// `sum |a_next - a_prev|`.
pub fn swap_distance(
    a_prev: &AssociationMatrix,
    a_next: &AssociationMatrix,
) -> Result<usize, crate::CaError> {
    if a_prev.shape() != a_next.shape() {
        return Err(crate::CaError::ShapeMismatch {
            expected: a_prev.shape(),
            got: a_next.shape(),
        });
    }
    Ok(a_prev
        .data
        .iter()
        .zip(&a_next.data)
        .filter(|(a, b)| (*a - *b).abs() > 0.5)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkbudget::InterferenceModel;

    pub(crate) fn toy_scenario() -> Scenario {
        let beams = vec![Beam {
            id: 0,
            boresight_deg: [0.0, 0.0],
            peak_gain_dbi: 52.0,
            half_power_beamwidth_deg: 0.6,
            tx_power_w: 10.0,
        }];
        let carriers = (0..2)
            .map(|i| Carrier {
                id: i,
                transponder_id: 0,
                beam_id: 0,
                bandwidth_hz: 54e6,
                center_freq_hz: 19.5e9 + i as f64 * 54e6,
            })
            .collect();
        let users = (0..2)
            .map(|i| User {
                id: i,
                beam_id: 0,
                position: vec![0.1 * i as f64],
                demand_bps: 50e6,
                sla: if i == 0 { Sla::Premium } else { Sla::Standard },
                max_carriers: if i == 0 { 2 } else { 1 },
            })
            .collect();
        Scenario {
            schema: SCHEMA_VERSION,
            beams,
            carriers,
            users,
            link: LinkParams {
                downlink_freq_hz: 19.5e9,
                slant_range_m: 35_786_000.0,
                terminal_g_over_t_db_k: 20.0,
                rolloff: 0.2,
                eligibility_gain_window_db: 15.0,
                interference_model: InterferenceModel::None,
            },
            solver: SolverParams::default(),
            prev_association: None,
            rate_matrix_override: None,
        }
    }

    #[test]
    fn well_formed_scenario_has_no_violations() {
        assert_eq!(validate_scenario(&toy_scenario()), vec![]);
    }

    #[test]
    fn standard_user_with_two_carriers_is_rejected() {
        let mut s = toy_scenario();
        s.users[1].max_carriers = 2;
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.rule.contains("standard SLA must have max_carriers=1")));
    }

    #[test]
    fn non_binary_prev_association_is_rejected() {
        let mut s = toy_scenario();
        let mut prev = Matrix::zeros(2, 2);
        prev.set(0, 0, 0.5);
        s.prev_association = Some(prev);
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.rule.contains("association must be binary")));
    }

    #[test]
    fn swap_distance_counts_flipped_entries() {
        let a = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(swap_distance(&a, &b).unwrap(), 2);
        assert_eq!(swap_distance(&a, &a).unwrap(), 0);
        let z = Matrix::zeros(2, 2);
        let o = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(swap_distance(&z, &o).unwrap(), 4);
    }

    #[test]
    fn swap_distance_rejects_shape_mismatch() {
        let a = Matrix::zeros(2, 2);
        let b = Matrix::zeros(2, 3);
        assert!(swap_distance(&a, &b).is_err());
    }

    #[test]
    fn scenario_round_trips_through_json() {
        let mut s = toy_scenario();
        s.prev_association =
            Some(Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let text = s.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn swap_budget_serializes_as_count_or_keyword() {
        let a = serde_json::to_string(&SwapBudget::Limit(3)).unwrap();
        assert_eq!(a, "3");
        let b = serde_json::to_string(&SwapBudget::Unconstrained).unwrap();
        assert_eq!(b, "\"unconstrained\"");
        assert_eq!(
            serde_json::from_str::<SwapBudget>("3").unwrap(),
            SwapBudget::Limit(3)
        );
        assert_eq!(
            serde_json::from_str::<SwapBudget>("\"unconstrained\"").unwrap(),
            SwapBudget::Unconstrained
        );
    }
}
