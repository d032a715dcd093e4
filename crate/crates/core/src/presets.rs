//! Seeded scenario generators for the shipped example configurations: an
//! eight-beam system with the reference parameter set, a two-beam demand
//! evolution setup, and a tiny instance family small enough for the
//! enumeration oracle.

use crate::linkbudget::{InterferenceModel, LinkParams};
use crate::model::{
    Beam, Carrier, Matrix, Scenario, Sla, SolverParams, SwapBudget, User, SCHEMA_VERSION,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Shipped scenario family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 8 beams, 2 carriers each, 30-35 users per beam, 5% high demand.
    Paper8,
    /// 2 beams, 20 users each, two demand profiles for evolution runs.
    Evolve2,
    /// At most 4 carriers and 4 users with an explicit rate matrix, random
    /// previous association and swap budget; oracle-eligible.
    Tiny,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper8" => Ok(Preset::Paper8),
            "evolve2" => Ok(Preset::Evolve2),
            "tiny" => Ok(Preset::Tiny),
            other => Err(format!(
                "unknown preset {other:?}; expected paper8, evolve2 or tiny"
            )),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Preset::Paper8 => "paper8",
            Preset::Evolve2 => "evolve2",
            Preset::Tiny => "tiny",
        })
    }
}

/// A generated scenario plus, for evolution presets, the demand profiles
/// that accompany it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    pub scenario: Scenario,
    /// Present for presets meant for [`crate::evolve`]; the scenario's own
    /// demands equal the first profile.
    pub demand_profiles: Option<Vec<Vec<f64>>>,
}

const CARRIER_BW_HZ: f64 = 54e6;
const BASE_FREQ_HZ: f64 = 19.5e9;
/// Guard-banded carrier grid spacing.
const FREQ_STEP_HZ: f64 = 60e6;
const TX_POWER_W: f64 = 10.0;
const ROLLOFF: f64 = 0.2;
/// Carriers a premium terminal can aggregate.
const DELTA_MAX: usize = 2;

fn high_demand(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(100e6..=200e6)
}

fn low_demand(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(5e6..=30e6)
}

/// Uniform position in a beam footprint disk, returned as off-axis angles
/// to every beam boresight.
fn place_user(rng: &mut ChaCha8Rng, beams: &[Beam], home: usize, radius_deg: f64) -> Vec<f64> {
    let r = radius_deg * rng.gen::<f64>().sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    let x = beams[home].boresight_deg[0] + r * phi.cos();
    let y = beams[home].boresight_deg[1] + r * phi.sin();
    beams
        .iter()
        .map(|b| {
            let dx = x - b.boresight_deg[0];
            let dy = y - b.boresight_deg[1];
            (dx * dx + dy * dy).sqrt()
        })
        .collect()
}

/// Two carriers per beam on a four-color grid; neighbouring beams never
/// share a color, and the two carriers of one beam see different co-channel
/// beam sets.
fn grid_carriers(num_beams: usize) -> Vec<Carrier> {
    let mut carriers = Vec::with_capacity(2 * num_beams);
    for beam in 0..num_beams {
        for k in 0..2 {
            let color = (beam + 2 * k) % 4;
            carriers.push(Carrier {
                id: carriers.len(),
                transponder_id: beam,
                beam_id: beam,
                bandwidth_hz: CARRIER_BW_HZ,
                center_freq_hz: BASE_FREQ_HZ + color as f64 * FREQ_STEP_HZ,
            });
        }
    }
    carriers
}

/// Frequency plan for the eight-beam grid: colors are shared between
/// diagonal neighbours (0.85 deg apart, inside the sidelobe region), never
/// between direct neighbours, and the two carriers of a beam point at
/// partners on opposite sides. Carrier preference therefore changes across
/// each footprint, which spreads single-carrier terminals over both
/// carriers instead of piling them all onto one.
fn paper8_carriers() -> Vec<Carrier> {
    // beams laid out as two rows of four; colors per beam
    const COLORS: [[usize; 2]; 8] = [
        [4, 6], // (0,0)
        [0, 1], // (1,0)
        [2, 3], // (2,0)
        [5, 7], // (3,0)
        [0, 7], // (0,1)
        [2, 4], // (1,1)
        [1, 5], // (2,1)
        [3, 6], // (3,1)
    ];
    let mut carriers = Vec::with_capacity(16);
    for (beam, colors) in COLORS.iter().enumerate() {
        for &color in colors {
            carriers.push(Carrier {
                id: carriers.len(),
                transponder_id: beam,
                beam_id: beam,
                bandwidth_hz: CARRIER_BW_HZ,
                center_freq_hz: BASE_FREQ_HZ + color as f64 * FREQ_STEP_HZ,
            });
        }
    }
    carriers
}

fn gen_paper8(rng: &mut ChaCha8Rng) -> GeneratedScenario {
    let spacing = 0.6;
    let beams: Vec<Beam> = (0..8)
        .map(|i| Beam {
            id: i,
            boresight_deg: [
                (i % 4) as f64 * spacing - 1.5 * spacing,
                (i / 4) as f64 * spacing - 0.5 * spacing,
            ],
            peak_gain_dbi: 56.0,
            half_power_beamwidth_deg: 0.6,
            tx_power_w: TX_POWER_W,
        })
        .collect();
    let carriers = paper8_carriers();

    let mut users = Vec::new();
    for beam in 0..beams.len() {
        let count = rng.gen_range(30..=35);
        for _ in 0..count {
            let position = place_user(rng, &beams, beam, 0.3);
            let high = rng.gen::<f64>() < 0.05;
            let (demand, sla, max_carriers) = if high {
                (high_demand(rng), Sla::Premium, DELTA_MAX)
            } else {
                (low_demand(rng), Sla::Standard, 1)
            };
            users.push(User {
                id: users.len(),
                beam_id: beam,
                position,
                demand_bps: demand,
                sla,
                max_carriers,
            });
        }
    }

    GeneratedScenario {
        scenario: Scenario {
            schema: SCHEMA_VERSION,
            beams,
            carriers,
            users,
            link: LinkParams {
                downlink_freq_hz: BASE_FREQ_HZ,
                rolloff: ROLLOFF,
                terminal_g_over_t_db_k: 25.0,
                // keep each terminal on its home beam's carriers; a wide
                // window makes the assignment MILP far larger than needed
                eligibility_gain_window_db: 6.0,
                interference_model: InterferenceModel::Cochannel,
                ..LinkParams::default()
            },
            solver: SolverParams {
                swap_budget_q: SwapBudget::Unconstrained,
                // a few percent of slack lets the 260-user instance stop on
                // the gap criterion instead of the wall clock, which keeps
                // repeated runs identical
                mip_gap: 0.05,
                time_limit_s: 90.0,
                no_oversupply: true,
                lexicographic_phase2: true,
            },
            prev_association: None,
            rate_matrix_override: None,
        },
        demand_profiles: None,
    }
}

fn gen_evolve2(rng: &mut ChaCha8Rng) -> GeneratedScenario {
    let beams: Vec<Beam> = (0..2)
        .map(|i| Beam {
            id: i,
            boresight_deg: [i as f64 * 0.6 - 0.3, 0.0],
            peak_gain_dbi: 56.0,
            half_power_beamwidth_deg: 0.6,
            tx_power_w: TX_POWER_W,
        })
        .collect();
    let carriers = grid_carriers(2);

    let num_users = 40;
    let mut users = Vec::new();
    for id in 0..num_users {
        let beam = id % 2; // interleave so both beams hold 20 users
        let position = place_user(rng, &beams, beam, 0.3);
        // mostly single-carrier terminals: shifting demand then forces
        // re-association, which is what the swap budget is meant to limit
        let premium = id % 10 == 0;
        users.push(User {
            id,
            beam_id: beam,
            position,
            demand_bps: 0.0,
            sla: if premium { Sla::Premium } else { Sla::Standard },
            max_carriers: if premium { DELTA_MAX } else { 1 },
        });
    }

    // same low-demand floor in both profiles; the high-demand group sits in
    // beam 0 (even ids) first and flips to beam 1 (odd ids) in the second
    // profile, so terminals near the footprint overlap are worth moving
    let floor: Vec<f64> = (0..num_users).map(|_| low_demand(rng)).collect();
    let mut profile0 = floor.clone();
    for d in profile0.iter_mut().step_by(2).take(10) {
        *d = high_demand(rng);
    }
    let mut profile1 = floor;
    for d in profile1.iter_mut().skip(1).step_by(2).take(10) {
        *d = high_demand(rng);
    }
    for (user, &d) in users.iter_mut().zip(&profile0) {
        user.demand_bps = d;
    }

    GeneratedScenario {
        scenario: Scenario {
            schema: SCHEMA_VERSION,
            beams,
            carriers,
            users,
            link: LinkParams {
                downlink_freq_hz: BASE_FREQ_HZ,
                rolloff: ROLLOFF,
                terminal_g_over_t_db_k: 25.0,
                interference_model: InterferenceModel::Cochannel,
                ..LinkParams::default()
            },
            solver: SolverParams {
                swap_budget_q: SwapBudget::Unconstrained,
                // loose enough for the unconstrained first epoch to stop on
                // the gap criterion rather than the wall clock
                mip_gap: 5e-3,
                time_limit_s: 30.0,
                no_oversupply: true,
                lexicographic_phase2: true,
            },
            prev_association: None,
            rate_matrix_override: None,
        },
        demand_profiles: Some(vec![profile0, profile1]),
    }
}

fn gen_tiny(rng: &mut ChaCha8Rng) -> GeneratedScenario {
    let beams = vec![Beam {
        id: 0,
        boresight_deg: [0.0, 0.0],
        peak_gain_dbi: 52.0,
        half_power_beamwidth_deg: 0.6,
        tx_power_w: TX_POWER_W,
    }];
    let nc = rng.gen_range(2..=4usize);
    let nu = rng.gen_range(2..=4usize);
    let carriers: Vec<Carrier> = (0..nc)
        .map(|i| Carrier {
            id: i,
            transponder_id: i / 2,
            beam_id: 0,
            bandwidth_hz: CARRIER_BW_HZ,
            center_freq_hz: BASE_FREQ_HZ + (i % 4) as f64 * FREQ_STEP_HZ,
        })
        .collect();

    let mut users = Vec::new();
    for id in 0..nu {
        let premium = rng.gen::<f64>() < 0.5;
        let demand = if rng.gen::<f64>() < 0.1 {
            0.0
        } else {
            rng.gen_range(10e6..=120e6)
        };
        users.push(User {
            id,
            beam_id: 0,
            position: vec![0.3 * rng.gen::<f64>()],
            demand_bps: demand,
            sla: if premium { Sla::Premium } else { Sla::Standard },
            max_carriers: if premium { DELTA_MAX } else { 1 },
        });
    }

    let mut rates = Matrix::zeros(nc, nu);
    for c in 0..nc {
        for u in 0..nu {
            if rng.gen::<f64>() >= 0.15 {
                rates.set(c, u, rng.gen_range(40e6..=160e6));
            }
        }
    }

    // previous association respecting each user's carrier limit
    let mut prev = Matrix::zeros(nc, nu);
    for (u, user) in users.iter().enumerate() {
        let mut left = user.max_carriers;
        for c in 0..nc {
            if left > 0 && rng.gen::<f64>() < 0.3 {
                prev.set(c, u, 1.0);
                left -= 1;
            }
        }
    }
    let q = rng.gen_range(0..=4usize);

    GeneratedScenario {
        scenario: Scenario {
            schema: SCHEMA_VERSION,
            beams,
            carriers,
            users,
            link: LinkParams::default(),
            solver: SolverParams {
                swap_budget_q: SwapBudget::Limit(q),
                mip_gap: 1e-6,
                time_limit_s: 30.0,
                no_oversupply: rng.gen::<f64>() < 0.5,
                lexicographic_phase2: false,
            },
            prev_association: Some(prev),
            rate_matrix_override: Some(rates),
        },
        demand_profiles: None,
    }
}

/// Generate a shipped preset deterministically from a seed.
pub fn generate_preset(preset: Preset, seed: u64) -> GeneratedScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match preset {
        Preset::Paper8 => gen_paper8(&mut rng),
        Preset::Evolve2 => gen_evolve2(&mut rng),
        Preset::Tiny => gen_tiny(&mut rng),
    }
}
