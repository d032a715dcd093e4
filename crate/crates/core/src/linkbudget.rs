//! Synthetic downlink budget: Gaussian beam pattern, free-space path loss,
//! optional co-channel interference, and the achievable-rate matrix derived
//! from them when the scenario does not carry one.

use crate::model::{Beam, RateMatrix, Scenario};
use serde::{Deserialize, Serialize};

const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
/// Boltzmann constant in dBW/K/Hz.
const BOLTZMANN_DBW: f64 = -228.599;

/// Co-channel interference handling for the rate computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceModel {
    None,
    Cochannel,
}

/// Link-budget inputs shared by all carriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub downlink_freq_hz: f64,
    /// Defaults to the GEO slant range, 35,786 km.
    pub slant_range_m: f64,
    pub terminal_g_over_t_db_k: f64,
    /// Pulse shaping roll-off, in [0, 1).
    pub rolloff: f64,
    /// A carrier is eligible for a user only if its received power is within
    /// this many dB of the user's best carrier.
    pub eligibility_gain_window_db: f64,
    pub interference_model: InterferenceModel,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            downlink_freq_hz: 19.5e9,
            slant_range_m: 35_786_000.0,
            terminal_g_over_t_db_k: 20.0,
            rolloff: 0.2,
            eligibility_gain_window_db: 15.0,
            interference_model: InterferenceModel::Cochannel,
        }
    }
}

/// Gaussian beam pattern: `G_peak - 12 (theta / theta_3dB)^2` dB, floored
/// 40 dB below the peak (a typical far-sidelobe level). `theta_3dB` is the
/// full half-power beamwidth, so the -3 dB point sits at `theta_3dB / 2`.
pub fn beam_gain(beam: &Beam, offaxis_deg: f64) -> f64 {
    let ratio = offaxis_deg / beam.half_power_beamwidth_deg;
    let g = beam.peak_gain_dbi - 12.0 * ratio * ratio;
    g.max(beam.peak_gain_dbi - 40.0)
}

/// Free-space path loss in dB.
pub fn free_space_path_loss_db(freq_hz: f64, range_m: f64) -> f64 {
    let wavelength = SPEED_OF_LIGHT_M_S / freq_hz;
    20.0 * (4.0 * std::f64::consts::PI * range_m / wavelength).log10()
}

/// Shannon rate over the roll-off-adjusted symbol rate, bit/s.
pub fn shannon_rate_bps(bandwidth_hz: f64, rolloff: f64, sinr_linear: f64) -> f64 {
    bandwidth_hz / (1.0 + rolloff) * (1.0 + sinr_linear).log2()
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Received carrier power at the user in dBW: per-carrier share of the beam
/// transmit power, beam gain toward the user, minus path loss. The beam
/// power is split evenly across the beam's carriers.
fn received_power_dbw(s: &Scenario, carrier_idx: usize, user_idx: usize) -> f64 {
    let c = &s.carriers[carrier_idx];
    let u = &s.users[user_idx];
    let beam_pos = s
        .beams
        .iter()
        .position(|b| b.id == c.beam_id)
        .expect("validated scenario: carrier beam exists");
    let beam = &s.beams[beam_pos];
    let carriers_in_beam = s.carriers.iter().filter(|k| k.beam_id == c.beam_id).count();
    let power_dbw = 10.0 * (beam.tx_power_w / carriers_in_beam as f64).log10();
    let gain = beam_gain(beam, u.position[beam_pos]);
    let fspl = free_space_path_loss_db(c.center_freq_hz, s.link.slant_range_m);
    power_dbw + gain - fspl
}

/// Compute the achievable-rate matrix from the synthetic link budget.
///
/// For each (carrier, user): SINR from the received carrier power, terminal
/// G/T and thermal noise over the carrier bandwidth, plus co-channel
/// interference from other beams' carriers at the same center frequency when
/// enabled. Carriers received more than the eligibility window below the
/// user's best carrier get rate 0.
pub fn compute_rate_matrix(s: &Scenario) -> RateMatrix {
    let nc = s.carriers.len();
    let nu = s.users.len();
    let mut rates = RateMatrix::zeros(nc, nu);

    for u in 0..nu {
        let rx: Vec<f64> = (0..nc).map(|c| received_power_dbw(s, c, u)).collect();
        let best = rx.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for c in 0..nc {
            if rx[c] < best - s.link.eligibility_gain_window_db {
                continue; // ineligible: rate stays 0
            }
            let carrier = &s.carriers[c];
            let noise_dbw = BOLTZMANN_DBW - s.link.terminal_g_over_t_db_k
                + 10.0 * carrier.bandwidth_hz.log10();
            let noise_lin = db_to_linear(noise_dbw);
            let mut interference_lin = 0.0;
            if s.link.interference_model == InterferenceModel::Cochannel {
                for k in 0..nc {
                    if k != c
                        && s.carriers[k].beam_id != carrier.beam_id
                        && s.carriers[k].center_freq_hz == carrier.center_freq_hz
                    {
                        interference_lin += db_to_linear(received_power_dbw(s, k, u));
                    }
                }
            }
            let sinr = db_to_linear(rx[c]) / (noise_lin + interference_lin);
            rates.set(
                c,
                u,
                shannon_rate_bps(carrier.bandwidth_hz, s.link.rolloff, sinr),
            );
        }
    }
    rates
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Beam, Carrier, Scenario, Sla, SolverParams, User, SCHEMA_VERSION};

    fn beam() -> Beam {
        Beam {
            id: 0,
            boresight_deg: [0.0, 0.0],
            peak_gain_dbi: 50.0,
            half_power_beamwidth_deg: 0.8,
            tx_power_w: 10.0,
        }
    }

    #[test]
    fn boresight_gain_is_peak() {
        assert_eq!(beam_gain(&beam(), 0.0), 50.0);
    }

    #[test]
    fn half_power_point_is_3db_down() {
        let g = beam_gain(&beam(), 0.4);
        assert!((g - 47.0).abs() < 1e-12);
    }

    #[test]
    fn far_off_axis_hits_floor() {
        assert_eq!(beam_gain(&beam(), 30.0), 10.0);
    }

    #[test]
    fn fspl_matches_geo_ka_band_value() {
        let fspl = free_space_path_loss_db(19.5e9, 35_786_000.0);
        assert!((fspl - 209.3).abs() < 0.05, "fspl = {fspl}");
    }

    #[test]
    fn shannon_rate_matches_hand_value() {
        // SINR = 10 dB, 54 MHz, alpha = 0.2 -> (54e6/1.2) * log2(11)
        let r = shannon_rate_bps(54e6, 0.2, 10.0);
        assert!((r - 155.674e6).abs() < 0.01e6, "rate = {r}");
    }

    fn two_beam_scenario(interference: InterferenceModel) -> Scenario {
        let beams = vec![
            Beam {
                id: 0,
                boresight_deg: [0.0, 0.0],
                peak_gain_dbi: 52.0,
                half_power_beamwidth_deg: 0.6,
                tx_power_w: 10.0,
            },
            Beam {
                id: 1,
                boresight_deg: [0.65, 0.0],
                peak_gain_dbi: 52.0,
                half_power_beamwidth_deg: 0.6,
                tx_power_w: 10.0,
            },
        ];
        // same center frequency in both beams -> co-channel pair
        let carriers = vec![
            Carrier {
                id: 0,
                transponder_id: 0,
                beam_id: 0,
                bandwidth_hz: 54e6,
                center_freq_hz: 19.5e9,
            },
            Carrier {
                id: 1,
                transponder_id: 1,
                beam_id: 1,
                bandwidth_hz: 54e6,
                center_freq_hz: 19.5e9,
            },
        ];
        let users = vec![User {
            id: 0,
            beam_id: 0,
            position: vec![0.1, 0.55],
            demand_bps: 50e6,
            sla: Sla::Standard,
            max_carriers: 1,
        }];
        Scenario {
            schema: SCHEMA_VERSION,
            beams,
            carriers,
            users,
            link: LinkParams {
                interference_model: interference,
                ..LinkParams::default()
            },
            solver: SolverParams::default(),
            prev_association: None,
            rate_matrix_override: None,
        }
    }

    #[test]
    fn cochannel_never_exceeds_interference_free() {
        let clean = compute_rate_matrix(&two_beam_scenario(InterferenceModel::None));
        let noisy = compute_rate_matrix(&two_beam_scenario(InterferenceModel::Cochannel));
        for ((rc, ru), v) in noisy.iter() {
            assert!(v <= clean.get(rc, ru) + 1e-9);
        }
    }

    #[test]
    fn rate_is_monotone_in_offaxis_angle() {
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let mut s = two_beam_scenario(InterferenceModel::None);
            s.users[0].position[0] = 0.05 * i as f64;
            let r = compute_rate_matrix(&s).get(0, 0);
            assert!(r <= prev + 1e-9);
            prev = r;
        }
    }

    #[test]
    fn user_outside_window_gets_zero_rate() {
        let mut s = two_beam_scenario(InterferenceModel::None);
        // user sits on beam 0's boresight, far from beam 1
        s.users[0].position = vec![0.0, 5.0];
        let r = compute_rate_matrix(&s);
        assert!(r.get(0, 0) > 0.0);
        assert_eq!(r.get(1, 0), 0.0);
    }

    #[test]
    fn wider_carrier_never_loses_rate() {
        let mut narrow = two_beam_scenario(InterferenceModel::None);
        narrow.carriers.truncate(1);
        narrow.users[0].position = vec![0.1];
        narrow.beams.truncate(1);
        let r1 = compute_rate_matrix(&narrow).get(0, 0);
        let mut wide = narrow.clone();
        wide.carriers[0].bandwidth_hz *= 2.0;
        let r2 = compute_rate_matrix(&wide).get(0, 0);
        assert!(r2 >= r1);
    }
}
