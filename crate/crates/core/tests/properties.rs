//! Property-based checks: product-linearization exactness, the swap metric,
//! link-budget monotonicity, and schema round-trips.

use ca_core::milp::{linearize_product_rows, Sense, VarLayout};
use ca_core::{
    beam_gain, generate_preset, shannon_rate_bps, swap_distance, Beam, Matrix, Preset, Scenario,
};
use proptest::prelude::*;

fn rows_hold(a: f64, f: f64, lam: f64) -> bool {
    let layout = VarLayout {
        num_carriers: 1,
        num_users: 1,
    };
    let mut x = vec![0.0; 5];
    x[layout.association(0, 0)] = a;
    x[layout.fill(0, 0)] = f;
    x[layout.product(0, 0)] = lam;
    linearize_product_rows(&layout, 0, 0).iter().all(|row| {
        let lhs: f64 = row.terms.iter().map(|&(j, w)| w * x[j]).sum();
        match row.sense {
            Sense::Le => lhs <= row.rhs + 1e-12,
            Sense::Eq => (lhs - row.rhs).abs() <= 1e-12,
            Sense::Ge => lhs >= row.rhs - 1e-12,
        }
    })
}

#[test]
fn linearization_admits_exactly_the_product_points() {
    // exhaustive grid: a binary, f and lambda on a 0.05 lattice
    for a in [0.0, 1.0] {
        for fi in 0..=20 {
            for li in 0..=20 {
                let f = fi as f64 * 0.05;
                let lam = li as f64 * 0.05;
                let expected = (lam - a * f).abs() < 1e-12;
                assert_eq!(
                    rows_hold(a, f, lam),
                    expected,
                    "a={a} f={f} lambda={lam}"
                );
            }
        }
    }
}

fn binary_matrix(nc: usize, nu: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(proptest::collection::vec(0..=1u8, nu), nc).prop_map(|rows| {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(f64::from).collect())
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn swap_distance_is_a_metric(
        a in binary_matrix(3, 4),
        b in binary_matrix(3, 4),
        c in binary_matrix(3, 4),
    ) {
        let dab = swap_distance(&a, &b).unwrap();
        let dba = swap_distance(&b, &a).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(swap_distance(&a, &a).unwrap(), 0);
        prop_assert_eq!(dab == 0, a == b);
        let dac = swap_distance(&a, &c).unwrap();
        let dcb = swap_distance(&c, &b).unwrap();
        prop_assert!(dab <= dac + dcb);
    }

    #[test]
    fn beam_gain_is_non_increasing_off_axis(
        theta1 in 0.0f64..5.0,
        theta2 in 0.0f64..5.0,
    ) {
        let beam = Beam {
            id: 0,
            boresight_deg: [0.0, 0.0],
            peak_gain_dbi: 52.0,
            half_power_beamwidth_deg: 0.6,
            tx_power_w: 10.0,
        };
        let (lo, hi) = if theta1 <= theta2 { (theta1, theta2) } else { (theta2, theta1) };
        prop_assert!(beam_gain(&beam, lo) >= beam_gain(&beam, hi));
        prop_assert!(beam_gain(&beam, hi) >= beam.peak_gain_dbi - 40.0 - 1e-12);
    }

    #[test]
    fn shannon_rate_is_monotone_in_sinr_and_bandwidth(
        bw in 1e6f64..100e6,
        sinr1 in 0.0f64..1000.0,
        sinr2 in 0.0f64..1000.0,
    ) {
        let (lo, hi) = if sinr1 <= sinr2 { (sinr1, sinr2) } else { (sinr2, sinr1) };
        prop_assert!(shannon_rate_bps(bw, 0.2, lo) <= shannon_rate_bps(bw, 0.2, hi));
        prop_assert!(shannon_rate_bps(2.0 * bw, 0.2, hi) >= shannon_rate_bps(bw, 0.2, hi));
    }

    #[test]
    fn scenario_json_round_trips(seed in 0u64..50) {
        let gen = generate_preset(Preset::Tiny, seed);
        let text = gen.scenario.to_json();
        let back = Scenario::from_json(&text).unwrap();
        prop_assert_eq!(back, gen.scenario);
    }
}
