use proptest::prelude::*;

use fblab::elias::{elias_analytic_mse, EnergySchedule};
use fblab::lowerbound::{
    binary_exact_psi, binary_lower_closed, binary_lower_recursive, binary_lower_relaxed,
    mary_lower, partition_messages,
};
use fblab::numerics::{q, tower_g, TowerReal};
use fblab::sk::{capacity, SkParams};
use fblab::twophase::{phi, plan_finite, twophase_upper_bound, BETA};

fn rate_in_gap(snr: f64, frac: f64) -> f64 {
    frac * capacity(snr)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn uniform_schedule_minimises_mse(weights in prop::collection::vec(0.01f64..10.0, 1..16), snr in 0.01f64..20.0) {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let energies: Vec<f64> = weights.iter().map(|w| w / total * n as f64 * snr).collect();
        let any = EnergySchedule::new(energies).unwrap();
        let uniform = EnergySchedule::uniform(n, snr);
        prop_assert!(elias_analytic_mse(1.0, &uniform) <= elias_analytic_mse(1.0, &any) * (1.0 + 1e-12));
    }

    #[test]
    fn energy_split_spends_the_budget(n in 1usize..500, snr in 0.001f64..100.0, m in 2u64..1000) {
        let p = SkParams::with_m(n, snr, m).unwrap();
        prop_assert!(p.s1 >= 0.0 && p.s0 > 0.0);
        let spent = p.s0 + (n as f64 - 1.0) * p.s1;
        prop_assert!((spent - n as f64 * snr).abs() <= 1e-9 * n as f64 * snr);
    }

    #[test]
    fn plan_leaves_room_for_refinement(n in 20usize..20_000, snr in 0.2f64..20.0, frac in 0.05f64..0.9) {
        let rate = rate_in_gap(snr, frac);
        if let Ok(plan) = plan_finite(n, snr, rate) {
            prop_assert!(plan.n1 + plan.n2 == n);
            prop_assert!(plan.nu_n >= plan.nu_star);
            prop_assert!(phi(plan.nu_n, snr).unwrap() >= rate + BETA / n as f64 - 1e-12);
        }
    }

    #[test]
    fn upper_bound_non_increasing_in_n(n in 20usize..5000, snr in 0.2f64..20.0, frac in 0.05f64..0.9) {
        let rate = rate_in_gap(snr, frac);
        let (Ok(a), Ok(b)) = (plan_finite(n, snr, rate), plan_finite(n + 1, snr, rate)) else {
            return Ok(());
        };
        prop_assert!(b.n2 >= a.n2);
        if a.feasible && b.feasible {
            prop_assert!(twophase_upper_bound(&b).unwrap() <= twophase_upper_bound(&a).unwrap());
        }
    }

    #[test]
    fn fano_floor_small_and_decreasing(n in 10usize..100_000, snr in 0.2f64..20.0, frac in 0.05f64..0.95) {
        let rate = rate_in_gap(snr, frac);
        if let (Ok(a), Ok(b)) = (mary_lower(n, snr, rate), mary_lower(n + 1, snr, rate)) {
            if n as f64 * rate >= 2.0 * (1.0 - std::f64::consts::LN_2) {
                prop_assert!(a.fano_floor <= 0.5);
            }
            prop_assert!(b.fano_floor < a.fano_floor);
        }
    }

    #[test]
    fn psi_lies_between_step_and_prior(phi_ in 1e-6f64..0.5, s in 0.0f64..50.0) {
        let psi = binary_exact_psi(phi_, s).unwrap();
        prop_assert!(psi <= phi_ * (1.0 + 1e-12));
        prop_assert!(psi >= phi_ * q((s / (2.0 * phi_)).sqrt()) * (1.0 - 1e-12));
    }

    #[test]
    fn binary_bounds_are_ordered(n in 1usize..6, snr in 0.05f64..10.0) {
        let recursive = binary_lower_recursive(&EnergySchedule::uniform(n, snr), 0.5).unwrap();
        let relaxed = binary_lower_relaxed(n, snr).unwrap();
        let closed = binary_lower_closed(n, snr).unwrap();
        prop_assert!(relaxed <= recursive);
        prop_assert!(closed <= relaxed);
    }

    #[test]
    fn tower_render_round_trips(k in 0u32..200, x in 1.0f64..50.0, neg in any::<bool>()) {
        let t = tower_g(k, x);
        let t = if neg { t.recip() } else { t };
        let back: TowerReal = t.render().parse().unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn moderate_values_round_trip(v in 1e-300f64..1e300) {
        let t = TowerReal::from_f64(v);
        let back: TowerReal = t.render().parse().unwrap();
        prop_assert_eq!(back.to_f64(), v);
    }

    #[test]
    fn partition_guarantee(weights in prop::collection::vec(0.0f64..1.0, 2..64)) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 0.0);
        let phis: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let split = partition_messages(&phis).unwrap();
        prop_assert!(split.satisfies_guarantee());
        prop_assert_eq!(split.side1.len() + split.side2.len(), phis.len());
    }
}
