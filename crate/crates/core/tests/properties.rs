use edusim_validation as support;

use edusim::decision::{completion_probability, preference, student_disposition, PreferenceInputs};
use edusim::economics::{consumption_premium, supplementary_grant, GrantSchedule};
use edusim::SimulationParams;
use proptest::prelude::*;

#[test]
fn grant_is_monotone_and_continuous_on_a_euro_grid() {
    support::grant_grid().unwrap();
}

#[test]
fn logistic_is_symmetric_and_increasing() {
    support::logistic_grid().unwrap();
}

#[test]
fn budget_identity_holds_across_a_full_run() {
    support::budget_identity_full_run(21).unwrap();
}

#[test]
fn classmates_are_reciprocal_over_a_thousand_placements() {
    support::classmate_reciprocity(1000, 22).unwrap();
}

#[test]
fn seeded_runs_are_byte_identical() {
    support::seeded_determinism().unwrap();
}

#[test]
fn agents_are_conserved_every_tick() {
    support::conservation_full_run(23).unwrap();
}

#[test]
fn disposition_grid() {
    let kappas = [0.5, 1.0, 1.8, 2.0];
    for &k in &kappas {
        for g in 1..10 {
            assert!(student_disposition(g as f64, k) < student_disposition(g as f64 + 1.0, k));
        }
        assert_eq!(student_disposition(10.0, k), 1.0);
    }
    for g in 1..10 {
        for w in kappas.windows(2) {
            assert!(student_disposition(g as f64, w[0]) > student_disposition(g as f64, w[1]));
        }
    }
}

fn inputs() -> impl Strategy<Value = PreferenceInputs> {
    (
        -5.0..3.0f64,
        0.0..1.0f64,
        0.1..3.0f64,
        0.0..1.0f64,
        0.0..1.0f64,
        0.0..=1.0f64,
    )
        .prop_map(
            |(premium, disposition, peer_influence, personality, centrality, omega_econ)| {
                PreferenceInputs {
                    premium,
                    disposition,
                    peer_influence,
                    personality,
                    centrality,
                    omega_econ,
                }
            },
        )
}

proptest! {
    #[test]
    fn grant_never_increases_with_income(a in 0.0..200_000.0f64, b in 0.0..200_000.0f64) {
        let g = GrantSchedule::from_params(&SimulationParams::default().economics);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(supplementary_grant(lo, &g) >= supplementary_grant(hi, &g));
    }

    #[test]
    fn logistic_symmetry(x in -700.0..700.0f64) {
        let s = completion_probability(x) + completion_probability(-x);
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&completion_probability(x)));
    }

    #[test]
    fn logistic_monotone(a in -20.0..20.0f64, d in 1e-6..10.0f64, far in -700.0..700.0f64) {
        prop_assert!(completion_probability(a) < completion_probability(a + d));
        prop_assert!(completion_probability(far) <= completion_probability(far + d));
    }

    #[test]
    fn preference_is_linear_in_the_premium(x in inputs(), d in -2.0..2.0f64) {
        let mut y = x;
        y.premium += d;
        let diff = preference(&y) - preference(&x);
        prop_assert!((diff - x.omega_econ * d).abs() < 1e-9);
    }

    #[test]
    fn preference_at_full_economic_weight_is_the_premium(mut x in inputs()) {
        x.omega_econ = 1.0;
        prop_assert_eq!(preference(&x), x.premium);
    }

    #[test]
    fn higher_preference_never_lowers_probability(a in inputs(), b in inputs()) {
        let (pa, pb) = (preference(&a), preference(&b));
        if pa <= pb {
            prop_assert!(completion_probability(pa) <= completion_probability(pb));
        }
    }

    #[test]
    fn premium_antisymmetric_without_repayment(ye in 500.0..20_000.0f64, yp in 500.0..20_000.0f64) {
        let a = consumption_premium(ye, yp, 0.0, false, -5.0).value;
        let b = consumption_premium(yp, ye, 0.0, false, -5.0).value;
        prop_assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn premium_falls_with_repayment(ye in 1000.0..10_000.0f64, yp in 500.0..10_000.0f64, l in 0.0..900.0f64) {
        let a = consumption_premium(ye, yp, 0.0, false, -5.0).value;
        let b = consumption_premium(ye, yp, l, false, -5.0).value;
        prop_assert!(b <= a);
    }

    #[test]
    fn classmates_reciprocal(seed in 0u64..1000) {
        prop_assert!(support::classmate_reciprocity(60, seed).is_ok());
    }
}

#[test]
fn subgroup_rates_bracket_the_overall_rate() {
    let reports = edusim::run(&SimulationParams::default(), 24).unwrap();
    let mut both = 0;
    for r in &reports {
        assert_eq!(
            r.n_completers,
            r.n_completers_firstgen + r.n_completers_edufam
        );
        assert_eq!(r.n_deciders, r.n_deciders_firstgen + r.n_deciders_edufam);
        assert!(r.n_completers <= r.n_deciders);
        if let (Some(all), Some(a), Some(b)) = (
            r.completion_rate(),
            r.completion_rate_firstgen(),
            r.completion_rate_edufam(),
        ) {
            both += 1;
            assert!(
                a.min(b) - 1e-12 <= all && all <= a.max(b) + 1e-12,
                "tick {}",
                r.tick
            );
            let weighted = (a * r.n_deciders_firstgen as f64 + b * r.n_deciders_edufam as f64)
                / r.n_deciders as f64;
            assert!((weighted - all).abs() < 1e-12);
        }
    }
    assert!(both > 90);
}
