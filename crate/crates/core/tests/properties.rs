use debtdyn::{
    compose_nominal_growth, delta_dynamics, percent_to_ratio, ratio_to_percent, sensitivity_matrix, simulate_exact,
    simulate_levels, superpose_delta, validate_scenario, Error, LevelState, MultiplierSpec, PerturbationSet,
    PropagationConvention, RatePair, Scenario,
};
use proptest::prelude::*;

fn rate_pair() -> impl Strategy<Value = RatePair> {
    (-0.05..0.08f64, -0.05..0.08f64).prop_map(|(r, g)| RatePair::new(r, g))
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=40).prop_flat_map(|horizon| {
        (
            0.0..2.0f64,
            prop::collection::vec(rate_pair(), horizon),
            prop::collection::vec(-0.05..0.05f64, horizon),
        )
            .prop_map(move |(d0, rates, x_nom)| Scenario::new(d0, horizon, rates, x_nom).unwrap())
    })
}

fn perturbations(horizon: usize) -> impl Strategy<Value = PerturbationSet> {
    prop::collection::btree_map(1..=horizon, -0.02..0.02f64, 0..=5)
        .prop_map(|m| PerturbationSet::from_entries(m).unwrap())
}

fn scenario_with_shocks() -> impl Strategy<Value = (Scenario, PerturbationSet)> {
    scenario().prop_flat_map(|s| {
        let h = s.horizon;
        (Just(s), perturbations(h))
    })
}

fn conventions() -> impl Strategy<Value = PropagationConvention> {
    prop_oneof![
        Just(PropagationConvention::Additive),
        Just(PropagationConvention::Ratio)
    ]
}

fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

proptest! {
    #[test]
    fn percent_round_trip(x in -1e6..1e6f64) {
        let back = ratio_to_percent(percent_to_ratio(x));
        prop_assert!((back - x).abs() <= 2.0 * f64::EPSILON * x.abs());
    }

    #[test]
    fn composition_cross_term_nonnegative(g in 0.0..0.5f64, p in 0.0..0.5f64) {
        let composed = compose_nominal_growth(g, p).unwrap();
        prop_assert!(composed >= g + p - 1e-15);
        if g * p > 1e-12 {
            prop_assert!(composed > g + p);
        }
        prop_assert!((compose_nominal_growth(g, 0.0).unwrap() - g).abs() <= 1e-15);
    }

    #[test]
    fn validation_accepts_exactly_the_invariants(s in scenario(), which in 0usize..5, at in any::<prop::sample::Index>()) {
        let t = at.index(s.horizon);
        let mut bad = s.clone();
        match which {
            0 => { bad.rates.pop(); }
            1 => { bad.x_nom.push(0.0); }
            2 => { bad.rates[t].g_nom = -1.0 - (t as f64) * 0.1; }
            3 => { bad.horizon += 1; }
            _ => { bad = Scenario { d0: s.d0, horizon: 0, rates: vec![], x_nom: vec![] }; }
        }
        prop_assert!(validate_scenario(s.clone()).is_ok());
        let err = validate_scenario(bad).unwrap_err();
        match which {
            2 => prop_assert_eq!(err, Error::GrowthFactorNonPositive { t: t + 1, factor: 1.0 + (-1.0 - (t as f64) * 0.1) }),
            4 => prop_assert_eq!(err, Error::EmptyHorizon),
            _ => {
                let mismatch = matches!(err, Error::LengthMismatch { .. });
                prop_assert!(mismatch, "unexpected error");
            }
        }
    }

    #[test]
    fn growth_just_above_collapse_is_valid(eps in 1e-9..1e-3f64) {
        prop_assert!(Scenario::constant(1.0, 3, 0.0, -1.0 + eps, 0.0).is_ok());
    }

    #[test]
    fn levels_match_ratios((s, p) in scenario_with_shocks(), eta in 0.0..3.0f64, gdp0 in 1.0..1e4f64) {
        let m = MultiplierSpec::new(eta).unwrap();
        let ratios = simulate_exact(&s, &p, m).unwrap();
        let levels = simulate_levels(&LevelState::new(s.d0 * gdp0, gdp0), &s, &p, m).unwrap();
        for (t, (a, b)) in ratios.d.iter().zip(levels.ratios()).enumerate() {
            prop_assert!(close(*a, b, 1e-10, 1.0), "t={}: {} vs {}", t, a, b);
        }
    }

    #[test]
    fn empty_perturbations_ignore_multiplier(s in scenario(), e1 in 0.0..5.0f64, e2 in 0.0..5.0f64) {
        let empty = PerturbationSet::empty();
        let a = simulate_exact(&s, &empty, MultiplierSpec::new(e1).unwrap()).unwrap();
        let b = simulate_exact(&s, &empty, MultiplierSpec::new(e2).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn zero_multiplier_shifts_by_minus_dx(s in scenario(), t in any::<prop::sample::Index>(), dx in -0.02..0.02f64) {
        let t = t.index(s.horizon) + 1;
        let m = MultiplierSpec::new(0.0).unwrap();
        let base = simulate_exact(&s, &PerturbationSet::empty(), m).unwrap();
        let shocked = simulate_exact(&s, &PerturbationSet::single(t, dx), m).unwrap();
        prop_assert_eq!(shocked.at(t - 1), base.at(t - 1));
        prop_assert!((shocked.at(t) - base.at(t) + dx).abs() <= 1e-15 * base.at(t).abs().max(1.0));
    }

    #[test]
    fn delta_is_linear(
        (s, p1) in scenario_with_shocks(),
        seed in 0.0..1.0f64,
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
        eta in 0.0..3.0f64,
        conv in conventions(),
    ) {
        let p2 = p1.scaled(seed - 0.5).linear_combination(1.0, &PerturbationSet::single(s.horizon, seed * 0.01), 1.0);
        let m = MultiplierSpec::new(eta).unwrap();
        let combined = delta_dynamics(&s, &p1.linear_combination(alpha, &p2, beta), m, conv).unwrap();
        let d1 = delta_dynamics(&s, &p1, m, conv).unwrap();
        let d2 = delta_dynamics(&s, &p2, m, conv).unwrap();
        for t in 0..=s.horizon {
            let expected = alpha * d1.at(t) + beta * d2.at(t);
            prop_assert!(close(combined.at(t), expected, 1e-12, 1e-2), "t={}", t);
        }
    }

    #[test]
    fn closed_form_matches_recursion((s, p) in scenario_with_shocks(), eta in 0.0..3.0f64, conv in conventions()) {
        let m = MultiplierSpec::new(eta).unwrap();
        let recursion = delta_dynamics(&s, &p, m, conv).unwrap();
        let matrix = sensitivity_matrix(&s, m, conv).unwrap();
        for t in 0..=s.horizon {
            let closed = superpose_delta(&s, &p, m, conv, t).unwrap();
            prop_assert!(close(closed, recursion.at(t), 1e-12, 1e-2), "t={}", t);
            if t > 0 {
                prop_assert!(close(matrix.contract(&p, t), closed, 1e-12, 1e-2), "t={}", t);
            }
        }
    }
}
