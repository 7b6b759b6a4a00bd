use proptest::prelude::*;
use truthscore::scoring::{make_binary_rule, make_simplex_rule, ConvexFn, Curvature, ScoringRule, SimplexConvexFn};
use truthscore::simplex;
use truthscore::welfare_catalog::{linear_g, square_g, threshold_g};

fn catalog() -> Vec<ConvexFn> {
    vec![linear_g(1.0).unwrap(), square_g(), threshold_g(0.2, 0.6, 10.0).unwrap()]
}

fn central_difference(g: &ConvexFn, p: f64) -> f64 {
    let h = 1e-6;
    (g.eval(p + h) - g.eval(p - h)) / (2.0 * h)
}

#[test]
fn subgradients_match_finite_differences_away_from_kinks() {
    let threshold = threshold_g(0.2, 0.6, 10.0).unwrap();
    for g in [linear_g(2.5).unwrap(), square_g(), threshold] {
        for p in simplex::linspace(0.01, 0.99, 99) {
            if (p - 0.2).abs() < 1e-3 {
                continue;
            }
            let fd = central_difference(&g, p);
            assert!(
                (g.subgrad(p) - fd).abs() < 1e-5,
                "{} at {p}: {} vs {fd}",
                g.name(),
                g.subgrad(p)
            );
        }
    }
}

#[test]
fn negative_entropy_savage_rule_is_proper() {
    // Negative entropy is strictly convex on the simplex; its Savage rule is the log score.
    let g = SimplexConvexFn::new(
        "neg_entropy",
        3,
        |p: &[f64]| p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum(),
        |p: &[f64]| p.iter().map(|&x| if x > 0.0 { x.ln() + 1.0 } else { -40.0 }).collect(),
    )
    .unwrap();
    let rule = make_simplex_rule(&g);
    let interior: Vec<Vec<f64>> = simplex::grid(3, 10)
        .into_iter()
        .filter(|p| p.iter().all(|&x| x > 0.0))
        .collect();
    for truth in &interior {
        let honest = rule.expected_score(truth, truth).unwrap();
        // Oracle: expected log score plus the constant 1 - sum(p) = 0.
        let oracle: f64 = truth.iter().map(|x| x * x.ln()).sum();
        assert!((honest - oracle).abs() < 1e-12);
        for report in &interior {
            assert!(rule.expected_score(report, truth).unwrap() <= honest + 1e-12);
        }
    }
}

#[test]
fn binary_tangent_rule_matches_its_simplex_view() {
    for g in catalog() {
        let binary = make_binary_rule(&g);
        let lifted = make_simplex_rule(&g.to_simplex());
        for p in simplex::linspace(0.0, 1.0, 21) {
            let report = simplex::binary(p);
            assert!((binary.score_binary(p, true) - lifted.score(&report, 1).unwrap()).abs() < 1e-12);
            assert!((binary.score_binary(p, false) - lifted.score(&report, 0).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn user_supplied_concave_function_is_refused() {
    let err = ConvexFn::new(
        "bowl_down",
        |p| -(p - 0.5) * (p - 0.5),
        |p| -2.0 * (p - 0.5),
        Curvature::Convex,
    );
    assert!(err.is_err());
}

proptest! {
    #[test]
    fn catalog_rules_are_proper(report in 0.0f64..=1.0, truth in 0.0f64..=1.0, which in 0usize..3) {
        let g = &catalog()[which];
        let rule = make_binary_rule(g);
        let honest = rule.expected_binary(truth, truth);
        prop_assert!((honest - g.eval(truth)).abs() < 1e-12);
        prop_assert!(honest - rule.expected_binary(report, truth) >= -1e-12);
    }

    #[test]
    fn square_gap_is_squared_distance(report in 0.0f64..=1.0, truth in 0.0f64..=1.0) {
        // For g = p^2 the expected loss from misreporting is (report - truth)^2.
        let rule = make_binary_rule(&square_g());
        let loss = rule.expected_binary(truth, truth) - rule.expected_binary(report, truth);
        prop_assert!((loss - (report - truth).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn threshold_rule_is_proper_for_random_parameters(
        alpha in 0.0f64..0.9,
        width in 0.05f64..1.0,
        v_max in 0.1f64..100.0,
        report in 0.0f64..=1.0,
        truth in 0.0f64..=1.0,
    ) {
        let beta = (alpha + width).min(1.0);
        prop_assume!(beta > alpha);
        let g = threshold_g(alpha, beta, v_max).unwrap();
        let rule = make_binary_rule(&g);
        let scale = v_max / (beta - alpha);
        prop_assert!(rule.expected_binary(truth, truth) - rule.expected_binary(report, truth) >= -1e-12 * scale);
    }
}
