use proptest::prelude::*;
use truthscore::general::{
    counterfactual_objective, objectives, run_general, utility_from_result, GeneralInstance, OutcomeWelfare, Report,
};
use truthscore::ic_lab::{GeneralSampler, WelfareMode};

fn brute_force_outcome(instance: &GeneralInstance) -> usize {
    let mut best: Option<(f64, &str, usize)> = None;
    for o in 0..instance.outcome_count() {
        let preds = instance.predictions_at(o);
        let w: f64 = instance.reports().iter().map(|r| r.values[o]).sum::<f64>() + instance.welfare(o).eval(&preds);
        let id = instance.outcomes()[o].as_str();
        let better = match best {
            None => true,
            Some((bw, bid, _)) => w > bw || (w == bw && id < bid),
        };
        if better {
            best = Some((w, id, o));
        }
    }
    best.unwrap().2
}

/// Clarke pivot payments written out directly, for welfare identically zero.
fn clarke_pivot(instance: &GeneralInstance, chosen: usize) -> Vec<f64> {
    let reports = instance.reports();
    (0..reports.len())
        .map(|i| {
            let others = |o: usize| -> f64 {
                reports
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, r)| r.values[o])
                    .sum()
            };
            let best_without = (0..instance.outcome_count())
                .map(others)
                .fold(f64::NEG_INFINITY, f64::max);
            best_without - others(chosen)
        })
        .collect()
}

#[test]
fn multilinear_outcome_is_the_brute_force_argmax() {
    for inst in GeneralSampler::new(7, WelfareMode::Multilinear).sample(300) {
        let result = run_general(&inst).unwrap();
        assert_eq!(result.chosen_outcome, brute_force_outcome(&inst));
    }
}

#[test]
fn truthful_utility_is_the_marginal_contribution() {
    for inst in GeneralSampler::new(8, WelfareMode::Multilinear).sample(200) {
        let result = run_general(&inst).unwrap();
        for i in 0..inst.bidder_count() {
            let u = utility_from_result(&result, i, inst.report(i));
            let marginal = result.objective_value - counterfactual_objective(&inst, i);
            assert!(
                (u - marginal).abs() < 1e-10 * (1.0 + marginal.abs()),
                "bidder {i}: {u} vs {marginal}"
            );
        }
    }
}

#[test]
fn zero_welfare_transfers_are_clarke_pivot() {
    for inst in GeneralSampler::new(9, WelfareMode::Zero).sample(150) {
        let result = run_general(&inst).unwrap();
        let clarke = clarke_pivot(&inst, result.chosen_outcome);
        for (i, row) in result.transfers.iter().enumerate() {
            for &t in row {
                assert!((t - clarke[i]).abs() < 1e-12, "bidder {i}: {t} vs {}", clarke[i]);
            }
        }
    }
}

#[test]
fn objectives_include_welfare_at_reported_predictions() {
    let inst = GeneralInstance::new(
        vec!["only".into()],
        vec![vec![vec!["a".into(), "b".into()]]],
        vec![Report::new(vec![2.0], vec![vec![0.25, 0.75]])],
        vec![OutcomeWelfare::custom("sum_sq", |p: &[&[f64]]| {
            p[0].iter().map(|x| x * x).sum()
        })],
    )
    .unwrap();
    assert!((objectives(&inst)[0] - (2.0 + 0.0625 + 0.5625)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn sampled_instances_settle_on_every_state(seed in 0u64..500) {
        let inst = &GeneralSampler::new(seed, WelfareMode::Multilinear).sample(1)[0];
        let result = run_general(inst).unwrap();
        for i in 0..inst.bidder_count() {
            let states = inst.states(i, result.chosen_outcome).len();
            prop_assert_eq!(result.transfers[i].len(), states);
            prop_assert!(result.transfers[i].iter().all(|t| t.is_finite()));
        }
    }
}
