mod common;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wflens::abstraction::{
    abstract_path, abstract_workflow, default_ruleset, Construct, ConstructBag,
};
use wflens::catalog::{classify, default_catalog, extract_catalog, validate_workflow, Feature};
use wflens::corpus::corpus_stats;
use wflens::lint::{default_risk_model, evaluate, Severity};
use wflens::metrics::{workflow_metrics, WorkflowMetrics};
use wflens::pipeline::analyze_str;
use wflens::reliability::{reliability_metrics, tercile_split, Conclusion, RunRecord, Window};
use wflens::stats::{bh_adjust, cliffs_delta, gini, mann_whitney_u, spearman};
use wflens::workflow::{enumerate_paths, parse_workflow, ConcretePath};

fn counts(bag: &ConstructBag) -> BTreeMap<String, usize> {
    bag.iter().map(|(c, n)| (c.to_string(), n)).collect()
}

fn analyze(seed: u64) -> (WorkflowMetrics, ConstructBag) {
    let a = analyze_str(
        &common::random_workflow(seed, seed ^ 0x5eed),
        default_catalog(),
    )
    .unwrap();
    (a.metrics, a.bag)
}

fn sample(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..40).prop_map(f64::from), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn abstraction_is_idempotent_and_keeps_length(seed in any::<u64>()) {
        let tree = parse_workflow(&common::random_workflow(seed, seed)).unwrap();
        for path in enumerate_paths(&tree) {
            let construct = abstract_path(&path, default_ruleset());
            prop_assert_eq!(construct.len(), path.len());
            let again = abstract_path(&construct.to_concrete(), default_ruleset());
            prop_assert_eq!(&again, &construct, "{}", path);
        }
    }

    #[test]
    fn renaming_user_keys_keeps_the_bag(shape in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let first = analyze_str(&common::random_workflow(shape, a), default_catalog()).unwrap();
        let second = analyze_str(&common::random_workflow(shape, b), default_catalog()).unwrap();
        prop_assert_eq!(counts(&first.bag), counts(&second.bag));
        prop_assert_eq!(first.metrics, second.metrics);
    }

    #[test]
    fn bag_accounting(seed in any::<u64>()) {
        let tree = parse_workflow(&common::random_workflow(seed, 1)).unwrap();
        let paths = enumerate_paths(&tree);
        let bag = abstract_workflow(&paths, default_ruleset());
        prop_assert_eq!(bag.iter().map(|(_, n)| n).sum::<usize>(), paths.len());
        prop_assert!(bag.iter().all(|(_, n)| n >= 1));
        prop_assert!(bag.distinct() <= bag.total_paths());
        let repeats = bag.iter().any(|(_, n)| n > 1);
        prop_assert_eq!(bag.distinct() == bag.total_paths(), !repeats);
    }

    #[test]
    fn metrics_ignore_path_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let tree = parse_workflow(&common::random_workflow(seed, 2)).unwrap();
        let paths = enumerate_paths(&tree);
        let mut shuffled: Vec<ConcretePath> = paths.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let a = workflow_metrics(&abstract_workflow(&paths, default_ruleset()), default_catalog()).unwrap();
        let b = workflow_metrics(&abstract_workflow(&shuffled, default_ruleset()), default_catalog()).unwrap();
        prop_assert_eq!(&a, &b);
        let per_feature: usize = a.per_feature.values().map(|u| u.n_paths).sum();
        prop_assert_eq!(per_feature + a.unknown_paths, a.n_paths);
        for (feature, usage) in &a.per_feature {
            prop_assert_eq!(usage.present, usage.n_paths > 0);
            let expected = num_rational::Rational64::new(
                usage.n_constructs_used as i64,
                default_catalog().feature_size(*feature) as i64,
            );
            prop_assert_eq!(usage.construct_coverage, expected);
        }
    }

    #[test]
    fn extracted_catalog_is_the_union(seeds in prop::collection::vec(any::<u64>(), 1..6)) {
        let bags: Vec<ConstructBag> = seeds.iter().map(|s| analyze(*s).1).collect();
        let union: BTreeSet<String> = bags.iter().flat_map(|b| b.constructs().map(|c| c.to_string())).collect();
        let extracted = extract_catalog(&bags).unwrap();
        prop_assert_eq!(extracted.len(), union.len());
        for bag in &bags {
            prop_assert!(validate_workflow(bag, &extract_catalog(std::slice::from_ref(bag)).unwrap()).is_language_valid);
        }
    }

    #[test]
    fn corpus_aggregates(seeds in prop::collection::vec(any::<u64>(), 1..8), shuffle in any::<u64>()) {
        let mut items: Vec<_> = seeds.iter().map(|s| analyze(*s)).collect();
        let stats = corpus_stats(&items).unwrap();
        let occurrences: usize = stats.construct_freq.values().map(|f| f.occurrences).sum();
        prop_assert_eq!(occurrences, items.iter().map(|(m, _)| m.n_paths).sum::<usize>());
        let shares: Vec<f64> = stats.topk_share.values().copied().collect();
        prop_assert!(shares.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        for (construct, freq) in &stats.construct_freq {
            if let Some(feature) = classify(construct, default_catalog()) {
                prop_assert!(stats.feature_usage_rate[&feature] + 1e-12 >= freq.pct_wf);
            }
        }
        items.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(corpus_stats(&items).unwrap(), stats);
    }

    #[test]
    fn gini_matches_pairwise_oracle_and_is_scale_free(x in prop::collection::vec(0.0f64..1e3, 1..40), c in 0.01f64..1e3) {
        prop_assume!(x.iter().sum::<f64>() > 0.0);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let mad: f64 = x.iter().flat_map(|a| x.iter().map(move |b| (a - b).abs())).sum::<f64>();
        let oracle = mad / (2.0 * n * n * mean);
        let g = gini(&x).unwrap();
        prop_assert!((g - oracle).abs() < 1e-9, "{g} vs {oracle}");
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        prop_assert!((gini(&scaled).unwrap() - g).abs() < 1e-9);
    }

    #[test]
    fn cliffs_delta_brute_force_and_antisymmetry(x in sample(1..=30), y in sample(1..=30)) {
        let mut dominance = 0i64;
        for a in &x {
            for b in &y {
                dominance += i64::from(a > b) - i64::from(a < b);
            }
        }
        let brute = dominance as f64 / (x.len() * y.len()) as f64;
        let d = cliffs_delta(&x, &y).unwrap().delta;
        prop_assert_eq!(d, brute);
        prop_assert_eq!(cliffs_delta(&y, &x).unwrap().delta, -d);
    }

    #[test]
    fn mann_whitney_u_statistics_sum(x in sample(1..=12), y in sample(1..=12)) {
        let uxy = mann_whitney_u(&x, &y).unwrap();
        let uyx = mann_whitney_u(&y, &x).unwrap();
        prop_assert_eq!(uxy.statistic + uyx.statistic, (x.len() * y.len()) as f64);
        prop_assert!((0.0..=1.0).contains(&uxy.p_value));
        prop_assert!((uxy.p_value - uyx.p_value).abs() < 1e-12);
    }

    #[test]
    fn spearman_survives_monotone_transforms(pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30)) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let Ok(r) = spearman(&x, &y) else { return Ok(()); };
        let fx: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
        let gy: Vec<f64> = y.iter().map(|v| (v / 10.0).exp()).collect();
        prop_assert!((spearman(&fx, &gy).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn bh_properties(p in prop::collection::vec(0.0f64..=1.0, 1..40)) {
        let adj = bh_adjust(&p).unwrap();
        for (a, r) in adj.iter().zip(&p) {
            prop_assert!(*a >= *r && *a <= 1.0);
        }
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        prop_assert!(order.windows(2).all(|w| adj[w[0]] <= adj[w[1]]));
        // adjusted values in p order are already a running minimum from the top
        let sorted: Vec<f64> = order.iter().map(|&i| adj[i]).collect();
        let mut running = 1.0f64;
        for k in (0..sorted.len()).rev() {
            running = running.min(sorted[k]);
            prop_assert_eq!(running, sorted[k]);
        }
        prop_assert_eq!(bh_adjust(&p).unwrap(), adj);
    }

    #[test]
    fn reliability_bounds(spec in prop::collection::vec((0i64..1000, 0u8..4, 0u8..6), 1..30)) {
        let runs: Vec<RunRecord> = spec
            .iter()
            .map(|(t, c, sha)| RunRecord {
                workflow_id: "w".into(),
                commit_sha: format!("sha{sha}"),
                committed_at: Utc.timestamp_opt(1_700_000_000 + t, 0).unwrap(),
                conclusion: [Conclusion::Success, Conclusion::Failure, Conclusion::Cancelled, Conclusion::Skipped][*c as usize],
            })
            .collect();
        let window = Window::new(Utc.timestamp_opt(1_700_000_000, 0).unwrap(), Utc.timestamp_opt(1_700_001_000, 0).unwrap()).unwrap();
        let m = reliability_metrics("w", &runs, window);
        let shas: BTreeSet<_> = runs.iter().map(|r| r.commit_sha.clone()).collect();
        prop_assert_eq!(m.n_commits, shas.len());
        if let Some(fr) = m.failure_rate { prop_assert!((0.0..=1.0).contains(&fr)); }
        if let Some(a) = m.availability { prop_assert!((0.0..=1.0).contains(&a)); }
        if let Some(t) = m.ttr_seconds { prop_assert!(t > 0.0); }

        let all_success: Vec<RunRecord> = runs.iter().cloned().map(|mut r| { r.conclusion = Conclusion::Success; r }).collect();
        let m = reliability_metrics("w", &all_success, window);
        prop_assert_eq!(m.failure_rate, Some(0.0));
        prop_assert_eq!(m.availability, Some(1.0));
    }

    #[test]
    fn terciles_partition_ids(values in prop::collection::vec(0u32..30, 3..60)) {
        let map: BTreeMap<String, f64> = values.iter().enumerate().map(|(i, v)| (format!("w{i}"), f64::from(*v))).collect();
        let Ok(groups) = tercile_split(&map) else { return Ok(()); };
        let mut all: Vec<&String> = groups.small.iter().chain(&groups.medium).chain(&groups.large).collect();
        all.sort();
        let ids: Vec<&String> = map.keys().collect();
        prop_assert_eq!(all, ids);
        let (t1, t2) = groups.boundaries;
        prop_assert!(groups.small.iter().all(|id| map[id] <= t1));
        prop_assert!(groups.large.iter().all(|id| map[id] > t2));
    }

    #[test]
    fn lint_odds_are_multiplicative(seed in any::<u64>()) {
        let (metrics, _) = analyze(seed);
        let model = default_risk_model();
        let (diagnostics, summary) = evaluate("w.yml", &metrics, &model);
        let expected: f64 = metrics
            .features_present()
            .filter_map(|f| model.feature_effect(f).presence_or)
            .product();
        prop_assert!((summary.relative_failure_odds - expected).abs() < 1e-12);
        prop_assert!(diagnostics.windows(2).all(|w| (&w[0].rule_id, &w[0].file) <= (&w[1].rule_id, &w[1].file)));
        prop_assert!(diagnostics.iter().filter(|d| d.severity == Severity::Warn).all(|d| !d.evidence.is_empty()));
    }
}

#[test]
fn classify_is_a_function() {
    for (construct, entry) in default_catalog().iter() {
        assert_eq!(classify(construct, default_catalog()), entry.feature);
    }
    let unknown: Construct = "jobs.<id>.frobnicate".parse().unwrap();
    assert_eq!(classify(&unknown, default_catalog()), None);
    assert_eq!(Feature::ALL.len(), 14);
}
