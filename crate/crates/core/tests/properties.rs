use precipice::aggregates::{
    iqm, mean_of_task_means, median_of_task_means, optimality_gap, probability_of_improvement,
};
use precipice::bootstrap::{interval_from_replicates, stratified_resample};
use precipice::profiles::{profile_with_bands, run_score_distribution};
use precipice::rng::substream;
use precipice::scores::{load_scores, normalize, write_csv, write_json, Reference};
use precipice::{CiMethod, NormalizationSpec, ProfileKind, ResampleStrategy, ScoreFormat, ScoreSet};
use proptest::prelude::*;

fn runs_strategy(max_tasks: usize, max_runs: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 1..=max_runs), 1..=max_tasks)
}

fn set(name: &str, runs: Vec<Vec<f64>>) -> ScoreSet {
    ScoreSet::new(name, runs.into_iter().enumerate().map(|(m, r)| (format!("t{m}"), r))).unwrap()
}

fn pair_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1usize..=5).prop_flat_map(|m| {
        let task = || prop::collection::vec(-10.0f64..10.0, 1..=4);
        (prop::collection::vec(task(), m), prop::collection::vec(task(), m))
    })
}

proptest! {
    #[test]
    fn iqm_within_pooled_range(runs in runs_strategy(5, 6)) {
        let s = set("a", runs);
        let pooled = s.pooled_scores();
        let lo = pooled.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = pooled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let v = iqm(&s, 0.25);
        prop_assert!(lo - 1e-12 <= v && v <= hi + 1e-12);
    }

    #[test]
    fn iqm_ignores_run_order(runs in runs_strategy(5, 6), seed in any::<u64>()) {
        let s = set("a", runs.clone());
        let mut shuffled = runs;
        for (m, r) in shuffled.iter_mut().enumerate() {
            r.reverse();
            let k = (seed >> m) as usize % r.len();
            r.rotate_left(k);
        }
        prop_assert_eq!(iqm(&s, 0.25), iqm(&set("a", shuffled), 0.25));
    }

    #[test]
    fn iqm_monotone_in_each_score(runs in runs_strategy(5, 6), m in any::<prop::sample::Index>(),
                                  i in any::<prop::sample::Index>(), bump in 0.0f64..20.0) {
        let before = iqm(&set("a", runs.clone()), 0.25);
        let mut raised = runs;
        let m = m.index(raised.len());
        let i = i.index(raised[m].len());
        raised[m][i] += bump;
        prop_assert!(iqm(&set("a", raised), 0.25) >= before - 1e-12);
    }

    #[test]
    fn iqm_bounded_under_outlier(runs in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4..=4), 2..=5),
                                 big in 1e6f64..1e12) {
        let base = set("a", runs.clone());
        let mut bumped = runs;
        bumped[0][0] = big;
        let bumped = set("a", bumped);
        // Pooled range of the base set bounds the trimmed region.
        prop_assert!((iqm(&bumped, 0.25) - iqm(&base, 0.25)).abs() <= 20.0);
        prop_assert!(mean_of_task_means(&bumped) - mean_of_task_means(&base) > 1e3);
    }

    #[test]
    fn improvement_sums_to_one((x, y) in pair_strategy()) {
        let (x, y) = (set("x", x), set("y", y));
        let p = probability_of_improvement(&x, &y).unwrap();
        let q = probability_of_improvement(&y, &x).unwrap();
        prop_assert_eq!(p + q, 1.0);
    }

    #[test]
    fn improvement_invariant_under_monotone_map((x, y) in pair_strategy(), scale in 0.1f64..5.0) {
        let warp = |runs: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            runs.iter().map(|r| r.iter().map(|v| (scale * v).exp2() - 3.0).collect()).collect()
        };
        let p = probability_of_improvement(&set("x", x.clone()), &set("y", y.clone())).unwrap();
        let q = probability_of_improvement(&set("x", warp(&x)), &set("y", warp(&y))).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn optimality_gap_monotonicity(runs in runs_strategy(5, 4), bump in 0.0f64..5.0, g1 in 0.1f64..5.0, dg in 0.0f64..5.0) {
        let s = set("a", runs.clone());
        let raised = set("a", runs.iter().map(|r| r.iter().map(|v| v + bump).collect()).collect());
        prop_assert!(optimality_gap(&raised, g1) <= optimality_gap(&s, g1) + 1e-12);
        prop_assert!(optimality_gap(&s, g1 + dg) >= optimality_gap(&s, g1) - 1e-12);
    }

    #[test]
    fn optimality_gap_inside_unit_range(runs in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 1..=4), 1..=5)) {
        let s = set("a", runs);
        let pooled = s.pooled_scores();
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        prop_assert!((optimality_gap(&s, 1.0) - (1.0 - mean)).abs() < 1e-12);
    }

    #[test]
    fn constant_sets_return_the_constant(c in -10.0f64..10.0, shape in prop::collection::vec(1usize..=5, 1..=5)) {
        let s = set("a", shape.iter().map(|&n| vec![c; n]).collect());
        prop_assert_eq!(iqm(&s, 0.25), c);
        prop_assert_eq!(mean_of_task_means(&s), c);
        prop_assert_eq!(median_of_task_means(&s), c);
        prop_assert_eq!(optimality_gap(&s, 1.0), (1.0 - c).max(0.0));
    }

    #[test]
    fn pooled_scores_are_the_union(runs in runs_strategy(5, 4)) {
        let s = set("a", runs.clone());
        let mut pooled = s.pooled_scores();
        let mut union: Vec<f64> = runs.into_iter().flatten().collect();
        pooled.sort_by(f64::total_cmp);
        union.sort_by(f64::total_cmp);
        prop_assert_eq!(pooled.len(), s.total_runs());
        prop_assert_eq!(pooled, union);
    }

    #[test]
    fn resampling_preserves_strata(runs in runs_strategy(5, 6), seed in any::<u64>()) {
        let s = set("a", runs);
        let r = stratified_resample(&s, &ResampleStrategy::RUNS, &mut substream(seed, 3)).unwrap();
        prop_assert_eq!(r.tasks(), s.tasks());
        prop_assert_eq!(r.run_counts(), s.run_counts());
        for (orig, drawn) in s.all_runs().iter().zip(r.all_runs()) {
            prop_assert!(drawn.iter().all(|v| orig.contains(v)));
        }
    }

    #[test]
    fn percentile_widens_with_coverage(reps in prop::collection::vec(-5.0f64..5.0, 10..200), c1 in 0.5f64..0.9, dc in 0.0f64..0.09) {
        let (lo1, hi1) = interval_from_replicates(0.0, &reps, CiMethod::Percentile, c1, 0.0).unwrap();
        let (lo2, hi2) = interval_from_replicates(0.0, &reps, CiMethod::Percentile, c1 + dc, 0.0).unwrap();
        prop_assert!(lo2 <= lo1 && hi1 <= hi2);
    }

    #[test]
    fn bands_contain_profile(runs in runs_strategy(4, 4), seed in any::<u64>()) {
        let s = set("a", runs);
        let taus: Vec<f64> = (0..9).map(|i| -10.0 + 2.5 * i as f64).collect();
        for kind in [ProfileKind::RunScores, ProfileKind::TaskMeans] {
            let curve = profile_with_bands(&s, &taus, kind, 0.95, 50, seed).unwrap();
            for (_, v, band) in curve.records() {
                let (lo, hi) = band.unwrap();
                prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
                prop_assert!(lo <= v && v <= hi);
            }
        }
    }

    #[test]
    fn profile_non_increasing(runs in runs_strategy(5, 4)) {
        let s = set("a", runs);
        let taus: Vec<f64> = (0..43).map(|i| -10.5 + 0.5 * i as f64).collect();
        let curve = run_score_distribution(&s, &taus).unwrap();
        prop_assert_eq!(curve.values()[0], 1.0);
        prop_assert_eq!(*curve.values().last().unwrap(), 0.0);
        prop_assert!(curve.values().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn json_and_csv_round_trip(runs in runs_strategy(4, 4)) {
        let s = set("alg", runs);
        let mut json = Vec::new();
        write_json(&mut json, [&s]).unwrap();
        let back = load_scores(json.as_slice(), ScoreFormat::Json).unwrap();
        prop_assert_eq!(&back["alg"], &s);
        let mut csv = Vec::new();
        write_csv(&mut csv, [&s]).unwrap();
        let back = load_scores(csv.as_slice(), ScoreFormat::Csv).unwrap();
        prop_assert_eq!(&back["alg"], &s);
    }

    #[test]
    fn normalization_is_affine(runs in runs_strategy(3, 4), a in 0.5f64..4.0, b in -3.0f64..3.0) {
        let raw = set("a", runs.clone());
        let refs = |scale: f64, shift: f64| {
            NormalizationSpec::new((0..runs.len()).map(|m| {
                (format!("t{m}"), Reference { low: scale * -2.0 + shift, high: scale * 7.0 + shift })
            }).collect()).unwrap()
        };
        let moved = set("a", runs.iter().map(|r| r.iter().map(|v| a * v + b).collect()).collect());
        let n1 = normalize(&raw, &refs(1.0, 0.0)).unwrap();
        let n2 = normalize(&moved, &refs(a, b)).unwrap();
        for (r1, r2) in n1.all_runs().iter().zip(n2.all_runs()) {
            for (u, v) in r1.iter().zip(r2) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }
}
