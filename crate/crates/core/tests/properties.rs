use proptest::prelude::*;

use topoindex::backtest::{accuracy, f1_score, max_drawdown, simulate, TradeMode};
use topoindex::data::{label_updown, make_folds, simple_returns};
use topoindex::features::{
    betti_curve, clamp_infinite, feature_vector, landscape_norm, landscape_value, persistent_entropy,
    total_persistence, BarcodeSet, ComboCode, FeatureConfig, InfinitePolicy,
};
use topoindex::models::{fit, ClassifierSpec, Dataset, ForestParams, ModelKind, ModelParams};
use topoindex::persistence::{
    build_rips_filtration, reduce, reduce_with_stats, Death, PersistenceDiagram, MaxRadius,
};
use topoindex::pointcloud::{corr_to_distance, correlation_of_columns, kpca_embed, Bandwidth};
use topoindex::synthetic::business_days;
use topoindex::PointCloud;

fn cloud_strategy(max_points: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=3).prop_flat_map(move |d| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 3..=max_points))
}

fn bars_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..5.0, 1e-3f64..3.0).prop_map(|(b, l)| (b, b + l)), 1..25)
}

fn diagram(points: Vec<Vec<f64>>, max_dim: usize) -> PersistenceDiagram<f64> {
    let cloud = PointCloud::new(points).unwrap();
    reduce(&build_rips_filtration(&cloud, max_dim, MaxRadius::Auto).unwrap()).unwrap()
}

/// Finite pairs of one dimension as (birth, death) points.
fn finite_points(d: &PersistenceDiagram<f64>, dim: usize) -> Vec<(f64, f64)> {
    d.in_dim(dim).filter_map(|p| p.death.finite().map(|x| (p.birth, x))).collect()
}

/// Kuhn matching on the bipartite graph of pairs within `eps` (L∞), with diagonal copies.
fn matchable(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> bool {
    let (n, m) = (a.len(), b.len());
    // left: a's points then b's diagonal projections; right: b's points then a's projections
    let size = n + m;
    let half = |p: &(f64, f64)| (p.1 - p.0) / 2.0;
    let edge = |i: usize, j: usize| -> bool {
        match (i < n, j < m) {
            (true, true) => (a[i].0 - b[j].0).abs().max((a[i].1 - b[j].1).abs()) <= eps,
            (true, false) => j - m == i && half(&a[i]) <= eps,
            (false, true) => i - n == j && half(&b[j]) <= eps,
            (false, false) => true,
        }
    };
    fn augment(i: usize, size: usize, edge: &dyn Fn(usize, usize) -> bool, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..size {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, size, edge, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; size];
    (0..size).all(|i| augment(i, size, &edge, &mut vec![false; size], &mut owner))
}

fn labelled(rows: &[(Vec<f64>, bool)]) -> Dataset {
    let dates = business_days(chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), rows.len());
    let width = rows[0].0.len();
    Dataset::new(
        dates,
        rows.iter().map(|r| r.0.clone()).collect(),
        rows.iter().map(|r| u8::from(r.1)).collect(),
        15,
        (0..width).map(|i| format!("x{i}")).collect(),
    )
    .unwrap()
}

fn rows_strategy() -> impl Strategy<Value = Vec<(Vec<f64>, bool)>> {
    (1usize..4).prop_flat_map(|w| prop::collection::vec((prop::collection::vec(-3.0f64..3.0, w), any::<bool>()), 8..40))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn returns_reconstruct_closes(closes in prop::collection::vec(1.0f64..500.0, 2..200)) {
        let r = simple_returns(&closes).unwrap();
        let mut c = closes[0];
        for (k, x) in r.iter().enumerate() {
            c *= 1.0 + x;
            prop_assert!(((c - closes[k + 1]) / closes[k + 1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn folds_partition_the_predict_window(start in 0usize..40, months in 1usize..6, len in 150usize..400) {
        let dates = business_days(chrono::NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(), len);
        let mut all_months: Vec<&str> = dates.iter().map(|d| &d[..7]).collect();
        all_months.dedup();
        prop_assume!(all_months.len() > 2);
        let i = start % (all_months.len() - 1);
        let j = (i + months).min(all_months.len() - 1);
        let folds = make_folds(&dates, all_months[i], all_months[j]).unwrap();
        let first = dates.iter().position(|d| &d[..7] > all_months[i]).unwrap();
        let last = dates.iter().rposition(|d| &d[..7] <= all_months[j]).unwrap() + 1;
        prop_assert_eq!(folds[0].predict.start, first);
        prop_assert_eq!(folds.last().unwrap().predict.end, last);
        for w in folds.windows(2) {
            prop_assert_eq!(w[0].predict.end, w[1].predict.start);
            prop_assert_eq!(w[1].train.end, w[0].predict.end);
            prop_assert!(w[0].train.end < w[1].train.end && w[0].train.start == w[1].train.start);
        }
        for f in &folds {
            prop_assert!(f.train.end <= f.predict.start);
        }
    }

    #[test]
    fn labels_cover_all_but_horizon(returns in prop::collection::vec(-0.1f64..0.1, 2..100), h in 1usize..5) {
        prop_assume!(returns.len() > h);
        prop_assert_eq!(label_updown(&returns, h).unwrap().len(), returns.len() - h);
    }

    #[test]
    fn correlation_ignores_affine_rescaling(
        window in prop::collection::vec(prop::collection::vec(-0.05f64..0.05, 4), 10..40),
        col in 0usize..4, a in 0.1f64..10.0, b in -1.0f64..1.0,
    ) {
        let base = correlation_of_columns(&window).unwrap();
        prop_assume!(base.degenerate.is_empty());
        let scaled: Vec<Vec<f64>> = window.iter().map(|r| {
            let mut r = r.clone();
            r[col] = a * r[col] + b;
            r
        }).collect();
        let other = correlation_of_columns(&scaled).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((base.values[(i, j)] - other.values[(i, j)]).abs() <= 1e-12);
            }
        }
        let d = corr_to_distance(&base.values).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((d[(i, j)].powi(2) - 2.0 * (1.0 - base.values[(i, j)])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn kpca_commutes_with_row_permutation(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 5), 6..15),
        shuffle in any::<u64>(),
    ) {
        let n = rows.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = shuffle;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| rows[p].clone()).collect();
        let a = kpca_embed(&rows, 2, Bandwidth::Median).unwrap();
        let b = kpca_embed(&permuted, 2, Bandwidth::Median).unwrap();
        for axis in 0..2 {
            let col_a: Vec<f64> = (0..n).map(|i| a.points()[perm[i]][axis]).collect();
            let col_b: Vec<f64> = (0..n).map(|i| b.points()[i][axis]).collect();
            let same = col_a.iter().zip(&col_b).all(|(x, y)| (x - y).abs() <= 1e-8);
            let flipped = col_a.iter().zip(&col_b).all(|(x, y)| (x + y).abs() <= 1e-8);
            prop_assert!(same || flipped, "axis {axis}: {col_a:?} vs {col_b:?}");
        }
    }

    #[test]
    fn diagram_ignores_point_order(points in cloud_strategy(8), rot in 0usize..8) {
        let mut shifted = points.clone();
        let k = rot % points.len();
        shifted.rotate_left(k);
        shifted.reverse();
        let (a, b) = (diagram(points, 1), diagram(shifted, 1));
        prop_assert_eq!(a.pairs(), b.pairs());
    }

    #[test]
    fn reduction_conserves_simplices(points in cloud_strategy(9), max_dim in 0usize..=2) {
        let cloud = PointCloud::new(points.clone()).unwrap();
        let complex = build_rips_filtration(&cloud, max_dim, MaxRadius::Auto).unwrap();
        let (d, stats) = reduce_with_stats(&complex).unwrap();
        prop_assert_eq!(
            2 * (stats.finite_pairs + stats.zero_persistence_dropped) + stats.essential_pairs + stats.unpaired_top,
            stats.participating
        );
        prop_assert_eq!(stats.finite_pairs + stats.essential_pairs, d.pairs().len());
        // distinct random points: every H0 bar has positive length
        prop_assert_eq!(d.in_dim(0).count(), points.len());
        prop_assert_eq!(d.in_dim(0).filter(|p| p.death == Death::Never).count(), 1);
        for p in d.pairs() {
            if let Death::At(x) = p.death {
                prop_assert!(x > p.birth);
            }
        }
    }

    #[test]
    fn rips_diagrams_are_stable(points in cloud_strategy(7), noise in prop::collection::vec(-1.0f64..1.0, 21), eps in 1e-4f64..0.05) {
        let dim = points[0].len();
        let moved: Vec<Vec<f64>> = points.iter().enumerate().map(|(i, p)| {
            p.iter().enumerate().map(|(k, x)| x + eps * noise[(i * dim + k) % noise.len()]).collect()
        }).collect();
        let shift = points.iter().zip(&moved).map(|(p, q)| {
            p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        }).fold(0.0, f64::max);
        let (a, b) = (diagram(points, 1), diagram(moved, 1));
        for dim in 0..=1 {
            let (pa, pb) = (finite_points(&a, dim), finite_points(&b, dim));
            prop_assert!(matchable(&pa, &pb, 2.0 * shift + 1e-12), "dim {dim}: {pa:?} vs {pb:?} (shift {shift})");
        }
    }

    #[test]
    fn h0_betti_curve_never_increases(points in cloud_strategy(9), m in 1usize..40) {
        let bars = clamp_infinite(&diagram(points, 1), InfinitePolicy::ClampToMax);
        let curve = betti_curve(&bars, 0, m);
        prop_assert!(curve.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn entropy_is_bounded(bars in bars_strategy(), scale in 1e-3f64..1e3) {
        let n = bars.len() as f64;
        let e = persistent_entropy(&BarcodeSet::from_bars(vec![bars.clone()]), 0);
        prop_assert!(e >= 0.0 && e <= n.ln() + 1e-12);
        let equal: Vec<(f64, f64)> = bars.iter().map(|&(b, _)| (b, b + scale)).collect();
        let e_eq = persistent_entropy(&BarcodeSet::from_bars(vec![equal]), 0);
        prop_assert!((e_eq - n.ln()).abs() <= 1e-12);
    }

    #[test]
    fn landscapes_are_ordered_and_lipschitz(bars in bars_strategy()) {
        let grid: Vec<f64> = (0..=400).map(|i| f64::from(i) * 0.02).collect();
        for k in 1..=4 {
            for w in grid.windows(2) {
                let (x, y) = (w[0], w[1]);
                let (lk, lk1) = (landscape_value(&bars, k, x), landscape_value(&bars, k + 1, x));
                prop_assert!(lk >= lk1 && lk1 >= 0.0);
                prop_assert!((landscape_value(&bars, k, y) - lk).abs() <= (y - x) + 1e-12);
            }
        }
    }

    #[test]
    fn features_ignore_bar_order(bars in bars_strategy(), m in 1usize..30) {
        let mut rev = bars.clone();
        rev.reverse();
        let (a, b) = (BarcodeSet::from_bars(vec![bars]), BarcodeSet::from_bars(vec![rev]));
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs());
        prop_assert_eq!(betti_curve(&a, 0, m), betti_curve(&b, 0, m));
        prop_assert!(close(persistent_entropy(&a, 0), persistent_entropy(&b, 0)));
        prop_assert!(close(total_persistence(&a, 0), total_persistence(&b, 0)));
        prop_assert!(close(landscape_norm(&a, 0, 2.0, 5), landscape_norm(&b, 0, 2.0, 5)));
    }

    #[test]
    fn feature_vectors_are_deterministic(points in cloud_strategy(8), code in 1u8..=15, m in 1usize..20) {
        let d = diagram(points, 1);
        let cfg = FeatureConfig { betti_bins: m, ..FeatureConfig::default() };
        let combo = ComboCode::new(code).unwrap();
        let (a, b) = (feature_vector(&d, combo, &cfg), feature_vector(&d, combo, &cfg));
        prop_assert_eq!(a.values.len(), a.layout.len());
        prop_assert_eq!(&a.layout, &cfg.layout(combo));
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.values), bits(&b.values));
    }

    #[test]
    fn models_are_deterministic(rows in rows_strategy(), seed in any::<u64>()) {
        let ds = labelled(&rows);
        for kind in [ModelKind::Logistic, ModelKind::RandomForest, ModelKind::GbStumps] {
            let spec = ClassifierSpec::new(ModelParams::defaults(kind), seed);
            let (a, b) = (fit(&spec, &ds).unwrap(), fit(&spec, &ds).unwrap());
            for r in &ds.features {
                prop_assert_eq!(a.score(r).unwrap().to_bits(), b.score(r).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn logistic_ignores_column_scale(rows in rows_strategy(), col in 0usize..3, c in 0.01f64..100.0) {
        let ds = labelled(&rows);
        let col = col % ds.width();
        let mut scaled = ds.clone();
        for r in &mut scaled.features {
            r[col] *= c;
        }
        let spec = ClassifierSpec::new(ModelParams::defaults(ModelKind::Logistic), 1);
        let (a, b) = (fit(&spec, &ds).unwrap(), fit(&spec, &scaled).unwrap());
        for (r, s) in ds.features.iter().zip(&scaled.features) {
            prop_assert!((a.score(r).unwrap() - b.score(s).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn stump_forest_is_majority_vote(rows in rows_strategy(), seed in any::<u64>()) {
        let ds = labelled(&rows);
        let ones = ds.labels.iter().filter(|&&l| l == 1).count();
        prop_assume!(2 * ones != ds.len());
        let params = ModelParams::RandomForest(ForestParams { max_depth: 0, ..ForestParams::default() });
        let model = fit(&ClassifierSpec::new(params, seed), &ds).unwrap();
        let majority = u8::from(2 * ones > ds.len());
        for p in model.predict(&ds.features).unwrap() {
            prop_assert_eq!(p.label, majority);
        }
    }

    #[test]
    fn trading_metrics_stay_in_range(
        days in prop::collection::vec((any::<bool>(), any::<bool>(), -0.2f64..0.2), 1..120),
        long_flat in any::<bool>(),
    ) {
        let dates = business_days(chrono::NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(), days.len());
        let preds: Vec<u8> = days.iter().map(|d| u8::from(d.0)).collect();
        let labels: Vec<u8> = days.iter().map(|d| u8::from(d.1)).collect();
        let rets: Vec<f64> = days.iter().map(|d| d.2).collect();
        let mode = if long_flat { TradeMode::LongFlat } else { TradeMode::LongShort };
        let log = simulate(&dates, &preds, &rets, mode).unwrap();
        let equity = log.equity_path();
        prop_assert_eq!(equity[0], 1.0);
        prop_assert!(equity.iter().all(|&e| e > 0.0));
        let dd = max_drawdown(&equity);
        prop_assert!((-1.0..=0.0).contains(&dd));
        prop_assert!((0.0..=1.0).contains(&accuracy(&preds, &labels)));
        prop_assert!((0.0..=1.0).contains(&f1_score(&preds, &labels)));
        let cum_return: f64 = log.entries.iter().map(|e| f64::from(e.position) * e.ret).sum();
        prop_assert!(log.final_equity().ln() <= cum_return + 1e-12);
        let flat = simulate(&dates, &vec![0; days.len()], &rets, TradeMode::LongFlat).unwrap();
        prop_assert_eq!(flat.final_equity(), 1.0);
    }
}
