use biqa_core::gbdt::{best_split, fit, predict, GbdtConfig, GbdtModel, MatrixView, Node, RegressionTree};
use biqa_core::Sequential;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(0..levels) as f64 / 2.0).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| x[i * d] * 1.5 - x[i * d + d - 1] + rng.random_range(-0.5..0.5))
        .collect();
    (x, y)
}

fn sse(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|a| (a - m).powi(2)).sum()
}

/// Every feature and every midpoint between distinct values, scored by
/// two-pass SSE reduction.
fn exhaustive_best(x: &[f64], y: &[f64], n: usize, d: usize) -> Option<(f64, Vec<(usize, f64)>)> {
    let total = sse(y);
    let mut gains = Vec::new();
    for f in 0..d {
        let mut vals: Vec<f64> = (0..n).map(|i| x[i * d + f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| x[i * d + f] <= t);
            let yl: Vec<f64> = l.iter().map(|&i| y[i]).collect();
            let yr: Vec<f64> = r.iter().map(|&i| y[i]).collect();
            gains.push((f, t, total - sse(&yl) - sse(&yr)));
        }
    }
    let best = gains.iter().map(|g| g.2).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    let near: Vec<(usize, f64)> = gains
        .iter()
        .filter(|g| g.2 >= best - 1e-9)
        .map(|g| (g.0, g.1))
        .collect();
    Some((best, near))
}

#[test]
fn split_search_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..300 {
        let n = rng.random_range(2..=32);
        let d = rng.random_range(1..=4);
        let (x, y) = random_data(&mut rng, n, d, 6);
        let rows: Vec<usize> = (0..n).collect();
        let view = MatrixView::new(n, d, &x).unwrap();
        let got = best_split(view, &y, &rows, 1);
        match (got, exhaustive_best(&x, &y, n, d)) {
            (None, None) => {}
            (Some(g), Some((best, near))) => {
                assert!((g.gain - best).abs() < 1e-9, "{} vs {best}", g.gain);
                // the chosen split partitions rows like one of the optimal midpoints
                let side = |f: usize, t: f64| -> Vec<bool> { (0..n).map(|i| x[i * d + f] <= t).collect() };
                let mine = side(g.feature, g.threshold);
                assert!(near.iter().any(|&(f, t)| f == g.feature && side(f, t) == mine));
                // lowest feature among the optimal ones
                assert_eq!(g.feature, near.iter().map(|p| p.0).min().unwrap());
            }
            (g, o) => panic!("split {g:?} vs oracle {o:?}"),
        }
    }
}

#[test]
fn training_error_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, y) = random_data(&mut rng, 200, 4, 30);
    let (xv, yv) = random_data(&mut rng, 50, 4, 30);
    let cfg = GbdtConfig {
        learning_rate: 0.3,
        max_depth: 3,
        n_estimators: 200,
        early_stopping_rounds: 1000,
        ..GbdtConfig::default()
    };
    let (_, report) = fit(
        MatrixView::new(200, 4, &x).unwrap(),
        &y,
        MatrixView::new(50, 4, &xv).unwrap(),
        &yv,
        &cfg,
        0,
        &Sequential,
    )
    .unwrap();
    assert_eq!(report.train_rmse.len(), 201);
    for w in report.train_rmse.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn early_stopping_on_adversarial_validation() {
    let n = 200;
    let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 4.0 * v + 1.0).collect();
    let y_val: Vec<f64> = x.iter().map(|v| 5.0 - 4.0 * v).collect();
    let view = MatrixView::new(n, 1, &x).unwrap();
    let cfg = GbdtConfig::default();
    let (model, report) = fit(view, &y, view, &y_val, &cfg, 0, &Sequential).unwrap();
    assert!(report.stopped_early);
    assert!(model.n_trees_used < 10, "{}", model.n_trees_used);
    assert_eq!(report.val_rmse.len(), cfg.early_stopping_rounds + model.n_trees_used + 1);
}

#[test]
fn deterministic_with_subsampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, y) = random_data(&mut rng, 120, 3, 20);
    let view = MatrixView::new(120, 3, &x).unwrap();
    let cfg = GbdtConfig {
        subsample: 0.5,
        n_estimators: 50,
        ..GbdtConfig::default()
    };
    let a = fit(view, &y, view, &y, &cfg, 42, &Sequential).unwrap().0;
    let b = fit(view, &y, view, &y, &cfg, 42, &Sequential).unwrap().0;
    let c = fit(view, &y, view, &y, &cfg, 43, &Sequential).unwrap().0;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

fn random_tree(rng: &mut ChaCha8Rng, d: usize, depth: usize) -> RegressionTree {
    fn grow(rng: &mut ChaCha8Rng, nodes: &mut Vec<Node>, d: usize, depth: usize) -> u32 {
        let id = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        if depth == 0 || rng.random_bool(0.25) {
            nodes[id] = Node::Leaf {
                value: rng.random_range(-2.0..2.0),
            };
        } else {
            let feature = rng.random_range(0..d) as u32;
            let threshold = rng.random_range(-1.0..1.0);
            let left = grow(rng, nodes, d, depth - 1);
            let right = grow(rng, nodes, d, depth - 1);
            nodes[id] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        id as u32
    }
    let mut nodes = Vec::new();
    grow(rng, &mut nodes, d, depth);
    RegressionTree { nodes }
}

fn walk(tree: &RegressionTree, node: usize, row: &[f64]) -> f64 {
    match tree.nodes[node] {
        Node::Leaf { value } => value,
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if row[feature as usize] <= threshold {
                walk(tree, left as usize, row)
            } else {
                walk(tree, right as usize, row)
            }
        }
    }
}

#[test]
fn prediction_matches_naive_traversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let d = rng.random_range(1..6);
        let trees: Vec<RegressionTree> = (0..rng.random_range(0..30)).map(|_| random_tree(&mut rng, d, 5)).collect();
        let used = rng.random_range(0..=trees.len());
        let model = GbdtModel {
            base_score: rng.random_range(1.0..5.0),
            learning_rate: 0.1,
            n_features: d,
            n_trees_used: used,
            trees,
        };
        model.validate().unwrap();
        let x: Vec<f64> = (0..50 * d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let got = predict(&model, MatrixView::new(50, d, &x).unwrap()).unwrap();
        for (i, g) in got.iter().enumerate() {
            let row = &x[i * d..(i + 1) * d];
            let mut want = 0.0;
            for t in &model.trees[..used] {
                want += walk(t, 0, row);
            }
            assert_eq!(*g, model.base_score + 0.1 * want);
        }
    }
}

#[test]
fn hand_evaluated_stump() {
    let model = GbdtModel {
        base_score: 3.0,
        learning_rate: 0.5,
        n_features: 1,
        n_trees_used: 1,
        trees: vec![RegressionTree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { value: -1.0 },
                Node::Leaf { value: 1.0 },
            ],
        }],
    };
    let p = predict(&model, MatrixView::new(2, 1, &[-5.0, 5.0]).unwrap()).unwrap();
    assert_eq!(p, vec![2.5, 3.5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn predictions_within_leaf_bound(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_data(&mut rng, 60, 3, 10);
        let view = MatrixView::new(60, 3, &x).unwrap();
        let cfg = GbdtConfig { n_estimators: 40, max_depth: 3, learning_rate: 0.2, ..GbdtConfig::default() };
        let (model, _) = fit(view, &y, view, &y, &cfg, seed, &Sequential).unwrap();
        let m = model.learning_rate * model.n_trees_used as f64
            * model.active_trees().iter().map(|t| t.max_abs_leaf()).fold(0.0, f64::max);
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min) - m;
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + m;
        let probe: Vec<f64> = (0..300).map(|_| rng.random_range(-10.0..10.0)).collect();
        for p in predict(&model, MatrixView::new(100, 3, &probe).unwrap()).unwrap() {
            prop_assert!(p >= lo - 1e-9 && p <= hi + 1e-9);
        }
        for t in model.active_trees() {
            prop_assert!(t.depth() <= 3);
        }
    }
}
