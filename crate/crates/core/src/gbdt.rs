//! Squared-error gradient boosting with exact greedy regression trees.
//!
//! Each stage fits a depth-limited tree to the current residuals. Trees are
//! grown level by level: every feature column is scanned once per level in
//! presorted order, evaluating all nodes of that level together. The best
//! split of a node maximises the variance reduction; ties go to the lowest
//! feature index, then the lowest threshold, so the result is independent
//! of how features are spread over workers.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::features::FeatureMatrix;

const NONE: u32 = u32::MAX;
/// Splits must reduce the residual sum of squares by more than this.
const MIN_GAIN: f64 = 1e-12;

/// Borrowed row-major matrix.
#[derive(Debug, Clone, Copy)]
pub struct MatrixView<'a> {
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

impl<'a> MatrixView<'a> {
    pub fn new(rows: usize, cols: usize, data: &'a [f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl<'a> From<&'a FeatureMatrix> for MatrixView<'a> {
    fn from(m: &'a FeatureMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: &m.values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtConfig {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_estimators: usize,
    pub early_stopping_rounds: usize,
    pub min_samples_leaf: usize,
    pub subsample: f64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            max_depth: 5,
            n_estimators: 1000,
            early_stopping_rounds: 50,
            min_samples_leaf: 1,
            subsample: 1.0,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if self.n_estimators == 0 {
            return bad("n_estimators must be at least 1");
        }
        if self.early_stopping_rounds == 0 {
            return bad("early_stopping_rounds must be at least 1");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

/// Node 0 is the root; children always have larger indices than parents.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = *node {
                depth[left as usize] = depth[i] + 1;
                depth[right as usize] = depth[i] + 1;
                max = max.max(depth[i] + 1);
            }
        }
        max
    }

    pub fn max_abs_leaf(&self) -> f64 {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { value } => Some(libm::fabs(*value)),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// Checks that the nodes form a single binary tree rooted at 0.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::CorruptModel(m.into()));
        if self.nodes.is_empty() {
            return bad("empty tree");
        }
        let mut parents = vec![0u8; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature as usize >= n_features || threshold.is_nan() {
                        return bad("split refers to an unknown feature");
                    }
                    for child in [left as usize, right as usize] {
                        if child <= i || child >= self.nodes.len() {
                            return bad("child index out of order");
                        }
                        parents[child] += 1;
                    }
                }
                Node::Leaf { value } => {
                    if !value.is_finite() {
                        return bad("non-finite leaf");
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return bad("node is not referenced exactly once");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub n_features: usize,
    pub n_trees_used: usize,
    pub trees: Vec<RegressionTree>,
}

impl GbdtModel {
    pub fn constant(value: f64, n_features: usize) -> Self {
        Self {
            base_score: value,
            learning_rate: 1.0,
            n_features,
            n_trees_used: 0,
            trees: Vec::new(),
        }
    }

    pub fn active_trees(&self) -> &[RegressionTree] {
        &self.trees[..self.n_trees_used]
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.active_trees().iter().map(|t| t.predict_row(row)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees_used > self.trees.len() {
            return Err(Error::CorruptModel("n_trees_used exceeds tree count".into()));
        }
        if !(self.base_score.is_finite() && self.learning_rate.is_finite()) {
            return Err(Error::CorruptModel("non-finite model scalars".into()));
        }
        for t in &self.trees {
            t.validate(self.n_features)?;
        }
        Ok(())
    }
}

pub fn predict(model: &GbdtModel, x: MatrixView<'_>) -> Result<Vec<f64>> {
    if x.cols != model.n_features {
        return Err(Error::ColumnMismatch {
            expected: model.n_features,
            got: x.cols,
        });
    }
    Ok((0..x.rows).map(|i| model.predict_row(x.row(i))).collect())
}

/// Per-stage diagnostics; index `t` is the state after `t` trees.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitReport {
    pub train_rmse: Vec<f64>,
    pub val_rmse: Vec<f64>,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Reduction of the residual sum of squares.
    pub gain: f64,
}

struct Presorted {
    n: usize,
    cols: usize,
    /// Column-major copy of the matrix.
    values: Vec<f64>,
    /// Per column, row indices by ascending value (ties by row).
    order: Vec<Vec<u32>>,
    /// Column values in `order`.
    sorted: Vec<Vec<f64>>,
}

impl Presorted {
    fn new<E: Executor>(x: MatrixView<'_>, exec: &E) -> Self {
        let n = x.rows;
        let mut values = vec![0.0; n * x.cols];
        for i in 0..n {
            for (j, &v) in x.row(i).iter().enumerate() {
                values[j * n + i] = v;
            }
        }
        let order = exec.map(x.cols, |j| {
            let col = &values[j * n..(j + 1) * n];
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            idx
        });
        let sorted = order
            .iter()
            .enumerate()
            .map(|(j, idx)| idx.iter().map(|&r| values[j * n + r as usize]).collect())
            .collect();
        Self {
            n,
            cols: x.cols,
            values,
            order,
            sorted,
        }
    }

    #[inline]
    fn value(&self, feature: usize, row: usize) -> f64 {
        self.values[feature * self.n + row]
    }
}

#[derive(Clone, Copy)]
struct NodeStat {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl NodeStat {
    const EMPTY: Self = Self {
        count: 0,
        sum: 0.0,
        sum_sq: 0.0,
    };

    fn add(&mut self, r: f64) {
        self.count += 1;
        self.sum += r;
        self.sum_sq += r * r;
    }

    /// Gains closer than this are ties. Equal partitions reached through
    /// different features sum in different orders and differ by rounding.
    fn tie_tolerance(&self) -> f64 {
        1e-12 * self.sum_sq
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Best split of every open node (`slot_of[node] != NONE`).
fn find_splits<E: Executor>(
    ps: &Presorted,
    node_of: &[u32],
    slot_of: &[u32],
    stats: &[NodeStat],
    residual: &[f64],
    min_leaf: usize,
    exec: &E,
) -> Vec<Option<SplitChoice>> {
    let slots = stats.len();
    let per_feature = exec.map(ps.cols, |f| {
        let mut cnt = vec![0usize; slots];
        let mut sum = vec![0.0f64; slots];
        let mut last = vec![0.0f64; slots];
        let mut best: Vec<Option<SplitChoice>> = vec![None; slots];
        for (&r, &v) in ps.order[f].iter().zip(&ps.sorted[f]) {
            let r = r as usize;
            let node = node_of[r];
            if node == NONE {
                continue;
            }
            let s = slot_of[node as usize];
            if s == NONE {
                continue;
            }
            let s = s as usize;
            if cnt[s] > 0 && v > last[s] {
                let st = stats[s];
                let nl = cnt[s];
                let nr = st.count - nl;
                if nl >= min_leaf && nr >= min_leaf {
                    let sl = sum[s];
                    let sr = st.sum - sl;
                    let gain = sl * sl / nl as f64 + sr * sr / nr as f64
                        - st.sum * st.sum / st.count as f64;
                    if best[s].is_none_or(|b| gain > b.gain + st.tie_tolerance()) {
                        best[s] = Some(SplitChoice {
                            feature: f,
                            threshold: midpoint(last[s], v),
                            gain,
                        });
                    }
                }
            }
            cnt[s] += 1;
            sum[s] += residual[r];
            last[s] = v;
        }
        best
    });
    let mut best: Vec<Option<SplitChoice>> = vec![None; slots];
    for cand in per_feature {
        for ((b, c), st) in best.iter_mut().zip(cand).zip(stats) {
            if let Some(c) = c {
                if b.is_none_or(|b| c.gain > b.gain + st.tie_tolerance()) {
                    *b = Some(c);
                }
            }
        }
    }
    best
}

/// Grows one tree on the rows marked in `node_of` (others carry `NONE`).
fn grow_tree<E: Executor>(
    ps: &Presorted,
    residual: &[f64],
    mut node_of: Vec<u32>,
    max_depth: usize,
    min_leaf: usize,
    exec: &E,
) -> RegressionTree {
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stats = vec![NodeStat::EMPTY];
    for (r, &node) in node_of.iter().enumerate() {
        if node != NONE {
            stats[0].add(residual[r]);
        }
    }
    let mut open: Vec<u32> = vec![0];
    for _depth in 0..max_depth {
        let mut slot_of = vec![NONE; nodes.len()];
        let open_stats: Vec<NodeStat> = open.iter().map(|&n| stats[n as usize]).collect();
        for (s, &n) in open.iter().enumerate() {
            slot_of[n as usize] = s as u32;
        }
        let best = find_splits(ps, &node_of, &slot_of, &open_stats, residual, min_leaf, exec);
        let mut next = Vec::new();
        let mut children = vec![(NONE, NONE); nodes.len()];
        for (s, &n) in open.iter().enumerate() {
            let Some(choice) = best[s] else { continue };
            if choice.gain <= MIN_GAIN {
                continue;
            }
            let left = nodes.len() as u32;
            let right = left + 1;
            nodes[n as usize] = Node::Split {
                feature: choice.feature as u32,
                threshold: choice.threshold,
                left,
                right,
            };
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            stats.push(NodeStat::EMPTY);
            stats.push(NodeStat::EMPTY);
            children[n as usize] = (left, right);
            next.push(left);
            next.push(right);
        }
        if next.is_empty() {
            break;
        }
        for (r, node) in node_of.iter_mut().enumerate() {
            if *node == NONE {
                continue;
            }
            let (left, right) = children[*node as usize];
            if left == NONE {
                continue;
            }
            let Node::Split {
                feature, threshold, ..
            } = nodes[*node as usize]
            else {
                unreachable!()
            };
            let child = if ps.value(feature as usize, r) <= threshold {
                left
            } else {
                right
            };
            *node = child;
            stats[child as usize].add(residual[r]);
        }
        open = next;
    }
    for (node, st) in nodes.iter_mut().zip(&stats) {
        if let Node::Leaf { value } = node {
            *value = if st.count > 0 {
                st.sum / st.count as f64
            } else {
                0.0
            };
        }
    }
    RegressionTree { nodes }
}

/// Best variance-reduction split of `rows`, or `None` when no admissible
/// split exists.
pub fn best_split(x: MatrixView<'_>, residual: &[f64], rows: &[usize], min_samples_leaf: usize) -> Option<SplitChoice> {
    let ps = Presorted::new(x, &crate::exec::Sequential);
    let mut node_of = vec![NONE; x.rows];
    let mut stat = NodeStat::EMPTY;
    for &r in rows {
        node_of[r] = 0;
        stat.add(residual[r]);
    }
    find_splits(
        &ps,
        &node_of,
        &[0],
        &[stat],
        residual,
        min_samples_leaf.max(1),
        &crate::exec::Sequential,
    )[0]
}

fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    libm::sqrt(sse / y.len() as f64)
}

pub fn fit<E: Executor>(
    train: MatrixView<'_>,
    y: &[f64],
    val: MatrixView<'_>,
    y_val: &[f64],
    cfg: &GbdtConfig,
    seed: u64,
    exec: &E,
) -> Result<(GbdtModel, FitReport)> {
    cfg.validate()?;
    if train.rows == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if val.rows == 0 {
        return Err(Error::InsufficientData("validation set is empty".into()));
    }
    for (rows, labels) in [(train.rows, y.len()), (val.rows, y_val.len())] {
        if rows != labels {
            return Err(Error::LengthMismatch {
                left: rows,
                right: labels,
            });
        }
    }
    if val.cols != train.cols {
        return Err(Error::ColumnMismatch {
            expected: train.cols,
            got: val.cols,
        });
    }

    let n = train.rows;
    let base = y.iter().sum::<f64>() / n as f64;
    let ps = Presorted::new(train, exec);
    let mut pred = vec![base; n];
    let mut pred_val = vec![base; val.rows];
    let mut report = FitReport {
        train_rmse: vec![rmse(&pred, y)],
        val_rmse: vec![rmse(&pred_val, y_val)],
        stopped_early: false,
    };
    let mut trees = Vec::new();
    let mut best = (report.val_rmse[0], 0usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_size = (libm::round(cfg.subsample * n as f64) as usize).clamp(1, n);
    let mut residual = vec![0.0; n];

    for t in 1..=cfg.n_estimators {
        for ((r, &target), &p) in residual.iter_mut().zip(y).zip(&pred) {
            *r = target - p;
        }
        let node_of = if sample_size < n {
            let mut mask = vec![NONE; n];
            for i in rand::seq::index::sample(&mut rng, n, sample_size) {
                mask[i] = 0;
            }
            mask
        } else {
            vec![0; n]
        };
        let tree = grow_tree(&ps, &residual, node_of, cfg.max_depth, cfg.min_samples_leaf, exec);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += cfg.learning_rate * tree.predict_row(train.row(i));
        }
        for (i, p) in pred_val.iter_mut().enumerate() {
            *p += cfg.learning_rate * tree.predict_row(val.row(i));
        }
        trees.push(tree);
        report.train_rmse.push(rmse(&pred, y));
        let v = rmse(&pred_val, y_val);
        report.val_rmse.push(v);
        if v < best.0 {
            best = (v, t);
        } else if t - best.1 >= cfg.early_stopping_rounds {
            report.stopped_early = true;
            break;
        }
    }
    trees.truncate(best.1);
    Ok((
        GbdtModel {
            base_score: base,
            learning_rate: cfg.learning_rate,
            n_features: train.cols,
            n_trees_used: best.1,
            trees,
        },
        report,
    ))
}
