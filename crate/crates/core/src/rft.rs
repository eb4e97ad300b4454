//! Relevant feature test: rank feature dimensions by how well a single
//! threshold on the feature explains the labels.
//!
//! For a candidate threshold `t` the samples split into `f <= t` and
//! `f > t`; the cost is the size-weighted mean of the two sides' RMSE about
//! their own means. A feature's cost is the minimum over candidates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::features::{Channel, ColumnMeta, FeatureMatrix, CHANNELS};

pub const DEFAULT_BINS: usize = 16;

/// Where thresholds are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidates {
    /// `bins` equally spaced interior points of `[min, max]`.
    Uniform(usize),
    /// Every midpoint between consecutive distinct sorted feature values.
    AllMidpoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RftRanking {
    pub costs: Vec<f64>,
    /// Column indices by ascending cost, ties by column index.
    pub order: Vec<usize>,
    pub selected: Vec<usize>,
    pub bins: usize,
}

/// Welford running sums of squared deviations: entry `k` covers the first
/// `k` values.
fn running_m2(values: impl Iterator<Item = f64>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, y) in values.enumerate() {
        let d = y - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (y - mean);
        out.push(m2);
    }
    out
}

pub fn rft_cost(feature: &[f64], targets: &[f64], candidates: Candidates) -> Result<f64> {
    if feature.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: feature.len(),
            right: targets.len(),
        });
    }
    let n = feature.len();
    if n < 2 {
        return Err(Error::EmptyInput);
    }
    if let Candidates::Uniform(0) = candidates {
        return Err(Error::InvalidConfig("bins must be positive".into()));
    }

    let mut pairs: Vec<(f64, f64)> = feature.iter().copied().zip(targets.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let left_m2 = running_m2(pairs.iter().map(|p| p.1), n);
    let right_m2 = running_m2(pairs.iter().rev().map(|p| p.1), n);
    let total = n as f64;
    let whole = libm::sqrt(left_m2[n] / total);

    // side RMSE weighted by size: k·sqrt(m2/k) = sqrt(k·m2)
    let cost_at = |k: usize| -> f64 {
        let left = libm::sqrt(k as f64 * left_m2[k].max(0.0));
        let right = libm::sqrt((n - k) as f64 * right_m2[n - k].max(0.0));
        (left + right) / total
    };

    let mut best = f64::INFINITY;
    match candidates {
        Candidates::Uniform(bins) => {
            let lo = pairs[0].0;
            let hi = pairs[n - 1].0;
            for b in 1..=bins {
                let t = lo + (hi - lo) * b as f64 / (bins + 1) as f64;
                let k = pairs.partition_point(|p| p.0 <= t);
                if k > 0 && k < n {
                    best = best.min(cost_at(k));
                }
            }
        }
        Candidates::AllMidpoints => {
            for k in 1..n {
                if pairs[k - 1].0 < pairs[k].0 {
                    best = best.min(cost_at(k));
                }
            }
        }
    }
    Ok(if best.is_finite() { best } else { whole })
}

/// Ranks every column of `x` against `y`. Callers pass training rows only.
pub fn rank_features<E: Executor>(x: &FeatureMatrix, y: &[f64], bins: usize, exec: &E) -> Result<RftRanking> {
    if x.rows != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows,
            right: y.len(),
        });
    }
    if x.rows < 2 {
        return Err(Error::EmptyInput);
    }
    let costs = exec
        .map(x.cols, |j| rft_cost(&x.column(j), y, Candidates::Uniform(bins)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ranking_from_costs(costs, bins))
}

pub fn ranking_from_costs(costs: Vec<f64>, bins: usize) -> RftRanking {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    RftRanking {
        selected: order.clone(),
        costs,
        order,
        bins,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Lowest-cost prefix of each channel's columns.
    PerChannel([usize; CHANNELS]),
    /// Lowest-cost prefix over all columns.
    Total(usize),
    /// Per-channel cutoff at the knee of the sorted cost curve.
    Elbow,
}

/// Knee of an ascending cost curve: the number of entries before the point
/// where the window-3 moving average bends most sharply (largest absolute
/// discrete second difference, earliest on ties). Curves with fewer than
/// five entries have no interior bend and are kept whole.
pub fn elbow_index(sorted_costs: &[f64]) -> usize {
    let n = sorted_costs.len();
    if n < 3 {
        return n;
    }
    // centred window-3 average, defined where the window is complete
    let smooth: Vec<f64> = sorted_costs.windows(3).map(|w| (w[0] + w[1] + w[2]) / 3.0).collect();
    if smooth.len() < 3 {
        return n;
    }
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 1..smooth.len() - 1 {
        let d2 = libm::fabs(smooth[i - 1] - 2.0 * smooth[i] + smooth[i + 1]);
        if d2 > best_val {
            best_val = d2;
            best = i;
        }
    }
    // smooth[i] is centred on sorted_costs[i + 1]
    best + 1
}

/// Picks the selected columns, returned in global ascending-cost order.
/// Requested counts above what a channel offers are clamped.
pub fn select(ranking: &RftRanking, meta: &[ColumnMeta], selection: Selection) -> Vec<usize> {
    let channel_of = |j: usize| meta[j].channel.index();
    let limits: [usize; CHANNELS] = match selection {
        Selection::Total(k) => {
            return ranking.order.iter().copied().take(k).collect();
        }
        Selection::PerChannel(counts) => counts,
        Selection::Elbow => {
            let mut limits = [0; CHANNELS];
            for ch in Channel::ALL {
                let curve: Vec<f64> = ranking
                    .order
                    .iter()
                    .filter(|&&j| channel_of(j) == ch.index())
                    .map(|&j| ranking.costs[j])
                    .collect();
                limits[ch.index()] = elbow_index(&curve);
            }
            limits
        }
    };
    let mut taken = [0usize; CHANNELS];
    let mut out = Vec::new();
    for &j in &ranking.order {
        let ch = channel_of(j);
        if taken[ch] < limits[ch] {
            taken[ch] += 1;
            out.push(j);
        }
    }
    out
}

/// Number of selected columns per channel.
pub fn per_channel_counts(selected: &[usize], meta: &[ColumnMeta]) -> [usize; CHANNELS] {
    let mut counts = [0; CHANNELS];
    for &j in selected {
        counts[meta[j].channel.index()] += 1;
    }
    counts
}
