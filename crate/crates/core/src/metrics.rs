//! Correlation between predicted and subjective scores.

use alloc::vec::Vec;

use crate::error::{Error, Result};

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Pearson linear correlation coefficient.
pub fn plcc(pred: &[f64], subj: &[f64]) -> Result<f64> {
    check_lengths(pred, subj)?;
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let ms = subj.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&p, &s) in pred.iter().zip(subj) {
        let (dp, ds) = (p - mp, s - ms);
        sxy += dp * ds;
        sxx += dp * dp;
        syy += ds * ds;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (libm::sqrt(sxx) * libm::sqrt(syy))).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn has_ties(values: &[f64]) -> bool {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Rank-difference form `1 - 6 Σ d² / (L (L² - 1))`; exact only without ties.
pub fn srocc_rank_difference(pred: &[f64], subj: &[f64]) -> Result<f64> {
    check_lengths(pred, subj)?;
    let (rp, rs) = (average_ranks(pred), average_ranks(subj));
    let d2: f64 = rp.iter().zip(&rs).map(|(a, b)| (a - b) * (a - b)).sum();
    let l = pred.len() as f64;
    Ok(1.0 - 6.0 * d2 / (l * (l * l - 1.0)))
}

/// Spearman rank-order correlation with average-rank tie handling.
pub fn srocc(pred: &[f64], subj: &[f64]) -> Result<f64> {
    check_lengths(pred, subj)?;
    if has_ties(pred) || has_ties(subj) {
        plcc(&average_ranks(pred), &average_ranks(subj))
    } else {
        srocc_rank_difference(pred, subj)
    }
}

/// Median with the mean of the middle pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}
