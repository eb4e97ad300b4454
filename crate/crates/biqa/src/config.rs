//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Recognised keys:
//! `patch_size`, `patch_count`, `crop_count`, `use_flips`, `target_side`,
//! `pooling_window`, `spectral_region`, `bins`, `selection`,
//! `learning_rate`, `max_depth`, `n_estimators`, `early_stopping_rounds`,
//! `min_samples_leaf`, `subsample`.
//!
//! `selection` takes `per_channel:Y,U,V`, `total:N` or `elbow`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use biqa_core::rft::Selection;
use biqa_core::train::PipelineConfig;

use crate::error::{BiqaError, Result};

pub fn parse_selection(s: &str) -> Option<Selection> {
    let s = s.trim();
    if s == "elbow" {
        return Some(Selection::Elbow);
    }
    if let Some(n) = s.strip_prefix("total:") {
        return n.trim().parse().ok().map(Selection::Total);
    }
    let counts: Vec<usize> = s
        .strip_prefix("per_channel:")?
        .split(',')
        .map(|v| v.trim().parse().ok())
        .collect::<Option<_>>()?;
    let counts: [usize; 3] = counts.try_into().ok()?;
    Some(Selection::PerChannel(counts))
}

pub fn selection_to_string(s: Selection) -> String {
    match s {
        Selection::Elbow => "elbow".into(),
        Selection::Total(n) => format!("total:{n}"),
        Selection::PerChannel([y, u, v]) => format!("per_channel:{y},{u},{v}"),
    }
}

fn value<T: FromStr>(path: &Path, line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| {
        BiqaError::Usage(format!(
            "{}:{line}: bad value `{raw}` for `{key}`",
            path.display()
        ))
    })
}

/// Applies every assignment in `text` to `cfg`; unknown keys are errors.
pub fn apply(cfg: &mut PipelineConfig, text: &str, path: &Path) -> Result<()> {
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, raw)) = trimmed.split_once('=') else {
            return Err(BiqaError::Usage(format!(
                "{}:{line}: expected `key = value`",
                path.display()
            )));
        };
        let (key, raw) = (key.trim(), raw.trim());
        match key {
            "patch_size" => cfg.augment.patch_size = value(path, line, key, raw)?,
            "patch_count" => cfg.augment.patch_count = value(path, line, key, raw)?,
            "crop_count" => cfg.augment.crop_count = value(path, line, key, raw)?,
            "use_flips" => cfg.augment.use_flips = value(path, line, key, raw)?,
            "target_side" => cfg.augment.target_side = value(path, line, key, raw)?,
            "pooling_window" => cfg.features.pooling_window = value(path, line, key, raw)?,
            "spectral_region" => cfg.features.spectral_region = value(path, line, key, raw)?,
            "bins" => cfg.bins = value(path, line, key, raw)?,
            "selection" => {
                cfg.selection = parse_selection(raw).ok_or_else(|| {
                    BiqaError::Usage(format!("{}:{line}: bad selection `{raw}`", path.display()))
                })?
            }
            "learning_rate" => cfg.gbdt.learning_rate = value(path, line, key, raw)?,
            "max_depth" => cfg.gbdt.max_depth = value(path, line, key, raw)?,
            "n_estimators" => cfg.gbdt.n_estimators = value(path, line, key, raw)?,
            "early_stopping_rounds" => cfg.gbdt.early_stopping_rounds = value(path, line, key, raw)?,
            "min_samples_leaf" => cfg.gbdt.min_samples_leaf = value(path, line, key, raw)?,
            "subsample" => cfg.gbdt.subsample = value(path, line, key, raw)?,
            other => {
                return Err(BiqaError::Usage(format!(
                    "{}:{line}: unknown key `{other}`",
                    path.display()
                )))
            }
        }
    }
    Ok(())
}

pub fn apply_file(cfg: &mut PipelineConfig, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| BiqaError::io(path, e))?;
    apply(cfg, &text, path)
}
