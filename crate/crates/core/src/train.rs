//! End-to-end model fitting over abstract subimage sources.

use alloc::vec::Vec;

use crate::augment::AugmentConfig;
use crate::dct::Dct8;
use crate::error::Error;
use crate::exec::Executor;
use crate::features::{
    column_meta, fit_feature_params, raw_features, FeatureConfig, FeatureMatrix, SubimageSource,
    CHANNELS,
};
use crate::gbdt::{self, FitReport, GbdtConfig, MatrixView};
use crate::manifest::Scenario;
use crate::model::{Provenance, QualityModel, RftSummary, FORMAT_VERSION};
use crate::rft::{self, per_channel_counts, Selection, DEFAULT_BINS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub augment: AugmentConfig,
    pub features: FeatureConfig,
    pub bins: usize,
    pub selection: Selection,
    pub gbdt: GbdtConfig,
}

impl PipelineConfig {
    /// Defaults: 25 patches of 96×96 with 600 features per channel for
    /// synthetic data; 6 crops of 384×384 with 2 500 features overall for
    /// authentic data.
    pub fn for_scenario(scenario: Scenario) -> Self {
        Self {
            augment: AugmentConfig::for_scenario(scenario),
            features: FeatureConfig::default(),
            bins: DEFAULT_BINS,
            selection: match scenario {
                Scenario::Synthetic => Selection::PerChannel([600; CHANNELS]),
                Scenario::Authentic => Selection::Total(2500),
            },
            gbdt: GbdtConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.augment.validate()?;
        self.features.validate()?;
        self.gbdt.validate()?;
        if self.bins == 0 {
            return Err(Error::InvalidConfig("bins must be positive".into()));
        }
        Ok(())
    }
}

pub struct TrainOutcome {
    pub model: QualityModel,
    pub report: FitReport,
    pub train_rows: usize,
    pub val_rows: usize,
    pub selected_per_channel: [usize; CHANNELS],
}

/// Fits feature parameters, feature selection and the regressor.
///
/// Only `train` influences the feature parameters and the selection; `val`
/// is used solely for early stopping.
pub fn train_model<S: SubimageSource, E: Executor>(
    train: &S,
    val: &S,
    cfg: &PipelineConfig,
    provenance: Provenance,
    exec: &E,
) -> Result<TrainOutcome, S::Error> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::InsufficientData("training split is empty".into()).into());
    }
    if val.is_empty() {
        return Err(Error::InsufficientData("validation split is empty".into()).into());
    }

    let fit = fit_feature_params(train, &cfg.features, exec)?;
    let x_train = fit.matrix();
    let y_train: Vec<f64> = fit.mos.iter().flatten().copied().collect();
    if x_train.rows < 2 {
        return Err(Error::InsufficientData("fewer than two training subimages".into()).into());
    }

    let dct = Dct8::new();
    let val_parts = exec.map(val.len(), |i| {
        let subs = val.subimages(i)?;
        let mut rows = Vec::with_capacity(subs.len());
        for s in &subs {
            rows.push((
                raw_features(s, &fit.params.hop2, &fit.params.config, &dct, None)?,
                s.mos,
            ));
        }
        Ok::<_, S::Error>(rows)
    });
    let mut val_raw = Vec::new();
    let mut y_val = Vec::new();
    for part in val_parts {
        for (raw, mos) in part? {
            val_raw.push(raw);
            y_val.push(mos);
        }
    }
    let x_val = crate::features::matrix_from_raw(&val_raw, &fit.params);
    if x_val.rows == 0 {
        return Err(Error::InsufficientData("no validation subimages".into()).into());
    }

    let mut ranking = rft::rank_features(&x_train, &y_train, cfg.bins, exec)?;
    let meta = column_meta();
    let selected = rft::select(&ranking, &meta, cfg.selection);
    if selected.is_empty() {
        return Err(Error::InsufficientData("feature selection kept no columns".into()).into());
    }
    ranking.selected = selected.clone();

    let xs: FeatureMatrix = x_train.select_columns(&selected);
    let xv: FeatureMatrix = x_val.select_columns(&selected);
    let (gbdt, report) = gbdt::fit(
        MatrixView::from(&xs),
        &y_train,
        MatrixView::from(&xv),
        &y_val,
        &cfg.gbdt,
        provenance.seed,
        exec,
    )?;

    let model = QualityModel {
        format_version: FORMAT_VERSION,
        augment: cfg.augment,
        feature_params: fit.params,
        rft: RftSummary {
            bins: cfg.bins as u32,
            costs: ranking.costs,
            selected: selected.clone(),
        },
        gbdt,
        provenance,
    };
    Ok(TrainOutcome {
        selected_per_channel: per_channel_counts(&selected, &meta),
        train_rows: xs.rows,
        val_rows: xv.rows,
        model,
        report,
    })
}
