use alloc::vec::Vec;

use crate::augment::{augment, AugmentConfig, Subimage};
use crate::dct::Dct8;
use crate::error::{Error, Result};
use crate::features::{feature_vector, FeaturePipelineParams, N_FEATURES};
use crate::gbdt::GbdtModel;
use crate::image::YuvImage;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 of the rows the model was allowed to see.
    pub manifest_digest: [u8; 32],
    /// Seconds since the Unix epoch; 0 when unset.
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RftSummary {
    pub bins: u32,
    /// Cost of every unsupervised feature column.
    pub costs: Vec<f64>,
    /// Columns fed to the regressor, in regressor column order.
    pub selected: Vec<usize>,
}

/// A trained model: augmentation rule, feature parameters, selected
/// columns and the tree ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityModel {
    pub format_version: u32,
    pub augment: AugmentConfig,
    pub feature_params: FeaturePipelineParams,
    pub rft: RftSummary,
    pub gbdt: GbdtModel,
    pub provenance: Provenance,
}

impl QualityModel {
    pub fn validate(&self) -> Result<()> {
        self.augment.validate()?;
        self.feature_params.validate()?;
        self.gbdt.validate()?;
        if self.rft.costs.len() != N_FEATURES {
            return Err(Error::CorruptModel("cost vector has the wrong length".into()));
        }
        if self.rft.selected.iter().any(|&j| j >= N_FEATURES) {
            return Err(Error::CorruptModel("selected column out of range".into()));
        }
        if self.rft.selected.len() != self.gbdt.n_features {
            return Err(Error::CorruptModel(
                "regressor width differs from the selected column count".into(),
            ));
        }
        Ok(())
    }

    /// Subimages used for prediction, produced with the training rule.
    pub fn subimages(&self, img: &YuvImage) -> Result<Vec<Subimage>> {
        augment(img, 0, 0.0, &self.augment)
    }

    /// Score of one full-width unsupervised feature vector.
    pub fn predict_features(&self, features: &[f64]) -> f64 {
        let mut row = Vec::with_capacity(self.rft.selected.len());
        row.extend(self.rft.selected.iter().map(|&j| features[j]));
        self.gbdt.predict_row(&row)
    }

    pub fn predict_subimages(&self, subs: &[Subimage]) -> Result<Vec<f64>> {
        let dct = Dct8::new();
        subs.iter()
            .map(|s| Ok(self.predict_features(&feature_vector(s, &self.feature_params, &dct)?)))
            .collect()
    }

    /// Mean of the per-subimage predictions.
    pub fn predict_image(&self, img: &YuvImage) -> Result<f64> {
        let scores = self.predict_subimages(&self.subimages(img)?)?;
        if scores.is_empty() {
            return Err(Error::ImageTooSmall {
                width: img.width(),
                height: img.height(),
                required: self.augment.subimage_side(),
            });
        }
        Ok(mean_score(&scores))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        crate::codec::encode_model(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        crate::codec::decode_model(bytes)
    }
}

/// Mean filter over subimage scores.
pub fn mean_score(scores: &[f64]) -> f64 {
    scores.iter().sum::<f64>() / scores.len() as f64
}
