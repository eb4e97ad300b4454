//! Filesystem-backed training, prediction and toy-data generation.

use std::fs;
use std::path::{Path, PathBuf};

use biqa_core::augment::{augment, AugmentConfig, Subimage};
use biqa_core::features::SubimageSource;
use biqa_core::model::Provenance;
use biqa_core::toy::{reference_set, ToyDatasetSpec};
use biqa_core::train::{train_model, PipelineConfig, TrainOutcome};
use biqa_core::{DatasetManifest, Error as CoreError, Executor, ManifestEntry, QualityModel, Scenario, Split};
use sha2::{Digest, Sha256};

use crate::dataset::{load_image, resolve, save_manifest, save_png};
use crate::error::{BiqaError, Result};

pub const TOY_MANIFEST: &str = "manifest.csv";

/// Lazily decodes and augments the manifest rows at `indices`.
pub struct ManifestSource<'a> {
    manifest: &'a DatasetManifest,
    manifest_path: &'a Path,
    indices: Vec<usize>,
    augment: AugmentConfig,
}

impl<'a> ManifestSource<'a> {
    pub fn new(manifest: &'a DatasetManifest, manifest_path: &'a Path, indices: Vec<usize>, augment: AugmentConfig) -> Self {
        Self {
            manifest,
            manifest_path,
            indices,
            augment,
        }
    }
}

impl SubimageSource for ManifestSource<'_> {
    type Error = BiqaError;

    fn len(&self) -> usize {
        self.indices.len()
    }

    fn subimages(&self, i: usize) -> Result<Vec<Subimage>> {
        let idx = self.indices[i];
        let entry = &self.manifest.entries[idx];
        let path = resolve(self.manifest_path, &entry.image_path);
        let img = load_image(&path)?;
        augment(&img, idx, entry.mos, &self.augment).map_err(|e| BiqaError::in_file(path, e))
    }
}

/// SHA-256 over the rows a model may learn from (train and validation).
/// Test rows are excluded so that their labels cannot reach the model.
pub fn manifest_digest(m: &DatasetManifest) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(m.scenario.as_str().as_bytes());
    for e in &m.entries {
        if !matches!(e.split, Split::Train | Split::Val) {
            continue;
        }
        h.update(b"\n");
        h.update(e.image_path.as_bytes());
        h.update(b"\t");
        h.update(e.mos.to_bits().to_le_bytes());
        h.update(b"\t");
        h.update(e.reference_id.as_deref().unwrap_or("").as_bytes());
        h.update(b"\t");
        h.update(e.split.as_str().as_bytes());
    }
    h.finalize().into()
}

/// Trains on the rows marked `train`, early-stopping on the rows marked `val`.
pub fn train<E: Executor>(
    manifest: &DatasetManifest,
    manifest_path: &Path,
    cfg: &PipelineConfig,
    seed: u64,
    timestamp: i64,
    exec: &E,
) -> Result<TrainOutcome> {
    let train_idx = manifest.indices_in(Split::Train);
    let val_idx = manifest.indices_in(Split::Val);
    if train_idx.is_empty() {
        return Err(CoreError::InsufficientData("manifest has no training rows".into()).into());
    }
    if val_idx.is_empty() {
        return Err(CoreError::InsufficientData("manifest has no validation rows".into()).into());
    }
    log::info!(
        "training on {} images, validating on {}",
        train_idx.len(),
        val_idx.len()
    );
    let train_src = ManifestSource::new(manifest, manifest_path, train_idx, cfg.augment);
    let val_src = ManifestSource::new(manifest, manifest_path, val_idx, cfg.augment);
    let provenance = Provenance {
        seed,
        manifest_digest: manifest_digest(manifest),
        timestamp,
    };
    train_model(&train_src, &val_src, cfg, provenance, exec)
}

pub fn predict_file(model: &QualityModel, path: &Path) -> Result<f64> {
    let img = load_image(path)?;
    model.predict_image(&img).map_err(|e| BiqaError::in_file(path, e))
}

/// Scores every path; failures are returned per image.
pub fn predict_files<E: Executor>(model: &QualityModel, paths: &[PathBuf], exec: &E) -> Vec<Result<f64>> {
    exec.map(paths.len(), |i| predict_file(model, &paths[i]))
}

pub fn save_model(model: &QualityModel, path: &Path) -> Result<()> {
    fs::write(path, model.to_bytes()).map_err(|e| BiqaError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<QualityModel> {
    let bytes = fs::read(path).map_err(|e| BiqaError::io(path, e))?;
    QualityModel::from_bytes(&bytes).map_err(|e| BiqaError::in_file(path, e))
}

/// Renders the toy dataset into `out_dir` as PNGs plus `manifest.csv`.
pub fn gen_toy<E: Executor>(spec: &ToyDatasetSpec, out_dir: &Path, exec: &E) -> Result<DatasetManifest> {
    spec.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| BiqaError::io(out_dir, e))?;
    let parts = exec.map(spec.n_references, |r| -> Result<Vec<ManifestEntry>> {
        let mut rows = Vec::new();
        for item in reference_set(spec, r) {
            let name = format!("{}.png", item.file_stem());
            save_png(&item.image, &out_dir.join(&name))?;
            rows.push(ManifestEntry {
                image_path: name,
                mos: item.mos,
                reference_id: Some(format!("ref{r:03}")),
                distortion: Some(item.distortion.map_or("pristine", |(d, _)| d.name()).to_string()),
                split: Split::Unassigned,
            });
        }
        Ok(rows)
    });
    let mut entries = Vec::with_capacity(spec.n_images());
    for p in parts {
        entries.extend(p?);
    }
    let manifest = DatasetManifest {
        entries,
        scenario: Scenario::Synthetic,
        mos_range: (1.0, 5.0),
    };
    save_manifest(&manifest, &out_dir.join(TOY_MANIFEST))?;
    Ok(manifest)
}
