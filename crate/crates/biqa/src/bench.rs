//! Single-threaded throughput measurement with a per-stage breakdown.

use std::path::{Path, PathBuf};
use std::time::Instant;

use biqa_core::dct::Dct8;
use biqa_core::features::{apply_hop2, finalize, hop1_maps, pool_channels, ChannelHops, N_FEATURES};
use biqa_core::model::mean_score;
use biqa_core::{Error as CoreError, QualityModel, YuvImage};
use serde::Serialize;

use crate::dataset::load_rgb8;
use crate::error::{BiqaError, Result};

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct StageTimes {
    pub decode: f64,
    pub augment: f64,
    pub dct: f64,
    pub saab: f64,
    pub pooling: f64,
    pub regression: f64,
}

impl StageTimes {
    pub fn total(&self) -> f64 {
        self.decode + self.augment + self.dct + self.saab + self.pooling + self.regression
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchReport {
    pub images: usize,
    /// Images per second, one sample per repeat.
    pub samples: Vec<f64>,
    pub median_images_per_second: f64,
    /// Seconds per stage, summed over all repeats.
    pub stages: StageTimes,
    pub wall_seconds: f64,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let s = &self.stages;
        let per = |v: f64| 1e3 * v / (self.images * self.samples.len()).max(1) as f64;
        format!(
            "images/sec: {:.2} (median of {} repeats over {} images)\n\
             per-image latency (ms): decode {:.3}  augment {:.3}  dct {:.3}  saab {:.3}  pooling {:.3}  regression {:.3}\n\
             stage total {:.3}s of {:.3}s wall\n",
            self.median_images_per_second,
            self.samples.len(),
            self.images,
            per(s.decode),
            per(s.augment),
            per(s.dct),
            per(s.saab),
            per(s.pooling),
            per(s.regression),
            s.total(),
            self.wall_seconds
        )
    }
}

fn lap(t: &mut Instant) -> f64 {
    let now = Instant::now();
    let d = now.duration_since(*t).as_secs_f64();
    *t = now;
    d
}

/// Scores one image, charging each step to its stage. Returns the same
/// score as [`QualityModel::predict_image`].
pub fn timed_predict(model: &QualityModel, path: &Path, times: &mut StageTimes) -> Result<f64> {
    let mut t = Instant::now();
    let img = YuvImage::from_rgb8(&load_rgb8(path)?);
    times.decode += lap(&mut t);
    let subs = model.subimages(&img).map_err(|e| BiqaError::in_file(path, e))?;
    times.augment += lap(&mut t);
    if subs.is_empty() {
        return Err(BiqaError::in_file(
            path,
            CoreError::ImageTooSmall {
                width: img.width(),
                height: img.height(),
                required: model.augment.subimage_side(),
            },
        ));
    }

    let dct = Dct8::new();
    let params = &model.feature_params;
    let mut row = vec![0.0; N_FEATURES];
    let mut scores = Vec::with_capacity(subs.len());
    for sub in &subs {
        let mut hops = Vec::with_capacity(3);
        for (plane, kernel) in sub.pixels.planes().into_iter().zip(&params.hop2) {
            let hop1 = hop1_maps(plane, &dct);
            times.dct += lap(&mut t);
            let hop2 = apply_hop2(hop1.map(0), hop1.rows, hop1.cols, kernel).map_err(|e| BiqaError::in_file(path, e))?;
            times.saab += lap(&mut t);
            hops.push(ChannelHops { hop1, hop2 });
        }
        let raw = pool_channels(&hops, &params.config, None);
        times.pooling += lap(&mut t);
        finalize(&raw, params, &mut row);
        times.saab += lap(&mut t);
        scores.push(model.predict_features(&row));
        times.regression += lap(&mut t);
    }
    Ok(mean_score(&scores))
}

/// Runs `repeat` passes over `paths`. Images that fail to load are skipped
/// with a warning; an error is returned only if every image fails.
pub fn bench(model: &QualityModel, paths: &[PathBuf], repeat: usize) -> Result<BenchReport> {
    if repeat == 0 {
        return Err(BiqaError::Usage("--repeat must be at least 1".into()));
    }
    let mut ok: Vec<&PathBuf> = Vec::new();
    let mut last_err = None;
    for p in paths {
        match timed_predict(model, p, &mut StageTimes::default()) {
            Ok(_) => ok.push(p),
            Err(e) => {
                log::warn!("{e}");
                last_err = Some(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(last_err.unwrap_or_else(|| BiqaError::Usage("no images to benchmark".into())));
    }

    let mut stages = StageTimes::default();
    let mut samples = Vec::with_capacity(repeat);
    let start = Instant::now();
    for _ in 0..repeat {
        let t0 = Instant::now();
        for p in &ok {
            timed_predict(model, p, &mut stages)?;
        }
        samples.push(ok.len() as f64 / t0.elapsed().as_secs_f64());
    }
    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        images: ok.len(),
        median_images_per_second: biqa_core::metrics::median(&samples).expect("repeat >= 1"),
        samples,
        stages,
        wall_seconds,
    })
}
