//! Repeated split/train/test protocol.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use biqa_core::manifest::{split_manifest, SplitFractions};
use biqa_core::metrics::{median, plcc, srocc};
use biqa_core::train::PipelineConfig;
use biqa_core::{DatasetManifest, Executor, Split};
use serde::Serialize;

use crate::dataset::resolve;
use crate::error::Result;
use crate::pipeline::{predict_files, train};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub plcc: f64,
    pub srocc: f64,
    pub n_test: usize,
    pub n_trees_used: usize,
    pub train_seconds: f64,
    /// Median over distortion tags is taken across runs; see the report.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub per_distortion: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvaluationReport {
    pub per_run: Vec<RunSummary>,
    pub median_plcc: f64,
    pub median_srocc: f64,
    /// Median over runs of the within-family SROCC, when rows carry a
    /// distortion tag.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_distortion: Option<BTreeMap<String, f64>>,
    /// Test-set prediction throughput, images per second.
    pub images_per_second: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScatterPoint {
    pub seed: u64,
    pub image_path: String,
    pub mos: f64,
    pub prediction: f64,
}

pub struct ProtocolOutput {
    pub report: EvaluationReport,
    pub scatter: Vec<ScatterPoint>,
}

/// Splits, trains and scores held-out images once per seed. Scores are
/// image level: one prediction per test image.
pub fn run_protocol<E: Executor>(
    manifest: &DatasetManifest,
    manifest_path: &Path,
    cfg: &PipelineConfig,
    fractions: SplitFractions,
    seeds: &[u64],
    exec: &E,
) -> Result<ProtocolOutput> {
    if seeds.is_empty() {
        return Err(crate::error::BiqaError::Usage("at least one seed is required".into()));
    }
    let mut per_run = Vec::with_capacity(seeds.len());
    let mut scatter = Vec::new();
    let (mut predict_time, mut predicted) = (0.0, 0usize);
    for &seed in seeds {
        let split = split_manifest(manifest, seed, fractions)?;
        let t0 = Instant::now();
        let outcome = train(&split, manifest_path, cfg, seed, 0, exec)?;
        let train_seconds = t0.elapsed().as_secs_f64();

        let test_idx = split.indices_in(Split::Test);
        let paths: Vec<PathBuf> = test_idx
            .iter()
            .map(|&i| resolve(manifest_path, &split.entries[i].image_path))
            .collect();
        let t1 = Instant::now();
        let preds = predict_files(&outcome.model, &paths, exec)
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        predict_time += t1.elapsed().as_secs_f64();
        predicted += preds.len();
        let mos: Vec<f64> = test_idx.iter().map(|&i| split.entries[i].mos).collect();

        let mut groups: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for (k, &i) in test_idx.iter().enumerate() {
            if let Some(tag) = split.entries[i].distortion.as_deref() {
                let g = groups.entry(tag).or_default();
                g.0.push(preds[k]);
                g.1.push(mos[k]);
            }
        }
        // families whose labels are constant (e.g. pristine copies) have no SROCC
        let per_distortion = groups
            .into_iter()
            .filter_map(|(tag, (p, m))| srocc(&p, &m).ok().map(|s| (tag.to_string(), s)))
            .collect();

        let run = RunSummary {
            seed,
            plcc: plcc(&preds, &mos)?,
            srocc: srocc(&preds, &mos)?,
            n_test: preds.len(),
            n_trees_used: outcome.model.gbdt.n_trees_used,
            train_seconds,
            per_distortion,
        };
        log::info!(
            "seed {seed}: PLCC {:.4} SROCC {:.4} on {} test images",
            run.plcc,
            run.srocc,
            run.n_test
        );
        for (k, &i) in test_idx.iter().enumerate() {
            scatter.push(ScatterPoint {
                seed,
                image_path: split.entries[i].image_path.clone(),
                mos: mos[k],
                prediction: preds[k],
            });
        }
        per_run.push(run);
    }
    per_run.sort_by_key(|r| r.seed);

    let mut tags: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &per_run {
        for (t, &s) in &r.per_distortion {
            tags.entry(t.clone()).or_default().push(s);
        }
    }
    let per_distortion = (!tags.is_empty()).then(|| {
        tags.into_iter()
            .map(|(t, v)| (t, median(&v).expect("non-empty")))
            .collect()
    });
    let report = EvaluationReport {
        median_plcc: median(&per_run.iter().map(|r| r.plcc).collect::<Vec<_>>()).expect("non-empty"),
        median_srocc: median(&per_run.iter().map(|r| r.srocc).collect::<Vec<_>>()).expect("non-empty"),
        per_run,
        per_distortion,
        images_per_second: if predict_time > 0.0 { predicted as f64 / predict_time } else { 0.0 },
    };
    Ok(ProtocolOutput { report, scatter })
}

impl EvaluationReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>6} {:>7} {:>8} {:>8} {:>6}", "seed", "n_test", "PLCC", "SROCC", "trees");
        for r in &self.per_run {
            let _ = writeln!(
                s,
                "{:>6} {:>7} {:>8.4} {:>8.4} {:>6}",
                r.seed, r.n_test, r.plcc, r.srocc, r.n_trees_used
            );
        }
        let _ = writeln!(s, "{:>6} {:>7} {:>8.4} {:>8.4}", "median", "", self.median_plcc, self.median_srocc);
        if let Some(per) = &self.per_distortion {
            let width = per.keys().map(String::len).max().unwrap_or(0).max(10);
            let _ = writeln!(s, "\n{:<width$} {:>8}", "distortion", "SROCC");
            for (t, v) in per {
                let _ = writeln!(s, "{t:<width$} {v:>8.4}");
            }
        }
        let _ = writeln!(s, "\nprediction throughput: {:.1} images/s", self.images_per_second);
        s
    }
}

pub fn scatter_csv(points: &[ScatterPoint]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for p in points {
        w.serialize(p).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}
