use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use biqa_core::features::{column_meta, extract_features, Hop, Statistic};
use biqa_core::gbdt::GbdtConfig;
use biqa_core::manifest::{split_manifest, SplitFractions};
use biqa_core::toy::{Distortion, ToyDatasetSpec};
use biqa_core::train::PipelineConfig;
use biqa_core::{Scenario, Split};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{apply_file, parse_selection};
use crate::dataset::{load_image, load_manifest, resolve, save_manifest};
use crate::error::{BiqaError, Result};
use crate::exec::RayonExecutor;
use crate::{bench, eval, pipeline};

#[derive(Parser, Debug)]
#[command(name = "biqa", version, about = "Lightweight blind image quality assessment")]
struct Cli {
    /// Worker threads (0 = one per logical CPU). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the procedural toy dataset.
    GenToy(GenToyArgs),
    /// Fit a model on the train/val rows of a manifest.
    Train(TrainArgs),
    /// Score images with a trained model.
    Predict(PredictArgs),
    /// Run the repeated split protocol and report PLCC/SROCC.
    Evaluate(EvaluateArgs),
    /// Dump unsupervised feature vectors and the feature cost curve.
    ExtractFeatures(ExtractArgs),
    /// Measure single-threaded prediction throughput.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenToyArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    references: usize,
    /// Comma-separated subset of gaussian_blur, white_noise, jpeg_quantization, contrast_shift.
    #[arg(long, value_delimiter = ',')]
    distortions: Vec<String>,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long, default_value_t = 288)]
    side: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// key=value file overriding the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Synthetic only.
    #[arg(long)]
    patch_size: Option<usize>,
    /// Synthetic only.
    #[arg(long)]
    patch_count: Option<usize>,
    /// Authentic only.
    #[arg(long)]
    crop_count: Option<usize>,
    /// Authentic only.
    #[arg(long)]
    target_side: Option<usize>,
    /// Authentic only.
    #[arg(long)]
    no_flips: bool,
    /// per_channel:Y,U,V | total:N | elbow
    #[arg(long)]
    selection: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    n_estimators: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    early_stopping_rounds: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    #[arg(long)]
    out_model: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Provenance timestamp; defaults to SOURCE_DATE_EPOCH, else 0.
    #[arg(long)]
    timestamp: Option<i64>,
    /// Write the split-assigned manifest here.
    #[arg(long)]
    split_out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, required_unless_present = "image_dir", conflicts_with = "image_dir")]
    image: Option<PathBuf>,
    #[arg(long)]
    image_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    /// `a-b` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0-9")]
    seeds: String,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    scatter_csv: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, conflicts_with = "image_dir")]
    manifest: Option<PathBuf>,
    #[arg(long)]
    image_dir: Option<PathBuf>,
    /// Feature CSV, one row per subimage.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `column_index,channel,cost` CSV of the stored feature costs.
    #[arg(long)]
    cost_curve: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    image_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
}

fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    Scenario::parse(s).ok_or_else(|| format!("expected synthetic or authentic, got `{s}`"))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || BiqaError::Usage(format!("bad seed list `{s}`"));
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

fn pipeline_config(scenario: Scenario, a: &ModelArgs) -> Result<PipelineConfig> {
    let conflict = |flag: &str| {
        Err(BiqaError::Usage(format!(
            "--{flag} does not apply to the {} scenario",
            scenario.as_str()
        )))
    };
    match scenario {
        Scenario::Synthetic if a.crop_count.is_some() => return conflict("crop-count"),
        Scenario::Synthetic if a.target_side.is_some() => return conflict("target-side"),
        Scenario::Synthetic if a.no_flips => return conflict("no-flips"),
        Scenario::Authentic if a.patch_size.is_some() => return conflict("patch-size"),
        Scenario::Authentic if a.patch_count.is_some() => return conflict("patch-count"),
        _ => {}
    }
    let mut cfg = PipelineConfig::for_scenario(scenario);
    if let Some(p) = &a.config {
        apply_file(&mut cfg, p)?;
    }
    macro_rules! set {
        ($field:expr, $v:expr) => {
            if let Some(v) = $v {
                $field = v;
            }
        };
    }
    set!(cfg.augment.patch_size, a.patch_size);
    set!(cfg.augment.patch_count, a.patch_count);
    set!(cfg.augment.crop_count, a.crop_count);
    set!(cfg.augment.target_side, a.target_side);
    if a.no_flips {
        cfg.augment.use_flips = false;
    }
    if let Some(s) = &a.selection {
        cfg.selection = parse_selection(s).ok_or_else(|| BiqaError::Usage(format!("bad --selection `{s}`")))?;
    }
    set!(cfg.bins, a.bins);
    let g: &mut GbdtConfig = &mut cfg.gbdt;
    set!(g.n_estimators, a.n_estimators);
    set!(g.learning_rate, a.learning_rate);
    set!(g.max_depth, a.max_depth);
    set!(g.early_stopping_rounds, a.early_stopping_rounds);
    cfg.validate()?;
    Ok(cfg)
}

fn default_timestamp() -> i64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| BiqaError::io(path, e))
}

/// Supported raster files in `dir`, sorted by path.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| BiqaError::io(dir, e))? {
        let path = entry.map_err(|e| BiqaError::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("png" | "bmp" | "jpg" | "jpeg")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn column_name(j: usize) -> String {
    let m = column_meta()[j];
    let hop = match m.hop {
        Hop::One => format!("hop1_ac{:02}", m.coefficient),
        Hop::Two => format!("hop2_c{}", m.coefficient),
    };
    let stat = match m.statistic {
        Statistic::Max => "max".to_string(),
        Statistic::Mean => "mean".to_string(),
        Statistic::Std => "std".to_string(),
        Statistic::Spectral(k) => format!("spec{k}"),
    };
    format!("{}_{hop}_{stat}", m.channel.name())
}

struct Ctx {
    json: bool,
    exec: RayonExecutor,
}

fn gen_toy(ctx: &Ctx, a: GenToyArgs) -> Result<()> {
    let distortion_types = if a.distortions.is_empty() {
        Distortion::ALL.to_vec()
    } else {
        a.distortions
            .iter()
            .map(|d| Distortion::parse(d).ok_or_else(|| BiqaError::Usage(format!("unknown distortion `{d}`"))))
            .collect::<Result<_>>()?
    };
    let spec = ToyDatasetSpec {
        n_references: a.references,
        distortion_types,
        levels: a.levels,
        image_side: a.side,
        seed: a.seed,
    };
    let m = pipeline::gen_toy(&spec, &a.out, &ctx.exec)?;
    let manifest = a.out.join(pipeline::TOY_MANIFEST);
    if ctx.json {
        println!("{}", json!({"manifest": manifest, "images": m.entries.len()}));
    } else {
        println!("wrote {} images and {}", m.entries.len(), manifest.display());
    }
    Ok(())
}

fn train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let cfg = pipeline_config(a.scenario, &a.model)?;
    let mut manifest = load_manifest(&a.manifest, Some(a.scenario))?;
    if manifest.entries.iter().all(|e| e.split == Split::Unassigned) {
        manifest = split_manifest(&manifest, a.seed, SplitFractions::DEFAULT)?;
    }
    if let Some(p) = &a.split_out {
        save_manifest(&manifest, p)?;
    }
    let timestamp = a.timestamp.unwrap_or_else(default_timestamp);
    let outcome = pipeline::train(&manifest, &a.manifest, &cfg, a.seed, timestamp, &ctx.exec)?;
    pipeline::save_model(&outcome.model, &a.out_model)?;

    let used = outcome.model.gbdt.n_trees_used;
    let train_rmse = outcome.report.train_rmse[used];
    let val_rmse = outcome.report.val_rmse[used];
    let [y, u, v] = outcome.selected_per_channel;
    if ctx.json {
        println!(
            "{}",
            json!({
                "model": a.out_model,
                "train_rmse": train_rmse,
                "val_rmse": val_rmse,
                "trees": used,
                "train_subimages": outcome.train_rows,
                "val_subimages": outcome.val_rows,
                "selected": {"Y": y, "U": u, "V": v},
            })
        );
    } else {
        println!("train RMSE {train_rmse:.4}  val RMSE {val_rmse:.4}  trees {used}");
        println!("selected features: Y {y}  U {u}  V {v}");
        println!("model written to {}", a.out_model.display());
    }
    Ok(())
}

fn predict(ctx: &Ctx, a: PredictArgs) -> Result<()> {
    let model = pipeline::load_model(&a.model)?;
    let paths = match (&a.image, &a.image_dir) {
        (Some(p), _) => vec![p.clone()],
        (None, Some(d)) => list_images(d)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let results = pipeline::predict_files(&model, &paths, &ctx.exec);
    let mut scored = Vec::new();
    let mut last_err = None;
    for (p, r) in paths.iter().zip(results) {
        match r {
            Ok(s) => scored.push((p, s)),
            Err(e) => {
                eprintln!("warning: {e}");
                last_err = Some(e);
            }
        }
    }
    if scored.is_empty() {
        return Err(last_err.unwrap_or_else(|| BiqaError::Usage("no images found".into())));
    }
    let mut out = std::io::stdout().lock();
    if ctx.json {
        let arr: Vec<_> = scored.iter().map(|(p, s)| json!({"path": p, "score": s})).collect();
        let _ = writeln!(out, "{}", serde_json::Value::Array(arr));
    } else {
        for (p, s) in scored {
            let _ = writeln!(out, "{}\t{s}", p.display());
        }
    }
    Ok(())
}

fn evaluate(ctx: &Ctx, a: EvaluateArgs) -> Result<()> {
    let cfg = pipeline_config(a.scenario, &a.model)?;
    let seeds = parse_seeds(&a.seeds)?;
    let manifest = load_manifest(&a.manifest, Some(a.scenario))?;
    let out = eval::run_protocol(&manifest, &a.manifest, &cfg, SplitFractions::DEFAULT, &seeds, &ctx.exec)?;
    let json_text = serde_json::to_string_pretty(&out.report).expect("report serialises");
    if let Some(p) = &a.report {
        write_file(p, &json_text)?;
    }
    if let Some(p) = &a.scatter_csv {
        write_file(p, eval::scatter_csv(&out.scatter))?;
    }
    if ctx.json {
        println!("{json_text}");
    } else {
        print!("{}", out.report.to_table());
    }
    Ok(())
}

fn extract(ctx: &Ctx, a: ExtractArgs) -> Result<()> {
    if a.out.is_none() && a.cost_curve.is_none() {
        return Err(BiqaError::Usage("nothing to do: pass --out and/or --cost-curve".into()));
    }
    let model = pipeline::load_model(&a.model)?;
    if let Some(p) = &a.cost_curve {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["column_index", "channel", "cost"]).expect("memory");
        let meta = column_meta();
        for (j, c) in model.rft.costs.iter().enumerate() {
            w.write_record([j.to_string(), meta[j].channel.name().to_string(), c.to_string()])
                .expect("memory");
        }
        write_file(p, w.into_inner().expect("memory"))?;
    }
    let Some(out_path) = &a.out else { return Ok(()) };
    let images: Vec<(String, PathBuf)> = match (&a.manifest, &a.image_dir) {
        (Some(m), _) => load_manifest(m, None)?
            .entries
            .iter()
            .map(|e| (e.image_path.clone(), resolve(m, &e.image_path)))
            .collect(),
        (None, Some(d)) => list_images(d)?
            .into_iter()
            .map(|p| (p.display().to_string(), p))
            .collect(),
        (None, None) => return Err(BiqaError::Usage("--out needs --manifest or --image-dir".into())),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["image".to_string(), "subimage".to_string(), "flip".to_string()];
    header.extend((0..model.feature_params.n_features()).map(column_name));
    w.write_record(&header).expect("memory");
    for (name, path) in &images {
        let img = load_image(path)?;
        let subs = model.subimages(&img).map_err(|e| BiqaError::in_file(path, e))?;
        let x = extract_features(&subs, &model.feature_params, &ctx.exec).map_err(|e| BiqaError::in_file(path, e))?;
        for (k, s) in subs.iter().enumerate() {
            let mut rec = vec![name.clone(), k.to_string(), s.flip.to_string()];
            rec.extend(x.row(k).iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("memory");
        }
    }
    write_file(out_path, w.into_inner().expect("memory"))?;
    if !ctx.json {
        println!("features of {} images written to {}", images.len(), out_path.display());
    }
    Ok(())
}

fn run_bench(ctx: &Ctx, a: BenchArgs) -> Result<()> {
    let model = pipeline::load_model(&a.model)?;
    let paths = list_images(&a.image_dir)?;
    let report = bench::bench(&model, &paths, a.repeat)?;
    if ctx.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let ctx = Ctx {
        json: cli.json,
        exec: RayonExecutor::new(cli.threads),
    };
    let result = match cli.command {
        Command::GenToy(a) => gen_toy(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Predict(a) => predict(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::ExtractFeatures(a) => extract(&ctx, a),
        Command::Bench(a) => run_bench(&ctx, a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0-9").unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(parse_seeds("3,1").unwrap(), vec![3, 1]);
        assert!(parse_seeds("5-1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn column_names() {
        assert_eq!(column_name(0), "Y_hop1_ac01_max");
        assert_eq!(column_name(1511), "V_hop2_c8_spec3");
    }

    #[test]
    fn scenario_specific_flags_conflict() {
        let mut a = ModelArgs {
            config: None,
            patch_size: None,
            patch_count: None,
            crop_count: Some(3),
            target_side: None,
            no_flips: false,
            selection: None,
            bins: None,
            n_estimators: None,
            learning_rate: None,
            max_depth: None,
            early_stopping_rounds: None,
        };
        assert_eq!(pipeline_config(Scenario::Synthetic, &a).unwrap_err().exit_code(), 1);
        assert!(pipeline_config(Scenario::Authentic, &a).is_ok());
        a.crop_count = None;
        a.patch_size = Some(48);
        assert_eq!(pipeline_config(Scenario::Authentic, &a).unwrap_err().exit_code(), 1);
        assert_eq!(pipeline_config(Scenario::Synthetic, &a).unwrap().augment.patch_size, 48);
    }
}
