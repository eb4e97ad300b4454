//! Acceptance suite. Prints one `PASS`/`FAIL`/`SKIP` line per criterion and
//! fails if any mandatory criterion (1-9) fails.
//!
//! Optional dataset-scale criteria read manifests from the environment:
//! `BIQA_CSIQ_MANIFEST` (synthetic) and `BIQA_LIVEC_MANIFEST` (authentic).
//! Throughput and model size are measured on the toy model and reported
//! without being enforced.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use biqa::dataset::{load_manifest, save_manifest};
use biqa::eval::run_protocol;
use biqa::pipeline::{self, TOY_MANIFEST};
use biqa::RayonExecutor;
use biqa_core::dct::{inverse_zigzag, zigzag, Block, Dct8, ZIGZAG};
use biqa_core::features::{column_meta, ColumnMeta, FeatureMatrix};
use biqa_core::gbdt::{best_split, fit, GbdtConfig, MatrixView};
use biqa_core::manifest::{split_manifest, SplitFractions};
use biqa_core::metrics::{average_ranks, plcc, srocc, srocc_rank_difference};
use biqa_core::rft::{rank_features, rft_cost, Candidates};
use biqa_core::saab::{fit as saab_fit, gram_deviation};
use biqa_core::train::PipelineConfig;
use biqa_core::{Scenario, Sequential, Split};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Check = Result<String, String>;

/// Writes past the test harness's output capture so the criterion lines
/// always reach the log.
fn say(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Ledger {
    rows: Vec<(u32, bool, Outcome)>,
}

impl Ledger {
    fn record(&mut self, id: u32, mandatory: bool, name: &str, outcome: Outcome) {
        let (tag, detail) = match &outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => ("FAIL", d),
            Outcome::Skip(d) => ("SKIP", d),
        };
        say(&format!("[{tag}] criterion {id:>2} {name}: {detail}"));
        self.rows.push((id, mandatory, outcome));
    }

    fn run(&mut self, id: u32, name: &str, f: impl FnOnce() -> Check) {
        let t = Instant::now();
        let outcome = match f() {
            Ok(d) => Outcome::Pass(format!("{d} ({:.1}s)", t.elapsed().as_secs_f64())),
            Err(d) => Outcome::Fail(d),
        };
        self.record(id, id <= 9, name, outcome);
    }
}

// ---------------------------------------------------------------- 1. DCT

fn dct_oracle(x: &Block) -> Block {
    let alpha = |k: usize| if k == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
    let mut out = [[0.0; 8]; 8];
    for (u, row) in out.iter_mut().enumerate() {
        for (v, o) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for (i, xr) in x.iter().enumerate() {
                for (j, &xv) in xr.iter().enumerate() {
                    s += xv
                        * ((2 * i + 1) as f64 * u as f64 * PI / 16.0).cos()
                        * ((2 * j + 1) as f64 * v as f64 * PI / 16.0).cos();
                }
            }
            *o = alpha(u) * alpha(v) * s;
        }
    }
    out
}

fn criterion_dct() -> Check {
    let dct = Dct8::new();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut max_oracle, mut max_energy) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let mut x = [[0.0; 8]; 8];
        x.iter_mut().flatten().for_each(|v| *v = rng.random_range(-255.0..255.0));
        let got = dct.forward(&x);
        let want = dct_oracle(&x);
        for (g, w) in got.iter().flatten().zip(want.iter().flatten()) {
            max_oracle = max_oracle.max((g - w).abs());
        }
        let ex: f64 = x.iter().flatten().map(|v| v * v).sum();
        let ec: f64 = got.iter().flatten().map(|v| v * v).sum();
        max_energy = max_energy.max((ex - ec).abs() / ex.max(1.0));
    }
    ensure!(max_oracle <= 1e-9, "oracle deviation {max_oracle:e} > 1e-9");
    ensure!(max_energy <= 1e-9, "relative energy deviation {max_energy:e}");
    Ok(format!("1000 blocks, max oracle dev {max_oracle:.1e}, max Parseval dev {max_energy:.1e}"))
}

// ------------------------------------------------------------- 2. zigzag

fn criterion_zigzag() -> Check {
    for pos in 0..64 {
        let mut b = [[0.0; 8]; 8];
        b[pos / 8][pos % 8] = 1.0 + pos as f64;
        ensure!(inverse_zigzag(&zigzag(&b)) == b, "round trip failed at position {pos}");
    }
    ensure!(ZIGZAG[..5] == [0, 1, 8, 16, 9], "prefix {:?}", &ZIGZAG[..5]);
    Ok("64/64 positions round-trip, prefix 0,1,8,16,9".into())
}

// --------------------------------------------------------------- 3. Saab

fn criterion_saab() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for dim in [4, 9, 16] {
        let xs: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..dim).map(|_| rng.random_range(-50.0..50.0)).collect())
            .collect();
        let k = saab_fit(dim, dim - 1, xs.iter().map(|v| v.as_slice())).map_err(|e| e.to_string())?;
        worst = worst.max(gram_deviation(&k));
    }
    ensure!(worst <= 1e-8, "Gram deviation {worst:e}");

    // one AC direction plus a random DC offset and tiny noise
    let d = [3.0, -1.0, -1.0, -1.0];
    let norm = 12f64.sqrt();
    let xs: Vec<Vec<f64>> = (0..500)
        .map(|_| {
            let t: f64 = rng.random_range(-10.0..10.0);
            let dc: f64 = rng.random_range(0.0..100.0);
            d.iter().map(|di| dc + t * di + rng.random_range(-0.01..0.01)).collect()
        })
        .collect();
    let k = saab_fit(4, 3, xs.iter().map(|v| v.as_slice())).map_err(|e| e.to_string())?;
    let b = &k.basis()[0];
    let sign = b[0].signum();
    let err = b.iter().zip(d).map(|(bi, di)| (sign * bi - di / norm).abs()).fold(0.0, f64::max);
    ensure!(err < 1e-3, "planted direction recovered with error {err:e}");

    let consts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64; 9]).collect();
    let k = saab_fit(9, 8, consts.iter().map(|v| v.as_slice())).map_err(|e| e.to_string())?;
    ensure!(k.eigenvalues().iter().all(|e| e.abs() < 1e-12), "constant input has AC energy");
    ensure!(gram_deviation(&k) <= 1e-8, "degenerate basis not orthonormal");
    let mut out = vec![0.0; 9];
    k.apply(&[4.0; 9], &mut out);
    ensure!(out[1..].iter().all(|v| v.abs() < 1e-12), "constant block has AC response");
    Ok(format!("Gram dev {worst:.1e}, planted direction err {err:.1e}, constant input handled"))
}

// ---------------------------------------------------------------- 4. RFT

fn rmse(ys: &[f64]) -> f64 {
    let m = ys.iter().sum::<f64>() / ys.len() as f64;
    (ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / ys.len() as f64).sqrt()
}

fn exhaustive_cost(f: &[f64], y: &[f64]) -> f64 {
    let mut vals = f.to_vec();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let mut best = f64::INFINITY;
    for w in vals.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        let (l, r): (Vec<(f64, f64)>, Vec<(f64, f64)>) = f.iter().copied().zip(y.iter().copied()).partition(|p| p.0 <= t);
        let l: Vec<f64> = l.into_iter().map(|p| p.1).collect();
        let r: Vec<f64> = r.into_iter().map(|p| p.1).collect();
        best = best.min((l.len() as f64 * rmse(&l) + r.len() as f64 * rmse(&r)) / f.len() as f64);
    }
    if best.is_finite() {
        best
    } else {
        rmse(y)
    }
}

fn criterion_rft() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=64);
        let levels = rng.random_range(2..20);
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.37).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..5.0)).collect();
        let got = rft_cost(&f, &y, Candidates::AllMidpoints).map_err(|e| e.to_string())?;
        worst = worst.max((got - exhaustive_cost(&f, &y)).abs());
    }
    ensure!(worst < 1e-9, "midpoint oracle deviation {worst:e}");

    let perfect = rft_cost(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[1.0, 1.0, 1.0, 5.0, 5.0, 5.0], Candidates::Uniform(16))
        .map_err(|e| e.to_string())?;
    ensure!(perfect.abs() < 1e-12, "perfect split cost {perfect}");

    let mut hits = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + trial);
        let (n, cols) = (64, 25);
        let planted = rng.random_range(0..cols);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..5.0)).collect();
        let meta: Vec<ColumnMeta> = column_meta().into_iter().take(cols).collect();
        let mut x = FeatureMatrix::empty(meta);
        for yi in &y {
            let row: Vec<f64> = (0..cols)
                .map(|j| if j == planted { *yi } else { rng.random_range(0.0..1.0) })
                .collect();
            x.push_row(&row);
        }
        if rank_features(&x, &y, 16, &Sequential).map_err(|e| e.to_string())?.order[0] == planted {
            hits += 1;
        }
    }
    ensure!(hits >= 95, "planted column first in {hits}/100 trials");
    Ok(format!("oracle dev {worst:.1e} on 100 instances, perfect split 0, planted column {hits}/100"))
}

// --------------------------------------------------------------- 5. GBDT

fn sse(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|a| (a - m).powi(2)).sum()
}

fn exhaustive_gain(x: &[f64], y: &[f64], n: usize, d: usize) -> Option<f64> {
    let total = sse(y);
    let mut best: Option<f64> = None;
    for f in 0..d {
        let mut vals: Vec<f64> = (0..n).map(|i| x[i * d + f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| x[i * d + f] <= t);
            let yl: Vec<f64> = l.iter().map(|&i| y[i]).collect();
            let yr: Vec<f64> = r.iter().map(|&i| y[i]).collect();
            let g = total - sse(&yl) - sse(&yr);
            best = Some(best.map_or(g, |b: f64| b.max(g)));
        }
    }
    best
}

fn criterion_gbdt() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let data = |rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32| {
        let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(0..levels) as f64 / 2.0).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| x[i * d] * 1.5 - x[i * d + d - 1] + rng.random_range(-0.5..0.5))
            .collect();
        (x, y)
    };

    let mut worst = 0.0f64;
    for _ in 0..300 {
        let n = rng.random_range(2..=32);
        let d = rng.random_range(1..=4);
        let (x, y) = data(&mut rng, n, d, 6);
        let rows: Vec<usize> = (0..n).collect();
        let view = MatrixView::new(n, d, &x).map_err(|e| e.to_string())?;
        match (best_split(view, &y, &rows, 1), exhaustive_gain(&x, &y, n, d)) {
            (None, None) => {}
            (Some(s), Some(g)) => worst = worst.max((s.gain - g).abs()),
            (s, g) => return Err(format!("split {s:?} vs oracle gain {g:?}")),
        }
    }
    ensure!(worst < 1e-9, "split gain deviation {worst:e}");

    let (x, y) = data(&mut rng, 200, 4, 30);
    let (xv, yv) = data(&mut rng, 50, 4, 30);
    let cfg = GbdtConfig {
        learning_rate: 0.3,
        max_depth: 3,
        n_estimators: 200,
        early_stopping_rounds: 1000,
        ..GbdtConfig::default()
    };
    let view = MatrixView::new(200, 4, &x).map_err(|e| e.to_string())?;
    let vview = MatrixView::new(50, 4, &xv).map_err(|e| e.to_string())?;
    let (_, report) = fit(view, &y, vview, &yv, &cfg, 0, &Sequential).map_err(|e| e.to_string())?;
    let rises = report.train_rmse.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    ensure!(rises == 0, "training RMSE increased {rises} times");

    // validation labels are the mirror image of the training labels
    let n = 200;
    let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 4.0 * v + 1.0).collect();
    let y_val: Vec<f64> = x.iter().map(|v| 5.0 - 4.0 * v).collect();
    let view = MatrixView::new(n, 1, &x).map_err(|e| e.to_string())?;
    let (model, report) = fit(view, &y, view, &y_val, &GbdtConfig::default(), 0, &Sequential).map_err(|e| e.to_string())?;
    ensure!(report.stopped_early, "adversarial validation did not stop training");
    Ok(format!(
        "split oracle dev {worst:.1e} on 300 instances, RMSE monotone over 200 rounds, early stop at {} trees",
        model.n_trees_used
    ))
}

// ------------------------------------------------------------ 6. metrics

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn criterion_metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut shortcut, mut inv) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = rng.random_range(3..200);
        let a: Vec<f64> = (0..n).map(|i| rng.random_range(-100.0..100.0) + i as f64 * 1e-7).collect();
        let b: Vec<f64> = a.iter().map(|x| x * 0.3 + rng.random_range(-60.0..60.0)).collect();
        let sh = srocc_rank_difference(&a, &b).map_err(|e| e.to_string())?;
        shortcut = shortcut.max((sh - pearson(&average_ranks(&a), &average_ranks(&b))).abs());

        let base_s = srocc(&a, &b).map_err(|e| e.to_string())?;
        let base_p = plcc(&a, &b).map_err(|e| e.to_string())?;
        let ea: Vec<f64> = a.iter().map(|x| (x / 50.0).exp()).collect();
        let cb: Vec<f64> = b.iter().map(|x| x.powi(3)).collect();
        let aa: Vec<f64> = a.iter().map(|x| 2.5 * x - 7.0).collect();
        let neg: Vec<f64> = b.iter().map(|x| -0.5 * x + 3.0).collect();
        inv = inv
            .max((srocc(&ea, &cb).map_err(|e| e.to_string())? - base_s).abs())
            .max((plcc(&aa, &b).map_err(|e| e.to_string())? - base_p).abs())
            .max((plcc(&a, &neg).map_err(|e| e.to_string())? + base_p).abs());
    }
    ensure!(shortcut <= 1e-12, "rank-difference shortcut deviation {shortcut:e}");
    ensure!(inv <= 1e-12, "invariance deviation {inv:e}");
    Ok(format!("500 instances, shortcut dev {shortcut:.1e}, invariance dev {inv:.1e}"))
}

// --------------------------------------------------- end-to-end helpers

struct Toy {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Toy {
    fn manifest(&self) -> PathBuf {
        self.root.join(TOY_MANIFEST)
    }
}

fn gen_default_toy() -> Result<Toy, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("toy");
    let out = biqa()
        .args(["gen-toy", "--seed", "0", "--out"])
        .arg(&root)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "gen-toy failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(Toy { _dir: dir, root })
}

fn biqa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biqa"))
}

fn run_ok(cmd: &mut Command) -> Result<String, String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "{cmd:?} exited with {}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

// -------------------------------------------------------- 7. determinism

fn criterion_determinism(toy: &Toy, models: &Path) -> Check {
    let train = |threads: &str, out: &Path| {
        run_ok(
            biqa()
                .args(["--threads", threads, "train", "--scenario", "synthetic", "--seed", "0", "--manifest"])
                .arg(toy.manifest())
                .arg("--out-model")
                .arg(out),
        )
    };
    let (a, b) = (models.join("a.model"), models.join("b.model"));
    train("1", &a)?;
    train("4", &b)?;
    let (ba, bb) = (std::fs::read(&a).map_err(|e| e.to_string())?, std::fs::read(&b).map_err(|e| e.to_string())?);
    ensure!(ba == bb, "model files differ: {} vs {}", sha256(&ba), sha256(&bb));

    let predict = |threads: &str| {
        run_ok(
            biqa()
                .args(["--threads", threads, "predict", "--model"])
                .arg(&a)
                .arg("--image-dir")
                .arg(&toy.root),
        )
    };
    let (p1, p4) = (predict("1")?, predict("4")?);
    ensure!(p1 == p4, "predictions differ between --threads 1 and --threads 4");
    Ok(format!(
        "two trainings byte-identical (sha256 {}), {} predictions identical across thread counts",
        &sha256(&ba)[..16],
        p1.lines().count()
    ))
}

// ------------------------------------------------------------ 8. leakage

fn criterion_leakage(toy: &Toy) -> Check {
    let manifest = load_manifest(&toy.manifest(), None).map_err(|e| e.to_string())?;
    let split = split_manifest(&manifest, 0, SplitFractions::DEFAULT).map_err(|e| e.to_string())?;
    let test = split.indices_in(Split::Test);
    let mut permuted = split.clone();
    let mut labels: Vec<f64> = test.iter().map(|&i| split.entries[i].mos).collect();
    labels.reverse();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(808));
    for (&i, m) in test.iter().zip(&labels) {
        permuted.entries[i].mos = *m;
    }
    let moved = test.iter().filter(|&&i| permuted.entries[i].mos != split.entries[i].mos).count();
    ensure!(moved > 0, "permutation left every test label in place");

    let exec = RayonExecutor::new(0);
    let cfg = PipelineConfig::for_scenario(Scenario::Synthetic);
    let mut digests = Vec::new();
    for (name, m) in [("orig.csv", &split), ("perm.csv", &permuted)] {
        let path = toy.root.join(name);
        save_manifest(m, &path).map_err(|e| e.to_string())?;
        let out = pipeline::train(m, &path, &cfg, 0, 0, &exec).map_err(|e| e.to_string())?;
        digests.push(sha256(&out.model.to_bytes()));
    }
    ensure!(digests[0] == digests[1], "model digests differ: {} vs {}", digests[0], digests[1]);
    Ok(format!("{moved}/{} test labels moved, model sha256 {} unchanged", test.len(), &digests[0][..16]))
}

// -------------------------------------------------------- 9. toy protocol

fn criterion_toy_protocol(toy: &Toy) -> Check {
    let manifest = load_manifest(&toy.manifest(), Some(Scenario::Synthetic)).map_err(|e| e.to_string())?;
    ensure!(manifest.entries.len() == 210, "toy manifest has {} rows", manifest.entries.len());
    let cfg = PipelineConfig::for_scenario(Scenario::Synthetic);
    let seeds: Vec<u64> = (0..10).collect();
    let out = run_protocol(
        &manifest,
        &toy.manifest(),
        &cfg,
        SplitFractions::DEFAULT,
        &seeds,
        &RayonExecutor::new(0),
    )
    .map_err(|e| e.to_string())?;
    let r = &out.report;
    say(&r.to_table());
    ensure!(
        r.median_srocc >= 0.90 && r.median_plcc >= 0.90,
        "median SROCC {:.4}, PLCC {:.4} (need both >= 0.90)",
        r.median_srocc,
        r.median_plcc
    );
    Ok(format!("median SROCC {:.4}, median PLCC {:.4} over 10 seeds", r.median_srocc, r.median_plcc))
}

// ------------------------------------------------- 10-11. dataset scale

fn dataset_criterion(ledger: &mut Ledger, id: u32, name: &str, var: &str, scenario: Scenario, check: impl Fn(f64) -> bool) {
    let Some(path) = std::env::var_os(var).map(PathBuf::from) else {
        ledger.record(id, false, name, Outcome::Skip(format!("set {var} to a manifest to run")));
        return;
    };
    let result = (|| -> Result<(f64, f64, String), String> {
        let manifest = load_manifest(&path, Some(scenario)).map_err(|e| e.to_string())?;
        let cfg = PipelineConfig::for_scenario(scenario);
        let seeds: Vec<u64> = (0..10).collect();
        let out = run_protocol(&manifest, &path, &cfg, SplitFractions::DEFAULT, &seeds, &RayonExecutor::new(0))
            .map_err(|e| e.to_string())?;
        Ok((out.report.median_srocc, out.report.median_plcc, out.report.to_table()))
    })();
    let outcome = match result {
        Ok((s, p, table)) => {
            say(&table);
            let d = format!("median SROCC {s:.4}, median PLCC {p:.4}");
            if check(s) {
                Outcome::Pass(d)
            } else {
                Outcome::Fail(d)
            }
        }
        Err(e) => Outcome::Fail(e),
    };
    ledger.record(id, false, name, outcome);
}

// ------------------------------------------- 12-13. throughput and size

fn criterion_throughput(ledger: &mut Ledger, model: &Path) {
    let result = (|| -> Result<f64, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        run_ok(
            biqa()
                .args(["gen-toy", "--references", "2", "--levels", "2", "--side", "384", "--out"])
                .arg(dir.path()),
        )?;
        let paths: Vec<PathBuf> = biqa::cli::list_images(dir.path()).map_err(|e| e.to_string())?;
        let m = pipeline::load_model(model).map_err(|e| e.to_string())?;
        let report = biqa::bench::bench(&m, &paths, 3).map_err(|e| e.to_string())?;
        say(report.to_text().trim_end());
        Ok(report.median_images_per_second)
    })();
    let outcome = match result {
        Ok(r) if r >= 20.0 => Outcome::Pass(format!("{r:.1} images/s on 384x384, single thread (reported only)")),
        Ok(r) => Outcome::Fail(format!("{r:.1} images/s on 384x384, below 20 (reported only)")),
        Err(e) => Outcome::Fail(e),
    };
    ledger.record(12, false, "throughput", outcome);
}

fn criterion_model_size(ledger: &mut Ledger, model: &Path) {
    let outcome = match std::fs::metadata(model) {
        Ok(m) => {
            let mb = m.len() as f64 / (1024.0 * 1024.0);
            let d = format!("toy model {:.3} MB ({} bytes), limit 4 MB", mb, m.len());
            if mb <= 4.0 {
                Outcome::Pass(d)
            } else {
                Outcome::Fail(d)
            }
        }
        Err(e) => Outcome::Fail(e.to_string()),
    };
    ledger.record(13, false, "model size", outcome);
}

#[test]
fn acceptance() {
    let mut ledger = Ledger { rows: Vec::new() };
    ledger.run(1, "DCT", criterion_dct);
    ledger.run(2, "zigzag", criterion_zigzag);
    ledger.run(3, "Saab", criterion_saab);
    ledger.run(4, "RFT", criterion_rft);
    ledger.run(5, "GBDT", criterion_gbdt);
    ledger.run(6, "metrics", criterion_metrics);

    let models = tempfile::tempdir().expect("temp dir");
    match gen_default_toy() {
        Ok(toy) => {
            ledger.run(7, "determinism", || criterion_determinism(&toy, models.path()));
            ledger.run(8, "leakage audit", || criterion_leakage(&toy));
            ledger.run(9, "toy end-to-end", || criterion_toy_protocol(&toy));
        }
        Err(e) => {
            for (id, name) in [(7, "determinism"), (8, "leakage audit"), (9, "toy end-to-end")] {
                ledger.record(id, true, name, Outcome::Fail(format!("toy dataset: {e}")));
            }
        }
    }

    dataset_criterion(&mut ledger, 10, "CSIQ", "BIQA_CSIQ_MANIFEST", Scenario::Synthetic, |s| (s - 0.925).abs() <= 0.10);
    dataset_criterion(&mut ledger, 11, "LIVE-C", "BIQA_LIVEC_MANIFEST", Scenario::Authentic, |s| s >= 0.60);

    let model = models.path().join("a.model");
    if model.exists() {
        criterion_throughput(&mut ledger, &model);
        criterion_model_size(&mut ledger, &model);
    } else {
        for (id, name) in [(12, "throughput"), (13, "model size")] {
            ledger.record(id, false, name, Outcome::Skip("no toy model was trained".into()));
        }
    }

    let failed: Vec<u32> = ledger
        .rows
        .iter()
        .filter(|(_, mandatory, o)| *mandatory && matches!(o, Outcome::Fail(_)))
        .map(|r| r.0)
        .collect();
    assert!(failed.is_empty(), "mandatory criteria failed: {failed:?}");
}
