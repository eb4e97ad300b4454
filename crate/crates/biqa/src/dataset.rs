//! Manifest CSV files and image decoding.
//!
//! ```text
//! # scenario=synthetic
//! # mos_range=1,5
//! image_path,mos,reference_id[,distortion][,split]
//! ref000_pristine.png,5,ref000,pristine,train
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use biqa_core::{DatasetManifest, Error as CoreError, ManifestEntry, Rgb8Image, Scenario, Split, YuvImage};
use image::{DynamicImage, ImageReader};

use crate::error::{BiqaError, Result};

const REQUIRED: [&str; 3] = ["image_path", "mos", "reference_id"];

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> BiqaError {
    BiqaError::in_file(
        path,
        CoreError::MalformedRow {
            line,
            reason: reason.into(),
        },
    )
}

/// Reads and validates a manifest. `scenario` fills in for a missing
/// `# scenario=` line and must agree with it when both are present.
pub fn load_manifest(path: &Path, scenario: Option<Scenario>) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| BiqaError::io(path, e))?;
    parse_manifest(&text, path, scenario)
}

pub fn parse_manifest(text: &str, path: &Path, scenario: Option<Scenario>) -> Result<DatasetManifest> {
    let mut declared = None;
    let mut mos_range = None;
    let mut header_line = 0;
    let mut body_start = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let trimmed = line.trim();
        let Some(comment) = trimmed.strip_prefix('#') else {
            header_line = i + 1;
            break;
        };
        body_start += line.len();
        let Some((key, value)) = comment.split_once('=') else { continue };
        match key.trim() {
            "scenario" => {
                declared = Some(
                    Scenario::parse(value)
                        .ok_or_else(|| malformed(path, i + 1, format!("unknown scenario `{}`", value.trim())))?,
                )
            }
            "mos_range" => {
                let bounds: Vec<Option<f64>> = value.split(',').map(|v| v.trim().parse().ok()).collect();
                match bounds[..] {
                    [Some(lo), Some(hi)] if lo <= hi => mos_range = Some((lo, hi)),
                    _ => return Err(malformed(path, i + 1, "mos_range must be `min,max`")),
                }
            }
            _ => {}
        }
    }
    let scenario = match (declared, scenario) {
        (Some(a), Some(b)) if a != b => {
            return Err(BiqaError::Usage(format!(
                "{}: manifest declares scenario {} but {} was requested",
                path.display(),
                a.as_str(),
                b.as_str()
            )))
        }
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => return Err(malformed(path, 1, "missing `# scenario=` line")),
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text[body_start..].as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| malformed(path, header_line.max(1), e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names.len() < 3 || names[..3] != REQUIRED {
        return Err(malformed(path, header_line, "header must start with `image_path,mos,reference_id`"));
    }
    let mut distortion_col = None;
    let mut split_col = None;
    for (k, name) in names.iter().enumerate().skip(3) {
        let slot = match *name {
            "distortion" => &mut distortion_col,
            "split" => &mut split_col,
            other => return Err(malformed(path, header_line, format!("unknown column `{other}`"))),
        };
        if slot.replace(k).is_some() {
            return Err(malformed(path, header_line, format!("duplicate column `{name}`")));
        }
    }

    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(header_line, |p| p.line() as usize + header_line - 1);
            malformed(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize) + header_line - 1;
        let image_path = record[0].to_string();
        if image_path.is_empty() {
            return Err(malformed(path, line, "empty image_path"));
        }
        let mos: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| malformed(path, line, format!("bad MOS `{}`", &record[1])))?;
        if !mos.is_finite() {
            return Err(malformed(path, line, "MOS is not finite"));
        }
        let reference_id = Some(record[2].to_string()).filter(|s| !s.is_empty());
        if scenario == Scenario::Synthetic && reference_id.is_none() {
            return Err(malformed(path, line, "synthetic entries need a reference_id"));
        }
        let distortion = distortion_col
            .map(|k| record[k].to_string())
            .filter(|s| !s.is_empty());
        let split = match split_col {
            Some(k) => Split::parse(&record[k])
                .ok_or_else(|| malformed(path, line, format!("unknown split `{}`", &record[k])))?,
            None => Split::Unassigned,
        };
        entries.push(ManifestEntry {
            image_path,
            mos,
            reference_id,
            distortion,
            split,
        });
        lines.push(line);
    }

    let mos_range = mos_range.unwrap_or_else(|| {
        let lo = entries.iter().map(|e| e.mos).fold(f64::INFINITY, f64::min);
        let hi = entries.iter().map(|e| e.mos).fold(f64::NEG_INFINITY, f64::max);
        if lo <= hi {
            (lo, hi)
        } else {
            (0.0, 0.0)
        }
    });
    let manifest = DatasetManifest {
        entries,
        scenario,
        mos_range,
    };
    manifest.validate().map_err(|e| match e {
        // validate counts entries; report file lines instead
        CoreError::MalformedRow { line, reason } => malformed(path, lines[line - 1], reason),
        other => BiqaError::in_file(path, other),
    })?;
    Ok(manifest)
}

pub fn manifest_to_string(m: &DatasetManifest) -> String {
    let with_distortion = m.entries.iter().any(|e| e.distortion.is_some());
    let with_split = m.entries.iter().any(|e| e.split != Split::Unassigned);
    let mut out = format!(
        "# scenario={}\n# mos_range={},{}\n",
        m.scenario.as_str(),
        m.mos_range.0,
        m.mos_range.1
    );
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = REQUIRED.to_vec();
    if with_distortion {
        header.push("distortion");
    }
    if with_split {
        header.push("split");
    }
    w.write_record(&header).expect("writing to memory");
    for e in &m.entries {
        let mos = e.mos.to_string();
        let mut row = vec![e.image_path.as_str(), mos.as_str(), e.reference_id.as_deref().unwrap_or("")];
        if with_distortion {
            row.push(e.distortion.as_deref().unwrap_or(""));
        }
        if with_split {
            row.push(e.split.as_str());
        }
        w.write_record(&row).expect("writing to memory");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory writer")).expect("utf-8 fields"));
    out
}

pub fn save_manifest(m: &DatasetManifest, path: &Path) -> Result<()> {
    fs::write(path, manifest_to_string(m)).map_err(|e| BiqaError::io(path, e))
}

/// Resolves a manifest image path against the manifest's directory.
pub fn resolve(manifest_path: &Path, image_path: &str) -> PathBuf {
    let p = Path::new(image_path);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    manifest_path.parent().unwrap_or(Path::new("")).join(p)
}

/// Decodes an 8-bit RGB or grayscale raster; alpha is discarded.
pub fn load_rgb8(path: &Path) -> Result<Rgb8Image> {
    let bytes = fs::read(path).map_err(|e| BiqaError::io(path, e))?;
    let img = ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| BiqaError::io(path, e))?
        .decode()
        .map_err(|e| BiqaError::DecodeFailure {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let rgb = match img {
        DynamicImage::ImageRgb8(b) => b,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => img.to_rgb8(),
        other => {
            return Err(BiqaError::UnsupportedBitDepth {
                path: path.to_path_buf(),
                format: format!("{:?}", other.color()),
            })
        }
    };
    let (w, h) = rgb.dimensions();
    Ok(Rgb8Image::new(w as usize, h as usize, rgb.into_raw())?)
}

/// Loads an image as BT.601 full-range YUV with zero-centred chroma.
pub fn load_image(path: &Path) -> Result<YuvImage> {
    Ok(YuvImage::from_rgb8(&load_rgb8(path)?))
}

pub fn save_png(img: &Rgb8Image, path: &Path) -> Result<()> {
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.data.clone())
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => BiqaError::io(path, io),
            other => BiqaError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(other),
            },
        })
}
