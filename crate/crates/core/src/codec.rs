//! Binary model container.
//!
//! ```text
//! "GBIQ"  u32 format_version
//! u64 len + augment section
//! u64 len + feature-parameter section
//! u64 len + feature-selection section
//! u64 len + tree-ensemble section
//! u64 len + provenance section
//! u32 CRC-32 of every preceding byte
//! ```
//!
//! Integers and IEEE-754 doubles are little-endian.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::augment::AugmentConfig;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeaturePipelineParams};
use crate::gbdt::{GbdtModel, Node, RegressionTree};
use crate::manifest::Scenario;
use crate::model::{Provenance, QualityModel, RftSummary, FORMAT_VERSION};
use crate::saab::SaabKernel;

pub const MAGIC: &[u8; 4] = b"GBIQ";

const TAG_SPLIT: u8 = 0;
const TAG_LEAF: u8 = 1;

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(n as u32);
    }
    fn f64s(&mut self, v: &[f64]) {
        self.len(v.len());
        for &x in v {
            self.f64(x);
        }
    }
    fn section(&mut self, body: Writer) {
        self.u64(body.buf.len() as u64);
        self.buf.extend_from_slice(&body.buf);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(msg: &str) -> Error {
    Error::CorruptModel(msg.to_string())
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(corrupt("unexpected end of data"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn usize(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }
    /// Length prefix for items of at least `item_bytes` each.
    fn len(&mut self, item_bytes: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.saturating_mul(item_bytes) > self.buf.len() - self.pos {
            return Err(corrupt("length prefix exceeds section"));
        }
        Ok(n)
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn section(&mut self) -> Result<Reader<'a>> {
        let n = self.u64()?;
        let n = usize::try_from(n).map_err(|_| corrupt("section too large"))?;
        Ok(Reader::new(self.take(n)?))
    }
    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(corrupt("trailing bytes in section"));
        }
        Ok(())
    }
}

fn put_kernel(w: &mut Writer, k: &SaabKernel) {
    w.len(k.dim());
    w.len(k.n_ac());
    for &m in k.training_mean() {
        w.f64(m);
    }
    for &e in k.eigenvalues() {
        w.f64(e);
    }
    for b in k.basis() {
        for &x in b {
            w.f64(x);
        }
    }
}

fn get_kernel(r: &mut Reader<'_>) -> Result<SaabKernel> {
    let dim = r.usize()?;
    let n_ac = r.usize()?;
    if dim > 64 || n_ac >= dim.max(1) {
        return Err(corrupt("bad kernel shape"));
    }
    let mean = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let eig = (0..n_ac).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let basis = (0..n_ac)
        .map(|_| (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    SaabKernel::from_parts(dim, mean, basis, eig).map_err(|_| corrupt("bad kernel"))
}

fn augment_section(a: &AugmentConfig) -> Writer {
    let mut w = Writer::default();
    w.u8(match a.scenario {
        Scenario::Synthetic => 0,
        Scenario::Authentic => 1,
    });
    w.len(a.patch_size);
    w.len(a.patch_count);
    w.len(a.crop_count);
    w.u8(a.use_flips as u8);
    w.len(a.target_side);
    w
}

fn feature_section(p: &FeaturePipelineParams) -> Writer {
    let mut w = Writer::default();
    w.len(p.config.pooling_window);
    w.len(p.config.spectral_region);
    w.len(p.hop2.len());
    for k in &p.hop2 {
        put_kernel(&mut w, k);
    }
    w.len(p.spectral.len());
    for k in &p.spectral {
        put_kernel(&mut w, k);
    }
    w
}

fn rft_section(s: &RftSummary) -> Writer {
    let mut w = Writer::default();
    w.u32(s.bins);
    w.f64s(&s.costs);
    w.len(s.selected.len());
    for &j in &s.selected {
        w.len(j);
    }
    w
}

fn gbdt_section(m: &GbdtModel) -> Writer {
    let mut w = Writer::default();
    w.f64(m.base_score);
    w.f64(m.learning_rate);
    w.len(m.n_features);
    w.len(m.n_trees_used);
    w.len(m.trees.len());
    for t in &m.trees {
        w.len(t.nodes.len());
        for node in &t.nodes {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    w.u8(TAG_SPLIT);
                    w.u32(feature);
                    w.f64(threshold);
                    w.u32(left);
                    w.u32(right);
                }
                Node::Leaf { value } => {
                    w.u8(TAG_LEAF);
                    w.f64(value);
                }
            }
        }
    }
    w
}

fn provenance_section(p: &Provenance) -> Writer {
    let mut w = Writer::default();
    w.u64(p.seed);
    w.buf.extend_from_slice(&p.manifest_digest);
    w.i64(p.timestamp);
    w
}

pub fn encode_model(m: &QualityModel) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(MAGIC);
    w.u32(m.format_version);
    w.section(augment_section(&m.augment));
    w.section(feature_section(&m.feature_params));
    w.section(rft_section(&m.rft));
    w.section(gbdt_section(&m.gbdt));
    w.section(provenance_section(&m.provenance));
    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

pub fn decode_model(bytes: &[u8]) -> Result<QualityModel> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(corrupt("missing GBIQ header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("length checked"));
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().expect("length checked"));
    if crc32fast::hash(body) != stored {
        return Err(corrupt("checksum mismatch"));
    }
    let mut r = Reader::new(&body[8..]);

    let mut s = r.section()?;
    let scenario = match s.u8()? {
        0 => Scenario::Synthetic,
        1 => Scenario::Authentic,
        _ => return Err(corrupt("unknown scenario")),
    };
    let augment = AugmentConfig {
        scenario,
        patch_size: s.usize()?,
        patch_count: s.usize()?,
        crop_count: s.usize()?,
        use_flips: s.u8()? != 0,
        target_side: s.usize()?,
    };
    s.finish()?;

    let mut s = r.section()?;
    let config = FeatureConfig {
        pooling_window: s.usize()?,
        spectral_region: s.usize()?,
    };
    let n = s.len(8)?;
    let hop2 = (0..n).map(|_| get_kernel(&mut s)).collect::<Result<Vec<_>>>()?;
    let n = s.len(8)?;
    let spectral = (0..n).map(|_| get_kernel(&mut s)).collect::<Result<Vec<_>>>()?;
    s.finish()?;
    let feature_params = FeaturePipelineParams {
        config,
        hop2,
        spectral,
    };

    let mut s = r.section()?;
    let bins = s.u32()?;
    let costs = s.f64s()?;
    let n = s.len(4)?;
    let selected = (0..n).map(|_| s.usize()).collect::<Result<Vec<_>>>()?;
    s.finish()?;
    let rft = RftSummary {
        bins,
        costs,
        selected,
    };

    let mut s = r.section()?;
    let base_score = s.f64()?;
    let learning_rate = s.f64()?;
    let n_features = s.usize()?;
    let n_trees_used = s.usize()?;
    let n_trees = s.len(4)?;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let n_nodes = s.len(9)?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            nodes.push(match s.u8()? {
                TAG_SPLIT => Node::Split {
                    feature: s.u32()?,
                    threshold: s.f64()?,
                    left: s.u32()?,
                    right: s.u32()?,
                },
                TAG_LEAF => Node::Leaf { value: s.f64()? },
                _ => return Err(corrupt("unknown node tag")),
            });
        }
        trees.push(RegressionTree { nodes });
    }
    s.finish()?;
    let gbdt = GbdtModel {
        base_score,
        learning_rate,
        n_features,
        n_trees_used,
        trees,
    };

    let mut s = r.section()?;
    let seed = s.u64()?;
    let manifest_digest = s.array::<32>()?;
    let timestamp = s.i64()?;
    s.finish()?;
    r.finish()?;

    let model = QualityModel {
        format_version: version,
        augment,
        feature_params,
        rft,
        gbdt,
        provenance: Provenance {
            seed,
            manifest_digest,
            timestamp,
        },
    };
    model.validate().map_err(|e| match e {
        Error::CorruptModel(m) => Error::CorruptModel(m),
        other => Error::CorruptModel(other.to_string()),
    })?;
    Ok(model)
}
