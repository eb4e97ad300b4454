//! Unsupervised feature generation.
//!
//! Per channel a subimage yields 64 DCT coefficient maps (HOP1). The DC map
//! is cut into 3×3 blocks and passed through a 9-D Saab transform, giving a
//! DC map and eight AC maps (HOP2). Each of the 63 HOP1 AC maps and 9 HOP2
//! maps is then
//!
//! * rectified and max-pooled,
//! * summarised by its spatial max, mean and standard deviation,
//! * cut into small neighbourhoods whose region-Saab responses are averaged
//!   over the map (spectral features).
//!
//! The spectral average only needs the mean neighbourhood vector because
//! the Saab response is affine in its input. Extraction therefore runs in
//! two steps: [`raw_features`] keeps statistics plus mean neighbourhood
//! vectors, and [`finalize`] applies the fitted region kernels.

use alloc::vec;
use alloc::vec::Vec;

use crate::augment::Subimage;
use crate::dct::{CoefficientMaps, Dct8, DctBlockGrid, COEFFS};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::image::Plane;
use crate::saab::{SaabAccumulator, SaabKernel};

pub const CHANNELS: usize = 3;
pub const HOP1_MAPS: usize = COEFFS - 1;
pub const HOP2_MAPS: usize = 9;
pub const MAPS_PER_CHANNEL: usize = HOP1_MAPS + HOP2_MAPS;
pub const STATS_PER_MAP: usize = 3;
pub const SPECTRAL_AC: usize = 3;
pub const SPECTRAL_PER_MAP: usize = 1 + SPECTRAL_AC;
pub const FEATURES_PER_MAP: usize = STATS_PER_MAP + SPECTRAL_PER_MAP;
pub const FEATURES_PER_CHANNEL: usize = MAPS_PER_CHANNEL * FEATURES_PER_MAP;
pub const N_FEATURES: usize = CHANNELS * FEATURES_PER_CHANNEL;

const HOP2_SIDE: usize = 3;
const HOP2_DIM: usize = HOP2_SIDE * HOP2_SIDE;
/// Images handled per executor batch while fitting.
const FIT_BATCH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Y,
    U,
    V,
}

impl Channel {
    pub const ALL: [Channel; CHANNELS] = [Channel::Y, Channel::U, Channel::V];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Y => "Y",
            Channel::U => "U",
            Channel::V => "V",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hop {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statistic {
    Max,
    Mean,
    Std,
    /// Averaged region-Saab response; 0 is the region DC.
    Spectral(u8),
}

/// Provenance of one feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnMeta {
    pub channel: Channel,
    pub hop: Hop,
    /// Zigzag index (1..=63) for HOP1, Saab output index (0..=8) for HOP2.
    pub coefficient: u8,
    pub statistic: Statistic,
}

/// Column layout: channel, then hop, then coefficient, then statistic.
pub fn column_meta() -> Vec<ColumnMeta> {
    let mut out = Vec::with_capacity(N_FEATURES);
    for channel in Channel::ALL {
        for map in 0..MAPS_PER_CHANNEL {
            let (hop, coefficient) = map_id(map);
            for s in 0..FEATURES_PER_MAP {
                let statistic = match s {
                    0 => Statistic::Max,
                    1 => Statistic::Mean,
                    2 => Statistic::Std,
                    k => Statistic::Spectral((k - STATS_PER_MAP) as u8),
                };
                out.push(ColumnMeta {
                    channel,
                    hop,
                    coefficient,
                    statistic,
                });
            }
        }
    }
    out
}

fn map_id(map: usize) -> (Hop, u8) {
    if map < HOP1_MAPS {
        (Hop::One, (map + 1) as u8)
    } else {
        (Hop::Two, (map - HOP1_MAPS) as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureConfig {
    pub pooling_window: usize,
    pub spectral_region: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            pooling_window: 2,
            spectral_region: 2,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pooling_window == 0 {
            return Err(Error::InvalidConfig("pooling_window must be positive".into()));
        }
        if self.spectral_region < 2 || self.spectral_region > 4 {
            return Err(Error::InvalidConfig("spectral_region must be in 2..=4".into()));
        }
        Ok(())
    }

    pub fn region_dim(&self) -> usize {
        self.spectral_region * self.spectral_region
    }
}

/// Everything needed to turn a subimage into a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePipelineParams {
    pub config: FeatureConfig,
    /// One 9-D kernel per channel.
    pub hop2: Vec<SaabKernel>,
    /// One region kernel per (channel, map), channel-major.
    pub spectral: Vec<SaabKernel>,
}

impl FeaturePipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.hop2.len() != CHANNELS
            || self.spectral.len() != CHANNELS * MAPS_PER_CHANNEL
            || self.hop2.iter().any(|k| k.dim() != HOP2_DIM || k.n_ac() != HOP2_DIM - 1)
            || self
                .spectral
                .iter()
                .any(|k| k.dim() != self.config.region_dim() || k.n_ac() != SPECTRAL_AC)
        {
            return Err(Error::ShapeMismatch("feature parameters are inconsistent".into()));
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        N_FEATURES
    }

    pub fn spectral_kernel(&self, channel: usize, map: usize) -> &SaabKernel {
        &self.spectral[channel * MAPS_PER_CHANNEL + map]
    }
}

/// Rows are subimages, columns follow [`column_meta`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub column_meta: Vec<ColumnMeta>,
}

impl FeatureMatrix {
    pub fn empty(column_meta: Vec<ColumnMeta>) -> Self {
        Self {
            rows: 0,
            cols: column_meta.len(),
            values: Vec::new(),
            column_meta,
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols);
        self.values.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.values[i * self.cols + j]).collect()
    }

    /// Keeps the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.rows * columns.len());
        for i in 0..self.rows {
            let row = self.row(i);
            values.extend(columns.iter().map(|&j| row[j]));
        }
        Self {
            rows: self.rows,
            cols: columns.len(),
            values,
            column_meta: columns.iter().map(|&j| self.column_meta[j]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// HOP1 coefficient maps of one plane (64 maps, zigzag-indexed, DC first).
pub fn hop1_maps(plane: &Plane, dct: &Dct8) -> CoefficientMaps {
    DctBlockGrid::compute(plane, dct).coefficient_maps()
}

/// Non-overlapping 3×3 blocks of a DC map, flattened row-major.
pub fn hop2_blocks(dc_map: &[f64], rows: usize, cols: usize) -> Result<Vec<[f64; HOP2_DIM]>> {
    if !rows.is_multiple_of(HOP2_SIDE) || !cols.is_multiple_of(HOP2_SIDE) || rows == 0 || cols == 0 {
        return Err(Error::ShapeMismatch(alloc::format!(
            "DC map of {rows}x{cols} does not tile into 3x3 blocks"
        )));
    }
    let mut out = Vec::with_capacity(rows * cols / HOP2_DIM);
    for br in (0..rows).step_by(HOP2_SIDE) {
        for bc in (0..cols).step_by(HOP2_SIDE) {
            let mut v = [0.0; HOP2_DIM];
            for a in 0..HOP2_SIDE {
                for b in 0..HOP2_SIDE {
                    v[a * HOP2_SIDE + b] = dc_map[(br + a) * cols + bc + b];
                }
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Fits a HOP2 kernel on the DC maps of one channel.
pub fn fit_hop2_saab<'a>(dc_maps: impl IntoIterator<Item = (&'a [f64], usize, usize)>) -> Result<SaabKernel> {
    let mut acc = SaabAccumulator::new(HOP2_DIM);
    for (map, rows, cols) in dc_maps {
        for block in hop2_blocks(map, rows, cols)? {
            acc.push(&block);
        }
    }
    acc.finish(HOP2_DIM - 1)
}

/// HOP2 maps: the Saab DC followed by eight AC maps, each `rows/3 × cols/3`.
pub fn apply_hop2(dc_map: &[f64], rows: usize, cols: usize, kernel: &SaabKernel) -> Result<CoefficientMaps> {
    let blocks = hop2_blocks(dc_map, rows, cols)?;
    let cells = blocks.len();
    let mut data = vec![0.0; HOP2_MAPS * cells];
    let mut out = [0.0; HOP2_MAPS];
    for (cell, block) in blocks.iter().enumerate() {
        kernel.apply(block, &mut out);
        for (m, &v) in out.iter().enumerate() {
            data[m * cells + cell] = v;
        }
    }
    Ok(CoefficientMaps {
        n_maps: HOP2_MAPS,
        rows: rows / HOP2_SIDE,
        cols: cols / HOP2_SIDE,
        data,
    })
}

/// A pooled map.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledMap {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Absolute value followed by non-overlapping `window`×`window` max pooling.
/// Windows at the right and bottom edges may be partial, so a map smaller
/// than the window is only rectified.
pub fn pool_abs_max(map: &[f64], rows: usize, cols: usize, window: usize) -> PooledMap {
    let pr = rows.div_ceil(window);
    let pc = cols.div_ceil(window);
    let mut data = vec![0.0f64; pr * pc];
    for r in 0..rows {
        let prow = &mut data[(r / window) * pc..(r / window + 1) * pc];
        for (c, &v) in map[r * cols..(r + 1) * cols].iter().enumerate() {
            let a = libm::fabs(v);
            let slot = &mut prow[c / window];
            if a > *slot {
                *slot = a;
            }
        }
    }
    PooledMap {
        rows: pr,
        cols: pc,
        data,
    }
}

/// Spatial max, mean and population standard deviation.
pub fn map_statistics(values: &[f64]) -> [f64; STATS_PER_MAP] {
    let n = values.len() as f64;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        max = max.max(v);
        sum += v;
    }
    let mean = sum / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    [max, mean, libm::sqrt(var)]
}

/// Flattened `region`×`region` neighbourhoods tiling the pooled map, with
/// edge replication for partial neighbourhoods.
pub fn region_vectors(pooled: &PooledMap, region: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let nr = pooled.rows.div_ceil(region);
    let nc = pooled.cols.div_ceil(region);
    (0..nr * nc).map(move |k| {
        let (i, j) = (k / nc, k % nc);
        let mut v = Vec::with_capacity(region * region);
        for a in 0..region {
            let r = (i * region + a).min(pooled.rows - 1);
            for b in 0..region {
                let c = (j * region + b).min(pooled.cols - 1);
                v.push(pooled.data[r * pooled.cols + c]);
            }
        }
        v
    })
}

fn accumulate_regions(
    pooled: &PooledMap,
    region: usize,
    mean: &mut [f64],
    acc: Option<&mut SaabAccumulator>,
) {
    let mut count = 0usize;
    let mut buf = [0.0; 16];
    let nr = pooled.rows.div_ceil(region);
    let nc = pooled.cols.div_ceil(region);
    let dim = region * region;
    let mut acc = acc;
    for i in 0..nr {
        for j in 0..nc {
            for a in 0..region {
                let r = (i * region + a).min(pooled.rows - 1);
                for b in 0..region {
                    let c = (j * region + b).min(pooled.cols - 1);
                    buf[a * region + b] = pooled.data[r * pooled.cols + c];
                }
            }
            for (m, &v) in mean.iter_mut().zip(&buf[..dim]) {
                *m += v;
            }
            if let Some(acc) = acc.as_deref_mut() {
                acc.push(&buf[..dim]);
            }
            count += 1;
        }
    }
    for m in mean.iter_mut() {
        *m /= count as f64;
    }
}

/// Statistics and mean neighbourhood vector of every map, before the region
/// kernels are known.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFeatures {
    region_dim: usize,
    values: Vec<f64>,
}

impl RawFeatures {
    fn stride(&self) -> usize {
        STATS_PER_MAP + self.region_dim
    }

    /// Slot for `(channel, map)`: three statistics then the mean region vector.
    pub fn map_slot(&self, channel: usize, map: usize) -> &[f64] {
        let s = self.stride();
        let k = channel * MAPS_PER_CHANNEL + map;
        &self.values[k * s..(k + 1) * s]
    }
}

/// Per-plane intermediate results, exposed for stage timing.
pub struct ChannelHops {
    pub hop1: CoefficientMaps,
    pub hop2: CoefficientMaps,
}

pub fn channel_hops(plane: &Plane, kernel: &SaabKernel, dct: &Dct8) -> Result<ChannelHops> {
    let hop1 = hop1_maps(plane, dct);
    let hop2 = apply_hop2(hop1.map(0), hop1.rows, hop1.cols, kernel)?;
    Ok(ChannelHops { hop1, hop2 })
}

/// Pools and summarises already transformed maps of the three channels.
/// When `spectral` is given, every neighbourhood vector is also pushed into
/// the accumulator of its (channel, map).
pub fn pool_channels(
    hops: &[ChannelHops],
    cfg: &FeatureConfig,
    mut spectral: Option<&mut [SaabAccumulator]>,
) -> RawFeatures {
    let region_dim = cfg.region_dim();
    let stride = STATS_PER_MAP + region_dim;
    let mut values = vec![0.0; CHANNELS * MAPS_PER_CHANNEL * stride];
    for (ch, h) in hops.iter().enumerate() {
        for map in 0..MAPS_PER_CHANNEL {
            let (src, idx) = if map < HOP1_MAPS {
                (&h.hop1, map + 1)
            } else {
                (&h.hop2, map - HOP1_MAPS)
            };
            let pooled = pool_abs_max(src.map(idx), src.rows, src.cols, cfg.pooling_window);
            let k = ch * MAPS_PER_CHANNEL + map;
            let slot = &mut values[k * stride..(k + 1) * stride];
            slot[..STATS_PER_MAP].copy_from_slice(&map_statistics(&pooled.data));
            let acc = spectral.as_deref_mut().map(|a| &mut a[k]);
            accumulate_regions(&pooled, cfg.spectral_region, &mut slot[STATS_PER_MAP..], acc);
        }
    }
    RawFeatures { region_dim, values }
}

fn check_side(sub: &Subimage) -> Result<()> {
    let (w, h) = (sub.pixels.width(), sub.pixels.height());
    if w != h || w == 0 || w % 24 != 0 {
        return Err(Error::ShapeMismatch(alloc::format!(
            "subimage of {w}x{h} is not a square with side divisible by 24"
        )));
    }
    Ok(())
}

pub fn raw_features(
    sub: &Subimage,
    hop2: &[SaabKernel],
    cfg: &FeatureConfig,
    dct: &Dct8,
    spectral: Option<&mut [SaabAccumulator]>,
) -> Result<RawFeatures> {
    check_side(sub)?;
    let hops = sub
        .pixels
        .planes()
        .iter()
        .zip(hop2)
        .map(|(p, k)| channel_hops(p, k, dct))
        .collect::<Result<Vec<_>>>()?;
    Ok(pool_channels(&hops, cfg, spectral))
}

/// Applies the region kernels, producing the final feature vector.
pub fn finalize(raw: &RawFeatures, params: &FeaturePipelineParams, out: &mut [f64]) {
    debug_assert_eq!(out.len(), N_FEATURES);
    let mut spec = [0.0; SPECTRAL_PER_MAP];
    for ch in 0..CHANNELS {
        for map in 0..MAPS_PER_CHANNEL {
            let slot = raw.map_slot(ch, map);
            let base = (ch * MAPS_PER_CHANNEL + map) * FEATURES_PER_MAP;
            out[base..base + STATS_PER_MAP].copy_from_slice(&slot[..STATS_PER_MAP]);
            params
                .spectral_kernel(ch, map)
                .apply(&slot[STATS_PER_MAP..], &mut spec);
            out[base + STATS_PER_MAP..base + FEATURES_PER_MAP].copy_from_slice(&spec);
        }
    }
}

/// Feature vector of a single subimage.
pub fn feature_vector(sub: &Subimage, params: &FeaturePipelineParams, dct: &Dct8) -> Result<Vec<f64>> {
    let raw = raw_features(sub, &params.hop2, &params.config, dct, None)?;
    let mut out = vec![0.0; N_FEATURES];
    finalize(&raw, params, &mut out);
    Ok(out)
}

pub fn extract_features<E: Executor>(
    subs: &[Subimage],
    params: &FeaturePipelineParams,
    exec: &E,
) -> Result<FeatureMatrix> {
    let dct = Dct8::new();
    let rows = exec.map(subs.len(), |i| feature_vector(&subs[i], params, &dct));
    let mut m = FeatureMatrix::empty(column_meta());
    for row in rows {
        m.push_row(&row?);
    }
    Ok(m)
}

/// Builds a matrix from raw features of previously processed subimages.
pub fn matrix_from_raw<'a>(
    raw: impl IntoIterator<Item = &'a RawFeatures>,
    params: &FeaturePipelineParams,
) -> FeatureMatrix {
    let mut m = FeatureMatrix::empty(column_meta());
    let mut row = vec![0.0; N_FEATURES];
    for r in raw {
        finalize(r, params, &mut row);
        m.push_row(&row);
    }
    m
}

/// Indexed producer of subimages, typically one index per source image.
/// Sources are revisited once per fitting pass, so they should regenerate
/// subimages on demand rather than hold them.
pub trait SubimageSource: Sync {
    type Error: From<Error> + Send;

    fn len(&self) -> usize;

    fn subimages(&self, index: usize) -> core::result::Result<Vec<Subimage>, Self::Error>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Source over in-memory subimages, one subimage per index.
pub struct InMemory<'a>(pub &'a [Subimage]);

impl SubimageSource for InMemory<'_> {
    type Error = Error;

    fn len(&self) -> usize {
        self.0.len()
    }

    fn subimages(&self, index: usize) -> Result<Vec<Subimage>> {
        Ok(vec![self.0[index].clone()])
    }
}

/// Fitted parameters together with the raw features of the training
/// subimages, grouped per source index.
pub struct FeatureFit {
    pub params: FeaturePipelineParams,
    pub raw: Vec<Vec<RawFeatures>>,
    pub mos: Vec<Vec<f64>>,
}

impl FeatureFit {
    pub fn matrix(&self) -> FeatureMatrix {
        matrix_from_raw(self.raw.iter().flatten(), &self.params)
    }
}

/// Fits HOP2 kernels (first pass) and region kernels (second pass) on the
/// subimages of `source`.
pub fn fit_feature_params<S: SubimageSource, E: Executor>(
    source: &S,
    cfg: &FeatureConfig,
    exec: &E,
) -> core::result::Result<FeatureFit, S::Error> {
    cfg.validate()?;
    let n = source.len();
    let dct = Dct8::new();

    let mut hop2_acc: Vec<SaabAccumulator> = (0..CHANNELS).map(|_| SaabAccumulator::new(HOP2_DIM)).collect();
    for start in (0..n).step_by(FIT_BATCH) {
        let len = FIT_BATCH.min(n - start);
        let parts = exec.map(len, |k| -> core::result::Result<Vec<SaabAccumulator>, S::Error> {
            let mut acc: Vec<SaabAccumulator> =
                (0..CHANNELS).map(|_| SaabAccumulator::new(HOP2_DIM)).collect();
            for sub in source.subimages(start + k)? {
                check_side(&sub)?;
                for (ch, plane) in sub.pixels.planes().iter().enumerate() {
                    let maps = hop1_maps(plane, &dct);
                    for block in hop2_blocks(maps.map(0), maps.rows, maps.cols)? {
                        acc[ch].push(&block);
                    }
                }
            }
            Ok(acc)
        });
        for part in parts {
            for (a, b) in hop2_acc.iter_mut().zip(&part?) {
                a.merge(b);
            }
        }
    }
    let hop2 = hop2_acc
        .iter()
        .map(|a| a.finish(HOP2_DIM - 1))
        .collect::<Result<Vec<_>>>()?;

    let region_dim = cfg.region_dim();
    let new_spectral = || -> Vec<SaabAccumulator> {
        (0..CHANNELS * MAPS_PER_CHANNEL)
            .map(|_| SaabAccumulator::new(region_dim))
            .collect()
    };
    let mut spectral_acc = new_spectral();
    let mut raw = Vec::with_capacity(n);
    let mut mos = Vec::with_capacity(n);
    for start in (0..n).step_by(FIT_BATCH) {
        let len = FIT_BATCH.min(n - start);
        let parts = exec.map(len, |k| {
            let mut acc = new_spectral();
            let subs = source.subimages(start + k)?;
            let mut feats = Vec::with_capacity(subs.len());
            for sub in &subs {
                feats.push(raw_features(sub, &hop2, cfg, &dct, Some(&mut acc))?);
            }
            let labels: Vec<f64> = subs.iter().map(|s| s.mos).collect();
            Ok::<_, S::Error>((feats, labels, acc))
        });
        for part in parts {
            let (feats, labels, acc) = part?;
            for (a, b) in spectral_acc.iter_mut().zip(&acc) {
                a.merge(b);
            }
            raw.push(feats);
            mos.push(labels);
        }
    }
    let spectral = spectral_acc
        .iter()
        .map(|a| a.finish(SPECTRAL_AC))
        .collect::<Result<Vec<_>>>()?;

    Ok(FeatureFit {
        params: FeaturePipelineParams {
            config: *cfg,
            hop2,
            spectral,
        },
        raw,
        mos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts() {
        assert_eq!(N_FEATURES, 1512);
        let meta = column_meta();
        assert_eq!(meta.len(), N_FEATURES);
        assert!(meta.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            meta[0],
            ColumnMeta {
                channel: Channel::Y,
                hop: Hop::One,
                coefficient: 1,
                statistic: Statistic::Max
            }
        );
    }

    #[test]
    fn constant_map_statistics() {
        let s = map_statistics(&[2.5; 16]);
        assert_eq!(s, [2.5, 2.5, 0.0]);
    }

    #[test]
    fn spike_statistics() {
        let pooled = pool_abs_max(&[0.0, 0.0, 0.0, 0.0, -6.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 4, 4, 2);
        assert_eq!(pooled.data, vec![6.0, 0.0, 0.0, 0.0]);
        let [max, mean, std] = map_statistics(&pooled.data);
        let p = 4.0;
        assert_eq!(max, 6.0);
        assert_eq!(mean, 6.0 / p);
        let want = libm::sqrt(((6.0 - 1.5f64).powi(2) + 3.0 * 1.5f64.powi(2)) / p);
        assert!((std - want).abs() < 1e-12);
    }

    #[test]
    fn small_maps_are_only_rectified() {
        let pooled = pool_abs_max(&[-3.0], 1, 1, 2);
        assert_eq!(pooled.data, vec![3.0]);
    }

    #[test]
    fn hop2_shape_for_24_pixel_subimage() {
        let dc = [1.0; 9];
        let k = fit_hop2_saab(core::iter::repeat_n((&dc[..], 3, 3), 9)).unwrap();
        let maps = apply_hop2(&dc, 3, 3, &k).unwrap();
        assert_eq!((maps.n_maps, maps.rows, maps.cols), (9, 1, 1));
        assert!(apply_hop2(&[0.0; 16], 4, 4, &k).is_err());
    }

    #[test]
    fn region_vectors_replicate_edges() {
        let pooled = PooledMap {
            rows: 3,
            cols: 3,
            data: (0..9).map(|v| v as f64).collect(),
        };
        let vs: Vec<Vec<f64>> = region_vectors(&pooled, 2).collect();
        assert_eq!(vs.len(), 4);
        assert_eq!(vs[0], vec![0.0, 1.0, 3.0, 4.0]);
        assert_eq!(vs[1], vec![2.0, 2.0, 5.0, 5.0]);
        assert_eq!(vs[3], vec![8.0, 8.0, 8.0, 8.0]);
    }

    #[test]
    fn select_columns_keeps_order() {
        let mut m = FeatureMatrix::empty(column_meta()[..3].to_vec());
        m.push_row(&[1.0, 2.0, 3.0]);
        m.push_row(&[4.0, 5.0, 6.0]);
        let s = m.select_columns(&[2, 0]);
        assert_eq!(s.values, vec![3.0, 1.0, 6.0, 4.0]);
        assert_eq!(s.column(1), vec![1.0, 4.0]);
    }
}
