//! Procedural stand-in for a synthetic-distortion IQA dataset.
//!
//! Reference images mix colour gradients, sinusoidal gratings, flat shapes
//! and smoothed noise texture. Each distortion family is applied at
//! increasing strength and the score drops linearly from 5 (weakest level)
//! to 1 (strongest).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dct::{Dct8, BLOCK};
use crate::error::{Error, Result};
use crate::image::Rgb8Image;

/// Standard JPEG luminance quantisation table (quality 50), row-major.
const JPEG_LUMA: [f64; 64] = [
    16., 11., 10., 16., 24., 40., 51., 61., 12., 12., 14., 19., 26., 58., 60., 55., 14., 13., 16.,
    24., 40., 57., 69., 56., 14., 17., 22., 29., 51., 87., 80., 62., 18., 22., 37., 56., 68., 109.,
    103., 77., 24., 35., 55., 64., 81., 104., 113., 92., 49., 64., 78., 87., 103., 121., 120.,
    101., 72., 92., 95., 98., 112., 100., 103., 99.,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distortion {
    GaussianBlur,
    WhiteNoise,
    JpegQuantization,
    ContrastShift,
}

impl Distortion {
    pub const ALL: [Distortion; 4] = [
        Distortion::GaussianBlur,
        Distortion::WhiteNoise,
        Distortion::JpegQuantization,
        Distortion::ContrastShift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distortion::GaussianBlur => "gaussian_blur",
            Distortion::WhiteNoise => "white_noise",
            Distortion::JpegQuantization => "jpeg_quantization",
            Distortion::ContrastShift => "contrast_shift",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == s.trim())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyDatasetSpec {
    pub n_references: usize,
    pub distortion_types: Vec<Distortion>,
    pub levels: usize,
    pub image_side: usize,
    pub seed: u64,
}

impl Default for ToyDatasetSpec {
    fn default() -> Self {
        Self {
            n_references: 10,
            distortion_types: Distortion::ALL.to_vec(),
            levels: 5,
            image_side: 288,
            seed: 0,
        }
    }
}

impl ToyDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_references == 0 || self.distortion_types.is_empty() {
            return Err(Error::InvalidConfig("toy dataset needs references and distortions".into()));
        }
        if self.levels < 2 {
            return Err(Error::InvalidConfig("toy dataset needs at least two levels".into()));
        }
        if self.image_side < 2 * BLOCK {
            return Err(Error::InvalidConfig("toy image side must be at least 16".into()));
        }
        Ok(())
    }

    /// Pristine copy plus every (distortion, level) per reference.
    pub fn n_images(&self) -> usize {
        self.n_references * (1 + self.distortion_types.len() * self.levels)
    }
}

/// Score of a distorted image at `level` (1-based).
pub fn mos_for_level(level: usize, levels: usize) -> f64 {
    5.0 - 4.0 * (level - 1) as f64 / (levels - 1) as f64
}

pub const PRISTINE_MOS: f64 = 5.0;

fn stream(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    s ^= a.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    s ^= b.wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(s)
}

/// Real-valued planar RGB working buffer.
struct Canvas {
    side: usize,
    ch: [Vec<f64>; 3],
}

impl Canvas {
    fn to_rgb8(&self) -> Rgb8Image {
        let n = self.side * self.side;
        let mut data = Vec::with_capacity(n * 3);
        for i in 0..n {
            for c in 0..3 {
                data.push(libm::round(self.ch[c][i].clamp(0.0, 255.0)) as u8);
            }
        }
        Rgb8Image {
            width: self.side,
            height: self.side,
            data,
        }
    }

    fn from_rgb8(img: &Rgb8Image) -> Self {
        let n = img.width * img.height;
        let mut ch = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (i, px) in img.data.chunks_exact(3).enumerate() {
            for c in 0..3 {
                ch[c][i] = px[c] as f64;
            }
        }
        Self {
            side: img.width,
            ch,
        }
    }
}

pub fn render_reference(index: usize, side: usize, seed: u64) -> Rgb8Image {
    let mut rng = stream(seed, index as u64, 0);
    let s = side as f64;
    let mut canvas = Canvas {
        side,
        ch: [vec![0.0; side * side], vec![0.0; side * side], vec![0.0; side * side]],
    };

    // colour gradient background
    let base: [f64; 3] = core::array::from_fn(|_| rng.random_range(60.0..190.0));
    let gx: [f64; 3] = core::array::from_fn(|_| rng.random_range(-60.0..60.0));
    let gy: [f64; 3] = core::array::from_fn(|_| rng.random_range(-60.0..60.0));
    for r in 0..side {
        for c in 0..side {
            let (x, y) = (c as f64 / s - 0.5, r as f64 / s - 0.5);
            for k in 0..3 {
                canvas.ch[k][r * side + c] = base[k] + gx[k] * x + gy[k] * y;
            }
        }
    }

    // gratings
    for _ in 0..3 {
        let freq = rng.random_range(0.02..0.22);
        let theta = rng.random_range(0.0..PI);
        let phase = rng.random_range(0.0..2.0 * PI);
        let amp = rng.random_range(10.0..30.0);
        let tint: [f64; 3] = core::array::from_fn(|_| rng.random_range(0.5..1.0));
        let (cx, cy) = (libm::cos(theta), libm::sin(theta));
        for r in 0..side {
            for c in 0..side {
                let t = 2.0 * PI * freq * (c as f64 * cx + r as f64 * cy) + phase;
                let v = amp * libm::sin(t);
                for k in 0..3 {
                    canvas.ch[k][r * side + c] += tint[k] * v;
                }
            }
        }
    }

    // flat shapes with hard edges
    for _ in 0..6 {
        let colour: [f64; 3] = core::array::from_fn(|_| rng.random_range(20.0..235.0));
        let cx = rng.random_range(0.0..s);
        let cy = rng.random_range(0.0..s);
        let radius = rng.random_range(0.05..0.2) * s;
        let square = rng.random_bool(0.5);
        for r in 0..side {
            for c in 0..side {
                let (dx, dy) = (c as f64 - cx, r as f64 - cy);
                let inside = if square {
                    libm::fabs(dx) < radius && libm::fabs(dy) < radius
                } else {
                    dx * dx + dy * dy < radius * radius
                };
                if inside {
                    for k in 0..3 {
                        canvas.ch[k][r * side + c] = colour[k];
                    }
                }
            }
        }
    }

    // smoothed noise texture
    let amp = rng.random_range(8.0..20.0);
    let mut tex: Vec<f64> = (0..side * side)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    tex = blur_plane(&tex, side, 1.0);
    for (i, t) in tex.iter().enumerate() {
        for k in 0..3 {
            canvas.ch[k][i] += amp * t;
        }
    }
    canvas.to_rgb8()
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable Gaussian blur with edge clamping on a square plane.
fn blur_plane(src: &[f64], side: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    let radius = (k.len() / 2) as isize;
    let clamp = |i: isize| i.clamp(0, side as isize - 1) as usize;
    let mut tmp = vec![0.0; side * side];
    for r in 0..side {
        for c in 0..side {
            let mut acc = 0.0;
            for (t, &w) in k.iter().enumerate() {
                acc += w * src[r * side + clamp(c as isize + t as isize - radius)];
            }
            tmp[r * side + c] = acc;
        }
    }
    let mut out = vec![0.0; side * side];
    for r in 0..side {
        for c in 0..side {
            let mut acc = 0.0;
            for (t, &w) in k.iter().enumerate() {
                acc += w * tmp[clamp(r as isize + t as isize - radius) * side + c];
            }
            out[r * side + c] = acc;
        }
    }
    out
}

fn quantise_plane(plane: &mut [f64], side: usize, scale: f64, dct: &Dct8) {
    for br in (0..side - side % BLOCK).step_by(BLOCK) {
        for bc in (0..side - side % BLOCK).step_by(BLOCK) {
            let mut block = [[0.0; BLOCK]; BLOCK];
            for (a, row) in block.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    *v = plane[(br + a) * side + bc + b] - 128.0;
                }
            }
            let mut coeffs = dct.forward(&block);
            for (a, row) in coeffs.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    let q = (JPEG_LUMA[a * BLOCK + b] * scale).max(1.0);
                    *v = libm::round(*v / q) * q;
                }
            }
            let back = dct.inverse(&coeffs);
            for (a, row) in back.iter().enumerate() {
                for (b, &v) in row.iter().enumerate() {
                    plane[(br + a) * side + bc + b] = v + 128.0;
                }
            }
        }
    }
}

/// Applies `distortion` at `level` (1-based, `levels` total).
pub fn distort(
    img: &Rgb8Image,
    distortion: Distortion,
    level: usize,
    levels: usize,
    rng_seed: u64,
) -> Rgb8Image {
    assert!(img.width == img.height, "toy images are square");
    let s = (level - 1) as f64 / (levels - 1) as f64;
    let side = img.width;
    let mut canvas = Canvas::from_rgb8(img);
    match distortion {
        Distortion::GaussianBlur => {
            let sigma = 0.5 + 2.5 * s;
            for ch in canvas.ch.iter_mut() {
                *ch = blur_plane(ch, side, sigma);
            }
        }
        Distortion::WhiteNoise => {
            let sigma = 3.0 + 27.0 * s;
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            for ch in canvas.ch.iter_mut() {
                for v in ch.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += sigma * z;
                }
            }
        }
        Distortion::JpegQuantization => {
            let scale = 0.3 * libm::pow(12.0, s);
            let dct = Dct8::new();
            for ch in canvas.ch.iter_mut() {
                quantise_plane(ch, side, scale, &dct);
            }
        }
        Distortion::ContrastShift => {
            let factor = 0.9 - 0.65 * s;
            let n = (side * side) as f64;
            for ch in canvas.ch.iter_mut() {
                let mean = ch.iter().sum::<f64>() / n;
                for v in ch.iter_mut() {
                    *v = mean + factor * (*v - mean);
                }
            }
        }
    }
    canvas.to_rgb8()
}

/// One generated image.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyImage {
    pub reference: usize,
    /// `None` for the pristine copy.
    pub distortion: Option<(Distortion, usize)>,
    pub mos: f64,
    pub image: Rgb8Image,
}

impl ToyImage {
    pub fn file_stem(&self) -> alloc::string::String {
        match self.distortion {
            None => alloc::format!("ref{:03}_pristine", self.reference),
            Some((d, level)) => alloc::format!("ref{:03}_{}_l{}", self.reference, d.name(), level),
        }
    }
}

/// All images of one reference, pristine first.
pub fn reference_set(spec: &ToyDatasetSpec, reference: usize) -> Vec<ToyImage> {
    let pristine = render_reference(reference, spec.image_side, spec.seed);
    let mut out = Vec::with_capacity(1 + spec.distortion_types.len() * spec.levels);
    for (di, &d) in spec.distortion_types.iter().enumerate() {
        for level in 1..=spec.levels {
            let noise_seed = stream(spec.seed, reference as u64 + 1, (di * 1000 + level) as u64).random();
            out.push(ToyImage {
                reference,
                distortion: Some((d, level)),
                mos: mos_for_level(level, spec.levels),
                image: distort(&pristine, d, level, spec.levels, noise_seed),
            });
        }
    }
    out.insert(
        0,
        ToyImage {
            reference,
            distortion: None,
            mos: PRISTINE_MOS,
            image: pristine,
        },
    );
    out
}
