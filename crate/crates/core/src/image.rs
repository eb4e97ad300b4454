//! Planar raster types and BT.601 full-range colour conversion.
//!
//! Chroma is stored 4:4:4 and centred on zero, so a neutral grey has
//! `u == v == 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// Row-major plane of real-valued samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(alloc::format!(
                "plane of {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Copies the `width`×`height` window whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Self {
        assert!(x + width <= self.width && y + height <= self.height);
        let mut data = Vec::with_capacity(width * height);
        for r in y..y + height {
            data.extend_from_slice(&self.row(r)[x..x + width]);
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Column-reversed copy.
    pub fn mirror_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.height {
            data.extend(self.row(r).iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Bilinear resampling with half-pixel centres and edge clamping.
    /// Resampling to the current size returns an exact copy.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Self {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let xs = sample_positions(self.width, width);
        let ys = sample_positions(self.height, height);
        let mut data = Vec::with_capacity(width * height);
        for &(y0, y1, fy) in &ys {
            let top = self.row(y0);
            let bottom = self.row(y1);
            for &(x0, x1, fx) in &xs {
                let t = top[x0] + (top[x1] - top[x0]) * fx;
                let b = bottom[x0] + (bottom[x1] - bottom[x0]) * fx;
                data.push(t + (b - t) * fy);
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

fn sample_positions(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    let last = (src - 1) as f64;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = libm::floor(pos) as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}

/// Three equally sized planes: luma and two zero-centred chroma planes.
#[derive(Debug, Clone, PartialEq)]
pub struct YuvImage {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
}

impl YuvImage {
    pub fn new(y: Plane, u: Plane, v: Plane) -> Result<Self> {
        let same = |p: &Plane| p.width == y.width && p.height == y.height;
        if !same(&u) || !same(&v) {
            return Err(Error::ShapeMismatch("chroma planes must match luma".into()));
        }
        if !(y.is_finite() && u.is_finite() && v.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite sample".into()));
        }
        Ok(Self { y, u, v })
    }

    pub fn width(&self) -> usize {
        self.y.width
    }

    pub fn height(&self) -> usize {
        self.y.height
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.y, &self.u, &self.v]
    }

    pub fn from_rgb8(image: &Rgb8Image) -> Self {
        let n = image.width * image.height;
        let (mut y, mut u, mut v) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for px in image.data.chunks_exact(3) {
            let (yy, uu, vv) = rgb_to_yuv(px[0] as f64, px[1] as f64, px[2] as f64);
            y.push(yy);
            u.push(uu);
            v.push(vv);
        }
        let (w, h) = (image.width, image.height);
        Self {
            y: Plane {
                width: w,
                height: h,
                data: y,
            },
            u: Plane {
                width: w,
                height: h,
                data: u,
            },
            v: Plane {
                width: w,
                height: h,
                data: v,
            },
        }
    }

    pub fn from_gray8(width: usize, height: usize, samples: &[u8]) -> Result<Self> {
        let y = Plane::new(width, height, samples.iter().map(|&s| s as f64).collect())?;
        Ok(Self {
            u: Plane::filled(width, height, 0.0),
            v: Plane::filled(width, height, 0.0),
            y,
        })
    }

    /// Interleaved real-valued RGB obtained with the inverse matrix.
    pub fn to_rgb(&self) -> Vec<[f64; 3]> {
        self.y
            .data
            .iter()
            .zip(&self.u.data)
            .zip(&self.v.data)
            .map(|((&y, &u), &v)| {
                let (r, g, b) = yuv_to_rgb(y, u, v);
                [r, g, b]
            })
            .collect()
    }

    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            y: self.y.crop(x, y, width, height),
            u: self.u.crop(x, y, width, height),
            v: self.v.crop(x, y, width, height),
        }
    }

    pub fn mirror_horizontal(&self) -> Self {
        Self {
            y: self.y.mirror_horizontal(),
            u: self.u.mirror_horizontal(),
            v: self.v.mirror_horizontal(),
        }
    }

    pub fn resize_bilinear(&self, width: usize, height: usize) -> Self {
        Self {
            y: self.y.resize_bilinear(width, height),
            u: self.u.resize_bilinear(width, height),
            v: self.v.resize_bilinear(width, height),
        }
    }
}

#[inline]
pub fn rgb_to_yuv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = KR * r + KG * g + KB * b;
    let u = 0.5 * (b - y) / (1.0 - KB);
    let v = 0.5 * (r - y) / (1.0 - KR);
    (y, u, v)
}

#[inline]
pub fn yuv_to_rgb(y: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let r = y + v * 2.0 * (1.0 - KR);
    let b = y + u * 2.0 * (1.0 - KB);
    let g = (y - KR * r - KB * b) / KG;
    (r, g, b)
}

/// Interleaved 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb8Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Rgb8Image {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::ShapeMismatch(alloc::format!(
                "rgb image of {width}x{height} needs {} bytes, got {}",
                width * height * 3,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            data,
        }
    }
}
