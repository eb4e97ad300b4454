//! Orthonormal 8×8 DCT-II and JPEG zigzag scanning.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::image::Plane;

pub const BLOCK: usize = 8;
pub const COEFFS: usize = BLOCK * BLOCK;

pub type Block = [[f64; BLOCK]; BLOCK];

/// `ZIGZAG[i]` is the row-major position of the `i`-th scanned coefficient.
pub const ZIGZAG: [usize; COEFFS] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20,
    13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59,
    52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// Precomputed orthonormal DCT-II basis.
#[derive(Debug, Clone)]
pub struct Dct8 {
    basis: [[f64; BLOCK]; BLOCK],
}

impl Default for Dct8 {
    fn default() -> Self {
        Self::new()
    }
}

impl Dct8 {
    pub fn new() -> Self {
        let mut basis = [[0.0; BLOCK]; BLOCK];
        for (k, row) in basis.iter_mut().enumerate() {
            let alpha = if k == 0 {
                libm::sqrt(1.0 / BLOCK as f64)
            } else {
                libm::sqrt(2.0 / BLOCK as f64)
            };
            for (n, b) in row.iter_mut().enumerate() {
                *b = alpha * libm::cos((2 * n + 1) as f64 * k as f64 * PI / (2 * BLOCK) as f64);
            }
        }
        Self { basis }
    }

    /// Forward 2-D transform.
    ///
    /// The block mean is removed before the separable pass and the DC term
    /// is set to `sum / 8` directly. AC terms are therefore unaffected, bit
    /// for bit, by adding an exactly representable constant to the block.
    pub fn forward(&self, block: &Block) -> Block {
        let sum: f64 = block.iter().flatten().sum();
        let mean = sum / COEFFS as f64;
        let mut tmp = [[0.0; BLOCK]; BLOCK];
        for k in 0..BLOCK {
            let bk = &self.basis[k];
            for n in 0..BLOCK {
                let mut acc = 0.0;
                for m in 0..BLOCK {
                    acc += bk[m] * (block[m][n] - mean);
                }
                tmp[k][n] = acc;
            }
        }
        let mut out = [[0.0; BLOCK]; BLOCK];
        for k in 0..BLOCK {
            for l in 0..BLOCK {
                let bl = &self.basis[l];
                let mut acc = 0.0;
                for n in 0..BLOCK {
                    acc += tmp[k][n] * bl[n];
                }
                out[k][l] = acc;
            }
        }
        out[0][0] = sum / BLOCK as f64;
        out
    }

    pub fn inverse(&self, coeffs: &Block) -> Block {
        let mut tmp = [[0.0; BLOCK]; BLOCK];
        for m in 0..BLOCK {
            for l in 0..BLOCK {
                let mut acc = 0.0;
                for k in 0..BLOCK {
                    acc += self.basis[k][m] * coeffs[k][l];
                }
                tmp[m][l] = acc;
            }
        }
        let mut out = [[0.0; BLOCK]; BLOCK];
        for m in 0..BLOCK {
            for n in 0..BLOCK {
                let mut acc = 0.0;
                for l in 0..BLOCK {
                    acc += tmp[m][l] * self.basis[l][n];
                }
                out[m][n] = acc;
            }
        }
        out
    }
}

/// DC term plus the 63 AC terms in zigzag order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZigzagVector {
    pub dc: f64,
    pub ac: [f64; COEFFS - 1],
}

pub fn zigzag(block: &Block) -> ZigzagVector {
    let at = |pos: usize| block[pos / BLOCK][pos % BLOCK];
    let mut ac = [0.0; COEFFS - 1];
    for (i, a) in ac.iter_mut().enumerate() {
        *a = at(ZIGZAG[i + 1]);
    }
    ZigzagVector { dc: at(0), ac }
}

pub fn inverse_zigzag(v: &ZigzagVector) -> Block {
    let mut block = [[0.0; BLOCK]; BLOCK];
    block[0][0] = v.dc;
    for (i, &a) in v.ac.iter().enumerate() {
        let pos = ZIGZAG[i + 1];
        block[pos / BLOCK][pos % BLOCK] = a;
    }
    block
}

/// Per-block transform coefficients of one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBlockGrid {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Row-major over blocks.
    pub blocks: Vec<Block>,
}

impl DctBlockGrid {
    /// Transforms every complete 8×8 block; partial blocks at the right and
    /// bottom edges are ignored.
    pub fn compute(plane: &Plane, dct: &Dct8) -> Self {
        let grid_rows = plane.height() / BLOCK;
        let grid_cols = plane.width() / BLOCK;
        let mut blocks = Vec::with_capacity(grid_rows * grid_cols);
        for br in 0..grid_rows {
            for bc in 0..grid_cols {
                blocks.push(dct.forward(&read_block(plane, br * BLOCK, bc * BLOCK)));
            }
        }
        Self {
            grid_rows,
            grid_cols,
            blocks,
        }
    }

    pub fn block(&self, row: usize, col: usize) -> &Block {
        &self.blocks[row * self.grid_cols + col]
    }

    /// Rearranges into 64 spatial maps, one per zigzag position (map 0 is DC).
    pub fn coefficient_maps(&self) -> CoefficientMaps {
        let cells = self.grid_rows * self.grid_cols;
        let mut data = alloc::vec![0.0; COEFFS * cells];
        for (cell, block) in self.blocks.iter().enumerate() {
            for (z, &pos) in ZIGZAG.iter().enumerate() {
                data[z * cells + cell] = block[pos / BLOCK][pos % BLOCK];
            }
        }
        CoefficientMaps {
            n_maps: COEFFS,
            rows: self.grid_rows,
            cols: self.grid_cols,
            data,
        }
    }
}

pub fn read_block(plane: &Plane, top: usize, left: usize) -> Block {
    let mut block = [[0.0; BLOCK]; BLOCK];
    for (r, row) in block.iter_mut().enumerate() {
        row.copy_from_slice(&plane.row(top + r)[left..left + BLOCK]);
    }
    block
}

/// A stack of equally sized 2-D maps stored map-major, then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMaps {
    pub n_maps: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl CoefficientMaps {
    pub fn map(&self, index: usize) -> &[f64] {
        let cells = self.rows * self.cols;
        &self.data[index * cells..(index + 1) * cells]
    }
}
