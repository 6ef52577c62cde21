//! Finite-difference stencils.
//!
//! Spatial derivatives are fourth order: centred in the bulk and one-sided
//! within two points of an edge. Time derivatives on windows are second
//! order centred.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid3;

// First derivative, rows for offsets from the edge 0 and 1 (times 12 h).
const D1_EDGE: [[f64; 5]; 2] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
];
// Second derivative, rows for offsets 0 and 1 (times 12 h^2).
const D2_EDGE: [[f64; 6]; 2] = [
    [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
    [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
];

/// Fourth-order first derivative at index `i` of a line of `n` samples.
#[inline]
pub fn d1_line(f: impl Fn(usize) -> f64, i: usize, n: usize, h: f64) -> f64 {
    let inv = 1.0 / (12.0 * h);
    if i >= 2 && i + 2 < n {
        (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) * inv
    } else if i < 2 {
        let c = &D1_EDGE[i];
        (0..5).map(|k| c[k] * f(k)).sum::<f64>() * inv
    } else {
        let e = n - 1 - i;
        let c = &D1_EDGE[e];
        -(0..5).map(|k| c[k] * f(n - 1 - k)).sum::<f64>() * inv
    }
}

/// Fourth-order second derivative at index `i` of a line of `n` samples.
#[inline]
pub fn d2_line(f: impl Fn(usize) -> f64, i: usize, n: usize, h: f64) -> f64 {
    let inv = 1.0 / (12.0 * h * h);
    if i >= 2 && i + 2 < n {
        (-f(i - 2) + 16.0 * f(i - 1) - 30.0 * f(i) + 16.0 * f(i + 1) - f(i + 2)) * inv
    } else if i < 2 {
        let c = &D2_EDGE[i];
        (0..6).map(|k| c[k] * f(k)).sum::<f64>() * inv
    } else {
        let e = n - 1 - i;
        let c = &D2_EDGE[e];
        (0..6).map(|k| c[k] * f(n - 1 - k)).sum::<f64>() * inv
    }
}

/// Weights of a one-dimensional stencil starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub start: usize,
    pub len: usize,
    pub w: [f64; 6],
}

impl Stencil {
    #[inline]
    pub fn apply(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.len).map(|k| self.w[k] * f(self.start + k)).sum()
    }
}

/// First-derivative weights at index `i` of a line of `n` samples.
pub fn d1_stencil(i: usize, n: usize, h: f64) -> Stencil {
    let inv = 1.0 / (12.0 * h);
    let mut w = [0.0; 6];
    if i >= 2 && i + 2 < n {
        for (k, c) in [1.0, -8.0, 0.0, 8.0, -1.0].iter().enumerate() {
            w[k] = c * inv;
        }
        Stencil {
            start: i - 2,
            len: 5,
            w,
        }
    } else if i < 2 {
        for k in 0..5 {
            w[k] = D1_EDGE[i][k] * inv;
        }
        Stencil {
            start: 0,
            len: 5,
            w,
        }
    } else {
        let e = n - 1 - i;
        for k in 0..5 {
            w[4 - k] = -D1_EDGE[e][k] * inv;
        }
        Stencil {
            start: n - 5,
            len: 5,
            w,
        }
    }
}

/// Minimum points per axis for the one-sided stencils.
pub const MIN_POINTS: usize = 6;

pub fn check_grid(grid: &Grid3) -> Result<()> {
    if grid.n.iter().any(|&n| n < MIN_POINTS) {
        return Err(Error::WindowTooSmall("need at least 6 points per axis"));
    }
    Ok(())
}

/// Derivative of `f` along `axis` at the flat index `q`.
#[inline]
pub fn d1_at(grid: &Grid3, f: &[f64], axis: usize, q: usize) -> f64 {
    let ijk = grid.ijk(q);
    let i = ijk[axis];
    let st = grid.stride(axis);
    let base = q - i * st;
    d1_line(|m| f[base + m * st], i, grid.n[axis], grid.dx)
}

#[inline]
pub fn d2_at(grid: &Grid3, f: &[f64], axis: usize, q: usize) -> f64 {
    let ijk = grid.ijk(q);
    let i = ijk[axis];
    let st = grid.stride(axis);
    let base = q - i * st;
    d2_line(|m| f[base + m * st], i, grid.n[axis], grid.dx)
}

/// Whole-field first derivative along `axis`.
pub fn d1(grid: &Grid3, f: &[f64], axis: usize) -> Vec<f64> {
    (0..grid.len()).map(|q| d1_at(grid, f, axis, q)).collect()
}

/// Whole-field second derivative along `axis`.
pub fn d2(grid: &Grid3, f: &[f64], axis: usize) -> Vec<f64> {
    (0..grid.len()).map(|q| d2_at(grid, f, axis, q)).collect()
}

/// Whole-field mixed derivative `d_a d_b f` (`a != b`) by composition.
pub fn d11(grid: &Grid3, f: &[f64], a: usize, b: usize) -> Vec<f64> {
    let fb = d1(grid, f, b);
    d1(grid, &fb, a)
}

/// Spatial gradient of a field.
pub fn gradient(grid: &Grid3, f: &[f64]) -> [Vec<f64>; 3] {
    [d1(grid, f, 0), d1(grid, f, 1), d1(grid, f, 2)]
}

/// Centred first time derivative at level `l` of a window.
#[inline]
pub fn dt1(levels: &[Vec<f64>], l: usize, q: usize, dt: f64) -> f64 {
    (levels[l + 1][q] - levels[l - 1][q]) / (2.0 * dt)
}

/// Centred second time derivative at level `l` of a window.
#[inline]
pub fn dt2(levels: &[Vec<f64>], l: usize, q: usize, dt: f64) -> f64 {
    (levels[l + 1][q] - 2.0 * levels[l][q] + levels[l - 1][q]) / (dt * dt)
}

/// Interior (centred) stencils for ghost-padded arrays.
pub mod centered {
    #[inline]
    pub fn d1(f: &[f64], p: usize, s: usize, inv12h: f64) -> f64 {
        (f[p - 2 * s] - 8.0 * f[p - s] + 8.0 * f[p + s] - f[p + 2 * s]) * inv12h
    }

    #[inline]
    pub fn d2(f: &[f64], p: usize, s: usize, inv12h2: f64) -> f64 {
        (-f[p - 2 * s] + 16.0 * f[p - s] - 30.0 * f[p] + 16.0 * f[p + s] - f[p + 2 * s]) * inv12h2
    }

    /// Mixed derivative as the tensor product of two first derivatives.
    #[inline]
    pub fn d11(f: &[f64], p: usize, sa: usize, sb: usize, inv12h: f64) -> f64 {
        let row = |c: usize| f[c - 2 * sb] - 8.0 * f[c - sb] + 8.0 * f[c + sb] - f[c + 2 * sb];
        (row(p - 2 * sa) - 8.0 * row(p - sa) + 8.0 * row(p + sa) - row(p + 2 * sa))
            * inv12h
            * inv12h
    }

    /// Sixth difference `(D+ D-)^3 h^6` used for Kreiss-Oliger dissipation.
    #[inline]
    pub fn diff6(f: &[f64], p: usize, s: usize) -> f64 {
        f[p - 3 * s] - 6.0 * f[p - 2 * s] + 15.0 * f[p - s] - 20.0 * f[p] + 15.0 * f[p + s]
            - 6.0 * f[p + 2 * s]
            + f[p + 3 * s]
    }
}

/// Laplacian of an interior field with one-sided edges (diagnostics only).
pub fn laplacian(grid: &Grid3, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for a in 0..3 {
        for (o, v) in out.iter_mut().zip(d2(grid, f, a)) {
            *o += v;
        }
    }
    out
}
