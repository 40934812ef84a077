//! Square and cubic cell grids over a centered physical domain.
//!
//! A [`Grid2D`] with `n` cells per side and half-width `L` covers
//! `[-L, L]²`. Cell `(i, j)` is stored row-major at `data[i * n + j]`; the row
//! index `i` runs along `x₂` and the column index `j` along `x₁`, so the
//! center of cell `(i, j)` sits at
//!
//! ```text
//! x₁ = -L + (j + ½)·Δx,   x₂ = -L + (i + ½)·Δx,   Δx = 2L / n.
//! ```
//!
//! Side lengths are restricted to powers of two because the digital-line
//! recursion halves them at every level; [`Grid2D::pad_to_power_of_two`] embeds
//! other sizes.

use crate::error::{invalid, Error, Result};

pub(crate) fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Validation(format!(
            "grid size {n} is not a power of two"
        )));
    }
    Ok(())
}

fn check_half_width(half_width: f64) -> Result<()> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::Validation(format!(
            "half-width must be positive and finite, got {half_width}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    n: usize,
    half_width: f64,
    data: Vec<f64>,
}

impl Grid2D {
    pub fn new(n: usize, half_width: f64, data: Vec<f64>) -> Result<Self> {
        check_power_of_two(n)?;
        check_half_width(half_width)?;
        if data.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} samples for n={n}, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self {
            n,
            half_width,
            data,
        })
    }

    pub fn zeros(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, half_width, vec![0.0; n * n])
    }

    /// Samples `f(x₁, x₂)` at every cell center.
    pub fn from_fn(n: usize, half_width: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_power_of_two(n)?;
        check_half_width(half_width)?;
        let dx = 2.0 * half_width / n as f64;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            let x2 = -half_width + (i as f64 + 0.5) * dx;
            for j in 0..n {
                let x1 = -half_width + (j as f64 + 0.5) * dx;
                data.push(f(x1, x2));
            }
        }
        Ok(Self {
            n,
            half_width,
            data,
        })
    }

    /// Builds a grid from rows given top-to-bottom in storage order (`rows[i][j]`).
    pub fn from_rows(rows: &[Vec<f64>], half_width: f64) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Validation(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::new(n, half_width, rows.concat())
    }

    /// Zero-pads an `m × m` row-major array to the next power of two, keeping
    /// the cell width and centering the original block.
    pub fn pad_to_power_of_two(m: usize, cell_width: f64, values: &[f64]) -> Result<Self> {
        if m == 0 || values.len() != m * m {
            return Err(invalid(format!(
                "expected {} values for a {m}×{m} array, got {}",
                m * m,
                values.len()
            )));
        }
        let n = m.next_power_of_two();
        let off = (n - m) / 2;
        let mut data = vec![0.0; n * n];
        for i in 0..m {
            data[(i + off) * n + off..(i + off) * n + off + m]
                .copy_from_slice(&values[i * m..(i + 1) * m]);
        }
        Self::new(n, 0.5 * cell_width * n as f64, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Physical coordinate of the center of cell index `k` along either axis.
    pub fn center(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.cell_width()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &Grid2D) -> f64 {
        dot(&self.data, &other.data)
    }

    /// Same shape and domain, new samples.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.n, self.half_width, data)
    }

    pub fn same_shape(&self, other: &Grid2D) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }

    /// Grid rotated by 90° counter-clockwise about the domain center.
    pub fn rotate90(&self) -> Grid2D {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        // (x₁, x₂) -> (-x₂, x₁)
        for i in 0..n {
            for j in 0..n {
                data[j * n + (n - 1 - i)] = self.data[i * n + j];
            }
        }
        Grid2D {
            n,
            half_width: self.half_width,
            data,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_factor(factor: usize) -> Result<()> {
    if factor == 0 || !factor.is_multiple_of(2) {
        return Err(invalid(format!(
            "factor must be a positive even integer, got {factor}"
        )));
    }
    Ok(())
}

/// Zeroth-order prolongation: every cell becomes a `factor × factor` block of
/// the same value.
pub fn prolong(g: &Grid2D, factor: usize) -> Result<Grid2D> {
    check_factor(factor)?;
    let n = g.n;
    let m = n * factor;
    let mut data = vec![0.0; m * m];
    for i in 0..n {
        let src = &g.data[i * n..(i + 1) * n];
        let row0 = i * factor * m;
        {
            let dst = &mut data[row0..row0 + m];
            for (j, &v) in src.iter().enumerate() {
                dst[j * factor..(j + 1) * factor].fill(v);
            }
        }
        for r in 1..factor {
            data.copy_within(row0..row0 + m, row0 + r * m);
        }
    }
    Grid2D::new(m, g.half_width, data)
}

/// Block-mean restriction, the left inverse of [`prolong`].
pub fn restrict(g: &Grid2D, factor: usize) -> Result<Grid2D> {
    check_factor(factor)?;
    let m = g.n;
    if !m.is_multiple_of(factor) {
        return Err(invalid(format!(
            "grid size {m} is not divisible by factor {factor}"
        )));
    }
    let n = m / factor;
    if n == 0 {
        return Err(invalid("restriction would produce an empty grid"));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..m {
        let row = &g.data[i * m..(i + 1) * m];
        let out = &mut data[(i / factor) * n..(i / factor + 1) * n];
        for (j, chunk) in row.chunks_exact(factor).enumerate() {
            out[j] += chunk.iter().sum::<f64>();
        }
    }
    let scale = 1.0 / (factor * factor) as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    Grid2D::new(n, g.half_width, data)
}

/// Cubic grid over `[-L, L]³`, stored with index `(i, j, k)` at
/// `data[(i * n + j) * n + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3D {
    n: usize,
    half_width: f64,
    data: Vec<f64>,
}

impl Grid3D {
    pub fn new(n: usize, half_width: f64, data: Vec<f64>) -> Result<Self> {
        check_power_of_two(n)?;
        check_half_width(half_width)?;
        if data.len() != n * n * n {
            return Err(Error::Validation(format!(
                "expected {} samples for n={n}, got {}",
                n * n * n,
                data.len()
            )));
        }
        Ok(Self {
            n,
            half_width,
            data,
        })
    }

    pub fn zeros(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, half_width, vec![0.0; n * n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = v;
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn dot(&self, other: &Grid3D) -> f64 {
        dot(&self.data, &other.data)
    }
}
