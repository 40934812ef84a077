//! Fast 2D discrete Radon transform over digital lines.
//!
//! A digital line `D_n(h, s)` picks exactly one cell per column: it starts in
//! row `h` at column 0 and climbs `s` rows over the `n` columns along a
//! staircase defined by halving. Summing a grid over all lines of slope
//! `0 ≤ s < n` covers one quarter of the directions; the other three quarters
//! come from the same sweep applied to a transposed or flipped copy of the
//! grid:
//!
//! | quadrant | summed array `A'(i, j)` | line direction angle |
//! |----------|-------------------------|----------------------|
//! | a        | `A(i, j)`               | `θ`                  |
//! | b        | `A(j, i)`               | `π/2 − θ`            |
//! | c        | `A(j, n−1−i)`           | `π/2 + θ`            |
//! | d        | `A(n−1−i, j)`           | `π − θ`              |
//!
//! with `θ = arctan(s / (n−1))` and angles measured from the `x₁` axis (grid
//! columns). The direction angles of the four quadrants tile `[0, π]`.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::grid::{check_power_of_two, Grid2D};
use crate::sinogram::{Quadrant, Quadrant2D, Sinogram2D};
use crate::sweep;

/// The cells of one digital line, in column order. Cells outside the grid
/// are omitted, so there are at most `n` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DLine {
    pub n: usize,
    pub h: i64,
    pub s: usize,
    pub cells: Vec<(usize, usize)>,
}

/// Row offset of the line of slope `s` at every column, from the halving
/// recursion applied literally.
fn line_offsets(n: usize, s: usize) -> Vec<i64> {
    if n == 1 {
        return vec![0];
    }
    let half = n / 2;
    let (sigma, odd) = (s / 2, s % 2);
    let left = line_offsets(half, sigma);
    let lift = (sigma + odd) as i64;
    let right = left.iter().map(|o| o + lift);
    left.iter().copied().chain(right).collect()
}

/// Enumerates the cells of `D_n(h, s)` by unrolling the recursion. Intended
/// as a reference for testing the fast sweep.
pub fn dline_cells(n: usize, h: i64, s: usize) -> Result<DLine> {
    check_power_of_two(n)?;
    if s >= n {
        return Err(invalid(format!("slope {s} out of range 0..{n}")));
    }
    let cells = line_offsets(n, s)
        .into_iter()
        .enumerate()
        .filter_map(|(j, off)| {
            let row = h + off;
            (row >= 0 && (row as usize) < n).then_some((row as usize, j))
        })
        .collect();
    Ok(DLine { n, h, s, cells })
}

const TILE: usize = 32;

/// `out[j * n + i] = a[row(i) * n + j]`, tiled so both sides stay in cache.
fn transpose_rows(a: &[f64], n: usize, row: impl Fn(usize) -> usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i0 in (0..n).step_by(TILE) {
        for j0 in (0..n).step_by(TILE) {
            for i in i0..(i0 + TILE).min(n) {
                let src = &a[row(i) * n..][..n];
                for j in j0..(j0 + TILE).min(n) {
                    out[j * n + i] = src[j];
                }
            }
        }
    }
    out
}

/// Column-major copy of the array summed by quadrant `q`.
fn oriented_columns(g: &Grid2D, q: Quadrant) -> Vec<f64> {
    let n = g.n();
    let a = g.data();
    match q {
        Quadrant::A => transpose_rows(a, n, |i| i),
        Quadrant::B => a.to_vec(),
        Quadrant::C => {
            let mut col = vec![0.0; n * n];
            for j in 0..n {
                for i in 0..n {
                    col[j * n + i] = a[j * n + n - 1 - i];
                }
            }
            col
        }
        Quadrant::D => transpose_rows(a, n, |i| n - 1 - i),
    }
}

/// Transpose of [`oriented_columns`]: scatters a column-major array back onto
/// the grid layout.
fn unorient_columns(col: &[f64], n: usize, q: Quadrant) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    match q {
        Quadrant::A => {
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = col[j * n + i];
                }
            }
        }
        Quadrant::B => a.copy_from_slice(col),
        Quadrant::C => {
            for j in 0..n {
                for i in 0..n {
                    a[j * n + n - 1 - i] = col[j * n + i];
                }
            }
        }
        Quadrant::D => {
            for i in 0..n {
                for j in 0..n {
                    a[(n - 1 - i) * n + j] = col[j * n + i];
                }
            }
        }
    }
    a
}

fn quadrant_of(g: &Grid2D, q: Quadrant) -> Quadrant2D {
    let n = g.n();
    let data = sweep::forward(&oriented_columns(g, q), n, n);
    Quadrant2D::from_slope_major(n, q, data).expect("sweep output has quadrant shape")
}

/// Sums of `g` over every digital line `D_n(h, s)`, in `O(n² log n)`.
pub fn drt_quadrant(g: &Grid2D) -> Quadrant2D {
    quadrant_of(g, Quadrant::A)
}

/// All four quadrants.
pub fn drt_forward(g: &Grid2D) -> Sinogram2D {
    let quads: Vec<Quadrant2D> = Quadrant::ALL
        .par_iter()
        .map(|&q| quadrant_of(g, q))
        .collect();
    let quads: [Quadrant2D; 4] = quads.try_into().expect("four quadrants");
    Sinogram2D::new(quads).expect("consistent quadrants")
}

/// Unscaled adjoint of [`drt_forward`]: every cell receives the sum of the
/// values of all lines through it.
pub fn drt_adjoint(sino: &Sinogram2D, half_width: f64) -> Result<Grid2D> {
    let n = sino.n();
    let parts: Vec<Vec<f64>> = sino
        .quadrants()
        .par_iter()
        .map(|q| {
            let col = sweep::adjoint(q.data(), n, n);
            unorient_columns(&col, n, q.label())
        })
        .collect();
    let mut out = vec![0.0; n * n];
    for p in &parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Grid2D::new(n, half_width, out)
}

/// Back-projection `B = Rᵀ / (4n²)`, so that `⟨R g, y⟩ = 4n² ⟨g, B y⟩`.
pub fn backproject(sino: &Sinogram2D, half_width: f64) -> Result<Grid2D> {
    let n = sino.n();
    let mut g = drt_adjoint(sino, half_width)?;
    let scale = 1.0 / (4 * n * n) as f64;
    g.data_mut().iter_mut().for_each(|v| *v *= scale);
    Ok(g)
}

/// Angle of slope `s` within a quadrant, `arctan(s / (n − 1))`.
pub fn slope_angle(s: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (s as f64 / (n - 1) as f64).atan()
    }
}

/// Geometry of the family of lines with slope `s` in one quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceDirection {
    /// Angle of the line direction from the `x₁` axis, in `[0, π]`.
    pub angle: f64,
    /// `θ = arctan(s / (n−1)) ∈ [0, π/4]`.
    pub theta: f64,
    /// Unit normal pointing towards increasing height `h`.
    pub normal: [f64; 2],
}

/// Unit normal of the lines `(q, s)`, oriented so that moving to height
/// `h + 1` displaces the line by `Δx · cos θ` along the normal.
pub fn quadrant_normal(q: Quadrant, s: usize, n: usize) -> SliceDirection {
    use std::f64::consts::{FRAC_PI_2, PI};
    let theta = slope_angle(s, n);
    let (sin, cos) = theta.sin_cos();
    let (angle, normal) = match q {
        Quadrant::A => (theta, [-sin, cos]),
        Quadrant::B => (FRAC_PI_2 - theta, [cos, -sin]),
        Quadrant::C => (FRAC_PI_2 + theta, [-cos, -sin]),
        Quadrant::D => (PI - theta, [-sin, -cos]),
    };
    SliceDirection {
        angle,
        theta,
        normal,
    }
}

/// Maps a line `(h, s)` to a normalized offset `s_c` and angle `θ`:
///
/// ```text
/// s_c = cos θ · (2h/n − 1 + s/(n−1)),   θ = arctan(s/(n−1))
/// ```
pub fn to_continuous(h: i64, s: usize, n: usize) -> (f64, f64) {
    let theta = slope_angle(s, n);
    let tilt = if n > 1 {
        s as f64 / (n - 1) as f64
    } else {
        0.0
    };
    let sc = theta.cos() * (2.0 * h as f64 / n as f64 - 1.0 + tilt);
    (sc, theta)
}

/// Converts a line sum into an estimate of the line integral `∫ f dm` over a
/// domain of half-width `half_width`: one cell per column means the line
/// spends `Δx / cos θ` of length in each cell.
pub fn continuous_value(value: f64, s: usize, n: usize, half_width: f64) -> f64 {
    let density = n as f64 / (2.0 * half_width);
    value / (slope_angle(s, n).cos() * density)
}
