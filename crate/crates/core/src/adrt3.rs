//! 3D discrete Radon transform over digital planes.
//!
//! A d-plane `D_n(h, s₁, s₂)` holds one cell per `(j, k)` column, at row
//! `i = h + off(s₁, j) + off(s₂, k)` where `off` is the row offset of the 2D
//! digital line. Heights run over `[−2(n−1), n−1]`, giving `3n − 2` rows.
//!
//! The sixteen hexadecants are labelled by pairs `XY` of 2D quadrant labels.
//! Hexadecant `XY` sums the array obtained from `A` by first applying the 2D
//! quadrant map `Y` to the `(i, k)` axes and then `X` to the `(i, j)` axes:
//!
//! ```text
//! a: M(i, j)   b: M(j, i)   c: M(j, n−1−i)   d: M(n−1−i, j)
//! ```
//!
//! The plane sums are computed as two passes of the 2D sweep, first along `j`
//! and then along `k`.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::grid::{check_power_of_two, Grid3D};
use crate::sinogram::{Hexadecant, Hexadecant3D, Quadrant, Sinogram3D};
use crate::sweep;

fn plane_offsets(n: usize, s1: usize, s2: usize) -> Vec<i64> {
    if n == 1 {
        return vec![0];
    }
    let half = n / 2;
    let sub = plane_offsets(half, s1 / 2, s2 / 2);
    let lift1 = (s1 / 2 + s1 % 2) as i64;
    let lift2 = (s2 / 2 + s2 % 2) as i64;
    // LL, RL, LR, RR blocks of the (j, k) index square.
    let mut out = vec![0; n * n];
    for (bj, bk) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let lift = bj as i64 * lift1 + bk as i64 * lift2;
        for j in 0..half {
            for k in 0..half {
                out[(bj * half + j) * n + bk * half + k] = sub[j * half + k] + lift;
            }
        }
    }
    out
}

/// Cells `(i, j, k)` of the d-plane `D_n(h, s₁, s₂)` inside the grid,
/// ordered by `(j, k)`.
pub fn dplane_cells(n: usize, h: i64, s1: usize, s2: usize) -> Result<Vec<(usize, usize, usize)>> {
    check_power_of_two(n)?;
    if s1 >= n || s2 >= n {
        return Err(invalid(format!("slopes ({s1}, {s2}) out of range 0..{n}")));
    }
    let offs = plane_offsets(n, s1, s2);
    let mut cells = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let i = h + offs[j * n + k];
            if i >= 0 && (i as usize) < n {
                cells.push((i as usize, j, k));
            }
        }
    }
    Ok(cells)
}

fn quadrant_map(q: Quadrant, a: usize, b: usize, n: usize) -> (usize, usize) {
    match q {
        Quadrant::A => (a, b),
        Quadrant::B => (b, a),
        Quadrant::C => (b, n - 1 - a),
        Quadrant::D => (n - 1 - a, b),
    }
}

/// For every `(k, j, i)` in sweep order, the flat index of the source cell
/// in the grid.
fn source_indices(label: Hexadecant, n: usize) -> Vec<usize> {
    let Hexadecant(x, y) = label;
    let mut idx = vec![0; n * n * n];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let (i1, j1) = quadrant_map(x, i, j, n);
                let (i2, k2) = quadrant_map(y, i1, k, n);
                idx[(k * n + j) * n + i] = (i2 * n + j1) * n + k2;
            }
        }
    }
    idx
}

fn hexadecant_of(g: &Grid3D, label: Hexadecant) -> Hexadecant3D {
    let n = g.n();
    let src = g.data();
    let r1 = 2 * n - 1;
    let r2 = 3 * n - 2;
    let gathered: Vec<f64> = source_indices(label, n)
        .into_iter()
        .map(|s| src[s])
        .collect();

    // Pass 1: per depth k, sum along j. Result t1[k][s1][r1].
    let t1: Vec<Vec<f64>> = gathered
        .chunks(n * n)
        .map(|slab| sweep::forward(slab, n, n))
        .collect();

    // Pass 2: per s1, sum along k.
    let mut data = Vec::with_capacity(n * n * r2);
    let mut col = vec![0.0; n * r1];
    for s1 in 0..n {
        for (k, t) in t1.iter().enumerate() {
            col[k * r1..(k + 1) * r1].copy_from_slice(&t[s1 * r1..(s1 + 1) * r1]);
        }
        data.extend(sweep::forward(&col, r1, n));
    }
    Hexadecant3D::from_slope_major(n, label, data).expect("sweep output has hexadecant shape")
}

/// Plane sums over all sixteen hexadecants, in `O(n³ log n)`.
pub fn drt3_forward(g: &Grid3D) -> Sinogram3D {
    let hexes: Vec<Hexadecant3D> = Hexadecant::all()
        .par_iter()
        .map(|&label| hexadecant_of(g, label))
        .collect();
    Sinogram3D::new(hexes).expect("consistent hexadecants")
}

fn hexadecant_adjoint(hex: &Hexadecant3D, out: &mut [f64]) {
    let n = hex.n();
    let r1 = 2 * n - 1;
    let r2 = 3 * n - 2;
    let mut t1 = vec![vec![0.0; n * r1]; n];
    for s1 in 0..n {
        let col = sweep::adjoint(&hex.data()[s1 * n * r2..(s1 + 1) * n * r2], r1, n);
        for (k, t) in t1.iter_mut().enumerate() {
            t[s1 * r1..(s1 + 1) * r1].copy_from_slice(&col[k * r1..(k + 1) * r1]);
        }
    }
    let idx = source_indices(hex.label(), n);
    for (k, t) in t1.iter().enumerate() {
        let slab = sweep::adjoint(t, n, n);
        for (p, v) in slab.iter().enumerate() {
            out[idx[k * n * n + p]] += v;
        }
    }
}

/// Unscaled adjoint of [`drt3_forward`].
pub fn drt3_adjoint(sino: &Sinogram3D, half_width: f64) -> Result<Grid3D> {
    let n = sino.n();
    let parts: Vec<Vec<f64>> = sino
        .hexadecants()
        .par_iter()
        .map(|h| {
            let mut out = vec![0.0; n * n * n];
            hexadecant_adjoint(h, &mut out);
            out
        })
        .collect();
    let mut out = vec![0.0; n * n * n];
    for p in &parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Grid3D::new(n, half_width, out)
}

/// Back-projection `B = Rᵀ / (16 n³)`, so that `⟨R g, y⟩ = 16 n³ ⟨g, B y⟩`.
pub fn backproject3(sino: &Sinogram3D, half_width: f64) -> Result<Grid3D> {
    let n = sino.n();
    let mut g = drt3_adjoint(sino, half_width)?;
    let scale = 1.0 / (16 * n * n * n) as f64;
    g.data_mut().iter_mut().for_each(|v| *v *= scale);
    Ok(g)
}
