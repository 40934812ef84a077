use std::collections::HashMap;
use std::ops::Range;

use super::fit::{cross_correlation, parabola_offset, shift, shifted_energy};
use super::{Component, SliceDecomposition};
use crate::error::{invalid, Error, Result};
use crate::grid::dot;
use crate::invert::cg_solve;

/// Cells below this fraction of `max|φ₁|` belong to no feature.
const SUPPORT_FRACTION: f64 = 1e-3;
/// Threshold, relative to the maximum, that locates the ends of a profile.
const EDGE_FRACTION: f64 = 0.05;
/// Half-width of the integer search around the edge-based shift guesses.
const PAIR_WINDOW: i64 = 3;
/// Ridge added to the paired normal equations.
const RIDGE: f64 = 1e-8;

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Decomposes `φ₂` into scaled, shifted pieces of `φ₁`.
///
/// A greedy pass repeatedly matches the residual against each connected
/// feature of `φ₁` by cross-correlation, with the best scale found by least
/// squares, until `‖r‖ ≤ tol·‖φ₂‖` or `k_max` pieces are taken. Pieces cut
/// from the same feature share it: each gets the fraction `|c_k| / Σ|c_j|`
/// of the feature and the common end scale `Σ|c_j|`.
///
/// When that leaves too much unexplained and `k_max ≥ 2`, a second pass
/// splits `φ₁` into one right-moving and one left-moving part,
/// `φ₂ ≈ a[g(· − ν₊) + (φ₁ − g)(· − ν₋)]`, which separates overlapping pulses
/// that the greedy pass cannot. It is kept if its residual is smaller.
pub fn transport_reversal(
    phi1: &[f64],
    phi2: &[f64],
    k_max: usize,
    tol: f64,
) -> Result<SliceDecomposition> {
    if phi1.len() != phi2.len() {
        return Err(invalid(format!(
            "length mismatch: {} vs {}",
            phi1.len(),
            phi2.len()
        )));
    }
    if k_max == 0 {
        return Err(invalid("k_max must be at least 1"));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(invalid(format!("tol must be non-negative, got {tol}")));
    }
    if phi1.iter().chain(phi2).any(|x| !x.is_finite()) {
        return Err(invalid("profiles contain non-finite values"));
    }
    if phi1.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateInput(
            "source profile is identically zero".into(),
        ));
    }
    let mut best = greedy(phi1, phi2, k_max, tol);
    if k_max >= 2 && best.residual_norm() > tol * norm(phi2) {
        if let Some(p) = paired(phi1, phi2) {
            if p.residual_norm() < best.residual_norm() {
                best = p;
            }
        }
    }
    Ok(best)
}

fn features(phi1: &[f64]) -> Vec<Range<usize>> {
    let thr = SUPPORT_FRACTION * max_abs(phi1);
    let mut out = Vec::new();
    let mut start = None;
    for (k, x) in phi1.iter().enumerate() {
        match (x.abs() > thr, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push(s..k);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..phi1.len());
    }
    out
}

fn greedy(phi1: &[f64], phi2: &[f64], k_max: usize, tol: f64) -> SliceDecomposition {
    let len = phi1.len() as i64;
    let feats = features(phi1);
    let templates: Vec<Vec<f64>> = feats
        .iter()
        .map(|r| {
            (0..phi1.len())
                .map(|k| if r.contains(&k) { phi1[k] } else { 0.0 })
                .collect()
        })
        .collect();
    let energies: Vec<Vec<f64>> = templates.iter().map(|t| shifted_energy(t)).collect();
    let target = tol * norm(phi2);
    let mut r = phi2.to_vec();
    // (feature, shift, coefficient)
    let mut picks: Vec<(usize, f64, f64)> = Vec::new();
    for _ in 0..k_max {
        let mut best = (0usize, 0i64, -1.0f64);
        for (fi, t) in templates.iter().enumerate() {
            let corr = cross_correlation(&r, t);
            let en = &energies[fi];
            let floor = 1e-14 * en[(len - 1) as usize];
            for mag in 0..len {
                for d in if mag == 0 { vec![0] } else { vec![-mag, mag] } {
                    let idx = (d + len - 1) as usize;
                    if en[idx] <= floor {
                        continue;
                    }
                    let gain = corr[idx] * corr[idx] / en[idx];
                    if gain > best.2 * (1.0 + 1e-12) {
                        best = (fi, d, gain);
                    }
                }
            }
        }
        let (fi, d, _) = best;
        let t = &templates[fi];
        let gain_at = |s: f64| {
            let m = shift(t, s);
            let e = dot(&m, &m);
            if e > 0.0 {
                dot(&r, &m).powi(2) / e
            } else {
                0.0
            }
        };
        let df = d as f64;
        let off = if d.abs() < len - 1 {
            parabola_offset(-gain_at(df - 1.0), -gain_at(df), -gain_at(df + 1.0))
        } else {
            0.0
        };
        let nu = df + off;
        let moved = shift(t, nu);
        let e = dot(&moved, &moved);
        let c = if e > 0.0 { dot(&r, &moved) / e } else { 0.0 };
        for (x, m) in r.iter_mut().zip(&moved) {
            *x -= c * m;
        }
        picks.push((fi, nu, c));
        if norm(&r) <= target {
            break;
        }
    }
    let components = picks
        .iter()
        .map(|&(fi, nu, c)| {
            let group: Vec<f64> = picks.iter().filter(|p| p.0 == fi).map(|p| p.2).collect();
            let total: f64 = group.iter().map(|x| x.abs()).sum();
            let (share, a) = if total > 0.0 {
                (c.abs() / total, c.signum() * total)
            } else {
                (1.0 / group.len() as f64, 0.0)
            };
            let range = &feats[fi];
            let mask = (0..phi1.len())
                .map(|k| if range.contains(&k) { share } else { 0.0 })
                .collect();
            Component { nu, a, mask }
        })
        .collect();
    SliceDecomposition::from_components(phi1, phi2, components)
}

fn edges(v: &[f64]) -> Option<(i64, i64)> {
    let thr = EDGE_FRACTION * max_abs(v);
    if thr == 0.0 {
        return None;
    }
    let first = v.iter().position(|x| x.abs() > thr)?;
    let last = v.iter().rposition(|x| x.abs() > thr)?;
    Some((first as i64, last as i64))
}

struct Paired<'a> {
    phi1: &'a [f64],
    phi2: &'a [f64],
    a: f64,
    free: Vec<bool>,
}

impl Paired<'_> {
    /// `φ₂/a − S(m)φ₁`, the data the split part `g` has to explain.
    fn data(&self, m: f64) -> Vec<f64> {
        let sm = shift(self.phi1, m);
        self.phi2
            .iter()
            .zip(&sm)
            .map(|(y, s)| y / self.a - s)
            .collect()
    }

    fn misfit(&self, g: &[f64], p: f64, m: f64) -> f64 {
        let rest: Vec<f64> = self.phi1.iter().zip(g).map(|(f, g)| f - g).collect();
        let (sp, sm) = (shift(g, p), shift(&rest, m));
        (0..g.len())
            .map(|k| (self.a * (sp[k] + sm[k]) - self.phi2[k]).powi(2))
            .sum()
    }

    /// Least-squares `g` for integer shifts `p > m`. The normal equations
    /// couple `g[i]` only with `g[i ± (p − m)]`, so they split into
    /// tridiagonal systems along chains of stride `p − m`.
    fn solve_integer(&self, p: i64, m: i64) -> Vec<f64> {
        let len = self.phi1.len() as i64;
        let b = self.data(m as f64);
        let inside = |y: i64| (0..len).contains(&y);
        let stride = p - m;
        let mut g = vec![0.0; len as usize];
        for c in 0..stride.min(len) {
            let idx: Vec<i64> = (c..len).step_by(stride as usize).collect();
            let k = idx.len();
            let mut diag = vec![1.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for (j, &i) in idx.iter().enumerate() {
                if !self.free[i as usize] {
                    continue;
                }
                let (hp, hm) = (inside(i + p), inside(i + m));
                diag[j] = hp as u8 as f64 + hm as u8 as f64 + RIDGE;
                if hp {
                    rhs[j] += b[(i + p) as usize];
                }
                if hm {
                    rhs[j] -= b[(i + m) as usize];
                }
                if j + 1 < k && hp && self.free[idx[j + 1] as usize] {
                    upper[j] = -1.0;
                }
            }
            // Thomas algorithm; the matrix is symmetric.
            for j in 1..k {
                let w = upper[j - 1] / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            for j in (0..k).rev() {
                let next = if j + 1 < k {
                    upper[j] * g[idx[j + 1] as usize]
                } else {
                    0.0
                };
                g[idx[j] as usize] = (rhs[j] - next) / diag[j];
            }
        }
        g
    }

    /// Refines `g` for fractional shifts by conjugate gradients on the
    /// normal equations, starting from `g0`.
    fn solve_fractional(&self, g0: &[f64], p: f64, m: f64) -> Vec<f64> {
        let free = &self.free;
        let mask = |v: &mut Vec<f64>| {
            for (x, &f) in v.iter_mut().zip(free) {
                if !f {
                    *x = 0.0;
                }
            }
        };
        let apply_d = |v: &[f64]| -> Vec<f64> {
            let (a, b) = (shift(v, p), shift(v, m));
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        };
        let apply_dt = |v: &[f64]| -> Vec<f64> {
            let (a, b) = (shift(v, -p), shift(v, -m));
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        };
        let normal = |v: &[f64]| -> Vec<f64> {
            let mut x = v.to_vec();
            mask(&mut x);
            let mut out = apply_dt(&apply_d(&x));
            mask(&mut out);
            out.iter_mut().zip(v).for_each(|(o, x)| *o += RIDGE * x);
            out
        };
        let mut rhs = apply_dt(&self.data(m));
        mask(&mut rhs);
        let a0 = normal(g0);
        let rhs: Vec<f64> = rhs.iter().zip(&a0).map(|(r, a)| r - a).collect();
        match cg_solve(normal, &rhs, 1e-10, 4 * g0.len()) {
            Ok(res) => g0.iter().zip(&res.x).map(|(g, x)| g + x).collect(),
            Err(_) => g0.to_vec(),
        }
    }
}

fn paired(phi1: &[f64], phi2: &[f64]) -> Option<SliceDecomposition> {
    let (l1, r1) = edges(phi1)?;
    let (l2, r2) = edges(phi2)?;
    let (s1, s2): (f64, f64) = (phi1.iter().sum(), phi2.iter().sum());
    let a = s2 / s1;
    if !(a > 0.0 && a.is_finite()) {
        return None;
    }
    let thr = SUPPORT_FRACTION * max_abs(phi1);
    let solver = Paired {
        phi1,
        phi2,
        a,
        free: phi1.iter().map(|x| x.abs() > thr).collect(),
    };
    let len = phi1.len() as i64;
    let (p0, m0) = (r2 - r1, l2 - l1);
    let mut memo: HashMap<(i64, i64), (f64, Vec<f64>)> = HashMap::new();
    let mut eval = |p: i64, m: i64| -> Option<f64> {
        if p <= m || p.abs() >= len || m.abs() >= len {
            return None;
        }
        Some(
            memo.entry((p, m))
                .or_insert_with(|| {
                    let g = solver.solve_integer(p, m);
                    (solver.misfit(&g, p as f64, m as f64), g)
                })
                .0,
        )
    };
    let mut best: Option<(i64, i64, f64)> = None;
    for p in p0 - PAIR_WINDOW..=p0 + PAIR_WINDOW {
        for m in m0 - PAIR_WINDOW..=m0 + PAIR_WINDOW {
            if let Some(e) = eval(p, m) {
                if best.is_none_or(|b| e < b.2) {
                    best = Some((p, m, e));
                }
            }
        }
    }
    let (p, m, e0) = best?;
    let offset = |lo: Option<f64>, hi: Option<f64>| match (lo, hi) {
        (Some(lo), Some(hi)) => parabola_offset(lo, e0, hi),
        _ => 0.0,
    };
    let po = offset(eval(p - 1, m), eval(p + 1, m));
    let mo = offset(eval(p, m - 1), eval(p, m + 1));
    let g_int = memo[&(p, m)].1.clone();
    let (pf, mf) = (p as f64 + po, m as f64 + mo);
    let g = if po != 0.0 || mo != 0.0 {
        let g = solver.solve_fractional(&g_int, pf, mf);
        if solver.misfit(&g, pf, mf) < e0 {
            g
        } else {
            return Some(split(
                phi1,
                phi2,
                &g_int,
                a,
                p as f64,
                m as f64,
                &solver.free,
            ));
        }
    } else {
        g_int
    };
    Some(split(phi1, phi2, &g, a, pf, mf, &solver.free))
}

fn split(
    phi1: &[f64],
    phi2: &[f64],
    g: &[f64],
    a: f64,
    p: f64,
    m: f64,
    free: &[bool],
) -> SliceDecomposition {
    let right: Vec<f64> = (0..phi1.len())
        .map(|k| {
            if free[k] {
                (g[k] / phi1[k]).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let left = right.iter().map(|x| 1.0 - x).collect();
    SliceDecomposition::from_components(
        phi1,
        phi2,
        vec![
            Component {
                nu: p,
                a,
                mask: right,
            },
            Component {
                nu: m,
                a,
                mask: left,
            },
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_are_connected_runs() {
        let v = [0.0, 1.0, 2.0, 0.0, 0.0, 3.0, 0.0, 1.0];
        assert_eq!(features(&v), vec![1..3, 5..6, 7..8]);
    }

    #[test]
    fn integer_pair_solve_recovers_split() {
        let n = 64;
        let bump = |c: f64| -> Vec<f64> {
            (0..n)
                .map(|k| (1.0 - ((k as f64 - c) / 6.0).powi(2)).max(0.0))
                .collect()
        };
        let (right, left) = (bump(30.0), bump(34.0));
        let phi1: Vec<f64> = right.iter().zip(&left).map(|(a, b)| a + b).collect();
        let (sr, sl) = (shift(&right, 9.0), shift(&left, -9.0));
        let phi2: Vec<f64> = sr.iter().zip(&sl).map(|(a, b)| a + b).collect();
        let solver = Paired {
            phi1: &phi1,
            phi2: &phi2,
            a: 1.0,
            free: phi1.iter().map(|x| *x > 0.0).collect(),
        };
        let g = solver.solve_integer(9, -9);
        for k in 0..n {
            assert!(
                (g[k] - right[k]).abs() < 1e-6,
                "{k}: {} vs {}",
                g[k],
                right[k]
            );
        }
        assert!(solver.misfit(&g, 9.0, -9.0) < 1e-12);
    }
}
