use std::fmt::Write as _;

use super::reference::{radial_reference_at, radial_reference_extrapolated, weighted_error};
use super::solver::solve_pressure_at;
use super::{make_cosine_hump, AcousticState, MaterialParams, SolveOptions};
use crate::error::{invalid, Result};
use crate::grid::{check_power_of_two, Grid2D};

/// Cells of the radial reference run of the boundary study.
pub const REFERENCE_CELLS: usize = 4000;
/// Cells of the finer of the two extrapolated reference runs of the
/// convergence study.
pub const CONVERGENCE_REFERENCE_CELLS: usize = 16000;
/// Radial extent of the reference run; covers the diagonal of `[−4, 4]²`.
pub const REFERENCE_EXTENT: f64 = 6.0;
const HALF_WIDTH: f64 = 4.0;

fn hump_state(n: usize, half_width: f64) -> Result<AcousticState> {
    let template = Grid2D::zeros(n, half_width)?;
    Ok(AcousticState::at_rest(make_cosine_hump(
        [0.0, 0.0],
        1.0,
        1.0,
        &template,
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub l1_t0: f64,
    pub l1_t: f64,
    pub l2_t0: f64,
    pub l2_t: f64,
    /// CG iterations of the inversions at `t = 0` and at `t = T`.
    pub iterations: [usize; 2],
}

/// Weighted diagonal errors of the cosine-hump acoustics run for a sequence
/// of grid sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub t: f64,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Observed orders `log₂(e_n / e_2n)` of the L¹ and L² errors at `T`
    /// between consecutive rows.
    pub fn orders(&self) -> Vec<(usize, f64, f64)> {
        self.rows
            .windows(2)
            .map(|w| {
                let ratio = (w[0].n as f64 / w[1].n as f64).log2().abs();
                (
                    w[1].n,
                    (w[0].l1_t / w[1].l1_t).log2() / ratio,
                    (w[0].l2_t / w[1].l2_t).log2() / ratio,
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("n,l1_t0,l1_T,l2_t0,l2_T,order_l1_T,order_l2_T,cg_iters_t0,cg_iters_T\n");
        let orders = self.orders();
        for (k, r) in self.rows.iter().enumerate() {
            let (o1, o2) = match k.checked_sub(1).map(|j| orders[j]) {
                Some((_, a, b)) => (format!("{a:.4}"), format!("{b:.4}")),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{:.8},{:.8},{:.8},{:.8},{o1},{o2},{},{}",
                r.n, r.l1_t0, r.l1_t, r.l2_t0, r.l2_t, r.iterations[0], r.iterations[1]
            )
            .unwrap();
        }
        out
    }
}

/// Runs the cosine-hump acoustics problem on `[−4, 4]²` for each `n` and
/// measures weighted L¹ and L² pressure errors along the diagonal at `t = 0`
/// and `t = T` against the radial reference.
pub fn convergence_study(ns: &[usize], t: f64, opts: &SolveOptions) -> Result<ErrorTable> {
    for &n in ns {
        check_power_of_two(n)?;
        if n < 2 {
            return Err(invalid("grid sizes must be at least 2"));
        }
    }
    let ref0 = radial_reference_extrapolated(CONVERGENCE_REFERENCE_CELLS, 0.0, REFERENCE_EXTENT)?;
    let ref_t = radial_reference_extrapolated(CONVERGENCE_REFERENCE_CELLS, t, REFERENCE_EXTENT)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let sols = solve_pressure_at(
            &hump_state(n, HALF_WIDTH)?,
            MaterialParams::default(),
            &[0.0, t],
            opts,
        )?;
        rows.push(ErrorRow {
            n,
            l1_t0: weighted_error(&sols[0].grid, &ref0, 1)?,
            l1_t: weighted_error(&sols[1].grid, &ref_t, 1)?,
            l2_t0: weighted_error(&sols[0].grid, &ref0, 2)?,
            l2_t: weighted_error(&sols[1].grid, &ref_t, 2)?,
            iterations: [sols[0].stats.iterations, sols[1].stats.iterations],
        });
    }
    Ok(ErrorTable { t, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub t: f64,
    pub l1_full: f64,
    pub l2_full: f64,
    pub l1_interior: f64,
    pub l2_interior: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub n: usize,
    pub points: Vec<DecayPoint>,
}

impl DecaySeries {
    /// Point with the largest full-domain L¹ error.
    pub fn peak(&self) -> Option<DecayPoint> {
        self.points
            .iter()
            .copied()
            .max_by(|a, b| a.l1_full.total_cmp(&b.l1_full))
    }

    /// Log-log slope of the full-domain L¹ error over the points at or after
    /// `from`.
    pub fn slope_after(&self, from: f64) -> Option<f64> {
        let (ts, es): (Vec<f64>, Vec<f64>) = self
            .points
            .iter()
            .filter(|p| p.t >= from)
            .map(|p| (p.t, p.l1_full))
            .unzip();
        fit_loglog_slope(&ts, &es)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,l1_full,l2_full,l1_interior,l2_interior\n");
        for p in &self.points {
            writeln!(
                out,
                "{},{:.6e},{:.6e},{:.6e},{:.6e}",
                p.t, p.l1_full, p.l2_full, p.l1_interior, p.l2_interior
            )
            .unwrap();
        }
        out
    }
}

/// Least-squares slope of `log e` against `log t`; `None` with fewer than
/// two usable points.
pub fn fit_loglog_slope(ts: &[f64], es: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(es)
        .filter(|(t, e)| **t > 0.0 && **e > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

/// What [`boundary_decay_study`] compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecayReference {
    /// The same solver on `[−8, 8]²` at equal cell width, cropped to the
    /// inner square. Isolates the error caused by the boundary, but only
    /// until the wave reaches the wider boundary too; from `t ≈ 8√2 + 1` on
    /// both runs are identically zero.
    #[default]
    WideDomain,
    /// The radial reference sampled at cell centers. It extends far enough
    /// that nothing returns from its outer boundary before the last time, so
    /// it keeps the slowly decaying wake a bounded computation loses once
    /// the wave has left.
    Radial,
}

/// Cosine-hump acoustics on `[−4, 4]²` with `n` cells per side, compared at
/// each of `times` with `reference`. Errors are `Σ|Δ|Δx²` and
/// `(Σ Δ² Δx²)^{1/2}` over all cells and over the cells whose centers lie in
/// `(−3, 3)²`.
pub fn boundary_decay_study(
    times: &[f64],
    n: usize,
    reference: DecayReference,
    opts: &SolveOptions,
) -> Result<DecaySeries> {
    check_power_of_two(n)?;
    if n < 2 {
        return Err(invalid("grid size must be at least 2"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("output times must be increasing"));
    }
    let params = MaterialParams::default();
    let main = solve_pressure_at(&hump_state(n, HALF_WIDTH)?, params, times, opts)?;
    let dx = 2.0 * HALF_WIDTH / n as f64;
    let centers: Vec<f64> = (0..n)
        .map(|k| -HALF_WIDTH + (k as f64 + 0.5) * dx)
        .collect();
    let refs: Vec<Vec<f64>> = match reference {
        DecayReference::WideDomain => {
            let wide =
                solve_pressure_at(&hump_state(2 * n, 2.0 * HALF_WIDTH)?, params, times, opts)?;
            let off = n / 2;
            wide.iter()
                .map(|w| {
                    (0..n * n)
                        .map(|k| w.grid.get(k / n + off, k % n + off))
                        .collect()
                })
                .collect()
        }
        DecayReference::Radial => {
            let t_max = times.iter().copied().fold(0.0, f64::max);
            let l_max = 0.5 * t_max + REFERENCE_EXTENT;
            let cells = (l_max / REFERENCE_EXTENT * REFERENCE_CELLS as f64).ceil() as usize;
            radial_reference_at(cells, times, l_max)?
                .iter()
                .map(|r| {
                    (0..n * n)
                        .map(|k| r.eval(centers[k % n].hypot(centers[k / n])))
                        .collect()
                })
                .collect()
        }
    };
    let area = dx * dx;
    let points = main
        .iter()
        .zip(&refs)
        .map(|(m, r)| {
            let (mut l1f, mut l2f, mut l1i, mut l2i) = (0.0, 0.0, 0.0, 0.0);
            for (k, (&a, &b)) in m.grid.data().iter().zip(r).enumerate() {
                let d = (a - b).abs();
                l1f += d * area;
                l2f += d * d * area;
                if centers[k / n].abs() < 3.0 && centers[k % n].abs() < 3.0 {
                    l1i += d * area;
                    l2i += d * d * area;
                }
            }
            DecayPoint {
                t: m.time,
                l1_full: l1f,
                l2_full: l2f.sqrt(),
                l1_interior: l1i,
                l2_interior: l2i.sqrt(),
            }
        })
        .collect();
    Ok(DecaySeries { n, points })
}
