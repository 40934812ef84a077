use rayon::prelude::*;

use super::{AcousticState, BoundarySpec, MaterialParams, SolveOptions};
use crate::adrt2::{drt_forward, quadrant_normal, slope_angle};
use crate::error::{invalid, Result};
use crate::grid::{prolong, Grid2D};
use crate::invert::{invert_drt, InvertResult};
use crate::sinogram::{Quadrant, Sinogram2D};

/// Height displacement on a slice of size `n` that represents a physical
/// displacement `speed · t` along the slice normal.
pub fn slope_shift_amount(
    _label: Quadrant,
    s: usize,
    n: usize,
    half_width: f64,
    speed: f64,
    t: f64,
) -> f64 {
    speed * t * n as f64 / (2.0 * half_width * slope_angle(s, n).cos())
}

/// Shifts a profile by `dh` cells towards higher indices.
///
/// The integer part moves samples exactly, the fractional part blends two
/// neighbours linearly. Reads past either end take the end value
/// ([`BoundarySpec::AbsorbingExtrapolation`]) or zero.
pub fn shift_slice(slice: &[f64], dh: f64, boundary: BoundarySpec) -> Vec<f64> {
    let len = slice.len();
    if len == 0 {
        return Vec::new();
    }
    if dh == 0.0 {
        return slice.to_vec();
    }
    let k = dh.floor();
    let f = dh - k;
    let k = k as i64;
    let read = |idx: i64| -> f64 {
        if idx < 0 {
            match boundary {
                BoundarySpec::AbsorbingExtrapolation => slice[0],
                BoundarySpec::Zero => 0.0,
            }
        } else if idx as usize >= len {
            match boundary {
                BoundarySpec::AbsorbingExtrapolation => slice[len - 1],
                BoundarySpec::Zero => 0.0,
            }
        } else {
            slice[idx as usize]
        }
    };
    (0..len as i64)
        .map(|h| {
            let a = read(h - k);
            if f == 0.0 {
                a
            } else {
                (1.0 - f) * a + f * read(h - k - 1)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionStats {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

impl From<&InvertResult> for InversionStats {
    fn from(r: &InvertResult) -> Self {
        Self {
            iterations: r.iterations,
            rel_residual: r.rel_residual,
            converged: r.converged,
        }
    }
}

/// A scalar field at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub time: f64,
    pub grid: Grid2D,
    pub stats: InversionStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcousticSolution {
    pub time: f64,
    pub state: AcousticState,
    /// One entry per inverted component, in the order `p, u, v`.
    pub stats: [InversionStats; 3],
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

fn forward_prolonged(g: &Grid2D, factor: usize) -> Result<Sinogram2D> {
    Ok(drt_forward(&prolong(g, factor)?))
}

fn invert(
    sino: &Sinogram2D,
    like: &Grid2D,
    opts: &SolveOptions,
) -> Result<(Grid2D, InversionStats)> {
    let r = invert_drt(sino, like.n(), like.half_width(), &opts.invert_options())?;
    let stats = InversionStats::from(&r);
    Ok((r.grid, stats))
}

/// Applies `f(quadrant, s, valid part of each input slice)` to every slice
/// of a set of equally sized sinograms, writing the valid parts of the
/// outputs. Rows outside the valid range stay zero.
fn map_slices<const K: usize>(
    inputs: [&Sinogram2D; K],
    f: impl Fn(Quadrant, usize, [&[f64]; K]) -> [Vec<f64>; K] + Sync,
) -> [Sinogram2D; K] {
    let n = inputs[0].n();
    let mut outs: [Sinogram2D; K] = std::array::from_fn(|_| Sinogram2D::zeros(n).expect("valid n"));
    let per_quadrant: Vec<Vec<[Vec<f64>; K]>> = Quadrant::ALL
        .par_iter()
        .map(|&q| {
            (0..n)
                .map(|s| {
                    let rows = inputs[0].quadrant(q).valid_rows(s);
                    let parts =
                        std::array::from_fn(|c| &inputs[c].quadrant(q).slice(s)[rows.clone()]);
                    f(q, s, parts)
                })
                .collect()
        })
        .collect();
    for (qi, slices) in per_quadrant.into_iter().enumerate() {
        for (s, comps) in slices.into_iter().enumerate() {
            for (c, values) in comps.into_iter().enumerate() {
                let quad = &mut outs[c].quadrants_mut()[qi];
                let rows = quad.valid_rows(s);
                quad.slice_mut(s)[rows].copy_from_slice(&values);
            }
        }
    }
    outs
}

/// Advects every slice of a transformed field with velocity `theta` for time
/// `t`. Each slice moves at speed `θ·ω` along its normal `ω`.
pub fn advect_sinogram(
    sino: &Sinogram2D,
    theta: [f64; 2],
    t: f64,
    half_width: f64,
    boundary: BoundarySpec,
) -> Sinogram2D {
    let n = sino.n();
    let [out] = map_slices([sino], |q, s, [slice]| {
        let w = quadrant_normal(q, s, n).normal;
        let speed = theta[0] * w[0] + theta[1] * w[1];
        let dh = slope_shift_amount(q, s, n, half_width, speed, t);
        [shift_slice(slice, dh, boundary)]
    });
    out
}

/// Transformed acoustic fields `(p̂, û, v̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticSinograms {
    pub p: Sinogram2D,
    pub u: Sinogram2D,
    pub v: Sinogram2D,
}

impl AcousticSinograms {
    /// Prolongs by `factor` and transforms each component. Zero components
    /// are not transformed.
    pub fn from_state(state: &AcousticState, factor: usize) -> Result<Self> {
        let n = state.p.n() * factor;
        let tr = |g: &Grid2D| -> Result<Sinogram2D> {
            if g.data().iter().all(|&x| x == 0.0) {
                Sinogram2D::zeros(n)
            } else {
                forward_prolonged(g, factor)
            }
        };
        Ok(Self {
            p: tr(&state.p)?,
            u: tr(&state.u)?,
            v: tr(&state.v)?,
        })
    }
}

/// Evolves transformed acoustic fields for time `t`.
///
/// On a slice with normal `ω`, the normal velocity `μ = ω₁u + ω₂v` and the
/// pressure form the characteristic variables `p ± Zμ`, which move by `±ct`.
/// The tangential velocity `ν = −ω₂u + ω₁v` is left unchanged.
pub fn evolve_acoustic_sinograms(
    sino: &AcousticSinograms,
    params: MaterialParams,
    t: f64,
    half_width: f64,
    boundary: BoundarySpec,
) -> AcousticSinograms {
    evolve(sino, params, t, half_width, boundary, true)
}

fn evolve(
    sino: &AcousticSinograms,
    params: MaterialParams,
    t: f64,
    half_width: f64,
    boundary: BoundarySpec,
    keep_transverse: bool,
) -> AcousticSinograms {
    let n = sino.p.n();
    let (c, z) = (params.c(), params.z());
    let [p, u, v] = map_slices([&sino.p, &sino.u, &sino.v], |q, s, [p, u, v]| {
        let [w1, w2] = quadrant_normal(q, s, n).normal;
        let dh = slope_shift_amount(q, s, n, half_width, c, t);
        let mut right = Vec::with_capacity(p.len());
        let mut left = Vec::with_capacity(p.len());
        for k in 0..p.len() {
            let mu = w1 * u[k] + w2 * v[k];
            right.push(p[k] + z * mu);
            left.push(p[k] - z * mu);
        }
        let right = shift_slice(&right, dh, boundary);
        let left = shift_slice(&left, -dh, boundary);
        let mut po = Vec::with_capacity(p.len());
        let mut uo = Vec::with_capacity(p.len());
        let mut vo = Vec::with_capacity(p.len());
        for k in 0..p.len() {
            let nu = if keep_transverse {
                -w2 * u[k] + w1 * v[k]
            } else {
                0.0
            };
            let mu = (right[k] - left[k]) / (2.0 * z);
            po.push(0.5 * (right[k] + left[k]));
            uo.push(w1 * mu - w2 * nu);
            vo.push(w2 * mu + w1 * nu);
        }
        [po, uo, vo]
    });
    AcousticSinograms { p, u, v }
}

/// Solves `q_t + θ·∇q = 0` to each of `times` with one step per time.
pub fn solve_transport_at(
    q0: &Grid2D,
    theta: [f64; 2],
    times: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<TransportSolution>> {
    times.iter().try_for_each(|&t| check_time(t))?;
    let sino = forward_prolonged(q0, 2 * opts.oversample_p)?;
    times
        .iter()
        .map(|&t| {
            let moved = advect_sinogram(&sino, theta, t, q0.half_width(), opts.boundary);
            let (grid, stats) = invert(&moved, q0, opts)?;
            Ok(TransportSolution {
                time: t,
                grid,
                stats,
            })
        })
        .collect()
}

pub fn solve_transport(
    q0: &Grid2D,
    theta: [f64; 2],
    t: f64,
    opts: &SolveOptions,
) -> Result<TransportSolution> {
    Ok(solve_transport_at(q0, theta, &[t], opts)?.remove(0))
}

/// Solves the linear acoustics system
///
/// ```text
/// p_t + K₀ (u_x + v_y) = 0,   ρ₀ u_t + p_x = 0,   ρ₀ v_t + p_y = 0
/// ```
///
/// to each of `times`, inverting all three components.
pub fn solve_acoustics_at(
    q0: &AcousticState,
    params: MaterialParams,
    times: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<AcousticSolution>> {
    times.iter().try_for_each(|&t| check_time(t))?;
    let sino = AcousticSinograms::from_state(q0, 2 * opts.oversample_p)?;
    let like = &q0.p;
    times
        .iter()
        .map(|&t| {
            let ev = evolve_acoustic_sinograms(&sino, params, t, like.half_width(), opts.boundary);
            let parts: Vec<Result<(Grid2D, InversionStats)>> = [&ev.p, &ev.u, &ev.v]
                .par_iter()
                .map(|s| invert(s, like, opts))
                .collect();
            let mut parts = parts.into_iter().collect::<Result<Vec<_>>>()?.into_iter();
            let (p, sp) = parts.next().unwrap();
            let (u, su) = parts.next().unwrap();
            let (v, sv) = parts.next().unwrap();
            Ok(AcousticSolution {
                time: t,
                state: AcousticState { p, u, v },
                stats: [sp, su, sv],
            })
        })
        .collect()
}

pub fn solve_acoustics(
    q0: &AcousticState,
    params: MaterialParams,
    t: f64,
    opts: &SolveOptions,
) -> Result<AcousticSolution> {
    Ok(solve_acoustics_at(q0, params, &[t], opts)?.remove(0))
}

/// Like [`solve_acoustics_at`] but inverts only the pressure.
pub fn solve_pressure_at(
    q0: &AcousticState,
    params: MaterialParams,
    times: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<TransportSolution>> {
    times.iter().try_for_each(|&t| check_time(t))?;
    let sino = AcousticSinograms::from_state(q0, 2 * opts.oversample_p)?;
    times
        .iter()
        .map(|&t| {
            let ev = evolve_acoustic_sinograms(&sino, params, t, q0.p.half_width(), opts.boundary);
            let (grid, stats) = invert(&ev.p, &q0.p, opts)?;
            Ok(TransportSolution {
                time: t,
                grid,
                stats,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersolve::make_cosine_hump;

    #[test]
    fn shift_amounts() {
        let d = slope_shift_amount(Quadrant::A, 0, 128, 4.0, 1.0, 1.0);
        assert_eq!(d, 16.0);
        assert_eq!(slope_shift_amount(Quadrant::A, 5, 128, 4.0, 0.0, 1.0), 0.0);
        let d = slope_shift_amount(Quadrant::C, 127, 128, 4.0, 1.0, 1.0);
        assert!((d - 16.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shift_basics() {
        let pulse = [1.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(shift_slice(&pulse, 0.0, BoundarySpec::Zero), pulse.to_vec());
        assert_eq!(
            shift_slice(&pulse, 3.0, BoundarySpec::Zero),
            vec![0.0, 0.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(
            shift_slice(&pulse, 0.5, BoundarySpec::Zero),
            vec![0.5, 0.5, 0.0, 0.0, 0.0]
        );
        assert_eq!(shift_slice(&pulse, -1.0, BoundarySpec::Zero), vec![0.0; 5]);
    }

    #[test]
    fn extrapolation_fills_inflow() {
        let s = [2.0, 1.0, 0.0, 0.0];
        assert_eq!(
            shift_slice(&s, 2.0, BoundarySpec::AbsorbingExtrapolation),
            vec![2.0, 2.0, 2.0, 1.0]
        );
        assert_eq!(
            shift_slice(&s, 2.0, BoundarySpec::Zero),
            vec![0.0, 0.0, 2.0, 1.0]
        );
        let s = [0.0, 0.0, 1.0, 3.0];
        assert_eq!(
            shift_slice(&s, -1.5, BoundarySpec::AbsorbingExtrapolation),
            vec![0.5, 2.0, 3.0, 3.0]
        );
    }

    #[test]
    fn transverse_velocity_is_irrelevant_at_rest() {
        let t = Grid2D::zeros(16, 4.0).unwrap();
        let state = AcousticState::at_rest(make_cosine_hump([0.5, 0.0], 1.0, 1.0, &t));
        let sino = AcousticSinograms::from_state(&state, 4).unwrap();
        let params = MaterialParams::default();
        let with = evolve(&sino, params, 1.3, 4.0, BoundarySpec::default(), true);
        let without = evolve(&sino, params, 1.3, 4.0, BoundarySpec::default(), false);
        assert_eq!(with, without);
    }

    #[test]
    fn zero_state_stays_zero() {
        let t = Grid2D::zeros(8, 4.0).unwrap();
        let state = AcousticState::at_rest(t);
        let out = solve_acoustics(
            &state,
            MaterialParams::default(),
            2.0,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(out.state, state);
        assert!(out.stats.iter().all(|s| s.iterations == 0));
    }

    #[test]
    fn negative_time_rejected() {
        let t = Grid2D::zeros(8, 4.0).unwrap();
        assert!(solve_transport(&t, [1.0, 0.0], -1.0, &SolveOptions::default()).is_err());
    }
}
