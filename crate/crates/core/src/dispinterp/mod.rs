//! Displacement interpolation between two snapshots.
//!
//! Linear blending `(1 − τ)φ₁ + τφ₂` of two snapshots of a moving pulse
//! gives two fading pulses. Displacement interpolation instead explains
//! `φ₂` as shifted and rescaled pieces of `φ₁`,
//!
//! ```text
//! φ₂ ≈ Σₖ aₖ · (mₖ φ₁)(· − νₖ)
//! ```
//!
//! and moves each piece a fraction `τ` of the way:
//!
//! ```text
//! ψ(τ) = Σₖ ηₖ(τ) (mₖ φ₁)(· − νₖτ) + (1 − τ)(1 − Σₖ mₖ) φ₁ + τ r,
//! ηₖ(τ) = (1 − τ) + τ aₖ,
//! ```
//!
//! where `r` is whatever the pieces leave unexplained. The masks `mₖ` do not
//! depend on `τ`. In two dimensions the same is done on every slice of the
//! discrete Radon transform, where constant-coefficient dynamics really are
//! translations, and the result is inverted.

mod fit;
mod reversal;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::adrt2::drt_forward;
use crate::error::{invalid, Result};
use crate::grid::{prolong, Grid2D};
use crate::hypersolve::InversionStats;
use crate::invert::{invert_drt, InvertOptions};
use crate::sinogram::{Quadrant, Sinogram2D};

pub use fit::template_fit;
pub use reversal::transport_reversal;

/// One travelling piece: `mask · φ₁`, shifted by `nu` cells and scaled by
/// `a` at `τ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub nu: f64,
    pub a: f64,
    pub mask: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceDecomposition {
    pub components: Vec<Component>,
    /// The source profile `φ₁`.
    pub base: Vec<f64>,
    /// `φ₂` minus the pieces at `τ = 1`.
    pub residual: Vec<f64>,
}

impl SliceDecomposition {
    fn from_components(phi1: &[f64], phi2: &[f64], components: Vec<Component>) -> Self {
        let mut dec = Self {
            components,
            base: phi1.to_vec(),
            residual: Vec::new(),
        };
        let at_one = dec.transported(1.0);
        dec.residual = phi2.iter().zip(&at_one).map(|(y, x)| y - x).collect();
        dec
    }

    /// `(1 − τ)φ₁ + τφ₂` written as a decomposition with nothing moving.
    fn linear(phi1: &[f64], phi2: &[f64]) -> Self {
        let still = Component {
            nu: 0.0,
            a: 1.0,
            mask: vec![0.0; phi1.len()],
        };
        Self::from_components(phi1, phi2, vec![still])
    }

    fn transported(&self, tau: f64) -> Vec<f64> {
        let len = self.base.len();
        let mut out = vec![0.0; len];
        let mut covered = vec![0.0; len];
        for c in &self.components {
            let piece: Vec<f64> = c.mask.iter().zip(&self.base).map(|(m, x)| m * x).collect();
            let eta = (1.0 - tau) + tau * c.a;
            for (o, x) in out.iter_mut().zip(fit::shift(&piece, c.nu * tau)) {
                *o += eta * x;
            }
            covered.iter_mut().zip(&c.mask).for_each(|(s, m)| *s += m);
        }
        for k in 0..len {
            out[k] += (1.0 - tau) * (1.0 - covered[k]) * self.base[k];
        }
        out
    }

    /// Number of pieces.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Same as [`displacement_interpolate_1d`].
    pub fn evaluate(&self, tau: f64) -> Result<Vec<f64>> {
        displacement_interpolate_1d(self, tau)
    }
}

/// `ψ(τ)` for a decomposition; `τ = 0` returns `φ₁` unchanged and `τ = 1`
/// gives `φ₂` up to rounding.
///
/// ```
/// # use radsplit::dispinterp::{transport_reversal, displacement_interpolate_1d};
/// let phi1 = [0.0, 2.0, 4.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0];
/// let phi2 = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0, 0.0];
/// let dec = transport_reversal(&phi1, &phi2, 2, 1e-12).unwrap();
/// let mid = displacement_interpolate_1d(&dec, 0.5).unwrap();
/// assert_eq!(mid, vec![0.0, 0.0, 0.0, 1.5, 3.0, 1.5, 0.0, 0.0, 0.0]);
/// ```
pub fn displacement_interpolate_1d(dec: &SliceDecomposition, tau: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid(format!("tau must lie in [0, 1], got {tau}")));
    }
    if tau == 0.0 {
        return Ok(dec.base.clone());
    }
    let mut out = dec.transported(tau);
    for (o, r) in out.iter_mut().zip(&dec.residual) {
        *o += tau * r;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpOptions {
    /// Prolongation factor `2p` before the transform.
    pub oversample_p: usize,
    /// Most pieces per slice.
    pub k_max: usize,
    /// Relative residual at which a slice counts as explained.
    pub tol: f64,
    pub invert: InvertOptions,
}

impl Default for InterpOptions {
    fn default() -> Self {
        Self {
            oversample_p: 2,
            k_max: 4,
            tol: 1e-3,
            invert: InvertOptions::default(),
        }
    }
}

impl InterpOptions {
    fn invert_options(&self) -> InvertOptions {
        InvertOptions {
            oversample_p: self.oversample_p,
            ..self.invert
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceRecord {
    pub quadrant: Quadrant,
    pub s: usize,
    /// Decomposition of the slice's valid rows.
    pub decomposition: SliceDecomposition,
}

/// Per-slice decompositions of a pair of grids, ready to be evaluated at
/// any `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinogramDecomposition {
    n: usize,
    half_width: f64,
    opts: InterpOptions,
    slices: Vec<SliceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpResult {
    pub tau: f64,
    pub grid: Grid2D,
    pub stats: InversionStats,
}

impl SinogramDecomposition {
    /// Prolongs and transforms both grids and decomposes every slice pair.
    /// Slices on which `q1` vanishes are blended linearly.
    pub fn new(q1: &Grid2D, q2: &Grid2D, opts: &InterpOptions) -> Result<Self> {
        if !q1.same_shape(q2) {
            return Err(invalid("snapshots must share n and half-width"));
        }
        opts.invert_options().validate()?;
        if opts.k_max == 0 || !(opts.tol >= 0.0) {
            return Err(invalid("k_max must be positive and tol non-negative"));
        }
        let factor = 2 * opts.oversample_p;
        let s1 = drt_forward(&prolong(q1, factor)?);
        let s2 = drt_forward(&prolong(q2, factor)?);
        let big = s1.n();
        let jobs: Vec<(Quadrant, usize)> = Quadrant::ALL
            .iter()
            .flat_map(|&q| (0..big).map(move |s| (q, s)))
            .collect();
        let slices = jobs
            .par_iter()
            .map(|&(q, s)| {
                let rows = s1.quadrant(q).valid_rows(s);
                let a = &s1.quadrant(q).slice(s)[rows.clone()];
                let b = &s2.quadrant(q).slice(s)[rows];
                let decomposition = if a.iter().all(|&x| x == 0.0) {
                    SliceDecomposition::linear(a, b)
                } else {
                    transport_reversal(a, b, opts.k_max, opts.tol)?
                };
                Ok(SliceRecord {
                    quadrant: q,
                    s,
                    decomposition,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: q1.n(),
            half_width: q1.half_width(),
            opts: *opts,
            slices,
        })
    }

    pub fn slices(&self) -> &[SliceRecord] {
        &self.slices
    }

    /// Assembled transform of `ψ(τ)`.
    pub fn sinogram_at(&self, tau: f64) -> Result<Sinogram2D> {
        let big = self.n * 2 * self.opts.oversample_p;
        let mut out = Sinogram2D::zeros(big)?;
        let values = self
            .slices
            .par_iter()
            .map(|r| r.decomposition.evaluate(tau))
            .collect::<Result<Vec<_>>>()?;
        for (r, v) in self.slices.iter().zip(values) {
            let quad = &mut out.quadrants_mut()[r.quadrant.index()];
            let rows = quad.valid_rows(r.s);
            quad.slice_mut(r.s)[rows].copy_from_slice(&v);
        }
        Ok(out)
    }

    pub fn interpolate(&self, tau: f64) -> Result<InterpResult> {
        let sino = self.sinogram_at(tau)?;
        let r = invert_drt(&sino, self.n, self.half_width, &self.opts.invert_options())?;
        Ok(InterpResult {
            tau,
            stats: InversionStats::from(&r),
            grid: r.grid,
        })
    }

    /// One row per piece: `quadrant,s,k,nu,a,residual_norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quadrant,s,k,nu,a,residual_norm\n");
        for r in &self.slices {
            let res = r.decomposition.residual_norm();
            for (k, c) in r.decomposition.components.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{:e}",
                    r.quadrant.as_char(),
                    r.s,
                    k,
                    c.nu,
                    c.a,
                    res
                )
                .unwrap();
            }
        }
        out
    }
}

/// Displacement interpolant of two grids at `τ`, by transport reversal on
/// every transform slice followed by least-squares inversion.
pub fn displacement_interpolate_2d(
    q1: &Grid2D,
    q2: &Grid2D,
    tau: f64,
    opts: &InterpOptions,
) -> Result<InterpResult> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid(format!("tau must lie in [0, 1], got {tau}")));
    }
    SinogramDecomposition::new(q1, q2, opts)?.interpolate(tau)
}
