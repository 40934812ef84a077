//! Dimensional splitting with the discrete Radon transform.
//!
//! The transform turns `∂/∂xᵢ` into `ωᵢ ∂/∂s`, so a constant-coefficient
//! hyperbolic system in the plane becomes a family of 1D problems, one per
//! slice `(quadrant, slope)`. Each 1D problem is solved exactly by shifting
//! along characteristics, whatever the time step, and the result is mapped
//! back by least-squares inversion.
//!
//! Grids are prolonged by `2p` before the transform and inverted back to the
//! original size. Outflow at the ends of every slice is handled by
//! zero-order extrapolation, which lets planar waves leave the domain.

mod config;
mod reference;
mod solver;
mod study;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::Grid2D;
use crate::invert::InvertOptions;

pub use config::{Hump, InitialCondition, Outputs, Problem, SolverConfig};
pub use reference::{
    radial_acoustics, radial_acoustics_at, radial_reference_acoustics, radial_reference_at,
    radial_reference_extrapolated, weighted_error, RadialProfile,
};
pub use solver::{
    advect_sinogram, evolve_acoustic_sinograms, shift_slice, slope_shift_amount, solve_acoustics,
    solve_acoustics_at, solve_pressure_at, solve_transport, solve_transport_at, AcousticSinograms,
    AcousticSolution, InversionStats, TransportSolution,
};
pub use study::{
    boundary_decay_study, convergence_study, fit_loglog_slope, DecayPoint, DecayReference,
    DecaySeries, ErrorRow, ErrorTable, CONVERGENCE_REFERENCE_CELLS, REFERENCE_CELLS,
    REFERENCE_EXTENT,
};

/// Bulk modulus and density of a uniform medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub k0: f64,
    pub rho0: f64,
}

impl MaterialParams {
    pub fn new(k0: f64, rho0: f64) -> Result<Self> {
        if !(k0 > 0.0 && rho0 > 0.0 && k0.is_finite() && rho0.is_finite()) {
            return Err(invalid(format!(
                "K0 and rho0 must be positive, got {k0}, {rho0}"
            )));
        }
        Ok(Self { k0, rho0 })
    }

    /// Sound speed `√(K₀/ρ₀)`.
    pub fn c(&self) -> f64 {
        (self.k0 / self.rho0).sqrt()
    }

    /// Impedance `√(K₀ρ₀)`.
    pub fn z(&self) -> f64 {
        (self.k0 * self.rho0).sqrt()
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self { k0: 1.0, rho0: 1.0 }
    }
}

/// Pressure and velocity `(p, u, v)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticState {
    pub p: Grid2D,
    pub u: Grid2D,
    pub v: Grid2D,
}

impl AcousticState {
    pub fn new(p: Grid2D, u: Grid2D, v: Grid2D) -> Result<Self> {
        if !p.same_shape(&u) || !p.same_shape(&v) {
            return Err(invalid("p, u and v must share n and half-width"));
        }
        if [&p, &u, &v]
            .iter()
            .any(|g| g.data().iter().any(|x| !x.is_finite()))
        {
            return Err(invalid("state contains non-finite values"));
        }
        Ok(Self { p, u, v })
    }

    /// Pressure `p` with the fluid at rest.
    pub fn at_rest(p: Grid2D) -> Self {
        let zero = Grid2D::zeros(p.n(), p.half_width()).expect("same shape as p");
        Self {
            u: zero.clone(),
            v: zero,
            p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySpec {
    /// Inflow cells copy the nearest boundary value.
    #[default]
    #[serde(alias = "absorbing")]
    AbsorbingExtrapolation,
    /// Inflow cells are zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Prolongation factor `2p`; overrides `invert.oversample_p`.
    pub oversample_p: usize,
    pub boundary: BoundarySpec,
    pub invert: InvertOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            oversample_p: 2,
            boundary: BoundarySpec::default(),
            invert: InvertOptions::default(),
        }
    }
}

impl SolveOptions {
    pub fn invert_options(&self) -> InvertOptions {
        InvertOptions {
            oversample_p: self.oversample_p,
            ..self.invert
        }
    }
}

/// `amplitude · cos(π r²/2)` for `r² = scale²|x − center|² < 1`, else zero,
/// sampled at the cell centers of `template`.
pub fn make_cosine_hump(center: [f64; 2], scale: f64, amplitude: f64, template: &Grid2D) -> Grid2D {
    Grid2D::from_fn(template.n(), template.half_width(), |x1, x2| {
        let r2 = scale * scale * ((x1 - center[0]).powi(2) + (x2 - center[1]).powi(2));
        if r2 < 1.0 {
            amplitude * (std::f64::consts::FRAC_PI_2 * r2).cos()
        } else {
            0.0
        }
    })
    .expect("template is valid")
}

/// The two-hump pressure profile: a unit hump at `(−1, −1.5)` plus a hump of
/// height 1.5 and radius 0.8 at `(0.75, 1.1)`.
pub fn two_humps(template: &Grid2D) -> Grid2D {
    let a = make_cosine_hump([-1.0, -1.5], 1.0, 1.0, template);
    let b = make_cosine_hump([0.75, 1.1], 1.25, 1.5, template);
    a.with_data(a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect())
        .expect("same shape")
}
