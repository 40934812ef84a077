use super::MaterialParams;
use crate::error::{invalid, Result};
use crate::grid::Grid2D;

/// A radial profile sampled at cell centers `(k + ½)·dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub dr: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    /// Linear interpolation between centers, constant beyond the first and
    /// last ones.
    pub fn eval(&self, rho: f64) -> f64 {
        let x = rho / self.dr - 0.5;
        let last = self.values.len() - 1;
        if x <= 0.0 {
            return self.values[0];
        }
        let k = x.floor() as usize;
        if k >= last {
            return self.values[last];
        }
        let f = x - k as f64;
        (1.0 - f) * self.values[k] + f * self.values[k + 1]
    }

    pub fn extent(&self) -> f64 {
        self.dr * self.values.len() as f64
    }
}

/// Radially symmetric acoustics
///
/// ```text
/// p_t + K₀ (u_ρ + u/ρ) = 0,   u_t + p_ρ / ρ₀ = 0
/// ```
///
/// on `(0, l_max]` from `p(0, ρ) = p0(ρ)`, `u = 0`, by first-order upwinding
/// of `p ± Zu` with a fractional step for `−K₀u/ρ`. The axis reflects, the
/// far end is outflow; CFL number 0.9.
pub fn radial_acoustics(
    p0: impl Fn(f64) -> f64,
    params: MaterialParams,
    n_cells: usize,
    t: f64,
    l_max: f64,
) -> Result<RadialProfile> {
    Ok(radial_acoustics_at(p0, params, n_cells, &[t], l_max)?.remove(0))
}

/// [`radial_acoustics`] at several increasing times from a single run.
pub fn radial_acoustics_at(
    p0: impl Fn(f64) -> f64,
    params: MaterialParams,
    n_cells: usize,
    times: &[f64],
    l_max: f64,
) -> Result<Vec<RadialProfile>> {
    if n_cells < 2 || !(l_max > 0.0) {
        return Err(invalid("need n_cells >= 2 and l_max > 0"));
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(invalid("times must be finite, non-negative and increasing"));
    }
    let dr = l_max / n_cells as f64;
    let centers: Vec<f64> = (0..n_cells).map(|k| (k as f64 + 0.5) * dr).collect();
    let mut p: Vec<f64> = centers.iter().map(|&r| p0(r)).collect();
    let mut u = vec![0.0; n_cells];
    let (c, z, k0) = (params.c(), params.z(), params.k0);
    let mut wp = vec![0.0; n_cells];
    let mut wm = vec![0.0; n_cells];
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        let steps = (span / (0.9 * dr / c)).ceil() as usize;
        let dt = if steps > 0 { span / steps as f64 } else { 0.0 };
        let nu = c * dt / dr;
        for _ in 0..steps {
            for k in 0..n_cells {
                wp[k] = p[k] + z * u[k];
                wm[k] = p[k] - z * u[k];
            }
            // Right-going: upwind from the left, mirror image at the axis.
            let mut prev = wm[0];
            for w in wp.iter_mut() {
                let cur = *w;
                *w = cur - nu * (cur - prev);
                prev = cur;
            }
            // Left-going: upwind from the right, zero gradient at the far end.
            for k in 0..n_cells {
                let next = if k + 1 < n_cells { wm[k + 1] } else { wm[k] };
                wm[k] += nu * (next - wm[k]);
            }
            for k in 0..n_cells {
                p[k] = 0.5 * (wp[k] + wm[k]);
                u[k] = (wp[k] - wm[k]) / (2.0 * z);
                p[k] -= dt * k0 * u[k] / centers[k];
            }
        }
        now = t;
        out.push(RadialProfile {
            dr,
            values: p.clone(),
        });
    }
    Ok(out)
}

fn unit_hump(r: f64) -> f64 {
    if r < 1.0 {
        (std::f64::consts::FRAC_PI_2 * r * r).cos()
    } else {
        0.0
    }
}

/// Reference pressure for the unit cosine hump `cos(πρ²/2)` on `ρ < 1` with
/// `K₀ = ρ₀ = 1`.
pub fn radial_reference_acoustics(n_cells: usize, t: f64, l_max: f64) -> Result<RadialProfile> {
    radial_acoustics(unit_hump, MaterialParams::default(), n_cells, t, l_max)
}

/// [`radial_reference_acoustics`] at several increasing times.
pub fn radial_reference_at(
    n_cells: usize,
    times: &[f64],
    l_max: f64,
) -> Result<Vec<RadialProfile>> {
    radial_acoustics_at(unit_hump, MaterialParams::default(), n_cells, times, l_max)
}

/// Extrapolation `2R(m) − R(m/2)` of two reference runs, which cancels the
/// leading first-order error. Sampled at the centres of the `m`-cell run.
pub fn radial_reference_extrapolated(n_cells: usize, t: f64, l_max: f64) -> Result<RadialProfile> {
    if n_cells < 4 || !n_cells.is_multiple_of(2) {
        return Err(invalid(
            "extrapolated reference needs an even cell count of at least 4",
        ));
    }
    let fine = radial_reference_acoustics(n_cells, t, l_max)?;
    let coarse = radial_reference_acoustics(n_cells / 2, t, l_max)?;
    let values = fine
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| 2.0 * v - coarse.eval((k as f64 + 0.5) * fine.dr))
        .collect();
    Ok(RadialProfile {
        dr: fine.dr,
        values,
    })
}

/// Weighted error `(∫ |q − p_ref|ᵖ ρ dρ)^{1/p}` along the diagonal
/// `x₁ = x₂ ≥ 0`, by the midpoint rule over the diagonal cells.
pub fn weighted_error(q: &Grid2D, p_ref: &RadialProfile, order: u32) -> Result<f64> {
    if order == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let n = q.n();
    if n < 2 {
        return Err(invalid("need at least two cells per side"));
    }
    let dx = q.cell_width();
    let drho = std::f64::consts::SQRT_2 * dx;
    let mut sum = 0.0;
    for i in n / 2..n {
        let rho = std::f64::consts::SQRT_2 * (i - n / 2) as f64 * dx + 0.5 * drho;
        let diff = (q.get(i, i) - p_ref.eval(rho)).abs();
        sum += diff.powi(order as i32) * rho * drho;
    }
    Ok(sum.powf(1.0 / order as f64))
}
