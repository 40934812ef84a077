use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::grid::dot;
use crate::hypersolve::{shift_slice, BoundarySpec};

/// Shift with zero inflow, the operator every fit in this module uses.
pub(crate) fn shift(v: &[f64], dh: f64) -> Vec<f64> {
    shift_slice(v, dh, BoundarySpec::Zero)
}

/// `c[δ + len − 1] = Σₓ a[x] b[x − δ]` for `δ ∈ [−(len−1), len−1]`.
pub(crate) fn cross_correlation(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    if len == 0 {
        return Vec::new();
    }
    let m = (2 * len - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let pad = |v: &[f64]| {
        let mut out = vec![Complex::new(0.0, 0.0); m];
        for (o, &x) in out.iter_mut().zip(v) {
            o.re = x;
        }
        out
    };
    let (mut fa, mut fb) = (pad(a), pad(b));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut prod: Vec<Complex<f64>> = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect();
    inv.process(&mut prod);
    let scale = 1.0 / m as f64;
    (-(len as i64 - 1)..len as i64)
        .map(|d| prod[d.rem_euclid(m as i64) as usize].re * scale)
        .collect()
}

/// `e[δ + len − 1] = Σ b[x − δ]²` over the `x` that stay inside.
pub(crate) fn shifted_energy(b: &[f64]) -> Vec<f64> {
    let len = b.len() as i64;
    let mut prefix = vec![0.0; b.len() + 1];
    for (k, x) in b.iter().enumerate() {
        prefix[k + 1] = prefix[k] + x * x;
    }
    (-(len - 1)..len)
        .map(|d| {
            let lo = (-d).max(0) as usize;
            let hi = (len - d).min(len) as usize;
            prefix[hi] - prefix[lo]
        })
        .collect()
}

/// Vertex offset of the parabola through `(−1, em)`, `(0, e0)`, `(1, ep)`
/// for a minimum, clamped to half a cell. Offsets below `1e-9` are rounding
/// noise and count as zero.
pub(crate) fn parabola_offset(em: f64, e0: f64, ep: f64) -> f64 {
    let curv = em - 2.0 * e0 + ep;
    if !(curv > 0.0) {
        return 0.0;
    }
    let off = (0.5 * (em - ep) / curv).clamp(-0.5, 0.5);
    if off.abs() < 1e-9 {
        0.0
    } else {
        off
    }
}

/// Misfit of profiles extended by zero beyond the window, so that shifting
/// `φ₁` out of view does not remove it.
fn misfit(phi1: &[f64], phi2: &[f64], d: f64) -> f64 {
    let len = phi1.len();
    let pad = |v: &[f64]| {
        let mut out = vec![0.0; 3 * len];
        out[len..2 * len].copy_from_slice(v);
        out
    };
    let (a, b) = (pad(phi1), pad(phi2));
    shift(&a, d)
        .iter()
        .zip(&b)
        .map(|(x, y)| (y - x).powi(2))
        .sum()
}

/// Shift `τ*` in cells minimising `‖φ₂ − φ₁(· − τ)‖₂`, both profiles taken
/// as zero outside the window.
///
/// Every integer shift is scored through one FFT correlation; the best one
/// (ties go to the smaller `|τ|`) is refined by a parabola through its
/// neighbours' misfits.
///
/// ```
/// # use radsplit::dispinterp::template_fit;
/// let phi1 = [0.0, 1.0, 2.0, 1.0, 0.0, 0.0, 0.0];
/// let phi2 = [0.0, 0.0, 0.0, 1.0, 2.0, 1.0, 0.0];
/// assert_eq!(template_fit(&phi1, &phi2).unwrap(), 2.0);
/// ```
pub fn template_fit(phi1: &[f64], phi2: &[f64]) -> Result<f64> {
    if phi1.len() != phi2.len() {
        return Err(invalid(format!(
            "length mismatch: {} vs {}",
            phi1.len(),
            phi2.len()
        )));
    }
    if phi1.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateInput(
            "template is identically zero".into(),
        ));
    }
    if phi1.iter().chain(phi2).any(|x| !x.is_finite()) {
        return Err(invalid("profiles contain non-finite values"));
    }
    let len = phi1.len() as i64;
    let corr = cross_correlation(phi2, phi1);
    let scale = dot(phi2, phi2) + dot(phi1, phi1);
    let err = |d: i64| scale - 2.0 * corr[(d + len - 1) as usize];
    let mut best = 0i64;
    let mut best_err = err(0);
    for mag in 1..len {
        for d in [-mag, mag] {
            let e = err(d);
            if e < best_err - 1e-12 * scale {
                best = d;
                best_err = e;
            }
        }
    }
    let d = best as f64;
    let e0 = misfit(phi1, phi2, d);
    let off = parabola_offset(misfit(phi1, phi2, d - 1.0), e0, misfit(phi1, phi2, d + 1.0));
    Ok(d + off)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_matches_direct_sum() {
        let a = [1.0, -2.0, 0.5, 3.0, 0.0];
        let b = [0.25, 1.0, 4.0, -1.0, 2.0];
        let c = cross_correlation(&a, &b);
        let e = shifted_energy(&b);
        for d in -4i64..=4 {
            let mut s = 0.0;
            let mut en = 0.0;
            for x in 0..5i64 {
                let j = x - d;
                if (0..5).contains(&j) {
                    s += a[x as usize] * b[j as usize];
                    en += b[j as usize].powi(2);
                }
            }
            assert!((c[(d + 4) as usize] - s).abs() < 1e-12);
            assert!((e[(d + 4) as usize] - en).abs() < 1e-12);
        }
    }

    #[test]
    fn parabola_vertex() {
        // e(x) = (x − 0.25)²
        let f = |x: f64| (x - 0.25).powi(2);
        assert!((parabola_offset(f(-1.0), f(0.0), f(1.0)) - 0.25).abs() < 1e-15);
        assert_eq!(parabola_offset(1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn ties_prefer_small_shifts() {
        // Shifting a single spike by ±2 gives the same misfit.
        let phi1 = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let phi2 = [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(template_fit(&phi1, &phi2).unwrap().abs(), 2.0);
    }
}
