//! Least-squares inversion of the discrete Radon transform.
//!
//! The grid is prolonged by `f = 2p` before the transform, so a sinogram of
//! size `f·n` is matched by an `n × n` grid `X` solving
//!
//! ```text
//! S B R P X = S B y
//! ```
//!
//! where `P` is prolongation, `S` restriction (block mean), `R` the forward
//! transform and `B` the scaled back-projection. Since `Pᵀ = f² S` the
//! operator is symmetric positive semidefinite, and plain conjugate
//! gradients apply. The default tolerance and iteration cap are engineering
//! choices, not tuned values.

use serde::{Deserialize, Serialize};

use crate::adrt2::{backproject, drt_forward};
use crate::error::{invalid, Error, Result};
use crate::grid::{dot, prolong, restrict, Grid2D};
use crate::sinogram::Sinogram2D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvertOptions {
    /// Prolongation factor is `2 * oversample_p`.
    pub oversample_p: usize,
    /// Relative residual `‖Ax − b‖ / ‖b‖` at which CG stops.
    pub tol: f64,
    /// Iteration cap; `None` means `10 n` for an `n × n` target.
    pub max_iter: Option<usize>,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self {
            oversample_p: 2,
            tol: 1e-8,
            max_iter: None,
        }
    }
}

impl InvertOptions {
    pub fn validate(&self) -> Result<()> {
        if self.oversample_p == 0 {
            return Err(invalid("oversample_p must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(invalid("max_iter must be at least 1"));
        }
        Ok(())
    }

    pub fn factor(&self) -> usize {
        2 * self.oversample_p
    }

    pub fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖Ax − b‖ / ‖b‖` (zero for `b = 0`).
    pub rel_residual: f64,
    pub converged: bool,
    /// Relative residual after each iteration.
    pub history: Vec<f64>,
}

/// Conjugate gradients from a zero initial guess for a symmetric positive
/// semidefinite `apply`.
pub fn cg_solve<F>(mut apply: F, b: &[f64], tol: f64, max_iter: usize) -> Result<CgResult>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let m = b.len();
    let mut x = vec![0.0; m];
    let b_norm = dot(b, b).sqrt();
    if !b_norm.is_finite() {
        return Err(Error::NumericalFailure {
            iteration: 0,
            message: "right-hand side is not finite".into(),
        });
    }
    if b_norm == 0.0 {
        return Ok(CgResult {
            x,
            iterations: 0,
            rel_residual: 0.0,
            converged: true,
            history: Vec::new(),
        });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: it,
                message: "operator produced non-finite values".into(),
            });
        }
        if pap <= 0.0 {
            // Search direction in the null space: no further progress possible.
            break;
        }
        let alpha = rs / pap;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        let rs_new = dot(&r, &r);
        if !rs_new.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: it,
                message: "residual is not finite".into(),
            });
        }
        history.push(rs_new.sqrt() / b_norm);
        if rs_new.sqrt() <= tol * b_norm {
            converged = true;
            rs = rs_new;
            break;
        }
        let beta = rs_new / rs;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rs = rs_new;
    }
    Ok(CgResult {
        x,
        iterations,
        rel_residual: rs.sqrt() / b_norm,
        converged,
        history,
    })
}

/// `S B R P x` for an `n × n` grid `x` and prolongation factor `factor`.
pub fn normal_operator(x: &Grid2D, factor: usize) -> Result<Grid2D> {
    let fine = prolong(x, factor)?;
    let back = backproject(&drt_forward(&fine), x.half_width())?;
    restrict(&back, factor)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertResult {
    pub grid: Grid2D,
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Recovers an `target_n × target_n` grid on `[−L, L]²` from a sinogram of
/// size `2p · target_n`.
pub fn invert_drt(
    sino: &Sinogram2D,
    target_n: usize,
    half_width: f64,
    opts: &InvertOptions,
) -> Result<InvertResult> {
    opts.validate()?;
    let f = opts.factor();
    if sino.n() != f * target_n {
        return Err(invalid(format!(
            "sinogram size {} does not match {} x target size {}",
            sino.n(),
            f,
            target_n
        )));
    }
    let template = Grid2D::zeros(target_n, half_width)?;
    let rhs = restrict(&backproject(sino, half_width)?, f)?;
    let res = cg_solve(
        |v| {
            let g = template.with_data(v.to_vec()).expect("shape preserved");
            normal_operator(&g, f).expect("valid factor").into_data()
        },
        rhs.data(),
        opts.tol,
        opts.max_iter_for(target_n),
    )?;
    Ok(InvertResult {
        grid: template.with_data(res.x)?,
        iterations: res.iterations,
        rel_residual: res.rel_residual,
        converged: res.converged,
        history: res.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_step() {
        let b = vec![1.0, -2.0, 3.0];
        let r = cg_solve(|v| v.to_vec(), &b, 1e-12, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert_eq!(r.x, b);
    }

    #[test]
    fn diagonal_two_by_two() {
        let r = cg_solve(|v| vec![v[0], 2.0 * v[1]], &[1.0, 2.0], 1e-12, 2).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert!((r.x[0] - 1.0).abs() < 1e-14 && (r.x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let r = cg_solve(|_| unreachable!(), &[0.0; 4], 1e-8, 5).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.x, vec![0.0; 4]);
    }

    #[test]
    fn non_finite_is_reported_with_iteration() {
        let err = cg_solve(
            |v| v.iter().map(|x| x * f64::NAN).collect(),
            &[1.0],
            1e-8,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { iteration: 1, .. }));
    }

    #[test]
    fn options_validation() {
        assert!(InvertOptions {
            tol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(InvertOptions {
            oversample_p: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_eq!(InvertOptions::default().max_iter_for(64), 640);
    }

    #[test]
    fn size_mismatch() {
        let s = Sinogram2D::zeros(8).unwrap();
        assert!(invert_drt(&s, 4, 1.0, &InvertOptions::default()).is_err());
        let g = invert_drt(&s, 2, 1.0, &InvertOptions::default()).unwrap();
        assert_eq!(g.iterations, 0);
        assert!(g.grid.data().iter().all(|&v| v == 0.0));
    }
}
