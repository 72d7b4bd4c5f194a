use nalgebra::DMatrix;

use super::norms::{from_matrix, gradient, gradient_adjoint, to_matrix};
use super::DecomposeError;
use crate::framecore::Plane;

pub fn soft_threshold(x: f64, tau: f64) -> Result<f64, DecomposeError> {
    check_tau(tau)?;
    Ok(shrink(x, tau))
}

/// Element-wise [`soft_threshold`].
pub fn soft_threshold_plane(m: &Plane, tau: f64) -> Result<Plane, DecomposeError> {
    check_tau(tau)?;
    Ok(m.map(|x| shrink(x, tau)))
}

#[inline]
fn shrink(x: f64, tau: f64) -> f64 {
    x.signum() * (x.abs() - tau).max(0.0)
}

fn check_tau(tau: f64) -> Result<(), DecomposeError> {
    if tau >= 0.0 {
        Ok(())
    } else {
        Err(DecomposeError::Parameter(format!("threshold must be >= 0, got {tau}")))
    }
}

/// Singular value thresholding: the proximal map of `tau * nuclear_norm`.
pub fn svt(m: &Plane, tau: f64) -> Result<Plane, DecomposeError> {
    check_tau(tau)?;
    if m.data().is_empty() {
        return Ok(m.clone());
    }
    let svd = to_matrix(m).svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let s = DMatrix::from_diagonal(&svd.singular_values.map(|s| (s - tau).max(0.0)));
    Ok(from_matrix(&(u * s * vt)))
}

/// Proximal map of `lambda * TV` by a fixed number of accelerated projected
/// gradient steps on the dual. The dual variable persists between calls so
/// repeated solves on slowly changing inputs start warm.
#[derive(Debug, Clone)]
pub struct TvProx {
    qx: Plane,
    qy: Plane,
    iters: usize,
}

impl TvProx {
    pub fn new(width: usize, height: usize, iters: usize) -> Self {
        Self {
            qx: Plane::zeros(width, height),
            qy: Plane::zeros(width, height),
            iters,
        }
    }

    pub fn apply(&mut self, v: &Plane, lambda: f64) -> Plane {
        if lambda <= 0.0 {
            return v.clone();
        }
        // the squared norm of the gradient operator is at most 8
        let step = 1.0 / 8.0;
        let project = |qx: &mut Plane, qy: &mut Plane| {
            for (a, b) in qx.data_mut().iter_mut().zip(qy.data_mut().iter_mut()) {
                let n = a.hypot(*b);
                if n > lambda {
                    let s = lambda / n;
                    *a *= s;
                    *b *= s;
                }
            }
        };
        // rescale a warm start in case lambda changed between calls
        project(&mut self.qx, &mut self.qy);
        let (mut sx, mut sy) = (self.qx.clone(), self.qy.clone());
        let mut t = 1.0f64;
        for _ in 0..self.iters {
            let x = v.zip_map(&gradient_adjoint(&sx, &sy), |a, b| a - b);
            let (gx, gy) = gradient(&x);
            let mut nx = sx.zip_map(&gx, |a, b| a + step * b);
            let mut ny = sy.zip_map(&gy, |a, b| a + step * b);
            project(&mut nx, &mut ny);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let m = (t - 1.0) / t_next;
            sx = nx.zip_map(&self.qx, |a, b| a + m * (a - b));
            sy = ny.zip_map(&self.qy, |a, b| a + m * (a - b));
            self.qx = nx;
            self.qy = ny;
            t = t_next;
        }
        v.zip_map(&gradient_adjoint(&self.qx, &self.qy), |a, b| a - b)
    }
}
