use nalgebra::DMatrix;

use crate::framecore::Plane;

pub(crate) fn to_matrix(m: &Plane) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.height(), m.width(), m.data())
}

pub(crate) fn from_matrix(m: &DMatrix<f64>) -> Plane {
    Plane::from_fn(m.ncols(), m.nrows(), |x, y| m[(y, x)])
}

/// Forward differences with a zero difference at the last column and row.
pub(crate) fn gradient(x: &Plane) -> (Plane, Plane) {
    let (w, h) = (x.width(), x.height());
    let gx = Plane::from_fn(w, h, |i, j| if i + 1 < w { x.get(i + 1, j) - x.get(i, j) } else { 0.0 });
    let gy = Plane::from_fn(w, h, |i, j| if j + 1 < h { x.get(i, j + 1) - x.get(i, j) } else { 0.0 });
    (gx, gy)
}

/// Adjoint of [`gradient`].
pub(crate) fn gradient_adjoint(px: &Plane, py: &Plane) -> Plane {
    let (w, h) = (px.width(), px.height());
    Plane::from_fn(w, h, |i, j| {
        let mut v = 0.0;
        if i + 1 < w {
            v -= px.get(i, j);
        }
        if i > 0 {
            v += px.get(i - 1, j);
        }
        if j + 1 < h {
            v -= py.get(i, j);
        }
        if j > 0 {
            v += py.get(i, j - 1);
        }
        v
    })
}

/// Isotropic total variation.
pub fn total_variation(image: &Plane) -> f64 {
    let (gx, gy) = gradient(image);
    gx.data().iter().zip(gy.data()).map(|(a, b)| a.hypot(*b)).sum()
}

pub fn frobenius_sq(m: &Plane) -> f64 {
    m.data().iter().map(|v| v * v).sum()
}

pub fn l1_norm(m: &Plane) -> f64 {
    m.data().iter().map(|v| v.abs()).sum()
}

/// Sum of singular values.
pub fn nuclear_norm(m: &Plane) -> f64 {
    if m.data().is_empty() {
        return 0.0;
    }
    to_matrix(m).singular_values().iter().sum()
}
