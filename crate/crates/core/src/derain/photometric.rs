use super::DerainError;
use crate::framecore::{BinaryMask, ColorMode, Frame, Plane};

/// Pixels that brighten by at least `c` against both temporal neighbours,
/// by amounts that agree to within `eps`.
pub fn photometric_candidates(
    prev: &Frame,
    cur: &Frame,
    next: &Frame,
    c: f64,
    eps: f64,
) -> Result<BinaryMask, DerainError> {
    for f in [prev, cur, next] {
        f.ensure_mode(ColorMode::Luma)?;
    }
    cur.ensure_same_shape(prev)?;
    cur.ensure_same_shape(next)?;
    let bits = cur
        .samples()
        .iter()
        .zip(prev.samples())
        .zip(next.samples())
        .map(|((&i, &p), &n)| {
            let (dp, dn) = (i - p, i - n);
            dp >= c && dn >= c && (dp - dn).abs() <= eps
        })
        .collect();
    Ok(BinaryMask::from_bits(cur.width(), cur.height(), bits)?)
}

/// Per-pixel temporal mean `(prev + next) / 2` of a luma pair, and the
/// brightening `cur - mean`.
pub fn background_and_delta(prev: &Frame, cur: &Frame, next: &Frame) -> Result<(Plane, Plane), DerainError> {
    for f in [prev, cur, next] {
        f.ensure_mode(ColorMode::Luma)?;
    }
    cur.ensure_same_shape(prev)?;
    cur.ensure_same_shape(next)?;
    let (w, h) = (cur.width(), cur.height());
    let bg: Vec<f64> = prev
        .samples()
        .iter()
        .zip(next.samples())
        .map(|(&p, &n)| 0.5 * (p + n))
        .collect();
    let delta = cur.samples().iter().zip(&bg).map(|(&i, &b)| i - b).collect();
    Ok((Plane::from_vec(w, h, bg)?, Plane::from_vec(w, h, delta)?))
}

/// Drops candidates whose three colour channels brighten by unequal amounts.
pub fn chromatic_filter(
    candidates: &BinaryMask,
    prev: &Frame,
    cur: &Frame,
    next: &Frame,
    tol: f64,
) -> Result<BinaryMask, DerainError> {
    for f in [prev, cur, next] {
        f.ensure_mode(ColorMode::Rgb)?;
    }
    cur.ensure_same_shape(prev)?;
    cur.ensure_same_shape(next)?;
    let mut out = candidates.clone();
    for i in 0..cur.pixel_count() {
        if !candidates.get_index(i) {
            continue;
        }
        let (p, c, n) = (prev.pixel(i), cur.pixel(i), next.pixel(i));
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..3 {
            let d = c[k] - 0.5 * (p[k] + n[k]);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if hi - lo > tol {
            out.set_index(i, false);
        }
    }
    Ok(out)
}

/// Replaces masked pixels with the temporal mean of their neighbours.
pub fn inpaint_temporal_mean(
    cur: &Frame,
    prev: &Frame,
    next: &Frame,
    confirmed: &BinaryMask,
) -> Result<Frame, DerainError> {
    cur.ensure_same_shape(prev)?;
    cur.ensure_same_shape(next)?;
    let ch = cur.channels();
    let mut samples = cur.samples().to_vec();
    for (i, px) in samples.chunks_exact_mut(ch).enumerate() {
        if confirmed.get_index(i) {
            let (p, n) = (prev.pixel(i), next.pixel(i));
            for k in 0..ch {
                px[k] = 0.5 * (p[k] + n[k]);
            }
        }
    }
    Ok(Frame::from_clamped(cur.width(), cur.height(), cur.mode(), samples))
}
