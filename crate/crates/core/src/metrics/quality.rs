use super::MetricsError;
use crate::framecore::{ColorMode, Frame, SAMPLE_MAX};

/// Mean squared error over all samples.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64, MetricsError> {
    a.ensure_same_shape(b)?;
    let n = a.samples().len();
    if n == 0 {
        return Err(MetricsError::Parameter("empty frame".into()));
    }
    let s: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).powi(2)).sum();
    Ok(s / n as f64)
}

/// Infinite for a zero error.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

pub fn psnr(a: &Frame, b: &Frame) -> Result<f64, MetricsError> {
    Ok(psnr_from_mse(mse(a, b)?, SAMPLE_MAX))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub window: usize,
    pub sigma: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            k1: 0.01,
            k2: 0.03,
            dynamic_range: SAMPLE_MAX,
            window: 11,
            sigma: 1.5,
        }
    }
}

fn gaussian(n: usize, sigma: f64) -> Vec<f64> {
    let mid = (n as f64 - 1.0) / 2.0;
    let g: Vec<f64> = (0..n).map(|i| (-(i as f64 - mid).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

// Separable weighted sums over every fully contained window.
fn filter_valid(data: &[f64], w: usize, h: usize, k: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..n).map(|i| k[i] * data[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..n).map(|i| k[i] * rows[(y + i) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

pub fn ssim(a: &Frame, b: &Frame) -> Result<f64, MetricsError> {
    ssim_with(a, b, &SsimParams::default())
}

/// Mean structural similarity of two luma frames over all valid windows.
pub fn ssim_with(a: &Frame, b: &Frame, p: &SsimParams) -> Result<f64, MetricsError> {
    a.ensure_mode(ColorMode::Luma)?;
    a.ensure_same_shape(b)?;
    let (w, h) = (a.width(), a.height());
    if p.window == 0 || w < p.window || h < p.window {
        return Err(MetricsError::Parameter(format!(
            "{w}x{h} frame is smaller than the {0}x{0} window",
            p.window
        )));
    }
    let k = gaussian(p.window, p.sigma);
    let (xa, xb) = (a.samples(), b.samples());
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> { xa.iter().zip(xb).map(|(&u, &v)| f(u, v)).collect() };
    let (mu_a, _, _) = filter_valid(xa, w, h, &k);
    let (mu_b, _, _) = filter_valid(xb, w, h, &k);
    let (saa, _, _) = filter_valid(&prod(&|u, _| u * u), w, h, &k);
    let (sbb, _, _) = filter_valid(&prod(&|_, v| v * v), w, h, &k);
    let (sab, _, _) = filter_valid(&prod(&|u, v| u * v), w, h, &k);
    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = saa[i] - ma * ma;
            let vb = sbb[i] - mb * mb;
            let cov = sab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn luma(w: usize, h: usize, v: &[f64]) -> Frame {
        Frame::new(w, h, ColorMode::Luma, v.to_vec()).unwrap()
    }

    #[test]
    fn psnr_cases() {
        let a = Frame::filled(4, 4, ColorMode::Rgb, 0.0).unwrap();
        let b = Frame::filled(4, 4, ColorMode::Rgb, 255.0).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert!(psnr(&a, &b).unwrap().abs() < 1e-12);
        assert!((psnr_from_mse(255.0 * 255.0 / 100.0, 255.0) - 20.0).abs() < 1e-12);
        let c = Frame::filled(4, 4, ColorMode::Rgb, 25.5).unwrap();
        assert!((psnr(&a, &c).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&a, &Frame::filled(4, 4, ColorMode::Luma, 0.0).unwrap()).is_err());
    }

    #[test]
    fn ssim_constant_pair() {
        let a = Frame::filled(16, 16, ColorMode::Luma, 100.0).unwrap();
        let b = Frame::filled(16, 16, ColorMode::Luma, 150.0).unwrap();
        let want = (2.0 * 100.0 * 150.0 + 6.5025) / (100.0f64.powi(2) + 150.0f64.powi(2) + 6.5025);
        assert!((ssim(&a, &b).unwrap() - want).abs() < 1e-12);
        assert!((ssim(&a, &b).unwrap() - 0.9231).abs() < 1e-4);
    }

    #[test]
    fn ssim_errors() {
        let a = Frame::filled(10, 20, ColorMode::Luma, 1.0).unwrap();
        assert!(matches!(ssim(&a, &a), Err(MetricsError::Parameter(_))));
        let rgb = Frame::filled(12, 12, ColorMode::Rgb, 1.0).unwrap();
        assert!(ssim(&rgb, &rgb).is_err());
    }

    // Direct per-window evaluation with a non-separable kernel.
    fn oracle_ssim(a: &Frame, b: &Frame) -> f64 {
        let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
        let mut kernel = [[0.0f64; 11]; 11];
        let mut ks = 0.0;
        for (i, row) in kernel.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let r2 = (i as f64 - 5.0).powi(2) + (j as f64 - 5.0).powi(2);
                *v = (-r2 / 4.5).exp();
                ks += *v;
            }
        }
        let mut total = 0.0;
        let mut count = 0;
        for y0 in 0..=a.height() - 11 {
            for x0 in 0..=a.width() - 11 {
                let (mut ma, mut mb) = (0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let wgt = kernel[i][j] / ks;
                        ma += wgt * a.get(x0 + j, y0 + i, 0);
                        mb += wgt * b.get(x0 + j, y0 + i, 0);
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let wgt = kernel[i][j] / ks;
                        let (da, db) = (a.get(x0 + j, y0 + i, 0) - ma, b.get(x0 + j, y0 + i, 0) - mb);
                        va += wgt * da * da;
                        vb += wgt * db * db;
                        cov += wgt * da * db;
                    }
                }
                total += (2.0 * ma * mb + c1) * (2.0 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        total / count as f64
    }

    proptest! {
        #[test]
        fn ssim_properties(
            va in prop::collection::vec(0.0f64..=255.0, 14 * 13),
            vb in prop::collection::vec(0.0f64..=255.0, 14 * 13),
        ) {
            let (a, b) = (luma(14, 13, &va), luma(14, 13, &vb));
            prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
            let ab = ssim(&a, &b).unwrap();
            prop_assert!((ab - ssim(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
            prop_assert!((ab - oracle_ssim(&a, &b)).abs() < 1e-9);
        }

        #[test]
        fn psnr_symmetric_and_decreasing(
            noise in prop::collection::vec(-1.0f64..1.0, 64),
            amp in 1.0f64..60.0,
        ) {
            prop_assume!(noise.iter().any(|n| n.abs() > 1e-3));
            let base = Frame::filled(8, 8, ColorMode::Luma, 128.0).unwrap();
            let noisy = |k: f64| luma(8, 8, &noise.iter().map(|n| 128.0 + k * n).collect::<Vec<_>>());
            let (n1, n2) = (noisy(amp), noisy(amp * 1.1));
            prop_assert_eq!(psnr(&base, &n1).unwrap(), psnr(&n1, &base).unwrap());
            prop_assert!(psnr(&base, &n2).unwrap() < psnr(&base, &n1).unwrap());
            prop_assert!(psnr(&base, &n1).unwrap() < psnr(&base, &base).unwrap());
        }
    }
}
