use std::io::Write;

use serde::{Deserialize, Serialize};

use super::norms::{frobenius_sq, l1_norm, nuclear_norm, total_variation};
use super::prox::{soft_threshold_plane, svt, TvProx};
use super::DecomposeError;
use crate::framecore::{Frame, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RainPrior {
    L1,
    FrobeniusSq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BgPrior {
    Tv,
    Nuclear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecompositionConfig {
    pub rain_prior: RainPrior,
    pub bg_prior: BgPrior,
    pub lambda_rain: f64,
    pub lambda_bg: f64,
    pub rho: f64,
    pub max_iter: usize,
    /// Relative primal residual at which the solver stops.
    pub tol: f64,
    pub nonneg_rain: bool,
    pub tv_inner_iters: usize,
    /// Over-relaxation factor in `(0, 2)`; 1 is plain ADMM.
    pub relaxation: f64,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            rain_prior: RainPrior::L1,
            bg_prior: BgPrior::Tv,
            lambda_rain: 0.1,
            lambda_bg: 1.0,
            rho: 1.0,
            max_iter: 500,
            tol: 1e-6,
            nonneg_rain: true,
            tv_inner_iters: 20,
            relaxation: 1.6,
        }
    }
}

impl DecompositionConfig {
    pub fn validate(&self) -> Result<(), DecomposeError> {
        let bad = |m: &str| Err(DecomposeError::Parameter(m.to_string()));
        if !(self.lambda_rain >= 0.0 && self.lambda_bg >= 0.0) || !self.lambda_rain.is_finite() || !self.lambda_bg.is_finite() {
            return bad("weights must be finite and >= 0");
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return bad("rho must be > 0");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be > 0");
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return bad("relaxation must lie in (0, 2)");
        }
        if self.max_iter == 0 || self.tv_inner_iters == 0 {
            return bad("iteration counts must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub background: Plane,
    pub rain: Plane,
    pub iterations: usize,
    pub converged: bool,
    /// `||I - B - R|| / ||I||` after each iteration.
    pub residual_trace: Vec<f64>,
    pub objective_trace: Vec<f64>,
}

impl DecompositionResult {
    /// The background as a frame, clamped into the sample range.
    pub fn background_frame(&self) -> Result<Frame, DecomposeError> {
        Ok(self.background.to_frame()?)
    }

    pub fn rain_frame(&self) -> Result<Frame, DecomposeError> {
        Ok(self.rain.to_frame()?)
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<(), DecomposeError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "residual", "objective"])?;
        for (i, (r, o)) in self.residual_trace.iter().zip(&self.objective_trace).enumerate() {
            w.write_record([(i + 1).to_string(), format!("{r:e}"), format!("{o:e}")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn objective(cfg: &DecompositionConfig, b: &Plane, r: &Plane) -> f64 {
    let pb = match cfg.bg_prior {
        BgPrior::Tv => total_variation(b),
        BgPrior::Nuclear => nuclear_norm(b),
    };
    let pr = match cfg.rain_prior {
        RainPrior::L1 => l1_norm(r),
        RainPrior::FrobeniusSq => frobenius_sq(r),
    };
    cfg.lambda_bg * pb + cfg.lambda_rain * pr
}

/// Splits a luma frame into background and rain layers.
pub fn admm_decompose(image: &Frame, cfg: &DecompositionConfig) -> Result<DecompositionResult, DecomposeError> {
    decompose_plane(&Plane::try_from(image)?, cfg)
}

/// Scaled-form ADMM on `min lambda_bg P(B) + lambda_rain Q(R)` subject to
/// `B + R = I`, with an optional nonnegativity constraint on `R`.
///
/// The `B` iterate is over-relaxed before the `R` and dual updates.
/// Convergence requires both the primal residual and the scaled change in
/// `R` to fall below `tol` relative to `||I||`.
pub fn decompose_plane(image: &Plane, cfg: &DecompositionConfig) -> Result<DecompositionResult, DecomposeError> {
    cfg.validate()?;
    if let Some(v) = image.data().iter().find(|v| !v.is_finite()) {
        return Err(DecomposeError::Data(format!("non-finite input sample {v}")));
    }
    let (w, h) = (image.width(), image.height());
    let scale = image.norm_fro().max(f64::MIN_POSITIVE);
    let mut b = image.clone();
    let mut r = Plane::zeros(w, h);
    let mut u = Plane::zeros(w, h);
    let mut tv = TvProx::new(w, h, cfg.tv_inner_iters);
    let mut residual_trace = Vec::new();
    let mut objective_trace = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iter {
        let v = image.zip_map(&r, |i, r| i - r).zip_map(&u, |a, u| a - u);
        b = match cfg.bg_prior {
            BgPrior::Tv => tv.apply(&v, cfg.lambda_bg / cfg.rho),
            BgPrior::Nuclear => svt(&v, cfg.lambda_bg / cfg.rho)?,
        };
        let a = cfg.relaxation;
        let b_hat = b.zip_map(&r, |b, r| a * b - (1.0 - a) * r).zip_map(image, |s, i| s + (1.0 - a) * i);
        let v = image.zip_map(&b_hat, |i, b| i - b).zip_map(&u, |a, u| a - u);
        let mut r_next = match cfg.rain_prior {
            RainPrior::L1 => soft_threshold_plane(&v, cfg.lambda_rain / cfg.rho)?,
            RainPrior::FrobeniusSq => v.scale(1.0 / (1.0 + 2.0 * cfg.lambda_rain / cfg.rho)),
        };
        if cfg.nonneg_rain {
            r_next = r_next.map(|x| x.max(0.0));
        }
        let dual = cfg.rho * r_next.zip_map(&r, |a, b| a - b).norm_fro() / scale;
        r = r_next;
        u = u
            .zip_map(&b_hat, |u, b| u + b)
            .zip_map(&r, |u, r| u + r)
            .zip_map(image, |u, i| u - i);
        let gap = b.zip_map(&r, |b, r| b + r).zip_map(image, |s, i| s - i);
        let primal = gap.norm_fro() / scale;
        residual_trace.push(primal);
        objective_trace.push(objective(cfg, &b, &r));
        if primal <= cfg.tol && dual <= cfg.tol {
            converged = true;
            break;
        }
    }
    log::debug!(
        "admm: {} iterations, residual {:e}, converged {converged}",
        residual_trace.len(),
        residual_trace.last().copied().unwrap_or(0.0)
    );
    Ok(DecompositionResult {
        background: b,
        rain: r,
        iterations: residual_trace.len(),
        converged,
        residual_trace,
        objective_trace,
    })
}
