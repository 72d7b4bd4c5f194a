use serde::{Deserialize, Serialize};

use super::PhysicsError;
use crate::framecore::{Frame, SAMPLE_MAX};

/// Liquid-water equivalent of one unit of snow accumulation.
pub const SNOW_TO_RAIN_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precipitation {
    Rain,
    Snow,
}

/// Power-law extinction `A * rate^B`. Published coefficient sets are left to
/// the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionModel {
    pub a: f64,
    pub b: f64,
    pub kind: Precipitation,
}

impl ExtinctionModel {
    pub fn new(a: f64, b: f64, kind: Precipitation) -> Result<Self, PhysicsError> {
        if !(a.is_finite() && a >= 0.0) || !b.is_finite() {
            return Err(PhysicsError::Domain(format!(
                "extinction coefficients must be finite with A >= 0, got A={a}, B={b}"
            )));
        }
        Ok(Self { a, b, kind })
    }

    pub fn rain(a: f64, b: f64) -> Result<Self, PhysicsError> {
        Self::new(a, b, Precipitation::Rain)
    }

    pub fn snow(a: f64, b: f64) -> Result<Self, PhysicsError> {
        Self::new(a, b, Precipitation::Snow)
    }

    /// Extinction for this model's precipitation kind.
    pub fn extinction(&self, rate: f64) -> Result<f64, PhysicsError> {
        match self.kind {
            Precipitation::Rain => rain_extinction(self, rate),
            Precipitation::Snow => snow_extinction(self, rate),
        }
    }
}

fn check_rate(rate: f64) -> Result<(), PhysicsError> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(PhysicsError::Domain(format!(
            "precipitation rate must be finite and >= 0, got {rate}"
        )));
    }
    Ok(())
}

fn check_kind(model: &ExtinctionModel, kind: Precipitation) -> Result<(), PhysicsError> {
    if model.kind != kind {
        return Err(PhysicsError::Domain(format!(
            "{:?} model used for {:?} extinction",
            model.kind, kind
        )));
    }
    Ok(())
}

/// Rain extinction coefficient `A * R^B` for a rain rate in mm/hr.
pub fn rain_extinction(model: &ExtinctionModel, rate: f64) -> Result<f64, PhysicsError> {
    check_kind(model, Precipitation::Rain)?;
    check_rate(rate)?;
    Ok(model.a * rate.powf(model.b))
}

/// Snow extinction `A * (1/10)^B * S^B` for an accumulation rate in mm/hr.
pub fn snow_extinction(model: &ExtinctionModel, rate: f64) -> Result<f64, PhysicsError> {
    check_kind(model, Precipitation::Snow)?;
    check_rate(rate)?;
    Ok(model.a * SNOW_TO_RAIN_RATIO.powf(model.b) * rate.powf(model.b))
}

/// Beer–Lambert haze: `I * t + airlight * (1 - t)` with `t = exp(-beta * depth)`.
pub fn attenuate(frame: &Frame, beta: f64, depth: f64, airlight: f64) -> Result<Frame, PhysicsError> {
    if !(beta >= 0.0) || !(depth >= 0.0) {
        return Err(PhysicsError::Domain(format!(
            "beta and depth must be >= 0, got beta={beta}, depth={depth}"
        )));
    }
    if !(0.0..=SAMPLE_MAX).contains(&airlight) {
        return Err(PhysicsError::Domain(format!("airlight {airlight} outside [0, 255]")));
    }
    let optical_depth = beta * depth;
    if optical_depth.is_nan() {
        return Err(PhysicsError::Domain("beta * depth is undefined".into()));
    }
    let t = (-optical_depth).exp();
    let samples = frame
        .samples()
        .iter()
        .map(|&s| s * t + airlight * (1.0 - t))
        .collect();
    Ok(Frame::from_clamped(frame.width(), frame.height(), frame.mode(), samples))
}
