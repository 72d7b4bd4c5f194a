use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SegmentError;
use crate::framecore::{BinaryMask, Frame, FrameError, FrameSequence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MogParams {
    /// Maximum components per pixel.
    pub k: usize,
    pub alpha: f64,
    /// Weight fraction of the mixture treated as background.
    pub t_bg: f64,
    /// Match distance in standard deviations.
    pub lambda_match: f64,
    pub var_init: f64,
    pub var_min: f64,
    /// Complexity-reduction prior; `None` means `0.05 * alpha`.
    pub c_t: Option<f64>,
    /// Leading frames excluded from scoring.
    pub burn_in: usize,
}

impl Default for MogParams {
    fn default() -> Self {
        Self {
            k: 5,
            alpha: 0.005,
            t_bg: 0.9,
            lambda_match: 2.5,
            var_init: 225.0,
            var_min: 4.0,
            c_t: None,
            burn_in: 100,
        }
    }
}

impl MogParams {
    pub fn c_t(&self) -> f64 {
        self.c_t.unwrap_or(0.05 * self.alpha)
    }

    pub fn validate(&self) -> Result<(), SegmentError> {
        let bad = |m: &str| Err(SegmentError::Parameter(m.to_string()));
        if self.k == 0 || self.k > u8::MAX as usize {
            return bad("k must lie in 1..=255");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.t_bg > 0.0 && self.t_bg < 1.0) {
            return bad("t_bg must lie in (0, 1)");
        }
        if !(self.lambda_match > 0.0) {
            return bad("lambda_match must be > 0");
        }
        if !(self.var_min > 0.0 && self.var_init >= self.var_min) {
            return bad("need 0 < var_min <= var_init");
        }
        if !(self.c_t() >= 0.0) {
            return bad("c_t must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MogComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: f64,
}

/// Per-pixel mixtures stored as fixed-capacity slots, strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct MogModel {
    width: usize,
    height: usize,
    channels: usize,
    k: usize,
    counts: Vec<u8>,
    weights: Vec<f64>,
    means: Vec<f64>,
    vars: Vec<f64>,
}

impl MogModel {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn components(&self, x: usize, y: usize) -> Vec<MogComponent> {
        let p = y * self.width + x;
        let (k, ch) = (self.k, self.channels);
        (0..self.counts[p] as usize)
            .map(|j| MogComponent {
                weight: self.weights[p * k + j],
                mean: self.means[(p * k + j) * ch..(p * k + j + 1) * ch].to_vec(),
                variance: self.vars[p * k + j],
            })
            .collect()
    }
}

pub fn mog_init(first: &Frame, params: &MogParams) -> Result<MogModel, SegmentError> {
    params.validate()?;
    let (n, ch, k) = (first.pixel_count(), first.channels(), params.k);
    let mut weights = vec![0.0; n * k];
    let mut means = vec![0.0; n * k * ch];
    let mut vars = vec![0.0; n * k];
    for p in 0..n {
        weights[p * k] = 1.0;
        vars[p * k] = params.var_init;
        means[p * k * ch..p * k * ch + ch].copy_from_slice(first.pixel(p));
    }
    Ok(MogModel {
        width: first.width(),
        height: first.height(),
        channels: ch,
        k,
        counts: vec![1; n],
        weights,
        means,
        vars,
    })
}

struct PixelSlots<'a> {
    count: &'a mut u8,
    w: &'a mut [f64],
    mu: &'a mut [f64],
    var: &'a mut [f64],
}

impl PixelSlots<'_> {
    fn swap(&mut self, a: usize, b: usize, ch: usize) {
        self.w.swap(a, b);
        self.var.swap(a, b);
        for c in 0..ch {
            self.mu.swap(a * ch + c, b * ch + c);
        }
    }

    fn remove(&mut self, j: usize, ch: usize) {
        let n = *self.count as usize;
        for i in j..n - 1 {
            self.swap(i, i + 1, ch);
        }
        *self.count -= 1;
    }

    /// Returns whether the sample is foreground.
    fn update(&mut self, x: &[f64], p: &MogParams) -> bool {
        let ch = x.len();
        let n = *self.count as usize;
        let lambda2 = p.lambda_match * p.lambda_match;

        let dist2 = |j: usize, mu: &[f64]| {
            (0..ch).map(|c| (x[c] - mu[j * ch + c]).powi(2)).sum::<f64>() / ch as f64
        };
        let matched = (0..n).find(|&j| dist2(j, self.mu) <= lambda2 * self.var[j]);

        // background set from the weights before this update
        let mut cum = 0.0;
        let mut bg_count = n;
        for j in 0..n {
            cum += self.w[j];
            if cum >= p.t_bg {
                bg_count = j + 1;
                break;
            }
        }
        let foreground = !matched.is_some_and(|j| j < bg_count);

        let (alpha, decay) = (p.alpha, p.alpha * p.c_t());
        for j in 0..n {
            let o = if Some(j) == matched { 1.0 } else { 0.0 };
            self.w[j] += alpha * (o - self.w[j]) - decay;
        }
        if let Some(j) = matched {
            let rho = (alpha / self.w[j].max(f64::MIN_POSITIVE)).min(1.0);
            let d2 = dist2(j, self.mu);
            for c in 0..ch {
                self.mu[j * ch + c] += rho * (x[c] - self.mu[j * ch + c]);
            }
            self.var[j] = (self.var[j] + rho * (d2 - self.var[j])).max(p.var_min);
        }
        let mut j = 0;
        while j < *self.count as usize {
            if self.w[j] <= 0.0 {
                self.remove(j, ch);
            } else {
                j += 1;
            }
        }
        if matched.is_none() {
            let n = *self.count as usize;
            let slot = if n < p.k {
                *self.count += 1;
                n
            } else {
                // the list is sorted, so the weakest is last
                n - 1
            };
            self.w[slot] = alpha;
            self.var[slot] = p.var_init;
            self.mu[slot * ch..(slot + 1) * ch].copy_from_slice(x);
        }
        let n = *self.count as usize;
        let total: f64 = self.w[..n].iter().sum();
        for w in &mut self.w[..n] {
            *w /= total;
        }
        // stable insertion sort, strongest first
        for i in 1..n {
            let mut j = i;
            while j > 0 && self.w[j] > self.w[j - 1] {
                self.swap(j, j - 1, ch);
                j -= 1;
            }
        }
        foreground
    }
}

/// Updates the model with one frame and returns its foreground mask.
pub fn mog_update(model: &mut MogModel, frame: &Frame, params: &MogParams) -> Result<BinaryMask, SegmentError> {
    params.validate()?;
    if (frame.width(), frame.height()) != (model.width, model.height) {
        return Err(FrameError::Dimension {
            expected: (model.width, model.height),
            found: (frame.width(), frame.height()),
        }
        .into());
    }
    if frame.channels() != model.channels {
        return Err(FrameError::Channels {
            expected: model.channels,
            found: frame.channels(),
        }
        .into());
    }
    if params.k != model.k {
        return Err(SegmentError::Parameter(format!("model was built with k = {}", model.k)));
    }
    let (k, ch) = (model.k, model.channels);
    let bits: Vec<bool> = model
        .counts
        .par_iter_mut()
        .zip(model.weights.par_chunks_mut(k))
        .zip(model.means.par_chunks_mut(k * ch))
        .zip(model.vars.par_chunks_mut(k))
        .zip(frame.samples().par_chunks(ch))
        .map(|((((count, w), mu), var), x)| PixelSlots { count, w, mu, var }.update(x, params))
        .collect();
    Ok(BinaryMask::from_bits(model.width, model.height, bits)?)
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub masks: Vec<BinaryMask>,
    /// False for burn-in frames, which should not be scored.
    pub scored: Vec<bool>,
}

/// Segments every frame in order. The first frame initialises the model and
/// gets an empty mask.
pub fn segment_sequence(seq: &FrameSequence, params: &MogParams) -> Result<Segmentation, SegmentError> {
    let frames = seq.frames();
    let mut model = mog_init(&frames[0], params)?;
    let mut masks = Vec::with_capacity(frames.len());
    masks.push(BinaryMask::new(seq.width(), seq.height()));
    for f in &frames[1..] {
        masks.push(mog_update(&mut model, f, params)?);
    }
    let scored = (0..frames.len()).map(|i| i >= params.burn_in).collect();
    Ok(Segmentation { masks, scored })
}
