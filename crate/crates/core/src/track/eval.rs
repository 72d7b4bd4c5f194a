use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{min_eig_response, select_features, FeatureParams};
use super::lk::{lk_track_pyramids, LkParams, Pyramid};
use super::TrackError;
use crate::framecore::FrameSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Completed,
    Lost,
}

impl fmt::Display for TrackStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrackStatus::Completed => "completed",
            TrackStatus::Lost => "lost",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackParams {
    pub features: FeatureParams,
    pub lk: LkParams,
    /// Seconds between spawn rounds.
    pub spawn_interval_s: f64,
    /// Seconds tracked forward (and then back) per round.
    pub span_s: f64,
    /// Error margins in pixels, tightest first.
    pub margins: [f64; 2],
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            features: FeatureParams::default(),
            lk: LkParams::default(),
            spawn_interval_s: 1.5,
            span_s: 12.0,
            margins: [1.0, 5.0],
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        self.features.validate()?;
        self.lk.validate()?;
        if !(self.spawn_interval_s > 0.0 && self.span_s > 0.0) {
            return Err(TrackError::Parameter("spawn interval and span must be > 0".into()));
        }
        let [a, b] = self.margins;
        if !(a >= 0.0 && a <= b) {
            return Err(TrackError::Parameter("margins must be ordered and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub spawn_frame: usize,
    pub start: (f64, f64),
    /// Last known position; the round trip end when completed.
    pub end: (f64, f64),
    pub status: TrackStatus,
    /// Start-to-end distance, only for completed tracks.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub spawn_frame: usize,
    /// Frames tracked in each direction.
    pub span: usize,
    pub spawned: usize,
    pub within_1px: usize,
    pub within_5px: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub spawned: usize,
    /// Completed tracks within the first margin.
    pub within_1px: usize,
    /// Completed tracks within the second margin.
    pub within_5px: usize,
    pub margins: [f64; 2],
    pub rounds: Vec<RoundReport>,
    pub records: Vec<TrackRecord>,
}

impl TrackingReport {
    /// Completed tracks with error at most `margin`.
    pub fn count_within(&self, margin: f64) -> usize {
        count_within(&self.records, margin)
    }
}

fn count_within(records: &[TrackRecord], margin: f64) -> usize {
    records.iter().filter(|r| r.error.is_some_and(|e| e <= margin)).count()
}

/// Spawn frames `floor(k * interval * fps)` with at least one frame after
/// them. Repeats produced by sub-frame intervals are dropped.
fn spawn_frames(len: usize, fps: f64, interval_s: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for k in 0.. {
        let s = (k as f64 * interval_s * fps).floor() as usize;
        if s + 2 > len {
            break;
        }
        if out.last() != Some(&s) {
            out.push(s);
        }
    }
    out
}

/// Tracks the strongest features of each spawn frame forward, then back to
/// the spawn frame, and scores the round-trip error.
pub fn forward_backward_eval(seq: &FrameSequence, params: &TrackParams) -> Result<TrackingReport, TrackError> {
    params.validate()?;
    if seq.len() < 2 {
        return Err(TrackError::Parameter(format!("need at least 2 frames, got {}", seq.len())));
    }
    let luma = seq.to_luma();
    let pyramids: Vec<Pyramid> = luma
        .frames()
        .par_iter()
        .map(|f| Pyramid::new(f, params.lk.levels))
        .collect::<Result<_, _>>()?;
    let span_frames = ((params.span_s * seq.fps()).floor() as usize).max(1);
    let spawns = spawn_frames(seq.len(), seq.fps(), params.spawn_interval_s);

    let rounds: Vec<(RoundReport, Vec<TrackRecord>)> = spawns
        .par_iter()
        .map(|&s| {
            let mut score = min_eig_response(&luma.frames()[s], params.features.window)?;
            // features whose tracking window starts outside the frame are never spawned
            let r = params.lk.window / 2;
            let (w, h) = (score.width(), score.height());
            for y in 0..h {
                for x in 0..w {
                    if x < r || y < r || x + r >= w || y + r >= h {
                        score.set(x, y, 0.0);
                    }
                }
            }
            let features = select_features(&score, &params.features);
            let span = span_frames.min(seq.len() - 1 - s);
            let start: Vec<(f64, f64)> = features.iter().map(|f| (f.x, f.y)).collect();
            let mut pos = start.clone();
            let mut alive = vec![true; pos.len()];
            let steps = (s..s + span).map(|t| (t, t + 1)).chain((s + 1..=s + span).rev().map(|t| (t, t - 1)));
            for (from, to) in steps {
                let idx: Vec<usize> = (0..pos.len()).filter(|&i| alive[i]).collect();
                let pts: Vec<(f64, f64)> = idx.iter().map(|&i| pos[i]).collect();
                for (&i, (p, status)) in idx.iter().zip(lk_track_pyramids(&pyramids[from], &pyramids[to], &pts, &params.lk)) {
                    pos[i] = p;
                    alive[i] = status == TrackStatus::Completed;
                }
            }
            let records: Vec<TrackRecord> = start
                .iter()
                .zip(&pos)
                .zip(&alive)
                .map(|((&a, &b), &ok)| TrackRecord {
                    spawn_frame: s,
                    start: a,
                    end: b,
                    status: if ok { TrackStatus::Completed } else { TrackStatus::Lost },
                    error: ok.then(|| (a.0 - b.0).hypot(a.1 - b.1)),
                })
                .collect();
            let round = RoundReport {
                spawn_frame: s,
                span,
                spawned: records.len(),
                within_1px: count_within(&records, params.margins[0]),
                within_5px: count_within(&records, params.margins[1]),
            };
            Ok((round, records))
        })
        .collect::<Result<_, TrackError>>()?;

    let mut report = TrackingReport {
        spawned: 0,
        within_1px: 0,
        within_5px: 0,
        margins: params.margins,
        rounds: Vec::with_capacity(rounds.len()),
        records: Vec::new(),
    };
    for (round, records) in rounds {
        report.spawned += round.spawned;
        report.within_1px += round.within_1px;
        report.within_5px += round.within_5px;
        report.rounds.push(round);
        report.records.extend(records);
    }
    Ok(report)
}

/// Writes `(sequence, derainer, spawned, within_1, within_5)` rows.
pub fn write_tracking_csv<'a, W: Write>(
    rows: impl IntoIterator<Item = (&'a str, &'a str, &'a TrackingReport)>,
    out: W,
) -> Result<(), TrackError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sequence", "derainer", "spawned", "within_1", "within_5"])?;
    for (seq, derainer, r) in rows {
        w.write_record([seq, derainer, &r.spawned.to_string(), &r.within_1px.to_string(), &r.within_5px.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framecore::{ColorMode, Frame};

    #[test]
    fn spawn_schedule() {
        assert_eq!(spawn_frames(40, 10.0, 1.5), vec![0, 15, 30]);
        assert_eq!(spawn_frames(31, 10.0, 1.5), vec![0, 15]);
        assert_eq!(spawn_frames(32, 10.0, 1.5), vec![0, 15, 30]);
        assert_eq!(spawn_frames(5, 0.5, 1.5), vec![0, 1, 2, 3]);
        assert_eq!(spawn_frames(2, 25.0, 1.5), vec![0]);
    }

    fn textured(w: usize, h: usize) -> Frame {
        Frame::from_fn(w, h, ColorMode::Luma, |x, y, _| {
            let (x, y) = (x as f64, y as f64);
            128.0 + 50.0 * (x / 3.0).sin() * (y / 4.0).cos() + 30.0 * ((x * y).sqrt() / 2.0).sin()
        })
        .unwrap()
    }

    #[test]
    fn static_sequence_all_within_one_pixel() {
        let seq = FrameSequence::new(vec![textured(80, 60); 12], 4.0).unwrap();
        let r = forward_backward_eval(&seq, &TrackParams::default()).unwrap();
        assert!(r.spawned > 0);
        assert_eq!(r.within_1px, r.spawned);
        assert_eq!(r.within_5px, r.spawned);
        assert_eq!(r.rounds.iter().map(|x| x.spawn_frame).collect::<Vec<_>>(), vec![0, 6]);
        assert_eq!(r.rounds[1].span, 5);
        assert!(r.rounds.iter().all(|x| x.spawned <= 200));
    }

    #[test]
    fn too_short() {
        let seq = FrameSequence::new(vec![textured(30, 30)], 4.0).unwrap();
        assert!(matches!(forward_backward_eval(&seq, &TrackParams::default()), Err(TrackError::Parameter(_))));
    }

    #[test]
    fn csv_rows() {
        let seq = FrameSequence::new(vec![textured(60, 50); 3], 4.0).unwrap();
        let r = forward_backward_eval(&seq, &TrackParams::default()).unwrap();
        let mut buf = Vec::new();
        write_tracking_csv([("s1", "none", &r)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("sequence,derainer,spawned,within_1,within_5\ns1,none,{0},{0},{0}\n", r.spawned));
    }
}
