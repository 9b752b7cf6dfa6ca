use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentConfig {
    /// Width of the centered moving average.
    pub smoothing: f64,
    /// Fraction of the reference gap above the dim level that commits a
    /// switch to bright.
    pub enter_bright: f64,
    /// Fraction of the gap below which the signal commits to dim.
    pub enter_dim: f64,
    /// Periods shorter than this are merged into their neighbours.
    pub min_dwell: f64,
    /// Shortest signal accepted for analysis.
    pub min_signal: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            smoothing: 1.0,
            enter_bright: 0.75,
            enter_dim: 0.25,
            min_dwell: 5.0,
            min_signal: 20.0,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.smoothing >= 0.0
            && self.min_dwell >= 0.0
            && self.min_signal >= 0.0
            && 0.0 <= self.enter_dim
            && self.enter_dim < self.enter_bright
            && self.enter_bright <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "inconsistent segmentation settings: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Dim,
    Bright,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceLevels {
    pub dim: f64,
    pub bright: f64,
}

impl ReferenceLevels {
    pub fn new(dim: f64, bright: f64) -> Result<Self> {
        if !(bright > dim) {
            return Err(Error::InvalidArgument(format!(
                "bright reference {bright} must exceed dim reference {dim}"
            )));
        }
        Ok(Self { dim, bright })
    }

    /// Levels from empirical quantiles of a signal.
    pub fn from_quantiles(signal: &[f64], lower: f64, upper: f64) -> Result<Self> {
        if signal.is_empty() || !(0.0 <= lower && lower < upper && upper <= 1.0) {
            return Err(Error::InvalidArgument("bad quantile request".into()));
        }
        let mut sorted = signal.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let x = p * (sorted.len() - 1) as f64;
            let i = x.floor() as usize;
            let j = (i + 1).min(sorted.len() - 1);
            sorted[i] + (sorted[j] - sorted[i]) * (x - i as f64)
        };
        Self::new(q(lower), q(upper))
    }

    fn level(&self, fraction: f64) -> f64 {
        self.dim + fraction * (self.bright - self.dim)
    }
}

/// A maximal run of equal labels, `[start, end)` in sample indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub label: Label,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// `None` inside the discarded transient.
    pub labels: Vec<Option<Label>>,
    pub segments: Vec<Segment>,
    pub dt: f64,
    /// Time discarded before the first committed label.
    pub transient_cut: f64,
}

impl Segmentation {
    pub fn analyzed_samples(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn bright_samples(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| **l == Some(Label::Bright))
            .count()
    }

    pub fn filling_factor(&self) -> f64 {
        let n = self.analyzed_samples();
        if n == 0 {
            0.0
        } else {
            self.bright_samples() as f64 / n as f64
        }
    }

    pub fn duration(&self, s: &Segment) -> f64 {
        s.len() as f64 * self.dt
    }
}

/// Centered moving average over `width` samples, truncated at the edges.
pub fn moving_average(signal: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut prefix = Vec::with_capacity(signal.len() + 1);
    prefix.push(0.0);
    for x in signal {
        prefix.push(prefix.last().unwrap() + x);
    }
    (0..signal.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(signal.len() - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InsufficientSignal {
            span: 0.0,
            required: f64::MIN_POSITIVE,
        });
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt);
    if !(dt > 0.0) || !uniform {
        return Err(Error::InvalidArgument(
            "telegraph analysis needs uniformly sampled times".into(),
        ));
    }
    Ok(dt)
}

/// Hysteresis segmentation of a photon-number signal.
///
/// A switch is committed when the smoothed signal passes the entry level
/// of the other state, and back-dated to the last crossing of the
/// midpoint level since the previous switch. Periods shorter than
/// `min_dwell` are then absorbed, shortest first.
pub fn segment(
    times: &[f64],
    signal: &[f64],
    refs: ReferenceLevels,
    cfg: &SegmentConfig,
) -> Result<Segmentation> {
    cfg.validate()?;
    if times.len() != signal.len() {
        return Err(Error::InvalidArgument(
            "times and signal differ in length".into(),
        ));
    }
    ReferenceLevels::new(refs.dim, refs.bright)?;
    let dt = uniform_step(times)?;
    let span = times[times.len() - 1] - times[0];
    if span + 1e-9 * dt < cfg.min_signal {
        return Err(Error::InsufficientSignal {
            span,
            required: cfg.min_signal,
        });
    }

    let width = ((cfg.smoothing / dt).round() as usize).max(1);
    let smooth = moving_average(signal, width);
    let hi = refs.level(cfg.enter_bright);
    let lo = refs.level(cfg.enter_dim);
    let mid = refs.level(0.5);

    let n = signal.len();
    // (first sample, label) of every committed period
    let mut switches: Vec<(usize, Label)> = Vec::new();
    for i in 0..n {
        let current = switches.last().map(|s| s.1);
        let target = match current {
            Some(Label::Bright) if smooth[i] < lo => Label::Dim,
            Some(Label::Dim) if smooth[i] > hi => Label::Bright,
            None if smooth[i] > hi => Label::Bright,
            None if smooth[i] < lo => Label::Dim,
            _ => continue,
        };
        let floor = switches.last().map_or(1, |s| s.0 + 1);
        let from = (floor..=i)
            .rev()
            .find(|&j| match target {
                Label::Bright => smooth[j - 1] <= mid && smooth[j] > mid,
                Label::Dim => smooth[j - 1] >= mid && smooth[j] < mid,
            })
            .unwrap_or(i);
        switches.push((from, target));
    }
    let mut labels: Vec<Option<Label>> = vec![None; n];
    for (k, &(from, label)) in switches.iter().enumerate() {
        let to = switches.get(k + 1).map_or(n, |s| s.0);
        labels[from..to].iter_mut().for_each(|l| *l = Some(label));
    }
    let transient = switches.first().map_or(n, |s| s.0);

    let mut segments = runs(&labels[transient..], transient);
    merge_short(&mut segments, ((cfg.min_dwell / dt) - 1e-9).ceil() as usize);
    for s in &segments {
        labels[s.start..s.end]
            .iter_mut()
            .for_each(|l| *l = Some(s.label));
    }
    Ok(Segmentation {
        labels,
        segments,
        dt,
        transient_cut: transient as f64 * dt,
    })
}

fn runs(labels: &[Option<Label>], offset: usize) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (k, l) in labels.iter().enumerate() {
        let Some(label) = *l else { continue };
        let i = k + offset;
        match out.last_mut() {
            Some(s) if s.label == label && s.end == i => s.end = i + 1,
            _ => out.push(Segment {
                label,
                start: i,
                end: i + 1,
            }),
        }
    }
    out
}

/// Repeatedly absorbs the shortest segment below `min_len` samples into
/// its neighbours (ties: earliest first).
fn merge_short(segments: &mut Vec<Segment>, min_len: usize) {
    while segments.len() > 1 {
        let Some((k, _)) = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() < min_len)
            .min_by_key(|(i, s)| (s.len(), *i))
        else {
            break;
        };
        let flipped = match segments[k].label {
            Label::Dim => Label::Bright,
            Label::Bright => Label::Dim,
        };
        segments[k].label = flipped;
        // coalesce equal neighbours
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        for s in segments.drain(..) {
            match merged.last_mut() {
                Some(m) if m.label == s.label => m.end = s.end,
                _ => merged.push(s),
            }
        }
        *segments = merged;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn constant_dim_signal() {
        let t = grid(500, 0.1);
        let refs = ReferenceLevels::new(0.0, 10.0).unwrap();
        let s = segment(&t, &vec![0.0; 500], refs, &SegmentConfig::default()).unwrap();
        assert_eq!(s.filling_factor(), 0.0);
        assert_eq!(s.segments.len(), 1);
        assert_eq!(s.segments[0].label, Label::Dim);
        assert_eq!(s.transient_cut, 0.0);
    }

    #[test]
    fn square_wave_half_filling() {
        let dt = 0.1;
        let t = grid(4000, dt);
        let sig: Vec<f64> = t
            .iter()
            .map(|&x| {
                if (x / 20.0).floor() as i64 % 2 == 0 {
                    1.0
                } else {
                    9.0
                }
            })
            .collect();
        let refs = ReferenceLevels::new(1.0, 9.0).unwrap();
        let s = segment(&t, &sig, refs, &SegmentConfig::default()).unwrap();
        assert!((s.filling_factor() - 0.5).abs() < 1.0 / 10.0);
        assert_eq!(s.segments.len(), 20);
        // switches land on the true edges
        assert_eq!(s.segments[1].start, 200);
    }

    #[test]
    fn short_excursions_are_merged() {
        let dt = 0.1;
        let t = grid(1000, dt);
        let mut sig = vec![0.0; 1000];
        sig[500..520].iter_mut().for_each(|x| *x = 10.0); // 2/kappa spike
        let refs = ReferenceLevels::new(0.0, 10.0).unwrap();
        let s = segment(&t, &sig, refs, &SegmentConfig::default()).unwrap();
        assert_eq!(s.segments.len(), 1);
        assert_eq!(s.filling_factor(), 0.0);
    }

    #[test]
    fn transient_before_first_commit_is_dropped() {
        let dt = 0.1;
        let t = grid(1000, dt);
        let mut sig = vec![5.0; 1000];
        sig[300..].iter_mut().for_each(|x| *x = 10.0);
        let refs = ReferenceLevels::new(0.0, 10.0).unwrap();
        let s = segment(&t, &sig, refs, &SegmentConfig::default()).unwrap();
        assert!(s.labels[..250].iter().all(|l| l.is_none()));
        assert!(s.transient_cut > 25.0);
        assert_eq!(s.filling_factor(), 1.0);
    }

    #[test]
    fn short_signal_rejected() {
        let t = grid(100, 0.1);
        let refs = ReferenceLevels::new(0.0, 1.0).unwrap();
        assert!(matches!(
            segment(&t, &vec![0.0; 100], refs, &SegmentConfig::default()),
            Err(Error::InsufficientSignal { .. })
        ));
    }

    #[test]
    fn quantile_references() {
        let sig: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let r = ReferenceLevels::from_quantiles(&sig, 0.1, 0.9).unwrap();
        assert!((r.dim - 10.0).abs() < 1e-12 && (r.bright - 90.0).abs() < 1e-12);
    }
}
