use super::segment::{segment, Label, ReferenceLevels, SegmentConfig};
use super::{mandel_q, mutual_information, pseudospin};
use crate::error::{Error, Result};
use crate::exec::{par_map, Execution};
use crate::mcwf::TrajectoryRecord;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PseudospinMode {
    /// Average `⟨σ⟩` and `⟨σz⟩` over the state's samples, then combine.
    #[default]
    Expectation,
    /// Average the pseudospin of each sample.
    PerSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SummaryOptions {
    pub segmentation: SegmentConfig,
    pub pseudospin: PseudospinMode,
    /// Needs records evolved with snapshots.
    pub mutual_information: bool,
}

/// Completed dwell periods only: the first and last period of every
/// record are censored and left out.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DwellStats {
    pub count: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphSummary {
    pub filling_factor: f64,
    pub records_used: usize,
    pub analyzed_time: f64,
    pub bright_time: f64,
    /// Total transient discarded over all records.
    pub transient_cut: f64,
    pub n_bright: Option<f64>,
    pub n_dim: Option<f64>,
    pub pseudospin_bright: Option<f64>,
    pub pseudospin_dim: Option<f64>,
    /// Standard error of the bright pseudospin across records.
    pub pseudospin_bright_stderr: Option<f64>,
    pub mutual_info_bright: Option<f64>,
    pub mutual_info_dim: Option<f64>,
    pub mandel_q_bright: Option<f64>,
    pub mandel_q_dim: Option<f64>,
    pub dwell_bright: DwellStats,
    pub dwell_dim: DwellStats,
    pub options: SummaryOptions,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    samples: usize,
    n: f64,
    n2: f64,
    sigma: C64,
    sigma_z: f64,
    spin: f64,
    mi: f64,
    dwell_count: usize,
    dwell_total: f64,
}

impl Accum {
    fn add(&mut self, o: &Accum) {
        self.samples += o.samples;
        self.n += o.n;
        self.n2 += o.n2;
        self.sigma += o.sigma;
        self.sigma_z += o.sigma_z;
        self.spin += o.spin;
        self.mi += o.mi;
        self.dwell_count += o.dwell_count;
        self.dwell_total += o.dwell_total;
    }

    fn mean(&self, x: f64) -> Option<f64> {
        (self.samples > 0).then(|| x / self.samples as f64)
    }

    fn pseudospin(&self, mode: PseudospinMode) -> Option<f64> {
        let k = self.samples as f64;
        (self.samples > 0).then(|| match mode {
            PseudospinMode::Expectation => pseudospin(self.sigma / k, self.sigma_z / k),
            PseudospinMode::PerSample => self.spin / k,
        })
    }

    /// Mandel Q of the mixture of the sampled states.
    fn mandel_q(&self) -> Option<f64> {
        let n = self.mean(self.n)?;
        let second = self.mean(self.n2)?;
        mandel_q(n, (second - n * n).max(0.0)).ok()
    }

    fn dwell(&self) -> DwellStats {
        DwellStats {
            count: self.dwell_count,
            mean: (self.dwell_count > 0).then(|| self.dwell_total / self.dwell_count as f64),
        }
    }
}

struct RecordStats {
    bright: Accum,
    dim: Accum,
    transient: f64,
    dt: f64,
}

fn record_stats(
    rec: &TrajectoryRecord,
    refs: ReferenceLevels,
    opts: &SummaryOptions,
) -> Result<RecordStats> {
    let times: Vec<f64> = rec.times().collect();
    let seg = segment(&times, &rec.photon_signal(), refs, &opts.segmentation)?;
    let analyzed = seg.analyzed_samples() as f64 * seg.dt;
    if analyzed + 1e-9 * seg.dt < opts.segmentation.min_signal {
        return Err(Error::InsufficientSignal {
            span: analyzed,
            required: opts.segmentation.min_signal,
        });
    }
    let snapshots = if opts.mutual_information {
        Some(rec.snapshots.as_ref().ok_or(Error::MissingSnapshots)?)
    } else {
        None
    };

    let mut bright = Accum::default();
    let mut dim = Accum::default();
    for (i, label) in seg.labels.iter().enumerate() {
        let acc = match label {
            Some(Label::Bright) => &mut bright,
            Some(Label::Dim) => &mut dim,
            None => continue,
        };
        let o = &rec.samples[i].obs;
        acc.samples += 1;
        acc.n += o.n_mean;
        acc.n2 += o.photon_variance + o.n_mean * o.n_mean;
        acc.sigma += o.sigma_mean;
        acc.sigma_z += o.sigma_z_mean;
        acc.spin += pseudospin(o.sigma_mean, o.sigma_z_mean);
        if let Some(snaps) = snapshots {
            acc.mi += mutual_information(&snaps[i])?;
        }
    }
    let inner = seg.segments.len().saturating_sub(1);
    for s in seg.segments.iter().take(inner).skip(1) {
        let acc = match s.label {
            Label::Bright => &mut bright,
            Label::Dim => &mut dim,
        };
        acc.dwell_count += 1;
        acc.dwell_total += seg.duration(s);
    }
    Ok(RecordStats {
        bright,
        dim,
        transient: seg.transient_cut,
        dt: seg.dt,
    })
}

/// Pools bright- and dim-conditioned samples over all records.
///
/// Records too short to analyze after their transient are skipped; the
/// call fails only if none remains.
pub fn summarize(
    records: &[TrajectoryRecord],
    refs: ReferenceLevels,
    options: &SummaryOptions,
    exec: Execution,
) -> Result<TelegraphSummary> {
    let per_record = par_map(exec, records, |r| record_stats(r, refs, options));
    let mut used = Vec::new();
    let mut shortest = None;
    for r in per_record {
        match r {
            Ok(s) => used.push(s),
            Err(e @ Error::InsufficientSignal { .. }) => shortest = Some(e),
            Err(e) => return Err(e),
        }
    }
    if used.is_empty() {
        return Err(shortest.unwrap_or(Error::InsufficientSignal {
            span: 0.0,
            required: options.segmentation.min_signal,
        }));
    }

    let mut bright = Accum::default();
    let mut dim = Accum::default();
    let mut transient = 0.0;
    let mut analyzed_time = 0.0;
    let mut bright_time = 0.0;
    for s in &used {
        bright.add(&s.bright);
        dim.add(&s.dim);
        transient += s.transient;
        analyzed_time += (s.bright.samples + s.dim.samples) as f64 * s.dt;
        bright_time += s.bright.samples as f64 * s.dt;
    }

    let spins: Vec<f64> = used
        .iter()
        .filter_map(|s| s.bright.pseudospin(options.pseudospin))
        .collect();
    let pseudospin_bright_stderr = (spins.len() > 1).then(|| {
        let k = spins.len() as f64;
        let m = spins.iter().sum::<f64>() / k;
        let var = spins.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    });
    let mi = |a: &Accum| {
        if options.mutual_information {
            a.mean(a.mi)
        } else {
            None
        }
    };

    Ok(TelegraphSummary {
        filling_factor: bright_time / analyzed_time,
        records_used: used.len(),
        analyzed_time,
        bright_time,
        transient_cut: transient,
        n_bright: bright.mean(bright.n),
        n_dim: dim.mean(dim.n),
        pseudospin_bright: bright.pseudospin(options.pseudospin),
        pseudospin_dim: dim.pseudospin(options.pseudospin),
        pseudospin_bright_stderr,
        mutual_info_bright: mi(&bright),
        mutual_info_dim: mi(&dim),
        mandel_q_bright: bright.mandel_q(),
        mandel_q_dim: dim.mandel_q(),
        dwell_bright: bright.dwell(),
        dwell_dim: dim.dwell(),
        options: *options,
    })
}
