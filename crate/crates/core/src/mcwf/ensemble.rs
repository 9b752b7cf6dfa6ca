use super::trajectory::{evolve_trajectory, TrajectoryRecord, TrajectorySettings};
use crate::error::Error;
use crate::exec::{par_map, Execution};
use crate::params::SystemParams;
use crate::state::PureState;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnsembleError {
    #[error("an ensemble needs at least one trajectory")]
    Empty,
    #[error(transparent)]
    Setup(#[from] Error),
    #[error("{} of {} trajectories failed; first: #{} {}", .failures.len(), .partial.len(), .failures[0].0, .failures[0].1)]
    Failed {
        /// `(trajectory index, error)`, ascending.
        failures: Vec<(usize, Error)>,
        /// Successful records by index.
        partial: Vec<Option<TrajectoryRecord>>,
    },
}

/// Runs `n` independent trajectories; trajectory `i` uses seed
/// `base_seed + i` (wrapping). Records come back in index order whatever
/// the execution mode.
pub fn run_ensemble(
    initial: &PureState,
    params: &SystemParams,
    settings: &TrajectorySettings,
    n: usize,
    base_seed: u64,
    exec: Execution,
) -> Result<Vec<TrajectoryRecord>, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::Empty);
    }
    params.validate()?;
    settings.validate()?;
    let indices: Vec<usize> = (0..n).collect();
    let results = par_map(exec, &indices, |&i| {
        evolve_trajectory(initial, params, settings, base_seed.wrapping_add(i as u64))
    });
    let mut failures = Vec::new();
    let mut partial = Vec::with_capacity(n);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => partial.push(Some(rec)),
            Err(e) => {
                failures.push((i, e));
                partial.push(None);
            }
        }
    }
    if failures.is_empty() {
        Ok(partial.into_iter().flatten().collect())
    } else {
        Err(EnsembleError::Failed { failures, partial })
    }
}

/// Per-sample ensemble mean and standard error of a scalar observable.
/// All records must share the sample grid.
pub fn ensemble_mean(
    records: &[TrajectoryRecord],
    f: impl Fn(&super::Sample) -> f64,
) -> Vec<(f64, f64, f64)> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let k = records.len() as f64;
    (0..first.samples.len())
        .map(|i| {
            let vals: Vec<f64> = records.iter().map(|r| f(&r.samples[i])).collect();
            let mean = vals.iter().sum::<f64>() / k;
            let var = if records.len() > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            (first.samples[i].t, mean, (var / k).sqrt())
        })
        .collect()
}
