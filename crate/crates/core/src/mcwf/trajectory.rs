use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Tolerances};
use crate::params::SystemParams;
use crate::state::{self, JcOperator, Observables, PureState, C64, NORM_TOLERANCE};

pub const TRAJECTORY_TOLERANCES: Tolerances = Tolerances::new(1e-8, 1e-10);

/// Absolute accuracy of the located jump times.
pub const JUMP_TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    ModeDecay,
    QubitDecay,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::ModeDecay => "mode_decay",
            Channel::QubitDecay => "qubit_decay",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mode_decay" => Ok(Channel::ModeDecay),
            "qubit_decay" => Ok(Channel::QubitDecay),
            other => Err(format!("unknown jump channel `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub t: f64,
    pub channel: Channel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Expectations in the normalized state.
    pub obs: Observables,
    /// Squared norm of the unnormalized state at `t`.
    pub norm_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySettings {
    pub t_final: f64,
    pub dt_out: f64,
    pub tolerances: Tolerances,
    /// Keep the normalized state at every sample.
    pub store_snapshots: bool,
}

impl TrajectorySettings {
    pub fn new(t_final: f64, dt_out: f64) -> Self {
        Self {
            t_final,
            dt_out,
            tolerances: TRAJECTORY_TOLERANCES,
            store_snapshots: false,
        }
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_snapshots(mut self, store: bool) -> Self {
        self.store_snapshots = store;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument("t_final must be positive".into()));
        }
        if !(self.dt_out > 0.0 && self.dt_out <= self.t_final) {
            return Err(Error::InvalidArgument(
                "dt_out must be positive and at most t_final".into(),
            ));
        }
        if !(self.tolerances.rtol > 0.0 && self.tolerances.atol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Number of samples after the initial one.
    pub(crate) fn output_count(&self) -> usize {
        (self.t_final / self.dt_out + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub params: SystemParams,
    pub n_max: usize,
    pub samples: Vec<Sample>,
    pub jumps: Vec<Jump>,
    /// Normalized states at the sample times, when requested.
    pub snapshots: Option<Vec<PureState>>,
    pub final_state: PureState,
}

impl TrajectoryRecord {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn photon_signal(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.obs.n_mean).collect()
    }
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1]: a zero threshold would never fire
    1.0 - rng.gen::<f64>()
}

/// Quantum-jump trajectory from `initial` with the waiting-time
/// construction: the unnormalized state decays under `H_eff` until its
/// squared norm reaches a uniform threshold, the crossing time is located
/// on the dense output, a jump channel is drawn, and a fresh threshold is
/// drawn after renormalizing.
pub fn evolve_trajectory(
    initial: &PureState,
    params: &SystemParams,
    settings: &TrajectorySettings,
    seed: u64,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    settings.validate()?;
    if params.gamma_c != 0.0 {
        return Err(Error::DephasingUnsupported(params.gamma_c));
    }
    let norm0 = initial.norm_sq();
    if (norm0 - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sq: norm0 });
    }
    let n_max = initial.n_max();
    let dim = initial.dim();
    initial.check_truncation(0.0)?;

    let op = JcOperator::effective(params, n_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut threshold = uniform_open(&mut rng);

    let count = settings.output_count();
    let dt = settings.dt_out;
    let mut samples = Vec::with_capacity(count + 1);
    let mut snapshots = settings
        .store_snapshots
        .then(|| Vec::with_capacity(count + 1));
    let mut jumps = Vec::new();

    let mut record = |t: f64, amps: &[C64], samples: &mut Vec<Sample>| {
        samples.push(Sample {
            t,
            obs: state::moments(n_max, amps),
            norm_sq: state::norm_sq(amps),
        });
        if let Some(snaps) = snapshots.as_mut() {
            let mut s = PureState::ground(n_max);
            s.set_amplitudes(amps);
            snaps.push(s.normalized());
        }
    };
    record(0.0, initial.amplitudes(), &mut samples);
    let mut next_out = 1usize;

    let opr = &op;
    let mut ode = Dopri5::new(
        move |_t: f64, y: &[C64], dy: &mut [C64]| opr.schrodinger_rhs(y, dy),
        0.0,
        initial.amplitudes().to_vec(),
        settings.tolerances,
    );
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    let mut jumped = vec![C64::new(0.0, 0.0); dim];
    let t_final = settings.t_final;

    while ode.t() < t_final {
        ode.step(t_final)?;
        state::check_truncation(n_max, ode.y(), ode.t())?;
        let end_norm = state::norm_sq(ode.y());
        let t_stop = if end_norm <= threshold {
            locate_crossing(&ode, threshold, &mut buf)
        } else {
            ode.t()
        };

        while next_out <= count {
            let t = next_out as f64 * dt;
            let due = if end_norm <= threshold {
                t < t_stop
            } else {
                t <= t_stop
            };
            if !due {
                break;
            }
            ode.dense(t, &mut buf);
            record(t, &buf, &mut samples);
            next_out += 1;
        }

        if end_norm <= threshold {
            ode.dense(t_stop, &mut buf);
            let obs = state::moments(n_max, &buf);
            let w_mode = 2.0 * params.kappa * obs.n_mean;
            let w_qubit = 2.0 * params.gamma * obs.excited_population();
            let total = w_mode + w_qubit;
            let channel = if total <= 0.0 || rng.gen::<f64>() * total < w_mode {
                Channel::ModeDecay
            } else {
                Channel::QubitDecay
            };
            match channel {
                Channel::ModeDecay => op.lower_mode(&buf, &mut jumped),
                Channel::QubitDecay => op.lower_qubit(&buf, &mut jumped),
            }
            let norm = state::norm_sq(&jumped);
            if !(norm > 0.0) {
                // Zero jump weight: the threshold was reached by
                // rounding; keep the state and redraw.
                jumped.copy_from_slice(&buf);
            }
            let scale = 1.0 / state::norm_sq(&jumped).sqrt();
            for z in jumped.iter_mut() {
                *z *= scale;
            }
            jumps.push(Jump { t: t_stop, channel });
            threshold = uniform_open(&mut rng);
            ode.reset(t_stop, &jumped);
            // A sample that coincides with the jump time sees the
            // post-jump state.
            while next_out <= count && next_out as f64 * dt <= t_stop {
                record(next_out as f64 * dt, &jumped, &mut samples);
                next_out += 1;
            }
        }
    }
    while next_out <= count {
        // only reachable through rounding of the final time
        let t = next_out as f64 * dt;
        record(t, ode.y(), &mut samples);
        next_out += 1;
    }

    let mut final_state = PureState::ground(n_max);
    final_state.set_amplitudes(ode.y());
    Ok(TrajectoryRecord {
        seed,
        params: *params,
        n_max,
        samples,
        jumps,
        snapshots,
        final_state: final_state.normalized(),
    })
}

/// Bisection on the dense output for the time at which the squared norm
/// reaches `threshold` inside the last step.
fn locate_crossing<R: crate::ode::Rhs>(ode: &Dopri5<R>, threshold: f64, buf: &mut [C64]) -> f64 {
    let (mut lo, mut hi) = (ode.t_prev(), ode.t());
    for _ in 0..100 {
        if hi - lo <= JUMP_TIME_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        ode.dense(mid, buf);
        if state::norm_sq(buf) > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Qubit;

    #[test]
    fn samples_are_regular_and_norm_decreases_between_jumps() {
        let p = SystemParams::new(20.0, 10.0, 5.0);
        let s = TrajectorySettings::new(5.0, 0.1);
        let rec = evolve_trajectory(&PureState::ground(30), &p, &s, 7).unwrap();
        assert_eq!(rec.samples.len(), 51);
        for (i, w) in rec.samples.windows(2).enumerate() {
            assert!(w[1].t > w[0].t);
            let jumped = rec.jumps.iter().any(|j| j.t > w[0].t && j.t <= w[1].t);
            if !jumped {
                assert!(w[1].norm_sq <= w[0].norm_sq * (1.0 + 1e-9), "sample {i}");
            }
        }
        assert!(rec.jumps.windows(2).all(|w| w[0].t <= w[1].t));
    }

    #[test]
    fn same_seed_same_record() {
        let p = SystemParams::new(20.0, 10.0, 5.0).with_gamma(0.5);
        let s = TrajectorySettings::new(10.0, 0.5);
        let a = evolve_trajectory(&PureState::ground(30), &p, &s, 11).unwrap();
        let b = evolve_trajectory(&PureState::ground(30), &p, &s, 11).unwrap();
        assert_eq!(a, b);
        let c = evolve_trajectory(&PureState::ground(30), &p, &s, 12).unwrap();
        assert_ne!(a.jumps, c.jumps);
    }

    #[test]
    fn coherent_drive_without_coupling() {
        let p = SystemParams::new(0.0, 2.0, 3.0);
        let s = TrajectorySettings::new(30.0, 1.0);
        let rec = evolve_trajectory(&PureState::ground(40), &p, &s, 3).unwrap();
        assert!(!rec.jumps.is_empty());
        let alpha = C64::new(3.0, 0.0) / C64::new(1.0, -2.0);
        let last = rec.samples.last().unwrap().obs;
        assert!((last.a_mean - alpha).norm() < 1e-6, "{}", last.a_mean);
        // coherent states are unchanged by photon loss
        assert!((last.photon_variance - last.n_mean).abs() < 1e-6);
    }

    #[test]
    fn dephasing_channel_is_rejected() {
        let p = SystemParams::new(20.0, 10.0, 5.0).with_gamma_c(0.1);
        let s = TrajectorySettings::new(1.0, 0.1);
        assert_eq!(
            evolve_trajectory(&PureState::ground(10), &p, &s, 0),
            Err(Error::DephasingUnsupported(0.1))
        );
    }

    #[test]
    fn truncation_breach_aborts() {
        let p = SystemParams::new(0.0, 0.0, 5.0);
        let s = TrajectorySettings::new(10.0, 0.1);
        let err = evolve_trajectory(&PureState::ground(10), &p, &s, 0).unwrap_err();
        assert!(
            matches!(err, Error::Truncation { n_max: 10, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn snapshots_match_samples() {
        let p = SystemParams::new(20.0, 10.0, 5.0);
        let s = TrajectorySettings::new(2.0, 0.5).with_snapshots(true);
        let rec = evolve_trajectory(&PureState::basis(20, Qubit::Ground, 0), &p, &s, 1).unwrap();
        let snaps = rec.snapshots.as_ref().unwrap();
        assert_eq!(snaps.len(), rec.samples.len());
        for (snap, sample) in snaps.iter().zip(&rec.samples) {
            let obs = crate::state::expectations(snap).unwrap();
            assert!((obs.n_mean - sample.obs.n_mean).abs() < 1e-12);
        }
    }
}
