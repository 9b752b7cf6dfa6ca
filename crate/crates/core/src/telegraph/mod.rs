//! Bright/dim segmentation of photon-number signals and the conditional
//! statistics of each state.

mod half_filling;
mod segment;
mod summary;

pub use half_filling::{find_half_filling, HalfFilling, HalfFillingSearch};
pub use segment::{
    moving_average, segment, Label, ReferenceLevels, Segment, SegmentConfig, Segmentation,
};
pub use summary::{summarize, DwellStats, PseudospinMode, SummaryOptions, TelegraphSummary};

use crate::classical::neoclassical_roots;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::state::{PureState, QubitState, NORM_TOLERANCE};
use crate::C64;

/// `4|⟨σ⟩|² + ⟨σz⟩²`.
pub fn pseudospin(sigma_mean: C64, sigma_z_mean: f64) -> f64 {
    4.0 * sigma_mean.norm_sqr() + sigma_z_mean * sigma_z_mean
}

/// Base-2 von Neumann entropy of a qubit state.
pub fn qubit_entropy(q: &QubitState) -> f64 {
    let (l1, l2) = q.eigenvalues();
    -[l1, l2]
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| l * l.log2())
        .sum::<f64>()
}

/// Qubit-mode mutual information of a normalized pure state, `2 S(ρ_Q)`.
pub fn mutual_information(state: &PureState) -> Result<f64> {
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(2.0 * qubit_entropy(&state.reduced_qubit()).clamp(0.0, 1.0))
}

/// `var(n)/⟨n⟩ − 1`.
pub fn mandel_q(n_mean: f64, photon_variance: f64) -> Result<f64> {
    if !(n_mean > 0.0) {
        return Err(Error::UndefinedMandelQ);
    }
    Ok(photon_variance / n_mean - 1.0)
}

impl ReferenceLevels {
    /// Dim and bright photon numbers of the neoclassical steady states.
    pub fn neoclassical(params: &SystemParams) -> Result<Self> {
        let roots = neoclassical_roots(params)?;
        match (roots.dim(), roots.bright()) {
            (Some(d), Some(b)) if roots.is_bistable() => Self::new(d.n, b.n),
            _ => Err(Error::InvalidArgument(format!(
                "drive {} lies outside the neoclassical bistable window",
                params.eta
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Qubit;

    #[test]
    fn pseudospin_limits() {
        assert_eq!(pseudospin(C64::new(0.0, 0.0), -1.0), 1.0);
        assert_eq!(pseudospin(C64::new(0.0, 0.0), 0.0), 0.0);
        assert!((pseudospin(C64::new(0.5, 0.0), 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_and_bell_states() {
        let product = PureState::coherent(20, C64::new(1.5, 0.3), Qubit::Excited);
        assert!(mutual_information(&product).unwrap().abs() < 1e-9);

        let g1 = PureState::basis(3, Qubit::Ground, 1);
        let e0 = PureState::basis(3, Qubit::Excited, 0);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = g1.combine(h, &e0, h);
        assert!((mutual_information(&bell).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_rejects_unnormalized() {
        let s = PureState::from_amplitudes(1, vec![C64::new(2.0, 0.0); 4]).unwrap();
        assert!(matches!(
            mutual_information(&s),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn mandel_q_examples() {
        assert_eq!(mandel_q(4.0, 4.0).unwrap(), 0.0);
        assert_eq!(mandel_q(3.0, 0.0).unwrap(), -1.0);
        assert_eq!(mandel_q(0.0, 1.0), Err(Error::UndefinedMandelQ));
    }

    #[test]
    fn neoclassical_references() {
        let p = SystemParams::new(100.0, 25.0, 30.0);
        let r = ReferenceLevels::neoclassical(&p).unwrap();
        assert!(r.dim < 1.0 && r.bright > 1.0);
        assert!(ReferenceLevels::neoclassical(&p.with_eta(1.0)).is_err());
    }
}
