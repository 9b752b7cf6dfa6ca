//! Two-component picture of the bright state: a coherent distribution
//! over the upper dressed ladder `|m,+⟩ = (|g,m⟩ + |e,m−1⟩)/√2`, with the
//! `m = 0` rung taken as `|g,0⟩`.

use crate::error::{Error, Result};
use crate::state::{basis_index, PureState, Qubit};
use crate::{QubitState, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct BrightAnsatz {
    pub n_bright: f64,
    pub m_max: usize,
    /// Real, non-negative coherent amplitudes `c_0..=c_m_max`.
    pub c: Vec<f64>,
}

impl BrightAnsatz {
    /// Coefficients truncated at `n + 10√n + 20`.
    pub fn build(n_bright: f64) -> Result<Self> {
        if !(n_bright >= 0.0 && n_bright.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bright photon number must be finite and non-negative, got {n_bright}"
            )));
        }
        let m_max = (n_bright + 10.0 * n_bright.sqrt() + 20.0).ceil() as usize;
        Self::with_truncation(n_bright, m_max)
    }

    pub fn with_truncation(n_bright: f64, m_max: usize) -> Result<Self> {
        if !(n_bright >= 0.0 && n_bright.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bright photon number must be finite and non-negative, got {n_bright}"
            )));
        }
        let mut c = vec![0.0; m_max + 1];
        if n_bright == 0.0 {
            c[0] = 1.0;
        } else {
            let ln_n = n_bright.ln();
            let mut ln_fact = 0.0;
            for (m, cm) in c.iter_mut().enumerate() {
                if m > 0 {
                    ln_fact += (m as f64).ln();
                }
                *cm = (0.5 * (m as f64 * ln_n - ln_fact - n_bright)).exp();
            }
        }
        Ok(Self { n_bright, m_max, c })
    }

    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }

    pub fn c0_sq(&self) -> f64 {
        self.c[0] * self.c[0]
    }

    /// Nearest-neighbour overlap `Σ_{m≥0} c_{m+1} c_m` as it appears in the
    /// closed form that treats the bottom rung like the others.
    pub fn overlap_uniform(&self) -> f64 {
        self.c.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// `2⟨σ⟩` of the state. The `|g,0⟩` rung couples to `|1,+⟩` with an
    /// extra factor `√2` relative to the dressed rungs above it.
    pub fn overlap(&self) -> f64 {
        let bottom = if self.m_max >= 1 {
            std::f64::consts::SQRT_2 * self.c[0] * self.c[1]
        } else {
            0.0
        };
        bottom + self.c.windows(2).skip(1).map(|w| w[0] * w[1]).sum::<f64>()
    }

    /// Reduced qubit state of the ansatz.
    pub fn qubit(&self) -> QubitState {
        let norm = self.norm_sq();
        QubitState {
            excited: 0.5 * (norm - self.c0_sq()) / norm,
            coherence: C64::new(0.5 * self.overlap() / norm, 0.0),
        }
    }

    /// `|c0|⁴ + C²`, with `C = 2⟨σ⟩` (normalized by the retained weight).
    pub fn pseudospin(&self) -> f64 {
        let q = self.qubit();
        q.sigma_z().powi(2) + 4.0 * q.coherence.norm_sqr()
    }

    /// Reduced-state eigenvalues `(1 ± √S)/2`, descending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = self.pseudospin().sqrt().min(1.0);
        (0.5 * (1.0 + r), 0.5 * (1.0 - r))
    }

    /// `2 S(ρ_Q)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let (l1, l2) = self.eigenvalues();
        let h: f64 = [l1, l2]
            .into_iter()
            .filter(|&l| l > 0.0)
            .map(|l| -l * l.log2())
            .sum();
        2.0 * h
    }

    /// The eigenvalue expression `(2 − |c0|² ± √(|c0|⁴ + 4C²))/4` taken
    /// literally with the uniform overlap. Its trace is `(2 − |c0|²)/2`, so it
    /// is only meaningful once `c0` is negligible.
    pub fn eigenvalues_uniform(&self) -> (f64, f64) {
        let c0 = self.c0_sq();
        let c = self.overlap_uniform();
        let r = (c0 * c0 + 4.0 * c * c).sqrt();
        ((2.0 - c0 + r) / 4.0, (2.0 - c0 - r) / 4.0)
    }

    /// The full qubit-mode state vector on `n_max = m_max`.
    pub fn to_state(&self) -> PureState {
        let n_max = self.m_max;
        let mut amps = vec![C64::new(0.0, 0.0); 2 * (n_max + 1)];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[basis_index(n_max, Qubit::Ground, 0)] = C64::new(self.c[0], 0.0);
        for m in 1..=n_max {
            amps[basis_index(n_max, Qubit::Ground, m)] = C64::new(h * self.c[m], 0.0);
            amps[basis_index(n_max, Qubit::Excited, m - 1)] = C64::new(h * self.c[m], 0.0);
        }
        PureState::from_amplitudes(n_max, amps).expect("length matches n_max")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightCurvePoint {
    pub n_bright: f64,
    pub pseudospin: f64,
    pub mutual_information: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub sigma_z: f64,
}

/// Pseudospin and mutual information of the ansatz against photon number.
pub fn bright_state_curves(n_grid: &[f64]) -> Result<Vec<BrightCurvePoint>> {
    let ok =
        n_grid.iter().all(|n| *n >= 0.0 && n.is_finite()) && n_grid.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(Error::InvalidArgument(
            "photon-number grid must be non-negative and strictly increasing".into(),
        ));
    }
    n_grid
        .iter()
        .map(|&n| {
            let a = BrightAnsatz::build(n)?;
            let (lambda1, lambda2) = a.eigenvalues();
            Ok(BrightCurvePoint {
                n_bright: n,
                pseudospin: a.pseudospin(),
                mutual_information: a.mutual_information(),
                lambda1,
                lambda2,
                sigma_z: a.qubit().sigma_z(),
            })
        })
        .collect()
}
