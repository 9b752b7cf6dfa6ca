//! Physical parameter set. All rates are measured in units of the mode
//! decay rate, so `kappa` is 1 unless a caller deliberately rescales.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Qubit-mode coupling.
    pub g: f64,
    /// Mode decay rate (the reference unit).
    pub kappa: f64,
    /// Qubit decay rate.
    pub gamma: f64,
    /// Extra qubit dephasing; only the mean-field theories use it.
    pub gamma_c: f64,
    /// Drive detuning.
    pub delta: f64,
    /// Drive amplitude.
    pub eta: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 100.0,
            kappa: 1.0,
            gamma: 0.0,
            gamma_c: 0.0,
            delta: 10.0,
            eta: 10.0,
        }
    }
}

impl SystemParams {
    pub fn new(g: f64, delta: f64, eta: f64) -> Self {
        Self {
            g,
            delta,
            eta,
            ..Self::default()
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_gamma_c(mut self, gamma_c: f64) -> Self {
        self.gamma_c = gamma_c;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    /// Transverse qubit damping.
    #[inline]
    pub fn gamma_perp(&self) -> f64 {
        self.gamma + self.gamma_c
    }

    /// Photon number of the driven empty cavity, `eta^2 / (kappa^2 + delta^2)`.
    #[inline]
    pub fn empty_cavity_photons(&self) -> f64 {
        self.eta * self.eta / (self.kappa * self.kappa + self.delta * self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_c", self.gamma_c),
            ("delta", self.delta),
            ("eta", self.eta),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(Error::param(field, format!("must be finite, got {value}")));
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::param("kappa", "must be positive"));
        }
        if self.g < 0.0 {
            return Err(Error::param("g", "must be non-negative"));
        }
        if self.gamma < 0.0 {
            return Err(Error::param("gamma", "must be non-negative"));
        }
        if self.gamma_c < 0.0 {
            return Err(Error::param("gamma_c", "must be non-negative"));
        }
        if self.eta < 0.0 {
            return Err(Error::param("eta", "must be non-negative"));
        }
        Ok(())
    }

    /// Default Fock truncation: three times the detuned empty-cavity photon
    /// number plus a fixed margin of 30 levels.
    pub fn default_n_max(&self) -> usize {
        (3.0 * self.empty_cavity_photons()).ceil() as usize + 30
    }
}
