//! Truncated qubit ⊗ Fock space, matrix-free operator action and expectation
//! values.
//!
//! Amplitudes are stored as `index = q * (n_max + 1) + m`, with `q = 0` the
//! ground and `q = 1` the excited qubit level, so each qubit level owns a
//! contiguous Fock block.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance on the squared norm accepted by [`expectations`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Largest population the two highest retained Fock levels may carry.
pub const TRUNCATION_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Ground,
    Excited,
}

impl Qubit {
    #[inline]
    fn offset(self, n_max: usize) -> usize {
        match self {
            Qubit::Ground => 0,
            Qubit::Excited => n_max + 1,
        }
    }
}

#[inline]
pub fn basis_index(n_max: usize, q: Qubit, m: usize) -> usize {
    debug_assert!(m <= n_max);
    q.offset(n_max) + m
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_max: usize,
    amplitudes: Vec<C64>,
    norm_sq: f64,
}

impl PureState {
    /// `|g, 0⟩`.
    pub fn ground(n_max: usize) -> Self {
        Self::basis(n_max, Qubit::Ground, 0)
    }

    pub fn basis(n_max: usize, q: Qubit, m: usize) -> Self {
        assert!(m <= n_max, "photon number {m} above truncation {n_max}");
        let mut amplitudes = vec![ZERO; 2 * (n_max + 1)];
        amplitudes[basis_index(n_max, q, m)] = C64::new(1.0, 0.0);
        Self {
            n_max,
            amplitudes,
            norm_sq: 1.0,
        }
    }

    pub fn from_amplitudes(n_max: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 2 * (n_max + 1) {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes for n_max = {n_max}, got {}",
                2 * (n_max + 1),
                amplitudes.len()
            )));
        }
        let norm_sq = norm_sq(&amplitudes);
        Ok(Self {
            n_max,
            amplitudes,
            norm_sq,
        })
    }

    /// Coherent mode state `|alpha⟩` times a qubit basis state, truncated at
    /// `n_max` (not renormalized, so the truncated tail shows up as a norm
    /// deficit).
    pub fn coherent(n_max: usize, alpha: C64, q: Qubit) -> Self {
        let mut amplitudes = vec![ZERO; 2 * (n_max + 1)];
        let offset = q.offset(n_max);
        let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        amplitudes[offset] = c;
        for m in 1..=n_max {
            c = c * alpha / (m as f64).sqrt();
            amplitudes[offset + m] = c;
        }
        let norm_sq = norm_sq(&amplitudes);
        Self {
            n_max,
            amplitudes,
            norm_sq,
        }
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    #[inline]
    pub fn amplitude(&self, q: Qubit, m: usize) -> C64 {
        self.amplitudes[basis_index(self.n_max, q, m)]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Replaces the amplitudes in place and refreshes the cached norm.
    pub fn set_amplitudes(&mut self, amplitudes: &[C64]) {
        assert_eq!(amplitudes.len(), self.amplitudes.len());
        self.amplitudes.copy_from_slice(amplitudes);
        self.norm_sq = norm_sq(&self.amplitudes);
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / norm_sq(&self.amplitudes).sqrt();
        for z in &mut self.amplitudes {
            *z *= scale;
        }
        self.norm_sq = norm_sq(&self.amplitudes);
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `c1 * self + c2 * other`.
    pub fn combine(&self, c1: C64, other: &PureState, c2: C64) -> PureState {
        assert_eq!(self.n_max, other.n_max);
        let amplitudes: Vec<C64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| c1 * a + c2 * b)
            .collect();
        let norm_sq = norm_sq(&amplitudes);
        PureState {
            n_max: self.n_max,
            amplitudes,
            norm_sq,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Relative population of the two highest retained Fock levels.
    pub fn top_population(&self) -> f64 {
        top_population(self.n_max, &self.amplitudes)
    }

    pub fn check_truncation(&self, t: f64) -> Result<()> {
        check_truncation(self.n_max, &self.amplitudes, t)
    }

    /// Reduced state of the qubit after tracing out the mode.
    pub fn reduced_qubit(&self) -> QubitState {
        reduced_qubit(self.n_max, &self.amplitudes)
    }
}

#[inline]
pub(crate) fn norm_sq(amplitudes: &[C64]) -> f64 {
    amplitudes.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn top_population(n_max: usize, amplitudes: &[C64]) -> f64 {
    let block = n_max + 1;
    let lo = n_max.saturating_sub(1);
    let mut top = 0.0;
    for m in lo..=n_max {
        top += amplitudes[m].norm_sqr() + amplitudes[block + m].norm_sqr();
    }
    top / norm_sq(amplitudes)
}

pub(crate) fn check_truncation(n_max: usize, amplitudes: &[C64], t: f64) -> Result<()> {
    let population = top_population(n_max, amplitudes);
    if population > TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            t,
            population,
            n_max,
        });
    }
    Ok(())
}

/// Matrix-free Jaynes-Cummings generator on the truncated space.
///
/// Holds the per-level diagonal of the non-Hermitian effective Hamiltonian
/// `H - i kappa a†a - i gamma σ†σ` and a `sqrt(m)` table; off-diagonal terms
/// are applied as a stencil.
#[derive(Debug, Clone)]
pub struct JcOperator {
    n_max: usize,
    g: f64,
    eta: f64,
    sqrt: Vec<f64>,
    diag_ground: Vec<C64>,
    diag_excited: Vec<C64>,
}

impl JcOperator {
    /// Hermitian part only (no decay terms).
    pub fn hamiltonian(params: &SystemParams, n_max: usize) -> Self {
        Self::build(params, n_max, false)
    }

    /// `H_eff = H - i kappa a†a - i gamma σ†σ`.
    pub fn effective(params: &SystemParams, n_max: usize) -> Self {
        Self::build(params, n_max, true)
    }

    fn build(params: &SystemParams, n_max: usize, damped: bool) -> Self {
        let (kappa, gamma) = if damped {
            (params.kappa, params.gamma)
        } else {
            (0.0, 0.0)
        };
        let sqrt = (0..=n_max + 1).map(|m| (m as f64).sqrt()).collect();
        let diag_ground = (0..=n_max)
            .map(|m| C64::new(-params.delta * m as f64, -kappa * m as f64))
            .collect();
        let diag_excited = (0..=n_max)
            .map(|m| C64::new(-params.delta * (m + 1) as f64, -kappa * m as f64 - gamma))
            .collect();
        Self {
            n_max,
            g: params.g,
            eta: params.eta,
            sqrt,
            diag_ground,
            diag_excited,
        }
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// `out = H psi` (or `H_eff psi` for an effective operator).
    pub fn apply(&self, psi: &[C64], out: &mut [C64]) {
        let n = self.n_max;
        let block = n + 1;
        debug_assert_eq!(psi.len(), 2 * block);
        debug_assert_eq!(out.len(), 2 * block);
        let (pg, pe) = psi.split_at(block);
        let (og, oe) = out.split_at_mut(block);
        let ig = C64::new(0.0, self.g);
        let ieta = C64::new(0.0, self.eta);
        let s = &self.sqrt;

        for m in 0..=n {
            // ground block: -Δ m + i g sqrt(m) e_{m-1} + i η (sqrt(m) g_{m-1} - sqrt(m+1) g_{m+1})
            let mut acc = self.diag_ground[m] * pg[m];
            if m > 0 {
                acc += ig * s[m] * pe[m - 1];
                acc += ieta * pg[m - 1] * s[m];
            }
            if m < n {
                acc -= ieta * pg[m + 1] * s[m + 1];
            }
            og[m] = acc;

            // excited block: -Δ (m+1) - i g sqrt(m+1) g_{m+1} + i η (sqrt(m) e_{m-1} - sqrt(m+1) e_{m+1})
            let mut acc = self.diag_excited[m] * pe[m];
            if m < n {
                acc -= ig * s[m + 1] * pg[m + 1];
                acc -= ieta * pe[m + 1] * s[m + 1];
            }
            if m > 0 {
                acc += ieta * pe[m - 1] * s[m];
            }
            oe[m] = acc;
        }
    }

    /// `out = -i H_eff psi`, the right-hand side of the no-jump evolution.
    #[inline]
    pub fn schrodinger_rhs(&self, psi: &[C64], out: &mut [C64]) {
        self.apply(psi, out);
        for z in out.iter_mut() {
            *z = C64::new(z.im, -z.re);
        }
    }

    /// `out = a psi`.
    pub fn lower_mode(&self, psi: &[C64], out: &mut [C64]) {
        let block = self.n_max + 1;
        for q in 0..2 {
            let base = q * block;
            for m in 0..self.n_max {
                out[base + m] = psi[base + m + 1] * self.sqrt[m + 1];
            }
            out[base + self.n_max] = ZERO;
        }
    }

    /// `out = σ psi`.
    pub fn lower_qubit(&self, psi: &[C64], out: &mut [C64]) {
        let block = self.n_max + 1;
        let (og, oe) = out.split_at_mut(block);
        og.copy_from_slice(&psi[block..]);
        oe.fill(ZERO);
    }
}

/// `H |psi⟩` with `H = -Δ(a†a + σ†σ) + i g (a†σ - aσ†) + i η (a† - a)`.
/// Linear in the input; no normalization.
pub fn apply_hamiltonian(state: &PureState, params: &SystemParams) -> PureState {
    let op = JcOperator::hamiltonian(params, state.n_max);
    let mut out = vec![ZERO; state.dim()];
    op.apply(&state.amplitudes, &mut out);
    let norm_sq = norm_sq(&out);
    PureState {
        n_max: state.n_max,
        amplitudes: out,
        norm_sq,
    }
}

/// Expectation values against a normalized pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub n_mean: f64,
    pub a_mean: C64,
    pub sigma_mean: C64,
    pub sigma_z_mean: f64,
    pub photon_variance: f64,
}

impl Observables {
    /// `⟨σ†σ⟩`.
    #[inline]
    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.sigma_z_mean)
    }

    /// Qubit reduced density matrix implied by `⟨σ⟩` and `⟨σz⟩`.
    pub fn qubit(&self) -> QubitState {
        QubitState {
            excited: self.excited_population(),
            coherence: self.sigma_mean,
        }
    }
}

/// Rejects states whose squared norm deviates from one by more than
/// [`NORM_TOLERANCE`].
pub fn expectations(state: &PureState) -> Result<Observables> {
    let norm_sq = norm_sq(&state.amplitudes);
    if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(moments(state.n_max, &state.amplitudes))
}

/// Expectation values of the normalized version of `amplitudes`.
pub(crate) fn moments(n_max: usize, amplitudes: &[C64]) -> Observables {
    let block = n_max + 1;
    let (pg, pe) = amplitudes.split_at(block);
    let mut norm = 0.0;
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    let mut excited = 0.0;
    let mut a = ZERO;
    let mut sigma = ZERO;
    for m in 0..=n_max {
        let wg = pg[m].norm_sqr();
        let we = pe[m].norm_sqr();
        let w = wg + we;
        let mf = m as f64;
        norm += w;
        n1 += mf * w;
        n2 += mf * mf * w;
        excited += we;
        sigma += pg[m].conj() * pe[m];
        if m < n_max {
            let s = ((m + 1) as f64).sqrt();
            a += (pg[m].conj() * pg[m + 1] + pe[m].conj() * pe[m + 1]) * s;
        }
    }
    let inv = 1.0 / norm;
    let n_mean = n1 * inv;
    let excited = excited * inv;
    Observables {
        n_mean,
        a_mean: a * inv,
        sigma_mean: sigma * inv,
        sigma_z_mean: 2.0 * excited - 1.0,
        photon_variance: (n2 * inv - n_mean * n_mean).max(0.0),
    }
}

pub(crate) fn reduced_qubit(n_max: usize, amplitudes: &[C64]) -> QubitState {
    let block = n_max + 1;
    let (pg, pe) = amplitudes.split_at(block);
    let norm = norm_sq(amplitudes);
    let excited: f64 = pe.iter().map(|z| z.norm_sqr()).sum();
    let coherence: C64 = pe.iter().zip(pg).map(|(e, g)| e * g.conj()).sum();
    QubitState {
        excited: excited / norm,
        coherence: coherence / norm,
    }
}

/// 2x2 qubit density matrix, stored as the excited population and the
/// coherence `ρ_eg = ⟨σ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub excited: f64,
    pub coherence: C64,
}

impl QubitState {
    pub fn ground(&self) -> f64 {
        1.0 - self.excited
    }

    pub fn sigma_z(&self) -> f64 {
        2.0 * self.excited - 1.0
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.excited * self.excited
            + self.ground() * self.ground()
            + 2.0 * self.coherence.norm_sqr()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_gap = (0.25 * self.sigma_z().powi(2) + self.coherence.norm_sqr()).sqrt();
        (0.5 + half_gap, 0.5 - half_gap)
    }
}
