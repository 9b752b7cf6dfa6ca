//! Mean-field steady state with a factorized qubit, including qubit decay
//! `gamma` and extra dephasing `gamma_c`.

use super::{classify_physical, Branch, Root, RootClass, RootSet, Theory};
use crate::error::Result;
use crate::params::SystemParams;
use crate::poly::Poly;
use crate::state::C64;

/// `S(n) = -(A + iB) / D(n)` with `D(n) = d0 + d1 n`. When `gamma_c = 0`
/// the common factor `gamma` is cancelled so the `gamma -> 0` limit is
/// regular.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shift {
    d0: f64,
    d1: f64,
    a: f64,
    b: f64,
    /// `D` at which the effective detuning `delta - B/D` changes sign.
    sat: f64,
    kappa: f64,
    delta: f64,
}

impl Shift {
    pub(crate) fn new(p: &SystemParams) -> Self {
        let g2 = p.g * p.g;
        let (d0, d1, a, b, sat) = if p.gamma_c == 0.0 {
            (
                p.delta * p.delta + p.gamma * p.gamma,
                2.0 * g2,
                g2 * p.gamma,
                g2 * p.delta,
                g2,
            )
        } else {
            let gp = p.gamma_perp();
            (
                p.gamma * (p.delta * p.delta + gp * gp),
                2.0 * g2 * gp,
                g2 * p.gamma * gp,
                g2 * p.gamma * p.delta,
                g2 * p.gamma,
            )
        };
        Self {
            d0,
            d1,
            a,
            b,
            sat,
            kappa: p.kappa,
            delta: p.delta,
        }
    }

    /// The shift vanishes identically (no coupling, or pure dephasing
    /// without decay).
    fn vanishes(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    fn d(&self, n: f64) -> f64 {
        self.d0 + self.d1 * n
    }

    pub(crate) fn value(&self, n: f64) -> C64 {
        if self.vanishes() {
            return C64::new(0.0, 0.0);
        }
        -C64::new(self.a, self.b) / self.d(n)
    }

    /// `|kappa - i delta - S(n)|^2`; `None` where clearing denominators
    /// introduced a spurious zero of `D`.
    pub(crate) fn denominator(&self, n: f64) -> Option<f64> {
        if self.vanishes() {
            return Some(self.kappa * self.kappa + self.delta * self.delta);
        }
        let d = self.d(n);
        if d == 0.0 {
            return None;
        }
        let re = self.kappa + self.a / d;
        let im = self.delta - self.b / d;
        Some(re * re + im * im)
    }

    /// `n [(kappa D + A)^2 + (delta D - B)^2] - eta^2 D^2`.
    fn polynomial(&self, eta: f64) -> Poly {
        let d = Poly::linear(self.d0, self.d1);
        let re = &d.scale(self.kappa) + &Poly::constant(self.a);
        let im = &d.scale(self.delta) - &Poly::constant(self.b);
        let bracket = &(&re * &re) + &(&im * &im);
        &(&Poly::linear(0.0, 1.0) * &bracket) - &(&d * &d).scale(eta * eta)
    }

    /// Whether `n` sits on the far side of the shifted resonance, i.e. on
    /// the bright branch.
    fn bright_side(&self, n: f64) -> bool {
        self.vanishes() || self.d(n) > self.sat
    }
}

impl Branch for Shift {
    fn photons(&self, p: f64) -> f64 {
        p
    }

    fn drive_sq(&self, p: f64) -> f64 {
        p * self.denominator(p).unwrap_or(f64::INFINITY)
    }
}

/// The dispersive shift `g <sigma> / <a>` at photon number `n`.
pub fn dispersive_shift(n: f64, params: &SystemParams) -> C64 {
    Shift::new(params).value(n)
}

/// `|kappa - i delta - S(n)|^2`, so that steady states satisfy
/// `n = eta^2 / den(n)`.
pub fn semiclassical_denominator(n: f64, params: &SystemParams) -> f64 {
    Shift::new(params).denominator(n).unwrap_or(f64::INFINITY)
}

/// Length of the Bloch vector of the mean-field qubit at `gamma = 0`.
pub fn semiclassical_pseudospin(n: f64, params: &SystemParams) -> f64 {
    let x = 2.0 * params.g * params.g * n;
    if x == 0.0 {
        return 1.0;
    }
    let r = x / (x + params.delta * params.delta);
    1.0 - r * r
}

pub(crate) fn residual(n: f64, eta: f64, den: Option<f64>) -> f64 {
    match den {
        Some(den) if !den.is_nan() => (n - eta * eta / den).abs(),
        _ => f64::INFINITY,
    }
}

/// Newton refinement of `n den(n) = eta^2` with a numerical derivative.
pub(crate) fn polish<B: Branch>(branch: &B, p0: f64, eta: f64) -> f64 {
    let target = eta * eta;
    let mut p = p0;
    for _ in 0..4 {
        let h = 1e-7 * p.abs().max(1e-300);
        let f = branch.drive_sq(p) - target;
        let df = (branch.drive_sq(p + h) - branch.drive_sq(p - h)) / (2.0 * h);
        if !(df.is_finite() && f.is_finite()) || df == 0.0 {
            break;
        }
        let next = p - f / df;
        if !next.is_finite() || (branch.drive_sq(next) - target).abs() >= f.abs() {
            break;
        }
        p = next;
    }
    p
}

pub fn semiclassical_roots(params: &SystemParams) -> Result<RootSet> {
    params.validate()?;
    let shift = Shift::new(params);
    let eta = params.eta;
    let tol = 1e-9 * (eta * eta).max(1.0);

    let candidates = if shift.vanishes() {
        vec![params.empty_cavity_photons()]
    } else {
        shift.polynomial(eta).real_roots()
    };

    let mut roots: Vec<Root> = Vec::new();
    for n0 in candidates {
        if !(n0 >= 0.0) {
            continue;
        }
        let mut n = n0;
        let mut res = residual(n, eta, shift.denominator(n));
        if res >= tol && !shift.vanishes() {
            n = polish(&shift, n0, eta).max(0.0);
            res = residual(n, eta, shift.denominator(n));
        }
        if res >= tol {
            continue;
        }
        if roots
            .iter()
            .any(|r| (r.n - n).abs() <= 1e-9 * n.max(1e-300))
        {
            continue;
        }
        roots.push(Root {
            n,
            class: RootClass::StableDim,
            residual: res,
            slope: shift.slope(n, eta),
        });
    }
    roots.sort_by(|a, b| a.n.total_cmp(&b.n));
    classify_physical(&mut roots, |r| shift.bright_side(r.n));

    Ok(RootSet {
        theory: Theory::Semiclassical,
        params: *params,
        roots,
        critical_point: false,
    })
}
