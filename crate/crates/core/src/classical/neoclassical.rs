//! Neoclassical steady state: a coherent mode driving a qubit that stays
//! in a pure dressed state, `gamma` ignored.
//!
//! With `u = sqrt(4 g^2 n + delta^2)` the fixed point becomes a quartic in
//! `u`. Its negative-`u` root solves the same equation with the sign of the
//! qubit response flipped, and is reported as nonphysical. `sgn(0)` is
//! taken as `+1`.

use super::semiclassical::{polish, residual};
use super::{classify_physical, Branch, Root, RootClass, RootSet, Theory};
use crate::error::Result;
use crate::params::SystemParams;
use crate::poly::Poly;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Neo {
    g2: f64,
    kappa: f64,
    /// `|delta|`; only the magnitude enters once `sgn(delta)` is absorbed.
    delta: f64,
}

impl Neo {
    pub(crate) fn new(p: &SystemParams) -> Self {
        Self {
            g2: p.g * p.g,
            kappa: p.kappa,
            delta: p.delta.abs(),
        }
    }

    fn photons_of(&self, u: f64) -> f64 {
        (u * u - self.delta * self.delta) / (4.0 * self.g2)
    }

    /// `kappa^2 + (|delta| - g^2/u)^2` for signed `u`.
    fn den_u(&self, u: f64) -> f64 {
        let s = self.delta - self.g2 / u;
        self.kappa * self.kappa + s * s
    }

    pub(crate) fn u_of(&self, n: f64) -> f64 {
        (4.0 * self.g2 * n + self.delta * self.delta).sqrt()
    }

    /// `(u^2 - delta^2)((kappa^2 + delta^2) u^2 - 2 |delta| g^2 u + g^4) - 4 g^2 eta^2 u^2`.
    fn polynomial(&self, eta: f64) -> Poly {
        let d2 = self.delta * self.delta;
        let a = Poly::new(vec![-d2, 0.0, 1.0]);
        let b = Poly::new(vec![
            self.g2 * self.g2,
            -2.0 * self.delta * self.g2,
            self.kappa * self.kappa + d2,
        ]);
        &(&a * &b) - &Poly::new(vec![0.0, 0.0, 4.0 * self.g2 * eta * eta])
    }
}

impl Branch for Neo {
    fn photons(&self, p: f64) -> f64 {
        self.photons_of(p)
    }

    fn drive_sq(&self, p: f64) -> f64 {
        self.photons_of(p) * self.den_u(p)
    }
}

/// `kappa^2 + (delta - sgn(delta) g^2 / sqrt(4 g^2 n + delta^2))^2`.
pub fn neoclassical_denominator(n: f64, params: &SystemParams) -> f64 {
    let neo = Neo::new(params);
    neo.den_u(neo.u_of(n))
}

pub fn neoclassical_roots(params: &SystemParams) -> Result<RootSet> {
    params.validate()?;
    let eta = params.eta;
    let neo = Neo::new(params);
    let tol = 1e-9 * (eta * eta).max(1.0);
    let mut critical_point = false;

    let mut roots: Vec<Root> = Vec::new();
    if neo.g2 == 0.0 {
        let n = params.empty_cavity_photons();
        roots.push(Root {
            n,
            class: RootClass::StableBright,
            residual: 0.0,
            slope: 2.0 * eta / (neo.kappa * neo.kappa + neo.delta * neo.delta),
        });
    } else if neo.delta == 0.0 {
        // u^2 (kappa^2 u^2 + g^4 - 4 g^2 eta^2): the double zero is the
        // vacuum limit of the dim branch, present below eta = g/2.
        let half_g = neo.g2.sqrt() / 2.0;
        if eta <= half_g {
            critical_point = eta == half_g;
            roots.push(Root {
                n: 0.0,
                class: RootClass::StableDim,
                residual: 0.0,
                slope: 0.0,
            });
        } else {
            let n = (eta * eta - neo.g2 / 4.0) / (neo.kappa * neo.kappa);
            let u = neo.u_of(n);
            let res = residual(n, eta, Some(neo.den_u(u)));
            roots.push(Root {
                n,
                class: RootClass::Nonphysical,
                residual: residual(n, eta, Some(neo.den_u(-u))),
                slope: neo.slope(-u, eta),
            });
            roots.push(Root {
                n,
                class: RootClass::StableBright,
                residual: res,
                slope: neo.slope(u, eta),
            });
        }
    } else {
        let mut seen: Vec<f64> = Vec::new();
        for u0 in neo.polynomial(eta).real_roots() {
            if u0.abs() < neo.delta {
                continue;
            }
            let mut u = u0;
            let mut res = residual(neo.photons_of(u), eta, Some(neo.den_u(u)));
            if res >= tol {
                u = polish(&neo, u0, eta);
                if u.abs() < neo.delta {
                    u = neo.delta.copysign(u0);
                }
                res = residual(neo.photons_of(u), eta, Some(neo.den_u(u)));
            }
            if res >= tol || seen.iter().any(|s| (s - u).abs() <= 1e-12 * u.abs()) {
                continue;
            }
            seen.push(u);
            roots.push(Root {
                n: neo.photons_of(u),
                class: if u < 0.0 {
                    RootClass::Nonphysical
                } else {
                    RootClass::StableDim
                },
                residual: res,
                slope: neo.slope(u, eta),
            });
        }
    }

    roots.sort_by(|a, b| a.n.total_cmp(&b.n));
    let g2 = neo.g2;
    let delta = neo.delta;
    classify_physical(&mut roots, |r| {
        g2 == 0.0 || delta == 0.0 || (4.0 * g2 * r.n + delta * delta).sqrt() * delta > g2
    });

    Ok(RootSet {
        theory: Theory::Neoclassical,
        params: *params,
        roots,
        critical_point,
    })
}
