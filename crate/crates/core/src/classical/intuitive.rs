//! Coherent-state estimate from the nearly equidistant upper dressed
//! ladder: `n = eta^2 / (kappa^2 + (delta - g / (2 sqrt n))^2)`, a
//! quadratic in `x = sqrt n`.

use super::semiclassical::residual;
use super::{Root, RootClass, RootSet, Theory};
use crate::error::{Error, Result};
use crate::params::SystemParams;

struct Ladder {
    g: f64,
    kappa: f64,
    delta: f64,
}

impl Ladder {
    fn den(&self, x: f64) -> f64 {
        let s = self.delta - self.g / (2.0 * x);
        self.kappa * self.kappa + s * s
    }

    /// `dn/d(eta)` from implicit differentiation of the quadratic.
    fn slope(&self, x: f64, eta: f64) -> f64 {
        let a = self.kappa * self.kappa + self.delta * self.delta;
        4.0 * x * eta / (2.0 * a * x - self.g * self.delta)
    }
}

/// Drive above which the estimate has real solutions,
/// `g kappa / (2 sqrt(kappa^2 + delta^2))`.
pub fn intuitive_critical_drive(params: &SystemParams) -> f64 {
    params.g * params.kappa / (2.0 * params.kappa.hypot(params.delta))
}

/// Both roots of the quadratic when real. The larger one is the bright
/// estimate; the smaller one is flagged nonphysical once `sqrt n < 0`.
pub fn intuitive_photon_number(params: &SystemParams) -> Result<RootSet> {
    params.validate()?;
    if params.delta <= 0.0 && params.g != 0.0 {
        return Err(Error::param(
            "delta",
            "the ladder estimate assumes a positive detuning",
        ));
    }
    let ladder = Ladder {
        g: params.g,
        kappa: params.kappa,
        delta: params.delta,
    };
    let eta = params.eta;
    let mut roots = Vec::new();

    if params.g == 0.0 {
        let n = params.empty_cavity_photons();
        roots.push(Root {
            n,
            class: RootClass::StableBright,
            residual: 0.0,
            slope: ladder.slope(n.sqrt(), eta),
        });
    } else {
        // (kappa^2 + delta^2) x^2 - g delta x + g^2/4 - eta^2 = 0
        let a = params.kappa * params.kappa + params.delta * params.delta;
        let b = -params.g * params.delta;
        let c = params.g * params.g / 4.0 - eta * eta;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = -0.5 * (b - disc.sqrt());
            let x1 = q / a;
            let x2 = if q != 0.0 { c / q } else { 0.0 };
            for x in [x2, x1] {
                let n = x * x;
                let class = if x > x2 || disc == 0.0 {
                    RootClass::StableBright
                } else if x < 0.0 {
                    RootClass::Nonphysical
                } else {
                    RootClass::Unstable
                };
                roots.push(Root {
                    n,
                    class,
                    residual: residual(n, eta, Some(ladder.den(x))),
                    slope: ladder.slope(x, eta),
                });
            }
            if disc == 0.0 {
                roots.truncate(1);
            }
        }
    }

    Ok(RootSet {
        theory: Theory::Intuitive,
        params: *params,
        roots,
        critical_point: false,
    })
}
