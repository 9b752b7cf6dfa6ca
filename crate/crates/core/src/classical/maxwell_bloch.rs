//! Factorized mean-field (Maxwell-Bloch) equations for `<a>`, `<sigma>`
//! and `<sigma_z>`, with transverse damping `gamma + gamma_c`.
//!
//! The inversion obeys `d<sigma_z> = 2 [-2 g Re(<a>* <sigma>) - gamma (<sigma_z> + 1)]`,
//! the Heisenberg rate for a qubit jump operator `sqrt(2 gamma) sigma`.
//! Only with this factor is `4 |<sigma>|^2 + <sigma_z>^2` conserved at
//! `gamma = 0`; the stationary states do not depend on it.

use super::semiclassical::Shift;
use crate::error::{Error, Result};
use crate::ode::{Dopri5, Tolerances};
use crate::params::SystemParams;
use crate::state::C64;

pub const MEAN_FIELD_TOLERANCES: Tolerances = Tolerances::new(1e-10, 1e-12);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub a_mean: C64,
    pub sigma_mean: C64,
    pub sigma_z_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldSample {
    pub t: f64,
    pub state: MeanFieldState,
}

impl MeanFieldState {
    /// Empty mode, qubit in the ground state.
    pub fn ground() -> Self {
        Self {
            a_mean: C64::new(0.0, 0.0),
            sigma_mean: C64::new(0.0, 0.0),
            sigma_z_mean: -1.0,
        }
    }

    pub fn photons(&self) -> f64 {
        self.a_mean.norm_sqr()
    }

    pub fn pseudospin(&self) -> f64 {
        4.0 * self.sigma_mean.norm_sqr() + self.sigma_z_mean * self.sigma_z_mean
    }

    /// The steady state belonging to a semiclassical photon number `n`,
    /// with the qubit variables from the stationary polarization and
    /// population equations.
    pub fn semiclassical_fixed_point(n: f64, params: &SystemParams) -> Self {
        let shift = Shift::new(params).value(n);
        let a_mean = params.eta / (C64::new(params.kappa, -params.delta) - shift);
        let sigma_mean = if params.g == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            shift * a_mean / params.g
        };
        let g2n = params.g * params.g * n;
        let sigma_z_mean = if params.g == 0.0 {
            -1.0
        } else if params.gamma_c == 0.0 {
            let r = params.delta * params.delta + params.gamma * params.gamma;
            if r == 0.0 {
                0.0
            } else {
                -r / (r + 2.0 * g2n)
            }
        } else {
            let gp = params.gamma_perp();
            let r = params.gamma * (params.delta * params.delta + gp * gp);
            if r == 0.0 {
                0.0
            } else {
                -r / (r + 2.0 * g2n * gp)
            }
        };
        Self {
            a_mean,
            sigma_mean,
            sigma_z_mean,
        }
    }

    fn pack(&self) -> Vec<C64> {
        vec![
            self.a_mean,
            self.sigma_mean,
            C64::new(self.sigma_z_mean, 0.0),
        ]
    }

    fn unpack(y: &[C64]) -> Self {
        Self {
            a_mean: y[0],
            sigma_mean: y[1],
            sigma_z_mean: y[2].re,
        }
    }

    /// Time derivatives `(d<a>, d<sigma>, d<sigma_z>)`.
    pub fn rhs(&self, params: &SystemParams) -> (C64, C64, f64) {
        let mut dy = [C64::new(0.0, 0.0); 3];
        rhs(params, &self.pack(), &mut dy);
        (dy[0], dy[1], dy[2].re)
    }

    /// Largest component magnitude of the time derivative.
    pub fn rhs_norm(&self, params: &SystemParams) -> f64 {
        let (a, s, z) = self.rhs(params);
        a.norm().max(s.norm()).max(z.abs())
    }
}

fn rhs(p: &SystemParams, y: &[C64], dy: &mut [C64]) {
    let (a, s, z) = (y[0], y[1], y[2].re);
    dy[0] = C64::new(-p.kappa, p.delta) * a + p.g * s + p.eta;
    dy[1] = C64::new(-p.gamma_perp(), p.delta) * s + p.g * a * z;
    dy[2] = C64::new(
        2.0 * (-2.0 * p.g * (a.conj() * s).re - p.gamma * (z + 1.0)),
        0.0,
    );
}

/// Integrates from `initial` to `t_final`, sampling every `dt_out`
/// (the initial state is the first sample).
pub fn maxwell_bloch_integrate(
    initial: MeanFieldState,
    params: &SystemParams,
    t_final: f64,
    dt_out: f64,
) -> Result<Vec<MeanFieldSample>> {
    params.validate()?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument("t_final must be positive".into()));
    }
    if !(dt_out > 0.0 && dt_out.is_finite()) {
        return Err(Error::InvalidArgument("dt_out must be positive".into()));
    }
    let p = *params;
    let mut ode = Dopri5::new(
        move |_t: f64, y: &[C64], dy: &mut [C64]| rhs(&p, y, dy),
        0.0,
        initial.pack(),
        MEAN_FIELD_TOLERANCES,
    );
    let count = (t_final / dt_out + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(count + 1);
    out.push(MeanFieldSample {
        t: 0.0,
        state: initial,
    });
    let mut next = 1usize;
    let mut buf = vec![C64::new(0.0, 0.0); 3];
    ode.integrate_to(t_final, |s| {
        while next <= count && next as f64 * dt_out <= s.t() {
            let t = next as f64 * dt_out;
            s.dense(t, &mut buf);
            out.push(MeanFieldSample {
                t,
                state: MeanFieldState::unpack(&buf),
            });
            next += 1;
        }
        Ok(())
    })?;
    Ok(out)
}
