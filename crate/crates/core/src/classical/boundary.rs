//! Bistability boundaries on the detuning-drive plane.
//!
//! Along a solution branch `eta^2 = E(n)`. Inside the bistable window
//! `E` rises to a local maximum (the upper boundary, where the dim branch
//! ends) and falls to a local minimum (the lower boundary, where the
//! bright branch ends). Both are found on a log-spaced `n` grid and then
//! refined by golden-section search, which resolves windows far narrower
//! than any drive grid would.

use super::intuitive::intuitive_critical_drive;
use super::neoclassical::Neo;
use super::semiclassical::Shift;
use super::{Branch, Theory};
use crate::error::{Error, Result};
use crate::exec::{par_map, Execution};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub delta: f64,
    pub eta_lower: f64,
    pub eta_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub theory: Theory,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_c: f64,
    pub points: Vec<BoundaryPoint>,
}

impl BoundaryCurve {
    pub fn at(&self, delta: f64) -> Option<&BoundaryPoint> {
        self.points.iter().find(|p| p.delta == delta)
    }
}

const LOG_N_MIN: f64 = -16.0;
const LOG_N_MAX: f64 = 8.0;
const PER_DECADE: usize = 200;

/// Squared drive along the physical branch as a function of `ln n`.
fn branch_drive(theory: Theory, params: &SystemParams) -> Box<dyn Fn(f64) -> f64> {
    match theory {
        Theory::Semiclassical => {
            let s = Shift::new(params);
            Box::new(move |ln_n| s.drive_sq(ln_n.exp()))
        }
        Theory::Neoclassical | Theory::Intuitive => {
            let neo = Neo::new(params);
            Box::new(move |ln_n| neo.drive_sq(neo.u_of(ln_n.exp())))
        }
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// The bistable window `(eta_lower, eta_upper)` at the given parameters
/// (the drive in `params` is ignored), or `None` when the branch is
/// monotone.
pub(crate) fn window(theory: Theory, params: &SystemParams) -> Option<(f64, f64)> {
    if params.g == 0.0 {
        return None;
    }
    if theory == Theory::Intuitive {
        let lo = intuitive_critical_drive(params);
        let hi = params.g / 2.0;
        return (params.delta > 0.0 && lo < hi).then_some((lo, hi));
    }
    let e = branch_drive(theory, params);
    let steps = (LOG_N_MAX - LOG_N_MIN) as usize * PER_DECADE;
    let h = (LOG_N_MAX - LOG_N_MIN) * std::f64::consts::LN_10 / steps as f64;
    let x0 = LOG_N_MIN * std::f64::consts::LN_10;
    let xs: Vec<f64> = (0..=steps).map(|i| x0 + h * i as f64).collect();
    let es: Vec<f64> = xs.iter().map(|&x| e(x)).collect();

    let mut upper = None;
    for i in 1..steps {
        let rising = es[i] > es[i - 1];
        let falling_next = es[i + 1] < es[i];
        if upper.is_none() && rising && falling_next {
            upper = Some(golden_max(&*e, xs[i - 1], xs[i + 1]));
        } else if upper.is_some() && !rising && !falling_next {
            let lower = -golden_max(&|x| -e(x), xs[i - 1], xs[i + 1]);
            let up = upper.unwrap();
            return Some((lower.sqrt(), up.sqrt()));
        }
    }
    None
}

/// Traces the window over a sorted grid of positive detunings, taking
/// `g`, `kappa`, `gamma` and `gamma_c` from `base`.
pub fn trace_boundary(
    theory: Theory,
    base: &SystemParams,
    delta_grid: &[f64],
) -> Result<BoundaryCurve> {
    trace_boundary_with(Execution::default(), theory, base, delta_grid)
}

pub fn trace_boundary_with(
    exec: Execution,
    theory: Theory,
    base: &SystemParams,
    delta_grid: &[f64],
) -> Result<BoundaryCurve> {
    base.validate()?;
    if delta_grid.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidArgument(
            "detuning grid must be positive and finite".into(),
        ));
    }
    if delta_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "detuning grid must be sorted".into(),
        ));
    }
    let points = par_map(exec, delta_grid, |&delta| {
        window(theory, &base.with_delta(delta)).map(|(eta_lower, eta_upper)| BoundaryPoint {
            delta,
            eta_lower,
            eta_upper,
        })
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(BoundaryCurve {
        theory,
        g: base.g,
        kappa: base.kappa,
        gamma: base.gamma,
        gamma_c: base.gamma_c,
        points,
    })
}
