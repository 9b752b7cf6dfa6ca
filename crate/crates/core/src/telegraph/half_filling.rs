use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfFillingSearch {
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub target: f64,
    /// Accepted distance of the filling factor from `target`.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl HalfFillingSearch {
    pub fn new(eta_lo: f64, eta_hi: f64) -> Self {
        Self {
            eta_lo,
            eta_hi,
            target: 0.5,
            tolerance: 0.05,
            max_evaluations: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfFilling {
    pub eta: f64,
    pub filling: f64,
    pub converged: bool,
    /// Every `(eta, F)` evaluated, in order.
    pub history: Vec<(f64, f64)>,
}

/// Illinois-type regula falsi on `F(eta) − target`. `filling` is expected
/// to increase with the drive. Returns the best evaluation seen, flagged
/// unconverged if the budget ran out first.
pub fn find_half_filling(
    search: &HalfFillingSearch,
    mut filling: impl FnMut(f64) -> Result<f64>,
) -> Result<HalfFilling> {
    let HalfFillingSearch {
        eta_lo,
        eta_hi,
        target,
        tolerance,
        max_evaluations,
    } = *search;
    if !(eta_lo.is_finite() && eta_hi.is_finite() && eta_lo < eta_hi) || max_evaluations < 2 {
        return Err(Error::InvalidArgument(format!(
            "bad half-filling bracket [{eta_lo}, {eta_hi}]"
        )));
    }
    let mut history = Vec::new();
    let mut eval = |eta: f64, history: &mut Vec<(f64, f64)>| -> Result<f64> {
        let f = filling(eta)?;
        history.push((eta, f));
        Ok(f - target)
    };
    let finish = |history: Vec<(f64, f64)>| {
        let &(eta, f) = history
            .iter()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .unwrap();
        HalfFilling {
            eta,
            filling: f,
            converged: (f - target).abs() <= tolerance,
            history,
        }
    };

    let (mut a, mut b) = (eta_lo, eta_hi);
    let mut fa = eval(a, &mut history)?;
    if fa.abs() <= tolerance {
        return Ok(finish(history));
    }
    let mut fb = eval(b, &mut history)?;
    if fb.abs() <= tolerance {
        return Ok(finish(history));
    }
    if fa * fb > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "filling factor does not cross {target} on [{eta_lo}, {eta_hi}]: F = {} and {}",
            fa + target,
            fb + target
        )));
    }
    while history.len() < max_evaluations {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = eval(c, &mut history)?;
        if fc.abs() <= tolerance {
            break;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
    }
    Ok(finish(history))
}
