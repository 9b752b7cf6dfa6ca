//! Adaptive Dormand-Prince 5(4) integrator over complex vectors, with the
//! standard fourth-order continuous extension for dense output.

use crate::error::{Error, Result};
use crate::state::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub const fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

/// Right-hand side `dy = f(t, y)`.
pub trait Rhs {
    fn eval(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

impl<F> Rhs for F
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    #[inline]
    fn eval(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self(t, y, dy)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub evaluations: u64,
    pub accepted: u64,
    pub rejected: u64,
}

pub struct Dopri5<R> {
    rhs: R,
    tol: Tolerances,
    h_max: f64,
    t: f64,
    y: Vec<C64>,
    h: f64,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
    fsal: bool,
    // continuous extension of the last accepted step
    t_prev: f64,
    h_last: f64,
    cont: [Vec<C64>; 5],
    stats: Stats,
}

impl<R: Rhs> Dopri5<R> {
    pub fn new(rhs: R, t0: f64, y0: Vec<C64>, tol: Tolerances) -> Self {
        let n = y0.len();
        let zeros = || vec![C64::new(0.0, 0.0); n];
        Self {
            rhs,
            tol,
            h_max: f64::INFINITY,
            t: t0,
            y: y0,
            h: 0.0,
            k: std::array::from_fn(|_| zeros()),
            stage: zeros(),
            y_new: zeros(),
            fsal: false,
            t_prev: t0,
            h_last: 0.0,
            cont: std::array::from_fn(|_| zeros()),
            stats: Stats::default(),
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn y(&self) -> &[C64] {
        &self.y
    }

    #[inline]
    pub fn stats(&self) -> Stats {
        self.stats
    }

    #[inline]
    pub fn rhs(&self) -> &R {
        &self.rhs
    }

    /// Start of the interval covered by [`Dopri5::dense`].
    #[inline]
    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    /// Restart from a new point, e.g. after a discontinuous update of the
    /// state. The current step-size proposal is kept.
    pub fn reset(&mut self, t: f64, y: &[C64]) {
        self.t = t;
        self.y.copy_from_slice(y);
        self.fsal = false;
        self.t_prev = t;
        self.h_last = 0.0;
    }

    fn error_norm(&self, err: impl Iterator<Item = (C64, C64, C64)>) -> f64 {
        let mut acc = 0.0;
        let mut n = 0usize;
        for (e, y0, y1) in err {
            let sc = self.tol.atol + self.tol.rtol * y0.norm().max(y1.norm());
            acc += (e.norm() / sc).powi(2);
            n += 1;
        }
        (acc / n.max(1) as f64).sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let n = self.y.len();
        let f0 = &mut self.k[0];
        self.rhs.eval(self.t, &self.y, f0);
        self.stats.evaluations += 1;
        self.fsal = true;
        let sc = |y: C64| self.tol.atol + self.tol.rtol * y.norm();
        let d0 = (self
            .y
            .iter()
            .map(|y| (y.norm() / sc(*y)).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt();
        let d1 = (self
            .y
            .iter()
            .zip(self.k[0].iter())
            .map(|(y, f)| (f.norm() / sc(*y)).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        for i in 0..n {
            self.stage[i] = self.y[i] + self.k[0][i] * h0;
        }
        let (head, tail) = self.k.split_at_mut(1);
        self.rhs.eval(self.t + h0, &self.stage, &mut tail[0]);
        self.stats.evaluations += 1;
        let d2 = (self
            .y
            .iter()
            .zip(head[0].iter().zip(tail[0].iter()))
            .map(|(y, (f0, f1))| ((f1 - f0).norm() / sc(*y)).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Takes one accepted step without passing `t_limit`. On return
    /// [`Dopri5::dense`] covers `[t_prev, t]`.
    pub fn step(&mut self, t_limit: f64) -> Result<()> {
        if self.h == 0.0 {
            self.h = self.initial_step();
        }
        if !self.fsal {
            self.rhs.eval(self.t, &self.y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal = true;
        }
        let n = self.y.len();
        loop {
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.h_max);
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            self.stages(h);
            let err = {
                let k = &self.k;
                let y = &self.y;
                let y_new = &self.y_new;
                self.error_norm((0..n).map(|i| {
                    let e = (k[0][i] * E1
                        + k[2][i] * E3
                        + k[3][i] * E4
                        + k[4][i] * E5
                        + k[5][i] * E6
                        + k[6][i] * E7)
                        * h;
                    (e, y[i], y_new[i])
                }))
            };
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * FAC_MIN;
                continue;
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if err <= 1.0 {
                self.stats.accepted += 1;
                self.build_dense(h);
                self.t_prev = self.t;
                self.h_last = h;
                self.t = if last { t_limit } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                // a truncated final step says nothing about the next size
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                return Ok(());
            }
            self.stats.rejected += 1;
            self.h = h * fac.min(1.0);
        }
    }

    fn stages(&mut self, h: f64) {
        let n = self.y.len();
        let t = self.t;
        let y = &self.y;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let s = &mut self.stage;

        for i in 0..n {
            s[i] = y[i] + k1[i] * (h * A21);
        }
        self.rhs.eval(t + C2 * h, s, k2);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        self.rhs.eval(t + C3 * h, s, k3);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        self.rhs.eval(t + C4 * h, s, k4);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        self.rhs.eval(t + C5 * h, s, k5);
        for i in 0..n {
            s[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        self.rhs.eval(t + h, s, k6);
        let y_new = &mut self.y_new;
        for i in 0..n {
            y_new[i] =
                y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        self.rhs.eval(t + h, y_new, k7);
        self.stats.evaluations += 6;
    }

    fn build_dense(&mut self, h: f64) {
        let n = self.y.len();
        let k = &self.k;
        let [r1, r2, r3, r4, r5] = &mut self.cont;
        for i in 0..n {
            let y0 = self.y[i];
            let y1 = self.y_new[i];
            let diff = y1 - y0;
            let bspl = k[0][i] * h - diff;
            r1[i] = y0;
            r2[i] = diff;
            r3[i] = bspl;
            r4[i] = diff - k[6][i] * h - bspl;
            r5[i] = (k[0][i] * D1
                + k[2][i] * D3
                + k[3][i] * D4
                + k[4][i] * D5
                + k[5][i] * D6
                + k[6][i] * D7)
                * h;
        }
    }

    /// Interpolated state at `t` within the last accepted step.
    pub fn dense(&self, t: f64, out: &mut [C64]) {
        if self.h_last == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let theta = ((t - self.t_prev) / self.h_last).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.cont;
        for i in 0..out.len() {
            out[i] = r1[i] + (r2[i] + (r3[i] + (r4[i] + r5[i] * theta1) * theta) * theta1) * theta;
        }
    }

    /// Integrates to `t_end`, calling `on_step` after every accepted step.
    pub fn integrate_to<F>(&mut self, t_end: f64, mut on_step: F) -> Result<()>
    where
        F: FnMut(&Self) -> Result<()>,
    {
        while self.t < t_end {
            self.step(t_end)?;
            on_step(self)?;
        }
        Ok(())
    }
}
