//! Real polynomials with ascending coefficients and their real roots.

use nalgebra::DMatrix;
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        Poly(coeffs.into())
    }

    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    /// `c0 + c1 x`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        Poly(vec![c0, c1])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn scale(&self, s: f64) -> Self {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Drops leading coefficients that are negligible against the largest one.
    fn trimmed(&self, rel: f64) -> Self {
        let scale = self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut c = self.0.clone();
        while c.len() > 1 && c.last().is_some_and(|x| x.abs() <= rel * scale) {
            c.pop();
        }
        Poly(c)
    }

    /// Real roots in ascending order: companion-matrix eigenvalues whose
    /// imaginary part is small, each polished by Newton steps on the
    /// polynomial, with near-duplicates merged.
    pub fn real_roots(&self) -> Vec<f64> {
        let p = self.trimmed(1e-300);
        let deg = p.degree();
        if deg == 0 {
            return Vec::new();
        }
        let lead = p.0[deg];
        let candidates: Vec<(f64, f64)> = if deg == 1 {
            vec![(-p.0[0] / lead, 0.0)]
        } else {
            let mut m = DMatrix::<f64>::zeros(deg, deg);
            for i in 1..deg {
                m[(i, i - 1)] = 1.0;
            }
            for i in 0..deg {
                m[(i, deg - 1)] = -p.0[i] / lead;
            }
            m.complex_eigenvalues()
                .iter()
                .map(|z| (z.re, z.im))
                .collect()
        };
        let dp = p.derivative();
        let mut roots: Vec<f64> = Vec::with_capacity(deg);
        for (re, im) in candidates {
            if im.abs() > 1e-6 * re.abs().max(1.0) {
                continue;
            }
            roots.push(newton_polish(&p, &dp, re));
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
        roots
    }
}

fn newton_polish(p: &Poly, dp: &Poly, x0: f64) -> f64 {
    let mut x = x0;
    let mut best = (p.eval(x).abs(), x);
    for _ in 0..8 {
        let d = dp.eval(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - p.eval(x) / d;
        if !next.is_finite() {
            break;
        }
        let r = p.eval(next).abs();
        if r < best.0 {
            best = (r, next);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs() {
            break;
        }
        x = next;
    }
    best.1
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly(
            (0..n)
                .map(|i| {
                    self.0.get(i).copied().unwrap_or(0.0) + rhs.0.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}
