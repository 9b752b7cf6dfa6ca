//! Dense Lindblad integration for small truncations, used as an oracle for
//! the trajectory ensemble.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Tolerances};
use crate::params::SystemParams;
use crate::state::{JcOperator, Observables, PureState, QubitState, C64};

pub const MAX_DENSE_DIM: usize = 162;
pub const MASTER_TOLERANCES: Tolerances = Tolerances::new(1e-9, 1e-12);

/// Column-major density matrix on the `(qubit, photon)` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_max: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &PureState) -> Self {
        let psi = state.amplitudes();
        let d = psi.len();
        let norm = state.norm_sq();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            for i in 0..d {
                data[j * d + i] = psi[i] * psi[j].conj() / norm;
            }
        }
        Self {
            n_max: state.n_max(),
            data,
        }
    }

    pub fn ground(n_max: usize) -> Self {
        Self::from_pure(&PureState::ground(n_max))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[j * self.dim() + i]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_column_slice(d, d, &self.data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_matrix()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x))
    }

    fn symmetrize(&mut self) {
        let d = self.dim();
        for j in 0..d {
            for i in 0..j {
                let avg = 0.5 * (self.data[j * d + i] + self.data[i * d + j].conj());
                self.data[j * d + i] = avg;
                self.data[i * d + j] = avg.conj();
            }
            self.data[j * d + j].im = 0.0;
        }
    }

    pub fn reduced_qubit(&self) -> QubitState {
        let block = self.n_max + 1;
        let tr = self.trace();
        let mut excited = 0.0;
        let mut coherence = C64::new(0.0, 0.0);
        for m in 0..block {
            excited += self.get(block + m, block + m).re;
            coherence += self.get(block + m, m);
        }
        QubitState {
            excited: excited / tr,
            coherence: coherence / tr,
        }
    }

    pub fn observables(&self) -> Observables {
        let block = self.n_max + 1;
        let tr = self.trace();
        let (mut n1, mut n2, mut excited) = (0.0, 0.0, 0.0);
        let mut a = C64::new(0.0, 0.0);
        let mut sigma = C64::new(0.0, 0.0);
        for q in 0..2 {
            let base = q * block;
            for m in 0..block {
                let w = self.get(base + m, base + m).re;
                let mf = m as f64;
                n1 += mf * w;
                n2 += mf * mf * w;
                if q == 1 {
                    excited += w;
                }
                if m < self.n_max {
                    // Tr(a rho) = sum sqrt(m+1) rho[(q,m+1),(q,m)]
                    a += self.get(base + m + 1, base + m) * ((m + 1) as f64).sqrt();
                }
            }
        }
        for m in 0..block {
            // Tr(sigma rho) = sum rho[(e,m),(g,m)]
            sigma += self.get(block + m, m);
        }
        let n_mean = n1 / tr;
        Observables {
            n_mean,
            a_mean: a / tr,
            sigma_mean: sigma / tr,
            sigma_z_mean: 2.0 * excited / tr - 1.0,
            photon_variance: (n2 / tr - n_mean * n_mean).max(0.0),
        }
    }
}

struct Liouvillian {
    op: JcOperator,
    dim: usize,
    kappa: f64,
    gamma: f64,
}

impl Liouvillian {
    /// `d rho = -i H_eff rho + i rho H_eff† + 2 kappa a rho a† + 2 gamma σ rho σ†`.
    ///
    /// Right products go through the adjoint, `rho X† = (X rho†)†`, so the
    /// map is the generator on any matrix and not only on Hermitian ones;
    /// otherwise roundoff in the anti-Hermitian part is amplified.
    fn apply(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        let mut adj = vec![C64::new(0.0, 0.0); d * d];
        for c in 0..d {
            for r in 0..d {
                adj[c * d + r] = rho[r * d + c].conj();
            }
        }
        let left = self.columns(rho, |op, v, o| op.apply(v, o));
        let right = self.columns(&adj, |op, v, o| op.apply(v, o));
        let i = C64::new(0.0, 1.0);
        for c in 0..d {
            for r in 0..d {
                out[c * d + r] = -i * left[c * d + r] + i * right[r * d + c].conj();
            }
        }
        self.add_jump(&adj, out, 2.0 * self.kappa, |op, v, o| op.lower_mode(v, o));
        self.add_jump(&adj, out, 2.0 * self.gamma, |op, v, o| op.lower_qubit(v, o));
    }

    /// `X m`, one column at a time.
    fn columns(&self, m: &[C64], x: impl Fn(&JcOperator, &[C64], &mut [C64])) -> Vec<C64> {
        let d = self.dim;
        let mut y = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            x(&self.op, &m[j * d..(j + 1) * d], &mut y[j * d..(j + 1) * d]);
        }
        y
    }

    /// `out += rate * L rho L†`, computed as `L (L rho†)†` from the adjoint.
    fn add_jump(
        &self,
        adj: &[C64],
        out: &mut [C64],
        rate: f64,
        lower: impl Fn(&JcOperator, &[C64], &mut [C64]),
    ) {
        if rate == 0.0 {
            return;
        }
        let d = self.dim;
        let y = self.columns(adj, &lower);
        let mut col = vec![C64::new(0.0, 0.0); d];
        // columns of (L rho†)† are conjugated rows of L rho†
        let mut row = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            for (k, r) in row.iter_mut().enumerate() {
                *r = y[k * d + j].conj();
            }
            lower(&self.op, &row, &mut col);
            for k in 0..d {
                out[j * d + k] += col[k] * rate;
            }
        }
    }
}

/// Time derivative of `rho` under the master equation.
pub fn master_rhs(rho: &DensityMatrix, params: &SystemParams) -> DensityMatrix {
    let l = Liouvillian {
        op: JcOperator::effective(params, rho.n_max),
        dim: rho.dim(),
        kappa: params.kappa,
        gamma: params.gamma,
    };
    let mut out = vec![C64::new(0.0, 0.0); rho.data.len()];
    l.apply(&rho.data, &mut out);
    DensityMatrix {
        n_max: rho.n_max,
        data: out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterSample {
    pub t: f64,
    pub obs: Observables,
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterEvolution {
    pub samples: Vec<MasterSample>,
    pub final_state: DensityMatrix,
}

pub fn master_equation_evolve(
    initial: &DensityMatrix,
    params: &SystemParams,
    t_final: f64,
    dt_out: f64,
) -> Result<MasterEvolution> {
    master_equation_evolve_with(initial, params, t_final, dt_out, MASTER_TOLERANCES)
}

pub fn master_equation_evolve_with(
    initial: &DensityMatrix,
    params: &SystemParams,
    t_final: f64,
    dt_out: f64,
    tolerances: Tolerances,
) -> Result<MasterEvolution> {
    params.validate()?;
    if params.gamma_c != 0.0 {
        return Err(Error::DephasingUnsupported(params.gamma_c));
    }
    let dim = initial.dim();
    if dim > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_DENSE_DIM,
        });
    }
    if !(t_final > 0.0 && dt_out > 0.0 && dt_out <= t_final) {
        return Err(Error::InvalidArgument(
            "need t_final > 0 and 0 < dt_out <= t_final".into(),
        ));
    }
    let l = Liouvillian {
        op: JcOperator::effective(params, initial.n_max),
        dim,
        kappa: params.kappa,
        gamma: params.gamma,
    };
    let mut ode = Dopri5::new(
        |_t: f64, y: &[C64], dy: &mut [C64]| l.apply(y, dy),
        0.0,
        initial.data.clone(),
        tolerances,
    );
    let count = (t_final / dt_out + 1e-9).floor() as usize;
    let mut samples = Vec::with_capacity(count + 1);
    let mut current = initial.clone();
    samples.push(MasterSample {
        t: 0.0,
        obs: current.observables(),
        trace: current.trace(),
    });
    for k in 1..=count {
        let t = k as f64 * dt_out;
        ode.integrate_to(t, |_| Ok(()))?;
        current.data.copy_from_slice(ode.y());
        current.symmetrize();
        ode.reset(t, &current.data);
        samples.push(MasterSample {
            t,
            obs: current.observables(),
            trace: current.trace(),
        });
    }
    Ok(MasterEvolution {
        samples,
        final_state: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Qubit;

    fn dense(op: &JcOperator, f: impl Fn(&JcOperator, &[C64], &mut [C64])) -> DMatrix<C64> {
        let d = op.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![C64::new(0.0, 0.0); d];
        let mut col = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            e.fill(C64::new(0.0, 0.0));
            e[j] = C64::new(1.0, 0.0);
            f(op, &e, &mut col);
            for i in 0..d {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    #[test]
    fn generator_is_exact_off_the_hermitian_subspace() {
        let p = SystemParams::new(3.0, 1.5, 0.7).with_gamma(0.4);
        let n_max = 4;
        let op = JcOperator::effective(&p, n_max);
        let h = dense(&op, |o, v, out| o.apply(v, out));
        let a = dense(&op, |o, v, out| o.lower_mode(v, out));
        let s = dense(&op, |o, v, out| o.lower_qubit(v, out));
        let d = op.dim();
        let rho = DMatrix::from_fn(d, d, |i, j| {
            C64::new(
                (1.3 * (i * d + j) as f64).sin(),
                (0.7 * (i + 3 * j) as f64).cos(),
            )
        });
        let i = C64::new(0.0, 1.0);
        let expected = -(&h * &rho) * i
            + (&rho * h.adjoint()) * i
            + (&a * &rho * a.adjoint()) * C64::new(2.0 * p.kappa, 0.0)
            + (&s * &rho * s.adjoint()) * C64::new(2.0 * p.gamma, 0.0);
        let state = DensityMatrix {
            n_max,
            data: rho.as_slice().to_vec(),
        };
        let got = master_rhs(&state, &p);
        let err = (got.to_matrix() - expected).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn undriven_ground_state_is_stationary() {
        for p in [
            SystemParams::new(20.0, 10.0, 0.0),
            SystemParams::new(100.0, -3.0, 0.0).with_gamma(0.4),
        ] {
            let d = master_rhs(&DensityMatrix::ground(8), &p);
            let norm = d
                .as_slice()
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(norm < 1e-12);
        }
    }

    #[test]
    fn empty_cavity_steady_state() {
        let p = SystemParams::new(0.0, 1.0, 1.0);
        let run = master_equation_evolve(&DensityMatrix::ground(15), &p, 25.0, 5.0).unwrap();
        let last = run.samples.last().unwrap();
        assert!((last.obs.n_mean - 0.5).abs() < 1e-8, "{}", last.obs.n_mean);
        assert!((last.trace - 1.0).abs() < 1e-10);
        assert!(run.final_state.hermiticity_error() < 1e-12);
        assert!(run.final_state.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn rhs_matches_dense_lindblad() {
        let p = SystemParams::new(3.0, 0.7, 1.3).with_gamma(0.4);
        let n_max = 4;
        let psi = PureState::coherent(n_max, C64::new(0.3, -0.2), Qubit::Ground)
            .combine(
                C64::new(0.8, 0.0),
                &PureState::basis(n_max, Qubit::Excited, 1),
                C64::new(0.0, 0.6),
            )
            .normalized();
        let rho = DensityMatrix::from_pure(&psi);
        let got = master_rhs(&rho, &p).to_matrix();

        let d = rho.dim();
        let op = JcOperator::effective(&p, n_max);
        let build = |f: &dyn Fn(&[C64], &mut [C64])| {
            let mut m = DMatrix::<C64>::zeros(d, d);
            let mut e = vec![C64::new(0.0, 0.0); d];
            let mut out = vec![C64::new(0.0, 0.0); d];
            for j in 0..d {
                e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                e[j] = C64::new(1.0, 0.0);
                f(&e, &mut out);
                for i in 0..d {
                    m[(i, j)] = out[i];
                }
            }
            m
        };
        let h = build(&|v, o| op.apply(v, o));
        let a = build(&|v, o| op.lower_mode(v, o));
        let s = build(&|v, o| op.lower_qubit(v, o));
        let r = rho.to_matrix();
        let i = C64::new(0.0, 1.0);
        let expected = (&h * &r) * (-i)
            + (&r * h.adjoint()) * i
            + (&a * &r * a.adjoint()) * C64::new(2.0 * p.kappa, 0.0)
            + (&s * &r * s.adjoint()) * C64::new(2.0 * p.gamma, 0.0);
        assert!((got - expected).norm() < 1e-12);
    }

    #[test]
    fn dimension_guard() {
        let p = SystemParams::new(20.0, 10.0, 5.0);
        let err = master_equation_evolve(&DensityMatrix::ground(90), &p, 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::DimensionTooLarge { dim: 182, .. }));
    }
}
