use nalgebra::Matrix2;
use pbb_core::state::basis_index;
use pbb_core::telegraph::pseudospin;
use pbb_core::{JcOperator, PureState, Qubit, QubitState, SystemParams, C64};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (0.0..50.0f64, -20.0..20.0f64, 0.0..10.0f64, 0.0..2.0f64)
        .prop_map(|(g, d, eta, gamma)| SystemParams::new(g, d, eta).with_gamma(gamma))
}

fn amplitudes(n_max: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * (n_max + 1))
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

fn apply(op: &JcOperator, psi: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    op.apply(psi, &mut out);
    out
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

const N_MAX: usize = 12;

proptest! {
    #[test]
    fn hamiltonian_is_linear(
        p in params(),
        x in amplitudes(N_MAX),
        y in amplitudes(N_MAX),
        a in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let op = JcOperator::hamiltonian(&p, N_MAX);
        let a = C64::new(a.0, a.1);
        let combo: Vec<C64> = x.iter().zip(&y).map(|(u, v)| a * u + v).collect();
        let lhs = apply(&op, &combo);
        let (hx, hy) = (apply(&op, &x), apply(&op, &y));
        for i in 0..lhs.len() {
            let rhs = a * hx[i] + hy[i];
            prop_assert!((lhs[i] - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn hamiltonian_is_hermitian(p in params(), x in amplitudes(N_MAX), y in amplitudes(N_MAX)) {
        let op = JcOperator::hamiltonian(&p, N_MAX);
        let lhs = dot(&x, &apply(&op, &y));
        let rhs = dot(&apply(&op, &x), &y);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn effective_operator_loses_norm_at_the_decay_rates(p in params(), x in amplitudes(N_MAX)) {
        // Im⟨ψ|H_eff|ψ⟩ = -(κ⟨a†a⟩ + γ⟨σ†σ⟩) for unnormalized ψ
        let op = JcOperator::effective(&p, N_MAX);
        let im = dot(&x, &apply(&op, &x)).im;
        let mut loss = 0.0;
        for m in 0..=N_MAX {
            let g = x[basis_index(N_MAX, Qubit::Ground, m)].norm_sqr();
            let e = x[basis_index(N_MAX, Qubit::Excited, m)].norm_sqr();
            loss += p.kappa * m as f64 * (g + e) + p.gamma * e;
        }
        prop_assert!((im + loss).abs() <= 1e-10 * (1.0 + loss));
    }

    #[test]
    fn undriven_hamiltonian_conserves_excitations(
        p in params(),
        excited in any::<bool>(),
        m in 0..N_MAX,
    ) {
        let p = p.with_eta(0.0);
        let q = if excited { Qubit::Excited } else { Qubit::Ground };
        let out = apply(
            &JcOperator::hamiltonian(&p, N_MAX),
            PureState::basis(N_MAX, q, m).amplitudes(),
        );
        let k = m + usize::from(excited);
        for j in 0..=N_MAX {
            if j != k {
                prop_assert_eq!(out[basis_index(N_MAX, Qubit::Ground, j)], C64::new(0.0, 0.0));
            }
            if j + 1 != k {
                prop_assert_eq!(out[basis_index(N_MAX, Qubit::Excited, j)], C64::new(0.0, 0.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pseudospin_is_affine_in_purity(m in prop::array::uniform8(-1.0..1.0f64)) {
        let a = Matrix2::new(
            C64::new(m[0], m[1]), C64::new(m[2], m[3]),
            C64::new(m[4], m[5]), C64::new(m[6], m[7]),
        );
        let rho = a * a.adjoint();
        let tr = rho.trace().re;
        prop_assume!(tr > 1e-6);
        // basis order (g, e): σ = |g⟩⟨e|, so ⟨σ⟩ = ρ_eg
        let rho = rho / C64::new(tr, 0.0);
        let q = QubitState { excited: rho[(1, 1)].re, coherence: rho[(1, 0)] };
        let purity = (rho * rho).trace().re;
        let s = pseudospin(q.coherence, q.sigma_z());
        prop_assert!((s - (2.0 * purity - 1.0)).abs() < 1e-12);
        prop_assert!((q.purity() - purity).abs() < 1e-12);
    }
}
