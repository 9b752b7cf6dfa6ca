use pbb_core::mcwf::{
    ensemble_mean, master_equation_evolve, master_equation_evolve_with, run_ensemble,
    DensityMatrix, TrajectorySettings,
};
use pbb_core::ode::Tolerances;
use pbb_core::{Execution, PureState, Qubit, SystemParams};

/// Asymptotic Kolmogorov survival function with Stephens' small-sample
/// correction.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
            2.0 * sign * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

#[test]
fn first_jump_times_are_exponential() {
    let p = SystemParams::new(0.0, 0.0, 0.0);
    let s = TrajectorySettings::new(15.0, 5.0);
    let init = PureState::basis(4, Qubit::Ground, 1);
    let n = 5000;
    let recs = run_ensemble(&init, &p, &s, n, 2024, Execution::default()).unwrap();
    let mut t: Vec<f64> = recs.iter().map(|r| r.jumps[0].t).collect();
    t.sort_by(f64::total_cmp);
    // empirical vs 1 - exp(-2 kappa t)
    let d = t
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-2.0 * p.kappa * x).exp();
            (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
        })
        .fold(0.0, f64::max);
    let pv = ks_p_value(d, n);
    assert!(pv > 0.01, "KS D = {d}, p = {pv}");
    assert!(recs.iter().all(|r| r.jumps.len() == 1));
}

#[test]
fn two_photons_decay_at_twice_kappa() {
    let p = SystemParams::new(0.0, 0.0, 0.0);
    let s = TrajectorySettings::new(3.0, 0.25);
    let init = PureState::basis(6, Qubit::Ground, 2);
    let n = 1000;
    let recs = run_ensemble(&init, &p, &s, n, 99, Execution::default()).unwrap();
    for (t, mean, _) in ensemble_mean(&recs, |x| x.obs.n_mean) {
        let q = (-2.0 * p.kappa * t).exp();
        // each photon survives independently: n ~ Binomial(2, q)
        let se = (2.0 * q * (1.0 - q) / n as f64).sqrt();
        assert!(
            (mean - 2.0 * q).abs() <= 3.0 * se + 1e-12,
            "t = {t}: {mean} vs {}",
            2.0 * q
        );
    }
}

#[test]
fn reruns_are_bit_identical_across_thread_counts() {
    let p = SystemParams::new(20.0, 10.0, 5.0).with_gamma(0.1);
    let s = TrajectorySettings::new(4.0, 0.1);
    let init = PureState::ground(30);
    let a = run_ensemble(&init, &p, &s, 5, 11, Execution::Sequential).unwrap();
    let b = run_ensemble(&init, &p, &s, 5, 11, Execution::Sequential).unwrap();
    let c = run_ensemble(&init, &p, &s, 5, 11, Execution::Parallel { threads: 8 }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn master_equation_is_converged_in_tolerance() {
    let p = SystemParams::new(20.0, 10.0, 5.0);
    let rho = DensityMatrix::ground(30);
    let coarse = master_equation_evolve(&rho, &p, 5.0, 1.0).unwrap();
    let fine =
        master_equation_evolve_with(&rho, &p, 5.0, 1.0, Tolerances::new(1e-11, 1e-14)).unwrap();
    for (a, b) in coarse.samples.iter().zip(&fine.samples) {
        assert!((a.obs.n_mean - b.obs.n_mean).abs() < 1e-7);
        assert!((a.obs.sigma_z_mean - b.obs.sigma_z_mean).abs() < 1e-7);
        assert!((a.trace - 1.0).abs() < 1e-10);
    }
    let last = &coarse.final_state;
    assert!(last.hermiticity_error() < 1e-12);
    assert!(last.min_eigenvalue() > -1e-10);
}

#[test]
fn unravelling_reproduces_the_master_equation() {
    let p = SystemParams::new(5.0, 2.0, 1.5).with_gamma(0.5);
    let n_max = 15;
    let t_final = 4.0;
    let me = master_equation_evolve(&DensityMatrix::ground(n_max), &p, t_final, 0.5).unwrap();
    let recs = run_ensemble(
        &PureState::ground(n_max),
        &p,
        &TrajectorySettings::new(t_final, 0.5),
        400,
        5,
        Execution::default(),
    )
    .unwrap();
    let n = ensemble_mean(&recs, |x| x.obs.n_mean);
    let sz = ensemble_mean(&recs, |x| x.obs.sigma_z_mean);
    for ((m, a), b) in me.samples.iter().zip(&n).zip(&sz).skip(1) {
        assert!((m.obs.n_mean - a.1).abs() <= 4.0 * a.2, "t = {}", m.t);
        assert!((m.obs.sigma_z_mean - b.1).abs() <= 4.0 * b.2, "t = {}", m.t);
    }
}

#[test]
fn long_output_intervals_stay_physical() {
    // no intermediate re-symmetrization to hide roundoff growth
    let p = SystemParams::new(20.0, 10.0, 5.0);
    let rho = DensityMatrix::ground(20);
    let one = master_equation_evolve(&rho, &p, 40.0, 40.0).unwrap();
    let many = master_equation_evolve(&rho, &p, 40.0, 2.0).unwrap();
    let (a, b) = (&one.final_state, &many.final_state);
    assert!((a.trace() - 1.0).abs() < 1e-9);
    assert!(a.min_eigenvalue() > -1e-9);
    assert!((a.observables().n_mean - b.observables().n_mean).abs() < 1e-7);
}
