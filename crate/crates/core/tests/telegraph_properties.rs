use pbb_core::telegraph::{mandel_q, segment, Label, ReferenceLevels, SegmentConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

const DT: f64 = 0.1;

/// Noisy two-level signal with dwell times drawn from `runs` (in samples).
fn telegraph(runs: &[(usize, f64)], start_bright: bool) -> (Vec<f64>, Vec<f64>) {
    let mut sig = Vec::new();
    let mut bright = start_bright;
    for &(len, noise) in runs {
        let level = if bright { 8.0 } else { 0.5 };
        sig.extend((0..len).map(|k| level + noise * ((k as f64 * 1.7).sin())));
        bright = !bright;
    }
    let times = (0..sig.len()).map(|i| i as f64 * DT).collect();
    (times, sig)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn segmentation_is_idempotent(
        runs in prop::collection::vec((5usize..600, 0.0..4.0f64), 2..30),
        start_bright in any::<bool>(),
    ) {
        let (t, sig) = telegraph(&runs, start_bright);
        prop_assume!(t.len() > 400);
        let refs = ReferenceLevels::new(0.5, 8.0).unwrap();
        let cfg = SegmentConfig::default();
        let first = segment(&t, &sig, refs, &cfg).unwrap();
        let cut = (first.transient_cut / DT).round() as usize;
        prop_assume!(t.len() - cut > 200);

        let reference: Vec<f64> = first.labels[cut..]
            .iter()
            .map(|l| match l.unwrap() {
                Label::Bright => refs.bright,
                Label::Dim => refs.dim,
            })
            .collect();
        let again = segment(&t[cut..], &reference, refs, &cfg).unwrap();
        prop_assert_eq!(again.transient_cut, 0.0);
        prop_assert_eq!(&again.labels[..], &first.labels[cut..]);
    }

    #[test]
    fn filling_factor_is_a_fraction(
        runs in prop::collection::vec((5usize..600, 0.0..4.0f64), 2..30),
        start_bright in any::<bool>(),
    ) {
        let (t, sig) = telegraph(&runs, start_bright);
        prop_assume!(t.len() > 400);
        let refs = ReferenceLevels::new(0.5, 8.0).unwrap();
        let s = segment(&t, &sig, refs, &SegmentConfig::default()).unwrap();
        let f = s.filling_factor();
        prop_assert!((0.0..=1.0).contains(&f));
        let bright: usize = s
            .segments
            .iter()
            .filter(|x| x.label == Label::Bright)
            .map(|x| x.len())
            .sum();
        prop_assert_eq!(f, bright as f64 / s.analyzed_samples() as f64);
        let min_len = (SegmentConfig::default().min_dwell / DT).round() as usize;
        if s.segments.len() > 1 {
            prop_assert!(s.segments.iter().all(|x| x.len() >= min_len));
        }
    }
}

#[test]
fn all_bright_signal() {
    let t: Vec<f64> = (0..1000).map(|i| i as f64 * DT).collect();
    let refs = ReferenceLevels::new(0.5, 8.0).unwrap();
    let s = segment(&t, &vec![8.0; 1000], refs, &SegmentConfig::default()).unwrap();
    assert_eq!(s.filling_factor(), 1.0);
}

#[test]
fn poisson_sample_has_no_excess_noise() {
    let lambda = 5.0;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = Poisson::new(lambda).unwrap();
    let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let q = mandel_q(mean, var).unwrap();
    // sampling error of var/mean for a Poisson sample
    let se = ((1.0 / lambda + 2.0) / n as f64).sqrt();
    assert!(q.abs() < 4.0 * se, "Q = {q}, se = {se}");
}
