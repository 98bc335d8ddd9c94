mod common;

use common::*;
use ksample_evalues::evariables::{
    evaluate, log_s_cond, log_s_cond_with_baseline, log_s_gro_iid, log_s_pseudo,
};
use ksample_evalues::expfam::{reduce_sufficient, RawSource};
use ksample_evalues::{Alternative, Block, EValueKind, FamilySpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[test]
fn bernoulli_pseudo_equals_gro_iid_on_every_block() {
    let spec = FamilySpec::Bernoulli;
    let ps: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    for &p1 in &ps {
        for &p2 in &ps {
            let alt = Alternative::new(&spec, vec![p1, p2]).unwrap();
            for x in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
                let b = Block::new(&spec, x.to_vec()).unwrap();
                let a = log_s_pseudo(&spec, &alt, &b).unwrap();
                let c = log_s_gro_iid(&spec, &alt, &b).unwrap();
                assert!((a - c).abs() <= 1e-14 * (1.0 + a.abs()), "({p1},{p2}) {x:?}: {a} vs {c}");
            }
        }
    }
}

#[test]
fn bernoulli_cond_on_mixed_block() {
    // Z = 1: P(X1 = 1 | Z = 1) = p1 q2 / (p1 q2 + q1 p2) against 1/2 under the null.
    let spec = FamilySpec::Bernoulli;
    let (p1, p2) = (0.75_f64, 0.25_f64);
    let alt = Alternative::new(&spec, vec![p1, p2]).unwrap();
    let b = Block::new(&spec, vec![1.0, 0.0]).unwrap();
    let num = p1 * (1.0 - p2);
    let want = 2.0 * num / (num + (1.0 - p1) * p2);
    let got = evaluate(&spec, &alt, &EValueKind::Cond, &b).unwrap().evalue();
    assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    for x in [[0.0, 0.0], [1.0, 1.0]] {
        let b = Block::new(&spec, x.to_vec()).unwrap();
        assert_eq!(evaluate(&spec, &alt, &EValueKind::Cond, &b).unwrap().evalue(), 1.0);
    }
}

fn pseudo_equals_cond_on_random_blocks(spec: FamilySpec, seed: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.random_range(2..=4);
        let alt = random_alternative(&spec, k, &mut rng);
        let truth = alt.mu()[rng.random_range(0..k)];
        let x = spec.sample(truth, &mut rng, k).unwrap();
        let b = Block::new(&spec, x).unwrap();
        let a = log_s_pseudo(&spec, &alt, &b).unwrap();
        let c = log_s_cond(&spec, &alt, &b).unwrap();
        worst = worst.max((a - c).abs() / (1.0 + a.abs()));
    }
    assert!(worst < 1e-10, "{}: {worst}", spec.id());
}

#[test]
fn gaussian_free_mean_pseudo_equals_cond() {
    pseudo_equals_cond_on_random_blocks(FamilySpec::GaussianFreeMean { variance: 1.0 }, 1);
    pseudo_equals_cond_on_random_blocks(FamilySpec::GaussianFreeMean { variance: 3.5 }, 2);
}

#[test]
fn poisson_pseudo_equals_cond() {
    pseudo_equals_cond_on_random_blocks(FamilySpec::Poisson, 3);
}

#[test]
fn null_alternative_gives_unit_evalues() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for spec in families() {
        let (lo, hi) = mean_window(&spec);
        let m = 0.5 * (lo + hi);
        let alt = Alternative::new(&spec, vec![m; 3]).unwrap();
        let b = Block::new(&spec, spec.sample(m, &mut rng, 3).unwrap()).unwrap();
        for kind in [EValueKind::Pseudo, EValueKind::GroIid, EValueKind::Cond] {
            assert_eq!(evaluate(&spec, &alt, &kind, &b).unwrap().evalue(), 1.0, "{}", spec.id());
        }
    }
}

#[test]
fn pareto_reduces_to_exponential() {
    let spec = FamilySpec::Exponential;
    let alt = Alternative::new(&spec, vec![0.5, 0.25]).unwrap();
    let v = 2.0;
    let raw = [v * 1.3_f64.exp(), v * 0.2_f64.exp()];
    let x: Vec<f64> = raw
        .iter()
        .map(|&u| reduce_sufficient(RawSource::Pareto { v }, u).unwrap())
        .collect();
    assert!((x[0] - 1.3).abs() < 1e-12 && (x[1] - 0.2).abs() < 1e-12);
    let b = Block::new(&spec, x.clone()).unwrap();
    let direct = oracle_log_cond(&spec, alt.mu(), &x, 0.4);
    assert!((log_s_cond(&spec, &alt, &b).unwrap() - direct).abs() < 1e-8);
    assert!(reduce_sufficient(RawSource::Pareto { v }, 1.0).is_err());
}

fn arb_case() -> impl Strategy<Value = (FamilySpec, Vec<f64>, u64, f64)> {
    prop::sample::select(families()).prop_flat_map(|spec| {
        let (lo, hi) = mean_window(&spec);
        (Just(spec), prop::collection::vec(lo..hi, 2..5), any::<u64>(), lo..hi)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cond_does_not_depend_on_the_baseline((spec, mu, seed, other) in arb_case()) {
        let alt = Alternative::new(&spec, mu).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let b = Block::new(&spec, spec.sample(alt.mu0_star(), &mut rng, alt.k()).unwrap()).unwrap();
        let a = log_s_cond(&spec, &alt, &b).unwrap();
        let c = log_s_cond_with_baseline(&spec, &alt, &b, other).unwrap();
        prop_assert!((a - c).abs() < 1e-8 * (1.0 + a.abs()), "{} vs {}", a, c);
    }

    #[test]
    fn statistics_are_equivariant_under_group_permutation((spec, mu, seed, _o) in arb_case()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let alt = Alternative::new(&spec, mu.clone()).unwrap();
        let x = spec.sample(alt.mu0_star(), &mut rng, alt.k()).unwrap();
        let mut rmu = mu.clone();
        rmu.reverse();
        let mut rx = x.clone();
        rx.reverse();
        let ralt = Alternative::new(&spec, rmu).unwrap();
        let b = Block::new(&spec, x).unwrap();
        let rb = Block::new(&spec, rx).unwrap();
        for kind in [EValueKind::Pseudo, EValueKind::GroIid, EValueKind::Cond] {
            let a = evaluate(&spec, &alt, &kind, &b).unwrap().log_evalue;
            let c = evaluate(&spec, &ralt, &kind, &rb).unwrap().log_evalue;
            prop_assert!((a - c).abs() < 1e-8 * (1.0 + a.abs()), "{}: {} vs {}", kind.name(), a, c);
        }
    }

    #[test]
    fn evalues_are_positive_and_finite((spec, mu, seed, truth) in arb_case()) {
        let alt = Alternative::new(&spec, mu).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let b = Block::new(&spec, spec.sample(truth, &mut rng, alt.k()).unwrap()).unwrap();
        for kind in [EValueKind::Pseudo, EValueKind::GroIid, EValueKind::Cond] {
            let r = evaluate(&spec, &alt, &kind, &b).unwrap();
            prop_assert!(r.log_evalue.is_finite(), "{} {}", kind.name(), r.log_evalue);
        }
    }
}
