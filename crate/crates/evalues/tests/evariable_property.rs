mod common;

use common::*;
use ksample_evalues::evariables::{
    log_s_cond, log_s_gro_iid, log_s_pseudo, null_expectation, pseudo_verdict, Verdict,
};
use ksample_evalues::ripr::default_mu0_grid;
use ksample_evalues::{Alternative, Block, EValueKind, FamilySpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn block(spec: &FamilySpec, x: &[f64]) -> Block {
    Block::new(spec, x.to_vec()).unwrap()
}

fn library_expectation_matches_oracle(spec: FamilySpec, mu: [f64; 2], mu0s: &[f64]) {
    let alt = Alternative::new(&spec, mu.to_vec()).unwrap();
    for &mu0 in mu0s {
        for kind in [EValueKind::GroIid, EValueKind::Cond, EValueKind::Pseudo] {
            let lib = null_expectation(&spec, &alt, &kind, mu0).unwrap();
            let oracle = null_expectation_2d(&spec, mu0, |x1, x2| {
                let b = block(&spec, &[x1, x2]);
                match kind {
                    EValueKind::GroIid => log_s_gro_iid(&spec, &alt, &b).unwrap(),
                    EValueKind::Cond => log_s_cond(&spec, &alt, &b).unwrap(),
                    _ => log_s_pseudo(&spec, &alt, &b).unwrap(),
                }
            });
            assert!(
                rel_diff(lib, oracle) < 1e-6,
                "{} {mu:?} mu0={mu0} {}: library {lib} oracle {oracle}",
                spec.id(),
                kind.name()
            );
        }
    }
}

#[test]
fn null_expectation_matches_two_dimensional_oracle_exponential() {
    library_expectation_matches_oracle(FamilySpec::Exponential, [0.5, 0.25], &[0.2, 0.375, 0.6]);
}

#[test]
fn null_expectation_matches_two_dimensional_oracle_gaussian_free_variance() {
    library_expectation_matches_oracle(
        FamilySpec::GaussianFreeVariance { mean: 0.0 },
        [2.0, 0.8],
        &[0.9, 1.4, 2.5],
    );
}

#[test]
fn null_expectation_matches_two_dimensional_oracle_gaussian_free_mean() {
    library_expectation_matches_oracle(FamilySpec::GaussianFreeMean { variance: 2.0 }, [-0.5, 1.0], &[-1.0, 0.25, 0.8]);
}

#[test]
fn null_expectation_matches_two_dimensional_oracle_beta() {
    library_expectation_matches_oracle(FamilySpec::BetaFixedAlpha { alpha: 1.0 }, [-1.0, -1.0 / 3.0], &[-0.9, -0.6, -0.4]);
    library_expectation_matches_oracle(FamilySpec::BetaFixedAlpha { alpha: 2.5 }, [-1.2, -0.5], &[-0.8]);
}

#[test]
fn null_expectation_matches_two_dimensional_oracle_lattice() {
    library_expectation_matches_oracle(FamilySpec::Bernoulli, [0.7, 0.2], &[0.1, 0.45, 0.8]);
    library_expectation_matches_oracle(FamilySpec::Poisson, [1.0, 4.0], &[1.5, 2.5, 4.0]);
    library_expectation_matches_oracle(FamilySpec::Geometric, [10.0 / 3.0, 1.25], &[1.0, 2.29, 4.0]);
}

#[test]
fn grid_expectations_respect_the_bound_for_every_family() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for spec in families() {
        for _ in 0..3 {
            let alt = random_alternative(&spec, 2, &mut rng);
            for mu0 in default_mu0_grid(&spec, &alt, 40).points() {
                for kind in [EValueKind::GroIid, EValueKind::Cond] {
                    let e = null_expectation(&spec, &alt, &kind, mu0).unwrap();
                    assert!(e <= 1.0 + 1e-6, "{} {:?} mu0={mu0} {}: {e}", spec.id(), alt.mu(), kind.name());
                }
                let e = null_expectation(&spec, &alt, &EValueKind::Cond, mu0).unwrap();
                assert!((e - 1.0).abs() < 1e-6, "{} cond at {mu0}: {e}", spec.id());
            }
        }
    }
}

#[test]
fn pseudo_exceeds_one_near_star_when_verdict_says_so() {
    // The verdict is a local statement: the worst mu0 is near mu0*.
    for (spec, mu) in [
        (FamilySpec::Exponential, vec![0.5, 0.25]),
        (FamilySpec::Geometric, vec![10.0 / 3.0, 1.25]),
        (FamilySpec::GaussianFreeVariance { mean: 0.0 }, vec![0.5, 0.25]),
    ] {
        let alt = Alternative::new(&spec, mu).unwrap();
        assert_eq!(pseudo_verdict(&spec, &alt).unwrap().verdict, Verdict::NotEVariable);
        let star = alt.mu0_star();
        let worst = (0..41)
            .map(|i| star * (0.8 + 0.01 * i as f64))
            .map(|m| null_expectation(&spec, &alt, &EValueKind::Pseudo, m).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst > 1.0, "{}: {worst}", spec.id());
    }
    let spec = FamilySpec::Bernoulli;
    let alt = Alternative::new(&spec, vec![0.7, 0.2]).unwrap();
    assert_eq!(pseudo_verdict(&spec, &alt).unwrap().verdict, Verdict::LocallyEVariable);
    let at_star = null_expectation(&spec, &alt, &EValueKind::Pseudo, alt.mu0_star()).unwrap();
    assert!(at_star <= 1.0 + 1e-12, "{at_star}");
}

fn arb_family() -> impl Strategy<Value = FamilySpec> {
    prop::sample::select(families())
}

fn arb_point(spec: FamilySpec) -> impl Strategy<Value = (FamilySpec, f64, f64, f64, u64)> {
    let (lo, hi) = mean_window(&spec);
    (Just(spec), lo..hi, lo..hi, lo..hi, any::<u64>())
}

fn draw_block(spec: &FamilySpec, mu0: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    spec.sample(mu0, &mut rng, 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn block_statistics_match_oracle_formulas((spec, m1, m2, m0, seed) in arb_family().prop_flat_map(arb_point)) {
        let alt = Alternative::new(&spec, vec![m1, m2]).unwrap();
        let x = draw_block(&spec, m0, seed);
        let b = block(&spec, &x);
        let mu = alt.mu();
        let pseudo = log_s_pseudo(&spec, &alt, &b).unwrap();
        prop_assert!((pseudo - oracle_log_pseudo(&spec, mu, &x)).abs() < 1e-9 * (1.0 + pseudo.abs()));
        let iid = log_s_gro_iid(&spec, &alt, &b).unwrap();
        prop_assert!((iid - oracle_log_iid(&spec, mu, &x)).abs() < 1e-9 * (1.0 + iid.abs()));
        let cond = log_s_cond(&spec, &alt, &b).unwrap();
        let oracle = oracle_log_cond(&spec, mu, &x, m0);
        prop_assert!((cond - oracle).abs() < 1e-7 * (1.0 + cond.abs()), "cond {} oracle {}", cond, oracle);
    }

    #[test]
    fn cond_has_unit_null_expectation((spec, m1, m2, m0, _s) in arb_family().prop_flat_map(arb_point)) {
        let alt = Alternative::new(&spec, vec![m1, m2]).unwrap();
        let e = null_expectation(&spec, &alt, &EValueKind::Cond, m0).unwrap();
        prop_assert!((e - 1.0).abs() < 1e-6, "{}", e);
    }

    #[test]
    fn gro_iid_is_an_e_variable((spec, m1, m2, m0, _s) in arb_family().prop_flat_map(arb_point)) {
        let alt = Alternative::new(&spec, vec![m1, m2]).unwrap();
        let e = null_expectation(&spec, &alt, &EValueKind::GroIid, m0).unwrap();
        prop_assert!(e <= 1.0 + 1e-6, "{}", e);
        prop_assert!(e > 0.0);
    }
}
