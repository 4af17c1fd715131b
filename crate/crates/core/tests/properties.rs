use std::sync::Arc;

use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maskmat::checker::{
    check_batch, check_oracle, check_safepp, check_subsets, check_subsets_with_cache, verify_witness, CheckOptions,
    PriorityCache,
};
use maskmat::search::{sample_candidate, Sampler, SearchConfig};
use maskmat::{FieldCtx, FieldElem, GammaCandidate, ProbeSystem, Scheme};

fn ctx(k: u32) -> Arc<FieldCtx> {
    Arc::new(FieldCtx::with_degree(k).unwrap())
}

fn uniform(scheme: Scheme, k: u32, d: usize, seed: u64, index: u64) -> GammaCandidate {
    let mut cfg = SearchConfig::new(scheme, ctx(k), d);
    cfg.sampler = Sampler::Uniform;
    cfg.seed = seed;
    sample_candidate(&cfg, index).unwrap()
}

fn scheme_strategy() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Alg4), Just(Scheme::Alg5)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(k in 1u32..=16, a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
        let f = FieldCtx::with_degree(k).unwrap();
        let mask = (f.size() - 1) as u16;
        let (a, b, c) = (FieldElem(a & mask), FieldElem(b & mask), FieldElem(c & mask));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
        prop_assert_eq!(a + a, FieldElem::ZERO);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElem::ONE);
        }
    }

    #[test]
    fn methods_agree(scheme in scheme_strategy(), k in 2u32..=4, seed in any::<u64>()) {
        let g = uniform(scheme, k, 2, seed, 0);
        let want = check_oracle(&g, &CheckOptions::default()).unwrap().is_safe();
        prop_assert_eq!(check_subsets(&g).unwrap().is_safe(), want);
        prop_assert_eq!(check_batch(&g).unwrap().is_safe(), want);
        prop_assert_eq!(check_safepp(&g).unwrap().is_safe(), want);
    }

    #[test]
    fn witnesses_verify(scheme in scheme_strategy(), k in 2u32..=4, d in 2usize..=3, seed in any::<u64>()) {
        let g = uniform(scheme, k, d, seed, 1);
        for rep in [check_subsets(&g).unwrap(), check_batch(&g).unwrap()] {
            if let Some(w) = &rep.witness {
                prop_assert!(verify_witness(&g, w).unwrap().valid());
            } else {
                prop_assert!(rep.is_safe());
            }
        }
    }

    #[test]
    fn alg4_delta_symmetry(k in 2u32..=5, d in 2usize..=3, seed in any::<u64>()) {
        let g = uniform(Scheme::Alg4, k, d, seed, 2);
        let swapped = g.delta().unwrap();
        let back = swapped.delta().unwrap();
        prop_assert_eq!(back.gamma(), g.gamma());
        prop_assert_eq!(check_batch(&g).unwrap().is_safe(), check_batch(&swapped).unwrap().is_safe());
    }

    #[test]
    fn low_weight_refutation_is_monotone(scheme in scheme_strategy(), k in 2u32..=3, seed in any::<u64>()) {
        let g = uniform(scheme, k, 3, seed, 3);
        let low = CheckOptions { max_weight: Some(2), ..CheckOptions::default() };
        if !check_oracle(&g, &low).unwrap().is_safe() {
            prop_assert!(!check_oracle(&g, &CheckOptions::default()).unwrap().is_safe());
        }
    }
}

#[test]
fn skipped_selections_at_order_four_have_zero_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = uniform(Scheme::Alg5, 6, 4, 5, 0);
    let ps = ProbeSystem::build(&g);
    let rows: Vec<usize> = (0..ps.m().rows()).collect();
    let mut seen = 0;
    while seen < 10_000 {
        let sel: Vec<usize> = (0..4).map(|_| rng.gen_range(0..ps.ell())).sorted().dedup().collect();
        if sel.len() < 4 || sel.iter().fold(0, |a, &c| a | ps.col_support(c)) == ps.full_mask() {
            continue;
        }
        seen += 1;
        let kb = ps.m().submatrix(&rows, &sel).kernel_basis(ps.ctx());
        let covered = (0..kb.cols()).fold(0, |a, j| a | ps.nonzero_rows(&sel, &kb.col(j)));
        assert_ne!(covered, ps.full_mask(), "{sel:?}");
    }
}

#[test]
fn priority_cache_reduces_work_on_unsafe_candidates() {
    let candidates: Vec<GammaCandidate> = (0..400)
        .map(|i| uniform(Scheme::Alg5, 6, 4, 9, i))
        .filter(|g| !check_batch(g).unwrap().is_safe())
        .take(60)
        .collect();
    assert!(candidates.len() >= 30);
    let mut cache = PriorityCache::new();
    // Warm the cache on the first half, measure on the second.
    let (train, test) = candidates.split_at(candidates.len() / 2);
    for g in train {
        check_subsets_with_cache(g, &mut cache).unwrap();
    }
    let cold_test: u64 = test.iter().map(|g| check_subsets(g).unwrap().subsets_checked).sum();
    let warm_test: u64 = test.iter().map(|g| check_subsets_with_cache(g, &mut cache).unwrap().subsets_checked).sum();
    assert!(warm_test < cold_test, "warm {warm_test} vs cold {cold_test}");
}

#[test]
fn uniform_alg4_rows_are_forced() {
    let g = uniform(Scheme::Alg4, 8, 4, 1, 0);
    assert!(g.gamma().row(0).iter().all(|&e| e == FieldElem::ONE));
    let g = uniform(Scheme::Alg5, 8, 4, 1, 0);
    assert!(g.column_sums_zero());
}
