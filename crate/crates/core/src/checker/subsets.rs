use std::collections::{HashMap, HashSet};
use std::time::Instant;

use itertools::Itertools;

use super::{binomial, ensure_supported, search_witness, CheckReport, Counters, Method, Verdict, Witness};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::linalg::Mat;
use crate::probes::{GammaCandidate, ProbeSystem, Scheme, Target};

/// Per-session failure counters over column subsets.
///
/// Subsets that produced a witness for earlier candidates are visited first,
/// most frequent first, before the remaining ones in lexicographic order.
#[derive(Clone, Debug, Default)]
pub struct PriorityCache {
    fails: HashMap<(Target, Vec<usize>), u64>,
}

impl PriorityCache {
    pub fn new() -> PriorityCache {
        PriorityCache::default()
    }

    pub fn len(&self) -> usize {
        self.fails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fails.is_empty()
    }

    pub fn record(&mut self, target: Target, subset: &[usize]) {
        *self.fails.entry((target, subset.to_vec())).or_default() += 1;
    }

    /// Cached subsets applicable to a system with `ell` columns and
    /// selections of size `m`, in visiting order.
    pub fn priority_list(&self, target: Target, ell: usize, m: usize) -> Vec<Vec<usize>> {
        let mut v: Vec<(&Vec<usize>, u64)> = self
            .fails
            .iter()
            .filter(|((t, s), _)| *t == target && s.len() == m && s.iter().all(|&c| c < ell))
            .map(|((_, s), &n)| (s, n))
            .collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v.into_iter().map(|(s, _)| s.clone()).collect()
    }
}

/// Kept and total selection counts of the support filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilterCounts {
    pub kept: u64,
    pub total: u64,
}

/// Counts the `d`-column selections of the order-`d` probe system whose
/// `L` supports cover every row. The support pattern does not depend on
/// `gamma` or on the scheme.
pub fn filter_counts(d: usize) -> Result<FilterCounts> {
    if d == 0 || d > super::MAX_ORDER {
        return Err(Error::Unsupported(format!("order {d} outside 1..={}", super::MAX_ORDER)));
    }
    let ctx = std::sync::Arc::new(crate::field::FieldCtx::with_degree(1)?);
    let g = GammaCandidate::new_unchecked(Scheme::Alg4, ctx, Mat::ones(d + 1, d))?;
    Ok(count_kept(&ProbeSystem::build(&g), d))
}

/// Subset-sum style count over OR-masks: `dp[s][mask]` selections of size `s`.
pub(crate) fn count_kept(ps: &ProbeSystem, m: usize) -> FilterCounts {
    let masks = 1usize << ps.b_rows();
    let mut dp = vec![vec![0u64; masks]; m + 1];
    dp[0][0] = 1;
    for &sup in ps.supports() {
        for s in (0..m).rev() {
            for mask in 0..masks {
                let n = dp[s][mask];
                if n != 0 {
                    dp[s + 1][mask | sup as usize] += n;
                }
            }
        }
    }
    FilterCounts { kept: dp[m][masks - 1], total: binomial(ps.ell(), m) }
}

/// The safe' test: for every `m`-column selection whose `L` supports cover
/// all rows, compute a kernel basis of the selected `M'` columns and look for
/// an all-rows-non-zero combination when no row of the product is zero.
pub fn check_subsets(g: &GammaCandidate) -> Result<CheckReport> {
    run(g, None)
}

/// [`check_subsets`] visiting previously failing selections first and
/// recording new failures in `cache`.
pub fn check_subsets_with_cache(g: &GammaCandidate, cache: &mut PriorityCache) -> Result<CheckReport> {
    run(g, Some(cache))
}

fn run(g: &GammaCandidate, mut cache: Option<&mut PriorityCache>) -> Result<CheckReport> {
    ensure_supported(g)?;
    let start = Instant::now();
    let mut report = CheckReport::new(Method::Subsets);
    for (target, cand) in g.targets()? {
        let ps = ProbeSystem::build(&cand);
        let m = ps.bound();
        let mut counters = Counters { total: binomial(ps.ell(), m), ..Default::default() };
        let prio = cache.as_ref().map(|c| c.priority_list(target, ps.ell(), m)).unwrap_or_default();
        let seen: HashSet<Vec<usize>> = prio.iter().cloned().collect();
        let lex = (0..ps.ell()).combinations(m).filter(|s| !seen.contains(s));
        let mut found = None;
        for sel in prio.into_iter().chain(lex) {
            if let Some(w) = check_selection(&ps, &sel, &mut counters) {
                found = Some((sel, w));
                break;
            }
        }
        report.absorb(&counters);
        if let Some((sel, (columns, values))) = found {
            if let Some(c) = cache.as_deref_mut() {
                c.record(target, &sel);
            }
            report.verdict = Verdict::Unsafe;
            report.witness = Some(Witness { target, columns, values });
            return Ok(report.finish(start));
        }
    }
    Ok(report.finish(start))
}

/// Checks one selection; returns a witness when it violates safety.
pub(crate) fn check_selection(
    ps: &ProbeSystem,
    sel: &[usize],
    counters: &mut Counters,
) -> Option<(Vec<usize>, Vec<FieldElem>)> {
    let full = ps.full_mask();
    if sel.iter().fold(0, |acc, &c| acc | ps.col_support(c)) != full {
        counters.skipped += 1;
        return None;
    }
    counters.checked += 1;
    let rows: Vec<usize> = (0..ps.m().rows()).collect();
    let kb = ps.m().submatrix(&rows, sel).kernel_basis(ps.ctx());
    let kernel: Vec<Vec<FieldElem>> = (0..kb.cols()).map(|j| kb.col(j)).collect();
    let covered = kernel.iter().fold(0, |acc, k| acc | ps.nonzero_rows(sel, k));
    if covered != full {
        return None;
    }
    search_witness(ps, sel, &kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::verify_witness;
    use crate::field::FieldCtx;
    use rand::SeedableRng;
    use std::sync::Arc;

    #[test]
    fn small_filter_counts() {
        assert_eq!(filter_counts(2).unwrap(), FilterCounts { kept: 57, total: 136 });
        assert_eq!(filter_counts(3).unwrap(), FilterCounts { kept: 2100, total: 4495 });
        assert_eq!(filter_counts(4).unwrap(), FilterCounts { kept: 103_030, total: 211_876 });
    }

    #[test]
    fn dp_matches_enumeration() {
        let ctx = Arc::new(FieldCtx::with_degree(1).unwrap());
        let g = GammaCandidate::new_unchecked(Scheme::Alg5, ctx, Mat::ones(4, 3)).unwrap();
        let ps = ProbeSystem::build(&g);
        let direct = (0..ps.ell())
            .combinations(3)
            .filter(|s| s.iter().fold(0, |a, &c| a | ps.col_support(c)) == ps.full_mask())
            .count() as u64;
        assert_eq!(count_kept(&ps, 3).kept, direct);
        let tp = ps.tpart();
        let direct_t = (0..tp.ell())
            .combinations(3)
            .filter(|s| s.iter().fold(0, |a, &c| a | tp.col_support(c)) == tp.full_mask())
            .count() as u64;
        assert_eq!(count_kept(&tp, 3).kept, direct_t);
    }

    #[test]
    fn skipped_selections_have_zero_row() {
        let ctx = Arc::new(FieldCtx::with_degree(3).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let gm = Mat::from_vec(4, 3, (0..12).map(|_| ctx.random(&mut rng)).collect()).unwrap();
        let g = GammaCandidate::new_unchecked(Scheme::Alg5, ctx.clone(), gm).unwrap();
        let ps = ProbeSystem::build(&g);
        let rows: Vec<usize> = (0..3).collect();
        for sel in (0..ps.ell()).combinations(3) {
            if sel.iter().fold(0, |a, &c| a | ps.col_support(c)) == ps.full_mask() {
                continue;
            }
            let kb = ps.m().submatrix(&rows, &sel).kernel_basis(&ctx);
            let covered = (0..kb.cols()).fold(0, |a, j| a | ps.nonzero_rows(&sel, &kb.col(j)));
            assert_ne!(covered, ps.full_mask());
        }
    }

    #[test]
    fn cache_reorders_but_keeps_verdict() {
        let ctx = Arc::new(FieldCtx::with_degree(3).unwrap());
        let g = GammaCandidate::from_alg4_part(ctx.clone(), &Mat::ones(2, 2)).unwrap();
        let mut cache = PriorityCache::new();
        assert!(cache.is_empty());
        let cold = check_subsets_with_cache(&g, &mut cache).unwrap();
        assert!(!cold.is_safe());
        assert_eq!(cache.len(), 1);
        let warm = check_subsets_with_cache(&g, &mut cache).unwrap();
        assert!(!warm.is_safe());
        // gamma passes in full; only the failing delta selection moves up.
        assert!(warm.subsets_checked < cold.subsets_checked);
        assert_eq!(warm.witness.as_ref().unwrap().target, Target::Delta);
        assert!(verify_witness(&g, warm.witness.as_ref().unwrap()).unwrap().valid());
    }
}
