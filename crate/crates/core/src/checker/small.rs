use std::time::Instant;

use itertools::Itertools;

use super::{CheckReport, Method};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::linalg::Mat;
use crate::probes::GammaCandidate;
use crate::structures::is_mds_all_submatrices;

/// Sufficient conditions for `n <= 3`:
///
/// * `n = 1`: no zero entry;
/// * `n = 2`: every square submatrix invertible;
/// * `n = 3`: the same, plus [`dim3_lemma_holds`].
///
/// Returns `Ok(None)` when the condition fails, which says nothing about
/// safety. For Alg4 both `gamma` and `delta` must pass.
pub fn check_fast_small(g: &GammaCandidate) -> Result<Option<CheckReport>> {
    if g.n() > 3 {
        return Err(Error::Unsupported(format!("fast path needs n <= 3, got n = {}", g.n())));
    }
    let start = Instant::now();
    for (_, cand) in g.targets()? {
        if !sufficient(&cand) {
            return Ok(None);
        }
    }
    Ok(Some(CheckReport::new(Method::Analytic).finish(start)))
}

fn sufficient(g: &GammaCandidate) -> bool {
    let ctx = g.ctx();
    let gm = g.gamma();
    match g.n() {
        1 => !gm.has_zero_entry(),
        2 => is_mds_all_submatrices(ctx, gm),
        3 => is_mds_all_submatrices(ctx, gm) && dim3_lemma_holds(g),
        _ => false,
    }
}

/// For a three-column `gamma`, every matrix
///
/// ```text
/// [ g[i][0]  g[j][0]  g[k][0] ]
/// [ g[i][1]  g[j][1]  g[k][1] ]
/// [ g[i][2]  g[j][2]  0       ]
/// ```
///
/// with `i, j, k` distinct rows is non-singular.
pub fn dim3_lemma_holds(g: &GammaCandidate) -> bool {
    assert_eq!(g.n(), 3);
    let ctx = g.ctx();
    let gm = g.gamma();
    let rows = gm.rows();
    for pair in (0..rows).combinations(2) {
        let (i, j) = (pair[0], pair[1]);
        for k in (0..rows).filter(|&k| k != i && k != j) {
            let m = Mat::from_vec(
                3,
                3,
                vec![
                    gm.get(i, 0),
                    gm.get(j, 0),
                    gm.get(k, 0),
                    gm.get(i, 1),
                    gm.get(j, 1),
                    gm.get(k, 1),
                    gm.get(i, 2),
                    gm.get(j, 2),
                    FieldElem::ZERO,
                ],
            )
            .expect("3x3");
            if m.rank(ctx) < 3 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_subsets;
    use crate::field::FieldCtx;
    use crate::probes::Scheme;
    use crate::structures::{construct_precond41, construct_precond51, CauchySpec};
    use std::sync::Arc;

    #[test]
    fn single_column_without_zeros() {
        let ctx = Arc::new(FieldCtx::with_degree(1).unwrap());
        let g = GammaCandidate::new(Scheme::Alg5, ctx.clone(), Mat::ones(2, 1)).unwrap();
        assert!(check_fast_small(&g).unwrap().unwrap().is_safe());
        let z = GammaCandidate::new(Scheme::Alg5, ctx, Mat::zeros(2, 1)).unwrap();
        assert!(check_fast_small(&z).unwrap().is_none());
    }

    #[test]
    fn two_column_cauchy() {
        let ctx = Arc::new(FieldCtx::with_degree(3).unwrap());
        let spec = CauchySpec::parse(&ctx, "1,2,3", "4,5").unwrap();
        let g = construct_precond51(ctx, &spec).unwrap();
        assert!(check_fast_small(&g).unwrap().is_some());
    }

    #[test]
    fn explicit_three_column_over_f32() {
        let ctx = Arc::new(FieldCtx::with_degree(5).unwrap());
        let spec = CauchySpec::parse(&ctx, "1,3,5", "6,4,a").unwrap();
        let g = construct_precond41(ctx, &spec).unwrap();
        assert!(check_fast_small(&g).unwrap().is_some());
        assert!(check_subsets(&g).unwrap().is_safe());
    }

    #[test]
    fn rejects_wide_inputs() {
        let ctx = Arc::new(FieldCtx::with_degree(4).unwrap());
        let g = GammaCandidate::new_unchecked(Scheme::Alg5, ctx, Mat::ones(5, 4)).unwrap();
        assert!(check_fast_small(&g).is_err());
    }
}
