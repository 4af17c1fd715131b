//! MDS / XMDS predicates and the Cauchy constructions behind the two
//! preconditions.

use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linalg::Mat;
use crate::probes::{GammaCandidate, Scheme};

/// Parameters of a (generalized) Cauchy matrix
/// `A[i][j] = c_i d_j / (x_i - y_j)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CauchySpec {
    pub xs: Vec<FieldElem>,
    pub ys: Vec<FieldElem>,
    pub row_scale: Option<Vec<FieldElem>>,
    pub col_scale: Option<Vec<FieldElem>>,
}

impl CauchySpec {
    pub fn new(xs: Vec<FieldElem>, ys: Vec<FieldElem>) -> CauchySpec {
        CauchySpec { xs, ys, row_scale: None, col_scale: None }
    }

    /// Parses comma-separated hex lists such as `1,3,5`.
    pub fn parse(ctx: &FieldCtx, xs: &str, ys: &str) -> Result<CauchySpec> {
        Ok(CauchySpec::new(parse_hex_list(ctx, xs)?, parse_hex_list(ctx, ys)?))
    }

    /// Checks that all parameters are pairwise distinct, optionally
    /// non-zero, and that scalings are non-zero and of matching length.
    pub fn validate(&self, nonzero: bool) -> Result<()> {
        let all: Vec<FieldElem> = self.xs.iter().chain(&self.ys).copied().collect();
        if all.iter().duplicates().next().is_some() {
            return Err(Error::InvalidParameters("x and y values must be pairwise distinct".into()));
        }
        if nonzero && all.iter().any(|e| e.is_zero()) {
            return Err(Error::InvalidParameters("x and y values must be non-zero".into()));
        }
        for (scale, len, what) in [(&self.row_scale, self.xs.len(), "row"), (&self.col_scale, self.ys.len(), "column")] {
            if let Some(s) = scale {
                if s.len() != len {
                    return Err(Error::InvalidParameters(format!("{what} scaling has wrong length")));
                }
                if s.iter().any(|e| e.is_zero()) {
                    return Err(Error::InvalidParameters(format!("{what} scaling must be non-zero")));
                }
            }
        }
        Ok(())
    }

    /// The generalized Cauchy matrix.
    pub fn matrix(&self, ctx: &FieldCtx) -> Result<Mat> {
        self.validate(false)?;
        let mut m = Mat::zeros(self.xs.len(), self.ys.len());
        for (i, &x) in self.xs.iter().enumerate() {
            for (j, &y) in self.ys.iter().enumerate() {
                let mut v = ctx.inv(x - y)?;
                if let Some(c) = &self.row_scale {
                    v = ctx.mul(v, c[i]);
                }
                if let Some(dj) = &self.col_scale {
                    v = ctx.mul(v, dj[j]);
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }
}

/// Parses a comma-separated list of hex field elements.
pub fn parse_hex_list(ctx: &FieldCtx, text: &str) -> Result<Vec<FieldElem>> {
    text.split(',').filter(|t| !t.trim().is_empty()).map(|t| ctx.parse_elem(t)).collect()
}

/// True iff every square submatrix is invertible.
pub fn is_mds_all_submatrices(ctx: &FieldCtx, m: &Mat) -> bool {
    if m.has_zero_entry() {
        return false;
    }
    let max = m.rows().min(m.cols());
    for s in 2..=max {
        for rows in (0..m.rows()).combinations(s) {
            for cols in (0..m.cols()).combinations(s) {
                if m.submatrix(&rows, &cols).rank(ctx) < s {
                    return false;
                }
            }
        }
    }
    true
}

/// Row XMDS: `m` stacked under a row of ones is MDS.
pub fn is_row_xmds(ctx: &FieldCtx, m: &Mat) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let ext = Mat::ones(1, m.cols()).vstack(m)?;
    Ok(is_mds_all_submatrices(ctx, &ext))
}

/// Alg4 instantiation `A[i][j] = x_i / (x_i - y_j)` from `d` xs and `d` ys,
/// all distinct and non-zero.
pub fn construct_precond41(ctx: Arc<FieldCtx>, spec: &CauchySpec) -> Result<GammaCandidate> {
    if spec.xs.len() != spec.ys.len() || spec.xs.is_empty() {
        return Err(Error::InvalidParameters("need the same positive number of xs and ys".into()));
    }
    let mut s = spec.clone();
    s.validate(true)?;
    s.row_scale = Some(spec.xs.clone());
    s.col_scale = None;
    let a = s.matrix(&ctx)?;
    GammaCandidate::from_alg4_part(ctx, &a)
}

/// Alg5 instantiation from `d+1` xs and `d` ys (zero allowed): the Cauchy
/// matrix rows scaled by its left-kernel vector, normalized to start with 1.
pub fn construct_precond51(ctx: Arc<FieldCtx>, spec: &CauchySpec) -> Result<GammaCandidate> {
    if spec.ys.is_empty() || spec.xs.len() != spec.ys.len() + 1 {
        return Err(Error::InvalidParameters("need d+1 xs and d ys".into()));
    }
    let base = CauchySpec::new(spec.xs.clone(), spec.ys.clone());
    base.validate(false)?;
    let a = base.matrix(&ctx)?;
    let k = a.transpose().kernel_basis(&ctx);
    if k.cols() != 1 {
        return Err(Error::InvalidParameters("left kernel is not one-dimensional".into()));
    }
    let c0 = k.get(0, 0);
    let c: Vec<FieldElem> = (0..k.rows()).map(|i| ctx.div(k.get(i, 0), c0)).collect::<Result<_>>()?;
    let scaled = CauchySpec { row_scale: Some(c), ..base };
    let gamma = scaled.matrix(&ctx)?;
    GammaCandidate::new(Scheme::Alg5, ctx, gamma)
}

/// Precondition 4.1 (Alg4) or 5.1 (Alg5).
pub fn check_precondition(g: &GammaCandidate) -> bool {
    let ctx = g.ctx();
    match g.scheme() {
        Scheme::Alg4 => {
            if g.gamma().row(0).iter().any(|&e| e != FieldElem::ONE) {
                return false;
            }
            let a = g.lower_part();
            is_row_xmds(ctx, &a).unwrap_or(false) && is_row_xmds(ctx, &a.sub_from_ones()).unwrap_or(false)
        }
        Scheme::Alg5 => g.column_sums_zero() && is_mds_all_submatrices(ctx, g.gamma()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(k: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::with_degree(k).unwrap())
    }

    fn els(v: &[u16]) -> Vec<FieldElem> {
        v.iter().map(|&x| FieldElem(x)).collect()
    }

    #[test]
    fn mds_examples() {
        let c = ctx(4);
        assert!(!is_mds_all_submatrices(&c, &Mat::identity(2)));
        let cm = CauchySpec::new(els(&[1, 2]), els(&[3, 4])).matrix(&c).unwrap();
        assert!(is_mds_all_submatrices(&c, &cm));
        let c3 = ctx(3);
        let s = Mat::from_rows(&c3, &[[4, 2, 6], [4, 2, 3], [4, 2, 3]]).unwrap();
        assert!(!is_mds_all_submatrices(&c3, &s));
    }

    #[test]
    fn xmds_examples() {
        let c = ctx(4);
        // The extension [1; 1] has no square submatrix larger than 1x1.
        assert!(is_row_xmds(&c, &Mat::ones(1, 1)).unwrap());
        assert!(!is_row_xmds(&c, &Mat::ones(2, 2)).unwrap());
        assert!(is_row_xmds(&c, &Mat::ones(1, 2)).is_err());
        let g = construct_precond41(c.clone(), &CauchySpec::parse(&c, "1,3,5", "6,4,a").unwrap()).unwrap();
        let a = g.lower_part();
        assert!(is_row_xmds(&c, &a).unwrap());
        assert!(is_row_xmds(&c, &a.sub_from_ones()).unwrap());
        let mut z = a.clone();
        z.set(1, 1, FieldElem::ZERO);
        assert!(!is_row_xmds(&c, &z).unwrap());
    }

    #[test]
    fn precond41_examples() {
        let c = ctx(2);
        let g = construct_precond41(c.clone(), &CauchySpec::new(els(&[1]), els(&[2]))).unwrap();
        assert_eq!(g.lower_part(), Mat::from_rows(&c, &[[2]]).unwrap());
        assert!(check_precondition(&g));
        let err = construct_precond41(c.clone(), &CauchySpec::new(els(&[0]), els(&[2])));
        assert!(matches!(err, Err(Error::InvalidParameters(_))));
        let dup = construct_precond41(c, &CauchySpec::new(els(&[1, 2]), els(&[2, 3])));
        assert!(dup.is_err());
    }

    #[test]
    fn precond51_examples() {
        let c = ctx(2);
        let g = construct_precond51(c.clone(), &CauchySpec::new(els(&[0, 1]), els(&[2]))).unwrap();
        // Hand-solved: A = (3, 2)^T, left kernel (1, 2), gamma = (3, 3)^T.
        assert_eq!(g.gamma(), &Mat::from_rows(&c, &[[3], [3]]).unwrap());
        assert!(g.column_sums_zero());
        let c4 = ctx(4);
        let g = construct_precond51(c4.clone(), &CauchySpec::parse(&c4, "1,2,5,6", "4,7,f").unwrap()).unwrap();
        assert!(check_precondition(&g));
        assert_eq!(g.gamma().get(0, 0), c4.inv(FieldElem(1 ^ 4)).unwrap());
    }

    #[test]
    fn precondition_rejections() {
        let c = ctx(3);
        let a = Mat::from_rows(&c, &[[4, 2, 6], [4, 2, 3], [4, 2, 3]]).unwrap();
        let g = GammaCandidate::from_alg4_part(c.clone(), &a).unwrap();
        assert!(!check_precondition(&g));
        let ones = GammaCandidate::from_alg4_part(c, &Mat::ones(2, 2)).unwrap();
        assert!(!check_precondition(&ones));
    }

    fn distinct(k: u32, n: usize, nonzero: bool) -> impl Strategy<Value = Vec<u16>> {
        let lo = u16::from(nonzero);
        let hi = (1u32 << k) as u16;
        proptest::sample::subsequence((lo..hi).collect::<Vec<_>>(), n).prop_shuffle()
    }

    proptest! {
        #[test]
        fn generalized_cauchy_is_mds(
            p in distinct(5, 7, false),
            rs in proptest::collection::vec(1u16..32, 4),
            cs in proptest::collection::vec(1u16..32, 3),
        ) {
            let c = ctx(5);
            let spec = CauchySpec {
                xs: els(&p[..4]),
                ys: els(&p[4..]),
                row_scale: Some(els(&rs)),
                col_scale: Some(els(&cs)),
            };
            prop_assert!(is_mds_all_submatrices(&c, &spec.matrix(&c).unwrap()));
        }

        #[test]
        fn precond41_always_satisfies(p in distinct(5, 6, true)) {
            let c = ctx(5);
            let g = construct_precond41(c.clone(), &CauchySpec::new(els(&p[..3]), els(&p[3..]))).unwrap();
            prop_assert!(check_precondition(&g));
            let a = g.lower_part();
            prop_assert!(is_mds_all_submatrices(&c, &a));
        }

        #[test]
        fn precond51_always_satisfies(p in distinct(5, 7, false)) {
            let c = ctx(5);
            let g = construct_precond51(c.clone(), &CauchySpec::new(els(&p[..4]), els(&p[4..]))).unwrap();
            prop_assert!(check_precondition(&g));
            prop_assert!(g.column_sums_zero());
            // Row scaling by a full-weight kernel vector keeps every entry non-zero.
            prop_assert!(!g.gamma().has_zero_entry());
        }
    }
}
