//! Reference share evaluation for both multiplication gadgets.
//!
//! For Alg4 the output shares are
//!
//! ```text
//! c_0     = (a_0 + sum_j (r_j + a_j)) * (b_0 + sum_j (s_j + b_j))
//! c_i     = -r_i * (b_0 + sum_j ((1 - gamma[j][i]) s_j + b_j))
//! c_{i+d} = -s_i * (a_0 + sum_j (gamma[i][j] r_j + a_j))
//! ```
//!
//! with `gamma` the `d x d` part below the ones row. The complement matrix
//! appears transposed in `c_i`: that is the form for which the shares sum
//! to `a * b` for every `gamma`.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::probes::{GammaCandidate, Scheme};

/// Input shares and randomness for one gadget evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedInput {
    pub a_shares: Vec<FieldElem>,
    pub b_shares: Vec<FieldElem>,
    pub r: Vec<FieldElem>,
    /// Second random vector, used by Alg4 only.
    pub s: Vec<FieldElem>,
}

impl SharedInput {
    pub fn a(&self) -> FieldElem {
        self.a_shares.iter().fold(FieldElem::ZERO, |x, &y| x + y)
    }

    pub fn b(&self) -> FieldElem {
        self.b_shares.iter().fold(FieldElem::ZERO, |x, &y| x + y)
    }

    /// Uniformly random shares and randomness for order `d`.
    pub fn random<R: rand::Rng + ?Sized>(ctx: &FieldCtx, d: usize, rng: &mut R) -> SharedInput {
        let mut v = |n: usize| (0..n).map(|_| ctx.random(rng)).collect::<Vec<_>>();
        SharedInput { a_shares: v(d + 1), b_shares: v(d + 1), r: v(d), s: v(d) }
    }

    fn check(&self, d: usize, need_s: bool) -> Result<()> {
        let ok = self.a_shares.len() == d + 1
            && self.b_shares.len() == d + 1
            && self.r.len() == d
            && (!need_s || self.s.len() == d);
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("shared input does not match order {d}")))
        }
    }
}

fn sum(v: &[FieldElem]) -> FieldElem {
    v.iter().fold(FieldElem::ZERO, |x, &y| x + y)
}

/// The `2d+1` output shares of the Alg4 gadget.
pub fn eval_alg4_shares(g: &GammaCandidate, input: &SharedInput) -> Result<Vec<FieldElem>> {
    if g.scheme() != Scheme::Alg4 || g.n() != g.d() {
        return Err(Error::Unsupported("eval_alg4_shares needs a square Alg4 candidate".into()));
    }
    let d = g.d();
    input.check(d, true)?;
    let ctx = g.ctx();
    let gm = g.gamma();
    let (a, b, r, s) = (&input.a_shares, &input.b_shares, &input.r, &input.s);
    let mut c = Vec::with_capacity(2 * d + 1);
    c.push(ctx.mul(sum(a) + sum(r), sum(b) + sum(s)));
    for i in 0..d {
        let mut acc = b[0];
        for j in 0..d {
            let delta_t = FieldElem::ONE - gm.get(j + 1, i);
            acc += ctx.mul(delta_t, s[j]) + b[j + 1];
        }
        c.push(-ctx.mul(r[i], acc));
    }
    for i in 0..d {
        let mut acc = a[0];
        for j in 0..d {
            acc += ctx.mul(gm.get(i + 1, j), r[j]) + a[j + 1];
        }
        c.push(-ctx.mul(s[i], acc));
    }
    Ok(c)
}

/// The `d+1` output shares of the Alg5 gadget,
/// `c_i = a_0 b_i + sum_j (gamma[i][j] r_j + a_j b_i)`.
pub fn eval_alg5_shares(g: &GammaCandidate, input: &SharedInput) -> Result<Vec<FieldElem>> {
    if g.scheme() != Scheme::Alg5 || g.n() != g.d() {
        return Err(Error::Unsupported("eval_alg5_shares needs a square Alg5 candidate".into()));
    }
    let d = g.d();
    input.check(d, false)?;
    let ctx = g.ctx();
    let gm = g.gamma();
    let (a, b, r) = (&input.a_shares, &input.b_shares, &input.r);
    Ok((0..=d)
        .map(|i| {
            let mut acc = ctx.mul(a[0], b[i]);
            for j in 0..d {
                acc += ctx.mul(gm.get(i, j), r[j]) + ctx.mul(a[j + 1], b[i]);
            }
            acc
        })
        .collect())
}

/// Evaluates the gadget matching the candidate's scheme and reports whether
/// the output shares sum to `a * b`.
pub fn identity_holds(g: &GammaCandidate, input: &SharedInput) -> Result<bool> {
    let c = match g.scheme() {
        Scheme::Alg4 => eval_alg4_shares(g, input)?,
        Scheme::Alg5 => eval_alg5_shares(g, input)?,
    };
    Ok(sum(&c) == g.ctx().mul(input.a(), input.b()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use rand::SeedableRng;
    use std::sync::Arc;

    fn ctx(k: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::with_degree(k).unwrap())
    }

    #[test]
    fn degenerate_sharings() {
        let c = ctx(8);
        let a = Mat::from_rows(&c, &[[0xe3, 0xb7, 0x50], [0xbd, 0xe8, 0x8b], [0x2f, 0x11, 0x99]]).unwrap();
        let g = GammaCandidate::from_alg4_part(c.clone(), &a).unwrap();
        let z = FieldElem::ZERO;
        let inp = SharedInput {
            a_shares: vec![FieldElem(0x53), FieldElem(7), z, FieldElem(1)],
            b_shares: vec![FieldElem(0xca), z, z, z],
            r: vec![z; 3],
            s: vec![z; 3],
        };
        let out = eval_alg4_shares(&g, &inp).unwrap();
        assert_eq!(out.len(), 7);
        assert_eq!(sum(&out), c.mul(inp.a(), inp.b()));
        let zero_a = SharedInput { a_shares: vec![FieldElem(9), FieldElem(9), z, z], ..inp.clone() };
        assert!(sum(&eval_alg4_shares(&g, &zero_a).unwrap()).is_zero());
    }

    #[test]
    fn alg5_zero_randomness() {
        let c = ctx(3);
        let g = GammaCandidate::new(
            Scheme::Alg5,
            c.clone(),
            Mat::from_rows(&c, &[[1, 7, 4], [4, 4, 4], [2, 1, 4], [7, 2, 4]]).unwrap(),
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut inp = SharedInput::random(&c, 3, &mut rng);
        inp.r = vec![FieldElem::ZERO; 3];
        let out = eval_alg5_shares(&g, &inp).unwrap();
        for i in 0..4 {
            assert_eq!(out[i], c.mul(inp.b_shares[i], inp.a()));
        }
    }

    #[test]
    fn non_symmetric_gamma_still_correct() {
        let c = ctx(4);
        let a = Mat::from_rows(&c, &[[4, 0xb, 0xe], [0xf, 7, 5], [3, 0xd, 0xc]]).unwrap();
        let g = GammaCandidate::from_alg4_part(c.clone(), &a).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            assert!(identity_holds(&g, &SharedInput::random(&c, 3, &mut rng)).unwrap());
        }
    }

    #[test]
    fn perturbed_alg5_fails() {
        let c = ctx(8);
        let gm = Mat::from_rows(&c, &[[1, 2], [3, 4], [2, 7]]).unwrap();
        let g = GammaCandidate::new_unchecked(Scheme::Alg5, c.clone(), gm).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let fails = (0..100).filter(|_| !identity_holds(&g, &SharedInput::random(&c, 2, &mut rng)).unwrap()).count();
        assert!(fails > 0);
    }

    #[test]
    fn length_mismatch() {
        let c = ctx(4);
        let g = GammaCandidate::from_alg4_part(c.clone(), &Mat::ones(2, 2)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut inp = SharedInput::random(&c, 2, &mut rng);
        inp.s.pop();
        assert!(eval_alg4_shares(&g, &inp).is_err());
    }
}
