//! Order-3 polynomial conditions and the explicit constructions they certify.
//!
//! Each scheme comes with a list of polynomials in the Cauchy parameters
//! `x1..x3` (`x1..x4` for Alg5) and `y1..y3`. When all of them are non-zero
//! at a point, the matrix built from that point is safe.

use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::probes::{GammaCandidate, Scheme};
use crate::structures::{construct_precond41, construct_precond51, CauchySpec};

const FIG_ALG4: &str = include_str!("../data/fig_alg4.txt");
const FIG_ALG5: &str = include_str!("../data/fig_alg5.txt");

/// A variable of the polynomial systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(u8),
    Y(u8),
}

/// `coeff * prod(var^exp)` with an integer coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: i64,
    pub factors: Vec<(Var, u32)>,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.1).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub terms: Vec<Term>,
}

impl Poly {
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    /// Parses `x2 x3 - y1 y2 + 2 x1^2 ...`: terms separated by `+`/`-`,
    /// factors separated by spaces or `*`.
    pub fn parse(text: &str) -> Result<Poly> {
        let mut terms = Vec::new();
        let mut sign = 1i64;
        let mut cur: Option<Term> = None;
        let spaced = text.replace('*', " ").replace('+', " + ").replace('-', " - ");
        for tok in spaced.split_whitespace() {
            match tok {
                "+" | "-" => {
                    if let Some(t) = cur.take() {
                        terms.push(t);
                    }
                    sign = if tok == "-" { -sign.abs() } else { 1 };
                }
                _ => {
                    let t = cur.get_or_insert_with(|| Term { coeff: sign, factors: Vec::new() });
                    if let Ok(c) = tok.parse::<i64>() {
                        t.coeff *= c;
                    } else {
                        t.factors.push(parse_factor(tok)?);
                    }
                    sign = 1;
                }
            }
        }
        if let Some(t) = cur.take() {
            terms.push(t);
        }
        if terms.is_empty() {
            return Err(Error::Parse(format!("empty polynomial {text:?}")));
        }
        Ok(Poly { terms })
    }

    /// Value in characteristic 2: odd coefficients contribute, signs vanish.
    pub fn eval(&self, ctx: &FieldCtx, x: &[FieldElem], y: &[FieldElem]) -> Result<FieldElem> {
        let mut acc = FieldElem::ZERO;
        for t in &self.terms {
            if t.coeff.rem_euclid(2) == 0 {
                continue;
            }
            let mut p = FieldElem::ONE;
            for &(v, e) in &t.factors {
                let val = match v {
                    Var::X(i) => x.get(i as usize - 1),
                    Var::Y(i) => y.get(i as usize - 1),
                }
                .copied()
                .ok_or_else(|| Error::InvalidParameters(format!("no value for {v:?}")))?;
                for _ in 0..e {
                    p = ctx.mul(p, val);
                }
            }
            acc += p;
        }
        Ok(acc)
    }
}

fn parse_factor(tok: &str) -> Result<(Var, u32)> {
    let (name, exp) = match tok.split_once('^') {
        Some((n, e)) => (n, e.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in {tok:?}")))?),
        None => (tok, 1),
    };
    let idx = |s: &str| s.parse::<u8>().ok().filter(|&i| i >= 1);
    let var = match name.split_at_checked(1) {
        Some(("x", i)) => idx(i).map(Var::X),
        Some(("y", i)) => idx(i).map(Var::Y),
        _ => None,
    }
    .ok_or_else(|| Error::Parse(format!("bad factor {tok:?}")))?;
    Ok((var, exp))
}

/// The fixed polynomial list of one scheme.
#[derive(Clone, Debug)]
pub struct PolySystem {
    pub scheme: Scheme,
    pub polys: Vec<Poly>,
}

impl PolySystem {
    pub fn parse(scheme: Scheme, text: &str) -> Result<PolySystem> {
        let polys = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(Poly::parse)
            .collect::<Result<_>>()?;
        Ok(PolySystem { scheme, polys })
    }

    /// The embedded system for `scheme`.
    pub fn embedded(scheme: Scheme) -> PolySystem {
        let text = match scheme {
            Scheme::Alg4 => FIG_ALG4,
            Scheme::Alg5 => FIG_ALG5,
        };
        PolySystem::parse(scheme, text).expect("embedded polynomial list parses")
    }

    pub fn num_x(&self) -> usize {
        match self.scheme {
            Scheme::Alg4 => 3,
            Scheme::Alg5 => 4,
        }
    }

    /// `(degree, term count) -> number of polynomials`, sorted.
    pub fn shape(&self) -> Vec<((u32, usize), usize)> {
        self.polys.iter().map(|p| (p.degree(), p.terms.len())).counts().into_iter().sorted().collect()
    }

    /// Checks the assignment preconditions: three `y`s and the right number
    /// of `x`s, pairwise distinct, and non-zero for Alg4.
    pub fn validate(&self, x: &[FieldElem], y: &[FieldElem]) -> Result<()> {
        if x.len() != self.num_x() || y.len() != 3 {
            return Err(Error::InvalidParameters(format!("need {} x values and 3 y values", self.num_x())));
        }
        CauchySpec::new(x.to_vec(), y.to_vec()).validate(self.scheme == Scheme::Alg4)
    }

    /// Value of every polynomial at the point.
    pub fn evaluate(&self, ctx: &FieldCtx, x: &[FieldElem], y: &[FieldElem]) -> Result<Vec<FieldElem>> {
        self.validate(x, y)?;
        self.polys.iter().map(|p| p.eval(ctx, x, y)).collect()
    }
}

/// True iff every polynomial of `sys` is non-zero at the point.
pub fn eval_poly_system(sys: &PolySystem, ctx: &FieldCtx, x: &[FieldElem], y: &[FieldElem]) -> Result<bool> {
    Ok(sys.evaluate(ctx, x, y)?.iter().all(|v| !v.is_zero()))
}

/// The fixed parameter points, `(xs, ys)`.
pub fn explicit_point(scheme: Scheme) -> (Vec<FieldElem>, Vec<FieldElem>) {
    let e = |v: &[u16]| v.iter().map(|&x| FieldElem(x)).collect::<Vec<_>>();
    match scheme {
        Scheme::Alg4 => (e(&[1, 3, 5]), e(&[6, 4, 0xa])),
        Scheme::Alg5 => (e(&[1, 2, 5, 6]), e(&[4, 7, 0xf])),
    }
}

/// Builds a parameter-derived matrix for either scheme.
pub fn construct_from_point(
    scheme: Scheme,
    ctx: Arc<FieldCtx>,
    x: &[FieldElem],
    y: &[FieldElem],
) -> Result<GammaCandidate> {
    let spec = CauchySpec::new(x.to_vec(), y.to_vec());
    match scheme {
        Scheme::Alg4 => construct_precond41(ctx, &spec),
        Scheme::Alg5 => construct_precond51(ctx, &spec),
    }
}

/// The order-3 instantiation from the fixed point, valid for every `k >= 4`.
pub fn explicit_construct(scheme: Scheme, ctx: Arc<FieldCtx>) -> Result<GammaCandidate> {
    if ctx.degree() < 4 {
        return Err(Error::FieldTooSmall(format!("explicit order-3 points need k >= 4, got k = {}", ctx.degree())));
    }
    let (x, y) = explicit_point(scheme);
    construct_from_point(scheme, ctx, &x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_subsets;

    fn ctx(k: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::with_degree(k).unwrap())
    }

    #[test]
    fn transcription_shapes() {
        let a4 = PolySystem::embedded(Scheme::Alg4);
        assert_eq!(a4.polys.len(), 21);
        assert_eq!(a4.shape(), vec![((2, 6), 9), ((3, 6), 9), ((3, 12), 3)]);
        let a5 = PolySystem::embedded(Scheme::Alg5);
        assert_eq!(a5.polys.len(), 12);
        assert_eq!(a5.shape(), vec![((3, 12), 12)]);
        // Every term is multilinear with unit coefficient.
        for p in a4.polys.iter().chain(&a5.polys) {
            for t in &p.terms {
                assert_eq!(t.coeff.abs(), 1);
                assert!(t.factors.iter().all(|f| f.1 == 1));
            }
        }
    }

    #[test]
    fn parser_details() {
        let p = Poly::parse("2 x1^2 - x1*y2 + 3").unwrap();
        assert_eq!(p.terms.len(), 3);
        assert_eq!(p.terms[0], Term { coeff: 2, factors: vec![(Var::X(1), 2)] });
        assert_eq!(p.terms[1].coeff, -1);
        assert_eq!(p.terms[2], Term { coeff: 3, factors: vec![] });
        assert_eq!(p.degree(), 2);
        let c = ctx(4);
        let (x, y) = (vec![FieldElem(3)], vec![FieldElem(0), FieldElem(5)]);
        // Even coefficient drops out: value = x1*y2 + 1.
        assert_eq!(p.eval(&c, &x, &y).unwrap(), c.mul(FieldElem(3), FieldElem(5)) + FieldElem::ONE);
        assert!(Poly::parse("z1").is_err());
        assert!(Poly::parse("").is_err());
    }

    #[test]
    fn explicit_points_are_nonroots() {
        let a4 = PolySystem::embedded(Scheme::Alg4);
        let a5 = PolySystem::embedded(Scheme::Alg5);
        let (x4, y4) = explicit_point(Scheme::Alg4);
        let (x5, y5) = explicit_point(Scheme::Alg5);
        for k in 4..=16 {
            let c = ctx(k);
            assert!(eval_poly_system(&a4, &c, &x4, &y4).unwrap(), "alg4 k={k}");
            assert!(eval_poly_system(&a5, &c, &x5, &y5).unwrap(), "alg5 k={k}");
        }
    }

    #[test]
    fn rejects_repeated_values() {
        let a4 = PolySystem::embedded(Scheme::Alg4);
        let e = |v: &[u16]| v.iter().map(|&x| FieldElem(x)).collect::<Vec<_>>();
        let c = ctx(8);
        assert!(eval_poly_system(&a4, &c, &e(&[1, 1, 5]), &e(&[6, 4, 0xa])).is_err());
        assert!(eval_poly_system(&a4, &c, &e(&[0, 3, 5]), &e(&[6, 4, 0xa])).is_err());
        assert!(eval_poly_system(&a4, &c, &e(&[1, 3]), &e(&[6, 4, 0xa])).is_err());
    }

    #[test]
    fn explicit_constructions() {
        assert!(matches!(explicit_construct(Scheme::Alg4, ctx(3)), Err(Error::FieldTooSmall(_))));
        for k in 4..=8 {
            let g = explicit_construct(Scheme::Alg4, ctx(k)).unwrap();
            assert!(check_subsets(&g).unwrap().is_safe(), "k={k}");
        }
        let g = explicit_construct(Scheme::Alg5, ctx(16)).unwrap();
        assert!(check_subsets(&g).unwrap().is_safe());
    }
}
