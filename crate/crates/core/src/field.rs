//! Arithmetic in GF(2^k), 1 <= k <= 16, backed by log/exp tables.
//!
//! Elements use the usual "hexadecimal notation": bit `i` of the integer
//! is the coefficient of `X^i` in the polynomial basis.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Default irreducible polynomials, indexed by degree.
const DEFAULT_POLYS: [u32; 17] = [
    0,       // unused
    0x2,     // X
    0x7,     // X^2 + X + 1
    0xb,     // X^3 + X + 1
    0x13,    // X^4 + X + 1
    0x25,    // X^5 + X^2 + 1
    0x43,    // X^6 + X + 1
    0x83,    // X^7 + X + 1
    0x11b,   // X^8 + X^4 + X^3 + X + 1
    0x203,   // X^9 + X + 1
    0x409,   // X^10 + X^3 + 1
    0x805,   // X^11 + X^2 + 1
    0x1009,  // X^12 + X^3 + 1
    0x201b,  // X^13 + X^4 + X^3 + X + 1
    0x4021,  // X^14 + X^5 + 1
    0x8003,  // X^15 + X + 1
    0x1002b, // X^16 + X^5 + X^3 + X + 1
];

/// Default modulus for degree `k`, if `k` is supported.
pub fn default_poly(k: u32) -> Option<u32> {
    DEFAULT_POLYS.get(k as usize).copied().filter(|&p| p != 0)
}

/// A field element. Only meaningful together with the [`FieldCtx`] it came from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElem(pub u16);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }
}

impl std::ops::Add for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn add(self, rhs: FieldElem) -> FieldElem {
        FieldElem(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for FieldElem {
    #[inline]
    fn add_assign(&mut self, rhs: FieldElem) {
        self.0 ^= rhs.0;
    }
}

// Characteristic 2: subtraction and negation coincide with addition and identity.
impl std::ops::Sub for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn sub(self, rhs: FieldElem) -> FieldElem {
        FieldElem(self.0 ^ rhs.0)
    }
}

impl std::ops::Neg for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn neg(self) -> FieldElem {
        self
    }
}

impl fmt::LowerHex for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

/// Carry-less product of two polynomials over GF(2), reduced modulo `poly`
/// (of degree `k`). Used to build the tables and as an independent reference.
pub fn clmul_mod(a: u32, b: u32, poly: u32, k: u32) -> u32 {
    let mut prod: u64 = 0;
    for i in 0..32 {
        if (b >> i) & 1 == 1 {
            prod ^= (a as u64) << i;
        }
    }
    poly_mod(prod, poly as u64, k)
}

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, m: u64, k: u32) -> u32 {
    let k = k as i32;
    while a != 0 && degree(a) >= k {
        a ^= m << (degree(a) - k);
    }
    a as u32
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible(poly: u32) -> bool {
    if poly < 2 {
        return false;
    }
    let k = degree(poly as u64);
    for dd in 1..=(k / 2) {
        for divisor in (1u64 << dd)..(1u64 << (dd + 1)) {
            if poly_mod(poly as u64, divisor, dd as u32) == 0 {
                return false;
            }
        }
    }
    true
}

/// The field GF(2^k) with its modulus and log/exp tables.
///
/// Immutable after construction and freely shareable between threads.
#[derive(Clone)]
pub struct FieldCtx {
    k: u32,
    poly: u32,
    /// exp[i] = g^i for i in 0..2(q-1); doubled so log sums need no reduction.
    exp: Vec<u16>,
    /// log[a] for a != 0; log[0] is unused.
    log: Vec<u16>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("k", &self.k)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.poly == other.poly
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    /// Builds GF(2^k) with the given modulus, or the default one when `poly`
    /// is `None`.
    pub fn new(k: u32, poly: Option<u32>) -> Result<FieldCtx> {
        if !(1..=MAX_DEGREE).contains(&k) {
            return Err(Error::DegreeOutOfRange(k));
        }
        let poly = match poly {
            Some(p) => p,
            None => default_poly(k).expect("default exists for supported degrees"),
        };
        if poly == 0 || degree(poly as u64) != k as i32 {
            return Err(Error::PolynomialDegree { poly, k });
        }
        if !is_irreducible(poly) {
            return Err(Error::ReduciblePolynomial(poly));
        }

        let q = 1usize << k;
        let order = q - 1;
        let generator = (1..q as u32)
            .find(|&g| multiplicative_order(g, poly, k) == order)
            .expect("the multiplicative group of a finite field is cyclic");

        let mut exp = vec![0u16; 2 * order.max(1)];
        let mut log = vec![0u16; q];
        let mut x = 1u32;
        for i in 0..order {
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x = clmul_mod(x, generator, poly, k);
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(FieldCtx { k, poly, exp, log })
    }

    /// GF(2^k) with the default modulus.
    pub fn with_degree(k: u32) -> Result<FieldCtx> {
        FieldCtx::new(k, None)
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, 2^k.
    pub fn size(&self) -> usize {
        1usize << self.k
    }

    /// Raw table access, mostly for tests.
    pub fn exp_table(&self) -> &[u16] {
        &self.exp[..self.size() - 1]
    }

    pub fn log_table(&self) -> &[u16] {
        &self.log
    }

    /// Element from its integer representation.
    pub fn elem(&self, value: u32) -> Result<FieldElem> {
        if value >= (1u32 << self.k) {
            return Err(Error::ElementOutOfRange { value, k: self.k });
        }
        Ok(FieldElem(value as u16))
    }

    #[inline]
    pub fn contains(&self, a: FieldElem) -> bool {
        (a.0 as usize) < self.size()
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        debug_assert!(self.contains(a) && self.contains(b));
        a + b
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        debug_assert!(self.contains(a) && self.contains(b));
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let s = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElem(self.exp[s])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        debug_assert!(self.contains(a));
        if a.0 == 0 {
            return Err(Error::InverseOfZero);
        }
        let order = self.size() - 1;
        let l = self.log[a.0 as usize] as usize;
        Ok(FieldElem(self.exp[(order - l) % order]))
    }

    /// `a / b`; `b` must be non-zero.
    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Parses an element in hex notation (no prefix, surrounding spaces ignored).
    pub fn parse_elem(&self, text: &str) -> Result<FieldElem> {
        let t = text.trim();
        if t.is_empty() {
            return Err(Error::ParseElement(text.to_string()));
        }
        let v = u32::from_str_radix(t, 16).map_err(|_| Error::ParseElement(text.to_string()))?;
        self.elem(v)
    }

    /// Uniformly random element.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(0..self.size()) as u16)
    }

    /// Uniformly random non-zero element.
    pub fn random_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(1..self.size()) as u16)
    }
}

fn multiplicative_order(g: u32, poly: u32, k: u32) -> usize {
    let mut x = g;
    let mut n = 1;
    while x != 1 {
        x = clmul_mod(x, g, poly, k);
        n += 1;
        if x == 0 {
            return 0;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_polynomials() {
        let f8 = FieldCtx::with_degree(8).unwrap();
        assert_eq!(f8.poly(), 0x11b);
        let f1 = FieldCtx::with_degree(1).unwrap();
        assert_eq!(f1.poly(), 0x2);
        assert_eq!(f1.size(), 2);
        assert_eq!(f1.mul(FieldElem::ONE, FieldElem::ONE), FieldElem::ONE);
        assert!(FieldCtx::new(4, Some(0x13)).is_ok());
        for k in 1..=16 {
            let p = default_poly(k).unwrap();
            assert!(is_irreducible(p), "k={k}");
            assert_eq!(degree(p as u64), k as i32);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldCtx::new(0, None), Err(Error::DegreeOutOfRange(0))));
        assert!(matches!(FieldCtx::new(17, None), Err(Error::DegreeOutOfRange(17))));
        // X^4 + 1 = (X + 1)^4
        assert!(matches!(FieldCtx::new(4, Some(0x11)), Err(Error::ReduciblePolynomial(0x11))));
        assert!(matches!(FieldCtx::new(4, Some(0xb)), Err(Error::PolynomialDegree { .. })));
    }

    #[test]
    fn small_examples() {
        let f = FieldCtx::with_degree(4).unwrap();
        assert_eq!(f.add(FieldElem(6), FieldElem(3)), FieldElem(5));
        assert_eq!(f.mul(FieldElem(2), FieldElem(9)), FieldElem(1));
        assert_eq!(clmul_mod(2, 9, 0x13, 4), 1);
        for k in 1..=16 {
            let f = FieldCtx::with_degree(k).unwrap();
            assert_eq!(f.inv(FieldElem::ONE).unwrap(), FieldElem::ONE);
        }
        assert!(matches!(f.inv(FieldElem::ZERO), Err(Error::InverseOfZero)));
    }

    #[test]
    fn tables_are_consistent() {
        for k in 1..=16 {
            let f = FieldCtx::with_degree(k).unwrap();
            let q = f.size();
            let mut seen = vec![false; q];
            for &e in f.exp_table() {
                assert!(e != 0 && !seen[e as usize]);
                seen[e as usize] = true;
            }
            for a in 1..q {
                assert_eq!(f.exp_table()[f.log_table()[a] as usize] as usize, a);
            }
        }
    }

    #[test]
    fn mul_matches_schoolbook_exhaustively_small_fields() {
        for k in 1..=8 {
            let f = FieldCtx::with_degree(k).unwrap();
            for a in 0..f.size() as u32 {
                for b in 0..f.size() as u32 {
                    let got = f.mul(FieldElem(a as u16), FieldElem(b as u16)).value();
                    assert_eq!(got, clmul_mod(a, b, f.poly(), k));
                }
            }
        }
    }

    #[test]
    fn field_axioms_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 1..=16 {
            let f = FieldCtx::with_degree(k).unwrap();
            for _ in 0..2000 {
                let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
                assert_eq!(f.mul(a, b).value(), clmul_mod(a.value(), b.value(), f.poly(), k));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
                assert_eq!(a + a, FieldElem::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElem::ONE);
                }
            }
        }
    }

    #[test]
    fn hex_parsing() {
        let f = FieldCtx::with_degree(8).unwrap();
        assert_eq!(f.parse_elem("  e3").unwrap(), FieldElem(0xe3));
        assert_eq!(f.parse_elem("5").unwrap(), FieldElem(5));
        assert!(f.parse_elem("1ff").is_err());
        assert!(f.parse_elem("zz").is_err());
        assert!(f.parse_elem(" ").is_err());
        assert_eq!(format!("{}", FieldElem(0xab)), "ab");
    }
}
