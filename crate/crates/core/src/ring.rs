//! Coefficient rings.
//!
//! Every interpolator is generic over [`Ring`]. Elements are always kept in
//! canonical form, so `==` on elements is ring equality; term counting relies
//! on that (a collided block that sums to zero must vanish from an image).

use alloc::format;
use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::Error;

/// Commutative ring with decidable equality and canonical element forms.
pub trait Ring: Clone + fmt::Debug + Send + Sync {
    type Elem: Clone + Eq + fmt::Debug + Send + Sync;

    fn spec(&self) -> RingSpec;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;

    /// Image of an integer literal.
    fn from_int(&self, v: &BigInt) -> Self::Elem;

    /// Canonical integer representative (residues in `[0, q)` for `Z/qZ`).
    fn to_int(&self, a: &Self::Elem) -> BigInt;

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }

    fn sub_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.sub(a, b);
    }

    fn from_i64(&self, v: i64) -> Self::Elem {
        self.from_int(&BigInt::from(v))
    }
}

/// The integers, backed by arbitrary-precision [`BigInt`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Integers;

impl Ring for Integers {
    type Elem = BigInt;

    fn spec(&self) -> RingSpec {
        RingSpec::Integers
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::from(1)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn from_int(&self, v: &BigInt) -> BigInt {
        v.clone()
    }
    fn to_int(&self, a: &BigInt) -> BigInt {
        a.clone()
    }
    fn add_assign(&self, a: &mut BigInt, b: &BigInt) {
        *a += b;
    }
    fn sub_assign(&self, a: &mut BigInt, b: &BigInt) {
        *a -= b;
    }
}

/// Integers modulo `q` for `2 <= q < 2^64`; residues are stored in `[0, q)`.
///
/// `q` need not be prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZMod {
    q: u64,
}

impl ZMod {
    pub fn new(q: u64) -> Result<Self, Error> {
        if q < 2 {
            return Err(Error::InvalidRingModulus(q));
        }
        Ok(ZMod { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    fn reduce(&self, v: u128) -> u64 {
        (v % self.q as u128) as u64
    }
}

impl Ring for ZMod {
    type Elem = u64;

    fn spec(&self) -> RingSpec {
        RingSpec::IntegersModQ(self.q)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.reduce(*a as u128 + *b as u128)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.reduce(*a as u128 * *b as u128)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }
    fn from_int(&self, v: &BigInt) -> u64 {
        let r = v % BigInt::from(self.q);
        let r = if r.sign() == Sign::Minus { r + self.q } else { r };
        r.to_u64().expect("residue below q fits in u64")
    }
    fn to_int(&self, a: &u64) -> BigInt {
        BigInt::from(*a)
    }
}

/// Runtime ring selection, written `int` or `zmod:<q>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingSpec {
    Integers,
    IntegersModQ(u64),
}

/// Generic continuation for code that must be monomorphised per ring.
pub trait RingVisitor {
    type Output;
    fn visit<R: Ring>(self, ring: &R) -> Self::Output;
}

impl RingSpec {
    /// Runs `visitor` with the concrete ring this spec names.
    pub fn visit<V: RingVisitor>(&self, visitor: V) -> Result<V::Output, Error> {
        Ok(match *self {
            RingSpec::Integers => visitor.visit(&Integers),
            RingSpec::IntegersModQ(q) => visitor.visit(&ZMod::new(q)?),
        })
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "int" {
            return Ok(RingSpec::Integers);
        }
        let q = s
            .strip_prefix("zmod:")
            .and_then(|q| q.parse::<u64>().ok())
            .ok_or_else(|| Error::InvalidRingSpec(s.to_string()))?;
        if q < 2 {
            return Err(Error::InvalidRingModulus(q));
        }
        Ok(RingSpec::IntegersModQ(q))
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Integers => f.write_str("int"),
            RingSpec::IntegersModQ(q) => f.write_str(&format!("zmod:{q}")),
        }
    }
}
