//! Deterministic prime enumeration, Chinese remaindering and base-`D` digits.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::Error;

/// The first `N` primes, `2 = p_1 < p_2 < ... < p_N`, with no gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeList(Vec<u64>);

impl PrimeList {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }
}

impl Deref for PrimeList {
    type Target = [u64];
    fn deref(&self) -> &[u64] {
        &self.0
    }
}

fn sieve(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Upper estimate for the `n`-th prime: `n (ln n + ln ln n)` for `n >= 6`,
/// with both logarithms replaced by integer upper bounds.
fn nth_prime_estimate(n: usize) -> usize {
    if n < 6 {
        return 13;
    }
    let l = n.ilog2() as usize + 1;
    let ll = l.ilog2() as usize + 1;
    n * (l + ll)
}

/// `first_primes`: exact prefix of the primes by a sieve whose bound grows
/// geometrically until it covers `n` primes.
pub fn first_primes(n: usize) -> PrimeList {
    let mut limit = nth_prime_estimate(n);
    loop {
        let mut ps = sieve(limit);
        if ps.len() >= n {
            ps.truncate(n);
            return PrimeList(ps);
        }
        limit *= 2;
    }
}

/// `K_D`: least `K` with `p_1 p_2 ... p_K >= D` (0 when `D <= 1`).
pub fn compute_kd(degree_bound: &BigUint) -> usize {
    let mut prod = BigUint::one();
    let mut k = 0;
    let mut n = 8;
    loop {
        let ps = first_primes(n);
        for &p in &ps[k..] {
            if &prod >= degree_bound {
                return k;
            }
            prod *= p;
            k += 1;
        }
        if &prod >= degree_bound {
            return k;
        }
        n *= 2;
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (a as i128, m as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// Chinese remaindering: the unique `w < prod(moduli)` with `w = e_i mod q_i`,
/// or `Ok(None)` when that `w` is not below `bound`.
pub fn crt(residues: &[u64], moduli: &[u64], bound: &BigUint) -> Result<Option<BigUint>, Error> {
    if residues.len() != moduli.len() {
        return Err(Error::InvalidPoly("residue and modulus counts differ".to_string()));
    }
    let mut w = BigUint::zero();
    let mut m = BigUint::one();
    for (&e, &q) in residues.iter().zip(moduli) {
        if e >= q {
            return Err(Error::ResidueOutOfRange { residue: e, modulus: q });
        }
        // w + m t = e (mod q)
        let w_mod = (&w % q).to_u64().expect("below q");
        let m_mod = (&m % q).to_u64().expect("below q");
        let inv = mod_inverse(m_mod, q).ok_or(Error::InsufficientModuli)?;
        let diff = (e + q - w_mod) % q;
        let t = (diff as u128 * inv as u128 % q as u128) as u64;
        w += &m * t;
        m *= q;
    }
    if &m < bound {
        return Err(Error::InsufficientModuli);
    }
    Ok(if &w < bound { Some(w) } else { None })
}

/// `d = e_1 + e_2 D + ... + e_n D^{n-1}` with every `e_i` in `[0, D)`.
pub fn d_adic_expand(d: &BigUint, base: u64, digits: usize) -> Result<Vec<u64>, Error> {
    if base < 2 {
        return Err(Error::DegreeBoundTooSmall(base.to_string()));
    }
    let mut rest = d.clone();
    let mut out = Vec::with_capacity(digits);
    for _ in 0..digits {
        out.push((&rest % base).to_u64().expect("digit below base"));
        rest /= base;
    }
    if !rest.is_zero() {
        return Err(Error::DigitOverflow { value: d.to_string(), base, digits });
    }
    Ok(out)
}
