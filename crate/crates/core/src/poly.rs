//! Sparse polynomials and the cyclic quotient ring `R[x]/(x^p - 1)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Ring};

/// Explicit multivariate polynomial: nonzero terms sorted by exponent vector
/// (lexicographic, ascending) with no repeated monomial, so `==` is
/// polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly<E> {
    nvars: usize,
    terms: Vec<(E, Vec<u64>)>,
}

impl<E: Clone + Eq> SparsePoly<E> {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly { nvars, terms: Vec::new() }
    }

    /// Canonicalising constructor: sums repeated monomials and drops zero
    /// coefficients.
    pub fn from_terms<R, I>(ring: &R, nvars: usize, terms: I) -> Result<Self, Error>
    where
        R: Ring<Elem = E>,
        I: IntoIterator<Item = (E, Vec<u64>)>,
    {
        if nvars == 0 {
            return Err(Error::InvalidPoly("a polynomial needs at least one variable".into()));
        }
        let mut acc: BTreeMap<Vec<u64>, E> = BTreeMap::new();
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::NvarsMismatch { left: nvars, right: e.len() });
            }
            match acc.get_mut(&e) {
                Some(slot) => ring.add_assign(slot, &c),
                None => {
                    acc.insert(e, c);
                }
            }
        }
        Ok(SparsePoly {
            nvars,
            terms: acc
                .into_iter()
                .filter(|(_, c)| !ring.is_zero(c))
                .map(|(e, c)| (c, e))
                .collect(),
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(E, Vec<u64>)] {
        &self.terms
    }

    /// Number of terms (`#f`).
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max()
    }

    /// Coefficient of the monomial with exponent vector `exps`, if present.
    pub fn coeff(&self, exps: &[u64]) -> Option<&E> {
        self.terms
            .binary_search_by(|(_, e)| e.as_slice().cmp(exps))
            .ok()
            .map(|i| &self.terms[i].0)
    }

    fn check_nvars(&self, other: &Self) -> Result<(), Error> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch { left: self.nvars, right: other.nvars });
        }
        Ok(())
    }

    pub fn add<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, Error> {
        self.check_nvars(other)?;
        Ok(self.merge(ring, other, |r, a, b| r.add(a, b), |_, b| b.clone()))
    }

    pub fn sub<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, Error> {
        self.check_nvars(other)?;
        Ok(self.merge(ring, other, |r, a, b| r.sub(a, b), |r, b| r.neg(b)))
    }

    pub fn neg<R: Ring<Elem = E>>(&self, ring: &R) -> Self {
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(c, e)| (ring.neg(c), e.clone())).collect(),
        }
    }

    pub fn mul<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, Error> {
        self.check_nvars(other)?;
        let mut acc: BTreeMap<Vec<u64>, E> = BTreeMap::new();
        for (a, ea) in &self.terms {
            for (b, eb) in &other.terms {
                let e: Vec<u64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = ring.mul(a, b);
                match acc.get_mut(&e) {
                    Some(slot) => ring.add_assign(slot, &c),
                    None => {
                        acc.insert(e, c);
                    }
                }
            }
        }
        Ok(SparsePoly {
            nvars: self.nvars,
            terms: acc
                .into_iter()
                .filter(|(_, c)| !ring.is_zero(c))
                .map(|(e, c)| (c, e))
                .collect(),
        })
    }

    fn merge<R: Ring<Elem = E>>(
        &self,
        ring: &R,
        other: &Self,
        both: impl Fn(&R, &E, &E) -> E,
        right_only: impl Fn(&R, &E) -> E,
    ) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.1.cmp(&b.1),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let (b, e) = &other.terms[j];
                    terms.push((right_only(ring, b), e.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = both(ring, &self.terms[i].0, &other.terms[j].0);
                    if !ring.is_zero(&c) {
                        terms.push((c, self.terms[i].1.clone()));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        SparsePoly { nvars: self.nvars, terms }
    }
}

/// Sparse univariate polynomial with arbitrary-precision degrees, sorted by
/// ascending degree. Kronecker-packed exponents reach `D^n`, well past `u64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly<E> {
    terms: Vec<(E, BigUint)>,
}

impl<E: Clone + Eq> UniPoly<E> {
    pub fn zero() -> Self {
        UniPoly { terms: Vec::new() }
    }

    pub fn from_terms<R, I>(ring: &R, terms: I) -> Self
    where
        R: Ring<Elem = E>,
        I: IntoIterator<Item = (E, BigUint)>,
    {
        let mut acc: BTreeMap<BigUint, E> = BTreeMap::new();
        for (c, d) in terms {
            match acc.get_mut(&d) {
                Some(slot) => ring.add_assign(slot, &c),
                None => {
                    acc.insert(d, c);
                }
            }
        }
        UniPoly {
            terms: acc
                .into_iter()
                .filter(|(_, c)| !ring.is_zero(c))
                .map(|(d, c)| (c, d))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(E, BigUint)] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds terms whose degrees are not yet present. Callers guarantee
    /// disjointness; overlapping degrees are summed.
    pub fn extend<R: Ring<Elem = E>>(&mut self, ring: &R, more: &[(E, BigUint)]) {
        let merged = core::mem::take(&mut self.terms);
        *self = UniPoly::from_terms(ring, merged.into_iter().chain(more.iter().cloned()));
    }

    /// `self mod (x^q - 1)`.
    pub fn image<R: Ring<Elem = E>>(&self, ring: &R, q: u64) -> CyclicPoly<E> {
        CyclicPoly::from_pairs(
            ring,
            q,
            self.terms.iter().map(|(c, d)| (mod_small(d, q), c.clone())).collect(),
        )
    }

    /// View as a one-variable [`SparsePoly`]; `None` if a degree exceeds `u64`.
    pub fn to_sparse(&self) -> Option<SparsePoly<E>> {
        let terms = self
            .terms
            .iter()
            .map(|(c, d)| d.to_u64().map(|d| (c.clone(), vec![d])))
            .collect::<Option<Vec<_>>>()?;
        Some(SparsePoly { nvars: 1, terms })
    }

    pub fn from_sparse(f: &SparsePoly<E>) -> Result<Self, Error> {
        if f.nvars != 1 {
            return Err(Error::NvarsMismatch { left: 1, right: f.nvars });
        }
        Ok(UniPoly {
            terms: f.terms.iter().map(|(c, e)| (c.clone(), BigUint::from(e[0]))).collect(),
        })
    }
}

pub(crate) fn mod_small(d: &BigUint, q: u64) -> u64 {
    (d % q).to_u64().expect("remainder below a u64 modulus")
}

/// Element of `R[x]/(x^p - 1)`.
///
/// Semantically a dense length-`p` coefficient vector; only nonzero entries
/// are stored (sorted by degree), because probe moduli of the form `p*p_k`
/// run into the millions while images never hold more than `T` terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicPoly<E> {
    modulus: u64,
    terms: Vec<(u64, E)>,
}

impl<E: Clone + Eq> CyclicPoly<E> {
    pub fn zero(modulus: u64) -> Self {
        assert!(modulus >= 1, "cyclic modulus must be positive");
        CyclicPoly { modulus, terms: Vec::new() }
    }

    /// `c * x^(d mod p)`.
    pub fn monomial<R: Ring<Elem = E>>(ring: &R, c: E, d: u64, modulus: u64) -> Self {
        let mut out = CyclicPoly::zero(modulus);
        if !ring.is_zero(&c) {
            out.terms.push((d % modulus, c));
        }
        out
    }

    /// Builds from `(degree, coeff)` pairs in any order; degrees are reduced
    /// mod `p`, repeated degrees summed, zeros dropped.
    pub fn from_pairs<R: Ring<Elem = E>>(ring: &R, modulus: u64, mut pairs: Vec<(u64, E)>) -> Self {
        assert!(modulus >= 1, "cyclic modulus must be positive");
        for pr in pairs.iter_mut() {
            pr.0 %= modulus;
        }
        pairs.sort_unstable_by_key(|pr| pr.0);
        let mut terms: Vec<(u64, E)> = Vec::with_capacity(pairs.len());
        for (d, c) in pairs {
            match terms.last_mut() {
                Some(last) if last.0 == d => ring.add_assign(&mut last.1, &c),
                _ => terms.push((d, c)),
            }
        }
        terms.retain(|(_, c)| !ring.is_zero(c));
        CyclicPoly { modulus, terms }
    }

    pub fn from_dense<R: Ring<Elem = E>>(ring: &R, coeffs: Vec<E>) -> Self {
        let modulus = coeffs.len() as u64;
        let terms = coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !ring.is_zero(c))
            .map(|(d, c)| (d as u64, c))
            .collect();
        CyclicPoly { modulus, terms }
    }

    pub fn to_dense<R: Ring<Elem = E>>(&self, ring: &R) -> Vec<E> {
        let mut out = vec![ring.zero(); self.modulus as usize];
        for (d, c) in &self.terms {
            out[*d as usize] = c.clone();
        }
        out
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Nonzero `(degree, coeff)` entries in ascending degree.
    pub fn terms(&self) -> &[(u64, E)] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient at degree `d`, `None` when it is zero.
    pub fn coeff(&self, d: u64) -> Option<&E> {
        self.terms
            .binary_search_by_key(&d, |t| t.0)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    /// `self += c * x^d` in place.
    pub fn add_term<R: Ring<Elem = E>>(&mut self, ring: &R, d: u64, c: &E) {
        let d = d % self.modulus;
        match self.terms.binary_search_by_key(&d, |t| t.0) {
            Ok(i) => {
                ring.add_assign(&mut self.terms[i].1, c);
                if ring.is_zero(&self.terms[i].1) {
                    self.terms.remove(i);
                }
            }
            Err(i) => {
                if !ring.is_zero(c) {
                    self.terms.insert(i, (d, c.clone()));
                }
            }
        }
    }

    /// `self -= c * x^d` in place.
    pub fn sub_term<R: Ring<Elem = E>>(&mut self, ring: &R, d: u64, c: &E) {
        self.add_term(ring, d, &ring.neg(c));
    }

    fn check_modulus(&self, other: &Self) -> Result<(), Error> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch { left: self.modulus, right: other.modulus });
        }
        Ok(())
    }

    pub fn add<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, Error> {
        self.check_modulus(other)?;
        Ok(self.merge(ring, other, |r, a, b| r.add(a, b), |_, b| b.clone()))
    }

    /// `cyclic_sub`: cancelled entries disappear.
    pub fn sub<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, Error> {
        self.check_modulus(other)?;
        Ok(self.merge(ring, other, |r, a, b| r.sub(a, b), |r, b| r.neg(b)))
    }

    pub fn neg<R: Ring<Elem = E>>(&self, ring: &R) -> Self {
        CyclicPoly {
            modulus: self.modulus,
            terms: self.terms.iter().map(|(d, c)| (*d, ring.neg(c))).collect(),
        }
    }

    /// `cyclic_mul`: schoolbook convolution with index wraparound,
    /// `out[k] = sum_{i + j = k mod p} a[i] b[j]`.
    pub fn mul<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, Error> {
        self.check_modulus(other)?;
        let p = self.modulus;
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        match small.terms.len() {
            0 => Ok(CyclicPoly::zero(p)),
            1 => Ok(large.shifted_scaled(ring, small.terms[0].0, &small.terms[0].1)),
            _ => {
                let mut pairs = Vec::with_capacity(small.terms.len() * large.terms.len());
                for (da, a) in &small.terms {
                    for (db, b) in &large.terms {
                        pairs.push((add_mod(*da, *db, p), ring.mul(a, b)));
                    }
                }
                Ok(CyclicPoly::from_pairs(ring, p, pairs))
            }
        }
    }

    /// `c * x^d * self`; a rotation of the sorted term list.
    fn shifted_scaled<R: Ring<Elem = E>>(&self, ring: &R, d: u64, c: &E) -> Self {
        let p = self.modulus;
        // entries with degree >= p - d wrap around to the front
        let split = self.terms.partition_point(|t| t.0 < p - d);
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, b) in self.terms[split..].iter().chain(&self.terms[..split]) {
            let v = ring.mul(c, b);
            if !ring.is_zero(&v) {
                terms.push((add_mod(*e, d, p), v));
            }
        }
        CyclicPoly { modulus: p, terms }
    }

    /// In-place `self *= c * x^d`.
    pub(crate) fn rotate_scale<R: Ring<Elem = E>>(&mut self, ring: &R, d: u64, c: &E) {
        let p = self.modulus;
        let split = self.terms.partition_point(|t| t.0 < p - d);
        self.terms.rotate_left(split);
        for t in &mut self.terms {
            t.0 = add_mod(t.0, d, p);
        }
        if *c != ring.one() {
            for t in &mut self.terms {
                t.1 = ring.mul(c, &t.1);
            }
            self.terms.retain(|t| !ring.is_zero(&t.1));
        }
    }

    /// Image under the projection `R[x]/(x^p - 1) -> R[x]/(x^q - 1)` for `q | p`.
    pub fn reduce<R: Ring<Elem = E>>(&self, ring: &R, q: u64) -> Result<Self, Error> {
        if q == 0 || !self.modulus.is_multiple_of(q) {
            return Err(Error::ModulusMismatch { left: self.modulus, right: q });
        }
        Ok(CyclicPoly::from_pairs(ring, q, self.terms.clone()))
    }

    fn merge<R: Ring<Elem = E>>(
        &self,
        ring: &R,
        other: &Self,
        both: impl Fn(&R, &E, &E) -> E,
        right_only: impl Fn(&R, &E) -> E,
    ) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let (d, b) = &other.terms[j];
                    terms.push((*d, right_only(ring, b)));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = both(ring, &self.terms[i].1, &other.terms[j].1);
                    if !ring.is_zero(&c) {
                        terms.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        CyclicPoly { modulus: self.modulus, terms }
    }
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Substitution `x_i -> x^{a_i}` with arbitrary-precision exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentMap(pub Vec<BigUint>);

impl ExponentMap {
    /// Kronecker map `a_i = D^{i-1}`.
    pub fn kronecker(degree_bound: u64, nvars: usize) -> Self {
        let d = BigUint::from(degree_bound);
        let mut pow = BigUint::one();
        let mut out = Vec::with_capacity(nvars);
        for _ in 0..nvars {
            out.push(pow.clone());
            pow *= &d;
        }
        ExponentMap(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `a_i mod q` for every coordinate.
    pub fn reduce(&self, q: u64) -> Vec<u64> {
        self.0.iter().map(|a| mod_small(a, q)).collect()
    }

    /// `sum_i e_i a_i`, exactly.
    pub fn pack(&self, exps: &[u64]) -> BigUint {
        self.0
            .iter()
            .zip(exps)
            .fold(BigUint::zero(), |acc, (a, &e)| acc + a * e)
    }
}

/// Degree of `x1^e1...xn^en` under `x_i -> x^{a_i}` reduced mod `p`.
pub fn image_degree(exps: &[u64], map: &[u64], p: u64) -> u64 {
    exps.iter()
        .zip(map)
        .fold(0u64, |acc, (&e, &a)| add_mod(acc, mul_mod(e % p, a % p, p), p))
}

/// `sparse_image`: `f(x^{a_1}, ..., x^{a_n}) mod (x^p - 1)` for an explicit `f`.
pub fn sparse_image<R: Ring>(
    ring: &R,
    f: &SparsePoly<R::Elem>,
    map: &[u64],
    p: u64,
) -> Result<CyclicPoly<R::Elem>, Error> {
    if f.nvars() != map.len() {
        return Err(Error::NvarsMismatch { left: f.nvars(), right: map.len() });
    }
    if p == 0 {
        return Err(Error::ZeroModulus);
    }
    Ok(CyclicPoly::from_pairs(
        ring,
        p,
        f.terms()
            .iter()
            .map(|(c, e)| (image_degree(e, map, p), c.clone()))
            .collect(),
    ))
}
