//! Univariate interpolation from probes `f mod (x^p - 1)`.
//!
//! The driver probes the target at the first `N` primes, picks the image with
//! the most terms (at least half of the true terms are uncollided there),
//! recovers candidate exponents by Chinese remaindering over the moduli
//! `p * p_k`, and accepts a candidate `c x^e` only if it survives the
//! membership test: `c` must be the coefficient at `e mod p_j` in at least
//! `N2` of the first `N1 + N2 - 1` residual images.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;

use crate::poly::{mod_small, CyclicPoly, UniPoly};
use crate::primes::{compute_kd, crt, first_primes, PrimeList};
use crate::slp::ProbeOracle;
use crate::{Error, Ring};

/// Parameter schedule derived from `(n, T, D)`:
///
/// * `N1 = max(1, ceil(n (T-1) log2 D))`
/// * `N2 = ceil(n T log2 D)`
/// * `N  = max(4 N1, N1 + N2 - 1)`
///
/// The logarithms are evaluated exactly (`ceil(k log2 D)` is the least `m`
/// with `2^m >= D^k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub nvars: usize,
    pub term_bound: usize,
    pub degree_bound: BigUint,
    pub n1: usize,
    pub n2: usize,
    pub n: usize,
}

impl Schedule {
    /// Number of images the membership test looks at, `N1 + N2 - 1`.
    pub fn test_count(&self) -> usize {
        self.n1 + self.n2 - 1
    }
}

/// `ceil(k * log2(d))`, exactly.
pub fn ceil_log2_pow(d: &BigUint, k: usize) -> usize {
    if k == 0 || d.is_one() {
        return 0;
    }
    let v = d.pow(k as u32);
    let bits = v.bits() as usize;
    if v.count_ones() == 1 {
        bits - 1
    } else {
        bits
    }
}

pub fn make_schedule(nvars: usize, term_bound: usize, degree_bound: &BigUint) -> Result<Schedule, Error> {
    if degree_bound < &BigUint::from(2u8) {
        return Err(Error::DegreeBoundTooSmall(degree_bound.to_string()));
    }
    let n1 = ceil_log2_pow(degree_bound, nvars * term_bound.saturating_sub(1)).max(1);
    let n2 = ceil_log2_pow(degree_bound, nvars * term_bound);
    let n = (4 * n1).max(n1 + n2 - 1);
    Ok(Schedule {
        nvars,
        term_bound,
        degree_bound: degree_bound.clone(),
        n1,
        n2,
        n,
    })
}

/// Smallest index (0-based) of an image with the maximal term count, and
/// that count `alpha`.
pub fn ok_prime_select<E: Clone + Eq>(images: &[CyclicPoly<E>]) -> (usize, usize) {
    let mut best = (0, 0);
    for (j, img) in images.iter().enumerate() {
        if img.term_count() > best.1 {
            best = (j, img.term_count());
        }
    }
    best
}

/// Candidate univariate term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UCandidate<E> {
    pub coeff: E,
    pub exponent: BigUint,
}

/// Terms of `img` bucketed by `degree mod p`, for the grouping step shared by
/// the candidate builders.
pub(crate) struct Buckets<'a, E> {
    // (degree mod p, full degree, coefficient), sorted by the first entry
    entries: Vec<(u64, u64, &'a E)>,
}

impl<'a, E: Eq> Buckets<'a, E> {
    pub(crate) fn new(terms: impl Iterator<Item = (u64, &'a E)>, p: u64) -> Self {
        let mut entries: Vec<_> = terms.map(|(b, c)| (b % p, b, c)).collect();
        entries.sort_by_key(|e| e.0);
        Buckets { entries }
    }

    /// Degree of the single term in bucket `d`, provided the bucket holds
    /// exactly one term and its coefficient is `c`.
    pub(crate) fn single_match(&self, d: u64, c: &E) -> Option<u64> {
        let lo = self.entries.partition_point(|e| e.0 < d);
        let hi = self.entries.partition_point(|e| e.0 <= d);
        match &self.entries[lo..hi] {
            [(_, b, coeff)] if *coeff == c => Some(*b),
            _ => None,
        }
    }
}

/// `UTerms`: candidate set recovered from the image `f_p` at `p` and the
/// images `f_ppk[k]` at `p * p_k` for the first `K_D` primes `p_k`.
///
/// A term `a x^d` of `f_p` yields a candidate when every `f_ppk[k]` has
/// exactly one term of degree `= d (mod p)` and that term has coefficient
/// `a`; its exponent is the CRT lift of the degrees mod `p_k`, kept if it is
/// below `D` and reproduces every observed degree.
pub fn uterms<E: Clone + Eq>(
    f_p: &CyclicPoly<E>,
    f_ppk: &[CyclicPoly<E>],
    p: u64,
    small_primes: &[u64],
    degree_bound: &BigUint,
) -> Vec<UCandidate<E>> {
    debug_assert_eq!(f_ppk.len(), small_primes.len());
    let buckets: Vec<Buckets<'_, E>> = f_ppk
        .iter()
        .map(|g| Buckets::new(g.terms().iter().map(|(b, c)| (*b, c)), p))
        .collect();
    let mut out = Vec::new();
    let mut lifted = Vec::with_capacity(small_primes.len());
    'terms: for (d, a) in f_p.terms() {
        lifted.clear();
        for bucket in &buckets {
            match bucket.single_match(*d, a) {
                Some(b) => lifted.push(b),
                None => continue 'terms,
            }
        }
        let residues: Vec<u64> = lifted.iter().zip(small_primes).map(|(b, q)| b % q).collect();
        let beta = match crt(&residues, small_primes, degree_bound) {
            Ok(Some(beta)) => beta,
            _ => continue,
        };
        // When p is itself one of the small primes the modulus p*p_k is not
        // squarefree; re-check the lift against every observed degree.
        if mod_small(&beta, p) != *d {
            continue;
        }
        let consistent = lifted
            .iter()
            .zip(f_ppk)
            .all(|(b, g)| mod_small(&beta, g.modulus()) == *b);
        if consistent {
            out.push(UCandidate { coeff: a.clone(), exponent: beta });
        }
    }
    out
}

/// Membership test: `true` iff for at least `N2` of the first `N1 + N2 - 1`
/// images, subtracting the candidate lowers the term count. That happens at
/// `j` exactly when `images[j]` has coefficient `coeff` at `degrees[j]`.
pub fn term_test<E: Clone + Eq>(
    coeff: &E,
    degrees: &[u64],
    images: &[CyclicPoly<E>],
    schedule: &Schedule,
) -> bool {
    let m = schedule.test_count();
    assert!(images.len() >= m && degrees.len() >= m, "membership test needs N1 + N2 - 1 images");
    let mut hits = 0;
    for j in 0..m {
        if images[j].coeff(degrees[j]) == Some(coeff) {
            hits += 1;
            if hits >= schedule.n2 {
                return true;
            }
        }
        // not enough images left to reach N2
        if hits + (m - 1 - j) < schedule.n2 {
            return false;
        }
    }
    hits >= schedule.n2
}

/// Per-iteration record of a driver run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Iteration {
    /// Index (0-based) of the selected prime and its probe value.
    pub j0: usize,
    pub prime: u64,
    /// Term count of the selected residual image.
    pub alpha: usize,
    pub candidates: usize,
    pub accepted: usize,
    /// Sum of term counts over the residual images after the update.
    pub residual_terms: usize,
}

/// Loop diagnostics for a driver run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub iterations: Vec<Iteration>,
}

/// Residual images `(f - h) mod (x^{p_j} - 1)` for the scheduled primes.
pub(crate) struct Residuals<E> {
    pub(crate) primes: PrimeList,
    pub(crate) images: Vec<CyclicPoly<E>>,
}

impl<E: Clone + Eq> Residuals<E> {
    pub(crate) fn total_terms(&self) -> usize {
        self.images.iter().map(|g| g.term_count()).sum()
    }

    /// Drops images beyond the new `N` and subtracts the accepted terms; each
    /// term carries its image degree at every remaining `p_j`.
    pub(crate) fn subtract<R: Ring<Elem = E>>(&mut self, ring: &R, n: usize, terms: &[(E, Vec<u64>)]) {
        self.images.truncate(n);
        for (j, img) in self.images.iter_mut().enumerate() {
            for (c, degrees) in terms {
                img.sub_term(ring, degrees[j], c);
            }
        }
    }
}

/// `UIPoly`: recovers the univariate polynomial behind `oracle` given a term
/// bound `T`. The degree bound is the oracle's.
pub fn ui_poly<R: Ring, O: ProbeOracle<R>>(
    ring: &R,
    oracle: &O,
    term_bound: usize,
) -> Result<UniPoly<R::Elem>, Error> {
    ui_poly_traced(ring, oracle, term_bound).map(|(f, _)| f)
}

/// [`ui_poly`] that also returns the loop trace.
pub fn ui_poly_traced<R: Ring, O: ProbeOracle<R>>(
    ring: &R,
    oracle: &O,
    term_bound: usize,
) -> Result<(UniPoly<R::Elem>, Trace), Error> {
    let degree_bound = oracle.degree_bound().clone();
    let mut schedule = make_schedule(1, term_bound, &degree_bound)?;
    let mut trace = Trace::default();
    let mut h = UniPoly::zero();
    if term_bound == 0 {
        return Ok((h, trace));
    }
    let kd = compute_kd(&degree_bound);
    let primes = first_primes(schedule.n.max(kd));
    let small: Vec<u64> = primes[..kd].to_vec();
    let images = primes[..schedule.n].iter().map(|&p| oracle.probe(p)).collect();
    let mut res = Residuals { primes, images };
    let (mut j0, mut alpha) = ok_prime_select(&res.images);
    let mut remaining = term_bound;

    while alpha != 0 {
        if remaining == 0 {
            return Err(Error::NonTermination { remaining: alpha, term_bound });
        }
        let p = res.primes[j0];
        let lifted: Vec<CyclicPoly<R::Elem>> = small
            .iter()
            .map(|&pk| {
                let q = p * pk;
                oracle.probe(q).sub(ring, &h.image(ring, q)).expect("same modulus")
            })
            .collect();
        let candidates = uterms(&res.images[j0], &lifted, p, &small, &degree_bound);

        let m = schedule.test_count();
        let mut accepted: Vec<(R::Elem, Vec<u64>)> = Vec::new();
        let mut accepted_exps: Vec<(R::Elem, BigUint)> = Vec::new();
        for u in &candidates {
            let degrees: Vec<u64> = res.primes[..m].iter().map(|&q| mod_small(&u.exponent, q)).collect();
            if term_test(&u.coeff, &degrees, &res.images, &schedule) {
                accepted_exps.push((u.coeff.clone(), u.exponent.clone()));
                accepted.push((u.coeff.clone(), Vec::new()));
            }
        }
        if accepted.is_empty() || accepted.len() > remaining {
            return Err(Error::NonTermination { remaining: alpha, term_bound });
        }

        h.extend(ring, &accepted_exps);
        remaining -= accepted.len();
        schedule = make_schedule(1, remaining, &degree_bound)?;
        let n = schedule.n.min(res.images.len());
        for ((_, degs), (_, e)) in accepted.iter_mut().zip(&accepted_exps) {
            *degs = res.primes[..n].iter().map(|&q| mod_small(e, q)).collect();
        }
        res.subtract(ring, n, &accepted);

        trace.iterations.push(Iteration {
            j0,
            prime: p,
            alpha,
            candidates: candidates.len(),
            accepted: accepted.len(),
            residual_terms: res.total_terms(),
        });
        (j0, alpha) = ok_prime_select(&res.images);
    }
    Ok((h, trace))
}

/// `D` as a [`BigUint`], for callers holding a machine-word bound.
pub fn bound(d: u64) -> BigUint {
    BigUint::from(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::SparsePoly;
    use crate::slp::{kron_oracle, ProbeMeter};
    use crate::{Integers, ZMod};
    use num_bigint::BigInt;

    fn uni(z: &Integers, terms: &[(i64, u64)]) -> SparsePoly<BigInt> {
        SparsePoly::from_terms(z, 1, terms.iter().map(|&(c, e)| (BigInt::from(c), vec![e]))).unwrap()
    }

    #[test]
    fn schedule_examples() {
        let s = make_schedule(1, 2, &bound(6)).unwrap();
        assert_eq!((s.n1, s.n2, s.n), (3, 6, 12));
        let s = make_schedule(1, 1, &bound(2)).unwrap();
        assert_eq!((s.n1, s.n2, s.n), (1, 1, 4));
        let s = make_schedule(2, 3, &bound(4)).unwrap();
        assert_eq!((s.n1, s.n2, s.n), (8, 12, 32));
        let s = make_schedule(1, 0, &bound(16)).unwrap();
        assert_eq!((s.n1, s.n2), (1, 0));
        assert!(make_schedule(1, 3, &bound(1)).is_err());
    }

    #[test]
    fn exact_logarithm_matches_float_off_boundaries() {
        for d in 2u64..200 {
            for k in 1..40 {
                let exact = ceil_log2_pow(&bound(d), k);
                let approx = k as f64 * (d as f64).log2();
                // only compare where rounding cannot flip the ceiling
                if (approx - approx.round()).abs() > 1e-9 {
                    assert_eq!(exact, approx.ceil() as usize, "d={d} k={k}");
                } else {
                    assert_eq!(exact, approx.round() as usize, "d={d} k={k}");
                }
            }
        }
    }

    #[test]
    fn ok_prime_examples() {
        let z = Integers;
        let zero: Vec<CyclicPoly<BigInt>> = (1..5).map(CyclicPoly::zero).collect();
        assert_eq!(ok_prime_select(&zero), (0, 0));
        let mk = |n: usize| {
            CyclicPoly::from_pairs(&z, 10, (0..n as u64).map(|d| (d, BigInt::from(1))).collect())
        };
        let imgs = vec![mk(2), mk(3), mk(3), mk(1)];
        assert_eq!(ok_prime_select(&imgs), (1, 3));
    }

    #[test]
    fn ok_prime_for_two_term_example() {
        // 3x^10 + 2x^4: both exponents collide mod 2 and mod 3, separate at 5.
        let z = Integers;
        let f = uni(&z, &[(3, 10), (2, 4)]);
        let ps = first_primes(12);
        let imgs: Vec<_> = ps
            .iter()
            .map(|&p| crate::poly::sparse_image(&z, &f, &[1], p).unwrap())
            .collect();
        let counts: Vec<usize> = imgs.iter().map(|g| g.term_count()).collect();
        assert_eq!(&counts[..4], &[1, 1, 2, 2]);
        assert_eq!(ok_prime_select(&imgs), (2, 2));
    }

    #[test]
    fn uterms_recovers_uncollided_terms() {
        let z = Integers;
        let f = uni(&z, &[(3, 10), (2, 4)]);
        let img = |q| crate::poly::sparse_image(&z, &f, &[1], q).unwrap();
        let small = [2u64, 3, 5];
        let lifted: Vec<_> = small.iter().map(|&pk| img(5 * pk)).collect();
        let c = uterms(&img(5), &lifted, 5, &small, &bound(16));
        assert_eq!(
            c,
            vec![
                UCandidate { coeff: BigInt::from(3), exponent: bound(10) },
                UCandidate { coeff: BigInt::from(2), exponent: bound(4) },
            ]
        );
        // a lifted image with two terms in the same class yields nothing for it
        let g = uni(&z, &[(1, 1), (1, 6)]);
        let gi = |q| crate::poly::sparse_image(&z, &g, &[1], q).unwrap();
        let lifted: Vec<_> = small.iter().map(|&pk| gi(5 * pk)).collect();
        let bad = CyclicPoly::monomial(&z, BigInt::from(2), 1, 5);
        assert!(uterms(&bad, &lifted, 5, &small, &bound(16)).is_empty());
        let zero = CyclicPoly::<BigInt>::zero(5);
        assert!(uterms(&zero, &lifted, 5, &small, &bound(16)).is_empty());
    }

    fn images(z: &Integers, f: &SparsePoly<BigInt>, s: &Schedule) -> Vec<CyclicPoly<BigInt>> {
        first_primes(s.test_count())
            .iter()
            .map(|&p| crate::poly::sparse_image(z, f, &[1], p).unwrap())
            .collect()
    }

    fn degrees(e: u64, s: &Schedule) -> Vec<u64> {
        first_primes(s.test_count()).iter().map(|p| e % p).collect()
    }

    #[test]
    fn term_test_examples() {
        let z = Integers;
        let f = uni(&z, &[(3, 10), (2, 4)]);
        let s = make_schedule(1, 2, &bound(16)).unwrap();
        let imgs = images(&z, &f, &s);
        assert!(term_test(&BigInt::from(3), &degrees(10, &s), &imgs, &s));
        assert!(term_test(&BigInt::from(2), &degrees(4, &s), &imgs, &s));
        assert!(!term_test(&BigInt::from(5), &degrees(10, &s), &imgs, &s));
        assert!(!term_test(&BigInt::from(3), &degrees(11, &s), &imgs, &s));

        let g = uni(&z, &[(1, 1), (1, 2)]);
        let s = make_schedule(1, 2, &bound(4)).unwrap();
        let imgs = images(&z, &g, &s);
        assert!(!term_test(&BigInt::from(5), &degrees(3, &s), &imgs, &s));
        assert!(term_test(&BigInt::from(1), &degrees(2, &s), &imgs, &s));
    }

    fn run(z: &Integers, f: &SparsePoly<BigInt>, t: usize, d: u64) -> SparsePoly<BigInt> {
        let meter = ProbeMeter::new();
        let o = kron_oracle(z, f, d, &meter);
        ui_poly(z, &o, t).unwrap().to_sparse().unwrap()
    }

    #[test]
    fn ui_poly_examples() {
        let z = Integers;
        let zero = SparsePoly::zero(1);
        assert!(run(&z, &zero, 3, 8).is_zero());
        let f = uni(&z, &[(1, 0), (1, 5)]);
        assert_eq!(run(&z, &f, 2, 6), f);
        let f = uni(&z, &[(3, 10), (2, 4)]);
        assert_eq!(run(&z, &f, 2, 16), f);
        // loose bounds are fine
        assert_eq!(run(&z, &f, 7, 1 << 20), f);
    }

    #[test]
    fn ui_poly_over_composite_modulus() {
        let r = ZMod::new(12).unwrap();
        let f = SparsePoly::from_terms(&r, 1, [(6, vec![3]), (4, vec![9]), (3, vec![14]), (1, vec![0])]).unwrap();
        let meter = ProbeMeter::new();
        let o = kron_oracle(&r, &f, 15, &meter);
        assert_eq!(ui_poly(&r, &o, 4).unwrap().to_sparse().unwrap(), f);
    }

    #[test]
    fn underestimated_term_bound_is_diagnosed() {
        let z = Integers;
        let f = uni(&z, &(0..12).map(|i| (1 + i as i64, 3 * i + 1)).collect::<Vec<_>>());
        let meter = ProbeMeter::new();
        let o = kron_oracle(&z, &f, 64, &meter);
        match ui_poly(&z, &o, 2) {
            Err(Error::NonTermination { .. }) => {}
            Ok(g) => panic!("wrong bound accepted: {g:?}"),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn progress_is_logarithmic() {
        let z = Integers;
        let f = uni(&z, &(0..20).map(|i| (1 + i as i64, i * i * 7 + i)).collect::<Vec<_>>());
        let meter = ProbeMeter::new();
        let o = kron_oracle(&z, &f, 3000, &meter);
        let (g, trace) = ui_poly_traced(&z, &o, 20).unwrap();
        assert_eq!(g.to_sparse().unwrap(), f);
        assert!(trace.iterations.len() <= 5 + 1);
        let sums: Vec<usize> = trace.iterations.iter().map(|i| i.residual_terms).collect();
        assert!(sums.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*sums.last().unwrap(), 0);
    }
}
