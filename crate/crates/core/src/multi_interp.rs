//! Multivariate interpolation.
//!
//! [`mpoly_kron`] packs the variables with the Kronecker map
//! `x_i -> x^{D^{i-1}}` and runs the univariate driver with degree bound
//! `D^n`; probe moduli grow with `n log D` squared.
//!
//! [`mpoly_si`] instead works with the substitutions
//!
//! ```text
//! f_(D,p)   = f(x^{mod(D^0,p)}, ..., x^{mod(D^{n-1},p)})
//! f_(D,p,k) = same, but x_k -> x^{mod(D^{k-1},p) + p}
//! ```
//!
//! whose degrees stay below `2 D p`. For a term uncollided at the ok prime
//! `p`, the shift exposes `e_k = (b_k - u) / p` for each `k >= k0`, and the
//! remaining low exponents are the base-`D` digits of
//! `u - sum_{k >= k0} e_k mod(D^{k-1}, p)`, where `D^{k0-2} < p <= D^{k0-1}`.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::poly::{image_degree, mul_mod, CyclicPoly, ExponentMap, SparsePoly, UniPoly};
use crate::primes::{d_adic_expand, first_primes};
use crate::slp::{kron_oracle, sub_oracle, Blackbox, ProbeMeter, ProbeOracle};
use crate::uni_interp::{make_schedule, ok_prime_select, term_test, ui_poly, Buckets, Iteration, Residuals, Trace};
use crate::{Error, Ring};

fn check_bound(degree_bound: u64) -> Result<(), Error> {
    if degree_bound < 2 {
        return Err(Error::DegreeBoundTooSmall(degree_bound.to_string()));
    }
    Ok(())
}

/// `MPolySIKron`: univariate interpolation of the Kronecker image, then
/// base-`D` unpacking of every exponent.
pub fn mpoly_kron<R: Ring, B: Blackbox<R>>(
    ring: &R,
    source: &B,
    degree_bound: u64,
    term_bound: usize,
    meter: &ProbeMeter,
) -> Result<SparsePoly<R::Elem>, Error> {
    check_bound(degree_bound)?;
    let n = source.nvars();
    let oracle = kron_oracle(ring, source, degree_bound, meter);
    let packed = ui_poly(ring, &oracle, term_bound)?;
    let terms = packed
        .terms()
        .iter()
        .map(|(c, d)| Ok((c.clone(), d_adic_expand(d, degree_bound, n)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    SparsePoly::from_terms(ring, n, terms)
}

/// The `k0 >= 1` with `D^{k0-2} < p <= D^{k0-1}`.
pub fn find_k0(degree_bound: u64, p: u64) -> usize {
    let mut k0 = 1;
    let mut pow: u128 = 1;
    while (p as u128) > pow {
        pow *= degree_bound as u128;
        k0 += 1;
    }
    k0
}

/// Candidate multivariate term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MCandidate<E> {
    pub coeff: E,
    pub exps: Vec<u64>,
}

/// `MTerms`: candidates from the image `f_mod` at `p`, the interpolated
/// `f_sub = f_(D,p)`, and `shifted[k - k0] = f_(D,p,k)` for `k = k0..=n`.
///
/// Candidates failing the integrality, range or digit checks are dropped;
/// the membership test decides the rest.
pub fn mterms<E: Clone + Eq>(
    f_mod: &CyclicPoly<E>,
    f_sub: &UniPoly<E>,
    shifted: &[UniPoly<E>],
    p: u64,
    degree_bound: u64,
    nvars: usize,
    k0: usize,
) -> Vec<MCandidate<E>> {
    let high: Vec<usize> = (k0..=nvars).collect();
    debug_assert_eq!(shifted.len(), high.len());
    let low = (k0 - 1).min(nvars);
    let low_limit = (degree_bound as u128).checked_pow(low as u32);

    let as_buckets = |g: &UniPoly<E>| -> Option<Vec<(u64, E)>> {
        g.terms().iter().map(|(c, d)| d.to_u64().map(|d| (d, c.clone()))).collect()
    };
    let (sub_terms, shifted_terms) = match (
        as_buckets(f_sub),
        shifted.iter().map(as_buckets).collect::<Option<Vec<_>>>(),
    ) {
        (Some(a), Some(b)) => (a, b),
        _ => return Vec::new(),
    };
    let sub_buckets = Buckets::new(sub_terms.iter().map(|(d, c)| (*d, c)), p);
    let shifted_buckets: Vec<_> = shifted_terms
        .iter()
        .map(|g| Buckets::new(g.iter().map(|(d, c)| (*d, c)), p))
        .collect();
    // mod(D^{k-1}, p) for the shifted coordinates
    let weights: Vec<u64> = {
        let mut pow = 1 % p;
        let mut w = Vec::with_capacity(nvars);
        for _ in 0..nvars {
            w.push(pow);
            pow = mul_mod(pow, degree_bound, p);
        }
        w
    };

    let mut out = Vec::new();
    'terms: for (d, a) in f_mod.terms() {
        let Some(u) = sub_buckets.single_match(*d, a) else { continue };
        let mut exps = alloc::vec![0u64; nvars];
        let mut rest = u as i128;
        for (&k, bucket) in high.iter().zip(&shifted_buckets) {
            let Some(b) = bucket.single_match(*d, a) else { continue 'terms };
            if b < u || (b - u) % p != 0 {
                continue 'terms;
            }
            let e = (b - u) / p;
            if e >= degree_bound {
                continue 'terms;
            }
            exps[k - 1] = e;
            rest -= e as i128 * weights[k - 1] as i128;
        }
        if rest < 0 {
            continue;
        }
        if let Some(limit) = low_limit {
            if rest as u128 >= limit {
                continue;
            }
        }
        match d_adic_expand(&BigUint::from(rest as u128), degree_bound, low) {
            Ok(digits) => exps[..low].copy_from_slice(&digits),
            Err(_) => continue,
        }
        out.push(MCandidate { coeff: a.clone(), exps });
    }
    out
}

/// `MPolySI`: deterministic multivariate interpolation through the shifted
/// substitutions.
pub fn mpoly_si<R: Ring, B: Blackbox<R>>(
    ring: &R,
    source: &B,
    degree_bound: u64,
    term_bound: usize,
    meter: &ProbeMeter,
) -> Result<SparsePoly<R::Elem>, Error> {
    mpoly_si_traced(ring, source, degree_bound, term_bound, meter).map(|(f, _)| f)
}

/// [`mpoly_si`] that also returns the outer loop trace.
pub fn mpoly_si_traced<R: Ring, B: Blackbox<R>>(
    ring: &R,
    source: &B,
    degree_bound: u64,
    term_bound: usize,
    meter: &ProbeMeter,
) -> Result<(SparsePoly<R::Elem>, Trace), Error> {
    check_bound(degree_bound)?;
    let n = source.nvars();
    let d_big = BigUint::from(degree_bound);
    let mut schedule = make_schedule(n, term_bound, &d_big)?;
    let mut trace = Trace::default();
    let mut h = SparsePoly::zero(n);
    if term_bound == 0 {
        return Ok((h, trace));
    }
    let primes = first_primes(schedule.n);
    let largest = *primes.last().expect("N >= 4");
    if (degree_bound as u128) * (largest as u128) * 2 > u64::MAX as u128 {
        return Err(Error::DegreeBoundTooLarge(degree_bound));
    }
    let kron = kron_oracle(ring, source, degree_bound, meter);

    // a prime at or above D^n sees f without collisions: read it off directly
    let packed_bound = d_big.pow(n as u32);
    if let Some(&p) = primes.iter().find(|&&p| BigUint::from(p) >= packed_bound) {
        let img = kron.probe(p);
        let terms = img
            .terms()
            .iter()
            .map(|(d, c)| Ok((c.clone(), d_adic_expand(&BigUint::from(*d), degree_bound, n)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        return Ok((SparsePoly::from_terms(ring, n, terms)?, trace));
    }

    let kron_map = ExponentMap::kronecker(degree_bound, n);
    let maps: Vec<Vec<u64>> = primes.iter().map(|&q| kron_map.reduce(q)).collect();
    let images = primes.iter().map(|&q| kron.probe(q)).collect();
    let mut res = Residuals { primes, images };
    let (mut j0, mut alpha) = ok_prime_select(&res.images);
    let mut remaining = term_bound;

    while alpha != 0 {
        if remaining == 0 {
            return Err(Error::NonTermination { remaining: alpha, term_bound });
        }
        let p = res.primes[j0];
        let plain = sub_oracle(ring, source, degree_bound, p, None, h.clone(), meter)?;
        let f_sub = ui_poly(ring, &plain, remaining)?;
        let k0 = find_k0(degree_bound, p);
        let shifted = (k0..=n)
            .map(|k| {
                let o = sub_oracle(ring, source, degree_bound, p, Some(k), h.clone(), meter)?;
                ui_poly(ring, &o, remaining)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let candidates = mterms(&res.images[j0], &f_sub, &shifted, p, degree_bound, n, k0);

        let m = schedule.test_count();
        let mut accepted: Vec<(R::Elem, Vec<u64>)> = Vec::new();
        for u in &candidates {
            let degrees: Vec<u64> = (0..m).map(|j| image_degree(&u.exps, &maps[j], res.primes[j])).collect();
            if term_test(&u.coeff, &degrees, &res.images, &schedule) {
                accepted.push((u.coeff.clone(), u.exps.clone()));
            }
        }
        if accepted.is_empty() || accepted.len() > remaining {
            return Err(Error::NonTermination { remaining: alpha, term_bound });
        }

        let s = SparsePoly::from_terms(ring, n, accepted.iter().cloned())?;
        h = h.add(ring, &s)?;
        remaining -= accepted.len();
        schedule = make_schedule(n, remaining, &d_big)?;
        let keep = schedule.n.min(res.images.len());
        let with_degrees: Vec<(R::Elem, Vec<u64>)> = accepted
            .iter()
            .map(|(c, e)| (c.clone(), (0..keep).map(|j| image_degree(e, &maps[j], res.primes[j])).collect()))
            .collect();
        res.subtract(ring, keep, &with_degrees);

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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Integers, ZMod};
    use num_bigint::BigInt;

    fn poly(z: &Integers, n: usize, terms: &[(i64, &[u64])]) -> SparsePoly<BigInt> {
        SparsePoly::from_terms(z, n, terms.iter().map(|(c, e)| (BigInt::from(*c), e.to_vec()))).unwrap()
    }

    fn uni(z: &Integers, terms: &[(i64, u64)]) -> UniPoly<BigInt> {
        UniPoly::from_terms(z, terms.iter().map(|&(c, d)| (BigInt::from(c), BigUint::from(d))))
    }

    #[test]
    fn k0_examples() {
        assert_eq!(find_k0(10, 7), 2);
        assert_eq!(find_k0(3, 5), 3);
        assert_eq!(find_k0(2, 1), 1);
        assert_eq!(find_k0(10, 10), 2);
        assert_eq!(find_k0(10, 11), 3);
    }

    #[test]
    fn mterms_examples() {
        let z = Integers;
        // c x1^2 x2^3, D = 10, p = 7: u = 2 + 3*3 = 11, shifted b = 11 + 3*7 = 32
        let f_mod = CyclicPoly::monomial(&z, BigInt::from(5), 4, 7);
        let got = mterms(&f_mod, &uni(&z, &[(5, 11)]), &[uni(&z, &[(5, 32)])], 7, 10, 2, 2);
        assert_eq!(got, vec![MCandidate { coeff: BigInt::from(5), exps: vec![2, 3] }]);

        // k0 = 3 > n = 2: pure base-D readout of u = 2 + 1*3 = 5
        let f_mod = CyclicPoly::monomial(&z, BigInt::from(4), 0, 5);
        let got = mterms(&f_mod, &uni(&z, &[(4, 5)]), &[], 5, 3, 2, 3);
        assert_eq!(got, vec![MCandidate { coeff: BigInt::from(4), exps: vec![2, 1] }]);

        // two terms of f_sub in the same class mod p: no candidate
        let f_mod = CyclicPoly::monomial(&z, BigInt::from(2), 4, 7);
        let got = mterms(&f_mod, &uni(&z, &[(1, 4), (1, 11)]), &[uni(&z, &[(1, 4), (1, 32)])], 7, 10, 2, 2);
        assert!(got.is_empty());

        // non-integral shift and out-of-range digit are dropped
        let f_mod = CyclicPoly::monomial(&z, BigInt::from(1), 4, 7);
        assert!(mterms(&f_mod, &uni(&z, &[(1, 11)]), &[uni(&z, &[(1, 30)])], 7, 10, 2, 2).is_empty());
        assert!(mterms(&f_mod, &uni(&z, &[(1, 11)]), &[uni(&z, &[(1, 11 + 7 * 12)])], 7, 10, 2, 2).is_empty());
    }

    #[test]
    fn kron_examples() {
        let z = Integers;
        let meter = ProbeMeter::new();
        let xy = poly(&z, 2, &[(1, &[1, 1])]);
        assert_eq!(mpoly_kron(&z, &xy, 3, 1, &meter).unwrap(), xy);
        let zero = SparsePoly::zero(3);
        assert!(mpoly_kron(&z, &zero, 5, 2, &meter).unwrap().is_zero());
        let f = poly(&z, 2, &[(3, &[2, 3]), (2, &[0, 0])]);
        assert_eq!(mpoly_kron(&z, &f, 10, 2, &meter).unwrap(), f);
    }

    #[test]
    fn si_examples() {
        let z = Integers;
        let meter = ProbeMeter::new();
        let zero = SparsePoly::zero(2);
        assert!(mpoly_si(&z, &zero, 10, 2, &meter).unwrap().is_zero());
        let f = poly(&z, 2, &[(3, &[2, 3]), (2, &[0, 0])]);
        assert_eq!(mpoly_si(&z, &f, 10, 2, &meter).unwrap(), f);
        assert_eq!(mpoly_si(&z, &f, 10, 2, &meter).unwrap(), mpoly_kron(&z, &f, 10, 2, &meter).unwrap());
    }

    #[test]
    fn si_fast_path_and_general_path_agree() {
        let z = ZMod::new(101).unwrap();
        let f = SparsePoly::from_terms(&z, 2, [(7, vec![1, 2]), (9, vec![3, 0]), (100, vec![0, 0])]).unwrap();
        let meter = ProbeMeter::new();
        // D^n = 25 is below the largest scheduled prime: single-probe readout
        let (g, trace) = mpoly_si_traced(&z, &f, 5, 3, &meter).unwrap();
        assert_eq!(g, f);
        assert!(trace.iterations.is_empty());
        assert_eq!(meter.stats().probes, 1);
        // larger D forces the loop
        let (g, trace) = mpoly_si_traced(&z, &f, 1 << 10, 3, &ProbeMeter::new()).unwrap();
        assert_eq!(g, f);
        assert!(!trace.iterations.is_empty());
    }

    #[test]
    fn si_with_high_shifted_coordinates() {
        let z = Integers;
        let f = poly(
            &z,
            4,
            &[(5, &[1, 0, 2, 9]), (-3, &[0, 7, 0, 1]), (11, &[3, 3, 3, 3]), (1, &[0, 0, 0, 0]), (2, &[12, 0, 0, 0])],
        );
        let meter = ProbeMeter::new();
        assert_eq!(mpoly_si(&z, &f, 13, 5, &meter).unwrap(), f);
        assert_eq!(mpoly_kron(&z, &f, 13, 5, &meter).unwrap(), f);
    }
}
