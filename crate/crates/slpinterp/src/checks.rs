//! Invariant checks over seeded random instances.
//!
//! Each check returns a [`CheckOutcome`] holding its failures and a log of
//! everything it computed (recovered polynomials, probe counts, verdicts).
//! Two runs with the same [`Scale`] must produce identical logs.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slpinterp_core::multi_interp::{find_k0, mterms};
use slpinterp_core::oracle::{collision_census, dense_expand, random_instance, InstanceSpec};
use slpinterp_core::poly::{image_degree, sparse_image};
use slpinterp_core::primes::{compute_kd, crt, d_adic_expand, first_primes};
use slpinterp_core::slp::{probe_eval, shifted_map};
use slpinterp_core::uni_interp::{make_schedule, ok_prime_select, term_test, uterms};
use slpinterp_core::{CyclicPoly, ExponentMap, Instr, Integers, ProbeMeter, Ring, RingSpec, SlpProgram, SparsePoly, UniPoly, ZMod};

use crate::format::write_poly;
use crate::{interpolate, Algo};

/// Runs `$body` with `$r` bound to the concrete ring named by `$spec`.
macro_rules! on_ring {
    ($spec:expr, $r:ident => $body:expr) => {
        match $spec {
            RingSpec::Integers => {
                let $r = &Integers;
                $body
            }
            RingSpec::IntegersModQ(q) => {
                let $r = &ZMod::new(q).expect("ring modulus at least 2");
                $body
            }
        }
    };
}

/// Coefficient rings every check runs over.
pub const RINGS: [RingSpec; 2] = [RingSpec::IntegersModQ(101), RingSpec::Integers];

const MAX_REPORTED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failed: usize,
    /// First few failure descriptions.
    pub failures: Vec<String>,
    pub log: String,
}

impl CheckOutcome {
    fn new(name: &'static str) -> Self {
        CheckOutcome { name, cases: 0, failed: 0, failures: Vec::new(), log: String::new() }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_REPORTED {
                self.failures.push(describe());
            }
        }
    }
}

/// Instance counts per check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub recovery: usize,
    pub term_test: usize,
    pub ok_prime: usize,
    pub collision: usize,
    pub soundness: usize,
    pub homomorphism: usize,
    pub round_trips: usize,
}

impl Scale {
    pub const ACCEPTANCE: Scale = Scale {
        recovery: 100,
        term_test: 50,
        ok_prime: 50,
        collision: 30,
        soundness: 50,
        homomorphism: 200,
        round_trips: 1000,
    };

    pub const SELFTEST: Scale = Scale {
        recovery: 3,
        term_test: 8,
        ok_prime: 8,
        collision: 6,
        soundness: 8,
        homomorphism: 40,
        round_trips: 200,
    };
}

/// Deliberate corruption, used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    pub corrupt_prime_table: bool,
}

fn rng_for(check: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(check << 32 | index as u64)
}

/// Packed exponent map `x_i -> x^{D^{i-1}}` reduced mod each prime.
fn kron_images<R: Ring>(
    ring: &R,
    f: &SparsePoly<R::Elem>,
    degree_bound: u64,
    primes: &[u64],
) -> (Vec<Vec<u64>>, Vec<CyclicPoly<R::Elem>>) {
    let map = ExponentMap::kronecker(degree_bound, f.nvars());
    let maps: Vec<Vec<u64>> = primes.iter().map(|&p| map.reduce(p)).collect();
    let images = primes
        .iter()
        .zip(&maps)
        .map(|(&p, m)| sparse_image(ring, f, m, p).expect("map has n entries"))
        .collect();
    (maps, images)
}

/// `f(x^{a_1}, ..., x^{a_n})` without reduction.
fn substitute<R: Ring>(ring: &R, f: &SparsePoly<R::Elem>, map: &ExponentMap) -> UniPoly<R::Elem> {
    UniPoly::from_terms(ring, f.terms().iter().map(|(c, e)| (c.clone(), map.pack(e))))
}

/// The recovery configurations: `(n, max log2 D, max T)`.
pub const RECOVERY_CONFIGS: [(usize, u32, usize); 6] =
    [(1, 16, 64), (2, 12, 32), (3, 12, 32), (4, 12, 32), (6, 12, 32), (8, 12, 32)];

/// Bounds for one recovery instance: `D` log-uniform in `[2, 2^kmax]`,
/// `T` uniform in `[1, tmax]`.
pub fn recovery_params(n: usize, kmax: u32, tmax: usize, index: usize) -> (u64, usize, u64) {
    let mut rng = rng_for(100 + n as u64, index);
    let k = rng.gen_range(1..=kmax);
    let d = rng.gen_range((1u64 << (k - 1)) + 1..=1u64 << k);
    let t = rng.gen_range(1..=tmax);
    (d, t, rng.gen())
}

/// Every algorithm recovers every random instance exactly.
pub fn exact_recovery(scale: &Scale) -> CheckOutcome {
    let mut out = CheckOutcome::new("exact recovery");
    for &(n, kmax, tmax) in &RECOVERY_CONFIGS {
        let algos: &[Algo] = if n == 1 { &Algo::ALL } else { &[Algo::Kron, Algo::MpolySi] };
        for spec in RINGS {
            for i in 0..scale.recovery {
                let (d, t, seed) = recovery_params(n, kmax, tmax, i);
                on_ring!(spec, ring => {
                    let (f, prog) = random_instance(ring, &InstanceSpec::new(n, d, t, spec, seed));
                    for &algo in algos {
                        let meter = ProbeMeter::new();
                        let got = interpolate(ring, &prog, algo, d, t, &meter);
                        let s = meter.stats();
                        let _ = writeln!(
                            out.log,
                            "{spec} n={n} D={d} T={t} seed={seed} {algo} probes={} max_modulus={} ring_ops={}",
                            s.probes, s.max_modulus, s.ring_ops
                        );
                        match &got {
                            Ok(g) => out.log.push_str(&write_poly(ring, g)),
                            Err(e) => {
                                let _ = writeln!(out.log, "error: {e}");
                            }
                        }
                        out.case(got.as_ref() == Ok(&f), || {
                            format!("{algo} on {spec} n={n} D={d} T={t} seed={seed}: {:?}", got.as_ref().err())
                        });
                    }
                });
            }
        }
    }
    out
}

fn perturb_coeff<R: Ring>(ring: &R, c: &R::Elem, rng: &mut ChaCha8Rng) -> R::Elem {
    loop {
        let v = ring.add(c, &ring.from_i64(rng.gen_range(1..=50)));
        if !ring.is_zero(&v) && v != *c {
            return v;
        }
    }
}

/// A different exponent vector of total degree below `d`.
fn perturb_exponent(e: &[u64], d: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let total: u64 = e.iter().sum();
    loop {
        let j = rng.gen_range(0..e.len());
        let room = d - (total - e[j]);
        let v = rng.gen_range(0..room);
        if v != e[j] {
            let mut out = e.to_vec();
            out[j] = v;
            return out;
        }
    }
}

fn random_monomial(n: usize, d: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    loop {
        let e: Vec<u64> = (0..n).map(|_| rng.gen_range(0..d)).collect();
        if e.iter().sum::<u64>() < d {
            return e;
        }
    }
}

/// The membership test accepts exactly the terms of `f`: every true term,
/// and none of five perturbations per term (two wrong coefficients, two
/// wrong exponents, one monomial absent from `f`) unless the perturbation
/// happens to be a true term.
pub fn term_test_biconditional(scale: &Scale) -> CheckOutcome {
    let mut out = CheckOutcome::new("term test biconditional");
    for i in 0..scale.term_test {
        let mut rng = rng_for(2, i);
        let spec = RINGS[i % 2];
        let n = 1 + i % 3;
        let d = 1u64 << rng.gen_range(4..=10);
        let t = rng.gen_range(1..=16);
        let seed = rng.gen();
        on_ring!(spec, ring => {
            let (f, _) = random_instance(ring, &InstanceSpec::new(n, d, t, spec, seed));
            let schedule = make_schedule(n, t, &BigUint::from(d)).expect("n >= 1");
            let primes = first_primes(schedule.test_count());
            let (maps, images) = kron_images(ring, &f, d, &primes);
            let test = |c: &_, e: &[u64]| {
                let degrees: Vec<u64> = primes.iter().zip(&maps).map(|(&p, m)| image_degree(e, m, p)).collect();
                term_test(c, &degrees, &images, &schedule)
            };
            let _ = write!(out.log, "{spec} n={n} D={d} T={t} seed={seed}:");
            for (c, e) in f.terms() {
                let mut probes = vec![(c.clone(), e.clone())];
                probes.push((perturb_coeff(ring, c, &mut rng), e.clone()));
                probes.push((perturb_coeff(ring, c, &mut rng), e.clone()));
                probes.push((c.clone(), perturb_exponent(e, d, &mut rng)));
                probes.push((c.clone(), perturb_exponent(e, d, &mut rng)));
                let absent = loop {
                    let m = random_monomial(n, d, &mut rng);
                    if f.coeff(&m).is_none() {
                        break m;
                    }
                };
                probes.push((c.clone(), absent));
                for (pc, pe) in &probes {
                    let expected = f.coeff(pe) == Some(pc);
                    let got = test(pc, pe);
                    out.log.push(if got { '1' } else { '0' });
                    out.case(got == expected, || {
                        format!("{spec} seed={seed}: term ({pc:?}, {pe:?}) expected {expected}, got {got}")
                    });
                }
            }
            out.log.push('\n');
        });
    }
    out
}

/// The prime with the most image terms leaves at least `floor(t/2)` terms
/// uncollided.
pub fn ok_prime_half_uncollided(scale: &Scale) -> CheckOutcome {
    let mut out = CheckOutcome::new("ok prime");
    for i in 0..scale.ok_prime {
        let mut rng = rng_for(3, i);
        let spec = RINGS[i % 2];
        let n = 1 + i % 4;
        let d = 1u64 << rng.gen_range(2..=12);
        let t = rng.gen_range(1..=32);
        let seed = rng.gen();
        on_ring!(spec, ring => {
            let (f, _) = random_instance(ring, &InstanceSpec::new(n, d, t, spec, seed));
            let schedule = make_schedule(n, t, &BigUint::from(d)).expect("n >= 1");
            let primes = first_primes(schedule.n);
            let (_, images) = kron_images(ring, &f, d, &primes);
            let (j0, alpha) = ok_prime_select(&images);
            let census = collision_census(&f, d, primes[j0]);
            let need = f.term_count() / 2;
            let _ = writeln!(
                out.log,
                "{spec} n={n} D={d} T={t} seed={seed}: p={} image terms={alpha} uncollided={} of {}",
                primes[j0],
                census.uncollided,
                f.term_count()
            );
            out.case(census.uncollided >= need, || {
                format!("{spec} seed={seed}: p={} leaves {} uncollided, need {need}", primes[j0], census.uncollided)
            });
        });
    }
    out
}

/// No term collides at `N1` or more of the tested primes, so it collides at
/// no more than `N1 - 1` of any `N1` of them.
pub fn per_term_collision_bound(scale: &Scale) -> CheckOutcome {
    let mut out = CheckOutcome::new("per-term collision bound");
    for i in 0..scale.collision {
        let mut rng = rng_for(4, i);
        let n = 1 + i % 4;
        let d = 1u64 << rng.gen_range(2..=12);
        let t = rng.gen_range(2..=32);
        let seed = rng.gen();
        let (f, _) = random_instance(&Integers, &InstanceSpec::new(n, d, t, RingSpec::Integers, seed));
        let schedule = make_schedule(n, t, &BigUint::from(d)).expect("n >= 1");
        let n1 = schedule.n1;
        let primes = first_primes(schedule.n.max(4 * n1));
        let mut hits = vec![0usize; f.term_count()];
        for &p in primes.iter() {
            for (h, c) in hits.iter_mut().zip(collision_census(&f, d, p).collided_terms) {
                *h += c as usize;
            }
        }
        let worst = hits.iter().copied().max().unwrap_or(0);
        let _ = writeln!(out.log, "n={n} D={d} T={t} seed={seed}: N1={n1} primes={} worst={worst}", primes.len());
        for (k, &h) in hits.iter().enumerate() {
            out.case(h < n1, || format!("seed={seed}: term {k} collides at {h} primes, N1 = {n1}"));
        }
    }
    out
}

/// Every term uncollided at `p` appears among the candidates built from the
/// probes at `p` (univariate for even indices, shifted multivariate for odd).
pub fn candidate_soundness(scale: &Scale) -> CheckOutcome {
    let mut out = CheckOutcome::new("candidate soundness");
    for i in 0..scale.soundness {
        let mut rng = rng_for(5, i);
        let spec = RINGS[(i / 2) % 2];
        let univariate = i % 2 == 0;
        let (n, d, t) = if univariate {
            (1, 1u64 << rng.gen_range(4..=16), rng.gen_range(1..=64))
        } else {
            (2 + (i / 2) % 3, 1u64 << rng.gen_range(3..=12), rng.gen_range(1..=32))
        };
        let seed = rng.gen();
        on_ring!(spec, ring => {
            let (f, _) = random_instance(ring, &InstanceSpec::new(n, d, t, spec, seed));
            let d_big = BigUint::from(d);
            let schedule = make_schedule(n, t, &d_big).expect("n >= 1");
            let primes = first_primes(schedule.n.min(30));
            let small = first_primes(compute_kd(&d_big));
            let kron = ExponentMap::kronecker(d, n);
            let _ = write!(out.log, "{spec} n={n} D={d} T={t} seed={seed}:");
            for &p in primes.iter() {
                let census = collision_census(&f, d, p);
                let f_mod = sparse_image(ring, &f, &kron.reduce(p), p).expect("n entries");
                let cands: Vec<(_, Vec<u64>)> = if univariate {
                    let lifted: Vec<_> = small
                        .iter()
                        .map(|&q| sparse_image(ring, &f, &[1], p * q).expect("one variable"))
                        .collect();
                    uterms(&f_mod, &lifted, p, &small, &d_big)
                        .into_iter()
                        .map(|u| (u.coeff, vec![u.exponent.try_into().expect("exponent below D")]))
                        .collect()
                } else {
                    let plain = shifted_map(d, p, n, None).expect("no shift");
                    let f_sub = substitute(ring, &f, &plain);
                    let k0 = find_k0(d, p);
                    let shifted: Vec<_> = (k0..=n)
                        .map(|k| substitute(ring, &f, &shifted_map(d, p, n, Some(k)).expect("k in range")))
                        .collect();
                    mterms(&f_mod, &f_sub, &shifted, p, d, n, k0).into_iter().map(|m| (m.coeff, m.exps)).collect()
                };
                let _ = write!(out.log, " {}", cands.len());
                for ((c, e), collided) in f.terms().iter().zip(&census.collided_terms) {
                    if !collided {
                        let found = cands.iter().any(|(cc, ce)| cc == c && ce == e);
                        out.case(found, || format!("{spec} seed={seed} p={p}: uncollided term {e:?} missing"));
                    }
                }
            }
            out.log.push('\n');
        });
    }
    out
}

fn random_circuit(rng: &mut ChaCha8Rng, n: usize) -> SlpProgram {
    let len = rng.gen_range(4..=16);
    let mut instrs = Vec::with_capacity(len);
    for i in 0..len {
        let ins = if i < 2 || rng.gen_ratio(1, 4) {
            if rng.gen_ratio(3, 4) {
                Instr::Input(rng.gen_range(0..n))
            } else {
                Instr::Const(BigInt::from(rng.gen_range(-5..=5)))
            }
        } else {
            let a = rng.gen_range(0..i);
            let b = rng.gen_range(0..i);
            match rng.gen_range(0..3) {
                0 => Instr::Add(a, b),
                1 => Instr::Sub(a, b),
                _ => Instr::Mul(a, b),
            }
        };
        instrs.push(ins);
    }
    SlpProgram::new(n, instrs).expect("references point backwards")
}

/// Image by direct exponent arithmetic into a dense coefficient vector.
fn brute_image<R: Ring>(ring: &R, f: &SparsePoly<R::Elem>, map: &[u64], p: u64) -> CyclicPoly<R::Elem> {
    let mut dense = vec![ring.zero(); p as usize];
    for (c, e) in f.terms() {
        let deg = e.iter().zip(map).map(|(&x, &a)| x as u128 * a as u128).sum::<u128>() % p as u128;
        ring.add_assign(&mut dense[deg as usize], c);
    }
    CyclicPoly::from_dense(ring, dense)
}

/// Probing a program, imaging its expansion, and reducing the expansion by
/// hand all give the same element of `R[x]/(x^p - 1)`.
pub fn probe_homomorphism(scale: &Scale) -> CheckOutcome {
    let mut out = CheckOutcome::new("probe homomorphism");
    for i in 0..scale.homomorphism {
        let mut rng = rng_for(6, i);
        let spec = RINGS[(i / 2) % 2];
        let n = rng.gen_range(1..=4);
        on_ring!(spec, ring => {
            let (f, prog) = if i % 2 == 0 {
                let d = rng.gen_range(2..=30);
                let t = rng.gen_range(1..=100);
                let inst = random_instance(ring, &InstanceSpec::new(n, d, t, spec, rng.gen()));
                let expanded = dense_expand(ring, &inst.1).expect("small instance");
                out.case(expanded == inst.0, || format!("{spec} case {i}: synthesised program expands differently"));
                inst
            } else {
                loop {
                    let prog = random_circuit(&mut rng, n);
                    match dense_expand(ring, &prog) {
                        Ok(f) if f.term_count() <= 100 => break (f, prog),
                        _ => continue,
                    }
                }
            };
            let p = rng.gen_range(1..=64u64);
            let map: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1_000_000u64) % p).collect();
            let probed = probe_eval(ring, &prog, &map, p);
            let imaged = sparse_image(ring, &f, &map, p).expect("n entries");
            let brute = brute_image(ring, &f, &map, p);
            let _ = writeln!(out.log, "{spec} case {i}: n={n} p={p} terms={} image={:?}", f.term_count(), probed.terms());
            out.case(probed == imaged && imaged == brute, || {
                format!("{spec} case {i}: p={p} map={map:?} probe/image/brute disagree")
            });
        });
    }
    out
}

/// Chinese remaindering inverts reduction, and base-`D` expansion inverts
/// packing.
pub fn round_trips(scale: &Scale) -> CheckOutcome {
    let mut out = CheckOutcome::new("CRT and base-D round trips");
    let pool = first_primes(300);
    for i in 0..scale.round_trips {
        let mut rng = rng_for(7, i);
        let k = rng.gen_range(1..=8);
        let moduli: Vec<u64> = rand::seq::index::sample(&mut rng, pool.len(), k)
            .into_iter()
            .map(|j| pool[j])
            .collect();
        let prod: BigUint = moduli.iter().map(|&q| BigUint::from(q)).product();
        let w = BigUint::from(rng.gen::<u128>()) % &prod;
        let residues: Vec<u64> = moduli
            .iter()
            .map(|&q| (&w % q).try_into().expect("below q"))
            .collect();
        let full = crt(&residues, &moduli, &prod);
        let tight = crt(&residues, &moduli, &w);
        let _ = writeln!(out.log, "crt {moduli:?} {w}");
        out.case(full == Ok(Some(w.clone())) && tight == Ok(None), || {
            format!("crt {residues:?} mod {moduli:?}: {full:?}, expected {w}")
        });

        let base = rng.gen_range(2..=1u64 << 16);
        let n = rng.gen_range(1..=8);
        let digits: Vec<u64> = (0..n).map(|_| rng.gen_range(0..base)).collect();
        let packed = digits.iter().rev().fold(BigUint::default(), |acc, &e| acc * base + e);
        let back = d_adic_expand(&packed, base, n);
        let _ = writeln!(out.log, "digits {base} {packed}");
        out.case(back.as_ref() == Ok(&digits), || format!("base {base} digits {digits:?}: {back:?}"));
    }
    out
}

/// The prime table is exactly the first primes in order, without gaps.
pub fn prime_table(faults: &Faults) -> CheckOutcome {
    let mut out = CheckOutcome::new("prime table");
    let mut table = first_primes(5000).into_vec();
    if faults.corrupt_prime_table {
        table[10] += 2;
    }
    let is_prime = |v: u64| v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| v % d != 0);
    let mut expected = 2u64;
    for (i, &p) in table.iter().enumerate() {
        while !is_prime(expected) {
            expected += 1;
        }
        out.case(p == expected, || format!("entry {} is {p}, expected {expected}", i + 1));
        expected += 1;
    }
    let _ = writeln!(out.log, "{} primes, last {}", table.len(), table.last().unwrap());
    out
}

/// Checks 1 to 7 in order.
pub fn run_all(scale: &Scale) -> Vec<CheckOutcome> {
    vec![
        exact_recovery(scale),
        term_test_biconditional(scale),
        ok_prime_half_uncollided(scale),
        per_term_collision_bound(scale),
        candidate_soundness(scale),
        probe_homomorphism(scale),
        round_trips(scale),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: Scale = Scale {
        recovery: 1,
        term_test: 3,
        ok_prime: 4,
        collision: 4,
        soundness: 4,
        homomorphism: 10,
        round_trips: 20,
    };

    #[test]
    fn checks_pass_at_tiny_scale() {
        for c in run_all(&TINY) {
            assert!(c.passed(), "{}: {:?}", c.name, c.failures);
            assert!(c.cases > 0, "{} ran no cases", c.name);
        }
    }

    #[test]
    fn corrupted_prime_table_is_caught() {
        assert!(prime_table(&Faults::default()).passed());
        let bad = prime_table(&Faults { corrupt_prime_table: true });
        assert!(!bad.passed());
        assert!(bad.failures[0].contains("entry 11"));
    }

    #[test]
    fn recovery_params_respect_bounds() {
        for i in 0..200 {
            let (d, t, _) = recovery_params(8, 12, 32, i);
            assert!((2..=1 << 12).contains(&d) && (1..=32).contains(&t));
        }
    }
}
