//! Ground truth: brute-force expansion, program synthesis, random instances
//! and collision censuses.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::{mod_small, ExponentMap, SparsePoly};
use crate::slp::{Instr, SlpProgram};
use crate::{Error, Ring, RingSpec};

/// Largest intermediate polynomial [`dense_expand`] will build.
pub const EXPANSION_LIMIT: usize = 1_000_000;

/// Symbolic expansion of `prog`, with every register held as a [`SparsePoly`].
pub fn dense_expand<R: Ring>(ring: &R, prog: &SlpProgram) -> Result<SparsePoly<R::Elem>, Error> {
    let n = prog.nvars();
    let mut regs: Vec<SparsePoly<R::Elem>> = Vec::with_capacity(prog.len());
    for instr in prog.instrs() {
        let value = match instr {
            Instr::Input(i) => {
                let mut e = vec![0; n];
                e[*i] = 1;
                SparsePoly::from_terms(ring, n, [(ring.one(), e)])?
            }
            Instr::Const(c) => SparsePoly::from_terms(ring, n, [(ring.from_int(c), vec![0; n])])?,
            Instr::Add(a, b) => regs[*a].add(ring, &regs[*b])?,
            Instr::Sub(a, b) => regs[*a].sub(ring, &regs[*b])?,
            Instr::Mul(a, b) => {
                let pairs = regs[*a].term_count().saturating_mul(regs[*b].term_count());
                if pairs > EXPANSION_LIMIT.saturating_mul(100) {
                    return Err(Error::ExpansionTooLarge { limit: EXPANSION_LIMIT });
                }
                regs[*a].mul(ring, &regs[*b])?
            }
        };
        if value.term_count() > EXPANSION_LIMIT {
            return Err(Error::ExpansionTooLarge { limit: EXPANSION_LIMIT });
        }
        regs.push(value);
    }
    Ok(regs.pop().expect("programs are nonempty"))
}

/// Program computing `f`: one repeated-squaring chain per variable, shared by
/// all terms, then a product per term and a running sum.
pub fn sparse_to_slp<R: Ring>(ring: &R, f: &SparsePoly<R::Elem>) -> SlpProgram {
    let n = f.nvars();
    let mut instrs = Vec::new();
    if f.is_zero() {
        instrs.push(Instr::Const(BigInt::zero()));
        return SlpProgram::new(n, instrs).expect("constant program");
    }
    // squares[i][k] = register holding x_i^(2^k)
    let mut squares: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let top = f.terms().iter().map(|(_, e)| e[i]).max().unwrap_or(0);
        let mut chain = Vec::new();
        if top > 0 {
            instrs.push(Instr::Input(i));
            chain.push(instrs.len() - 1);
            for _ in 1..(64 - top.leading_zeros()) {
                let r = *chain.last().unwrap();
                instrs.push(Instr::Mul(r, r));
                chain.push(instrs.len() - 1);
            }
        }
        squares.push(chain);
    }
    let one = ring.one();
    let mut sum: Option<usize> = None;
    for (c, e) in f.terms() {
        let mut acc: Option<usize> = None;
        if *c != one {
            instrs.push(Instr::Const(ring.to_int(c)));
            acc = Some(instrs.len() - 1);
        }
        for (i, &ei) in e.iter().enumerate() {
            for (k, &r) in squares[i].iter().enumerate() {
                if ei >> k & 1 == 1 {
                    acc = Some(match acc {
                        None => r,
                        Some(a) => {
                            instrs.push(Instr::Mul(a, r));
                            instrs.len() - 1
                        }
                    });
                }
            }
        }
        let term = match acc {
            Some(r) => r,
            None => {
                instrs.push(Instr::Const(ring.to_int(c)));
                instrs.len() - 1
            }
        };
        sum = Some(match sum {
            None => term,
            Some(s) => {
                instrs.push(Instr::Add(s, term));
                instrs.len() - 1
            }
        });
    }
    // the result must be the last register
    let last = sum.unwrap();
    if last + 1 != instrs.len() {
        instrs.push(Instr::Const(BigInt::zero()));
        instrs.push(Instr::Add(last, instrs.len() - 1));
    }
    SlpProgram::new(n, instrs).expect("registers are defined before use")
}

/// Parameters for [`random_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    pub nvars: usize,
    /// Every monomial has total degree below this.
    pub degree_bound: u64,
    pub term_bound: usize,
    pub ring: RingSpec,
    pub seed: u64,
    /// Inclusive range for integer coefficients; ignored for `Z/qZ`, where
    /// coefficients are uniform in `[1, q)`.
    pub coeff_range: (i64, i64),
}

impl InstanceSpec {
    pub fn new(nvars: usize, degree_bound: u64, term_bound: usize, ring: RingSpec, seed: u64) -> Self {
        InstanceSpec { nvars, degree_bound, term_bound, ring, seed, coeff_range: (-1000, 1000) }
    }
}

/// Number of monomials in `n` variables with total degree below `d`,
/// i.e. `binomial(d - 1 + n, n)`, saturating at `u64::MAX`.
pub fn monomial_count(nvars: usize, degree_bound: u64) -> u64 {
    if degree_bound == 0 {
        return 0;
    }
    let top = degree_bound - 1 + nvars as u64;
    let mut c = BigUint::from(1u32);
    for i in 0..nvars as u64 {
        c = c * (top - i) / (i + 1);
    }
    c.to_u64().unwrap_or(u64::MAX)
}

/// Uniform point of the simplex `{e : sum(e) < d}` via stars and bars:
/// `n` sorted distinct cut points in `[0, d - 1 + n)`.
fn sample_exponents(rng: &mut ChaCha8Rng, nvars: usize, degree_bound: u64) -> Vec<u64> {
    let width = (degree_bound - 1) as usize + nvars;
    let mut cuts = index::sample(rng, width, nvars).into_vec();
    cuts.sort_unstable();
    let mut prev: i64 = -1;
    cuts.iter()
        .map(|&c| {
            let e = (c as i64 - prev - 1) as u64;
            prev = c as i64;
            e
        })
        .collect()
}

fn all_exponents(nvars: usize, degree_bound: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; nvars];
    fn rec(i: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, degree_bound, &mut cur, &mut out);
    out
}

/// Random sparse polynomial with exactly `min(T, available)` distinct
/// monomials of total degree `< D`, and a program computing it.
///
/// The generator is ChaCha8 seeded with `spec.seed`, so output is identical
/// across platforms.
pub fn random_instance<R: Ring>(ring: &R, spec: &InstanceSpec) -> (SparsePoly<R::Elem>, SlpProgram) {
    assert!(spec.nvars >= 1 && spec.degree_bound >= 1, "instance needs n >= 1 and D >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let available = monomial_count(spec.nvars, spec.degree_bound);
    let want = (spec.term_bound as u64).min(available) as usize;
    let monomials: Vec<Vec<u64>> = if available <= 2 * want as u64 {
        let all = all_exponents(spec.nvars, spec.degree_bound);
        index::sample(&mut rng, all.len(), want).into_iter().map(|i| all[i].clone()).collect()
    } else {
        let mut seen = BTreeMap::new();
        while seen.len() < want {
            let e = sample_exponents(&mut rng, spec.nvars, spec.degree_bound);
            let next = seen.len();
            seen.entry(e).or_insert(next);
        }
        let mut v: Vec<(usize, Vec<u64>)> = seen.into_iter().map(|(e, i)| (i, e)).collect();
        v.sort_unstable();
        v.into_iter().map(|(_, e)| e).collect()
    };
    let terms: Vec<(R::Elem, Vec<u64>)> = monomials
        .into_iter()
        .map(|e| {
            let c = loop {
                let c = match spec.ring {
                    RingSpec::IntegersModQ(q) => ring.from_int(&BigInt::from(rng.gen_range(1..q))),
                    RingSpec::Integers => ring.from_i64(rng.gen_range(spec.coeff_range.0..=spec.coeff_range.1)),
                };
                if !ring.is_zero(&c) {
                    break c;
                }
            };
            (c, e)
        })
        .collect();
    let f = SparsePoly::from_terms(ring, spec.nvars, terms).expect("exponent vectors have length n");
    let prog = sparse_to_slp(ring, &f);
    (f, prog)
}

/// How the terms of `f` fall into residue classes of their packed degree
/// `sum e_i D^{i-1}` modulo `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionCensus {
    pub uncollided: usize,
    pub collided: usize,
    /// Sizes of the classes with at least two terms, ascending.
    pub block_sizes: Vec<usize>,
    /// Per term of `f` (in `f.terms()` order): does it share its class?
    pub collided_terms: Vec<bool>,
}

pub fn collision_census<E: Clone + Eq>(f: &SparsePoly<E>, degree_bound: u64, p: u64) -> CollisionCensus {
    let map = ExponentMap::kronecker(degree_bound, f.nvars());
    let classes: Vec<u64> = f.terms().iter().map(|(_, e)| mod_small(&map.pack(e), p)).collect();
    let mut sizes: BTreeMap<u64, usize> = BTreeMap::new();
    for &c in &classes {
        *sizes.entry(c).or_default() += 1;
    }
    let collided_terms: Vec<bool> = classes.iter().map(|c| sizes[c] > 1).collect();
    let mut block_sizes: Vec<usize> = sizes.values().copied().filter(|&s| s > 1).collect();
    block_sizes.sort_unstable();
    let collided = block_sizes.iter().sum();
    CollisionCensus { uncollided: f.term_count() - collided, collided, block_sizes, collided_terms }
}
