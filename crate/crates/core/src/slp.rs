//! Straight-line programs and the probe engine.
//!
//! A probe evaluates a program under `x_i -> x^{a_i}` with every intermediate
//! value reduced in `R[x]/(x^p - 1)`, so no degree ever reaches `p`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};

use crate::poly::{sparse_image, CyclicPoly, ExponentMap, SparsePoly};
use crate::{Error, Ring};

/// One instruction. Register operands are 0-based indices of earlier
/// instructions; `Input` is 0-based too (`Input(0)` is `x1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Input(usize),
    Const(BigInt),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
}

/// Validated division-free straight-line program; the output is the last
/// instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlpProgram {
    nvars: usize,
    instrs: Vec<Instr>,
    // index of the last instruction reading each register
    last_use: Vec<usize>,
}

impl SlpProgram {
    pub fn new(nvars: usize, instrs: Vec<Instr>) -> Result<Self, Error> {
        if nvars == 0 {
            return Err(Error::InvalidProgram("a program needs at least one variable".into()));
        }
        if instrs.is_empty() {
            return Err(Error::InvalidProgram("empty program".into()));
        }
        let mut last_use: Vec<usize> = (0..instrs.len()).collect();
        for (i, ins) in instrs.iter().enumerate() {
            match ins {
                Instr::Input(v) if *v >= nvars => {
                    return Err(Error::InvalidProgram(format!(
                        "instruction {}: input x{} out of range 1..={nvars}",
                        i + 1,
                        v + 1
                    )));
                }
                Instr::Add(a, b) | Instr::Sub(a, b) | Instr::Mul(a, b) => {
                    for r in [*a, *b] {
                        if r >= i {
                            return Err(Error::InvalidProgram(format!(
                                "instruction {}: register {} is not defined yet",
                                i + 1,
                                r + 1
                            )));
                        }
                        last_use[r] = i;
                    }
                }
                _ => {}
            }
        }
        Ok(SlpProgram { nvars, instrs, last_use })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    /// Program size `L`.
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }
}

/// A polynomial that can be probed: `f(x^{a_1}, ..., x^{a_n}) mod (x^p - 1)`.
///
/// Implemented by [`SlpProgram`] (the probe engine proper) and by an explicit
/// [`SparsePoly`] (direct image), so interpolators can run against either.
pub trait Blackbox<R: Ring> {
    fn nvars(&self) -> usize;

    /// Returns the image and the number of ring operations spent.
    fn eval_cyclic(&self, ring: &R, map: &[u64], p: u64) -> (CyclicPoly<R::Elem>, u64);
}

impl<R: Ring> Blackbox<R> for SlpProgram {
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn eval_cyclic(&self, ring: &R, map: &[u64], p: u64) -> (CyclicPoly<R::Elem>, u64) {
        eval_counted(ring, self, map, p)
    }
}

impl<R: Ring> Blackbox<R> for SparsePoly<R::Elem> {
    fn nvars(&self) -> usize {
        SparsePoly::nvars(self)
    }

    fn eval_cyclic(&self, ring: &R, map: &[u64], p: u64) -> (CyclicPoly<R::Elem>, u64) {
        let img = sparse_image(ring, self, map, p).expect("map length checked by the oracle");
        (img, self.term_count() as u64 * self.nvars() as u64)
    }
}

/// `probe_eval`: runs `prog` in `R[x]/(x^p - 1)` with `Input(i)` loading
/// `x^{a_i mod p}`.
///
/// # Panics
/// If `map.len()` differs from the program's variable count or `p == 0`.
pub fn probe_eval<R: Ring>(ring: &R, prog: &SlpProgram, map: &[u64], p: u64) -> CyclicPoly<R::Elem> {
    eval_counted(ring, prog, map, p).0
}

fn eval_counted<R: Ring>(ring: &R, prog: &SlpProgram, map: &[u64], p: u64) -> (CyclicPoly<R::Elem>, u64) {
    assert_eq!(map.len(), prog.nvars, "exponent map length must equal nvars");
    assert!(p >= 1, "probe modulus must be positive");
    let n = prog.instrs.len();
    let mut regs: Vec<Option<CyclicPoly<R::Elem>>> = vec![None; n];
    let mut ops = 0u64;
    for (i, ins) in prog.instrs.iter().enumerate() {
        let v = match ins {
            Instr::Input(v) => CyclicPoly::monomial(ring, ring.one(), map[*v] % p, p),
            Instr::Const(c) => CyclicPoly::monomial(ring, ring.from_int(c), 0, p),
            Instr::Add(a, b) | Instr::Sub(a, b) | Instr::Mul(a, b) => {
                let (a, b) = (*a, *b);
                let x = regs[a].as_ref().expect("operand live");
                let y = regs[b].as_ref().expect("operand live");
                let (lx, ly) = (x.term_count(), y.term_count());
                let is_mul = matches!(ins, Instr::Mul(..));
                ops += if is_mul { lx * ly } else { lx + ly } as u64;
                let dies = |r: usize| prog.last_use[r] == i && a != b;
                // a dying operand against a single term is updated in place
                let out = if dies(a) && ly == 1 {
                    let (d, c) = y.terms()[0].clone();
                    let mut x = regs[a].take().unwrap();
                    match ins {
                        Instr::Add(..) => x.add_term(ring, d, &c),
                        Instr::Sub(..) => x.sub_term(ring, d, &c),
                        _ => x.rotate_scale(ring, d, &c),
                    }
                    x
                } else if dies(b) && lx == 1 && !matches!(ins, Instr::Sub(..)) {
                    let (d, c) = x.terms()[0].clone();
                    let mut y = regs[b].take().unwrap();
                    if is_mul {
                        y.rotate_scale(ring, d, &c);
                    } else {
                        y.add_term(ring, d, &c);
                    }
                    y
                } else {
                    match ins {
                        Instr::Add(..) => x.add(ring, y),
                        Instr::Sub(..) => x.sub(ring, y),
                        _ => x.mul(ring, y),
                    }
                    .expect("registers share the probe modulus")
                };
                for r in [a, b] {
                    if prog.last_use[r] == i {
                        regs[r] = None;
                    }
                }
                out
            }
        };
        regs[i] = Some(v);
    }
    (regs[n - 1].take().expect("output register"), ops)
}

/// Aggregate probe accounting for one interpolation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeStats {
    /// Number of probes issued.
    pub probes: u64,
    /// Largest probe modulus (the "probe degree").
    pub max_modulus: u64,
    /// Sum of all probe moduli.
    pub modulus_sum: u64,
    /// Ring operations spent inside probes.
    pub ring_ops: u64,
}

/// Thread-safe probe counter shared by every oracle of a run.
#[derive(Debug, Default)]
pub struct ProbeMeter {
    probes: AtomicU64,
    max_modulus: AtomicU64,
    modulus_sum: AtomicU64,
    ring_ops: AtomicU64,
}

impl ProbeMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, modulus: u64, ring_ops: u64) {
        self.probes.fetch_add(1, Ordering::Relaxed);
        self.max_modulus.fetch_max(modulus, Ordering::Relaxed);
        self.modulus_sum.fetch_add(modulus, Ordering::Relaxed);
        self.ring_ops.fetch_add(ring_ops, Ordering::Relaxed);
    }

    pub fn stats(&self) -> ProbeStats {
        ProbeStats {
            probes: self.probes.load(Ordering::Relaxed),
            max_modulus: self.max_modulus.load(Ordering::Relaxed),
            modulus_sum: self.modulus_sum.load(Ordering::Relaxed),
            ring_ops: self.ring_ops.load(Ordering::Relaxed),
        }
    }
}

/// Univariate probe source: some `g(x)` of degree below [`degree_bound`]
/// that can be observed only as `g mod (x^q - 1)`.
///
/// [`degree_bound`]: ProbeOracle::degree_bound
pub trait ProbeOracle<R: Ring> {
    fn degree_bound(&self) -> &BigUint;
    fn probe(&self, q: u64) -> CyclicPoly<R::Elem>;
}

/// `g(x) = (f - h)(x^{a_1}, ..., x^{a_n})` for a probeable `f`, a base map
/// `a`, and an explicit subtrahend `h`.
#[derive(Debug)]
pub struct SubstOracle<'a, R: Ring, B> {
    ring: &'a R,
    source: &'a B,
    base: ExponentMap,
    subtrahend: SparsePoly<R::Elem>,
    degree_bound: BigUint,
    meter: &'a ProbeMeter,
}

impl<'a, R: Ring, B: Blackbox<R>> SubstOracle<'a, R, B> {
    pub fn new(
        ring: &'a R,
        source: &'a B,
        base: ExponentMap,
        subtrahend: SparsePoly<R::Elem>,
        degree_bound: BigUint,
        meter: &'a ProbeMeter,
    ) -> Result<Self, Error> {
        let n = source.nvars();
        if base.len() != n {
            return Err(Error::NvarsMismatch { left: n, right: base.len() });
        }
        if subtrahend.nvars() != n {
            return Err(Error::NvarsMismatch { left: n, right: subtrahend.nvars() });
        }
        Ok(SubstOracle { ring, source, base, subtrahend, degree_bound, meter })
    }

    pub fn base(&self) -> &ExponentMap {
        &self.base
    }
}

impl<R: Ring, B: Blackbox<R>> ProbeOracle<R> for SubstOracle<'_, R, B> {
    fn degree_bound(&self) -> &BigUint {
        &self.degree_bound
    }

    fn probe(&self, q: u64) -> CyclicPoly<R::Elem> {
        let map = self.base.reduce(q);
        let (mut img, ops) = self.source.eval_cyclic(self.ring, &map, q);
        self.meter.record(q, ops);
        if !self.subtrahend.is_zero() {
            let h = sparse_image(self.ring, &self.subtrahend, &map, q).expect("nvars checked");
            img = img.sub(self.ring, &h).expect("same modulus");
        }
        img
    }
}

/// `kron_oracle`: `f(x, x^D, ..., x^{D^{n-1}})` with degree bound `D^n`.
pub fn kron_oracle<'a, R: Ring, B: Blackbox<R>>(
    ring: &'a R,
    source: &'a B,
    degree_bound: u64,
    meter: &'a ProbeMeter,
) -> SubstOracle<'a, R, B> {
    let n = source.nvars();
    let bound = BigUint::from(degree_bound).pow(n as u32);
    SubstOracle::new(
        ring,
        source,
        ExponentMap::kronecker(degree_bound, n),
        SparsePoly::zero(n),
        bound,
        meter,
    )
    .expect("shapes agree by construction")
}

/// Base map `a_i = D^{i-1} mod p`, with `a_k` raised by `p` when `shift = Some(k)`
/// (1-based).
pub fn shifted_map(degree_bound: u64, p: u64, nvars: usize, shift: Option<usize>) -> Result<ExponentMap, Error> {
    if let Some(k) = shift {
        if k == 0 || k > nvars {
            return Err(Error::IndexOutOfRange { k, n: nvars });
        }
    }
    let mut out = Vec::with_capacity(nvars);
    let mut pow = 1 % p;
    for i in 1..=nvars {
        let a = if shift == Some(i) { pow + p } else { pow };
        out.push(BigUint::from(a));
        pow = crate::poly::mul_mod(pow, degree_bound, p);
    }
    Ok(ExponentMap(out))
}

/// `sub_oracle`: `(f - h)(x^{mod(D^0,p)}, ..., x^{mod(D^{n-1},p)})`, or with
/// `x_k -> x^{mod(D^{k-1},p) + p}` when `k` is given. Degree bounds are
/// `D p` and `2 D p` respectively.
pub fn sub_oracle<'a, R: Ring, B: Blackbox<R>>(
    ring: &'a R,
    source: &'a B,
    degree_bound: u64,
    p: u64,
    k: Option<usize>,
    h: SparsePoly<R::Elem>,
    meter: &'a ProbeMeter,
) -> Result<SubstOracle<'a, R, B>, Error> {
    let n = source.nvars();
    let base = shifted_map(degree_bound, p, n, k)?;
    let factor = if k.is_some() { 2u32 } else { 1 };
    let bound = BigUint::from(degree_bound) * p * factor;
    SubstOracle::new(ring, source, base, h, bound, meter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Integers, ZMod};

    fn prog(nvars: usize, instrs: Vec<Instr>) -> SlpProgram {
        SlpProgram::new(nvars, instrs).unwrap()
    }

    fn dense(z: &Integers, p: u64, coeffs: &[(u64, i64)]) -> CyclicPoly<BigInt> {
        CyclicPoly::from_pairs(z, p, coeffs.iter().map(|&(d, c)| (d, BigInt::from(c))).collect())
    }

    #[test]
    fn validation_rejects_forward_and_out_of_range_references() {
        assert!(SlpProgram::new(2, vec![Instr::Mul(0, 1)]).is_err());
        assert!(SlpProgram::new(2, vec![Instr::Input(0), Instr::Add(0, 1)]).is_err());
        assert!(SlpProgram::new(2, vec![Instr::Input(2)]).is_err());
        assert!(SlpProgram::new(1, vec![]).is_err());
        assert!(SlpProgram::new(2, vec![Instr::Input(0), Instr::Input(1), Instr::Mul(0, 1)]).is_ok());
    }

    #[test]
    fn probe_eval_examples() {
        let z = Integers;
        // x1*x2 + 1
        let p = prog(2, vec![Instr::Input(0), Instr::Input(1), Instr::Mul(0, 1), Instr::Const(1.into()), Instr::Add(2, 3)]);
        assert_eq!(probe_eval(&z, &p, &[1, 3], 7), dense(&z, 7, &[(4, 1), (0, 1)]));
        // x1 - x1
        let p = prog(1, vec![Instr::Input(0), Instr::Sub(0, 0)]);
        assert!(probe_eval(&z, &p, &[5], 11).is_zero());
        // 3*x1^2*x2^3 + 2 with a = (1, 10 mod 7)
        let p = prog(
            2,
            vec![
                Instr::Input(0),
                Instr::Input(1),
                Instr::Mul(0, 0),
                Instr::Mul(1, 1),
                Instr::Mul(3, 1),
                Instr::Mul(2, 4),
                Instr::Const(3.into()),
                Instr::Mul(6, 5),
                Instr::Const(2.into()),
                Instr::Add(7, 8),
            ],
        );
        assert_eq!(probe_eval(&z, &p, &[1, 3], 7), dense(&z, 7, &[(0, 2), (4, 3)]));
    }

    #[test]
    fn oracle_examples() {
        let z = Integers;
        let meter = ProbeMeter::new();
        let xy = prog(2, vec![Instr::Input(0), Instr::Input(1), Instr::Mul(0, 1)]);
        let o = kron_oracle(&z, &xy, 3, &meter);
        assert_eq!(o.degree_bound(), &BigUint::from(9u8));
        assert_eq!(o.probe(5), dense(&z, 5, &[(4, 1)]));

        // x1^2 x2^3 under a = (1, 3 + 7): degree 2 + 30 = 32
        let f = SparsePoly::from_terms(&z, 2, [(BigInt::from(1), vec![2, 3])]).unwrap();
        let o = sub_oracle(&z, &f, 10, 7, Some(2), SparsePoly::zero(2), &meter).unwrap();
        assert_eq!(o.base(), &ExponentMap(vec![1u8.into(), 10u8.into()]));
        assert_eq!(o.degree_bound(), &BigUint::from(140u8));
        assert_eq!(o.probe(37), dense(&z, 37, &[(32, 1)]));

        let o = sub_oracle(&z, &f, 10, 7, None, f.clone(), &meter).unwrap();
        for q in [1, 2, 7, 13, 91] {
            assert!(o.probe(q).is_zero());
        }
        assert!(sub_oracle(&z, &f, 10, 7, Some(3), SparsePoly::zero(2), &meter).is_err());
        assert_eq!(meter.stats().probes, 7);
        assert_eq!(meter.stats().max_modulus, 91);
    }

    #[test]
    fn probes_are_consistent_under_divisibility() {
        let z = ZMod::new(12).unwrap();
        let f = SparsePoly::from_terms(
            &z,
            3,
            [(5, vec![3, 1, 4]), (7, vec![0, 9, 2]), (11, vec![6, 5, 3]), (1, vec![0, 0, 0])],
        )
        .unwrap();
        let meter = ProbeMeter::new();
        let o = kron_oracle(&z, &f, 16, &meter);
        for (q, m) in [(3u64, 5u64), (7, 11), (13, 2)] {
            assert_eq!(o.probe(q * m).reduce(&z, q).unwrap(), o.probe(q));
        }
    }
}
