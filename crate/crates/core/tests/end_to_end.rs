use num_bigint::BigInt;
use proptest::prelude::*;
use slpinterp_core::multi_interp::{mpoly_kron, mpoly_si};
use slpinterp_core::oracle::{random_instance, sparse_to_slp, InstanceSpec};
use slpinterp_core::slp::kron_oracle;
use slpinterp_core::uni_interp::ui_poly;
use slpinterp_core::{Error, Instr, Integers, ProbeMeter, RingSpec, SlpProgram, SparsePoly, ZMod};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn both_interpolators_agree_with_ground_truth(
        n in 1usize..5,
        log_d in 2u32..9,
        t in 1usize..10,
        seed in any::<u64>(),
    ) {
        let ring = ZMod::new(101).unwrap();
        let d = 1u64 << log_d;
        let (f, prog) = random_instance(&ring, &InstanceSpec::new(n, d, t, RingSpec::IntegersModQ(101), seed));
        let si = mpoly_si(&ring, &prog, d, t, &ProbeMeter::new()).unwrap();
        let kron = mpoly_kron(&ring, &prog, d, t, &ProbeMeter::new()).unwrap();
        prop_assert_eq!(&si, &f);
        prop_assert_eq!(&kron, &f);
    }

    #[test]
    fn loose_bounds_still_recover(seed in any::<u64>(), slack_t in 0usize..20, slack_d in 0u64..200) {
        let ring = Integers;
        let (f, prog) = random_instance(&ring, &InstanceSpec::new(3, 16, 6, RingSpec::Integers, seed));
        let got = mpoly_si(&ring, &prog, 16 + slack_d, 6 + slack_t, &ProbeMeter::new()).unwrap();
        prop_assert_eq!(got, f);
    }
}

#[test]
fn large_coefficients_over_the_integers() {
    let ring = Integers;
    let big: BigInt = BigInt::from(7).pow(90) - 3;
    let f = SparsePoly::from_terms(
        &ring,
        3,
        [(big.clone(), vec![5, 0, 9]), (-big, vec![0, 14, 0]), (BigInt::from(-1), vec![1, 1, 1])],
    )
    .unwrap();
    let prog = sparse_to_slp(&ring, &f);
    assert_eq!(mpoly_si(&ring, &prog, 15, 3, &ProbeMeter::new()).unwrap(), f);
}

#[test]
fn cancelling_program_gives_zero() {
    let ring = Integers;
    // (x + y)^2 - x^2 - 2xy - y^2
    let prog = SlpProgram::new(
        2,
        vec![
            Instr::Input(0),
            Instr::Input(1),
            Instr::Add(0, 1),
            Instr::Mul(2, 2),
            Instr::Mul(0, 0),
            Instr::Mul(1, 1),
            Instr::Mul(0, 1),
            Instr::Add(6, 6),
            Instr::Sub(3, 4),
            Instr::Sub(8, 7),
            Instr::Sub(9, 5),
        ],
    )
    .unwrap();
    let got = mpoly_si(&ring, &prog, 3, 4, &ProbeMeter::new()).unwrap();
    assert!(got.is_zero());
}

#[test]
fn underestimated_term_bound_is_reported() {
    let ring = Integers;
    let terms = (0..12u64).map(|i| (BigInt::from(i + 1), vec![i * i % 40]));
    let f = SparsePoly::from_terms(&ring, 1, terms).unwrap();
    let prog = sparse_to_slp(&ring, &f);
    let meter = ProbeMeter::new();
    let oracle = kron_oracle(&ring, &prog, 40, &meter);
    assert!(matches!(ui_poly(&ring, &oracle, 1), Err(Error::NonTermination { term_bound: 1, .. })));
}

#[test]
fn degree_bound_below_two_is_rejected() {
    let ring = Integers;
    let prog = SlpProgram::new(1, vec![Instr::Input(0)]).unwrap();
    assert!(matches!(mpoly_si(&ring, &prog, 1, 1, &ProbeMeter::new()), Err(Error::DegreeBoundTooSmall(_))));
    assert!(matches!(mpoly_kron(&ring, &prog, 0, 1, &ProbeMeter::new()), Err(Error::DegreeBoundTooSmall(_))));
}
