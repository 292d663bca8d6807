//! Front end for `slpinterp-core`: text formats, the invariant checks used by
//! `selftest` and the acceptance suite, benchmark sweeps, and the CLI.

pub mod bench;
pub mod checks;
pub mod cli;
pub mod format;

use std::fmt;
use std::str::FromStr;

use slpinterp_core::{multi_interp, slp, uni_interp, Blackbox, Error, ProbeMeter, Ring, SparsePoly};

/// Interpolation algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    /// Univariate driver on the identity substitution; `n = 1` only.
    UiPoly,
    /// Kronecker packing, then the univariate driver.
    Kron,
    /// Shifted substitutions.
    MpolySi,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::UiPoly, Algo::Kron, Algo::MpolySi];

    /// Name used in benchmark records.
    pub fn record_name(self) -> &'static str {
        match self {
            Algo::UiPoly => "uipoly",
            Algo::Kron => "mpolykron",
            Algo::MpolySi => "mpolysi",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::UiPoly => "uipoly",
            Algo::Kron => "kron",
            Algo::MpolySi => "mpolysi",
        })
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uipoly" => Ok(Algo::UiPoly),
            "kron" | "mpolykron" => Ok(Algo::Kron),
            "mpolysi" => Ok(Algo::MpolySi),
            other => Err(format!("unknown algorithm `{other}` (expected uipoly, kron or mpolysi)")),
        }
    }
}

/// Runs `algo` against `source` with degree bound `D` and term bound `T`.
pub fn interpolate<R: Ring, B: Blackbox<R>>(
    ring: &R,
    source: &B,
    algo: Algo,
    degree_bound: u64,
    term_bound: usize,
    meter: &ProbeMeter,
) -> Result<SparsePoly<R::Elem>, Error> {
    match algo {
        Algo::UiPoly => {
            if source.nvars() != 1 {
                return Err(Error::NvarsMismatch { left: 1, right: source.nvars() });
            }
            if degree_bound < 2 {
                return Err(Error::DegreeBoundTooSmall(degree_bound.to_string()));
            }
            let oracle = slp::kron_oracle(ring, source, degree_bound, meter);
            let f = uni_interp::ui_poly(ring, &oracle, term_bound)?;
            Ok(f.to_sparse().expect("degrees below D fit in u64"))
        }
        Algo::Kron => multi_interp::mpoly_kron(ring, source, degree_bound, term_bound, meter),
        Algo::MpolySi => multi_interp::mpoly_si(ring, source, degree_bound, term_bound, meter),
    }
}
