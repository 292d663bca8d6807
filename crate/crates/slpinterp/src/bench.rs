//! Benchmark sweeps and trend fits.
//!
//! A sweep varies one of `T`, `D`, `n` over a list of values with the others
//! fixed, interpolating `reps` seeded instances per point. Everything in a
//! [`BenchRecord`] except `wall_time` is deterministic.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use slpinterp_core::oracle::{random_instance, InstanceSpec};
use slpinterp_core::ring::RingVisitor;
use slpinterp_core::{ProbeMeter, Ring, RingSpec};

use crate::{interpolate, Algo};

/// `R^2` below which a trend is reported as not reproduced.
pub const ADVISORY_R2: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub algo: &'static str,
    pub n: usize,
    #[serde(rename = "D")]
    pub degree_bound: u64,
    #[serde(rename = "T")]
    pub term_bound: usize,
    pub wall_time: f64,
    pub probes: u64,
    pub max_probe_degree: u64,
    pub ring_ops: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Terms,
    Degree,
    Nvars,
}

impl SweepVar {
    /// Regressor for the trend fit: `T^2`, `log2 D` or `n^2`.
    pub fn feature(self, r: &BenchRecord) -> f64 {
        match self {
            SweepVar::Terms => (r.term_bound as f64).powi(2),
            SweepVar::Degree => (r.degree_bound as f64).log2(),
            SweepVar::Nvars => (r.n as f64).powi(2),
        }
    }

    pub fn feature_name(self) -> &'static str {
        match self {
            SweepVar::Terms => "T^2",
            SweepVar::Degree => "log2 D",
            SweepVar::Nvars => "n^2",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVar::Terms => "T",
            SweepVar::Degree => "D",
            SweepVar::Nvars => "n",
        })
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "T" | "t" => Ok(SweepVar::Terms),
            "D" | "d" => Ok(SweepVar::Degree),
            "n" | "N" => Ok(SweepVar::Nvars),
            other => Err(format!("unknown sweep variable `{other}` (expected T, D or n)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub algo: Algo,
    pub ring: RingSpec,
    pub var: SweepVar,
    pub values: Vec<u64>,
    pub nvars: usize,
    pub degree_bound: u64,
    pub term_bound: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Sweep {
    /// `(n, D, T)` at one sweep point.
    fn point(&self, value: u64) -> (usize, u64, usize) {
        match self.var {
            SweepVar::Terms => (self.nvars, self.degree_bound, value as usize),
            SweepVar::Degree => (self.nvars, value, self.term_bound),
            SweepVar::Nvars => (value as usize, self.degree_bound, self.term_bound),
        }
    }
}

struct RunSweep<'a>(&'a Sweep);

impl RingVisitor for RunSweep<'_> {
    type Output = Result<Vec<BenchRecord>, slpinterp_core::Error>;

    fn visit<R: Ring>(self, ring: &R) -> Self::Output {
        let sweep = self.0;
        let mut out = Vec::with_capacity(sweep.values.len() * sweep.reps);
        for (i, &value) in sweep.values.iter().enumerate() {
            let (n, d, t) = sweep.point(value);
            for rep in 0..sweep.reps {
                let seed = sweep.seed.wrapping_add((i * 1000 + rep) as u64);
                let (_, prog) = random_instance(ring, &InstanceSpec::new(n, d, t, sweep.ring, seed));
                let meter = ProbeMeter::new();
                let start = Instant::now();
                interpolate(ring, &prog, sweep.algo, d, t, &meter)?;
                let wall_time = start.elapsed().as_secs_f64();
                let s = meter.stats();
                out.push(BenchRecord {
                    algo: sweep.algo.record_name(),
                    n,
                    degree_bound: d,
                    term_bound: t,
                    wall_time,
                    probes: s.probes,
                    max_probe_degree: s.max_modulus,
                    ring_ops: s.ring_ops,
                });
            }
        }
        Ok(out)
    }
}

pub fn run_sweep(sweep: &Sweep) -> Result<Vec<BenchRecord>, slpinterp_core::Error> {
    sweep.ring.visit(RunSweep(sweep))?
}

/// Writes records as CSV with a header row.
pub fn write_csv<W: io::Write>(records: &[BenchRecord], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Least-squares line `time = slope * feature + intercept` through the
/// per-point median times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

impl TrendFit {
    pub fn meets_advisory(&self) -> bool {
        self.r2 >= ADVISORY_R2
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn fit_trend(records: &[BenchRecord], var: SweepVar) -> Option<TrendFit> {
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in records {
        let x = var.feature(r);
        match groups.iter_mut().find(|(gx, _)| *gx == x) {
            Some((_, ys)) => ys.push(r.wall_time),
            None => groups.push((x, vec![r.wall_time])),
        }
    }
    let pts: Vec<(f64, f64)> = groups.into_iter().map(|(x, mut ys)| (x, median(&mut ys))).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(TrendFit { slope, intercept: my - slope * mx, r2, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: usize, time: f64) -> BenchRecord {
        BenchRecord {
            algo: "mpolysi",
            n: 3,
            degree_bound: 4096,
            term_bound: t,
            wall_time: time,
            probes: 1,
            max_probe_degree: 2,
            ring_ops: 3,
        }
    }

    #[test]
    fn fit_recovers_exact_line() {
        let rs: Vec<_> = [1, 2, 3, 4].iter().map(|&t| rec(t, 0.5 * (t * t) as f64 + 2.0)).collect();
        let fit = fit_trend(&rs, SweepVar::Terms).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12 && (fit.intercept - 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit_trend(&rs[..1], SweepVar::Terms).is_none());
    }

    #[test]
    fn fit_uses_point_medians() {
        let rs = vec![rec(1, 1.0), rec(1, 100.0), rec(1, 1.0), rec(2, 4.0), rec(3, 9.0)];
        let fit = fit_trend(&rs, SweepVar::Terms).unwrap();
        assert_eq!(fit.points, 3);
        assert!((fit.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_shape_and_stability() {
        let sweep = Sweep {
            algo: Algo::MpolySi,
            ring: RingSpec::IntegersModQ(101),
            var: SweepVar::Terms,
            values: vec![2, 4],
            nvars: 2,
            degree_bound: 64,
            term_bound: 0,
            reps: 2,
            seed: 5,
        };
        let strip = |rs: Vec<BenchRecord>| {
            rs.into_iter().map(|r| BenchRecord { wall_time: 0.0, ..r }).collect::<Vec<_>>()
        };
        let a = strip(run_sweep(&sweep).unwrap());
        assert_eq!(a.len(), 4);
        assert_eq!(a, strip(run_sweep(&sweep).unwrap()));
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("algo,n,D,T,wall_time,probes,max_probe_degree,ring_ops"));
        assert_eq!(lines.count(), 4);
    }
}
