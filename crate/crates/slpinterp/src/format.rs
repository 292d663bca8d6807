//! Text formats.
//!
//! Circuits, one instruction per line with 1-based registers:
//!
//! ```text
//! slp n=2
//! in 1        # r1 = x1
//! in 2        # r2 = x2
//! mul 1 2     # r3 = x1*x2, the output
//! ```
//!
//! Polynomials, one term per line in canonical order:
//!
//! ```text
//! poly n=2
//! 2 0 0
//! 3 2 3
//! ```

use std::fmt::Write as _;

use num_bigint::BigInt;
use slpinterp_core::{Error as CoreError, Instr, Ring, SlpProgram, SparsePoly};

/// Syntax or validation error, with the 1-based line it was found on
/// (0 when it concerns the whole input).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

/// Non-empty lines with comments stripped, paired with their line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_header(line: &str, keyword: &str) -> Option<Result<usize, String>> {
    let rest = line.strip_prefix(keyword)?.trim_start();
    let value = match rest.strip_prefix("n=") {
        Some(v) => v.trim(),
        None => return Some(Err(format!("expected `{keyword} n=<n>`"))),
    };
    Some(value.parse::<usize>().map_err(|_| format!("bad variable count `{value}`")))
}

fn parse_index(tok: Option<&str>, what: &str, line: usize) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(err(line, format!("bad {what} `{tok}`: expected a positive integer"))),
    }
}

/// Parses a circuit. The variable count comes from the `slp n=<n>` header or
/// from `nvars`; if both are present they must agree.
pub fn parse_slp(text: &str, nvars: Option<usize>) -> Result<SlpProgram, ParseError> {
    let mut lines = content_lines(text).peekable();
    let mut n = nvars;
    if let Some(&(no, first)) = lines.peek() {
        if let Some(header) = parse_header(first, "slp") {
            let h = header.map_err(|m| err(no, m))?;
            if let Some(given) = nvars {
                if given != h {
                    return Err(err(no, format!("header declares {h} variables but {given} were requested")));
                }
            }
            n = Some(h);
            lines.next();
        }
    }
    let n = n.ok_or_else(|| err(0, "variable count unknown: add an `slp n=<n>` header or pass it explicitly"))?;
    if n == 0 {
        return Err(err(0, "a program needs at least one variable"));
    }

    let mut instrs = Vec::new();
    for (no, line) in lines {
        let reg = instrs.len() + 1;
        let mut toks = line.split_whitespace();
        let op = toks.next().expect("line is non-empty");
        let instr = match op {
            "in" => {
                let i = parse_index(toks.next(), "input index", no)?;
                if i > n {
                    return Err(err(no, format!("input x{i} out of range 1..={n}")));
                }
                Instr::Input(i - 1)
            }
            "const" => {
                let tok = toks.next().ok_or_else(|| err(no, "missing constant"))?;
                let c = tok
                    .parse::<BigInt>()
                    .map_err(|_| err(no, format!("bad integer literal `{tok}`")))?;
                Instr::Const(c)
            }
            "add" | "sub" | "mul" => {
                let a = parse_index(toks.next(), "register", no)?;
                let b = parse_index(toks.next(), "register", no)?;
                for r in [a, b] {
                    if r >= reg {
                        return Err(err(no, format!("register {r} is not defined before instruction {reg}")));
                    }
                }
                match op {
                    "add" => Instr::Add(a - 1, b - 1),
                    "sub" => Instr::Sub(a - 1, b - 1),
                    _ => Instr::Mul(a - 1, b - 1),
                }
            }
            other => return Err(err(no, format!("unknown instruction `{other}`"))),
        };
        if let Some(extra) = toks.next() {
            return Err(err(no, format!("unexpected `{extra}`")));
        }
        instrs.push(instr);
    }
    if instrs.is_empty() {
        return Err(err(0, "empty program"));
    }
    SlpProgram::new(n, instrs).map_err(|e| err(0, e.to_string()))
}

pub fn write_slp(prog: &SlpProgram) -> String {
    let mut out = format!("slp n={}\n", prog.nvars());
    for instr in prog.instrs() {
        let _ = match instr {
            Instr::Input(i) => writeln!(out, "in {}", i + 1),
            Instr::Const(c) => writeln!(out, "const {c}"),
            Instr::Add(a, b) => writeln!(out, "add {} {}", a + 1, b + 1),
            Instr::Sub(a, b) => writeln!(out, "sub {} {}", a + 1, b + 1),
            Instr::Mul(a, b) => writeln!(out, "mul {} {}", a + 1, b + 1),
        };
    }
    out
}

/// Parses a polynomial; coefficients are mapped into `ring`, so the result
/// is canonical even if the file is not.
pub fn parse_poly<R: Ring>(ring: &R, text: &str) -> Result<SparsePoly<R::Elem>, ParseError> {
    let mut lines = content_lines(text);
    let (no, first) = lines.next().ok_or_else(|| err(0, "missing `poly n=<n>` header"))?;
    let n = parse_header(first, "poly")
        .ok_or_else(|| err(no, "missing `poly n=<n>` header"))?
        .map_err(|m| err(no, m))?;
    let mut terms = Vec::new();
    for (no, line) in lines {
        let mut toks = line.split_whitespace();
        let tok = toks.next().expect("line is non-empty");
        let c = tok
            .parse::<BigInt>()
            .map_err(|_| err(no, format!("bad coefficient `{tok}`")))?;
        let exps = toks
            .map(|t| t.parse::<u64>().map_err(|_| err(no, format!("bad exponent `{t}`"))))
            .collect::<Result<Vec<u64>, _>>()?;
        if exps.len() != n {
            return Err(err(no, format!("expected {n} exponents, found {}", exps.len())));
        }
        terms.push((ring.from_int(&c), exps));
    }
    SparsePoly::from_terms(ring, n, terms).map_err(|e: CoreError| err(0, e.to_string()))
}

pub fn write_poly<R: Ring>(ring: &R, f: &SparsePoly<R::Elem>) -> String {
    let mut out = format!("poly n={}\n", f.nvars());
    for (c, e) in f.terms() {
        let _ = write!(out, "{}", ring.to_int(c));
        for x in e {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use slpinterp_core::{oracle, Integers, ZMod};

    #[test]
    fn slp_examples() {
        let z = Integers;
        let p = parse_slp("in 1\nin 2\nmul 1 2\n", Some(2)).unwrap();
        assert_eq!(p.instrs(), &[Instr::Input(0), Instr::Input(1), Instr::Mul(0, 1)]);
        let p = parse_slp("slp n=1\nin 1\nconst 3\nadd 1 2", None).unwrap();
        let f = oracle::dense_expand(&z, &p).unwrap();
        assert_eq!(write_poly(&z, &f), "poly n=1\n3 0\n1 1\n");
    }

    #[test]
    fn slp_errors_carry_line_numbers() {
        let e = parse_slp("mul 1 2", Some(2)).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("not defined"));
        let e = parse_slp("slp n=2\n# comment\nin 1\nin 3\n", None).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("out of range"));
        assert_eq!(parse_slp("in 1\nfoo 1 1", Some(1)).unwrap_err().line, 2);
        assert_eq!(parse_slp("const 1.5", Some(1)).unwrap_err().line, 1);
        assert_eq!(parse_slp("in 1 2", Some(1)).unwrap_err().line, 1);
        assert_eq!(parse_slp("in 1", None).unwrap_err().line, 0);
        assert_eq!(parse_slp("slp n=2\nin 1", Some(3)).unwrap_err().line, 1);
        assert_eq!(parse_slp("# nothing\n", Some(1)).unwrap_err().line, 0);
        assert!(parse_slp("add 0 1", Some(1)).is_err());
    }

    #[test]
    fn slp_round_trip() {
        let text = "slp n=3\nin 1\nin 3\nconst -7\nmul 1 2\nsub 4 3\nadd 5 5\n";
        assert_eq!(write_slp(&parse_slp(text, None).unwrap()), text);
    }

    #[test]
    fn poly_parsing_canonicalises() {
        let q = ZMod::new(5).unwrap();
        let f = parse_poly(&q, "poly n=2\n3 2 3\n-2 0 0\n# trailing\n4 2 3\n").unwrap();
        assert_eq!(write_poly(&q, &f), "poly n=2\n3 0 0\n2 2 3\n");
        assert_eq!(write_poly(&q, &parse_poly(&q, "poly n=3\n5 1 1 1\n").unwrap()), "poly n=3\n");
        assert_eq!(parse_poly(&q, "poly n=2\n1 2\n").unwrap_err().line, 2);
        assert_eq!(parse_poly(&q, "1 2\n").unwrap_err().line, 1);
        assert_eq!(parse_poly(&q, "poly n=1\nx 2\n").unwrap_err().line, 2);
    }
}
