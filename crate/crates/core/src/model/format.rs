//! Plain-text system files.
//!
//! ```text
//! [domain]
//! lo = 0
//! hi = 1
//!
//! [edge 0]
//! slope = 1/3
//! intercept = 0
//! prob = piecewise (0,1/9,1,1,0);(1/9,1,0,1,1/2)
//!
//! [edge 1]
//! slope = 1/2
//! intercept = 1/2
//! prob = rationality
//! q_value = 1/4
//! irr_value = 1/3
//! ```
//!
//! A piece is `(lo,hi,own_lo,own_hi,value)`; the ownership flags say whether the
//! piece contains its endpoints (`1`/`0` or `true`/`false`). `#` starts a comment.
//! Unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{AffineMap, Edge, EdgeId, Interval, Piece, ProbabilityFunction, SystemSpec};
use crate::error::{Error, ParseError, Result};
use crate::scalar::{fmt_exact, parse_rational, Rational};

#[derive(Default)]
struct Section {
    header_line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str, what: &str) -> std::result::Result<(usize, String), ParseError> {
        self.take(key)
            .ok_or_else(|| ParseError::new(self.header_line, format!("{what} is missing key `{key}`")))
    }

    fn reject_leftovers(&self, what: &str) -> std::result::Result<(), ParseError> {
        match self.entries.iter().next() {
            Some((k, (line, _))) => Err(ParseError::new(*line, format!("unknown key `{k}` in {what}"))),
            None => Ok(()),
        }
    }
}

fn rational_at(line: usize, s: &str) -> std::result::Result<Rational, ParseError> {
    parse_rational(s).ok_or_else(|| ParseError::new(line, format!("`{}` is not a rational number", s.trim())))
}

fn flag_at(line: usize, s: &str) -> std::result::Result<bool, ParseError> {
    match s.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(ParseError::new(line, format!("`{other}` is not an ownership flag (use 1/0)"))),
    }
}

/// Parses a system file into an exact system. Structural errors only; probability
/// sums are left to [`super::validate_system`].
pub fn parse_system(text: &str) -> Result<SystemSpec<Rational>> {
    let mut domain: Option<Section> = None;
    let mut edges: Vec<(EdgeId, Section)> = Vec::new();
    // index into `edges`, or usize::MAX for the domain section
    let mut current: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| ParseError::new(line_no, "unterminated section header"))?
                .trim();
            let section = Section { header_line: line_no, ..Default::default() };
            if header == "domain" {
                if domain.is_some() {
                    return Err(ParseError::new(line_no, "duplicate [domain] section").into());
                }
                domain = Some(section);
                current = Some(usize::MAX);
            } else if let Some(id) = header.strip_prefix("edge") {
                let id: u32 = id
                    .trim()
                    .parse()
                    .map_err(|_| ParseError::new(line_no, format!("bad edge id in `[{header}]`")))?;
                if edges.iter().any(|(e, _)| e.0 == id) {
                    return Err(ParseError::new(line_no, format!("duplicate edge id {id}")).into());
                }
                edges.push((EdgeId(id), section));
                current = Some(edges.len() - 1);
            } else {
                return Err(ParseError::new(line_no, format!("unknown section `[{header}]`")).into());
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ParseError::new(line_no, "expected `key = value`"))?;
        let section = match current {
            Some(usize::MAX) => domain.as_mut(),
            Some(i) => edges.get_mut(i).map(|(_, s)| s),
            None => None,
        }
        .ok_or_else(|| ParseError::new(line_no, "key outside of any section"))?;
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(ParseError::new(line_no, format!("duplicate key `{key}`")).into());
        }
        section.entries.insert(key, (line_no, value.trim().to_string()));
    }

    let mut domain = domain.ok_or_else(|| ParseError::new(1, "missing [domain] section"))?;
    let (l, lo) = domain.require("lo", "[domain]")?;
    let lo = rational_at(l, &lo)?;
    let (l, hi) = domain.require("hi", "[domain]")?;
    let hi = rational_at(l, &hi)?;
    domain.reject_leftovers("[domain]")?;

    let mut parsed = Vec::with_capacity(edges.len());
    for (id, mut sec) in edges {
        let what = format!("[edge {id}]");
        let (l, slope) = sec.require("slope", &what)?;
        let slope = rational_at(l, &slope)?;
        let (l, intercept) = sec.require("intercept", &what)?;
        let intercept = rational_at(l, &intercept)?;
        let (l, prob) = sec.require("prob", &what)?;
        let prob = if let Some(rest) = prob.strip_prefix("piecewise") {
            ProbabilityFunction::Piecewise(parse_pieces(l, rest)?)
        } else if prob.trim() == "rationality" {
            let (l, q) = sec.require("q_value", &what)?;
            let on_rationals = rational_at(l, &q)?;
            let (l, irr) = sec.require("irr_value", &what)?;
            let on_irrationals = rational_at(l, &irr)?;
            ProbabilityFunction::Rationality { on_rationals, on_irrationals }
        } else {
            return Err(ParseError::new(l, format!("unknown probability kind `{prob}`")).into());
        };
        sec.reject_leftovers(&what)?;
        parsed.push(Edge { id, map: AffineMap::new(slope, intercept), prob });
    }

    SystemSpec::new(lo, hi, parsed).map_err(|e| match e {
        Error::InvalidSystem(msg) => ParseError::new(1, msg).into(),
        other => other,
    })
}

fn parse_pieces(line: usize, text: &str) -> std::result::Result<Vec<Piece<Rational>>, ParseError> {
    let mut pieces = Vec::new();
    for chunk in text.split(';') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let inner = chunk
            .strip_prefix('(')
            .and_then(|c| c.strip_suffix(')'))
            .ok_or_else(|| ParseError::new(line, format!("piece `{chunk}` is not parenthesised")))?;
        let fields: Vec<&str> = inner.split(',').collect();
        if fields.len() != 5 {
            return Err(ParseError::new(line, format!("piece `{chunk}` needs 5 fields (lo,hi,own_lo,own_hi,value)")));
        }
        pieces.push(Piece {
            interval: Interval::new(
                rational_at(line, fields[0])?,
                rational_at(line, fields[1])?,
                flag_at(line, fields[2])?,
                flag_at(line, fields[3])?,
            ),
            value: rational_at(line, fields[4])?,
        });
    }
    if pieces.is_empty() {
        return Err(ParseError::new(line, "piecewise probability without pieces"));
    }
    Ok(pieces)
}

/// Renders a system in the file format; `parse_system` reads it back unchanged.
pub fn write_system(spec: &SystemSpec<Rational>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[domain]\nlo = {}\nhi = {}", fmt_exact(&spec.domain.lo), fmt_exact(&spec.domain.hi));
    for e in &spec.edges {
        let _ = writeln!(
            out,
            "\n[edge {}]\nslope = {}\nintercept = {}",
            e.id,
            fmt_exact(&e.map.slope),
            fmt_exact(&e.map.intercept)
        );
        match &e.prob {
            ProbabilityFunction::Piecewise(pieces) => {
                let body: Vec<String> = pieces
                    .iter()
                    .map(|p| {
                        format!(
                            "({},{},{},{},{})",
                            fmt_exact(&p.interval.lo),
                            fmt_exact(&p.interval.hi),
                            u8::from(p.interval.lo_closed),
                            u8::from(p.interval.hi_closed),
                            fmt_exact(&p.value)
                        )
                    })
                    .collect();
                let _ = writeln!(out, "prob = piecewise {}", body.join(";"));
            }
            ProbabilityFunction::Rationality { on_rationals, on_irrationals } => {
                let _ = writeln!(
                    out,
                    "prob = rationality\nq_value = {}\nirr_value = {}",
                    fmt_exact(on_rationals),
                    fmt_exact(on_irrationals)
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    const EX2: &str = "\
# w0 = x/3, w1 = x/3 + 1/3
[domain]
lo = 0
hi = 1

[edge 0]
slope = 1/3
intercept = 0
prob = piecewise (0,1/9,1,1,0);(1/9,1,0,1,1/2)

[edge 1]
slope = 1/3
intercept = 1/3
prob = piecewise (0,1/9,1,1,1);(1/9,1,0,1,1/2)
";

    #[test]
    fn parses_piecewise_file() {
        let spec = parse_system(EX2).unwrap();
        assert_eq!(spec.edges.len(), 2);
        assert_eq!(spec.edges[1].map, AffineMap::new(rat(1, 3), rat(1, 3)));
        match &spec.edges[0].prob {
            ProbabilityFunction::Piecewise(p) => {
                assert_eq!(p[0].interval, Interval::closed(int(0), rat(1, 9)));
                assert_eq!(p[1].value, rat(1, 2));
            }
            _ => panic!("expected pieces"),
        }
        assert_eq!(parse_system(&write_system(&spec)).unwrap(), spec);
    }

    #[test]
    fn parses_rationality_edge() {
        let text = "[domain]\nlo=0\nhi=1\n[edge 0]\nslope=1/2\nintercept=0\nprob=rationality\nq_value=1/4\nirr_value=1/3\n";
        let spec = parse_system(text).unwrap();
        assert_eq!(
            spec.edges[0].prob,
            ProbabilityFunction::Rationality { on_rationals: rat(1, 4), on_irrationals: rat(1, 3) }
        );
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        let bad_key = EX2.replace("intercept = 0\n", "intercept = 0\ncolour = red\n");
        let err = parse_system(&bad_key).unwrap_err();
        assert!(err.to_string().contains("unknown key `colour`"), "{err}");
        let bad_section = format!("{EX2}\n[vertex 3]\n");
        assert!(parse_system(&bad_section).unwrap_err().to_string().contains("unknown section"));
        let dup = EX2.replace("[edge 1]", "[edge 0]");
        assert!(parse_system(&dup).unwrap_err().to_string().contains("duplicate edge id"));
    }

    #[test]
    fn reports_line_numbers() {
        let text = "[domain]\nlo = 0\nhi = one\n";
        match parse_system(text) {
            Err(Error::Parse(e)) => assert_eq!(e.line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
