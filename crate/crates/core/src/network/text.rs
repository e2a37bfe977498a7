use std::fmt::Write as _;

use thiserror::Error;

use super::{Network, NetworkError};
use crate::numerics::format_number;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number of the offending line (0 when the input ended early).
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("expected `{expected}` line")]
    MissingHeader { expected: &'static str },
    #[error("`{0}` declared more than once")]
    DuplicateHeader(&'static str),
    #[error(transparent)]
    Invalid(#[from] NetworkError),
}

/// Parses the line-based network format:
///
/// ```text
/// # comment
/// boundary 2
/// interior 1
/// edge 1 3 1.5
/// edge 3 2 0.5
/// ```
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let mut n_boundary: Option<(usize, usize)> = None;
    let mut n_interior: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut edge_lines = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let err = |kind| ParseError { line, kind };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "boundary" => {
                if n_boundary.is_some() {
                    return Err(err(ParseErrorKind::DuplicateHeader("boundary")));
                }
                n_boundary = Some((parse_count(&tokens, line)?, line));
            }
            "interior" => {
                if n_interior.is_some() {
                    return Err(err(ParseErrorKind::DuplicateHeader("interior")));
                }
                if n_boundary.is_none() {
                    return Err(err(ParseErrorKind::MissingHeader { expected: "boundary" }));
                }
                n_interior = Some((parse_count(&tokens, line)?, line));
            }
            "edge" => {
                if n_boundary.is_none() {
                    return Err(err(ParseErrorKind::MissingHeader { expected: "boundary" }));
                }
                if n_interior.is_none() {
                    return Err(err(ParseErrorKind::MissingHeader { expected: "interior" }));
                }
                if tokens.len() != 4 {
                    return Err(err(ParseErrorKind::Malformed(format!(
                        "`edge <u> <v> <gamma>` expected, got `{content}`"
                    ))));
                }
                let vertex = |t: &str| {
                    t.parse::<usize>().map_err(|_| {
                        err(ParseErrorKind::Malformed(format!("bad vertex index `{t}`")))
                    })
                };
                let u = vertex(tokens[1])?;
                let v = vertex(tokens[2])?;
                let gamma: f64 = tokens[3].parse().map_err(|_| {
                    err(ParseErrorKind::Malformed(format!("bad conductivity `{}`", tokens[3])))
                })?;
                edges.push((u, v, gamma));
                edge_lines.push(line);
            }
            other => {
                return Err(err(ParseErrorKind::Malformed(format!(
                    "unknown keyword `{other}`"
                ))))
            }
        }
    }

    let (nb, _) = n_boundary.ok_or(ParseError {
        line: last_line,
        kind: ParseErrorKind::MissingHeader { expected: "boundary" },
    })?;
    let (ni, interior_line) = n_interior.ok_or(ParseError {
        line: last_line,
        kind: ParseErrorKind::MissingHeader { expected: "interior" },
    })?;

    Network::new(nb, ni, edges).map_err(|e| {
        let line = match &e {
            NetworkError::NonPositiveConductivity { edge, .. }
            | NetworkError::VertexOutOfRange { edge, .. }
            | NetworkError::SelfLoop { edge, .. }
            | NetworkError::ParallelEdge { edge, .. } => edge_lines[edge - 1],
            NetworkError::UngroundedInterior { .. } | NetworkError::WrongEdgeCount { .. } => {
                interior_line
            }
        };
        ParseError {
            line,
            kind: ParseErrorKind::Invalid(e),
        }
    })
}

fn parse_count(tokens: &[&str], line: usize) -> Result<usize, ParseError> {
    match tokens {
        [_, n] => n.parse().map_err(|_| ParseError {
            line,
            kind: ParseErrorKind::Malformed(format!("bad count `{n}`")),
        }),
        _ => Err(ParseError {
            line,
            kind: ParseErrorKind::Malformed(format!("`{} <n>` expected", tokens[0])),
        }),
    }
}

pub fn serialize_network(net: &Network) -> String {
    let mut out = format!("boundary {}\ninterior {}\n", net.n_boundary(), net.n_interior());
    for e in net.edges() {
        let _ = writeln!(out, "edge {} {} {}", e.u, e.v, format_number(e.gamma));
    }
    out
}
