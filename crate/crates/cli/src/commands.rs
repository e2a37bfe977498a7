use std::fs;
use std::io::{self, Read};
use std::path::Path;

use dtnmap::inverse::{coefficient_row, InverseError};
use dtnmap::network::{NetworkError, ParseErrorKind};
use dtnmap::numerics::format_number;
use dtnmap::paths::{expansion_terms, EXPANSION_TOL};
use dtnmap::{
    dtn, enumerate_admissible_pairs, integer_rank, parse_network, recover, BoundaryPair,
    DenseMatrix, DtNMap, ForwardError, Network,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_MODEL: u8 = 3;
pub const EXIT_MISMATCH: u8 = 4;
pub const EXIT_RANK: u8 = 5;
pub const EXIT_ROUNDTRIP: u8 = 6;

/// Relative γ error a round-trip trial must stay within.
const TRIAL_TOL: f64 = 1e-8;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn fail(code: u8, message: impl Into<String>) -> CliError {
    CliError {
        code,
        message: message.into(),
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| fail(EXIT_INPUT, format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Network> {
    parse_network(&read_input(path)?).map_err(|e| {
        let code = match e.kind {
            ParseErrorKind::Invalid(NetworkError::UngroundedInterior { .. }) => EXIT_MODEL,
            _ => EXIT_INPUT,
        };
        fail(code, format!("{}: {e}", path.display()))
    })
}

fn load_dtn(path: &Path) -> Result<DtNMap> {
    let m = DenseMatrix::parse_text(&read_input(path)?)
        .map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    DtNMap::from_matrix(m).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn forward_error(e: ForwardError) -> CliError {
    match e {
        ForwardError::InteriorNotGrounded => fail(EXIT_MODEL, e.to_string()),
        other => fail(EXIT_INPUT, other.to_string()),
    }
}

pub fn forward(path: &Path) -> Result<()> {
    let net = load_network(path)?;
    let lam = dtn(&net).map_err(forward_error)?;
    print!("{}", lam.matrix().to_text());
    Ok(())
}

pub fn paths(path: &Path, from: Vec<usize>, to: Vec<usize>) -> Result<()> {
    let net = load_network(path)?;
    let pair = BoundaryPair::new(from, to, net.n_boundary())
        .map_err(|e| fail(EXIT_INPUT, e.to_string()))?;
    let expansion = expansion_terms(&net, &pair).map_err(|e| fail(EXIT_MODEL, e.to_string()))?;
    for term in &expansion.terms {
        let monomial = if term.edges.is_empty() {
            "1".to_string()
        } else {
            term.edges
                .iter()
                .map(|e| format!("g{e}"))
                .collect::<Vec<_>>()
                .join("*")
        };
        println!(
            "{}  sign: {}  monomial: {} = {}  residual_det: {}",
            term.system.render(),
            term.sign,
            monomial,
            format_number(term.monomial),
            format_number(term.residual_det)
        );
    }
    let discrepancy = expansion.discrepancy();
    println!("systems = {}", expansion.terms.len());
    println!("total = {}", format_number(expansion.total));
    println!("reference = {}", format_number(expansion.reference));
    println!("discrepancy = {}", format_number(discrepancy));
    if discrepancy > EXPANSION_TOL {
        return Err(fail(
            EXIT_MISMATCH,
            format!("path expansion disagrees with the LU minor (relative {discrepancy:e})"),
        ));
    }
    Ok(())
}

pub fn rank(path: &Path, max_pair_size: Option<usize>, stop_at_full_rank: bool) -> Result<()> {
    let net = load_network(path)?;
    let max = max_pair_size.unwrap_or(net.n_boundary());
    let has_logdet = net.n_interior() > 0;
    let rows = enumerate_admissible_pairs(&net, max, stop_at_full_rank);
    let coeffs: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| coefficient_row(r, net.n_edges(), has_logdet))
        .collect();
    let rank = integer_rank(&coeffs);
    let unknowns = net.n_edges() + usize::from(has_logdet);
    let full = rank == unknowns;
    println!(
        "rows={} rank={rank} unknowns={unknowns} verdict={}",
        rows.len(),
        if full { "full" } else { "deficient" }
    );
    if full {
        Ok(())
    } else {
        Err(fail(EXIT_RANK, format!("rank {rank} below {unknowns} unknowns")))
    }
}

fn inverse_error(e: InverseError) -> CliError {
    match e {
        InverseError::DimensionMismatch { .. } => fail(EXIT_INPUT, e.to_string()),
        InverseError::RankDeficient { .. } | InverseError::EmptySystem => {
            fail(EXIT_RANK, e.to_string())
        }
        InverseError::RoundTripFailure { ref report } => {
            print!("{}", report.to_text());
            fail(EXIT_ROUNDTRIP, e.to_string())
        }
        InverseError::AllRowsDegenerate => fail(EXIT_ROUNDTRIP, e.to_string()),
        other => fail(EXIT_MODEL, other.to_string()),
    }
}

pub fn invert(
    topology: &Path,
    dtn_path: &Path,
    max_pair_size: Option<usize>,
    stop_at_full_rank: bool,
) -> Result<()> {
    let net = load_network(topology)?;
    let lam = load_dtn(dtn_path)?;
    let max = max_pair_size.unwrap_or(net.n_boundary());
    let report = recover(&net, &lam, max, stop_at_full_rank).map_err(inverse_error)?;
    for w in &report.warnings {
        eprintln!("dtnmap: warning: {w}");
    }
    print!("{}", report.to_text());
    Ok(())
}

pub fn roundtrip(path: &Path, seed: u64, trials: usize) -> Result<()> {
    let topology = load_network(path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (0.1_f64.ln(), 10.0_f64.ln());
    let mut worst: f64 = 0.0;
    for trial in 1..=trials {
        let gammas: Vec<f64> = (0..topology.n_edges())
            .map(|_| rng.gen_range(lo..hi).exp())
            .collect();
        let net = topology
            .with_gammas(&gammas)
            .map_err(|e| fail(EXIT_MODEL, e.to_string()))?;
        let lam = dtn(&net).map_err(forward_error)?;
        let error = match recover(&topology, &lam, topology.n_boundary(), true) {
            Ok(report) => report
                .recovered_gammas
                .iter()
                .zip(&gammas)
                .map(|(r, g)| (r - g).abs() / g)
                .fold(0.0, f64::max),
            Err(InverseError::RoundTripFailure { .. }) => f64::INFINITY,
            Err(e) => return Err(inverse_error(e)),
        };
        worst = worst.max(error);
        println!("trial {trial} max_rel_error {}", format_number(error));
    }
    if worst <= TRIAL_TOL {
        Ok(())
    } else {
        Err(fail(
            EXIT_ROUNDTRIP,
            format!("worst relative error {worst:e} exceeds {TRIAL_TOL:e}"),
        ))
    }
}
