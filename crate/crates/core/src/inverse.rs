//! Recovery of edge conductivities from a DtN map.
//!
//! Pairs `(P, Q)` whose minor `det K(P∪I, Q∪I)` is a single monomial give
//! equations that are linear in `log γ` and `log det K(I,I)`:
//!
//! ```text
//! Σ_{e in row} log γ_e − log det K(I,I) = log |det Λ(P,Q)|
//! ```
//!
//! Enough independent equations determine every conductivity. Rank is
//! certified in exact integer arithmetic; the values come from one
//! least-squares solve over all collected rows.

use std::fmt::Write as _;

use thiserror::Error;

use crate::forward::{dtn, dtn_subdet, BoundaryPair, DtNMap, ForwardError};
use crate::network::{Network, NetworkError};
use crate::numerics::{format_number, integer_rank, lstsq, DenseMatrix, NumericsError};
use crate::paths::{is_log_linear_admissible, RowDescription};

/// Relative residual above which the data is flagged as inconsistent.
pub const INCONSISTENCY_TOL: f64 = 1e-6;

/// Round-trip acceptance threshold, relative to `max_abs(Λ)`.
pub const ROUNDTRIP_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InverseError {
    #[error("DtN map is {got}x{got} but the topology has {expected} boundary vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("system has no rows")]
    EmptySystem,
    #[error("every candidate row had a vanishing or sign-inconsistent minor")]
    AllRowsDegenerate,
    #[error("rank {rank} < {unknowns} unknowns; unresolved edges {unresolved_edges:?}")]
    RankDeficient {
        rank: usize,
        unknowns: usize,
        unresolved_edges: Vec<usize>,
    },
    #[error(
        "recovered conductivities reproduce the DtN map only to {}", .report.roundtrip_error
    )]
    RoundTripFailure { report: Box<RecoveryReport> },
    #[error("rows {i} and {j} do not differ by a {{-1,0,1}} vector")]
    NotSparseDifference { i: usize, j: usize },
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Where a system row came from.
#[derive(Debug, Clone, PartialEq)]
pub enum RowOrigin {
    Pair(BoundaryPair),
    Difference(Box<RowOrigin>, Box<RowOrigin>),
}

impl std::fmt::Display for RowOrigin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowOrigin::Pair(p) => write!(f, "{p}"),
            RowOrigin::Difference(a, b) => write!(f, "[{a} - {b}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A row was left out of the system.
    DroppedRow { pair: BoundaryPair, reason: DropReason },
    /// The least-squares residual exceeded `INCONSISTENCY_TOL · ‖rhs‖`.
    InconsistentData { residual_norm: f64, rhs_norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DropReason {
    ZeroDeterminant,
    SignMismatch { predicted: i8, actual: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::DroppedRow { pair, reason } => match reason {
                DropReason::ZeroDeterminant => write!(f, "dropped {pair}: minor is zero"),
                DropReason::SignMismatch { predicted, actual } => write!(
                    f,
                    "dropped {pair}: minor {actual:e} has the wrong sign (predicted {predicted})"
                ),
            },
            Warning::InconsistentData {
                residual_norm,
                rhs_norm,
            } => write!(
                f,
                "inconsistent data: residual {residual_norm:e} against rhs norm {rhs_norm:e}"
            ),
        }
    }
}

/// Integer system over `(log γ_1, …, log γ_m[, log det K(I,I)])`.
///
/// The last column exists only when the network has interior vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearSystem {
    n_edges: usize,
    has_logdet: bool,
    coeffs: Vec<Vec<i64>>,
    rhs: Vec<f64>,
    provenance: Vec<RowOrigin>,
    warnings: Vec<Warning>,
}

/// A row produced by `difference_rows`, ready to be appended.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRow {
    pub coeffs: Vec<i64>,
    pub rhs: f64,
    pub origin: RowOrigin,
}

impl LogLinearSystem {
    pub fn new(n_edges: usize, has_logdet: bool) -> Self {
        Self {
            n_edges,
            has_logdet,
            coeffs: Vec::new(),
            rhs: Vec::new(),
            provenance: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn unknowns(&self) -> usize {
        self.n_edges + usize::from(self.has_logdet)
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn has_logdet(&self) -> bool {
        self.has_logdet
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Vec<i64>] {
        &self.coeffs
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn provenance(&self) -> &[RowOrigin] {
        &self.provenance
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn push(&mut self, row: SystemRow) {
        assert_eq!(row.coeffs.len(), self.unknowns(), "row width must match unknowns");
        self.coeffs.push(row.coeffs);
        self.rhs.push(row.rhs);
        self.provenance.push(row.origin);
    }
}

/// Coefficient row of an admissible pair: 1 on each listed edge, −1 on the
/// log-determinant column when present.
pub fn coefficient_row(row: &RowDescription, n_edges: usize, has_logdet: bool) -> Vec<i64> {
    let mut c = vec![0; n_edges + usize::from(has_logdet)];
    for &e in &row.edges {
        c[e - 1] += 1;
    }
    if has_logdet {
        c[n_edges] = -1;
    }
    c
}

/// Ascending k-subsets of `1..=n` in lexicographic order.
fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = (k <= n).then(|| (1..=k).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut s = current.clone();
        if let Some(i) = (0..k).rev().find(|&i| s[i] < n - k + i + 1) {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            next = Some(s);
        }
        Some(current)
    })
}

/// Admissible rows in order of increasing `|P|`, then `P`, then `Q`
/// lexicographically. `(Q, P)` is skipped when `(P, Q)` was already
/// visited. With `stop_at_full_rank`, stops as soon as the collected rows
/// reach the number of unknowns.
pub fn enumerate_admissible_pairs(
    net: &Network,
    max_pair_size: usize,
    stop_at_full_rank: bool,
) -> Vec<RowDescription> {
    let nb = net.n_boundary();
    let has_logdet = net.n_interior() > 0;
    let unknowns = net.n_edges() + usize::from(has_logdet);
    let mut rows = Vec::new();
    let mut basis: Vec<Vec<i64>> = Vec::new();

    for k in 1..=max_pair_size.min(nb) {
        for p in subsets(nb, k) {
            for q in subsets(nb, k) {
                if q < p {
                    continue;
                }
                let pair = BoundaryPair::new(p.clone(), q, nb).expect("subsets are valid pairs");
                let Some(row) = is_log_linear_admissible(net, &pair) else {
                    continue;
                };
                if stop_at_full_rank {
                    let c = coefficient_row(&row, net.n_edges(), has_logdet);
                    basis.push(c);
                    if integer_rank(&basis) < basis.len() {
                        basis.pop();
                    }
                }
                rows.push(row);
                if stop_at_full_rank && basis.len() == unknowns {
                    return rows;
                }
            }
        }
    }
    rows
}

/// Assembles the system for `lam`. Rows whose minor vanishes or whose sign
/// contradicts the predicted sign are dropped and recorded as warnings.
pub fn build_system(
    net: &Network,
    rows: &[RowDescription],
    lam: &DtNMap,
) -> Result<LogLinearSystem, InverseError> {
    if lam.n_boundary() != net.n_boundary() {
        return Err(InverseError::DimensionMismatch {
            expected: net.n_boundary(),
            got: lam.n_boundary(),
        });
    }
    let has_logdet = net.n_interior() > 0;
    let mut sys = LogLinearSystem::new(net.n_edges(), has_logdet);
    for row in rows {
        let det = dtn_subdet(lam, &row.pair);
        let reason = if det == 0.0 || !det.is_finite() {
            Some(DropReason::ZeroDeterminant)
        } else if det.signum() != f64::from(row.sign) {
            // det K(I,I) > 0, so det Λ(P,Q) carries the predicted sign.
            Some(DropReason::SignMismatch {
                predicted: row.sign,
                actual: det,
            })
        } else {
            None
        };
        if let Some(reason) = reason {
            sys.warnings.push(Warning::DroppedRow {
                pair: row.pair.clone(),
                reason,
            });
            continue;
        }
        sys.push(SystemRow {
            coeffs: coefficient_row(row, net.n_edges(), has_logdet),
            rhs: det.abs().ln(),
            origin: RowOrigin::Pair(row.pair.clone()),
        });
    }
    if sys.is_empty() && !rows.is_empty() {
        return Err(InverseError::AllRowsDegenerate);
    }
    Ok(sys)
}

/// Exact rank of the coefficient matrix.
pub fn system_rank(sys: &LogLinearSystem) -> usize {
    integer_rank(&sys.coeffs)
}

/// Edge ids whose unit direction is not in the row space of `coeffs`.
fn unresolved_edges(coeffs: &[Vec<i64>], n_edges: usize, unknowns: usize) -> Vec<usize> {
    let rank = integer_rank(coeffs);
    (1..=n_edges)
        .filter(|&e| {
            let mut m = coeffs.to_vec();
            let mut unit = vec![0; unknowns];
            unit[e - 1] = 1;
            m.push(unit);
            integer_rank(&m) > rank
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub log_gammas: Vec<f64>,
    /// `log det K(I,I)`; 0 without interior vertices.
    pub logdet: f64,
    pub residual_norm: f64,
    pub inconsistent: bool,
}

pub fn solve_system(sys: &LogLinearSystem) -> Result<Solution, InverseError> {
    if sys.is_empty() {
        return Err(InverseError::EmptySystem);
    }
    let unknowns = sys.unknowns();
    let rank = system_rank(sys);
    if rank < unknowns {
        return Err(InverseError::RankDeficient {
            rank,
            unknowns,
            unresolved_edges: unresolved_edges(&sys.coeffs, sys.n_edges, unknowns),
        });
    }
    let data = sys.coeffs.iter().flatten().map(|&c| c as f64).collect();
    let m = DenseMatrix::new(sys.len(), unknowns, data)?;
    let ls = lstsq(&m, &sys.rhs)?;
    let rhs_norm = sys.rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut log_gammas = ls.x;
    let logdet = if sys.has_logdet {
        log_gammas.pop().expect("log-det column")
    } else {
        0.0
    };
    Ok(Solution {
        log_gammas,
        logdet,
        residual_norm: ls.residual_norm,
        inconsistent: ls.residual_norm > INCONSISTENCY_TOL * rhs_norm,
    })
}

/// Row `i` minus row `j`, refused unless every coefficient stays in {−1, 0, 1}.
pub fn difference_rows(
    sys: &LogLinearSystem,
    i: usize,
    j: usize,
) -> Result<SystemRow, InverseError> {
    for index in [i, j] {
        if index >= sys.len() {
            return Err(InverseError::RowOutOfRange {
                index,
                rows: sys.len(),
            });
        }
    }
    let coeffs: Vec<i64> = sys.coeffs[i]
        .iter()
        .zip(&sys.coeffs[j])
        .map(|(a, b)| a - b)
        .collect();
    if coeffs.iter().any(|c| c.abs() > 1) {
        return Err(InverseError::NotSparseDifference { i, j });
    }
    Ok(SystemRow {
        coeffs,
        rhs: sys.rhs[i] - sys.rhs[j],
        origin: RowOrigin::Difference(
            Box::new(sys.provenance[i].clone()),
            Box::new(sys.provenance[j].clone()),
        ),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub recovered_gammas: Vec<f64>,
    pub logdet_kii: f64,
    pub residual_norm: f64,
    pub rank: usize,
    pub unknowns: usize,
    pub rows: usize,
    pub unresolved_edges: Vec<usize>,
    /// `max_abs(Λ(recovered) − Λ(given))`.
    pub roundtrip_error: f64,
    pub warnings: Vec<Warning>,
}

impl RecoveryReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, g) in self.recovered_gammas.iter().enumerate() {
            let _ = writeln!(out, "gamma {} = {}", k + 1, format_number(*g));
        }
        let _ = writeln!(out, "rank = {}", self.rank);
        let _ = writeln!(out, "residual = {}", format_number(self.residual_norm));
        let _ = writeln!(out, "roundtrip_error = {}", format_number(self.roundtrip_error));
        out
    }
}

/// Full inversion: admissible rows of `topology` (its conductivities are
/// ignored), system from `lam`, solve, and a forward check of the result.
pub fn recover(
    topology: &Network,
    lam: &DtNMap,
    max_pair_size: usize,
    stop_at_full_rank: bool,
) -> Result<RecoveryReport, InverseError> {
    if lam.n_boundary() != topology.n_boundary() {
        return Err(InverseError::DimensionMismatch {
            expected: topology.n_boundary(),
            got: lam.n_boundary(),
        });
    }
    let rows = enumerate_admissible_pairs(topology, max_pair_size, stop_at_full_rank);
    let sys = build_system(topology, &rows, lam)?;
    let solution = solve_system(&sys)?;

    let mut warnings = sys.warnings().to_vec();
    if solution.inconsistent {
        warnings.push(Warning::InconsistentData {
            residual_norm: solution.residual_norm,
            rhs_norm: sys.rhs().iter().map(|x| x * x).sum::<f64>().sqrt(),
        });
    }
    let recovered_gammas: Vec<f64> = solution.log_gammas.iter().map(|x| x.exp()).collect();
    let roundtrip_error = match topology.with_gammas(&recovered_gammas) {
        Ok(net) => dtn(&net)?.matrix().max_abs_diff(lam.matrix()),
        Err(_) => f64::INFINITY,
    };
    let report = RecoveryReport {
        recovered_gammas,
        logdet_kii: solution.logdet,
        residual_norm: solution.residual_norm,
        rank: sys.unknowns(),
        unknowns: sys.unknowns(),
        rows: sys.len(),
        unresolved_edges: Vec::new(),
        roundtrip_error,
        warnings,
    };
    if !(roundtrip_error <= ROUNDTRIP_TOL * lam.matrix().max_abs()) {
        return Err(InverseError::RoundTripFailure {
            report: Box::new(report),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::lattice_fixture;

    fn gammas() -> [f64; 12] {
        std::array::from_fn(|k| (k + 1) as f64)
    }

    fn pair(p: &[usize], q: &[usize]) -> BoundaryPair {
        BoundaryPair::new(p.to_vec(), q.to_vec(), 8).unwrap()
    }

    fn listed_rows(net: &Network) -> Vec<RowDescription> {
        [pair(&[1, 2], &[5, 6]), pair(&[1, 2, 8], &[5, 6, 8])]
            .iter()
            .map(|p| is_log_linear_admissible(net, p).unwrap())
            .collect()
    }

    #[test]
    fn subsets_in_lex_order() {
        let all: Vec<Vec<usize>> = subsets(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert_eq!(subsets(3, 0).count(), 1);
        assert_eq!(subsets(2, 3).count(), 0);
        assert_eq!(subsets(8, 4).count(), 70);
    }

    #[test]
    fn first_system_row_and_rhs() {
        let net = lattice_fixture(&gammas()).unwrap();
        let lam = dtn(&net).unwrap();
        let sys = build_system(&net, &listed_rows(&net), &lam).unwrap();
        assert_eq!(sys.coeffs()[0], vec![1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, -1]);
        assert_eq!(sys.coeffs()[1], vec![1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, -1]);
        let i: Vec<usize> = net.interior().collect();
        let kii = crate::forward::kirchhoff_subdet(&crate::network::kirchhoff(&net), &i, &i);
        assert!((sys.rhs()[0] - (720f64.ln() - kii.ln())).abs() < 1e-12);
        assert_eq!(system_rank(&sys), 2);
    }

    #[test]
    fn listed_rows_alone_are_rank_deficient() {
        let net = lattice_fixture(&gammas()).unwrap();
        let lam = dtn(&net).unwrap();
        let sys = build_system(&net, &listed_rows(&net), &lam).unwrap();
        match solve_system(&sys) {
            Err(InverseError::RankDeficient {
                rank,
                unknowns,
                unresolved_edges,
            }) => {
                assert_eq!((rank, unknowns), (2, 13));
                // γ7 is pinned by the difference of the two rows; nothing else is.
                assert_eq!(unresolved_edges, vec![1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12]);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn single_edge_recovery() {
        let net = Network::new(2, 0, [(1, 2, 5.0)]).unwrap();
        let rows = enumerate_admissible_pairs(&net, 2, false);
        // (1;1), (1;2) and (2;2): diagonal minors are the pendant conductance too.
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].pair, BoundaryPair::new(vec![1], vec![2], 2).unwrap());
        assert!(rows.iter().all(|r| r.edges == vec![1]));

        let lam = dtn(&net).unwrap();
        let sys = build_system(&net, &rows, &lam).unwrap();
        assert_eq!(sys.coeffs(), &[vec![1], vec![1], vec![1]]);
        assert_eq!(system_rank(&sys), 1);
        let sol = solve_system(&sys).unwrap();
        assert!((sol.log_gammas[0] - 5f64.ln()).abs() < 1e-15);

        let topo = net.with_gammas(&[1.0]).unwrap();
        let report = recover(&topo, &lam, 2, true).unwrap();
        assert!((report.recovered_gammas[0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn empty_system_rank() {
        assert_eq!(system_rank(&LogLinearSystem::new(3, true)), 0);
        assert_eq!(
            solve_system(&LogLinearSystem::new(3, true)),
            Err(InverseError::EmptySystem)
        );
    }

    #[test]
    fn duplicate_rows_keep_rank() {
        let net = lattice_fixture(&gammas()).unwrap();
        let lam = dtn(&net).unwrap();
        let mut rows = listed_rows(&net);
        rows.extend(listed_rows(&net));
        let sys = build_system(&net, &rows, &lam).unwrap();
        assert_eq!(sys.len(), 4);
        assert_eq!(system_rank(&sys), 2);
    }

    #[test]
    fn lattice_reaches_full_rank() {
        let net = lattice_fixture(&[1.0; 12]).unwrap();
        let rows = enumerate_admissible_pairs(&net, 8, true);
        let coeffs: Vec<Vec<i64>> = rows.iter().map(|r| coefficient_row(r, 12, true)).collect();
        assert_eq!(integer_rank(&coeffs), 13);
        assert!(rows.iter().any(|r| r.pair == pair(&[1, 2], &[5, 6])));
    }

    #[test]
    fn lattice_round_trips() {
        let net = lattice_fixture(&gammas()).unwrap();
        let lam = dtn(&net).unwrap();
        let topo = lattice_fixture(&[1.0; 12]).unwrap();
        let report = recover(&topo, &lam, 8, true).unwrap();
        for (k, g) in report.recovered_gammas.iter().enumerate() {
            let want = (k + 1) as f64;
            assert!((g - want).abs() <= 1e-8 * want, "gamma {}: {g}", k + 1);
        }
        assert!(report.roundtrip_error <= 1e-8 * lam.matrix().max_abs());
        assert_eq!(report.rank, 13);
        assert!(report.unresolved_edges.is_empty());

        let text = report.to_text();
        assert!(text.starts_with("gamma 1 = "));
        assert!(text.contains("rank = 13\n"));
    }

    #[test]
    fn wrong_dimension() {
        let topo = lattice_fixture(&[1.0; 12]).unwrap();
        let lam = DtNMap::from_matrix(DenseMatrix::identity(3)).unwrap();
        assert!(matches!(
            recover(&topo, &lam, 8, true),
            Err(InverseError::DimensionMismatch { expected: 8, got: 3 })
        ));
    }

    #[test]
    fn differencing_isolates_gamma7() {
        let net = lattice_fixture(&gammas()).unwrap();
        let lam = dtn(&net).unwrap();
        let sys = build_system(&net, &listed_rows(&net), &lam).unwrap();
        let d = difference_rows(&sys, 1, 0).unwrap();
        assert_eq!(d.coeffs, vec![0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0]);
        assert!((d.rhs - 7f64.ln()).abs() < 1e-12);
        assert_eq!(d.origin.to_string(), "[(1,2,8;5,6,8) - (1,2;5,6)]");

        let z = difference_rows(&sys, 0, 0).unwrap();
        assert!(z.coeffs.iter().all(|&c| c == 0));
        assert!(matches!(
            difference_rows(&sys, 0, 5),
            Err(InverseError::RowOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn non_sparse_difference_is_refused() {
        let mut sys = LogLinearSystem::new(2, false);
        for (c, origin) in [(vec![1, 0], "a"), (vec![-1, 0], "b")] {
            sys.push(SystemRow {
                coeffs: c,
                rhs: 0.0,
                origin: RowOrigin::Pair(BoundaryPair::new(vec![], vec![], 0).unwrap()),
            });
            let _ = origin;
        }
        assert_eq!(
            difference_rows(&sys, 0, 1),
            Err(InverseError::NotSparseDifference { i: 0, j: 1 })
        );
    }

    #[test]
    fn sign_mismatch_drops_row() {
        let net = lattice_fixture(&gammas()).unwrap();
        let lam = dtn(&net).unwrap().scaled(-1.0);
        // det Λ(1,2;5,6) is 2x2 so negation keeps its sign; det Λ(1,2,8;5,6,8) flips.
        let sys = build_system(&net, &listed_rows(&net), &lam).unwrap();
        assert_eq!(sys.len(), 1);
        assert!(matches!(
            sys.warnings()[0],
            Warning::DroppedRow {
                reason: DropReason::SignMismatch { predicted: -1, .. },
                ..
            }
        ));
    }

    #[test]
    fn zero_minors_are_all_degenerate() {
        let net = lattice_fixture(&gammas()).unwrap();
        let lam = DtNMap::from_matrix(DenseMatrix::zeros(8, 8)).unwrap();
        assert_eq!(
            build_system(&net, &listed_rows(&net), &lam),
            Err(InverseError::AllRowsDegenerate)
        );
    }
}
