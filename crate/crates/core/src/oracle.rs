//! Brute-force references for testing. Nothing here shares determinant or
//! path-walking code with the modules it checks.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forward::BoundaryPair;
use crate::network::Network;
use crate::numerics::DenseMatrix;
use crate::paths::PathSystem;

pub const MAX_PERM_DIM: usize = 8;
pub const MAX_EXHAUSTIVE_VERTICES: usize = 14;
pub const MAX_EXHAUSTIVE_EDGES: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
    #[error("no valid network after {0} draws")]
    Exhausted(usize),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

/// Leibniz expansion over all `n!` permutations in lexicographic order.
pub fn perm_det(m: &DenseMatrix) -> Result<f64, OracleError> {
    if !m.is_square() || m.rows() > MAX_PERM_DIM {
        return Err(OracleError::TooLarge(format!(
            "{}x{} (square, at most {MAX_PERM_DIM})",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    loop {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| perm[i] > perm[j])
            .count();
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * (0..n).map(|i| m[(i, perm[i])]).product::<f64>();
        if !next_permutation(&mut perm) {
            return Ok(total);
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every disjoint path system for `pair`, found by scanning subsets of the
/// edges among `P∖Q`, `Q∖P` and `I ∪ (P∩Q)` and keeping those that form
/// the right family of paths. Output is sorted.
pub fn exhaustive_path_systems(
    net: &Network,
    pair: &BoundaryPair,
) -> Result<Vec<PathSystem>, OracleError> {
    if net.n_vertices() > MAX_EXHAUSTIVE_VERTICES {
        return Err(OracleError::TooLarge(format!("{} vertices", net.n_vertices())));
    }
    let n = net.n_vertices();
    #[derive(Clone, Copy, PartialEq)]
    enum Role {
        Outside,
        Source,
        Sink,
        Inner,
    }
    let mut role = vec![Role::Outside; n + 1];
    let sources: Vec<usize> = pair.p().iter().copied().filter(|v| !pair.q().contains(v)).collect();
    for &v in &sources {
        role[v] = Role::Source;
    }
    for &v in pair.q() {
        role[v] = if pair.p().contains(&v) { Role::Inner } else { Role::Sink };
    }
    for v in net.n_boundary() + 1..=n {
        role[v] = Role::Inner;
    }
    let candidates: Vec<(usize, usize)> = net
        .edges()
        .iter()
        .map(|e| (e.u, e.v))
        .filter(|&(u, v)| role[u] != Role::Outside && role[v] != Role::Outside)
        .collect();
    if candidates.len() > MAX_EXHAUSTIVE_EDGES {
        return Err(OracleError::TooLarge(format!("{} candidate edges", candidates.len())));
    }
    let cap = |v: usize| match role[v] {
        Role::Source | Role::Sink => 1,
        Role::Inner => 2,
        Role::Outside => 0,
    };

    let mut found = Vec::new();
    let mut chosen = Vec::new();
    let mut degree = vec![0usize; n + 1];

    // Include/exclude each candidate; only degree caps prune the scan.
    fn scan(
        k: usize,
        candidates: &[(usize, usize)],
        cap: &dyn Fn(usize) -> usize,
        degree: &mut Vec<usize>,
        chosen: &mut Vec<(usize, usize)>,
        check: &mut dyn FnMut(&[(usize, usize)], &[usize]),
    ) {
        if k == candidates.len() {
            check(chosen, degree);
            return;
        }
        scan(k + 1, candidates, cap, degree, chosen, check);
        let (u, v) = candidates[k];
        if degree[u] < cap(u) && degree[v] < cap(v) {
            degree[u] += 1;
            degree[v] += 1;
            chosen.push((u, v));
            scan(k + 1, candidates, cap, degree, chosen, check);
            chosen.pop();
            degree[u] -= 1;
            degree[v] -= 1;
        }
    }

    let mut check = |edges: &[(usize, usize)], degree: &[usize]| {
        let terminals_ok = (1..=n).all(|v| match role[v] {
            Role::Source | Role::Sink => degree[v] == 1,
            _ => true,
        });
        if !terminals_ok {
            return;
        }
        let mut paths = Vec::new();
        let mut walked = 0;
        for &s in &sources {
            let mut path = vec![s];
            let mut prev = 0;
            let mut cur = s;
            loop {
                let next = edges.iter().find_map(|&(a, b)| {
                    if a == cur && b != prev {
                        Some(b)
                    } else if b == cur && a != prev {
                        Some(a)
                    } else {
                        None
                    }
                });
                let Some(next) = next else { break };
                walked += 1;
                path.push(next);
                prev = cur;
                cur = next;
                if role[cur] != Role::Inner {
                    break;
                }
            }
            if role[cur] != Role::Sink {
                return;
            }
            paths.push(path);
        }
        // Any edge not on a source path belongs to a stray path or cycle.
        if walked == edges.len() {
            found.push(PathSystem::new(net, pair, paths));
        }
    };

    scan(0, &candidates, &cap, &mut degree, &mut chosen, &mut check);
    found.sort();
    Ok(found)
}

/// Parameters for seeded random networks.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomNetSpec {
    pub boundary: RangeInclusive<usize>,
    pub interior: RangeInclusive<usize>,
    pub edge_probability: f64,
    /// Conductivities are drawn log-uniformly on `[lo, hi]`.
    pub gamma_range: (f64, f64),
    pub seed: u64,
}

impl Default for RandomNetSpec {
    fn default() -> Self {
        Self {
            boundary: 3..=6,
            interior: 1..=4,
            edge_probability: 0.5,
            gamma_range: (0.1, 10.0),
            seed: 0,
        }
    }
}

const MAX_DRAWS: usize = 10_000;

/// Deterministic for a given spec; redraws until every interior vertex is
/// connected to the boundary.
pub fn random_network(spec: &RandomNetSpec) -> Result<Network, OracleError> {
    let (lo, hi) = spec.gamma_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(OracleError::InvalidSpec(format!("gamma range [{lo}, {hi}]")));
    }
    if spec.boundary.is_empty() || spec.interior.is_empty() || *spec.boundary.start() == 0 {
        return Err(OracleError::InvalidSpec("empty vertex ranges".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_DRAWS {
        let nb = rng.gen_range(spec.boundary.clone());
        let ni = rng.gen_range(spec.interior.clone());
        let n = nb + ni;
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                if rng.gen_bool(spec.edge_probability) {
                    edges.push((u, v, log_uniform(&mut rng, lo, hi)));
                }
            }
        }
        if let Ok(net) = Network::new(nb, ni, edges) {
            return Ok(net);
        }
    }
    Err(OracleError::Exhausted(MAX_DRAWS))
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Random pair with `1 ≤ |P| ≤ n_boundary`.
pub fn random_pair<R: Rng>(rng: &mut R, n_boundary: usize) -> BoundaryPair {
    use rand::seq::SliceRandom;
    let k = rng.gen_range(1..=n_boundary);
    let all: Vec<usize> = (1..=n_boundary).collect();
    let p: Vec<usize> = all.choose_multiple(rng, k).copied().collect();
    let q: Vec<usize> = all.choose_multiple(rng, k).copied().collect();
    BoundaryPair::new(p, q, n_boundary).expect("distinct in-range indices")
}

/// Matrix with entries uniform in `[-1, 1]`.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> DenseMatrix {
    let data = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    DenseMatrix::new(n, n, data).expect("finite entries")
}
