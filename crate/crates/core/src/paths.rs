//! Vertex-disjoint path systems between boundary subsets and the expansion
//! of bordered Kirchhoff minors over them.
//!
//! For a pair `(P, Q)` the minor `det K(P∪I, Q∪I)` splits into one group of
//! permutation terms per family of disjoint paths from `P∖Q` to `Q∖P` that
//! run through `I ∪ (P∩Q)`. Each group contributes
//! `sign · Πγ(path edges) · det K(S, S)` where `S` is the set of admissible
//! vertices no path touches.

use std::collections::HashSet;

use thiserror::Error;

use crate::forward::{bordered_index_sets, kirchhoff_subdet, relative_discrepancy, BoundaryPair};
use crate::network::{kirchhoff, Network};

/// Default cap on the number of systems enumerated for one pair.
pub const DEFAULT_SYSTEM_LIMIT: usize = 1_000_000;

/// Relative tolerance between the path expansion and the LU minor.
pub const EXPANSION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("pair {pair}: more than {limit} disjoint path systems")]
    TooManySystems { pair: BoundaryPair, limit: usize },
    #[error(
        "pair {pair}: path expansion {total:e} disagrees with minor {reference:e} \
         (relative {discrepancy:e})"
    )]
    ExpansionMismatch {
        pair: BoundaryPair,
        total: f64,
        reference: f64,
        discrepancy: f64,
    },
}

/// A family of pairwise vertex-disjoint paths, listed by ascending start
/// vertex, together with the admissible vertices left uncovered.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathSystem {
    paths: Vec<Vec<usize>>,
    residual: Vec<usize>,
}

impl PathSystem {
    /// Builds a system from raw paths, canonicalizing the path order and
    /// deriving the residual from the pair's admissible vertex set.
    pub fn new(net: &Network, pair: &BoundaryPair, mut paths: Vec<Vec<usize>>) -> Self {
        paths.sort_by_key(|p| p.first().copied());
        let residual = intermediate_vertices(net, pair)
            .into_iter()
            .filter(|v| !paths.iter().any(|p| p.contains(v)))
            .collect();
        Self { paths, residual }
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn residual(&self) -> &[usize] {
        &self.residual
    }

    /// `(start, end)` for each path: the bijection `P∖Q → Q∖P`.
    pub fn endpoint_map(&self) -> Vec<(usize, usize)> {
        self.paths
            .iter()
            .map(|p| (p[0], *p.last().expect("non-empty path")))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.paths.iter().map(|p| p.len() - 1).sum()
    }

    /// Ids of the edges traversed, ascending. Panics if a step is not an edge.
    pub fn edge_ids(&self, net: &Network) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .paths
            .iter()
            .flat_map(|p| p.windows(2))
            .map(|w| {
                net.edge_between(w[0], w[1])
                    .unwrap_or_else(|| panic!("{}-{} is not an edge", w[0], w[1]))
            })
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Checks every structural invariant against `net` and `pair`.
    pub fn validate(&self, net: &Network, pair: &BoundaryPair) -> Result<(), String> {
        let sources = pair.sources();
        let sinks = pair.sinks();
        let inner = intermediate_vertices(net, pair);
        if self.paths.len() != sources.len() {
            return Err(format!("{} paths for {} sources", self.paths.len(), sources.len()));
        }
        let mut seen = HashSet::new();
        let mut ends = Vec::new();
        for (path, &start) in self.paths.iter().zip(&sources) {
            if path.first() != Some(&start) {
                return Err(format!("path {path:?} should start at {start}"));
            }
            let end = *path.last().unwrap();
            if path.len() < 2 || !sinks.contains(&end) {
                return Err(format!("path {path:?} does not end in Q∖P"));
            }
            ends.push(end);
            for w in path.windows(2) {
                if net.edge_between(w[0], w[1]).is_none() {
                    return Err(format!("{}-{} is not an edge", w[0], w[1]));
                }
            }
            for &v in &path[1..path.len() - 1] {
                if !inner.contains(&v) {
                    return Err(format!("intermediate vertex {v} outside I ∪ (P∩Q)"));
                }
            }
            for &v in path {
                if !seen.insert(v) {
                    return Err(format!("vertex {v} used twice"));
                }
            }
        }
        ends.sort_unstable();
        if ends != sinks {
            return Err("endpoints are not a bijection onto Q∖P".into());
        }
        let mut cover: Vec<usize> = inner.iter().copied().filter(|v| seen.contains(v)).collect();
        cover.extend(&self.residual);
        cover.sort_unstable();
        if cover != inner || self.residual.iter().any(|v| seen.contains(v)) {
            return Err("residual and path vertices do not partition I ∪ (P∩Q)".into());
        }
        Ok(())
    }

    /// `1-9-12-6 | 2-10-11-5  residual: -`
    pub fn render(&self) -> String {
        let paths = if self.paths.is_empty() {
            "(empty)".to_string()
        } else {
            self.paths
                .iter()
                .map(|p| join(p, "-"))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        let residual = if self.residual.is_empty() {
            "-".to_string()
        } else {
            join(&self.residual, ",")
        };
        format!("{paths}  residual: {residual}")
    }
}

fn join(v: &[usize], sep: &str) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

/// `I ∪ (P∩Q)`, ascending.
pub fn intermediate_vertices(net: &Network, pair: &BoundaryPair) -> Vec<usize> {
    pair.shared().into_iter().chain(net.interior()).collect()
}

/// One term of the expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTerm {
    pub system: PathSystem,
    pub sign: i8,
    /// Edge ids on the paths, ascending.
    pub edges: Vec<usize>,
    /// Product of the path conductivities.
    pub monomial: f64,
    /// `det K(S, S)` over the residual set.
    pub residual_det: f64,
}

impl PathTerm {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.monomial * self.residual_det
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub terms: Vec<PathTerm>,
    /// Sum of all term values.
    pub total: f64,
    /// `det K(P∪I, Q∪I)` by LU.
    pub reference: f64,
}

impl Expansion {
    pub fn discrepancy(&self) -> f64 {
        relative_discrepancy(self.total, self.reference)
    }
}

struct Search<'a> {
    net: &'a Network,
    sources: Vec<usize>,
    is_sink: Vec<bool>,
    allowed: Vec<bool>,
    used: Vec<bool>,
    current: Vec<Vec<usize>>,
    found: Vec<Vec<Vec<usize>>>,
    stop_after: usize,
    dead: HashSet<(usize, Vec<u64>)>,
}

impl<'a> Search<'a> {
    fn new(net: &'a Network, pair: &BoundaryPair, stop_after: usize) -> Self {
        let n = net.n_vertices();
        let mut is_sink = vec![false; n + 1];
        for v in pair.sinks() {
            is_sink[v] = true;
        }
        let mut allowed = vec![false; n + 1];
        for v in intermediate_vertices(net, pair) {
            allowed[v] = true;
        }
        let sources = pair.sources();
        Self {
            net,
            current: vec![Vec::new(); sources.len()],
            sources,
            is_sink,
            allowed,
            used: vec![false; n + 1],
            found: Vec::new(),
            stop_after,
            dead: HashSet::new(),
        }
    }

    fn done(&self) -> bool {
        self.found.len() >= self.stop_after
    }

    fn key(&self, k: usize) -> (usize, Vec<u64>) {
        let mut words = vec![0u64; self.used.len().div_ceil(64)];
        for (v, _) in self.used.iter().enumerate().filter(|(_, &u)| u) {
            words[v / 64] |= 1 << (v % 64);
        }
        (k, words)
    }

    /// Every remaining source can still reach some free sink through free vertices.
    fn reachable(&self, k: usize) -> bool {
        let n = self.used.len();
        self.sources[k..].iter().all(|&s| {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &(w, _) in self.net.neighbors(v) {
                    if seen[w] || self.used[w] {
                        continue;
                    }
                    if self.is_sink[w] {
                        return true;
                    }
                    if self.allowed[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            false
        })
    }

    /// Routes path `k` onward; returns the number of completed systems found.
    fn start_path(&mut self, k: usize) -> usize {
        if k == self.sources.len() {
            self.found.push(self.current.clone());
            return 1;
        }
        let key = self.key(k);
        if self.dead.contains(&key) {
            return 0;
        }
        let count = if self.reachable(k) {
            let s = self.sources[k];
            self.current[k].push(s);
            let c = self.extend(k, s);
            self.current[k].pop();
            c
        } else {
            0
        };
        if count == 0 {
            self.dead.insert(key);
        }
        count
    }

    fn extend(&mut self, k: usize, v: usize) -> usize {
        let mut count = 0;
        for &(w, _) in self.net.neighbors(v) {
            if self.done() {
                break;
            }
            if self.used[w] {
                continue;
            }
            if self.is_sink[w] {
                self.used[w] = true;
                self.current[k].push(w);
                count += self.start_path(k + 1);
                self.current[k].pop();
                self.used[w] = false;
            } else if self.allowed[w] {
                self.used[w] = true;
                self.current[k].push(w);
                count += self.extend(k, w);
                self.current[k].pop();
                self.used[w] = false;
            }
        }
        count
    }
}

/// Depth-first enumeration that stops once `stop_after` systems are found.
fn search(net: &Network, pair: &BoundaryPair, stop_after: usize) -> Vec<PathSystem> {
    let mut s = Search::new(net, pair, stop_after);
    s.start_path(0);
    s.found
        .into_iter()
        .map(|paths| PathSystem::new(net, pair, paths))
        .collect()
}

/// All vertex-disjoint path systems for `pair`, in depth-first order with
/// neighbors visited ascending. `P = Q` yields one empty system.
pub fn enumerate_path_systems(
    net: &Network,
    pair: &BoundaryPair,
) -> Result<Vec<PathSystem>, PathError> {
    enumerate_path_systems_limited(net, pair, DEFAULT_SYSTEM_LIMIT)
}

pub fn enumerate_path_systems_limited(
    net: &Network,
    pair: &BoundaryPair,
    limit: usize,
) -> Result<Vec<PathSystem>, PathError> {
    let systems = search(net, pair, limit.saturating_add(1));
    if systems.len() > limit {
        return Err(PathError::TooManySystems {
            pair: pair.clone(),
            limit,
        });
    }
    Ok(systems)
}

/// Sign of the term a system contributes to `det K(P∪I, Q∪I)`.
///
/// Each path `v0 … vk` maps row `vi` to column `vi+1` and residual vertices
/// map to themselves. The sign of that bijection (rows and columns ascending)
/// times `(-1)^(edges)`, the latter from the `−γ` off-diagonal entries.
pub fn term_sign(net: &Network, system: &PathSystem, pair: &BoundaryPair) -> i8 {
    let (rows, cols) = bordered_index_sets(net, pair);
    let col_pos = |v: usize| cols.binary_search(&v).expect("column in Q ∪ I");
    let mut image = vec![usize::MAX; rows.len()];
    for path in system.paths() {
        for w in path.windows(2) {
            let r = rows.binary_search(&w[0]).expect("row in P ∪ I");
            image[r] = col_pos(w[1]);
        }
    }
    for &v in system.residual() {
        let r = rows.binary_search(&v).expect("residual row");
        image[r] = col_pos(v);
    }
    debug_assert!(image.iter().all(|&c| c != usize::MAX), "bijection incomplete");

    let mut sign = permutation_sign(&image);
    if system.edge_count() % 2 == 1 {
        sign = -sign;
    }
    sign
}

fn permutation_sign(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Expansion terms and their total, without asserting agreement with the minor.
pub fn expansion_terms(net: &Network, pair: &BoundaryPair) -> Result<Expansion, PathError> {
    let k = kirchhoff(net);
    let systems = enumerate_path_systems(net, pair)?;
    let terms: Vec<PathTerm> = systems
        .into_iter()
        .map(|system| {
            let edges = system.edge_ids(net);
            let monomial = edges.iter().map(|&e| net.edge(e).gamma).product();
            let residual_det = kirchhoff_subdet(&k, system.residual(), system.residual());
            PathTerm {
                sign: term_sign(net, &system, pair),
                system,
                edges,
                monomial,
                residual_det,
            }
        })
        .collect();
    let total = terms.iter().map(PathTerm::value).sum();
    let (rows, cols) = bordered_index_sets(net, pair);
    let reference = kirchhoff_subdet(&k, &rows, &cols);
    Ok(Expansion {
        terms,
        total,
        reference,
    })
}

/// Path expansion of `det K(P∪I, Q∪I)`, checked against the LU minor to
/// relative `EXPANSION_TOL`.
pub fn expand_det(net: &Network, pair: &BoundaryPair) -> Result<Expansion, PathError> {
    let expansion = expansion_terms(net, pair)?;
    let discrepancy = expansion.discrepancy();
    if discrepancy > EXPANSION_TOL {
        return Err(PathError::ExpansionMismatch {
            pair: pair.clone(),
            total: expansion.total,
            reference: expansion.reference,
            discrepancy,
        });
    }
    Ok(expansion)
}

/// One log-linear equation: `Σ log γ_e − log det K(I,I) = log|det Λ(P,Q)|`
/// over the listed edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowDescription {
    pub pair: BoundaryPair,
    /// Path edges plus the pendant edges of residual vertices, ascending.
    pub edges: Vec<usize>,
    /// Predicted sign of `det K(P∪I, Q∪I)`, hence of `det Λ(P,Q)`.
    pub sign: i8,
}

/// Describes the equation a pair yields when its minor is a single monomial:
/// exactly one path system, covering every interior vertex, whose residual
/// vertices are pendant and pairwise non-adjacent.
pub fn is_log_linear_admissible(
    net: &Network,
    pair: &BoundaryPair,
) -> Option<RowDescription> {
    let mut systems = search(net, pair, 2);
    if systems.len() != 1 {
        return None;
    }
    let system = systems.pop().unwrap();
    let residual = system.residual();
    if residual.iter().any(|&v| net.is_interior(v) || net.degree(v) != 1) {
        return None;
    }
    // Two pendant residual vertices joined to each other make det K(S,S) vanish.
    if residual
        .iter()
        .any(|&v| residual.contains(&net.neighbors(v)[0].0))
    {
        return None;
    }
    let mut edges = system.edge_ids(net);
    edges.extend(residual.iter().map(|&v| net.neighbors(v)[0].1));
    edges.sort_unstable();
    Some(RowDescription {
        pair: pair.clone(),
        sign: term_sign(net, &system, pair),
        edges,
    })
}
