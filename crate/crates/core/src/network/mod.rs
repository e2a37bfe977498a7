//! Resistor networks, their Kirchhoff matrices and the 8+4 lattice fixture.
//!
//! Vertices are 1-based: boundary vertices come first (`1..=n_boundary`),
//! then interior vertices. Edges carry a 1-based id equal to their position
//! in the input, and recovered conductivities are reported in that order.

mod text;

pub use text::{parse_network, serialize_network, ParseError, ParseErrorKind};

use std::collections::HashMap;
use std::ops::Range;

use thiserror::Error;

use crate::numerics::DenseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("edge {edge}: conductivity {gamma} is not positive and finite")]
    NonPositiveConductivity { edge: usize, gamma: f64 },
    #[error("edge {edge}: vertex {vertex} outside 1..={n_vertices}")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("edge {edge}: self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge}: parallel to edge {first} on vertices {{{u}, {v}}}")]
    ParallelEdge {
        edge: usize,
        first: usize,
        u: usize,
        v: usize,
    },
    #[error("interior vertex {vertex} lies in a component with no boundary vertex")]
    UngroundedInterior { vertex: usize },
    #[error("expected {expected} conductivities, got {got}")]
    WrongEdgeCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub gamma: f64,
}

impl Edge {
    /// The endpoint opposite `w`, if `w` is an endpoint.
    pub fn other(&self, w: usize) -> Option<usize> {
        if w == self.u {
            Some(self.v)
        } else if w == self.v {
            Some(self.u)
        } else {
            None
        }
    }
}

/// A validated resistor network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n_boundary: usize,
    n_interior: usize,
    edges: Vec<Edge>,
    /// Sorted neighbor lists with the connecting edge id, indexed by vertex (slot 0 unused).
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    /// Builds a network from `(u, v, gamma)` triples; edge ids follow the input order.
    pub fn new(
        n_boundary: usize,
        n_interior: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, NetworkError> {
        let n = n_boundary + n_interior;
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut list = Vec::new();
        for (k, (u, v, gamma)) in edges.into_iter().enumerate() {
            let id = k + 1;
            check_edge(id, u, v, gamma, n)?;
            let key = (u.min(v), u.max(v));
            if let Some(&first) = seen.get(&key) {
                return Err(NetworkError::ParallelEdge {
                    edge: id,
                    first,
                    u: key.0,
                    v: key.1,
                });
            }
            seen.insert(key, id);
            list.push(Edge { id, u, v, gamma });
        }

        let mut adjacency = vec![Vec::new(); n + 1];
        for e in &list {
            adjacency[e.u].push((e.v, e.id));
            adjacency[e.v].push((e.u, e.id));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let net = Self {
            n_boundary,
            n_interior,
            edges: list,
            adjacency,
        };
        net.check_grounded()?;
        Ok(net)
    }

    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_vertices(&self) -> usize {
        self.n_boundary + self.n_interior
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge by 1-based id.
    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id - 1]
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.gamma).collect()
    }

    pub fn boundary(&self) -> Range<usize> {
        1..self.n_boundary + 1
    }

    /// The interior index set `I`.
    pub fn interior(&self) -> Range<usize> {
        self.n_boundary + 1..self.n_vertices() + 1
    }

    pub fn is_interior(&self, v: usize) -> bool {
        v > self.n_boundary && v <= self.n_vertices()
    }

    /// `(neighbor, edge id)` pairs in ascending neighbor order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Id of the edge joining `u` and `v`, if any.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let nbrs = self.adjacency.get(u)?;
        nbrs.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|k| nbrs[k].1)
    }

    /// Same topology with new conductivities, in edge-id order.
    pub fn with_gammas(&self, gammas: &[f64]) -> Result<Self, NetworkError> {
        if gammas.len() != self.edges.len() {
            return Err(NetworkError::WrongEdgeCount {
                expected: self.edges.len(),
                got: gammas.len(),
            });
        }
        let mut out = self.clone();
        for (e, &g) in out.edges.iter_mut().zip(gammas) {
            if !(g.is_finite() && g > 0.0) {
                return Err(NetworkError::NonPositiveConductivity { edge: e.id, gamma: g });
            }
            e.gamma = g;
        }
        Ok(out)
    }

    fn check_grounded(&self) -> Result<(), NetworkError> {
        let n = self.n_vertices();
        let mut reached = vec![false; n + 1];
        let mut stack: Vec<usize> = self.boundary().collect();
        for &b in &stack {
            reached[b] = true;
        }
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        match self.interior().find(|&v| !reached[v]) {
            Some(vertex) => Err(NetworkError::UngroundedInterior { vertex }),
            None => Ok(()),
        }
    }
}

fn check_edge(id: usize, u: usize, v: usize, gamma: f64, n: usize) -> Result<(), NetworkError> {
    for vertex in [u, v] {
        if vertex == 0 || vertex > n {
            return Err(NetworkError::VertexOutOfRange {
                edge: id,
                vertex,
                n_vertices: n,
            });
        }
    }
    if u == v {
        return Err(NetworkError::SelfLoop { edge: id, vertex: u });
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(NetworkError::NonPositiveConductivity { edge: id, gamma });
    }
    Ok(())
}

/// Weighted graph Laplacian, with the boundary/interior split recorded.
///
/// Block form `[[A, B], [Bᵀ, C]]` with `A` the boundary block.
#[derive(Debug, Clone, PartialEq)]
pub struct KirchhoffMatrix {
    matrix: DenseMatrix,
    n_boundary: usize,
}

impl KirchhoffMatrix {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Entry at 1-based vertex indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i - 1, j - 1)]
    }

    /// Submatrix on 1-based rows and columns, in the order given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        let r: Vec<usize> = rows.iter().map(|i| i - 1).collect();
        let c: Vec<usize> = cols.iter().map(|j| j - 1).collect();
        self.matrix.select(&r, &c)
    }

    /// `(A, B, C)`; `Bᵀ` is the transpose of `B`.
    pub fn blocks(&self) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
        let b: Vec<usize> = (0..self.n_boundary).collect();
        let i: Vec<usize> = (self.n_boundary..self.n()).collect();
        (
            self.matrix.select(&b, &b),
            self.matrix.select(&b, &i),
            self.matrix.select(&i, &i),
        )
    }
}

pub fn kirchhoff(net: &Network) -> KirchhoffMatrix {
    let n = net.n_vertices();
    let mut k = DenseMatrix::zeros(n, n);
    for e in net.edges() {
        let (a, b) = (e.u - 1, e.v - 1);
        k[(a, b)] = -e.gamma;
        k[(b, a)] = -e.gamma;
    }
    // Diagonal as the negated sum of the row's off-diagonals so row sums are exactly zero.
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| k[(i, j)]).sum();
        k[(i, i)] = -off;
    }
    KirchhoffMatrix {
        matrix: k,
        n_boundary: net.n_boundary(),
    }
}

/// Vertex pairs of the lattice fixture's twelve edges, in conductivity order.
pub const LATTICE_EDGES: [(usize, usize); 12] = [
    (1, 9),
    (9, 12),
    (6, 12),
    (2, 10),
    (10, 11),
    (5, 11),
    (8, 9),
    (9, 10),
    (3, 10),
    (7, 12),
    (11, 12),
    (4, 11),
];

/// The 8-boundary, 4-interior lattice: a 4-cycle 9-10-11-12 of interior
/// vertices, each carrying two pendant boundary vertices.
pub fn lattice_fixture(gammas: &[f64; 12]) -> Result<Network, NetworkError> {
    Network::new(
        8,
        4,
        LATTICE_EDGES
            .iter()
            .zip(gammas)
            .map(|(&(u, v), &g)| (u, v, g)),
    )
}
