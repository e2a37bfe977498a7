//! The forward problem: Dirichlet-to-Neumann map, harmonic extension and
//! signed minors of `Λ` and `K`.
//!
//! All minors take rows and columns in ascending index order; every sign
//! produced anywhere in the crate is relative to that single convention.

use thiserror::Error;

use crate::network::{kirchhoff, KirchhoffMatrix, Network};
use crate::numerics::{lu_det, solve_spd, DenseMatrix, NumericsError};

/// Floor for relative discrepancies against an analytically zero reference.
pub const TINY: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForwardError {
    #[error("interior block is singular: some interior vertex has no path to the boundary")]
    InteriorNotGrounded,
    #[error("boundary vector has length {got}, network has {expected} boundary vertices")]
    BoundaryLength { expected: usize, got: usize },
    #[error("DtN map must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid boundary pair: {0}")]
    InvalidPair(String),
}

/// Response matrix `Λ = A − B C⁻¹ Bᵀ` on the boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DtNMap {
    matrix: DenseMatrix,
}

impl DtNMap {
    /// Wraps a square matrix as a DtN map. No further structure is assumed,
    /// so measured or foreign data can be fed to the inverse solver.
    pub fn from_matrix(matrix: DenseMatrix) -> Result<Self, ForwardError> {
        if !matrix.is_square() {
            return Err(ForwardError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn n_boundary(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Entry at 1-based boundary indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i - 1, j - 1)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix.scaled(c),
        }
    }

    /// Worst violation of the response-matrix structure, each measured
    /// relative to `max_abs(Λ)`.
    pub fn structure_defects(&self) -> StructureDefects {
        let n = self.n_boundary();
        let scale = self.matrix.max_abs().max(TINY);
        let mut d = StructureDefects::default();
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                let a = self.matrix[(i, j)];
                row_sum += a;
                if i != j {
                    d.asymmetry = d.asymmetry.max((a - self.matrix[(j, i)]).abs() / scale);
                    d.positive_off_diagonal = d.positive_off_diagonal.max(a / scale);
                }
            }
            d.row_sum = d.row_sum.max(row_sum.abs() / scale);
        }
        d
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StructureDefects {
    pub asymmetry: f64,
    pub row_sum: f64,
    /// Largest positive off-diagonal entry (0 when all are non-positive).
    pub positive_off_diagonal: f64,
}

impl StructureDefects {
    pub fn within(&self, tol: f64) -> bool {
        self.asymmetry <= tol && self.row_sum <= tol && self.positive_off_diagonal <= tol
    }
}

/// Equal-size sets `P` (rows) and `Q` (columns) of 1-based boundary indices,
/// stored ascending. `P` and `Q` may overlap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryPair {
    p: Vec<usize>,
    q: Vec<usize>,
}

impl BoundaryPair {
    /// Sorts both sets; rejects duplicates, unequal sizes and indices outside `1..=n_boundary`.
    pub fn new(
        p: impl Into<Vec<usize>>,
        q: impl Into<Vec<usize>>,
        n_boundary: usize,
    ) -> Result<Self, ForwardError> {
        let mut p = p.into();
        let mut q = q.into();
        p.sort_unstable();
        q.sort_unstable();
        if p.len() != q.len() {
            return Err(ForwardError::InvalidPair(format!(
                "|P| = {} but |Q| = {}",
                p.len(),
                q.len()
            )));
        }
        for (name, set) in [("P", &p), ("Q", &q)] {
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(ForwardError::InvalidPair(format!("{name} has a repeated index")));
            }
            if let Some(&bad) = set.iter().find(|&&v| v == 0 || v > n_boundary) {
                return Err(ForwardError::InvalidPair(format!(
                    "{name} index {bad} outside 1..={n_boundary}"
                )));
            }
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &[usize] {
        &self.p
    }

    pub fn q(&self) -> &[usize] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// `P ∖ Q`, ascending.
    pub fn sources(&self) -> Vec<usize> {
        self.p.iter().copied().filter(|v| !self.q.contains(v)).collect()
    }

    /// `Q ∖ P`, ascending.
    pub fn sinks(&self) -> Vec<usize> {
        self.q.iter().copied().filter(|v| !self.p.contains(v)).collect()
    }

    /// `P ∩ Q`, ascending.
    pub fn shared(&self) -> Vec<usize> {
        self.p.iter().copied().filter(|v| self.q.contains(v)).collect()
    }

    pub fn swapped(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }
}

impl std::fmt::Display for BoundaryPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |s: &[usize]| {
            s.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "({};{})", join(&self.p), join(&self.q))
    }
}

fn grounded(err: NumericsError) -> ForwardError {
    match err {
        NumericsError::NotPositiveDefinite { .. } => ForwardError::InteriorNotGrounded,
        other => unreachable!("Kirchhoff blocks are conformal: {other}"),
    }
}

pub fn dtn(net: &Network) -> Result<DtNMap, ForwardError> {
    let k = kirchhoff(net);
    let (a, b, c) = k.blocks();
    if net.n_interior() == 0 {
        return Ok(DtNMap { matrix: a });
    }
    let x = solve_spd(&c, &b.transpose()).map_err(grounded)?;
    let bx = b.matmul(&x).expect("conformal blocks");
    let n = net.n_boundary();
    let mut lam = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            lam[(i, j)] = a[(i, j)] - bx[(i, j)];
        }
    }
    Ok(DtNMap { matrix: lam })
}

/// Extends boundary potentials harmonically: returns `u` on all vertices
/// (0-based slot `v-1` for vertex `v`) with `u_int = −C⁻¹ Bᵀ u_∂`.
pub fn harmonic_extension(net: &Network, u_boundary: &[f64]) -> Result<Vec<f64>, ForwardError> {
    if u_boundary.len() != net.n_boundary() {
        return Err(ForwardError::BoundaryLength {
            expected: net.n_boundary(),
            got: u_boundary.len(),
        });
    }
    let (_, b, c) = kirchhoff(net).blocks();
    let mut u = u_boundary.to_vec();
    if net.n_interior() > 0 {
        let rhs: Vec<f64> = b.transpose().mul_vec(u_boundary).iter().map(|x| -x).collect();
        let rhs = DenseMatrix::new(rhs.len(), 1, rhs).expect("finite boundary data");
        let interior = solve_spd(&c, &rhs).map_err(grounded)?;
        u.extend(interior.column(0));
    }
    Ok(u)
}

/// Current `K·u` restricted to the boundary vertices.
pub fn boundary_current(net: &Network, u: &[f64]) -> Vec<f64> {
    let ku = kirchhoff(net).matrix().mul_vec(u);
    ku[..net.n_boundary()].to_vec()
}

/// `det Λ(P, Q)` with rows `P` and columns `Q` ascending.
pub fn dtn_subdet(lam: &DtNMap, pair: &BoundaryPair) -> f64 {
    let rows: Vec<usize> = pair.p().iter().map(|i| i - 1).collect();
    let cols: Vec<usize> = pair.q().iter().map(|j| j - 1).collect();
    lu_det(&lam.matrix.select(&rows, &cols))
}

/// `det K(rows, cols)` for 1-based index sets, taken in ascending order.
/// Panics if the sets differ in size.
pub fn kirchhoff_subdet(k: &KirchhoffMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    assert_eq!(rows.len(), cols.len(), "minor needs equal row and column counts");
    let mut r = rows.to_vec();
    let mut c = cols.to_vec();
    r.sort_unstable();
    c.sort_unstable();
    lu_det(&k.submatrix(&r, &c))
}

/// Rows `P ∪ I` and columns `Q ∪ I` of the bordered Kirchhoff minor.
pub fn bordered_index_sets(net: &Network, pair: &BoundaryPair) -> (Vec<usize>, Vec<usize>) {
    let rows = pair.p().iter().copied().chain(net.interior()).collect();
    let cols = pair.q().iter().copied().chain(net.interior()).collect();
    (rows, cols)
}

/// `|det Λ(P,Q)·det K(I,I) − det K(P∪I, Q∪I)| / max(|det K(P∪I, Q∪I)|, TINY)`.
///
/// A zero reference with a nonzero product reports 1.
pub fn schur_identity_check(net: &Network, pair: &BoundaryPair) -> Result<f64, ForwardError> {
    let lam = dtn(net)?;
    let k = kirchhoff(net);
    let interior: Vec<usize> = net.interior().collect();
    let lhs = dtn_subdet(&lam, pair) * kirchhoff_subdet(&k, &interior, &interior);
    let (rows, cols) = bordered_index_sets(net, pair);
    let reference = kirchhoff_subdet(&k, &rows, &cols);
    Ok(relative_discrepancy(lhs, reference))
}

pub fn relative_discrepancy(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        return if value == 0.0 { 0.0 } else { 1.0 };
    }
    (value - reference).abs() / reference.abs().max(TINY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::lattice_fixture;

    fn one_to_twelve() -> Network {
        lattice_fixture(&std::array::from_fn(|k| (k + 1) as f64)).unwrap()
    }

    fn interior_det(net: &Network) -> f64 {
        let i: Vec<usize> = net.interior().collect();
        kirchhoff_subdet(&kirchhoff(net), &i, &i)
    }

    #[test]
    fn no_interior_dtn_is_kirchhoff() {
        let net = Network::new(2, 0, [(1, 2, 5.0)]).unwrap();
        let lam = dtn(&net).unwrap();
        assert_eq!(lam.matrix().as_slice(), &[5.0, -5.0, -5.0, 5.0]);
    }

    #[test]
    fn series_pair() {
        let net = Network::new(2, 1, [(1, 3, 1.0), (3, 2, 1.0)]).unwrap();
        let lam = dtn(&net).unwrap();
        for (x, y) in lam.matrix().as_slice().iter().zip([0.5, -0.5, -0.5, 0.5]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn lattice_dtn_structure() {
        let lam = dtn(&one_to_twelve()).unwrap();
        assert_eq!(lam.n_boundary(), 8);
        assert!(lam.structure_defects().within(1e-12), "{:?}", lam.structure_defects());
    }

    #[test]
    fn harmonic_extension_of_constant() {
        let net = one_to_twelve();
        let u = harmonic_extension(&net, &[2.5; 8]).unwrap();
        for x in u {
            assert!((x - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_extension_series_midpoint() {
        let net = Network::new(2, 1, [(1, 3, 1.0), (3, 2, 1.0)]).unwrap();
        let u = harmonic_extension(&net, &[0.0, 1.0]).unwrap();
        assert!((u[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn harmonic_extension_reproduces_dtn_columns() {
        let net = one_to_twelve();
        let lam = dtn(&net).unwrap();
        let max_gamma = 12.0;
        for col in 0..8 {
            let mut e = vec![0.0; 8];
            e[col] = 1.0;
            let u = harmonic_extension(&net, &e).unwrap();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let tol = 1e-10 * norm * max_gamma;
            let k = kirchhoff(&net);
            let ku = k.matrix().mul_vec(&u);
            for v in net.interior() {
                assert!(ku[v - 1].abs() <= tol, "interior {v} not harmonic");
            }
            let current = boundary_current(&net, &u);
            for (i, c) in current.iter().enumerate() {
                assert!((c - lam.get(i + 1, col + 1)).abs() <= tol);
            }
        }
    }

    #[test]
    fn ungrounded_interior_rejected_by_solver() {
        // Network::new refuses ungrounded interiors, so probe the solver directly.
        let c = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(
            grounded(solve_spd(&c, &DenseMatrix::identity(2)).unwrap_err()),
            ForwardError::InteriorNotGrounded
        );
    }

    #[test]
    fn boundary_pair_validation() {
        assert!(BoundaryPair::new(vec![1], vec![1, 2], 4).is_err());
        assert!(BoundaryPair::new(vec![1, 1], vec![2, 3], 4).is_err());
        assert!(BoundaryPair::new(vec![5], vec![1], 4).is_err());
        assert!(BoundaryPair::new(vec![0], vec![1], 4).is_err());
        let pair = BoundaryPair::new(vec![8, 2, 1], vec![6, 8, 5], 8).unwrap();
        assert_eq!(pair.p(), &[1, 2, 8]);
        assert_eq!(pair.q(), &[5, 6, 8]);
        assert_eq!(pair.sources(), vec![1, 2]);
        assert_eq!(pair.sinks(), vec![5, 6]);
        assert_eq!(pair.shared(), vec![8]);
        assert_eq!(pair.to_string(), "(1,2,8;5,6,8)");
    }

    #[test]
    fn singleton_minor_is_entry() {
        let lam = dtn(&one_to_twelve()).unwrap();
        for i in 1..=8 {
            let pair = BoundaryPair::new(vec![i], vec![i], 8).unwrap();
            assert_eq!(dtn_subdet(&lam, &pair), lam.get(i, i));
        }
    }

    #[test]
    fn minor_12_56() {
        let net = one_to_twelve();
        let lam = dtn(&net).unwrap();
        let pair = BoundaryPair::new(vec![1, 2], vec![5, 6], 8).unwrap();
        let product = dtn_subdet(&lam, &pair) * interior_det(&net);
        assert!((product + 720.0).abs() <= 1e-10 * 720.0, "{product}");
    }

    #[test]
    fn minor_15_26_two_monomials() {
        let net = one_to_twelve();
        let lam = dtn(&net).unwrap();
        let pair = BoundaryPair::new(vec![1, 5], vec![2, 6], 8).unwrap();
        let product = dtn_subdet(&lam, &pair) * interior_det(&net);
        // Symbolic expansion of the bordered minor: γ1γ3γ4γ6(γ8γ11 − γ2γ5).
        // With rows and columns ascending the γ1γ8γ4γ3γ11γ6 term is the positive one.
        let want = 1.0 * 8.0 * 4.0 * 3.0 * 11.0 * 6.0 - 1.0 * 2.0 * 3.0 * 4.0 * 5.0 * 6.0;
        assert_eq!(want, 5616.0);
        assert!((product - want).abs() <= 1e-10 * want.abs(), "{product}");
    }

    #[test]
    fn kirchhoff_minors() {
        let net = lattice_fixture(&[1.0; 12]).unwrap();
        let k = kirchhoff(&net);
        // Frozen from the permutation-expansion oracle.
        assert!((kirchhoff_subdet(&k, &[9, 10, 11, 12], &[9, 10, 11, 12]) - 192.0).abs() < 1e-10);
        assert_eq!(kirchhoff_subdet(&k, &[], &[]), 1.0);

        let k = kirchhoff(&one_to_twelve());
        assert_eq!(kirchhoff_subdet(&k, &[10], &[10]), 8.0 + 4.0 + 9.0 + 5.0);
    }

    #[test]
    fn schur_identity_fixtures() {
        let net = one_to_twelve();
        let pair = BoundaryPair::new(vec![1, 2], vec![5, 6], 8).unwrap();
        assert!(schur_identity_check(&net, &pair).unwrap() <= 1e-10);

        let net = Network::new(2, 0, [(1, 2, 3.5)]).unwrap();
        let pair = BoundaryPair::new(vec![1], vec![2], 2).unwrap();
        assert_eq!(schur_identity_check(&net, &pair).unwrap(), 0.0);
    }

    #[test]
    fn dtn_is_homogeneous() {
        let g: [f64; 12] = std::array::from_fn(|k| 0.3 + k as f64 * 0.7);
        let net = lattice_fixture(&g).unwrap();
        let scaled = lattice_fixture(&g.map(|x| 2.5 * x)).unwrap();
        let a = dtn(&net).unwrap().scaled(2.5);
        let b = dtn(&scaled).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) <= 1e-12 * b.matrix().max_abs());
    }

    #[test]
    fn discrepancy_conventions() {
        assert_eq!(relative_discrepancy(0.0, 0.0), 0.0);
        assert_eq!(relative_discrepancy(1e-20, 0.0), 1.0);
        assert_eq!(relative_discrepancy(2.0, 4.0), 0.5);
    }
}
