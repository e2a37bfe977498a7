//! Forward and inverse conductivity problems on resistor networks.
//!
//! A network with positive edge conductivities induces a Dirichlet-to-Neumann
//! map `Λ` on its boundary vertices, the Schur complement of the Kirchhoff
//! matrix. Minors of `Λ` expand over vertex-disjoint path systems, and minors
//! whose expansion is a single monomial give equations that are linear in the
//! logarithms of the conductivities. [`inverse::recover`] collects such
//! equations, certifies their rank exactly and solves them.
//!
//! ```
//! use dtnmap::{dtn, lattice_fixture, recover};
//!
//! let gammas: [f64; 12] = std::array::from_fn(|k| (k + 1) as f64);
//! let lam = dtn(&lattice_fixture(&gammas).unwrap()).unwrap();
//! let topology = lattice_fixture(&[1.0; 12]).unwrap();
//! let report = recover(&topology, &lam, 8, true).unwrap();
//! assert!((report.recovered_gammas[6] - 7.0).abs() < 1e-8);
//! ```

pub mod forward;
pub mod inverse;
pub mod network;
pub mod numerics;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod paths;

pub use forward::{
    dtn, dtn_subdet, harmonic_extension, kirchhoff_subdet, schur_identity_check, BoundaryPair,
    DtNMap, ForwardError,
};
pub use inverse::{
    build_system, difference_rows, enumerate_admissible_pairs, recover, solve_system,
    system_rank, InverseError, LogLinearSystem, RecoveryReport,
};
pub use network::{
    kirchhoff, lattice_fixture, parse_network, serialize_network, KirchhoffMatrix, Network,
    NetworkError,
};
pub use numerics::{integer_rank, lstsq, lu_det, solve_spd, DenseMatrix, NumericsError};
pub use paths::{
    enumerate_path_systems, expand_det, is_log_linear_admissible, term_sign, PathError,
    PathSystem, PathTerm,
};
