//! Direct linear solvers: dense LU for cell-local systems, banded LU with
//! partial pivoting, and a sparse front-end that reorders, equilibrates and
//! hands the band to the banded factorization.

pub mod banded;
pub mod dense;
pub mod sparse;

pub use banded::{lu_banded_solve, BandedLu, BandedMatrix};
pub use dense::DenseLu;
pub use sparse::{
    equilibrate, relative_residual, reverse_cuthill_mckee, sparse_solve, Equilibration, SolveReport,
    SparseMatrix, TripletBuilder,
};
