//! Mixed-precision sparse approximate inverse preconditioning.
//!
//! The crate builds a sparse approximate inverse `M ~ A^{-1}` by Frobenius
//! norm minimization with adaptive pattern growth, stores its entries in
//! magnitude-dependent precisions ("buckets"), applies it with an
//! adaptive-precision sparse matrix-vector product, and uses it as a left
//! preconditioner in a five-precision GMRES-based iterative refinement solver.
//! Every precision is simulated in software, see [`precision`].

pub mod bucketed;
pub mod dense;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod precision;
pub mod refine;
pub mod spai;
pub mod sparsemat;

pub use bucketed::{build_buckets, bspmv, BucketNorm, BucketScheme, BucketedMatrix};
pub use error::{Error, Result};
pub use krylov::{gmres_left, GmresConfig, GmresResult};
pub use precision::{op_in, round_to, unit_roundoff, DoubleDouble, FpFormat, OpKind};
pub use refine::{bspai_gmres_ir, reference_solution, IrConfig, IrReport, PrecisionTuple};
pub use spai::{spai_build, spai_right_preconditioner, InitialPattern, SpaiConfig, SpaiReport};
pub use sparsemat::{spmv_uniform, SparseMatrix};
