//! Computational tensor free probability.
//!
//! The crate is organised bottom-up:
//!
//! * [`perm`] and [`pairing`]: permutations of `[p]`, pairings of `[±p]`, the
//!   geodesic order and the non-crossing lattices `S_NC(β)`.
//! * [`weingarten`]: unitary and orthogonal Weingarten functions and the
//!   closed-form two-copy twirls.
//! * [`tensors`]: multipartite matrices and their tensor trace invariants.
//! * [`cumulant`]: moment and cumulant tables indexed by permutation tuples.
//! * [`rmt`]: seeded random matrix ensembles.
//! * [`freeconv`]: semicircle moments, free convolution by sampling and the
//!   bipartite central limit law.
//! * [`embedding`]: graph embeddings of bipartite matrices into larger tensor
//!   spaces, evaluated by reducing invariants back to the small space.
//! * [`io`]: binary and CSV matrix files.
//!
//! Monte Carlo loops go through [`exec`], which is parallel when the
//! `parallel` feature is on and sequential otherwise. Results never depend
//! on the number of threads.

pub mod cumulant;
pub mod embedding;
pub mod error;
pub mod exec;
pub mod freeconv;
pub mod io;
pub mod linalg;
pub mod pairing;
pub mod perm;
pub mod rmt;
pub mod stats;
pub mod tensors;
pub mod weingarten;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use perm::{Partition, PermTuple, Permutation};
pub use tensors::MultipartiteMatrix;
