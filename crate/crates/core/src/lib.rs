//! Replica-symmetric storage capacity of a perceptron that may choose which
//! `ρN` of its `N` inputs to use.
//!
//! * [`subcritical`] solves the saddle point below `α_CG = 2ρ`, where every
//!   selection supports solutions and the cluster entropy is the binary entropy.
//! * [`supercritical`] solves the rescaled equations above `α_CG` and bisects
//!   the cluster entropy `Σ(α)` down to the selection capacity `α_VS`.
//! * [`stability`] evaluates the de Almeida–Thouless margin on both sides.
//! * [`biht`] is the finite-size counterpart: greedy binary iterative hard
//!   thresholding plus exact LP separability checks.
//! * [`runs`] turns config files into CSV sweeps; the `capacity-lab` binary is a
//!   thin wrapper around it.
//!
//! ```
//! use capacity_lab::{gaussian::QuadratureGrid, model::ModelPoint, subcritical};
//!
//! let grid = QuadratureGrid::default();
//! let point = ModelPoint::new(0.5, 0.5).unwrap();
//! let rs = subcritical::solve_subcritical(point, &grid, &Default::default()).unwrap();
//! assert!(rs.q1 > 0.0 && rs.q1 < 0.5);
//! ```

pub mod biht;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod roots;
pub mod runs;
pub mod stability;
pub mod subcritical;
pub mod supercritical;

pub use error::{Error, Result};
pub use model::{ModelPoint, SolverOptions};
