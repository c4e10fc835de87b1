//! Penalty and penalty-duality solvers for 1D fictitious-domain models of a
//! rigid structure immersed in a fluid.
//!
//! * [`elliptic`]: static model with point, H¹ and L² penalties.
//! * [`saddle`]: Uzawa driver for the augmented Lagrangian.
//! * [`transport`]: advection-diffusion and Burgers with an immersed structure.
//! * [`diagnostics`]: interface stresses, error norms, rate fits.
//! * [`experiment`]: configuration, scenario runner and CSV output.

pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod saddle;
pub mod transport;

pub use elliptic::{Mesh1D, PenaltyConfig, State};
pub use error::{Error, Result};
