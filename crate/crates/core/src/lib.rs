//! High-order boundary-element solver for the electric field integral
//! equation (EFIE) on perfectly conducting surfaces.
//!
//! The discretization uses Graglia-Wilton-Peterson (GWP) div-conforming
//! vector bases of order `p` on flat or quadratic triangles. Low-frequency
//! breakdown is removed with quasi-Helmholtz projectors built from a
//! high-order Star matrix, so no loop or global-cycle detection is needed.
//!
//! The crate is organized bottom-up:
//!
//! * [`mesh`]: Gmsh ingestion, canonical generators, connectivity.
//! * [`basis`]: GWP source/test space and Lagrange charge space.
//! * [`quadrature`]: triangle rules and Sauter-Schwab singular integration.
//! * [`operators`]: dense `T_s`, `T_h`, plane-wave excitation, far field.
//! * [`projectors`]: Star matrices and the projector pair.
//! * [`precond`]: scaling constant, stabilized system, split currents.
//! * [`analysis`]: Mie oracle, condition numbers, RCS error metrics.
//! * [`pipeline`]: end-to-end solves shared by the command-line tool.

pub mod analysis;
pub mod basis;
pub mod consts;
pub mod error;
pub mod geom;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod pipeline;
pub mod poly;
pub mod precond;
pub mod projectors;
pub mod quadrature;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use faer::{c64, Mat};

pub use basis::{BasisSpace, ChargeSpace};
pub use mesh::SurfaceMesh;
pub use operators::{EfieBlocks, Excitation, PlaneWave};
pub use projectors::{ProjectorPair, StarMatrix, StarVariant};
pub use quadrature::QuadratureConfig;
