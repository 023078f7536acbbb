//! Probabilistic sensor-network coverage over synthetic 3D terrain.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`terrain`] builds a multi-peak surface on an `L x W` lattice.
//! 2. [`manifold`] flattens the surface points to 2D with locally linear
//!    embedding and defines the pairwise cost value used to gate sensing.
//! 3. [`sensing`] deploys sensors, evaluates the exponential perceived
//!    probability model and fuses it into a per-point sensing map.
//! 4. [`watershed`] floods the missed-detection image (immersion watershed)
//!    and extracts the dam pixels between catchment basins.
//! 5. [`breach`] searches the dam pixels for the edge-to-edge path an
//!    intruder would take and reports the worst detection probability on it.
//!
//! [`harness`] wires the stages together into seeded, repeatable parameter
//! sweeps; [`io`] holds the plain-text grid formats.
//!
//! Grid coordinates follow the `(i, j)` convention with `i` the row
//! (`1..=L`) and `j` the column (`1..=W`). All arrays are stored row-major
//! and indexed from zero, so point `(i, j)` lives at `(i - 1) * W + (j - 1)`.

pub mod breach;
pub mod error;
pub mod grid;
pub mod harness;
pub mod io;
pub mod manifold;
pub mod sensing;
pub mod terrain;
pub mod watershed;

pub use error::{Error, Result};
pub use grid::Grid;
