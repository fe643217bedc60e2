//! Simulation of a measurement-induced nonlinear qubit protocol.
//!
//! Two copies of a qubit `(|0⟩ + z|1⟩)/√(1+|z|²)` are entangled and one of
//! them is post-selected, which applies the rational map
//! `f(z) = 2z / (1 + z²)` to the survivor. Iterating it drives every state
//! with `Re z > 0` to `|+⟩ₓ` and every state with `Re z < 0` to `|−⟩ₓ`,
//! which pulls apart nearly identical states.
//!
//! - [`point`]: pole-safe homogeneous coordinates for `z`.
//! - [`map`]: the map, success probabilities, classification, overlaps.
//! - [`circuit`]: waveplates, the two-qubit unitary and post-selection.
//! - [`tomography`]: four-setting tomography with Poisson shot noise.
//! - [`basin`]: parallel basin-of-attraction rasters.
//! - [`experiment`]: the discrimination runs and their reports.

pub mod basin;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod map;
pub mod point;
pub mod tomography;

pub use error::{Error, Result};
pub use point::ProjectivePoint;
