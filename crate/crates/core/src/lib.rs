//! Distributed swarm formation control via image moments.
//!
//! A swarm of planar point robots is driven toward a target density
//! specified by a finite set of image moments (Legendre or pseudo-Zernike).
//! Each robot estimates the moments of the whole formation with a
//! self-healing push-sum protocol that tolerates packet loss through a
//! bounded-age neighbor memory, then descends the moment-matching cost with
//! a gradient control law.
//!
//! Main pieces:
//! - [`moments`]: orthogonal bases, the moment-generating function and its
//!   Jacobian, moments of grids and point sets, reconstruction, and MSRE.
//! - [`network`]: directed communication graphs, out-Laplacians, and the
//!   seeded Bernoulli packet-delivery model.
//! - [`estimator`]: the per-robot push-sum state with neighbor memory.
//! - [`controller`]: the gradient control law, gain schedule, collision
//!   filter, and saturation/deadband.
//! - [`swarmsim`]: the synchronous simulation loop, scenario configs,
//!   add/remove events, and metric logging.
//! - [`io`]: PGM images and the CSV formats used by the CLI.

pub mod controller;
pub mod error;
pub mod estimator;
pub mod io;
pub mod moments;
pub mod network;
pub mod numeric;
pub mod shapes;
pub mod swarmsim;

/// A planar position (or velocity) in the normalized `[-1, 1]^2` domain.
pub type Position = nalgebra::Vector2<f64>;

pub use moments::{BasisKind, DensityGrid, MomentBasis, MomentVector, Part};
