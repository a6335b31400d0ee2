//! Image-moment bases, moment vectors, and the moment-generating function.
//!
//! Two orthogonal families are supported on the `[-1, 1]^2` domain:
//! products of Legendre polynomials (LMs) over the square, and
//! pseudo-Zernike polynomials (PZMs) over the unit disk. A formation is
//! summarized by all moments from first to `n`th order; zeroth-order
//! moments are deliberately excluded so the representation is independent
//! of the number of robots.
//!
//! Swarm moments follow the mean convention: the moment vector of a point
//! set is the arithmetic mean of the per-robot contributions `phi(s_i)`,
//! and image targets are normalized by total mass so the two are directly
//! comparable regardless of swarm size.

mod generating;
mod grid;
pub mod legendre;
pub mod pseudo_zernike;
mod reconstruct;

pub use generating::{
    moments_of_field, moments_of_grid, moments_of_points, phi, phi_into, phi_jacobian,
    POLAR_SINGULARITY_RADIUS,
};
pub use grid::DensityGrid;
pub use legendre::{legendre_deriv, legendre_eval};
pub use pseudo_zernike::pz_radial_coeffs;
pub use reconstruct::{
    eval_reconstruction, msre, reconstruct, MsreEvaluator, MSRE_GRID_POINTS, MSRE_GRID_STEP,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MomentsError;
use crate::Position;
use pseudo_zernike::RadialTable;

/// Which orthogonal family a basis draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Legendre,
    PseudoZernike,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKind::Legendre => write!(f, "legendre"),
            BasisKind::PseudoZernike => write!(f, "pseudo_zernike"),
        }
    }
}

/// Real or imaginary part of a (possibly complex) moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Re,
    Im,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Part::Re => write!(f, "re"),
            Part::Im => write!(f, "im"),
        }
    }
}

/// One entry of the real embedding: the `(p, q)` moment and which part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Component {
    pub p: u32,
    pub q: u32,
    pub part: Part,
}

impl Component {
    /// Total degree of the component, used by the gain schedule:
    /// `p + q` for Legendre moments, the radial order `p` for PZMs.
    pub fn degree(&self, kind: BasisKind) -> u32 {
        match kind {
            BasisKind::Legendre => self.p + self.q,
            BasisKind::PseudoZernike => self.p,
        }
    }
}

/// A moment basis: family plus maximum order, with the flat index map over
/// the real embedding.
///
/// Components are ordered by total order ascending, then by `q` ascending,
/// with the real part before the imaginary part. For Legendre moments order
/// `d` holds `(p, q) = (d, 0), (d-1, 1), ..., (0, d)`; for pseudo-Zernike
/// moments radial order `p` holds `q = 0 ..= p`, where every `q > 0` moment
/// contributes a real and an imaginary entry.
#[derive(Debug, Clone)]
pub struct MomentBasis {
    kind: BasisKind,
    order: u32,
    components: Vec<Component>,
    /// Per-component normalization carried by the generating function:
    /// `(2p+1)(2q+1)/4` for LMs, `(p+1)/pi` for PZMs.
    norms: Vec<f64>,
    index: BTreeMap<(u32, u32, Part), usize>,
    radial: Option<RadialTable>,
}

/// Highest supported Legendre order (the recurrence is stable well beyond
/// the orders any formation uses; this is a sanity bound).
pub const MAX_LEGENDRE_ORDER: u32 = 32;

impl MomentBasis {
    pub fn new(kind: BasisKind, order: u32) -> Result<Self, MomentsError> {
        let max = match kind {
            BasisKind::Legendre => MAX_LEGENDRE_ORDER,
            BasisKind::PseudoZernike => pseudo_zernike::MAX_ORDER,
        };
        if order < 1 || order > max {
            return Err(MomentsError::OrderOutOfRange { order, max });
        }

        let mut components = Vec::new();
        let mut norms = Vec::new();
        match kind {
            BasisKind::Legendre => {
                for d in 1..=order {
                    for q in 0..=d {
                        let p = d - q;
                        components.push(Component { p, q, part: Part::Re });
                        norms.push(f64::from((2 * p + 1) * (2 * q + 1)) / 4.0);
                    }
                }
            }
            BasisKind::PseudoZernike => {
                for p in 1..=order {
                    let norm = f64::from(p + 1) / std::f64::consts::PI;
                    for q in 0..=p {
                        components.push(Component { p, q, part: Part::Re });
                        norms.push(norm);
                        if q > 0 {
                            components.push(Component { p, q, part: Part::Im });
                            norms.push(norm);
                        }
                    }
                }
            }
        }

        let index = components
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.p, c.q, c.part), i))
            .collect();

        let radial = match kind {
            BasisKind::Legendre => None,
            BasisKind::PseudoZernike => Some(RadialTable::new(order)?),
        };

        Ok(Self { kind, order, components, norms, index, radial })
    }

    pub fn legendre(order: u32) -> Result<Self, MomentsError> {
        Self::new(BasisKind::Legendre, order)
    }

    pub fn pseudo_zernike(order: u32) -> Result<Self, MomentsError> {
        Self::new(BasisKind::PseudoZernike, order)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Number of complex moments from first to `n`th order: `n(n+3)/2`.
    pub fn complex_count(&self) -> usize {
        let n = self.order as usize;
        n * (n + 3) / 2
    }

    /// Length of the real embedding: equals [`Self::complex_count`] for
    /// Legendre moments and `n(n+2)` for pseudo-Zernike moments (each
    /// `q > 0` moment splits into real and imaginary entries).
    pub fn embedding_len(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, flat: usize) -> Component {
        self.components[flat]
    }

    pub fn index_of(&self, p: u32, q: u32, part: Part) -> Option<usize> {
        self.index.get(&(p, q, part)).copied()
    }

    pub(crate) fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub(crate) fn radial(&self) -> &RadialTable {
        self.radial.as_ref().expect("radial table only exists for PZM bases")
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.kind == other.kind && self.order == other.order
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<(), MomentsError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(MomentsError::BasisMismatch {
                left: format!("{} order {}", self.kind, self.order),
                right: format!("{} order {}", other.kind, other.order),
            })
        }
    }
}

impl PartialEq for MomentBasis {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other)
    }
}

/// A real-embedded moment vector tied to its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    basis: MomentBasis,
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(basis: MomentBasis, values: Vec<f64>) -> Result<Self, MomentsError> {
        if values.len() != basis.embedding_len() {
            return Err(MomentsError::LengthMismatch {
                got: values.len(),
                expected: basis.embedding_len(),
            });
        }
        Ok(Self { basis, values })
    }

    pub fn zeros(basis: MomentBasis) -> Self {
        let values = vec![0.0; basis.embedding_len()];
        Self { basis, values }
    }

    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, p: u32, q: u32, part: Part) -> Option<f64> {
        self.basis.index_of(p, q, part).map(|i| self.values[i])
    }

    /// Euclidean norm of the difference with another vector of the same basis.
    pub fn error_norm(&self, other: &Self) -> Result<f64, MomentsError> {
        self.basis.check_compatible(&other.basis)?;
        Ok(crate::numeric::norm2_diff(&self.values, &other.values))
    }

    /// Zeroes every component above `order`, keeping the basis shape.
    /// This is the truncation used when comparing lower-order
    /// representations against a higher-order reference.
    pub fn truncated(&self, order: u32) -> Self {
        let mut out = self.clone();
        for (i, c) in self.basis.components().iter().enumerate() {
            if c.degree(self.basis.kind()) > order {
                out.values[i] = 0.0;
            }
        }
        out
    }
}

/// Polar coordinates `(r, theta)` of a position.
pub fn polar(s: Position) -> (f64, f64) {
    (s.norm(), s.y.atan2(s.x))
}
