//! The moment-generating function `phi`, its Jacobian, and moment
//! computation for point sets and grids.

use crate::error::MomentsError;
use crate::Position;

use super::legendre;
use super::{polar, BasisKind, DensityGrid, MomentBasis, MomentVector, Part};

/// Below this radius the polar chain rule for PZM angular terms is
/// numerically meaningless; the corresponding Jacobian rows are set to zero
/// (the exact gradient stays bounded, so this only flattens a vanishing
/// neighborhood of the origin).
pub const POLAR_SINGULARITY_RADIUS: f64 = 1e-9;

/// One robot's contribution to the swarm moment vector.
///
/// Component `(p, q)` is `(2p+1)(2q+1)/4 * P_p(x) P_q(y)` for Legendre
/// moments and the real embedding of `(p+1)/pi * W*_pq(r, theta)` for
/// pseudo-Zernike moments. PZM evaluation requires `r <= 1`.
pub fn phi(basis: &MomentBasis, s: Position) -> Result<Vec<f64>, MomentsError> {
    let mut out = vec![0.0; basis.embedding_len()];
    phi_into(basis, s, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`phi`]; `out` must have the embedding length.
pub fn phi_into(basis: &MomentBasis, s: Position, out: &mut [f64]) -> Result<(), MomentsError> {
    assert_eq!(out.len(), basis.embedding_len());
    let norms = basis.norms();
    match basis.kind() {
        BasisKind::Legendre => {
            let px = legendre::eval_all(basis.order(), s.x);
            let py = legendre::eval_all(basis.order(), s.y);
            for (i, c) in basis.components().iter().enumerate() {
                out[i] = norms[i] * px[c.p as usize] * py[c.q as usize];
            }
        }
        BasisKind::PseudoZernike => {
            let (r, theta) = polar(s);
            if r > 1.0 {
                return Err(MomentsError::OutsideUnitDisk { r });
            }
            let radial = basis.radial();
            for (i, c) in basis.components().iter().enumerate() {
                let s_pq = radial.eval(c.p, c.q, r);
                let angle = f64::from(c.q) * theta;
                // Conjugate: W*_pq = S_pq(r) e^{-jq theta}.
                out[i] = match c.part {
                    Part::Re => norms[i] * s_pq * angle.cos(),
                    Part::Im => -norms[i] * s_pq * angle.sin(),
                };
            }
        }
    }
    Ok(())
}

/// Jacobian of `phi` with respect to `(x, y)`, one `[d/dx, d/dy]` row per
/// embedding component.
pub fn phi_jacobian(basis: &MomentBasis, s: Position) -> Result<Vec<[f64; 2]>, MomentsError> {
    let norms = basis.norms();
    let mut rows = vec![[0.0, 0.0]; basis.embedding_len()];
    match basis.kind() {
        BasisKind::Legendre => {
            let px = legendre::eval_all(basis.order(), s.x);
            let py = legendre::eval_all(basis.order(), s.y);
            let dpx = legendre::deriv_all(basis.order(), &px);
            let dpy = legendre::deriv_all(basis.order(), &py);
            for (i, c) in basis.components().iter().enumerate() {
                let (p, q) = (c.p as usize, c.q as usize);
                rows[i] = [norms[i] * dpx[p] * py[q], norms[i] * px[p] * dpy[q]];
            }
        }
        BasisKind::PseudoZernike => {
            let (r, theta) = polar(s);
            if r > 1.0 {
                return Err(MomentsError::OutsideUnitDisk { r });
            }
            let radial = basis.radial();
            let (sin_t, cos_t) = theta.sin_cos();
            let near_origin = r <= POLAR_SINGULARITY_RADIUS;
            for (i, c) in basis.components().iter().enumerate() {
                if near_origin && c.q > 0 {
                    // Angular terms: documented zero-row convention at the
                    // polar singularity.
                    continue;
                }
                let n = norms[i];
                let s_pq = radial.eval(c.p, c.q, r);
                let ds = radial.deriv(c.p, c.q, r);
                let qf = f64::from(c.q);
                let (sin_q, cos_q) = (qf * theta).sin_cos();
                // Chain rule through (r, theta):
                //   dr/dx = cos t, dr/dy = sin t,
                //   dt/dx = -sin t / r, dt/dy = cos t / r.
                rows[i] = match c.part {
                    Part::Re => {
                        let angular = if c.q == 0 { 0.0 } else { n * s_pq * qf * sin_q / r };
                        [
                            n * ds * cos_t * cos_q + angular * sin_t,
                            n * ds * sin_t * cos_q - angular * cos_t,
                        ]
                    }
                    Part::Im => {
                        let angular = n * s_pq * qf * cos_q / r;
                        [
                            -n * ds * cos_t * sin_q + angular * sin_t,
                            -n * ds * sin_t * sin_q - angular * cos_t,
                        ]
                    }
                };
            }
        }
    }
    Ok(rows)
}

/// Moment vector of a set of unit-mass points: the mean of `phi` over the
/// set (the limit the distributed estimator converges to).
pub fn moments_of_points(
    basis: &MomentBasis,
    positions: &[Position],
) -> Result<MomentVector, MomentsError> {
    if positions.is_empty() {
        return Err(MomentsError::EmptyPointSet);
    }
    let mut acc = vec![0.0; basis.embedding_len()];
    let mut buf = vec![0.0; basis.embedding_len()];
    for &s in positions {
        phi_into(basis, s, &mut buf)?;
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b;
        }
    }
    let inv = 1.0 / positions.len() as f64;
    for a in &mut acc {
        *a *= inv;
    }
    MomentVector::new(basis.clone(), acc)
}

/// Mass-normalized moment vector of a density grid.
///
/// Cells are treated as point masses `mu_ij / total` at the cell centers, so
/// an image target is directly comparable with [`moments_of_points`]
/// regardless of robot count. For PZM bases, mass outside the unit disk is
/// ignored. Masses must be nonnegative with positive total.
pub fn moments_of_grid(
    basis: &MomentBasis,
    grid: &DensityGrid,
) -> Result<MomentVector, MomentsError> {
    grid.validate_masses()?;
    let pz = basis.kind() == BasisKind::PseudoZernike;
    let mut acc = vec![0.0; basis.embedding_len()];
    let mut buf = vec![0.0; basis.embedding_len()];
    let mut total = 0.0;
    for (_, _, x, y, mass) in grid.cells() {
        if mass == 0.0 {
            continue;
        }
        if pz && x.hypot(y) > 1.0 {
            continue;
        }
        phi_into(basis, Position::new(x, y), &mut buf)?;
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += mass * b;
        }
        total += mass;
    }
    if total <= 0.0 {
        return Err(MomentsError::ZeroMass);
    }
    for a in &mut acc {
        *a /= total;
    }
    MomentVector::new(basis.clone(), acc)
}

/// Quadrature projection of a (possibly signed) sampled field onto the
/// basis: `M_c = sum f_ij * phi_c(x_ij) * cell_area`.
///
/// This is the natural inverse of [`super::reconstruct`]: measuring a
/// reconstruction returns the original moments up to discretization error.
/// Unlike [`moments_of_grid`] it performs no mass normalization, since a
/// truncated reconstruction integrates to zero (its constant term is
/// excluded from the representation).
pub fn moments_of_field(
    basis: &MomentBasis,
    grid: &DensityGrid,
) -> Result<MomentVector, MomentsError> {
    let pz = basis.kind() == BasisKind::PseudoZernike;
    let area = grid.cell_area();
    let mut acc = vec![0.0; basis.embedding_len()];
    let mut buf = vec![0.0; basis.embedding_len()];
    for (_, _, x, y, value) in grid.cells() {
        if value == 0.0 {
            continue;
        }
        if pz && x.hypot(y) > 1.0 {
            continue;
        }
        phi_into(basis, Position::new(x, y), &mut buf)?;
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += value * area * b;
        }
    }
    MomentVector::new(basis.clone(), acc)
}
