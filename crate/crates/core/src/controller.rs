//! Gradient moment-matching control: gain schedule, control law, collision
//! filter, saturation/deadband, and the Jacobian-rank diagnostic.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{ControllerError, MomentsError};
use crate::moments::{phi_jacobian, MomentBasis};
use crate::Position;

/// Diagonal gain matrix over the real embedding.
///
/// Every component of degree `d` (total order for LMs, radial order for
/// PZMs; real and imaginary parts of one moment share the entry) gets gain
/// `scale * d^(-beta)`. Positive `beta` damps high-order moments, which
/// encode high-frequency features of the formation.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSchedule {
    order: u32,
    beta: f64,
    diag: Vec<f64>,
}

impl GainSchedule {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Uniformly scaled copy (e.g. the 5G variant of a schedule G).
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "gain scale must keep the matrix positive definite");
        Self {
            order: self.order,
            beta: self.beta,
            diag: self.diag.iter().map(|g| g * factor).collect(),
        }
    }
}

/// Builds the degree-weighted gain schedule for a basis.
pub fn gain_matrix(basis: &MomentBasis, beta: f64) -> GainSchedule {
    let kind = basis.kind();
    let diag = basis
        .components()
        .iter()
        .map(|c| f64::from(c.degree(kind)).powf(-beta))
        .collect();
    GainSchedule { order: basis.order(), beta, diag }
}

/// Control parameters: speed cap, deadband, collision zones, and step size.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlParams {
    /// Speed cap in domain units per step.
    pub v_max: f64,
    /// Deadband: commanded speeds below this are zeroed.
    pub v_min: f64,
    /// Collision zone radii, strictly increasing.
    pub zone_radii: [f64; 3],
    /// Repulsion gains per zone, innermost first.
    pub zone_gains: [f64; 3],
    /// Euler step size.
    pub dt: f64,
}

impl ControlParams {
    /// Defaults in normalized domain units. The zone radii sit at robot
    /// scale and the inner repulsion dominates any attainable attraction.
    pub fn defaults() -> Self {
        let v_max = 0.01;
        Self {
            v_max,
            v_min: 0.001,
            zone_radii: [0.05, 0.08, 0.12],
            zone_gains: [3.0 * v_max, v_max, 0.3 * v_max],
            dt: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.v_max > 0.0) {
            return Err(ControllerError::InvalidParams(format!(
                "v_max must be positive (got {})",
                self.v_max
            )));
        }
        if !(0.0..self.v_max).contains(&self.v_min) {
            return Err(ControllerError::InvalidParams(format!(
                "need 0 <= v_min < v_max (got v_min {}, v_max {})",
                self.v_min, self.v_max
            )));
        }
        if !(self.zone_radii[0] > 0.0
            && self.zone_radii[0] < self.zone_radii[1]
            && self.zone_radii[1] < self.zone_radii[2])
        {
            return Err(ControllerError::InvalidParams(format!(
                "collision radii must be strictly increasing (got {:?})",
                self.zone_radii
            )));
        }
        if self.zone_gains.iter().any(|g| *g < 0.0) {
            return Err(ControllerError::InvalidParams(
                "collision gains must be nonnegative".into(),
            ));
        }
        if !(self.dt > 0.0) {
            return Err(ControllerError::InvalidParams(format!(
                "dt must be positive (got {})",
                self.dt
            )));
        }
        Ok(())
    }
}

impl Default for ControlParams {
    fn default() -> Self {
        Self::defaults()
    }
}

/// Gradient control law: `sdot_i = -J(phi(s_i))^T Gamma (Mhat - M*)`.
pub fn control_velocity(
    jac: &[[f64; 2]],
    mhat: &[f64],
    mstar: &[f64],
    gains: &GainSchedule,
) -> Result<Position, ControllerError> {
    let m = jac.len();
    if mhat.len() != m || mstar.len() != m || gains.len() != m {
        return Err(ControllerError::DimensionMismatch {
            jac_rows: m,
            mhat: mhat.len(),
            mstar: mstar.len(),
            gains: gains.len(),
        });
    }
    let mut vx = 0.0;
    let mut vy = 0.0;
    for c in 0..m {
        let weighted_err = gains.diag[c] * (mhat[c] - mstar[c]);
        vx -= jac[c][0] * weighted_err;
        vy -= jac[c][1] * weighted_err;
    }
    Ok(Position::new(vx, vy))
}

/// Adds three-zone repulsion away from every neighbor within the outer
/// radius. Coincident neighbors repel along a random unit direction drawn
/// from the provided stream (a documented convention; exact overlap has no
/// preferred direction).
pub fn collision_filter<R: Rng + ?Sized>(
    v: Position,
    own: Position,
    neighbors: &[Position],
    params: &ControlParams,
    rng: &mut R,
) -> Position {
    let mut out = v;
    for &other in neighbors {
        let away = own - other;
        let dist = away.norm();
        if dist >= params.zone_radii[2] {
            continue;
        }
        let gain = if dist < params.zone_radii[0] {
            params.zone_gains[0]
        } else if dist < params.zone_radii[1] {
            params.zone_gains[1]
        } else {
            params.zone_gains[2]
        };
        let dir = if dist > 0.0 {
            away / dist
        } else {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            Position::new(angle.cos(), angle.sin())
        };
        out += gain * dir;
    }
    out
}

/// Speed cap and deadband: rescale to `v_max` above the cap, zero below
/// `v_min`, unchanged in between.
pub fn saturate_deadband(v: Position, params: &ControlParams) -> Position {
    let speed = v.norm();
    if speed > params.v_max {
        v * (params.v_max / speed)
    } else if speed < params.v_min {
        Position::new(0.0, 0.0)
    } else {
        v
    }
}

/// Numerical rank of the stacked Jacobian `J(s)` (embedding length x 2N)
/// assembled from per-robot `phi` Jacobian blocks: singular values above
/// `tol * sigma_max` count. Good equilibria of the gradient flow are stable
/// when this is full row rank; bad equilibria require rank loss.
pub fn stacked_jacobian_rank(
    basis: &MomentBasis,
    positions: &[Position],
    tol: f64,
) -> Result<usize, MomentsError> {
    let m = basis.embedding_len();
    let n = positions.len();
    let mut j = DMatrix::zeros(m, 2 * n);
    for (i, &s) in positions.iter().enumerate() {
        let block = phi_jacobian(basis, s)?;
        for (row, cols) in block.iter().enumerate() {
            j[(row, 2 * i)] = cols[0];
            j[(row, 2 * i + 1)] = cols[1];
        }
    }
    let svd = j.svd(false, false);
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return Ok(0);
    }
    Ok(svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol * sigma_max)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{moments_of_points, phi_jacobian, BasisKind};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gain_schedule_first_order_is_identity() {
        let basis = MomentBasis::legendre(1).unwrap();
        let g = gain_matrix(&basis, 1.7);
        assert_eq!(g.diag(), &[1.0, 1.0]);
    }

    #[test]
    fn gain_schedule_second_order_legendre() {
        let basis = MomentBasis::legendre(2).unwrap();
        let g = gain_matrix(&basis, 1.7);
        let high = 2.0f64.powf(-1.7);
        assert_eq!(g.diag().len(), 5);
        assert_eq!(&g.diag()[..2], &[1.0, 1.0]);
        for &v in &g.diag()[2..] {
            assert_relative_eq!(v, high, max_relative = 1e-15);
            assert_relative_eq!(v, 0.3078, max_relative = 1e-3);
        }
    }

    #[test]
    fn zero_beta_gives_identity() {
        let basis = MomentBasis::pseudo_zernike(2).unwrap();
        let g = gain_matrix(&basis, 0.0);
        assert!(g.diag().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn pzm_parts_share_gain_entries() {
        let basis = MomentBasis::pseudo_zernike(3).unwrap();
        let g = gain_matrix(&basis, 1.7);
        for (c, gain) in basis.components().iter().zip(g.diag()) {
            assert_eq!(*gain, f64::from(c.p).powf(-1.7));
        }
    }

    #[test]
    fn gains_non_increasing_with_degree() {
        for kind in [BasisKind::Legendre, BasisKind::PseudoZernike] {
            let basis = MomentBasis::new(kind, 6).unwrap();
            let g = gain_matrix(&basis, 1.7);
            let mut last_degree = 0;
            let mut last_gain = f64::INFINITY;
            for (c, gain) in basis.components().iter().zip(g.diag()) {
                let d = c.degree(kind);
                if d > last_degree {
                    assert!(*gain < last_gain, "gain should drop with degree");
                    last_degree = d;
                    last_gain = *gain;
                } else {
                    assert_eq!(*gain, last_gain, "same degree must share gain");
                }
            }
        }
    }

    #[test]
    fn zero_error_commands_zero_velocity() {
        let basis = MomentBasis::legendre(3).unwrap();
        let jac = phi_jacobian(&basis, Position::new(0.2, 0.4)).unwrap();
        let g = gain_matrix(&basis, 1.7);
        let m = vec![0.3; basis.embedding_len()];
        let v = control_velocity(&jac, &m, &m, &g).unwrap();
        assert_eq!(v, Position::new(0.0, 0.0));
    }

    #[test]
    fn first_order_velocity_is_scaled_error() {
        let basis = MomentBasis::legendre(1).unwrap();
        let jac = phi_jacobian(&basis, Position::new(0.1, -0.7)).unwrap();
        let g = gain_matrix(&basis, 0.0); // identity gains
        let mhat = vec![0.4, -0.2];
        let mstar = vec![0.1, 0.3];
        let v = control_velocity(&jac, &mhat, &mstar, &g).unwrap();
        // Jacobian rows are (3/4) I, so v = -(3/4) (mhat - mstar).
        assert_relative_eq!(v.x, -0.75 * (mhat[0] - mstar[0]), max_relative = 1e-15);
        assert_relative_eq!(v.y, -0.75 * (mhat[1] - mstar[1]), max_relative = 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let basis = MomentBasis::legendre(2).unwrap();
        let jac = phi_jacobian(&basis, Position::new(0.0, 0.0)).unwrap();
        let g = gain_matrix(&basis, 1.7);
        let short = vec![0.0; 3];
        let full = vec![0.0; 5];
        assert!(control_velocity(&jac, &short, &full, &g).is_err());
    }

    /// One Euler step along the commanded velocity decreases the quadratic
    /// cost when the estimate is exact (descent direction check).
    #[test]
    fn single_robot_step_descends_cost() {
        let basis = MomentBasis::legendre(2).unwrap();
        let gains = gain_matrix(&basis, 1.7);
        let target = moments_of_points(&basis, &[Position::new(0.4, -0.1)]).unwrap();
        let mut s = Position::new(-0.3, 0.5);
        let cost = |s: Position| -> f64 {
            let m = moments_of_points(&basis, &[s]).unwrap();
            m.values()
                .iter()
                .zip(target.values())
                .zip(gains.diag())
                .map(|((a, b), g)| 0.5 * g * (a - b) * (a - b))
                .sum()
        };
        let c0 = cost(s);
        let m = moments_of_points(&basis, &[s]).unwrap();
        let jac = phi_jacobian(&basis, s).unwrap();
        let v = control_velocity(&jac, m.values(), target.values(), &gains).unwrap();
        s += 0.01 * v;
        assert!(cost(s) < c0, "cost should decrease: {} -> {}", c0, cost(s));
    }

    #[test]
    fn collision_filter_ignores_distant_neighbors() {
        let params = ControlParams::defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = Position::new(0.004, -0.002);
        let out = collision_filter(
            v,
            Position::new(0.0, 0.0),
            &[Position::new(0.5, 0.5)],
            &params,
            &mut rng,
        );
        assert_eq!(out, v);
    }

    #[test]
    fn inner_zone_neighbor_repels_at_full_gain() {
        let params = ControlParams::defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Neighbor due east inside the inner zone, zero command.
        let out = collision_filter(
            Position::new(0.0, 0.0),
            Position::new(0.0, 0.0),
            &[Position::new(0.03, 0.0)],
            &params,
            &mut rng,
        );
        assert_relative_eq!(out.x, -params.zone_gains[0], max_relative = 1e-15);
        assert_eq!(out.y, 0.0);
    }

    #[test]
    fn symmetric_neighbors_cancel() {
        let params = ControlParams::defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = collision_filter(
            Position::new(0.0, 0.0),
            Position::new(0.0, 0.0),
            &[Position::new(0.05, 0.0), Position::new(-0.05, 0.0)],
            &params,
            &mut rng,
        );
        assert!(out.norm() < 1e-15);
    }

    #[test]
    fn coincident_neighbor_repels_in_unit_direction() {
        let params = ControlParams::defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let own = Position::new(0.2, 0.2);
        let out = collision_filter(Position::new(0.0, 0.0), own, &[own], &params, &mut rng);
        assert_relative_eq!(out.norm(), params.zone_gains[0], max_relative = 1e-12);
    }

    #[test]
    fn saturation_and_deadband() {
        let params = ControlParams::defaults();
        // Mid-range speed unchanged.
        let v = Position::new(params.v_max / 2.0, 0.0);
        assert_eq!(saturate_deadband(v, &params), v);
        // Too fast: rescaled to v_max, same direction.
        let v = Position::new(0.0, 3.0 * params.v_max);
        let out = saturate_deadband(v, &params);
        assert_relative_eq!(out.norm(), params.v_max, max_relative = 1e-15);
        assert!(out.y > 0.0 && out.x == 0.0);
        // Below deadband: zeroed.
        let v = Position::new(params.v_min / 2.0, 0.0);
        assert_eq!(saturate_deadband(v, &params), Position::new(0.0, 0.0));
    }

    #[test]
    fn params_validation() {
        let mut p = ControlParams::defaults();
        assert!(p.validate().is_ok());
        p.v_min = p.v_max;
        assert!(p.validate().is_err());
        p = ControlParams::defaults();
        p.zone_radii = [0.08, 0.05, 0.12];
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_robot_first_order_rank_is_two() {
        let basis = MomentBasis::legendre(1).unwrap();
        let rank = stacked_jacobian_rank(&basis, &[Position::new(0.3, 0.3)], 1e-10).unwrap();
        assert_eq!(rank, 2);
    }

    #[test]
    fn coincident_robots_duplicate_columns() {
        let basis = MomentBasis::legendre(1).unwrap();
        let s = Position::new(0.1, -0.2);
        let rank = stacked_jacobian_rank(&basis, &[s, s, s], 1e-10).unwrap();
        assert_eq!(rank, 2);
    }

    #[test]
    fn rank_bounded_by_column_count() {
        // 2N < embedding length forces rank <= 2N.
        let basis = MomentBasis::legendre(4).unwrap(); // 14 components
        let positions = [Position::new(0.2, 0.3), Position::new(-0.4, 0.1)];
        let rank = stacked_jacobian_rank(&basis, &positions, 1e-10).unwrap();
        assert!(rank <= 4);
    }

    /// Robot-wise control equals the stacked product -J^T Gamma e.
    #[test]
    fn stacked_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let basis = MomentBasis::legendre(3).unwrap();
        let gains = gain_matrix(&basis, 1.7);
        let positions: Vec<Position> = (0..6)
            .map(|_| Position::new(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)))
            .collect();
        let m = basis.embedding_len();
        let e: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let zeros = vec![0.0; m];

        // Stacked form via explicit matrices.
        let mut j = DMatrix::zeros(m, 2 * positions.len());
        for (i, &s) in positions.iter().enumerate() {
            let block = phi_jacobian(&basis, s).unwrap();
            for (row, cols) in block.iter().enumerate() {
                j[(row, 2 * i)] = cols[0];
                j[(row, 2 * i + 1)] = cols[1];
            }
        }
        let gamma = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(gains.diag().to_vec()));
        let ev = nalgebra::DVector::from_vec(e.clone());
        let stacked = -(j.transpose() * gamma * ev);

        for (i, &s) in positions.iter().enumerate() {
            let jac = phi_jacobian(&basis, s).unwrap();
            let v = control_velocity(&jac, &e, &zeros, &gains).unwrap();
            assert!((v.x - stacked[2 * i]).abs() < 1e-12);
            assert!((v.y - stacked[2 * i + 1]).abs() < 1e-12);
        }
    }
}
