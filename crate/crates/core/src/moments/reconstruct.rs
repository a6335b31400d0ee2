//! Truncated-series reconstruction and the mean-square reconstruction error.

use crate::error::MomentsError;

use super::legendre;
use super::{BasisKind, DensityGrid, MomentBasis, MomentVector, Part};

/// Points per axis of the fixed MSRE evaluation grid.
pub const MSRE_GRID_POINTS: usize = 41;
/// Spacing of the MSRE evaluation grid over `[-1, 1]`.
pub const MSRE_GRID_STEP: f64 = 0.05;

/// Writes the reconstruction basis row at `(x, y)` into `out`: the value of
/// the truncated series is `dot(row, moment values)`.
///
/// For Legendre moments the entry for `(p, q)` is `P_p(x) P_q(y)`. For
/// pseudo-Zernike moments the series is completed with the conjugate terms
/// so the reconstruction is real: the `q = 0` entry is `S_p0(r)`, and each
/// `q > 0` moment contributes `2 S_pq(r) cos(q theta)` against its real part
/// and `-2 S_pq(r) sin(q theta)` against its imaginary part. Points outside
/// the unit disk produce an all-zero row.
fn basis_row_into(basis: &MomentBasis, x: f64, y: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), basis.embedding_len());
    match basis.kind() {
        BasisKind::Legendre => {
            let px = legendre::eval_all(basis.order(), x);
            let py = legendre::eval_all(basis.order(), y);
            for (o, c) in out.iter_mut().zip(basis.components()) {
                *o = px[c.p as usize] * py[c.q as usize];
            }
        }
        BasisKind::PseudoZernike => {
            let r = x.hypot(y);
            if r > 1.0 {
                out.fill(0.0);
                return;
            }
            let theta = y.atan2(x);
            let radial = basis.radial();
            for (o, c) in out.iter_mut().zip(basis.components()) {
                let s_pq = radial.eval(c.p, c.q, r);
                let angle = f64::from(c.q) * theta;
                *o = match (c.part, c.q) {
                    (Part::Re, 0) => s_pq,
                    (Part::Re, _) => 2.0 * s_pq * angle.cos(),
                    (Part::Im, _) => -2.0 * s_pq * angle.sin(),
                };
            }
        }
    }
}

/// Evaluates the truncated reconstruction series of `m` at a single point.
pub fn eval_reconstruction(m: &MomentVector, x: f64, y: f64) -> f64 {
    let mut row = vec![0.0; m.basis().embedding_len()];
    basis_row_into(m.basis(), x, y, &mut row);
    dot(&row, m.values())
}

/// Reconstructs a density field from its moment vector on an
/// `rows x cols` grid of cell centers. PZM cells outside the unit disk
/// are set to zero. Values are signed; a truncated series routinely dips
/// below zero.
pub fn reconstruct(
    m: &MomentVector,
    rows: usize,
    cols: usize,
) -> Result<DensityGrid, MomentsError> {
    if rows < 2 || cols < 2 {
        return Err(MomentsError::GridTooSmall { rows, cols });
    }
    let mut row = vec![0.0; m.basis().embedding_len()];
    let mut grid = DensityGrid::zeros(rows, cols);
    for r in 0..rows {
        let y = grid.y_at(r);
        for c in 0..cols {
            basis_row_into(m.basis(), grid.x_at(c), y, &mut row);
            grid.set(r, c, dot(&row, m.values()));
        }
    }
    Ok(grid)
}

/// Precomputed reconstruction rows on the fixed 41 x 41 MSRE grid.
///
/// Construction evaluates the basis at every grid point once; each MSRE
/// query is then two matrix-vector products. For PZM bases, points outside
/// the unit circle are excluded from the grid.
#[derive(Debug, Clone)]
pub struct MsreEvaluator {
    basis: MomentBasis,
    rows: Vec<Vec<f64>>,
}

impl MsreEvaluator {
    pub fn new(basis: &MomentBasis) -> Self {
        let pz = basis.kind() == BasisKind::PseudoZernike;
        let mut rows = Vec::new();
        for i in 0..MSRE_GRID_POINTS {
            let x = -1.0 + MSRE_GRID_STEP * i as f64;
            for j in 0..MSRE_GRID_POINTS {
                let y = -1.0 + MSRE_GRID_STEP * j as f64;
                if pz && x.hypot(y) > 1.0 {
                    continue;
                }
                let mut row = vec![0.0; basis.embedding_len()];
                basis_row_into(basis, x, y, &mut row);
                rows.push(row);
            }
        }
        Self { basis: basis.clone(), rows }
    }

    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    /// MSRE between two raw embedding vectors (`desired` is the denominator).
    pub fn msre_values(&self, values: &[f64], desired: &[f64]) -> Result<f64, MomentsError> {
        let mut num = 0.0;
        let mut den = 0.0;
        for row in &self.rows {
            let f1 = dot(row, values);
            let f2 = dot(row, desired);
            num += (f1 - f2) * (f1 - f2);
            den += f2 * f2;
        }
        if den == 0.0 {
            return Err(MomentsError::ZeroDenominator);
        }
        Ok(num / den)
    }

    pub fn msre(&self, m: &MomentVector, desired: &MomentVector) -> Result<f64, MomentsError> {
        self.basis.check_compatible(m.basis())?;
        self.basis.check_compatible(desired.basis())?;
        self.msre_values(m.values(), desired.values())
    }
}

/// Mean-square reconstruction error between two moment vectors of the same
/// basis, evaluated on the fixed 41 x 41 grid. `desired` supplies the
/// denominator and must not reconstruct to the zero field.
pub fn msre(m: &MomentVector, desired: &MomentVector) -> Result<f64, MomentsError> {
    m.basis().check_compatible(desired.basis())?;
    MsreEvaluator::new(m.basis()).msre(m, desired)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
