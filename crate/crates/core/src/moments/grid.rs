//! Planar density grids on the `[-1, 1]^2` domain.

use crate::error::MomentsError;

/// A rectangular grid of cell values mapped onto `[-1, 1]^2`.
///
/// Values are stored row-major with row 0 at the top of the image
/// (`y` close to 1), matching PGM orientation. Cell centers follow the
/// pixel-center convention: column `c` sits at `x = -1 + (2c+1)/C` and
/// row `r` at `y = 1 - (2r+1)/R` (0-based indices).
///
/// When a grid is used as a mass target the values must be nonnegative
/// with positive total; reconstructions may carry signed values.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "value buffer shape mismatch");
        Self { rows, cols, values }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    /// Builds a grid by sampling `f(x, y)` at every cell center.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let y = y_at(rows, r);
            for c in 0..cols {
                values.push(f(x_at(cols, c), y));
            }
        }
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.cols + col] = value;
    }

    /// x coordinate of a column center.
    pub fn x_at(&self, col: usize) -> f64 {
        x_at(self.cols, col)
    }

    /// y coordinate of a row center.
    pub fn y_at(&self, row: usize) -> f64 {
        y_at(self.rows, row)
    }

    /// Cell area in domain units.
    pub fn cell_area(&self) -> f64 {
        (2.0 / self.cols as f64) * (2.0 / self.rows as f64)
    }

    /// Iterates `(row, col, x, y, value)` over all cells.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64, f64, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let y = self.y_at(r);
            (0..self.cols).map(move |c| (r, c, self.x_at(c), y, self.get(r, c)))
        })
    }

    /// Validates the grid as a mass target: nonnegative everywhere.
    pub fn validate_masses(&self) -> Result<(), MomentsError> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if v < 0.0 {
                    return Err(MomentsError::NegativeMass { row: r, col: c, value: v });
                }
            }
        }
        Ok(())
    }
}

fn x_at(cols: usize, col: usize) -> f64 {
    -1.0 + (2.0 * col as f64 + 1.0) / cols as f64
}

fn y_at(rows: usize, row: usize) -> f64 {
    1.0 - (2.0 * row as f64 + 1.0) / rows as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centers_follow_pixel_convention() {
        let g = DensityGrid::zeros(4, 5);
        // First column center: -1 + 1/C.
        assert!((g.x_at(0) - (-1.0 + 1.0 / 5.0)).abs() < 1e-15);
        // Last column center: 1 - 1/C.
        assert!((g.x_at(4) - (1.0 - 1.0 / 5.0)).abs() < 1e-15);
        // Row 0 is the top of the image.
        assert!((g.y_at(0) - (1.0 - 1.0 / 4.0)).abs() < 1e-15);
        assert!((g.y_at(3) - (-1.0 + 1.0 / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn negative_mass_detected() {
        let mut g = DensityGrid::zeros(2, 2);
        g.set(1, 0, -0.5);
        assert!(matches!(
            g.validate_masses(),
            Err(MomentsError::NegativeMass { row: 1, col: 0, .. })
        ));
    }

    #[test]
    fn cells_iterator_covers_grid() {
        let g = DensityGrid::from_fn(3, 3, |x, y| x + 2.0 * y);
        let total: f64 = g.cells().map(|(_, _, _, _, v)| v).sum();
        // Odd function over a symmetric grid sums to zero.
        assert!(total.abs() < 1e-12);
        assert_eq!(g.cells().count(), 9);
    }
}
