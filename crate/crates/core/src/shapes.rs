//! Canonical target silhouettes used by the bundled scenarios and tests.
//!
//! All shapes are sampled at cell centers on `[-1, 1]^2`. The bunny head is
//! a uniform-density silhouette (head disk plus two tilted ear ellipses);
//! the two-disk target pairs identically sized disks with a 2:1 density
//! ratio, sized to fit inside the unit disk for PZM use.

use crate::moments::DensityGrid;

/// Uniform-density bunny-head silhouette.
pub fn bunny_head(rows: usize, cols: usize) -> DensityGrid {
    DensityGrid::from_fn(rows, cols, |x, y| {
        if in_bunny_head(x, y) {
            1.0
        } else {
            0.0
        }
    })
}

fn in_bunny_head(x: f64, y: f64) -> bool {
    // Head.
    if (x / 0.46).powi(2) + ((y + 0.12) / 0.42).powi(2) <= 1.0 {
        return true;
    }
    // Ears: tilted ellipses, mirrored about the y axis.
    in_ear(x, y, -0.21, 12f64.to_radians()) || in_ear(x, y, 0.21, -12f64.to_radians())
}

fn in_ear(x: f64, y: f64, cx: f64, tilt: f64) -> bool {
    let (dx, dy) = (x - cx, y - 0.42);
    let u = dx * tilt.cos() + dy * tilt.sin();
    let w = -dx * tilt.sin() + dy * tilt.cos();
    (u / 0.115).powi(2) + (w / 0.34).powi(2) <= 1.0
}

/// Two identically sized disks; the left one carries twice the density of
/// the right one. Fits inside the unit disk.
pub fn two_disks(rows: usize, cols: usize) -> DensityGrid {
    DensityGrid::from_fn(rows, cols, |x, y| {
        if (x - TWO_DISKS_DENSE_CENTER.0).hypot(y - TWO_DISKS_DENSE_CENTER.1) <= TWO_DISKS_RADIUS {
            2.0
        } else if (x - TWO_DISKS_LIGHT_CENTER.0).hypot(y - TWO_DISKS_LIGHT_CENTER.1)
            <= TWO_DISKS_RADIUS
        {
            1.0
        } else {
            0.0
        }
    })
}

/// Center of the denser disk of [`two_disks`].
pub const TWO_DISKS_DENSE_CENTER: (f64, f64) = (-0.45, 0.0);
/// Center of the lighter disk of [`two_disks`].
pub const TWO_DISKS_LIGHT_CENTER: (f64, f64) = (0.45, 0.0);
/// Radius of both disks of [`two_disks`].
pub const TWO_DISKS_RADIUS: f64 = 0.3;

/// Block-letter "N": two vertical bars joined by a diagonal stroke.
pub fn letter_n(rows: usize, cols: usize) -> DensityGrid {
    DensityGrid::from_fn(rows, cols, |x, y| {
        let in_bar = (-0.55..=-0.35).contains(&x) || (0.35..=0.55).contains(&x);
        let in_height = (-0.6..=0.6).contains(&y);
        // Diagonal from top-left bar to bottom-right bar.
        let t = (0.6 - y) / 1.2;
        let diag_x = -0.45 + 0.9 * t;
        let in_diag = in_height && (x - diag_x).abs() <= 0.11;
        if in_height && (in_bar || in_diag) {
            1.0
        } else {
            0.0
        }
    })
}
