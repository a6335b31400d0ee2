//! File formats: PGM images and the project's CSV layouts.

pub mod csv;
pub mod pgm;
