//! Exact computation of Khovanov and Lee homology over Z[1/2] for links and
//! colored framed links, with the cobordism-induced maps between colored
//! complexes and the slice-genus bounds that come out of the Lee theory.
//!
//! Everything is exact: coefficients live in the subring of rationals with
//! power-of-two denominators, so no floating point and no modular shortcuts.

pub mod complex;
pub mod diagram;
pub mod embed;
pub mod error;
pub mod filtration;
pub mod frobenius;
pub mod homology;
pub mod khovanov;
pub mod homotopy;
pub mod laurent;
pub mod matrix;
pub mod movie_maps;
pub mod movies;
pub mod rasmussen;
pub mod reduce;
pub mod ring;
pub mod snf;
