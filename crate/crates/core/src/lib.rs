//! Boundary charts, face lattice and numerical axiom checks for the
//! hd-compactification of `SL(n, ℝ)`.
//!
//! * [`root_datum`]: type `A_{n-1}` root combinatorics.
//! * [`decompositions`]: polar, Cartan, Iwasawa and horospherical factorizations.
//! * [`boundary_chart`]: chart coordinates near the boundary, their inverse map,
//!   inversion and limits of one-parameter curves.
//! * [`face_lattice`]: boundary faces, parabolics and fiber-space membership.
//! * [`verification`]: finite-difference certification of the compactification's
//!   defining properties and of the Haar-measure exponent.
//! * [`documents`]: JSON documents exchanged by the command-line tool.

pub mod boundary_chart;
pub mod decompositions;
pub mod documents;
pub mod error;
pub mod face_lattice;
pub mod linalg;
pub mod root_datum;
pub mod sampling;
pub mod verification;

pub use error::{Error, Result};
