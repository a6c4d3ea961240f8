//! Numerical toolkit for Hilbert geometries of bounded convex domains.
//!
//! The crate is organized bottom-up: [`body`] describes convex domains and
//! answers chord queries, [`metric`] builds the Hilbert distance and Finsler
//! norm on top of chords, [`john`] computes maximal-volume inscribed
//! ellipsoids, and [`measure`] integrates with respect to the Hilbert
//! (Busemann) volume. The remaining modules implement the experiments on
//! local normalization, spectra, convergence of domains and Gromov
//! hyperbolicity.

pub mod body;
pub mod convergence;
pub mod directions;
pub mod error;
pub mod hyperbolicity;
pub mod john;
pub mod local_geometry;
pub mod measure;
pub mod metric;
pub mod numeric;
pub mod spectrum;

pub use body::{BodyKind, BodySpec, Chord, ChordDetail, ConvexBody};
pub use error::{GeometryError, Result};

/// A point of `R^n`.
pub type Point = nalgebra::DVector<f64>;
/// A tangent vector.
pub type Vector = nalgebra::DVector<f64>;

/// Library version reported by the command-line tool.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
