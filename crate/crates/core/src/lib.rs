//! Projections, energies and Fourier spectra of point sets in F_p^n.
//!
//! The crate enumerates subspaces and affine planes of F_p^n, computes coset
//! projections of dense point sets, and checks the counting, energy and
//! spectral bounds that govern how often a projection can be small.

pub mod energy;
pub mod error;
pub mod field;
pub mod fourier;
pub mod pointset;
pub mod projections;
pub mod random_sets;
pub mod subspaces;

pub use error::{Error, Result};
pub use energy::{energy, PlaneFamily};
pub use field::{AmbientSpace, FpVector, PointIndex, Residue};
pub use fourier::{dft, Spectrum};
pub use pointset::{PointSet, PointSetBuilder};
pub use projections::{coset_profile, project, project_onto, CosetProfile, Directions, ProjectionImage};
pub use random_sets::{percolation_sample, PercolationModel, PercolationReport};
pub use subspaces::{coset_of, AffinePlane, GaussCount, Subspace};
