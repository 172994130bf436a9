//! First eigenvalue of the p-Laplacian on discretized spheres, circles and
//! intervals under conformal changes of the base metric.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds simplicial models (interval, circle, icosphere,
//!   hemisphere) and provides vertex-lumped quadrature and piecewise-linear
//!   gradients.
//! * [`conformal`] holds conformal factors `f` for `g̃ = f·g`, the weights
//!   they induce on energies and volumes, and the equatorial band families.
//! * [`psolve`] minimizes the p-Rayleigh quotient (closed, Dirichlet and
//!   Neumann), plus the shift root-finders, a shooting oracle for 1-D
//!   problems and the radial symmetrization diagnostics.
//! * [`mobius`] implements the dilation subgroup of the conformal group of
//!   the sphere, moment balancing and the coordinate energy bound.
//! * [`bounds`] evaluates the closed-form upper bounds.


pub mod bounds;
pub mod conformal;
pub mod error;
pub mod io;
pub mod mesh;
pub mod mobius;

pub mod psolve;
pub(crate) mod sparse;

pub use conformal::ConformalFactor;
pub use error::{Error, Result};
pub use mesh::{DiscreteManifold, MeshKind, ScalarField, Submesh};
pub use psolve::{SolveOptions, SpectralResult};
