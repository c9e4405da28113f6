//! Dirichlet spectra of rotationally invariant geodesic balls.
//!
//! A ball `B(o, r)` in a model manifold with warping function `h` reduces every
//! radial question to a weighted one-dimensional problem on `[0, r]` with
//! measure `dμ = ω_m h^{m-1}(t) dt`. This crate discretizes that problem on
//! uniform Simpson grids and provides:
//!
//! * [`model`]: warping functions, volume `V`, boundary area `S`, the
//!   isoperimetric integral `∫ V/S` and a stochastic-completeness diagnostic;
//! * [`quadrature`]: radial grids, weighted inner products, cumulative integrals;
//! * [`green`]: the radial Green operator `T`, the Euclidean `ν_l` kernels, and
//!   their trace and Hilbert–Schmidt functionals;
//! * [`eigensolve`]: iterated-Green power iteration with deflation;
//! * [`series`]: closed-form spectral series and their numerical verification;
//! * [`momentum`]: the exit-moment hierarchy `φ_k = k! G^k(1)`;
//! * [`bounds`]: two-sided bounds on `Σ 1/λ_k²` for minimal submanifolds;
//! * [`cli`]: the `geoball` command-line front end.

pub mod bounds;
pub mod cli;
pub mod eigensolve;
pub mod error;
pub mod green;
pub mod model;
pub mod momentum;
pub mod quadrature;
pub mod series;

pub use error::{Error, Result};
pub use model::{BallGeometry, Family, WarpingFunction};
pub use quadrature::{RadialFunction, RadialGrid};
