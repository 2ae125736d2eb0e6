//! Exact quantum solution of the n-dimensional Coulomb problem with
//! inverse-square barriers kappa_i(kappa_i+1)/(2 x_i^2) on the positive
//! hyper-octant, plus the numerical machinery to certify it:
//!
//! - [`specfun`]: complex log-gamma, Laguerre/Jacobi/Legendre polynomials,
//!   spherical harmonics;
//! - [`qnum`]: model parameters, quantum-number branching rules and state
//!   enumeration;
//! - [`bound`]: closed-form bound energies and normalized wavefunctions;
//! - [`scatter`]: partial-wave S-matrix elements and scattering amplitudes
//!   (partial-wave sum, sign-sum closed form, Coulomb reference, n-fold
//!   integral representation);
//! - [`operators`]: grid application of the Hamiltonian and the 2n-1
//!   conserved operators with commutator-residual measurement;
//! - [`oracle`]: independent brute-force ground truth (radial Numerov
//!   shooting, asymptotic phase fits, 2-D octant eigensolver).

pub mod bound;
pub mod error;
pub mod operators;
pub mod oracle;
pub mod qnum;
pub mod quadrature;
pub mod scatter;
pub mod specfun;

pub use error::{Error, Result, Violation};
pub use qnum::{BoundLabels, ModelParams};

/// Complex value type used throughout the crate.
pub type ComplexValue = num_complex::Complex64;
