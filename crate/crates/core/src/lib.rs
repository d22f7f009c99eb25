//! Spectral toolkit for the operator ψ(−Δ) on an interval with zero exterior
//! condition, where ψ is a complete Bernstein function.
//!
//! The toolkit has two independent halves that are meant to be played against
//! each other:
//!
//! * the *asymptotic* side ([`theta`], [`modes`], [`halfline`], [`interval`])
//!   evaluates the phase shift θ_μ, solves the mode equation
//!   `a·μ_n + θ_{μ_n} = nπ/2`, and builds explicit approximate eigenfunctions
//!   on `(−a, a)` together with closed-form residual and norm bounds;
//! * the *variational* side ([`galerkin`]) assembles the quadratic form of
//!   ψ(−Δ) in a zero-extended sine basis and solves the dense symmetric
//!   eigenproblem, giving certified upper approximations of the true
//!   eigenvalues λ_n.
//!
//! Everything is driven by the complete Bernstein function calculus in
//! [`cbf`], backed by the adaptive quadrature in [`quad`].

pub mod cbf;
pub mod error;
pub mod galerkin;
pub mod halfline;
pub mod interval;
pub mod linalg;
pub mod modes;
pub mod quad;
pub mod theta;
pub(crate) mod util;

pub use cbf::{BernsteinSpec, Density, GrowthProbe, LevyTail};
pub use error::{Error, Result};
pub use galerkin::{CompareRow, FormMatrix, RitzSpectrum, TraceCheck};
pub use halfline::{EigenfunctionF, GammaDensity};
pub use interval::{ApproxEigenfunction, NormBounds, ResidualBound};
pub use modes::ModeSolution;
pub use theta::PhaseResult;
