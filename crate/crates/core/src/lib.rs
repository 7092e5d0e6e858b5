//! Numerical toolkit for the calculus of weak Poincare inequalities and weak
//! integrated Gamma-2 criteria.
//!
//! The library has three layers:
//!
//! * **Rate functions** ([`ratefn`]): the decreasing functions `beta(s)` and
//!   decay rates `xi(t)` that quantify weak functional inequalities, together
//!   with the transform calculus between them (weak inequality -> semigroup
//!   decay rate, decay rate -> weak inequality, iteration improvements, Nash
//!   exponent improvements).
//! * **Measure models** ([`measure`]): one-dimensional grid measures built
//!   from potentials (exact quadrature), and n-dimensional product-perturbed,
//!   radial and hypercube models (Monte Carlo + low-dimensional quadrature).
//! * **Verification and bounds** ([`spectral`], [`logconcave`],
//!   [`structured`], [`superpoincare`]): an exactly diagonalized 1D diffusion
//!   generator that serves as the ground-truth engine for every claimed
//!   inequality, and the explicit Poincare-constant pipelines for log-concave,
//!   product-perturbed and radial measures, plus the super-Poincare layer.
//!
//! Everything is deterministic: samplers are seeded, parallel sweeps assemble
//! their results in index order, and serialized outputs are byte-stable.

pub mod error;
pub mod ext;
pub mod num;
pub mod ratefn;
pub mod measure;
pub mod spectral;
pub mod report;
pub mod logconcave;
pub mod structured;
pub mod superpoincare;
pub mod cli;

pub use error::Error;
pub use ext::ExtReal;
pub use ratefn::RateFunction;
