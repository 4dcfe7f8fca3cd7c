//! Non-local heat-kernel expansion toolkit.
//!
//! This crate evaluates the second-order (curvature-squared) expansion of the
//! trace of the heat kernel of a Laplace-type operator `Δ = -D² + U`:
//!
//! * closed-form **form factors** built from the basic profile
//!   `f(x) = ∫₀¹ exp(-x ξ(1-ξ)) dξ`, with small-`x` series, large-`x`
//!   asymptotics and quadrature branches ([`form_factors`]);
//! * **basis transformations** between the Ricci/scalar, Weyl and
//!   endomorphism-shifted bases ([`basis_transform`]);
//! * the six-projector algebra for symmetric rank-2 fluctuations
//!   ([`projector_algebra`]);
//! * an independent re-derivation of every form factor from momentum-space
//!   **diagrammatics** — propagator chains, vertices, Gaussian moments,
//!   parametric integrals ([`diagram_engine`]);
//! * a **resolvent/contour** re-derivation of the curvature form factor
//!   ([`resolvent`]);
//! * evaluation of the expansion for concrete periodic field data and general
//!   spectral traces via Laplace transform ([`trace_evaluator`]);
//! * a brute-force **lattice oracle** — dense eigendecomposition of the
//!   discretized operator — used as ground truth ([`lattice_oracle`]).
//!
//! All numerical results are deterministic: quadrature, eigensolves and mode
//! sums are evaluated in fixed order.

pub mod basis_transform;
pub mod diagram_engine;
pub mod error;
pub mod fields;
pub mod form_factors;
pub mod lattice_oracle;
pub mod projector_algebra;
pub mod quad;
pub mod resolvent;
pub mod trace_evaluator;

pub use error::{Error, Result};
pub use fields::FieldData;
pub use form_factors::{Constants, EvalConfig, FormFactorKind, SeriesExpansion, SeriesKind};
pub use projector_algebra::{Momentum, ProjectorCoefficients, ProjectorName, SymPairTensor};
pub use trace_evaluator::{SpectralFamily, SpectralFunction, TraceExpansionResult};
