//! Numerical verification engine for Riemannian submersions from
//! 3-dimensional homogeneous spaces to surfaces.
//!
//! The engine computes frames, bracket (integrability) data and curvature
//! from first principles with order-3 Taylor jets, evaluates the
//! biharmonicity criterion pointwise, and issues sample-based verdicts
//! (harmonic / proper biharmonic candidate / not biharmonic) for a catalog of
//! canonical submersions and for user-supplied specs.
//!
//! Layering, bottom up:
//! - [`jet`]: forward-mode AD scalars (order 3 in 3 variables);
//! - [`expr`]: closed-form expression ASTs with symbolic derivatives;
//! - [`geometry`]: metric-agnostic kernel (inner products, Lie brackets,
//!   Koszul connection, curvature tensor, frame Laplacian);
//! - [`bcv`]: the two-parameter homogeneous family `M_{m,l}` with closed-form
//!   connection/curvature oracles and model classification;
//! - [`submersion`]: candidate submersions, vertical/horizontal frames,
//!   integrability data, tension, base curvature;
//! - [`biharmonic`]: the biharmonicity residuals, structural identity checks
//!   and verdicts;
//! - [`catalog`]: named example submersions with closed-form oracle data;
//! - [`report`] and [`cli`]: JSON/CSV emission and the batch front end.

pub mod bcv;
pub mod biharmonic;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod report;
pub mod sample;
pub mod submersion;

pub use error::{EngineError, Result};
pub use geometry::Point3;
