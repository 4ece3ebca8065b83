//! Credibility factors for dynamic random-effects ratemaking models.
//!
//! The crate computes experience-rating premiums of the form
//! `Prem = α̂_0·λ_{T+1} + Σ_t α̂_t·Y_t` for longitudinal claims whose
//! heterogeneity follows a stationary positive process, and provides the
//! machinery around them:
//!
//! - [`linalg`] — the small dense/tridiagonal solvers the closed forms need;
//! - [`processes`] — seeded simulators for the latent risk processes
//!   (BGAR(1), ARG(1), GAR(1), heterogeneous INAR(1)) and claim panels;
//! - [`credibility`] — covariance builders, credibility factors, closed
//!   forms, and the regularity/isotonicity checks;
//! - [`premiums`] — the competing premium rules (naive, static, proposed,
//!   exact-by-particle-filter, true) and the evaluation harness;
//! - [`glm`] — a Poisson log-link GLM fitter for the a-priori means.

pub mod credibility;
pub mod error;
pub mod glm;
pub mod linalg;
pub mod premiums;
pub mod processes;

pub use error::{Error, Result};
