//! Numerical laboratory for a one-dimensional moving-boundary model of
//! biofilm growth under substrate limitation.
//!
//! A film occupying `0 ≤ z ≤ h(t)` grows on a substratum and consumes a
//! substrate that diffuses through the film and through a thin liquid layer
//! of thickness `L` separating it from a well-mixed bulk at concentration
//! `c*`. Reducing the liquid layer to a quasi-static flux balance leaves a
//! Robin condition at the moving interface, and the model becomes
//!
//! ```text
//! ε c_t = κ c_zz − r(c)                       0 < z < h(t)
//! c_z(t, 0) = 0,   c + (Lκ/κ_L) c_z = c*      at z = h(t)
//! h'(t) = ∫₀ʰ g(r(c(t, z))) dz
//! ```
//!
//! with a consumption law `r` (increasing, `r(0) = 0`) and a growth law `g`
//! (Lipschitz, typically affine `g(s) = α(s − b)`). Rescaling to the fixed
//! domain `y = z/h(t)` and working with the deficit `v = c* − c` gives the
//! form all solvers in this crate operate on.
//!
//! Modules:
//!
//! - [`model`] — parameters, consumption/growth laws, grid profiles,
//!   assumption validation.
//! - [`bvp`] — the quasi-steady substrate profile at fixed height: a
//!   fixed-point solve of the integral form of `κ u_yy = h² r(u)` with the
//!   Robin/Neumann boundary pair, plus the growth functional `f(h)`.
//! - [`quasisteady`] — height dynamics `h' = f(h)` under the quasi-steady
//!   reduction, and equilibrium location by root-finding on `f`.
//! - [`shooting`] — equilibria of the free-boundary problem by shooting from
//!   the substratum, with a sensitivity system and a uniqueness certificate.
//! - [`evolution`] — the full time-dependent transformed system, advanced by
//!   an IMEX scheme (implicit diffusion, explicit advection/reaction).
//! - [`verify`] — scripted checks that reproduce the model's qualitative
//!   regimes (small/large height, extinction, convergence, oscillation).
//! - [`cli`] — configuration, CSV output, and the subcommand front end used
//!   by the `biofilm1d` binary.
//!
//! The lower-level building blocks ([`numerics`], [`roots`], [`ode`]) are
//! deliberately small and deterministic: fixed kernels, no threading, no
//! randomness, so identical inputs give bit-identical outputs.

pub mod bvp;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod model;
pub mod numerics;
pub mod ode;
pub mod quasisteady;
pub mod roots;
pub mod shooting;
pub mod verify;

pub use error::{Error, Result};
pub use model::{GrowthModel, ModelBundle, PhysicalParams, Profile, RateModel};
