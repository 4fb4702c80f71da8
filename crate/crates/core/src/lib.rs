//! Solver and verifier for time-fractional diffusion-wave equations
//! `∂_t^α (u − u₀ − t u₁) + A(x, t) u = F` with `1 < α ≤ 2` on `(0, 1)`.

pub mod cli;
pub mod exprparse;
pub mod fracode;
pub mod fracops;
pub mod galerkin;
pub mod verify;
