//! Well-posedness diagnostics for split equilibrium problems.
//!
//! A split equilibrium problem asks for `x ∈ C` with `f(x, p) ≥ 0` for all
//! `p ∈ C` such that `y = Ax ∈ Q` satisfies `g(y, q) ≥ 0` for all `q ∈ Q`.
//! This crate samples the approximate solution sets `S(ε)` on grids and
//! measures how they shrink as `ε → 0`.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod expr;
pub mod geometry;
pub mod sep;
