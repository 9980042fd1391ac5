//! Harmonic maps into the space of toric Kähler metrics and their Bergman
//! approximants.
//!
//! A toric Kähler metric on a polarized toric manifold with Delzant polytope
//! `P` is described either by a convex Kähler potential `φ(ρ)` on `R^m` or by
//! its Legendre dual, the symplectic potential `u(x)` on `P`. Harmonic maps of
//! a parameter domain `N` into the space of such metrics become harmonic
//! functions `y ↦ u(y, x)` after the Legendre transform, which is what makes
//! them computable. Their level-`k` Bergman approximants are log-sum-exp
//! potentials whose exponents are harmonic extensions of log norming
//! constants.

pub mod bergman;
pub mod dirichlet;
pub mod flows;
pub mod grid;
pub mod harness;
pub mod lse;
pub mod polytope;
pub mod potentials;
pub mod quadrature;

pub use polytope::{DelzantPolytope, Facet, LatticeSet};
pub use potentials::{KahlerPotential, ScalarField, SymplecticPotential};
