//! Numerical invariants of paths and loops of selfadjoint operators, and of
//! parametrized linear Hamiltonian systems with homoclinic boundary
//! conditions.
//!
//! The crate computes, at desk scale:
//!
//! - the Leray-Schauder degree of linear isomorphisms (the sign `(-1)^m` with
//!   `m` the total algebraic multiplicity of negative real eigenvalues),
//! - the parity of sampled paths and loops of symmetric matrices, together
//!   with an independent spectral-flow-mod-2 oracle,
//! - an explicit truncated loop of symmetric operators built from diagonal
//!   index projections and a signed cyclic shift, exposing exactly where
//!   finite-dimensional truncation destroys the nontrivial infinite-dimensional
//!   loop parity,
//! - kernel bundles `E(L, V)` of operator families relative to a transversal
//!   subspace `V`, with their holonomy over loops,
//! - stable/unstable subspaces of linear Hamiltonian systems
//!   `J u' + A(lambda, t) u = 0` at `t = 0` via hyperbolic splittings at
//!   `t = +-infinity` and adaptive frame transport,
//! - first Stiefel-Whitney classes (orientability/holonomy signs) of the
//!   asymptotic stable bundles over embedded parameter loops, and
//! - bifurcation-candidate scans over parameter tori with wrap-count
//!   witnesses of noncontractibility.
//!
//! Start from the runnable programs in `examples/`; each one exercises a
//! major capability end to end. The `homindex` binary drives the same
//! machinery from a TOML config file.

pub mod acceptance;
pub mod bundles;
pub mod cli;
pub mod error;
pub mod fredholm;
pub mod hamiltonian;
pub mod numerics;
pub mod scenarios;
pub mod synthetic;

pub use error::{Error, Result};
