//! Quantum Fisher information (QFI) for pure states of indistinguishable
//! fermions, where the parameter enters through Bogoliubov transformations,
//! single-particle basis changes, and/or a Hamiltonian evolution.
//!
//! The crate is organised in four layers:
//!
//! * [`fock`] — exact fermionic Fock space for small mode counts: occupation
//!   bitstrings, ladder and bilinear operators with Jordan–Wigner signs,
//!   quadratic generators, inner products and operator variances.
//! * [`bogoliubov`] — the (U, V) transformation algebra: validity checks,
//!   generator extraction, canonical decomposition, vacuum and one-particle
//!   overlaps, and an exact many-body unitary on small Fock spaces that
//!   serves as the brute-force oracle for everything else.
//! * [`qfi`] — the estimators: pure-state formula, Bures finite differences,
//!   single-unitary variance, two-unitary chain rule, basis-state closed
//!   forms, Hamiltonian-evolution compact form, and the diagonal mixed-state
//!   formula.
//! * [`hall`] — quantum-Hall magnetometry: Landau-level geometry, oscillator
//!   overlap derivatives, the Hall QFI (direct sum and closed form), and the
//!   Cramér–Rao bound on the magnetic-field sensitivity.
//!
//! [`verify`] packages the seeded oracle cross-checks behind the `verify`
//! CLI subcommand, and [`cli`] implements the command-line front end
//! (`hall-sweep`, `bench-gaas`, `verify`, `scaling`).

pub mod bogoliubov;
pub mod cli;
pub mod error;
pub mod fock;
pub mod hall;
pub mod linalg;
pub mod qfi;
pub mod verify;

pub use error::{Error, Result};
