//! Fusion rings of affine Lie algebras.
//!
//! Three independent engines compute the structure constants `N_{λμ}^ν` at a
//! positive level: the Verlinde formula on the modular `S` matrix, the
//! principal fusion ideal inside the group algebra `C[G_ℓ]`, and Kac-Walton
//! alcove folding. The crate also exposes the group-algebra, Fourier and
//! Heisenberg machinery the engines are built from.

pub mod cartan_lattice;
pub mod characters;
pub mod cli;
pub mod fusion;
pub mod group_algebra;
pub mod weyl;

pub use cartan_lattice::{build_affine_data, AffineData, AffineType, LevelContext, Weight};
pub use fusion::{FusionTable, Method};
pub use group_algebra::{AlgebraContext, AlgebraElement};
