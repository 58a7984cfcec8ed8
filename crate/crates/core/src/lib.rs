//! Spreading speeds of Fisher–KPP fronts driven by a moving favorable patch.
//!
//! The growth rate is a three-zone step `r1 | r2 | r3` whose middle zone
//! `[A(t), A(t) + L)` travels with the trajectory `A`. The crate provides
//!
//! * [`model`]: growth-rate fields, trajectories and the logistic reaction,
//! * [`eigen`]: the generalized principal eigenvalue of the patch-frame
//!   operator, computed in closed form, by transcendental root finding and by
//!   truncated Dirichlet problems,
//! * [`speed`]: closed-form spreading-speed predictors,
//! * [`sim`]: an IMEX finite-difference solver with front tracking,
//! * [`verify`]: scenario harnesses and pointwise certification of the
//!   super- and sub-solution constructions,
//! * [`optimize`]: bang-bang patch-shape optimization of the eigenvalue.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! parallel sweeps live in the `patchfront-lab` companion crate.

#![no_std]

extern crate alloc;

pub mod eigen;
mod error;
pub mod model;
pub mod optimize;
pub mod roots;
pub mod sim;
pub mod speed;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use model::{GrowthParams, KppReaction, StepProfile, Trajectory};
