//! Spectral flow of rank-one perturbations `A + tau u v*`.

pub mod asymptotics;
pub mod critical;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod flow;
pub mod linalg;
pub mod matching;
pub mod nonneg;
pub mod perturbation;
pub mod poly;
pub mod structured;
pub mod verify;

pub use asymptotics::{AsymptoticModel, AsymptoticReport, BoundedBranch};
pub use critical::{Definability, DefinabilityMode, Witness};
pub use error::{Error, Result};
pub use flow::{Coverage, LevelSet, Trajectory, Window};
pub use linalg::CMatrix;
pub use num_complex::Complex64 as C64;
pub use perturbation::{CriticalPoint, RankOneSystem, SpectralPortrait};
pub use poly::{Poly, Root};
pub use structured::{StructureContext, StructureKind};
pub use verify::{verify, VerifyReport};
