//! Leaky Lamb waves in an elastic plate bonded between two elastic
//! half-spaces, computed with a spectral collocation method.
//!
//! The guide is discretised on Gauss–Lobatto points and each half-space on a
//! rational map of the same points onto `(d, ∞)`, taken along a complex path
//! for leaky partial waves so their exponential growth becomes decay. The
//! result is a quadratic eigenvalue problem in the wavenumber `k_x`, solved
//! densely for every frequency and every radiation case. A filter chain keeps
//! the physical modes, and a partial-wave determinant cross-checks them.
//!
//! Numerical modules are generic over [`scalar::Real`]; the aliases below fix
//! the working precision to `f64`.
//!
//! ```no_run
//! use leaky_lamb::{modes, TriLayerSystem, ZetaTable};
//!
//! let sys = TriLayerSystem::epoxy_aluminium();
//! let omega = 2.0 * std::f64::consts::PI * 1.03;
//! let found = modes::solve_frequency(&sys, omega, &ZetaTable::default(), &Default::default()).unwrap();
//! for m in found {
//!     println!("{} {:.4} km/s {:.4} Np/mm", m.case_label, m.phase_velocity, m.attenuation);
//! }
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod io;
pub mod materials;
pub mod modes;
pub mod oracle;
pub mod pep;
pub mod scalar;
pub mod shape;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// Complex `f64`.
pub type C64 = scalar::Cx<f64>;
pub type Material = materials::Material<f64>;
pub type TriLayerSystem = materials::TriLayerSystem<f64>;
pub type ReferenceGrid = spectral::ReferenceGrid<f64>;
pub type MappedGrid = spectral::MappedGrid<f64>;
pub type RadiationCase = assembly::RadiationCase<f64>;
pub type ZetaTable = assembly::ZetaTable<f64>;
pub type Discretization = assembly::Discretization<f64>;
pub type PepMatrices = assembly::PepMatrices<f64>;
pub type EigenPair = pep::EigenPair<f64>;
pub type ModeSolution = modes::ModeSolution<f64>;
pub type SweepResult = modes::SweepResult<f64>;
pub type ModeShape = shape::ModeShape<f64>;
