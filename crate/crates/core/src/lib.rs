//! Free-electron wavepackets exciting a two-level system: Coulomb dipole
//! coupling, closed-form transition increments, time-domain Born dynamics,
//! and two joint electron/TLS solvers (momentum-space stepping and exact
//! density-matrix propagation).

pub mod analytic;
pub mod born_dynamics;
pub mod constants;
pub mod coulomb;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod kinematics;
pub mod qew;
pub mod quadrature;
pub mod solver_density;
pub mod solver_momentum;
pub mod special;
pub mod tls;

pub use analytic::{Flagged, PrefactorConvention, RegimeFlag};
pub use coulomb::{DipoleCoupling, TransformConvention};
pub use error::{FeberiError, Result};
pub use experiments::{PhysicsParams, SolverSettings};
pub use kinematics::{ElectronKinematics, InteractionGeometry};
pub use qew::{GaussianQewSpec, ModulatedQewSpec, QewSpec};
pub use tls::{DipoleOrientation, TlsSpec, TlsState};
