//! Discontinuous Galerkin solver for the 1D2V Vlasov-Maxwell system.
//!
//! The distribution `f(x, xi1, xi2, t)` lives on a Cartesian phase-space mesh,
//! periodic in `x` and truncated in velocity. It is advanced together with the
//! fields `(E1, E2, B3)` by a TVD Runge-Kutta scheme.

pub mod basis;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod maxwell;
pub mod mesh;
pub mod scenario;
pub mod space;
pub mod time;
pub mod verify;
pub mod vlasov;

pub use basis::{BasisFamily, CellCoefficients, ModalBasis, QuadratureRule};
pub use diagnostics::DiagnosticsRecord;
pub use driver::{parse_config, run, RunConfig, RunSummary};
pub use error::{Error, Result};
pub use maxwell::{FieldState, FluxKind};
pub use mesh::{Domain1P2V, PhaseMesh};
pub use scenario::{Scenario, WeibelParams};
pub use space::Discretization;
pub use time::{SolutionState, StepControl, VlasovMaxwell};
pub use vlasov::DistributionState;
