//! Initial conditions, exact solutions and named presets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::basis::{project, project_1d, reflect_coefficients, CellCoefficients};
use crate::error::{Error, Result};
use crate::maxwell::FieldState;
use crate::mesh::{reflect_velocity_indices, Domain1P2V};
use crate::space::Discretization;
use crate::time::{Coupling, SolutionState};

/// Counter-streaming beam parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibelParams {
    pub beta: f64,
    /// Amplitude of the seed magnetic field.
    pub b: f64,
    pub delta: f64,
    pub v01: f64,
    pub v02: f64,
    pub k0: f64,
}

impl WeibelParams {
    /// Symmetric beams.
    pub fn choice1() -> Self {
        Self { beta: 0.01, b: 0.001, delta: 0.5, v01: 0.3, v02: 0.3, k0: 0.2 }
    }

    /// Asymmetric beams.
    pub fn choice2() -> Self {
        Self { beta: 0.01, b: 0.001, delta: 1.0 / 6.0, v01: 0.5, v02: 0.1, k0: 0.2 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0 && (0.0..=1.0).contains(&self.delta) && self.k0 > 0.0;
        let finite = [self.beta, self.b, self.delta, self.v01, self.v02, self.k0].iter().all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid Weibel parameters {self:?}")))
        }
    }

    pub fn f0(&self, xi1: f64, xi2: f64) -> f64 {
        let b = self.beta;
        (-xi2 * xi2 / b).exp() / (PI * b)
            * (self.delta * (-(xi1 - self.v01).powi(2) / b).exp()
                + (1.0 - self.delta) * (-(xi1 + self.v02).powi(2) / b).exp())
    }
}

/// A Gaussian blob streaming freely in x with the fields held at zero.
/// Exact solution `g(x - xi2 t, xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeStreamParams {
    pub k0: f64,
    pub amplitude: f64,
    /// Standard deviation of the Gaussian in velocity.
    pub width: f64,
}

impl Default for FreeStreamParams {
    fn default() -> Self {
        Self { k0: 1.0, amplitude: 0.5, width: 0.25 }
    }
}

/// Standing light wave in vacuum, `E1 = a sin(kx) cos(kt)`, `B3 = a cos(kx) sin(kt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumParams {
    pub k0: f64,
    pub amplitude: f64,
}

impl Default for VacuumParams {
    fn default() -> Self {
        Self { k0: 1.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Weibel(WeibelParams),
    FreeStream(FreeStreamParams),
    VacuumMaxwell(VacuumParams),
}

/// Names accepted by [`Scenario::preset`].
pub const PRESET_NAMES: [&str; 4] = ["weibel-choice1", "weibel-choice2", "free-stream", "vacuum-maxwell"];

impl Scenario {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "weibel-choice1" => Ok(Scenario::Weibel(WeibelParams::choice1())),
            "weibel-choice2" => Ok(Scenario::Weibel(WeibelParams::choice2())),
            "free-stream" => Ok(Scenario::FreeStream(FreeStreamParams::default())),
            "vacuum-maxwell" => Ok(Scenario::VacuumMaxwell(VacuumParams::default())),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    pub fn wavenumber(&self) -> f64 {
        match self {
            Scenario::Weibel(p) => p.k0,
            Scenario::FreeStream(p) => p.k0,
            Scenario::VacuumMaxwell(p) => p.k0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Weibel(p) => p.validate(),
            Scenario::FreeStream(p) if p.k0 > 0.0 && p.width > 0.0 && p.amplitude.is_finite() => Ok(()),
            Scenario::VacuumMaxwell(p) if p.k0 > 0.0 && p.amplitude.is_finite() => Ok(()),
            _ => Err(Error::InvalidArgument(format!("invalid scenario parameters {self:?}"))),
        }
    }

    /// `[0, 2 pi / k0] x [-v, v]^2`.
    pub fn domain(&self, velocity_bound: f64) -> Result<Domain1P2V> {
        self.validate()?;
        Domain1P2V::from_wavenumber(self.wavenumber(), velocity_bound)
    }

    pub fn coupling(&self) -> Coupling {
        match self {
            Scenario::FreeStream(_) => Coupling::FrozenFields,
            _ => Coupling::SelfConsistent,
        }
    }

    pub fn initial_f(&self, x: f64, xi1: f64, xi2: f64) -> f64 {
        self.exact_f(0.0, x, xi1, xi2).unwrap_or_else(|| match self {
            Scenario::Weibel(p) => p.f0(xi1, xi2),
            _ => unreachable!("closed-form scenarios have exact solutions"),
        })
    }

    /// `(E1, E2, B3)` at `t = 0`.
    pub fn initial_fields(&self, x: f64) -> [f64; 3] {
        match self {
            Scenario::Weibel(p) => [0.0, 0.0, p.b * (p.k0 * x).sin()],
            _ => self.exact_fields(0.0, x).expect("closed-form scenario"),
        }
    }

    pub fn has_exact_solution(&self) -> bool {
        !matches!(self, Scenario::Weibel(_))
    }

    /// Exact distribution at time `t`, when known.
    pub fn exact_f(&self, t: f64, x: f64, xi1: f64, xi2: f64) -> Option<f64> {
        match self {
            Scenario::Weibel(_) => None,
            Scenario::FreeStream(p) => {
                let s2 = p.width * p.width;
                Some((1.0 + p.amplitude * (p.k0 * (x - xi2 * t)).sin()) * (-(xi1 * xi1 + xi2 * xi2) / (2.0 * s2)).exp())
            }
            Scenario::VacuumMaxwell(_) => Some(0.0),
        }
    }

    /// Exact `(E1, E2, B3)` at time `t`, when known.
    pub fn exact_fields(&self, t: f64, x: f64) -> Option<[f64; 3]> {
        match self {
            Scenario::Weibel(_) => None,
            Scenario::FreeStream(_) => Some([0.0; 3]),
            Scenario::VacuumMaxwell(p) => {
                let (k, a) = (p.k0, p.amplitude);
                Some([a * (k * x).sin() * (k * t).cos(), 0.0, a * (k * x).cos() * (k * t).sin()])
            }
        }
    }
}

/// Projects `f0` with `n_points` Gauss points per direction and the fields
/// onto degree-`k` polynomials in x.
pub fn initial_state(disc: &Discretization, scenario: &Scenario, n_points: usize) -> Result<SolutionState> {
    scenario.validate()?;
    let f = project(|x, u, v| scenario.initial_f(x, u, v), &disc.mesh, &disc.basis, n_points)?;
    let r = disc.field_degree;
    let component = |c: usize| project_1d(|x| scenario.initial_fields(x)[c], &disc.mesh, r, n_points);
    Ok(SolutionState { f, fields: FieldState { e1: component(0)?, e2: component(1)?, b3: component(2)? }, t: 0.0 })
}

/// `f(x, xi) -> f(x, -xi)`, `E -> E`, `B -> -B`, exact on the discrete space.
pub fn time_reversal_setup(disc: &Discretization, state: &SolutionState) -> Result<SolutionState> {
    let mesh = &disc.mesh;
    let d = &mesh.domain;
    if d.v1_min != -d.v1_max || d.v2_min != -d.v2_max || mesh.n_v1 % 2 != 0 || mesh.n_v2 % 2 != 0 {
        return Err(Error::InvalidMesh("time reversal needs a velocity mesh symmetric about zero".into()));
    }
    let reflection = reflect_velocity_indices(mesh);
    let mut f = CellCoefficients::zeros(state.f.n_cells(), state.f.n_modes);
    for (cell, &image) in reflection.permutation.iter().enumerate() {
        f.cell_mut(image).copy_from_slice(state.f.cell(cell));
    }
    reflect_coefficients(&mut f, &disc.basis);
    let mut fields = state.fields.clone();
    fields.b3.data.iter_mut().for_each(|b| *b = -*b);
    Ok(SolutionState { f, fields, t: state.t })
}
