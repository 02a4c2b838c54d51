//! Third-order TVD Runge-Kutta stepping of the coupled system.

use serde::{Deserialize, Serialize};

use crate::basis::CellCoefficients;
use crate::error::{Error, Result};
use crate::maxwell::{compute_current, maxwell_rhs, FieldState, FluxKind};
use crate::space::Discretization;
use crate::vlasov::{vlasov_rhs, DistributionState, ForceField};

/// Convex weights `(old, new)` of the three stages.
pub const RK3_STAGE_WEIGHTS: [(f64, f64); 3] = [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)];

const _: () = {
    let mut s = 0;
    while s < 3 {
        let (a, b) = RK3_STAGE_WEIGHTS[s];
        assert!((a + b - 1.0) * (a + b - 1.0) < 1e-30);
        s += 1;
    }
};

/// A state the RK3 driver can advance.
pub trait RkState: Clone {
    type Derivative;

    /// `self + dt * d`.
    fn euler(&self, dt: f64, d: &Self::Derivative) -> Self;

    /// `base + w * (other - base)`, i.e. the convex combination `(1 - w) base + w other`.
    fn blend(base: &Self, other: &Self, w: f64) -> Self;

    fn is_finite(&self) -> bool;
}

impl RkState for f64 {
    type Derivative = f64;

    fn euler(&self, dt: f64, d: &f64) -> f64 {
        self + dt * d
    }

    fn blend(base: &f64, other: &f64, w: f64) -> f64 {
        base + w * (other - base)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// One TVD-RK3 step. Each stage is a forward-Euler step blended with `G^n`
/// using [`RK3_STAGE_WEIGHTS`]; the increment form leaves the state bitwise
/// unchanged when the right-hand side vanishes.
pub fn rk3_step<S, F>(state: &S, dt: f64, mut rhs: F) -> Result<S>
where
    S: RkState,
    F: FnMut(&S) -> Result<S::Derivative>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    let mut stage = state.clone();
    for (s, &(_, w_new)) in RK3_STAGE_WEIGHTS.iter().enumerate() {
        let d = rhs(&stage).map_err(|e| match e {
            Error::NonFinite { what, detail } => Error::NonFinite { what: format!("{what} (RK stage {})", s + 1), detail },
            other => other,
        })?;
        let advanced = stage.euler(dt, &d);
        stage = if s == 0 { advanced } else { S::blend(state, &advanced, w_new) };
        if !stage.is_finite() {
            return Err(Error::NonFinite { what: "in RK stage".into(), detail: format!("stage {} produced NaN/Inf", s + 1) });
        }
    }
    Ok(stage)
}

/// `(f_h, E_h, B_h)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub f: DistributionState,
    pub fields: FieldState,
    pub t: f64,
}

/// Time derivative of a [`SolutionState`].
#[derive(Debug, Clone)]
pub struct StateDerivative {
    pub f: DistributionState,
    pub fields: FieldState,
}

fn combine(base: &CellCoefficients, other: &CellCoefficients, f: impl Fn(f64, f64) -> f64) -> CellCoefficients {
    CellCoefficients {
        n_modes: base.n_modes,
        data: base.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
    }
}

fn combine_fields(base: &FieldState, other: &FieldState, f: impl Fn(f64, f64) -> f64 + Copy) -> FieldState {
    FieldState {
        e1: combine(&base.e1, &other.e1, f),
        e2: combine(&base.e2, &other.e2, f),
        b3: combine(&base.b3, &other.b3, f),
    }
}

impl RkState for SolutionState {
    type Derivative = StateDerivative;

    fn euler(&self, dt: f64, d: &StateDerivative) -> Self {
        let step = move |a: f64, b: f64| a + dt * b;
        SolutionState { f: combine(&self.f, &d.f, step), fields: combine_fields(&self.fields, &d.fields, step), t: self.t + dt }
    }

    fn blend(base: &Self, other: &Self, w: f64) -> Self {
        let mix = move |a: f64, b: f64| a + w * (b - a);
        SolutionState {
            f: combine(&base.f, &other.f, mix),
            fields: combine_fields(&base.fields, &other.fields, mix),
            t: base.t + w * (other.t - base.t),
        }
    }

    fn is_finite(&self) -> bool {
        self.f.is_finite() && self.fields.is_finite()
    }
}

/// How the fields evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// Fields follow Maxwell's equations driven by the current of `f_h`.
    SelfConsistent,
    /// Fields are held at their initial values; only `f_h` moves.
    FrozenFields,
}

/// The semi-discrete operator `R(G) = (vlasov_rhs, maxwell_rhs(compute_current))`.
#[derive(Debug, Clone, Copy)]
pub struct VlasovMaxwell<'a> {
    pub disc: &'a Discretization,
    pub flux: FluxKind,
    pub coupling: Coupling,
}

impl<'a> VlasovMaxwell<'a> {
    pub fn new(disc: &'a Discretization, flux: FluxKind) -> Self {
        Self { disc, flux, coupling: Coupling::SelfConsistent }
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn rhs(&self, state: &SolutionState) -> Result<StateDerivative> {
        let force = ForceField::new(self.disc, &state.fields);
        let f = vlasov_rhs(self.disc, &state.f, &force)?;
        let fields = match self.coupling {
            Coupling::SelfConsistent => {
                let current = compute_current(self.disc, &state.f);
                maxwell_rhs(self.disc, &state.fields, &current, self.flux)
            }
            Coupling::FrozenFields => FieldState::zeros(self.disc.mesh.n_x, self.disc.n_field_modes()),
        };
        if !fields.is_finite() {
            return Err(Error::NonFinite { what: "in Maxwell right-hand side".into(), detail: format!("t = {}", state.t) });
        }
        Ok(StateDerivative { f, fields })
    }

    pub fn step(&self, state: &SolutionState, dt: f64) -> Result<SolutionState> {
        let mut next = rk3_step(state, dt, |s| self.rhs(s))?;
        next.t = state.t + dt;
        Ok(next)
    }
}

/// Time-step control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub cfl: f64,
    /// Overrides the CFL rule when set.
    pub fixed_dt: Option<f64>,
    /// For degree >= 3, `dt <= coefficient * h_x^(4/3)` so the RK3 error keeps
    /// pace with the spatial error.
    pub high_order_coefficient: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { cfl: 0.19, fixed_dt: None, high_order_coefficient: 0.05 }
    }
}

impl StepControl {
    pub fn with_cfl(cfl: f64) -> Self {
        Self { cfl, ..Self::default() }
    }
}

/// `dt = cfl / (lambda_x / h_x + lambda_1 / h_1 + lambda_2 / h_2 + 1 / h_x)`,
/// where the speeds are maxima over the quadrature nodes and the final term is
/// the unit light speed of the field block.
pub fn compute_dt(state: &SolutionState, disc: &Discretization, control: &StepControl) -> Result<f64> {
    let dt = if let Some(dt) = control.fixed_dt {
        dt
    } else {
        if !state.fields.is_finite() {
            return Err(Error::NonFinite { what: "in fields".into(), detail: "cannot compute time step".into() });
        }
        let mesh = &disc.mesh;
        let lambda_x = mesh.domain.v2_max;
        let xi1_max = disc.velocity_nodes(1, mesh.n_v1 - 1).last().copied().unwrap_or(mesh.domain.v1_max);
        let xi2_max = disc.velocity_nodes(2, mesh.n_v2 - 1).last().copied().unwrap_or(mesh.domain.v2_max);
        let force = ForceField::new(disc, &state.fields);
        let (lambda_1, lambda_2) = force.max_speeds(xi1_max, xi2_max);
        let rate = lambda_x / mesh.h_x + lambda_1 / mesh.h_v1 + lambda_2 / mesh.h_v2 + 1.0 / mesh.h_x;
        let mut dt = control.cfl / rate;
        if disc.degree() >= 3 {
            dt = dt.min(control.high_order_coefficient * mesh.h_x.powf(4.0 / 3.0));
        }
        dt
    };
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    Ok(dt)
}
