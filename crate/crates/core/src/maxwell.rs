//! DG discretisation of the reduced Maxwell system
//!
//! `B3_t = E1_x`, `E1_t = B3_x - j1`, `E2_t = -j2`
//!
//! on the periodic x-mesh. Only the `(E1, B3)` pair carries interface fluxes.

use serde::{Deserialize, Serialize};

use crate::basis::CellCoefficients;
use crate::error::{Error, Result};
use crate::space::{Discretization, HI, LO};
use crate::vlasov::{velocity_moment, DistributionState};

/// Modal coefficients of `(E1, E2, B3)` on the x-mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub e1: CellCoefficients,
    pub e2: CellCoefficients,
    pub b3: CellCoefficients,
}

impl FieldState {
    pub fn zeros(n_x: usize, n_modes: usize) -> Self {
        Self {
            e1: CellCoefficients::zeros(n_x, n_modes),
            e2: CellCoefficients::zeros(n_x, n_modes),
            b3: CellCoefficients::zeros(n_x, n_modes),
        }
    }

    pub fn components(&self) -> [&CellCoefficients; 3] {
        [&self.e1, &self.e2, &self.b3]
    }

    pub fn components_mut(&mut self) -> [&mut CellCoefficients; 3] {
        [&mut self.e1, &mut self.e2, &mut self.b3]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }
}

/// Interface treatment of the `(E1, B3)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FluxKind {
    Upwind,
    Central,
    /// `E~ = E+` (trace from the `+x` side), `B~ = B-`.
    AlternatingEPlusBMinus,
    /// `E~ = E-`, `B~ = B+`.
    AlternatingEMinusBPlus,
}

impl FluxKind {
    pub const ALL: [FluxKind; 4] =
        [FluxKind::Upwind, FluxKind::Central, FluxKind::AlternatingEPlusBMinus, FluxKind::AlternatingEMinusBPlus];

    pub fn name(self) -> &'static str {
        match self {
            FluxKind::Upwind => "upwind",
            FluxKind::Central => "central",
            FluxKind::AlternatingEPlusBMinus => "alternating",
            FluxKind::AlternatingEMinusBPlus => "alternating-minus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "upwind" => Ok(FluxKind::Upwind),
            "central" => Ok(FluxKind::Central),
            "alternating" | "alternating-plus" => Ok(FluxKind::AlternatingEPlusBMinus),
            "alternating-minus" => Ok(FluxKind::AlternatingEMinusBPlus),
            other => Err(Error::InvalidArgument(format!("unknown flux '{other}'"))),
        }
    }

    /// Whether the flux dissipates the tangential field jumps.
    pub fn is_dissipative(self) -> bool {
        matches!(self, FluxKind::Upwind)
    }
}

impl std::fmt::Display for FluxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `(E1, B3)` traces on one side of an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceState {
    pub e1: f64,
    pub b3: f64,
}

/// Numerical traces `(E1~, B3~)` at an interface with `left` on the `-x` side.
///
/// The upwind form is the 1D reduction of `E~ = {E} + [B]_tau / 2`,
/// `B~ = {B} - [E]_tau / 2` with normal `(0, +-1, 0)`.
#[inline]
pub fn interface_flux(kind: FluxKind, left: InterfaceState, right: InterfaceState) -> (f64, f64) {
    match kind {
        FluxKind::Upwind => (
            0.5 * (left.e1 + right.e1) + 0.5 * (right.b3 - left.b3),
            0.5 * (left.b3 + right.b3) + 0.5 * (right.e1 - left.e1),
        ),
        FluxKind::Central => (0.5 * (left.e1 + right.e1), 0.5 * (left.b3 + right.b3)),
        FluxKind::AlternatingEPlusBMinus => (right.e1, left.b3),
        FluxKind::AlternatingEMinusBPlus => (left.e1, right.b3),
    }
}

/// Upwind traces by characteristic decomposition: `w+ = E1 + B3` travels at
/// speed `-1` and is taken from the right, `w- = E1 - B3` travels at `+1` and
/// is taken from the left.
pub fn characteristic_flux_oracle(left: InterfaceState, right: InterfaceState) -> (f64, f64) {
    let w_plus = right.e1 + right.b3;
    let w_minus = left.e1 - left.b3;
    (0.5 * (w_plus + w_minus), 0.5 * (w_plus - w_minus))
}

/// Current `(j1, j2)` as piecewise polynomials on the x-mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentDensity {
    pub j1: CellCoefficients,
    pub j2: CellCoefficients,
}

impl CurrentDensity {
    pub fn zeros(n_x: usize, n_modes: usize) -> Self {
        Self { j1: CellCoefficients::zeros(n_x, n_modes), j2: CellCoefficients::zeros(n_x, n_modes) }
    }
}

/// `j_i(x) = int f_h xi_i dxi`, exact for the polynomial integrand.
pub fn compute_current(disc: &Discretization, f: &DistributionState) -> CurrentDensity {
    CurrentDensity { j1: velocity_moment(disc, f, 1, 0), j2: velocity_moment(disc, f, 0, 1) }
}

fn traces(disc: &Discretization, coeffs: &[f64], side: usize) -> f64 {
    coeffs.iter().zip(&disc.leg_1d_face[side]).map(|(c, p)| c * p).sum()
}

/// Time derivative of the field coefficients.
pub fn maxwell_rhs(disc: &Discretization, fields: &FieldState, current: &CurrentDensity, flux: FluxKind) -> FieldState {
    let mesh = &disc.mesh;
    let n_x = mesh.n_x;
    let r1 = disc.n_field_modes();
    let nq = disc.nq;
    let scale = 2.0 / mesh.h_x;

    // interface p sits on the left of cell p
    let interface: Vec<(f64, f64)> = (0..n_x)
        .map(|p| {
            let l = mesh.x_neighbor(p, false);
            let left = InterfaceState {
                e1: traces(disc, fields.e1.cell(l), HI),
                b3: traces(disc, fields.b3.cell(l), HI),
            };
            let right = InterfaceState {
                e1: traces(disc, fields.e1.cell(p), LO),
                b3: traces(disc, fields.b3.cell(p), LO),
            };
            interface_flux(flux, left, right)
        })
        .collect();

    let e1_nodes = disc.field_at_nodes(&fields.e1);
    let b3_nodes = disc.field_at_nodes(&fields.b3);
    let mut out = FieldState::zeros(n_x, r1);
    for i in 0..n_x {
        let (e_l, b_l) = interface[i];
        let (e_r, b_r) = interface[mesh.x_neighbor(i, true)];
        let e1q = &e1_nodes[i * nq..(i + 1) * nq];
        let b3q = &b3_nodes[i * nq..(i + 1) * nq];
        let j1 = current.j1.cell(i);
        let j2 = current.j2.cell(i);
        for a in 0..r1 {
            let dtest = &disc.dleg_1d_test[a * nq..(a + 1) * nq];
            let vol_b: f64 = b3q.iter().zip(dtest).map(|(b, t)| b * t).sum();
            let vol_e: f64 = e1q.iter().zip(dtest).map(|(e, t)| e * t).sum();
            let (p_lo, p_hi) = (disc.leg_1d_face[LO][a], disc.leg_1d_face[HI][a]);
            out.e1.cell_mut(i)[a] = scale * (-vol_b + b_r * p_hi - b_l * p_lo) - j1.get(a).copied().unwrap_or(0.0);
            out.b3.cell_mut(i)[a] = scale * (-vol_e + e_r * p_hi - e_l * p_lo);
            out.e2.cell_mut(i)[a] = -j2.get(a).copied().unwrap_or(0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{project_1d, BasisFamily};
    use crate::mesh::{Domain1P2V, PhaseMesh};
    use proptest::prelude::*;

    fn disc(n: usize, k: usize) -> Discretization {
        let mesh = PhaseMesh::new(Domain1P2V::from_wavenumber(0.2, 1.2).unwrap(), n, 2, 2).unwrap();
        Discretization::new(mesh, k, BasisFamily::PType).unwrap()
    }

    #[test]
    fn flux_names_round_trip() {
        for kind in FluxKind::ALL {
            assert_eq!(FluxKind::parse(kind.name()).unwrap(), kind);
        }
        assert!(FluxKind::parse("lax").is_err());
    }

    #[test]
    fn equal_states_give_central_value() {
        let s = InterfaceState { e1: 0.3, b3: -1.1 };
        for kind in FluxKind::ALL {
            let (e, b) = interface_flux(kind, s, s);
            assert!((e - 0.3).abs() < 1e-15 && (b + 1.1).abs() < 1e-15);
        }
        let (e, b) = characteristic_flux_oracle(s, s);
        assert!((e - 0.3).abs() < 1e-15 && (b + 1.1).abs() < 1e-15);
    }

    #[test]
    fn magnetic_jump_corrects_electric_trace() {
        let l = InterfaceState { e1: 1.0, b3: 0.0 };
        let r = InterfaceState { e1: 1.0, b3: 2.0 };
        let (e, b) = interface_flux(FluxKind::Upwind, l, r);
        assert_eq!(e, 1.0 + 0.5 * 2.0);
        assert_eq!(b, 1.0);
    }

    proptest! {
        #[test]
        fn upwind_matches_characteristics(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
            let l = InterfaceState { e1: a, b3: b };
            let r = InterfaceState { e1: c, b3: d };
            let (e1, b1) = interface_flux(FluxKind::Upwind, l, r);
            let (e2, b2) = characteristic_flux_oracle(l, r);
            prop_assert!((e1 - e2).abs() <= 1e-15 * 8.0 * (1.0 + e1.abs()));
            prop_assert!((b1 - b2).abs() <= 1e-15 * 8.0 * (1.0 + b1.abs()));
        }
    }

    #[test]
    fn constant_fields_are_steady() {
        let d = disc(6, 2);
        let fields = FieldState {
            e1: project_1d(|_| 0.4, &d.mesh, 2, 4).unwrap(),
            e2: project_1d(|_| -0.2, &d.mesh, 2, 4).unwrap(),
            b3: project_1d(|_| 1.5, &d.mesh, 2, 4).unwrap(),
        };
        let current = CurrentDensity::zeros(6, 3);
        for kind in FluxKind::ALL {
            let rhs = maxwell_rhs(&d, &fields, &current, kind);
            for c in rhs.components() {
                assert!(c.data.iter().all(|v| v.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn continuous_fields_give_flux_independent_rhs() {
        let d = disc(6, 2);
        // globally continuous, periodic, piecewise linear functions in the space
        let l = d.mesh.domain.length_x();
        let hat = move |x: f64| 1.0 - 2.0 * ((x / l) - 0.5).abs();
        let fields = FieldState {
            e1: project_1d(hat, &d.mesh, 2, 4).unwrap(),
            e2: project_1d(|_| 0.0, &d.mesh, 2, 4).unwrap(),
            b3: project_1d(move |x| 0.3 * hat(x), &d.mesh, 2, 4).unwrap(),
        };
        let current = CurrentDensity::zeros(6, 3);
        let base = maxwell_rhs(&d, &fields, &current, FluxKind::Upwind);
        for kind in FluxKind::ALL {
            let rhs = maxwell_rhs(&d, &fields, &current, kind);
            for (a, b) in rhs.components().iter().zip(base.components()) {
                for (x, y) in a.data.iter().zip(&b.data) {
                    assert!((x - y).abs() < 1e-13);
                }
            }
        }
    }
}
