//! Conserved quantities, conservation-error terms, energies, momenta, Log
//! Fourier modes and snapshot extraction.
//!
//! Boundary and jump terms are evaluated on the operator's own face nodes but
//! through direct basis evaluation, independently of the kernel's tables.

use serde::{Deserialize, Serialize};

use crate::basis::{evaluate, evaluate_1d_reference, gauss_legendre, CellCoefficients};
use crate::error::{Error, Result};
use crate::maxwell::{FieldState, FluxKind};
use crate::mesh::PhaseMesh;
use crate::space::Discretization;
use crate::time::SolutionState;
use crate::vlasov::{velocity_moment, DistributionState};

/// Floor returned by [`log_fourier_mode`] for a vanishing coefficient.
pub const LOG_FOURIER_FLOOR: f64 = -300.0;

/// Number of Log Fourier modes tracked per field.
pub const N_FOURIER_MODES: usize = 4;

/// `int_Omega u g` for two DG functions on the phase-space mesh.
pub fn inner_product(disc: &Discretization, u: &CellCoefficients, g: &CellCoefficients) -> f64 {
    disc.mesh.jacobian() * u.data.iter().zip(&g.data).map(|(a, b)| a * b).sum::<f64>()
}

/// `int_Omega_x (a . b)` summed over the three field components.
pub fn field_inner_product(disc: &Discretization, a: &FieldState, b: &FieldState) -> f64 {
    let jac = 0.5 * disc.mesh.h_x;
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| jac * x.data.iter().zip(&y.data).map(|(p, q)| p * q).sum::<f64>())
        .sum()
}

fn field_integral(disc: &Discretization, a: &CellCoefficients, b: &CellCoefficients) -> f64 {
    0.5 * disc.mesh.h_x * a.data.iter().zip(&b.data).map(|(p, q)| p * q).sum::<f64>()
}

/// Unscaled integrals over the whole phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConservedQuantities {
    pub mass: f64,
    pub k1: f64,
    pub k2: f64,
    pub electric1: f64,
    pub electric2: f64,
    pub magnetic: f64,
    /// `int f |xi|^2 + int (|E|^2 + |B|^2)`.
    pub total_energy: f64,
    pub p1: f64,
    pub p2: f64,
    pub l2_f: f64,
}

/// Mass, energies and momenta, integrated exactly.
pub fn conserved_quantities(disc: &Discretization, state: &SolutionState) -> ConservedQuantities {
    let moment_total = |p1: usize, p2: usize| -> f64 {
        // int over x of the constant mode: phi_0 = 1/sqrt(2)
        let m = velocity_moment(disc, &state.f, p1, p2);
        (0..disc.mesh.n_x).map(|i| m.cell(i)[0]).sum::<f64>() * disc.mesh.h_x / 2f64.sqrt()
    };
    let fs = &state.fields;
    let mass = moment_total(0, 0);
    let k1 = 0.5 * moment_total(2, 0);
    let k2 = 0.5 * moment_total(0, 2);
    let electric1 = 0.5 * field_integral(disc, &fs.e1, &fs.e1);
    let electric2 = 0.5 * field_integral(disc, &fs.e2, &fs.e2);
    let magnetic = 0.5 * field_integral(disc, &fs.b3, &fs.b3);
    ConservedQuantities {
        mass,
        k1,
        k2,
        electric1,
        electric2,
        magnetic,
        total_energy: 2.0 * (k1 + k2 + electric1 + electric2 + magnetic),
        p1: moment_total(1, 0) + field_integral(disc, &fs.e2, &fs.b3),
        p2: moment_total(0, 1) - field_integral(disc, &fs.e1, &fs.b3),
        l2_f: inner_product(disc, &state.f, &state.f).sqrt(),
    }
}

/// Conservation-error terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThetaTerms {
    /// Outflow of `f_h` through the velocity cut-off.
    pub theta1: f64,
    /// Tangential field-jump dissipation; absent for central and alternating fluxes.
    pub theta2: f64,
    /// Outflow of `f_h |xi|^2` through the velocity cut-off.
    pub theta3: f64,
}

/// Sum over x-interfaces of `[E1]^2 + [B3]^2`.
pub fn field_jump_energy(disc: &Discretization, fields: &FieldState) -> f64 {
    let mesh = &disc.mesh;
    (0..mesh.n_x)
        .map(|i| {
            let r = mesh.x_neighbor(i, true);
            let je = evaluate_1d_reference(fields.e1.cell(i), 1.0) - evaluate_1d_reference(fields.e1.cell(r), -1.0);
            let jb = evaluate_1d_reference(fields.b3.cell(i), 1.0) - evaluate_1d_reference(fields.b3.cell(r), -1.0);
            je * je + jb * jb
        })
        .sum()
}

/// Face nodes of the operator rule together with their tensor weights.
fn face_nodes(disc: &Discretization) -> Vec<(f64, f64, f64)> {
    let rule = &disc.rule;
    let mut out = Vec::with_capacity(rule.len() * rule.len());
    for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
        for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
            out.push((*a, *b, wa * wb));
        }
    }
    out
}

/// Visits every velocity-boundary node with `(f_inside, a . n, |xi|^2, weight)`.
fn for_each_velocity_boundary_node(disc: &Discretization, state: &SolutionState, mut visit: impl FnMut(f64, f64, f64, f64)) {
    let mesh = &disc.mesh;
    let basis = &disc.basis;
    let nodes = face_nodes(disc);
    let fs = &state.fields;
    for i in 0..mesh.n_x {
        for &(axis, n_along, n_other, h_other) in &[(1usize, mesh.n_v1, mesh.n_v2, mesh.h_v2), (2, mesh.n_v2, mesh.n_v1, mesh.h_v1)] {
            for (j_face, normal) in [(0usize, -1.0f64), (n_along - 1, 1.0)] {
                for j_other in 0..n_other {
                    let (j1, j2) = if axis == 1 { (j_face, j_other) } else { (j_other, j_face) };
                    let cell = mesh.cell_index(i, j1, j2);
                    let coeffs = state.f.cell(cell);
                    let center = mesh.cell_center(cell);
                    for &(ex, eo, w) in &nodes {
                        let eta = if axis == 1 { [ex, normal, eo] } else { [ex, eo, normal] };
                        let f_in: f64 = coeffs.iter().enumerate().map(|(m, c)| c * basis.eval_mode(m, eta)).sum();
                        let xi1 = center[1] + 0.5 * mesh.h_v1 * eta[1];
                        let xi2 = center[2] + 0.5 * mesh.h_v2 * eta[2];
                        let e1 = evaluate_1d_reference(fs.e1.cell(i), ex);
                        let e2 = evaluate_1d_reference(fs.e2.cell(i), ex);
                        let b3 = evaluate_1d_reference(fs.b3.cell(i), ex);
                        let a = if axis == 1 { e1 + xi2 * b3 } else { e2 - xi1 * b3 };
                        let weight = w * 0.25 * mesh.h_x * h_other;
                        visit(f_in, normal * a, xi1 * xi1 + xi2 * xi2, weight);
                    }
                }
            }
        }
    }
}

/// `Theta_1, Theta_2, Theta_3` for the current state.
pub fn theta_terms(disc: &Discretization, state: &SolutionState, flux: FluxKind) -> ThetaTerms {
    let mut theta1 = 0.0;
    let mut theta3 = 0.0;
    for_each_velocity_boundary_node(disc, state, |f, an, xi_sq, w| {
        let out = an.max(0.0);
        theta1 += w * f * out;
        theta3 += w * f * xi_sq * out;
    });
    let theta2 = if flux.is_dissipative() { field_jump_energy(disc, &state.fields) } else { 0.0 };
    ThetaTerms { theta1, theta2, theta3 }
}

/// Jump dissipation of `f_h`: `int |xi . n| [f]^2` over x-faces plus
/// `int |a . n| [f]^2` over velocity faces, boundary faces included with
/// `[f] = f n`.
pub fn jump_dissipation(disc: &Discretization, state: &SolutionState) -> f64 {
    let mesh = &disc.mesh;
    let basis = &disc.basis;
    let nodes = face_nodes(disc);
    let fs = &state.fields;
    let trace = |cell: usize, eta: [f64; 3]| -> f64 {
        state.f.cell(cell).iter().enumerate().map(|(m, c)| c * basis.eval_mode(m, eta)).sum()
    };
    let mut total = 0.0;
    for i in 0..mesh.n_x {
        for j1 in 0..mesh.n_v1 {
            for j2 in 0..mesh.n_v2 {
                let cell = mesh.cell_index(i, j1, j2);
                let center = mesh.cell_center(cell);
                // x face on the right
                let right = mesh.cell_index(mesh.x_neighbor(i, true), j1, j2);
                for &(e1, e2, w) in &nodes {
                    let jump = trace(cell, [1.0, e1, e2]) - trace(right, [-1.0, e1, e2]);
                    let xi2 = center[2] + 0.5 * mesh.h_v2 * e2;
                    total += w * 0.25 * mesh.h_v1 * mesh.h_v2 * xi2.abs() * jump * jump;
                }
                for &(ex, eo, w) in &nodes {
                    let e1f = evaluate_1d_reference(fs.e1.cell(i), ex);
                    let e2f = evaluate_1d_reference(fs.e2.cell(i), ex);
                    let b3f = evaluate_1d_reference(fs.b3.cell(i), ex);
                    // upper v1 face
                    let xi2 = center[2] + 0.5 * mesh.h_v2 * eo;
                    let a1 = e1f + xi2 * b3f;
                    let own = trace(cell, [ex, 1.0, eo]);
                    let jump = if j1 + 1 < mesh.n_v1 { own - trace(mesh.cell_index(i, j1 + 1, j2), [ex, -1.0, eo]) } else { own };
                    total += w * 0.25 * mesh.h_x * mesh.h_v2 * a1.abs() * jump * jump;
                    if j1 == 0 {
                        let low = trace(cell, [ex, -1.0, eo]);
                        total += w * 0.25 * mesh.h_x * mesh.h_v2 * a1.abs() * low * low;
                    }
                    // upper v2 face
                    let xi1 = center[1] + 0.5 * mesh.h_v1 * eo;
                    let a2 = e2f - xi1 * b3f;
                    let own = trace(cell, [ex, eo, 1.0]);
                    let jump = if j2 + 1 < mesh.n_v2 { own - trace(mesh.cell_index(i, j1, j2 + 1), [ex, eo, -1.0]) } else { own };
                    total += w * 0.25 * mesh.h_x * mesh.h_v1 * a2.abs() * jump * jump;
                    if j2 == 0 {
                        let low = trace(cell, [ex, eo, -1.0]);
                        total += w * 0.25 * mesh.h_x * mesh.h_v1 * a2.abs() * low * low;
                    }
                }
            }
        }
    }
    total
}

/// `log10((1/L) sqrt(|int W sin(k n x)|^2 + |int W cos(k n x)|^2))` with
/// `k = 2 pi / L`, floored at [`LOG_FOURIER_FLOOR`].
pub fn log_fourier_mode(mesh: &PhaseMesh, field: &CellCoefficients, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("Log Fourier mode index starts at 1".into()));
    }
    let degree = field.n_modes - 1;
    let rule = gauss_legendre(degree + 3)?;
    let length = mesh.domain.length_x();
    let k = 2.0 * std::f64::consts::PI / length * n as f64;
    let (mut s, mut c) = (0.0, 0.0);
    for i in 0..mesh.n_x {
        let coeffs = field.cell(i);
        let center = mesh.x_center(i);
        for (e, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = center + 0.5 * mesh.h_x * e;
            let v = evaluate_1d_reference(coeffs, *e) * w * 0.5 * mesh.h_x;
            s += v * (k * x).sin();
            c += v * (k * x).cos();
        }
    }
    let amplitude = (s * s + c * c).sqrt() / length;
    Ok(if amplitude > 0.0 { amplitude.log10().max(LOG_FOURIER_FLOOR) } else { LOG_FOURIER_FLOOR })
}

/// One time sample of every tracked quantity. Integrals are divided by the
/// length of the spatial domain; `l2_f` is the unscaled norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub k1: f64,
    pub k2: f64,
    pub electric1: f64,
    pub electric2: f64,
    pub magnetic: f64,
    pub total_energy: f64,
    pub p1: f64,
    pub p2: f64,
    pub l2_f: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub log_fourier_e1: [f64; N_FOURIER_MODES],
    pub log_fourier_e2: [f64; N_FOURIER_MODES],
    pub log_fourier_b3: [f64; N_FOURIER_MODES],
}

/// Column names of the time-series CSV, in order.
pub const CSV_COLUMNS: [&str; 26] = [
    "t", "mass", "K1", "K2", "Ee1", "Ee2", "Em", "Etot", "P1", "P2", "L2f", "theta1", "theta2", "theta3",
    "logFM_E1_1", "logFM_E1_2", "logFM_E1_3", "logFM_E1_4",
    "logFM_E2_1", "logFM_E2_2", "logFM_E2_3", "logFM_E2_4",
    "logFM_B3_1", "logFM_B3_2", "logFM_B3_3", "logFM_B3_4",
];

/// Version of the CSV layout, written in the header line.
pub const CSV_SCHEMA_VERSION: u32 = 1;

impl DiagnosticsRecord {
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.t,
            self.mass,
            self.k1,
            self.k2,
            self.electric1,
            self.electric2,
            self.magnetic,
            self.total_energy,
            self.p1,
            self.p2,
            self.l2_f,
            self.theta1,
            self.theta2,
            self.theta3,
        ];
        v.extend_from_slice(&self.log_fourier_e1);
        v.extend_from_slice(&self.log_fourier_e2);
        v.extend_from_slice(&self.log_fourier_b3);
        v
    }

    pub fn csv_header() -> String {
        format!("# vlasov-dg timeseries schema_version={CSV_SCHEMA_VERSION}\n{}", CSV_COLUMNS.join(","))
    }

    pub fn csv_row(&self) -> String {
        self.values().iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Full diagnostics sample.
pub fn record(disc: &Discretization, state: &SolutionState, flux: FluxKind) -> Result<DiagnosticsRecord> {
    let q = conserved_quantities(disc, state);
    let th = theta_terms(disc, state, flux);
    let scale = 1.0 / disc.mesh.domain.length_x();
    let modes = |c: &CellCoefficients| -> Result<[f64; N_FOURIER_MODES]> {
        let mut out = [0.0; N_FOURIER_MODES];
        for (n, o) in out.iter_mut().enumerate() {
            *o = log_fourier_mode(&disc.mesh, c, n + 1)?;
        }
        Ok(out)
    };
    let rec = DiagnosticsRecord {
        t: state.t,
        mass: q.mass * scale,
        k1: q.k1 * scale,
        k2: q.k2 * scale,
        electric1: q.electric1 * scale,
        electric2: q.electric2 * scale,
        magnetic: q.magnetic * scale,
        total_energy: q.total_energy * scale,
        p1: q.p1 * scale,
        p2: q.p2 * scale,
        l2_f: q.l2_f,
        theta1: th.theta1 * scale,
        theta2: th.theta2 * scale,
        theta3: th.theta3 * scale,
        log_fourier_e1: modes(&state.fields.e1)?,
        log_fourier_e2: modes(&state.fields.e2)?,
        log_fourier_b3: modes(&state.fields.b3)?,
    };
    if !rec.is_finite() {
        return Err(Error::NonFinite { what: "in diagnostics".into(), detail: format!("{rec:?}") });
    }
    Ok(rec)
}

/// `rho_h(x) = int f_h dxi` as a piecewise polynomial in x.
pub fn density_profile(disc: &Discretization, f: &DistributionState) -> CellCoefficients {
    velocity_moment(disc, f, 0, 0)
}

/// `f_h(x, ., .)` sampled at the centres of a uniform `resolution^2` grid over
/// the velocity box.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSlice {
    pub x: f64,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    /// Row-major, `values[i1 * xi2.len() + i2]`.
    pub values: Vec<f64>,
}

pub fn distribution_slice(disc: &Discretization, f: &DistributionState, x: f64, resolution: usize) -> Result<DistributionSlice> {
    let mesh = &disc.mesh;
    let i = mesh
        .locate_x(x)
        .ok_or_else(|| Error::InvalidArgument(format!("slice position {x} outside the spatial domain")))?;
    if resolution == 0 {
        return Err(Error::InvalidArgument("slice resolution must be positive".into()));
    }
    let d = &mesh.domain;
    let sample = |lo: f64, hi: f64| -> Vec<f64> {
        (0..resolution).map(|n| lo + (n as f64 + 0.5) * (hi - lo) / resolution as f64).collect()
    };
    let xi1 = sample(d.v1_min, d.v1_max);
    let xi2 = sample(d.v2_min, d.v2_max);
    let mut values = Vec::with_capacity(resolution * resolution);
    for &u in &xi1 {
        let j1 = (((u - d.v1_min) / mesh.h_v1) as usize).min(mesh.n_v1 - 1);
        for &v in &xi2 {
            let j2 = (((v - d.v2_min) / mesh.h_v2) as usize).min(mesh.n_v2 - 1);
            values.push(evaluate(f, &disc.basis, mesh, mesh.cell_index(i, j1, j2), [x, u, v])?);
        }
    }
    Ok(DistributionSlice { x, xi1, xi2, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{project, project_1d, BasisFamily};
    use crate::mesh::{reflect_velocity_indices, Domain1P2V};
    use crate::scenario::{initial_state, Scenario, WeibelParams};

    fn disc(n: usize, k: usize) -> Discretization {
        let mesh = PhaseMesh::new(Domain1P2V::from_wavenumber(0.2, 1.2).unwrap(), n, n, n).unwrap();
        Discretization::new(mesh, k, BasisFamily::PType).unwrap()
    }

    fn empty_state(d: &Discretization) -> SolutionState {
        SolutionState {
            f: CellCoefficients::zeros(d.mesh.n_cells(), d.n_modes()),
            fields: FieldState::zeros(d.mesh.n_x, d.n_field_modes()),
            t: 0.0,
        }
    }

    #[test]
    fn zero_state_has_zero_diagnostics() {
        let d = disc(4, 1);
        let rec = record(&d, &empty_state(&d), FluxKind::Upwind).unwrap();
        for v in &rec.values()[..14] {
            assert_eq!(*v, 0.0);
        }
        assert!(rec.log_fourier_b3.iter().all(|&v| v == LOG_FOURIER_FLOOR));
    }

    #[test]
    fn magnetic_energy_of_sine() {
        let d = disc(16, 2);
        let mut s = empty_state(&d);
        s.fields.b3 = project_1d(|x| 0.001 * (0.2 * x).sin(), &d.mesh, 2, 6).unwrap();
        let rec = record(&d, &s, FluxKind::Upwind).unwrap();
        assert!((rec.magnetic - 2.5e-7).abs() < 1e-10, "{}", rec.magnetic);
    }

    #[test]
    fn log_fourier_of_sine() {
        let d = disc(16, 2);
        let w = project_1d(|x| (0.2 * x).sin(), &d.mesh, 2, 6).unwrap();
        let m1 = log_fourier_mode(&d.mesh, &w, 1).unwrap();
        assert!((m1 - 0.5f64.log10()).abs() < 1e-5, "{m1}");
        assert!(log_fourier_mode(&d.mesh, &w, 2).unwrap() <= -14.0);
        let c = project_1d(|_| 3.0, &d.mesh, 2, 6).unwrap();
        for n in 1..=4 {
            assert!(log_fourier_mode(&d.mesh, &c, n).unwrap() <= -14.0);
        }
        assert!(log_fourier_mode(&d.mesh, &c, 0).is_err());
    }

    #[test]
    fn continuous_fields_have_no_jump_term() {
        let d = disc(8, 1);
        let mut s = empty_state(&d);
        s.fields.e1 = project_1d(|_| 0.3, &d.mesh, 1, 3).unwrap();
        s.fields.b3 = project_1d(|_| -0.1, &d.mesh, 1, 3).unwrap();
        assert!(theta_terms(&d, &s, FluxKind::Upwind).theta2 < 1e-28);
        s.fields.b3 = project_1d(|x| (0.2 * x).sin(), &d.mesh, 1, 3).unwrap();
        assert!(theta_terms(&d, &s, FluxKind::Upwind).theta2 > 0.0);
        assert_eq!(theta_terms(&d, &s, FluxKind::Central).theta2, 0.0);
    }

    #[test]
    fn weibel_moments() {
        // velocity cells narrower than the beam width resolve the Gaussians
        let mesh = PhaseMesh::new(Domain1P2V::from_wavenumber(0.2, 1.2).unwrap(), 4, 40, 40).unwrap();
        let d = Discretization::new(mesh, 2, BasisFamily::PType).unwrap();
        let p = WeibelParams::choice1();
        let s = initial_state(&d, &Scenario::Weibel(p), 6).unwrap();
        let rec = record(&d, &s, FluxKind::Upwind).unwrap();
        // rho = 1 and K1 = (delta v01^2 + (1-delta) v02^2 + beta/2) / 2
        assert!((rec.mass - 1.0).abs() < 1e-10, "{}", rec.mass);
        assert!((rec.k1 - 0.0475).abs() < 1e-5, "{}", rec.k1);
        assert!((rec.k2 - 0.0025).abs() < 1e-5, "{}", rec.k2);
        assert!(rec.p1.abs() < 1e-14);
        assert!(rec.theta1.abs() < 1e-14 && rec.theta3.abs() < 1e-14);
        let th = theta_terms(&d, &s, FluxKind::Upwind);
        assert!(th.theta1.abs() < 1e-14 && th.theta3.abs() < 1e-14);
        let rho = density_profile(&d, &s.f);
        for i in 0..d.mesh.n_x {
            assert!((rho.cell(i)[0] / 2f64.sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn density_is_reflection_invariant() {
        let d = disc(4, 2);
        let f = project(|x, u, v| (1.0 + 0.3 * (0.2 * x).sin()) * (-(u - 0.2).powi(2) - 2.0 * (v + 0.1).powi(2)).exp() * (1.0 + u), &d.mesh, &d.basis, 5).unwrap();
        let mut r = CellCoefficients::zeros(d.mesh.n_cells(), d.n_modes());
        let refl = reflect_velocity_indices(&d.mesh);
        for cell in 0..d.mesh.n_cells() {
            r.cell_mut(refl.permutation[cell]).copy_from_slice(f.cell(cell));
        }
        crate::basis::reflect_coefficients(&mut r, &d.basis);
        let a = density_profile(&d, &f);
        let b = density_profile(&d, &r);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-13);
        }
        let c = project(|_, _, _| 2.0, &d.mesh, &d.basis, 4).unwrap();
        let rho = density_profile(&d, &c);
        for i in 0..d.mesh.n_x {
            assert!((rho.cell(i)[0] / 2f64.sqrt() - 2.0 * 2.4 * 2.4).abs() < 1e-12);
        }
    }

    #[test]
    fn slices() {
        let d = disc(4, 2);
        let flat = project(|_, _, _| 1.5, &d.mesh, &d.basis, 4).unwrap();
        let s = distribution_slice(&d, &flat, 1.0, 8).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.5).abs() < 1e-13));
        assert!(distribution_slice(&d, &flat, -1.0, 8).is_err());
        assert!(distribution_slice(&d, &flat, 1e6, 8).is_err());
    }

    #[test]
    fn csv_layout() {
        let header = DiagnosticsRecord::csv_header();
        let cols: Vec<&str> = header.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(cols.len(), 26);
        assert_eq!(cols[0], "t");
        assert_eq!(cols[13], "theta3");
        assert_eq!(cols[25], "logFM_B3_4");
        assert!(header.starts_with("# vlasov-dg timeseries schema_version=1"));
    }
}
