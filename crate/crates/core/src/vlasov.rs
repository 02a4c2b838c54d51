//! Semi-discrete DG right-hand side of the reduced Vlasov equation
//!
//! `f_t + xi2 f_x + (E1 + xi2 B3) f_xi1 + (E2 - xi1 B3) f_xi2 = 0`
//!
//! with upwind fluxes on every face and the one-sided outflow convention on
//! the velocity cut-off.

use rayon::prelude::*;

use crate::basis::CellCoefficients;
use crate::error::{Error, Result};
use crate::maxwell::FieldState;
use crate::space::{Discretization, HI, LO};

/// Modal coefficients of `f_h` over the whole phase-space mesh.
pub type DistributionState = CellCoefficients;

/// Upwind flux for a face with oriented speed `speed` (positive when
/// transport goes from the `minus` side to the `plus` side).
#[inline]
pub fn upwind_scalar_flux(f_minus: f64, f_plus: f64, speed: f64) -> f64 {
    if speed > 0.0 {
        speed * f_minus
    } else if speed < 0.0 {
        speed * f_plus
    } else {
        speed * 0.5 * (f_minus + f_plus)
    }
}

/// Normal flux on a velocity boundary face given the interior trace and the
/// outward speed `a . n`: outflow carries `f_inside`, inflow brings nothing.
#[inline]
pub fn velocity_boundary_flux(f_inside: f64, speed: f64) -> f64 {
    0.5 * f_inside * (speed + speed.abs())
}

/// Lorentz force `a = (E1 + xi2 B3, E2 - xi1 B3)` sampled at the x-quadrature
/// nodes of every x-cell.
#[derive(Debug, Clone)]
pub struct ForceField {
    nq: usize,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub b3: Vec<f64>,
}

impl ForceField {
    pub fn new(disc: &Discretization, fields: &FieldState) -> Self {
        Self {
            nq: disc.n_quadrature(),
            e1: disc.field_at_nodes(&fields.e1),
            e2: disc.field_at_nodes(&fields.e2),
            b3: disc.field_at_nodes(&fields.b3),
        }
    }

    pub fn zero(disc: &Discretization) -> Self {
        let n = disc.mesh.n_x * disc.n_quadrature();
        Self { nq: disc.n_quadrature(), e1: vec![0.0; n], e2: vec![0.0; n], b3: vec![0.0; n] }
    }

    #[inline]
    pub fn a1(&self, i: usize, qx: usize, xi2: f64) -> f64 {
        let k = i * self.nq + qx;
        self.e1[k] + xi2 * self.b3[k]
    }

    #[inline]
    pub fn a2(&self, i: usize, qx: usize, xi1: f64) -> f64 {
        let k = i * self.nq + qx;
        self.e2[k] - xi1 * self.b3[k]
    }

    /// Largest `|a1|` and `|a2|` over the given velocity node extremes.
    pub fn max_speeds(&self, xi1_max: f64, xi2_max: f64) -> (f64, f64) {
        let mut m1: f64 = 0.0;
        let mut m2: f64 = 0.0;
        for k in 0..self.e1.len() {
            m1 = m1.max(self.e1[k].abs() + xi2_max * self.b3[k].abs());
            m2 = m2.max(self.e2[k].abs() + xi1_max * self.b3[k].abs());
        }
        (m1, m2)
    }
}

struct Scratch {
    fq: Vec<f64>,
    g: [Vec<f64>; 3],
    own: Vec<f64>,
    nbr: Vec<f64>,
    flux: Vec<f64>,
}

impl Scratch {
    fn new(nq: usize) -> Self {
        let nq3 = nq * nq * nq;
        let nq2 = nq * nq;
        Self {
            fq: vec![0.0; nq3],
            g: [vec![0.0; nq3], vec![0.0; nq3], vec![0.0; nq3]],
            own: vec![0.0; nq2],
            nbr: vec![0.0; nq2],
            flux: vec![0.0; nq2],
        }
    }
}

#[inline]
fn trace_into(out: &mut [f64], coeffs: &[f64], table: &[f64]) {
    let n = out.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    for (m, &c) in coeffs.iter().enumerate() {
        let row = &table[m * n..(m + 1) * n];
        for (o, t) in out.iter_mut().zip(row) {
            *o += c * t;
        }
    }
}

#[inline]
fn project_face(out: &mut [f64], flux: &[f64], table: &[f64], scale: f64) {
    let n = flux.len();
    for (m, o) in out.iter_mut().enumerate() {
        let row = &table[m * n..(m + 1) * n];
        let s: f64 = row.iter().zip(flux).map(|(t, f)| t * f).sum();
        *o += scale * s;
    }
}

/// Time derivative of the modal coefficients of `f_h` for a frozen force field.
///
/// Each cell computes its own face fluxes, including the neighbour traces, so
/// the loop has no shared mutable state.
pub fn vlasov_rhs(disc: &Discretization, f: &DistributionState, force: &ForceField) -> Result<DistributionState> {
    let mut out = CellCoefficients::zeros(disc.mesh.n_cells(), disc.n_modes());
    vlasov_rhs_into(disc, f, force, &mut out)?;
    Ok(out)
}

pub fn vlasov_rhs_into(
    disc: &Discretization,
    f: &DistributionState,
    force: &ForceField,
    out: &mut DistributionState,
) -> Result<()> {
    let n_modes = disc.n_modes();
    assert_eq!(f.n_modes, n_modes);
    assert_eq!(f.n_cells(), disc.mesh.n_cells());
    out.n_modes = n_modes;
    out.data.resize(f.data.len(), 0.0);
    out.data
        .par_chunks_mut(n_modes)
        .enumerate()
        .try_for_each_init(
            || Scratch::new(disc.n_quadrature()),
            |scratch, (cell, rhs)| {
                cell_rhs(disc, f, force, cell, scratch, rhs);
                if rhs.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::NonFinite {
                        what: "in Vlasov right-hand side".into(),
                        detail: format!(
                            "cell {cell} {:?} centred at {:?}: coefficients {:?}, rhs {:?}",
                            disc.mesh.cell_coords(cell),
                            disc.mesh.cell_center(cell),
                            f.cell(cell),
                            rhs
                        ),
                    })
                }
            },
        )
}

fn cell_rhs(disc: &Discretization, f: &DistributionState, force: &ForceField, cell: usize, s: &mut Scratch, rhs: &mut [f64]) {
    let mesh = &disc.mesh;
    let nq = disc.nq;
    let nq2 = nq * nq;
    let nq3 = nq2 * nq;
    let eta = &disc.rule.nodes;
    let (i, j1, j2) = mesh.cell_coords(cell);
    let c = f.cell(cell);
    let c1 = mesh.v1_center(j1);
    let c2 = mesh.v2_center(j2);
    let (sx, s1, s2) = (2.0 / mesh.h_x, 2.0 / mesh.h_v1, 2.0 / mesh.h_v2);
    let xi1 = |q: usize| c1 + 0.5 * mesh.h_v1 * eta[q];
    let xi2 = |q: usize| c2 + 0.5 * mesh.h_v2 * eta[q];

    // volume term: int f (xi2 d_x g + a . grad_xi g)
    trace_into(&mut s.fq, c, &disc.vol_phi);
    let [g0, g1, g2] = &mut s.g;
    for qx in 0..nq {
        for q1 in 0..nq {
            let v1 = xi1(q1);
            for q2 in 0..nq {
                let v2 = xi2(q2);
                let q = (qx * nq + q1) * nq + q2;
                let fv = s.fq[q];
                g0[q] = sx * fv * v2;
                g1[q] = s1 * fv * force.a1(i, qx, v2);
                g2[q] = s2 * fv * force.a2(i, qx, v1);
            }
        }
    }
    for (m, r) in rhs.iter_mut().enumerate() {
        let range = m * nq3..(m + 1) * nq3;
        let (t0, t1, t2) = (&disc.vol_test[0][range.clone()], &disc.vol_test[1][range.clone()], &disc.vol_test[2][range]);
        let mut acc = 0.0;
        for q in 0..nq3 {
            acc += g0[q] * t0[q] + g1[q] * t1[q] + g2[q] * t2[q];
        }
        *r = acc;
    }

    // x faces, nodes (q1, q2); speed xi2 is constant in sign per cell
    {
        let up = f.cell(mesh.cell_index(mesh.x_neighbor(i, true), j1, j2));
        trace_into(&mut s.own, c, &disc.face_phi[0][HI]);
        trace_into(&mut s.nbr, up, &disc.face_phi[0][LO]);
        for q in 0..nq2 {
            s.flux[q] = upwind_scalar_flux(s.own[q], s.nbr[q], xi2(q % nq));
        }
        project_face(rhs, &s.flux, &disc.face_test[0][HI], -sx);

        let down = f.cell(mesh.cell_index(mesh.x_neighbor(i, false), j1, j2));
        trace_into(&mut s.own, c, &disc.face_phi[0][LO]);
        trace_into(&mut s.nbr, down, &disc.face_phi[0][HI]);
        for q in 0..nq2 {
            s.flux[q] = upwind_scalar_flux(s.nbr[q], s.own[q], xi2(q % nq));
        }
        project_face(rhs, &s.flux, &disc.face_test[0][LO], sx);
    }

    // v1 faces, nodes (qx, q2), speed a1 = E1 + xi2 B3
    {
        trace_into(&mut s.own, c, &disc.face_phi[1][HI]);
        if j1 + 1 == mesh.n_v1 {
            for q in 0..nq2 {
                let a = force.a1(i, q / nq, xi2(q % nq));
                s.flux[q] = velocity_boundary_flux(s.own[q], a);
            }
        } else {
            trace_into(&mut s.nbr, f.cell(mesh.cell_index(i, j1 + 1, j2)), &disc.face_phi[1][LO]);
            for q in 0..nq2 {
                let a = force.a1(i, q / nq, xi2(q % nq));
                s.flux[q] = upwind_scalar_flux(s.own[q], s.nbr[q], a);
            }
        }
        project_face(rhs, &s.flux, &disc.face_test[1][HI], -s1);

        trace_into(&mut s.own, c, &disc.face_phi[1][LO]);
        if j1 == 0 {
            for q in 0..nq2 {
                let a = force.a1(i, q / nq, xi2(q % nq));
                // outward normal is -xi1
                s.flux[q] = -velocity_boundary_flux(s.own[q], -a);
            }
        } else {
            trace_into(&mut s.nbr, f.cell(mesh.cell_index(i, j1 - 1, j2)), &disc.face_phi[1][HI]);
            for q in 0..nq2 {
                let a = force.a1(i, q / nq, xi2(q % nq));
                s.flux[q] = upwind_scalar_flux(s.nbr[q], s.own[q], a);
            }
        }
        project_face(rhs, &s.flux, &disc.face_test[1][LO], s1);
    }

    // v2 faces, nodes (qx, q1), speed a2 = E2 - xi1 B3
    {
        trace_into(&mut s.own, c, &disc.face_phi[2][HI]);
        if j2 + 1 == mesh.n_v2 {
            for q in 0..nq2 {
                let a = force.a2(i, q / nq, xi1(q % nq));
                s.flux[q] = velocity_boundary_flux(s.own[q], a);
            }
        } else {
            trace_into(&mut s.nbr, f.cell(mesh.cell_index(i, j1, j2 + 1)), &disc.face_phi[2][LO]);
            for q in 0..nq2 {
                let a = force.a2(i, q / nq, xi1(q % nq));
                s.flux[q] = upwind_scalar_flux(s.own[q], s.nbr[q], a);
            }
        }
        project_face(rhs, &s.flux, &disc.face_test[2][HI], -s2);

        trace_into(&mut s.own, c, &disc.face_phi[2][LO]);
        if j2 == 0 {
            for q in 0..nq2 {
                let a = force.a2(i, q / nq, xi1(q % nq));
                s.flux[q] = -velocity_boundary_flux(s.own[q], -a);
            }
        } else {
            trace_into(&mut s.nbr, f.cell(mesh.cell_index(i, j1, j2 - 1)), &disc.face_phi[2][HI]);
            for q in 0..nq2 {
                let a = force.a2(i, q / nq, xi1(q % nq));
                s.flux[q] = upwind_scalar_flux(s.nbr[q], s.own[q], a);
            }
        }
        project_face(rhs, &s.flux, &disc.face_test[2][LO], s2);
    }
}

/// Velocity moment `int f xi1^p1 xi2^p2 dxi` as a piecewise polynomial in x,
/// integrated exactly.
pub fn velocity_moment(disc: &Discretization, f: &DistributionState, p1: usize, p2: usize) -> CellCoefficients {
    let mesh = &disc.mesh;
    let mut out = CellCoefficients::zeros(mesh.n_x, disc.n_field_modes().max(disc.degree() + 1));
    let modes = disc.basis.modes();
    for i in 0..mesh.n_x {
        let acc = out.cell_mut(i);
        for j1 in 0..mesh.n_v1 {
            for j2 in 0..mesh.n_v2 {
                let c = f.cell(mesh.cell_index(i, j1, j2));
                for (m, &[a, b1, b2]) in modes.iter().enumerate() {
                    acc[a] += c[m] * disc.moment(1, p1, j1, b1) * disc.moment(2, p2, j2, b2);
                }
            }
        }
    }
    out
}
