//! Precomputed reference-cell tables shared by the operators.
//!
//! Everything here is immutable after construction and is shared read-only by
//! the cell loops.

use crate::basis::{gauss_legendre, legendre, legendre_derivative, BasisFamily, ModalBasis, QuadratureRule};
use crate::error::Result;
use crate::mesh::PhaseMesh;

/// Index of the low (`eta = -1`) and high (`eta = +1`) face of a cell.
pub const LO: usize = 0;
pub const HI: usize = 1;

/// Mesh, bases and quadrature tables for one run.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: PhaseMesh,
    pub basis: ModalBasis,
    /// Polynomial degree of the field space (equal to the `f` degree).
    pub field_degree: usize,
    /// Operator quadrature, `k + 2` points per direction by default.
    pub rule: QuadratureRule,
    pub(crate) nq: usize,
    /// `phi_m` at volume nodes, `[m][qx][q1][q2]`.
    pub(crate) vol_phi: Vec<f64>,
    /// Weighted derivatives `W_q d(phi_m)/d(eta_d)` at volume nodes, one table per axis.
    pub(crate) vol_test: [Vec<f64>; 3],
    /// `phi_m` on faces, `[axis][side]` then `[m][q_a][q_b]` over the two remaining axes.
    pub(crate) face_phi: [[Vec<f64>; 2]; 3],
    /// Weighted face values `w_a w_b phi_m`.
    pub(crate) face_test: [[Vec<f64>; 2]; 3],
    /// 1D field basis at the nodes, `[a][q]`.
    pub(crate) leg_1d: Vec<f64>,
    /// Weighted derivatives `w_q phi_a'(eta_q)`.
    pub(crate) dleg_1d_test: Vec<f64>,
    /// Field basis at `eta = -1, +1`, `[side][a]`.
    pub(crate) leg_1d_face: [Vec<f64>; 2],
    /// `int_{K_j} xi^p phi_b dxi` for `p = 0, 1, 2`, `[p][j * (k+1) + b]`, per velocity axis.
    pub(crate) moments: [[Vec<f64>; 3]; 2],
}

impl Discretization {
    pub fn new(mesh: PhaseMesh, degree: usize, family: BasisFamily) -> Result<Self> {
        Self::with_quadrature(mesh, degree, family, degree + 2)
    }

    pub fn with_quadrature(mesh: PhaseMesh, degree: usize, family: BasisFamily, n_points: usize) -> Result<Self> {
        let basis = ModalBasis::new(degree, family);
        let rule = gauss_legendre(n_points)?;
        let nq = rule.len();
        let nq2 = nq * nq;
        let nq3 = nq2 * nq;
        let modes = basis.modes().to_vec();
        let eta = &rule.nodes;
        let w = &rule.weights;
        let leg = |n: usize, q: usize| legendre(n, eta[q]);
        let dleg = |n: usize, q: usize| legendre_derivative(n, eta[q]);

        let mut vol_phi = Vec::with_capacity(modes.len() * nq3);
        let mut vol_test = [Vec::new(), Vec::new(), Vec::new()];
        for &[a, b1, b2] in &modes {
            for qx in 0..nq {
                for q1 in 0..nq {
                    for q2 in 0..nq {
                        let wq = w[qx] * w[q1] * w[q2];
                        vol_phi.push(leg(a, qx) * leg(b1, q1) * leg(b2, q2));
                        vol_test[0].push(wq * dleg(a, qx) * leg(b1, q1) * leg(b2, q2));
                        vol_test[1].push(wq * leg(a, qx) * dleg(b1, q1) * leg(b2, q2));
                        vol_test[2].push(wq * leg(a, qx) * leg(b1, q1) * dleg(b2, q2));
                    }
                }
            }
        }

        let empty = || [Vec::with_capacity(modes.len() * nq2), Vec::with_capacity(modes.len() * nq2)];
        let mut face_phi = [empty(), empty(), empty()];
        let mut face_test = [empty(), empty(), empty()];
        for axis in 0..3 {
            for side in [LO, HI] {
                let e = if side == LO { -1.0 } else { 1.0 };
                for &idx in &modes {
                    for qa in 0..nq {
                        for qb in 0..nq {
                            // the two tangential axes, in increasing order
                            let mut v = 1.0;
                            let mut t = 0;
                            for (d, &n) in idx.iter().enumerate() {
                                if d == axis {
                                    v *= legendre(n, e);
                                } else {
                                    v *= leg(n, if t == 0 { qa } else { qb });
                                    t += 1;
                                }
                            }
                            face_phi[axis][side].push(v);
                            face_test[axis][side].push(w[qa] * w[qb] * v);
                        }
                    }
                }
            }
        }

        let r = degree;
        let mut leg_1d = Vec::with_capacity((r + 1) * nq);
        let mut dleg_1d_test = Vec::with_capacity((r + 1) * nq);
        for a in 0..=r {
            for q in 0..nq {
                leg_1d.push(leg(a, q));
                dleg_1d_test.push(w[q] * dleg(a, q));
            }
        }
        let leg_1d_face = [
            (0..=r).map(|a| legendre(a, -1.0)).collect(),
            (0..=r).map(|a| legendre(a, 1.0)).collect(),
        ];

        // polynomial integrands of degree <= k + 2
        let moment_rule = gauss_legendre(degree + 3)?;
        let moment_table = |n_cells: usize, center: &dyn Fn(usize) -> f64, h: f64| -> [Vec<f64>; 3] {
            let mut out = [Vec::new(), Vec::new(), Vec::new()];
            for (p, table) in out.iter_mut().enumerate() {
                for j in 0..n_cells {
                    for b in 0..=degree {
                        let c = center(j);
                        table.push(moment_rule.integrate(c - 0.5 * h, c + 0.5 * h, |xi| {
                            xi.powi(p as i32) * legendre(b, 2.0 * (xi - c) / h)
                        }));
                    }
                }
            }
            out
        };
        let moments = [
            moment_table(mesh.n_v1, &|j| mesh.v1_center(j), mesh.h_v1),
            moment_table(mesh.n_v2, &|j| mesh.v2_center(j), mesh.h_v2),
        ];

        Ok(Self {
            mesh,
            basis,
            field_degree: r,
            rule,
            nq,
            vol_phi,
            vol_test,
            face_phi,
            face_test,
            leg_1d,
            dleg_1d_test,
            leg_1d_face,
            moments,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.basis.dim()
    }

    pub fn n_field_modes(&self) -> usize {
        self.field_degree + 1
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_quadrature(&self) -> usize {
        self.nq
    }

    /// Physical coordinates of the operator quadrature nodes of velocity cell `j`
    /// along axis 1 (`v1`) or 2 (`v2`).
    pub fn velocity_nodes(&self, axis: usize, j: usize) -> Vec<f64> {
        let (c, h) = match axis {
            1 => (self.mesh.v1_center(j), self.mesh.h_v1),
            2 => (self.mesh.v2_center(j), self.mesh.h_v2),
            _ => panic!("velocity axis must be 1 or 2"),
        };
        self.rule.nodes.iter().map(|e| c + 0.5 * h * e).collect()
    }

    /// Values of a 1D field at the x-quadrature nodes of every x-cell, `[i][q]`.
    pub fn field_at_nodes(&self, coeffs: &crate::basis::CellCoefficients) -> Vec<f64> {
        let nq = self.nq;
        let r1 = self.n_field_modes();
        let mut out = vec![0.0; self.mesh.n_x * nq];
        for (i, vals) in out.chunks_mut(nq).enumerate() {
            let c = coeffs.cell(i);
            for (a, &ca) in c.iter().enumerate().take(r1) {
                for (q, v) in vals.iter_mut().enumerate() {
                    *v += ca * self.leg_1d[a * nq + q];
                }
            }
        }
        out
    }

    /// Velocity moment table `int_{K_j} xi^p phi_b dxi` for axis 1 or 2.
    pub fn moment(&self, axis: usize, power: usize, j: usize, b: usize) -> f64 {
        self.moments[axis - 1][power][j * (self.degree() + 1) + b]
    }
}
