//! Orthonormal modal Legendre bases, Gauss-Legendre quadrature, L2 projection
//! and point evaluation.
//!
//! Every basis function is orthonormal on the reference cell `[-1, 1]^d`, so
//! the physical mass matrix of a cell is `J * I` with `J` the Jacobian of the
//! affine map. Coefficient vectors are therefore plain inner products with the
//! basis and no mass-matrix solve is ever needed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::PhaseMesh;

/// One-dimensional Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `g` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&n, &w)| w * g(mid + half * n))
            .sum::<f64>()
            * half
    }

    /// Tensor-product nodes and weights in `dim` dimensions, last index fastest.
    pub fn tensor(&self, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.len();
        let total = n.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut p = vec![0.0; dim];
            let mut w = 1.0;
            for d in (0..dim).rev() {
                let q = rest % n;
                rest /= n;
                p[d] = self.nodes[q];
                w *= self.weights[q];
            }
            points.push(p);
            weights.push(w);
        }
        (points, weights)
    }
}

/// Legendre polynomial `P_n(x)` and its derivative, by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let mf = m as f64;
        let p_next = ((2.0 * mf + 1.0) * x * p - mf * p_prev) / (mf + 1.0);
        let dp_next = dp_prev + (2.0 * mf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// `n`-point Gauss-Legendre rule, computed by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one point".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // ascending order, exactly antisymmetric
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Orthonormal Legendre function `sqrt((2n+1)/2) P_n(x)` on `[-1, 1]`.
pub fn legendre(n: usize, x: f64) -> f64 {
    ((2 * n + 1) as f64 / 2.0).sqrt() * legendre_with_derivative(n, x).0
}

/// Derivative of [`legendre`].
pub fn legendre_derivative(n: usize, x: f64) -> f64 {
    ((2 * n + 1) as f64 / 2.0).sqrt() * legendre_with_derivative(n, x).1
}

/// Polynomial space used per phase-space cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisFamily {
    /// Total degree at most `k`.
    PType,
    /// Degree at most `k` in each variable.
    QType,
}

/// Modal basis on a phase-space cell: products `phi_a(x) phi_b1(xi1) phi_b2(xi2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalBasis {
    degree: usize,
    family: BasisFamily,
    modes: Vec<[usize; 3]>,
}

impl ModalBasis {
    pub fn new(degree: usize, family: BasisFamily) -> Self {
        let mut modes = Vec::new();
        for a in 0..=degree {
            for b1 in 0..=degree {
                for b2 in 0..=degree {
                    let keep = match family {
                        BasisFamily::PType => a + b1 + b2 <= degree,
                        BasisFamily::QType => true,
                    };
                    if keep {
                        modes.push([a, b1, b2]);
                    }
                }
            }
        }
        modes.sort_by_key(|&[a, b1, b2]| (a + b1 + b2, std::cmp::Reverse(a), std::cmp::Reverse(b1), b2));
        Self { degree, family, modes }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Multi-indices `(a, b1, b2)`; mode 0 is always the constant.
    pub fn modes(&self) -> &[[usize; 3]] {
        &self.modes
    }

    /// Sign picked up by each mode under `xi -> -xi`.
    pub fn velocity_parity(&self, mode: usize) -> f64 {
        let [_, b1, b2] = self.modes[mode];
        if (b1 + b2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Value of mode `m` at reference point `eta`.
    pub fn eval_mode(&self, mode: usize, eta: [f64; 3]) -> f64 {
        let [a, b1, b2] = self.modes[mode];
        legendre(a, eta[0]) * legendre(b1, eta[1]) * legendre(b2, eta[2])
    }

    /// Index of the mode with the given multi-index.
    pub fn mode_index(&self, index: [usize; 3]) -> Option<usize> {
        self.modes.iter().position(|&m| m == index)
    }
}

/// Per-cell modal coefficients of a scalar field; `n_modes` consecutive
/// entries per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCoefficients {
    pub n_modes: usize,
    pub data: Vec<f64>,
}

impl CellCoefficients {
    pub fn zeros(n_cells: usize, n_modes: usize) -> Self {
        Self { n_modes, data: vec![0.0; n_cells * n_modes] }
    }

    pub fn n_cells(&self) -> usize {
        self.data.len() / self.n_modes
    }

    #[inline]
    pub fn cell(&self, cell: usize) -> &[f64] {
        &self.data[cell * self.n_modes..(cell + 1) * self.n_modes]
    }

    #[inline]
    pub fn cell_mut(&mut self, cell: usize) -> &mut [f64] {
        &mut self.data[cell * self.n_modes..(cell + 1) * self.n_modes]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// First cell holding a non-finite coefficient.
    pub fn first_non_finite_cell(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite()).map(|i| i / self.n_modes)
    }

    /// `self = alpha * self + beta * other`.
    pub fn scale_add(&mut self, alpha: f64, beta: f64, other: &Self) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = alpha * *a + beta * b;
        }
    }
}

/// L2 projection of `g(x, xi1, xi2)` onto the DG space using `n_points`
/// Gauss points per direction.
pub fn project<G>(g: G, mesh: &PhaseMesh, basis: &ModalBasis, n_points: usize) -> Result<CellCoefficients>
where
    G: Fn(f64, f64, f64) -> f64 + Sync,
{
    let rule = gauss_legendre(n_points)?;
    let (points, weights) = rule.tensor(3);
    let n_modes = basis.dim();
    let table: Vec<f64> = (0..n_modes)
        .flat_map(|m| points.iter().map(move |p| basis.eval_mode(m, [p[0], p[1], p[2]])))
        .collect();
    let nq = points.len();
    let mut out = CellCoefficients::zeros(mesh.n_cells(), n_modes);
    out.data.par_chunks_mut(n_modes).enumerate().for_each(|(cell, coeffs)| {
        let [cx, c1, c2] = mesh.cell_center(cell);
        let mut values = Vec::with_capacity(nq);
        for (p, w) in points.iter().zip(&weights) {
            let v = g(cx + 0.5 * mesh.h_x * p[0], c1 + 0.5 * mesh.h_v1 * p[1], c2 + 0.5 * mesh.h_v2 * p[2]);
            values.push(w * v);
        }
        for (m, c) in coeffs.iter_mut().enumerate() {
            let row = &table[m * nq..(m + 1) * nq];
            *c = row.iter().zip(&values).map(|(t, v)| t * v).sum();
        }
    });
    if let Some(cell) = out.first_non_finite_cell() {
        return Err(Error::NonFinite {
            what: "in projected function".into(),
            detail: format!("cell {cell} centred at {:?}", mesh.cell_center(cell)),
        });
    }
    Ok(out)
}

/// Maps a physical point into the reference coordinates of `cell`, rejecting
/// points outside the closed cell.
pub fn reference_coordinates(mesh: &PhaseMesh, cell: usize, point: [f64; 3]) -> Result<[f64; 3]> {
    let center = mesh.cell_center(cell);
    let widths = mesh.widths();
    let mut eta = [0.0; 3];
    for d in 0..3 {
        eta[d] = 2.0 * (point[d] - center[d]) / widths[d];
        if !(eta[d].abs() <= 1.0 + 1e-12) {
            return Err(Error::PointOutsideCell { cell, point });
        }
        eta[d] = eta[d].clamp(-1.0, 1.0);
    }
    Ok(eta)
}

/// Value of the DG function restricted to `cell` at a physical point of its
/// closure. Evaluating on a shared face gives the trace from `cell`'s side.
pub fn evaluate(
    coeffs: &CellCoefficients,
    basis: &ModalBasis,
    mesh: &PhaseMesh,
    cell: usize,
    point: [f64; 3],
) -> Result<f64> {
    let eta = reference_coordinates(mesh, cell, point)?;
    Ok(coeffs.cell(cell).iter().enumerate().map(|(m, c)| c * basis.eval_mode(m, eta)).sum())
}

/// Applies the per-mode parity `(-1)^(b1 + b2)` in place.
pub fn reflect_coefficients(coeffs: &mut CellCoefficients, basis: &ModalBasis) {
    assert_eq!(coeffs.n_modes, basis.dim());
    let signs: Vec<f64> = (0..basis.dim()).map(|m| basis.velocity_parity(m)).collect();
    for cell in coeffs.data.chunks_mut(basis.dim()) {
        for (c, s) in cell.iter_mut().zip(&signs) {
            *c *= s;
        }
    }
}

/// Projection of `g(x)` onto piecewise polynomials of `degree` over the
/// x-partition of `mesh`.
pub fn project_1d<G>(g: G, mesh: &PhaseMesh, degree: usize, n_points: usize) -> Result<CellCoefficients>
where
    G: Fn(f64) -> f64,
{
    let rule = gauss_legendre(n_points)?;
    let mut out = CellCoefficients::zeros(mesh.n_x, degree + 1);
    for i in 0..mesh.n_x {
        let cx = mesh.x_center(i);
        let values: Vec<f64> = rule.nodes.iter().map(|&e| g(cx + 0.5 * mesh.h_x * e)).collect();
        for (a, c) in out.cell_mut(i).iter_mut().enumerate() {
            *c = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&values)
                .map(|((&e, &w), &v)| w * v * legendre(a, e))
                .sum();
        }
    }
    if let Some(cell) = out.first_non_finite_cell() {
        return Err(Error::NonFinite {
            what: "in projected field".into(),
            detail: format!("x-cell {cell}"),
        });
    }
    Ok(out)
}

/// Value of a 1D field in x-cell `i` at reference coordinate `eta`.
#[inline]
pub fn evaluate_1d_reference(coeffs: &[f64], eta: f64) -> f64 {
    coeffs.iter().enumerate().map(|(a, c)| c * legendre(a, eta)).sum()
}

/// Value of a piecewise-polynomial 1D field at physical `x` (periodic cell lookup).
pub fn evaluate_1d(field: &CellCoefficients, mesh: &PhaseMesh, x: f64) -> Result<f64> {
    let i = mesh
        .locate_x(x)
        .ok_or_else(|| Error::InvalidArgument(format!("x = {x} outside the spatial domain")))?;
    let eta = (2.0 * (x - mesh.x_center(i)) / mesh.h_x).clamp(-1.0, 1.0);
    Ok(evaluate_1d_reference(field.cell(i), eta))
}
