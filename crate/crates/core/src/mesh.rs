//! Cartesian phase-space mesh over `(x2, xi1, xi2)`.
//!
//! The mesh is periodic in `x2` and truncated in velocity. Cells are ordered
//! x-major, then `xi1`, then `xi2`, so each x-cell owns a contiguous velocity
//! plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the velocity box.
pub const DEFAULT_VELOCITY_BOUND: f64 = 1.2;

/// Physical extent of the 1D2V phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain1P2V {
    pub x_min: f64,
    pub x_max: f64,
    pub v1_min: f64,
    pub v1_max: f64,
    pub v2_min: f64,
    pub v2_max: f64,
}

impl Domain1P2V {
    pub fn new(x_min: f64, x_max: f64, v1_bound: f64, v2_bound: f64) -> Result<Self> {
        let domain = Self {
            x_min,
            x_max,
            v1_min: -v1_bound,
            v1_max: v1_bound,
            v2_min: -v2_bound,
            v2_max: v2_bound,
        };
        domain.validate()?;
        Ok(domain)
    }

    /// Periodic box `[0, 2 pi / k0]` with the velocity box `[-v, v]^2`.
    pub fn from_wavenumber(k0: f64, velocity_bound: f64) -> Result<Self> {
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(Error::InvalidDomain(format!("wavenumber must be positive, got {k0}")));
        }
        Self::new(0.0, 2.0 * std::f64::consts::PI / k0, velocity_bound, velocity_bound)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.x_min, self.x_max, self.v1_min, self.v1_max, self.v2_min, self.v2_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("non-finite bound".into()));
        }
        if !(self.x_max > self.x_min) {
            return Err(Error::InvalidDomain(format!(
                "x_max ({}) must exceed x_min ({})",
                self.x_max, self.x_min
            )));
        }
        for (name, lo, hi) in [("v1", self.v1_min, self.v1_max), ("v2", self.v2_min, self.v2_max)] {
            if !(hi > 0.0) {
                return Err(Error::InvalidDomain(format!("{name} bound must be positive")));
            }
            if lo != -hi {
                return Err(Error::InvalidDomain(format!(
                    "{name} box [{lo}, {hi}] is not symmetric about zero"
                )));
            }
        }
        Ok(())
    }

    pub fn length_x(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn velocity_area(&self) -> f64 {
        (self.v1_max - self.v1_min) * (self.v2_max - self.v2_min)
    }
}

/// Coordinate direction in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    X,
    V1,
    V2,
}

impl Direction {
    pub fn axis(self) -> usize {
        match self {
            Direction::X => 0,
            Direction::V1 => 1,
            Direction::V2 => 2,
        }
    }
}

/// A face of the phase-space mesh normal to `direction`.
///
/// `lower` is the cell on the low-coordinate side (outward normal `+1`),
/// `upper` the cell on the high side (outward normal `-1`). Velocity boundary
/// faces have exactly one of the two set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub direction: Direction,
    pub lower: Option<usize>,
    pub upper: Option<usize>,
}

impl EdgeRef {
    pub fn is_boundary(&self) -> bool {
        self.lower.is_none() || self.upper.is_none()
    }

    /// Outward normal sign of the face as seen from `cell`.
    pub fn outward_normal(&self, cell: usize) -> Option<f64> {
        if self.lower == Some(cell) {
            Some(1.0)
        } else if self.upper == Some(cell) {
            Some(-1.0)
        } else {
            None
        }
    }
}

/// Uniform Cartesian mesh of the phase-space box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMesh {
    pub domain: Domain1P2V,
    pub n_x: usize,
    pub n_v1: usize,
    pub n_v2: usize,
    pub h_x: f64,
    pub h_v1: f64,
    pub h_v2: f64,
}

impl PhaseMesh {
    pub fn new(domain: Domain1P2V, n_x: usize, n_v1: usize, n_v2: usize) -> Result<Self> {
        domain.validate()?;
        for (name, n) in [("n_x", n_x), ("n_v1", n_v1), ("n_v2", n_v2)] {
            if n < 2 {
                return Err(Error::InvalidMesh(format!("{name} must be at least 2, got {n}")));
            }
        }
        for (name, n) in [("n_v1", n_v1), ("n_v2", n_v2)] {
            if n % 2 != 0 {
                return Err(Error::InvalidMesh(format!(
                    "{name} = {n} is odd; velocity meshes must be reflection-symmetric"
                )));
            }
        }
        Ok(Self {
            domain,
            n_x,
            n_v1,
            n_v2,
            h_x: domain.length_x() / n_x as f64,
            h_v1: (domain.v1_max - domain.v1_min) / n_v1 as f64,
            h_v2: (domain.v2_max - domain.v2_min) / n_v2 as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_x * self.n_v1 * self.n_v2
    }

    pub fn n_velocity_cells(&self) -> usize {
        self.n_v1 * self.n_v2
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j1: usize, j2: usize) -> usize {
        (i * self.n_v1 + j1) * self.n_v2 + j2
    }

    #[inline]
    pub fn cell_coords(&self, cell: usize) -> (usize, usize, usize) {
        let j2 = cell % self.n_v2;
        let rest = cell / self.n_v2;
        (rest / self.n_v1, rest % self.n_v1, j2)
    }

    /// Periodic neighbour of x-cell `i` in the `+x` (`forward = true`) or `-x` direction.
    #[inline]
    pub fn x_neighbor(&self, i: usize, forward: bool) -> usize {
        if forward {
            (i + 1) % self.n_x
        } else {
            (i + self.n_x - 1) % self.n_x
        }
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.domain.x_min + (i as f64 + 0.5) * self.h_x
    }

    pub fn v1_center(&self, j1: usize) -> f64 {
        self.domain.v1_min + (j1 as f64 + 0.5) * self.h_v1
    }

    pub fn v2_center(&self, j2: usize) -> f64 {
        self.domain.v2_min + (j2 as f64 + 0.5) * self.h_v2
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 3] {
        let (i, j1, j2) = self.cell_coords(cell);
        [self.x_center(i), self.v1_center(j1), self.v2_center(j2)]
    }

    pub fn widths(&self) -> [f64; 3] {
        [self.h_x, self.h_v1, self.h_v2]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h_x * self.h_v1 * self.h_v2
    }

    /// Jacobian of the map from `[-1, 1]^3` to a physical cell.
    pub fn jacobian(&self) -> f64 {
        self.cell_volume() / 8.0
    }

    /// Index of the x-cell containing `x`, with the right end mapped into the last cell.
    pub fn locate_x(&self, x: f64) -> Option<usize> {
        let d = &self.domain;
        if !(x >= d.x_min && x <= d.x_max) {
            return None;
        }
        Some((((x - d.x_min) / self.h_x) as usize).min(self.n_x - 1))
    }

    /// Enumerates every face: x-faces (periodic), then v1-faces, then v2-faces,
    /// each block in cell order.
    pub fn edges(&self) -> Vec<EdgeRef> {
        let mut edges = Vec::with_capacity(3 * self.n_cells() + 2 * self.n_x * (self.n_v1 + self.n_v2));
        for i in 0..self.n_x {
            for j1 in 0..self.n_v1 {
                for j2 in 0..self.n_v2 {
                    // face on the right of x-cell i
                    edges.push(EdgeRef {
                        direction: Direction::X,
                        lower: Some(self.cell_index(i, j1, j2)),
                        upper: Some(self.cell_index(self.x_neighbor(i, true), j1, j2)),
                    });
                }
            }
        }
        for i in 0..self.n_x {
            for j2 in 0..self.n_v2 {
                for face in 0..=self.n_v1 {
                    let lower = (face > 0).then(|| self.cell_index(i, face - 1, j2));
                    let upper = (face < self.n_v1).then(|| self.cell_index(i, face, j2));
                    edges.push(EdgeRef { direction: Direction::V1, lower, upper });
                }
            }
        }
        for i in 0..self.n_x {
            for j1 in 0..self.n_v1 {
                for face in 0..=self.n_v2 {
                    let lower = (face > 0).then(|| self.cell_index(i, j1, face - 1));
                    let upper = (face < self.n_v2).then(|| self.cell_index(i, j1, face));
                    edges.push(EdgeRef { direction: Direction::V2, lower, upper });
                }
            }
        }
        edges
    }
}

/// Discrete realisation of `xi -> -xi` on the mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VelocityReflection {
    /// `permutation[cell]` is the image of `cell`.
    pub permutation: Vec<usize>,
    /// Whether each axis `(x, v1, v2)` is flipped.
    pub flipped_axes: [bool; 3],
}

/// Cell permutation `(i, j1, j2) -> (i, n_v1 - 1 - j1, n_v2 - 1 - j2)`.
pub fn reflect_velocity_indices(mesh: &PhaseMesh) -> VelocityReflection {
    let permutation = (0..mesh.n_cells())
        .map(|cell| {
            let (i, j1, j2) = mesh.cell_coords(cell);
            mesh.cell_index(i, mesh.n_v1 - 1 - j1, mesh.n_v2 - 1 - j2)
        })
        .collect();
    VelocityReflection { permutation, flipped_axes: [false, true, true] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn weibel_domain() -> Domain1P2V {
        Domain1P2V::from_wavenumber(0.2, 1.2).unwrap()
    }

    #[test]
    fn weibel_mesh_sizes() {
        let mesh = PhaseMesh::new(weibel_domain(), 20, 20, 20).unwrap();
        assert_eq!(mesh.n_cells(), 8000);
        assert!((mesh.h_x - PI / 2.0).abs() < 1e-14);
        assert!((mesh.h_v1 - 0.12).abs() < 1e-14);
        assert!((mesh.h_v2 - 0.12).abs() < 1e-14);
        assert!((weibel_domain().length_x() - 10.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_odd_and_degenerate() {
        let d = weibel_domain();
        assert!(matches!(PhaseMesh::new(d, 4, 3, 4), Err(Error::InvalidMesh(_))));
        assert!(matches!(PhaseMesh::new(d, 4, 4, 5), Err(Error::InvalidMesh(_))));
        assert!(matches!(PhaseMesh::new(d, 1, 4, 4), Err(Error::InvalidMesh(_))));
        assert!(Domain1P2V::new(1.0, 1.0, 1.2, 1.2).is_err());
        assert!(Domain1P2V::from_wavenumber(0.0, 1.2).is_err());
        let skew = Domain1P2V { v1_min: -1.0, ..d };
        assert!(PhaseMesh::new(skew, 4, 4, 4).is_err());
    }

    #[test]
    fn periodic_wrap() {
        let mesh = PhaseMesh::new(weibel_domain(), 2, 2, 2).unwrap();
        assert_eq!(mesh.x_neighbor(1, true), 0);
        assert_eq!(mesh.x_neighbor(0, false), 1);
        let edges = mesh.edges();
        let x_edge_of_last = edges
            .iter()
            .find(|e| e.direction == Direction::X && e.lower == Some(mesh.cell_index(1, 1, 0)))
            .unwrap();
        assert_eq!(x_edge_of_last.upper, Some(mesh.cell_index(0, 1, 0)));
    }

    #[test]
    fn edge_counts_by_enumeration() {
        let mesh = PhaseMesh::new(weibel_domain(), 4, 4, 4).unwrap();
        let edges = mesh.edges();
        let boundary = edges.iter().filter(|e| e.is_boundary()).count();
        let boundary_v1 = edges.iter().filter(|e| e.is_boundary() && e.direction == Direction::V1).count();
        assert_eq!(boundary, 64);
        assert_eq!(boundary_v1, 32);
        assert!(edges.iter().filter(|e| e.direction == Direction::X).all(|e| !e.is_boundary()));

        // each cell touches exactly six faces, one per side and direction
        let mut touches = vec![0usize; mesh.n_cells()];
        for e in &edges {
            for c in [e.lower, e.upper].into_iter().flatten() {
                touches[c] += 1;
                let n = e.outward_normal(c).unwrap();
                if let (Some(l), Some(u)) = (e.lower, e.upper) {
                    assert_eq!(e.outward_normal(l).unwrap(), -e.outward_normal(u).unwrap());
                }
                assert!(n == 1.0 || n == -1.0);
            }
        }
        assert!(touches.iter().all(|&t| t == 6));
    }

    #[test]
    fn cell_volumes_sum_to_domain() {
        let mesh = PhaseMesh::new(weibel_domain(), 6, 4, 8).unwrap();
        let total = mesh.cell_volume() * mesh.n_cells() as f64;
        let expected = mesh.domain.length_x() * mesh.domain.velocity_area();
        assert!((total - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn ordering_round_trip() {
        let mesh = PhaseMesh::new(weibel_domain(), 3, 4, 6).unwrap();
        for cell in 0..mesh.n_cells() {
            let (i, j1, j2) = mesh.cell_coords(cell);
            assert_eq!(mesh.cell_index(i, j1, j2), cell);
        }
        assert_eq!(mesh.cell_index(0, 0, 1), 1);
        assert_eq!(mesh.cell_index(0, 1, 0), 6);
    }

    #[test]
    fn reflection_is_an_involution() {
        let mesh = PhaseMesh::new(weibel_domain(), 3, 4, 4).unwrap();
        let r = reflect_velocity_indices(&mesh);
        let (_, j1, _) = mesh.cell_coords(r.permutation[mesh.cell_index(0, 0, 0)]);
        assert_eq!(j1, 3);
        let (_, j1, _) = mesh.cell_coords(r.permutation[mesh.cell_index(0, 1, 0)]);
        assert_eq!(j1, 2);
        for cell in 0..mesh.n_cells() {
            assert_eq!(r.permutation[r.permutation[cell]], cell);
            let c = mesh.cell_center(cell);
            let m = mesh.cell_center(r.permutation[cell]);
            assert_eq!(c[0], m[0]);
            assert!((c[1] + m[1]).abs() < 1e-14 && (c[2] + m[2]).abs() < 1e-14);
        }
    }
}
