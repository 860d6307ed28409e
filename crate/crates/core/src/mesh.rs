//! One-dimensional element partitions and their tensor products.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sbp::{gll_operator, scale_to_element, SbpOperator, ScaledOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone)]
pub struct Mesh1D {
    boundaries: Vec<f64>,
    bc: BoundaryCondition,
    op: Arc<SbpOperator>,
    elements: Vec<ScaledOperator>,
}

impl Mesh1D {
    pub fn from_operator(boundaries: Vec<f64>, op: Arc<SbpOperator>, bc: BoundaryCondition) -> Result<Self> {
        if boundaries.len() < 3 {
            return Err(Error::TooFewElements(boundaries.len().saturating_sub(1)));
        }
        if boundaries.iter().any(|x| !x.is_finite()) || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotoneBoundaries);
        }
        let elements = boundaries
            .windows(2)
            .map(|w| scale_to_element(op.clone(), w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            boundaries,
            bc,
            op,
            elements,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Nodes per element.
    pub fn n_nodes(&self) -> usize {
        self.op.len()
    }

    pub fn degree(&self) -> usize {
        self.op.degree()
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn operator(&self) -> &Arc<SbpOperator> {
        &self.op
    }

    pub fn elements(&self) -> &[ScaledOperator] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &ScaledOperator {
        &self.elements[e]
    }

    pub fn x_min(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn extent(&self) -> f64 {
        self.x_max() - self.x_min()
    }

    pub fn h_min(&self) -> f64 {
        self.elements
            .iter()
            .map(ScaledOperator::length)
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of interfaces that couple two elements.
    pub fn n_interfaces(&self) -> usize {
        match self.bc {
            BoundaryCondition::Dirichlet => self.n_elements() - 1,
            BoundaryCondition::Periodic => self.n_elements(),
        }
    }

    /// (left element, right element) of interface `i`. Interface `i` sits at the
    /// right end of element `i`; for periodic meshes the last one wraps around.
    pub fn interface_neighbors(&self, i: usize) -> (usize, usize) {
        (i, (i + 1) % self.n_elements())
    }

    /// All physical node coordinates, element-major.
    pub fn node_coordinates(&self) -> Vec<f64> {
        self.elements.iter().flat_map(ScaledOperator::nodes).collect()
    }

    /// Mass weights `(h_e / 2) w_i`, element-major.
    pub fn mass_weights(&self) -> Vec<f64> {
        self.elements.iter().flat_map(ScaledOperator::mass_diag).collect()
    }
}

pub fn uniform_mesh_1d(
    x_min: f64,
    x_max: f64,
    n_elements: usize,
    degree: usize,
    bc: BoundaryCondition,
) -> Result<Mesh1D> {
    if n_elements < 2 {
        return Err(Error::TooFewElements(n_elements));
    }
    if !(x_min < x_max) {
        return Err(Error::EmptyDomain { min: x_min, max: x_max });
    }
    let h = (x_max - x_min) / n_elements as f64;
    let mut boundaries: Vec<f64> = (0..=n_elements).map(|i| x_min + i as f64 * h).collect();
    boundaries[n_elements] = x_max;
    nonuniform_mesh_1d(boundaries, degree, bc)
}

pub fn nonuniform_mesh_1d(boundaries: Vec<f64>, degree: usize, bc: BoundaryCondition) -> Result<Mesh1D> {
    let op = Arc::new(gll_operator(degree)?);
    Mesh1D::from_operator(boundaries, op, bc)
}

/// Element boundaries on `(x_min, x_max)` whose lengths grow by `ratio` from
/// left to right.
pub fn geometric_boundaries(x_min: f64, x_max: f64, n_elements: usize, ratio: f64) -> Result<Vec<f64>> {
    if n_elements < 2 {
        return Err(Error::TooFewElements(n_elements));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidConfig(format!("geometric ratio must be positive, got {ratio}")));
    }
    let len = x_max - x_min;
    let first = if (ratio - 1.0).abs() < 1e-14 {
        len / n_elements as f64
    } else {
        len * (ratio - 1.0) / (ratio.powi(n_elements as i32) - 1.0)
    };
    let mut boundaries = Vec::with_capacity(n_elements + 1);
    let mut x = x_min;
    let mut h = first;
    boundaries.push(x);
    for _ in 0..n_elements - 1 {
        x += h;
        boundaries.push(x);
        h *= ratio;
    }
    boundaries.push(x_max);
    Ok(boundaries)
}

/// Tensor product of two 1D partitions with equal degree.
#[derive(Debug, Clone)]
pub struct Mesh2D {
    mesh_x: Mesh1D,
    mesh_y: Mesh1D,
}

impl Mesh2D {
    pub fn new(mesh_x: Mesh1D, mesh_y: Mesh1D) -> Result<Self> {
        if mesh_x.degree() != mesh_y.degree() {
            return Err(Error::InvalidConfig(format!(
                "2D meshes need equal degrees, got {} and {}",
                mesh_x.degree(),
                mesh_y.degree()
            )));
        }
        Ok(Self { mesh_x, mesh_y })
    }

    pub fn mesh_x(&self) -> &Mesh1D {
        &self.mesh_x
    }

    pub fn mesh_y(&self) -> &Mesh1D {
        &self.mesh_y
    }
}

pub fn uniform_mesh_2d(
    x: (f64, f64),
    y: (f64, f64),
    n_elements: usize,
    degree: usize,
    bc: BoundaryCondition,
) -> Result<Mesh2D> {
    let op = Arc::new(gll_operator(degree)?);
    let line = |(lo, hi): (f64, f64)| -> Result<Mesh1D> {
        let m = uniform_mesh_1d(lo, hi, n_elements, degree, bc)?;
        Mesh1D::from_operator(m.boundaries, op.clone(), bc)
    };
    Mesh2D::new(line(x)?, line(y)?)
}

/// A 1D or 2D mesh. Directions are numbered `0 = x`, `1 = y`.
#[derive(Debug, Clone)]
pub enum Mesh {
    OneD(Mesh1D),
    TwoD(Mesh2D),
}

impl From<Mesh1D> for Mesh {
    fn from(m: Mesh1D) -> Self {
        Mesh::OneD(m)
    }
}

impl From<Mesh2D> for Mesh {
    fn from(m: Mesh2D) -> Self {
        Mesh::TwoD(m)
    }
}

impl Mesh {
    pub fn dim(&self) -> usize {
        match self {
            Mesh::OneD(_) => 1,
            Mesh::TwoD(_) => 2,
        }
    }

    pub fn directions(&self) -> Vec<&Mesh1D> {
        match self {
            Mesh::OneD(m) => vec![m],
            Mesh::TwoD(m) => vec![&m.mesh_x, &m.mesh_y],
        }
    }

    pub fn direction(&self, d: usize) -> &Mesh1D {
        self.directions()[d]
    }

    pub fn degree(&self) -> usize {
        self.direction(0).degree()
    }

    pub fn layout(&self) -> Layout {
        match self {
            Mesh::OneD(m) => Layout {
                elements: [m.n_elements(), 1],
                nodes: [m.n_nodes(), 1],
            },
            Mesh::TwoD(m) => Layout {
                elements: [m.mesh_x.n_elements(), m.mesh_y.n_elements()],
                nodes: [m.mesh_x.n_nodes(), m.mesh_y.n_nodes()],
            },
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.layout().len()
    }

    /// Mass-matrix diagonal in field storage order.
    pub fn mass_weights(&self) -> Vec<f64> {
        let layout = self.layout();
        let wx = self.direction(0).mass_weights();
        let wy = match self {
            Mesh::OneD(_) => vec![1.0],
            Mesh::TwoD(m) => m.mesh_y.mass_weights(),
        };
        let mut w = vec![0.0; layout.len()];
        layout.for_each(|idx, [ex, ey], [ix, iy]| {
            w[idx] = wx[ex * layout.nodes[0] + ix] * wy[ey * layout.nodes[1] + iy];
        });
        w
    }

    /// Node coordinates in field storage order; `y` is zero in 1D.
    pub fn coordinates(&self) -> Vec<[f64; 2]> {
        let layout = self.layout();
        let xs = self.direction(0).node_coordinates();
        let ys = match self {
            Mesh::OneD(_) => vec![0.0],
            Mesh::TwoD(m) => m.mesh_y.node_coordinates(),
        };
        let mut out = vec![[0.0; 2]; layout.len()];
        layout.for_each(|idx, [ex, ey], [ix, iy]| {
            out[idx] = [xs[ex * layout.nodes[0] + ix], ys[ey * layout.nodes[1] + iy]];
        });
        out
    }
}

/// Element-major storage layout: `value[ex][ey][ix][iy]`. A 1D field is the
/// special case with one element and one node in `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub elements: [usize; 2],
    pub nodes: [usize; 2],
}

/// A strided view of all nodes along one coordinate line.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Line {
    pub offset: usize,
    pub element_stride: usize,
    pub node_stride: usize,
}

impl Line {
    #[inline]
    pub fn index(&self, e: usize, i: usize) -> usize {
        self.offset + e * self.element_stride + i * self.node_stride
    }
}

impl Layout {
    pub fn len(&self) -> usize {
        self.elements[0] * self.elements[1] * self.nodes[0] * self.nodes[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, [ex, ey]: [usize; 2], [ix, iy]: [usize; 2]) -> usize {
        ((ex * self.elements[1] + ey) * self.nodes[0] + ix) * self.nodes[1] + iy
    }

    /// Calls `f(flat_index, element, node)` in storage order.
    pub fn for_each(&self, mut f: impl FnMut(usize, [usize; 2], [usize; 2])) {
        let mut idx = 0;
        for ex in 0..self.elements[0] {
            for ey in 0..self.elements[1] {
                for ix in 0..self.nodes[0] {
                    for iy in 0..self.nodes[1] {
                        f(idx, [ex, ey], [ix, iy]);
                        idx += 1;
                    }
                }
            }
        }
    }

    /// Number of coordinate lines running along direction `d`.
    pub(crate) fn n_lines(&self, d: usize) -> usize {
        let o = 1 - d;
        self.elements[o] * self.nodes[o]
    }

    /// Line `k` along direction `d`; `k` enumerates (element, node) of the
    /// transverse direction, element-major.
    pub(crate) fn line(&self, d: usize, k: usize) -> Line {
        let o = 1 - d;
        let (e_o, i_o) = (k / self.nodes[o], k % self.nodes[o]);
        let mut el = [0; 2];
        let mut nd = [0; 2];
        el[o] = e_o;
        nd[o] = i_o;
        let offset = self.index(el, nd);
        let mut el1 = el;
        el1[d] = 1;
        let mut nd1 = nd;
        nd1[d] = 1;
        let element_stride = if self.elements[d] > 1 { self.index(el1, nd) - offset } else { 0 };
        let node_stride = if self.nodes[d] > 1 { self.index(el, nd1) - offset } else { 0 };
        Line {
            offset,
            element_stride,
            node_stride,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        let m = uniform_mesh_1d(-1.0, 1.0, 10, 2, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(m.n_elements(), 10);
        assert!(m.elements().iter().all(|e| (e.length() - 0.2).abs() < 1e-15));

        let m = uniform_mesh_1d(-2.0, 2.0, 4, 3, BoundaryCondition::Periodic).unwrap();
        assert!(m.elements().iter().all(|e| e.length() == 1.0));
        assert_eq!(m.n_interfaces(), 4);
        assert_eq!(m.interface_neighbors(3), (3, 0));

        let m = uniform_mesh_1d(0.0, 1.0, 2, 1, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(m.boundaries(), &[0.0, 0.5, 1.0]);
        assert_eq!(m.n_interfaces(), 1);
    }

    #[test]
    fn nonuniform_examples() {
        let m = nonuniform_mesh_1d(vec![0.0, 0.3, 1.0], 2, BoundaryCondition::Dirichlet).unwrap();
        assert_close!(m.element(0).length(), 0.3, 1e-15);
        assert_close!(m.element(1).length(), 0.7, 1e-15);

        assert!(matches!(
            nonuniform_mesh_1d(vec![0.0, 0.5, 0.4], 2, BoundaryCondition::Dirichlet),
            Err(Error::NonMonotoneBoundaries)
        ));
        assert!(matches!(
            uniform_mesh_1d(0.0, 1.0, 1, 2, BoundaryCondition::Dirichlet),
            Err(Error::TooFewElements(1))
        ));
    }

    #[test]
    fn geometric_partition_grows() {
        let b = geometric_boundaries(-1.0, 1.0, 7, 1.2).unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(b[0], -1.0);
        assert_eq!(b[7], 1.0);
        let lengths: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(lengths.windows(2).all(|w| w[0] < w[1]));
        // h_0 (r^7 - 1) / (r - 1) = 2
        let h0 = 2.0 * 0.2 / (1.2_f64.powi(7) - 1.0);
        assert_close!(lengths[0], h0, 1e-15);
        assert_close!(lengths[6], h0 * 1.2_f64.powi(6), 1e-14);
    }

    #[test]
    fn line_strides_cover_each_direction_once() {
        let m: Mesh = uniform_mesh_2d((0.0, 1.0), (0.0, 2.0), 3, 2, BoundaryCondition::Periodic)
            .unwrap()
            .into();
        let layout = m.layout();
        for d in 0..2 {
            let mut seen = vec![0u8; layout.len()];
            for k in 0..layout.n_lines(d) {
                let line = layout.line(d, k);
                for e in 0..layout.elements[d] {
                    for i in 0..layout.nodes[d] {
                        seen[line.index(e, i)] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
        // x-lines share y, y-lines share x
        let coords = m.coordinates();
        let line = layout.line(0, 4);
        let y = coords[line.index(0, 0)][1];
        for e in 0..3 {
            for i in 0..3 {
                assert_eq!(coords[line.index(e, i)][1], y);
            }
        }
    }

    #[test]
    fn mixed_degrees_rejected() {
        let a = uniform_mesh_1d(0.0, 1.0, 2, 2, BoundaryCondition::Dirichlet).unwrap();
        let b = uniform_mesh_1d(0.0, 1.0, 2, 3, BoundaryCondition::Dirichlet).unwrap();
        assert!(Mesh2D::new(a, b).is_err());
    }
}
