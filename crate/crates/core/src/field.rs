//! Nodal coefficient storage, collocation, quadrature norms and CSV I/O.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, Layout, Mesh};

/// Nodal values of a scalar in element-major order, see [`Layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    layout: Layout,
    data: Vec<f64>,
}

impl NodalField {
    pub fn zeros(mesh: &Mesh) -> Self {
        let layout = mesh.layout();
        Self {
            layout,
            data: vec![0.0; layout.len()],
        }
    }

    pub fn from_vec(mesh: &Mesh, data: Vec<f64>) -> Result<Self> {
        let layout = mesh.layout();
        if data.len() != layout.len() {
            return Err(Error::ShapeMismatch {
                expected: layout.len(),
                found: data.len(),
            });
        }
        Ok(Self { layout, data })
    }

    pub(crate) fn from_layout(layout: Layout, data: Vec<f64>) -> Self {
        debug_assert_eq!(layout.len(), data.len());
        Self { layout, data }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, element: [usize; 2], node: [usize; 2]) -> f64 {
        self.data[self.layout.index(element, node)]
    }

    /// 1D accessor: `value[element][node]`.
    pub fn at(&self, element: usize, node: usize) -> f64 {
        self.get([element, 0], [node, 0])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &NodalField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn check_matches(&self, mesh: &Mesh) -> Result<()> {
        let layout = mesh.layout();
        if self.layout != layout {
            return Err(Error::ShapeMismatch {
                expected: layout.len(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// One [`NodalField`] per space dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub components: Vec<NodalField>,
}

impl GradientField {
    pub fn component(&self, d: usize) -> &NodalField {
        &self.components[d]
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Dirichlet traces `(left, right)` for every coordinate line of each direction;
/// `None` for periodic directions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    traces: Vec<Option<Vec<(f64, f64)>>>,
}

impl BoundaryData {
    /// Samples `exact` on the domain boundary of every Dirichlet direction.
    pub fn from_fn(mesh: &Mesh, exact: impl Fn(&[f64]) -> f64) -> Self {
        let layout = mesh.layout();
        let coords = mesh.coordinates();
        let traces = mesh
            .directions()
            .iter()
            .enumerate()
            .map(|(d, m)| {
                (m.bc() == BoundaryCondition::Dirichlet).then(|| {
                    (0..layout.n_lines(d))
                        .map(|k| {
                            let line = layout.line(d, k);
                            let mut lo = coords[line.index(0, 0)];
                            let mut hi = lo;
                            lo[d] = m.x_min();
                            hi[d] = m.x_max();
                            (exact(&lo[..mesh.dim()]), exact(&hi[..mesh.dim()]))
                        })
                        .collect()
                })
            })
            .collect();
        Self { traces }
    }

    pub fn homogeneous(mesh: &Mesh) -> Self {
        Self::from_fn(mesh, |_| 0.0)
    }

    /// No Dirichlet data at all; valid only for fully periodic meshes.
    pub fn none(mesh: &Mesh) -> Self {
        Self {
            traces: vec![None; mesh.dim()],
        }
    }

    /// 1D convenience constructor.
    pub fn dirichlet_1d(left: f64, right: f64) -> Self {
        Self {
            traces: vec![Some(vec![(left, right)])],
        }
    }

    pub fn direction(&self, d: usize) -> Option<&[(f64, f64)]> {
        self.traces.get(d).and_then(|t| t.as_deref())
    }

    pub(crate) fn zeroed(&self) -> Self {
        Self {
            traces: self
                .traces
                .iter()
                .map(|t| t.as_ref().map(|v| vec![(0.0, 0.0); v.len()]))
                .collect(),
        }
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let layout = mesh.layout();
        for (d, m) in mesh.directions().iter().enumerate() {
            if m.bc() == BoundaryCondition::Dirichlet {
                match self.direction(d) {
                    Some(t) if t.len() == layout.n_lines(d) => {}
                    Some(t) => {
                        return Err(Error::ShapeMismatch {
                            expected: layout.n_lines(d),
                            found: t.len(),
                        })
                    }
                    None => return Err(Error::MissingBoundaryData(d)),
                }
            }
        }
        Ok(())
    }
}

/// Nodal collocation of `f` (called with `[x]` in 1D, `[x, y]` in 2D).
pub fn interpolate(mesh: &Mesh, f: impl Fn(&[f64]) -> f64) -> NodalField {
    let dim = mesh.dim();
    let data = mesh.coordinates().iter().map(|c| f(&c[..dim])).collect();
    NodalField::from_layout(mesh.layout(), data)
}

/// GLL quadrature of a nodal field over the whole domain.
pub fn integrate(mesh: &Mesh, field: &NodalField) -> Result<f64> {
    field.check_matches(mesh)?;
    Ok(mesh
        .mass_weights()
        .iter()
        .zip(field.as_slice())
        .map(|(w, v)| w * v)
        .sum())
}

/// Discrete mean `integrate(field) / |domain|`.
pub fn mean(mesh: &Mesh, field: &NodalField) -> Result<f64> {
    let volume: f64 = mesh.directions().iter().map(|m| m.extent()).product();
    Ok(integrate(mesh, field)? / volume)
}

/// Discrete L2 distance between a field and the nodal values of `exact`.
pub fn l2_error(mesh: &Mesh, field: &NodalField, exact: impl Fn(&[f64]) -> f64) -> Result<f64> {
    field.check_matches(mesh)?;
    let dim = mesh.dim();
    let sum: f64 = mesh
        .mass_weights()
        .iter()
        .zip(mesh.coordinates())
        .zip(field.as_slice())
        .map(|((w, c), v)| {
            let diff = v - exact(&c[..dim]);
            w * diff * diff
        })
        .sum();
    Ok(sum.sqrt())
}

/// `sum_i w_i u_i v_i`.
pub fn mass_inner(weights: &[f64], u: &[f64], v: &[f64]) -> f64 {
    weights.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum()
}

fn csv_header(dim: usize) -> &'static [&'static str] {
    if dim == 1 {
        &["element_index", "node_index", "x", "value"]
    } else {
        &[
            "element_index_x",
            "element_index_y",
            "node_index_x",
            "node_index_y",
            "x",
            "y",
            "value",
        ]
    }
}

/// Writes one CSV row per node.
pub fn dump_csv<W: Write>(mesh: &Mesh, field: &NodalField, writer: W) -> Result<()> {
    field.check_matches(mesh)?;
    let dim = mesh.dim();
    let coords = mesh.coordinates();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(csv_header(dim))?;
    let mut result = Ok(());
    field.layout().for_each(|idx, [ex, ey], [ix, iy]| {
        if result.is_err() {
            return;
        }
        let c = coords[idx];
        let v = field.as_slice()[idx];
        let row: Vec<String> = if dim == 1 {
            vec![ex.to_string(), ix.to_string(), fmt_f64(c[0]), fmt_f64(v)]
        } else {
            vec![
                ex.to_string(),
                ey.to_string(),
                ix.to_string(),
                iy.to_string(),
                fmt_f64(c[0]),
                fmt_f64(c[1]),
                fmt_f64(v),
            ]
        };
        result = w.write_record(&row);
    });
    result?;
    w.flush()?;
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// Reads a field written by [`dump_csv`]; rows may come in any order.
pub fn load_csv<R: Read>(mesh: &Mesh, reader: R) -> Result<NodalField> {
    let dim = mesh.dim();
    let layout = mesh.layout();
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != csv_header(dim) {
        return Err(Error::InvalidConfig(format!("unexpected CSV header {headers:?}")));
    }
    let mut data = vec![f64::NAN; layout.len()];
    let bad = |what: &str| Error::InvalidConfig(format!("bad CSV field: {what}"));
    for rec in r.records() {
        let rec = rec?;
        let int = |i: usize| -> Result<usize> { rec[i].trim().parse().map_err(|_| bad(&rec[i])) };
        let (el, nd, vcol) = if dim == 1 {
            ([int(0)?, 0], [int(1)?, 0], 3)
        } else {
            ([int(0)?, int(1)?], [int(2)?, int(3)?], 6)
        };
        if (0..2).any(|d| el[d] >= layout.elements[d] || nd[d] >= layout.nodes[d]) {
            return Err(bad("index out of range"));
        }
        data[layout.index(el, nd)] = rec[vcol].trim().parse().map_err(|_| bad(&rec[vcol]))?;
    }
    let found = data.iter().filter(|v| !v.is_nan()).count();
    if found != data.len() {
        return Err(Error::ShapeMismatch {
            expected: data.len(),
            found,
        });
    }
    Ok(NodalField::from_layout(layout, data))
}
