//! The discrete elliptic operator `phi -> -div_h q(phi) - f`.
//!
//! The gradient is reconstructed element-locally, so the residual is a
//! matrix-free map with a nearest-neighbour stencil. Dirichlet data and the
//! forcing enter affinely; [`EllipticOperator::apply`] is the homogeneous
//! linear part and [`EllipticOperator::rhs`] the matching right-hand side.

use crate::error::{Error, Result};
use crate::field::{BoundaryData, GradientField, NodalField};
use crate::gradient::{gather, line_bc, local_gradient_with, map_lines, LineKernel, RelaxationTime};
use crate::mesh::{BoundaryCondition, Mesh};

/// A symmetric (in the mass inner product) linear map on nodal vectors.
pub trait LinearOperator: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// Diagonal of the mass matrix defining the inner product.
    fn weights(&self) -> &[f64];
}

/// `T_r = L_r^2` with `L_r = (x_max - x_min) / (2 pi)` in 1D and
/// `L_r = (1 / 2 pi) dx dy / sqrt(dx^2 + dy^2)` in 2D.
pub fn relaxation_time(extents: &[(f64, f64)]) -> Result<RelaxationTime> {
    let lengths = extents
        .iter()
        .map(|&(lo, hi)| {
            if lo < hi && (hi - lo).is_finite() {
                Ok(hi - lo)
            } else {
                Err(Error::EmptyDomain { min: lo, max: hi })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let l_r = match lengths.as_slice() {
        [dx] => dx / two_pi,
        [dx, dy] => dx * dy / (dx * dx + dy * dy).sqrt() / two_pi,
        _ => return Err(Error::InvalidConfig(format!("unsupported dimension {}", lengths.len()))),
    };
    RelaxationTime::from_length(l_r)
}

/// Relaxation time for the domain covered by `mesh`.
pub fn relaxation_time_for(mesh: &Mesh) -> Result<RelaxationTime> {
    let extents: Vec<(f64, f64)> = mesh.directions().iter().map(|m| (m.x_min(), m.x_max())).collect();
    relaxation_time(&extents)
}

/// Orientation of the penalty in the Dirichlet boundary flux
/// `q^ = q_interior + [[phi]] / (2 sqrt(T_r))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirichletPenalty {
    /// `[[phi]]` oriented like at interior faces (right trace minus left
    /// trace), so `q^ . n = q . n - (phi - phi_bc) / (2 sqrt(T_r))`. The
    /// operator is positive definite and the pseudo-time march is stable.
    #[default]
    Stabilizing,
    /// Opposite orientation, `q^ . n = q . n + (phi - phi_bc) / (2 sqrt(T_r))`.
    /// Reproduces the published reference tables for the Dirichlet setups,
    /// but the operator can be indefinite on coarse meshes and the
    /// pseudo-time march diverges.
    Reversed,
}

impl std::fmt::Display for DirichletPenalty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Stabilizing => "stabilizing",
            Self::Reversed => "reversed",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EllipticOperator {
    mesh: Mesh,
    relax: RelaxationTime,
    kernels: Vec<LineKernel>,
    boundary: BoundaryData,
    homogeneous: BoundaryData,
    forcing: NodalField,
    weights: Vec<f64>,
    penalty: DirichletPenalty,
}

impl EllipticOperator {
    pub fn new(mesh: Mesh, relax: RelaxationTime, boundary: BoundaryData, forcing: NodalField) -> Result<Self> {
        forcing.check_matches(&mesh)?;
        boundary.validate(&mesh)?;
        let kernels = mesh.directions().iter().map(|m| LineKernel::new(m, relax)).collect();
        Ok(Self {
            homogeneous: boundary.zeroed(),
            weights: mesh.mass_weights(),
            mesh,
            relax,
            kernels,
            boundary,
            forcing,
            penalty: DirichletPenalty::default(),
        })
    }

    pub fn with_dirichlet_penalty(mut self, penalty: DirichletPenalty) -> Self {
        self.kernels.iter_mut().for_each(|k| k.set_penalty(penalty));
        self.penalty = penalty;
        self
    }

    pub fn dirichlet_penalty(&self) -> DirichletPenalty {
        self.penalty
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn relaxation(&self) -> RelaxationTime {
        self.relax
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn forcing(&self) -> &NodalField {
        &self.forcing
    }

    /// All directions periodic: constants span the null space.
    pub fn is_singular(&self) -> bool {
        self.mesh
            .directions()
            .iter()
            .all(|m| m.bc() == BoundaryCondition::Periodic)
    }

    fn eval(&self, phi: &[f64], bd: &BoundaryData, out: &mut [f64]) {
        let layout = self.mesh.layout();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (d, kernel) in self.kernels.iter().enumerate() {
            let (ne, n) = (layout.elements[d], layout.nodes[d]);
            map_lines(layout, d, out, true, |k, line, acc| {
                let mut phi_line = vec![0.0; ne * n];
                let mut q = vec![0.0; ne * n];
                let mut scratch = vec![0.0; ne * n];
                gather(phi, line, ne, n, &mut phi_line);
                let bc = line_bc(bd, d, k);
                kernel.local_gradient(&phi_line, bc, &mut q, &mut scratch);
                kernel.neg_divergence(&phi_line, &q, bc, acc);
            });
        }
    }

    /// `R(phi) = -div_h q(phi) - f` including boundary data.
    pub fn residual(&self, phi: &NodalField) -> Result<NodalField> {
        phi.check_matches(&self.mesh)?;
        let mut out = vec![0.0; phi.len()];
        self.eval(phi.as_slice(), &self.boundary, &mut out);
        for (r, f) in out.iter_mut().zip(self.forcing.as_slice()) {
            *r -= f;
        }
        Ok(NodalField::from_layout(phi.layout(), out))
    }

    /// `b = -R(0)`.
    pub fn rhs(&self) -> NodalField {
        let zero = NodalField::zeros(&self.mesh);
        let mut r = self.residual(&zero).expect("zero field matches mesh");
        r.as_mut_slice().iter_mut().for_each(|v| *v = -*v);
        r
    }

    /// `A phi = R(phi) - R(0)`.
    pub fn apply_field(&self, phi: &NodalField) -> Result<NodalField> {
        phi.check_matches(&self.mesh)?;
        let mut out = vec![0.0; phi.len()];
        self.eval(phi.as_slice(), &self.homogeneous, &mut out);
        Ok(NodalField::from_layout(phi.layout(), out))
    }

    /// The affine split `R(phi) = A phi - b`.
    pub fn linear_parts(&self) -> (impl Fn(&NodalField) -> NodalField + '_, NodalField) {
        (
            move |phi: &NodalField| self.apply_field(phi).expect("field does not match operator mesh"),
            self.rhs(),
        )
    }

    /// Locally reconstructed gradient including the Dirichlet lift.
    pub fn gradient(&self, phi: &NodalField) -> Result<GradientField> {
        phi.check_matches(&self.mesh)?;
        Ok(local_gradient_with(self.mesh.layout(), &self.kernels, phi, &self.boundary))
    }
}

impl LinearOperator for EllipticOperator {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.eval(x, &self.homogeneous, out);
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}
