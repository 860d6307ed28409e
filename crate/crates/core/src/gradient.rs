//! Local evaluation of the discrete gradient.
//!
//! With the upwind fluxes `phi^ = {phi} + sqrt(T_r)/2 [[q]]` and
//! `q^ = {q} + [[phi]] / (2 sqrt(T_r))` the auxiliary equation for `q` couples
//! neighbouring elements through `[[q]]`. For diagonal-norm SBP operators with
//! boundary nodes the surface terms only touch the interface nodes, so the
//! two-element system at every interface reduces to one scalar equation whose
//! solution is
//!
//! ```text
//! [[q]] = c1 [[phi]] + c2 [[D phi]]
//! c1 = (mu_r - mu_l) / 2 / (1 + sqrt(T_r)/2 (mu_r + mu_l))
//! c2 =                  1 / (1 + sqrt(T_r)/2 (mu_r + mu_l))
//! ```
//!
//! where `mu = t^T M^{-1} t` is the inverse corner mass of the adjacent
//! elements. Substituting back gives an explicit element-local formula that
//! needs only surface values of `phi` and `D phi` of the face neighbours.
//! Jumps are always oriented as (right element) - (left element).
//!
//! [`implicit_gradient_oracle`] assembles and solves the coupled system
//! directly and is kept as a reference for testing.

use rayon::prelude::*;

use crate::elliptic::DirichletPenalty;
use crate::error::{Error, Result};
use crate::field::{BoundaryData, GradientField, NodalField};
use crate::mesh::{BoundaryCondition, Layout, Line, Mesh, Mesh1D};
use crate::sbp::Side;

/// Relaxation time of the hyperbolic system, `T_r = L_r^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationTime {
    t_r: f64,
}

impl RelaxationTime {
    pub fn new(t_r: f64) -> Result<Self> {
        if !(t_r > 0.0 && t_r.is_finite()) {
            return Err(Error::InvalidRelaxationTime(t_r));
        }
        Ok(Self { t_r })
    }

    pub fn from_length(l_r: f64) -> Result<Self> {
        Self::new(l_r * l_r)
    }

    pub fn t_r(&self) -> f64 {
        self.t_r
    }

    pub fn l_r(&self) -> f64 {
        self.t_r.sqrt()
    }

    /// `sqrt(T_r)`, the same number as `L_r`.
    pub fn sqrt(&self) -> f64 {
        self.t_r.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceCoeffs {
    pub c1: f64,
    pub c2: f64,
    /// Inverse corner mass of the element left of the interface.
    pub mu_left: f64,
    /// Inverse corner mass of the element right of the interface.
    pub mu_right: f64,
}

impl InterfaceCoeffs {
    pub fn new(mu_left: f64, mu_right: f64, sqrt_tr: f64) -> Self {
        let c2 = 1.0 / (1.0 + 0.5 * sqrt_tr * (mu_right + mu_left));
        let c1 = 0.5 * (mu_right - mu_left) * c2;
        Self {
            c1,
            c2,
            mu_left,
            mu_right,
        }
    }
}

/// One coefficient pair per coupling interface, ordered as
/// [`Mesh1D::interface_neighbors`].
pub fn interface_coeffs(mesh: &Mesh1D, relax: RelaxationTime) -> Vec<InterfaceCoeffs> {
    (0..mesh.n_interfaces())
        .map(|i| {
            let (l, r) = mesh.interface_neighbors(i);
            InterfaceCoeffs::new(
                mesh.element(l).mass_corner(Side::Right),
                mesh.element(r).mass_corner(Side::Left),
                relax.sqrt(),
            )
        })
        .collect()
}

/// The 1D surface kernels of one coordinate direction. All methods work on a
/// contiguous line buffer `[element][node]`.
#[derive(Debug, Clone)]
pub(crate) struct LineKernel {
    mesh: Mesh1D,
    coeffs: Vec<InterfaceCoeffs>,
    sqrt_tr: f64,
    deriv_scale: Vec<f64>,
    inv_mass_left: Vec<f64>,
    inv_mass_right: Vec<f64>,
    penalty_sign: f64,
}

impl LineKernel {
    pub fn new(mesh: &Mesh1D, relax: RelaxationTime) -> Self {
        let els = mesh.elements();
        Self {
            coeffs: interface_coeffs(mesh, relax),
            sqrt_tr: relax.sqrt(),
            deriv_scale: els.iter().map(|e| e.deriv_scale()).collect(),
            inv_mass_left: els.iter().map(|e| e.mass_corner(Side::Left)).collect(),
            inv_mass_right: els.iter().map(|e| e.mass_corner(Side::Right)).collect(),
            mesh: mesh.clone(),
            penalty_sign: 1.0,
        }
    }

    pub fn set_penalty(&mut self, penalty: DirichletPenalty) {
        self.penalty_sign = match penalty {
            DirichletPenalty::Stabilizing => 1.0,
            DirichletPenalty::Reversed => -1.0,
        };
    }

    fn n(&self) -> usize {
        self.mesh.n_nodes()
    }

    /// Elementwise `(2/h_e) D u_e`.
    pub fn deriv(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n();
        let op = self.mesh.operator();
        for (e, (ue, oe)) in u.chunks_exact(n).zip(out.chunks_exact_mut(n)).enumerate() {
            op.apply_deriv(ue, self.deriv_scale[e], oe);
        }
    }

    /// Local gradient; `dphi` is scratch of the same length.
    pub fn local_gradient(&self, phi: &[f64], bc: Option<(f64, f64)>, q: &mut [f64], dphi: &mut [f64]) {
        let n = self.n();
        let ne = self.mesh.n_elements();
        let s = self.sqrt_tr;
        self.deriv(phi, dphi);
        q.copy_from_slice(dphi);
        for (i, c) in self.coeffs.iter().enumerate() {
            let (l, r) = self.mesh.interface_neighbors(i);
            let (il, ir) = (l * n + n - 1, r * n);
            let jump_phi = phi[ir] - phi[il];
            let jump_dphi = dphi[ir] - dphi[il];
            q[il] += self.inv_mass_right[l] * (0.5 * (1.0 + s * c.c1) * jump_phi + 0.5 * s * c.c2 * jump_dphi);
            q[ir] += self.inv_mass_left[r] * (0.5 * (1.0 - s * c.c1) * jump_phi - 0.5 * s * c.c2 * jump_dphi);
        }
        if let Some((left, right)) = bc {
            let last = ne * n - 1;
            q[0] += self.inv_mass_left[0] * (phi[0] - left);
            q[last] += self.inv_mass_right[ne - 1] * (right - phi[last]);
        }
    }

    /// Gradient equation with the `q`-dependent flux `phi^` evaluated from a
    /// given `q` (no elimination).
    pub fn coupled_gradient(&self, phi: &[f64], q: &[f64], bc: Option<(f64, f64)>, out: &mut [f64]) {
        let n = self.n();
        let ne = self.mesh.n_elements();
        let s = self.sqrt_tr;
        self.deriv(phi, out);
        for i in 0..self.coeffs.len() {
            let (l, r) = self.mesh.interface_neighbors(i);
            let (il, ir) = (l * n + n - 1, r * n);
            let phi_hat = 0.5 * (phi[il] + phi[ir]) + 0.5 * s * (q[ir] - q[il]);
            out[il] += self.inv_mass_right[l] * (phi_hat - phi[il]);
            out[ir] -= self.inv_mass_left[r] * (phi_hat - phi[ir]);
        }
        if let Some((left, right)) = bc {
            let last = ne * n - 1;
            out[0] -= self.inv_mass_left[0] * (left - phi[0]);
            out[last] += self.inv_mass_right[ne - 1] * (right - phi[last]);
        }
    }

    /// `-D q` with the surface corrections from `q^`, i.e. the divergence
    /// equation moved to the left-hand side (without the forcing).
    pub fn neg_divergence(&self, phi: &[f64], q: &[f64], bc: Option<(f64, f64)>, out: &mut [f64]) {
        let n = self.n();
        let ne = self.mesh.n_elements();
        let half_inv_s = 0.5 / self.sqrt_tr;
        let penalty = self.penalty_sign * half_inv_s;
        self.deriv(q, out);
        out.iter_mut().for_each(|v| *v = -*v);
        for i in 0..self.coeffs.len() {
            let (l, r) = self.mesh.interface_neighbors(i);
            let (il, ir) = (l * n + n - 1, r * n);
            let q_hat = 0.5 * (q[il] + q[ir]) + half_inv_s * (phi[ir] - phi[il]);
            out[il] -= self.inv_mass_right[l] * (q_hat - q[il]);
            out[ir] += self.inv_mass_left[r] * (q_hat - q[ir]);
        }
        if let Some((left, right)) = bc {
            let last = ne * n - 1;
            // q^ = q_interior + [[phi]] / (2 sqrt(T_r)) with [[phi]] = right trace - left trace
            out[0] += self.inv_mass_left[0] * penalty * (phi[0] - left);
            out[last] -= self.inv_mass_right[ne - 1] * penalty * (right - phi[last]);
        }
    }
}

pub(crate) fn gather(src: &[f64], line: Line, ne: usize, n: usize, dst: &mut [f64]) {
    for e in 0..ne {
        for i in 0..n {
            dst[e * n + i] = src[line.index(e, i)];
        }
    }
}

pub(crate) fn scatter_add(src: &[f64], line: Line, ne: usize, n: usize, dst: &mut [f64]) {
    for e in 0..ne {
        for i in 0..n {
            dst[line.index(e, i)] += src[e * n + i];
        }
    }
}

pub(crate) fn scatter(src: &[f64], line: Line, ne: usize, n: usize, dst: &mut [f64]) {
    for e in 0..ne {
        for i in 0..n {
            dst[line.index(e, i)] = src[e * n + i];
        }
    }
}

/// Runs `kernel(k, out_line)` on every line along direction `d` in parallel
/// and scatters (or scatter-adds) the results in fixed line order.
pub(crate) fn map_lines<F>(layout: Layout, d: usize, dst: &mut [f64], accumulate: bool, kernel: F)
where
    F: Fn(usize, Line, &mut [f64]) + Sync,
{
    let ne = layout.elements[d];
    let n = layout.nodes[d];
    let results: Vec<(Line, Vec<f64>)> = (0..layout.n_lines(d))
        .into_par_iter()
        .map(|k| {
            let line = layout.line(d, k);
            let mut out = vec![0.0; ne * n];
            kernel(k, line, &mut out);
            (line, out)
        })
        .collect();
    for (line, out) in results {
        if accumulate {
            scatter_add(&out, line, ne, n, dst);
        } else {
            scatter(&out, line, ne, n, dst);
        }
    }
}

pub(crate) fn line_bc(bd: &BoundaryData, d: usize, k: usize) -> Option<(f64, f64)> {
    bd.direction(d).map(|t| t[k])
}

/// Local gradient on a 1D or 2D mesh.
pub fn local_gradient(mesh: &Mesh, phi: &NodalField, relax: RelaxationTime, bd: &BoundaryData) -> Result<GradientField> {
    phi.check_matches(mesh)?;
    bd.validate(mesh)?;
    let kernels: Vec<LineKernel> = mesh.directions().iter().map(|m| LineKernel::new(m, relax)).collect();
    Ok(local_gradient_with(mesh.layout(), &kernels, phi, bd))
}

pub(crate) fn local_gradient_with(
    layout: Layout,
    kernels: &[LineKernel],
    phi: &NodalField,
    bd: &BoundaryData,
) -> GradientField {
    let components = kernels
        .iter()
        .enumerate()
        .map(|(d, kernel)| {
            let (ne, n) = (layout.elements[d], layout.nodes[d]);
            let mut q = vec![0.0; layout.len()];
            map_lines(layout, d, &mut q, false, |k, line, out| {
                let mut phi_line = vec![0.0; ne * n];
                let mut scratch = vec![0.0; ne * n];
                gather(phi.as_slice(), line, ne, n, &mut phi_line);
                kernel.local_gradient(&phi_line, line_bc(bd, d, k), out, &mut scratch);
            });
            NodalField::from_layout(layout, q)
        })
        .collect();
    GradientField { components }
}

pub fn local_gradient_1d(mesh: &Mesh1D, phi: &NodalField, relax: RelaxationTime, bd: &BoundaryData) -> Result<NodalField> {
    let mesh = Mesh::OneD(mesh.clone());
    Ok(local_gradient(&mesh, phi, relax, bd)?.components.remove(0))
}

pub fn local_gradient_2d(mesh: &Mesh, phi: &NodalField, relax: RelaxationTime, bd: &BoundaryData) -> Result<GradientField> {
    if mesh.dim() != 2 {
        return Err(Error::InvalidConfig("local_gradient_2d needs a 2D mesh".into()));
    }
    local_gradient(mesh, phi, relax, bd)
}

/// Interface jumps `([[phi]], [[D phi]], [[q]])` along one 1D line, for checks.
pub fn interface_jumps(
    mesh: &Mesh1D,
    phi: &[f64],
    q: &[f64],
    relax: RelaxationTime,
) -> Vec<(f64, f64, f64)> {
    let kernel = LineKernel::new(mesh, relax);
    let n = mesh.n_nodes();
    let mut dphi = vec![0.0; phi.len()];
    kernel.deriv(phi, &mut dphi);
    (0..mesh.n_interfaces())
        .map(|i| {
            let (l, r) = mesh.interface_neighbors(i);
            let (il, ir) = (l * n + n - 1, r * n);
            (phi[ir] - phi[il], dphi[ir] - dphi[il], q[ir] - q[il])
        })
        .collect()
}

/// Gradient from the globally coupled auxiliary equation, assembled densely
/// and solved by LU. Only meant for small meshes.
pub fn implicit_gradient_oracle(
    mesh: &Mesh,
    phi: &NodalField,
    relax: RelaxationTime,
    bd: &BoundaryData,
) -> Result<GradientField> {
    phi.check_matches(mesh)?;
    bd.validate(mesh)?;
    let layout = mesh.layout();
    let mut components = Vec::with_capacity(mesh.dim());
    for (d, m) in mesh.directions().into_iter().enumerate() {
        let (ne, n) = (layout.elements[d], layout.nodes[d]);
        let mut q = vec![0.0; layout.len()];
        for k in 0..layout.n_lines(d) {
            let line = layout.line(d, k);
            let mut phi_line = vec![0.0; ne * n];
            gather(phi.as_slice(), line, ne, n, &mut phi_line);
            let q_line = implicit_line(m, &phi_line, relax, line_bc(bd, d, k))?;
            scatter(&q_line, line, ne, n, &mut q);
        }
        components.push(NodalField::from_layout(layout, q));
    }
    Ok(GradientField { components })
}

pub fn implicit_gradient_oracle_1d(
    mesh: &Mesh1D,
    phi: &NodalField,
    relax: RelaxationTime,
    bd: &BoundaryData,
) -> Result<NodalField> {
    let mesh = Mesh::OneD(mesh.clone());
    Ok(implicit_gradient_oracle(&mesh, phi, relax, bd)?.components.remove(0))
}

fn implicit_line(mesh: &Mesh1D, phi: &[f64], relax: RelaxationTime, bc: Option<(f64, f64)>) -> Result<Vec<f64>> {
    let n = mesh.n_nodes();
    let ne = mesh.n_elements();
    let size = n * ne;
    let half_s = 0.5 * relax.sqrt();
    let periodic = mesh.bc() == BoundaryCondition::Periodic;
    let op = mesh.operator();
    let mut a = nalgebra::DMatrix::<f64>::identity(size, size);
    let mut b = nalgebra::DVector::<f64>::zeros(size);

    for e in 0..ne {
        let el = mesh.element(e);
        let scale = el.deriv_scale();
        for i in 0..n {
            b[e * n + i] = scale * (0..n).map(|j| op.deriv_entry(i, j) * phi[e * n + j]).sum::<f64>();
        }
        // right face: + M^{-1} t_R (phi^ - phi_R)
        let row = e * n + n - 1;
        let inv_m = 1.0 / el.mass(n - 1);
        if e + 1 < ne || periodic {
            let r = (e + 1) % ne;
            b[row] += inv_m * 0.5 * (phi[r * n] - phi[row]);
            a[(row, r * n)] -= inv_m * half_s;
            a[(row, row)] += inv_m * half_s;
        } else {
            let (_, right) = bc.ok_or(Error::MissingBoundaryData(0))?;
            b[row] += inv_m * (right - phi[row]);
        }
        // left face: - M^{-1} t_L (phi^ - phi_L)
        let row = e * n;
        let inv_m = 1.0 / el.mass(0);
        if e > 0 || periodic {
            let l = (e + ne - 1) % ne;
            let lr = l * n + n - 1;
            b[row] -= inv_m * 0.5 * (phi[lr] - phi[row]);
            a[(row, row)] += inv_m * half_s;
            a[(row, lr)] -= inv_m * half_s;
        } else {
            let (left, _) = bc.ok_or(Error::MissingBoundaryData(0))?;
            b[row] -= inv_m * (left - phi[row]);
        }
    }
    let x = a.lu().solve(&b).ok_or(Error::SingularMatrix)?;
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::interpolate;
    use crate::mesh::{nonuniform_mesh_1d, uniform_mesh_1d, uniform_mesh_2d, BoundaryCondition::*};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tr(v: f64) -> RelaxationTime {
        RelaxationTime::new(v).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let m = nonuniform_mesh_1d(vec![0.0, 1.0, 2.0], 1, Dirichlet).unwrap();
        let c = interface_coeffs(&m, tr(1.0));
        assert_eq!(c.len(), 1);
        assert_close!(c[0].mu_left, 2.0, 1e-15);
        assert_close!(c[0].mu_right, 2.0, 1e-15);
        assert_eq!(c[0].c1, 0.0);
        assert_close!(c[0].c2, 1.0 / 3.0, 1e-15);

        let m = nonuniform_mesh_1d(vec![0.0, 1.0, 3.0], 1, Dirichlet).unwrap();
        let c = interface_coeffs(&m, tr(1.0));
        assert_close!(c[0].mu_right, 1.0, 1e-15);
        assert_close!(c[0].c1, -0.2, 1e-15);
        assert_close!(c[0].c2, 0.4, 1e-15);

        for p in 1..=6 {
            let m = uniform_mesh_1d(-1.0, 1.0, 7, p, Periodic).unwrap();
            let c = interface_coeffs(&m, tr(0.3));
            assert_eq!(c.len(), 7);
            assert!(c.iter().all(|c| c.c1.abs() <= 1e-14));
        }
    }

    #[test]
    fn coefficient_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mu_l = rng.gen_range(1e-3..1e3);
            let mu_r = rng.gen_range(1e-3..1e3);
            let s = rng.gen_range(1e-3..1e2_f64);
            let c = InterfaceCoeffs::new(mu_l, mu_r, s);
            assert!(c.c2 > 0.0 && c.c2 < 1.0);
            assert!(c.c1.abs() * s < 1.0);
        }
    }

    #[test]
    fn rejects_nonpositive_relaxation_time() {
        assert!(matches!(RelaxationTime::new(0.0), Err(Error::InvalidRelaxationTime(_))));
        assert!(RelaxationTime::new(-1.0).is_err());
        assert!(RelaxationTime::new(f64::NAN).is_err());
    }

    #[test]
    fn hand_eliminated_two_element_case() {
        // mesh (0, 1, 2), p = 1, T_r = 1, phi = (1, 2, 4, 3), phi_BC = (0, 5)
        let m = nonuniform_mesh_1d(vec![0.0, 1.0, 2.0], 1, Dirichlet).unwrap();
        let mesh = Mesh::OneD(m.clone());
        let phi = NodalField::from_vec(&mesh, vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        let bd = BoundaryData::dirichlet_1d(0.0, 5.0);
        let expected = [3.0, 7.0 / 3.0, 5.0 / 3.0, 3.0];
        let oracle = implicit_gradient_oracle_1d(&m, &phi, tr(1.0), &bd).unwrap();
        let local = local_gradient_1d(&m, &phi, tr(1.0), &bd).unwrap();
        for i in 0..4 {
            assert_close!(oracle.as_slice()[i], expected[i], 1e-14);
            assert_close!(local.as_slice()[i], expected[i], 1e-14);
        }
    }

    fn random_mesh(rng: &mut ChaCha8Rng, n: usize, p: usize, bc: BoundaryCondition) -> Mesh1D {
        let mut b = vec![0.0];
        for _ in 0..n {
            let last = *b.last().unwrap();
            b.push(last + rng.gen_range(0.2..1.5));
        }
        nonuniform_mesh_1d(b, p, bc).unwrap()
    }

    #[test]
    fn random_nonuniform_matches_oracle_and_jump_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in 1..=4 {
            for bc in [Dirichlet, Periodic] {
                let m = random_mesh(&mut rng, 7, p, bc);
                let mesh = Mesh::OneD(m.clone());
                let relax = tr(rng.gen_range(0.05..2.0));
                let phi: Vec<f64> = (0..mesh.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let phi = NodalField::from_vec(&mesh, phi).unwrap();
                let bd = match bc {
                    Dirichlet => BoundaryData::dirichlet_1d(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Periodic => BoundaryData::none(&mesh),
                };
                let local = local_gradient_1d(&m, &phi, relax, &bd).unwrap();
                let oracle = implicit_gradient_oracle_1d(&m, &phi, relax, &bd).unwrap();
                let diff = local.max_abs_diff(&oracle);
                assert!(diff <= 1e-11, "p={p} {bc:?}: {diff:e}");

                let coeffs = interface_coeffs(&m, relax);
                for (c, (jp, jd, jq)) in coeffs.iter().zip(interface_jumps(&m, phi.as_slice(), local.as_slice(), relax)) {
                    assert_close!(jq, c.c1 * jp + c.c2 * jd, 1e-12 * (1.0 + jq.abs()));
                }
            }
        }
    }

    #[test]
    fn polynomials_yield_exact_gradients() {
        for p in 1..=5 {
            let m = nonuniform_mesh_1d(vec![-1.0, -0.6, 0.1, 0.3, 1.2], p, Dirichlet).unwrap();
            let mesh = Mesh::OneD(m.clone());
            let f = |x: f64| (0..=p).map(|k| (k as f64 + 1.0) * 0.3 * x.powi(k as i32)).sum::<f64>();
            let df = |x: f64| (1..=p).map(|k| (k as f64 + 1.0) * 0.3 * k as f64 * x.powi(k as i32 - 1)).sum::<f64>();
            let phi = interpolate(&mesh, |x| f(x[0]));
            let bd = BoundaryData::from_fn(&mesh, |x| f(x[0]));
            let q = local_gradient_1d(&m, &phi, tr(0.7), &bd).unwrap();
            let exact = interpolate(&mesh, |x| df(x[0]));
            assert!(q.max_abs_diff(&exact) <= 1e-12 * exact.max_abs().max(1.0), "p={p}");
        }
    }

    #[test]
    fn constant_periodic_has_zero_gradient() {
        let mesh: Mesh = uniform_mesh_1d(-2.0, 2.0, 5, 3, Periodic).unwrap().into();
        let phi = interpolate(&mesh, |_| 4.25);
        let q = local_gradient(&mesh, &phi, tr(0.2), &BoundaryData::none(&mesh)).unwrap();
        assert!(q.component(0).max_abs() < 1e-13);

        let mesh: Mesh = uniform_mesh_2d((-1.0, 1.0), (-1.0, 1.0), 3, 2, Periodic).unwrap().into();
        let phi = interpolate(&mesh, |_| -1.5);
        let q = local_gradient_2d(&mesh, &phi, tr(0.2), &BoundaryData::none(&mesh)).unwrap();
        assert!(q.component(0).max_abs() < 1e-13);
        assert!(q.component(1).max_abs() < 1e-13);
    }

    #[test]
    fn missing_boundary_data_is_an_error() {
        let m = uniform_mesh_1d(0.0, 1.0, 3, 2, Dirichlet).unwrap();
        let mesh = Mesh::OneD(m.clone());
        let phi = NodalField::zeros(&mesh);
        assert!(matches!(
            local_gradient_1d(&m, &phi, tr(1.0), &BoundaryData::none(&mesh)),
            Err(Error::MissingBoundaryData(0))
        ));
    }

    #[test]
    fn separable_polynomial_2d_exact() {
        let p = 3;
        let mesh: Mesh = uniform_mesh_2d((0.0, 1.0), (-1.0, 0.5), 4, p, Dirichlet).unwrap().into();
        let f = |c: &[f64]| (1.0 + c[0] - c[0].powi(3)) * (2.0 - c[1] * c[1]);
        let fx = |c: &[f64]| (1.0 - 3.0 * c[0] * c[0]) * (2.0 - c[1] * c[1]);
        let fy = |c: &[f64]| (1.0 + c[0] - c[0].powi(3)) * (-2.0 * c[1]);
        let phi = interpolate(&mesh, f);
        let bd = BoundaryData::from_fn(&mesh, f);
        let q = local_gradient_2d(&mesh, &phi, tr(0.05), &bd).unwrap();
        assert!(q.component(0).max_abs_diff(&interpolate(&mesh, fx)) <= 1e-12);
        assert!(q.component(1).max_abs_diff(&interpolate(&mesh, fy)) <= 1e-12);
    }

    #[test]
    fn oracle_matches_local_in_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mx = random_mesh(&mut rng, 4, 2, Dirichlet);
        let my = random_mesh(&mut rng, 3, 2, Periodic);
        let mesh: Mesh = crate::mesh::Mesh2D::new(mx, my).unwrap().into();
        let phi: Vec<f64> = (0..mesh.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = NodalField::from_vec(&mesh, phi).unwrap();
        let bd = BoundaryData::from_fn(&mesh, |c| c[0] * c[1]);
        let relax = tr(0.4);
        let local = local_gradient(&mesh, &phi, relax, &bd).unwrap();
        let oracle = implicit_gradient_oracle(&mesh, &phi, relax, &bd).unwrap();
        for d in 0..2 {
            assert!(local.component(d).max_abs_diff(oracle.component(d)) <= 1e-11);
        }
    }

    #[test]
    fn gradient_is_local_to_face_neighbours() {
        let m = uniform_mesh_1d(0.0, 1.0, 8, 3, Periodic).unwrap();
        let mesh = Mesh::OneD(m.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi: Vec<f64> = (0..mesh.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = NodalField::from_vec(&mesh, phi).unwrap();
        let bd = BoundaryData::none(&mesh);
        let base = local_gradient_1d(&m, &phi, tr(0.1), &bd).unwrap();
        let mut pert = phi.clone();
        for i in 0..4 {
            pert.as_mut_slice()[4 * 4 + i] += 0.3 * (i as f64 + 1.0);
        }
        let moved = local_gradient_1d(&m, &pert, tr(0.1), &bd).unwrap();
        for e in 0..8 {
            let changed = (0..4).any(|i| base.at(e, i) != moved.at(e, i));
            assert_eq!(changed, (3..=5).contains(&e), "element {e}");
        }
    }
}
