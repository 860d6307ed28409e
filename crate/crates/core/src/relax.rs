//! Pseudo-time marching of the first-order hyperbolic diffusion system
//!
//! ```text
//! d_t phi - div q            = f
//! d_t q   - grad phi / T_r   = -q / T_r
//! ```
//!
//! with the same DG-SBP operators and upwind fluxes as the elliptic path, but
//! with `q` evolved as an unknown. Its steady state is the elliptic solution
//! together with the locally reconstructed gradient.

use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{mean, BoundaryData, GradientField, NodalField};
use crate::elliptic::DirichletPenalty;
use crate::gradient::{gather, line_bc, map_lines, LineKernel, RelaxationTime};
use crate::mesh::{BoundaryCondition, Mesh};

#[derive(Debug, Clone)]
pub struct RelaxState {
    pub phi: NodalField,
    pub q: GradientField,
    pub time: f64,
    pub residual_norm: f64,
}

impl RelaxState {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            phi: NodalField::zeros(mesh),
            q: GradientField {
                components: vec![NodalField::zeros(mesh); mesh.dim()],
            },
            time: 0.0,
            residual_norm: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MarchConfig {
    pub cfl: f64,
    /// Stop once `max |d_t (phi, q)| <= steady_tol * max(1, max |f|)`.
    pub steady_tol: f64,
    pub max_steps: usize,
}

impl Default for MarchConfig {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            steady_tol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

impl MarchConfig {
    fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) || !(self.steady_tol > 0.0) || self.max_steps == 0 {
            return Err(Error::InvalidConfig(format!("invalid march configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub step: usize,
    pub pseudo_time: f64,
    pub residual: f64,
}

pub fn write_history_csv<W: Write>(history: &[HistoryEntry], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "pseudo_time", "residual"])?;
    for h in history {
        w.write_record(&[h.step.to_string(), format!("{:e}", h.pseudo_time), format!("{:e}", h.residual)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MarchResult {
    pub state: RelaxState,
    pub steps: usize,
    pub history: Vec<HistoryEntry>,
}

/// Semi-discretisation of the hyperbolic system on a fixed mesh.
#[derive(Debug, Clone)]
pub struct HyperbolicSystem {
    mesh: Mesh,
    relax: RelaxationTime,
    kernels: Vec<LineKernel>,
    boundary: BoundaryData,
    forcing: NodalField,
    forcing_mean_removed: f64,
}

impl HyperbolicSystem {
    /// On fully periodic meshes the discrete mean of `forcing` is removed so
    /// that the mean of `phi` is conserved.
    pub fn new(mesh: Mesh, relax: RelaxationTime, boundary: BoundaryData, mut forcing: NodalField) -> Result<Self> {
        forcing.check_matches(&mesh)?;
        boundary.validate(&mesh)?;
        let periodic = mesh.directions().iter().all(|m| m.bc() == BoundaryCondition::Periodic);
        let forcing_mean_removed = if periodic {
            let m = mean(&mesh, &forcing)?;
            forcing.as_mut_slice().iter_mut().for_each(|v| *v -= m);
            m
        } else {
            0.0
        };
        let kernels = mesh.directions().iter().map(|m| LineKernel::new(m, relax)).collect();
        Ok(Self {
            mesh,
            relax,
            kernels,
            boundary,
            forcing,
            forcing_mean_removed,
        })
    }

    pub fn with_dirichlet_penalty(mut self, penalty: DirichletPenalty) -> Self {
        self.kernels.iter_mut().for_each(|k| k.set_penalty(penalty));
        self
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn forcing_mean_removed(&self) -> f64 {
        self.forcing_mean_removed
    }

    /// Largest stable pseudo-time step, `cfl * h_min / ((2p + 1) / sqrt(T_r))`.
    pub fn time_step(&self, cfl: f64) -> f64 {
        let h_min = self
            .mesh
            .directions()
            .iter()
            .map(|m| m.h_min())
            .fold(f64::INFINITY, f64::min);
        let wave_speed = 1.0 / self.relax.sqrt();
        cfl * h_min / ((2 * self.mesh.degree() + 1) as f64 * wave_speed)
    }

    /// Time derivatives of `(phi, q)` packed as `[phi, q_0, q_1, ...]`.
    fn rhs_packed(&self, y: &[f64], dy: &mut [f64]) {
        let layout = self.mesh.layout();
        let len = layout.len();
        let inv_tr = 1.0 / self.relax.t_r();
        let (phi, qs) = y.split_at(len);
        let (dphi, dqs) = dy.split_at_mut(len);
        dphi.iter_mut().for_each(|v| *v = 0.0);
        for (d, kernel) in self.kernels.iter().enumerate() {
            let (ne, n) = (layout.elements[d], layout.nodes[d]);
            let q = &qs[d * len..(d + 1) * len];
            let dq = &mut dqs[d * len..(d + 1) * len];
            map_lines(layout, d, dq, false, |k, line, out| {
                let mut phi_line = vec![0.0; ne * n];
                let mut q_line = vec![0.0; ne * n];
                gather(phi, line, ne, n, &mut phi_line);
                gather(q, line, ne, n, &mut q_line);
                kernel.coupled_gradient(&phi_line, &q_line, line_bc(&self.boundary, d, k), out);
                for (o, qv) in out.iter_mut().zip(&q_line) {
                    *o = inv_tr * (*o - qv);
                }
            });
            map_lines(layout, d, dphi, true, |k, line, out| {
                let mut phi_line = vec![0.0; ne * n];
                let mut q_line = vec![0.0; ne * n];
                gather(phi, line, ne, n, &mut phi_line);
                gather(q, line, ne, n, &mut q_line);
                kernel.neg_divergence(&phi_line, &q_line, line_bc(&self.boundary, d, k), out);
            });
        }
        for (v, f) in dphi.iter_mut().zip(self.forcing.as_slice()) {
            *v = f - *v;
        }
    }

    fn pack(&self, state: &RelaxState) -> Result<Vec<f64>> {
        state.phi.check_matches(&self.mesh)?;
        if state.q.dim() != self.mesh.dim() {
            return Err(Error::InvalidConfig("gradient has wrong number of components".into()));
        }
        let mut y = state.phi.as_slice().to_vec();
        for c in &state.q.components {
            c.check_matches(&self.mesh)?;
            y.extend_from_slice(c.as_slice());
        }
        Ok(y)
    }

    fn unpack(&self, y: &[f64], time: f64, residual_norm: f64) -> RelaxState {
        let layout = self.mesh.layout();
        let len = layout.len();
        let field = |s: &[f64]| NodalField::from_layout(layout, s.to_vec());
        RelaxState {
            phi: field(&y[..len]),
            q: GradientField {
                components: (0..self.mesh.dim())
                    .map(|d| field(&y[(d + 1) * len..(d + 2) * len]))
                    .collect(),
            },
            time,
            residual_norm,
        }
    }

    /// `(d_t phi, d_t q)` at `state`.
    pub fn semidiscrete_rhs(&self, state: &RelaxState) -> Result<(NodalField, GradientField)> {
        let y = self.pack(state)?;
        let mut dy = vec![0.0; y.len()];
        self.rhs_packed(&y, &mut dy);
        let d = self.unpack(&dy, 0.0, 0.0);
        Ok((d.phi, d.q))
    }

    /// Classic RK4 until the combined time derivative drops below the steady
    /// tolerance.
    pub fn march_to_steady(&self, config: &MarchConfig, initial: &RelaxState) -> Result<MarchResult> {
        config.validate()?;
        let mut y = self.pack(initial)?;
        let m = y.len();
        let dt = self.time_step(config.cfl);
        let tol = config.steady_tol * self.forcing.max_abs().max(1.0);
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let mut stage = vec![0.0; m];
        let mut time = initial.time;
        let mut history = Vec::new();
        let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));

        for step in 0..=config.max_steps {
            self.rhs_packed(&y, &mut k1);
            let residual = max_abs(&k1);
            history.push(HistoryEntry {
                step,
                pseudo_time: time,
                residual,
            });
            if !residual.is_finite() {
                return Err(Error::Diverged(step));
            }
            if residual <= tol {
                return Ok(MarchResult {
                    state: self.unpack(&y, time, residual),
                    steps: step,
                    history,
                });
            }
            if step == config.max_steps {
                return Err(Error::NotSteady { steps: step, residual });
            }
            for i in 0..m {
                stage[i] = y[i] + 0.5 * dt * k1[i];
            }
            self.rhs_packed(&stage, &mut k2);
            for i in 0..m {
                stage[i] = y[i] + 0.5 * dt * k2[i];
            }
            self.rhs_packed(&stage, &mut k3);
            for i in 0..m {
                stage[i] = y[i] + dt * k3[i];
            }
            self.rhs_packed(&stage, &mut k4);
            for i in 0..m {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            time += dt;
        }
        unreachable!("loop returns on the last step")
    }
}

/// Free-function form of [`HyperbolicSystem::semidiscrete_rhs`].
pub fn semidiscrete_rhs(
    mesh: &Mesh,
    state: &RelaxState,
    relax: RelaxationTime,
    forcing: &NodalField,
    boundary: &BoundaryData,
) -> Result<(NodalField, GradientField)> {
    HyperbolicSystem::new(mesh.clone(), relax, boundary.clone(), forcing.clone())?.semidiscrete_rhs(state)
}

/// Free-function form of [`HyperbolicSystem::march_to_steady`].
pub fn march_to_steady(
    mesh: &Mesh,
    config: &MarchConfig,
    relax: RelaxationTime,
    forcing: &NodalField,
    boundary: &BoundaryData,
    initial: &RelaxState,
) -> Result<MarchResult> {
    HyperbolicSystem::new(mesh.clone(), relax, boundary.clone(), forcing.clone())?.march_to_steady(config, initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{relaxation_time_for, EllipticOperator};
    use crate::field::interpolate;
    use crate::mesh::{uniform_mesh_1d, uniform_mesh_2d, BoundaryCondition::*};
    use crate::solvers::solve_direct_1d;

    #[test]
    fn trivial_states_are_steady() {
        let mesh: Mesh = uniform_mesh_1d(-1.0, 1.0, 4, 2, Dirichlet).unwrap().into();
        let relax = relaxation_time_for(&mesh).unwrap();
        let sys = HyperbolicSystem::new(mesh.clone(), relax, BoundaryData::homogeneous(&mesh), NodalField::zeros(&mesh)).unwrap();
        let (dphi, dq) = sys.semidiscrete_rhs(&RelaxState::zeros(&mesh)).unwrap();
        assert_eq!(dphi.max_abs(), 0.0);
        assert_eq!(dq.component(0).max_abs(), 0.0);
        let out = sys.march_to_steady(&MarchConfig::default(), &RelaxState::zeros(&mesh)).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.state.phi.max_abs(), 0.0);

        let mesh: Mesh = uniform_mesh_2d((0.0, 1.0), (0.0, 1.0), 3, 2, Periodic).unwrap().into();
        let relax = relaxation_time_for(&mesh).unwrap();
        let mut state = RelaxState::zeros(&mesh);
        state.phi = interpolate(&mesh, |_| 3.0);
        let (dphi, dq) = semidiscrete_rhs(&mesh, &state, relax, &NodalField::zeros(&mesh), &BoundaryData::none(&mesh)).unwrap();
        assert!(dphi.max_abs() <= 1e-13);
        assert!(dq.component(0).max_abs() <= 1e-13);
        assert!(dq.component(1).max_abs() <= 1e-13);
    }

    #[test]
    fn elliptic_solution_is_a_fixed_point() {
        let mesh: Mesh = uniform_mesh_1d(-1.0, 1.0, 6, 3, Dirichlet).unwrap().into();
        let relax = relaxation_time_for(&mesh).unwrap();
        let exact = |x: &[f64]| (2.0 * x[0]).sin() + x[0];
        let f = interpolate(&mesh, |x| 4.0 * (2.0 * x[0]).sin());
        let bd = BoundaryData::from_fn(&mesh, exact);
        let op = EllipticOperator::new(mesh.clone(), relax, bd.clone(), f.clone()).unwrap();
        let (phi, _) = solve_direct_1d(&op, op.rhs().as_slice(), false).unwrap();
        let phi = NodalField::from_vec(&mesh, phi).unwrap();
        let q = op.gradient(&phi).unwrap();
        let state = RelaxState {
            phi,
            q,
            time: 0.0,
            residual_norm: 0.0,
        };
        let (dphi, dq) = semidiscrete_rhs(&mesh, &state, relax, &f, &bd).unwrap();
        assert!(dphi.max_abs() <= 1e-9, "{:e}", dphi.max_abs());
        assert!(dq.component(0).max_abs() <= 1e-9, "{:e}", dq.component(0).max_abs());
    }

    #[test]
    fn history_csv_layout() {
        let h = vec![
            HistoryEntry { step: 0, pseudo_time: 0.0, residual: 1.0 },
            HistoryEntry { step: 1, pseudo_time: 0.5, residual: 0.25 },
        ];
        let mut buf = Vec::new();
        write_history_csv(&h, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("step,pseudo_time,residual"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn invalid_config_rejected() {
        let mesh: Mesh = uniform_mesh_1d(-1.0, 1.0, 4, 2, Dirichlet).unwrap().into();
        let relax = relaxation_time_for(&mesh).unwrap();
        let sys = HyperbolicSystem::new(mesh.clone(), relax, BoundaryData::homogeneous(&mesh), NodalField::zeros(&mesh)).unwrap();
        let cfg = MarchConfig { cfl: 1.5, ..Default::default() };
        assert!(sys.march_to_steady(&cfg, &RelaxState::zeros(&mesh)).is_err());
    }
}
