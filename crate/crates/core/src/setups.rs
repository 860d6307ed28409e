//! The four manufactured-solution benchmark problems.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::BoundaryCondition;

pub type ScalarFn = fn(&[f64]) -> f64;

#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub id: u32,
    pub name: &'static str,
    pub dim: usize,
    /// `(min, max)` per direction.
    pub extents: Vec<(f64, f64)>,
    pub bc: BoundaryCondition,
    pub exact_phi: ScalarFn,
    /// One component per direction.
    pub exact_gradient: Vec<ScalarFn>,
    /// `f = -laplace(phi)`.
    pub forcing: ScalarFn,
}

/// Error function. Power series `e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!` for
/// small arguments, Lentz continued fraction for `erfc` otherwise.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.5 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        while term > 1e-17 * sum {
            k += 1.0;
            term *= 2.0 * x2 / (2.0 * k + 1.0);
            sum += term;
        }
        2.0 / PI.sqrt() * (-x2).exp() * sum
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
fn erfc_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

/// `sqrt(pi/10) erf(2 sqrt(10)) / 4`, the mean of `exp(-10 x^2)` over `(-2, 2)`.
pub fn setup2_mean() -> f64 {
    static MEAN: OnceLock<f64> = OnceLock::new();
    *MEAN.get_or_init(|| (PI / 10.0).sqrt() * erf(2.0 * 10.0_f64.sqrt()) / 4.0)
}

fn gauss(x: f64) -> f64 {
    (-10.0 * x * x).exp()
}

fn s1_phi(c: &[f64]) -> f64 {
    gauss(c[0])
}

fn s1_dphi(c: &[f64]) -> f64 {
    -20.0 * c[0] * gauss(c[0])
}

fn s1_f(c: &[f64]) -> f64 {
    (20.0 - 400.0 * c[0] * c[0]) * gauss(c[0])
}

fn s2_phi(c: &[f64]) -> f64 {
    gauss(c[0]) - setup2_mean()
}

fn s3_phi(c: &[f64]) -> f64 {
    (PI * c[0]).cos() * (PI * c[1]).cos()
}

fn s3_q1(c: &[f64]) -> f64 {
    -PI * (PI * c[0]).sin() * (PI * c[1]).cos()
}

fn s3_q2(c: &[f64]) -> f64 {
    -PI * (PI * c[0]).cos() * (PI * c[1]).sin()
}

fn s3_f(c: &[f64]) -> f64 {
    2.0 * PI * PI * s3_phi(c)
}

fn s4_phi(c: &[f64]) -> f64 {
    2.0 * (PI * c[0]).cos() * (2.0 * PI * c[1]).sin()
}

fn s4_q1(c: &[f64]) -> f64 {
    -2.0 * PI * (PI * c[0]).sin() * (2.0 * PI * c[1]).sin()
}

fn s4_q2(c: &[f64]) -> f64 {
    4.0 * PI * (PI * c[0]).cos() * (2.0 * PI * c[1]).cos()
}

fn s4_f(c: &[f64]) -> f64 {
    5.0 * PI * PI * s4_phi(c)
}

pub fn builtin_setup(id: u32) -> Result<ProblemSetup> {
    use BoundaryCondition::*;
    let setup = match id {
        1 => ProblemSetup {
            id,
            name: "gaussian, Dirichlet",
            dim: 1,
            extents: vec![(-1.0, 1.0)],
            bc: Dirichlet,
            exact_phi: s1_phi,
            exact_gradient: vec![s1_dphi],
            forcing: s1_f,
        },
        2 => ProblemSetup {
            id,
            name: "gaussian, periodic",
            dim: 1,
            extents: vec![(-2.0, 2.0)],
            bc: Periodic,
            exact_phi: s2_phi,
            exact_gradient: vec![s1_dphi],
            forcing: s1_f,
        },
        3 => ProblemSetup {
            id,
            name: "cos(pi x) cos(pi y), Dirichlet",
            dim: 2,
            extents: vec![(-0.5, 0.5), (-0.5, 0.5)],
            bc: Dirichlet,
            exact_phi: s3_phi,
            exact_gradient: vec![s3_q1, s3_q2],
            forcing: s3_f,
        },
        4 => ProblemSetup {
            id,
            name: "2 cos(pi x) sin(2 pi y), periodic",
            dim: 2,
            extents: vec![(-1.0, 1.0), (-1.0, 1.0)],
            bc: Periodic,
            exact_phi: s4_phi,
            exact_gradient: vec![s4_q1, s4_q2],
            forcing: s4_f,
        },
        _ => return Err(Error::UnknownSetup(id)),
    };
    Ok(setup)
}
