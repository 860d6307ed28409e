//! Matrix-free conjugate gradients and a dense direct solver for small 1D
//! systems. Both work in the mass-weighted inner product of the operator.

use std::fmt;
use std::time::Instant;

use crate::elliptic::LinearOperator;
use crate::error::{Error, Result};
use crate::field::mass_inner;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_DIRECT_UNKNOWNS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cg,
    Direct,
    Relaxation,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::Cg => "cg",
            SolveMethod::Direct => "direct",
            SolveMethod::Relaxation => "relaxation",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: usize,
    /// `||b - A x||_M / ||b||_M`.
    pub final_residual: f64,
    pub wall_time: f64,
    /// Relative residual after every CG iteration (starting with 1).
    pub residual_history: Vec<f64>,
    /// Discrete mean removed from the right-hand side when deflating.
    pub rhs_mean_removed: f64,
}

fn weighted_mean(w: &[f64], v: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / total
}

fn remove_mean(w: &[f64], v: &mut [f64]) -> f64 {
    let m = weighted_mean(w, v);
    v.iter_mut().for_each(|x| *x -= m);
    m
}

fn norm(w: &[f64], v: &[f64]) -> f64 {
    mass_inner(w, v, v).sqrt()
}

fn relative_residual(op: &impl LinearOperator, x: &[f64], b: &[f64]) -> f64 {
    let w = op.weights();
    let mut ax = vec![0.0; x.len()];
    op.apply(x, &mut ax);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nb = norm(w, b);
    if nb == 0.0 {
        norm(w, &r)
    } else {
        norm(w, &r) / nb
    }
}

/// Conjugate gradients from a zero initial guess. `max_iter = None` means
/// `10 * len`.
pub fn solve_cg(
    op: &impl LinearOperator,
    b: &[f64],
    tol: f64,
    max_iter: Option<usize>,
    deflate_mean: bool,
) -> Result<(Vec<f64>, SolveReport)> {
    solve_cg_with(op, b, tol, max_iter, deflate_mean, |_, _, _| {})
}

/// [`solve_cg`] with a monitor called after every iteration with the
/// iteration number, the current iterate and the relative residual.
pub fn solve_cg_with(
    op: &impl LinearOperator,
    b: &[f64],
    tol: f64,
    max_iter: Option<usize>,
    deflate_mean: bool,
    mut monitor: impl FnMut(usize, &[f64], f64),
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = op.len();
    if b.len() != n {
        return Err(Error::ShapeMismatch { expected: n, found: b.len() });
    }
    let w = op.weights();
    let max_iter = max_iter.unwrap_or(10 * n);
    let mut rhs = b.to_vec();
    let rhs_mean_removed = if deflate_mean { remove_mean(w, &mut rhs) } else { 0.0 };

    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm = norm(w, &rhs);
    let mut report = SolveReport {
        method: SolveMethod::Cg,
        iterations: 0,
        final_residual: 0.0,
        wall_time: 0.0,
        residual_history: vec![1.0],
        rhs_mean_removed,
    };
    if b_norm == 0.0 {
        report.wall_time = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }
    let mut rr = mass_inner(w, &r, &r);
    let mut rel = 1.0;
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let pap = mass_inner(w, &p, &ap);
        let alpha = rr / pap;
        if !alpha.is_finite() {
            return Err(Error::Diverged(it));
        }
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if deflate_mean {
            remove_mean(w, &mut r);
        }
        let rr_new = mass_inner(w, &r, &r);
        if !rr_new.is_finite() {
            return Err(Error::Diverged(it));
        }
        rel = rr_new.sqrt() / b_norm;
        report.residual_history.push(rel);
        report.iterations = it;
        monitor(it, &x, rel);
        if rel <= tol {
            // The recursive residual drifts from b - A x; confirm, and
            // restart from the true residual if they disagree.
            op.apply(&x, &mut ap);
            for i in 0..n {
                r[i] = rhs[i] - ap[i];
            }
            if deflate_mean {
                remove_mean(w, &mut r);
            }
            let rr_true = mass_inner(w, &r, &r);
            rel = rr_true.sqrt() / b_norm;
            if rel <= tol {
                break;
            }
            p.copy_from_slice(&r);
            rr = rr_true;
            continue;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    if deflate_mean {
        remove_mean(w, &mut x);
    }
    report.final_residual = rel;
    report.wall_time = start.elapsed().as_secs_f64();
    if rel > tol {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            residual: rel,
        });
    }
    Ok((x, report))
}

/// Dense matrix of `op`, assembled column by column from unit vectors.
pub fn assemble_dense(op: &impl LinearOperator) -> nalgebra::DMatrix<f64> {
    let n = op.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        a.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        e[j] = 0.0;
    }
    a
}

/// LU solve of the assembled matrix. With `deflate_mean` the system is
/// bordered by the zero-mean constraint and a Lagrange multiplier.
pub fn solve_direct(op: &impl LinearOperator, b: &[f64], deflate_mean: bool) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = op.len();
    if b.len() != n {
        return Err(Error::ShapeMismatch { expected: n, found: b.len() });
    }
    if n > MAX_DIRECT_UNKNOWNS {
        return Err(Error::InvalidConfig(format!(
            "direct solve limited to {MAX_DIRECT_UNKNOWNS} unknowns, got {n}"
        )));
    }
    let w = op.weights();
    let mut rhs = b.to_vec();
    let rhs_mean_removed = if deflate_mean { remove_mean(w, &mut rhs) } else { 0.0 };
    let a = assemble_dense(op);
    let x: Vec<f64> = if deflate_mean {
        let mut aug = nalgebra::DMatrix::<f64>::zeros(n + 1, n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&a);
        for i in 0..n {
            aug[(i, n)] = 1.0;
            aug[(n, i)] = w[i];
        }
        let mut rb = nalgebra::DVector::<f64>::zeros(n + 1);
        rb.rows_mut(0, n).copy_from_slice(&rhs);
        let sol = aug.lu().solve(&rb).ok_or(Error::SingularMatrix)?;
        sol.iter().take(n).copied().collect()
    } else {
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        let sol = lu
            .solve(&nalgebra::DVector::from_column_slice(&rhs))
            .ok_or(Error::SingularMatrix)?;
        sol.iter().copied().collect()
    };
    let final_residual = relative_residual(op, &x, &rhs);
    Ok((
        x,
        SolveReport {
            method: SolveMethod::Direct,
            iterations: 1,
            final_residual,
            wall_time: start.elapsed().as_secs_f64(),
            residual_history: vec![1.0, final_residual],
            rhs_mean_removed,
        },
    ))
}

/// 1D-only entry point for [`solve_direct`].
pub fn solve_direct_1d(
    op: &crate::elliptic::EllipticOperator,
    b: &[f64],
    deflate_mean: bool,
) -> Result<(Vec<f64>, SolveReport)> {
    if op.mesh().dim() != 1 {
        return Err(Error::InvalidConfig("direct solver is only available in 1D".into()));
    }
    solve_direct(op, b, deflate_mean)
}
