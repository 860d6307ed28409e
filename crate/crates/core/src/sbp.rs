//! Diagonal-norm nodal SBP operators on Gauss-Lobatto-Legendre nodes.
//!
//! An [`SbpOperator`] lives on the reference element `[-1, 1]` and carries the
//! collocation derivative `D`, the diagonal mass matrix `M` and the boundary
//! selectors. Because both end points are nodes, `t_L = e_0` and `t_R = e_{n-1}`,
//! and the discrete integration-by-parts identity reads
//!
//! ```text
//! M D + (M D)^T = e_{n-1} e_{n-1}^T - e_0 e_0^T
//! ```
//!
//! [`ScaledOperator`] is the affine image of a reference operator on a
//! physical element `[x_left, x_right]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Highest polynomial degree accepted by [`gll_operator`].
pub const MAX_DEGREE: usize = 12;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperator {
    degree: usize,
    nodes: Vec<f64>,
    mass_diag: Vec<f64>,
    /// Row-major `n x n`.
    deriv: Vec<f64>,
}

impl SbpOperator {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of nodes, `degree + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn mass_diag(&self) -> &[f64] {
        &self.mass_diag
    }

    pub fn deriv(&self) -> &[f64] {
        &self.deriv
    }

    #[inline]
    pub fn deriv_entry(&self, row: usize, col: usize) -> f64 {
        self.deriv[row * self.len() + col]
    }

    pub fn boundary_selector(&self, side: Side) -> Vec<f64> {
        let mut t = vec![0.0; self.len()];
        t[self.boundary_index(side)] = 1.0;
        t
    }

    #[inline]
    pub fn boundary_index(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.len() - 1,
        }
    }

    /// `out = scale * D u` for one element.
    #[inline]
    pub fn apply_deriv(&self, u: &[f64], scale: f64, out: &mut [f64]) {
        let n = self.len();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.deriv[i * n..(i + 1) * n];
            *o = scale * row.iter().zip(u).map(|(d, v)| d * v).sum::<f64>();
        }
    }

    /// Entrywise `M D + (M D)^T - (t_R t_R^T - t_L t_L^T)`, row-major.
    pub fn sbp_defect(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let md = self.mass_diag[i] * self.deriv_entry(i, j);
                let mdt = self.mass_diag[j] * self.deriv_entry(j, i);
                let boundary = match (i, j) {
                    (0, 0) => -1.0,
                    _ if i == n - 1 && j == n - 1 => 1.0,
                    _ => 0.0,
                };
                out[i * n + j] = md + mdt - boundary;
            }
        }
        out
    }
}

/// Plain-text dump: nodes, weights, then one derivative row per line.
impl fmt::Display for SbpOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:+.16e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "# GLL operator, degree {}", self.degree)?;
        writeln!(f, "nodes {}", row(&self.nodes))?;
        writeln!(f, "mass  {}", row(&self.mass_diag))?;
        for i in 0..self.len() {
            writeln!(f, "D[{i}]  {}", row(&self.deriv[i * self.len()..(i + 1) * self.len()]))?;
        }
        Ok(())
    }
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term recurrence.
pub(crate) fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

fn gll_nodes(degree: usize) -> Vec<f64> {
    let n = degree + 1;
    let pp1 = (degree * (degree + 1)) as f64;
    let mut nodes: Vec<f64> = (0..n)
        .map(|i| -(std::f64::consts::PI * i as f64 / degree as f64).cos())
        .collect();
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    // Interior nodes are the roots of P_p'. Newton with P_p'' from the Legendre ODE.
    for x in nodes.iter_mut().take(n - 1).skip(1) {
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre(degree, *x);
            let ddp = (2.0 * *x * dp - pp1 * p) / (1.0 - *x * *x);
            let step = dp / ddp;
            *x -= step;
            if step.abs() <= NEWTON_TOL {
                break;
            }
        }
    }
    // Exact mirror symmetry keeps c1 = 0 on uniform meshes.
    for i in 0..n / 2 {
        let sym = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -sym;
        nodes[n - 1 - i] = sym;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    nodes
}

fn barycentric_deriv(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product::<f64>()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Degree-`p` Gauss-Lobatto-Legendre collocation operator (DGSEM).
pub fn gll_operator(degree: usize) -> Result<SbpOperator> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::InvalidDegree(degree));
    }
    let nodes = gll_nodes(degree);
    let pp1 = (degree * (degree + 1)) as f64;
    let mut mass_diag: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(degree, x);
            2.0 / (pp1 * p * p)
        })
        .collect();
    let n = mass_diag.len();
    for i in 0..n / 2 {
        let w = 0.5 * (mass_diag[i] + mass_diag[n - 1 - i]);
        mass_diag[i] = w;
        mass_diag[n - 1 - i] = w;
    }
    let deriv = barycentric_deriv(&nodes);
    Ok(SbpOperator {
        degree,
        nodes,
        mass_diag,
        deriv,
    })
}

/// A reference operator mapped onto `[x_left, x_right]`.
#[derive(Debug, Clone)]
pub struct ScaledOperator {
    base: Arc<SbpOperator>,
    x_left: f64,
    x_right: f64,
}

impl ScaledOperator {
    pub fn base(&self) -> &SbpOperator {
        &self.base
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// `h / 2`.
    pub fn jacobian(&self) -> f64 {
        0.5 * self.length()
    }

    /// Factor multiplying the reference derivative, `2 / h`.
    pub fn deriv_scale(&self) -> f64 {
        2.0 / self.length()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.jacobian() * self.base.mass_diag[i]
    }

    pub fn mass_diag(&self) -> Vec<f64> {
        let j = self.jacobian();
        self.base.mass_diag.iter().map(|w| j * w).collect()
    }

    /// Row-major scaled derivative matrix.
    pub fn deriv(&self) -> Vec<f64> {
        let s = self.deriv_scale();
        self.base.deriv.iter().map(|d| s * d).collect()
    }

    /// Physical node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        let mid = 0.5 * (self.x_left + self.x_right);
        let j = self.jacobian();
        self.base.nodes.iter().map(|xi| mid + j * xi).collect()
    }

    /// `t^T M^{-1} t` for the boundary selector on `side`.
    pub fn mass_corner(&self, side: Side) -> f64 {
        1.0 / self.mass(self.base.boundary_index(side))
    }
}

pub fn scale_to_element(op: Arc<SbpOperator>, x_left: f64, x_right: f64) -> Result<ScaledOperator> {
    if !(x_left.is_finite() && x_right.is_finite() && x_left < x_right) {
        return Err(Error::DegenerateElement {
            left: x_left,
            right: x_right,
        });
    }
    Ok(ScaledOperator {
        base: op,
        x_left,
        x_right,
    })
}

/// Free-function form of [`ScaledOperator::mass_corner`].
pub fn mass_corner(op: &ScaledOperator, side: Side) -> f64 {
    op.mass_corner(side)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn degree_one_is_linear_interpolant() {
        let op = gll_operator(1).unwrap();
        assert_eq!(op.nodes(), &[-1.0, 1.0]);
        assert_eq!(op.mass_diag(), &[1.0, 1.0]);
        for (d, e) in op.deriv().iter().zip([-0.5, 0.5, -0.5, 0.5]) {
            assert_close!(*d, e, 1e-15);
        }
    }

    #[test]
    fn degree_two_weights_match_brute_force_exactness() {
        // Solve sum_i w_i x_i^k = int x^k, k = 0..2, on nodes (-1, 0, 1).
        let nodes = [-1.0_f64, 0.0, 1.0];
        let a = nalgebra::Matrix3::from_fn(|k, i| nodes[i].powi(k as i32));
        let b = nalgebra::Vector3::new(2.0, 0.0, 2.0 / 3.0);
        let w = a.lu().solve(&b).unwrap();
        let op = gll_operator(2).unwrap();
        for i in 0..3 {
            assert_close!(op.nodes()[i], nodes[i], 1e-15);
            assert_close!(op.mass_diag()[i], w[i], 1e-14);
        }
        assert_close!(w[0], 1.0 / 3.0, 1e-14);
        assert_close!(w[1], 4.0 / 3.0, 1e-14);
    }

    #[test]
    fn degree_three_nodes_match_bisection_oracle() {
        // (1 - x^2) P_3'(x), P_3'(x) = (15 x^2 - 3) / 2, bracketed on (0, 1).
        let g = |x: f64| (1.0 - x * x) * (15.0 * x * x - 3.0) / 2.0;
        let (mut lo, mut hi) = (0.1_f64, 0.9_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert_close!(root, 1.0 / 5.0_f64.sqrt(), 1e-15);
        let op = gll_operator(3).unwrap();
        let expected = [-1.0, -root, root, 1.0];
        for (x, e) in op.nodes().iter().zip(expected) {
            assert_close!(*x, e, 1e-15);
        }
        for (w, e) in op.mass_diag().iter().zip([1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0]) {
            assert_close!(*w, e, 1e-15);
        }
    }

    #[test]
    fn rejects_unsupported_degrees() {
        assert!(matches!(gll_operator(0), Err(Error::InvalidDegree(0))));
        assert!(matches!(gll_operator(13), Err(Error::InvalidDegree(13))));
        assert!(gll_operator(12).is_ok());
    }

    #[test]
    fn invariants_hold_for_all_small_degrees() {
        for p in 1..=8 {
            let op = gll_operator(p).unwrap();
            let n = op.len();
            assert!(max_abs(&op.sbp_defect()) <= 1e-13, "SBP defect p={p}");
            assert_close!(op.mass_diag().iter().sum::<f64>(), 2.0, 1e-13);
            assert!(op.mass_diag().iter().all(|&w| w > 0.0));
            assert!(op.nodes().windows(2).all(|w| w[0] < w[1]));

            let mut out = vec![0.0; n];
            op.apply_deriv(&vec![1.0; n], 1.0, &mut out);
            assert!(max_abs(&out) <= 1e-13, "constants p={p}");

            for k in 1..=p {
                let u: Vec<f64> = op.nodes().iter().map(|x| x.powi(k as i32)).collect();
                op.apply_deriv(&u, 1.0, &mut out);
                for (x, du) in op.nodes().iter().zip(&out) {
                    let exact = k as f64 * x.powi(k as i32 - 1);
                    assert_close!(*du, exact, 1e-12);
                }
            }
            for k in 0..(2 * p) {
                let q: f64 = op
                    .nodes()
                    .iter()
                    .zip(op.mass_diag())
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert_close!(q, exact, 1e-12);
            }
        }
    }

    #[test]
    fn scaled_invariants() {
        for p in 1..=8 {
            let base = Arc::new(gll_operator(p).unwrap());
            for h in [0.1, 1.0, 2.7] {
                let el = scale_to_element(base.clone(), 0.3, 0.3 + h).unwrap();
                let n = base.len();
                let m = el.mass_diag();
                let d = el.deriv();
                assert_close!(m.iter().sum::<f64>(), h, 1e-13 * h.max(1.0));
                for i in 0..n {
                    for j in 0..n {
                        let b = match (i, j) {
                            (0, 0) => -1.0,
                            _ if i == n - 1 && j == n - 1 => 1.0,
                            _ => 0.0,
                        };
                        let defect = m[i] * d[i * n + j] + m[j] * d[j * n + i] - b;
                        assert!(defect.abs() <= 1e-13, "p={p} h={h} ({i},{j}) {defect}");
                    }
                    let row_sum: f64 = d[i * n..(i + 1) * n].iter().sum();
                    assert!(row_sum.abs() <= 1e-13 / h.min(1.0));
                }
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let p1 = Arc::new(gll_operator(1).unwrap());
        let e = scale_to_element(p1.clone(), 0.0, 2.0).unwrap();
        assert_eq!(e.deriv(), vec![-0.5, 0.5, -0.5, 0.5]);
        assert_eq!(e.mass_diag(), vec![1.0, 1.0]);

        let e = scale_to_element(p1, 0.0, 1.0).unwrap();
        assert_eq!(e.deriv(), vec![-1.0, 1.0, -1.0, 1.0]);
        assert_eq!(e.mass_diag(), vec![0.5, 0.5]);
        assert_close!(mass_corner(&e, Side::Left), 2.0, 1e-15);
        assert_close!(mass_corner(&e, Side::Right), 2.0, 1e-15);

        let p2 = Arc::new(gll_operator(2).unwrap());
        let e = scale_to_element(p2.clone(), 0.0, 0.5).unwrap();
        assert_close!(e.mass(0), 1.0 / 12.0, 1e-15);

        let e = scale_to_element(p2, -1.0, 1.0).unwrap();
        assert_close!(e.mass_corner(Side::Left), 3.0, 1e-14);
        assert_close!(e.mass_corner(Side::Right), 3.0, 1e-14);

        let p3 = Arc::new(gll_operator(3).unwrap());
        let e = scale_to_element(p3, 5.0, 7.0).unwrap();
        assert_close!(e.mass_corner(Side::Right), 6.0, 1e-13);
        assert_close!(e.nodes()[0], 5.0, 0.0);
        assert_close!(e.nodes()[3], 7.0, 0.0);
    }

    #[test]
    fn degenerate_elements_are_rejected() {
        let p1 = Arc::new(gll_operator(1).unwrap());
        assert!(scale_to_element(p1.clone(), 1.0, 1.0).is_err());
        assert!(scale_to_element(p1.clone(), 1.0, 0.5).is_err());
        assert!(scale_to_element(p1, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn dump_has_one_row_per_node() {
        let op = gll_operator(3).unwrap();
        let text = op.to_string();
        assert_eq!(text.lines().filter(|l| l.starts_with("D[")).count(), 4);
    }
}
