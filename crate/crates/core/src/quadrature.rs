//! Gauss-Hermite rules and tensor-product grid sums.
//!
//! Rules integrate `∫ f(t) e^{-t²} dt`; grid sums over several dimensions
//! omit any `π^{-d/2}` normalisation, which callers apply themselves.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::matrix::Matrix;
use crate::spectral::symmetric_eigen;
use crate::{Error, Result};

pub const MAX_ORDER: usize = 64;
pub const MAX_GRID_DIMS: usize = 8;
/// Rule order used when callers do not choose one.
pub const DEFAULT_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Ascending nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One-dimensional rule applied to `f`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(t));
        }
        acc.value()
    }
}

/// Gauss-Hermite rule of order `q` by Golub-Welsch.
///
/// Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix with
/// off-diagonals `sqrt(k/2)`, polished by Newton steps on the orthonormal
/// Hermite recurrence and then symmetrised. The weight of node `t` is `√π`
/// times the squared first component of the normalised eigenvector, and that
/// eigenvector is `(p_0(t), ..., p_{q-1}(t)) / ‖·‖` with `p_k` the orthonormal
/// polynomials, so the weight is `√π / Σ p_k(t)²`. Forming it from the
/// recurrence keeps full relative accuracy in the far tails where the
/// rotation-based eigenvector components are below round-off.
pub fn gauss_hermite(q: usize) -> Result<QuadratureRule> {
    if q == 0 || q > MAX_ORDER {
        return Err(Error::param(format!(
            "Gauss-Hermite order must be in 1..={MAX_ORDER}, got {q}"
        )));
    }
    let jacobi = Matrix::from_fn(q, q, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let (mut nodes, _) = symmetric_eigen(&jacobi)?;
    nodes.reverse();

    for t in nodes.iter_mut() {
        for _ in 0..3 {
            let (pq, pq1) = orthonormal_hermite_pair(q, *t);
            let deriv = (2.0 * q as f64).sqrt() * pq1;
            if deriv == 0.0 {
                break;
            }
            let step = pq / deriv;
            *t -= step;
            if step.abs() <= 1e-16 * t.abs().max(1.0) {
                break;
            }
        }
    }

    for i in 0..q / 2 {
        let j = q - 1 - i;
        let m = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -m;
        nodes[j] = m;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }

    let sqrt_pi = PI.sqrt();
    let weights = nodes
        .iter()
        .map(|&t| {
            let mut prev = 0.0;
            let mut cur = 1.0;
            let mut norm = 1.0;
            for k in 1..q {
                let next = (t * cur - ((k - 1) as f64 / 2.0).sqrt() * prev) / (k as f64 / 2.0).sqrt();
                prev = cur;
                cur = next;
                norm += cur * cur;
            }
            sqrt_pi / norm
        })
        .collect();

    Ok(QuadratureRule { nodes, weights })
}

/// `(p_q(t), p_{q-1}(t))` for the Hermite polynomials orthonormal under `e^{-t²}/√π`.
fn orthonormal_hermite_pair(q: usize, t: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 1..=q {
        let next = (t * cur - ((k - 1) as f64 / 2.0).sqrt() * prev) / (k as f64 / 2.0).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn check_dims(rule: &QuadratureRule, dims: usize) -> Result<()> {
    if dims == 0 {
        return Err(Error::param("tensor grid needs at least one dimension"));
    }
    if dims > MAX_GRID_DIMS {
        return Err(Error::GridTooLarge {
            order: rule.order(),
            dims,
            points: (rule.order() as f64).powi(dims as i32),
            max_dims: MAX_GRID_DIMS,
        });
    }
    Ok(())
}

/// Sum of `(∏ weights) · integrand(nodes)` over the full `Q^dims` grid.
pub fn tensor_grid_reduce(
    rule: &QuadratureRule,
    dims: usize,
    mut integrand: impl FnMut(&[f64]) -> f64,
) -> Result<f64> {
    check_dims(rule, dims)?;
    let mut acc = CompensatedSum::default();
    odometer(rule, dims, None, &mut |point, weight| acc.add(weight * integrand(point)));
    Ok(acc.value())
}

/// Same sum as [`tensor_grid_reduce`], split over the first grid index on the
/// rayon pool. Partial sums are combined in index order, so the result does
/// not depend on the number of workers.
pub fn tensor_grid_reduce_par(
    rule: &QuadratureRule,
    dims: usize,
    integrand: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<f64> {
    check_dims(rule, dims)?;
    let partials: Vec<CompensatedSum> = (0..rule.order())
        .into_par_iter()
        .map(|first| {
            let mut acc = CompensatedSum::default();
            odometer(rule, dims, Some(first), &mut |point, weight| {
                acc.add(weight * integrand(point))
            });
            acc
        })
        .collect();
    let mut total = CompensatedSum::default();
    for p in partials {
        total.add(p.sum);
        total.add(p.compensation);
    }
    Ok(total.value())
}

/// Visits grid points in lexicographic order, last index fastest. With
/// `fixed_first`, only points whose first index equals it are visited.
fn odometer(
    rule: &QuadratureRule,
    dims: usize,
    fixed_first: Option<usize>,
    visit: &mut dyn FnMut(&[f64], f64),
) {
    let q = rule.order();
    let mut idx = vec![0usize; dims];
    let start_dim = if let Some(f) = fixed_first {
        idx[0] = f;
        1
    } else {
        0
    };
    let mut point: Vec<f64> = idx.iter().map(|&i| rule.nodes[i]).collect();
    loop {
        let weight: f64 = idx.iter().map(|&i| rule.weights[i]).product();
        visit(&point, weight);
        let mut d = dims;
        loop {
            if d == start_dim {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < q {
                point[d] = rule.nodes[idx[d]];
                break;
            }
            idx[d] = 0;
            point[d] = rule.nodes[0];
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
