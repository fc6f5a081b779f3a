//! Preconditioned conjugate gradients for sparse SPD systems.

use crate::error::{Error, Result};

/// A symmetric positive-definite linear operator.
pub trait SpdOperator {
    fn dim(&self) -> usize;
    /// `out = A x`
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({r}, {c}) outside {n}x{n}"
                )));
            }
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { n, row_ptr, cols, vals })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self {
            n: d.len(),
            row_ptr: (0..=d.len()).collect(),
            cols: (0..d.len()).collect(),
            vals: d.to_vec(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates over stored `(row, col, value)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }
}

impl SpdOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (r, c, v) in self.entries() {
            if r == c {
                d[r] += v;
            }
        }
        d
    }
}

/// Approximate inverse applied once per CG iteration: `z ~= A^-1 r`.
pub trait Preconditioner {
    fn precondition(&self, r: &[f64], z: &mut [f64]);
}

/// Diagonal scaling.
#[derive(Clone, Debug)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new<A: SpdOperator + ?Sized>(op: &A) -> Self {
        let inv_diag = op
            .diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        Self { inv_diag }
    }
}

impl Preconditioner for Jacobi {
    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *z = r * d;
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `||b - A x|| / ||b||`, recomputed from scratch.
    pub residual: f64,
    pub history: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` from a zero initial guess.
pub fn solve_spd<A: SpdOperator + ?Sized>(
    op: &A,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    solve_spd_from(op, rhs, vec![0.0; rhs.len()], tol, max_iter)
}

/// Solves `A x = b` starting from `x0` with Jacobi preconditioning.
pub fn solve_spd_from<A: SpdOperator + ?Sized>(
    op: &A,
    rhs: &[f64],
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    solve_spd_preconditioned(op, &Jacobi::new(op), rhs, x0, tol, max_iter)
}

/// Solves `A x = b` starting from `x0`. Stops once the true relative residual
/// is at most `tol`; fails with [`Error::Convergence`] after `max_iter` steps.
pub fn solve_spd_preconditioned<A, P>(
    op: &A,
    pc: &P,
    rhs: &[f64],
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Solution>
where
    A: SpdOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    let n = op.dim();
    if rhs.len() != n || x0.len() != n {
        return Err(Error::InvalidParameter(format!(
            "operator is {n}-dimensional, rhs has {}, x0 has {}",
            rhs.len(),
            x0.len()
        )));
    }
    let b_norm = dot(rhs, rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(Solution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }

    let mut x = x0;
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    // Outer loop restarts from the true residual if recurrence drift makes
    // the updated residual look better than it is.
    loop {
        op.apply(&x, &mut ap);
        for i in 0..n {
            r[i] = rhs[i] - ap[i];
        }
        let true_res = dot(&r, &r).sqrt() / b_norm;
        if history.last() != Some(&true_res) {
            history.push(true_res);
        }
        if true_res <= tol {
            return Ok(Solution { x, iterations, residual: true_res, history });
        }
        if iterations >= max_iter {
            return Err(Error::Convergence { iterations, residual: true_res, history });
        }

        pc.precondition(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            op.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Convergence {
                    iterations,
                    residual: *history.last().unwrap(),
                    history,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            let res = dot(&r, &r).sqrt() / b_norm;
            history.push(res);
            if res <= tol {
                break;
            }
            pc.precondition(&r, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
}
