//! Thin sparse/dense linear algebra layer over `faer`.
//!
//! Assembly accumulates coordinate triplets; systems are converted to CSC for
//! factorization. All solves run sequentially so repeated runs are
//! bit-reproducible.

use crate::error::{Result, SdgError};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

/// Coordinate-format sparse matrix accumulator. Duplicate entries sum.
#[derive(Debug, Clone)]
pub struct Coo {
    pub nrows: usize,
    pub ncols: usize,
    pub triplets: Vec<Triplet<usize, usize, f64>>,
}

impl Coo {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Coo { nrows, ncols, triplets: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.triplets.push(Triplet::new(row, col, value));
        }
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn to_csc(&self) -> SparseColMat<usize, f64> {
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &self.triplets)
            .expect("valid triplets")
    }

    /// Dense copy; intended for desk-scale verification work only.
    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for t in &self.triplets {
            m[(t.row, t.col)] += t.val;
        }
        m
    }

    /// y += alpha * A x
    pub fn accumulate_matvec(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        for t in &self.triplets {
            y[t.row] += alpha * t.val * x[t.col];
        }
    }

    /// Frobenius norms of (A - B^T) and of A, for transpose-identity checks.
    pub fn transpose_deviation(&self, other: &Coo) -> (f64, f64) {
        use std::collections::HashMap;
        let mut map: HashMap<(usize, usize), f64> = HashMap::new();
        for t in &self.triplets {
            *map.entry((t.row, t.col)).or_insert(0.0) += t.val;
        }
        let norm_a: f64 = map.values().map(|v| v * v).sum::<f64>().sqrt();
        for t in &other.triplets {
            *map.entry((t.col, t.row)).or_insert(0.0) -= t.val;
        }
        let dev: f64 = map.values().map(|v| v * v).sum::<f64>().sqrt();
        (dev, norm_a)
    }
}

/// Solves `A x = b` by sparse LU with a relative-residual guarantee.
pub fn sparse_lu_solve(a: &SparseColMat<usize, f64>, b: &[f64]) -> Result<Vec<f64>> {
    faer::set_global_parallelism(faer::Par::Seq);
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(SdgError::LinearSolve(format!(
            "shape mismatch: {}x{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a
        .sp_lu()
        .map_err(|e| SdgError::LinearSolve(format!("factorization failed: {e:?}")))?;
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    let sol: Vec<f64> = (0..b.len()).map(|i| x[(i, 0)]).collect();

    let mut residual = b.to_vec();
    spmv(a, &sol, -1.0, &mut residual);
    let rnorm = norm2(&residual);
    let bnorm = norm2(b);
    if !rnorm.is_finite() || rnorm > 1e-10 * bnorm.max(1.0) {
        return Err(SdgError::LinearSolve(format!(
            "direct solve residual {rnorm:.3e} exceeds contract (|b| = {bnorm:.3e})"
        )));
    }
    Ok(sol)
}

/// y += alpha * A x for CSC `A`.
pub fn spmv(a: &SparseColMat<usize, f64>, x: &[f64], alpha: f64, y: &mut [f64]) {
    for col in 0..a.ncols() {
        let xi = alpha * x[col];
        if xi == 0.0 {
            continue;
        }
        let rows = a.row_idx_of_col_raw(col);
        let vals = a.val_of_col(col);
        for (r, v) in rows.iter().zip(vals) {
            y[*r] += v * xi;
        }
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Unpreconditioned BiCGSTAB; secondary contract for well-conditioned blocks.
pub fn bicgstab(
    a: &SparseColMat<usize, f64>,
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm2(b).max(1e-300);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 0..max_iters {
        let rho_new: f64 = r0.iter().zip(&r).map(|(a, b)| a * b).sum();
        if rho_new.abs() < 1e-300 {
            return Err(SdgError::Stagnation { iters: it, residual: norm2(&r) / bnorm });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v.iter_mut().for_each(|z| *z = 0.0);
        spmv(a, &p, 1.0, &mut v);
        let r0v: f64 = r0.iter().zip(&v).map(|(a, b)| a * b).sum();
        alpha = rho / r0v;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm2(&s) <= tol * bnorm {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Ok(x);
        }
        let mut t = vec![0.0; n];
        spmv(a, &s, 1.0, &mut t);
        let tt: f64 = t.iter().map(|z| z * z).sum();
        let ts: f64 = t.iter().zip(&s).map(|(a, b)| a * b).sum();
        omega = ts / tt.max(1e-300);
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm2(&r) <= tol * bnorm {
            return Ok(x);
        }
    }
    Err(SdgError::Stagnation { iters: max_iters, residual: norm2(&r) / bnorm })
}

/// Smallest generalized eigenvalue of `(S, G)` for symmetric `S` and SPD `G`,
/// via the Cholesky reduction `L^-1 S L^-T`.
pub fn smallest_generalized_eigenvalue(s: &Mat<f64>, g: &Mat<f64>) -> Result<f64> {
    faer::set_global_parallelism(faer::Par::Seq);
    let n = s.nrows();
    let llt = g
        .llt(faer::Side::Lower)
        .map_err(|_| SdgError::LinearSolve("Gram matrix not SPD".into()))?;
    let l = llt.L().to_owned();
    // T = L^-1 S L^-T via two triangular solves
    let w = triangular_solve_lower(&l, s);
    let wt = w.transpose().to_owned();
    let t = triangular_solve_lower(&l, &wt);
    let mut tsym = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            tsym[(i, j)] = 0.5 * (t[(i, j)] + t[(j, i)]);
        }
    }
    let eigs = sym_eigenvalues(&tsym)?;
    eigs.first()
        .copied()
        .ok_or_else(|| SdgError::LinearSolve("empty eigenproblem".into()))
}

fn triangular_solve_lower(l: &Mat<f64>, rhs: &Mat<f64>) -> Mat<f64> {
    let n = l.nrows();
    let m = rhs.ncols();
    let mut x = rhs.to_owned();
    for col in 0..m {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Dense symmetric eigenvalues, ascending.
pub fn sym_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    faer::set_global_parallelism(faer::Par::Seq);
    let mut eigs = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| SdgError::LinearSolve(format!("eigensolve failed: {e:?}")))?;
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_identity() {
        let mut coo = Coo::new(3, 3);
        for i in 0..3 {
            coo.push(i, i, 1.0);
        }
        let x = sparse_lu_solve(&coo.to_csc(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn lu_solves_diagonal_2x2() {
        let mut coo = Coo::new(2, 2);
        coo.push(0, 0, 2.0);
        coo.push(1, 1, 4.0);
        let x = sparse_lu_solve(&coo.to_csc(), &[2.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn structural_singularity_detected() {
        let mut coo = Coo::new(2, 2);
        coo.push(0, 0, 1.0);
        // second row empty
        let res = sparse_lu_solve(&coo.to_csc(), &[1.0, 1.0]);
        assert!(res.is_err());
    }

    #[test]
    fn bicgstab_matches_direct() {
        let mut coo = Coo::new(4, 4);
        for i in 0..4 {
            coo.push(i, i, 4.0);
            if i > 0 {
                coo.push(i, i - 1, -1.0);
                coo.push(i - 1, i, -1.0);
            }
        }
        let b = [1.0, 0.0, 0.0, 2.0];
        let a = coo.to_csc();
        let x1 = sparse_lu_solve(&a, &b).unwrap();
        let x2 = bicgstab(&a, &b, 1e-12, 100).unwrap();
        for (a, b) in x1.iter().zip(&x2) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn generalized_eigenvalue_diag() {
        // S = diag(2, 12), G = diag(1, 4): eigenvalues 2 and 3
        let mut s = Mat::zeros(2, 2);
        s[(0, 0)] = 2.0;
        s[(1, 1)] = 12.0;
        let mut g = Mat::zeros(2, 2);
        g[(0, 0)] = 1.0;
        g[(1, 1)] = 4.0;
        let lam = smallest_generalized_eigenvalue(&s, &g).unwrap();
        assert!((lam - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_deviation_detects_perturbation() {
        let mut a = Coo::new(2, 2);
        a.push(0, 1, 3.0);
        a.push(1, 0, -2.0);
        let mut bt = Coo::new(2, 2);
        bt.push(1, 0, 3.0);
        bt.push(0, 1, -2.0);
        let (dev, norm) = a.transpose_deviation(&bt);
        assert!(dev < 1e-15 && norm > 0.0);
        bt.push(0, 1, 1e-3);
        let (dev2, _) = a.transpose_deviation(&bt);
        assert!(dev2 > 1e-4);
    }
}
