//! Dense complex linear algebra helpers.
//!
//! Eigendecomposition is done with a cyclic Jacobi iteration.  A unitary
//! matrix is normal, so it is split into the commuting Hermitian pair
//! `A = (U + U†)/2` and `B = (U - U†)/(2i)`; `A` is diagonalized first and
//! `B` is then diagonalized inside each (near-)degenerate eigenspace of `A`.
//! Everything runs in a fixed order, so results are reproducible bit for bit.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::C64;

/// Conjugate transpose.
pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Largest entry magnitude of `M† M - I`.
pub fn unitarity_residual(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let product = adjoint(m).dot(m);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { C64::ONE } else { C64::ZERO };
            worst = worst.max((product[[i, j]] - expect).norm());
        }
    }
    worst
}

/// Frobenius norm of the off-diagonal part.
fn off_norm(h: &Array2<C64>) -> f64 {
    let n = h.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += h[[i, j]].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigenvalues and eigenvector columns of a Hermitian matrix, by cyclic
/// Jacobi rotations.  Eigenpairs are returned sorted by ascending eigenvalue.
pub fn hermitian_eigen(input: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = input.nrows();
    assert_eq!(n, input.ncols(), "matrix must be square");
    let mut h = input.clone();
    let mut v = Array2::<C64>::eye(n);
    let scale = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let target = 1e-15 * scale;
    let max_sweeps = 60;
    let mut converged = false;
    for _ in 0..max_sweeps {
        if off_norm(&h) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let hpq = h[[p, q]];
                let b = hpq.norm();
                if b == 0.0 {
                    continue;
                }
                let alpha = hpq.arg();
                let a = h[[p, p]].re;
                let d = h[[q, q]].re;
                // Real Jacobi angle for the phase-stripped 2x2 block.
                let tau = (d - a) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary rotation G: columns (p, q) mix with an extra phase
                // on column q so the transformed off-diagonal entry vanishes.
                let phase = C64::from_polar(1.0, -alpha);
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase * s;
                let g_qq = phase * c;
                // H <- G† H G, columns first, then rows.
                for i in 0..n {
                    let hip = h[[i, p]];
                    let hiq = h[[i, q]];
                    h[[i, p]] = hip * g_pp + hiq * g_qp;
                    h[[i, q]] = hip * g_pq + hiq * g_qq;
                }
                for j in 0..n {
                    let hpj = h[[p, j]];
                    let hqj = h[[q, j]];
                    h[[p, j]] = g_pp.conj() * hpj + g_qp.conj() * hqj;
                    h[[q, j]] = g_pq.conj() * hpj + g_qq.conj() * hqj;
                }
                h[[p, q]] = C64::ZERO;
                h[[q, p]] = C64::ZERO;
                h[[p, p]] = C64::new(h[[p, p]].re, 0.0);
                h[[q, q]] = C64::new(h[[q, q]].re, 0.0);
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip * g_pp + viq * g_qp;
                    v[[i, q]] = vip * g_pq + viq * g_qq;
                }
            }
        }
    }
    if !converged && off_norm(&h) > target {
        return Err(Error::Convergence(format!(
            "Jacobi iteration stalled at off-diagonal norm {:.3e} (target {:.3e})",
            off_norm(&h),
            target
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| h[[i, i]].re.partial_cmp(&h[[j, j]].re).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| h[[i, i]].re).collect();
    let mut vectors = Array2::<C64>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = v[[row, src]];
        }
    }
    Ok((values, vectors))
}

/// Eigenvalues and eigenvector columns of a normal (in practice unitary)
/// matrix.  Eigenpairs are sorted by ascending eigenvalue phase in
/// `(-pi, pi]`.  Also returns the per-pair residual `|U v - lambda v|`.
pub fn normal_eigen(u: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>, Vec<f64>)> {
    let n = u.nrows();
    assert_eq!(n, u.ncols(), "matrix must be square");
    let ut = adjoint(u);
    let mut a = Array2::<C64>::zeros((n, n));
    let mut b = Array2::<C64>::zeros((n, n));
    let half_i = C64::new(0.0, -0.5);
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] = (u[[i, j]] + ut[[i, j]]) * 0.5;
            b[[i, j]] = (u[[i, j]] - ut[[i, j]]) * half_i;
        }
    }
    let (avals, mut v) = hermitian_eigen(&a)?;

    // Within each near-degenerate eigenspace of A, diagonalize B to separate
    // the conjugate eigenvalue branches.
    let cluster_tol = 1e-8;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (avals[end] - avals[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let vc = v.slice(ndarray::s![.., start..end]).to_owned();
            let bc = adjoint(&vc).dot(&b).dot(&vc);
            let (_, w) = hermitian_eigen(&bc)?;
            let rotated = vc.dot(&w);
            v.slice_mut(ndarray::s![.., start..end]).assign(&rotated);
        }
        start = end;
    }

    let mut eigenvalues = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for j in 0..n {
        let col = v.column(j);
        let image = u.dot(&col);
        let lambda: C64 = col.iter().zip(image.iter()).map(|(x, y)| x.conj() * y).sum();
        let mut residual = 0.0;
        for i in 0..n {
            residual += (image[i] - lambda * col[i]).norm_sqr();
        }
        eigenvalues.push(lambda);
        residuals.push(residual.sqrt());
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eigenvalues[i].arg().partial_cmp(&eigenvalues[j].arg()).unwrap().then(i.cmp(&j))
    });
    let sorted_values: Vec<C64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let sorted_residuals: Vec<f64> = order.iter().map(|&i| residuals[i]).collect();
    let mut sorted_vectors = Array2::<C64>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            sorted_vectors[[row, col]] = v[[row, src]];
        }
    }
    Ok((sorted_values, sorted_vectors, sorted_residuals))
}
