//! Dense solves on top of nalgebra: least squares, truncated SVD, leverage
//! scores and a few symmetric-matrix helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Relative rank tolerance used by every solve in this module.
pub const RANK_TOL: f64 = 1e-10;

fn rank_cutoff(a: &DMatrix<f64>) -> f64 {
    RANK_TOL * a.norm().max(f64::MIN_POSITIVE)
}

/// Numerical rank from column-pivoted Householder QR.
pub fn numerical_rank(a: &DenseMatrix) -> usize {
    if a.rows() == 0 || a.cols() == 0 {
        return 0;
    }
    let m = a.to_na();
    let cut = rank_cutoff(&m);
    let r = m.clone().col_piv_qr().unpack_r();
    (0..r.nrows().min(r.ncols())).filter(|&i| r[(i, i)].abs() > cut).count()
}

fn pinv_na(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cut = rank_cutoff(m);
    let svd = m.clone().svd(true, true);
    // pseudo_inverse only errors for a negative eps
    svd.pseudo_inverse(cut).expect("non-negative eps")
}

/// `argmin_X ‖AX − B‖_F`, minimum-norm when `A` is rank deficient.
pub fn least_squares(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!("A has {} rows, B has {}", a.rows(), b.rows())));
    }
    if a.cols() == 0 {
        return Ok(DenseMatrix::zeros(0, b.cols()));
    }
    let am = a.to_na();
    let bm = b.to_na();
    let x = if a.rows() >= a.cols() && numerical_rank(a) == a.cols() {
        let qr = am.qr();
        let qtb = qr.q().transpose() * bm;
        qr.r().solve_upper_triangular(&qtb).ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?
    } else {
        pinv_na(&am) * bm
    };
    Ok(DenseMatrix::from_na(&x))
}

pub fn lstsq_vec(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let bm = DenseMatrix::new(b.len(), 1, b.to_vec())?;
    Ok(least_squares(a, &bm)?.col(0))
}

/// Weighted least squares `argmin Σ w_i (a_iᵀx − b_i)²`.
pub fn weighted_lstsq(a: &DenseMatrix, b: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let s: Vec<f64> = w.iter().map(|v| v.max(0.0).sqrt()).collect();
    let bs: Vec<f64> = b.iter().zip(&s).map(|(x, y)| x * y).collect();
    lstsq_vec(&a.scale_rows(&s), &bs)
}

pub fn pinv(a: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_na(&pinv_na(&a.to_na()))
}

/// Thin truncated SVD.
#[derive(Clone, Debug)]
pub struct RankK {
    pub approx: DenseMatrix,
    /// n×k
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    /// d×k
    pub v: DenseMatrix,
}

pub fn best_rank_k(a: &DenseMatrix, k: usize) -> Result<RankK> {
    if k == 0 || k > a.rows().min(a.cols()) {
        return Err(Error::InvalidInput(format!("k={k} outside 1..={}", a.rows().min(a.cols()))));
    }
    let svd = a.to_na().svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let top = &order[..k];
    let uk = DenseMatrix::from_fn(a.rows(), k, |i, j| u[(i, top[j])]);
    let vk = DenseMatrix::from_fn(a.cols(), k, |i, j| vt[(top[j], i)]);
    let sigma: Vec<f64> = top.iter().map(|&i| svd.singular_values[i]).collect();
    let approx = uk.scale_cols(&sigma).matmul(&vk.transpose())?;
    Ok(RankK { approx, u: uk, sigma, v: vk })
}

/// Orthonormal basis (d×r) of the row space of `a`.
pub fn row_space_basis(a: &DenseMatrix) -> DenseMatrix {
    if a.rows() == 0 {
        return DenseMatrix::zeros(a.cols(), 0);
    }
    let m = a.to_na();
    let cut = rank_cutoff(&m);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > cut).collect();
    DenseMatrix::from_fn(a.cols(), keep.len(), |i, j| vt[(keep[j], i)])
}

/// Orthonormal basis (n×r) of the column space of `a`.
pub fn col_space_basis(a: &DenseMatrix) -> DenseMatrix {
    row_space_basis(&a.transpose())
}

/// Statistical leverage scores `τ_i = a_iᵀ(AᵀA)⁺a_i`.
pub fn leverage_scores(a: &DenseMatrix) -> Vec<f64> {
    let q = col_space_basis(a);
    q.row_iter().map(|r| r.iter().map(|v| v * v).sum()).collect()
}

/// `Σ_i w_i a_i a_iᵀ`.
pub fn weighted_gram(a: &DenseMatrix, w: &[f64]) -> DMatrix<f64> {
    let d = a.cols();
    let mut g = DMatrix::<f64>::zeros(d, d);
    for (r, &wi) in a.row_iter().zip(w) {
        if wi == 0.0 {
            continue;
        }
        for i in 0..d {
            let ri = wi * r[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..d {
                g[(i, j)] += ri * r[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
    g
}

/// Inverse of a symmetric PSD matrix; pseudo-inverse if singular.
pub fn sym_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    match m.clone().cholesky() {
        Some(c) => c.inverse(),
        None => pinv_na(m),
    }
}

/// `M^{-1/2}` for symmetric positive definite `M`.
pub fn inv_sqrt_sym(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    if eig.eigenvalues.iter().any(|&l| l <= RANK_TOL * top) {
        return Err(Error::RankDeficient("matrix is not positive definite".into()));
    }
    let d = DVector::from_iterator(m.nrows(), eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose())
}

/// `xᵀ M x` for a row slice.
pub fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    for i in 0..d {
        let mut t = 0.0;
        for j in 0..d {
            t += m[(i, j)] * x[j];
        }
        s += x[i] * t;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_exact_and_min_norm() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let x = lstsq_vec(&a, &[3.0, 4.0, 5.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);

        // duplicated column: min-norm solution splits evenly
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let x = lstsq_vec(&a, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
        assert_eq!(numerical_rank(&a), 1);
    }

    #[test]
    fn rank_k_of_rank_one() {
        let a = DenseMatrix::from_fn(4, 3, |i, j| (i + 1) as f64 * (j as f64 - 1.0));
        let r = best_rank_k(&a, 1).unwrap();
        assert!(r.approx.sub(&a).unwrap().frobenius() < 1e-10);
        assert!(best_rank_k(&a, 4).is_err());
    }

    #[test]
    fn leverage_sums_to_rank() {
        let a = DenseMatrix::from_fn(6, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let s: f64 = leverage_scores(&a).iter().sum();
        assert!((s - numerical_rank(&a) as f64).abs() < 1e-9);
    }
}
