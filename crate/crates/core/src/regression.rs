//! Robust regression by iteratively reweighted least squares.
//!
//! * `g_regression`: `min_x Σ g(Bx − b)` for a registered loss.
//! * `lp_regression`: `min_x ‖Ax − b‖_p`, `1 ≤ p < ∞`, with a homotopy in `p`
//!   from 2 for large exponents.
//! * `pq2_regression`: `min_Y Σ_i ‖x_iᵀY − b_i‖₂^p`, the row-coupled variant.
//! * `chebyshev`: `‖·‖_∞` through an `ℓ_q` surrogate with `m^{1/q} ≤ factor`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{least_squares, lstsq_vec, weighted_lstsq};
use crate::loss::Loss;
use crate::matrix::{lp_norm, DenseMatrix};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IrlsOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self { max_iters: 200, tol: 1e-12 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative first-order residual at `x`; zero when the fit is exact.
    pub kkt: f64,
}

fn residual(a: &DenseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(u, v)| u - v).collect()
}

fn g_cost(loss: &dyn Loss, r: &[f64]) -> f64 {
    r.iter().map(|&v| loss.eval(v)).sum()
}

fn g_kkt(a: &DenseMatrix, loss: &dyn Loss, r: &[f64]) -> f64 {
    let grad = a.tmatvec(&r.iter().map(|&v| loss.deriv(v)).collect::<Vec<_>>());
    let scale: f64 = r.iter().map(|&v| loss.deriv(v).abs()).sum::<f64>().max(1e-300) * a.max_abs().max(1e-300);
    lp_norm(&grad, f64::INFINITY) / scale
}

/// `argmin_x Σ g(a_iᵀx − b_i)` by majorize-minimize IRLS from the
/// least-squares start. Returns the cheapest iterate seen.
pub fn g_regression(a: &DenseMatrix, b: &[f64], loss: &dyn Loss, opts: IrlsOptions) -> Result<Fit> {
    if a.rows() != b.len() {
        return invalid(format!("A has {} rows, b has {}", a.rows(), b.len()));
    }
    let mut x = lstsq_vec(a, b)?;
    let mut r = residual(a, &x, b);
    let mut cost = g_cost(loss, &r);
    let mut best = (x.clone(), cost);
    let mut converged = cost == 0.0;
    let mut it = 0;
    while !converged && it < opts.max_iters {
        it += 1;
        let w: Vec<f64> = r.iter().map(|&v| loss.irls_weight(v).max(1e-12)).collect();
        x = weighted_lstsq(a, b, &w)?;
        r = residual(a, &x, b);
        let next = g_cost(loss, &r);
        if next < best.1 {
            best = (x.clone(), next);
        }
        converged = (cost - next).abs() <= opts.tol * cost.max(1e-300);
        cost = next;
    }
    let r = residual(a, &best.0, b);
    Ok(Fit { kkt: g_kkt(a, loss, &r), x: best.0, cost: best.1, iterations: it, converged })
}

fn lp_kkt(a: &DenseMatrix, r: &[f64], p: f64) -> f64 {
    let m = lp_norm(r, f64::INFINITY);
    if m == 0.0 {
        return 0.0;
    }
    // gradient of Σ|r/m|^p, so the scale of r drops out
    let g: Vec<f64> = r.iter().map(|&v| (v / m).signum() * (v.abs() / m).powf(p - 1.0)).collect();
    let grad = a.tmatvec(&g);
    let denom: f64 = g.iter().map(|v| v.abs()).sum::<f64>() * a.max_abs().max(1e-300);
    lp_norm(&grad, f64::INFINITY) / denom.max(1e-300)
}

/// One homotopy stage for `p ≥ 2`: damped Newton, whose direction is the
/// IRLS step with weights `|r|^{p−2}`.
fn lp_stage_high(
    a: &DenseMatrix,
    b: &[f64],
    p: f64,
    x0: Vec<f64>,
    opts: IrlsOptions,
) -> Result<(Vec<f64>, usize, bool)> {
    let mut x = x0;
    let mut r = residual(a, &x, b);
    let mut cost = lp_norm(&r, p);
    let mut it = 0;
    while it < opts.max_iters {
        it += 1;
        let m = lp_norm(&r, f64::INFINITY);
        if m == 0.0 {
            return Ok((x, it, true));
        }
        let w: Vec<f64> = r.iter().map(|&v| (v.abs() / m).powf(p - 2.0).max(1e-300)).collect();
        let target = weighted_lstsq(a, b, &w)?;
        let dir: Vec<f64> = target.iter().zip(&x).map(|(t, c)| t - c).collect();
        let eval = |t: f64| {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(c, d)| c + t * d).collect();
            let rc = residual(a, &cand, b);
            let cc = lp_norm(&rc, p);
            (cand, rc, cc)
        };
        // full IRLS step is fast far out, the Newton step 1/(p−1) near the optimum
        let newton = 1.0 / (p - 1.0);
        let (c1, c2) = (eval(1.0), eval(newton));
        let mut best = if c1.2 < c2.2 { c1 } else { c2 };
        let mut t = newton;
        while best.2 >= cost && t > newton / 64.0 {
            t *= 0.5;
            best = eval(t);
        }
        if best.2 >= cost {
            return Ok((x, it, true));
        }
        x = best.0;
        r = best.1;
        cost = best.2;
        if lp_kkt(a, &r, p) <= opts.tol {
            return Ok((x, it, true));
        }
    }
    Ok((x, it, false))
}

/// `1 ≤ p < 2`: MM on the smoothed objective `Σ (r² + η²)^{p/2}` with `η`
/// driven to zero.
fn lp_stage_low(
    a: &DenseMatrix,
    b: &[f64],
    p: f64,
    x0: Vec<f64>,
    opts: IrlsOptions,
) -> Result<(Vec<f64>, usize, bool)> {
    let mut x = x0;
    let mut r = residual(a, &x, b);
    let mut best = (x.clone(), lp_norm(&r, p));
    let scale = lp_norm(&r, f64::INFINITY).max(lp_norm(b, f64::INFINITY)).max(1e-300);
    let mut eta = scale;
    let eta_min = 1e-13 * scale;
    let mut it = 0;
    let mut stall = 0;
    while it < opts.max_iters * 4 {
        it += 1;
        let w: Vec<f64> = r.iter().map(|&v| (v * v + eta * eta).powf((p - 2.0) / 2.0)).collect();
        x = weighted_lstsq(a, b, &w)?;
        r = residual(a, &x, b);
        let c = lp_norm(&r, p);
        if c < best.1 * (1.0 - opts.tol) {
            best = (x.clone(), c);
            stall = 0;
        } else {
            stall += 1;
        }
        if best.1 == 0.0 {
            return Ok((best.0, it, true));
        }
        eta = (eta * 0.5).max(eta_min);
        if eta == eta_min && stall >= 5 {
            return Ok((best.0, it, true));
        }
    }
    Ok((best.0, it, false))
}

pub fn lp_regression(a: &DenseMatrix, b: &[f64], p: f64, opts: IrlsOptions) -> Result<Fit> {
    if a.rows() != b.len() {
        return invalid(format!("A has {} rows, b has {}", a.rows(), b.len()));
    }
    if !(p >= 1.0) || p.is_infinite() {
        return invalid(format!("lp_regression needs 1 <= p < inf, got {p}"));
    }
    let x2 = lstsq_vec(a, b)?;
    let (x, iterations, converged) = if p == 2.0 {
        (x2, 0, true)
    } else if p < 2.0 {
        lp_stage_low(a, b, p, x2, opts)?
    } else {
        // homotopy 2 → p, at most doubling the exponent per stage
        let mut x = x2;
        let mut q = 2.0;
        let mut iters = 0;
        let mut ok = true;
        while q < p {
            q = (q * 1.5).min(p);
            let (nx, it, c) = lp_stage_high(a, b, q, x, opts)?;
            x = nx;
            iters += it;
            ok = c;
        }
        (x, iters, ok)
    };
    let r = residual(a, &x, b);
    Ok(Fit { cost: lp_norm(&r, p), kkt: lp_kkt(a, &r, p), x, iterations, converged })
}

/// `min ‖Ax − b‖_∞` within `factor` of optimal, through `ℓ_q` with
/// `m^{1/q} ≤ factor`. Returns the fit with `cost` in ℓ∞ and the `q` used.
pub fn chebyshev(a: &DenseMatrix, b: &[f64], factor: f64, opts: IrlsOptions) -> Result<(Fit, f64)> {
    if !(factor > 1.0) {
        return invalid("chebyshev factor must exceed 1");
    }
    let m = a.rows().max(2) as f64;
    let q = (m.ln() / factor.ln()).ceil().max(2.0);
    let mut fit = lp_regression(a, b, q, opts)?;
    fit.cost = lp_norm(&residual(a, &fit.x, b), f64::INFINITY);
    Ok((fit, q))
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixFit {
    /// `k×d` coefficient matrix.
    pub y: DenseMatrix,
    pub cost: f64,
    pub iterations: usize,
}

/// `Σ_i ‖x_iᵀY − b_i‖₂^p`, no root taken.
pub fn pq2_cost(x: &DenseMatrix, y: &DenseMatrix, b: &DenseMatrix, p: f64) -> f64 {
    let fit = x.matmul(y).expect("shapes checked by caller");
    fit.row_iter()
        .zip(b.row_iter())
        .map(|(u, v)| u.iter().zip(v).map(|(s, t)| (s - t) * (s - t)).sum::<f64>().sqrt().powf(p))
        .sum()
}

/// `argmin_Y Σ_i ‖x_iᵀY − b_i‖₂^p` by IRLS on row weights `‖res_i‖^{p−2}`
/// with a step search on the exact cost.
pub fn pq2_regression(x: &DenseMatrix, b: &DenseMatrix, p: f64, opts: IrlsOptions) -> Result<MatrixFit> {
    if x.rows() != b.rows() {
        return invalid("pq2_regression row counts differ");
    }
    if !(p >= 1.0) {
        return invalid("pq2_regression needs p >= 1");
    }
    let mut y = least_squares(x, b)?;
    let mut cost = pq2_cost(x, &y, b, p);
    if p == 2.0 {
        return Ok(MatrixFit { y, cost, iterations: 0 });
    }
    let scale = b.frobenius().max(1e-300);
    let mut eta = scale;
    let mut it = 0;
    while it < opts.max_iters {
        it += 1;
        let fit = x.matmul(&y)?;
        let res: Vec<f64> = fit
            .row_iter()
            .zip(b.row_iter())
            .map(|(u, v)| u.iter().zip(v).map(|(s, t)| (s - t) * (s - t)).sum::<f64>().sqrt())
            .collect();
        let top = res.iter().fold(0.0f64, |m, v| m.max(*v)).max(1e-300);
        let w: Vec<f64> = if p < 2.0 {
            res.iter().map(|&v| (v * v + eta * eta).powf((p - 2.0) / 2.0)).collect()
        } else {
            res.iter().map(|&v| (v / top).powf(p - 2.0).max(1e-300)).collect()
        };
        let s: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        let target = least_squares(&x.scale_rows(&s), &b.scale_rows(&s))?;
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-3 {
            let cand =
                DenseMatrix::from_fn(y.rows(), y.cols(), |i, j| y.get(i, j) + t * (target.get(i, j) - y.get(i, j)));
            let c = pq2_cost(x, &cand, b, p);
            if c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                y = cand;
                cost = c;
                moved = true;
                if rel <= opts.tol && (p >= 2.0 || eta <= 1e-12 * scale) {
                    return Ok(MatrixFit { y, cost, iterations: it });
                }
                break;
            }
            t *= 0.5;
        }
        if p < 2.0 {
            eta = (eta * 0.5).max(1e-13 * scale);
        }
        if !moved && (p >= 2.0 || eta <= 1e-13 * scale) {
            break;
        }
    }
    Ok(MatrixFit { y, cost, iterations: it })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{AbsP, Huber};

    #[test]
    fn huber_two_points() {
        let b = DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let f = g_regression(&b, &[0.0, 10.0], &Huber, IrlsOptions::default()).unwrap();
        // any x in [1, 9] costs 9; least squares lands on 5 and stays
        assert!((f.cost - 9.0).abs() < 1e-9);
        assert!((f.x[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn l1_median_and_linf_midrange() {
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let f = lp_regression(&a, &[0.0, 1.0, 10.0], 1.0, IrlsOptions::default()).unwrap();
        assert!((f.x[0] - 1.0).abs() < 1e-4, "{:?}", f.x);
        let (f, _) = chebyshev(&a, &[0.0, 1.0, 10.0], 1.01, IrlsOptions::default()).unwrap();
        assert!(f.cost <= 5.0 * 1.01 + 1e-9);
    }

    #[test]
    fn high_p_matches_g_regression_with_abs_p() {
        let a = DenseMatrix::from_fn(30, 2, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0 + j as f64);
        let b: Vec<f64> = (0..30).map(|i| ((i * 11) % 13) as f64 - 6.0).collect();
        let f = lp_regression(&a, &b, 4.0, IrlsOptions::default()).unwrap();
        assert!(f.kkt < 1e-8, "kkt {}", f.kkt);
        let g = g_regression(&a, &b, &AbsP { p: 4.0 }, IrlsOptions { max_iters: 2000, tol: 1e-15 }).unwrap();
        assert!(f.cost.powi(4) <= g.cost * (1.0 + 1e-9));
    }

    #[test]
    fn pq2_reduces_to_lp_for_one_column() {
        let x = DenseMatrix::from_fn(20, 1, |i, _| 1.0 + (i % 3) as f64);
        let bv: Vec<f64> = (0..20).map(|i| (i % 5) as f64).collect();
        let b = DenseMatrix::new(20, 1, bv.clone()).unwrap();
        let m = pq2_regression(&x, &b, 3.0, IrlsOptions::default()).unwrap();
        let f = lp_regression(&x, &bv, 3.0, IrlsOptions::default()).unwrap();
        assert!((m.cost - f.cost.powi(3)).abs() <= 1e-6 * m.cost);
    }
}
