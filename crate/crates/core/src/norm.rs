use crate::error::{invalid, Result};
use crate::loss::{self, LossSpec};
use crate::matrix::{lp_norm, norm2, DenseMatrix};

#[derive(Clone, Debug)]
pub enum NormMode {
    /// `(Σ_ij |M_ij|^p)^{1/p}`
    EntrywiseP(f64),
    /// `(Σ_i ‖m_i‖₂^p)^{1/p}` over rows
    P2(f64),
    /// `Σ_ij g(M_ij)`; not a norm and never rooted
    G(LossSpec),
    EntrywiseInf,
    /// `max_i ‖m_i‖₂`
    Inf2,
}

pub fn norm(m: &DenseMatrix, mode: &NormMode) -> Result<f64> {
    match mode {
        NormMode::EntrywiseP(p) | NormMode::P2(p) if !(*p >= 1.0) => invalid(format!("p={p} < 1")),
        NormMode::EntrywiseP(p) => Ok(lp_norm(m.data(), *p)),
        NormMode::P2(p) => {
            let rows: Vec<f64> = m.row_iter().map(norm2).collect();
            Ok(lp_norm(&rows, *p))
        }
        NormMode::G(g) => Ok(loss::total(g.as_ref(), m.data())),
        NormMode::EntrywiseInf => Ok(m.max_abs()),
        NormMode::Inf2 => Ok(m.row_iter().map(norm2).fold(0.0, f64::max)),
    }
}
