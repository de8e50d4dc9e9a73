use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::dioph::DiophParams;
use crate::error::{Error, Result};
use crate::homological::{degree0, linear_part, solve_l_mat, solve_l_vec, EtaPoint};
use crate::series::{Ctx, FtSeries, MultiIndex};

/// Zero-mode data of the counterterm equation M − (1 + N)·Γ = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CountertermResult {
    pub gamma: Vec<f64>,
    /// (f̃₀ − f₁·L g̃₀)^(0)
    pub m_vec: Vec<f64>,
    /// (Σ_{j≥1} h_j − f₁·L H̄)^(0), row-major
    pub n_mat: Vec<Vec<f64>>,
    /// |M − (1 + N)Γ|∞
    pub residual: f64,
}

fn mean0(a: &FtSeries) -> f64 {
    a.coefficient(&MultiIndex::zero(a.action_dim())).mean()
}

fn mean_product(a: &FtSeries, b: &FtSeries, ctx: &Ctx) -> f64 {
    if a.is_zero() || b.is_zero() {
        return 0.0;
    }
    mean0(&a.mul(b, ctx))
}

/// Solves (1 + N)Γ = M by LU.
pub fn solve_gamma(m: &[f64], n: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let d = m.len();
    let a = DMatrix::from_fn(d, d, |i, j| n[i][j] + if i == j { 1.0 } else { 0.0 });
    let rhs = DVector::from_column_slice(m);
    let gamma = a.clone().lu().solve(&rhs).ok_or(Error::Singular)?;
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    let residual = (&rhs - &a * &gamma).amax();
    Ok((gamma.iter().copied().collect(), residual))
}

/// Γ from the post-composition data `h` (including the identity), `big_h`,
/// f̃ and g̃.
pub fn counterterm(
    h: &[Vec<FtSeries>],
    big_h: &[Vec<FtSeries>],
    f_tilde: &[FtSeries],
    g_tilde: &[FtSeries],
    p: &DiophParams,
    eta: &EtaPoint,
    ctx: &Ctx,
) -> Result<CountertermResult> {
    let d = f_tilde.len();
    let f0 = degree0(f_tilde);
    let f1 = linear_part(f_tilde);
    let lg = solve_l_vec(&degree0(g_tilde), p, eta)?;
    let h_bar: Vec<Vec<FtSeries>> = big_h.iter().map(|row| degree0(row)).collect();
    let lh = solve_l_mat(&h_bar, p, eta)?;

    let m_vec: Vec<f64> = (0..d)
        .map(|i| mean0(&f0[i]) - (0..d).map(|j| mean_product(&f1[i][j], &lg[j], ctx)).sum::<f64>())
        .collect();
    let n_mat: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| {
                    let own = mean0(&h[i][k]) - if i == k { 1.0 } else { 0.0 };
                    own - (0..d).map(|j| mean_product(&f1[i][j], &lh[j][k], ctx)).sum::<f64>()
                })
                .collect()
        })
        .collect();
    let (gamma, residual) = solve_gamma(&m_vec, &n_mat)?;
    Ok(CountertermResult {
        gamma,
        m_vec,
        n_mat,
        residual,
    })
}
