//! Vector- and matrix-valued series as plain `Vec`s of scalar series.

use alloc::vec::Vec;

use super::{Ctx, FtSeries, TrigPoly};

pub fn zeros(n: usize, angle_dim: usize, action_dim: usize) -> Vec<FtSeries> {
    (0..n).map(|_| FtSeries::zero(angle_dim, action_dim)).collect()
}

pub fn zero_matrix(n: usize, angle_dim: usize, action_dim: usize) -> Vec<Vec<FtSeries>> {
    (0..n).map(|_| zeros(n, angle_dim, action_dim)).collect()
}

pub fn identity(n: usize, angle_dim: usize, action_dim: usize) -> Vec<Vec<FtSeries>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| FtSeries::constant(angle_dim, action_dim, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect()
}

/// Constant vector as y-independent series.
pub fn constants(c: &[f64], angle_dim: usize, action_dim: usize) -> Vec<FtSeries> {
    c.iter()
        .map(|&v| FtSeries::constant(angle_dim, action_dim, v))
        .collect()
}

/// J[i][j] = ∂v_i/∂x_j
pub fn jacobian_x(v: &[FtSeries]) -> Vec<Vec<FtSeries>> {
    v.iter()
        .map(|vi| (0..vi.angle_dim()).map(|j| vi.dx_axis(j)).collect())
        .collect()
}

/// J[i][j] = ∂v_i/∂y_j
pub fn jacobian_y(v: &[FtSeries]) -> Vec<Vec<FtSeries>> {
    v.iter()
        .map(|vi| (0..vi.action_dim()).map(|j| vi.dy(j)).collect())
        .collect()
}

pub fn directional(v: &[FtSeries], w: &[f64]) -> Vec<FtSeries> {
    v.iter().map(|vi| vi.dx(w)).collect()
}

pub fn mat_vec(m: &[Vec<FtSeries>], v: &[FtSeries], ctx: &Ctx) -> Vec<FtSeries> {
    m.iter()
        .map(|row| {
            let mut acc = FtSeries::zero(v[0].angle_dim(), v[0].action_dim());
            for (a, b) in row.iter().zip(v) {
                if !a.is_zero() && !b.is_zero() {
                    acc.add_assign(&a.mul(b, ctx));
                }
            }
            acc
        })
        .collect()
}

pub fn mat_mat(a: &[Vec<FtSeries>], b: &[Vec<FtSeries>], ctx: &Ctx) -> Vec<Vec<FtSeries>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    let mut acc = FtSeries::zero(row[0].angle_dim(), row[0].action_dim());
                    for (l, x) in row.iter().enumerate() {
                        let y = &b[l][j];
                        if !x.is_zero() && !y.is_zero() {
                            acc.add_assign(&x.mul(y, ctx));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Matrix of series times a constant vector.
pub fn mat_const_vec(m: &[Vec<FtSeries>], c: &[f64]) -> Vec<FtSeries> {
    m.iter()
        .map(|row| {
            let mut acc = FtSeries::zero(row[0].angle_dim(), row[0].action_dim());
            for (a, &cj) in row.iter().zip(c) {
                if cj != 0.0 {
                    acc.add_assign(&a.scale(cj));
                }
            }
            acc
        })
        .collect()
}

pub fn add(a: &[FtSeries], b: &[FtSeries]) -> Vec<FtSeries> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn sub(a: &[FtSeries], b: &[FtSeries]) -> Vec<FtSeries> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn scale(a: &[FtSeries], alpha: f64) -> Vec<FtSeries> {
    a.iter().map(|x| x.scale(alpha)).collect()
}

pub fn mat_add(a: &[Vec<FtSeries>], b: &[Vec<FtSeries>]) -> Vec<Vec<FtSeries>> {
    a.iter().zip(b).map(|(x, y)| add(x, y)).collect()
}

pub fn mat_sub(a: &[Vec<FtSeries>], b: &[Vec<FtSeries>]) -> Vec<Vec<FtSeries>> {
    a.iter().zip(b).map(|(x, y)| sub(x, y)).collect()
}

/// Sum of component majorants.
pub fn maj(v: &[FtSeries], s: f64, r: f64) -> f64 {
    v.iter().map(|x| x.maj(s, r)).sum()
}

pub fn mat_maj(m: &[Vec<FtSeries>], s: f64, r: f64) -> f64 {
    m.iter().map(|row| maj(row, s, r)).sum()
}

pub fn homogeneous(v: &[FtSeries], deg: usize) -> Vec<FtSeries> {
    v.iter().map(|x| x.homogeneous(deg)).collect()
}

pub fn degree_range(v: &[FtSeries], lo: usize, hi: usize) -> Vec<FtSeries> {
    v.iter().map(|x| x.degree_range(lo, hi)).collect()
}

/// Coefficient of y^0 of each component.
pub fn constant_part(v: &[FtSeries]) -> Vec<TrigPoly> {
    v.iter()
        .map(|x| x.coefficient(&super::MultiIndex::zero(x.action_dim())))
        .collect()
}

pub fn eval(v: &[FtSeries], x: &[f64], y: &[f64]) -> Vec<f64> {
    v.iter().map(|c| c.eval(x, y)).collect()
}

pub fn is_even(v: &[FtSeries]) -> bool {
    v.iter().all(FtSeries::is_even)
}

pub fn is_odd(v: &[FtSeries]) -> bool {
    v.iter().all(FtSeries::is_odd)
}

pub fn mat_is_even(m: &[Vec<FtSeries>]) -> bool {
    m.iter().all(|r| is_even(r))
}

pub fn mat_is_odd(m: &[Vec<FtSeries>]) -> bool {
    m.iter().all(|r| is_odd(r))
}
