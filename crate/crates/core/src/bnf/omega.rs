use alloc::vec;
use alloc::vec::Vec;

use super::{divide_series, DTable};
use crate::error::{Error, Result};
use crate::series::{compose_many, field, Ctx, FtSeries, MultiIndex, TaylorOrder};
use crate::system::ReversibleSystem;

/// Ω(ξ) by total ξ-degree: entry α holds the coefficient of ξ^α, including
/// α = 0 ↦ ω₀.
pub type OmegaTable = DTable;

fn rho_degree(a: &MultiIndex, d: usize) -> usize {
    (0..d).map(|j| a.get(j)).sum()
}

/// Expands the frequency map Ω(ξ) of the tori ρ = 0 after the substitution
/// x = θ + u(θ, ξ), y = ρ + ξ + v(θ, ρ, ξ), graded by total degree in
/// (ρ, ξ). Shares no code path with `bnf_run` beyond the series layer.
///
/// Normalization: u and v have zero angle mean, u carries no ρ-dependence
/// and v is at most linear in ρ; everything else goes to the remainders
/// F = O(ρ) and G = O(ρ²).
pub fn omega_expand(sys: &ReversibleSystem, order: usize, kmax: usize) -> Result<OmegaTable> {
    let d = sys.dim();
    let n_act = 2 * d;
    let omega = sys.omega0();
    let mut table = OmegaTable::new();
    table.insert(MultiIndex::zero(d), omega.to_vec());
    if order == 0 {
        return Ok(table);
    }
    let mut u = field::zeros(d, d, n_act);
    let mut v = field::zeros(d, d, n_act);
    // Ω − ω₀ as series over (ρ, ξ) with ρ-degree 0
    let mut om = field::zeros(d, d, n_act);
    let mut f_rem = field::zeros(d, d, n_act);
    let mut g_rem = field::zeros(d, d, n_act);
    let base: Vec<FtSeries> = (0..d)
        .map(|j| FtSeries::variable(d, n_act, j).add(&FtSeries::variable(d, n_act, d + j)))
        .collect();

    for n in 1..=order {
        let ctx = Ctx::new(kmax, n);
        // ẏ side: ∂_θv·Θ + (I + ∂_ρv)P = g∘Ψ at degree n
        let subst = field::add(&base, &v);
        let comp_g = compose_many(sys.g(), &u, &subst, TaylorOrder::Fixed(n), &ctx)?;
        let drift = field::add(&om, &f_rem);
        let mut tb = Vec::with_capacity(d);
        for i in 0..d {
            let mut t = comp_g[i].homogeneous(n);
            for j in 0..d {
                t = t.sub(&v[i].dx_axis(j).mul(&drift[j], &ctx).homogeneous(n));
                t = t.sub(&v[i].dy(j).mul(&g_rem[j], &ctx).homogeneous(n));
            }
            tb.push(t);
        }
        for i in 0..d {
            let low = tb[i].filter(|a, _| rho_degree(a, d) <= 1);
            let high = tb[i].filter(|a, _| rho_degree(a, d) >= 2);
            check_mean_free(&low)?;
            v[i].add_assign(&divide_series(&low, omega)?);
            g_rem[i].add_assign(&high);
        }

        // ẋ side: (I + ∂_θu)Θ = ω₀ + f∘Ψ at degree n (u has no ρ)
        let subst = field::add(&base, &v);
        let comp_f = compose_many(sys.f(), &u, &subst, TaylorOrder::Fixed(n), &ctx)?;
        let drift = field::add(&om, &f_rem);
        for i in 0..d {
            let mut t = comp_f[i].homogeneous(n);
            for j in 0..d {
                t = t.sub(&u[i].dx_axis(j).mul(&drift[j], &ctx).homogeneous(n));
            }
            let flat = t.filter(|a, _| rho_degree(a, d) == 0);
            let mean = flat.mean_part();
            for (a, c) in mean.terms() {
                let (_, xi) = a.split(d);
                table.entry(xi).or_insert_with(|| vec![0.0; d])[i] = c.mean();
            }
            u[i].add_assign(&divide_series(&flat, omega)?);
            om[i].add_assign(&mean);
            f_rem[i].add_assign(&t.filter(|a, _| rho_degree(a, d) >= 1));
        }
        for alpha in crate::series::monomials(d, n) {
            table.entry(alpha).or_insert_with(|| vec![0.0; d]);
        }
    }
    Ok(table)
}

/// The ẏ-side right-hand side is odd in θ, so its mean is zero.
fn check_mean_free(p: &FtSeries) -> Result<()> {
    let worst = p.terms().map(|(_, c)| c.mean().abs()).fold(0.0, f64::max);
    if worst > 1e-12 {
        return Err(Error::NonzeroMean { mean: worst });
    }
    Ok(())
}
