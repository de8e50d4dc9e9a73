use alloc::vec::Vec;

use super::BnfOutput;
use crate::error::{Error, Result};
use crate::series::{compose_many, field, Ctx, FtSeries, TaylorOrder};

/// The normal form re-expanded around y = 0 with μ = ξ + y.
///
/// All series live over the 2d action variables (y, ξ): indices `0..d` are
/// y and `d..2d` are ξ.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSystem {
    pub omega0: Vec<f64>,
    pub order: usize,
    /// Λ₀₀(ξ) = Σ_{1≤|α|≤N} d_α ξ^α, over the d variables ξ.
    pub lambda00: Vec<FtSeries>,
    /// f(x, ξ + y) − Λ₀₀(ξ).
    pub f: Vec<FtSeries>,
    /// g(x, ξ + y).
    pub g: Vec<FtSeries>,
}

fn y_degree(a: &crate::series::MultiIndex, d: usize) -> usize {
    (0..d).map(|j| a.get(j)).sum()
}

fn xi_degree(a: &crate::series::MultiIndex, d: usize) -> usize {
    a.degree() - y_degree(a, d)
}

impl ParamSystem {
    pub fn dim(&self) -> usize {
        self.omega0.len()
    }

    /// Parts of `v` with y-degree exactly `deg`, still over (y, ξ).
    fn y_part(v: &[FtSeries], d: usize, deg: usize) -> Vec<FtSeries> {
        v.iter()
            .map(|s| s.filter(|a, _| y_degree(a, d) == deg))
            .collect()
    }

    /// ẋ-side y⁰ part (f₀ in the split ẋ = ω₀ + Λ₀₀ + f₀ + f₁y + …).
    pub fn f0(&self) -> Vec<FtSeries> {
        Self::y_part(&self.f, self.dim(), 0)
    }

    pub fn g0(&self) -> Vec<FtSeries> {
        Self::y_part(&self.g, self.dim(), 0)
    }

    pub fn g1(&self) -> Vec<FtSeries> {
        Self::y_part(&self.g, self.dim(), 1)
    }

    /// Largest coefficient majorant (s = 0, r = 1) among the terms of f₀,
    /// g₀, g₁ with ξ-degree ≤ N. These vanish in exact arithmetic.
    pub fn structure_defect(&self) -> f64 {
        let d = self.dim();
        let n = self.order;
        let mut worst = 0.0f64;
        for part in [self.f0(), self.g0(), self.g1()] {
            for s in &part {
                for (a, c) in s.terms() {
                    if xi_degree(a, d) <= n {
                        worst = worst.max(c.maj(0.0));
                    }
                }
            }
        }
        worst
    }

    pub fn parity_ok(&self) -> bool {
        field::is_even(&self.f) && field::is_odd(&self.g)
    }

    pub fn lambda00_at(&self, xi: &[f64]) -> Vec<f64> {
        let zero = alloc::vec![0.0; self.dim()];
        field::eval(&self.lambda00, &zero, xi)
    }

    /// The system at fixed ξ, as series over (x, y).
    pub fn at(&self, xi: &[f64]) -> (Vec<FtSeries>, Vec<FtSeries>) {
        let d = self.dim();
        let f = self.f.iter().map(|s| s.evaluate_trailing(d, xi)).collect();
        let g = self.g.iter().map(|s| s.evaluate_trailing(d, xi)).collect();
        (f, g)
    }
}

/// Re-expands the residual normal form around y = 0 with μ = ξ + y.
pub fn introduce_parameter(bnf: &BnfOutput, ctx: &Ctx) -> Result<ParamSystem> {
    let sys = &bnf.residual;
    let d = sys.dim();
    let top = sys.max_degree();
    if top > ctx.ymax() {
        return Err(Error::TruncationOverflow {
            order: top,
            ymax: ctx.ymax(),
        });
    }
    let subst: Vec<FtSeries> = (0..d)
        .map(|j| FtSeries::variable(d, 2 * d, j).add(&FtSeries::variable(d, 2 * d, d + j)))
        .collect();
    let shift = field::zeros(d, d, 2 * d);
    let mut maps = sys.f().to_vec();
    maps.extend_from_slice(sys.g());
    let mut comp = compose_many(&maps, &shift, &subst, TaylorOrder::Fixed(0), ctx)?;
    let g = comp.split_off(d);

    let mut lambda00 = field::zeros(d, d, d);
    for (alpha, dv) in &bnf.d_table {
        for (i, c) in dv.iter().enumerate() {
            if *c != 0.0 {
                lambda00[i].add_term(alpha.clone(), &crate::series::TrigPoly::constant(d, *c));
            }
        }
    }
    let f = comp
        .iter()
        .zip(&lambda00)
        .map(|(fi, li)| fi.sub(&li.embed_actions(2 * d, d)))
        .collect();
    Ok(ParamSystem {
        omega0: sys.omega0().to_vec(),
        order: bnf.order,
        lambda00,
        f,
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnf::bnf_run;
    use crate::series::{DomainSpec, MultiIndex, TrigPoly};
    use crate::system::ReversibleSystem;
    use alloc::vec;

    #[test]
    fn linear_twist_gives_identity_lambda() {
        let f = FtSeries::monomial(MultiIndex::new(&[1]), TrigPoly::constant(1, 1.0));
        let sys = ReversibleSystem::new(vec![1.0], vec![f], vec![FtSeries::zero(1, 1)], DomainSpec::default()).unwrap();
        let ctx = Ctx::new(4, 3);
        let out = bnf_run(&sys, 1, &ctx).unwrap();
        let p = introduce_parameter(&out, &ctx).unwrap();
        assert_eq!(p.lambda00[0], FtSeries::monomial(MultiIndex::new(&[1]), TrigPoly::constant(1, 1.0)));
        assert!(p.f0()[0].is_zero());
        assert!(p.g0()[0].is_zero() && p.g1()[0].is_zero());
        // F = (ξ + y) − ξ = y
        assert_eq!(p.f[0], FtSeries::variable(1, 2, 0));
        assert_eq!(p.lambda00_at(&[0.25]), vec![0.25]);
    }
}
