//! Composition f(x + u, Y) and inversion of near-identity maps.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::field;
use super::index::{monomials_between, MultiIndex};
use super::{Ctx, FtSeries, TrigPoly};
use crate::error::{Error, Result};

/// How many angle-Taylor orders to keep when shifting x ↦ x + u.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TaylorOrder {
    /// Keep |p| ≤ n.
    Fixed(usize),
    /// Keep orders until the a-priori bound (K·Σ maj u_j)^n / n! drops below
    /// `tol`, with at most `max` orders.
    Auto { tol: f64, max: usize },
}

fn is_identity_subst(subst: &[FtSeries]) -> bool {
    subst.iter().enumerate().all(|(j, s)| {
        let a = s.angle_dim();
        *s == FtSeries::variable(a, s.action_dim(), j)
    })
}

/// Evaluates each series of `fs` at (x + shift, subst).
///
/// Every `f` is a series over (x; y) with `y` of length `subst.len()`;
/// `shift` (one entry per angle) and `subst` are series over the output
/// variables. The action substitution is exact; the angle shift is expanded
/// in Taylor series Σ_p ∂_x^p f · shift^p / p! up to `order`.
pub fn compose_many(
    fs: &[FtSeries],
    shift: &[FtSeries],
    subst: &[FtSeries],
    order: TaylorOrder,
    ctx: &Ctx,
) -> Result<Vec<FtSeries>> {
    let Some(first) = shift.first().or(subst.first()) else {
        return Ok(fs.to_vec());
    };
    let angle_dim = first.angle_dim();
    let out_actions = first.action_dim();
    if shift.len() != angle_dim {
        return Err(Error::DimensionMismatch {
            expected: angle_dim,
            found: shift.len(),
        });
    }
    for f in fs {
        if f.action_dim() != subst.len() {
            return Err(Error::DimensionMismatch {
                expected: subst.len(),
                found: f.action_dim(),
            });
        }
    }
    let shift_zero = shift.iter().all(FtSeries::is_zero);
    let shift_order = shift.iter().filter_map(FtSeries::order).min().unwrap_or(usize::MAX);

    // highest angle-Taylor order worth expanding
    let mut top = match order {
        TaylorOrder::Fixed(n) => n,
        TaylorOrder::Auto { tol, max } => {
            let k = fs
                .iter()
                .flat_map(|f| f.terms().map(|(_, p)| p.radius()))
                .max()
                .unwrap_or(0) as f64;
            let a = k * field::maj(shift, 0.0, 1.0);
            let mut n = 0usize;
            let mut bound = 1.0;
            while n < max && bound > tol {
                n += 1;
                bound *= a / n as f64;
            }
            n
        }
    };
    if shift_zero {
        top = 0;
    } else if shift_order >= 1 && shift_order != usize::MAX {
        top = top.min(ctx.ymax() / shift_order);
    }

    // shift^p / p!
    let mut powers: BTreeMap<MultiIndex, FtSeries> = BTreeMap::new();
    powers.insert(
        MultiIndex::zero(angle_dim),
        FtSeries::constant(angle_dim, out_actions, 1.0),
    );
    for p in monomials_between(angle_dim, 1, top) {
        let j = p.last_nonzero().expect("degree >= 1");
        // a vanished lower power has vanishing multiples too
        let Some(prev) = powers.get(&p.sub_unit(j).expect("entry nonzero")) else {
            continue;
        };
        let next = prev.mul(&shift[j], ctx).scale(1.0 / p.get(j) as f64);
        if !next.is_zero() {
            powers.insert(p, next);
        }
    }

    // subst^α, built on demand from lower monomials
    let identity = is_identity_subst(subst);
    let mut subst_pow: BTreeMap<MultiIndex, FtSeries> = BTreeMap::new();
    let n_in = subst.len();
    subst_pow.insert(
        MultiIndex::zero(n_in),
        FtSeries::constant(angle_dim, out_actions, 1.0),
    );
    let needed_deg = fs.iter().filter_map(FtSeries::max_degree).max().unwrap_or(0);
    if !identity {
        for alpha in monomials_between(n_in, 1, needed_deg) {
            let j = alpha.last_nonzero().expect("degree >= 1");
            let prev = &subst_pow[&alpha.sub_unit(j).expect("entry nonzero")];
            let next = prev.mul(&subst[j], ctx);
            subst_pow.insert(alpha, next);
        }
    }

    let subst_order = subst.iter().map(|s| s.order().unwrap_or(usize::MAX)).min().unwrap_or(0).min(ctx.ymax());
    let mut out = Vec::with_capacity(fs.len());
    for f in fs {
        let mut acc = FtSeries::zero(angle_dim, out_actions);
        for (alpha, coeff) in f.terms() {
            // y-degrees above `budget` cannot survive the product with subst^α
            let budget = ctx.ymax().saturating_sub(alpha.degree() * subst_order);
            // Σ_p ∂^p f_α · shift^p/p!
            let mut derivs: BTreeMap<MultiIndex, TrigPoly> = BTreeMap::new();
            derivs.insert(MultiIndex::zero(angle_dim), coeff.clone());
            let mut shifted = FtSeries::zero(angle_dim, out_actions);
            for (p, pw) in &powers {
                let dp = angle_deriv(&mut derivs, p);
                if dp.is_zero() {
                    continue;
                }
                for (b, q) in pw.terms() {
                    if b.degree() <= budget {
                        shifted.add_term(b.clone(), &q.mul(&dp, ctx));
                    }
                }
            }
            if identity {
                let moved = shifted.shift_degree(alpha);
                for (b, q) in moved.terms() {
                    if b.degree() <= ctx.ymax() {
                        acc.add_term(b.clone(), q);
                    } else {
                        ctx.add_floor(q.maj(0.0));
                    }
                }
            } else {
                acc.add_assign(&shifted.mul(&subst_pow[alpha], ctx));
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// ∂^p of the cached base coefficient, filling in lower orders as needed.
fn angle_deriv(derivs: &mut BTreeMap<MultiIndex, TrigPoly>, p: &MultiIndex) -> TrigPoly {
    if let Some(dp) = derivs.get(p) {
        return dp.clone();
    }
    let j = p.last_nonzero().expect("the zero index is always cached");
    let dp = angle_deriv(derivs, &p.sub_unit(j).expect("entry nonzero")).deriv_axis(j);
    derivs.insert(p.clone(), dp.clone());
    dp
}

/// f(x + u(x,y), y + v(x,y)) with the angle Taylor expansion kept to order
/// `trunc`.
///
/// `u` must vanish at y = 0 and `v` may only have a constant degree-0 part,
/// so that the expansion terminates in the joint grading.
pub fn ft_compose(
    f: &FtSeries,
    u: &[FtSeries],
    v: &[FtSeries],
    trunc: usize,
    ctx: &Ctx,
) -> Result<FtSeries> {
    let zero = MultiIndex::zero(f.action_dim());
    if u.iter().any(|c| c.term(&zero).is_some()) {
        return Err(Error::NonTerminating);
    }
    if v
        .iter()
        .any(|c| c.term(&zero).is_some_and(|p| p.radius() > 0))
    {
        return Err(Error::NonTerminating);
    }
    let subst: Vec<FtSeries> = v
        .iter()
        .enumerate()
        .map(|(j, vj)| vj.add(&FtSeries::variable(f.angle_dim(), f.action_dim(), j)))
        .collect();
    let mut out = compose_many(core::slice::from_ref(f), u, &subst, TaylorOrder::Fixed(trunc), ctx)?;
    Ok(out.pop().expect("one input"))
}

/// Regime for inverting (x, y) ↦ (x + u, y + v).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InvertMode {
    /// u = O(y), v = O(y²): each fixed-point sweep fixes one more degree.
    Formal,
    /// u, v small in norm: fixed-point iteration until the update majorant
    /// drops below `tol` relative to the solution.
    Small { tol: f64, max_iter: usize },
}

/// Returns (U, V) with (θ, ρ) ↦ (θ + U, ρ + V) inverting
/// (x, y) ↦ (x + u, y + v).
pub fn invert_near_identity(
    u: &[FtSeries],
    v: &[FtSeries],
    mode: InvertMode,
    ctx: &Ctx,
) -> Result<(Vec<FtSeries>, Vec<FtSeries>)> {
    let angle_dim = u.first().map_or(1, FtSeries::angle_dim);
    let action_dim = v.first().map_or(0, FtSeries::action_dim);
    let mut big_u = field::zeros(u.len(), angle_dim, action_dim);
    let mut big_v = field::zeros(v.len(), angle_dim, action_dim);
    let mut maps: Vec<FtSeries> = u.to_vec();
    maps.extend_from_slice(v);
    let (order, max_iter, tol) = match mode {
        InvertMode::Formal => (TaylorOrder::Fixed(ctx.ymax()), ctx.ymax() + 3, 0.0),
        InvertMode::Small { tol, max_iter } => (TaylorOrder::Auto { tol: tol * 1e-3, max: 40 }, max_iter, tol),
    };
    let mut last_update = f64::INFINITY;
    let mut growth = 0usize;
    for _ in 0..max_iter {
        let subst: Vec<FtSeries> = big_v
            .iter()
            .enumerate()
            .map(|(j, vj)| vj.add(&FtSeries::variable(angle_dim, action_dim, j)))
            .collect();
        let comp = compose_many(&maps, &big_u, &subst, order, ctx)?;
        let new_u: Vec<FtSeries> = comp[..u.len()].iter().map(FtSeries::neg).collect();
        let new_v: Vec<FtSeries> = comp[u.len()..].iter().map(FtSeries::neg).collect();
        if new_u == big_u && new_v == big_v {
            return Ok((new_u, new_v));
        }
        let update = field::maj(&field::sub(&new_u, &big_u), 0.0, 1.0)
            + field::maj(&field::sub(&new_v, &big_v), 0.0, 1.0);
        let size = field::maj(&new_u, 0.0, 1.0) + field::maj(&new_v, 0.0, 1.0);
        big_u = new_u;
        big_v = new_v;
        if let InvertMode::Small { .. } = mode {
            if update <= tol * (1.0 + size) {
                return Ok((big_u, big_v));
            }
            if update >= last_update {
                growth += 1;
                if growth >= 3 {
                    return Err(Error::NonContractive { update });
                }
            }
        }
        last_update = update;
    }
    match mode {
        InvertMode::Formal => Ok((big_u, big_v)),
        InvertMode::Small { .. } => Err(Error::NonContractive { update: last_update }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn y1(n: usize) -> MultiIndex {
        MultiIndex::new(&[n])
    }

    #[test]
    fn shift_with_a_zero_axis() {
        // ∂_{x₂} never fires, so the powers table has gaps
        let ctx = Ctx::new(6, 4);
        let y = MultiIndex::new(&[1, 0]);
        let f = FtSeries::monomial(MultiIndex::zero(2), TrigPoly::cos_mode(2, &[1, 1], 1.0));
        let shift = vec![FtSeries::monomial(y.clone(), TrigPoly::constant(2, 0.1)), FtSeries::zero(2, 2)];
        let subst = vec![FtSeries::variable(2, 2, 0), FtSeries::variable(2, 2, 1)];
        let out = compose_many(&[f], &shift, &subst, TaylorOrder::Fixed(3), &ctx).unwrap();
        // cos(x₁ + x₂ + 0.1 y₁) to third order in y₁
        let lin = out[0].coefficient(&y);
        assert!((lin.eval(&[0.3, 0.4]) + 0.1 * 0.7f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn identity_composition() {
        let ctx = Ctx::new(6, 6);
        let f = FtSeries::monomial(y1(2), TrigPoly::cos_mode(1, &[1], 0.3));
        let out = ft_compose(&f, &[FtSeries::zero(1, 1)], &[FtSeries::zero(1, 1)], 4, &ctx).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn action_substitution() {
        // f = y, v = (cos x) y² → y + (cos x) y²
        let ctx = Ctx::new(6, 6);
        let f = FtSeries::variable(1, 1, 0);
        let v = FtSeries::monomial(y1(2), TrigPoly::cos_mode(1, &[1], 1.0));
        let out = ft_compose(&f, &[FtSeries::zero(1, 1)], &[v.clone()], 4, &ctx).unwrap();
        assert_eq!(out, f.add(&v));
    }

    #[test]
    fn angle_shift_matches_taylor_polynomial() {
        // sin(x + c y) to third order
        let c = 0.7;
        let ctx = Ctx::new(6, 6);
        let f = FtSeries::from_trig(TrigPoly::sin_mode(1, &[1], 1.0), 1);
        let u = FtSeries::monomial(y1(1), TrigPoly::constant(1, c));
        let out = ft_compose(&f, &[u], &[FtSeries::zero(1, 1)], 3, &ctx).unwrap();
        let mut want = FtSeries::from_trig(TrigPoly::sin_mode(1, &[1], 1.0), 1);
        want.add_term(y1(1), &TrigPoly::cos_mode(1, &[1], c));
        want.add_term(y1(2), &TrigPoly::sin_mode(1, &[1], -c * c / 2.0));
        want.add_term(y1(3), &TrigPoly::cos_mode(1, &[1], -c * c * c / 6.0));
        let diff = out.sub(&want);
        assert!(diff.maj(0.0, 1.0) < 1e-15, "{diff:?}");
    }

    #[test]
    fn degree_zero_angle_shift_is_rejected() {
        let ctx = Ctx::new(4, 4);
        let f = FtSeries::variable(1, 1, 0);
        let u = FtSeries::from_trig(TrigPoly::sin_mode(1, &[1], 0.1), 1);
        assert_eq!(
            ft_compose(&f, &[u], &[FtSeries::zero(1, 1)], 3, &ctx),
            Err(Error::NonTerminating)
        );
    }

    #[test]
    fn inverse_of_linear_shear() {
        // x = θ + U, y = ρ with u = c y: U = -c ρ exactly
        let ctx = Ctx::new(4, 6);
        let c = 0.4;
        let u = FtSeries::monomial(y1(1), TrigPoly::constant(1, c));
        let (big_u, big_v) = invert_near_identity(&[u], &[FtSeries::zero(1, 1)], InvertMode::Formal, &ctx).unwrap();
        assert_eq!(big_u, vec![FtSeries::monomial(y1(1), TrigPoly::constant(1, -c))]);
        assert!(big_v[0].is_zero());
    }
}
