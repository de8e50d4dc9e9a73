use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::index::MultiIndex;
use super::trig::{Parity, TrigPoly};
use super::Ctx;
use crate::error::{Error, Result};

/// Scalar Fourier–Taylor series Σ_α f_α(x) y^α.
///
/// Zero coefficients are never stored, so `terms` lists exactly the nonzero
/// monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct FtSeries {
    angle_dim: usize,
    action_dim: usize,
    terms: BTreeMap<MultiIndex, TrigPoly>,
}

impl FtSeries {
    pub fn zero(angle_dim: usize, action_dim: usize) -> FtSeries {
        FtSeries {
            angle_dim,
            action_dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(angle_dim: usize, action_dim: usize, value: f64) -> FtSeries {
        FtSeries::from_trig(TrigPoly::constant(angle_dim, value), action_dim)
    }

    /// A y-independent series.
    pub fn from_trig(poly: TrigPoly, action_dim: usize) -> FtSeries {
        FtSeries::monomial(MultiIndex::zero(action_dim), poly)
    }

    pub fn monomial(alpha: MultiIndex, poly: TrigPoly) -> FtSeries {
        let mut s = FtSeries::zero(poly.dim(), alpha.len());
        s.insert(alpha, poly);
        s
    }

    /// The action coordinate y_j.
    pub fn variable(angle_dim: usize, action_dim: usize, j: usize) -> FtSeries {
        FtSeries::monomial(
            MultiIndex::unit(action_dim, j),
            TrigPoly::constant(angle_dim, 1.0),
        )
    }

    pub fn from_terms(
        angle_dim: usize,
        action_dim: usize,
        terms: impl IntoIterator<Item = (MultiIndex, TrigPoly)>,
    ) -> Result<FtSeries> {
        let mut s = FtSeries::zero(angle_dim, action_dim);
        for (alpha, poly) in terms {
            if alpha.len() != action_dim {
                return Err(Error::DimensionMismatch {
                    expected: action_dim,
                    found: alpha.len(),
                });
            }
            if poly.dim() != angle_dim {
                return Err(Error::DimensionMismatch {
                    expected: angle_dim,
                    found: poly.dim(),
                });
            }
            s.add_term(alpha, &poly);
        }
        Ok(s)
    }

    pub fn angle_dim(&self) -> usize {
        self.angle_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &TrigPoly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, alpha: &MultiIndex) -> Option<&TrigPoly> {
        self.terms.get(alpha)
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> TrigPoly {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| TrigPoly::zero(self.angle_dim))
    }

    /// Replaces the coefficient of y^α.
    pub fn insert(&mut self, alpha: MultiIndex, poly: TrigPoly) {
        if poly.is_zero() {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, poly);
        }
    }

    /// Adds `poly · y^α`.
    pub fn add_term(&mut self, alpha: MultiIndex, poly: &TrigPoly) {
        if poly.is_zero() {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(p) => {
                p.add_assign(poly);
                if p.is_zero() {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, poly.clone());
            }
        }
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().map(|a| a.degree()).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|a| a.degree()).max()
    }

    /// Terms with degree in `lo..=hi`.
    pub fn degree_range(&self, lo: usize, hi: usize) -> FtSeries {
        self.filter(|a, _| (lo..=hi).contains(&a.degree()))
    }

    pub fn homogeneous(&self, deg: usize) -> FtSeries {
        self.degree_range(deg, deg)
    }

    pub fn truncated(&self, ymax: usize) -> FtSeries {
        self.degree_range(0, ymax)
    }

    pub fn filter(&self, mut keep: impl FnMut(&MultiIndex, &TrigPoly) -> bool) -> FtSeries {
        FtSeries {
            angle_dim: self.angle_dim,
            action_dim: self.action_dim,
            terms: self
                .terms
                .iter()
                .filter(|(a, p)| keep(a, p))
                .map(|(a, p)| (a.clone(), p.clone()))
                .collect(),
        }
    }

    /// Applies a linear map to every coefficient.
    pub fn map_coeffs(&self, mut f: impl FnMut(&MultiIndex, &TrigPoly) -> TrigPoly) -> FtSeries {
        let mut out = FtSeries::zero(self.angle_dim, self.action_dim);
        for (a, p) in &self.terms {
            out.insert(a.clone(), f(a, p));
        }
        out
    }

    fn check(&self, other: &FtSeries) {
        debug_assert_eq!(self.angle_dim, other.angle_dim);
        debug_assert_eq!(self.action_dim, other.action_dim);
    }

    pub fn add(&self, other: &FtSeries) -> FtSeries {
        self.check(other);
        let mut out = self.clone();
        for (a, p) in &other.terms {
            out.add_term(a.clone(), p);
        }
        out
    }

    pub fn sub(&self, other: &FtSeries) -> FtSeries {
        self.add(&other.neg())
    }

    pub fn add_assign(&mut self, other: &FtSeries) {
        self.check(other);
        for (a, p) in &other.terms {
            self.add_term(a.clone(), p);
        }
    }

    pub fn neg(&self) -> FtSeries {
        self.map_coeffs(|_, p| p.neg())
    }

    pub fn scale(&self, alpha: f64) -> FtSeries {
        self.map_coeffs(|_, p| p.scale(alpha))
    }

    /// Cauchy product in y with Fourier convolution in x, truncated to the
    /// context budget.
    pub fn mul(&self, other: &FtSeries, ctx: &Ctx) -> FtSeries {
        self.check(other);
        let mut out = FtSeries::zero(self.angle_dim, self.action_dim);
        let lhs: Vec<(&MultiIndex, &TrigPoly, usize)> =
            self.terms.iter().map(|(a, p)| (a, p, a.degree())).collect();
        let rhs: Vec<(&MultiIndex, &TrigPoly, usize)> =
            other.terms.iter().map(|(a, p)| (a, p, a.degree())).collect();
        // majorants only matter for the pairs that overflow the degree budget
        let rhs_maj: Vec<f64> = rhs.iter().map(|(_, q, _)| q.maj(0.0)).collect();
        let mut spill = 0.0;
        for (a, p, da) in &lhs {
            let mut over = 0.0;
            for ((b, q, db), qm) in rhs.iter().zip(&rhs_maj) {
                if da + db > ctx.ymax() {
                    over += qm;
                    continue;
                }
                out.add_term(a.add(b), &p.mul(q, ctx));
            }
            if over > 0.0 {
                spill += p.maj(0.0) * over;
            }
        }
        ctx.add_floor(spill);
        out
    }

    /// Product with a y-independent polynomial.
    pub fn mul_trig(&self, poly: &TrigPoly, ctx: &Ctx) -> FtSeries {
        self.map_coeffs(|_, p| p.mul(poly, ctx))
    }

    /// Multiplies by y^β (no truncation).
    pub fn shift_degree(&self, beta: &MultiIndex) -> FtSeries {
        FtSeries {
            angle_dim: self.angle_dim,
            action_dim: self.action_dim,
            terms: self
                .terms
                .iter()
                .map(|(a, p)| (a.add(beta), p.clone()))
                .collect(),
        }
    }

    /// Directional angle derivative w·∂_x.
    pub fn dx(&self, w: &[f64]) -> FtSeries {
        self.map_coeffs(|_, p| p.deriv(w))
    }

    pub fn dx_axis(&self, j: usize) -> FtSeries {
        self.map_coeffs(|_, p| p.deriv_axis(j))
    }

    /// ∂/∂y_j
    pub fn dy(&self, j: usize) -> FtSeries {
        let mut out = FtSeries::zero(self.angle_dim, self.action_dim);
        for (a, p) in &self.terms {
            if let Some(b) = a.sub_unit(j) {
                out.add_term(b, &p.scale(a.get(j) as f64));
            }
        }
        out
    }

    /// Σ_α Σ_k |f̂_α(k)| e^{|k|₁ s} r^{|α|}
    pub fn maj(&self, s: f64, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, p)| p.maj(s) * libm::pow(r, a.degree() as f64))
            .sum()
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, p)| p.eval(x) * a.monomial(y))
            .sum()
    }

    /// Parity of the angle dependence, exact. A zero series is `Even`.
    pub fn parity(&self) -> Parity {
        if self.is_even() {
            Parity::Even
        } else if self.is_odd() {
            Parity::Odd
        } else {
            Parity::Neither
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.values().all(TrigPoly::is_even)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.values().all(TrigPoly::is_odd)
    }

    /// First (α, k) breaking the requested parity.
    pub fn parity_witness(&self, want: Parity) -> Option<(MultiIndex, Vec<i64>)> {
        self.terms
            .iter()
            .find_map(|(a, p)| p.parity_witness(want).map(|k| (a.clone(), k)))
    }

    /// The k-th Fourier coefficient of every y^α term.
    pub fn fourier_coeff(&self, k: &[i64], kmax: usize) -> Result<BTreeMap<MultiIndex, Complex64>> {
        if k.len() != self.angle_dim {
            return Err(Error::DimensionMismatch {
                expected: self.angle_dim,
                found: k.len(),
            });
        }
        if k.iter().any(|v| v.unsigned_abs() as usize > kmax) {
            return Err(Error::ModeOutOfRange { k: k.to_vec(), kmax });
        }
        Ok(self
            .terms
            .iter()
            .map(|(a, p)| (a.clone(), p.coeff(k)))
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .collect())
    }

    /// Angle averages of every coefficient.
    pub fn mean_part(&self) -> FtSeries {
        self.map_coeffs(|_, p| TrigPoly::constant(p.dim(), p.mean()))
    }

    /// The series minus its angle averages.
    pub fn oscillating_part(&self) -> FtSeries {
        self.map_coeffs(|_, p| p.sub(&TrigPoly::constant(p.dim(), p.mean())))
    }

    /// Substitutes numerical values for the trailing action variables
    /// `y[keep..]`, leaving a series in the first `keep` variables.
    pub fn evaluate_trailing(&self, keep: usize, values: &[f64]) -> FtSeries {
        debug_assert_eq!(keep + values.len(), self.action_dim);
        let mut out = FtSeries::zero(self.angle_dim, keep);
        for (a, p) in &self.terms {
            let (head, tail) = a.split(keep);
            let w = tail.monomial(values);
            if w != 0.0 {
                out.add_term(head, &p.scale(w));
            }
        }
        out
    }

    /// Reinterprets the series in a larger action space, placing the
    /// current variables at positions `offset..offset + action_dim`.
    pub fn embed_actions(&self, total: usize, offset: usize) -> FtSeries {
        let mut out = FtSeries::zero(self.angle_dim, total);
        for (a, p) in &self.terms {
            let mut e = alloc::vec![0usize; total];
            for j in 0..self.action_dim {
                e[offset + j] = a.get(j);
            }
            out.insert(MultiIndex::new(&e), p.clone());
        }
        out
    }

    /// Drops Fourier modes beyond `kmax` from every coefficient.
    pub fn truncate_modes(&self, ctx: &Ctx) -> FtSeries {
        self.map_coeffs(|_, p| {
            let (q, dropped) = p.truncated(ctx.kmax());
            ctx.add_floor(dropped);
            q
        })
    }
}
