//! Truncated real Fourier polynomials on the d-torus.
//!
//! Coefficients live in a dense cube `|k|∞ ≤ radius`. Every constructor and
//! operation keeps the mirrored half exactly equal to the conjugate of the
//! upper half, so an even function has exactly real coefficients and an odd
//! one exactly imaginary coefficients.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::Ctx;
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

const REALITY_TOL: f64 = 1e-13;

/// Symmetry class of a real function under x ↦ −x.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Neither,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::Neither => Parity::Neither,
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Neither, _) | (_, Parity::Neither) => Parity::Neither,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

type Mode = [i64; MAX_DIM];

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    radius: usize,
    coeffs: Vec<Complex64>,
}

fn cube_len(dim: usize, radius: usize) -> usize {
    (2 * radius + 1).pow(dim as u32)
}

fn realify(c: &mut [Complex64]) {
    let n = c.len();
    for i in 0..n / 2 {
        c[i] = c[n - 1 - i].conj();
    }
    c[n / 2].im = 0.0;
}

fn one_norm(k: &[i64]) -> i64 {
    k.iter().map(|v| v.abs()).sum()
}

impl TrigPoly {
    pub fn zero(dim: usize) -> TrigPoly {
        debug_assert!(dim >= 1 && dim <= MAX_DIM);
        TrigPoly {
            dim,
            radius: 0,
            coeffs: vec![Complex64::new(0.0, 0.0)],
        }
    }

    pub fn constant(dim: usize, value: f64) -> TrigPoly {
        let mut p = TrigPoly::zero(dim);
        p.coeffs[0] = Complex64::new(value, 0.0);
        p
    }

    /// `amp · cos⟨k,x⟩`
    pub fn cos_mode(dim: usize, k: &[i64], amp: f64) -> TrigPoly {
        if k.iter().all(|&v| v == 0) {
            return TrigPoly::constant(dim, amp);
        }
        let mut p = TrigPoly::with_radius(dim, k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0));
        let i = p.index(k).expect("mode inside radius");
        let n = p.coeffs.len();
        p.coeffs[i] = Complex64::new(amp / 2.0, 0.0);
        p.coeffs[n - 1 - i] = Complex64::new(amp / 2.0, 0.0);
        p
    }

    /// `amp · sin⟨k,x⟩`
    pub fn sin_mode(dim: usize, k: &[i64], amp: f64) -> TrigPoly {
        if k.iter().all(|&v| v == 0) {
            return TrigPoly::zero(dim);
        }
        let mut p = TrigPoly::with_radius(dim, k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0));
        let i = p.index(k).expect("mode inside radius");
        let n = p.coeffs.len();
        p.coeffs[i] = Complex64::new(0.0, -amp / 2.0);
        p.coeffs[n - 1 - i] = Complex64::new(0.0, amp / 2.0);
        p
    }

    /// Builds a polynomial from explicit `(k, ĉ(k))` pairs; absent modes are
    /// zero. Rejects inputs whose coefficients are not conjugate-symmetric.
    pub fn from_modes(dim: usize, modes: &[(Vec<i64>, Complex64)]) -> Result<TrigPoly> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut radius = 0usize;
        for (k, _) in modes {
            if k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.len(),
                });
            }
            for v in k {
                radius = radius.max(v.unsigned_abs() as usize);
            }
        }
        let mut p = TrigPoly::with_radius(dim, radius);
        for (k, c) in modes {
            let i = p.index(k).expect("radius covers every mode");
            p.coeffs[i] += *c;
        }
        let n = p.coeffs.len();
        for i in n / 2..n {
            let defect = (p.coeffs[n - 1 - i] - p.coeffs[i].conj()).norm();
            if defect > REALITY_TOL {
                return Err(Error::Reality {
                    k: p.mode(i)[..dim].to_vec(),
                    defect,
                });
            }
            p.coeffs[i] = (p.coeffs[i] + p.coeffs[n - 1 - i].conj()) * 0.5;
        }
        realify(&mut p.coeffs);
        p.shrink();
        Ok(p)
    }

    fn with_radius(dim: usize, radius: usize) -> TrigPoly {
        TrigPoly {
            dim,
            radius,
            coeffs: vec![Complex64::new(0.0, 0.0); cube_len(dim, radius)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest |k|∞ that may carry a nonzero coefficient.
    pub fn radius(&self) -> usize {
        self.radius
    }

    fn side(&self) -> usize {
        2 * self.radius + 1
    }

    fn index(&self, k: &[i64]) -> Option<usize> {
        let r = self.radius as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &v in k {
            if v.abs() > r {
                return None;
            }
            idx = idx * side + (v + r) as usize;
        }
        Some(idx)
    }

    fn mode(&self, mut idx: usize) -> Mode {
        let mut k = [0i64; MAX_DIM];
        let side = self.side();
        let r = self.radius as i64;
        for j in (0..self.dim).rev() {
            k[j] = (idx % side) as i64 - r;
            idx /= side;
        }
        k
    }

    /// ĉ(k); zero outside the stored cube.
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        match self.index(k) {
            Some(i) => self.coeffs[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[self.coeffs.len() / 2].re
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Nonzero coefficients in storage order.
    pub fn modes(&self) -> Vec<(Vec<i64>, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(i, c)| (self.mode(i)[..self.dim].to_vec(), *c))
            .collect()
    }

    /// Re-embeds into a cube of radius `r`, dropping modes outside it.
    pub fn resized(&self, r: usize) -> TrigPoly {
        if r == self.radius {
            return self.clone();
        }
        let mut out = TrigPoly::with_radius(self.dim, r);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let k = self.mode(i);
            if let Some(j) = out.index(&k[..self.dim]) {
                out.coeffs[j] = *c;
            }
        }
        out
    }

    fn shrink(&mut self) {
        while self.radius > 0 {
            let r = self.radius as i64;
            let outer_zero = self.coeffs.iter().enumerate().all(|(i, c)| {
                (c.re == 0.0 && c.im == 0.0)
                    || self.mode(i)[..self.dim].iter().all(|v| v.abs() < r)
            });
            if !outer_zero {
                break;
            }
            *self = self.resized(self.radius - 1);
        }
    }

    /// Drops modes with |k|∞ > kmax, returning the majorant (s = 0) of
    /// what was removed.
    pub fn truncated(&self, kmax: usize) -> (TrigPoly, f64) {
        if self.radius <= kmax {
            return (self.clone(), 0.0);
        }
        let out = self.resized(kmax);
        let dropped = self.maj(0.0) - out.maj(0.0);
        (out, dropped.max(0.0))
    }

    fn zip_with(&self, other: &TrigPoly, f: impl Fn(Complex64, Complex64) -> Complex64) -> TrigPoly {
        debug_assert_eq!(self.dim, other.dim);
        let r = self.radius.max(other.radius);
        let a = self.resized(r);
        let b = other.resized(r);
        let mut out = TrigPoly {
            dim: self.dim,
            radius: r,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(*x, *y)).collect(),
        };
        out.shrink();
        out
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.zip_with(other, |x, y| x - y)
    }

    /// `self + alpha·other`
    pub fn axpy(&self, alpha: f64, other: &TrigPoly) -> TrigPoly {
        self.zip_with(other, |x, y| x + y * alpha)
    }

    pub fn add_assign(&mut self, other: &TrigPoly) {
        if other.radius > self.radius {
            *self = self.resized(other.radius);
        }
        if other.radius == self.radius {
            for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *x += *y;
            }
        } else {
            for (i, c) in other.coeffs.iter().enumerate() {
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let k = other.mode(i);
                let j = self.index(&k[..self.dim]).expect("radius covers");
                self.coeffs[j] += *c;
            }
        }
    }

    pub fn scale(&self, alpha: f64) -> TrigPoly {
        if alpha == 0.0 {
            return TrigPoly::zero(self.dim);
        }
        TrigPoly {
            dim: self.dim,
            radius: self.radius,
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    pub fn neg(&self) -> TrigPoly {
        TrigPoly {
            dim: self.dim,
            radius: self.radius,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Fourier convolution truncated to the context's radius.
    pub fn mul(&self, other: &TrigPoly, ctx: &Ctx) -> TrigPoly {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        if self.is_zero() || other.is_zero() {
            return TrigPoly::zero(d);
        }
        let full = self.radius + other.radius;
        let rc = full.min(ctx.kmax());
        let sc = (2 * rc + 1) as i64;
        let mut strides = [0i64; MAX_DIM];
        let mut s = 1i64;
        for j in (0..d).rev() {
            strides[j] = s;
            s *= sc;
        }
        let n = s as usize;
        let center = (n / 2) as i64;
        let offsets = |p: &TrigPoly| -> Vec<(i64, Mode, Complex64)> {
            p.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
                .map(|(i, c)| {
                    let k = p.mode(i);
                    let off = (0..d).map(|j| k[j] * strides[j]).sum::<i64>();
                    (off, k, *c)
                })
                .collect()
        };
        let a = offsets(self);
        let b = offsets(other);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        if rc == full {
            for (oa, _, ca) in &a {
                for (ob, _, cb) in &b {
                    let idx = center + oa + ob;
                    if idx >= center {
                        out[idx as usize] += ca * cb;
                    }
                }
            }
        } else {
            let rci = rc as i64;
            let bn: Vec<f64> = b.iter().map(|(_, _, c)| c.norm()).collect();
            let mut dropped = 0.0;
            for (oa, ka, ca) in &a {
                let na = ca.norm();
                for ((ob, kb, cb), nb) in b.iter().zip(&bn) {
                    if (0..d).any(|j| (ka[j] + kb[j]).abs() > rci) {
                        dropped += na * nb;
                        continue;
                    }
                    let idx = center + oa + ob;
                    if idx >= center {
                        out[idx as usize] += ca * cb;
                    }
                }
            }
            ctx.add_floor(dropped);
        }
        realify(&mut out);
        let mut p = TrigPoly {
            dim: d,
            radius: rc,
            coeffs: out,
        };
        p.shrink();
        p
    }

    /// Applies `f(k, ĉ(k))` on the upper half of the cube (and k = 0) and
    /// mirrors by conjugation, so the result is again a real function.
    pub fn map_modes(&self, mut f: impl FnMut(&[i64], Complex64) -> Complex64) -> TrigPoly {
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in n / 2..n {
            let k = self.mode(i);
            out[i] = f(&k[..self.dim], self.coeffs[i]);
        }
        realify(&mut out);
        let mut p = TrigPoly {
            dim: self.dim,
            radius: self.radius,
            coeffs: out,
        };
        p.shrink();
        p
    }

    /// Directional derivative w·∂_x: ĉ(k) ↦ i⟨k,w⟩ĉ(k).
    pub fn deriv(&self, w: &[f64]) -> TrigPoly {
        self.map_modes(|k, c| {
            let t: f64 = k.iter().zip(w).map(|(&kj, &wj)| kj as f64 * wj).sum();
            times_i(c, t)
        })
    }

    /// ∂/∂x_j
    pub fn deriv_axis(&self, j: usize) -> TrigPoly {
        self.map_modes(|k, c| times_i(c, k[j] as f64))
    }

    /// Σ_k |ĉ(k)| e^{|k|₁ s}
    pub fn maj(&self, s: f64) -> f64 {
        let mut weights = Vec::new();
        let mut total = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let k = self.mode(i);
            let n1 = one_norm(&k[..self.dim]) as usize;
            if weights.len() <= n1 {
                weights.extend((weights.len()..=n1).map(|m| libm::exp(m as f64 * s)));
            }
            total += c.norm() * weights[n1];
        }
        total
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Value at a real angle vector.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = self.radius as i64;
        let side = self.side();
        let mut phases: Vec<Complex64> = Vec::with_capacity(self.dim * side);
        for &xj in &x[..self.dim] {
            for m in -r..=r {
                let a = m as f64 * xj;
                phases.push(Complex64::new(libm::cos(a), libm::sin(a)));
            }
        }
        let n = self.coeffs.len();
        let mut total = self.coeffs[n / 2].re;
        for i in n / 2 + 1..n {
            let c = self.coeffs[i];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let mut idx = i;
            let mut e = Complex64::new(1.0, 0.0);
            for j in (0..self.dim).rev() {
                e *= phases[j * side + idx % side];
                idx /= side;
            }
            total += 2.0 * (c * e).re;
        }
        total
    }

    /// Exact symmetry test; the zero polynomial reports `Even`.
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
        let n = self.coeffs.len();
        (0..n / 2).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }

    pub fn is_odd(&self) -> bool {
        let n = self.coeffs.len();
        let c0 = self.coeffs[n / 2];
        c0.re == 0.0
            && c0.im == 0.0
            && (0..n / 2).all(|i| self.coeffs[i] == -self.coeffs[n - 1 - i])
    }

    /// First mode (in storage order) breaking the requested parity.
    pub fn parity_witness(&self, want: Parity) -> Option<Vec<i64>> {
        let n = self.coeffs.len();
        for i in n / 2..n {
            let (a, b) = (self.coeffs[i], self.coeffs[n - 1 - i]);
            let bad = match want {
                Parity::Even => a != b,
                Parity::Odd => a != -b,
                Parity::Neither => false,
            };
            if bad {
                return Some(self.mode(i)[..self.dim].to_vec());
            }
        }
        None
    }
}

/// `i·t·c` computed so that a real `c` gives an exactly imaginary result and
/// vice versa.
pub(crate) fn times_i(c: Complex64, t: f64) -> Complex64 {
    Complex64::new(-(c.im * t), c.re * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn ctx() -> Ctx {
        Ctx::new(8, 8)
    }

    #[test]
    fn cos_squared_is_half_plus_half_cos_double() {
        let c = TrigPoly::cos_mode(1, &[1], 1.0);
        let p = c.mul(&c, &ctx());
        let want = TrigPoly::constant(1, 0.5).add(&TrigPoly::cos_mode(1, &[2], 0.5));
        assert_eq!(p, want);
    }

    #[test]
    fn sin_squared_is_even() {
        let s = TrigPoly::sin_mode(1, &[1], 1.0);
        let p = s.mul(&s, &ctx());
        let want = TrigPoly::constant(1, 0.5).add(&TrigPoly::cos_mode(1, &[2], -0.5));
        assert!((p.sub(&want)).maj(0.0) < 1e-16);
        assert_eq!(p.parity(), Parity::Even);
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let s = TrigPoly::sin_mode(1, &[1], 1.0);
        assert_eq!(s.deriv(&[1.0]), TrigPoly::cos_mode(1, &[1], 1.0));
        assert!(TrigPoly::constant(1, 3.0).deriv(&[1.0]).is_zero());
    }

    #[test]
    fn directional_derivative_of_cos_difference() {
        // d/dt cos(x1 - x2) along w=(1,φ): -(1-φ) sin(x1-x2) = (φ-1) sin(x1-x2)
        let phi = (1.0 + libm::sqrt(5.0)) / 2.0;
        let f = TrigPoly::cos_mode(2, &[1, -1], 1.0);
        let got = f.deriv(&[1.0, phi]);
        let want = TrigPoly::sin_mode(2, &[1, -1], phi - 1.0);
        assert!(got.sub(&want).maj(0.0) < 1e-15);
        assert_eq!(got.parity(), Parity::Odd);
    }

    #[test]
    fn parity_classification() {
        assert_eq!(TrigPoly::cos_mode(1, &[1], 1.0).parity(), Parity::Even);
        assert_eq!(TrigPoly::sin_mode(1, &[1], 1.0).parity(), Parity::Odd);
        let mixed = TrigPoly::constant(1, 1.0).add(&TrigPoly::sin_mode(1, &[1], 1.0));
        assert_eq!(mixed.parity(), Parity::Neither);
        assert_eq!(mixed.parity_witness(Parity::Odd), Some(vec![0]));
    }

    #[test]
    fn reality_is_enforced() {
        let bad = TrigPoly::from_modes(1, &[(vec![1], Complex64::new(1.0, 0.0))]);
        assert!(matches!(bad, Err(Error::Reality { .. })));
        let good = TrigPoly::from_modes(
            1,
            &[
                (vec![1], Complex64::new(0.5, 0.25)),
                (vec![-1], Complex64::new(0.5, -0.25)),
            ],
        )
        .unwrap();
        assert_eq!(good.coeff(&[-1]), Complex64::new(0.5, -0.25));
    }

    #[test]
    fn majorant_of_cos() {
        let s = 0.3;
        let c = TrigPoly::cos_mode(1, &[1], 1.0);
        assert!((c.maj(s) - libm::exp(s)).abs() < 1e-15);
    }

    #[test]
    fn truncation_is_recorded() {
        let c = Ctx::new(1, 4);
        let p = TrigPoly::cos_mode(1, &[1], 1.0);
        let q = p.mul(&p, &c);
        assert_eq!(q, TrigPoly::constant(1, 0.5));
        assert!((c.floor() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn evaluation_matches_closed_form() {
        let p = TrigPoly::cos_mode(2, &[1, 2], 0.7).add(&TrigPoly::sin_mode(2, &[0, 1], -1.5));
        let x = [0.3, -1.1];
        let want = 0.7 * libm::cos(0.3 - 2.2) - 1.5 * libm::sin(-1.1);
        assert!((p.eval(&x) - want).abs() < 1e-14);
        assert!((TrigPoly::cos_mode(1, &[3], 1.0).eval(&[PI]) + 1.0).abs() < 1e-14);
    }
}
