//! Smooth cut-off of near-resonant modes and the small-divisor solvers built
//! on it.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dioph::{dot, one_norm, DiophParams};
use crate::error::{Error, Result};
use crate::series::{field, Ctx, FtSeries, MultiIndex, TrigPoly};

/// Plateau and support radii of the cut-off l̃.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            inner: 0.25,
            outer: 0.5,
        }
    }
}

fn glue(t: f64) -> f64 {
    if t > 0.0 {
        libm::exp(-1.0 / t)
    } else {
        0.0
    }
}

impl CutoffSpec {
    /// 1 on |x| ≤ inner, 0 on |x| ≥ outer, C^∞ and monotone in between.
    pub fn value(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= self.inner {
            return 1.0;
        }
        if a >= self.outer {
            return 0.0;
        }
        let p = glue(self.outer - a);
        p / (p + glue(a - self.inner))
    }
}

pub fn cutoff_value(x: f64) -> f64 {
    CutoffSpec::default().value(x)
}

/// A frequency-parameter value η.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaPoint(Vec<f64>);

impl EtaPoint {
    pub fn new(eta: Vec<f64>) -> EtaPoint {
        EtaPoint(eta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Sample points in the (ξ, η) parameter domain.
///
/// ξ lies in the ball of radius `a` about 0 and η in the ball of radius `b`
/// about ω₀.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrid {
    pub xi_samples: Vec<Vec<f64>>,
    pub eta_samples: Vec<EtaPoint>,
}

impl ParamGrid {
    pub fn new(
        xi_samples: Vec<Vec<f64>>,
        eta_samples: Vec<EtaPoint>,
        omega0: &[f64],
        a: f64,
        b: f64,
    ) -> Result<ParamGrid> {
        if xi_samples.is_empty() || eta_samples.is_empty() {
            return Err(Error::InvalidParameter("parameter grid must be nonempty"));
        }
        let d = omega0.len();
        for xi in &xi_samples {
            if xi.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: xi.len() });
            }
            if libm::sqrt(xi.iter().map(|v| v * v).sum()) > a {
                return Err(Error::InvalidParameter("xi sample outside B(a)"));
            }
        }
        for eta in &eta_samples {
            if eta.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: eta.dim() });
            }
            if dist(eta.as_slice(), omega0) >= b {
                return Err(Error::InvalidParameter("eta sample outside B(omega0, b)"));
            }
        }
        Ok(ParamGrid {
            xi_samples,
            eta_samples,
        })
    }

    /// All (ξ, η) pairs, ξ-major.
    pub fn points(&self) -> impl Iterator<Item = (&[f64], &EtaPoint)> {
        self.xi_samples
            .iter()
            .flat_map(move |xi| self.eta_samples.iter().map(move |e| (xi.as_slice(), e)))
    }
}

/// ⟨k,η⟩·|k|₁^τ/γ
fn cutoff_arg(k: &[i64], p: &DiophParams, eta: &[f64]) -> (f64, f64) {
    let t = dot(k, eta);
    (t, t * libm::pow(one_norm(k), p.tau) / p.gamma)
}

fn is_zero_mode(k: &[i64]) -> bool {
    k.iter().all(|&v| v == 0)
}

pub fn flat_project_trig(f: &TrigPoly, p: &DiophParams, eta: &EtaPoint) -> TrigPoly {
    let spec = CutoffSpec::default();
    f.map_modes(|k, c| {
        if is_zero_mode(k) {
            return Complex64::new(0.0, 0.0);
        }
        let l = spec.value(cutoff_arg(k, p, eta.as_slice()).1);
        if l == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * l
        }
    })
}

/// P_{γ,τ}: keeps each nonzero mode with weight l̃(⟨k,η⟩|k|₁^τ/γ).
pub fn flat_project(f: &FtSeries, p: &DiophParams, eta: &EtaPoint) -> FtSeries {
    f.map_coeffs(|_, c| flat_project_trig(c, p, eta))
}

pub fn flat_project_vec(f: &[FtSeries], p: &DiophParams, eta: &EtaPoint) -> Vec<FtSeries> {
    f.iter().map(|c| flat_project(c, p, eta)).collect()
}

pub fn flat_project_mat(f: &[Vec<FtSeries>], p: &DiophParams, eta: &EtaPoint) -> Vec<Vec<FtSeries>> {
    f.iter().map(|r| flat_project_vec(r, p, eta)).collect()
}

/// Absolute tolerance on the mean of a right-hand side handed to `solve_l`.
pub const MEAN_TOL: f64 = 1e-12;

fn solve_l_trig(g: &TrigPoly, p: &DiophParams, eta: &EtaPoint) -> Result<TrigPoly> {
    let mean = g.mean();
    if mean.abs() > MEAN_TOL {
        return Err(Error::NonzeroMean { mean });
    }
    let spec = CutoffSpec::default();
    Ok(g.map_modes(|k, c| {
        if is_zero_mode(k) {
            return Complex64::new(0.0, 0.0);
        }
        let (t, arg) = cutoff_arg(k, p, eta.as_slice());
        if arg.abs() <= spec.inner {
            return Complex64::new(0.0, 0.0);
        }
        // −(1−l̃)ĝ/(i t) = i(1−l̃)ĝ/t
        let w = (1.0 - spec.value(arg)) / t;
        Complex64::new(-(c.im * w), c.re * w)
    }))
}

/// L g: the solution v of (1 − P)g + η·∂_x v = 0 with zero mean.
pub fn solve_l(g: &FtSeries, p: &DiophParams, eta: &EtaPoint) -> Result<FtSeries> {
    let mut out = FtSeries::zero(g.angle_dim(), g.action_dim());
    for (a, c) in g.terms() {
        out.insert(a.clone(), solve_l_trig(c, p, eta)?);
    }
    Ok(out)
}

pub fn solve_l_vec(g: &[FtSeries], p: &DiophParams, eta: &EtaPoint) -> Result<Vec<FtSeries>> {
    g.iter().map(|c| solve_l(c, p, eta)).collect()
}

pub fn solve_l_mat(g: &[Vec<FtSeries>], p: &DiophParams, eta: &EtaPoint) -> Result<Vec<Vec<FtSeries>>> {
    g.iter().map(|r| solve_l_vec(r, p, eta)).collect()
}

/// Majorant of (1 − P)g + η·∂_x v.
pub fn l_residual(g: &FtSeries, v: &FtSeries, p: &DiophParams, eta: &EtaPoint) -> f64 {
    g.sub(&flat_project(g, p, eta))
        .add(&v.dx(eta.as_slice()))
        .maj(0.0, 1.0)
}

/// y-independent part of every component.
pub fn degree0(v: &[FtSeries]) -> Vec<FtSeries> {
    field::homogeneous(v, 0)
}

/// M[i][j] = coefficient of y_j in v_i, as y-independent series.
pub fn linear_part(v: &[FtSeries]) -> Vec<Vec<FtSeries>> {
    v.iter()
        .map(|vi| {
            let n = vi.action_dim();
            (0..n)
                .map(|j| FtSeries::from_trig(vi.coefficient(&MultiIndex::unit(n, j)), n))
                .collect()
        })
        .collect()
}

/// (2g₂·v)[i][j] = Σ_{|β|=2} g_{β,i} β_j v^{β−e_j}: the y-linear part of
/// g₂(y + v)² − g₂y² − g₂v².
pub fn quadratic_cross(g: &[FtSeries], v: &[FtSeries], ctx: &Ctx) -> Vec<Vec<FtSeries>> {
    g.iter()
        .map(|gi| {
            let n = gi.action_dim();
            let a = gi.angle_dim();
            (0..n)
                .map(|j| {
                    let mut acc = FtSeries::zero(a, n);
                    for (beta, c) in gi.terms() {
                        if beta.degree() != 2 || beta.get(j) == 0 {
                            continue;
                        }
                        let rest = beta.sub_unit(j).expect("entry nonzero");
                        let l = rest.last_nonzero().expect("degree one");
                        let term = v[l].mul_trig(c, ctx).scale(beta.get(j) as f64);
                        acc.add_assign(&term);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Solutions of the three homological equations of one KAM step, with the
/// right-hand sides that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Triplet {
    pub u: Vec<FtSeries>,
    pub v: Vec<FtSeries>,
    /// d×d matrix; the map is y ↦ y + v + w·y.
    pub w: Vec<Vec<FtSeries>>,
    /// f₀ − f₁·v
    pub rhs_u: Vec<FtSeries>,
    /// g₁ − 2g₂·v + ∂_x v·f₁
    pub rhs_w: Vec<Vec<FtSeries>>,
}

/// Solves the v, u and w equations for the stage data F = f₀ + f₁y + …,
/// G = g₀ + g₁y + g₂y² + … (y-series, one per component).
pub fn solve_triplet(
    f: &[FtSeries],
    g: &[FtSeries],
    p: &DiophParams,
    eta: &EtaPoint,
    ctx: &Ctx,
) -> Result<Triplet> {
    let f0 = degree0(f);
    let f1 = linear_part(f);
    let g0 = degree0(g);
    let g1 = linear_part(g);

    let v = solve_l_vec(&g0, p, eta)?;
    let rhs_u = field::sub(&f0, &field::mat_vec(&f1, &v, ctx));
    let u = solve_l_vec(&rhs_u, p, eta)?;

    let jv = field::jacobian_x(&v);
    let cross = quadratic_cross(g, &v, ctx);
    let rhs_w = field::mat_add(&field::mat_sub(&g1, &cross), &field::mat_mat(&jv, &f1, ctx));
    let w = solve_l_mat(&rhs_w, p, eta)?;
    Ok(Triplet {
        u,
        v,
        w,
        rhs_u,
        rhs_w,
    })
}

/// Largest residual majorant of the three defining equations.
pub fn triplet_residual(t: &Triplet, g: &[FtSeries], p: &DiophParams, eta: &EtaPoint) -> f64 {
    let g0 = degree0(g);
    let mut worst: f64 = 0.0;
    for (gi, vi) in g0.iter().zip(&t.v) {
        worst = worst.max(l_residual(gi, vi, p, eta));
    }
    for (ri, ui) in t.rhs_u.iter().zip(&t.u) {
        worst = worst.max(l_residual(ri, ui, p, eta));
    }
    for (rr, wr) in t.rhs_w.iter().zip(&t.w) {
        for (ri, wi) in rr.iter().zip(wr) {
            worst = worst.max(l_residual(ri, wi, p, eta));
        }
    }
    worst
}

/// Ratios maj(P f, s − δ) / maj(f, s) for each δ in `deltas`.
pub fn projection_bound_sweep(
    f: &FtSeries,
    p: &DiophParams,
    eta: &EtaPoint,
    s: f64,
    deltas: &[f64],
) -> Vec<(f64, f64)> {
    let pf = flat_project(f, p, eta);
    let base = f.maj(s, 1.0);
    deltas
        .iter()
        .map(|&delta| {
            let r = if base == 0.0 { 0.0 } else { pf.maj(s - delta, 1.0) / base };
            (delta, r)
        })
        .collect()
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (libm::log(*x), libm::log(*y)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn eta(v: &[f64]) -> EtaPoint {
        EtaPoint::new(v.to_vec())
    }

    #[test]
    fn cutoff_plateau_and_support() {
        assert_eq!(cutoff_value(0.1), 1.0);
        assert_eq!(cutoff_value(-0.25), 1.0);
        assert_eq!(cutoff_value(0.9), 0.0);
        assert_eq!(cutoff_value(0.5), 0.0);
        let mid = cutoff_value(0.375);
        assert!(mid > 0.0 && mid < 1.0);
        // symmetric glue: midpoint value is exactly 1/2
        assert!((mid - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let x = 0.25 + 0.25 * i as f64 / 1000.0;
            let v = cutoff_value(x);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn resonant_mode_passes_projection() {
        let p = DiophParams::new(0.1, 1.0).unwrap();
        let f = FtSeries::from_trig(TrigPoly::cos_mode(2, &[1, -1], 1.0), 2);
        let out = flat_project(&f, &p, &eta(&[1.0, 1.0]));
        assert_eq!(out, f);
    }

    #[test]
    fn l_inverts_sine() {
        let p = DiophParams::new(0.1, 1.0).unwrap();
        let g = FtSeries::from_trig(TrigPoly::sin_mode(1, &[1], 1.0), 1);
        let e = eta(&[1.0]);
        let v = solve_l(&g, &p, &e).unwrap();
        assert_eq!(v, FtSeries::from_trig(TrigPoly::cos_mode(1, &[1], 1.0), 1));
        assert_eq!(l_residual(&g, &v, &p, &e), 0.0);
    }

    #[test]
    fn l_is_zero_on_plateau() {
        // argument 0.01·1/0.1 = 0.1 ≤ 1/4 for both modes
        let p = DiophParams::new(0.1, 0.0).unwrap();
        let g = FtSeries::from_trig(TrigPoly::sin_mode(1, &[1], 1.0), 1);
        let v = solve_l(&g, &p, &eta(&[0.01])).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn l_rejects_mean() {
        let p = DiophParams::new(0.1, 1.0).unwrap();
        let g = FtSeries::constant(1, 1, 0.5);
        assert!(matches!(solve_l(&g, &p, &eta(&[1.0])), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn triplet_of_zero_data_is_zero() {
        let p = DiophParams::new(0.05, 1.5).unwrap();
        let ctx = Ctx::new(6, 4);
        let y = |j| FtSeries::variable(2, 2, j);
        let f = vec![y(0), y(1)];
        let g = field::zeros(2, 2, 2);
        let t = solve_triplet(&f, &g, &p, &eta(&[1.0, 1.618]), &ctx).unwrap();
        assert!(field::maj(&t.u, 0.0, 1.0) == 0.0 && field::maj(&t.v, 0.0, 1.0) == 0.0);
        assert_eq!(field::mat_maj(&t.w, 0.0, 1.0), 0.0);
    }

    #[test]
    fn triplet_with_shear_free_quadratic() {
        // d = 1: g = a sin x + (sin x) y², f = 0. v = a cos x and w solves
        // the equation with right-hand side −2 sin x · v = −a sin 2x.
        let p = DiophParams::new(0.01, 1.0).unwrap();
        let ctx = Ctx::new(6, 4);
        let a = 1e-3;
        let s = TrigPoly::sin_mode(1, &[1], 1.0);
        let g = vec![FtSeries::from_trig(s.scale(a), 1)
            .add(&FtSeries::monomial(MultiIndex::new(&[2]), s.clone()))];
        let f = field::zeros(1, 1, 1);
        let e = eta(&[1.0]);
        let t = solve_triplet(&f, &g, &p, &e, &ctx).unwrap();
        assert_eq!(t.v[0], FtSeries::from_trig(TrigPoly::cos_mode(1, &[1], a), 1));
        assert!(t.u[0].is_zero());
        let want = TrigPoly::sin_mode(1, &[2], -a);
        assert!(t.rhs_w[0][0].coefficient(&MultiIndex::zero(1)).sub(&want).maj(0.0) < 1e-18);
        // η∂w = a sin 2x  ⇒  w = −(a/2) cos 2x
        let wc = t.w[0][0].coefficient(&MultiIndex::zero(1));
        assert!(wc.sub(&TrigPoly::cos_mode(1, &[2], -a / 2.0)).maj(0.0) < 1e-18);
        assert!(triplet_residual(&t, &g, &p, &e) < 1e-17);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 3.0 * libm::pow(i as f64, 2.5))).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.5).abs() < 1e-12);
    }
}
