use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::LambdaEval;
use crate::dioph::{ball_sample, one_norm, DiophParams, ModeTable};
use crate::error::{Error, Result};

/// Required |ω₀ − η + Λ(ξ, η)|∞ at the returned η.
pub const NEWTON_TOL: f64 = 1e-10;

const NEWTON_MAX_ITER: usize = 50;

/// η(ξ) with its residual and Diophantine status.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqPoint {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// min |⟨k,η⟩|·|k|₁^τ over the scanned modes, when requested.
    pub dc_margin: Option<f64>,
    pub dc: Option<bool>,
}

fn residual_vec(eval: &dyn LambdaEval, omega0: &[f64], xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    let lam = eval.eval(xi, eta)?;
    Ok((0..omega0.len()).map(|i| omega0[i] - eta[i] + lam[i]).collect())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Solves ω₀ − η + Λ(ξ, η) = 0 by Newton's method with a central-difference
/// Jacobian (step 1e-6·(1 + |η|)).
pub fn freq_map(
    eval: &dyn LambdaEval,
    omega0: &[f64],
    xi: &[f64],
    dc: Option<(&DiophParams, &ModeTable)>,
) -> Result<FreqPoint> {
    let d = omega0.len();
    if eval.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: eval.dim() });
    }
    let mut eta: Vec<f64> = omega0.to_vec();
    let mut r = residual_vec(eval, omega0, xi, &eta)?;
    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITER {
        if sup(&r) <= NEWTON_TOL * 1e-3 {
            break;
        }
        iterations += 1;
        // J = −1 + ∂Λ/∂η
        let mut jac = DMatrix::from_fn(d, d, |i, j| if i == j { -1.0 } else { 0.0 });
        if eval.depends_on_eta() {
            let norm = libm::sqrt(eta.iter().map(|v| v * v).sum());
            let step = 1e-6 * (1.0 + norm);
            for j in 0..d {
                let mut plus = eta.clone();
                let mut minus = eta.clone();
                plus[j] += step;
                minus[j] -= step;
                let lp = eval.eval(xi, &plus)?;
                let lm = eval.eval(xi, &minus)?;
                for i in 0..d {
                    jac[(i, j)] += (lp[i] - lm[i]) / (2.0 * step);
                }
            }
        }
        let delta = jac
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or(Error::Singular)?;
        for (e, dl) in eta.iter_mut().zip(delta.iter()) {
            *e -= dl;
        }
        let prev = sup(&r);
        r = residual_vec(eval, omega0, xi, &eta)?;
        let small_step = sup(delta.as_slice()) <= 1e-15 * (1.0 + sup(&eta));
        if small_step || (sup(&r) >= prev && sup(&r) <= NEWTON_TOL) {
            break;
        }
    }
    let residual = sup(&r);
    if !(residual <= NEWTON_TOL) {
        return Err(Error::NewtonDivergence { residual, iterations });
    }
    let (dc_margin, dc_flag) = match dc {
        Some((p, table)) => {
            let m = table.margin(&eta, p.tau);
            (Some(m), Some(m >= p.gamma))
        }
        None => (None, None),
    };
    Ok(FreqPoint {
        xi: xi.to_vec(),
        eta,
        residual,
        iterations,
        dc_margin,
        dc: dc_flag,
    })
}

/// DC fraction at one γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureRow {
    pub gamma: f64,
    pub hits: usize,
    pub fraction: f64,
    /// Binomial standard error √(f(1−f)/n).
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureScan {
    pub n: usize,
    pub a: f64,
    pub tau: f64,
    pub kmax: usize,
    pub rows: Vec<MeasureRow>,
    /// Largest Newton residual over the samples.
    pub max_residual: f64,
}

fn rows_from_margins(margins: &[f64], gammas: &[f64]) -> Vec<MeasureRow> {
    let n = margins.len();
    gammas
        .iter()
        .map(|&gamma| {
            let hits = margins.iter().filter(|&&m| m >= gamma).count();
            let fraction = hits as f64 / n.max(1) as f64;
            MeasureRow {
                gamma,
                hits,
                fraction,
                sigma: libm::sqrt(fraction * (1.0 - fraction) / n.max(1) as f64),
            }
        })
        .collect()
}

/// Monte-Carlo estimate of the share of |ξ| < a with η(ξ) ∈ DC(γ, τ), for
/// each γ of the ladder, using the same samples throughout.
#[allow(clippy::too_many_arguments)]
pub fn measure_scan(
    eval: &dyn LambdaEval,
    omega0: &[f64],
    a: f64,
    gammas: &[f64],
    tau: f64,
    kmax: usize,
    n: usize,
    seed: u64,
) -> Result<MeasureScan> {
    let d = omega0.len();
    let table = ModeTable::new(d, kmax);
    let origin = vec![0.0; d];
    let mut margins = Vec::with_capacity(n);
    let mut max_residual = 0.0f64;
    for i in 0..n as u64 {
        let xi = ball_sample(&origin, a, seed, i);
        let pt = freq_map(eval, omega0, &xi, None)?;
        max_residual = max_residual.max(pt.residual);
        margins.push(table.margin(&pt.eta, tau));
    }
    Ok(MeasureScan {
        n,
        a,
        tau,
        kmax,
        rows: rows_from_margins(&margins, gammas),
        max_residual,
    })
}

/// Share of the disk |ξ| < a (d = 2) on which |⟨k, ω₀ + ξ⟩| ≥ γ/|k|₁^τ:
/// one minus the area of a slab cut by two parallel lines.
pub fn slab_fraction(omega0: &[f64], k: &[i64], p: &DiophParams, a: f64) -> Result<f64> {
    if omega0.len() != 2 || k.len() != 2 {
        return Err(Error::InvalidParameter("the slab oracle is two-dimensional"));
    }
    let kn = libm::sqrt((k[0] * k[0] + k[1] * k[1]) as f64);
    if kn == 0.0 {
        return Err(Error::ZeroMode);
    }
    let t = (k[0] as f64 * omega0[0] + k[1] as f64 * omega0[1]) / kn;
    let half = p.gamma / (libm::pow(one_norm(k), p.tau) * kn);
    // excluded: −t − half < ⟨k̂, ξ⟩ < −t + half
    let seg = |c: f64| {
        let c = c.clamp(-a, a);
        a * a * libm::acos(c / a) - c * libm::sqrt(a * a - c * c)
    };
    let excluded = seg(-t - half) - seg(-t + half);
    Ok(1.0 - excluded / (core::f64::consts::PI * a * a))
}

/// Single-mode Monte-Carlo fraction beside its analytic value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlabCheck {
    pub fraction: f64,
    pub sigma: f64,
    pub analytic: f64,
}

impl SlabCheck {
    /// |MC − analytic| in units of σ (σ floored at 1/n).
    pub fn z_score(&self, n: usize) -> f64 {
        (self.fraction - self.analytic).abs() / self.sigma.max(1.0 / n.max(1) as f64)
    }
}

/// Same sampler as `measure_scan`, testing only the mode `k`.
pub fn slab_scan(
    eval: &dyn LambdaEval,
    omega0: &[f64],
    a: f64,
    k: &[i64],
    p: &DiophParams,
    n: usize,
    seed: u64,
) -> Result<SlabCheck> {
    let origin = vec![0.0; omega0.len()];
    let weight = libm::pow(one_norm(k), p.tau);
    let mut margins = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let xi = ball_sample(&origin, a, seed, i);
        let pt = freq_map(eval, omega0, &xi, None)?;
        let dot: f64 = k.iter().zip(&pt.eta).map(|(&kj, e)| kj as f64 * e).sum();
        margins.push(dot.abs() * weight);
    }
    let row = rows_from_margins(&margins, &[p.gamma])[0];
    Ok(SlabCheck {
        fraction: row.fraction,
        sigma: row.sigma,
        analytic: slab_fraction(omega0, k, p, a)?,
    })
}
