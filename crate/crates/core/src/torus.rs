//! Direct integration of the original system and drift of candidate tori.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::bnf::{BnfOutput, TransformStep};
use crate::error::{Error, Result};
use crate::kam::PointState;
use crate::series::{field, FtSeries};
use crate::system::ReversibleSystem;

/// Default per-step tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

// Dormand–Prince 5(4); the field is autonomous so the nodes c_i are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Samples of an orbit at equally spaced times; angles reduced to [0, 2π).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub steps: usize,
}

fn rhs(sys: &ReversibleSystem, z: &[f64]) -> Vec<f64> {
    let d = sys.dim();
    let (xd, yd) = sys.eval(&z[..d], &z[d..]);
    let mut out = xd;
    out.extend(yd);
    out
}

pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Shortest arc between two angles.
pub fn arc(a: f64, b: f64) -> f64 {
    let r = (a - b).rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

/// √(Σ arc²) + |y − y'|₂
pub fn torus_distance(x: &[f64], y: &[f64], x2: &[f64], y2: &[f64]) -> f64 {
    let ang: f64 = x.iter().zip(x2).map(|(a, b)| arc(*a, *b).powi(2)).sum();
    let act: f64 = y.iter().zip(y2).map(|(a, b)| (a - b) * (a - b)).sum();
    libm::sqrt(ang) + libm::sqrt(act)
}

/// Adaptive Dormand–Prince integration from (x0, y0) over [0, t_end]
/// (t_end may be negative), with absolute per-step tolerance `tol` and
/// `n_out` equally spaced output samples after the initial one.
pub fn integrate(
    sys: &ReversibleSystem,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    tol: f64,
    n_out: usize,
) -> Result<Trajectory> {
    let d = sys.dim();
    if x0.len() != d || y0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x0.len().min(y0.len()) });
    }
    if !(tol > 0.0) || n_out == 0 {
        return Err(Error::InvalidParameter("integrator needs tol > 0 and at least one output"));
    }
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let mut z: Vec<f64> = x0.iter().chain(y0).copied().collect();
    let mut t = 0.0f64;
    let mut h = dir * (t_end.abs() / n_out as f64).min(1e-2).max(1e-8);
    let mut traj = Trajectory {
        times: vec![0.0],
        x: vec![x0.iter().map(|&a| reduce_angle(a)).collect()],
        y: vec![y0.to_vec()],
        steps: 0,
    };
    let mut k = vec![vec![0.0; 2 * d]; 7];
    k[0] = rhs(sys, &z);
    for j in 1..=n_out {
        let target = t_end * j as f64 / n_out as f64;
        while (target - t) * dir > 0.0 {
            let last = (t + h - target) * dir >= 0.0;
            let step = if last { target - t } else { h };
            if step.abs() < 1e-14 * (1.0 + t.abs()) && !last {
                return Err(Error::StepUnderflow { t });
            }
            for s in 1..7 {
                let zs: Vec<f64> = (0..2 * d)
                    .map(|i| z[i] + step * (0..s).map(|l| A[s][l] * k[l][i]).sum::<f64>())
                    .collect();
                k[s] = rhs(sys, &zs);
            }
            let z5: Vec<f64> = (0..2 * d)
                .map(|i| z[i] + step * (0..7).map(|l| B5[l] * k[l][i]).sum::<f64>())
                .collect();
            let err = (0..2 * d)
                .map(|i| (step * (0..7).map(|l| (B5[l] - B4[l]) * k[l][i]).sum::<f64>()).abs())
                .fold(0.0f64, f64::max);
            let ratio = err / tol;
            if ratio <= 1.0 {
                t = if last { target } else { t + step };
                z = z5;
                k[0] = k[6].clone();
                traj.steps += 1;
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * libm::pow(ratio, -0.2)).clamp(0.2, 5.0) };
            if !(ratio <= 1.0 && last) {
                h = step * factor;
            }
            if h.abs() < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::StepUnderflow { t });
            }
        }
        traj.times.push(target);
        traj.x.push(z[..d].iter().map(|&a| reduce_angle(a)).collect());
        traj.y.push(z[d..].to_vec());
    }
    Ok(traj)
}

/// How a torus is parametrized by θ ∈ T^d.
#[derive(Clone, Debug, PartialEq)]
pub enum TorusEmbedding {
    /// x = θ, y fixed.
    Flat { y: Vec<f64> },
    /// (θ, 0) pulled back through the KAM chain, shifted by ξ and pulled
    /// back through the normal form.
    Normalized {
        xi: Vec<f64>,
        kam_chain: Vec<TransformStep>,
        back_u: Vec<FtSeries>,
        back_v: Vec<FtSeries>,
    },
}

/// A candidate invariant torus with frequency η.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusCandidate {
    pub eta: Vec<f64>,
    pub embedding: TorusEmbedding,
}

impl TorusCandidate {
    pub fn flat(eta: Vec<f64>, y: Vec<f64>) -> TorusCandidate {
        TorusCandidate {
            eta,
            embedding: TorusEmbedding::Flat { y },
        }
    }

    /// The torus ρ = 0 of a KAM point, in the original variables.
    pub fn from_kam(bnf: &BnfOutput, point: &PointState) -> TorusCandidate {
        TorusCandidate {
            eta: point.eta.as_slice().to_vec(),
            embedding: TorusEmbedding::Normalized {
                xi: point.xi.clone(),
                kam_chain: point.chain.clone(),
                back_u: bnf.back_u.clone(),
                back_v: bnf.back_v.clone(),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    /// Original-variable point of θ.
    pub fn embed(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match &self.embedding {
            TorusEmbedding::Flat { y } => (theta.to_vec(), y.clone()),
            TorusEmbedding::Normalized {
                xi,
                kam_chain,
                back_u,
                back_v,
            } => {
                let mut x = theta.to_vec();
                let mut y = vec![0.0; theta.len()];
                for step in kam_chain.iter().rev() {
                    (x, y) = step.to_old(&x, &y);
                }
                let mu: Vec<f64> = y.iter().zip(xi).map(|(a, b)| a + b).collect();
                let du = field::eval(back_u, &x, &mu);
                let dv = field::eval(back_v, &x, &mu);
                let xo = x.iter().zip(&du).map(|(a, b)| a + b).collect();
                let yo = mu.iter().zip(&dv).map(|(a, b)| a + b).collect();
                (xo, yo)
            }
        }
    }
}

/// Outcome of `verify_torus`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusCheckReport {
    pub horizon: f64,
    pub integrator_tol: f64,
    pub n_theta: usize,
    pub max_drift: f64,
    /// (t, largest drift over the initial phases at t)
    pub drift_curve: Vec<(f64, f64)>,
}

/// Initial phases: an n-point Kronecker sequence on T^d.
pub fn phase_grid(d: usize, n: usize) -> Vec<Vec<f64>> {
    let steps = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877, 0.236_067_977_499_79];
    (0..n)
        .map(|j| {
            (0..d)
                .map(|i| 2.0 * PI * ((j as f64 + 0.5) * steps[i % steps.len()] + 0.1 * i as f64).fract())
                .collect()
        })
        .collect()
}

/// Integrates from `n_theta` points of the candidate and compares with the
/// reference motion θ₀ + ηt pushed through the embedding.
pub fn verify_torus(
    sys: &ReversibleSystem,
    cand: &TorusCandidate,
    horizon: f64,
    tol: f64,
    n_theta: usize,
    n_out: usize,
) -> Result<TorusCheckReport> {
    let d = sys.dim();
    if cand.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: cand.dim() });
    }
    let mut curve: Vec<(f64, f64)> = (0..=n_out).map(|j| (horizon * j as f64 / n_out as f64, 0.0)).collect();
    for theta0 in phase_grid(d, n_theta) {
        let (x0, y0) = cand.embed(&theta0);
        let traj = integrate(sys, &x0, &y0, horizon, tol, n_out)?;
        for (j, &t) in traj.times.iter().enumerate() {
            let phase: Vec<f64> = theta0.iter().zip(&cand.eta).map(|(a, e)| a + e * t).collect();
            let (xr, yr) = cand.embed(&phase);
            let dist = torus_distance(&traj.x[j], &traj.y[j], &xr, &yr);
            curve[j].1 = curve[j].1.max(dist);
        }
    }
    let max_drift = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(TorusCheckReport {
        horizon,
        integrator_tol: tol,
        n_theta,
        max_drift,
        drift_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{DomainSpec, MultiIndex, TrigPoly};

    fn linear(omega: Vec<f64>) -> ReversibleSystem {
        ReversibleSystem::linear(omega, DomainSpec::default()).unwrap()
    }

    #[test]
    fn linear_flow_is_exact() {
        let sys = linear(vec![1.0, 1.618_033_988_749_895]);
        let tr = integrate(&sys, &[0.3, 1.0], &[0.0, 0.0], 10.0, 1e-10, 5).unwrap();
        for (j, t) in tr.times.iter().enumerate() {
            assert!(arc(tr.x[j][0], 0.3 + t) < 1e-12);
            assert!(arc(tr.x[j][1], 1.0 + 1.618_033_988_749_895 * t) < 1e-12);
        }
    }

    #[test]
    fn closed_form_riccati_orbit() {
        // ẋ = ω, ẏ = y² sin x: 1/y(t) = 1/y₀ + (cos(x₀+ωt) − cos x₀)/ω
        let w = 1.3;
        let g = FtSeries::monomial(MultiIndex::new(&[2]), TrigPoly::sin_mode(1, &[1], 1.0));
        let sys = ReversibleSystem::new(vec![w], vec![FtSeries::zero(1, 1)], vec![g], DomainSpec::default()).unwrap();
        let (x0, y0) = (0.4, 0.2);
        let tol = 1e-10;
        let tr = integrate(&sys, &[x0], &[y0], 20.0, tol, 20).unwrap();
        for (j, t) in tr.times.iter().enumerate() {
            let exact = 1.0 / (1.0 / y0 + (libm::cos(x0 + w * t) - libm::cos(x0)) / w);
            assert!((tr.y[j][0] - exact).abs() < 10.0 * tol * (1.0 + t), "t={t}");
        }
    }

    #[test]
    fn reflected_orbit_is_an_orbit() {
        let sys = crate::system::perturbed_twist(vec![1.0, 1.4], 0.3, DomainSpec::default()).unwrap();
        let (x0, y0) = ([0.7, 2.0], [0.05, -0.03]);
        let fwd = integrate(&sys, &[-x0[0], -x0[1]], &y0, 5.0, 1e-11, 1).unwrap();
        let back = integrate(&sys, &x0, &y0, -5.0, 1e-11, 1).unwrap();
        let xr: Vec<f64> = back.x[1].iter().map(|a| reduce_angle(-a)).collect();
        assert!(torus_distance(&fwd.x[1], &fwd.y[1], &xr, &back.y[1]) < 1e-9);
    }

    #[test]
    fn flat_torus_of_the_trivial_system() {
        let sys = linear(vec![1.0, 2.0_f64.sqrt()]);
        let cand = TorusCandidate::flat(vec![1.0, 2.0_f64.sqrt()], vec![0.0, 0.0]);
        let rep = verify_torus(&sys, &cand, 50.0, 1e-10, 4, 10).unwrap();
        assert!(rep.max_drift < 1e-12, "{}", rep.max_drift);
    }
}
