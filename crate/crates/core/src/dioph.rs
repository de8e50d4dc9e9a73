//! Small divisors, finite-truncation Diophantine checks and Monte-Carlo
//! estimates of Diophantine fractions.

use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Constants (γ, τ) of the condition |⟨k,ω⟩| ≥ γ / |k|₁^τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiophParams {
    pub gamma: f64,
    pub tau: f64,
}

impl DiophParams {
    pub fn new(gamma: f64, tau: f64) -> Result<DiophParams> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter("gamma must be positive"));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter("tau must be nonnegative"));
        }
        Ok(DiophParams { gamma, tau })
    }

    /// Rejects τ ≤ d − 1, for which the Diophantine set is empty.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        if self.tau > d as f64 - 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("tau must exceed d - 1"))
        }
    }
}

/// Outcome of a finite Diophantine scan.
#[derive(Clone, Debug, PartialEq)]
pub struct DcReport {
    pub is_dc: bool,
    pub worst_k: Vec<i64>,
    /// min |⟨k,ω⟩|·|k|₁^τ over the scanned modes.
    pub worst_margin: f64,
    pub kmax: usize,
}

/// ⟨k, w⟩ for k ≠ 0.
pub fn small_divisor(k: &[i64], w: &[f64]) -> Result<f64> {
    if k.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: k.len(),
        });
    }
    if k.iter().all(|&v| v == 0) {
        return Err(Error::ZeroMode);
    }
    Ok(dot(k, w))
}

pub(crate) fn dot(k: &[i64], w: &[f64]) -> f64 {
    k.iter().zip(w).map(|(&a, &b)| a as f64 * b).sum()
}

pub(crate) fn one_norm(k: &[i64]) -> f64 {
    k.iter().map(|v| v.unsigned_abs() as f64).sum()
}

/// Nonzero integer vectors with 0 < |k|₁ ≤ kmax, one of each ±k pair (first
/// nonzero entry positive), ordered by |k|₁ and then lexicographically.
#[derive(Clone, Debug)]
pub struct ModeTable {
    dim: usize,
    kmax: usize,
    modes: Vec<(Vec<i64>, f64)>,
}

impl ModeTable {
    pub fn new(dim: usize, kmax: usize) -> ModeTable {
        let mut modes = Vec::new();
        for n in 1..=kmax {
            let mut shell = Vec::new();
            let mut cur = vec![0i64; dim];
            shell_rec(&mut cur, 0, n as i64, &mut shell);
            shell.sort();
            modes.extend(shell.into_iter().map(|k| (k, n as f64)));
        }
        ModeTable { dim, kmax, modes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.modes.iter().map(|(k, _)| k.as_slice())
    }

    /// (worst margin, index of the witness)
    fn worst(&self, w: &[f64], tau: f64) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0usize);
        let mut cached_n = 0.0;
        let mut cached_pow = 1.0;
        for (i, (k, n)) in self.modes.iter().enumerate() {
            if *n != cached_n {
                cached_n = *n;
                cached_pow = libm::pow(*n, tau);
            }
            let m = libm::fabs(dot(k, w)) * cached_pow;
            if m < best.0 {
                best = (m, i);
            }
        }
        best
    }

    pub fn margin(&self, w: &[f64], tau: f64) -> f64 {
        self.worst(w, tau).0
    }

    pub fn check(&self, w: &[f64], p: &DiophParams) -> DcReport {
        let (m, i) = self.worst(w, p.tau);
        DcReport {
            is_dc: m >= p.gamma,
            worst_k: self.modes.get(i).map(|(k, _)| k.clone()).unwrap_or_default(),
            worst_margin: m,
            kmax: self.kmax,
        }
    }
}

fn shell_rec(cur: &mut Vec<i64>, pos: usize, left: i64, out: &mut Vec<Vec<i64>>) {
    let d = cur.len();
    if pos == d {
        if left == 0 && cur.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
            out.push(cur.clone());
        }
        return;
    }
    if pos == d - 1 {
        for v in [left, -left] {
            cur[pos] = v;
            shell_rec(cur, pos + 1, 0, out);
            if left == 0 {
                break;
            }
        }
        cur[pos] = 0;
        return;
    }
    for a in 0..=left {
        for v in [a, -a] {
            cur[pos] = v;
            shell_rec(cur, pos + 1, left - a, out);
            if a == 0 {
                break;
            }
        }
    }
    cur[pos] = 0;
}

/// Exhaustive scan of 0 < |k|₁ ≤ kmax.
pub fn dc_check(w: &[f64], p: &DiophParams, kmax: usize) -> DcReport {
    ModeTable::new(w.len(), kmax).check(w, p)
}

/// min over 0 < |k|₁ ≤ kmax of |⟨k,w⟩|·|k|₁^τ.
pub fn dc_constant(w: &[f64], tau: f64, kmax: usize) -> f64 {
    ModeTable::new(w.len(), kmax).margin(w, tau)
}

/// Generator for sample `index` of the stream keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Point `index` of a deterministic uniform sample of the ball
/// |z − center| < radius (rejection from the enclosing cube).
pub fn ball_sample(center: &[f64], radius: f64, seed: u64, index: u64) -> Vec<f64> {
    let d = center.len();
    let mut rng = substream(seed, index);
    loop {
        let z: Vec<f64> = (0..d).map(|_| 2.0 * uniform01(&mut rng) - 1.0).collect();
        let r2: f64 = z.iter().map(|v| v * v).sum();
        if r2 < 1.0 {
            return center.iter().zip(z).map(|(c, v)| c + radius * v).collect();
        }
    }
}

/// Fraction of `n` ball samples that pass `dc_check`.
pub fn sample_dc_fraction(
    center: &[f64],
    radius: f64,
    p: &DiophParams,
    kmax: usize,
    n: usize,
    seed: u64,
) -> f64 {
    let table = ModeTable::new(center.len(), kmax);
    let hits = (0..n as u64)
        .filter(|&i| table.margin(&ball_sample(center, radius, seed, i), p.tau) >= p.gamma)
        .count();
    hits as f64 / n.max(1) as f64
}
