//! Reversible vector fields ẋ = ω₀ + f(x,y), ẏ = g(x,y) on T^d × R^d.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use alloc::vec;

use crate::series::{field, monomials_between, DomainSpec, FtSeries, MultiIndex, Parity, TrigPoly, MAX_DIM};

/// The system ẋ = ω₀ + f, ẏ = g with f even and g odd in x, f = O(y) and
/// g = O(y²).
#[derive(Clone, Debug, PartialEq)]
pub struct ReversibleSystem {
    omega0: Vec<f64>,
    f: Vec<FtSeries>,
    g: Vec<FtSeries>,
    domain: DomainSpec,
}

fn check_component(name: &str, i: usize, s: &FtSeries, parity: Parity, order: usize, d: usize) -> Result<()> {
    if s.angle_dim() != d || s.action_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if s.angle_dim() != d { s.angle_dim() } else { s.action_dim() },
        });
    }
    let component = format!("{name}[{i}]");
    if let Some((alpha, k)) = s.parity_witness(parity) {
        return Err(Error::Parity {
            component,
            alpha: alpha.entries(),
            k,
        });
    }
    if let Some((alpha, _)) = s.terms().find(|(a, _)| a.degree() < order) {
        return Err(Error::Order {
            component,
            alpha: alpha.entries(),
            degree: alpha.degree(),
            required: order,
        });
    }
    Ok(())
}

impl ReversibleSystem {
    pub fn new(omega0: Vec<f64>, f: Vec<FtSeries>, g: Vec<FtSeries>, domain: DomainSpec) -> Result<Self> {
        let d = omega0.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        for comp in [&f, &g] {
            if comp.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: comp.len(),
                });
            }
        }
        for (i, fi) in f.iter().enumerate() {
            check_component("f", i, fi, Parity::Even, 1, d)?;
        }
        for (i, gi) in g.iter().enumerate() {
            check_component("g", i, gi, Parity::Odd, 2, d)?;
        }
        Ok(ReversibleSystem { omega0, f, g, domain })
    }

    /// The unperturbed flow ẋ = ω₀, ẏ = 0.
    pub fn linear(omega0: Vec<f64>, domain: DomainSpec) -> Result<Self> {
        let d = omega0.len();
        ReversibleSystem::new(omega0, field::zeros(d, d, d), field::zeros(d, d, d), domain)
    }

    pub fn dim(&self) -> usize {
        self.omega0.len()
    }

    pub fn omega0(&self) -> &[f64] {
        &self.omega0
    }

    pub fn f(&self) -> &[FtSeries] {
        &self.f
    }

    pub fn g(&self) -> &[FtSeries] {
        &self.g
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    /// Largest y-degree present.
    pub fn max_degree(&self) -> usize {
        self.f
            .iter()
            .chain(&self.g)
            .filter_map(FtSeries::max_degree)
            .max()
            .unwrap_or(0)
    }

    /// Largest Fourier radius present.
    pub fn max_radius(&self) -> usize {
        self.f
            .iter()
            .chain(&self.g)
            .flat_map(|s| s.terms().map(|(_, p)| p.radius()))
            .max()
            .unwrap_or(0)
    }

    /// (ẋ, ẏ) at a real point.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let xd = self
            .omega0
            .iter()
            .zip(&self.f)
            .map(|(w, fi)| w + fi.eval(x, y))
            .collect();
        (xd, field::eval(&self.g, x, y))
    }
}

/// Shape of a randomly drawn reversible system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub dim: usize,
    /// Largest y-degree of f and g.
    pub degree: usize,
    /// Largest |k|∞ of the Fourier modes.
    pub radius: usize,
    /// Coefficients are uniform in (−amp, amp), damped by e^{−|k|₁}.
    pub amp: f64,
}

/// Deterministic random reversible system: cosine modes in f, sine modes in
/// g, every coefficient present.
pub fn random_system(omega0: Vec<f64>, spec: RandomSpec, seed: u64) -> Result<ReversibleSystem> {
    let d = spec.dim;
    if omega0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: omega0.len(),
        });
    }
    let mut rng = crate::dioph::substream(seed, 0);
    let mut draw = |k: &[i64]| {
        let damp = libm::exp(-(k.iter().map(|v| v.unsigned_abs()).sum::<u64>() as f64));
        spec.amp * damp * (2.0 * crate::dioph::uniform01(&mut rng) - 1.0)
    };
    let modes = half_modes(d, spec.radius as i64);
    let mut f = Vec::with_capacity(d);
    let mut g = Vec::with_capacity(d);
    for _ in 0..d {
        let mut fi = FtSeries::zero(d, d);
        for alpha in monomials_between(d, 1, spec.degree) {
            let mut p = TrigPoly::constant(d, draw(&vec![0; d]));
            for k in &modes {
                p = p.add(&TrigPoly::cos_mode(d, k, draw(k)));
            }
            fi.insert(alpha, p);
        }
        f.push(fi);
        let mut gi = FtSeries::zero(d, d);
        for beta in monomials_between(d, 2, spec.degree) {
            let mut p = TrigPoly::zero(d);
            for k in &modes {
                p = p.add(&TrigPoly::sin_mode(d, k, draw(k)));
            }
            gi.insert(beta, p);
        }
        g.push(gi);
    }
    ReversibleSystem::new(omega0, f, g, DomainSpec::default())
}

/// ẋ_i = ω_i + y_i + ε(cos x_i)y_i + ε cos(Σx) y_i², ẏ_i = ε(sin x_i)y_i²: a
/// twist with a reversible perturbation of size ε.
pub fn perturbed_twist(omega0: Vec<f64>, eps: f64, domain: DomainSpec) -> Result<ReversibleSystem> {
    let d = omega0.len();
    let ones = vec![1i64; d];
    let mut f = Vec::with_capacity(d);
    let mut g = Vec::with_capacity(d);
    for i in 0..d {
        let ei = MultiIndex::unit(d, i);
        let mut unit = vec![0i64; d];
        unit[i] = 1;
        let mut fi = FtSeries::monomial(
            ei.clone(),
            TrigPoly::constant(d, 1.0).add(&TrigPoly::cos_mode(d, &unit, eps)),
        );
        fi.add_term(ei.add(&ei), &TrigPoly::cos_mode(d, &ones, eps));
        f.push(fi);
        g.push(FtSeries::monomial(ei.add(&ei), TrigPoly::sin_mode(d, &unit, eps)));
    }
    ReversibleSystem::new(omega0, f, g, domain)
}

/// One representative of each ±k pair with 0 < |k|∞ ≤ radius.
fn half_modes(d: usize, radius: i64) -> Vec<Vec<i64>> {
    let side = (2 * radius + 1) as usize;
    let mut out = Vec::new();
    for idx in 0..side.pow(d as u32) {
        let mut rem = idx;
        let k: Vec<i64> = (0..d)
            .map(|_| {
                let v = (rem % side) as i64 - radius;
                rem /= side;
                v
            })
            .collect();
        if k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
            out.push(k);
        }
    }
    out
}
