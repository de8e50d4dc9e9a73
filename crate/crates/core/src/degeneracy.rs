//! Degeneracy of the normal-form frequency map f_F(μ) = ω₀ + Σ d_α μ^α.
//!
//! Everything here works on the truncated coefficient table; reports carry
//! the truncation order since the true answer concerns the full series.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::bnf::DTable;
use crate::error::{Error, Result};
use crate::series::{monomials, DomainSpec, FtSeries, MultiIndex, TrigPoly};
use crate::system::ReversibleSystem;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_RTOL: f64 = 1e-10;
/// Tolerance of the symmetry comparison.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Largest accepted residual of the proportional fit.
pub const PROPORTIONAL_TOL: f64 = 1e-10;

/// One failed comparison (β_l+1)·d_{β+e_l}[i] = (β_i+1)·d_{β+e_i}[l].
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryViolation {
    pub beta: MultiIndex,
    pub i: usize,
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegReport {
    pub j: usize,
    pub kernel_basis: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub symmetry_ok: bool,
    pub violations: Vec<SymmetryViolation>,
    /// Largest |α| in the table the decision was made on.
    pub truncation: usize,
}

fn table_dim(table: &DTable, omega0: &[f64]) -> usize {
    table.values().next().map_or(omega0.len(), Vec::len)
}

/// Null space of the rows {ω₀ᵀ} ∪ {d_αᵀ}: the directions γ with
/// ⟨f_F(μ), γ⟩ ≡ 0 on the truncated table.
pub fn classify_degeneracy(table: &DTable, omega0: &[f64]) -> DegReport {
    let d = table_dim(table, omega0);
    let mut rows: Vec<&[f64]> = vec![omega0];
    rows.extend(table.values().map(Vec::as_slice));
    // pad to at least d rows so that the SVD returns a full right basis
    let m = rows.len().max(d);
    let a = DMatrix::from_fn(m, d, |r, c| rows.get(r).map_or(0.0, |row| row[c]));
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let cut = RANK_RTOL * smax;
    let null: Vec<Vec<f64>> = (0..d)
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect();
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    let (symmetry_ok, violations) = check_symmetry_condition(table);
    DegReport {
        j: null.len(),
        kernel_basis: canonical_basis(&null, d),
        singular_values,
        symmetry_ok,
        violations,
        truncation: table.keys().map(MultiIndex::degree).max().unwrap_or(0),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Projects e₁, e₂, … onto span(null) and orthonormalizes in that order, so
/// the basis depends only on the subspace.
fn canonical_basis(null: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        if basis.len() == null.len() {
            break;
        }
        let mut v = vec![0.0; d];
        for n in null {
            let c = n[i];
            for (vk, nk) in v.iter_mut().zip(n) {
                *vk += c * nk;
            }
        }
        for b in &basis {
            let c = dot(&v, b);
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= c * bk;
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Checks ∂_l (f_F)_i ≡ ∂_i (f_F)_l coefficientwise. Pairs i < l are scanned
/// in order and, within a pair, β by degree; the first entry of the list is
/// the first failure in that order.
pub fn check_symmetry_condition(table: &DTable) -> (bool, Vec<SymmetryViolation>) {
    let Some(d) = table.keys().next().map(MultiIndex::len) else {
        return (true, Vec::new());
    };
    let top = table.keys().map(MultiIndex::degree).max().unwrap_or(0);
    let coeff = |a: &MultiIndex, i: usize| table.get(a).map_or(0.0, |v| v[i]);
    let mut violations = Vec::new();
    for i in 0..d {
        for l in i + 1..d {
            for deg in 0..top {
                for beta in monomials(d, deg) {
                    let lhs = (beta.get(l) + 1) as f64 * coeff(&beta.add_unit(l), i);
                    let rhs = (beta.get(i) + 1) as f64 * coeff(&beta.add_unit(i), l);
                    if (lhs - rhs).abs() > SYMMETRY_TOL {
                        violations.push(SymmetryViolation {
                            beta,
                            i,
                            l,
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
    }
    (violations.is_empty(), violations)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransversalityReport {
    pub k: Vec<i64>,
    pub u_k: Vec<f64>,
    pub p: usize,
    /// max_{0≤j≤p} |∂_t^j f_k(t u_k)| at t = 0, f_k = ⟨k/|k|, f_F⟩.
    pub sigma: f64,
    /// The j attaining σ.
    pub order: usize,
}

/// Where to look for the direction u_k.
#[derive(Clone, Debug, PartialEq)]
pub enum DirectionSearch {
    Given(Vec<f64>),
    /// Quasi-uniform mesh of the unit sphere followed by local refinement.
    Mesh { count: usize },
}

impl Default for DirectionSearch {
    fn default() -> Self {
        DirectionSearch::Mesh { count: 512 }
    }
}

/// |∂_t^j f_k(t u)| at t = 0 for j = 0..=p.
pub fn directional_derivatives(table: &DTable, omega0: &[f64], khat: &[f64], u: &[f64], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p + 1];
    out[0] = dot(khat, omega0).abs();
    let mut fact = 1.0;
    for (j, slot) in out.iter_mut().enumerate().skip(1) {
        fact *= j as f64;
        let s: f64 = table
            .iter()
            .filter(|(a, _)| a.degree() == j)
            .map(|(a, dv)| dot(khat, dv) * a.monomial(u))
            .sum();
        *slot = (fact * s).abs();
    }
    out
}

fn score(table: &DTable, omega0: &[f64], khat: &[f64], u: &[f64], p: usize) -> (f64, usize) {
    directional_derivatives(table, omega0, khat, u, p)
        .into_iter()
        .enumerate()
        .fold((-1.0, 0), |best, (j, v)| if v > best.0 { (v, j) } else { best })
}

/// Quasi-uniform unit vectors: a circle for d = 2, the Fibonacci sphere for
/// d = 3 and normalized Gaussian-free cube samples otherwise.
pub fn sphere_mesh(d: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(1);
    match d {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * core::f64::consts::PI * i as f64 / count as f64;
                vec![libm::cos(a), libm::sin(a)]
            })
            .collect(),
        3 => {
            let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = libm::sqrt(1.0 - z * z);
                    let a = golden * i as f64;
                    vec![r * libm::cos(a), r * libm::sin(a), z]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::with_capacity(count);
            let mut i = 0u64;
            while out.len() < count {
                let mut rng = crate::dioph::substream(0x5eed, i);
                i += 1;
                let v: Vec<f64> = (0..d).map(|_| 2.0 * crate::dioph::uniform01(&mut rng) - 1.0).collect();
                let n = norm(&v);
                if n > 1e-3 && n <= 1.0 {
                    out.push(v.iter().map(|x| x / n).collect());
                }
            }
            out
        }
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

/// (p, σ)-transversality of f_k = ⟨k/|k|, f_F⟩ in the best direction found.
pub fn transversality(
    table: &DTable,
    omega0: &[f64],
    k: &[i64],
    p: usize,
    search: &DirectionSearch,
) -> Result<TransversalityReport> {
    let d = omega0.len();
    if k.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: k.len(),
        });
    }
    if k.iter().all(|&v| v == 0) {
        return Err(Error::ZeroMode);
    }
    let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
    let khat = normalized(&kf);
    let (u, (sigma, order)) = match search {
        DirectionSearch::Given(u) => {
            if u.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: u.len(),
                });
            }
            let u = normalized(u);
            let s = score(table, omega0, &khat, &u, p);
            (u, s)
        }
        DirectionSearch::Mesh { count } => {
            let mut best = (khat.clone(), score(table, omega0, &khat, &khat, p));
            for u in sphere_mesh(d, *count) {
                let s = score(table, omega0, &khat, &u, p);
                if s.0 > best.1 .0 {
                    best = (u, s);
                }
            }
            refine(table, omega0, &khat, p, best, *count)
        }
    };
    Ok(TransversalityReport {
        k: k.to_vec(),
        u_k: u,
        p,
        sigma,
        order,
    })
}

/// Coordinate pattern search on the sphere with a shrinking step.
fn refine(
    table: &DTable,
    omega0: &[f64],
    khat: &[f64],
    p: usize,
    start: (Vec<f64>, (f64, usize)),
    count: usize,
) -> (Vec<f64>, (f64, usize)) {
    let d = khat.len();
    let (mut u, mut best) = start;
    let mut step = 2.0 / libm::sqrt(count.max(1) as f64);
    while step > 1e-9 {
        let mut improved = false;
        for j in 0..d {
            for sgn in [1.0, -1.0] {
                let mut w = u.clone();
                w[j] += sgn * step;
                let w = normalized(&w);
                let s = score(table, omega0, khat, &w, p);
                if s.0 > best.0 {
                    u = w;
                    best = s;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (u, best)
}

/// Fits f_F(ξ) = μ(⟨ξ,ω₀⟩)·ω₀ degree by degree. Returns μ's coefficients
/// [1, μ₁, μ₂, …] when the worst coefficient residual is within
/// `PROPORTIONAL_TOL`.
pub fn detect_proportional_form(table: &DTable, omega0: &[f64]) -> Option<Vec<f64>> {
    let d = omega0.len();
    let top = table.keys().map(MultiIndex::degree).max().unwrap_or(0);
    let mut mu = vec![1.0];
    let mut worst = 0.0f64;
    for j in 1..=top {
        let targets: Vec<(MultiIndex, Vec<f64>)> = monomials(d, j)
            .into_iter()
            .map(|a| {
                let c = a.multinomial() * a.monomial(omega0);
                let t = omega0.iter().map(|w| c * w).collect();
                (a, t)
            })
            .collect();
        let zero = vec![0.0; d];
        let num: f64 = targets
            .iter()
            .map(|(a, t)| dot(table.get(a).unwrap_or(&zero), t))
            .sum();
        let den: f64 = targets.iter().map(|(_, t)| dot(t, t)).sum();
        let mj = if den > 0.0 { num / den } else { 0.0 };
        for (a, t) in &targets {
            let dv = table.get(a).unwrap_or(&zero);
            for (x, y) in dv.iter().zip(t) {
                worst = worst.max((x - mj * y).abs());
            }
        }
        mu.push(mj);
    }
    (worst <= PROPORTIONAL_TOL).then_some(mu)
}

/// ẋ_i = ω₀ᵢ(1 + |y|²) for i ≤ j + 1, ẋ_i = ω₀ᵢ + y_i otherwise, ẏ = 0:
/// already in normal form, j-degenerate, and without the symmetry of the
/// Jacobian of f_F whenever two of the first j + 1 frequencies differ.
pub fn degenerate_example(omega0: Vec<f64>, j: usize) -> Result<ReversibleSystem> {
    let d = omega0.len();
    if j == 0 || j >= d {
        return Err(Error::InvalidParameter("degenerate example needs 1 <= j <= d - 1"));
    }
    let mut f = Vec::with_capacity(d);
    for (i, w) in omega0.iter().enumerate() {
        let mut fi = FtSeries::zero(d, d);
        if i <= j {
            for l in 0..d {
                fi.insert(MultiIndex::unit(d, l).add_unit(l), TrigPoly::constant(d, *w));
            }
        } else {
            fi.insert(MultiIndex::unit(d, i), TrigPoly::constant(d, 1.0));
        }
        f.push(fi);
    }
    ReversibleSystem::new(omega0, f, crate::series::field::zeros(d, d, d), DomainSpec::default())
}
