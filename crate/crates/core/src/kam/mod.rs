//! Counterterm KAM iteration at sampled parameter points, the frequency map
//! η(ξ) and Monte-Carlo measure scans.

mod counterterm;
mod freq;
mod lambda;

pub use counterterm::{counterterm, solve_gamma, CountertermResult};
pub use freq::{freq_map, measure_scan, slab_fraction, slab_scan, FreqPoint, MeasureRow, MeasureScan, SlabCheck, NEWTON_TOL};
pub use lambda::{DirectKam, GridLambda, GridSpec, LambdaEval, PolyLambda, ZeroLambda};

use alloc::vec;
use alloc::vec::Vec;

use crate::bnf::{ParamSystem, StepMode, TransformStep};
use crate::dioph::DiophParams;
use crate::error::{Error, Result};
use crate::homological::{degree0, flat_project_mat, flat_project_vec, linear_part, solve_l_vec, solve_triplet, EtaPoint, ParamGrid};
use crate::series::{compose_many, field, invert_near_identity, Ctx, FtSeries, InvertMode, MultiIndex, TaylorOrder};

/// Largest acceptable |(f₀ − f₁·L g₀)^(0)| after a step.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Measured ε below which a non-decreasing step is treated as round-off
/// rather than a failure to contract.
pub const CONTRACTION_FLOOR: f64 = 1e-13;

/// Shrinking radii and the target law ε_m = ε₀^{(4/3)^m}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub s0: f64,
    pub r0: f64,
    pub eps0: f64,
}

impl Schedule {
    /// s₀ = s/2, r₀ = a, ε₀ = a^{N+1}.
    pub fn new(s: f64, a: f64, order: usize) -> Schedule {
        Schedule {
            s0: s / 2.0,
            r0: a,
            eps0: libm::pow(a, order as f64 + 1.0),
        }
    }

    /// e_m = Σ_{l≤m} l⁻² / (2 Σ_{l≥1} l⁻²)
    pub fn e(&self, m: usize) -> f64 {
        let partial: f64 = (1..=m).map(|l| 1.0 / (l * l) as f64).sum();
        partial / (2.0 * core::f64::consts::PI * core::f64::consts::PI / 6.0)
    }

    pub fn s(&self, m: usize) -> f64 {
        self.s0 * (1.0 - self.e(m))
    }

    pub fn r(&self, m: usize) -> f64 {
        self.r0 * (1.0 - self.e(m))
    }

    pub fn eps(&self, m: usize) -> f64 {
        libm::pow(self.eps0, libm::pow(4.0 / 3.0, m as f64))
    }
}

/// Everything a step needs besides the state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KamConfig {
    pub params: DiophParams,
    pub kmax: usize,
    /// Joint y-degree budget of the point series.
    pub ymax: usize,
    pub schedule: Schedule,
    pub invert_tol: f64,
}

impl KamConfig {
    pub fn new(params: DiophParams, kmax: usize, ymax: usize, schedule: Schedule) -> KamConfig {
        KamConfig {
            params,
            kmax,
            ymax,
            schedule,
            invert_tol: 1e-15,
        }
    }
}

/// Stage data at one (ξ, η):
///
/// ẋ = η + h·(ω₀ − η + Λ) + F + R₁,  ẏ = H·(ω₀ − η + Λ) + G + R₂
///
/// with F = f₀ + Σ f_α y^α, G = g₀ + g₁y + Σ g_β y^β and Λ = Λ₀₀(ξ) + Λ̄.
#[derive(Clone, Debug, PartialEq)]
pub struct PointState {
    pub xi: Vec<f64>,
    pub eta: EtaPoint,
    pub lambda00: Vec<f64>,
    pub lambda_bar: Vec<f64>,
    /// d×d, y-independent; the sum Σ_j h_(j,m) including the identity.
    pub h: Vec<Vec<FtSeries>>,
    /// d×d over (x, y).
    pub big_h: Vec<Vec<FtSeries>>,
    pub f: Vec<FtSeries>,
    pub g: Vec<FtSeries>,
    pub r1: Vec<FtSeries>,
    pub r2: Vec<FtSeries>,
    /// Maps Φ_1, …, Φ_m, with new = (x + u, y + v + w y).
    pub chain: Vec<TransformStep>,
    /// Measured max majorant of (f₀, g₀, g₁).
    pub eps: f64,
}

/// Parity of every stage component, checked exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityLedger {
    pub h_even: bool,
    pub big_h_odd: bool,
    pub f_even: bool,
    pub g_odd: bool,
    pub r1_even: bool,
    pub r2_odd: bool,
    pub maps_ok: bool,
}

impl ParityLedger {
    pub fn all(&self) -> bool {
        self.h_even && self.big_h_odd && self.f_even && self.g_odd && self.r1_even && self.r2_odd && self.maps_ok
    }
}

impl PointState {
    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.lambda00.iter().zip(&self.lambda_bar).map(|(a, b)| a + b).collect()
    }

    /// ω₀ − η + Λ
    pub fn drift(&self, omega0: &[f64]) -> Vec<f64> {
        let lam = self.lambda();
        (0..self.dim())
            .map(|i| omega0[i] - self.eta.as_slice()[i] + lam[i])
            .collect()
    }

    pub fn f0(&self) -> Vec<FtSeries> {
        degree0(&self.f)
    }

    pub fn g0(&self) -> Vec<FtSeries> {
        degree0(&self.g)
    }

    pub fn g1(&self) -> Vec<Vec<FtSeries>> {
        linear_part(&self.g)
    }

    /// max of the (f₀, g₀, g₁) majorants at strip width `s`.
    pub fn small_norm(&self, s: f64) -> f64 {
        let mut worst = 0.0f64;
        for c in self.f0().iter().chain(&self.g0()) {
            worst = worst.max(c.maj(s, 1.0));
        }
        for row in self.g1() {
            for c in &row {
                worst = worst.max(c.maj(s, 1.0));
            }
        }
        worst
    }

    /// |(f₀ − f₁·L g₀)^(0)|∞
    pub fn normalization_residual(&self, p: &DiophParams, ctx: &Ctx) -> Result<f64> {
        let m = normalization_vector(&self.f, &self.g, p, &self.eta, ctx)?;
        Ok(m.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    }

    pub fn parity(&self) -> ParityLedger {
        ParityLedger {
            h_even: field::mat_is_even(&self.h),
            big_h_odd: field::mat_is_odd(&self.big_h),
            f_even: field::is_even(&self.f),
            g_odd: field::is_odd(&self.g),
            r1_even: field::is_even(&self.r1),
            r2_odd: field::is_odd(&self.r2),
            maps_ok: self.chain.iter().all(TransformStep::parity_ok),
        }
    }

    /// True when every stored R₁, R₂ coefficient is exactly zero.
    pub fn remainders_vanish(&self) -> bool {
        self.r1
            .iter()
            .chain(&self.r2)
            .all(|s| s.terms().all(|(_, c)| c.is_zero()))
    }

    /// Point-system coordinates of the stage-m point (θ, ρ).
    pub fn to_stage0(&self, theta: &[f64], rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut x = theta.to_vec();
        let mut y = rho.to_vec();
        for step in self.chain.iter().rev() {
            (x, y) = step.to_old(&x, &y);
        }
        (x, y)
    }
}

fn mean_of_product(a: &FtSeries, b: &FtSeries, ctx: &Ctx) -> f64 {
    a.mul(b, ctx).coefficient(&MultiIndex::zero(a.action_dim())).mean()
}

fn series_mean(a: &FtSeries) -> f64 {
    a.coefficient(&MultiIndex::zero(a.action_dim())).mean()
}

/// (f₀ − f₁·L g₀)^(0), one entry per component.
fn normalization_vector(f: &[FtSeries], g: &[FtSeries], p: &DiophParams, eta: &EtaPoint, ctx: &Ctx) -> Result<Vec<f64>> {
    let f0 = degree0(f);
    let f1 = linear_part(f);
    let lg = solve_l_vec(&degree0(g), p, eta)?;
    Ok((0..f.len())
        .map(|i| {
            let mut m = series_mean(&f0[i]);
            for (j, lj) in lg.iter().enumerate() {
                m -= mean_of_product(&f1[i][j], lj, ctx);
            }
            m
        })
        .collect())
}

/// The KAM stage over all grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct KamState {
    pub stage: usize,
    pub omega0: Vec<f64>,
    pub config: KamConfig,
    pub points: Vec<PointState>,
    /// max measured ε over the points, one entry per stage so far.
    pub trace: Vec<f64>,
    /// Accumulated truncation floor.
    pub floor: f64,
}

impl KamState {
    pub fn eps(&self) -> f64 {
        self.points.iter().map(|p| p.eps).fold(0.0, f64::max)
    }

    pub fn parity_ok(&self) -> bool {
        self.points.iter().all(|p| p.parity().all())
    }

    pub fn normalization_residual(&self) -> Result<f64> {
        let ctx = Ctx::new(self.config.kmax, self.config.ymax);
        let mut worst = 0.0f64;
        for p in &self.points {
            worst = worst.max(p.normalization_residual(&self.config.params, &ctx)?);
        }
        Ok(worst)
    }
}

/// Stage-0 data: v₁ = L g₀, Λ̄₀ = (f₀ − f₁·L g₀)^(0), f₀ ← f₀ − Λ̄₀,
/// h = 1, H = 0, R = 0.
pub fn init_stage0(ps: &ParamSystem, grid: &ParamGrid, config: KamConfig) -> Result<KamState> {
    let d = ps.dim();
    config.params.check_dim(d).or_else(|e| if d == 1 { Ok(()) } else { Err(e) })?;
    let ctx = Ctx::new(config.kmax, config.ymax);
    let mut points = Vec::new();
    for (xi, eta) in grid.points() {
        let (f, g) = ps.at(xi);
        let f: Vec<FtSeries> = f.iter().map(|s| s.truncated(config.ymax).truncate_modes(&ctx)).collect();
        let g: Vec<FtSeries> = g.iter().map(|s| s.truncated(config.ymax).truncate_modes(&ctx)).collect();
        let lambda_bar = normalization_vector(&f, &g, &config.params, eta, &ctx)?;
        let f = field::sub(&f, &field::constants(&lambda_bar, d, d));
        let mut pt = PointState {
            xi: xi.to_vec(),
            eta: eta.clone(),
            lambda00: ps.lambda00_at(xi),
            lambda_bar,
            h: field::identity(d, d, d),
            big_h: field::zero_matrix(d, d, d),
            f,
            g,
            r1: field::zeros(d, d, d),
            r2: field::zeros(d, d, d),
            chain: Vec::new(),
            eps: 0.0,
        };
        pt.eps = pt.small_norm(config.schedule.s(0));
        points.push(pt);
    }
    let mut state = KamState {
        stage: 0,
        omega0: ps.omega0.clone(),
        config,
        points,
        trace: Vec::new(),
        floor: ctx.floor(),
    };
    state.trace.push(state.eps());
    Ok(state)
}

/// Per-point diagnostics of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub counterterm: CountertermResult,
    pub triplet_residual: f64,
    pub normalization: f64,
}

fn flatten(groups: &[&[FtSeries]]) -> Vec<FtSeries> {
    groups.iter().flat_map(|g| g.iter().cloned()).collect()
}

fn take_matrix(it: &mut impl Iterator<Item = FtSeries>, d: usize) -> Vec<Vec<FtSeries>> {
    (0..d).map(|_| it.by_ref().take(d).collect()).collect()
}

/// y-linear vector Σ_j m[i][j] y_j from a y-independent matrix.
fn times_y(m: &[Vec<FtSeries>]) -> Vec<FtSeries> {
    m.iter()
        .map(|row| {
            let n = row[0].action_dim();
            let mut acc = FtSeries::zero(row[0].angle_dim(), n);
            for (j, c) in row.iter().enumerate() {
                acc.add_assign(&c.shift_degree(&MultiIndex::unit(n, j)));
            }
            acc
        })
        .collect()
}

/// One step at one point: solve the triplet, transport the field through
/// Φ = (x + u, y + v + w y), compose with Ψ = Φ⁻¹ and add the counterterm.
pub fn step_point(
    pt: &PointState,
    config: &KamConfig,
    stage: usize,
    ctx: &Ctx,
) -> Result<(PointState, StepDiagnostics)> {
    let d = pt.dim();
    let p = &config.params;
    let eta = &pt.eta;
    let tr = solve_triplet(&pt.f, &pt.g, p, eta, ctx)?;
    let triplet_residual = crate::homological::triplet_residual(&tr, &pt.g, p, eta);
    let w_times_y = times_y(&tr.w);
    let v_full = field::add(&tr.v, &w_times_y);
    let (inv_u, inv_v) = invert_near_identity(
        &tr.u,
        &v_full,
        InvertMode::Small {
            tol: config.invert_tol,
            max_iter: 80,
        },
        ctx,
    )?;

    let ju = field::jacobian_x(&tr.u);
    let jv = field::jacobian_x(&v_full);
    let w = &tr.w;
    let g0 = degree0(&pt.g);
    let pf = flat_project_vec(&tr.rhs_u, p, eta);
    let pg0 = flat_project_vec(&g0, p, eta);
    let pw_y = times_y(&flat_project_mat(&tr.rhs_w, p, eta));

    // θ̇ pieces, old variables
    let h_t = field::mat_add(&pt.h, &field::mat_mat(&ju, &pt.h, ctx));
    let r1_t = field::add(&field::add(&pt.r1, &field::mat_vec(&ju, &pt.r1, ctx)), &pf);
    let u_eta: Vec<FtSeries> = tr.u.iter().map(|s| s.dx(eta.as_slice())).collect();
    let f_t = field::sub(
        &field::add(&field::add(&pt.f, &field::mat_vec(&ju, &pt.f, ctx)), &u_eta),
        &pf,
    );
    // ρ̇ pieces: (1 + w)·ẏ + ∂_x(v + w y)·ẋ
    let big_h_t = field::mat_add(
        &field::mat_add(&pt.big_h, &field::mat_mat(w, &pt.big_h, ctx)),
        &field::mat_mat(&jv, &pt.h, ctx),
    );
    let r2_t = field::add(
        &field::add(
            &field::add(&pt.r2, &field::mat_vec(w, &pt.r2, ctx)),
            &field::mat_vec(&jv, &pt.r1, ctx),
        ),
        &field::add(&pg0, &pw_y),
    );
    let g_t = field::sub(
        &field::add(
            &field::add(&pt.g, &field::mat_vec(w, &pt.g, ctx)),
            &field::add(&field::mat_vec(&jv, &pt.f, ctx), &field::mat_const_vec(&jv, eta.as_slice())),
        ),
        &field::add(&pg0, &pw_y),
    );

    // into the new variables
    let subst: Vec<FtSeries> = (0..d)
        .map(|j| inv_v[j].add(&FtSeries::variable(d, d, j)))
        .collect();
    let h_flat: Vec<FtSeries> = h_t.iter().flatten().cloned().collect();
    let bh_flat: Vec<FtSeries> = big_h_t.iter().flatten().cloned().collect();
    let all = flatten(&[&h_flat, &bh_flat, &f_t, &g_t, &r1_t, &r2_t]);
    let order = TaylorOrder::Auto { tol: 1e-18, max: 40 };
    let comp = compose_many(&all, &inv_u, &subst, order, ctx)?;
    let mut it = comp.into_iter().map(|s| s.truncate_modes(ctx));
    let h_new = take_matrix(&mut it, d);
    let big_h_new = take_matrix(&mut it, d);
    let f_tilde: Vec<FtSeries> = it.by_ref().take(d).collect();
    let g_tilde: Vec<FtSeries> = it.by_ref().take(d).collect();
    let r1_new: Vec<FtSeries> = it.by_ref().take(d).collect();
    let r2_new: Vec<FtSeries> = it.by_ref().take(d).collect();

    let ct = counterterm(&h_new, &big_h_new, &f_tilde, &g_tilde, p, eta, ctx)?;
    let f_new = field::sub(&f_tilde, &field::mat_const_vec(&h_new, &ct.gamma));
    let g_new = field::sub(&g_tilde, &field::mat_const_vec(&big_h_new, &ct.gamma));
    let lambda_bar: Vec<f64> = pt.lambda_bar.iter().zip(&ct.gamma).map(|(a, b)| a + b).collect();

    let mut chain = pt.chain.clone();
    chain.push(TransformStep {
        stage: stage + 1,
        mode: StepMode::Kam,
        u: tr.u.clone(),
        v: v_full,
        inv_u,
        inv_v,
    });
    let mut next = PointState {
        xi: pt.xi.clone(),
        eta: pt.eta.clone(),
        lambda00: pt.lambda00.clone(),
        lambda_bar,
        h: h_new,
        big_h: big_h_new,
        f: f_new,
        g: g_new,
        r1: r1_new,
        r2: r2_new,
        chain,
        eps: 0.0,
    };
    next.eps = next.small_norm(config.schedule.s(stage + 1));
    let normalization = next.normalization_residual(p, ctx)?;
    if normalization > NORMALIZATION_TOL {
        return Err(Error::Normalization { residual: normalization });
    }
    Ok((
        next,
        StepDiagnostics {
            counterterm: ct,
            triplet_residual,
            normalization,
        },
    ))
}

/// Aggregated diagnostics of one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageLog {
    pub stage: usize,
    pub eps: f64,
    pub eps_schedule: f64,
    pub gamma_max: f64,
    pub counterterm_residual: f64,
    pub triplet_residual: f64,
    pub normalization: f64,
    pub floor: f64,
}

/// Advances every grid point by one stage.
pub fn kam_step(state: &KamState) -> Result<(KamState, StageLog)> {
    let ctx = Ctx::new(state.config.kmax, state.config.ymax);
    let mut points = Vec::with_capacity(state.points.len());
    let mut log = StageLog {
        stage: state.stage + 1,
        eps: 0.0,
        eps_schedule: state.config.schedule.eps(state.stage + 1),
        gamma_max: 0.0,
        counterterm_residual: 0.0,
        triplet_residual: 0.0,
        normalization: 0.0,
        floor: 0.0,
    };
    let mut trace = state.trace.clone();
    for pt in &state.points {
        let (next, diag) = step_point(pt, &state.config, state.stage, &ctx)?;
        if next.eps >= pt.eps && next.eps > CONTRACTION_FLOOR {
            trace.push(next.eps);
            return Err(Error::NonContraction {
                stage: state.stage + 1,
                trace,
            });
        }
        log.gamma_max = log.gamma_max.max(diag.counterterm.gamma.iter().fold(0.0, |a, v| a.max(v.abs())));
        log.counterterm_residual = log.counterterm_residual.max(diag.counterterm.residual);
        log.triplet_residual = log.triplet_residual.max(diag.triplet_residual);
        log.normalization = log.normalization.max(diag.normalization);
        points.push(next);
    }
    let mut next = KamState {
        stage: state.stage + 1,
        omega0: state.omega0.clone(),
        config: state.config,
        points,
        trace,
        floor: state.floor + ctx.floor(),
    };
    log.eps = next.eps();
    log.floor = next.floor;
    next.trace.push(log.eps);
    Ok((next, log))
}

/// Result of `run_iteration`.
#[derive(Clone, Debug, PartialEq)]
pub struct KamRun {
    pub state: KamState,
    pub log: Vec<StageLog>,
}

impl KamRun {
    /// Λ̄ at every grid point, in grid order.
    pub fn lambda_bar(&self) -> Vec<Vec<f64>> {
        self.state.points.iter().map(|p| p.lambda_bar.clone()).collect()
    }
}

/// Steps until `m_max` stages or until the measured ε drops below
/// `target_floor`.
pub fn run_iteration(state0: KamState, m_max: usize, target_floor: f64) -> Result<KamRun> {
    if m_max == 0 {
        return Err(Error::InvalidParameter("m_max must be at least 1"));
    }
    let mut state = state0;
    let mut log = Vec::new();
    while state.stage < m_max && state.eps() >= target_floor {
        let (next, entry) = kam_step(&state)?;
        state = next;
        log.push(entry);
    }
    Ok(KamRun { state, log })
}

/// Fitted exponent q of ε_{m+1} ≈ C ε_m^q: the slope of ln ln(1/ε) against
/// the stage, exponentiated. Entries at or above 1 are skipped.
pub fn contraction_exponent(trace: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0.0 && **e < 1.0)
        .map(|(m, e)| (m as f64, libm::log(-libm::log(*e))))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(libm::exp(sxy / sxx))
}

/// A single-point grid, for direct evaluation of Λ at (ξ, η).
pub fn single_point(xi: &[f64], eta: &[f64]) -> ParamGrid {
    ParamGrid {
        xi_samples: vec![xi.to_vec()],
        eta_samples: vec![EtaPoint::new(eta.to_vec())],
    }
}

#[cfg(test)]
mod tests;
