//! Degree-by-degree Birkhoff normal form, the parameter shift μ = ξ + y and
//! an independent expansion of the frequency map Ω(ξ).

mod omega;
mod param;

pub use omega::{omega_expand, OmegaTable};
pub use param::{introduce_parameter, ParamSystem};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dioph::dot;
use crate::error::{Error, Result};
use crate::series::{
    compose_many, field, invert_near_identity, monomials, Ctx, FtSeries, InvertMode, MultiIndex, TaylorOrder,
    TrigPoly,
};
use crate::system::ReversibleSystem;

/// Divisors |⟨k,ω₀⟩| below this abort the Fourier division.
pub const DIVISOR_FLOOR: f64 = 1e-12;

/// α ↦ d_α (one entry per ẋ component).
pub type DTable = BTreeMap<MultiIndex, Vec<f64>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    Bnf,
    Kam,
}

/// One near-identity change of variables.
///
/// New coordinates are `(x + u, y + v)` evaluated at the old ones (x, y);
/// the old ones are `(θ + inv_u, ρ + inv_v)` evaluated at the new (θ, ρ).
#[derive(Clone, Debug, PartialEq)]
pub struct TransformStep {
    pub stage: usize,
    pub mode: StepMode,
    pub u: Vec<FtSeries>,
    pub v: Vec<FtSeries>,
    pub inv_u: Vec<FtSeries>,
    pub inv_v: Vec<FtSeries>,
}

fn shifted(base: &[f64], by: &[FtSeries], x: &[f64], y: &[f64]) -> Vec<f64> {
    base.iter().zip(by).map(|(b, s)| b + s.eval(x, y)).collect()
}

impl TransformStep {
    /// Old coordinates of the point with new coordinates (θ, ρ).
    pub fn to_old(&self, theta: &[f64], rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (shifted(theta, &self.inv_u, theta, rho), shifted(rho, &self.inv_v, theta, rho))
    }

    /// New coordinates of the point with old coordinates (x, y).
    pub fn to_new(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (shifted(x, &self.u, x, y), shifted(y, &self.v, x, y))
    }

    pub fn is_identity(&self) -> bool {
        self.u.iter().chain(&self.v).all(FtSeries::is_zero)
    }

    /// u odd and v even.
    pub fn parity_ok(&self) -> bool {
        field::is_odd(&self.u) && field::is_even(&self.v)
    }
}

/// q with ω·∂_x q = p − mean(p) and zero mean.
pub fn divide_by_frequency(p: &TrigPoly, omega: &[f64]) -> Result<TrigPoly> {
    let mut failure = None;
    let q = p.map_modes(|k, c| {
        if k.iter().all(|&v| v == 0) || (c.re == 0.0 && c.im == 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let t = dot(k, omega);
        if t.abs() < DIVISOR_FLOOR {
            failure.get_or_insert(Error::SmallDivisor {
                k: k.to_vec(),
                divisor: t,
            });
            return Complex64::new(0.0, 0.0);
        }
        // ĉ/(i t)
        Complex64::new(c.im / t, -c.re / t)
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(q),
    }
}

fn divide_series(p: &FtSeries, omega: &[f64]) -> Result<FtSeries> {
    let mut out = FtSeries::zero(p.angle_dim(), p.action_dim());
    for (a, c) in p.terms() {
        out.insert(a.clone(), divide_by_frequency(c, omega)?);
    }
    Ok(out)
}

/// Z-component of the field after x ↦ x + u or y ↦ y + v, still in the old
/// variables: `base + ∂_x Z·(ω + F) + ∂_y Z·G`.
fn transported(
    z: &[FtSeries],
    base: &[FtSeries],
    omega: &[f64],
    f: &[FtSeries],
    g: &[FtSeries],
    ctx: &Ctx,
) -> Vec<FtSeries> {
    z.iter()
        .zip(base)
        .map(|(zi, bi)| {
            let mut out = bi.add(&zi.dx(omega));
            for j in 0..omega.len() {
                let dxj = zi.dx_axis(j);
                if !dxj.is_zero() {
                    out.add_assign(&dxj.mul(&f[j], ctx));
                }
                let dyj = zi.dy(j);
                if !dyj.is_zero() {
                    out.add_assign(&dyj.mul(&g[j], ctx));
                }
            }
            out
        })
        .collect()
}

/// A system after m normal-form steps together with the accumulated change
/// back to the original variables: old = (θ + back_u, ρ + back_v).
#[derive(Clone, Debug, PartialEq)]
pub struct BnfStage {
    pub m: usize,
    pub system: ReversibleSystem,
    pub back_u: Vec<FtSeries>,
    pub back_v: Vec<FtSeries>,
}

impl BnfStage {
    pub fn start(system: ReversibleSystem) -> BnfStage {
        let d = system.dim();
        BnfStage {
            m: 0,
            system,
            back_u: field::zeros(d, d, d),
            back_v: field::zeros(d, d, d),
        }
    }
}

/// One normal-form step from stage m: removes the angle dependence of the
/// ẋ-coefficients of degree m + 1 and the ẏ-coefficients of degree m + 2.
///
/// The change is θ = x + u(x)y^{m+1}, ρ = y + v(x)y^{m+2} with
/// f_α + ω₀·∂u = mean f_α and g_β + ω₀·∂v = 0. The constant part of v is
/// the free constant of the second equation; it is fixed so that the
/// accumulated change back to the original variables keeps
/// y − ρ of zero angle mean, which is what makes d_α independent of the
/// route taken to the normal form.
pub fn bnf_step(stage: &BnfStage, ctx: &Ctx) -> Result<(BnfStage, TransformStep, DTable)> {
    let sys = &stage.system;
    let m = stage.m;
    let d = sys.dim();
    let omega = sys.omega0();
    if m + 2 > ctx.ymax() {
        return Err(Error::TruncationOverflow {
            order: m + 1,
            ymax: ctx.ymax(),
        });
    }
    let (f, g) = (sys.f(), sys.g());
    let mut table = DTable::new();
    let mut u = field::zeros(d, d, d);
    for alpha in monomials(d, m + 1) {
        let mut means = vec![0.0; d];
        for (i, fi) in f.iter().enumerate() {
            let Some(c) = fi.term(&alpha) else { continue };
            means[i] = c.mean();
            let q = divide_by_frequency(c, omega)?;
            if !q.is_zero() {
                u[i].insert(alpha.clone(), q.neg());
            }
        }
        table.insert(alpha, means);
    }
    let mut v = field::zeros(d, d, d);
    for beta in monomials(d, m + 2) {
        for i in 0..d {
            let mut q = match g[i].term(&beta) {
                Some(c) => divide_by_frequency(c, omega)?.neg(),
                None => TrigPoly::zero(d),
            };
            let label = stage.back_v[i].term(&beta).map_or(0.0, TrigPoly::mean);
            if label != 0.0 {
                q = q.add(&TrigPoly::constant(d, label));
            }
            if !q.is_zero() {
                v[i].insert(beta.clone(), q);
            }
        }
    }

    if u.iter().chain(&v).all(FtSeries::is_zero) {
        let step = TransformStep {
            stage: m,
            mode: StepMode::Bnf,
            inv_u: u.clone(),
            inv_v: v.clone(),
            u,
            v,
        };
        let mut next = stage.clone();
        next.m += 1;
        return Ok((next, step, table));
    }

    let a = transported(&u, f, omega, f, g, ctx);
    let b = transported(&v, g, omega, f, g, ctx);
    let (inv_u, inv_v) = invert_near_identity(&u, &v, InvertMode::Formal, ctx)?;
    let subst: Vec<FtSeries> = inv_v
        .iter()
        .enumerate()
        .map(|(j, s)| s.add(&FtSeries::variable(d, d, j)))
        .collect();
    // one composition pass for the new field and the accumulated change
    let mut maps = a;
    maps.extend(b);
    maps.extend_from_slice(&stage.back_u);
    maps.extend_from_slice(&stage.back_v);
    let mut comp = compose_many(&maps, &inv_u, &subst, TaylorOrder::Fixed(ctx.ymax()), ctx)?;
    let back_v = field::add(&inv_v, &comp.split_off(3 * d));
    let back_u = field::add(&inv_u, &comp.split_off(2 * d));
    let new_g = comp.split_off(d);
    let next = BnfStage {
        m: m + 1,
        system: ReversibleSystem::new(omega.to_vec(), comp, new_g, sys.domain())?,
        back_u,
        back_v,
    };
    let step = TransformStep {
        stage: m,
        mode: StepMode::Bnf,
        u,
        v,
        inv_u,
        inv_v,
    };
    Ok((next, step, table))
}

/// Result of N normal-form steps.
#[derive(Clone, Debug)]
pub struct BnfOutput {
    pub order: usize,
    pub omega0: Vec<f64>,
    /// d_α for 1 ≤ |α| ≤ N.
    pub d_table: DTable,
    pub chain: Vec<TransformStep>,
    pub residual: ReversibleSystem,
    /// Original variables in terms of the normal-form ones:
    /// x = θ + back_u(θ, ρ), y = ρ + back_v(θ, ρ).
    pub back_u: Vec<FtSeries>,
    pub back_v: Vec<FtSeries>,
    /// (s'_j, r'_j) for j = 1..N.
    pub schedule: Vec<(f64, f64)>,
    /// Truncation spill accumulated over the run.
    pub floor: f64,
    pub warnings: Vec<String>,
}

/// Defects of the residual system against the normal-form shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualDefect {
    /// max over |α| ≤ N of maj(f_α − mean f_α) / (1 + maj f_α).
    pub x_side: f64,
    /// max over |β| ≤ N + 1 of maj g_β.
    pub y_side: f64,
}

impl BnfOutput {
    /// f_F(μ) = ω₀ + Σ d_α μ^α.
    pub fn frequency_at(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = self.omega0.clone();
        for (alpha, dv) in &self.d_table {
            let w = alpha.monomial(mu);
            for (o, c) in out.iter_mut().zip(dv) {
                *o += c * w;
            }
        }
        out
    }

    pub fn residual_defect(&self) -> ResidualDefect {
        residual_defect(&self.residual, self.order)
    }

    /// Original coordinates of a point given in normal-form coordinates.
    pub fn to_original(&self, theta: &[f64], rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (shifted(theta, &self.back_u, theta, rho), shifted(rho, &self.back_v, theta, rho))
    }
}

pub fn residual_defect(sys: &ReversibleSystem, order: usize) -> ResidualDefect {
    let s = sys.domain().s;
    let mut x_side = 0.0f64;
    for fi in sys.f() {
        for (a, c) in fi.terms() {
            if a.degree() <= order {
                let osc = c.sub(&TrigPoly::constant(c.dim(), c.mean()));
                x_side = x_side.max(osc.maj(s) / (1.0 + c.maj(s)));
            }
        }
    }
    let mut y_side = 0.0f64;
    for gi in sys.g() {
        for (a, c) in gi.terms() {
            if a.degree() <= order + 1 {
                y_side = y_side.max(c.maj(s));
            }
        }
    }
    ResidualDefect { x_side, y_side }
}

/// Runs `order` normal-form steps. Needs `ctx.ymax() ≥ order + 1`.
pub fn bnf_run(sys: &ReversibleSystem, order: usize, ctx: &Ctx) -> Result<BnfOutput> {
    if order == 0 {
        return Err(Error::InvalidParameter("normal-form order must be at least 1"));
    }
    if order + 1 > ctx.ymax() {
        return Err(Error::TruncationOverflow {
            order,
            ymax: ctx.ymax(),
        });
    }
    let d = sys.dim();
    let mut warnings = Vec::new();
    if order <= 10 * d {
        warnings.push(format!(
            "order {order} does not exceed 10d = {}; coefficients are exact but the domain estimates need more",
            10 * d
        ));
    }
    let mut current = BnfStage::start(sys.clone());
    let mut chain = Vec::with_capacity(order);
    let mut d_table = DTable::new();
    for _ in 0..order {
        let (next, step, table) = bnf_step(&current, ctx)?;
        d_table.extend(table);
        chain.push(step);
        current = next;
    }
    let dom = sys.domain();
    let schedule = (1..=order)
        .map(|j| {
            let shrink = 1.0 - j as f64 / (2.0 * order as f64);
            (dom.s * shrink, dom.r * shrink)
        })
        .collect();
    Ok(BnfOutput {
        order,
        omega0: sys.omega0().to_vec(),
        d_table,
        chain,
        residual: current.system,
        back_u: current.back_u,
        back_v: current.back_v,
        schedule,
        floor: ctx.floor(),
        warnings,
    })
}
