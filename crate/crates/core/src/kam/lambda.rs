use alloc::vec;
use alloc::vec::Vec;

use super::{init_stage0, run_iteration, single_point, KamConfig, KamRun};
use crate::bnf::{DTable, ParamSystem};
use crate::error::{Error, Result};
use crate::homological::{EtaPoint, ParamGrid};

/// Λ(ξ, η) as seen by the frequency map.
pub trait LambdaEval {
    fn dim(&self) -> usize;
    fn eval(&self, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>>;
    /// False lets callers skip the η-Jacobian.
    fn depends_on_eta(&self) -> bool {
        true
    }
}

fn check_len(d: usize, v: &[f64]) -> Result<()> {
    if v.len() == d {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: d, found: v.len() })
    }
}

/// Λ ≡ 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroLambda {
    pub dim: usize,
}

impl LambdaEval for ZeroLambda {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, xi)?;
        check_len(self.dim, eta)?;
        Ok(vec![0.0; self.dim])
    }

    fn depends_on_eta(&self) -> bool {
        false
    }
}

/// Λ = Λ₀₀(ξ) = Σ_{|α|≥1} d_α ξ^α.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyLambda {
    pub dim: usize,
    pub table: DTable,
}

impl PolyLambda {
    /// Drops the α = 0 entry if present.
    pub fn new(dim: usize, table: &DTable) -> PolyLambda {
        let table = table
            .iter()
            .filter(|(a, _)| a.degree() >= 1)
            .map(|(a, v)| (a.clone(), v.clone()))
            .collect();
        PolyLambda { dim, table }
    }

    pub fn value(&self, xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (alpha, dv) in &self.table {
            let m = alpha.monomial(xi);
            for (o, c) in out.iter_mut().zip(dv) {
                *o += c * m;
            }
        }
        out
    }
}

impl LambdaEval for PolyLambda {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, xi)?;
        check_len(self.dim, eta)?;
        Ok(self.value(xi))
    }

    fn depends_on_eta(&self) -> bool {
        false
    }
}

/// Runs the KAM iteration afresh at every requested (ξ, η).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectKam {
    pub ps: ParamSystem,
    pub config: KamConfig,
    pub m_max: usize,
    pub target_floor: f64,
}

impl DirectKam {
    pub fn run(&self, xi: &[f64], eta: &[f64]) -> Result<KamRun> {
        check_len(self.ps.dim(), xi)?;
        check_len(self.ps.dim(), eta)?;
        let state = init_stage0(&self.ps, &single_point(xi, eta), self.config)?;
        run_iteration(state, self.m_max, self.target_floor)
    }
}

impl LambdaEval for DirectKam {
    fn dim(&self) -> usize {
        self.ps.dim()
    }

    fn eval(&self, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
        let run = self.run(xi, eta)?;
        Ok(run.state.points[0].lambda())
    }
}

/// Tensor grid: `nodes` points per axis on ξ ∈ [−xi_half, xi_half]^d and
/// η ∈ ω₀ + [−eta_half, eta_half]^d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nodes: usize,
    pub xi_half: f64,
    pub eta_half: f64,
}

impl GridSpec {
    fn axis(&self, center: f64, half: f64) -> Vec<f64> {
        let n = self.nodes;
        (0..n)
            .map(|i| center - half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::InvalidParameter("grid needs at least two nodes per axis"));
        }
        if !(self.xi_half > 0.0 && self.eta_half > 0.0) {
            return Err(Error::InvalidParameter("grid half-widths must be positive"));
        }
        Ok(())
    }

    /// The grid as (ξ, η) samples, ξ-major with the first axis slowest.
    pub fn param_grid(&self, omega0: &[f64]) -> Result<ParamGrid> {
        self.check()?;
        let xi_axes: Vec<Vec<f64>> = omega0.iter().map(|_| self.axis(0.0, self.xi_half)).collect();
        let eta_axes: Vec<Vec<f64>> = omega0.iter().map(|&w| self.axis(w, self.eta_half)).collect();
        Ok(ParamGrid {
            xi_samples: cartesian(&xi_axes),
            eta_samples: cartesian(&eta_axes).into_iter().map(EtaPoint::new).collect(),
        })
    }
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Λ₀₀ exactly plus Λ̄ interpolated multilinearly from a tensor grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridLambda {
    pub omega0: Vec<f64>,
    pub spec: GridSpec,
    pub poly: PolyLambda,
    /// Λ̄ at the grid nodes, in `GridSpec::param_grid` order.
    pub values: Vec<Vec<f64>>,
}

impl GridLambda {
    /// Runs the iteration over the whole grid.
    pub fn build(ps: &ParamSystem, config: KamConfig, spec: GridSpec, m_max: usize, target_floor: f64) -> Result<(GridLambda, KamRun)> {
        let grid = spec.param_grid(&ps.omega0)?;
        let state = init_stage0(ps, &grid, config)?;
        let run = run_iteration(state, m_max, target_floor)?;
        let mut table = DTable::new();
        for (a, c) in ps.lambda00.iter().enumerate() {
            for (alpha, poly) in c.terms() {
                table.entry(alpha.clone()).or_insert_with(|| vec![0.0; ps.dim()])[a] = poly.mean();
            }
        }
        let lam = GridLambda {
            omega0: ps.omega0.clone(),
            spec,
            poly: PolyLambda::new(ps.dim(), &table),
            values: run.lambda_bar(),
        };
        Ok((lam, run))
    }

    /// Cell index and weight of `v` on an axis starting at `lo`.
    fn locate(&self, v: f64, lo: f64, half: f64) -> Result<(usize, f64)> {
        let n = self.spec.nodes;
        let step = 2.0 * half / (n - 1) as f64;
        let t = (v - lo) / step;
        let slack = 1e-12;
        if t < -slack || t > (n - 1) as f64 + slack {
            return Err(Error::OutsideGrid);
        }
        let t = t.clamp(0.0, (n - 1) as f64);
        let i = (libm::floor(t) as usize).min(n - 2);
        Ok((i, t - i as f64))
    }

    /// Interpolated Λ̄(ξ, η).
    pub fn lambda_bar(&self, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
        let d = self.omega0.len();
        check_len(d, xi)?;
        check_len(d, eta)?;
        let n = self.spec.nodes;
        let mut cells = Vec::with_capacity(2 * d);
        for &v in xi {
            cells.push(self.locate(v, -self.spec.xi_half, self.spec.xi_half)?);
        }
        for (j, &v) in eta.iter().enumerate() {
            cells.push(self.locate(v, self.omega0[j] - self.spec.eta_half, self.spec.eta_half)?);
        }
        let n_eta = n.pow(d as u32);
        let mut out = vec![0.0; d];
        for corner in 0..(1usize << (2 * d)) {
            let mut weight = 1.0;
            let mut xi_idx = 0usize;
            let mut eta_idx = 0usize;
            for (axis, &(i, t)) in cells.iter().enumerate() {
                let bit = (corner >> axis) & 1;
                weight *= if bit == 1 { t } else { 1.0 - t };
                let node = i + bit;
                if axis < d {
                    xi_idx = xi_idx * n + node;
                } else {
                    eta_idx = eta_idx * n + node;
                }
            }
            if weight == 0.0 {
                continue;
            }
            let v = &self.values[xi_idx * n_eta + eta_idx];
            for (o, c) in out.iter_mut().zip(v) {
                *o += weight * c;
            }
        }
        Ok(out)
    }

    /// max |Λ̄_self − Λ̄_fine| over the nodes of `fine`.
    pub fn refinement_gap(&self, fine: &GridLambda) -> Result<f64> {
        let grid = fine.spec.param_grid(&fine.omega0)?;
        let mut worst = 0.0f64;
        for ((xi, eta), v) in grid.points().zip(&fine.values) {
            let mine = self.lambda_bar(xi, eta.as_slice())?;
            for (a, b) in mine.iter().zip(v) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

impl LambdaEval for GridLambda {
    fn dim(&self) -> usize {
        self.omega0.len()
    }

    fn eval(&self, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
        let bar = self.lambda_bar(xi, eta)?;
        Ok(self.poly.value(xi).iter().zip(&bar).map(|(a, b)| a + b).collect())
    }
}
