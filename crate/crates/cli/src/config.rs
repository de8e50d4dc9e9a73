use std::path::PathBuf;

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::spec_file::Truncation;

/// Which torus `verify-torus` checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    /// y = const with the frequency read off the field; exact for systems
    /// already in normal form.
    Flat,
    /// The KAM-validated torus at ξ, pulled back to the original variables.
    Kam,
}

/// Run options as given on the command line; `None` falls back to the
/// system file or a documented default in `Resolved`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunConfig {
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub kmax: Option<usize>,
    pub order: Option<usize>,
    pub m_max: Option<usize>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub horizon: Option<f64>,
    pub xi: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub candidate: Option<CandidateKind>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Every knob with its default filled in; echoed verbatim in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub gamma: f64,
    pub tau: f64,
    pub kmax: usize,
    pub order: usize,
    pub ymax: usize,
    pub m_max: usize,
    pub grid: usize,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    pub horizon: f64,
    pub xi: Vec<f64>,
    pub eta: Option<Vec<f64>>,
    pub candidate: CandidateKind,
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn resolve(&self, dim: usize, trunc: &Truncation) -> CliResult<Resolved> {
        let order = self.order.unwrap_or(trunc.n);
        if order == 0 {
            return Err(CliError::Config("order must be at least 1".into()));
        }
        // the y-degree budget grows with a requested order so that M ≥ N + 2
        let ymax = trunc.m.max(order + 2);
        let tau = self.tau.unwrap_or(dim as f64 + 0.5);
        if !(tau > dim as f64 - 1.0) {
            return Err(CliError::Config(format!("tau = {tau} must exceed d - 1 = {}", dim - 1)));
        }
        let kmax = self.kmax.unwrap_or(trunc.k);
        if kmax == 0 {
            return Err(CliError::Config("kmax must be positive".into()));
        }
        let m_max = self.m_max.unwrap_or(3);
        if m_max == 0 {
            return Err(CliError::Config("mmax must be positive".into()));
        }
        let xi = self.xi.clone().unwrap_or_else(|| vec![0.0; dim]);
        if xi.len() != dim {
            return Err(CliError::Config(format!("xi needs {dim} entries")));
        }
        if let Some(eta) = &self.eta {
            if eta.len() != dim {
                return Err(CliError::Config(format!("eta needs {dim} entries")));
            }
        }
        let samples = self.samples.unwrap_or(10_000);
        if samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        Ok(Resolved {
            gamma: positive("gamma", self.gamma.unwrap_or(1e-3))?,
            tau,
            kmax,
            order,
            ymax,
            m_max,
            grid: self.grid.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            tol: positive("tol", self.tol.unwrap_or(1e-10))?,
            samples,
            horizon: positive("horizon", self.horizon.unwrap_or(50.0))?,
            xi,
            eta: self.eta.clone(),
            candidate: self.candidate.unwrap_or(CandidateKind::Flat),
        })
    }
}
