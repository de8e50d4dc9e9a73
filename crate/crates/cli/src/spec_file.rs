//! JSON description of a reversible system.
//!
//! ```json
//! {
//!   "dim": 1,
//!   "omega0": [1.0],
//!   "f": [{"alpha": [1], "modes": [{"k": [1], "re": [0.5], "im": [0.0]},
//!                                  {"k": [-1], "re": [0.5], "im": [0.0]}]}],
//!   "g": [],
//!   "domain": {"s": 0.5, "r": 0.5, "a": 0.05, "b": 0.05},
//!   "truncation": {"K": 4, "M": 4, "N": 2}
//! }
//! ```
//!
//! Each term is the coefficient of y^alpha; `re`/`im` hold one entry per
//! component of f (or g). Both k and −k must be listed.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use revkam_core::series::{DomainSpec, FtSeries, MultiIndex, TrigPoly};
use revkam_core::system::ReversibleSystem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub alpha: Vec<usize>,
    pub modes: Vec<ModeSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub s: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
}

/// K: Fourier radius |k|∞ of the input and of the computation; M: y-degree
/// budget; N: normal-form order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpecFile {
    pub dim: usize,
    pub omega0: Vec<f64>,
    pub f: Vec<TermSpec>,
    pub g: Vec<TermSpec>,
    pub domain: DomainFile,
    pub truncation: Truncation,
}

/// A validated system together with the truncation it was declared with.
#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub system: ReversibleSystem,
    pub truncation: Truncation,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

impl Truncation {
    pub fn validate(&self) -> CliResult<()> {
        if self.n == 0 {
            return Err(schema("truncation N must be at least 1"));
        }
        if self.m < self.n + 1 {
            return Err(schema(format!("truncation M = {} must be at least N + 1 = {}", self.m, self.n + 1)));
        }
        Ok(())
    }
}

fn component(name: &str, d: usize, terms: &[TermSpec], trunc: &Truncation) -> CliResult<Vec<FtSeries>> {
    let mut per_alpha: BTreeMap<MultiIndex, Vec<Vec<(Vec<i64>, Complex64)>>> = BTreeMap::new();
    for term in terms {
        if term.alpha.len() != d {
            return Err(schema(format!("{name}: alpha {:?} should have {d} entries", term.alpha)));
        }
        let alpha = MultiIndex::new(&term.alpha);
        if alpha.degree() > trunc.m {
            return Err(schema(format!("{name}: alpha {:?} exceeds the degree budget M = {}", term.alpha, trunc.m)));
        }
        let slot = per_alpha.entry(alpha).or_insert_with(|| vec![Vec::new(); d]);
        for mode in &term.modes {
            if mode.k.len() != d || mode.re.len() != d || mode.im.len() != d {
                return Err(schema(format!("{name}: mode {:?} under alpha {:?} should have {d} entries in k, re and im", mode.k, term.alpha)));
            }
            if mode.k.iter().any(|v| v.unsigned_abs() as usize > trunc.k) {
                return Err(schema(format!("{name}: mode {:?} exceeds the Fourier radius K = {}", mode.k, trunc.k)));
            }
            if !mode.re.iter().chain(&mode.im).all(|v| v.is_finite()) {
                return Err(schema(format!("{name}: non-finite coefficient at k = {:?}", mode.k)));
            }
            for (i, comp) in slot.iter_mut().enumerate() {
                if comp.iter().any(|(k, _)| *k == mode.k) {
                    return Err(schema(format!("{name}: mode {:?} listed twice under alpha {:?}", mode.k, term.alpha)));
                }
                comp.push((mode.k.clone(), Complex64::new(mode.re[i], mode.im[i])));
            }
        }
    }
    let mut out = vec![FtSeries::zero(d, d); d];
    for (alpha, comps) in per_alpha {
        for (i, modes) in comps.iter().enumerate() {
            let poly = TrigPoly::from_modes(d, modes)?;
            if !poly.is_zero() {
                out[i].add_term(alpha.clone(), &poly);
            }
        }
    }
    Ok(out)
}

impl SystemSpecFile {
    /// Validates the file and builds the system: schema first, then
    /// reality, parity and order.
    pub fn to_system(&self) -> CliResult<LoadedSystem> {
        let d = self.dim;
        if d == 0 {
            return Err(schema("dim must be positive"));
        }
        if self.omega0.len() != d {
            return Err(schema(format!("omega0 has {} entries, dim is {d}", self.omega0.len())));
        }
        if !self.omega0.iter().all(|w| w.is_finite()) {
            return Err(schema("omega0 must be finite"));
        }
        self.truncation.validate()?;
        let dom = &self.domain;
        let domain = DomainSpec::new(dom.s, dom.r, dom.a, dom.b).map_err(|e| schema(e.to_string()))?;
        let f = component("f", d, &self.f, &self.truncation)?;
        let g = component("g", d, &self.g, &self.truncation)?;
        let system = ReversibleSystem::new(self.omega0.clone(), f, g, domain)?;
        Ok(LoadedSystem {
            system,
            truncation: self.truncation,
        })
    }

    /// Inverse of `to_system`: every nonzero coefficient, both halves of
    /// the mode lattice, terms ordered by alpha.
    pub fn from_system(sys: &ReversibleSystem, truncation: Truncation) -> SystemSpecFile {
        let d = sys.dim();
        let terms = |comps: &[FtSeries]| -> Vec<TermSpec> {
            let mut grouped: BTreeMap<MultiIndex, BTreeMap<Vec<i64>, (Vec<f64>, Vec<f64>)>> = BTreeMap::new();
            for (i, s) in comps.iter().enumerate() {
                for (alpha, poly) in s.terms() {
                    let slot = grouped.entry(alpha.clone()).or_default();
                    for (k, c) in poly.modes() {
                        let e = slot.entry(k).or_insert_with(|| (vec![0.0; d], vec![0.0; d]));
                        e.0[i] = c.re;
                        e.1[i] = c.im;
                    }
                }
            }
            grouped
                .into_iter()
                .map(|(alpha, modes)| TermSpec {
                    alpha: alpha.entries(),
                    modes: modes.into_iter().map(|(k, (re, im))| ModeSpec { k, re, im }).collect(),
                })
                .collect()
        };
        let dom = sys.domain();
        SystemSpecFile {
            dim: d,
            omega0: sys.omega0().to_vec(),
            f: terms(sys.f()),
            g: terms(sys.g()),
            domain: DomainFile {
                s: dom.s,
                r: dom.r,
                a: dom.a,
                b: dom.b,
            },
            truncation,
        }
    }
}

pub fn parse_system_str(text: &str) -> CliResult<LoadedSystem> {
    let file: SystemSpecFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    file.to_system()
}

pub fn parse_system(path: &Path) -> CliResult<LoadedSystem> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_system_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(f: &str, g: &str) -> String {
        format!(
            r#"{{"dim": 1, "omega0": [1.0], "f": {f}, "g": {g},
               "domain": {{"s": 0.5, "r": 0.5, "a": 0.05, "b": 0.05}},
               "truncation": {{"K": 3, "M": 4, "N": 2}}}}"#
        )
    }

    const COS_Y: &str = r#"[{"alpha": [1], "modes": [{"k": [1], "re": [0.5], "im": [0.0]}, {"k": [-1], "re": [0.5], "im": [0.0]}]}]"#;
    const SIN_Y2: &str = r#"[{"alpha": [2], "modes": [{"k": [1], "re": [0.0], "im": [-0.5]}, {"k": [-1], "re": [0.0], "im": [0.5]}]}]"#;

    #[test]
    fn accepts_cos_y_and_sin_y2() {
        let s = parse_system_str(&file(COS_Y, SIN_Y2)).unwrap().system;
        let (fx, gy) = s.eval(&[0.3], &[0.2]);
        assert!((fx[0] - 1.0 - 0.3f64.cos() * 0.2).abs() < 1e-15);
        assert!((gy[0] - 0.3f64.sin() * 0.04).abs() < 1e-15);
    }

    #[test]
    fn odd_mode_in_f_is_a_parity_error() {
        let e = parse_system_str(&file(SIN_Y2.replace("[2]", "[1]").as_str(), "[]")).unwrap_err();
        match e {
            CliError::Parity { component, alpha, k } => {
                assert_eq!(component, "f[0]");
                assert_eq!(alpha, vec![1]);
                assert_eq!(k.iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![1]);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn linear_g_is_an_order_error() {
        let e = parse_system_str(&file("[]", SIN_Y2.replace("[2]", "[1]").as_str())).unwrap_err();
        assert!(matches!(e, CliError::Order { degree: 1, required: 2, .. }), "{e}");
    }

    #[test]
    fn missing_conjugate_is_a_reality_error() {
        let half = r#"[{"alpha": [1], "modes": [{"k": [1], "re": [0.5], "im": [0.0]}]}]"#;
        assert!(matches!(parse_system_str(&file(half, "[]")), Err(CliError::Reality { .. })));
    }

    #[test]
    fn malformed_input_is_a_schema_error() {
        assert!(matches!(parse_system_str("{"), Err(CliError::Schema(_))));
        let wide = COS_Y.replace("[1], \"re\"", "[5], \"re\"");
        assert!(matches!(parse_system_str(&file(&wide, "[]")), Err(CliError::Schema(_))));
    }
}
