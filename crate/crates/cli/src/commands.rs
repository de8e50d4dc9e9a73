//! One function per subcommand, each returning a report and its tables.

use revkam_core::bnf::{bnf_run, introduce_parameter, omega_expand, BnfOutput, DTable, ParamSystem};
use revkam_core::degeneracy::{
    check_symmetry_condition, classify_degeneracy, detect_proportional_form, transversality, DirectionSearch,
};
use revkam_core::dioph::{DiophParams, ModeTable};
use revkam_core::kam::{
    contraction_exponent, freq_map, init_stage0, measure_scan, run_iteration, single_point, slab_fraction,
    slab_scan, DirectKam, GridLambda, GridSpec, KamConfig, KamRun, PolyLambda, Schedule,
};
use revkam_core::series::{Ctx, MultiIndex};
use revkam_core::system::ReversibleSystem;
use revkam_core::torus::{verify_torus, TorusCandidate};
use serde_json::{json, Value};

use crate::config::{CandidateKind, Resolved, RunConfig};
use crate::error::CliResult;
use crate::report::{Output, Report, Table};
use crate::spec_file::LoadedSystem;

/// ε below which the iteration stops early.
pub const TARGET_FLOOR: f64 = 1e-30;
/// |ξ| range of the frequency-map sweep.
pub const SWEEP_RANGE: (f64, f64) = (1e-3, 1e-1);
/// Sample times written by verify-torus.
pub const DRIFT_SAMPLES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Bnf,
    Classify,
    KamRun,
    FreqMap,
    MeasureScan,
    VerifyTorus,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bnf => "bnf",
            Command::Classify => "classify",
            Command::KamRun => "kam-run",
            Command::FreqMap => "freq-map",
            Command::MeasureScan => "measure-scan",
            Command::VerifyTorus => "verify-torus",
        }
    }
}

pub fn dispatch(cmd: Command, loaded: &LoadedSystem, cfg: &RunConfig) -> CliResult<Output> {
    let sys = &loaded.system;
    let r = cfg.resolve(sys.dim(), &loaded.truncation)?;
    let mut report = Report::new(cmd.name(), &r, &loaded.truncation);
    let tables = match cmd {
        Command::Bnf => bnf(sys, &r, &mut report)?,
        Command::Classify => classify(sys, &r, &mut report)?,
        Command::KamRun => kam_run(sys, &r, &mut report)?,
        Command::FreqMap => freq(sys, &r, &mut report)?,
        Command::MeasureScan => measure(sys, &r, &mut report)?,
        Command::VerifyTorus => torus(sys, &r, &mut report)?,
    };
    Ok(Output { report, tables })
}

fn d_table_json(t: &DTable) -> Value {
    Value::Array(
        t.iter()
            .map(|(a, d)| json!({ "alpha": a.entries(), "d": d }))
            .collect(),
    )
}

fn normal_form(sys: &ReversibleSystem, r: &Resolved) -> CliResult<BnfOutput> {
    Ok(bnf_run(sys, r.order, &Ctx::new(r.kmax, r.ymax))?)
}

fn param_system(out: &BnfOutput, r: &Resolved) -> CliResult<ParamSystem> {
    Ok(introduce_parameter(out, &Ctx::new(r.kmax, r.ymax))?)
}

fn kam_config(sys: &ReversibleSystem, r: &Resolved) -> CliResult<KamConfig> {
    let p = DiophParams::new(r.gamma, r.tau)?;
    let dom = sys.domain();
    Ok(KamConfig::new(p, r.kmax, r.ymax, Schedule::new(dom.s, dom.a, r.order)))
}

fn bnf(sys: &ReversibleSystem, r: &Resolved, rep: &mut Report) -> CliResult<Vec<Table>> {
    let out = normal_form(sys, r)?;
    let om = omega_expand(sys, r.order, r.kmax)?;
    let gap = out
        .d_table
        .iter()
        .flat_map(|(a, d)| d.iter().zip(&om[a]).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let defect = out.residual_defect();
    rep.results = json!({
        "d_table": d_table_json(&out.d_table),
        "chain": out.chain.iter().enumerate().map(|(j, s)| json!({
            "step": j + 1,
            "identity": s.is_identity(),
            "parity_ok": s.parity_ok(),
        })).collect::<Vec<_>>(),
        "schedule": out.schedule,
        "warnings": out.warnings,
    });
    rep.measured = json!({
        "residual_x_side": defect.x_side,
        "residual_y_side": defect.y_side,
        "omega_expand_gap": gap,
    });
    rep.floors = json!({ "truncation": out.floor });
    Ok(Vec::new())
}

fn classify(sys: &ReversibleSystem, r: &Resolved, rep: &mut Report) -> CliResult<Vec<Table>> {
    let out = normal_form(sys, r)?;
    let w = sys.omega0();
    let deg = classify_degeneracy(&out.d_table, w);
    let (sym, _) = check_symmetry_condition(&out.d_table);
    let prop = detect_proportional_form(&out.d_table, w);
    // transversality on the unit modes and their pairwise differences
    let d = sys.dim();
    let mut modes: Vec<Vec<i64>> = (0..d).map(|i| unit(d, i)).collect();
    for i in 0..d {
        for j in i + 1..d {
            let mut k = unit(d, i);
            k[j] = -1;
            modes.push(k);
        }
    }
    let mut trans = Vec::new();
    for k in &modes {
        let t = transversality(&out.d_table, w, k, r.order, &DirectionSearch::default())?;
        trans.push(json!({ "k": t.k, "u": t.u_k, "p": t.p, "sigma": t.sigma, "order": t.order }));
    }
    rep.results = json!({
        "j": deg.j,
        "kernel_basis": deg.kernel_basis,
        "symmetry_ok": sym,
        "violations": deg.violations.iter().map(|v| json!({
            "beta": v.beta.entries(), "i": v.i, "l": v.l, "lhs": v.lhs, "rhs": v.rhs,
        })).collect::<Vec<_>>(),
        "proportional_factor": prop.map(|mu| d_table_json(&scalar_table(&mu))),
        "transversality": trans,
        "d_table": d_table_json(&out.d_table),
    });
    rep.measured = json!({ "singular_values": deg.singular_values, "table_degree": deg.truncation });
    rep.floors = json!({ "truncation": out.floor });
    Ok(Vec::new())
}

fn unit(d: usize, i: usize) -> Vec<i64> {
    let mut k = vec![0; d];
    k[i] = 1;
    k
}

/// μ(t) = 1 + Σ_p μ_p t^p as a one-variable table.
fn scalar_table(mu: &[f64]) -> DTable {
    mu.iter()
        .enumerate()
        .map(|(p, c)| (MultiIndex::new(&[p]), vec![*c]))
        .collect()
}

fn stage_table(run: &KamRun) -> Table {
    let mut t = Table::new("eps_vs_stage", &["stage", "eps", "eps_schedule"]);
    let first = run.state.trace.first().copied().unwrap_or(0.0);
    t.push(vec![0.0, first, run.state.config.schedule.eps(0)]);
    for l in &run.log {
        t.push(vec![l.stage as f64, l.eps, l.eps_schedule]);
    }
    t
}

fn kam_run(sys: &ReversibleSystem, r: &Resolved, rep: &mut Report) -> CliResult<Vec<Table>> {
    let out = normal_form(sys, r)?;
    let ps = param_system(&out, r)?;
    let config = kam_config(sys, r)?;
    let run = if r.grid >= 2 {
        let dom = sys.domain();
        let spec = GridSpec {
            nodes: r.grid,
            xi_half: dom.a,
            eta_half: dom.b,
        };
        rep.notes.push("Lambda-bar is tabulated on a tensor grid and interpolated multilinearly".into());
        GridLambda::build(&ps, config, spec, r.m_max, TARGET_FLOOR)?.1
    } else {
        let eta = match &r.eta {
            Some(e) => e.clone(),
            None => out.frequency_at(&r.xi),
        };
        let state = init_stage0(&ps, &single_point(&r.xi, &eta), config)?;
        run_iteration(state, r.m_max, TARGET_FLOOR)?
    };
    let st = &run.state;
    rep.results = json!({
        "stages": run.log.iter().map(|l| json!({
            "stage": l.stage,
            "eps": l.eps,
            "eps_schedule": l.eps_schedule,
            "gamma_max": l.gamma_max,
        })).collect::<Vec<_>>(),
        "points": st.points.iter().map(|p| json!({
            "xi": p.xi,
            "eta": p.eta.as_slice(),
            "lambda": p.lambda(),
            "lambda_bar": p.lambda_bar,
            "parity_ok": p.parity().all(),
            "remainders_vanish": p.remainders_vanish(),
        })).collect::<Vec<_>>(),
        "parity_ok": st.parity_ok(),
    });
    let worst = |f: fn(&revkam_core::kam::StageLog) -> f64| run.log.iter().map(f).fold(0.0, f64::max);
    rep.measured = json!({
        "eps_trace": st.trace,
        "contraction_exponent": contraction_exponent(&st.trace),
        "counterterm_residual": worst(|l| l.counterterm_residual),
        "triplet_residual": worst(|l| l.triplet_residual),
        "normalization_residual": st.normalization_residual()?,
    });
    rep.floors = json!({ "bnf": out.floor, "kam": st.floor });
    Ok(vec![stage_table(&run)])
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Unit direction of the sweep: `xi` if nonzero, else the diagonal.
fn sweep_direction(r: &Resolved) -> Vec<f64> {
    let n: f64 = r.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        r.xi.iter().map(|v| v / n).collect()
    } else {
        let d = r.xi.len();
        vec![1.0 / (d as f64).sqrt(); d]
    }
}

fn freq(sys: &ReversibleSystem, r: &Resolved, rep: &mut Report) -> CliResult<Vec<Table>> {
    let out = normal_form(sys, r)?;
    let ps = param_system(&out, r)?;
    let eval = DirectKam {
        ps,
        config: kam_config(sys, r)?,
        m_max: r.m_max,
        target_floor: TARGET_FLOOR,
    };
    let dir = sweep_direction(r);
    let n = r.grid.max(2);
    let (lo, hi) = SWEEP_RANGE;
    let p = DiophParams::new(r.gamma, r.tau)?;
    let modes = ModeTable::new(sys.dim(), r.kmax);
    let mut table = Table::new("freq_gap", &["xi_norm", "gap"]);
    let mut points = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..n {
        let s = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let xi: Vec<f64> = dir.iter().map(|u| s * u).collect();
        let fp = freq_map(&eval, sys.omega0(), &xi, Some((&p, &modes)))?;
        let gap = sup_gap(&fp.eta, &out.frequency_at(&xi));
        worst = worst.max(fp.residual);
        table.push(vec![s, gap]);
        points.push(json!({
            "xi": fp.xi, "eta": fp.eta, "residual": fp.residual, "iterations": fp.iterations,
            "dc": fp.dc, "dc_margin": fp.dc_margin, "gap": gap,
        }));
    }
    let pairs: Vec<(f64, f64)> = table.rows.iter().map(|row| (row[0], row[1])).collect();
    rep.results = json!({ "points": points });
    rep.measured = json!({ "gap_slope": log_slope(&pairs), "max_newton_residual": worst });
    rep.floors = json!({ "bnf": out.floor });
    rep.notes.push("Lambda is evaluated by a fresh KAM run at every (xi, eta) the Newton solve visits".into());
    Ok(vec![table])
}

fn measure(sys: &ReversibleSystem, r: &Resolved, rep: &mut Report) -> CliResult<Vec<Table>> {
    let out = normal_form(sys, r)?;
    let eval = PolyLambda::new(sys.dim(), &out.d_table);
    let a = sys.domain().a;
    let gammas = [r.gamma, r.gamma / 10.0, r.gamma / 100.0];
    let scan = measure_scan(&eval, sys.omega0(), a, &gammas, r.tau, r.kmax, r.samples, r.seed)?;
    let mut table = Table::new("fraction_vs_gamma", &["gamma", "fraction", "sigma"]);
    for row in &scan.rows {
        table.push(vec![row.gamma, row.fraction, row.sigma]);
    }
    let mut slab = Value::Null;
    if sys.dim() == 2 {
        // the single mode excluding the most area at the top γ
        let p = DiophParams::new(r.gamma, r.tau)?;
        let small = ModeTable::new(2, r.kmax.min(10));
        let mut best: Option<(Vec<i64>, f64)> = None;
        for k in small.iter() {
            let f = slab_fraction(sys.omega0(), k, &p, a)?;
            if best.as_ref().map_or(true, |b| f < b.1) {
                best = Some((k.to_vec(), f));
            }
        }
        if let Some((k, _)) = best {
            let chk = slab_scan(&eval, sys.omega0(), a, &k, &p, r.samples, r.seed)?;
            slab = json!({
                "k": k, "gamma": r.gamma, "fraction": chk.fraction, "sigma": chk.sigma,
                "analytic": chk.analytic, "z_score": chk.z_score(r.samples),
            });
        }
    }
    rep.results = json!({
        "rows": scan.rows.iter().map(|row| json!({
            "gamma": row.gamma, "hits": row.hits, "fraction": row.fraction, "sigma": row.sigma,
        })).collect::<Vec<_>>(),
        "slab": slab,
        "n": scan.n,
        "a": scan.a,
    });
    rep.measured = json!({ "max_newton_residual": scan.max_residual });
    rep.floors = json!({ "bnf": out.floor });
    rep.notes.push("frequency map taken as the truncated normal-form frequency".into());
    Ok(vec![table])
}

fn torus(sys: &ReversibleSystem, r: &Resolved, rep: &mut Report) -> CliResult<Vec<Table>> {
    let cand = match r.candidate {
        CandidateKind::Flat => {
            let zero = vec![0.0; sys.dim()];
            let eta = match &r.eta {
                Some(e) => e.clone(),
                None => sys.eval(&zero, &r.xi).0,
            };
            TorusCandidate::flat(eta, r.xi.clone())
        }
        CandidateKind::Kam => {
            let out = normal_form(sys, r)?;
            let ps = param_system(&out, r)?;
            let eval = DirectKam {
                ps,
                config: kam_config(sys, r)?,
                m_max: r.m_max,
                target_floor: TARGET_FLOOR,
            };
            let fp = freq_map(&eval, sys.omega0(), &r.xi, None)?;
            let run = eval.run(&r.xi, &fp.eta)?;
            rep.floors = json!({ "bnf": out.floor, "kam": run.state.floor });
            TorusCandidate::from_kam(&out, &run.state.points[0])
        }
    };
    let n_theta = r.grid.max(4);
    let chk = verify_torus(sys, &cand, r.horizon, r.tol, n_theta, DRIFT_SAMPLES)?;
    let mut table = Table::new("drift_vs_t", &["t", "drift"]);
    for &(t, d) in &chk.drift_curve {
        table.push(vec![t, d]);
    }
    rep.results = json!({
        "eta": cand.eta,
        "horizon": chk.horizon,
        "n_theta": chk.n_theta,
        "integrator_tol": chk.integrator_tol,
    });
    rep.measured = json!({ "max_drift": chk.max_drift });
    Ok(vec![table])
}
