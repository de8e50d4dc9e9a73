use super::*;
use crate::bnf::{bnf_run, introduce_parameter};
use crate::series::DomainSpec;
use crate::system::{perturbed_twist, ReversibleSystem};

const PHI: f64 = 1.618_033_988_749_895;

fn config(d: usize, kmax: usize, ymax: usize) -> KamConfig {
    let p = DiophParams::new(1e-3, d as f64 + 0.5).unwrap();
    KamConfig::new(p, kmax, ymax, Schedule::new(0.5, 0.05, 2))
}

fn param_system(sys: &ReversibleSystem, order: usize, kmax: usize) -> ParamSystem {
    let ctx = Ctx::new(kmax, order + 2);
    let out = bnf_run(sys, order, &ctx).unwrap();
    introduce_parameter(&out, &ctx).unwrap()
}

#[test]
fn schedule_radii_stay_above_half() {
    let s = Schedule::new(0.5, 0.05, 3);
    assert_eq!(s.e(0), 0.0);
    for m in 0..200 {
        assert!(s.s(m) >= s.s0 / 2.0 && s.r(m) >= s.r0 / 2.0);
        assert!(s.s(m + 1) < s.s(m));
    }
    assert!((s.eps(0) - 0.05f64.powi(4)).abs() < 1e-20);
    assert!((s.eps(2) - s.eps0.powf(16.0 / 9.0)).abs() < 1e-25);
}

#[test]
fn exponent_of_a_squaring_sequence() {
    let trace: Vec<f64> = (0..4).map(|m| 1e-2f64.powi(1 << m)).collect();
    assert!((contraction_exponent(&trace).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn trivial_system_has_no_small_data() {
    let sys = ReversibleSystem::linear(vec![1.0, PHI], DomainSpec::default()).unwrap();
    let ps = param_system(&sys, 2, 4);
    let grid = single_point(&[0.01, 0.02], &[1.0, PHI]);
    let st = init_stage0(&ps, &grid, config(2, 4, 4)).unwrap();
    let pt = &st.points[0];
    assert_eq!(pt.lambda_bar, vec![0.0, 0.0]);
    assert_eq!(pt.eps, 0.0);
    let run = run_iteration(st, 3, 1e-30).unwrap();
    assert_eq!(run.state.stage, 0, "zero data converges at stage 0");
}

#[test]
fn twist_gives_identity_lambda00_and_an_identity_step() {
    let f: Vec<FtSeries> = (0..2).map(|j| FtSeries::variable(2, 2, j)).collect();
    let sys = ReversibleSystem::new(vec![1.0, PHI], f, field::zeros(2, 2, 2), DomainSpec::default()).unwrap();
    let ps = param_system(&sys, 2, 4);
    let xi = [0.01, -0.02];
    let grid = single_point(&xi, &[1.0, PHI]);
    let st = init_stage0(&ps, &grid, config(2, 4, 4)).unwrap();
    assert_eq!(st.points[0].lambda00, xi.to_vec());
    assert_eq!(st.points[0].lambda_bar, vec![0.0, 0.0]);
    let (next, log) = kam_step(&st).unwrap();
    assert_eq!(log.gamma_max, 0.0);
    assert!(next.points[0].chain[0].is_identity());
}

#[test]
fn stage0_normalization_holds() {
    let sys = perturbed_twist(vec![1.0], 0.3, DomainSpec::default()).unwrap();
    let ps = param_system(&sys, 2, 8);
    let grid = ParamGrid {
        xi_samples: vec![vec![0.02], vec![-0.04]],
        eta_samples: vec![EtaPoint::new(vec![0.98]), EtaPoint::new(vec![1.03])],
    };
    let st = init_stage0(&ps, &grid, config(1, 8, 4)).unwrap();
    assert_eq!(st.points.len(), 4);
    assert!(st.normalization_residual().unwrap() <= 1e-13);
    assert!(st.parity_ok());
}

#[test]
fn perturbed_twist_contracts() {
    let sys = perturbed_twist(vec![1.0], 0.3, DomainSpec::default()).unwrap();
    let ps = param_system(&sys, 1, 10);
    let grid = single_point(&[0.05], &[1.05]);
    let st = init_stage0(&ps, &grid, config(1, 10, 3)).unwrap();
    let run = run_iteration(st, 3, 1e-30).unwrap();
    let trace = &run.state.trace;
    assert_eq!(trace.len(), 4);
    assert!(trace[1] <= trace[0].powf(1.3), "{trace:?}");
    assert!(contraction_exponent(trace).unwrap() >= 1.3);
    for l in &run.log {
        assert!(l.counterterm_residual <= 1e-12 && l.normalization <= NORMALIZATION_TOL);
    }
    assert!(run.state.parity_ok());
    // η = 1.05 is Diophantine at this truncation, so nothing is cut off
    assert!(run.state.points[0].remainders_vanish());
}

#[test]
fn near_resonant_eta_leaves_flat_remainders() {
    // d = 2 with ⟨(1,−1), η⟩ ≈ 0: the cut-off keeps that mode out of the
    // homological solution and it lands in R
    let sys = perturbed_twist(vec![1.0, 1.0], 0.3, DomainSpec::default()).unwrap();
    let ps = param_system(&sys, 1, 3);
    let grid = single_point(&[0.03, 0.0], &[1.0, 1.0 + 1e-5]);
    let st = init_stage0(&ps, &grid, config(2, 3, 3)).unwrap();
    let (next, _) = kam_step(&st).unwrap();
    assert!(!next.points[0].remainders_vanish());
    assert!(next.parity_ok());
}
