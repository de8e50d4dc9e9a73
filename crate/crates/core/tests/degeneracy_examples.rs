use revkam_core::bnf::bnf_run;
use revkam_core::degeneracy::{
    check_symmetry_condition, classify_degeneracy, degenerate_example, detect_proportional_form, transversality,
    DirectionSearch,
};
use revkam_core::series::Ctx;
use revkam_core::system::{random_system, RandomSpec};

const PHI: f64 = 1.618_033_988_749_895;

#[test]
fn one_degenerate_example_through_the_normal_form() {
    let w = vec![1.0, PHI, 2f64.sqrt()];
    let sys = degenerate_example(w.clone(), 1).unwrap();
    let out = bnf_run(&sys, 2, &Ctx::new(4, 4)).unwrap();
    let rep = classify_degeneracy(&out.d_table, &w);
    assert_eq!(rep.j, 1);
    assert!(!rep.symmetry_ok && !rep.violations.is_empty());
    let g = &rep.kernel_basis[0];
    for mu in [[0.1, -0.2, 0.05], [0.0, 0.3, 0.3]] {
        let f = out.frequency_at(&mu);
        let proj: f64 = f.iter().zip(g).map(|(a, b)| a * b).sum();
        assert!(proj.abs() < 1e-12);
    }
    assert!(detect_proportional_form(&out.d_table, &w).is_none());
}

#[test]
fn generic_system_is_nondegenerate_and_transversal() {
    let w = vec![1.0, PHI];
    let spec = RandomSpec { dim: 2, degree: 3, radius: 2, amp: 0.3 };
    let sys = random_system(w.clone(), spec, 7).unwrap();
    let out = bnf_run(&sys, 3, &Ctx::new(8, 5)).unwrap();
    let rep = classify_degeneracy(&out.d_table, &w);
    assert_eq!(rep.j, 0);
    let (sym, _) = check_symmetry_condition(&out.d_table);
    assert_eq!(sym, rep.symmetry_ok);
    for k in [[1, -1], [2, 3], [0, 1]] {
        let t = transversality(&out.d_table, &w, &k, 2, &DirectionSearch::default()).unwrap();
        assert!(t.sigma > 0.0 && t.order <= 2, "{k:?}: {t:?}");
    }
}
