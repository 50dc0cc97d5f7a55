use proptest::prelude::*;
use toric_kstab_core::critical::{closed_form_family, FamilyBranch};
use toric_kstab_core::functionals::{DfEvaluator, FunctionalContext};
use toric_kstab_core::kstability::{enumerate_crease_cases, evaluate_node, stability_verdict, ScanConfig, VerdictKind};
use toric_kstab_core::polytope::{delta_p, unimodular_transform};
use toric_kstab_core::{AffineFn2, IntMatrix2, Point2};

fn grid_normalized_min(r: &toric_kstab_core::kstability::StabilityReport) -> f64 {
    r.tables.iter().filter_map(|t| t.normalized_minimum.map(|m| m.value)).fold(f64::INFINITY, f64::min)
}

#[test]
fn verdict_is_invariant_under_lattice_maps() {
    let d = delta_p(0.1).unwrap();
    let f = closed_form_family(0.1, FamilyBranch::CMinus).unwrap();
    let cfg = ScanConfig { grid: 7, ..ScanConfig::default() };
    let base = stability_verdict(&d, &f, 4.0, &cfg).unwrap();
    assert_eq!(base.verdict.kind, VerdictKind::PolystableEvidence);
    for (m, t) in [
        (IntMatrix2::new([[1, 1], [0, 1]]), Point2::new(0.5, -2.0)),
        (IntMatrix2::new([[0, 1], [1, 0]]), Point2::new(0.0, 0.0)),
        (IntMatrix2::new([[2, 1], [1, 1]]), Point2::new(-1.0, 3.0)),
    ] {
        let image = unimodular_transform(&d, &m, t).unwrap();
        let g = f.push_forward(&m, t).unwrap();
        let r = stability_verdict(&image, &g, 4.0, &cfg).unwrap();
        assert_eq!(r.verdict.kind, base.verdict.kind);
        let (a, b) = (grid_normalized_min(&r), grid_normalized_min(&base));
        assert!((a - b).abs() < 1e-7 * b.abs(), "{a} vs {b}");
    }
}

#[test]
fn unstable_verdict_survives_lattice_maps() {
    let d = delta_p(0.1).unwrap();
    let f = AffineFn2::constant(1.0);
    let cfg = ScanConfig { grid: 5, ..ScanConfig::default() };
    let m = IntMatrix2::new([[1, 0], [3, 1]]);
    let image = unimodular_transform(&d, &m, Point2::new(1.0, 1.0)).unwrap();
    let g = f.push_forward(&m, Point2::new(1.0, 1.0)).unwrap();
    assert_eq!(stability_verdict(&image, &g, 4.0, &cfg).unwrap().verdict.kind, VerdictKind::Unstable);
}

#[test]
#[ignore = "slow: full 65 × 65 scan"]
fn refined_minimum_is_stable_under_grid_refinement() {
    let d = delta_p(0.1).unwrap();
    let f = closed_form_family(0.1, FamilyBranch::CMinus).unwrap();
    let coarse = stability_verdict(&d, &f, 4.0, &ScanConfig::default()).unwrap();
    let fine = stability_verdict(&d, &f, 4.0, &ScanConfig { grid: 65, ..ScanConfig::default() }).unwrap();
    let (a, b) = (coarse.verdict.minimum.unwrap(), fine.verdict.minimum.unwrap());
    assert!((a.value - b.value).abs() < coarse.verdict.tol);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn orientations_differ_by_futaki_of_crease(
        p in 0.05f64..0.95,
        case in 0usize..6,
        s in 0.0f64..1.0,
        t in 0.0f64..1.0,
        a in -0.3f64..0.3,
        b in -0.3f64..0.3,
    ) {
        let d = delta_p(p).unwrap();
        let f = AffineFn2::new(a, b, 1.0);
        let ctx = FunctionalContext::new(&d, f, 4.0, 1e-10).unwrap();
        let ev = DfEvaluator::new(ctx).unwrap();
        let c = enumerate_crease_cases(&d)[case];
        let (e, g) = (c.e_range().1 * s, c.f_range().1 * t);
        let node = evaluate_node(&ev, &c, e, g).unwrap();
        prop_assume!(node.valid);
        let l = c.crease_function(&d, e, g);
        let scale = ev.moments().d_const().abs() * ev.moments().vol();
        prop_assert!((node.df_pos - node.df_neg - ev.futaki(&l)).abs() < 1e-8 * scale);
    }
}
