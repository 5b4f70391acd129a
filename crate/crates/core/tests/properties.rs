//! Property suites over random subcomplexes of a triangulated torus, glued paths and
//! report serialization.

use proptest::prelude::*;

use bvbfv::cli::{emit_report, parse_report, Format, RunReport};
use bvbfv::gluing::{glue, GluingSpec};
use bvbfv::moduli::{GhostDims, Moduli};
use bvbfv::simplicial::{ComplexFile, OrientedComplex};
use bvbfv::theories::{build_abelian_bf, verify_cme};

fn torus_tops() -> Vec<Vec<i64>> {
    let v = |i: i64, j: i64| i.rem_euclid(3) * 3 + j.rem_euclid(3);
    let mut tops = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            tops.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            tops.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    tops
}

fn subcomplex(mask: &[bool]) -> Option<OrientedComplex> {
    let tops: Vec<Vec<i64>> = torus_tops().into_iter().zip(mask).filter(|(_, k)| **k).map(|(t, _)| t).collect();
    if tops.is_empty() {
        return None;
    }
    let f = ComplexFile::coherent(2, tops).ok()?;
    OrientedComplex::load(f).ok()
}

fn path(from: i64, edges: i64) -> OrientedComplex {
    let tops = (from..from + edges).map(|i| vec![i, i + 1]).collect();
    OrientedComplex::load(ComplexFile::coherent(1, tops).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn stokes_and_euler_poincare(mask in proptest::collection::vec(any::<bool>(), 18)) {
        let Some(c) = subcomplex(&mask) else { return Ok(()) };
        prop_assert!(c.stokes_holds());
        let betti = c.cochains().betti();
        let chi_counts: i64 = c.counts().iter().enumerate().map(|(k, n)| if k % 2 == 0 { *n as i64 } else { -(*n as i64) }).sum();
        let chi_betti: i64 = betti.iter().enumerate().map(|(k, n)| if k % 2 == 0 { *n as i64 } else { -(*n as i64) }).sum();
        prop_assert_eq!(chi_counts, chi_betti);
        for k in 0..c.dimension().saturating_sub(1) {
            prop_assert!(c.coboundary_matrix(k + 1).mul(&c.coboundary_matrix(k)).is_zero());
        }
    }

    #[test]
    fn bf_moduli_doubles_cohomology(mask in proptest::collection::vec(any::<bool>(), 18)) {
        let Some(c) = subcomplex(&mask) else { return Ok(()) };
        let t = build_abelian_bf(&c).unwrap();
        prop_assert!(verify_cme(&t).unwrap().all_hold());
        let m = Moduli::new(&t).unwrap();
        let r = m.report();
        let betti: usize = c.cochains().betti().iter().sum();
        prop_assert_eq!(r.moduli.total(), 2 * betti);
        prop_assert!(r.les.exact);
        prop_assert!(r.lefschetz.nondegenerate && r.lefschetz.chi_self_adjoint && r.lefschetz.psi_beta_adjoint);
        prop_assert!(r.evolution_relation.lagrangian);
    }

    #[test]
    fn glued_paths_are_paths(a in 1i64..5, b in 1i64..5) {
        let left = path(0, a);
        let right = path(100, b);
        let g = glue(&GluingSpec::new(left, right, vec![(a, 100)])).unwrap();
        prop_assert_eq!(g.complex.counts(), vec![(a + b + 1) as usize, (a + b) as usize]);
        prop_assert_eq!(g.complex.cochains().betti(), vec![1, 0]);
    }

    #[test]
    fn structured_reports_round_trip(
        verdicts in proptest::collection::btree_map("[a-z_]{1,8}", any::<bool>(), 0..6),
        table in proptest::collection::btree_map(-3i32..4, 0usize..50, 0..5),
        residual in (-20i64..20, 1i64..9),
    ) {
        let mut r = RunReport::new(vec!["moduli".into(), "x".into()]);
        r.verdicts = verdicts;
        r.dims.insert("moduli".into(), GhostDims(table));
        r.report = serde_json::json!({ "residual": format!("{}/{}", residual.0, residual.1) });
        let text = emit_report(&r, Format::Structured);
        let back = parse_report(&text).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(emit_report(&back, Format::Structured), text);
        prop_assert_eq!(r.exit_code() == 0, r.verdicts.values().all(|v| *v));
    }
}

#[test]
fn masks_reach_the_torus_and_proper_pieces() {
    let full = subcomplex(&[true; 18]).unwrap();
    assert_eq!(full.cochains().betti(), vec![1, 2, 1]);
    let mut half = [false; 18];
    half[..6].iter_mut().for_each(|b| *b = true);
    let strip = subcomplex(&half).unwrap();
    assert!(!strip.is_closed());
    assert_eq!(strip.cochains().betti(), vec![1, 1, 0]);
}
