use num_traits::Zero;

use super::*;
use crate::error::Error;
use crate::measures::{Verdict, Word, DEFAULT_BUDGET};
use crate::model::{Interval, Point, PointClass};
use crate::scalar::{int, rat, Rational};
use crate::specimens::{example2, example2_constant, example2_modified, example3, example4, half_sqrt2};
use crate::ExactPoint;

fn pt(num: i64, den: i64) -> ExactPoint {
    Point::rational(rat(num, den))
}

fn quick() -> PartitionParams {
    let mut p = PartitionParams::new(5);
    p.xi.num_samples = 1000;
    p
}

fn intervals(part: &IntervalPartition) -> Vec<Interval<Rational>> {
    part.cells.iter().map(|c| c.interval.clone()).collect()
}

#[test]
fn refines_example_2() {
    let part = refine_markov_partition(&example2(rat(1, 2)), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert_eq!(part.cut_points(), vec![int(0), rat(1, 9), rat(1, 3)]);
    assert_eq!(
        intervals(&part),
        vec![
            Interval::point(int(0)),
            Interval::left_open(int(0), rat(1, 9)),
            Interval::left_open(rat(1, 9), rat(1, 3)),
            Interval::left_open(rat(1, 3), int(1)),
        ]
    );
    let origins: Vec<_> = part.breakpoints.iter().map(|(_, o)| *o).collect();
    assert!(origins.contains(&BreakpointOrigin::Discontinuity));
    assert!(origins.contains(&BreakpointOrigin::DomainEnd));
}

#[test]
fn refines_example_3_and_variants() {
    let part = refine_markov_partition(&example3(), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert_eq!(intervals(&part), vec![Interval::closed(int(0), rat(1, 2)), Interval::left_open(rat(1, 2), int(1))]);

    let modified = refine_markov_partition(&example2_modified(rat(1, 2)), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert_eq!(modified.cut_points(), vec![int(0), rat(1, 27), rat(1, 9), rat(1, 3)]);
    assert_eq!(modified.cells.len(), 5);

    let constant = refine_markov_partition(&example2_constant(rat(1, 2)), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert_eq!(constant.cells.len(), 1);
}

#[test]
fn refinement_cap_is_enforced() {
    let err = refine_markov_partition(&example2_modified(rat(1, 2)), 4).unwrap_err();
    assert!(matches!(err, Error::RefinementBudgetExceeded { cap: 4 }));
    assert!(matches!(refine_markov_partition(&example4(), 256), Err(Error::NotPiecewiseConstant)));
    assert!(base_partition(&example4(), 256).unwrap().is_tagged());
}

/// The substochastic matrix `A_k` on the nondegenerate cells, read by hand.
fn a_matrix(b: &Rational, k: usize) -> Vec<Vec<Rational>> {
    let one = int(1);
    let mut m = vec![vec![Rational::zero(); k + 1]; k + 1];
    m[0][k] = one.clone();
    for i in 1..=k {
        m[i][i - 1] = b.clone();
        m[i][k] = &one - b;
    }
    m
}

#[test]
fn example_2_chains_are_a2_and_a3() {
    for b in [rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3)] {
        let (_, chain) = symbolic_chain(&example2(b.clone()), DEFAULT_BREAKPOINT_CAP).unwrap();
        assert_eq!(chain.restrict(&[1, 2, 3]).unwrap().matrix(), a_matrix(&b, 2));
        let (_, chain) = symbolic_chain(&example2_modified(b.clone()), DEFAULT_BREAKPOINT_CAP).unwrap();
        assert_eq!(chain.restrict(&[1, 2, 3, 4]).unwrap().matrix(), a_matrix(&b, 3));
    }
}

#[test]
fn example_3_chain_by_hand() {
    let (_, chain) = symbolic_chain(&example3(), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert_eq!(chain.target(0, 0), Some(0));
    assert_eq!(chain.prob(0, 0), rat(1, 4));
    assert_eq!(chain.target(0, 1), Some(0));
    assert_eq!(chain.prob(0, 1), rat(3, 4));
    assert_eq!(chain.target(1, 0), Some(0));
    assert_eq!(chain.prob(1, 0), rat(1, 3));
    assert_eq!(chain.target(1, 1), Some(1));
    assert_eq!(chain.prob(1, 1), rat(2, 3));
}

#[test]
fn example_4_chain_keeps_tags_apart() {
    let (part, chain) = symbolic_chain(&example4(), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert_eq!(part.cells[0].points, PointClass::Rationals);
    assert_eq!(chain.matrix(), vec![vec![int(1), int(0)], vec![int(0), int(1)]]);
    assert_eq!(chain.prob(1, 0), rat(1, 3));
}

#[test]
fn separation_witnesses() {
    let b = rat(1, 2);
    let (_, chain) = symbolic_chain(&example2(b.clone()), DEFAULT_BREAKPOINT_CAP).unwrap();
    let sep = |i, j| match support_separation(&chain, i, j).unwrap() {
        Some(MergeCertificate::SupportSeparation { word, mass_i, mass_j }) => (word, mass_i, mass_j),
        other => panic!("expected a separation, got {other:?}"),
    };
    assert_eq!(sep(1, 2), (Word::from_ids(&[0]), int(0), b.clone()));
    let (word, mi, mj) = sep(2, 3);
    assert_eq!(word, Word::from_ids(&[0, 0]));
    assert!(mi.is_zero() && !mj.is_zero());
    assert_eq!(sep(0, 1), (Word::from_ids(&[1, 0, 0]), int(0), &b * &b));

    let (_, e3) = symbolic_chain(&example3(), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert!(support_separation(&e3, 0, 1).unwrap().is_none());
    assert!(matches!(support_separation(&e3, 0, 9), Err(Error::InvalidState(9))));
}

#[test]
fn certificates_verify() {
    let (_, chain) = symbolic_chain(&example2(rat(1, 3)), DEFAULT_BREAKPOINT_CAP).unwrap();
    let cert = support_separation(&chain, 0, 3).unwrap().unwrap();
    assert!(cert.verify(&chain, 0, 3).unwrap());
}

#[test]
fn equality_examples() {
    let (_, e3) = symbolic_chain(&example3(), DEFAULT_BREAKPOINT_CAP).unwrap();
    assert!(measure_equality(&e3, 0, 0).unwrap().is_equal());
    match measure_equality(&e3, 0, 1).unwrap() {
        EqualityOutcome::Distinguished { word, mass_i, mass_j } => {
            assert_eq!(word, Word::from_ids(&[0]));
            assert_eq!((mass_i, mass_j), (rat(1, 4), rat(1, 3)));
        }
        EqualityOutcome::Equal(_) => panic!("example 3 cells differ"),
    }
    // a duplicated state is indistinguishable from the original
    let mut rows = e3.rows.clone();
    rows.push(rows[1].clone());
    let mut reps = e3.reps.clone();
    reps.push(reps[1].clone());
    let dup = LabeledChain::new(e3.labels.clone(), rows, reps).unwrap();
    let eq = measure_equality(&dup, 1, 2).unwrap();
    assert!(eq.is_equal());
    if let EqualityOutcome::Equal(cert) = eq {
        assert!(cert.verify(&dup, 1, 2).unwrap());
    }
}

#[test]
fn coupling_examples() {
    let spec = example3();
    let (_, chain) = symbolic_chain(&spec, DEFAULT_BREAKPOINT_CAP).unwrap();
    let params = quick().xi;
    match coupling_merge_test(&spec, &chain, 0, 1, &params).unwrap() {
        MergeCertificate::CouplingMerge { to_diagonal, closed_classes, .. } => {
            assert_eq!(to_diagonal, Word::from_ids(&[0]));
            assert_eq!(closed_classes, 1);
        }
        other => panic!("expected coupling, got {other:?}"),
    }
    let same = coupling_merge_test(&spec, &chain, 1, 1, &params).unwrap();
    assert!(matches!(same, MergeCertificate::CouplingMerge { ref to_diagonal, .. } if to_diagonal.is_empty()));
    assert!(same.verify(&chain, 1, 1).unwrap());

    let e4 = example4();
    let (_, c4) = symbolic_chain(&e4, DEFAULT_BREAKPOINT_CAP).unwrap();
    match coupling_merge_test(&e4, &c4, 0, 1, &params).unwrap() {
        MergeCertificate::Statistical(r) => assert_eq!(r.verdict, Verdict::SingularStatistical),
        other => panic!("expected statistical evidence, got {other:?}"),
    }
}

#[test]
fn fundamental_systems_of_the_examples() {
    let fp2 = fundamental_partition(&example2(rat(1, 2)), &quick()).unwrap();
    assert_eq!(fp2.num_classes(), 4);
    assert!(fp2.diagnostics.is_empty());
    assert!((0..4).all(|k| fp2.class_is_exact(k)));
    match &fp2.pair(0, 1).unwrap().certificate {
        MergeCertificate::SupportSeparation { word, mass_i, mass_j } => {
            assert_eq!(word.to_string(), "[1,0,0]");
            assert_eq!((mass_i, mass_j), (&int(0), &rat(1, 4)));
        }
        other => panic!("{other:?}"),
    }

    let fp3 = fundamental_partition(&example3(), &quick()).unwrap();
    assert_eq!(fp3.num_classes(), 1);
    assert_eq!(fp3.pair(0, 1).unwrap().certificate.kind(), "coupling_merge");
    assert_eq!(fp3.pair(0, 1).unwrap().grade(), "exact certificate");

    let fp4 = fundamental_partition(&example4(), &quick()).unwrap();
    assert_eq!(fp4.num_classes(), 2);
    assert_eq!(fp4.pair(0, 1).unwrap().grade(), "statistical, seed=5");
    assert_eq!(fp4.classify_point(&half_sqrt2()).unwrap(), 1);
    assert_eq!(fp4.classify_point(&pt(1, 2)).unwrap(), 0);
}

#[test]
fn classification_follows_ownership() {
    let fp = fundamental_partition(&example2(rat(1, 2)), &quick()).unwrap();
    assert_eq!(fp.classify_point(&pt(0, 1)).unwrap(), 0);
    assert_eq!(fp.classify_point(&pt(1, 9)).unwrap(), 1);
    assert_eq!(fp.classify_point(&pt(1, 3)).unwrap(), 2);
    assert_eq!(fp.classify_point(&pt(1, 1)).unwrap(), 3);
    assert!(matches!(fp.classify_point(&pt(3, 2)), Err(Error::OutOfDomain { .. })));
}

#[test]
fn lifted_system_reproduces_cylinders() {
    let spec = example2(rat(1, 2));
    let fp = fundamental_partition(&spec, &quick()).unwrap();
    assert!(lift_check(&spec, &fp, &pt(1, 1), 4, DEFAULT_BUDGET).unwrap().is_zero());
    assert!(lift_check(&spec, &fp, &pt(0, 1), 3, DEFAULT_BUDGET).unwrap().is_zero());
    assert!(lift_check(&spec, &fp, &pt(1, 1), 30, 1 << 10).unwrap_err().is_budget());

    let e3 = example3();
    let fp3 = fundamental_partition(&e3, &quick()).unwrap();
    // one class: E' is E relabelled
    assert_eq!(fp3.edges.len(), 2);
    for x in [pt(0, 1), pt(1, 2), pt(5, 7)] {
        assert!(lift_check(&e3, &fp3, &x, 5, DEFAULT_BUDGET).unwrap().is_zero());
    }
}

#[test]
fn lifted_operator_matches() {
    let spec = example2(rat(1, 2));
    let fp = fundamental_partition(&spec, &quick()).unwrap();
    for x in [pt(0, 1), pt(1, 9), pt(1, 5), pt(1, 1)] {
        let d = operator_discrepancy(&spec, &fp, |p| p.value.clone() * p.value.clone(), &x).unwrap();
        assert!(d.is_zero());
    }
}

#[test]
fn report_text_is_stable() {
    let spec = example2(rat(1, 2));
    let a = fundamental_partition(&spec, &quick()).unwrap().to_text();
    let b = fundamental_partition(&spec, &quick()).unwrap().to_text();
    assert_eq!(a, b);
    assert!(a.starts_with("breakpoints: 0/1, 1/9, 1/3\n"));
    assert!(a.contains("classes: 4"));
}
