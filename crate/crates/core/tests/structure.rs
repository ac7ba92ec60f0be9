use std::collections::BTreeSet;

use num_traits::One;

use wps::corpus;
use wps::rational::{int, ratio, Rational};
use wps::spaces::{Interval, PointSet, Subset};
use wps::wps::{FiniteSystem, Wps};

fn point(x: Rational) -> Interval {
    Interval::new(x.clone(), x).unwrap()
}

fn reals(s: Subset) -> PointSet {
    match s {
        Subset::Reals(p) => p,
        Subset::Atoms(_) => panic!("expected an interval subset"),
    }
}

#[test]
fn different_invariants_structure() {
    let e = corpus::entry("different-invariants").unwrap();
    let a = e.a.as_interval().unwrap();
    assert_eq!(reals(e.a.fixed_points()), PointSet::from_parts(vec![point(int(0)), point(ratio(2, 3))]));
    assert_eq!(reals(e.a.branching_points()), PointSet::point(int(1)));
    assert_eq!(a.branching_edges(), BTreeSet::from([(int(0), int(1))]));
    assert_eq!(a.edge_weight(&int(0), &int(1)).unwrap(), int(3));
    assert_eq!(a.edge_weight(&int(0), &ratio(1, 2)).unwrap(), int(2));
    assert!(e.a.is_well_supported());
}

#[test]
fn identity_and_zero_map() {
    let e = corpus::entry("cpc-distinct-btc").unwrap();
    let a = e.a.as_interval().unwrap();
    assert_eq!(reals(e.a.branching_points()), PointSet::point(int(0)));
    assert_eq!(reals(e.a.fixed_points()), PointSet::from_parts(vec![Interval::new(int(0), int(1)).unwrap()]));
    assert_eq!(a.branching_edges(), BTreeSet::from([(int(0), int(0))]));
    assert_eq!(a.edge_weight(&int(0), &int(0)).unwrap(), int(1));
    let n = a.normalize().unwrap();
    let one = wps::spaces::PlFunc::constant(&n.components, &n.whole(), int(1));
    let p = n.positive_operator(&one).unwrap();
    for x in [int(0), ratio(1, 3), int(1)] {
        assert!(p.eval(&x).unwrap().is_one());
    }
}

#[test]
fn sinks_are_not_well_supported() {
    let m = |rows: &[[i64; 2]; 2]| rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect::<Vec<Vec<_>>>();
    let labels = vec!["p".to_string(), "q".to_string()];
    let sink = FiniteSystem::from_matrix(labels.clone(), &m(&[[1, 0], [1, 0]])).unwrap();
    assert!(!Wps::Finite(sink.clone()).is_well_supported());
    assert!(sink.normalize().is_err() || !sink.is_well_supported());
    let full = FiniteSystem::from_matrix(labels, &m(&[[1, 0], [1, 2]])).unwrap();
    assert!(full.is_well_supported());
    assert_eq!(full.fixed_points(), BTreeSet::from([0, 1]));
    assert_eq!(full.edge_weight((1, 0)).unwrap(), int(1));
}
