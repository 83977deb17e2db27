//! Structural invariants on seeded random systems and samples.

use fundsys::dynamics::w1_distance;
use fundsys::measures::{enumerate_cylinders, martingale_discrepancy, DEFAULT_BUDGET};
use fundsys::model::{validate_system, Point};
use fundsys::partition::{fundamental_partition, lift_check, operator_discrepancy, PartitionParams};
use fundsys::sampling::substream;
use fundsys::scalar::rat;
use fundsys::specimens::random_piecewise;
use fundsys::{Error, Rational};
use num_traits::{One, Zero};
use rand::Rng;

fn grid_point(rng: &mut impl Rng) -> Point<Rational> {
    Point::rational(rat(rng.random_range(0..=48), 48))
}

#[test]
fn random_systems_are_kolmogorov_consistent() {
    for seed in 0..60 {
        let spec = random_piecewise(seed);
        assert!(validate_system(&spec).is_ok());
        let mut rng = substream(seed, 1);
        let x = grid_point(&mut rng);
        let depth = if spec.edges.len() == 2 { 8 } else { 5 };
        let mut prev = enumerate_cylinders(&spec, &x, 0, DEFAULT_BUDGET, false).unwrap();
        for n in 1..=depth {
            let level = enumerate_cylinders(&spec, &x, n, DEFAULT_BUDGET, false).unwrap();
            let total = level.iter().fold(Rational::zero(), |a, (_, m)| a + m);
            assert_eq!(total, Rational::one(), "seed {seed}, depth {n}");
            for (word, mass) in &prev {
                let split = level
                    .iter()
                    .filter(|(w, _)| w.prefix(n - 1) == *word)
                    .fold(Rational::zero(), |a, (_, m)| a + m);
                assert_eq!(&split, mass, "seed {seed}, word {word}");
            }
            prev = level;
        }
    }
}

#[test]
fn random_fundamental_systems_lift_exactly() {
    let mut checked = 0;
    for seed in 0..40 {
        let spec = random_piecewise(seed);
        let mut params = PartitionParams::new(seed);
        params.xi.num_samples = 200;
        params.xi.n_mc = 200;
        params.xi.n_exact = 6;
        let fp = match fundamental_partition(&spec, &params) {
            Ok(fp) => fp,
            // irrational slopes never occur, but some random maps need more breakpoints
            Err(e) if e.is_budget() => continue,
            Err(e) => panic!("seed {seed}: {e}"),
        };
        let mut rng = substream(seed, 2);
        for _ in 0..3 {
            let x = grid_point(&mut rng);
            let depth = if fp.edges.len() <= 4 { 6 } else { 4 };
            match lift_check(&spec, &fp, &x, depth, DEFAULT_BUDGET) {
                Ok(d) => assert!(d.is_zero(), "seed {seed}, x = {x}: {d}"),
                Err(Error::BudgetExceeded { .. }) => {}
                Err(e) => panic!("seed {seed}: {e}"),
            }
            for f in [|p: &Point<Rational>| p.value.clone(), |p: &Point<Rational>| p.value.clone() * p.value.clone()] {
                assert!(operator_discrepancy(&spec, &fp, f, &x).unwrap().is_zero());
            }
        }
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} random systems refined");
}

#[test]
fn martingale_identity_on_equivalent_pairs() {
    // points of one partition cell start identical measures level by level
    for seed in 0..20 {
        let spec = random_piecewise(seed);
        let Ok(fp) = fundamental_partition(&spec, &PartitionParams::new(seed)) else { continue };
        for cell in &fp.partition.cells {
            if cell.interval.is_degenerate() {
                continue;
            }
            let x = Point::rational(cell.interval.representative());
            let y = Point::rational(cell.interval.lo.clone() + cell.interval.length() / rat(3, 1));
            assert!(cell.contains(&y));
            for (m, n) in [(0, 3), (1, 4), (2, 2)] {
                let gap = martingale_discrepancy(&spec, &x, &y, m, n, DEFAULT_BUDGET).unwrap();
                assert!(gap.is_zero());
            }
        }
    }
}

#[test]
fn w1_is_a_metric_on_random_samples() {
    fn sample(rng: &mut impl Rng) -> Vec<Rational> {
        let n = rng.random_range(1..8);
        (0..n).map(|_| rat(rng.random_range(0..=20), 20)).collect()
    }
    let mut rng = substream(2024, 0);
    for _ in 0..200 {
        let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
        let ab = w1_distance(&a, &b).unwrap();
        assert!(w1_distance(&a, &a).unwrap().is_zero());
        assert_eq!(ab, w1_distance(&b, &a).unwrap());
        assert!(ab >= Rational::zero());
        assert!(ab <= w1_distance(&a, &c).unwrap() + w1_distance(&c, &b).unwrap());
    }
}
