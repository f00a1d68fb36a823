use std::time::Duration;

use num_traits::{One, Zero};
use proptest::prelude::*;
use taut_core::relcert::{batch_certify, certify_relation, exact_rank, pairing_matrix, parse_sparse};
use taut_core::scalar::{rat, rat_int, Rational};
use taut_core::spin3::relation_class;

/// Plain Gaussian elimination over ℚ.
fn naive_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for k in 0..cols {
                    let t = &f * &m[rank][k];
                    m[r][k] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn m04_pairing() {
    let m = pairing_matrix(0, 4, 1).unwrap();
    assert_eq!((m.rows.len(), m.cols.len()), (8, 1));
    assert!((0..8).all(|i| m.get(i, 0) == Rational::one()));
    assert_eq!(m.rank(), 1);
    assert_eq!(m.rows.len() - m.rank(), 7);
    let one = pairing_matrix(0, 3, 0).unwrap();
    assert_eq!(one.dense(), vec![vec![Rational::one()]]);
}

#[test]
fn m11_pairing_annihilates_relation() {
    let m = pairing_matrix(1, 1, 1).unwrap();
    assert_eq!((m.rows.len(), m.cols.len()), (3, 1));
    let mut col: Vec<Rational> = (0..3).map(|i| m.get(i, 0)).collect();
    col.sort();
    assert_eq!(col, vec![rat(1, 24), rat(1, 24), rat_int(1)]);
    let r = relation_class(1, 1, &[0], 1).unwrap();
    let mut total = Rational::zero();
    for (i, b) in m.rows.iter().enumerate() {
        total += r.coeff(b) * m.get(i, 0);
    }
    assert!(total.is_zero());
}

#[test]
fn rank_edge_cases() {
    assert_eq!(exact_rank(&[]), 0);
    assert_eq!(exact_rank(&vec![vec![Rational::zero(); 3]; 4]), 0);
    for k in 1..5 {
        let m: Vec<Vec<Rational>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { rat(i as i64 + 1, 3) } else { Rational::zero() }).collect())
            .collect();
        assert_eq!(exact_rank(&m), k);
    }
}

#[test]
fn sparse_round_trip() {
    let m = pairing_matrix(1, 2, 1).unwrap();
    let text = m.to_sparse();
    assert!(text.starts_with(&format!("{} {}\n", m.rows.len(), m.cols.len())));
    let (r, c, entries) = parse_sparse(&text).unwrap();
    assert_eq!((r, c), (m.rows.len(), m.cols.len()));
    assert_eq!(entries, m.entries);
    assert!(parse_sparse("2 2\n5 0 1\n").is_err());
    assert!(parse_sparse("").is_err());
}

#[test]
fn small_batch_is_certified_and_reproducible() {
    let a = batch_certify(2, None).unwrap();
    assert!(a.passed(), "{}", a.log());
    assert!(!a.truncated);
    assert!(a.log().lines().all(|l| l.starts_with("CERTIFIED ")));
    assert!(a.log().contains("CERTIFIED 0 4 1 0,0,0,0\n"));
    let b = batch_certify(2, None).unwrap();
    assert_eq!(a.log(), b.log());
    assert!(a.summary().starts_with(&format!("summary budget=2 relations={} certified={} failed=0", a.records.len(), a.records.len())));
}

#[test]
fn time_limit_gives_partial_report() {
    let r = batch_certify(4, Some(Duration::ZERO)).unwrap();
    assert!(r.truncated);
    assert!(r.records.is_empty());
    assert!(r.passed());
}

#[test]
fn getzler_relation() {
    let (rec, class) = certify_relation(1, &[1, 1, 1, 1], 2).unwrap();
    assert!(rec.certified, "{class}");
    assert!(!class.is_zero());
    assert_eq!(rec.line(), "CERTIFIED 1 4 2 1,1,1,1");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_matches_naive(rows in 1usize..6, cols in 1usize..6, seed in prop::collection::vec(-3i64..4, 36)) {
        let m: Vec<Vec<Rational>> = (0..rows)
            .map(|i| (0..cols).map(|j| rat(seed[i * 6 + j], 1 + (i + j) as i64 % 3)).collect())
            .collect();
        let r = exact_rank(&m);
        prop_assert_eq!(r, naive_rank(m.clone()));
        let mut flipped = m.clone();
        flipped.reverse();
        prop_assert_eq!(exact_rank(&flipped), r);
    }
}
