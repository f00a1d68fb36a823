mod common;

use std::sync::Arc;

use common::{random_frobenius, random_symplectic, random_translation};
use taut_core::cohft::{
    argument_tuples, check_axioms, r_action, same_class, stable_types, translation_action, unit_r_action,
    CohFT, CohFTTable, FrobeniusData, RMatrix, SharedCohFT, TVector, Tqft,
};
use taut_core::scalar::{rat_int, Rational};
use taut_core::strata::{pushforward_forgetful, TautClass};
use taut_core::TautError;

const TYPES: [(u32, usize); 4] = [(0, 4), (0, 5), (1, 1), (1, 2)];

fn tqft(f: &Arc<FrobeniusData<Rational>>) -> SharedCohFT<Rational> {
    Arc::new(Tqft::new(f.clone()))
}

/// Gluing oracle: split off a pair of pants or cut a handle.
fn glued(f: &FrobeniusData<Rational>, g: u32, args: &[usize]) -> Rational {
    let r = f.rank();
    let n = args.len();
    if g == 0 && n == 3 {
        return f.three_point(args[0], args[1], args[2]);
    }
    let mut acc = rat_int(0);
    for j in 0..r {
        for k in 0..r {
            let w = &f.eta_inv[j][k];
            if *w == rat_int(0) {
                continue;
            }
            if g > 0 {
                let mut a = args.to_vec();
                a.extend([j, k]);
                acc += w * glued(f, g - 1, &a);
            } else {
                let mut rest = vec![k];
                rest.extend(&args[2..]);
                acc += w * f.three_point(args[0], args[1], j) * glued(f, 0, &rest);
            }
        }
    }
    acc
}

fn assert_same(a: &TautClass<Rational>, b: &TautClass<Rational>) {
    assert!(same_class(a, b).unwrap(), "classes differ:\n{a}\nvs\n{b}");
}

fn compare(x: &dyn CohFT<Rational>, y: &dyn CohFT<Rational>, types: &[(u32, usize)]) {
    for &(g, n) in types {
        for args in argument_tuples(x.frobenius().rank(), n) {
            assert_same(&x.eval(g, &args).unwrap(), &y.eval(g, &args).unwrap());
        }
    }
}

#[test]
fn tqft_is_independent_of_decomposition() {
    for seed in 0..5 {
        let f = random_frobenius(seed);
        let t = Tqft::new(f.clone());
        for (g, n) in [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (3, 0)] {
            for args in argument_tuples(2, n) {
                assert_eq!(t.value(g, &args), glued(&f, g, &args), "g={g} {args:?}");
            }
        }
    }
}

#[test]
fn tqft_satisfies_axioms() {
    let f = random_frobenius(7);
    let report = check_axioms(tqft(&f).as_ref(), 2, true).unwrap();
    assert!(report.passed(), "{report}");
    assert!(report.checked > 50);
}

#[test]
fn identity_r_matrix_is_trivial() {
    let f = random_frobenius(3);
    let omega = tqft(&f);
    let id = RMatrix::identity(2, 3);
    compare(r_action(id.clone(), omega.clone()).unwrap().as_ref(), omega.as_ref(), &TYPES);
    compare(unit_r_action(id, omega.clone()).unwrap().as_ref(), omega.as_ref(), &TYPES);
    let zero = translation_action(TVector::zero(2, 4), omega.clone()).unwrap();
    compare(zero.as_ref(), omega.as_ref(), &TYPES);
}

#[test]
fn three_point_values_are_untouched() {
    let f = random_frobenius(11);
    let omega = tqft(&f);
    let r = random_symplectic(5, &f, 3, 3);
    let acted = r_action(r, omega.clone()).unwrap();
    for args in argument_tuples(2, 3) {
        assert_eq!(acted.eval(0, &args).unwrap(), omega.eval(0, &args).unwrap());
    }
}

#[test]
fn non_symplectic_r_is_rejected() {
    let f = random_frobenius(2);
    // 1 + z: R(z) R*(-z) = 1 - z^2
    let one = vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]];
    let zero = vec![vec![rat_int(0); 2]; 2];
    let bad = RMatrix::new(vec![one.clone(), one, zero]).unwrap();
    assert!(matches!(r_action(bad, tqft(&f)), Err(TautError::InvalidArgument(_))));
}

#[test]
fn truncation_is_enforced() {
    let f = random_frobenius(1);
    let acted = r_action(random_symplectic(1, &f, 2, 1), tqft(&f)).unwrap();
    assert!(acted.eval(1, &[0]).is_ok());
    assert!(matches!(acted.eval(0, &[0, 0, 0, 0, 0]), Err(TautError::Truncation { .. })));
}

#[test]
fn r_action_satisfies_axioms() {
    for seed in 0..2 {
        let f = random_frobenius(seed);
        let acted = r_action(random_symplectic(100 + seed, &f, 3, 3), tqft(&f)).unwrap();
        let report = check_axioms(acted.as_ref(), 2, false).unwrap();
        assert!(report.passed(), "seed {seed}: {report}");
    }
}

#[test]
fn r_action_is_a_left_action() {
    let f = random_frobenius(4);
    let ra = random_symplectic(20, &f, 3, 3);
    let rb = random_symplectic(21, &f, 3, 3);
    let omega = tqft(&f);
    let twice = r_action(rb.clone(), r_action(ra.clone(), omega.clone()).unwrap()).unwrap();
    let once = r_action(rb.mul(&ra), omega).unwrap();
    compare(twice.as_ref(), once.as_ref(), &TYPES);
}

#[test]
fn translations_add() {
    let f = random_frobenius(5);
    let omega = tqft(&f);
    let ta = random_translation(30, 2, 4);
    let tb = random_translation(31, 2, 4);
    let twice = translation_action(tb.clone(), translation_action(ta.clone(), omega.clone()).unwrap()).unwrap();
    let once = translation_action(ta.plus(&tb), omega).unwrap();
    compare(twice.as_ref(), once.as_ref(), &TYPES);
}

#[test]
fn translation_commutes_with_r() {
    let f = random_frobenius(6);
    let omega = tqft(&f);
    let r = random_symplectic(40, &f, 3, 6);
    let tb = random_translation(41, 2, 4);
    let ta = r.apply_series(&tb);
    let left = translation_action(ta, r_action(r.clone(), omega.clone()).unwrap()).unwrap();
    let right = r_action(r, translation_action(tb, omega).unwrap()).unwrap();
    compare(left.as_ref(), right.as_ref(), &TYPES);
}

#[test]
fn quadratic_translation_adds_kappa() {
    let f = random_frobenius(8);
    let omega = tqft(&f);
    let c = Rational::new(3.into(), 2.into());
    let t = TVector::new(vec![vec![rat_int(0); 2], vec![rat_int(0); 2], vec![c.clone(), rat_int(0)]]).unwrap();
    let moved = translation_action(t, omega.clone()).unwrap();
    for args in argument_tuples(2, 4) {
        let mut five = args.clone();
        five.push(0);
        let kappa1 = pushforward_forgetful(&omega.eval(0, &five).unwrap().times_psi(&[0, 0, 0, 0, 2]).unwrap()).unwrap();
        let got = moved.eval(0, &args).unwrap().degree_part(1);
        assert_eq!(got, kappa1.scaled(&c));
    }
}

#[test]
fn unit_r_action_preserves_unit_and_axioms() {
    for seed in 0..2 {
        let f = random_frobenius(50 + seed);
        let acted = unit_r_action(random_symplectic(60 + seed, &f, 3, 3), tqft(&f)).unwrap();
        let report = check_axioms(acted.as_ref(), 2, true).unwrap();
        assert!(report.passed(), "seed {seed}: {report}");
    }
}

#[test]
fn unit_r_action_is_a_left_action() {
    let f = random_frobenius(9);
    let ra = random_symplectic(70, &f, 3, 6);
    let rb = random_symplectic(71, &f, 3, 6);
    let omega = tqft(&f);
    let twice = unit_r_action(ra.clone(), unit_r_action(rb.clone(), omega.clone()).unwrap()).unwrap();
    let once = unit_r_action(ra.mul(&rb), omega).unwrap();
    compare(twice.as_ref(), once.as_ref(), &TYPES);
}

#[test]
fn perturbed_table_violates_splitting() {
    let f = random_frobenius(12);
    let acted = r_action(random_symplectic(13, &f, 2, 2), tqft(&f)).unwrap();
    let mut table = CohFTTable::materialize(acted.as_ref(), 2).unwrap();
    assert!(check_axioms(&table, 2, false).unwrap().passed());
    let bumped = table.eval(0, &[0, 0, 0]).unwrap().plus(&TautClass::fundamental(0, 3).unwrap()).unwrap();
    table.set(0, vec![0, 0, 0], bumped).unwrap();
    let report = check_axioms(&table, 2, false).unwrap();
    assert!(report.violations.iter().any(|v| v.contains("splitting")), "{report}");
}

#[test]
fn table_round_trip_and_bound() {
    let f = random_frobenius(14);
    let acted = r_action(random_symplectic(15, &f, 2, 2), tqft(&f)).unwrap();
    let table = CohFTTable::materialize(acted.as_ref(), 2).unwrap();
    assert_eq!(table.entries().count(), stable_types(2).iter().map(|&(_, n)| 1 << n).sum::<usize>());
    let text = table.serialize();
    assert!(text.starts_with("(0,3) [0 0 0] :"));
    let back = CohFTTable::parse(f.clone(), 2, &text).unwrap();
    assert_eq!(back, table);
    assert!(matches!(table.eval(1, &[0, 0, 0]), Err(TautError::OutOfBound { g: 1, n: 3 })));
}
