#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taut_core::cohft::series::{exp_series, mat_mul, transpose, zeros};
use taut_core::cohft::{FrobeniusData, Mat, RMatrix, TVector};
use taut_core::scalar::{rat, rat_int, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small(r: &mut ChaCha8Rng) -> Rational {
    rat(r.gen_range(-3..=3), r.gen_range(1..=2))
}

/// Two-dimensional algebra with e0 = 1, e1 • e1 = s e0 + t e1 and trace
/// ε(e0) = p, ε(e1) = q; η(ea, eb) = ε(ea • eb).
pub fn random_frobenius(seed: u64) -> Arc<FrobeniusData<Rational>> {
    let mut r = rng(seed);
    loop {
        let (s, t, p, q) = (small(&mut r), small(&mut r), small(&mut r), small(&mut r));
        let eta = vec![vec![p.clone(), q.clone()], vec![q.clone(), &s * &p + &t * &q]];
        let det = &eta[0][0] * &eta[1][1] - &eta[0][1] * &eta[1][0];
        if det == rat_int(0) {
            continue;
        }
        let eta_inv = vec![
            vec![&eta[1][1] / &det, -&eta[0][1] / &det],
            vec![-&eta[1][0] / &det, &eta[0][0] / &det],
        ];
        let z = rat_int(0);
        let o = rat_int(1);
        let product = vec![
            vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()]],
            vec![vec![z.clone(), o.clone()], vec![s.clone(), t.clone()]],
        ];
        return Arc::new(FrobeniusData::new(eta, eta_inv, vec![o, z], product).unwrap());
    }
}

/// A^* = η^{-1} A^t η.
pub fn adjoint(a: &Mat<Rational>, f: &FrobeniusData<Rational>) -> Mat<Rational> {
    mat_mul(&mat_mul(&f.eta_inv, &transpose(a)), &f.eta)
}

/// R = exp(A_1 z + ⋯ + A_trunc z^trunc) with A_k^* = (-1)^{k+1} A_k, to `order`.
pub fn random_symplectic(seed: u64, f: &FrobeniusData<Rational>, trunc: usize, order: usize) -> RMatrix<Rational> {
    let mut r = rng(seed);
    let dim = f.rank();
    let mut a = vec![zeros(dim)];
    for k in 1..=trunc {
        let m: Mat<Rational> = (0..dim).map(|_| (0..dim).map(|_| small(&mut r)).collect()).collect();
        let ms = adjoint(&m, f);
        let sign = if k % 2 == 1 { rat_int(1) } else { rat_int(-1) };
        let ak: Mat<Rational> = (0..dim)
            .map(|i| (0..dim).map(|j| (&m[i][j] + &sign * &ms[i][j]) / rat_int(2)).collect())
            .collect();
        a.push(ak);
    }
    exp_series(&a, order)
}

pub fn random_translation(seed: u64, dim: usize, order: usize) -> TVector<Rational> {
    let mut r = rng(seed);
    let mut coeffs = vec![vec![rat_int(0); dim]; 2];
    for _ in 2..=order {
        coeffs.push((0..dim).map(|_| small(&mut r)).collect());
    }
    TVector::new(coeffs).unwrap()
}
