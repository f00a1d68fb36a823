//! Witten–Kontsevich correlators ⟨τ_{d_1} ⋯ τ_{d_n}⟩_g by the DVV recursion.

use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

use crate::error::{Result, TautError};
use crate::scalar::{rat, Rational};

static MEMO: Lazy<DashMap<(u32, Vec<u32>), Rational>> = Lazy::new(DashMap::new);

/// (2k - 1)!! with (-1)!! = 1.
fn odd_double_factorial(k: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut j = 2 * k - 1;
    while j > 1 {
        acc *= j;
        j -= 2;
    }
    acc
}

fn dfr(k: i64) -> Rational {
    Rational::from_integer(odd_double_factorial(k))
}

/// ∫_{M̄_{g,n}} ψ_1^{d_1} ⋯ ψ_n^{d_n}.
pub fn psi_integral(g: u32, d: &[u32]) -> Result<Rational> {
    if 2 * g as i64 - 2 + d.len() as i64 <= 0 {
        return Err(TautError::Unstable { g, n: d.len() });
    }
    Ok(correlator(g, d))
}

/// Same as [`psi_integral`] but returns 0 on unstable input.
pub fn correlator(g: u32, d: &[u32]) -> Rational {
    let n = d.len() as i64;
    if 2 * g as i64 - 2 + n <= 0 {
        return Rational::zero();
    }
    if d.iter().map(|&x| x as i64).sum::<i64>() != 3 * g as i64 - 3 + n {
        return Rational::zero();
    }
    let mut key = d.to_vec();
    key.sort_unstable_by(|a, b| b.cmp(a));
    if let Some(v) = MEMO.get(&(g, key.clone())) {
        return v.clone();
    }
    let value = compute(g, &key);
    MEMO.insert((g, key), value.clone());
    value
}

fn compute(g: u32, d: &[u32]) -> Rational {
    if d[0] == 0 {
        // dimension count forces (g, n) = (0, 3)
        return Rational::one();
    }
    if g == 1 && d == [1] {
        return rat(1, 24);
    }
    let k = d[0] as i64 - 1;
    let s = &d[1..];
    let mut acc = Rational::zero();
    for j in 0..s.len() {
        let dj = s[j] as i64;
        let mut rest: Vec<u32> = s.to_vec();
        rest.remove(j);
        rest.push((k + dj) as u32);
        acc += dfr(k + dj + 1) / dfr(dj) * correlator(g, &rest);
    }
    let mut quad = Rational::zero();
    for r in 0..k {
        let sv = k - 1 - r;
        let w = dfr(r + 1) * dfr(sv + 1);
        let mut term = Rational::zero();
        if g >= 1 {
            let mut args = s.to_vec();
            args.push(r as u32);
            args.push(sv as u32);
            term += correlator(g - 1, &args);
        }
        for mask in 0u32..(1 << s.len()) {
            let mut left = vec![r as u32];
            let mut right = vec![sv as u32];
            for (i, &x) in s.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    left.push(x);
                } else {
                    right.push(x);
                }
            }
            for g1 in 0..=g {
                let a = correlator(g1, &left);
                if a.is_zero() {
                    continue;
                }
                term += a * correlator(g - g1, &right);
            }
        }
        quad += w * term;
    }
    (acc + quad / Rational::from_integer(BigInt::from(2))) / dfr(k + 2)
}
