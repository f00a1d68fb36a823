//! The A₂ Frobenius manifold F = x²y/2 + y⁴/72 at τ = (0, y), φ = y/3, and
//! its R-matrix.
//!
//! The hat frame is ∂̂_x = φ^{1/4} ∂_x, ∂̂_y = φ^{-1/4} ∂_y. Everything fed to
//! the CohFT engine is in the flat frame (∂_x, ∂_y), where all exponents of
//! φ are integers.

use std::sync::Arc;

use dashmap::DashMap;
use num_traits::{One, Zero};

use super::{b_series, parity_part, relation_class};
use crate::cohft::{unit_r_action, CohFT, CohFTTable, EulerData, FrobeniusData, Mat, RMatrix, SharedCohFT, Tqft};
use crate::error::{Result, TautError};
use crate::scalar::{rat, rat_int, PhiScalar, Rational, Scalar};
use crate::strata::TautClass;

fn phi(c: Rational, quarters: i32) -> PhiScalar {
    PhiScalar::monomial(c, quarters)
}

fn antidiagonal<S: Scalar>() -> Mat<S> {
    vec![vec![S::zero(), S::one()], vec![S::one(), S::zero()]]
}

fn euler_weights() -> Vec<Rational> {
    vec![rat_int(1), rat(2, 3)]
}

/// A₂ at τ = 0 over the rationals (∂_y • ∂_y = 0): the Frobenius algebra of
/// Witten's 3-spin class.
pub fn witten_frobenius() -> FrobeniusData<Rational> {
    let (z, o) = (rat_int(0), rat_int(1));
    let product = vec![
        vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()]],
        vec![vec![z.clone(), o.clone()], vec![z.clone(), z.clone()]],
    ];
    FrobeniusData::new(antidiagonal(), antidiagonal(), vec![o, z.clone()], product)
        .and_then(|f| {
            f.with_euler(EulerData {
                alpha: euler_weights(),
                beta: vec![z.clone(), z.clone()],
                delta: rat(1, 3),
            })
        })
        .map(|f| f.with_mu(vec![vec![rat(-1, 6), z.clone()], vec![z.clone(), rat(1, 6)]]))
        .expect("A2 data at the origin is a valid Frobenius algebra")
}

/// A₂ at τ = (0, 3φ) in the flat frame, with symbolic φ.
pub fn a2_frobenius() -> FrobeniusData<PhiScalar> {
    let z = PhiScalar::zero();
    let o = PhiScalar::one();
    let p = PhiScalar::phi_pow(4);
    let product = vec![
        vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()]],
        vec![vec![z.clone(), o.clone()], vec![p.clone(), z.clone()]],
    ];
    FrobeniusData::new(antidiagonal(), antidiagonal(), vec![o, z.clone()], product)
        .and_then(|f| {
            f.with_euler(EulerData {
                alpha: euler_weights(),
                // E = x ∂_x + (2/3) y ∂_y at y = 3φ
                beta: vec![z.clone(), phi(rat_int(2), 4)],
                delta: rat(1, 3),
            })
        })
        .map(|f| f.with_mu(mu_hat()))
        .expect("A2 data is a valid Frobenius algebra")
}

/// A₂ in the hat frame: ∂̂_a • ∂̂_b = φ^{1/4} (∂̂_x or ∂̂_y), unit φ^{-1/4} ∂̂_x.
pub fn a2_frobenius_hat() -> FrobeniusData<PhiScalar> {
    let z = PhiScalar::zero();
    let q = PhiScalar::phi_pow(1);
    let product = vec![
        vec![vec![q.clone(), z.clone()], vec![z.clone(), q.clone()]],
        vec![vec![z.clone(), q.clone()], vec![q.clone(), z.clone()]],
    ];
    FrobeniusData::new(antidiagonal(), antidiagonal(), vec![PhiScalar::phi_pow(-1), z], product)
        .map(|f| f.with_mu(mu_hat()))
        .expect("A2 hat-frame data is a valid Frobenius algebra")
}

/// Quantum multiplication by E at x = 0, hat frame.
pub fn xi_hat() -> Mat<PhiScalar> {
    let c = phi(rat_int(2), 6);
    vec![vec![PhiScalar::zero(), c.clone()], vec![c, PhiScalar::zero()]]
}

pub fn mu_hat() -> Mat<PhiScalar> {
    vec![
        vec![PhiScalar::from_rational(rat(-1, 6)), PhiScalar::zero()],
        vec![PhiScalar::zero(), PhiScalar::from_rational(rat(1, 6))],
    ]
}

/// Solves [R_{m+1}, ξ] = (m + μ) R_m from R_0 = 1 (hat frame).
pub fn a2_rmatrix_recursion(order: usize) -> Result<RMatrix<PhiScalar>> {
    let mut coeffs: Vec<Mat<PhiScalar>> = vec![vec![
        vec![PhiScalar::one(), PhiScalar::zero()],
        vec![PhiScalar::zero(), PhiScalar::one()],
    ]];
    for m in 0..order as i64 {
        let r = &coeffs[m as usize];
        let (a, b, c, d) = (&r[0][0], &r[0][1], &r[1][0], &r[1][1]);
        // divide by 2φ^{3/2} and the 1/6 from μ in one step
        let over = |x: &PhiScalar, k: i64| x.scaled(&rat(k, 12)).shift(-6);
        let x = over(b, 6 * m - 1);
        let y = over(a, 6 * m - 1);
        if x != over(c, -(6 * m + 1)) || y != over(d, -(6 * m + 1)) {
            return Err(TautError::Internal(format!("recursion is inconsistent at m = {m}")));
        }
        let den = 12 * (m + 1);
        coeffs.push(vec![
            vec![x.scaled(&rat(6 * m + 7, den)), y.scaled(&rat(6 * m + 7, den))],
            vec![y.scaled(&rat(-(6 * m + 5), den)), x.scaled(&rat(-(6 * m + 5), den))],
        ]);
    }
    RMatrix::new(coeffs)
}

/// R(z) = [[B₁^even, -B₁^odd], [-B₀^odd, B₀^even]](z / (1728 φ^{3/2})), hat
/// frame.
pub fn a2_rmatrix_closed(order: usize) -> Result<RMatrix<PhiScalar>> {
    let b0 = b_series(0, order);
    let b1 = b_series(1, order);
    let (b0e, b0o) = (parity_part(&b0, false), parity_part(&b0, true));
    let (b1e, b1o) = (parity_part(&b1, false), parity_part(&b1, true));
    let coeffs = (0..=order)
        .map(|m| {
            let scale = Rational::one() / Rational::from_integer(num_bigint::BigInt::from(1728).pow(m as u32));
            let at = |c: &Rational| phi(c * &scale, -6 * m as i32);
            vec![vec![at(&b1e[m]), at(&-b1o[m].clone())], vec![at(&-b0o[m].clone()), at(&b0e[m])]]
        })
        .collect();
    RMatrix::new(coeffs)
}

/// Conjugates a hat-frame matrix series into the flat frame.
pub fn to_flat_frame(r: &RMatrix<PhiScalar>) -> Result<RMatrix<PhiScalar>> {
    // flat coordinates are diag(φ^{1/4}, φ^{-1/4}) times hat coordinates
    let shifts = [[0, 2], [-2, 0]];
    let coeffs = r
        .coeffs()
        .iter()
        .map(|m| {
            (0..2)
                .map(|i| (0..2).map(|j| m[i][j].shift(shifts[i][j])).collect())
                .collect()
        })
        .collect();
    RMatrix::new(coeffs)
}

/// The A₂ R-matrix in the flat frame.
pub fn a2_rmatrix(order: usize) -> Result<RMatrix<PhiScalar>> {
    to_flat_frame(&a2_rmatrix_closed(order)?)
}

/// ω_{g,n}(∂̂_x^{n₀} ⊗ ∂̂_y^{n₁}) = 2^g φ^{(2g-2+n)/4} when g + n₁ is odd.
pub fn a2_tqft_value(g: u32, n0: usize, n1: usize) -> PhiScalar {
    if (g as usize + n1) % 2 == 0 {
        return PhiScalar::zero();
    }
    let two_g = Rational::from_integer(num_bigint::BigInt::from(2).pow(g));
    phi(two_g, 2 * g as i32 - 2 + (n0 + n1) as i32)
}

/// Shifted Witten class as R.ω with the flat A₂ R-matrix of the given order.
pub fn shifted_witten_action(order: usize) -> Result<SharedCohFT<PhiScalar>> {
    let frob = Arc::new(a2_frobenius());
    unit_r_action(a2_rmatrix(order)?, Arc::new(Tqft::new(frob)))
}

/// W^τ_{g,n}(∂_{a₁} ⊗ ⋯) = 2^g Σ_d φ^{(3/2)(D-d)} 1728^{-d} R^d_{g,A}.
pub fn shifted_witten_formula(g: u32, a: &[u8]) -> Result<TautClass<PhiScalar>> {
    let n = a.len();
    let dim = 3 * g as i64 - 3 + n as i64;
    if dim < 0 {
        return Err(TautError::Unstable { g, n });
    }
    let n1: i64 = a.iter().map(|&x| x as i64).sum();
    let two_g = Rational::from_integer(num_bigint::BigInt::from(2).pow(g));
    let mut out = TautClass::zero(g, n)?;
    for d in 0..=dim as u32 {
        let r = relation_class(g, n, a, d)?;
        if r.is_zero() {
            continue;
        }
        let scale = &two_g / Rational::from_integer(num_bigint::BigInt::from(1728).pow(d));
        // quarters of φ: 6(D - d) = 2(g - 1 + n₁) - 6d
        let quarters = (2 * (g as i64 - 1 + n1) - 6 * d as i64) as i32;
        out.add_assign(&r.map_coeffs(|c| phi(c * &scale, quarters)))?;
    }
    Ok(out)
}

/// The formula side of the shifted Witten class, as a CohFT.
pub struct ShiftedWittenFormula {
    frob: Arc<FrobeniusData<PhiScalar>>,
    memo: DashMap<(u32, Vec<usize>), TautClass<PhiScalar>>,
}

impl ShiftedWittenFormula {
    pub fn new() -> Self {
        ShiftedWittenFormula {
            frob: Arc::new(a2_frobenius()),
            memo: DashMap::new(),
        }
    }
}

impl Default for ShiftedWittenFormula {
    fn default() -> Self {
        Self::new()
    }
}

impl CohFT<PhiScalar> for ShiftedWittenFormula {
    fn frobenius(&self) -> &Arc<FrobeniusData<PhiScalar>> {
        &self.frob
    }

    fn eval(&self, g: u32, args: &[usize]) -> Result<TautClass<PhiScalar>> {
        let key = (g, args.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let a: Vec<u8> = args
            .iter()
            .map(|&x| match x {
                0 | 1 => Ok(x as u8),
                _ => Err(TautError::InvalidArgument(format!("basis index {x}"))),
            })
            .collect::<Result<_>>()?;
        let v = shifted_witten_formula(g, &a)?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

/// The shifted Witten class, materialized from the R-matrix action for all
/// (g, n) with 3g - 3 + n ≤ cap.
pub fn shifted_witten_table(cap: u32) -> Result<CohFTTable<PhiScalar>> {
    let omega = shifted_witten_action(cap.max(1) as usize)?;
    CohFTTable::materialize(omega.as_ref(), cap)
}
