//! Truncated End(V)- and V-valued power series.

use std::fmt;

use crate::error::{Result, TautError};
use crate::scalar::{rat, Scalar};

/// Square matrix acting on column vectors: `m[i][j]` is the e_i-component of
/// the image of e_j.
pub type Mat<S> = Vec<Vec<S>>;

pub fn identity<S: Scalar>(r: usize) -> Mat<S> {
    (0..r)
        .map(|i| (0..r).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect()
}

pub fn zeros<S: Scalar>(r: usize) -> Mat<S> {
    vec![vec![S::zero(); r]; r]
}

pub fn mat_mul<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    let r = a.len();
    let mut out = zeros::<S>(r);
    for i in 0..r {
        for k in 0..r {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..r {
                if !b[k][j].is_zero() {
                    out[i][j].add_to(&a[i][k].times(&b[k][j]));
                }
            }
        }
    }
    out
}

pub fn mat_add<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.plus(q)).collect())
        .collect()
}

pub fn mat_scale<S: Scalar>(a: &Mat<S>, s: &S) -> Mat<S> {
    a.iter().map(|row| row.iter().map(|x| x.times(s)).collect()).collect()
}

pub fn transpose<S: Scalar>(a: &Mat<S>) -> Mat<S> {
    let r = a.len();
    (0..r).map(|i| (0..r).map(|j| a[j][i].clone()).collect()).collect()
}

pub fn mat_vec<S: Scalar>(a: &Mat<S>, v: &[S]) -> Vec<S> {
    a.iter()
        .map(|row| {
            let mut acc = S::zero();
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    acc.add_to(&x.times(y));
                }
            }
            acc
        })
        .collect()
}

fn is_zero_mat<S: Scalar>(a: &Mat<S>) -> bool {
    a.iter().all(|row| row.iter().all(|x| x.is_zero()))
}

/// R(z) = 1 + R_1 z + ⋯ + R_K z^K, known exactly up to order K.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix<S> {
    coeffs: Vec<Mat<S>>,
}

impl<S: Scalar> RMatrix<S> {
    /// `coeffs[0]` must be the identity.
    pub fn new(coeffs: Vec<Mat<S>>) -> Result<Self> {
        let r = coeffs.first().map(Vec::len).unwrap_or(0);
        if coeffs.is_empty() || coeffs[0] != identity(r) {
            return Err(TautError::InvalidArgument("R(0) must be the identity".into()));
        }
        if coeffs.iter().any(|m| m.len() != r || m.iter().any(|row| row.len() != r)) {
            return Err(TautError::InvalidArgument("R coefficients must be square of one size".into()));
        }
        Ok(RMatrix { coeffs })
    }

    pub fn identity(r: usize, order: usize) -> Self {
        let mut coeffs = vec![identity(r)];
        coeffs.extend((0..order).map(|_| zeros(r)));
        RMatrix { coeffs }
    }

    pub fn rank(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Mat<S> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| zeros(self.rank()))
    }

    pub fn coeffs(&self) -> &[Mat<S>] {
        &self.coeffs
    }

    /// Product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let r = self.rank();
        let mut coeffs = vec![zeros(r); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] = mat_add(&coeffs[i + j], &mat_mul(a, b));
            }
        }
        RMatrix { coeffs }
    }

    /// Series inverse: R^{-1} = Σ_k (1 - R)^k.
    pub fn inverse(&self) -> Self {
        let r = self.rank();
        let order = self.order();
        let mut inv = vec![zeros(r); order + 1];
        inv[0] = identity(r);
        for k in 1..=order {
            // Σ_{j=0}^{k} R_j inv_{k-j} = 0
            let mut acc = zeros(r);
            for j in 1..=k {
                acc = mat_add(&acc, &mat_mul(&self.coeffs[j], &inv[k - j]));
            }
            inv[k] = mat_scale(&acc, &S::from_int(-1));
        }
        RMatrix { coeffs: inv }
    }

    /// R*(z) = η^{-1} R(z)^t η.
    pub fn adjoint(&self, eta: &Mat<S>, eta_inv: &Mat<S>) -> Self {
        RMatrix {
            coeffs: self
                .coeffs
                .iter()
                .map(|m| mat_mul(&mat_mul(eta_inv, &transpose(m)), eta))
                .collect(),
        }
    }

    /// Whether R(z) R*(-z) = 1 through the truncation order.
    pub fn is_symplectic(&self, eta: &Mat<S>, eta_inv: &Mat<S>) -> bool {
        let adj = self.adjoint(eta, eta_inv);
        let flipped = RMatrix {
            coeffs: adj
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, m)| if k % 2 == 1 { mat_scale(m, &S::from_int(-1)) } else { m.clone() })
                .collect(),
        };
        let prod = self.mul(&flipped);
        prod.coeffs[0] == identity(self.rank()) && prod.coeffs[1..].iter().all(is_zero_mat)
    }

    /// Applies R(z) to a constant vector: the vector series Σ_k R_k v z^k.
    pub fn apply(&self, v: &[S]) -> Vec<Vec<S>> {
        self.coeffs.iter().map(|m| mat_vec(m, v)).collect()
    }

    /// Applies R(z) to a vector series, truncated at the smaller order.
    pub fn apply_series(&self, t: &TVector<S>) -> TVector<S> {
        let order = self.order().min(t.order());
        let r = self.rank();
        let mut coeffs = vec![vec![S::zero(); r]; order + 1];
        for (i, m) in self.coeffs.iter().enumerate().take(order + 1) {
            for j in 0..=(order - i) {
                let v = mat_vec(m, &t.coeff(j));
                for (c, x) in coeffs[i + j].iter_mut().zip(v) {
                    c.add_to(&x);
                }
            }
        }
        TVector { coeffs }
    }
}

impl<S: Scalar> fmt::Display for RMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.coeffs.iter().enumerate() {
            let rows: Vec<String> = m
                .iter()
                .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                .collect();
            writeln!(f, "z^{k}: [{}]", rows.join("; "))?;
        }
        Ok(())
    }
}

/// T(z) = T_2 z^2 + ⋯ + T_K z^K.
#[derive(Clone, Debug, PartialEq)]
pub struct TVector<S> {
    coeffs: Vec<Vec<S>>,
}

impl<S: Scalar> TVector<S> {
    /// `coeffs[k]` is T_k; entries for k = 0, 1 must vanish.
    pub fn new(coeffs: Vec<Vec<S>>) -> Result<Self> {
        if coeffs.iter().take(2).any(|v| v.iter().any(|x| !x.is_zero())) {
            return Err(TautError::InvalidArgument("T(z) must start at z^2".into()));
        }
        Ok(TVector { coeffs })
    }

    pub fn zero(r: usize, order: usize) -> Self {
        TVector {
            coeffs: vec![vec![S::zero(); r]; order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Vec<S> {
        match self.coeffs.get(k) {
            Some(v) => v.clone(),
            None => vec![S::zero(); self.coeffs.first().map(Vec::len).unwrap_or(0)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|v| v.iter().all(|x| x.is_zero()))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        TVector {
            coeffs: (0..len)
                .map(|k| {
                    self.coeff(k)
                        .iter()
                        .zip(other.coeff(k))
                        .map(|(a, b)| a.plus(&b))
                        .collect()
                })
                .collect(),
        }
    }

    /// T(z) = z (1 - R^{-1}(z)) 1, the translation making R.Ω unital.
    pub fn unit_translation(rinv: &RMatrix<S>, unit: &[S]) -> Self {
        let r = unit.len();
        let series = rinv.apply(unit);
        let mut coeffs = vec![vec![S::zero(); r]; rinv.order() + 2];
        for (k, v) in series.iter().enumerate().skip(1) {
            coeffs[k + 1] = v.iter().map(|x| x.negated()).collect();
        }
        TVector { coeffs }
    }
}

/// Bivariate matrix series B(z, w) = Σ z^i w^j B_{ij}; `coeffs[i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSeries<S> {
    pub degree: usize,
    pub coeffs: Vec<Vec<Mat<S>>>,
}

impl<S: Scalar> EdgeSeries<S> {
    /// (η^{-1} - R^{-1}(z) η^{-1} R^{-1}(w)^t) / (z + w) through total degree
    /// `degree`; fails unless the division is exact to that order.
    pub fn new(rinv: &RMatrix<S>, eta_inv: &Mat<S>, degree: usize) -> Result<Self> {
        if rinv.order() < degree + 1 {
            return Err(TautError::Truncation {
                have: rinv.order(),
                need: degree + 1,
            });
        }
        let r = rinv.rank();
        let top = degree + 1;
        // numerator N_{ij} for i + j <= top
        let mut num = vec![vec![zeros::<S>(r); top + 1]; top + 1];
        let left: Vec<Mat<S>> = (0..=top).map(|i| mat_mul(&rinv.coeff(i), eta_inv)).collect();
        for i in 0..=top {
            for j in 0..=(top - i) {
                let m = mat_mul(&left[i], &transpose(&rinv.coeff(j)));
                num[i][j] = mat_scale(&m, &S::from_int(-1));
            }
        }
        num[0][0] = mat_add(&num[0][0], eta_inv);
        let mut q = vec![vec![zeros::<S>(r); degree + 1]; degree + 1];
        if !is_zero_mat(&num[0][0]) {
            return Err(TautError::Remainder("edge numerator not divisible by z + w".into()));
        }
        for s in 1..=top {
            // N_{i,s-i} = Q_{i-1,s-i} + Q_{i,s-1-i}
            let mut prev = zeros::<S>(r);
            for i in 0..s {
                let cur = mat_add(&num[i][s - i], &mat_scale(&prev, &S::from_int(-1)));
                q[i][s - 1 - i] = cur.clone();
                prev = cur;
            }
            if num[s][0] != prev {
                return Err(TautError::Remainder("edge numerator not divisible by z + w".into()));
            }
        }
        Ok(EdgeSeries { degree, coeffs: q })
    }

    pub fn coeff(&self, i: usize, j: usize) -> Option<&Mat<S>> {
        self.coeffs.get(i).and_then(|row| row.get(j))
    }
}

/// exp(A(z)) truncated at `order`, for A(z) without constant term.
pub fn exp_series<S: Scalar>(a: &[Mat<S>], order: usize) -> RMatrix<S> {
    let r = a[0].len();
    let a_series = RMatrix {
        coeffs: (0..=order)
            .map(|k| if k == 0 { zeros(r) } else { a.get(k).cloned().unwrap_or_else(|| zeros(r)) })
            .collect(),
    };
    let mut out = RMatrix::identity(r, order);
    let mut power = RMatrix::identity(r, order);
    for m in 1..=order {
        power = mul_raw(&power, &a_series, order);
        let w = S::from_rational(inv_factorial(m));
        for (o, c) in out.coeffs.iter_mut().zip(&power.coeffs) {
            *o = mat_add(o, &mat_scale(c, &w));
        }
    }
    out
}

fn inv_factorial(m: usize) -> crate::scalar::Rational {
    let mut f: i64 = 1;
    for k in 2..=m as i64 {
        f *= k;
    }
    rat(1, f)
}

fn mul_raw<S: Scalar>(a: &RMatrix<S>, b: &RMatrix<S>, order: usize) -> RMatrix<S> {
    let r = a.rank();
    let mut coeffs = vec![zeros(r); order + 1];
    for (i, x) in a.coeffs.iter().enumerate().take(order + 1) {
        for (j, y) in b.coeffs.iter().enumerate().take(order + 1 - i) {
            coeffs[i + j] = mat_add(&coeffs[i + j], &mat_mul(x, y));
        }
    }
    RMatrix { coeffs }
}
