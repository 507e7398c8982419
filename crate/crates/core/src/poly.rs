//! Polynomials of total degree at most `k` in `d` variables, stored as
//! coefficients over the monomials `X^alpha` listed in [`adk`](crate::mindex::adk) order.
//!
//! Since `adk(d, k)` is a prefix of `adk(d, k + 1)`, raising the degree
//! bound only appends zero coefficients, and the position of a monomial
//! does not depend on the bound it is stored under.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{inj_hface, t_geom_transp, AffineMap, VertexFamily};
use crate::mindex::{adk_inv, pbinom, table, MultiIndex};
use crate::scalar::Scalar;

/// Default relative tolerance for the face-vanishing precondition of
/// [`Poly::factor_on_face`].
pub const FACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr<T>", into = "PolyRepr<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Poly<T: Scalar = f64> {
    d: usize,
    k: usize,
    coeffs: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr<T> {
    d: usize,
    k: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> TryFrom<PolyRepr<T>> for Poly<T> {
    type Error = Error;

    fn try_from(r: PolyRepr<T>) -> Result<Self> {
        Poly::from_coeffs(r.d, r.k, r.coeffs)
    }
}

impl<T: Scalar> From<Poly<T>> for PolyRepr<T> {
    fn from(p: Poly<T>) -> Self {
        PolyRepr { d: p.d, k: p.k, coeffs: p.coeffs }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

impl<T: Scalar> Poly<T> {
    pub fn zero(d: usize, k: usize) -> Self {
        Poly { d, k, coeffs: vec![T::zero(); pbinom(d, k) + 1] }
    }

    pub fn constant(d: usize, k: usize, c: T) -> Self {
        let mut p = Self::zero(d, k);
        p.coeffs[0] = c;
        p
    }

    pub fn from_coeffs(d: usize, k: usize, coeffs: Vec<T>) -> Result<Self> {
        let n = pbinom(d, k) + 1;
        if coeffs.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "P_{k}^{d} has dimension {n}, got {} coefficients",
                coeffs.len()
            )));
        }
        Ok(Poly { d, k, coeffs })
    }

    /// `X^alpha` stored with degree bound `k`.
    pub fn monomial(k: usize, alpha: &MultiIndex) -> Result<Self> {
        let d = alpha.dim();
        let mut p = Self::zero(d, k);
        let i = adk_inv(d, k, alpha)?;
        p.coeffs[i] = T::one();
        Ok(p)
    }

    /// The coordinate function `x_j` in `P_1^d`.
    pub fn coordinate(d: usize, j: usize) -> Result<Self> {
        if j >= d {
            return Err(Error::IndexOutOfRange { index: j, max: d.saturating_sub(1) });
        }
        Self::monomial(1, &MultiIndex::scaled_unit(d, j, 1))
    }

    /// Affine function `c_0 + Σ a_j x_j`.
    pub fn affine(constant: T, linear: &[T]) -> Self {
        let mut coeffs = Vec::with_capacity(linear.len() + 1);
        coeffs.push(constant);
        coeffs.extend_from_slice(linear);
        Poly { d: linear.len(), k: 1, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Degree bound (not necessarily the exact degree).
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Result<T> {
        check_dim(self.d, alpha.dim())?;
        if alpha.sum() > self.k {
            return Ok(T::zero());
        }
        Ok(self.coeffs[adk_inv(self.d, self.k, alpha)?].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn convert<U: Scalar>(&self) -> Poly<U> {
        Poly { d: self.d, k: self.k, coeffs: self.coeffs.iter().map(Scalar::convert).collect() }
    }

    /// Same polynomial stored under the bound `k >= self.degree()`.
    pub fn embed(&self, k: usize) -> Result<Self> {
        if k < self.k {
            return Err(Error::InvalidArgument(format!("cannot embed P_{} into P_{k}", self.k)));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(pbinom(self.d, k) + 1, T::zero());
        Ok(Poly { d: self.d, k, coeffs })
    }

    /// Same polynomial stored under a smaller bound; fails if a dropped
    /// coefficient is nonzero.
    pub fn restrict(&self, k: usize) -> Result<Self> {
        if k >= self.k {
            return self.embed(k);
        }
        let n = pbinom(self.d, k) + 1;
        if self.coeffs[n..].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidArgument(format!("polynomial has terms of degree above {k}")));
        }
        Ok(Poly { d: self.d, k, coeffs: self.coeffs[..n].to_vec() })
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        check_dim(self.d, x.len())?;
        // powers[j][m] = x_j^m
        let powers: Vec<Vec<T>> = x
            .iter()
            .map(|xj| {
                let mut p = Vec::with_capacity(self.k + 1);
                p.push(T::one());
                for m in 1..=self.k {
                    p.push(p[m - 1].clone() * xj.clone());
                }
                p
            })
            .collect();
        let tbl = table(self.d, self.k);
        let mut acc = T::zero();
        for (c, alpha) in self.coeffs.iter().zip(tbl.rows()) {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (j, &a) in alpha.entries().iter().enumerate() {
                if a > 0 {
                    term = term * powers[j][a].clone();
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly { d: self.d, k: self.k, coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    /// Sum stored under the larger of the two degree bounds.
    pub fn add(&self, other: &Poly<T>) -> Result<Self> {
        self.axpy(&T::one(), other)
    }

    pub fn sub(&self, other: &Poly<T>) -> Result<Self> {
        self.axpy(&-T::one(), other)
    }

    /// `self + a * other`, stored under the larger degree bound.
    pub fn axpy(&self, a: &T, other: &Poly<T>) -> Result<Self> {
        check_dim(self.d, other.d)?;
        let k = self.k.max(other.k);
        let mut out = self.embed(k)?;
        for (o, c) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o = o.clone() + a.clone() * c.clone();
        }
        Ok(out)
    }

    /// Product, stored under the bound `k1 + k2`.
    pub fn mul(&self, other: &Poly<T>) -> Result<Self> {
        check_dim(self.d, other.d)?;
        let k = self.k + other.k;
        let mut out = Self::zero(self.d, k);
        let ta = table(self.d, self.k);
        let tb = table(other.d, other.k);
        for (ca, a) in self.coeffs.iter().zip(ta.rows()) {
            if ca.is_zero() {
                continue;
            }
            for (cb, b) in other.coeffs.iter().zip(tb.rows()) {
                if cb.is_zero() {
                    continue;
                }
                let idx = adk_inv(self.d, k, &a.add(b)?)?;
                out.coeffs[idx] = out.coeffs[idx].clone() + ca.clone() * cb.clone();
            }
        }
        Ok(out)
    }

    /// `self^n`, stored under the bound `n * k`.
    pub fn pow(&self, n: usize) -> Result<Self> {
        let mut acc = Self::constant(self.d, 0, T::one());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Partial derivative `∂^beta`, stored under the same bound.
    ///
    /// `∂^beta X^alpha = C X^(alpha - beta)` with `C` the product of the
    /// falling factorials `alpha_i (alpha_i - 1) ... (alpha_i - beta_i + 1)`,
    /// and zero as soon as some `alpha_i < beta_i`.
    pub fn derivative(&self, beta: &MultiIndex) -> Result<Self> {
        check_dim(self.d, beta.dim())?;
        let mut out = Self::zero(self.d, self.k);
        let tbl = table(self.d, self.k);
        for (c, alpha) in self.coeffs.iter().zip(tbl.rows()) {
            if c.is_zero() {
                continue;
            }
            let mut factor: i64 = 1;
            let mut lowered = Vec::with_capacity(self.d);
            let mut vanishes = false;
            for (&a, &b) in alpha.entries().iter().zip(beta.entries()) {
                if a < b {
                    vanishes = true;
                    break;
                }
                for m in 0..b {
                    factor *= (a - m) as i64;
                }
                lowered.push(a - b);
            }
            if vanishes {
                continue;
            }
            let idx = adk_inv(self.d, self.k, &MultiIndex(lowered))?;
            out.coeffs[idx] = out.coeffs[idx].clone() + c.clone() * T::from_i64(factor);
        }
        Ok(out)
    }

    /// `[∂_0 p, ..., ∂_{d-1} p]`.
    pub fn gradient(&self) -> Result<Vec<Self>> {
        (0..self.d).map(|j| self.derivative(&MultiIndex::scaled_unit(self.d, j, 1))).collect()
    }

    /// Euclidean division by the last variable: `p(x̃, x_d) = p0(x̃) + x_d p1(x)`.
    ///
    /// `p0` gathers the monomials free of the last variable (which is then
    /// dropped), `p1` the others with that exponent lowered by one.
    pub fn divide_by_last_var(&self) -> Result<(Poly<T>, Poly<T>)> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("division by the last variable needs d >= 1".into()));
        }
        let dd = self.d - 1;
        let mut p0 = Poly::zero(dd, self.k);
        let mut p1 = Poly::zero(self.d, self.k.saturating_sub(1));
        let tbl = table(self.d, self.k);
        for (c, alpha) in self.coeffs.iter().zip(tbl.rows()) {
            if c.is_zero() {
                continue;
            }
            let e = alpha.entries();
            if e[dd] == 0 {
                let idx = adk_inv(dd, self.k, &MultiIndex(e[..dd].to_vec()))?;
                p0.coeffs[idx] = c.clone();
            } else {
                let mut lowered = e.to_vec();
                lowered[dd] -= 1;
                let idx = adk_inv(self.d, p1.k, &MultiIndex(lowered))?;
                p1.coeffs[idx] = c.clone();
            }
        }
        Ok((p0, p1))
    }

    /// `p ∘ phi` for an affine `phi: R^n -> R^d`; the degree bound is kept.
    ///
    /// Each coordinate of `phi` is expanded as a degree-one polynomial and
    /// the monomials are rebuilt by repeated multiplication.
    pub fn pullback_affine(&self, phi: &AffineMap<T>) -> Result<Poly<T>> {
        check_dim(self.d, phi.out_dim())?;
        let n = phi.in_dim();
        let m = phi.matrix();
        // powers[j][e] = (phi_j)^e, stored under the bound e
        let powers: Vec<Vec<Poly<T>>> = (0..self.d)
            .map(|j| {
                let lin = Poly::affine(phi.offset()[j].clone(), m.row(j));
                let mut pw = vec![Poly::constant(n, 0, T::one())];
                for e in 1..=self.k {
                    let next = pw[e - 1].mul(&lin)?;
                    pw.push(next);
                }
                Ok(pw)
            })
            .collect::<Result<_>>()?;
        let mut out = Poly::<T>::zero(n, self.k);
        let tbl = table(self.d, self.k);
        for (c, alpha) in self.coeffs.iter().zip(tbl.rows()) {
            if c.is_zero() {
                continue;
            }
            let mut term = Poly::constant(n, 0, c.clone());
            for (j, &a) in alpha.entries().iter().enumerate() {
                if a > 0 {
                    term = term.mul(&powers[j][a])?;
                }
            }
            for (o, t) in out.coeffs.iter_mut().zip(term.coeffs) {
                *o = o.clone() + t;
            }
        }
        Ok(out)
    }

    /// Coefficient-wise comparison after embedding both into the common degree.
    pub fn approx_eq(&self, other: &Poly<T>, tol: f64) -> bool {
        self.max_coeff_diff(other).is_some_and(|e| e <= tol)
    }

    /// Largest coefficient difference after embedding into the common degree,
    /// or `None` when dimensions differ.
    pub fn max_coeff_diff(&self, other: &Poly<T>) -> Option<f64> {
        if self.d != other.d {
            return None;
        }
        let diff = self.sub(other).ok()?;
        Some(diff.max_abs_coeff())
    }

    /// Factors `p = L_i q` for a polynomial `p` of degree `k + 1` vanishing on
    /// the face hyperplane of `vtx` opposite vertex `i`, with `L_i` the P1
    /// Lagrange polynomial of that vertex; returns `q` of degree `k`.
    ///
    /// Vanishing is checked at the degree-`k + 1` Lagrange nodes of the face,
    /// each within `tol * max|coeff(p)|`. `p` is pulled back by the geometric
    /// transformation that sends the last reference face onto face `i`,
    /// divided by the last variable, and the quotient is pushed forward again.
    pub fn factor_on_face(&self, vtx: &VertexFamily<T>, i: usize, tol: f64) -> Result<Poly<T>> {
        let d = vtx.dim();
        check_dim(d, self.d)?;
        if d == 0 {
            return Err(Error::InvalidArgument("no face hyperplane in R^0".into()));
        }
        if i > d {
            return Err(Error::IndexOutOfRange { index: i, max: d });
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("a factor of degree -1 does not exist".into()));
        }
        let t = t_geom_transp(vtx, i)?;
        let t_inv = t.inverse().map_err(|_| Error::DegenerateVertices)?;

        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return Ok(Poly::zero(d, self.k - 1));
        }
        let inj = inj_hface(vtx, i)?;
        let face_nodes = table(d - 1, self.k);
        let kk = self.k as i64;
        let mut residual = 0.0f64;
        for alpha in face_nodes.rows() {
            let xr: Vec<T> = alpha.entries().iter().map(|&a| T::from_ratio(a as i64, kk)).collect();
            let x = inj.apply(&xr)?;
            let v = self.eval(&x)?;
            residual = residual.max(v.to_f64().abs());
            if T::EXACT && !v.is_zero() {
                return Err(Error::NotVanishingOnFace { face: i, residual });
            }
        }
        if residual > tol * scale {
            return Err(Error::NotVanishingOnFace { face: i, residual });
        }

        let p_hat = self.pullback_affine(&t)?;
        let (_p0, q_hat) = p_hat.divide_by_last_var()?;
        q_hat.pullback_affine(&t_inv)
    }
}

/// `Σ w_i p_i` over polynomials sharing `(d, k)`.
pub fn linear_combination<T: Scalar>(weights: &[T], ps: &[Poly<T>]) -> Result<Poly<T>> {
    if weights.len() != ps.len() {
        return Err(Error::ShapeMismatch(format!("{} weights for {} polynomials", weights.len(), ps.len())));
    }
    let Some(first) = ps.first() else {
        return Err(Error::ShapeMismatch("empty linear combination".into()));
    };
    let (d, k) = (first.d, first.k);
    let mut out = Poly::<T>::zero(d, k);
    for (w, p) in weights.iter().zip(ps) {
        if p.d != d || p.k != k {
            return Err(Error::ShapeMismatch(format!("P_{}^{} mixed with P_{k}^{d}", p.k, p.d)));
        }
        for (o, c) in out.coeffs.iter_mut().zip(&p.coeffs) {
            *o = o.clone() + w.clone() * c.clone();
        }
    }
    Ok(out)
}
