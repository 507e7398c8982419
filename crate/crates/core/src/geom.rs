//! Affine geometry of simplices in `R^d`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Poly;
use crate::scalar::Scalar;

/// Threshold under which a sum of barycentric weights counts as zero.
pub const WEIGHT_EPS: f64 = 1e-12;

/// A point of `R^d`; `d = 0` is the single point of `R^0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point<T = f64>(pub Vec<T>);

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Point(coords)
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![T::zero(); d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn convert<U: Scalar>(&self) -> Point<U> {
        Point(self.0.iter().map(Scalar::convert).collect())
    }

    pub fn sub(&self, other: &Point<T>) -> Vec<T> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.clone() - b.clone()).collect()
    }

    pub fn scale(&self, s: &T) -> Point<T> {
        Point(self.0.iter().map(|a| a.clone() * s.clone()).collect())
    }
}

impl<T> Deref for Point<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> From<Vec<T>> for Point<T> {
    fn from(v: Vec<T>) -> Self {
        Point(v)
    }
}

fn negligible<T: Scalar>(v: &T, scale: f64) -> bool {
    if T::EXACT {
        v.is_zero()
    } else {
        v.to_f64().abs() <= scale
    }
}

/// The `d + 1` vertices of a (possibly flat) simplex of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VertexFamilyRepr<T>", into = "VertexFamilyRepr<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct VertexFamily<T: Scalar = f64> {
    d: usize,
    pts: Vec<Point<T>>,
}

#[derive(Serialize, Deserialize)]
struct VertexFamilyRepr<T> {
    d: usize,
    vertices: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<VertexFamilyRepr<T>> for VertexFamily<T> {
    type Error = Error;

    fn try_from(r: VertexFamilyRepr<T>) -> Result<Self> {
        VertexFamily::new(r.d, r.vertices.into_iter().map(Point).collect())
    }
}

impl<T: Scalar> From<VertexFamily<T>> for VertexFamilyRepr<T> {
    fn from(v: VertexFamily<T>) -> Self {
        VertexFamilyRepr { d: v.d, vertices: v.pts.into_iter().map(|p| p.0).collect() }
    }
}

impl<T: Scalar> VertexFamily<T> {
    pub fn new(d: usize, pts: Vec<Point<T>>) -> Result<Self> {
        if pts.len() != d + 1 {
            return Err(Error::ShapeMismatch(format!("a simplex of R^{d} has {} vertices, got {}", d + 1, pts.len())));
        }
        for p in &pts {
            if p.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
            }
        }
        Ok(VertexFamily { d, pts })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let d = rows.len().saturating_sub(1);
        Self::new(d, rows.into_iter().map(Point).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.pts
    }

    pub fn vertex(&self, i: usize) -> &Point<T> {
        &self.pts[i]
    }

    pub fn convert<U: Scalar>(&self) -> VertexFamily<U> {
        VertexFamily { d: self.d, pts: self.pts.iter().map(Point::convert).collect() }
    }

    /// Images of the vertices under `phi`, which must map `R^d` to itself.
    pub fn map(&self, phi: &AffineMap<T>) -> Result<VertexFamily<T>> {
        if phi.in_dim() != self.d || phi.out_dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: phi.in_dim() });
        }
        let pts = self.pts.iter().map(|p| phi.apply(p)).collect::<Result<Vec<_>>>()?;
        Ok(VertexFamily { d: self.d, pts })
    }

    /// Vertices reordered so that the new `i`-th vertex is the old `perm[i]`-th.
    pub fn permuted(&self, perm: &[usize]) -> Result<VertexFamily<T>> {
        check_permutation(perm, self.d + 1)?;
        Ok(VertexFamily { d: self.d, pts: perm.iter().map(|&p| self.pts[p].clone()).collect() })
    }

    /// Matrix whose columns are `v_i - v_0`, `i = 1..=d`.
    pub fn edge_matrix(&self) -> Matrix<T> {
        let v0 = &self.pts[0];
        Matrix::from_fn(self.d, self.d, |r, c| self.pts[c + 1][r].clone() - v0[r].clone())
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::ShapeMismatch(format!("permutation of length {} for {n} items", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `x -> A x + b` from `R^in_dim` to `R^out_dim`.
///
/// JSON form: `{ "matrix": [[..]..], "offset": [..] }`, matrix row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineMapRepr<T>", into = "AffineMapRepr<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct AffineMap<T: Scalar = f64> {
    matrix: Matrix<T>,
    offset: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct AffineMapRepr<T> {
    matrix: Vec<Vec<T>>,
    offset: Vec<T>,
}

impl<T: Scalar> TryFrom<AffineMapRepr<T>> for AffineMap<T> {
    type Error = Error;

    fn try_from(r: AffineMapRepr<T>) -> Result<Self> {
        let matrix = if r.matrix.is_empty() { Matrix::zeros(0, 0) } else { Matrix::from_rows(r.matrix)? };
        AffineMap::new(matrix, r.offset)
    }
}

impl<T: Scalar> From<AffineMap<T>> for AffineMapRepr<T> {
    fn from(m: AffineMap<T>) -> Self {
        AffineMapRepr { matrix: m.matrix.to_rows(), offset: m.offset }
    }
}

impl<T: Scalar> AffineMap<T> {
    pub fn new(matrix: Matrix<T>, offset: Vec<T>) -> Result<Self> {
        if offset.len() != matrix.rows() {
            return Err(Error::DimensionMismatch { expected: matrix.rows(), got: offset.len() });
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn identity(d: usize) -> Self {
        AffineMap { matrix: Matrix::identity(d), offset: vec![T::zero(); d] }
    }

    /// Homothety `x -> s x` centred at the origin.
    pub fn scaling(d: usize, s: T) -> Self {
        let matrix = Matrix::from_fn(d, d, |i, j| if i == j { s.clone() } else { T::zero() });
        AffineMap { matrix, offset: vec![T::zero(); d] }
    }

    pub fn translation(offset: Vec<T>) -> Self {
        AffineMap { matrix: Matrix::identity(offset.len()), offset }
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Linear part; for a geometric transformation this is its Jacobian.
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn offset(&self) -> &[T] {
        &self.offset
    }

    pub fn convert<U: Scalar>(&self) -> AffineMap<U> {
        AffineMap {
            matrix: self.matrix.map(Scalar::convert),
            offset: self.offset.iter().map(Scalar::convert).collect(),
        }
    }

    pub fn apply(&self, x: &[T]) -> Result<Point<T>> {
        let mut y = self.matrix.mul_vec(x)?;
        for (yi, bi) in y.iter_mut().zip(&self.offset) {
            *yi = yi.clone() + bi.clone();
        }
        Ok(Point(y))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap<T>) -> Result<AffineMap<T>> {
        let matrix = self.matrix.matmul(&inner.matrix)?;
        let offset = self.apply(&inner.offset)?.0;
        Ok(AffineMap { matrix, offset })
    }

    pub fn determinant(&self) -> Result<T> {
        self.matrix.determinant()
    }

    pub fn is_invertible(&self) -> bool {
        self.matrix.is_square() && self.matrix.lu().map(|lu| !lu.is_singular()).unwrap_or(false)
    }

    pub fn inverse(&self) -> Result<AffineMap<T>> {
        if !self.matrix.is_square() {
            return Err(Error::Singular);
        }
        let lu = self.matrix.lu()?;
        if lu.is_singular() {
            return Err(Error::Singular);
        }
        let inv = lu.inverse()?;
        let shifted = inv.mul_vec(&self.offset)?;
        Ok(AffineMap { matrix: inv, offset: shifted.into_iter().map(|v| -v).collect() })
    }
}

/// Weighted barycenter `(Σ w_i A_i) / Σ w_i`.
pub fn barycenter<T: Scalar>(weights: &[T], pts: &[Point<T>]) -> Result<Point<T>> {
    if weights.len() != pts.len() {
        return Err(Error::DimensionMismatch { expected: pts.len(), got: weights.len() });
    }
    let d = pts.first().map_or(0, Point::dim);
    if let Some(p) = pts.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
    }
    let total = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
    if negligible(&total, WEIGHT_EPS) {
        return Err(Error::ZeroWeightSum);
    }
    let mut acc = vec![T::zero(); d];
    for (w, p) in weights.iter().zip(pts) {
        for (a, x) in acc.iter_mut().zip(p.iter()) {
            *a = a.clone() + w.clone() * x.clone();
        }
    }
    Ok(Point(acc.into_iter().map(|a| a / total.clone()).collect()))
}

/// Whether `v_1 - v_0, ..., v_d - v_0` are linearly independent.
pub fn aff_indep<T: Scalar>(vtx: &VertexFamily<T>) -> bool {
    if vtx.d == 0 {
        return true;
    }
    let m = vtx.edge_matrix();
    if m.max_abs() == 0.0 && !T::EXACT {
        return false;
    }
    m.lu().map(|lu| !lu.is_singular()).unwrap_or(false)
}

/// Barycentric coordinates of `x` with respect to an affinely independent family.
pub fn baryc_coord<T: Scalar>(vtx: &VertexFamily<T>, x: &[T]) -> Result<Vec<T>> {
    let d = vtx.d;
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    if !aff_indep(vtx) {
        return Err(Error::DegenerateVertices);
    }
    let a = Matrix::from_fn(d + 1, d + 1, |r, c| if r < d { vtx.pts[c][r].clone() } else { T::one() });
    let mut rhs = x.to_vec();
    rhs.push(T::one());
    let lu = a.lu()?;
    lu.solve(&rhs).map_err(|_| Error::DegenerateVertices)
}

/// `0, δ_0, ..., δ_{d-1}`.
pub fn vtx_ref<T: Scalar>(d: usize) -> VertexFamily<T> {
    let mut pts = vec![Point::origin(d)];
    for i in 0..d {
        let mut p = vec![T::zero(); d];
        p[i] = T::one();
        pts.push(Point(p));
    }
    VertexFamily { d, pts }
}

/// Reference P1 Lagrange polynomial: `1 - Σ x_j` for `i = 0`, `x_{i-1}` otherwise.
pub fn lagp1_ref<T: Scalar>(d: usize, i: usize) -> Result<Poly<T>> {
    if i > d {
        return Err(Error::IndexOutOfRange { index: i, max: d });
    }
    // adk(d, 1) = [0, δ_0, ..., δ_{d-1}].
    let mut coeffs = vec![T::zero(); d + 1];
    if i == 0 {
        coeffs[0] = T::one();
        for c in coeffs.iter_mut().skip(1) {
            *c = -T::one();
        }
    } else {
        coeffs[i] = T::one();
    }
    Poly::from_coeffs(d, 1, coeffs)
}

/// P1 Lagrange polynomial of vertex `i`: the `i`-th barycentric coordinate.
pub fn lagp1<T: Scalar>(vtx: &VertexFamily<T>, i: usize) -> Result<Poly<T>> {
    let inv = t_geom(vtx).inverse().map_err(|_| Error::DegenerateVertices)?;
    lagp1_ref(vtx.d, i)?.pullback_affine(&inv)
}

/// Geometric transformation sending the reference vertices onto `vtx`.
pub fn t_geom<T: Scalar>(vtx: &VertexFamily<T>) -> AffineMap<T> {
    AffineMap { matrix: vtx.edge_matrix(), offset: vtx.pts[0].0.clone() }
}

/// Geometric transformation onto the permuted family `(v_{perm[i]})_i`.
pub fn t_geom_permut<T: Scalar>(vtx: &VertexFamily<T>, perm: &[usize]) -> Result<AffineMap<T>> {
    Ok(t_geom(&vtx.permuted(perm)?))
}

/// Geometric transformation onto `vtx` with vertices `d` and `i0` swapped.
///
/// It sends the reference face opposite `v̂_d` onto the face opposite `v_{i0}`.
pub fn t_geom_transp<T: Scalar>(vtx: &VertexFamily<T>, i0: usize) -> Result<AffineMap<T>> {
    let d = vtx.d;
    if i0 > d {
        return Err(Error::IndexOutOfRange { index: i0, max: d });
    }
    let mut perm: Vec<usize> = (0..=d).collect();
    perm.swap(i0, d);
    t_geom_permut(vtx, &perm)
}

/// Injection of `R^{d-1}` onto the reference face hyperplane `i`:
/// `x' -> (1 - Σ x', x')` for `i = 0`, zero inserted at `i - 1` otherwise.
pub fn inj_hface_ref<T: Scalar>(d: usize, i: usize) -> Result<AffineMap<T>> {
    if d == 0 {
        return Err(Error::InvalidArgument("face injection needs d >= 1".into()));
    }
    if i > d {
        return Err(Error::IndexOutOfRange { index: i, max: d });
    }
    let (matrix, offset) = if i == 0 {
        let m = Matrix::from_fn(d, d - 1, |r, c| {
            if r == 0 {
                -T::one()
            } else if r == c + 1 {
                T::one()
            } else {
                T::zero()
            }
        });
        let mut off = vec![T::zero(); d];
        off[0] = T::one();
        (m, off)
    } else {
        let skip = i - 1;
        let m = Matrix::from_fn(d, d - 1, |r, c| {
            let src = if r < skip {
                Some(r)
            } else if r > skip {
                Some(r - 1)
            } else {
                None
            };
            if src == Some(c) {
                T::one()
            } else {
                T::zero()
            }
        });
        (m, vec![T::zero(); d])
    };
    AffineMap::new(matrix, offset)
}

/// Injection of `R^{d-1}` onto the face hyperplane of `vtx` opposite `v_i`.
pub fn inj_hface<T: Scalar>(vtx: &VertexFamily<T>, i: usize) -> Result<AffineMap<T>> {
    t_geom(vtx).compose(&inj_hface_ref(vtx.d, i)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn vf(rows: &[&[f64]]) -> VertexFamily {
        VertexFamily::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn barycenter_examples() {
        let pts = vec![Point(vec![1.0, 2.0]), Point(vec![3.0, -1.0]), Point(vec![0.5, 0.5])];
        for i in 0..3 {
            let mut w = vec![0.0; 3];
            w[i] = 1.0;
            assert_eq!(barycenter(&w, &pts).unwrap(), pts[i]);
        }
        let mid = barycenter(&[0.5, 0.5], &pts[..2]).unwrap();
        assert_eq!(mid.0, vec![2.0, 0.5]);
        let line = vec![Point(vec![0.0]), Point(vec![1.0])];
        assert_eq!(barycenter(&[2.0, -1.0], &line).unwrap().0, vec![-1.0]);
        assert_eq!(barycenter(&[1.0, -1.0], &line), Err(Error::ZeroWeightSum));
    }

    #[test]
    fn affine_independence() {
        for d in 0..5 {
            assert!(aff_indep(&vtx_ref::<f64>(d)));
            assert!(aff_indep(&vtx_ref::<Rational>(d)));
        }
        assert!(!aff_indep(&vf(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]])));
        assert!(aff_indep(&vf(&[&[1.0, 1.0], &[3.0, 1.0], &[1.0, 4.0]])));
        assert!(!aff_indep(&vf(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]])));
    }

    #[test]
    fn barycentric_coordinates() {
        let r = vtx_ref::<f64>(2);
        let l = baryc_coord(&r, &[0.25, 0.25]).unwrap();
        for (a, b) in l.iter().zip([0.5, 0.25, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
        let v = vf(&[&[1.0, 1.0], &[3.0, 1.0], &[1.0, 4.0]]);
        for i in 0..3 {
            let l = baryc_coord(&v, &v.vertex(i).0).unwrap();
            for (j, lj) in l.iter().enumerate() {
                assert!((lj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let flat = vf(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(baryc_coord(&flat, &[0.0, 0.0]), Err(Error::DegenerateVertices));
    }

    #[test]
    fn reference_vertices() {
        assert_eq!(vtx_ref::<f64>(2).points(), &[Point(vec![0.0, 0.0]), Point(vec![1.0, 0.0]), Point(vec![0.0, 1.0])]);
        let v0 = vtx_ref::<f64>(0);
        assert_eq!(v0.points().len(), 1);
        assert_eq!(v0.vertex(0).dim(), 0);
        let v3 = vtx_ref::<f64>(3);
        assert_eq!(v3.vertex(3).0, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn reference_p1_polynomials() {
        let l0 = lagp1_ref::<f64>(2, 0).unwrap();
        assert_eq!(l0.coeffs(), &[1.0, -1.0, -1.0]);
        assert_eq!(l0.eval(&[0.25, 0.25]).unwrap(), 0.5);
        let r = vtx_ref::<f64>(2);
        let l2 = lagp1_ref::<f64>(2, 2).unwrap();
        assert_eq!(l2.eval(r.vertex(2)).unwrap(), 1.0);
        assert_eq!(l2.eval(r.vertex(0)).unwrap(), 0.0);
        assert!(lagp1_ref::<f64>(2, 3).is_err());
        let x = [0.3, -1.7];
        let s: f64 = (0..3).map(|i| lagp1_ref::<f64>(2, i).unwrap().eval(&x).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_transformation() {
        for d in 0..4 {
            assert_eq!(t_geom(&vtx_ref::<f64>(d)), AffineMap::identity(d));
        }
        let v = vf(&[&[1.0, 1.0], &[3.0, 1.0], &[1.0, 4.0]]);
        let t = t_geom(&v);
        assert_eq!(t.apply(&[0.5, 0.5]).unwrap().0, vec![2.0, 2.5]);
        let flat = vf(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(t_geom(&flat).inverse(), Err(Error::Singular));
    }

    #[test]
    fn transposition_map() {
        let v = vf(&[&[1.0, 1.0], &[3.0, 1.0], &[1.0, 4.0]]);
        assert_eq!(t_geom_transp(&v, 2).unwrap(), t_geom(&v));
        let r3 = vtx_ref::<f64>(3);
        let vtx = VertexFamily::new(3, (0..4).map(|i| Point(vec![i as f64, (i * i) as f64, 1.0 - i as f64])).collect())
            .unwrap();
        let t = t_geom_transp(&vtx, 0).unwrap();
        for (i, target) in [3usize, 1, 2, 0].iter().enumerate() {
            assert_eq!(t.apply(r3.vertex(i)).unwrap(), *vtx.vertex(*target));
        }
        assert!(t_geom_transp(&vtx, 4).is_err());
    }

    #[test]
    fn face_injection() {
        let r = vtx_ref::<f64>(3);
        let i0 = inj_hface(&r, 0).unwrap();
        assert_eq!(i0.apply(&[0.5, 0.5]).unwrap().0, vec![0.0, 0.5, 0.5]);
        let i2 = inj_hface(&r, 2).unwrap();
        assert_eq!(i2.apply(&[0.25, 0.75]).unwrap().0, vec![0.25, 0.0, 0.75]);
        assert!(inj_hface(&vtx_ref::<f64>(0), 0).is_err());
        // R^0 -> R^1 lands on the vertex opposite the face.
        let seg = vf(&[&[2.0], &[5.0]]);
        assert_eq!(inj_hface(&seg, 0).unwrap().apply(&[]).unwrap().0, vec![5.0]);
        assert_eq!(inj_hface(&seg, 1).unwrap().apply(&[]).unwrap().0, vec![2.0]);
    }

    #[test]
    fn zero_dimensional_maps() {
        let id: AffineMap<f64> = AffineMap::identity(0);
        assert!(id.apply(&[]).unwrap().0.is_empty());
        assert!(id.is_invertible());
        assert_eq!(id.inverse().unwrap(), id);
    }

    #[test]
    fn vertex_family_json() {
        let v = vf(&[&[1.0, 1.0], &[3.0, 1.0], &[1.0, 4.0]]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"d":2,"vertices":[[1.0,1.0],[3.0,1.0],[1.0,4.0]]}"#);
        let back: VertexFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<VertexFamily>(r#"{"d":2,"vertices":[[1.0,1.0]]}"#).is_err());
    }

    #[test]
    fn affine_map_json_round_trip() {
        let m: AffineMap = serde_json::from_str(r#"{"matrix":[[2,0],[1,1]],"offset":[0.5,-1]}"#).unwrap();
        assert_eq!(m.apply(&[1.0, 1.0]).unwrap().0, vec![2.5, 1.0]);
        let back: AffineMap = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<AffineMap>(r#"{"matrix":[[1,0]],"offset":[0,0]}"#).is_err());
    }
}
