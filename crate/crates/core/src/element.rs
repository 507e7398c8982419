//! The finite element triple: geometry, approximation space, and nodal
//! degrees of freedom, with an executable unisolvence certificate.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::{aff_indep, barycenter, t_geom, AffineMap, Point, VertexFamily};
use crate::linalg::{Lu, Matrix};
use crate::mindex::{in_asdki, pbinom, table, MultiIndex};
use crate::poly::{linear_combination, Poly, FACE_TOL};
use crate::scalar::{format_rational, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Simplex,
    Cuboid,
}

impl Shape {
    /// Number of vertices of the shape in dimension `d`.
    pub fn nvtx(self, d: usize) -> usize {
        match self {
            Shape::Simplex => d + 1,
            Shape::Cuboid => 1 << d,
        }
    }
}

/// A linear form on the approximation space.
#[derive(Debug, Clone, PartialEq)]
pub enum Dof<T: Scalar = f64> {
    /// `p -> p(point)`.
    PointEval(Point<T>),
}

impl<T: Scalar> Dof<T> {
    pub fn apply(&self, p: &Poly<T>) -> Result<T> {
        match self {
            Dof::PointEval(x) => p.eval(x),
        }
    }

    pub fn point(&self) -> &Point<T> {
        match self {
            Dof::PointEval(x) => x,
        }
    }

    /// Pushforward by `phi`: `p -> dof(p ∘ phi)`.
    pub fn push_forward(&self, phi: &AffineMap<T>) -> Result<Dof<T>> {
        match self {
            Dof::PointEval(x) => Ok(Dof::PointEval(phi.apply(x)?)),
        }
    }

    pub fn convert<U: Scalar>(&self) -> Dof<U> {
        match self {
            Dof::PointEval(x) => Dof::PointEval(x.convert()),
        }
    }
}

/// `P_k^d`, optionally narrowed to the span of explicit polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSpace<T: Scalar = f64> {
    pub d: usize,
    pub k: usize,
    pub basis: Option<Vec<Poly<T>>>,
}

impl<T: Scalar> ApproxSpace<T> {
    pub fn full(d: usize, k: usize) -> Self {
        ApproxSpace { d, k, basis: None }
    }

    pub fn spanned_by(d: usize, k: usize, basis: Vec<Poly<T>>) -> Result<Self> {
        for p in &basis {
            if p.dim() != d || p.degree() > k {
                return Err(Error::ShapeMismatch(format!("P_{}^{} is not inside P_{k}^{d}", p.degree(), p.dim())));
            }
        }
        let basis = basis.iter().map(|p| p.embed(k)).collect::<Result<_>>()?;
        Ok(ApproxSpace { d, k, basis: Some(basis) })
    }

    pub fn dim(&self) -> usize {
        match &self.basis {
            Some(b) => b.len(),
            None => pbinom(self.d, self.k) + 1,
        }
    }

    /// The explicit basis, or the monomials in table order.
    pub fn basis_polys(&self) -> Vec<Poly<T>> {
        match &self.basis {
            Some(b) => b.clone(),
            None => {
                let n = pbinom(self.d, self.k) + 1;
                (0..n)
                    .map(|i| {
                        let mut c = vec![T::zero(); n];
                        c[i] = T::one();
                        Poly::from_coeffs(self.d, self.k, c).expect("sized from pbinom")
                    })
                    .collect()
            }
        }
    }

    fn pull_back(&self, phi: &AffineMap<T>) -> Result<Self> {
        let basis = match &self.basis {
            Some(b) => Some(b.iter().map(|p| p.pullback_affine(phi)).collect::<Result<_>>()?),
            None => None,
        };
        Ok(ApproxSpace { d: self.d, k: self.k, basis })
    }

    fn convert<U: Scalar>(&self) -> ApproxSpace<U> {
        ApproxSpace { d: self.d, k: self.k, basis: self.basis.as_ref().map(|b| b.iter().map(Poly::convert).collect()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Float,
    Rational,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Mode::Float),
            "rational" => Ok(Mode::Rational),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Determinant {
    Float(f64),
    Exact(Rational),
}

impl Determinant {
    pub fn to_f64(&self) -> f64 {
        match self {
            Determinant::Float(v) => *v,
            Determinant::Exact(r) => r.to_f64(),
        }
    }
}

impl std::fmt::Display for Determinant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Determinant::Float(v) => write!(f, "{v}"),
            Determinant::Exact(r) => write!(f, "{}", format_rational(r)),
        }
    }
}

impl Serialize for Determinant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Determinant::Float(v) => s.serialize_f64(*v),
            Determinant::Exact(r) => s.serialize_str(&format_rational(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnisolvenceReport {
    pub singular: bool,
    pub det: Determinant,
    /// `‖V‖_1 ‖V^-1‖_1`, infinite when singular.
    pub condition_estimate: f64,
}

/// How the nodes of an element were generated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLayout {
    /// `T^v(alpha / k)` for `alpha` in table order (the single point for `d = 0`).
    Lagrange {
        alphas: Vec<MultiIndex>,
    },
    /// The isobarycenter of the vertices, for `k = 0`.
    Isobarycenter,
    /// Arbitrary pairwise-distinct nodes on a segment.
    Custom1d,
    Unspecified,
}

#[derive(Debug, Clone)]
pub struct FiniteElement<T: Scalar = f64> {
    d: usize,
    shape: Shape,
    vertices: Vec<Point<T>>,
    approx: ApproxSpace<T>,
    dofs: Vec<Dof<T>>,
    layout: NodeLayout,
    // Factorization of the unisolvence matrix, present once certified.
    factor: Option<Lu<T>>,
}

impl<T: Scalar> PartialEq for FiniteElement<T> {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
            && self.shape == other.shape
            && self.vertices == other.vertices
            && self.approx == other.approx
            && self.dofs == other.dofs
    }
}

impl<T: Scalar> FiniteElement<T> {
    /// Assembles a record after structural checks only; see [`Self::certified`].
    pub fn new(
        shape: Shape,
        d: usize,
        vertices: Vec<Point<T>>,
        approx: ApproxSpace<T>,
        dofs: Vec<Dof<T>>,
        layout: NodeLayout,
    ) -> Result<Self> {
        let nvtx = shape.nvtx(d);
        if vertices.len() != nvtx {
            return Err(Error::ShapeMismatch(format!(
                "{shape:?} in R^{d} has {nvtx} vertices, got {}",
                vertices.len()
            )));
        }
        for v in &vertices {
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.dim() });
            }
        }
        if approx.d != d {
            return Err(Error::DimensionMismatch { expected: d, got: approx.d });
        }
        if dofs.len() != approx.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} degrees of freedom for a space of dimension {}",
                dofs.len(),
                approx.dim()
            )));
        }
        for dof in &dofs {
            if dof.point().dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: dof.point().dim() });
            }
        }
        Ok(FiniteElement { d, shape, vertices, approx, dofs, layout, factor: None })
    }

    /// Factorizes the unisolvence matrix and keeps it for the dual basis;
    /// fails with [`Error::Singular`] when the element is not unisolvent.
    pub fn certified(mut self) -> Result<Self> {
        self.ensure_simplex()?;
        let lu = self.unisolvence_matrix()?.lu()?;
        if lu.is_singular() {
            return Err(Error::Singular);
        }
        self.factor = Some(lu);
        Ok(self)
    }

    pub fn is_certified(&self) -> bool {
        self.factor.is_some()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn vertex_family(&self) -> Result<VertexFamily<T>> {
        self.ensure_simplex()?;
        VertexFamily::new(self.d, self.vertices.clone())
    }

    pub fn ndof(&self) -> usize {
        self.dofs.len()
    }

    pub fn degree(&self) -> usize {
        self.approx.k
    }

    pub fn approx(&self) -> &ApproxSpace<T> {
        &self.approx
    }

    pub fn dofs(&self) -> &[Dof<T>] {
        &self.dofs
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn nodes(&self) -> Vec<Point<T>> {
        self.dofs.iter().map(|d| d.point().clone()).collect()
    }

    pub fn convert<U: Scalar>(&self) -> FiniteElement<U> {
        FiniteElement {
            d: self.d,
            shape: self.shape,
            vertices: self.vertices.iter().map(Point::convert).collect(),
            approx: self.approx.convert(),
            dofs: self.dofs.iter().map(Dof::convert).collect(),
            layout: self.layout.clone(),
            factor: None,
        }
    }

    fn ensure_simplex(&self) -> Result<()> {
        match self.shape {
            Shape::Simplex => Ok(()),
            Shape::Cuboid => Err(Error::Unsupported("cuboid elements".into())),
        }
    }

    /// `V[i][j] = dofs[i](basis_j)`.
    pub fn unisolvence_matrix(&self) -> Result<Matrix<T>> {
        let basis = self.approx.basis_polys();
        let n = self.dofs.len();
        let mut v = Matrix::zeros(n, n);
        for (i, dof) in self.dofs.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                v[(i, j)] = dof.apply(b)?;
            }
        }
        Ok(v)
    }

    fn factorization(&self) -> Result<Lu<T>> {
        self.ensure_simplex()?;
        if let Some(lu) = &self.factor {
            return Ok(lu.clone());
        }
        let lu = self.unisolvence_matrix()?.lu()?;
        if lu.is_singular() {
            return Err(Error::Singular);
        }
        Ok(lu)
    }

    fn combine(&self, coeffs: &[T]) -> Result<Poly<T>> {
        let basis = self.approx.basis_polys();
        if basis.is_empty() {
            return Ok(Poly::zero(self.d, self.approx.k));
        }
        linear_combination(coeffs, &basis)
    }
}

/// Reference Lagrange nodes `alpha / k`, in table order.
pub fn lagrange_ref_nodes<T: Scalar>(d: usize, k: usize) -> Result<Vec<Point<T>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("Lagrange nodes need k >= 1".into()));
    }
    let kk = k as i64;
    Ok(table(d, k)
        .rows()
        .iter()
        .map(|a| Point(a.entries().iter().map(|&x| T::from_ratio(x as i64, kk)).collect()))
        .collect())
}

/// Lagrange nodes `T^v(alpha / k)` of degree `k`, in table order.
pub fn lagrange_nodes<T: Scalar>(vtx: &VertexFamily<T>, k: usize) -> Result<Vec<Point<T>>> {
    let t = t_geom(vtx);
    lagrange_ref_nodes(vtx.dim(), k)?.iter().map(|x| t.apply(x)).collect()
}

/// Indices of the nodes lying on the face hyperplane opposite vertex `i`.
pub fn node_face_set<T: Scalar>(vtx: &VertexFamily<T>, k: usize, i: usize) -> Result<Vec<usize>> {
    let d = vtx.dim();
    if k == 0 {
        return Err(Error::InvalidArgument("Lagrange nodes need k >= 1".into()));
    }
    if !aff_indep(vtx) {
        return Err(Error::DegenerateVertices);
    }
    let tbl = table(d, k);
    let mut out = Vec::new();
    for (j, a) in tbl.rows().iter().enumerate() {
        if in_asdki(d, k, i, a)? {
            out.push(j);
        }
    }
    Ok(out)
}

/// Subvertices `T^v((k - 1)/k · v̂)`.
pub fn sub_vertices<T: Scalar>(vtx: &VertexFamily<T>, k: usize) -> Result<VertexFamily<T>> {
    if k < 2 {
        return Err(Error::InvalidArgument("subvertices need k >= 2".into()));
    }
    let d = vtx.dim();
    let s = T::from_ratio(k as i64 - 1, k as i64);
    let scaled = crate::geom::vtx_ref::<T>(d).map(&AffineMap::scaling(d, s))?;
    scaled.map(&t_geom(vtx))
}

/// Subnodes `T^v((k - 1)/k · alpha'/(k - 1))` for `alpha'` of sum at most `k - 1`.
pub fn sub_nodes<T: Scalar>(vtx: &VertexFamily<T>, k: usize) -> Result<Vec<Point<T>>> {
    if k < 2 {
        return Err(Error::InvalidArgument("subnodes need k >= 2".into()));
    }
    let d = vtx.dim();
    let s = T::from_ratio(k as i64 - 1, k as i64);
    let t = t_geom(vtx);
    lagrange_ref_nodes::<T>(d, k - 1)?.iter().map(|x| t.apply(&x.scale(&s))).collect()
}

/// Simplicial Lagrange element of degree `k` on `vtx`, certified unisolvent.
///
/// `k = 0` puts a single node at the isobarycenter and does not need
/// affinely independent vertices. `d = 0` has a single node at the single
/// point of `R^0`. For `d = 1`, `custom_nodes_1d` may replace the evenly
/// spaced nodes with `k + 1` pairwise-distinct abscissae.
pub fn make_lagrange_fe<T: Scalar>(
    d: usize,
    k: usize,
    vtx: &VertexFamily<T>,
    custom_nodes_1d: Option<&[T]>,
) -> Result<FiniteElement<T>> {
    if vtx.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: vtx.dim() });
    }
    let vertices = vtx.points().to_vec();
    let approx = ApproxSpace::full(d, k);

    let (nodes, layout) = if let Some(custom) = custom_nodes_1d {
        if d != 1 {
            return Err(Error::InvalidArgument("custom nodes are only supported for d = 1".into()));
        }
        if custom.len() != k + 1 {
            return Err(Error::ShapeMismatch(format!("P_{k}^1 needs {} nodes, got {}", k + 1, custom.len())));
        }
        for (a, x) in custom.iter().enumerate() {
            if custom[..a].contains(x) {
                return Err(Error::InvalidArgument(format!("duplicate node {x}")));
            }
        }
        (custom.iter().map(|x| Point(vec![x.clone()])).collect(), NodeLayout::Custom1d)
    } else if d == 0 {
        (vec![Point(Vec::new())], NodeLayout::Lagrange { alphas: vec![MultiIndex::zero(0)] })
    } else if k == 0 {
        let w = vec![T::one(); d + 1];
        (vec![barycenter(&w, vtx.points())?], NodeLayout::Isobarycenter)
    } else {
        if !aff_indep(vtx) {
            return Err(Error::DegenerateVertices);
        }
        let alphas = table(d, k).rows().to_vec();
        (lagrange_nodes(vtx, k)?, NodeLayout::Lagrange { alphas })
    };

    let dofs = nodes.into_iter().map(Dof::PointEval).collect();
    FiniteElement::new(Shape::Simplex, d, vertices, approx, dofs, layout)?.certified()
}

/// Lagrange element of degree `k` on the reference simplex.
pub fn reference_lagrange_fe<T: Scalar>(d: usize, k: usize) -> Result<FiniteElement<T>> {
    make_lagrange_fe(d, k, &crate::geom::vtx_ref(d), None)
}

/// Builds the unisolvence matrix in the requested arithmetic and reports
/// whether it is invertible.
pub fn unisolvence_check<T: Scalar>(fe: &FiniteElement<T>, mode: Mode) -> Result<UnisolvenceReport> {
    fe.ensure_simplex()?;
    let v = fe.unisolvence_matrix()?;
    let vf: Matrix<f64> = v.map(Scalar::convert);
    let (singular, det) = match mode {
        Mode::Float => {
            let lu = vf.lu()?;
            (lu.is_singular(), Determinant::Float(lu.determinant()))
        }
        Mode::Rational => {
            let lu = v.map(Scalar::to_rational).lu()?;
            (lu.is_singular(), Determinant::Exact(lu.determinant()))
        }
    };
    let condition_estimate = if singular {
        f64::INFINITY
    } else {
        match vf.inverse() {
            Ok(inv) => vf.norm_1() * inv.norm_1(),
            Err(_) => f64::INFINITY,
        }
    };
    let condition_estimate = if fe.ndof() == 0 { 1.0 } else { condition_estimate };
    Ok(UnisolvenceReport { singular, det, condition_estimate })
}

/// Polynomials `θ_i` with `dofs[j](θ_i) = δ_ij`.
pub fn dual_basis<T: Scalar>(fe: &FiniteElement<T>) -> Result<Vec<Poly<T>>> {
    let lu = fe.factorization()?;
    let n = fe.ndof();
    let mut e = vec![T::zero(); n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        e[i] = T::one();
        let c = lu.solve(&e)?;
        e[i] = T::zero();
        out.push(fe.combine(&c)?);
    }
    Ok(out)
}

/// The polynomial of the approximation space with the given nodal values.
pub fn local_interpolate<T: Scalar>(fe: &FiniteElement<T>, values: &[T]) -> Result<Poly<T>> {
    if values.len() != fe.ndof() {
        return Err(Error::DimensionMismatch { expected: fe.ndof(), got: values.len() });
    }
    let lu = fe.factorization()?;
    let c = lu.solve(values)?;
    fe.combine(&c)
}

/// Transports `fe` by an invertible affine map: vertices are mapped, the
/// approximation space is pulled back by `phi^-1`, and point evaluations
/// are pushed forward to the image points.
pub fn transform_fe<T: Scalar>(fe: &FiniteElement<T>, phi: &AffineMap<T>) -> Result<FiniteElement<T>> {
    fe.ensure_simplex()?;
    if phi.in_dim() != fe.d || phi.out_dim() != fe.d {
        return Err(Error::DimensionMismatch { expected: fe.d, got: phi.in_dim() });
    }
    let phi_inv = phi.inverse()?;
    let vertices = fe.vertices.iter().map(|v| phi.apply(v)).collect::<Result<Vec<_>>>()?;
    let dofs = fe.dofs.iter().map(|d| d.push_forward(phi)).collect::<Result<Vec<_>>>()?;
    let approx = fe.approx.pull_back(&phi_inv)?;
    let out = FiniteElement::new(fe.shape, fe.d, vertices, approx, dofs, fe.layout.clone())?;
    if fe.is_certified() {
        out.certified()
    } else {
        Ok(out)
    }
}

/// Whether `p` vanishes at every node of the face opposite vertex `i`.
///
/// For `p` of degree at most `k` this is equivalent to vanishing on the
/// whole face hyperplane. Floating-point values count as zero within
/// `FACE_TOL * max|coeff(p)|`.
pub fn face_unisolvence_check<T: Scalar>(fe: &FiniteElement<T>, i: usize, p: &Poly<T>) -> Result<bool> {
    fe.ensure_simplex()?;
    let NodeLayout::Lagrange { alphas } = &fe.layout else {
        return Err(Error::Unsupported("face unisolvence needs a Lagrange element".into()));
    };
    let (d, k) = (fe.d, fe.approx.k);
    if d == 0 || k == 0 {
        return Err(Error::Unsupported("face unisolvence needs d >= 1 and k >= 1".into()));
    }
    if p.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
    }
    if i > d {
        return Err(Error::IndexOutOfRange { index: i, max: d });
    }
    let tol = FACE_TOL * p.max_abs_coeff();
    for (alpha, dof) in alphas.iter().zip(&fe.dofs) {
        if !in_asdki(d, k, i, alpha)? {
            continue;
        }
        let v = dof.apply(p)?;
        let zero = if T::EXACT { v.is_zero() } else { v.to_f64().abs() <= tol };
        if !zero {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `{ "d", "k", "shape", "vertices", "nodes", "ndof" }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeDescriptor {
    pub d: usize,
    pub k: usize,
    pub shape: Shape,
    pub vertices: Vec<Vec<f64>>,
    pub nodes: Vec<Vec<f64>>,
    pub ndof: usize,
}

impl<T: Scalar> FiniteElement<T> {
    pub fn descriptor(&self) -> FeDescriptor {
        let to_rows = |pts: &[Point<T>]| -> Vec<Vec<f64>> {
            pts.iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect()
        };
        FeDescriptor {
            d: self.d,
            k: self.approx.k,
            shape: self.shape,
            vertices: to_rows(&self.vertices),
            nodes: to_rows(&self.nodes()),
            ndof: self.ndof(),
        }
    }
}

impl FiniteElement<f64> {
    /// Rebuilds an element whose dofs are point evaluations at the listed
    /// nodes on the full `P_k^d`, and certifies it.
    pub fn from_descriptor(desc: &FeDescriptor) -> Result<Self> {
        if desc.ndof != desc.nodes.len() {
            return Err(Error::ShapeMismatch(format!("ndof {} but {} nodes", desc.ndof, desc.nodes.len())));
        }
        if desc.shape == Shape::Cuboid {
            return Err(Error::Unsupported("cuboid elements".into()));
        }
        let vertices: Vec<Point> = desc.vertices.iter().cloned().map(Point).collect();
        let nodes: Vec<Point> = desc.nodes.iter().cloned().map(Point).collect();
        let layout = match VertexFamily::new(desc.d, vertices.clone()) {
            Ok(vtx) if desc.k >= 1 => match lagrange_nodes(&vtx, desc.k) {
                Ok(std) if std == nodes => NodeLayout::Lagrange { alphas: table(desc.d, desc.k).rows().to_vec() },
                _ => NodeLayout::Unspecified,
            },
            _ => NodeLayout::Unspecified,
        };
        let dofs = nodes.into_iter().map(Dof::PointEval).collect();
        FiniteElement::new(Shape::Simplex, desc.d, vertices, ApproxSpace::full(desc.d, desc.k), dofs, layout)?
            .certified()
    }
}
