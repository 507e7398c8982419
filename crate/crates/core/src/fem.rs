//! Continuous Lagrange discretization of `-Δu = f` with homogeneous
//! Dirichlet data on conforming simplicial meshes.
//!
//! All polynomial integrals are exact: integrands are pulled back to the
//! reference simplex and integrated monomial by monomial with
//! `∫ x^alpha = alpha! / (|alpha| + d)!`. Non-polynomial data goes through
//! nodal rules whose weights are the exact integrals of a reference dual
//! basis.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::element::{dual_basis, lagrange_ref_nodes, reference_lagrange_fe};
use crate::error::{Error, Result};
use crate::geom::{aff_indep, baryc_coord, t_geom, AffineMap, Point, VertexFamily};
use crate::linalg::{Cholesky, Matrix};
use crate::mindex::{table, MultiIndex};
use crate::poly::Poly;
use crate::scalar::{Rational, Scalar};

// Per-(d, k) memo of derived reference data.
type Cache<V> = OnceLock<Mutex<HashMap<(usize, usize), Arc<V>>>>;

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `∫ x^alpha` over the reference simplex of dimension `alpha.dim()`.
pub fn simplex_monomial_integral(alpha: &MultiIndex) -> Rational {
    let d = alpha.dim();
    let num = alpha.entries().iter().fold(BigInt::one(), |acc, &a| acc * factorial(a));
    Rational::new(num, factorial(alpha.sum() + d))
}

// Reference integrals of every monomial of table(d, k), as f64.
fn monomial_integrals(d: usize, k: usize) -> Arc<Vec<f64>> {
    static CACHE: Cache<Vec<f64>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((d, k))
        .or_insert_with(|| Arc::new(table(d, k).rows().iter().map(|a| simplex_monomial_integral(a).to_f64()).collect()))
        .clone()
}

/// `∫ p` over the reference simplex.
pub fn integrate_reference(p: &Poly) -> f64 {
    let w = monomial_integrals(p.dim(), p.degree());
    p.coeffs().iter().zip(w.iter()).map(|(c, w)| c * w).sum()
}

/// `∫_K p` over `K = cell_map(reference simplex)`.
pub fn integrate_poly_on_cell(p: &Poly, cell_map: &AffineMap) -> Result<f64> {
    let det = cell_map.determinant()?;
    if !cell_map.is_invertible() {
        return Err(Error::Singular);
    }
    let q = p.pullback_affine(cell_map)?;
    Ok(det.abs() * integrate_reference(&q))
}

/// Integer lattice carrying exact vertex positions `coords / scale`.
#[derive(Debug, Clone, PartialEq)]
struct Lattice {
    scale: i64,
    coords: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    d: usize,
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    boundary_vertex_flags: Vec<bool>,
    lattice: Option<Lattice>,
}

#[derive(Serialize, Deserialize)]
struct MeshRepr {
    d: usize,
    vertices: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
}

// Facets (sorted vertex sets without the local vertex m) and how many cells share them.
fn facet_counts(cells: &[Vec<usize>]) -> HashMap<Vec<usize>, usize> {
    let mut counts = HashMap::new();
    for cell in cells {
        for m in 0..cell.len() {
            *counts.entry(facet_key(cell, m)).or_insert(0) += 1;
        }
    }
    counts
}

fn facet_key(cell: &[usize], m: usize) -> Vec<usize> {
    let mut f: Vec<usize> = cell.iter().enumerate().filter(|&(l, _)| l != m).map(|(_, &v)| v).collect();
    f.sort_unstable();
    f
}

impl Mesh {
    /// Validates cell arity, vertex indices and cell nondegeneracy, and
    /// flags the vertices lying on boundary facets.
    pub fn new(d: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("meshes need d >= 1".into()));
        }
        for v in &vertices {
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.dim() });
            }
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != d + 1 {
                return Err(Error::ShapeMismatch(format!("cell {c} has {} vertices", cell.len())));
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::IndexOutOfRange { index: bad, max: vertices.len().saturating_sub(1) });
            }
        }
        let mut mesh = Mesh { d, vertices, cells, boundary_vertex_flags: Vec::new(), lattice: None };
        for c in 0..mesh.cells.len() {
            if !aff_indep(&mesh.cell_vertices(c)) {
                return Err(Error::DegenerateVertices);
            }
        }
        let counts = facet_counts(&mesh.cells);
        let mut flags = vec![false; mesh.vertices.len()];
        for (facet, &n) in &counts {
            if n == 1 {
                for &v in facet {
                    flags[v] = true;
                }
            }
        }
        mesh.boundary_vertex_flags = flags;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex_flags
    }

    pub fn cell_vertices(&self, c: usize) -> VertexFamily {
        let pts = self.cells[c].iter().map(|&v| self.vertices[v].clone()).collect();
        VertexFamily::new(self.d, pts).expect("cell arity checked at construction")
    }

    /// Geometric transformation of cell `c`.
    pub fn cell_map(&self, c: usize) -> AffineMap {
        t_geom(&self.cell_vertices(c))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: MeshRepr = serde_json::from_str(s)?;
        Mesh::new(r.d, r.vertices.into_iter().map(Point).collect(), r.cells)
    }

    pub fn to_json(&self) -> Result<String> {
        let r = MeshRepr {
            d: self.d,
            vertices: self.vertices.iter().map(|p| p.0.clone()).collect(),
            cells: self.cells.clone(),
        };
        Ok(serde_json::to_string(&r)?)
    }

    /// Fails when a facet is shared by more than two cells or a vertex lies
    /// on a cell it does not belong to (hanging node).
    pub fn check_conforming(&self) -> Result<()> {
        for (facet, &n) in &facet_counts(&self.cells) {
            if n > 2 {
                return Err(Error::NonconformingMesh(format!("facet {facet:?} shared by {n} cells")));
            }
        }
        const EPS: f64 = 1e-12;
        for c in 0..self.cells.len() {
            let vtx = self.cell_vertices(c);
            let (lo, hi) = bounding_box(vtx.points());
            for (v, p) in self.vertices.iter().enumerate() {
                if self.cells[c].contains(&v) {
                    continue;
                }
                if p.iter().zip(&lo).zip(&hi).any(|((x, l), h)| *x < l - EPS || *x > h + EPS) {
                    continue;
                }
                let l = baryc_coord(&vtx, p)?;
                if l.iter().all(|&li| li >= -EPS) {
                    return Err(Error::NonconformingMesh(format!("vertex {v} lies on cell {c}")));
                }
            }
        }
        Ok(())
    }
}

fn bounding_box(pts: &[Point]) -> (Vec<f64>, Vec<f64>) {
    let d = pts[0].dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in pts {
        for j in 0..d {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    (lo, hi)
}

/// `n` equal cells on `[0, 1]` (`d = 1`) or an `n x n` grid on `[0, 1]^2`
/// with each square cut along its lower-left to upper-right diagonal.
pub fn structured_mesh(d: usize, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("structured meshes need n >= 1".into()));
    }
    let (coords, cells): (Vec<Vec<i64>>, Vec<Vec<usize>>) = match d {
        1 => ((0..=n as i64).map(|i| vec![i]).collect(), (0..n).map(|i| vec![i, i + 1]).collect()),
        2 => {
            let id = |i: usize, j: usize| j * (n + 1) + i;
            let coords = (0..=n as i64).flat_map(|j| (0..=n as i64).map(move |i| vec![i, j])).collect();
            let mut cells = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
            (coords, cells)
        }
        _ => return Err(Error::Unsupported(format!("structured meshes in dimension {d}"))),
    };
    let scale = n as i64;
    let vertices = coords.iter().map(|c| Point(c.iter().map(|&x| x as f64 / scale as f64).collect())).collect();
    let mut mesh = Mesh::new(d, vertices, cells)?;
    mesh.lattice = Some(Lattice { scale, coords });
    Ok(mesh)
}

/// Global numbering of the degree-`k` Lagrange nodes of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub k: usize,
    /// Global index of each local node, cell by cell, in table order.
    pub cell_to_global: Vec<Vec<usize>>,
    pub n_global: usize,
    pub node_coords: Vec<Point>,
    pub boundary_dof_flags: Vec<bool>,
}

/// Numbers the Lagrange nodes so that nodes shared between cells get a
/// single index. Nodes are identified by exact rational coordinates.
pub fn global_numbering(mesh: &Mesh, k: usize) -> Result<DofMap> {
    if k == 0 {
        return Err(Error::InvalidArgument("continuous numbering needs k >= 1".into()));
    }
    mesh.check_conforming()?;
    let d = mesh.d;
    let alphas = table(d, k);
    let exact_vertices: Vec<Vec<Rational>> = match &mesh.lattice {
        Some(l) => l.coords.iter().map(|c| c.iter().map(|&x| Rational::from_i64(x)).collect()).collect(),
        None => mesh.vertices.iter().map(|p| p.iter().map(Scalar::to_rational).collect()).collect(),
    };
    // key = Σ_m beta_m v_m with beta = (k - |alpha|, alpha), i.e. k times the node.
    let denom = Rational::from_i64(k as i64 * mesh.lattice.as_ref().map_or(1, |l| l.scale));

    let counts = facet_counts(&mesh.cells);
    let mut index: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut node_coords = Vec::new();
    let mut boundary = Vec::new();
    let mut cell_to_global = Vec::with_capacity(mesh.cells.len());

    for cell in &mesh.cells {
        let boundary_facets: Vec<bool> = (0..=d).map(|m| counts[&facet_key(cell, m)] == 1).collect();
        let mut local = Vec::with_capacity(alphas.len());
        for alpha in alphas.rows() {
            let mut beta = Vec::with_capacity(d + 1);
            beta.push(k - alpha.sum());
            beta.extend_from_slice(alpha.entries());
            let mut key = vec![Rational::zero(); d];
            for (b, &v) in beta.iter().zip(cell) {
                if *b == 0 {
                    continue;
                }
                let b = Rational::from_i64(*b as i64);
                for (kj, vj) in key.iter_mut().zip(&exact_vertices[v]) {
                    *kj += &b * vj;
                }
            }
            let on_boundary = beta.iter().zip(&boundary_facets).any(|(b, &bf)| *b == 0 && bf);
            let g = *index.entry(key.clone()).or_insert_with(|| {
                node_coords.push(Point(key.iter().map(|x| (x / &denom).to_f64()).collect()));
                boundary.push(false);
                node_coords.len() - 1
            });
            boundary[g] |= on_boundary;
            local.push(g);
        }
        cell_to_global.push(local);
    }
    Ok(DofMap { k, n_global: node_coords.len(), cell_to_global, node_coords, boundary_dof_flags: boundary })
}

/// Right-hand side `f` of the Poisson problem.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    Poly(&'a Poly),
    Fn(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
}

/// Known solution used to measure errors.
#[derive(Clone, Copy)]
pub enum ExactSolution<'a> {
    Poly(&'a Poly),
    Fn { value: &'a (dyn Fn(&[f64]) -> f64 + Sync), gradient: &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync) },
}

// Reference dual basis of degree k with its exact stiffness blocks.
struct RefElement {
    n: usize,
    theta: Vec<Poly>,
    // stiff[(a * d + b) * n * n + i * n + j] = ∫ ∂_a θ_i ∂_b θ_j
    stiff: Vec<f64>,
}

fn ref_element(d: usize, k: usize) -> Result<Arc<RefElement>> {
    static CACHE: Cache<RefElement> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(d, k)) {
        return Ok(r.clone());
    }
    let fe = reference_lagrange_fe::<Rational>(d, k)?;
    let theta_exact = dual_basis(&fe)?;
    let grads_exact: Vec<Vec<Poly<Rational>>> = theta_exact.iter().map(Poly::gradient).collect::<Result<_>>()?;
    let n = theta_exact.len();
    let mut stiff = vec![0.0; d * d * n * n];
    for a in 0..d {
        for b in 0..d {
            for i in 0..n {
                for j in 0..n {
                    let prod = grads_exact[i][a].mul(&grads_exact[j][b])?;
                    let tbl = table(d, prod.degree());
                    let v = prod
                        .coeffs()
                        .iter()
                        .zip(tbl.rows())
                        .filter(|(c, _)| !c.is_zero())
                        .fold(Rational::zero(), |acc, (c, alpha)| acc + c * simplex_monomial_integral(alpha));
                    stiff[(a * d + b) * n * n + i * n + j] = v.to_f64();
                }
            }
        }
    }
    let r = Arc::new(RefElement { n, theta: theta_exact.iter().map(Poly::convert).collect(), stiff });
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert((d, k), r.clone());
    Ok(r)
}

/// Interpolatory rule on the reference simplex at the degree-`q` Lagrange
/// nodes, exact on `P_q`. The weights are the exact integrals of the dual basis.
#[derive(Debug, Clone)]
pub struct NodalRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

pub fn nodal_rule(d: usize, q: usize) -> Result<Arc<NodalRule>> {
    static CACHE: Cache<NodalRule> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(d, q)) {
        return Ok(r.clone());
    }
    let fe = reference_lagrange_fe::<Rational>(d, q)?;
    // Σ_m w_m b_j(x_m) = ∫ b_j for every monomial b_j, i.e. V^T w = moments.
    let v = fe.unisolvence_matrix()?;
    let moments: Vec<Rational> = table(d, q).rows().iter().map(simplex_monomial_integral).collect();
    let w = v.lu()?.solve_transpose(&moments)?;
    let rule = Arc::new(NodalRule {
        points: lagrange_ref_nodes::<f64>(d, q)?,
        weights: w.iter().map(Scalar::to_f64).collect(),
    });
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert((d, q), rule.clone());
    Ok(rule)
}

// Per-cell geometric factors.
struct CellGeometry {
    map: AffineMap,
    abs_det: f64,
    // J^-1 J^-T
    metric: Matrix,
    // J^-T
    inv_t: Matrix,
}

fn cell_geometry(mesh: &Mesh, c: usize) -> Result<CellGeometry> {
    let map = mesh.cell_map(c);
    let j = map.matrix();
    let lu = j.lu()?;
    if lu.is_singular() {
        return Err(Error::DegenerateVertices);
    }
    let inv = lu.inverse()?;
    let inv_t = inv.transpose();
    let metric = inv.matmul(&inv_t)?;
    Ok(CellGeometry { abs_det: lu.determinant().abs(), map, metric, inv_t })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub n: usize,
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
    pub dirichlet: Vec<bool>,
    pub numbering: DofMap,
}

fn local_system(
    mesh: &Mesh,
    c: usize,
    re: &RefElement,
    f: Source<'_>,
    rule: Option<&NodalRule>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = mesh.d;
    let n = re.n;
    let g = cell_geometry(mesh, c)?;
    let mut ke = vec![0.0; n * n];
    for a in 0..d {
        for b in 0..d {
            let gab = g.metric[(a, b)];
            if gab == 0.0 {
                continue;
            }
            let block = &re.stiff[(a * d + b) * n * n..(a * d + b + 1) * n * n];
            for (e, s) in ke.iter_mut().zip(block) {
                *e += gab * s;
            }
        }
    }
    for e in ke.iter_mut() {
        *e *= g.abs_det;
    }
    let be = match f {
        Source::Poly(p) => {
            let f_hat = p.pullback_affine(&g.map)?;
            re.theta.iter().map(|t| Ok(g.abs_det * integrate_reference(&f_hat.mul(t)?))).collect::<Result<Vec<_>>>()?
        }
        Source::Fn(func) => {
            let rule = rule.expect("nodal rule prepared for callable sources");
            let mut be = vec![0.0; n];
            for (xi, w) in rule.points.iter().zip(&rule.weights) {
                let fx = func(&g.map.apply(xi)?);
                for (bi, t) in be.iter_mut().zip(&re.theta) {
                    *bi += g.abs_det * w * fx * t.eval(xi)?;
                }
            }
            be
        }
    };
    Ok((ke, be))
}

/// Assembles `A_ij = ∫ ∇φ_j·∇φ_i` and `b_i = ∫ f φ_i` over the mesh.
///
/// Local contributions may be computed on `threads` workers; they are
/// always added in cell order, so the result does not depend on `threads`.
pub fn assemble_poisson(mesh: &Mesh, k: usize, f: Source<'_>, threads: usize) -> Result<GlobalSystem> {
    if k == 0 {
        return Err(Error::Unsupported("k = 0 gives no conforming H1 space".into()));
    }
    if let Source::Poly(p) = f {
        if p.dim() != mesh.d {
            return Err(Error::DimensionMismatch { expected: mesh.d, got: p.dim() });
        }
    }
    let numbering = global_numbering(mesh, k)?;
    let re = ref_element(mesh.d, k)?;
    let rule = match f {
        Source::Fn(_) => Some(nodal_rule(mesh.d, 2 * k + 2)?),
        Source::Poly(_) => None,
    };
    let compute = |c: usize| local_system(mesh, c, &re, f, rule.as_deref());
    let locals: Vec<(Vec<f64>, Vec<f64>)> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| (0..mesh.cells.len()).into_par_iter().map(compute).collect::<Result<_>>())?
    } else {
        (0..mesh.cells.len()).map(compute).collect::<Result<_>>()?
    };

    let n = numbering.n_global;
    let nl = re.n;
    let mut a = Matrix::zeros(n, n);
    let mut b = vec![0.0; n];
    for (cell_dofs, (ke, be)) in numbering.cell_to_global.iter().zip(&locals) {
        for (i, &gi) in cell_dofs.iter().enumerate() {
            b[gi] += be[i];
            for (j, &gj) in cell_dofs.iter().enumerate() {
                a[(gi, gj)] += ke[i * nl + j];
            }
        }
    }
    Ok(GlobalSystem { n, matrix: a, rhs: b, dirichlet: numbering.boundary_dof_flags.clone(), numbering })
}

impl GlobalSystem {
    /// Zeroes Dirichlet rows and columns, with a unit diagonal and zero data.
    pub fn apply_homogeneous_dirichlet(&mut self) {
        for g in 0..self.n {
            if !self.dirichlet[g] {
                continue;
            }
            for j in 0..self.n {
                self.matrix[(g, j)] = 0.0;
                self.matrix[(j, g)] = 0.0;
            }
            self.matrix[(g, g)] = 1.0;
            self.rhs[g] = 0.0;
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub n_dof: usize,
    pub u: Vec<f64>,
    pub numbering: DofMap,
    pub l2_error: Option<f64>,
    pub h1_semi_error: Option<f64>,
}

impl PoissonSolution {
    /// Writes `global_dof,x_0,...,u_h`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.numbering.node_coords.first().map_or(0, Point::dim);
        let mut header = vec!["global_dof".to_string()];
        header.extend((0..d).map(|j| format!("x_{j}")));
        header.push("u_h".into());
        w.write_record(&header)?;
        for (g, (x, u)) in self.numbering.node_coords.iter().zip(&self.u).enumerate() {
            let mut rec = vec![g.to_string()];
            rec.extend(x.iter().map(ToString::to_string));
            rec.push(u.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

/// Solves the Dirichlet problem and, when `exact` is given, measures the
/// L2 and H1-seminorm errors cell by cell.
pub fn solve_poisson(
    mesh: &Mesh,
    k: usize,
    f: Source<'_>,
    exact: Option<ExactSolution<'_>>,
    threads: usize,
) -> Result<PoissonSolution> {
    let mut sys = assemble_poisson(mesh, k, f, threads)?;
    sys.apply_homogeneous_dirichlet();
    let u = Cholesky::new(&sys.matrix)?.solve(&sys.rhs)?;
    let (l2, h1) = match exact {
        Some(ex) => {
            let (l2, h1) = discretization_errors(mesh, k, &sys.numbering, &u, ex)?;
            (Some(l2), Some(h1))
        }
        None => (None, None),
    };
    Ok(PoissonSolution { n_dof: sys.n, u, numbering: sys.numbering, l2_error: l2, h1_semi_error: h1 })
}

/// `(‖u - u_h‖_L2, |u - u_h|_H1)`.
pub fn discretization_errors(
    mesh: &Mesh,
    k: usize,
    numbering: &DofMap,
    u_h: &[f64],
    exact: ExactSolution<'_>,
) -> Result<(f64, f64)> {
    let d = mesh.d;
    let re = ref_element(d, k)?;
    let rule = match exact {
        ExactSolution::Fn { .. } => Some(nodal_rule(d, 2 * k + 2)?),
        ExactSolution::Poly(_) => None,
    };
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for (c, dofs) in numbering.cell_to_global.iter().enumerate() {
        let g = cell_geometry(mesh, c)?;
        let values: Vec<f64> = dofs.iter().map(|&i| u_h[i]).collect();
        let uh_hat = crate::poly::linear_combination(&values, &re.theta)?;
        match exact {
            ExactSolution::Poly(u) => {
                let e = u.pullback_affine(&g.map)?.sub(&uh_hat)?;
                l2 += g.abs_det * integrate_reference(&e.mul(&e)?);
                let grad = e.gradient()?;
                for a in 0..d {
                    for b in 0..d {
                        let gab = g.metric[(a, b)];
                        if gab != 0.0 {
                            h1 += g.abs_det * gab * integrate_reference(&grad[a].mul(&grad[b])?);
                        }
                    }
                }
            }
            ExactSolution::Fn { value, gradient } => {
                let rule = rule.as_deref().expect("rule prepared");
                let grad_hat = uh_hat.gradient()?;
                for (xi, w) in rule.points.iter().zip(&rule.weights) {
                    let x = g.map.apply(xi)?;
                    let e = value(&x) - uh_hat.eval(xi)?;
                    l2 += g.abs_det * w * e * e;
                    let gh: Vec<f64> = grad_hat.iter().map(|p| p.eval(xi)).collect::<Result<_>>()?;
                    let guh = g.inv_t.mul_vec(&gh)?;
                    let gu = gradient(&x);
                    let s: f64 = gu.iter().zip(&guh).map(|(a, b)| (a - b) * (a - b)).sum();
                    h1 += g.abs_det * w * s;
                }
            }
        }
    }
    // Rounding can leave tiny negative sums when the error vanishes.
    Ok((l2.max(0.0).sqrt(), h1.max(0.0).sqrt()))
}

/// `u = Π x_i (1 - x_i)` on `[0, 1]^d`, returned with `f = -Δu`.
pub fn manufactured_poly(d: usize) -> Result<(Poly, Poly)> {
    let mut u = Poly::constant(d, 0, 1.0);
    for j in 0..d {
        let xj = Poly::coordinate(d, j)?;
        let one_minus = Poly::constant(d, 1, 1.0).sub(&xj)?;
        u = u.mul(&xj.mul(&one_minus)?)?;
    }
    let mut f = Poly::zero(d, u.degree());
    for j in 0..d {
        let second = u.derivative(&MultiIndex::scaled_unit(d, j, 2))?;
        f = f.sub(&second)?;
    }
    Ok((u, f))
}

/// `u = Π sin(π x_i)` on `[0, 1]^d`, with `f = d π² u`.
#[derive(Debug, Clone, Copy)]
pub struct SineSolution {
    pub d: usize,
}

impl SineSolution {
    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|xi| (std::f64::consts::PI * xi).sin()).product()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        (0..x.len())
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(i, xi)| if i == j { pi * (pi * xi).cos() } else { (pi * xi).sin() })
                    .product()
            })
            .collect()
    }

    pub fn source(&self, x: &[f64]) -> f64 {
        self.d as f64 * std::f64::consts::PI.powi(2) * self.value(x)
    }
}
