mod common;

use proptest::prelude::*;

use simplex_fe::element::{dual_basis, lagrange_nodes, local_interpolate, make_lagrange_fe, unisolvence_check, Mode};
use simplex_fe::geom::{baryc_coord, barycenter, lagp1, t_geom, vtx_ref};
use simplex_fe::mindex::{adk, adk_inv, grsymlex_cmp, grsymlex_lt, pbinom, table};
use simplex_fe::{AffineMap, MultiIndex, Point, Poly, Rational, Scalar, VertexFamily};

use common::*;

fn multi_index(d: usize, max_sum: usize) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0..=max_sum, d)
        .prop_filter_map("sum too large", move |v| (v.iter().sum::<usize>() <= max_sum).then_some(MultiIndex(v)))
}

fn poly(d: usize, k: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(-1.0f64..1.0, pbinom(d, k) + 1).prop_map(move |c| Poly::from_coeffs(d, k, c).unwrap())
}

fn vertices(d: usize) -> impl Strategy<Value = VertexFamily> {
    prop::collection::vec(-0.25f64..0.25, d * (d + 1)).prop_map(move |noise| {
        let pts = vtx_ref::<f64>(d)
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| Point(p.iter().enumerate().map(|(j, x)| x + noise[i * d + j]).collect()))
            .collect();
        VertexFamily::new(d, pts).unwrap()
    })
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=9).prop_map(|(p, q)| Rational::from_ratio(p, q))
}

fn rational_vertices(d: usize) -> impl Strategy<Value = VertexFamily<Rational>> {
    prop::collection::vec(small_rational(), d * (d + 1)).prop_filter_map("degenerate", move |c| {
        let pts = c.chunks(d).map(|r| Point(r.to_vec())).collect();
        let v = VertexFamily::new(d, pts).unwrap();
        simplex_fe::geom::aff_indep(&v).then_some(v)
    })
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn tables_are_sorted_and_complete() {
    for d in 0..=6 {
        for k in 0..=6 {
            let t = adk(d, k);
            assert_eq!(t.len() as u128, binomial_by_pascal(d + k, d));
            assert_eq!(t.len(), brute_force_multi_indices(d, k).len());
            for w in t.rows().windows(2) {
                assert!(grsymlex_lt(&w[0], &w[1]).unwrap());
            }
            for (i, a) in t.rows().iter().enumerate() {
                assert_eq!(adk_inv(d, k, a).unwrap(), i);
            }
        }
    }
}

#[test]
fn integral_formula_matches_slicing() {
    for d in 0..=3 {
        for k in 0..=6 {
            for alpha in table(d, k).rows() {
                assert_eq!(
                    simplex_fe::fem::simplex_monomial_integral(alpha),
                    simplex_integral_by_slicing(alpha.entries()),
                    "alpha = {alpha}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn grsymlex_is_a_strict_total_order(
        (a, b, c) in (1usize..=4).prop_flat_map(|d| (multi_index(d, 6), multi_index(d, 6), multi_index(d, 6)))
    ) {
        let lt = |x: &MultiIndex, y: &MultiIndex| grsymlex_lt(x, y).unwrap();
        prop_assert!(!lt(&a, &a));
        prop_assert_eq!(lt(&a, &b) || lt(&b, &a), a != b);
        prop_assert!(!(lt(&a, &b) && lt(&b, &a)));
        if lt(&a, &b) && lt(&b, &c) {
            prop_assert!(lt(&a, &c));
        }
        prop_assert_eq!(grsymlex_cmp(&a, &b).unwrap(), grsymlex_cmp(&b, &a).unwrap().reverse());
    }

    #[test]
    fn table_index_does_not_depend_on_degree(
        (a, extra) in (1usize..=4).prop_flat_map(|d| (multi_index(d, 5), 0usize..3))
    ) {
        let k = a.sum() + extra;
        prop_assert_eq!(adk_inv(a.dim(), k, &a).unwrap(), adk_inv(a.dim(), a.sum(), &a).unwrap());
    }

    #[test]
    fn derivative_is_linear(
        (p, q, beta) in (1usize..=3, 0usize..=4).prop_flat_map(|(d, k)| (poly(d, k), poly(d, k), multi_index(d, 3))),
        s in -2.0f64..2.0
    ) {
        let lhs = p.axpy(&s, &q).unwrap().derivative(&beta).unwrap();
        let rhs = p.derivative(&beta).unwrap().axpy(&s, &q.derivative(&beta).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn mixed_partials_commute(
        (p, b1, b2) in (1usize..=3, 0usize..=5).prop_flat_map(|(d, k)| (poly(d, k), multi_index(d, 2), multi_index(d, 2)))
    ) {
        let a = p.derivative(&b1).unwrap().derivative(&b2).unwrap();
        let b = p.derivative(&b2).unwrap().derivative(&b1).unwrap();
        let c = p.derivative(&b1.add(&b2).unwrap()).unwrap();
        prop_assert!(a.approx_eq(&b, 1e-12));
        prop_assert!(a.approx_eq(&c, 1e-12));
    }

    #[test]
    fn division_reconstructs(
        (p, x) in (1usize..=3, 0usize..=5).prop_flat_map(|(d, k)| (poly(d, k), prop::collection::vec(-1.0f64..1.0, d)))
    ) {
        let d = p.dim();
        let (p0, p1) = p.divide_by_last_var().unwrap();
        let rebuilt = p0.eval(&x[..d - 1]).unwrap() + x[d - 1] * p1.eval(&x).unwrap();
        prop_assert!((rebuilt - p.eval(&x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn product_evaluates_as_product(
        (p, q, x) in (1usize..=3).prop_flat_map(|d| (poly(d, 2), poly(d, 3), prop::collection::vec(-1.0f64..1.0, d)))
    ) {
        let pq = p.mul(&q).unwrap();
        let expect = p.eval(&x).unwrap() * q.eval(&x).unwrap();
        prop_assert!((pq.eval(&x).unwrap() - expect).abs() <= 1e-12);
    }

    #[test]
    fn pullback_composes(
        (p, v, w, x) in (1usize..=3).prop_flat_map(|d| (poly(d, 3), vertices(d), vertices(d), prop::collection::vec(-1.0f64..1.0, d)))
    ) {
        let (f, g) = (t_geom(&v), t_geom(&w));
        let once = p.pullback_affine(&f.compose(&g).unwrap()).unwrap();
        let twice = p.pullback_affine(&f).unwrap().pullback_affine(&g).unwrap();
        prop_assert!(once.approx_eq(&twice, 1e-10));
        let direct = p.eval(&f.apply(&x).unwrap()).unwrap();
        prop_assert!((p.pullback_affine(&f).unwrap().eval(&x).unwrap() - direct).abs() <= 1e-12);
    }

    #[test]
    fn geometric_maps_compose_and_invert(
        (v, w, x) in (1usize..=3).prop_flat_map(|d| (vertices(d), vertices(d), prop::collection::vec(-1.0f64..1.0, d)))
    ) {
        let tv = t_geom(&v);
        let lhs = tv.compose(&t_geom(&w)).unwrap().apply(&x).unwrap();
        let rhs = t_geom(&w.map(&tv).unwrap()).apply(&x).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
        let back = tv.inverse().unwrap().apply(&tv.apply(&x).unwrap()).unwrap();
        prop_assert!(close(&back, &x, 1e-12));
    }

    #[test]
    fn affine_maps_preserve_barycenters(
        (v, raw, m, off) in (1usize..=3).prop_flat_map(|d| (
            vertices(d),
            prop::collection::vec(0.1f64..1.0, d + 1),
            prop::collection::vec(-1.0f64..1.0, d * d),
            prop::collection::vec(-1.0f64..1.0, d),
        ))
    ) {
        let d = v.dim();
        let phi = AffineMap::new(simplex_fe::linalg::Matrix::from_fn(d, d, |i, j| m[i * d + j]), off).unwrap();
        let b = barycenter(&raw, v.points()).unwrap();
        let mapped = v.map(&phi).unwrap();
        let lhs = phi.apply(&b).unwrap();
        let rhs = barycenter(&raw, mapped.points()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn p1_basis_is_barycentric(
        (v, x) in (1usize..=3).prop_flat_map(|d| (vertices(d), prop::collection::vec(-1.0f64..1.0, d)))
    ) {
        let l = baryc_coord(&v, &x).unwrap();
        for (i, li) in l.iter().enumerate() {
            prop_assert!((lagp1(&v, i).unwrap().eval(&x).unwrap() - li).abs() <= 1e-12);
        }
        let s: f64 = l.iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dual_basis_is_kronecker(
        (v, k) in (1usize..=3).prop_flat_map(|d| (vertices(d), 0usize..=3))
    ) {
        let fe = make_lagrange_fe(v.dim(), k, &v, None).unwrap();
        let theta = dual_basis(&fe).unwrap();
        for (i, t) in theta.iter().enumerate() {
            for (j, dof) in fe.dofs().iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dof.apply(t).unwrap() - delta).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_the_space(
        (v, p) in (1usize..=3).prop_flat_map(|d| (vertices(d), poly(d, 2)))
    ) {
        let fe = make_lagrange_fe(v.dim(), 2, &v, None).unwrap();
        let values: Vec<f64> = fe.dofs().iter().map(|d| d.apply(&p).unwrap()).collect();
        prop_assert!(local_interpolate(&fe, &values).unwrap().approx_eq(&p, 1e-9));
    }

    #[test]
    fn lagrange_elements_are_exactly_unisolvent(
        (v, k) in (1usize..=3).prop_flat_map(|d| (rational_vertices(d), 1usize..=3))
    ) {
        let fe = make_lagrange_fe::<Rational>(v.dim(), k, &v, None).unwrap();
        prop_assert!(!unisolvence_check(&fe, Mode::Rational).unwrap().singular);
    }

    #[test]
    fn nodes_lie_on_faces_exactly_when_indexed_so(
        (v, k) in (1usize..=3).prop_flat_map(|d| (rational_vertices(d), 1usize..=4))
    ) {
        let d = v.dim();
        let nodes = lagrange_nodes(&v, k).unwrap();
        for i in 0..=d {
            let l = lagp1(&v, i).unwrap();
            for (node, alpha) in nodes.iter().zip(table(d, k).rows()) {
                let on = num_traits::Zero::is_zero(&l.eval(node).unwrap());
                prop_assert_eq!(on, simplex_fe::mindex::in_asdki(d, k, i, alpha).unwrap());
            }
        }
    }

    #[test]
    fn rational_and_float_nodes_agree(
        (v, k) in (1usize..=3).prop_flat_map(|d| (rational_vertices(d), 1usize..=3))
    ) {
        let exact = lagrange_nodes(&v, k).unwrap();
        let float = lagrange_nodes(&v.convert::<f64>(), k).unwrap();
        for (a, b) in exact.iter().zip(&float) {
            let a: Vec<f64> = a.iter().map(Scalar::to_f64).collect();
            prop_assert!(close(&a, b, 1e-12));
        }
    }
}
