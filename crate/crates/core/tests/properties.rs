use framed_core::expr::parse;
use framed_core::moebius::Mat2;
use framed_core::repr::associated_family;
use framed_core::schwarzian::schwarzian_from_jets;
use framed_core::spectral::{inertia, inertia_dense_oracle, rcm, SymSparse};
use framed_core::surface::{h1_exact_genus0, Divisor, SurfaceData, SurfaceSpec};
use framed_core::{eval_jet, laurent, Complex64 as C64, Expr, Point};
use proptest::prelude::*;

fn c64(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(a, b)| C64::new(a, b))
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::Var),
        (-3.0..3.0f64).prop_map(|x| Expr::Const(C64::new(x, 0.0))),
        c64(2.0).prop_map(Expr::Const),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |e| Expr::Neg(b(e))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            (inner.clone(), -3i32..=3).prop_map(move |(x, n)| Expr::PowInt(b(x), n)),
            (inner, 0.2..2.5f64).prop_map(move |(x, mu)| Expr::Pow {
                base: b(x),
                exponent: b(Expr::Const(C64::new(mu, 0.0))),
                branch: Some(0),
            }),
        ]
    })
}

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse_is_stable(e in expr(), z in c64(1.5)) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(back.to_string(), printed.clone());
        if let (Ok(a), Ok(b)) = (e.eval(z), back.eval(z)) {
            if a.is_finite() && b.is_finite() {
                prop_assert!(close(a, b, 1e-12), "{} at {}: {} vs {}", printed, z, a, b);
            }
        }
    }

    #[test]
    fn jets_match_symbolic_derivatives(e in expr(), z in c64(1.5)) {
        let Ok(j) = eval_jet(&e, z, 3) else { return Ok(()) };
        let d1 = e.derivative();
        let d2 = d1.derivative();
        for (k, d) in [(1, d1), (2, d2)] {
            if let Ok(v) = d.eval(z) {
                let w = j.derivative_value(k);
                if v.is_finite() && w.is_finite() && v.norm() < 1e6 {
                    prop_assert!(close(v, w, 1e-7), "{} order {}: {} vs {}", e, k, v, w);
                }
            }
        }
    }

    #[test]
    fn laurent_valuation_of_monomial_times_unit(
        k in -4i32..=4,
        u in prop::collection::vec(c64(1.0), 1..4),
        u0 in c64(1.0),
    ) {
        prop_assume!(u0.norm() > 0.1);
        let mut unit = Expr::Const(u0);
        for (i, c) in u.iter().enumerate() {
            unit = Expr::add(unit, Expr::mul(Expr::constant(*c), Expr::powi(Expr::z(), i as i32 + 1)));
        }
        let e = Expr::mul(Expr::powi(Expr::z(), k), unit);
        let s = laurent(&e, Point::finite(0.0, 0.0), k + 4).unwrap();
        prop_assert_eq!(s.order, k);
        prop_assert!(close(s.coefficient(k), u0, 1e-14));
    }

    #[test]
    fn schwarzian_moebius_invariance(
        f in prop::collection::vec(c64(1.0), 4),
        m in prop::collection::vec(c64(1.0), 4),
        z in c64(1.0),
    ) {
        let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
        prop_assume!((a * d - b * c).norm() > 0.2);
        let p = f.iter().rev().fold(Expr::real(0.0), |acc, x| Expr::add(Expr::mul(acc, Expr::z()), Expr::constant(*x)));
        let tp = Expr::div(
            Expr::add(Expr::mul(Expr::constant(a), p.clone()), Expr::constant(b)),
            Expr::add(Expr::mul(Expr::constant(c), p.clone()), Expr::constant(d)),
        );
        let g = Expr::add(Expr::z(), Expr::mul(Expr::real(0.3), Expr::powi(Expr::z(), 2)));
        let (Ok(jp), Ok(jt), Ok(jg)) = (p.jet(z, 4), tp.jet(z, 4), g.jet(z, 4)) else { return Ok(()) };
        let (Ok(s0), Ok(s1)) = (schwarzian_from_jets(&jp, &jg), schwarzian_from_jets(&jt, &jg)) else { return Ok(()) };
        prop_assume!(s0.norm() < 1e6 && jt.value().norm() < 1e3);
        prop_assert!(close(s0, s1, 1e-7), "{} vs {}", s0, s1);
    }

    #[test]
    fn moebius_action_is_a_homomorphism(
        m1 in prop::collection::vec(c64(1.0), 4),
        m2 in prop::collection::vec(c64(1.0), 4),
        w in c64(2.0),
    ) {
        let a = Mat2::new(m1[0], m1[1], m1[2], m1[3]);
        let b = Mat2::new(m2[0], m2[1], m2[2], m2[3]);
        prop_assume!(a.det().norm() > 0.1 && b.det().norm() > 0.1);
        let direct = (a * b).apply(Point::Finite(w));
        let stepwise = a.apply(b.apply(Point::Finite(w)));
        prop_assert!(direct.approx_eq(&stepwise, 1e-9), "{:?} vs {:?}", direct, stepwise);
    }

    #[test]
    fn riemann_roch_on_the_sphere(
        pts in prop::collection::vec((c64(3.0), -4i32..=3), 1..6),
        at_inf in -3i32..=2,
    ) {
        let mut entries: Vec<(Point, i32)> = vec![];
        for (p, m) in pts {
            let p = Point::Finite(p);
            if entries.iter().all(|(q, _)| q.chordal_distance(&p) > 1e-2) {
                entries.push((p, m));
            }
        }
        entries.push((Point::Infinity, at_inf));
        let d = Divisor::new(entries);
        let want = (-d.degree() - 1).max(0) as usize;
        prop_assert_eq!(h1_exact_genus0(&d), want);
    }

    #[test]
    fn sparse_inertia_matches_dense(n in 2usize..40, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut trip = vec![];
        for i in 0..n {
            trip.push((i, i, r.gen_range(-2.0..2.0)));
            for j in 0..i {
                if r.gen_bool(0.2) {
                    trip.push((i, j, r.gen_range(-1.0..1.0)));
                }
            }
        }
        let a = SymSparse::from_triplets(n, &trip);
        let order = rcm(&a, &vec![true; n]);
        let sparse = inertia(&a, &order).unwrap();
        let dense = inertia_dense_oracle(&a);
        prop_assert_eq!((sparse.negative, sparse.zero), (dense.negative, dense.zero));
    }

    #[test]
    fn associated_family_keeps_the_metric(theta in -3.2..3.2f64, z in c64(1.5)) {
        let s = SurfaceSpec::sphere(
            "enneper",
            vec![Point::Infinity],
            SurfaceData::Weierstrass { g: Expr::z(), eta: Expr::real(1.0) },
        );
        let t = associated_family(&s, theta);
        let (a, b) = (s.evaluator().unwrap().at(z).unwrap(), t.evaluator().unwrap().at(z).unwrap());
        prop_assert_eq!(a.e2l, b.e2l);
        prop_assert_eq!(a.curvature, b.curvature);
        prop_assert!(close(b.sigma, a.sigma * C64::from_polar(1.0, theta), 1e-14));
    }
}
