use framed_core::catalog::builtin;
use framed_core::spectral::{assemble, build_mesh, estimate_index, index_run};
use framed_core::surface::{SurfaceData, SurfaceSpec};
use framed_core::{Complex64 as C64, Expr};
use std::collections::BTreeMap;

fn spec(name: &str) -> SurfaceSpec {
    builtin(name, &BTreeMap::new()).unwrap().surface
}

fn assembled_equal(a: &SurfaceSpec, b: &SurfaceSpec, r: f64, h: f64) -> bool {
    let x = assemble(a, &build_mesh(a, r, h).unwrap()).unwrap();
    let y = assemble(b, &build_mesh(b, r, h).unwrap()).unwrap();
    x.a == y.a
}

#[test]
fn associated_family_gives_identical_matrices() {
    for name in ["catenoid", "enneper", "scherk"] {
        let s = spec(name);
        for theta in [0.7, std::f64::consts::FRAC_PI_2, 3.0] {
            assert!(assembled_equal(&s, &s.associated_family(theta), 5.0, 0.3), "{name} {theta}");
        }
    }
}

#[test]
fn scaling_eta_leaves_the_jacobi_form_unchanged() {
    let s = spec("enneper");
    let mut t = s.clone();
    if let SurfaceData::Weierstrass { eta, .. } = &mut t.data {
        *eta = Expr::mul(Expr::constant(C64::new(2.5, -1.0)), eta.clone());
    }
    assert!(assembled_equal(&s, &t, 10.0, 0.3));
}

#[test]
fn negative_count_is_monotone_in_r() {
    let s = spec("scherk");
    let counts: Vec<usize> = [2.0, 5.0, 10.0]
        .iter()
        .map(|r| index_run(&s, *r, 0.3).unwrap().1.negative)
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
}

#[test]
fn report_is_deterministic() {
    let s = spec("catenoid");
    let a = estimate_index(&s, &[5.0, 10.0], &[0.4, 0.3]).unwrap();
    let b = estimate_index(&s, &[5.0, 10.0], &[0.4, 0.3]).unwrap();
    assert_eq!(a, b);
}
