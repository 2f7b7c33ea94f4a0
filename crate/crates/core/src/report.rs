//! Summary reports over a surface: ends and bounds, and residual suites.

use crate::error::{Error, Result};
use crate::laurent::laurent;
use crate::point::Point;
use crate::repr::{
    frame_source, gauss_residual, null_check, observed_order, ros_identity_residual, HarmonicForm,
};
use crate::schwarzian::{classify_end, EndType};
use crate::surface::{
    branch_divisor, end_order, fundamental_divisor, index_bound, monodromy_report, singular_points,
    Bound, Sidedness, SurfaceData, SurfaceSpec,
};
use num_complex::Complex64 as C64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndInfo {
    pub point: String,
    pub order: Option<u32>,
    /// Multiplicity of the Gauss map at the end, when it is single-valued there.
    pub g_multiplicity: Option<u32>,
    pub end_type: Option<EndType>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceInfo {
    pub name: String,
    pub genus: u32,
    pub sidedness: Sidedness,
    pub ends: Vec<EndInfo>,
    pub branch_divisor: String,
    pub divisor: Option<String>,
    pub divisor_degree: Option<i32>,
    pub h1: Option<usize>,
    pub bound_two_sided: Option<Bound>,
    pub bound_one_sided: Option<Bound>,
    pub framed: Option<bool>,
    pub two_sided_consistent: Option<bool>,
    pub errors: Vec<String>,
}

/// Ramification index of `g` at `p`, read off its Laurent expansion.
fn g_multiplicity(s: &SurfaceSpec, p: Point) -> Result<u32> {
    let g = s
        .gauss_map()
        .ok_or_else(|| Error::Unsupported("no Gauss map".into()))?;
    let ser = laurent(g, p, 12)?;
    if ser.order < 0 {
        return Ok((-ser.order) as u32);
    }
    (1..ser.truncation)
        .find(|k| ser.coefficient(*k).norm() > 1e-10)
        .map(|k| k as u32)
        .ok_or_else(|| Error::DegenerateData(format!("Gauss map is constant near {p}")))
}

fn end_info(s: &SurfaceSpec, p: Point) -> EndInfo {
    let mut info = EndInfo {
        point: p.to_string(),
        order: None,
        g_multiplicity: None,
        end_type: None,
        error: None,
    };
    match end_order(s, p) {
        Ok(m) => info.order = Some(m),
        Err(e) => info.error = Some(e.to_string()),
    }
    if let Ok(n) = g_multiplicity(s, p) {
        info.g_multiplicity = Some(n);
        if let Ok(ser) = s.sigma().and_then(|q| q.laurent(p, 4)) {
            info.end_type = Some(classify_end(&ser, n));
        }
    }
    info
}

/// Ends, divisors, `h^1`, both index bounds and framedness of `s`.
pub fn surface_info(s: &SurfaceSpec) -> SurfaceInfo {
    let mut errors = vec![];
    let ends = s.punctures().iter().map(|p| end_info(s, *p)).collect();
    let d = fundamental_divisor(s).map_err(|e| errors.push(format!("divisor: {e}"))).ok();
    let bound = |sided| {
        d.as_ref()
            .and_then(|d| index_bound(s.genus(), d, sided).ok())
    };
    let (two, one) = (bound(Sidedness::TwoSided), bound(Sidedness::OneSided));
    let mono = monodromy_report(s, 256)
        .map_err(|e| errors.push(format!("monodromy: {e}")))
        .ok();
    SurfaceInfo {
        name: s.name.clone(),
        genus: s.genus(),
        sidedness: s.sidedness,
        ends,
        branch_divisor: branch_divisor(s).to_string(),
        divisor: d.as_ref().map(|d| d.to_string()),
        divisor_degree: d.as_ref().map(|d| d.degree()),
        h1: two.as_ref().map(|b| b.h1),
        bound_two_sided: two,
        bound_one_sided: one,
        framed: mono.as_ref().map(|m| m.framed),
        two_sided_consistent: mono.as_ref().map(|m| m.two_sided_consistent),
        errors,
    }
}

/// Step sizes for the finite-difference suites.
pub const CHECK_STEPS: [f64; 3] = [0.02, 0.01, 0.005];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub suite: String,
    pub z: [f64; 2],
    /// Residual at each of [`CHECK_STEPS`].
    pub residuals: Vec<f64>,
    pub min_order: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

impl CheckRow {
    fn from_residuals(suite: String, z: C64, r: Vec<f64>, floor: f64) -> CheckRow {
        let orders = observed_order(&CHECK_STEPS, &r);
        let worst = r.iter().cloned().fold(0.0, f64::max);
        let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
        let settled = worst <= floor;
        CheckRow {
            suite,
            z: [z.re, z.im],
            residuals: r,
            min_order: (!settled && min_order.is_finite()).then_some(min_order),
            pass: settled || min_order >= 1.5,
            note: None,
        }
    }

    /// Suites that do not apply to the kind of data are skipped, not failed.
    fn failed(suite: String, z: C64, e: Error) -> CheckRow {
        let skipped = matches!(e, Error::Unsupported(_));
        CheckRow {
            suite,
            z: [z.re, z.im],
            residuals: vec![],
            min_order: None,
            pass: skipped,
            note: Some(if skipped { format!("skipped: {e}") } else { e.to_string() }),
        }
    }
}

/// Up to `count` deterministic sample points in `|z| <= 1.5` keeping a margin
/// from punctures, zeros and poles of the data.
pub fn check_points(s: &SurfaceSpec, count: usize) -> Vec<C64> {
    let bad = singular_points(s);
    let mut out = vec![];
    for k in 0..64 {
        let r = 0.35 + 0.9 * ((k as f64 * 0.618_033_988_75) % 1.0);
        let t = 2.0 * std::f64::consts::PI * ((k as f64 * 0.414_213_562_37 + 0.1) % 1.0);
        let z = C64::from_polar(r, t);
        if bad.iter().all(|b| (z - b).norm() > 0.25) {
            out.push(z);
            if out.len() == count {
                break;
            }
        }
    }
    out
}

/// Null-immersion, Gauss-equation and harmonic-form identity residuals at a
/// few sample points, each over [`CHECK_STEPS`]. A row passes when its
/// residuals are below `floor` or converge at least at order 1.5.
pub fn check_suite(s: &SurfaceSpec, points: usize, floor: f64) -> Vec<CheckRow> {
    let mut rows = vec![];
    let minimal = matches!(s.data, SurfaceData::Weierstrass { .. });
    for z in check_points(s, points) {
        let null = frame_source(s, z).and_then(|src| {
            CHECK_STEPS.iter().map(|h| null_check(&src, z, *h)).collect::<Result<Vec<_>>>()
        });
        rows.push(match null {
            Ok(r) => CheckRow::from_residuals("null".into(), z, r, floor),
            Err(e) => CheckRow::failed("null".into(), z, e),
        });
        let gauss = CHECK_STEPS
            .iter()
            .map(|h| gauss_residual(s, z, *h))
            .collect::<Result<Vec<_>>>();
        rows.push(match gauss {
            Ok(r) => CheckRow::from_residuals("gauss".into(), z, r, floor),
            Err(e) => CheckRow::failed("gauss".into(), z, e),
        });
        if !minimal {
            continue;
        }
        for w in [
            HarmonicForm::Dx(0),
            HarmonicForm::Dx(1),
            HarmonicForm::Dx(2),
            HarmonicForm::StarDx(2),
        ] {
            let name = match w {
                HarmonicForm::Dx(k) => format!("ros dx{}", k + 1),
                HarmonicForm::StarDx(k) => format!("ros *dx{}", k + 1),
            };
            let r = CHECK_STEPS
                .iter()
                .map(|h| ros_identity_residual(s, w, z, *h).map(|x| x.residual))
                .collect::<Result<Vec<_>>>();
            rows.push(match r {
                Ok(r) => CheckRow::from_residuals(name, z, r, floor),
                Err(e) => CheckRow::failed(name, z, e),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, BUILTINS};
    use std::collections::BTreeMap;

    fn spec(name: &str) -> SurfaceSpec {
        builtin(name, &BTreeMap::new()).unwrap().surface
    }

    #[test]
    fn enneper_info() {
        let info = surface_info(&spec("enneper"));
        assert_eq!(info.h1, Some(2));
        assert_eq!(info.divisor_degree, Some(-3));
        let b = info.bound_two_sided.unwrap();
        assert_eq!((b.value.to_string().as_str(), b.ceiling), ("1/3", 1));
        assert_eq!(info.framed, Some(true));
        assert_eq!(info.ends[0].order, Some(3));
    }

    #[test]
    fn catenoid_ends_are_regular() {
        let info = surface_info(&spec("catenoid"));
        assert_eq!(info.ends.len(), 2);
        for e in &info.ends {
            assert_eq!(e.order, Some(1));
            assert_eq!(e.g_multiplicity, Some(1));
        }
    }

    #[test]
    fn every_builtin_passes_check() {
        for (name, _) in BUILTINS {
            let rows = check_suite(&spec(name), 3, 1e-8);
            assert!(!rows.is_empty(), "{name}");
            for r in &rows {
                assert!(r.pass, "{name}: {r:?}");
            }
        }
    }
}
