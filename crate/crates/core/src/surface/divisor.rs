use super::{Sidedness, SurfaceData, SurfaceSpec, Topology};
use crate::error::{Error, Result};
use crate::expr::{Expr, Rational};
use crate::moebius::Mat2;
use crate::point::Point;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_rational::Rational64;
use serde::Serialize;
use std::fmt;

const POINT_TOL: f64 = 1e-9;
const ROOT_CLUSTER: f64 = 1e-6;

/// Formal integer combination of points of the sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divisor {
    pub entries: Vec<(Point, i32)>,
}

impl Divisor {
    pub fn new(entries: impl IntoIterator<Item = (Point, i32)>) -> Divisor {
        let mut out: Vec<(Point, i32)> = Vec::new();
        for (p, m) in entries {
            match out.iter_mut().find(|(q, _)| q.approx_eq(&p, POINT_TOL)) {
                Some(e) => e.1 += m,
                None => out.push((p, m)),
            }
        }
        out.retain(|(_, m)| *m != 0);
        Divisor { entries: out }
    }

    pub fn zero() -> Divisor {
        Divisor { entries: vec![] }
    }

    pub fn degree(&self) -> i32 {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn at(&self, p: &Point) -> i32 {
        self.entries
            .iter()
            .find(|(q, _)| q.approx_eq(p, POINT_TOL))
            .map_or(0, |(_, m)| *m)
    }

    /// Pushes the divisor forward by a Moebius map.
    pub fn transformed(&self, m: &Mat2) -> Divisor {
        Divisor::new(self.entries.iter().map(|(p, k)| (m.apply(*p), *k)))
    }

    /// `self >= other` pointwise.
    pub fn dominates(&self, other: &Divisor) -> bool {
        let pts = self.entries.iter().chain(&other.entries).map(|(p, _)| *p);
        pts.collect::<Vec<_>>()
            .iter()
            .all(|p| self.at(p) >= other.at(p))
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, m)) in self.entries.iter().enumerate() {
            let sign = if *m < 0 { "-" } else { "+" };
            if i == 0 {
                write!(f, "{}{}*({p})", if *m < 0 { "-" } else { "" }, m.abs())?;
            } else {
                write!(f, " {sign} {}*({p})", m.abs())?;
            }
        }
        Ok(())
    }
}

/// Order of a 1-form coefficient `eta` (dz) at `p`, in the local chart.
fn form_order(eta: &Expr, p: Point) -> Result<Option<i32>> {
    Ok(eta.order_at(p)?.map(|k| if p.is_infinite() { k - 2 } else { k }))
}

fn laurent_err(e: Error) -> Error {
    match e {
        Error::EssentialOrBranch(m) => Error::IrregularEnd(m),
        other => other,
    }
}

/// Leading exponent of the conformal factor at `p` in the local chart.
pub(crate) fn metric_order(s: &SurfaceSpec, p: Point) -> Result<i32> {
    match &s.data {
        SurfaceData::Intrinsic {
            conformal_factor, ..
        } => {
            let k = conformal_factor
                .order_at(p)
                .map_err(laurent_err)?
                .ok_or_else(|| Error::DegenerateData("vanishing conformal factor".into()))?;
            Ok(if p.is_infinite() { k - 4 } else { k })
        }
        _ => {
            let (g, eta) = s.weierstrass_pair()?;
            let oe = form_order(&eta, p)
                .map_err(laurent_err)?
                .ok_or_else(|| Error::DegenerateData("eta vanishes identically".into()))?;
            let og = g.order_at(p).map_err(laurent_err)?.unwrap_or(0);
            Ok(2 * (oe + 2 * og.min(0)))
        }
    }
}

/// Order `m` of the end at puncture `p`: with conformal factor ~ |t|^{-2k},
/// `m = max(1, k - 1)`.
pub fn end_order(s: &SurfaceSpec, p: Point) -> Result<u32> {
    let lead = metric_order(s, p)?;
    if lead >= 0 {
        return Err(Error::NotAnEnd(format!(
            "conformal factor has order {lead} at {p}"
        )));
    }
    if lead % 2 != 0 {
        return Err(Error::IrregularEnd(format!("odd leading order {lead} at {p}")));
    }
    let k = (-lead / 2) as u32;
    Ok(k.saturating_sub(1).max(1))
}

fn rational_divisor(e: &Expr) -> Option<Divisor> {
    let r: Rational = e.to_rational()?;
    r.divisor(ROOT_CLUSTER).map(Divisor::new)
}

/// Branch points with their orders (excluding punctures).
pub fn branch_divisor(s: &SurfaceSpec) -> Divisor {
    let Ok((g, eta)) = s.weierstrass_pair() else {
        return Divisor::zero();
    };
    let is_puncture = |p: &Point| s.punctures().iter().any(|q| q.approx_eq(p, 1e-7));
    let branch_at = |p: Point, og: Option<i32>, oe: Option<i32>| -> Option<(Point, i32)> {
        let b = oe? + 2 * og.unwrap_or(0).min(0);
        (b > 0).then_some((p, b))
    };
    let mut out = Vec::new();
    let dg_rat = if g.depends_on_z() {
        rational_divisor(&g)
    } else {
        Some(Divisor::zero())
    };
    match (dg_rat, rational_divisor(&eta)) {
        (Some(dg), Some(de)) => {
            let mut cands: Vec<Point> = de.entries.iter().map(|(p, _)| *p).collect();
            cands.extend(dg.entries.iter().filter(|(_, m)| *m < 0).map(|(p, _)| *p));
            cands.push(Point::Infinity);
            let mut seen: Vec<Point> = Vec::new();
            for p in cands {
                if is_puncture(&p) || seen.iter().any(|q| q.approx_eq(&p, ROOT_CLUSTER)) {
                    continue;
                }
                seen.push(p);
                let og = if g.depends_on_z() { Some(dg.at(&p)) } else { None };
                let oe = de.at(&p) - if p.is_infinite() { 2 } else { 0 };
                out.extend(branch_at(p, og, Some(oe)));
            }
        }
        _ => {
            for p in [Point::finite(0.0, 0.0), Point::Infinity] {
                if is_puncture(&p) {
                    continue;
                }
                let og = g.order_at(p).ok().flatten();
                let oe = form_order(&eta, p).ok().flatten();
                out.extend(branch_at(p, og, oe));
            }
        }
    }
    Divisor::new(out)
}

/// `D = sum(-m_end P_end) + sum(m_branch P_branch)`.
pub fn fundamental_divisor(s: &SurfaceSpec) -> Result<Divisor> {
    if let Topology::Torus { .. } = s.topology {
        return Ok(Divisor::zero());
    }
    let mut entries = Vec::new();
    for p in s.punctures() {
        entries.push((*p, -(end_order(s, *p)? as i32)));
    }
    entries.extend(branch_divisor(s).entries);
    Ok(Divisor::new(entries))
}

/// Dimension of meromorphic 1-forms `w` on the sphere with `div(w) >= D`, by
/// linear algebra on `p(z) dz / prod (z - P)^{-n_P}`.
pub fn h1_exact_genus0(d: &Divisor) -> usize {
    let n_inf = d.at(&Point::Infinity);
    let finite: Vec<(C64, i32)> = d
        .entries
        .iter()
        .filter_map(|(p, m)| p.as_finite().map(|z| (z, *m)))
        .collect();
    let den_deg: i32 = finite.iter().filter(|(_, m)| *m < 0).map(|(_, m)| -m).sum();
    // ord_inf(p dz / q) = deg q - deg p - 2 >= n_inf.
    let monomials = den_deg - 1 - n_inf;
    if monomials <= 0 {
        return 0;
    }
    let nm = monomials as usize;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (z0, m) in finite.iter().filter(|(_, m)| *m > 0) {
        for j in 0..*m as usize {
            // j-th derivative of z^k at z0.
            rows.push(
                (0..nm)
                    .map(|k| {
                        if k < j {
                            C64::new(0.0, 0.0)
                        } else {
                            let fall: f64 = (0..j).map(|i| (k - i) as f64).product();
                            z0.powi((k - j) as i32) * fall
                        }
                    })
                    .collect(),
            );
        }
    }
    if rows.is_empty() {
        return nm;
    }
    let a = DMatrix::from_fn(rows.len(), nm, |i, k| rows[i][k]);
    let sv = a.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-9 * smax.max(1e-300)).count();
    nm.saturating_sub(rank)
}

/// `h^1(D)` for genus 0 (exact) or a flat torus (no special divisors).
pub fn h1(genus: u32, d: &Divisor) -> Result<usize> {
    match genus {
        0 => Ok(h1_exact_genus0(d)),
        1 => {
            if d.is_empty() {
                Ok(1)
            } else if d.entries.iter().all(|(_, m)| *m <= 0) {
                Ok((-d.degree()) as usize)
            } else if d.entries.iter().all(|(_, m)| *m >= 0) {
                Ok(0)
            } else {
                Err(Error::Unsupported(
                    "mixed-sign divisors on a torus".into(),
                ))
            }
        }
        _ => Err(Error::Unsupported(format!("genus {genus}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub h1: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub value: Rational64,
    pub ceiling: i64,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Lower bound for the Morse index: `(2 h1 - 3)/3` for two-sided surfaces,
/// `(h1 - 3)/3` for one-sided ones.
pub fn index_bound(genus: u32, d: &Divisor, sided: Sidedness) -> Result<Bound> {
    let h = h1(genus, d)? as i64;
    let num = match sided {
        Sidedness::TwoSided => 2 * h - 3,
        Sidedness::OneSided => h - 3,
    };
    let value = Rational64::new(num, 3);
    Ok(Bound {
        h1: h as usize,
        value,
        ceiling: value.ceil().to_integer(),
    })
}

/// Whether the 1-form `varsigma dz` lies in the weighted space, decided by
/// `div(varsigma dz) >= D`.
pub fn l2star_membership(varsigma: &Expr, s: &SurfaceSpec) -> Result<bool> {
    let d = fundamental_divisor(s)?;
    if s.genus() == 1 {
        return Ok(!varsigma.depends_on_z() && d.entries.iter().all(|(_, m)| *m <= 0));
    }
    let Some(r) = varsigma.to_rational() else {
        return Err(Error::Unsupported("non-rational 1-form".into()));
    };
    let Some(mut fdiv) = r.divisor(ROOT_CLUSTER) else {
        return Ok(true);
    };
    // Function order at infinity -> form order.
    match fdiv.iter_mut().find(|(p, _)| p.is_infinite()) {
        Some(e) => e.1 -= 2,
        None => fdiv.push((Point::Infinity, -2)),
    }
    Ok(Divisor::new(fdiv).dominates(&d))
}
