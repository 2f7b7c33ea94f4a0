//! Scene files: one surface per file, TOML (primary) or JSON.
//!
//! ```toml
//! name = "catenoid"
//! punctures = ["0", "inf"]
//!
//! [data]
//! kind = "weierstrass"
//! g = "z"
//! eta = "z^-2"
//!
//! [analysis]
//! R = [5.0, 10.0, 20.0]
//! h = [0.4, 0.2, 0.1]
//! ```

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::point::Point;
use crate::surface::{BryantF, Development, Sidedness, SurfaceData, SurfaceSpec, Topology};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisDefaults {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(rename = "R", default = "default_r")]
    pub r: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_tol() -> f64 {
    1e-9
}
fn default_r() -> Vec<f64> {
    vec![5.0, 10.0, 20.0]
}
fn default_h() -> Vec<f64> {
    vec![0.4, 0.2, 0.1]
}
fn default_order() -> usize {
    20
}

impl Default for AnalysisDefaults {
    fn default() -> Self {
        AnalysisDefaults {
            tol: default_tol(),
            r: default_r(),
            h: default_h(),
            order: default_order(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub surface: SurfaceSpec,
    pub parameters: BTreeMap<String, f64>,
    pub analysis: AnalysisDefaults,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DataFile {
    Weierstrass {
        g: String,
        eta: String,
    },
    Bryant {
        g: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<String>,
    },
    Intrinsic {
        conformal_factor: String,
        sigma: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    punctures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lattice: Option<[String; 2]>,
    #[serde(default = "two_sided")]
    sidedness: Sidedness,
    #[serde(default)]
    phase: f64,
    data: DataFile,
    #[serde(default)]
    parameters: BTreeMap<String, f64>,
    #[serde(default)]
    analysis: AnalysisDefaults,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn two_sided() -> Sidedness {
    Sidedness::TwoSided
}

fn field_err(field: &str, e: Error) -> Error {
    Error::Scene(format!("{field}: {e}"))
}

fn expr_field(field: &str, src: &str, params: &BTreeMap<String, f64>) -> Result<Expr> {
    Ok(parse(src).map_err(|e| field_err(field, e))?.bind(params))
}

fn const_field(field: &str, src: &str, params: &BTreeMap<String, f64>) -> Result<C64> {
    expr_field(field, src, params)?
        .const_value()
        .map_err(|e| field_err(field, e))
}

/// Parses `"inf"`/`"infinity"` or a constant expression such as `"1 + 2*i"`.
pub fn parse_point(src: &str) -> Result<Point> {
    point_field("point", src, &BTreeMap::new())
}

fn point_field(field: &str, src: &str, params: &BTreeMap<String, f64>) -> Result<Point> {
    let t = src.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(Point::Infinity);
    }
    Ok(Point::Finite(const_field(field, t, params)?))
}

fn c64_string(c: C64) -> String {
    Expr::constant(c).to_string()
}

impl SceneFile {
    fn into_scene(self) -> Result<Scene> {
        let p = &self.parameters;
        let data = match &self.data {
            DataFile::Weierstrass { g, eta } => SurfaceData::Weierstrass {
                g: expr_field("data.g", g, p)?,
                eta: expr_field("data.eta", eta, p)?,
            },
            DataFile::Bryant { g, f, sigma, base } => {
                let f = match (f, sigma) {
                    (Some(f), None) => BryantF::Expr(expr_field("data.f", f, p)?),
                    (None, Some(s)) => BryantF::Developed(Development {
                        sigma: expr_field("data.sigma", s, p)?,
                        base: match base {
                            Some(b) => const_field("data.base", b, p)?,
                            None => C64::new(0.5, 0.25),
                        },
                    }),
                    _ => {
                        return Err(Error::Scene(
                            "data: bryant data need exactly one of `f` or `sigma`".into(),
                        ))
                    }
                };
                SurfaceData::Bryant {
                    f,
                    g: expr_field("data.g", g, p)?,
                }
            }
            DataFile::Intrinsic {
                conformal_factor,
                sigma,
            } => SurfaceData::Intrinsic {
                conformal_factor: expr_field("data.conformal_factor", conformal_factor, p)?,
                sigma: expr_field("data.sigma", sigma, p)?,
            },
        };
        let topology = match &self.lattice {
            Some([a, b]) => {
                if !self.punctures.is_empty() {
                    return Err(Error::Scene("punctures: not supported on a torus".into()));
                }
                Topology::Torus {
                    omega1: const_field("lattice[0]", a, p)?,
                    omega2: const_field("lattice[1]", b, p)?,
                }
            }
            None => Topology::Sphere {
                punctures: self
                    .punctures
                    .iter()
                    .enumerate()
                    .map(|(i, s)| point_field(&format!("punctures[{i}]"), s, p))
                    .collect::<Result<_>>()?,
            },
        };
        let surface = SurfaceSpec {
            name: self.name,
            topology,
            data,
            phase: self.phase,
            sidedness: self.sidedness,
        };
        if self.analysis.r.is_empty() || self.analysis.h.is_empty() {
            return Err(Error::Scene("analysis: empty R or h schedule".into()));
        }
        let scene = Scene {
            surface,
            parameters: self.parameters,
            analysis: self.analysis,
            note: self.note,
        };
        scene.validate()?;
        Ok(scene)
    }

    fn from_scene(s: &Scene) -> SceneFile {
        let sp = &s.surface;
        let data = match &sp.data {
            SurfaceData::Weierstrass { g, eta } => DataFile::Weierstrass {
                g: g.to_string(),
                eta: eta.to_string(),
            },
            SurfaceData::Bryant { f, g } => match f {
                BryantF::Expr(f) => DataFile::Bryant {
                    g: g.to_string(),
                    f: Some(f.to_string()),
                    sigma: None,
                    base: None,
                },
                BryantF::Developed(d) => DataFile::Bryant {
                    g: g.to_string(),
                    f: None,
                    sigma: Some(d.sigma.to_string()),
                    base: Some(c64_string(d.base)),
                },
            },
            SurfaceData::Intrinsic {
                conformal_factor,
                sigma,
            } => DataFile::Intrinsic {
                conformal_factor: conformal_factor.to_string(),
                sigma: sigma.to_string(),
            },
        };
        let (punctures, lattice) = match &sp.topology {
            Topology::Sphere { punctures } => (
                punctures
                    .iter()
                    .map(|p| match p {
                        Point::Infinity => "inf".to_string(),
                        Point::Finite(z) => c64_string(*z),
                    })
                    .collect(),
                None,
            ),
            Topology::Torus { omega1, omega2 } => {
                (vec![], Some([c64_string(*omega1), c64_string(*omega2)]))
            }
        };
        SceneFile {
            name: sp.name.clone(),
            punctures,
            lattice,
            sidedness: sp.sidedness,
            phase: sp.phase,
            data,
            parameters: s.parameters.clone(),
            analysis: s.analysis.clone(),
            note: s.note.clone(),
        }
    }
}

impl Scene {
    pub fn new(surface: SurfaceSpec) -> Scene {
        Scene {
            surface,
            parameters: BTreeMap::new(),
            analysis: AnalysisDefaults::default(),
            note: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.analysis.tol > 0.0) {
            return Err(Error::Scene("analysis.tol: must be positive".into()));
        }
        if self.analysis.r.iter().chain(&self.analysis.h).any(|x| !(*x > 0.0)) {
            return Err(Error::Scene("analysis: R and h must be positive".into()));
        }
        self.surface.validate()
    }

    pub fn from_toml(src: &str) -> Result<Scene> {
        let f: SceneFile = toml::from_str(src).map_err(|e| Error::Scene(e.to_string()))?;
        f.into_scene()
    }

    pub fn from_json(src: &str) -> Result<Scene> {
        let f: SceneFile = serde_json::from_str(src).map_err(|e| {
            Error::Scene(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        f.into_scene()
    }

    /// Loads by extension: `.json` is JSON, anything else TOML.
    pub fn load(path: &Path) -> Result<Scene> {
        let src = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Scene::from_json(&src)
        } else {
            Scene::from_toml(&src)
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&SceneFile::from_scene(self)).map_err(|e| Error::Scene(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&SceneFile::from_scene(self))
            .map_err(|e| Error::Scene(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAT: &str = r#"
name = "catenoid"
punctures = ["0", "inf"]

[data]
kind = "weierstrass"
g = "z"
eta = "z^-2"
"#;

    #[test]
    fn loads_toml() {
        let s = Scene::from_toml(CAT).unwrap();
        assert_eq!(s.surface.punctures().len(), 2);
        assert!(s.surface.punctures()[1].is_infinite());
        assert_eq!(s.analysis, AnalysisDefaults::default());
    }

    #[test]
    fn toml_and_json_roundtrip() {
        let s = Scene::from_toml(CAT).unwrap();
        let t = Scene::from_toml(&s.to_toml().unwrap()).unwrap();
        assert_eq!(t.surface, s.surface);
        let j = Scene::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(j.surface, s.surface);
    }

    #[test]
    fn parameters_are_bound() {
        let src = r#"
name = "cousin"
punctures = ["0", "inf"]
[parameters]
mu = 1.0
[data]
kind = "bryant"
f = "z"
g = "z^{-(2*mu + 1)}[0]"
"#;
        let s = Scene::from_toml(src).unwrap();
        let g = s.surface.gauss_map().unwrap();
        let v = g.eval(C64::new(2.0, 0.0)).unwrap();
        assert!((v - C64::new(0.125, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = CAT.replace("z^-2", "z^^2");
        let e = Scene::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("data.eta"), "{e}");
        let unbound = CAT.replace("z^-2", "a*z^-2");
        assert_eq!(
            Scene::from_toml(&unbound).unwrap_err(),
            Error::UnboundParameter("a".into())
        );
        let e = Scene::from_toml("name = 3").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let dup = CAT.replace("\"inf\"", "\"0\"");
        assert!(Scene::from_toml(&dup).is_err());
    }
}
