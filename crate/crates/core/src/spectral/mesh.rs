use crate::error::{Error, Result};
use crate::moebius::Mat2;
use crate::point::Point;
use crate::surface::{branch_divisor, end_order, ChartPos, SurfaceSpec, Topology};
use num_complex::Complex64 as C64;
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Upper bound on the glue radius of a collar.
pub const MAX_GLUE_RADIUS: f64 = 0.5;

/// A coordinate patch of the mesh. Triangles store their corners in the
/// local coordinate `xi` of their piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    /// `z = chart(xi)`.
    Core { chart: Mat2 },
    /// `xi = log t` with `t = z - p` (or `1/z` at infinity); rings are at
    /// `Re xi = log r_glue - k * step` and `Im xi` is periodic.
    Collar {
        puncture: Point,
        order: u32,
        r_glue: f64,
        r_trunc: f64,
        n_theta: usize,
        rings: usize,
    },
    /// `z = xi` on a fundamental parallelogram.
    Torus,
}

impl Piece {
    /// Position of the local coordinate `xi` and `d(chart)/d(xi)`.
    pub fn chart(&self, xi: [f64; 2]) -> (ChartPos, C64) {
        let x = C64::new(xi[0], xi[1]);
        match self {
            Piece::Core { chart } => ChartPos::through_moebius(chart, x),
            Piece::Collar { puncture, .. } => {
                let t = x.exp();
                match puncture {
                    Point::Infinity => (ChartPos::W(t), t),
                    Point::Finite(p) => {
                        let z = p + t;
                        if z.norm() > 4.0 {
                            (ChartPos::W(1.0 / z), -t / (z * z))
                        } else {
                            (ChartPos::Z(z), t)
                        }
                    }
                }
            }
            Piece::Torus => (ChartPos::Z(x), C64::new(1.0, 0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexTag {
    Core,
    Collar { piece: usize, ring: usize },
    Torus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshTriangle {
    pub v: [usize; 3],
    pub piece: usize,
    /// Counter-clockwise corners in the piece's coordinate.
    pub xi: [[f64; 2]; 3],
}

#[derive(Debug, Clone)]
pub struct ConformalMesh {
    pub r: f64,
    pub h: f64,
    pub pieces: Vec<Piece>,
    /// Point of the Riemann sphere (or of the torus fundamental domain).
    pub positions: Vec<Point>,
    pub tags: Vec<VertexTag>,
    pub dirichlet: Vec<bool>,
    pub triangles: Vec<MeshTriangle>,
}

fn area2(p: &[[f64; 2]; 3]) -> f64 {
    (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])
}

/// Smallest interior angle (degrees).
pub fn min_angle_deg(p: &[[f64; 2]; 3]) -> f64 {
    let mut m = f64::INFINITY;
    for k in 0..3 {
        let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cosv = (u[0] * v[0] + u[1] * v[1])
            / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt());
        m = m.min(cosv.clamp(-1.0, 1.0).acos().to_degrees());
    }
    m
}

impl ConformalMesh {
    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| min_angle_deg(&t.xi))
            .fold(f64::INFINITY, f64::min)
    }

    fn push_vertex(&mut self, p: Point, tag: VertexTag, dirichlet: bool) -> usize {
        self.positions.push(p);
        self.tags.push(tag);
        self.dirichlet.push(dirichlet);
        self.positions.len() - 1
    }

    fn push_triangle(&mut self, mut v: [usize; 3], piece: usize, mut xi: [[f64; 2]; 3]) {
        if area2(&xi) < 0.0 {
            v.swap(1, 2);
            xi.swap(1, 2);
        }
        self.triangles.push(MeshTriangle { v, piece, xi });
    }

    /// Elimination order for free vertices: core (reverse Cuthill-McKee is
    /// applied by the caller) followed by collars ring by ring.
    pub fn collar_rank(&self, v: usize) -> (usize, usize, usize) {
        match self.tags[v] {
            VertexTag::Core | VertexTag::Torus => (0, 0, 0),
            VertexTag::Collar { piece, ring } => (1, piece, ring),
        }
    }

    /// Vertices on the unit sphere (stereographic lift) and faces, as OBJ text.
    pub fn to_obj(&self) -> String {
        let lift = |p: &Point| -> [f64; 3] {
            match p {
                Point::Infinity => [0.0, 0.0, 1.0],
                Point::Finite(z) => {
                    let n = z.norm_sqr();
                    [2.0 * z.re / (1.0 + n), 2.0 * z.im / (1.0 + n), (n - 1.0) / (n + 1.0)]
                }
            }
        };
        let verts: Vec<[f64; 3]> = self.positions.iter().map(lift).collect();
        let faces: Vec<[usize; 3]> = self.triangles.iter().map(|t| t.v).collect();
        crate::export::obj(&verts, &faces)
    }

    /// [`to_obj`](Self::to_obj) with a `# K <value>` comment after every
    /// vertex carrying the Gauss curvature there.
    pub fn to_obj_with_curvature(&self, s: &SurfaceSpec) -> Result<String> {
        let ev = s.evaluator()?;
        let mut k = vec![f64::NAN; self.positions.len()];
        for t in &self.triangles {
            for (v, xi) in t.v.iter().zip(&t.xi) {
                if k[*v].is_nan() {
                    let (pos, scale) = self.pieces[t.piece].chart(*xi);
                    k[*v] = ev.local(pos, scale)?.curvature;
                }
            }
        }
        let plain = self.to_obj();
        let mut out = String::with_capacity(plain.len() * 2);
        let mut vi = 0;
        for line in plain.lines() {
            out.push_str(line);
            out.push('\n');
            if line.starts_with("v ") {
                out.push_str(&format!("# K {}\n", k[vi]));
                vi += 1;
            }
        }
        Ok(out)
    }
}

/// Truncation radius of an end of order `m` at exhaustion parameter `r`.
pub fn truncation_radius(m: u32, r: f64) -> f64 {
    if m <= 1 {
        (-r).exp()
    } else {
        r.powf(1.0 / (1.0 - m as f64))
    }
}

struct Hole {
    /// Ring points in `z` (finite) order.
    ring: Vec<Point>,
    ids: Vec<usize>,
}

fn local_t(p: Point, z: C64) -> C64 {
    match p {
        Point::Infinity => 1.0 / z,
        Point::Finite(c) => z - c,
    }
}

/// Truncated, conformally parametrized mesh of the surface at exhaustion
/// parameter `r` and target edge length `h`.
pub fn build_mesh(s: &SurfaceSpec, r: f64, h: f64) -> Result<ConformalMesh> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::MeshQuality(format!("edge length {h} outside (0, 1]")));
    }
    if !(r > 0.0) {
        return Err(Error::MeshQuality(format!("exhaustion parameter {r} must be positive")));
    }
    let mut mesh = ConformalMesh {
        r,
        h,
        pieces: vec![],
        positions: vec![],
        tags: vec![],
        dirichlet: vec![],
        triangles: vec![],
    };
    if let Topology::Torus { omega1, omega2 } = s.topology {
        torus(&mut mesh, omega1, omega2, h);
        return Ok(mesh);
    }
    let punct = s.punctures().to_vec();
    if punct.is_empty() {
        return Err(Error::Unsupported("compact sphere has no ends to truncate".into()));
    }
    let branch: Vec<Point> = branch_divisor(s).entries.iter().map(|(p, _)| *p).collect();
    if branch.iter().any(|p| p.is_infinite()) {
        return Err(Error::Unsupported("branch point at infinity".into()));
    }
    let branch: Vec<C64> = branch.iter().filter_map(|p| p.as_finite()).collect();
    let finite: Vec<C64> = punct.iter().filter_map(|p| p.as_finite()).collect();

    // Disk radii: collars around punctures, small excised disks around branch points.
    let sep = |c: C64, own: usize| -> f64 {
        finite
            .iter()
            .chain(&branch)
            .enumerate()
            .filter(|(k, _)| *k != own)
            .map(|(_, q)| (q - c).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let mut radius = Vec::new();
    let mut fi = 0;
    for p in &punct {
        if let Point::Finite(c) = p {
            radius.push(MAX_GLUE_RADIUS.min(0.4 * sep(*c, fi)));
            fi += 1;
        } else {
            radius.push(0.0);
        }
    }
    let branch_rad: Vec<f64> = branch
        .iter()
        .enumerate()
        .map(|(k, b)| (0.5 * h).min(0.4 * sep(*b, finite.len() + k)))
        .collect();
    let reach = punct
        .iter()
        .zip(&radius)
        .filter_map(|(p, r)| p.as_finite().map(|c| c.norm() + r))
        .chain(branch.iter().zip(&branch_rad).map(|(b, r)| b.norm() + r))
        .fold(0.0, f64::max);
    for (p, rad) in punct.iter().zip(radius.iter_mut()) {
        if p.is_infinite() {
            *rad = MAX_GLUE_RADIUS.min(0.5 / reach.max(1e-300));
        }
    }

    let n_theta = ((2.0 * PI / h).ceil() as usize).max(8);
    let step = 2.0 * PI / n_theta as f64;

    // Glue rings (ring 0 of every collar), owned by the core.
    let mut holes = Vec::new();
    for (p, rad) in punct.iter().zip(&radius) {
        let mut ring = Vec::new();
        let mut ids = Vec::new();
        for j in 0..n_theta {
            let t = C64::from_polar(*rad, j as f64 * step);
            let z = match p {
                Point::Infinity => Point::Finite(1.0 / t),
                Point::Finite(c) => Point::Finite(c + t),
            };
            ids.push(mesh.push_vertex(z, VertexTag::Core, false));
            ring.push(z);
        }
        holes.push(Hole { ring, ids });
    }
    for (b, rad) in branch.iter().zip(&branch_rad) {
        let n = 8;
        let mut ring = Vec::new();
        let mut ids = Vec::new();
        for j in 0..n {
            let z = Point::Finite(b + C64::from_polar(*rad, 2.0 * PI * j as f64 / n as f64));
            ids.push(mesh.push_vertex(z, VertexTag::Core, true));
            ring.push(z);
        }
        holes.push(Hole { ring, ids });
    }

    // Collars.
    for (k, (p, rad)) in punct.iter().zip(&radius).enumerate() {
        let m = end_order(s, *p)?;
        let target = truncation_radius(m, r);
        let span = (rad / target).ln() / step;
        if span < -0.5 {
            return Err(Error::DisjointnessViolation(format!(
                "truncation radius {target:.3e} at {p} exceeds the glue radius {rad:.3}"
            )));
        }
        if let Point::Finite(c) = p {
            if target < 1e-12 * c.norm() {
                return Err(Error::MeshQuality(format!(
                    "truncation radius {target:.3e} at {p} is below the chart's floating-point resolution"
                )));
            }
        }
        let rings = span.round().max(0.0) as usize;
        let piece = mesh.pieces.len();
        mesh.pieces.push(Piece::Collar {
            puncture: *p,
            order: m,
            r_glue: *rad,
            r_trunc: rad * (-(rings as f64) * step).exp(),
            n_theta,
            rings,
        });
        let u0 = rad.ln();
        let mut prev = holes[k].ids.clone();
        if rings == 0 {
            for &v in &prev {
                mesh.dirichlet[v] = true;
            }
        }
        for i in 1..=rings {
            let u = u0 - i as f64 * step;
            let cur: Vec<usize> = (0..n_theta)
                .map(|j| {
                    let t = C64::new(u, j as f64 * step).exp();
                    let z = match p {
                        Point::Infinity => Point::Finite(1.0 / t),
                        Point::Finite(c) => Point::Finite(c + t),
                    };
                    mesh.push_vertex(z, VertexTag::Collar { piece, ring: i }, i == rings)
                })
                .collect();
            let (ua, ub) = (u + step, u);
            for j in 0..n_theta {
                let j1 = (j + 1) % n_theta;
                let (ta, tb) = (j as f64 * step, (j + 1) as f64 * step);
                let (a0, a1, b0, b1) = (prev[j], prev[j1], cur[j], cur[j1]);
                if (i + j) % 2 == 0 {
                    mesh.push_triangle([a0, b0, b1], piece, [[ua, ta], [ub, ta], [ub, tb]]);
                    mesh.push_triangle([a0, b1, a1], piece, [[ua, ta], [ub, tb], [ua, tb]]);
                } else {
                    mesh.push_triangle([a0, b0, a1], piece, [[ua, ta], [ub, ta], [ua, tb]]);
                    mesh.push_triangle([a1, b0, b1], piece, [[ua, tb], [ub, ta], [ub, tb]]);
                }
            }
            prev = cur;
        }
    }

    core(&mut mesh, &punct, &radius, &branch, &branch_rad, &holes, h, step)?;
    Ok(mesh)
}

#[allow(clippy::too_many_arguments)]
fn core(
    mesh: &mut ConformalMesh,
    punct: &[Point],
    radius: &[f64],
    branch: &[C64],
    branch_rad: &[f64],
    holes: &[Hole],
    h: f64,
    step: f64,
) -> Result<()> {
    let to_core = Mat2::rotation_to_infinity(punct[0]);
    let chart = to_core.inverse()?;
    let piece = mesh.pieces.len();
    mesh.pieces.push(Piece::Core { chart });
    let zeta = |p: Point| -> Result<[f64; 2]> {
        match to_core.apply(p) {
            Point::Finite(w) => Ok([w.re, w.im]),
            Point::Infinity => Err(Error::MeshQuality("core point mapped to infinity".into())),
        }
    };

    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut global: HashMap<usize, usize> = HashMap::new();
    let ins = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, x: [f64; 2]| {
        cdt.insert(Point2::new(x[0], x[1]))
            .map_err(|e| Error::MeshQuality(format!("triangulation insert: {e:?}")))
    };
    for hole in holes {
        let mut hs = Vec::new();
        for (p, id) in hole.ring.iter().zip(&hole.ids) {
            let vh = ins(&mut cdt, zeta(*p)?)?;
            if global.insert(vh.index(), *id).is_some() {
                return Err(Error::MeshQuality("coincident ring vertices".into()));
            }
            hs.push(vh);
        }
        for j in 0..hs.len() {
            let (a, b) = (hs[j], hs[(j + 1) % hs.len()]);
            if !cdt.can_add_constraint(a, b) {
                return Err(Error::DisjointnessViolation("glue rings intersect".into()));
            }
            cdt.add_constraint(a, b);
        }
    }

    // Spherical Fibonacci seeds, kept clear of every disk and its ring.
    let n_seed = (4.0 * PI / (0.866 * h * h)).ceil() as usize;
    let golden = PI * (3.0 - 5f64.sqrt());
    let margin = (0.5 * step).exp();
    for k in 0..n_seed {
        let y3 = 1.0 - 2.0 * (k as f64 + 0.5) / n_seed as f64;
        let rr = (1.0 - y3 * y3).sqrt();
        let ph = k as f64 * golden;
        let z = C64::new(rr * ph.cos(), rr * ph.sin()) / (1.0 - y3);
        let clear = punct
            .iter()
            .zip(radius)
            .all(|(p, rad)| local_t(*p, z).norm() > rad * margin)
            && branch
                .iter()
                .zip(branch_rad)
                .all(|(b, rad)| (z - b).norm() > rad * (1.0 + 0.5 * PI / 4.0));
        if clear {
            ins(&mut cdt, zeta(Point::Finite(z))?)?;
        }
    }
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(20.0))
        .keep_constraint_edges()
        .exclude_outer_faces(true)
        .with_max_additional_vertices(4 * n_seed + 1000);
    let res = cdt.refine(params);

    for v in cdt.vertices() {
        let idx = v.fix().index();
        if global.contains_key(&idx) {
            continue;
        }
        let p = v.position();
        let z = chart.apply(Point::Finite(C64::new(p.x, p.y)));
        let id = mesh.push_vertex(z, VertexTag::Core, false);
        global.insert(idx, id);
    }
    let inside = |w: C64| -> bool {
        let z = chart.apply(Point::Finite(w));
        let Point::Finite(z) = z else { return false };
        punct
            .iter()
            .zip(radius)
            .all(|(p, rad)| local_t(*p, z).norm() > *rad)
            && branch.iter().zip(branch_rad).all(|(b, rad)| (z - b).norm() > *rad)
    };
    for f in cdt.inner_faces() {
        if res.excluded_faces.contains(&f.fix()) {
            continue;
        }
        let vs = f.vertices();
        let xi = vs.map(|v| [v.position().x, v.position().y]);
        let c = C64::new(
            (xi[0][0] + xi[1][0] + xi[2][0]) / 3.0,
            (xi[0][1] + xi[1][1] + xi[2][1]) / 3.0,
        );
        if !inside(c) {
            continue;
        }
        let ids = vs.map(|v| global[&v.fix().index()]);
        mesh.push_triangle(ids, piece, xi);
    }
    let worst = mesh
        .triangles
        .iter()
        .filter(|t| t.piece == piece)
        .map(|t| min_angle_deg(&t.xi))
        .fold(f64::INFINITY, f64::min);
    if worst < 5.0 {
        return Err(Error::MeshQuality(format!("core minimum angle {worst:.2} degrees")));
    }
    Ok(())
}

fn torus(mesh: &mut ConformalMesh, omega1: C64, omega2: C64, h: f64) {
    let n1 = ((omega1.norm() / h).ceil() as usize).max(4);
    let n2 = ((omega2.norm() / h).ceil() as usize).max(4);
    mesh.pieces.push(Piece::Torus);
    let at = |i: usize, j: usize| -> C64 {
        omega1 * (i as f64 / n1 as f64) + omega2 * (j as f64 / n2 as f64)
    };
    for i in 0..n1 {
        for j in 0..n2 {
            mesh.push_vertex(Point::Finite(at(i, j)), VertexTag::Torus, false);
        }
    }
    let id = |i: usize, j: usize| (i % n1) * n2 + (j % n2);
    let xy = |z: C64| [z.re, z.im];
    for i in 0..n1 {
        for j in 0..n2 {
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let v = c.map(|(a, b)| id(a, b));
            let x = c.map(|(a, b)| xy(at(a, b)));
            if (i + j) % 2 == 0 {
                mesh.push_triangle([v[0], v[1], v[2]], 0, [x[0], x[1], x[2]]);
                mesh.push_triangle([v[0], v[2], v[3]], 0, [x[0], x[2], x[3]]);
            } else {
                mesh.push_triangle([v[0], v[1], v[3]], 0, [x[0], x[1], x[3]]);
                mesh.push_triangle([v[1], v[2], v[3]], 0, [x[1], x[2], x[3]]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use std::collections::BTreeMap;

    fn mesh(name: &str, r: f64, h: f64) -> ConformalMesh {
        build_mesh(&builtin(name, &BTreeMap::new()).unwrap().surface, r, h).unwrap()
    }

    /// Vertices - edges + faces.
    fn euler(m: &ConformalMesh) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for t in &m.triangles {
            for k in 0..3 {
                let (a, b) = (t.v[k], t.v[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        m.n_vertices() as i64 - edges.len() as i64 + m.triangles.len() as i64
    }

    #[test]
    fn topology_of_truncations() {
        // Sphere minus k disks has Euler characteristic 2 - k.
        assert_eq!(euler(&mesh("plane", 5.0, 0.3)), 1);
        assert_eq!(euler(&mesh("catenoid", 5.0, 0.3)), 0);
        assert_eq!(euler(&mesh("scherk", 5.0, 0.3)), -2);
        assert_eq!(euler(&mesh("torus", 5.0, 0.3)), 0);
    }

    #[test]
    fn every_vertex_is_used_and_angles_are_sane() {
        for name in ["catenoid", "enneper", "scherk"] {
            let m = mesh(name, 5.0, 0.25);
            let mut used = vec![false; m.n_vertices()];
            for t in &m.triangles {
                for v in t.v {
                    used[v] = true;
                }
                assert!(area2(&t.xi) > 0.0);
            }
            assert!(used.iter().all(|u| *u), "{name}");
            assert!(m.min_angle_deg() > 10.0, "{name}: {}", m.min_angle_deg());
        }
    }

    #[test]
    fn collars_nest_in_r() {
        let a = mesh("catenoid", 5.0, 0.3);
        let b = mesh("catenoid", 10.0, 0.3);
        assert!(b.n_vertices() > a.n_vertices());
        let rings = |m: &ConformalMesh| -> Vec<usize> {
            m.pieces
                .iter()
                .filter_map(|p| match p {
                    Piece::Collar { rings, .. } => Some(*rings),
                    _ => None,
                })
                .collect()
        };
        assert!(rings(&a).iter().zip(rings(&b)).all(|(x, y)| *x < y));
        let core = |m: &ConformalMesh| m.tags.iter().filter(|t| **t == VertexTag::Core).count();
        assert_eq!(core(&a), core(&b));
    }

    #[test]
    fn enneper_truncation_radius() {
        let m = mesh("enneper", 20.0, 0.2);
        match &m.pieces[0] {
            Piece::Collar { order, r_trunc, .. } => {
                assert_eq!(*order, 3);
                assert!((r_trunc / 20f64.powf(-0.5)).ln().abs() < 0.2);
            }
            p => panic!("{p:?}"),
        }
    }

    #[test]
    fn unresolvable_truncation_is_rejected() {
        let s = builtin("scherk", &BTreeMap::new()).unwrap().surface;
        assert!(matches!(build_mesh(&s, 40.0, 0.4), Err(Error::MeshQuality(_))));
    }
}
