use std::path::Path;
use std::process::{Command, Output};

fn framed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framed"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> serde_json::Value {
    let o = framed(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn info_enneper() {
    let v = json(&["info", "enneper", "--format", "json"]);
    assert_eq!(v["h1"], 2);
    assert_eq!(v["divisor_degree"], -3);
    assert_eq!(v["bound_two_sided"]["value"], "1/3");
    assert_eq!(v["bound_two_sided"]["ceiling"], 1);
}

#[test]
fn info_scherk_and_unframed_cousin() {
    let v = json(&["info", "scherk", "--format", "json"]);
    assert_eq!(v["bound_two_sided"]["value"], "1");
    let v = json(&["info", "cousin", "mu=0.3", "--format", "json"]);
    assert_eq!(v["framed"], false);
}

#[test]
fn text_and_json_agree() {
    let text = stdout(&framed(&["info", "uy72"]));
    let v = json(&["info", "uy72", "--format", "json"]);
    assert!(text.contains(v["divisor"].as_str().unwrap()));
    assert!(text.contains(&format!("h1(D)         {}", v["h1"])));
}

#[test]
fn check_plane_and_catenoid_pass() {
    for s in ["plane", "catenoid"] {
        let o = framed(&["check", s]);
        assert!(o.status.success(), "{s}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn check_csv_has_a_row_per_suite() {
    let o = framed(&["check", "enneper", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("suite,z_re,z_im"));
    assert_eq!(text.lines().count(), 1 + 3 * 6);
}

#[test]
fn correspondence_keeps_the_index_report() {
    let dir = tempfile::tempdir().unwrap();
    let partner = dir.path().join("partner.toml");
    let o = framed(&["correspond", "catenoid", "--to", "bryant", "--out", partner.to_str().unwrap()]);
    assert!(o.status.success());
    let sched = ["--R", "5,10", "--h", "0.4,0.2", "--format", "csv"];
    let a = framed(&[&["index", "catenoid"][..], &sched].concat());
    let b = framed(&[&["index", partner.to_str().unwrap()][..], &sched].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with(
        "R,h,n_vertices,inertia_minus,inertia_zero,bound,bound_ceiling,verdict\n"
    ));
}

fn obj_vertices(p: &Path) -> Vec<[f64; 3]> {
    std::fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("v "))
        .map(|l| {
            let c: Vec<f64> = l[2..].split_whitespace().map(|x| x.parse().unwrap()).collect();
            [c[0], c[1], c[2]]
        })
        .collect()
}

#[test]
fn cousin_ball_image_stays_inside() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cousin.obj");
    let o = framed(&["immerse", "cousin", "--model", "ball", "--grid", "16", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v = obj_vertices(&out);
    assert!(!v.is_empty());
    assert!(v.iter().all(|b| b.iter().map(|c| c * c).sum::<f64>() < 1.0));
}

#[test]
fn catenoid_euclidean_image_is_a_catenoid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cat.obj");
    let o = framed(&["immerse", "catenoid", "--grid", "16", "--R", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v = obj_vertices(&out);
    // The waist circle lies at the height where the radius is smallest; the
    // axis passes through its center, and radius = cosh(height - waist).
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p[2]), b.max(p[2])));
    assert!(hi - lo > 3.0);
    let cx = v.iter().map(|p| p[0]).fold(f64::MIN, f64::max) + v.iter().map(|p| p[0]).fold(f64::MAX, f64::min);
    let cy = v.iter().map(|p| p[1]).fold(f64::MIN, f64::max) + v.iter().map(|p| p[1]).fold(f64::MAX, f64::min);
    let (cx, cy) = (cx / 2.0, cy / 2.0);
    let waist = v
        .iter()
        .min_by(|a, b| {
            let ra = (a[0] - cx).hypot(a[1] - cy);
            let rb = (b[0] - cx).hypot(b[1] - cy);
            ra.partial_cmp(&rb).unwrap()
        })
        .unwrap()[2];
    for p in &v {
        let r = (p[0] - cx).hypot(p[1] - cy);
        assert!((r - (p[2] - waist).cosh()).abs() < 1e-2 * r.max(1.0), "{p:?}");
    }
}

#[test]
fn index_mesh_dump_carries_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.obj");
    let o = framed(&["index", "scherk", "--R", "5,10", "--h", "0.4,0.2", "--mesh", mesh.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&mesh).unwrap();
    let v = text.lines().filter(|l| l.starts_with("v ")).count();
    let k: Vec<f64> = text
        .lines()
        .filter_map(|l| l.strip_prefix("# K "))
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(k.len(), v);
    assert!(k.iter().all(|x| *x <= 0.0));
}

#[test]
fn schwarzian_solve_csv() {
    let o = framed(&["schwarzian", "solve", "--sigma", "z^2", "--n", "2", "--order", "6", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("series,power,re,im\n"));
    assert!(text.contains("\nf,2,1,0\n"));
}

#[test]
fn schwarzian_eval_matches_data() {
    let v = json(&["schwarzian", "eval", "catenoid", "--at", "0.5", "--format", "json"]);
    assert!((v["re"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn uy_framedness() {
    for (ex, mu, want) in [("72", "2", true), ("72", "1.5", false), ("73", "2", true)] {
        let v = json(&["uy", "--example", ex, "--mu", mu, "--m", "3", "--format", "json"]);
        assert_eq!(v["framed"], want, "{ex} {mu}");
        assert_eq!(v["closed_form"], want);
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| framed(args).status.code().unwrap();
    assert_eq!(code(&["info", "no-such-surface"]), 2);
    assert_eq!(code(&["schwarzian", "solve", "--sigma", "1/z", "--n", "1"]), 2);
    assert_eq!(code(&["uy", "--example", "72", "--mu", "1"]), 2);
    // A single truncation level cannot establish convergence.
    assert_eq!(code(&["index", "catenoid", "--R", "5", "--h", "0.4"]), 3);
    assert_eq!(code(&["examples", "--out", "/nonexistent-dir/x.txt"]), 1);
}

#[test]
fn scene_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("enneper.toml");
    std::fs::write(
        &p,
        "name = \"mine\"\npunctures = [\"inf\"]\n[data]\nkind = \"weierstrass\"\ng = \"z\"\neta = \"1\"\n",
    )
    .unwrap();
    let v = json(&["info", p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(v["name"], "mine");
    assert_eq!(v["h1"], 2);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\n[data]\nkind = \"weierstrass\"\ng = \"z +\"\neta = \"1\"\n").unwrap();
    assert_eq!(framed(&["info", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn index_is_deterministic_across_runs() {
    let args = ["--threads", "3", "index", "enneper", "--R", "5,10", "--h", "0.4,0.2", "--format", "json"];
    assert_eq!(stdout(&framed(&args)), stdout(&framed(&args)));
}
