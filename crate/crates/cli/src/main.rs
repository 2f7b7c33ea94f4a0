use clap::{Args, Parser, Subcommand, ValueEnum};
use framed_core::catalog::{
    builtin, uy_closed_form, umehara_yamada_framedness, UyExample, BUILTINS, SPECTRAL_EXAMPLES,
};
use framed_core::expr::parse;
use framed_core::report::{check_suite, surface_info, CheckRow, SurfaceInfo, CHECK_STEPS};
use framed_core::repr::{immerse_mesh, lawson_bryant_to_min, lawson_min_to_bryant, Model};
use framed_core::scene::parse_point;
use framed_core::schwarzian::solve_schwarzian_series;
use framed_core::spectral::{build_mesh, estimate_index, IndexReport};
use framed_core::{Error, Point, Scene};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "framed", version, about = "Framed minimal and Bryant surfaces")]
struct Cli {
    /// Tolerance for identity checks and path integration.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exhaustion schedule, comma separated.
    #[arg(long = "R", global = true, value_delimiter = ',')]
    r: Vec<f64>,
    /// Mesh size schedule, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    h: Vec<f64>,
    /// Series truncation order.
    #[arg(long, global = true)]
    order: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct SceneArg {
    /// Scene file (TOML or JSON) or built-in example name.
    scene: String,
    /// Parameters for a built-in example, as `name=value`.
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Ends, divisors, h^1, index bounds and framedness.
    Info(SceneArg),
    #[command(subcommand)]
    Schwarzian(SchwarzianCmd),
    /// Triangulated image of the surface as OBJ.
    Immerse {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long, value_enum, default_value_t = ModelArg::Euclidean)]
        model: ModelArg,
        /// Mesh points per unit circle.
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// Scene for the partner surface with the same metric and Hopf differential.
    Correspond {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Null, Gauss and harmonic-form residual suites.
    Check(SceneArg),
    /// Morse index estimate over the truncation schedule.
    Index {
        #[command(flatten)]
        scene: SceneArg,
        /// Also write the finest mesh, with curvature comments, as OBJ.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// List the built-in examples.
    Examples,
    /// Framedness of the two one-parameter Gauss-map families, by monodromy
    /// and by the closed-form criterion.
    Uy {
        #[arg(long, value_parser = ["72", "73"])]
        example: String,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 3)]
        m: u32,
    },
}

#[derive(Subcommand)]
enum SchwarzianCmd {
    /// The Hopf differential coefficient of a scene at a point.
    Eval {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        at: String,
    },
    /// Series solution of S{f, z^n} = -sigma at the origin.
    Solve {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        n: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Euclidean,
    Ball,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Bryant,
    Minimal,
}

enum Failure {
    Core(Error),
    /// A suite ran but did not pass.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 2,
            Failure::Core(e) => match e {
                Error::Io(_) => 1,
                Error::NotConverged(_)
                | Error::ContinuationFailure(_)
                | Error::FactorizationBreakdown { .. } => 3,
                _ => 2,
            },
        }
    }
}

type Out = Result<(), Failure>;

fn io(e: std::io::Error) -> Failure {
    Failure::Core(Error::Io(e.to_string()))
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, Error> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Scene(format!("expected name=value, got `{kv}`")))?;
            let x = v
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Scene(format!("parameter `{k}`: `{v}` is not a number")))?;
            Ok((k.trim().to_string(), x))
        })
        .collect()
}

fn load_scene(arg: &SceneArg) -> Result<Scene, Error> {
    let params = parse_params(&arg.params)?;
    let path = Path::new(&arg.scene);
    if path.exists() {
        if !params.is_empty() {
            return Err(Error::Scene(
                "parameters on the command line apply to built-in examples only".into(),
            ));
        }
        return Scene::load(path);
    }
    builtin(&arg.scene, &params)
}

impl Cli {
    fn tol(&self, scene: &Scene) -> f64 {
        self.tol.unwrap_or(scene.analysis.tol)
    }

    fn emit(&self, text: &str) -> Out {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(io),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn json<T: serde::Serialize>(&self, v: &T) -> Out {
        let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Core(Error::Io(e.to_string())))?;
        self.emit(&(s + "\n"))
    }
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("-".into(), |x| x.to_string())
}

fn info_text(info: &SurfaceInfo) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "surface       {}", info.name);
    let _ = writeln!(s, "genus         {}", info.genus);
    let _ = writeln!(s, "sidedness     {:?}", info.sidedness);
    let _ = writeln!(s, "ends          {}", info.ends.len());
    for e in &info.ends {
        let kind = e.end_type.map_or("-".into(), |t| format!("{t:?}"));
        let _ = writeln!(
            s,
            "  at {:<10} order {:<3} g-multiplicity {:<3} partner end {}{}",
            e.point,
            fmt_opt(&e.order),
            fmt_opt(&e.g_multiplicity),
            kind,
            e.error.as_ref().map_or(String::new(), |x| format!("  ({x})"))
        );
    }
    let _ = writeln!(s, "branch        {}", info.branch_divisor);
    let _ = writeln!(
        s,
        "D             {} (degree {})",
        fmt_opt(&info.divisor),
        fmt_opt(&info.divisor_degree)
    );
    let _ = writeln!(s, "h1(D)         {}", fmt_opt(&info.h1));
    for (label, b) in [("two-sided", &info.bound_two_sided), ("one-sided", &info.bound_one_sided)] {
        let v = b
            .as_ref()
            .map_or("-".into(), |b| format!("{} (ceiling {})", b.value, b.ceiling));
        let _ = writeln!(s, "bound {label:<10}{v}");
    }
    let _ = writeln!(s, "framed        {}", fmt_opt(&info.framed));
    for e in &info.errors {
        let _ = writeln!(s, "note          {e}");
    }
    s
}

fn cmd_info(cli: &Cli, arg: &SceneArg) -> Out {
    let scene = load_scene(arg)?;
    let info = surface_info(&scene.surface);
    match cli.format {
        Format::Json => cli.json(&info),
        _ => cli.emit(&info_text(&info)),
    }
}

fn cmd_schwarzian(cli: &Cli, cmd: &SchwarzianCmd) -> Out {
    match cmd {
        SchwarzianCmd::Eval { scene, at } => {
            let scene = load_scene(scene)?;
            let q = scene.surface.sigma()?;
            let p = parse_point(at)?;
            let (chart, v) = match p {
                Point::Finite(z) => ("z", q.eval(z)?),
                Point::Infinity => ("w", q.at_infinity_chart().eval(0.0.into())?),
            };
            match cli.format {
                Format::Json => cli.json(&serde_json::json!({
                    "point": p.to_string(), "chart": chart, "re": v.re, "im": v.im,
                })),
                Format::Csv => cli.emit(&format!("point,chart,re,im\n{p},{chart},{},{}\n", v.re, v.im)),
                Format::Text => cli.emit(&format!("sigma at {p} = ({}{:+}i) d{chart}^2\n", v.re, v.im)),
            }
        }
        SchwarzianCmd::Solve { sigma, n } => {
            let e = parse(sigma)?;
            let sol = solve_schwarzian_series(&e, *n, cli.order.unwrap_or(20))?;
            let mut csv = String::from("series,power,re,im\n");
            for (name, h) in [("p1", &sol.p1), ("p2", &sol.p2)] {
                for (j, c) in h.coeffs.iter().enumerate() {
                    let power = h.twice_exponent as f64 / 2.0 + j as f64;
                    let _ = writeln!(csv, "{name},{power},{},{}", c.re, c.im);
                }
            }
            let f = &sol.f_series;
            for (j, c) in f.coeffs.iter().enumerate() {
                let _ = writeln!(csv, "f,{},{},{}", f.order + j as i32, c.re, c.im);
            }
            match cli.format {
                Format::Json => cli.json(&serde_json::json!({
                    "n": sol.n,
                    "multiplicity": sol.multiplicity,
                    "truncation": sol.truncation,
                    "residual": sol.residual,
                    "p1": sol.p1,
                    "p2": sol.p2,
                    "f": {
                        "order": f.order,
                        "coeffs": f.coeffs.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                    },
                })),
                _ => {
                    if cli.format == Format::Text {
                        eprintln!(
                            "n = {}, multiplicity = {}, residual = {:.3e}",
                            sol.n, sol.multiplicity, sol.residual
                        );
                    }
                    cli.emit(&csv)
                }
            }
        }
    }
}

fn cmd_immerse(cli: &Cli, arg: &SceneArg, model: ModelArg, grid: usize) -> Out {
    let scene = load_scene(arg)?;
    if grid < 3 {
        return Err(Error::Scene("--grid must be at least 3".into()).into());
    }
    let r = cli.r.first().copied().unwrap_or(scene.analysis.r[0]);
    let h = 2.0 * std::f64::consts::PI / grid as f64;
    let mesh = build_mesh(&scene.surface, r, h)?;
    let model = match model {
        ModelArg::Euclidean => Model::Euclidean,
        ModelArg::Ball => Model::Ball,
    };
    let im = immerse_mesh(&scene.surface, &mesh, model, cli.tol(&scene))?;
    eprintln!(
        "{} vertices, {} faces, {} split across periods, {} dropped",
        im.vertices.len(),
        im.faces.len(),
        im.split_faces,
        im.dropped
    );
    match cli.format {
        Format::Json => cli.json(&im),
        _ => cli.emit(&im.to_obj()),
    }
}

fn cmd_correspond(cli: &Cli, arg: &SceneArg, to: Target) -> Out {
    let scene = load_scene(arg)?;
    let surface = match to {
        Target::Bryant => lawson_min_to_bryant(&scene.surface)?,
        Target::Minimal => lawson_bryant_to_min(&scene.surface)?,
    };
    let partner = Scene {
        surface,
        parameters: scene.parameters.clone(),
        analysis: scene.analysis.clone(),
        note: scene.note.clone(),
    };
    partner.validate()?;
    let text = match cli.format {
        Format::Json => partner.to_json()? + "\n",
        _ => partner.to_toml()?,
    };
    cli.emit(&text)
}

fn check_csv(rows: &[CheckRow]) -> String {
    let mut s = String::from("suite,z_re,z_im");
    for h in CHECK_STEPS {
        let _ = write!(s, ",r_h{h}");
    }
    s.push_str(",min_order,verdict,note\n");
    for r in rows {
        let _ = write!(s, "{},{},{}", r.suite, r.z[0], r.z[1]);
        for k in 0..CHECK_STEPS.len() {
            let _ = write!(s, ",{}", r.residuals.get(k).map_or(String::new(), |x| format!("{x:e}")));
        }
        let _ = writeln!(
            s,
            ",{},{},{}",
            r.min_order.map_or(String::new(), |o| format!("{o:.3}")),
            if r.pass { "pass" } else { "fail" },
            r.note.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    s
}

fn check_text(rows: &[CheckRow]) -> String {
    let mut s = format!("{:<10} {:>22} {:>11} {:>7}  verdict\n", "suite", "z", "residual", "order");
    for r in rows {
        let z = format!("{:.3}{:+.3}i", r.z[0], r.z[1]);
        let res = r.residuals.last().map_or("-".into(), |x| format!("{x:.2e}"));
        let _ = writeln!(
            s,
            "{:<10} {:>22} {:>11} {:>7}  {}{}",
            r.suite,
            z,
            res,
            r.min_order.map_or("-".into(), |o| format!("{o:.2}")),
            if r.pass { "PASS" } else { "FAIL" },
            r.note.as_ref().map_or(String::new(), |n| format!("  {n}"))
        );
    }
    s
}

fn cmd_check(cli: &Cli, arg: &SceneArg) -> Out {
    let scene = load_scene(arg)?;
    scene.validate()?;
    let floor = (10.0 * cli.tol(&scene)).max(1e-12);
    let rows = check_suite(&scene.surface, 3, floor);
    match cli.format {
        Format::Json => cli.json(&rows)?,
        Format::Csv => cli.emit(&check_csv(&rows))?,
        Format::Text => cli.emit(&check_text(&rows))?,
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} of {} checks failed", rows.len())));
    }
    Ok(())
}

fn index_text(rep: &IndexReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>6} {:>6} {:>9} {:>5} {:>5}  verdict", "R", "h", "vertices", "neg", "zero");
    for r in &rep.runs {
        let _ = writeln!(
            s,
            "{:>6} {:>6} {:>9} {:>5} {:>5}  {}",
            r.r, r.h, r.n_vertices, r.inertia_minus, r.inertia_zero, r.verdict
        );
    }
    let _ = writeln!(
        s,
        "estimate {} ({}), bound {} (ceiling {})",
        fmt_opt(&rep.estimate),
        if rep.converged { "converged" } else { "not converged" },
        rep.bound.value,
        rep.bound.ceiling
    );
    for v in &rep.monotonicity_violations {
        let _ = writeln!(s, "monotonicity violation: {v}");
    }
    s
}

fn cmd_index(cli: &Cli, arg: &SceneArg, mesh: &Option<PathBuf>) -> Out {
    let scene = load_scene(arg)?;
    let rs = if cli.r.is_empty() { scene.analysis.r.clone() } else { cli.r.clone() };
    let hs = if cli.h.is_empty() { scene.analysis.h.clone() } else { cli.h.clone() };
    let rep = estimate_index(&scene.surface, &rs, &hs)?;
    if let Some(p) = mesh {
        let m = build_mesh(&scene.surface, *rs.last().unwrap(), *hs.last().unwrap())?;
        std::fs::write(p, m.to_obj_with_curvature(&scene.surface)?).map_err(io)?;
    }
    match cli.format {
        Format::Json => cli.json(&rep)?,
        Format::Csv => cli.emit(&rep.to_csv())?,
        // A file target gets the CSV report.
        Format::Text if cli.out.is_some() => cli.emit(&rep.to_csv())?,
        Format::Text => cli.emit(&index_text(&rep))?,
    }
    let est = rep.require()?;
    if (est as i64) < rep.bound.ceiling {
        return Err(Failure::Check(format!(
            "estimate {est} is below the bound ceiling {}",
            rep.bound.ceiling
        )));
    }
    Ok(())
}

fn cmd_examples(cli: &Cli) -> Out {
    let rows: Vec<_> = BUILTINS
        .iter()
        .map(|(name, params)| {
            let p: BTreeMap<&str, f64> = params.iter().copied().collect();
            (name, p, SPECTRAL_EXAMPLES.contains(name))
        })
        .collect();
    match cli.format {
        Format::Json => cli.json(
            &rows
                .iter()
                .map(|(n, p, s)| serde_json::json!({"name": n, "parameters": p, "spectral": s}))
                .collect::<Vec<_>>(),
        ),
        _ => {
            let mut s = String::new();
            for (n, p, spectral) in &rows {
                let params: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(
                    s,
                    "{:<12} {:<20} {}",
                    n,
                    params.join(" "),
                    if *spectral { "index" } else { "" }
                );
            }
            cli.emit(&s)
        }
    }
}

fn cmd_uy(cli: &Cli, example: &str, mu: f64, m: u32) -> Out {
    let ex = if example == "72" { UyExample::Ex72 } else { UyExample::Ex73 };
    let framed = umehara_yamada_framedness(ex, mu, m)?;
    let closed = uy_closed_form(ex, mu, m);
    match cli.format {
        Format::Json => cli.json(&serde_json::json!({
            "example": example, "mu": mu, "m": m, "framed": framed, "closed_form": closed,
        }))?,
        _ => cli.emit(&format!("framed {framed} (closed form {closed})\n"))?,
    }
    if framed != closed {
        return Err(Failure::Check("monodromy disagrees with the closed form".into()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Out {
    match &cli.command {
        Command::Info(a) => cmd_info(cli, a),
        Command::Schwarzian(c) => cmd_schwarzian(cli, c),
        Command::Immerse { scene, model, grid } => cmd_immerse(cli, scene, *model, *grid),
        Command::Correspond { scene, to } => cmd_correspond(cli, scene, *to),
        Command::Check(a) => cmd_check(cli, a),
        Command::Index { scene, mesh } => cmd_index(cli, scene, mesh),
        Command::Examples => cmd_examples(cli),
        Command::Uy { example, mu, m } => cmd_uy(cli, example, *mu, *m),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Check(m) => eprintln!("check failed: {m}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
