//! `linkinf`: check, report on and draw the link at infinity of minimal
//! surfaces in ℝ⁴ given as JSON documents or built-in gallery fixtures.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linkinf::document::SurfaceDocument;
use linkinf::report::{build_report, ReportOptions};
use linkinf::surface::{self, Conformality};
use linkinf::{gallery, link, Error};
use serde_json::json;

#[derive(Parser)]
#[command(name = "linkinf", version, about = "Invariants at infinity of complete minimal surfaces in R^4")]
struct Cli {
    /// Worker threads (default: all cores); results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Input {
    /// A surface document path, or the name of a gallery fixture.
    input: String,
}

#[derive(Args)]
struct LinkFlags {
    /// Sphere radius for the link at infinity (default: stabilized).
    #[arg(long)]
    radius: Option<f64>,
    /// Knot samples per end.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Conformality, immersion and end profiles.
    Check(Input),
    /// The full invariant report.
    Report {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        link: LinkFlags,
        /// Scrambling seed of the double-point search grid.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the double-point search.
        #[arg(long)]
        no_doublepoints: bool,
        /// Half-width of the double-point search box in the parameter plane.
        #[arg(long, default_value_t = 1e3)]
        search_radius: f64,
    },
    /// The stabilized braid word of one end.
    Braid {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        link: LinkFlags,
        /// End index.
        #[arg(long, default_value_t = 0)]
        end: usize,
        /// Write an SVG braid diagram here.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the knot sample as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List the built-in fixtures, or print one of them.
    Gallery {
        /// Print this fixture's document.
        name: Option<String>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn load(input: &str) -> Result<SurfaceDocument, Failure> {
    let path = Path::new(input);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure { code: 2, message: format!("{input}: {e}") })?;
        return SurfaceDocument::parse(&text).map_err(|e| Failure { code: 2, message: format!("{input}: {e}") });
    }
    gallery::fixture(input).map_err(|_| Failure { code: 2, message: format!("`{input}` is neither a file nor a gallery fixture") })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })
}

fn check(input: &Input, as_json: bool) -> Outcome {
    let doc = load(&input.input)?;
    let s = doc.to_spec()?;
    let conf = surface::check_conformal(&s)?;
    let residual = match &conf {
        Conformality::Exact => "exact 0".to_string(),
        Conformality::Numeric(r) => format!("{r:.2e}"),
        Conformality::Fails(f) => f.to_string(),
    };
    let (b, _) = surface::branch_data(&s);
    let ends = if conf.holds() { Some(surface::end_profiles(&s)) } else { None };
    let code = if conf.holds() { 0 } else { 1 };
    if as_json {
        let ends_json = match &ends {
            Some(Ok(es)) => json!(es
                .iter()
                .map(|e| json!({"id": e.end_id, "location": e.location.name(), "multiplicity": e.n,
                    "torus": link::torus_knot_detect(e).map(|t| [t.n, t.p])}))
                .collect::<Vec<_>>()),
            Some(Err(e)) => json!({"error": e.to_string()}),
            None => json!(null),
        };
        let v = json!({"label": doc.label, "conformal": conf.holds(), "residual": residual,
            "branch_order": b, "ends": ends_json, "exit_code": code});
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("surface {}", doc.label);
        println!("conformality residual: {residual}");
        println!("immersion: {}", if b == 0 { "immersed".to_string() } else { format!("branch points of total order {b}") });
        match &ends {
            Some(Ok(es)) => {
                for e in es {
                    let torus = link::torus_knot_detect(e).map_or("-".into(), |t| format!("T({}, {})", t.n, t.p));
                    println!("end {} at {}: N = {}, torus {}", e.end_id, e.location.name(), e.n, torus);
                }
            }
            Some(Err(e)) => println!("end profiles: {e}"),
            None => {}
        }
        if let Some(n) = &doc.note {
            println!("note: {n}");
        }
    }
    match ends {
        Some(Err(e)) => Err(e.into()),
        _ => Ok(code),
    }
}

fn report(input: &Input, opts: &ReportOptions, as_json: bool) -> Outcome {
    let doc = load(&input.input)?;
    let r = build_report(&doc, opts)?;
    if as_json {
        println!("{}", r.to_json());
    } else {
        print!("{}", r.to_text());
    }
    Ok(r.exit_code as u8)
}

fn braid(input: &Input, lf: &LinkFlags, end: usize, svg_out: Option<&Path>, csv_out: Option<&Path>, as_json: bool) -> Outcome {
    let doc = load(&input.input)?;
    let s = doc.to_spec()?;
    if !surface::check_conformal(&s)?.holds() {
        return Err(Failure { code: 1, message: format!("{} is not conformal", doc.label) });
    }
    let ends = surface::end_profiles(&s)?;
    let Some(e) = ends.get(end) else {
        return Err(Failure { code: 2, message: format!("end {end} out of range (surface has {} ends)", ends.len()) });
    };
    let k = match lf.radius {
        Some(r) => link::braid_at_with(&s, e, r, lf.samples)?,
        None => link::stabilize_radius_with(&s, e, lf.samples)?,
    };
    let w = &k.braid.word;
    if let Some(p) = svg_out {
        write_file(p, &svg::braid_svg(w))?;
    }
    if let Some(p) = csv_out {
        write_file(p, &k.sample.to_csv())?;
    }
    if as_json {
        let v = json!({"label": doc.label, "end": end, "strands": w.strands, "word": w.to_string(),
            "e": k.braid.winding_e, "radius": (k.radius * 1e6).round() / 1e6});
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("{w}");
        println!("strands {}, e = {}, R = {:.6e}", w.strands, k.braid.winding_e, k.radius);
    }
    Ok(0)
}

fn gallery_cmd(name: Option<&str>, as_json: bool) -> Outcome {
    if let Some(n) = name {
        println!("{}", gallery::fixture(n)?.to_json());
        return Ok(0);
    }
    let docs = gallery::all();
    if as_json {
        let v: Vec<_> = docs.iter().map(|d| json!({"label": d.label, "description": d.description, "note": d.note})).collect();
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        for d in docs {
            println!("{:<22} {}", d.label, d.description.as_deref().unwrap_or(""));
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Check(i) => check(i, cli.json),
        Cmd::Report { input, link, seed, no_doublepoints, search_radius } => {
            let opts = ReportOptions {
                radius: link.radius,
                samples: link.samples,
                seed: *seed,
                double_points: !no_doublepoints,
                search_radius: *search_radius,
            };
            report(input, &opts, cli.json)
        }
        Cmd::Braid { input, link, end, svg, csv } => braid(input, link, *end, svg.as_deref(), csv.as_deref(), cli.json),
        Cmd::Gallery { name } => gallery_cmd(name.as_deref(), cli.json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("linkinf: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(c) => ExitCode::from(c),
        Err(f) => {
            eprintln!("linkinf: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
