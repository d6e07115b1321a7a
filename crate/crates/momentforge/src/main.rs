use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use momentforge::cli_io::{parse_input, render_svg, ConstructDoc, InputDocument};
use momentforge::constructions::{
    attach_chord_circles, attach_factor_circle, attach_pendant_circles, mt6, Construction, Grouping,
};
use momentforge::fixtures;
use momentforge::graph_ops::{collapses_onto, is_homeomorphic, is_isomorphic};
use momentforge::moment_map::{emit_system, fiber_dim_bound, stratum_fibers, validate_moment_data, MomentData};
use momentforge::numeric_verify::{verify, Tolerances, VerifyOptions};
use momentforge::reeb_sweep::reeb_graph;

const PASS: u8 = 0;
const FAIL: u8 = 2;
const INVALID: u8 = 3;

#[derive(Parser)]
#[command(name = "momentforge", version, about = "Moment-like maps from circle arrangements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct InputArg {
    /// Document path or fixture name (disk, annulus, crossing_pair, two_hole, lens).
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Check the arrangement and map hypotheses.
    Validate(InputArg),
    /// Print the polynomial system.
    Emit(InputArg),
    /// Fiber class of every stratum.
    Fibers(InputArg),
    /// Reeb graph of the first coordinate.
    Reeb(InputArg),
    /// Build a decorated arrangement.
    Construct {
        #[command(subcommand)]
        which: ConstructCmd,
    },
    /// Numeric checks of the system.
    Verify {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol_residual: f64,
        #[arg(long, default_value_t = 1e3)]
        tol_rank: f64,
    },
    /// Write an SVG figure.
    Render {
        #[arg(long)]
        input: String,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Regenerate the outputs of every fixture.
    Demo {
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConstructOut {
    /// Where to write the new document; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Pendant circles per edge, e.g. `--alloc 0:1,2:2`.
    Mt2 {
        #[arg(long)]
        input: String,
        #[arg(long)]
        alloc: String,
        #[arg(long)]
        total_dim: usize,
        #[command(flatten)]
        out: ConstructOut,
    },
    /// One pendant circle forming a new group.
    Mt3 {
        #[arg(long)]
        input: String,
        #[arg(long)]
        edge: usize,
        #[arg(long, default_value_t = 1)]
        new_dim: usize,
        #[command(flatten)]
        out: ConstructOut,
    },
    /// Chord circles per edge.
    Mt4 {
        #[arg(long)]
        input: String,
        #[arg(long)]
        alloc: String,
        #[arg(long)]
        total_dim: usize,
        #[command(flatten)]
        out: ConstructOut,
    },
    /// One chord circle forming a new group.
    Mt5 {
        #[arg(long)]
        input: String,
        #[arg(long)]
        edge: usize,
        #[arg(long, default_value_t = 1)]
        new_dim: usize,
        #[command(flatten)]
        out: ConstructOut,
    },
    /// Disk with pendants realizing `G_{P, j1, j2}`.
    Mt6 {
        #[arg(long)]
        nprime: usize,
        #[arg(long)]
        j1: usize,
        #[arg(long)]
        j2: usize,
        #[arg(long, default_value_t = 4)]
        total_dim: usize,
        #[command(flatten)]
        out: ConstructOut,
    },
}

struct Failure(u8, String);

type Outcome = Result<u8, Failure>;

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure(INVALID, e.to_string())
}

fn load(input: &str) -> Result<MomentData, Failure> {
    let path = Path::new(input);
    if !path.exists() {
        if let Some(d) = fixtures::by_name(input) {
            return Ok(d);
        }
    }
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {input}: {e}")))?;
    parse_input(&text).map_err(invalid)
}

fn parse_alloc(s: &str) -> Result<BTreeMap<usize, usize>, Failure> {
    let mut out = BTreeMap::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (e, c) = part.split_once(':').ok_or_else(|| invalid(format!("bad allocation entry `{part}`")))?;
        let e: usize = e.trim().parse().map_err(|_| invalid(format!("bad edge in `{part}`")))?;
        let c: usize = c.trim().parse().map_err(|_| invalid(format!("bad count in `{part}`")))?;
        out.insert(e, c);
    }
    Ok(out)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate_cmd(d: &MomentData, format: Format) -> Outcome {
    let report = validate_moment_data(d);
    match format {
        Format::Json => {
            let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            println!("{}", json!({ "passed": report.passed(), "violations": lines }));
        }
        Format::Text => {
            if report.passed() {
                println!("pass");
            }
            for v in &report.violations {
                println!("{v}");
            }
        }
    }
    Ok(if report.passed() { PASS } else { FAIL })
}

fn emit_cmd(d: &MomentData, format: Format) -> Outcome {
    let sys = emit_system(d);
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "manifest": sys.manifest,
                "variables": sys.variables,
                "polynomials": sys.polys.iter().map(|p| p.to_text()).collect::<Vec<_>>(),
                "factored": sys.factored,
            }))
            .unwrap()
        ),
        Format::Text => {
            let m = &sys.manifest;
            println!("n = {}, l1 = {}, l2 = {}, m = {}, ambient = R^{}", m.n, m.l1, m.l2, m.m, m.ambient_dim);
            println!("variables: {}", sys.variables.join(" "));
            for (p, f) in sys.polys.iter().zip(&sys.factored) {
                println!("{}", p.to_text());
                println!("  = {f}");
            }
        }
    }
    Ok(PASS)
}

fn fibers_cmd(d: &MomentData, format: Format) -> Outcome {
    let rows = stratum_fibers(d);
    let bound = fiber_dim_bound(d);
    match format {
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(l, f)| json!({ "stratum": l.to_string(), "fiber": f.0, "class": f.to_string() }))
                .collect();
            println!("{}", serde_json::to_string_pretty(&json!({ "bound": bound, "strata": rows })).unwrap());
        }
        Format::Text => {
            for (l, f) in rows {
                println!("{l}: {f} {:?}", f.0);
            }
            println!("fiber dimension bound m - n = {bound}");
        }
    }
    Ok(PASS)
}

fn reeb_cmd(d: &MomentData, format: Format) -> Outcome {
    let g = reeb_graph(d).map_err(invalid)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&g.to_json()).unwrap()),
        Format::Text => print!("{}", g.to_dot()),
    }
    Ok(PASS)
}

fn finish_construction(c: Construction, record: ConstructDoc, out: &ConstructOut, ok: bool) -> Outcome {
    let mut doc = InputDocument::from_data(&c.data);
    let mut record = record;
    record.predicted = Some(c.predicted.to_text());
    doc.construct = Some(record);
    write_or_print(out.output.as_deref(), &doc.to_toml())?;
    let g = reeb_graph(&c.data).map_err(invalid)?;
    if let Some(svg) = &out.svg {
        fs::write(svg, render_svg(&c.data, Some(&g))).map_err(invalid)?;
    }
    let computed = g.to_multigraph();
    eprintln!(
        "base {}V/{}E, computed {}V/{}E, predicted {}V/{}E: {}",
        c.base_graph.vertices.len(),
        c.base_graph.edges.len(),
        computed.n,
        computed.edges.len(),
        c.predicted.n,
        c.predicted.edges.len(),
        if ok { "match" } else { "MISMATCH" }
    );
    Ok(if ok { PASS } else { FAIL })
}

fn blank(kind: &str) -> ConstructDoc {
    ConstructDoc {
        kind: kind.into(),
        alloc: vec![],
        edge: None,
        total_dim: None,
        new_dim: None,
        nprime: None,
        j1: None,
        j2: None,
        predicted: None,
    }
}

fn computed_graph(c: &Construction) -> Result<momentforge::graph_ops::MultiGraph, Failure> {
    Ok(reeb_graph(&c.data).map_err(invalid)?.to_multigraph())
}

fn construct_cmd(which: &ConstructCmd) -> Outcome {
    match which {
        ConstructCmd::Mt2 { input, alloc, total_dim, out } => {
            let base = load(input)?;
            let a = parse_alloc(alloc)?;
            let c = attach_pendant_circles(&base, &a, *total_dim).map_err(invalid)?;
            let g = computed_graph(&c)?;
            let ok = is_isomorphic(&g, &c.predicted) && collapses_onto(&g, &c.base_graph.to_multigraph());
            let rec = ConstructDoc { alloc: a.iter().map(|(&e, &k)| [e, k]).collect(), total_dim: Some(*total_dim), ..blank("mt2") };
            finish_construction(c, rec, out, ok)
        }
        ConstructCmd::Mt3 { input, edge, new_dim, out } => {
            let base = load(input)?;
            let c = attach_factor_circle(&base, *edge, *new_dim).map_err(invalid)?;
            let g = computed_graph(&c)?;
            let ok = is_isomorphic(&g, &c.predicted);
            let rec = ConstructDoc { edge: Some(*edge), new_dim: Some(*new_dim), ..blank("mt3") };
            finish_construction(c, rec, out, ok)
        }
        ConstructCmd::Mt4 { input, alloc, total_dim, out } => {
            let base = load(input)?;
            let a = parse_alloc(alloc)?;
            let c = attach_chord_circles(&base, &a, Grouping::TwoGroups { total_dim: *total_dim }).map_err(invalid)?;
            let g = computed_graph(&c)?;
            let ok = is_isomorphic(&g, &c.predicted) && is_homeomorphic(&g, &c.base_graph.to_multigraph());
            let rec = ConstructDoc { alloc: a.iter().map(|(&e, &k)| [e, k]).collect(), total_dim: Some(*total_dim), ..blank("mt4") };
            finish_construction(c, rec, out, ok)
        }
        ConstructCmd::Mt5 { input, edge, new_dim, out } => {
            let base = load(input)?;
            let a = BTreeMap::from([(*edge, 1)]);
            let c = attach_chord_circles(&base, &a, Grouping::NewGroup { new_dim: *new_dim }).map_err(invalid)?;
            let g = computed_graph(&c)?;
            let ok = is_isomorphic(&g, &c.predicted) && is_homeomorphic(&g, &c.base_graph.to_multigraph());
            let rec = ConstructDoc { edge: Some(*edge), new_dim: Some(*new_dim), ..blank("mt5") };
            finish_construction(c, rec, out, ok)
        }
        ConstructCmd::Mt6 { nprime, j1, j2, total_dim, out } => {
            let c = mt6(*nprime, *j1, *j2, *total_dim).map_err(invalid)?;
            let g = computed_graph(&c)?;
            let ok = is_isomorphic(&g, &c.predicted);
            let rec = ConstructDoc {
                nprime: Some(*nprime),
                j1: Some(*j1),
                j2: Some(*j2),
                total_dim: Some(*total_dim),
                ..blank("mt6")
            };
            finish_construction(c, rec, out, ok)
        }
    }
}

fn verify_cmd(d: &MomentData, format: Format, opts: VerifyOptions) -> Outcome {
    let rep = verify(d, &opts).map_err(invalid)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep).unwrap()),
        Format::Text => {
            let tangent_ok = rep.tangent.iter().filter(|t| t.passed).count();
            println!(
                "rank: {} samples, max residual {:.3e}, min gap {:.3e}, {} failures",
                rep.rank.samples,
                rep.rank.max_residual,
                rep.rank.min_rank_gap,
                rep.rank.failures.len()
            );
            println!(
                "image: {} points ({} inside, {} outside, {} band), {} failures",
                rep.image.samples,
                rep.image.inside,
                rep.image.outside,
                rep.image.band,
                rep.image.failures.len()
            );
            println!("tangent: {tangent_ok}/{} boundary points", rep.tangent.len());
            println!(
                "singular values: {} exact, {} detected, max error {:.3e}",
                rep.singular.exact.len(),
                rep.singular.detected.len(),
                rep.singular.max_error
            );
            match &rep.oracle.skipped {
                Some(why) => println!("oracle: skipped ({why})"),
                None => println!("oracle: {}", if rep.oracle.passed { "agrees" } else { "differs" }),
            }
            println!("{}", if rep.passed { "pass" } else { "FAIL" });
        }
    }
    Ok(if rep.passed { PASS } else { FAIL })
}

fn demo_cmd(output: Option<PathBuf>) -> Outcome {
    let dir = output
        .or_else(|| std::env::var_os("MOMENTFORGE_FIXTURES").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("demo_output"));
    fs::create_dir_all(&dir).map_err(invalid)?;
    let put = |name: String, text: String| fs::write(dir.join(&name), text).map_err(invalid);
    for (name, d) in fixtures::all() {
        put(format!("{name}.toml"), InputDocument::from_data(&d).to_toml())?;
        let sys = emit_system(&d);
        let polys: Vec<String> = sys.polys.iter().map(|p| p.to_text() + "\n").collect();
        put(format!("{name}.system.txt"), polys.concat())?;
        let fibers: Vec<String> = stratum_fibers(&d).iter().map(|(l, f)| format!("{l}: {f}\n")).collect();
        put(format!("{name}.fibers.txt"), fibers.concat())?;
        let g = reeb_graph(&d).map_err(invalid)?;
        put(format!("{name}.reeb.json"), serde_json::to_string_pretty(&g.to_json()).unwrap() + "\n")?;
        put(format!("{name}.reeb.dot"), g.to_dot())?;
        put(format!("{name}.svg"), render_svg(&d, Some(&g)))?;
    }
    let c = attach_pendant_circles(&fixtures::annulus(), &BTreeMap::from([(1, 1)]), 4).map_err(invalid)?;
    let g = reeb_graph(&c.data).map_err(invalid)?;
    put("annulus_pendant.toml".into(), InputDocument::from_data(&c.data).to_toml())?;
    put("annulus_pendant.svg".into(), render_svg(&c.data, Some(&g)))?;
    println!("wrote {}", dir.display());
    Ok(PASS)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate(a) => validate_cmd(&load(&a.input)?, a.format),
        Command::Emit(a) => emit_cmd(&load(&a.input)?, a.format),
        Command::Fibers(a) => fibers_cmd(&load(&a.input)?, a.format),
        Command::Reeb(a) => reeb_cmd(&load(&a.input)?, a.format),
        Command::Construct { which } => construct_cmd(&which),
        Command::Verify { input, samples, seed, grid, tol_residual, tol_rank } => {
            let tol = Tolerances { residual: tol_residual, rank_gap: tol_rank, ..Tolerances::default() };
            let opts = VerifyOptions { samples, seed, grid, tol, ..VerifyOptions::default() };
            verify_cmd(&load(&input.input)?, input.format, opts)
        }
        Command::Render { input, svg } => {
            let d = load(&input)?;
            let g = reeb_graph(&d).ok();
            fs::write(&svg, render_svg(&d, g.as_ref())).map_err(invalid)?;
            Ok(PASS)
        }
        Command::Demo { output } => demo_cmd(output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INVALID } else { PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
