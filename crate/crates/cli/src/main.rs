//! `ising-forge`: parse → encode → compile → planarize → verify → dual.
//!
//! Exit codes: 0 success or PASS, 1 verification FAIL, 2 parse or usage
//! error, 3 semantic or other error, 4 enumeration cap exceeded.

use clap::{Args, Parser, Subcommand};
use ising_forge::compiler::compile;
use ising_forge::dsl::{parse_model, LatticeKind};
use ising_forge::duality::{derive_lattice_duality, derive_square_duality, dual_of_model};
use ising_forge::error::Error;
use ising_forge::eval::{check_equivalence, exact_z_ising, exact_z_model, transfer_z, Verdict, ZReport};
use ising_forge::field::{ComplexField, Prefactor};
use ising_forge::graph::IsingGraph;
use ising_forge::grid::GridIsing;
use ising_forge::planar::{embed_grid, EmbedOptions, Embedding};
use ising_forge::potts::encode_all;
use ising_forge::serial::{parse_graph, parse_grid, render_graph, render_grid, render_provenance};
use ising_forge::SpinModel;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const MAX_TRANSFER_WIDTH: usize = 20;

#[derive(Parser)]
#[command(name = "ising-forge", version, about = "Compile lattice models to a rectangular Ising lattice with iπ/4 couplings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Model → Ising graph with prefactor.
    Compile(Common),
    /// Compare Z of a model with a compiled graph or grid (compiled in memory without --against).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Ising graph → rectangular grid.
    Planarize(Common),
    /// Sum out term spins. Input is a model file or `square|triangular|hexagonal:RxC:J`.
    Dual(Common),
    /// Model or graph all the way to a verified grid.
    Pipeline(Common),
}

#[derive(Args, Clone)]
struct Common {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Largest free-spin count enumerated by brute force.
    #[arg(long, default_value_t = 26)]
    cap: usize,
    /// Directory receiving one file per rewrite step.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

enum Fail {
    Err(Error),
    Io(String),
    Usage(String),
    Verify,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Err(e)
    }
}

type Out<T> = std::result::Result<T, Fail>;

fn io<T>(r: std::io::Result<T>, what: &Path) -> Out<T> {
    r.map_err(|e| Fail::Io(format!("{}: {e}", what.display())))
}

enum Input {
    Model(SpinModel),
    Graph(IsingGraph, Prefactor),
    Grid(GridIsing),
}

fn read_input(path: &Path) -> Out<Input> {
    let text = io(std::fs::read_to_string(path), path)?;
    let head = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty()).unwrap_or("");
    Ok(if head == "ising-graph" {
        let (g, p) = parse_graph(&text)?;
        Input::Graph(g, p)
    } else if head.starts_with("ising-grid") {
        Input::Grid(parse_grid(&text)?)
    } else {
        Input::Model(parse_model(&text)?)
    })
}

fn emit(c: &Common, text: &str) -> Out<()> {
    match &c.output {
        Some(p) => io(std::fs::write(p, text), p),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Encoded and compiled, with `Z_model = p · Z(graph)`.
fn lower(m: &SpinModel) -> Out<(IsingGraph, Prefactor)> {
    let (spin, pe) = encode_all(m)?;
    let c = compile(&spin)?;
    Ok((c.graph, pe * c.prefactor))
}

/// Brute force under the cap, else a transfer matrix along the narrow side.
fn z_grid(g: &GridIsing, cap: usize) -> Result<ZReport, Error> {
    if g.n_free() <= cap {
        return exact_z_ising(&g.to_graph(), cap);
    }
    let t = if g.width <= g.height { g.clone() } else { g.transposed() };
    if t.width > MAX_TRANSFER_WIDTH {
        return Err(Error::CapExceeded { needed: g.n_free(), cap });
    }
    transfer_z(&t)
}

fn verdict_line(label: &str, za: &ZReport, zb: &ZReport, v: &Verdict) -> String {
    format!(
        "{label} {} method {}/{} rel {:e}\n",
        if v.pass { "PASS" } else { "FAIL" },
        za.method,
        zb.method,
        v.rel_error
    )
}

fn timing(label: &str, z: &ZReport) {
    eprintln!("{label} {z}");
}

fn cmd_compile(c: &Common) -> Out<()> {
    let Input::Model(m) = read_input(&c.input)? else {
        return Err(Fail::Usage("compile expects a model file".into()));
    };
    let (g, p) = lower(&m)?;
    emit(c, &render_graph(&g, &p))?;
    if let Some(o) = &c.output {
        let side = o.with_extension("prov");
        io(std::fs::write(&side, render_provenance(&g)), &side)?;
    }
    Ok(())
}

fn cmd_verify(c: &Common, against: Option<&Path>) -> Out<()> {
    let Input::Model(m) = read_input(&c.input)? else {
        return Err(Fail::Usage("verify expects a model file".into()));
    };
    let zm = exact_z_model(&m, c.cap)?;
    let (zb, p) = match against {
        None => {
            let (g, p) = lower(&m)?;
            (exact_z_ising(&g, c.cap)?, p)
        }
        Some(path) => match read_input(path)? {
            Input::Graph(g, p) => (exact_z_ising(&g, c.cap)?, p),
            Input::Grid(g) => (z_grid(&g, c.cap)?, g.prefactor),
            Input::Model(_) => return Err(Fail::Usage("--against expects a graph or grid".into())),
        },
    };
    timing("z_model", &zm);
    timing("z_artifact", &zb);
    let v = check_equivalence(zm.value, zb.value, p, c.tol);
    emit(c, &verdict_line("verify", &zm, &zb, &v))?;
    if v.pass {
        Ok(())
    } else {
        Err(Fail::Verify)
    }
}

/// Step graphs are kept for trace files, and for step-wise checks when the
/// input is small enough for any of them to be enumerable.
fn embed_opts(c: &Common, g: &IsingGraph) -> EmbedOptions {
    EmbedOptions { keep_graphs: c.trace.is_some() || g.n_free() <= c.cap, ..EmbedOptions::default() }
}

fn report_text(e: &Embedding) -> String {
    let r = &e.report;
    format!(
        "grid {}x{} live {} fillers {} densify {:?} crossings {} splits {} subdivisions {} within_bound {}\n",
        r.width, r.height, r.live_cells, r.filler_cells, r.densify, r.crossings, r.splits, r.subdivisions, r.within_size_bound
    )
}

fn write_trace(dir: &Path, start: &IsingGraph, start_p: Prefactor, e: &Embedding) -> Out<()> {
    io(std::fs::create_dir_all(dir), dir)?;
    let f = dir.join("step-0000-input.txt");
    io(std::fs::write(&f, render_graph(start, &start_p)), &f)?;
    for s in &e.trace {
        let f = dir.join(format!("step-{:04}-{}.txt", s.step, s.rule));
        let text = match &s.graph {
            Some(g) => render_graph(g, &s.delta),
            None => format!("{}\n", ising_forge::serial::render_prefactor(&s.delta)),
        };
        io(std::fs::write(&f, text), &f)?;
    }
    let f = dir.join("final-grid.txt");
    io(std::fs::write(&f, render_grid(&e.grid)), &f)
}

fn cmd_planarize(c: &Common) -> Out<()> {
    let (g, p) = match read_input(&c.input)? {
        Input::Graph(g, p) => (g, p),
        Input::Model(m) => lower(&m)?,
        Input::Grid(_) => return Err(Fail::Usage("input is already a grid".into())),
    };
    let mut e = embed_grid(&g, &embed_opts(c, &g))?;
    if let Some(dir) = &c.trace {
        write_trace(dir, &g, p, &e)?;
    }
    e.grid.prefactor = p * e.grid.prefactor;
    eprint!("{}", report_text(&e));
    emit(c, &render_grid(&e.grid))
}

fn parse_lattice(s: &str) -> Option<(LatticeKind, usize, usize, ComplexField)> {
    let mut it = s.split(':');
    let kind: LatticeKind = it.next()?.parse().ok()?;
    let (r, cc) = it.next()?.split_once('x')?;
    let j: f64 = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((kind, r.parse().ok()?, cc.parse().ok()?, ComplexField::real(j)))
}

fn cmd_dual(c: &Common) -> Out<()> {
    let arg = c.input.to_string_lossy().to_string();
    if let Some((kind, r, cc, j)) = parse_lattice(&arg) {
        let text = if kind == LatticeKind::Square {
            derive_square_duality(r, cc, j, c.tol)?.render()
        } else {
            derive_lattice_duality(kind, r, cc, j, c.tol)?.render()
        };
        return emit(c, &text);
    }
    let Input::Model(m) = read_input(&c.input)? else {
        return Err(Fail::Usage("dual expects a model file or a lattice such as square:2x3:0.5".into()));
    };
    let (spin, pe) = encode_all(&m)?;
    let d = dual_of_model(&spin, c.cap, c.tol)?;
    let mut s = ising_forge::dsl::render_model(&d.dual);
    let p = pe * d.prefactor;
    let _ = writeln!(s, "# prefactor {:?} {:?}", p.log_magnitude, p.phase);
    match d.exact {
        Some(v) => {
            let _ = writeln!(s, "# exact {} rel {:e}", if v.pass { "PASS" } else { "FAIL" }, v.rel_error);
        }
        None => s.push_str("# exact unchecked (cap)\n"),
    }
    emit(c, &s)?;
    match d.exact {
        Some(v) if !v.pass => Err(Fail::Verify),
        _ => Ok(()),
    }
}

/// Checks `Z(prev) = delta · Z(next)` along the trace; returns how many
/// leading steps passed and any failure.
fn stepwise(c: &Common, start: &IsingGraph, e: &Embedding, log: &mut String) -> Out<(usize, bool)> {
    let mut prev = start.clone();
    let mut through = 0;
    let mut contiguous = true;
    for s in &e.trace {
        let Some(next) = &s.graph else { break };
        let za = exact_z_ising(&prev, c.cap);
        let zb = exact_z_ising(next, c.cap);
        match (za, zb) {
            (Ok(za), Ok(zb)) => {
                let v = check_equivalence(za.value, zb.value, s.delta, c.tol);
                if !v.pass {
                    let _ = writeln!(log, "step {} {} FAIL rel {:e}", s.step, s.rule, v.rel_error);
                    return Ok((through, false));
                }
                if contiguous {
                    through = s.step;
                }
            }
            (Err(Error::CapExceeded { .. }), _) | (_, Err(Error::CapExceeded { .. })) => contiguous = false,
            (Err(err), _) | (_, Err(err)) => return Err(err.into()),
        }
        prev = next.clone();
    }
    Ok((through, true))
}

fn cmd_pipeline(c: &Common) -> Out<()> {
    let mut log = String::new();
    let (model, g, p) = match read_input(&c.input)? {
        Input::Model(m) => {
            let (g, p) = lower(&m)?;
            let _ = writeln!(log, "compile vertices {} edges {}", g.n_vertices(), g.n_edges());
            (Some(m), g, p)
        }
        Input::Graph(g, p) => (None, g, p),
        Input::Grid(_) => return Err(Fail::Usage("input is already a grid".into())),
    };
    let e = embed_grid(&g, &embed_opts(c, &g))?;
    if let Some(dir) = &c.trace {
        write_trace(dir, &g, p, &e)?;
    }
    log.push_str(&report_text(&e));
    let mut grid = e.grid.clone();
    grid.prefactor = p * grid.prefactor;
    // end to end when both sides are computable: a model is compared with
    // the full prefactor, a graph input with the embedding's own
    let source = match &model {
        Some(m) => exact_z_model(m, c.cap).map(|z| (z, grid.prefactor)),
        None => exact_z_ising(&g, c.cap).map(|z| (z, e.grid.prefactor)),
    };
    let ok = match (source, z_grid(&grid, c.cap)) {
        (Ok((za, pg)), Ok(zb)) => {
            timing("z_source", &za);
            timing("z_grid", &zb);
            let v = check_equivalence(za.value, zb.value, pg, c.tol);
            log.push_str(&verdict_line("verify end-to-end", &za, &zb, &v));
            v.pass
        }
        (Err(Error::CapExceeded { .. }), _) | (_, Err(Error::CapExceeded { .. })) => {
            let n = e.trace.len();
            let (k, ok) = stepwise(c, &g, &e, &mut log)?;
            let _ = writeln!(log, "verified-through-step-{k} of {n}");
            ok
        }
        (Err(err), _) | (_, Err(err)) => return Err(err.into()),
    };
    if let Some(o) = &c.output {
        io(std::fs::write(o, render_grid(&grid)), o)?;
    }
    print!("{log}");
    if ok {
        Ok(())
    } else {
        Err(Fail::Verify)
    }
}

fn run(cli: Cli) -> Out<()> {
    let c = match &cli.cmd {
        Cmd::Compile(c) | Cmd::Planarize(c) | Cmd::Dual(c) | Cmd::Pipeline(c) => c.clone(),
        Cmd::Verify { common, .. } => common.clone(),
    };
    if !(c.tol > 0.0) || c.cap > 28 {
        return Err(Fail::Usage("need --tol > 0 and --cap ≤ 28".into()));
    }
    if let Some(t) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Fail::Usage(format!("thread pool: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Compile(c) => cmd_compile(c),
        Cmd::Verify { common, against } => cmd_verify(common, against.as_deref()),
        Cmd::Planarize(c) => cmd_planarize(c),
        Cmd::Dual(c) => cmd_dual(c),
        Cmd::Pipeline(c) => cmd_pipeline(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Verify) => ExitCode::from(1),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Fail::Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Syntax { .. } => 2,
                Error::CapExceeded { .. } => 4,
                _ => 3,
            })
        }
    }
}
