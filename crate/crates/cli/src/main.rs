use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use svstokes::classify::{classify_mesh, Tolerances};
use svstokes::mesh::{generate, load_mesh, write_mesh, MeshTopology, Preset};
use svstokes::report::{build_report, AnalysisReport, ReportOptions, VERSION};
use svstokes::solver::{SolverOptions, VelocityNorm};
use svstokes::suite::{run_field_suites, SuiteOptions};
use svstokes::svg::render_svg;
use svstokes::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_INDETERMINATE: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

/// Divergence stability of cubic Scott-Vogelius elements on 2D meshes.
#[derive(Parser)]
#[command(name = "svstokes", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated mesh.
    Gen(GenArgs),
    /// Full report: classification, trees, divergence rank, inf-sup, splines.
    Analyze(AnalyzeArgs),
    /// Randomized checks of every field construction on the mesh.
    VerifyFields(VerifyArgs),
    /// Divergence rank and inf-sup constant only.
    Infsup(AnalyzeArgs),
    /// Spline dimension arithmetic (needs the rank).
    SplineDim(AnalyzeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Crossed,
    Type1,
    Ngon,
    ThreeLines,
    Grid,
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    /// Grid cells per side, or rings for three-lines.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Valence for ngon.
    #[arg(long = "N", default_value_t = 6)]
    valence: usize,
    /// Half-diagonal (crossed), cell side (type1) or radius (ngon).
    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Jitter for grid, in cell widths.
    #[arg(long, default_value_t = 0.2)]
    amplitude: f64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long, default_value_t = Tolerances::default().singular)]
    tol_singular: f64,
    #[arg(long, default_value_t = Tolerances::default().decision)]
    tol_decision: f64,
    #[arg(long, default_value_t = Tolerances::default().accept)]
    tol_accept: f64,
    #[arg(long, default_value_t = Tolerances::default().rank)]
    tol_rank: f64,
}

impl TolArgs {
    fn get(&self) -> Result<Tolerances, Error> {
        let t = Tolerances {
            singular: self.tol_singular,
            decision: self.tol_decision,
            accept: self.tol_accept,
            rank: self.tol_rank,
        };
        for (name, v) in [("singular", t.singular), ("decision", t.decision), ("accept", t.accept), ("rank", t.rank)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("tolerance {name} must be a nonnegative number")));
            }
        }
        Ok(t)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the mesh, vertex classes and first spurious mode.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
    /// Classification and trees only.
    #[arg(long)]
    skip_solver: bool,
    /// Use the H1 seminorm for the inf-sup constant (scale invariant).
    #[arg(long)]
    seminorm: bool,
    /// Refuse meshes with more velocity unknowns than this.
    #[arg(long, default_value_t = SolverOptions::default().max_velocity_dofs)]
    max_dofs: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long, hide = true)]
    corrupt: bool,
}

fn preset(a: &GenArgs) -> Preset {
    match a.family {
        Family::Crossed => Preset::Crossed { n: a.n, l: a.l },
        Family::Type1 => Preset::Type1Diagonal { n: a.n, l: a.l },
        Family::Ngon => Preset::NgonPatch { n: a.valence, radius: a.l, radii: None, angles: None },
        Family::ThreeLines => Preset::ThreeLines { n: a.n },
        Family::Grid => Preset::PerturbedGrid { n: a.n, seed: a.seed, amplitude: a.amplitude },
    }
}

const PRESET_TAG: &str = "# preset ";

struct Loaded {
    topo: MeshTopology,
    family: Option<String>,
}

fn load(path: &Path) -> Result<Loaded, Error> {
    let text = std::fs::read_to_string(path)?;
    let family = text
        .lines()
        .find_map(|l| l.strip_prefix(PRESET_TAG))
        .and_then(|j| serde_json::from_str::<Preset>(j).ok())
        .map(|p| p.family().to_string());
    Ok(Loaded { topo: MeshTopology::new(load_mesh(&text)?)?, family })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

enum Failure {
    Error(Error),
    /// Output was written; exit with this code.
    Code(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::RankIndeterminate { .. } => EXIT_INDETERMINATE,
        Error::Parse { .. }
        | Error::InvalidMesh(_)
        | Error::Degenerate(_)
        | Error::NonManifold { .. }
        | Error::InvalidParams(_)
        | Error::NotSimplyConnected(_)
        | Error::Io(_) => EXIT_INPUT,
        _ => EXIT_INVARIANT,
    }
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let p = preset(a);
    let mesh = generate(&p)?;
    let text = format!("{PRESET_TAG}{}\n{}", serde_json::to_string(&p).expect("serializable"), write_mesh(&mesh));
    emit(a.out.as_deref(), &text)?;
    Ok(())
}

fn run_report(a: &AnalyzeArgs, skip_solver: bool) -> Result<(AnalysisReport, MeshTopology), Failure> {
    let l = load(&a.mesh)?;
    let opts = ReportOptions {
        tol: a.tol.get()?,
        skip_solver,
        norm: if a.seminorm { VelocityNorm::H1Seminorm } else { VelocityNorm::H1Full },
        max_velocity_dofs: a.max_dofs,
        family: l.family,
    };
    Ok((build_report(&l.topo, &opts)?, l.topo))
}

/// Exit status for a finished report: indeterminate rank beats invariant
/// violations, since the latter may be artifacts of the former.
fn report_status(r: &AnalysisReport) -> Result<(), Failure> {
    if r.rank_indeterminate() {
        eprintln!("rank indeterminate: singular-value gap below the required ratio");
        return Err(Failure::Code(EXIT_INDETERMINATE));
    }
    let v = r.violations();
    if !v.is_empty() {
        for m in &v {
            eprintln!("invariant violated: {m}");
        }
        return Err(Failure::Code(EXIT_INVARIANT));
    }
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let (report, topo) = run_report(a, a.skip_solver)?;
    emit(a.out.as_deref(), &json(&report))?;
    if let Some(path) = &a.svg {
        let mode = report.divergence.as_ref().and_then(|d| d.spurious_modes.first()).map(|m| m.vertex_values.as_slice());
        std::fs::write(path, render_svg(&topo, &report.vertices.reports, mode)).map_err(Error::from)?;
    }
    report_status(&report)
}

fn cmd_infsup(a: &AnalyzeArgs) -> Result<(), Failure> {
    let (report, _) = run_report(a, false)?;
    let out = serde_json::json!({ "divergence": report.divergence, "meta": report.meta });
    emit(a.out.as_deref(), &json(&out))?;
    report_status(&report)
}

fn cmd_spline_dim(a: &AnalyzeArgs) -> Result<(), Failure> {
    let (report, _) = run_report(a, false)?;
    if !report.mesh.simply_connected {
        return Err(Error::NotSimplyConnected(report.mesh.euler).into());
    }
    let out = serde_json::json!({ "mesh": report.mesh, "spline": report.spline, "meta": report.meta });
    emit(a.out.as_deref(), &json(&out))?;
    report_status(&report)
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let l = load(&a.mesh)?;
    let tol = a.tol.get()?;
    let classes = classify_mesh(&l.topo, &tol)?;
    let opts = SuiteOptions { samples: a.samples, seed: a.seed, corrupt: a.corrupt };
    let r = run_field_suites(&l.topo, &classes, &tol, &opts)?;
    let out = serde_json::json!({ "fields": r, "meta": { "version": VERSION, "tolerances": tol } });
    emit(a.out.as_deref(), &json(&out))?;
    if !r.pass {
        for s in r.suites.iter().filter(|s| !s.pass()) {
            eprintln!("suite {} failed {} of {} cases", s.name, s.failed, s.cases);
        }
        return Err(Failure::Code(EXIT_INVARIANT));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::VerifyFields(a) => cmd_verify(a),
        Cmd::Infsup(a) => cmd_infsup(a),
        Cmd::SplineDim(a) => cmd_spline_dim(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Code(c)) => ExitCode::from(c),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
