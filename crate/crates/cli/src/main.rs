mod plot;

use std::error::Error;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use pinchlab_core::mesh::{parse_mesh_json, parse_off, to_mesh_json, ImmersedMesh};
use pinchlab_core::report::{self, AnalysisOptions, BasePoint, MeshSpec, PinchingReport, Provenance, SweepRow};

type Outcome = Result<ExitCode, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "pinchlab", version, about = "Pinching invariants of closed surfaces in space forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test surface and write it as mesh JSON.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full analysis on a mesh file and emit a JSON report.
    Analyze {
        mesh: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a generated family over a parameter range; writes a CSV table
    /// and two SVG plots.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        /// Parameter to vary: delta, rho, amplitude, subdiv, c (third
        /// ellipsoid semiaxis), major or minor.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values (at least three).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Check the asserted inequalities on a mesh; exit 1 if any fails.
    Verify {
        mesh: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Sphere,
    Perturbed,
    Ellipsoid,
    Torus,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Ambient curvature.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    /// Geodesic radius of the (base) sphere.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    rho: f64,
    /// Relative amplitude of the spherical-harmonic bump.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    amplitude: f64,
    /// Harmonic degree and order as `l,m`.
    #[arg(long, default_value = "3,1", value_parser = parse_harmonic, allow_hyphen_values = true)]
    harmonic: (u32, i32),
    #[arg(long, default_value_t = 4)]
    subdiv: u32,
    /// Ellipsoid semiaxes `a,b,c`.
    #[arg(long, default_value = "1,1,1.3", value_parser = parse_axes)]
    axes: [f64; 3],
    #[arg(long, default_value_t = 1.0)]
    major: f64,
    #[arg(long, default_value_t = 0.4)]
    minor: f64,
    /// Torus grid resolution.
    #[arg(long, default_value_t = 48)]
    resolution: usize,
}

impl FamilyArgs {
    fn spec(&self) -> MeshSpec {
        match self.family {
            Family::Sphere => MeshSpec::Sphere { delta: self.delta, rho: self.rho, subdiv: self.subdiv },
            Family::Perturbed => MeshSpec::Perturbed {
                delta: self.delta,
                rho: self.rho,
                amplitude: self.amplitude,
                harmonic: self.harmonic,
                subdiv: self.subdiv,
            },
            Family::Ellipsoid => MeshSpec::Ellipsoid { axes: self.axes, subdiv: self.subdiv },
            Family::Torus => MeshSpec::Torus { major: self.major, minor: self.minor, resolution: self.resolution },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BasePointArg {
    Mass,
    Minimax,
    Coords,
}

#[derive(Args)]
struct AnalysisArgs {
    #[arg(long, default_value_t = 4.0)]
    q: f64,
    #[arg(long, default_value_t = 4.0)]
    r: f64,
    /// Exponent for `|H|_s`; `inf` for the sup norm.
    #[arg(long, default_value = "inf")]
    s: f64,
    /// Lower bound on the sectional curvature; defaults to delta.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, value_enum, default_value = "mass")]
    base_point: BasePointArg,
    /// Base point coordinates for `--base-point coords`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coords: Vec<f64>,
    /// Sphere samples for the Hausdorff estimate.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

impl AnalysisArgs {
    fn options(&self) -> Result<AnalysisOptions, Box<dyn Error>> {
        let base_point = match self.base_point {
            BasePointArg::Mass => BasePoint::CenterOfMass,
            BasePointArg::Minimax => BasePoint::Minimax,
            BasePointArg::Coords if self.coords.is_empty() => {
                return Err("--base-point coords needs --coords x,y,z[,w]".into())
            }
            BasePointArg::Coords => BasePoint::Coords(self.coords.clone()),
        };
        if !self.coords.is_empty() && !matches!(self.base_point, BasePointArg::Coords) {
            return Err("--coords only applies with --base-point coords".into());
        }
        Ok(AnalysisOptions {
            q: self.q,
            r: self.r,
            s: self.s.is_finite().then_some(self.s),
            mu: self.mu,
            base_point,
            samples: self.samples,
        })
    }
}

fn parse_harmonic(s: &str) -> Result<(u32, i32), String> {
    let (l, m) = s.split_once(',').ok_or("expected l,m")?;
    Ok((
        l.trim().parse().map_err(|e| format!("degree {l:?}: {e}"))?,
        m.trim().parse().map_err(|e| format!("order {m:?}: {e}"))?,
    ))
}

fn parse_axes(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected three semiaxes a,b,c".to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Box<dyn Error>> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Reads a mesh file and returns it together with its file provenance.
fn read_mesh(path: &Path) -> Result<(ImmersedMesh, Provenance), Box<dyn Error>> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    let is_off = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("off"));
    let mesh = if is_off { parse_off(text) } else { parse_mesh_json(text) }
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let provenance = Provenance::File {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok((mesh, provenance))
}

fn cmd_gen(family: &FamilyArgs, out: Option<&Path>) -> Outcome {
    let mesh = family.spec().generate()?;
    emit(&to_mesh_json(&mesh), out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(path: &Path, analysis: &AnalysisArgs, out: Option<&Path>) -> Outcome {
    let opts = analysis.options()?;
    let (mesh, provenance) = read_mesh(path)?;
    let rep = report::analyze(&mesh, provenance, &opts)?;
    emit(&report::to_json(&rep), out)?;
    Ok(ExitCode::SUCCESS)
}

/// Scale-free closeness measures of one sweep row: `(eps_I, h d_H, distortion)`.
fn trend(rep: &PinchingReport) -> (f64, f64, f64) {
    (
        rep.gaps.eps_i,
        rep.gaps.h * rep.comparison.hausdorff.d_h,
        rep.comparison.distortion.distortion,
    )
}

/// CSV text of a sweep: `parameter,value,error` followed by the flattened
/// report columns, in first-seen order.
fn sweep_csv(rows: &[SweepRow]) -> Result<String, Box<dyn Error>> {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| {
            r.report
                .as_ref()
                .map(|rep| report::flatten(&serde_json::to_value(rep).expect("reports serialize")))
                .unwrap_or_default()
        })
        .collect();
    let mut columns: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for row in &flat {
        for (k, _) in row {
            if seen.insert(k.clone()) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["parameter".to_string(), "value".to_string(), "error".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for (row, cells) in rows.iter().zip(&flat) {
        let map: std::collections::HashMap<&str, &str> = cells.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let mut rec = vec![row.parameter.clone(), format!("{:.16e}", row.value), row.error.clone().unwrap_or_default()];
        rec.extend(columns.iter().map(|c| map.get(c.as_str()).copied().unwrap_or("").to_string()));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn cmd_sweep(family: &FamilyArgs, param: &str, values: &[f64], analysis: &AnalysisArgs, out_dir: &Path) -> Outcome {
    let opts = analysis.options()?;
    let rows = report::sweep(&family.spec(), param, values, &opts)?;
    fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    let write = |name: &str, text: &str| -> Result<(), Box<dyn Error>> {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()).into())
    };
    write("sweep.csv", &sweep_csv(&rows)?)?;

    let trends: Vec<(f64, f64, f64)> = rows.iter().filter_map(|r| r.report.as_ref().map(trend)).collect();
    let hd: Vec<(f64, f64)> = trends.iter().map(|t| (t.1, t.0)).collect();
    let dist: Vec<(f64, f64)> = trends.iter().map(|t| (t.2, t.0)).collect();
    write("eps_i_vs_hausdorff.svg", &plot::loglog_svg("eps_I against h d_H", "h d_H", "eps_I", &hd))?;
    write("eps_i_vs_distortion.svg", &plot::loglog_svg("eps_I against distortion", "distortion", "eps_I", &dist))?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "{:>12} {:>12} {:>12} {:>12}  status", param, "eps_I", "h d_H", "distortion")?;
    for r in &rows {
        match (&r.report, &r.error) {
            (Some(rep), _) => {
                let (e, hd, d) = trend(rep);
                let status = if rep.all_pass() { "ok" } else { "verdict failure" };
                writeln!(out, "{:>12.6} {e:>12.4e} {hd:>12.4e} {d:>12.4e}  {status}", r.value)?;
            }
            (None, Some(err)) => writeln!(out, "{:>12.6} error: {err}", r.value)?,
            (None, None) => unreachable!("a row has a report or an error"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &Path, analysis: &AnalysisArgs) -> Outcome {
    let opts = analysis.options()?;
    let (mesh, provenance) = read_mesh(path)?;
    let rep = report::analyze(&mesh, provenance, &opts)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:<28} {:>14} {:>14} {:>9}  result", "check", "lhs", "rhs", "tol")?;
    for v in rep.verdicts.all() {
        let result = match (v.applicable, v.pass) {
            (false, _) => "n/a",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        writeln!(out, "{:<28} {:>14.6e} {:>14.6e} {:>9.3} {result}", v.name, v.lhs, v.rhs, v.tolerance)?;
    }
    let sw = &rep.comparison.sandwich;
    writeln!(
        out,
        "{:<28} {:>14.6e} {:>14.6e} {:>9.3} {}",
        "sandwich (min slack)",
        sw.lower_slack.min(sw.upper_slack),
        0.0,
        sw.tolerance,
        if sw.pass { "pass" } else { "FAIL" }
    )?;
    Ok(if rep.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen { family, out } => cmd_gen(family, out.as_deref()),
        Command::Analyze { mesh, analysis, out } => cmd_analyze(mesh, analysis, out.as_deref()),
        Command::Sweep { family, param, values, analysis, out_dir } => {
            cmd_sweep(family, param, values, analysis, out_dir)
        }
        Command::Verify { mesh, analysis } => cmd_verify(mesh, analysis),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
