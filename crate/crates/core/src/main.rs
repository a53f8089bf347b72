//! conesmith: exact lattice/cone/toric analysis from the command line.
//!
//! Deterministic JSON reports on stdout, a one-line human summary on stderr.
//! Exit codes: 0 success or certificate, 1 usage error, 2 analysis refusal,
//! 3 certificate failure.

use clap::{Args, Parser, Subcommand};
use conesmith::k3::{main_theorem_probe, standard_scenario};
use conesmith::linalg::{bint, IntVec};
use conesmith::perfect::{default_height, verify_perfect_canonical, SelfAdjointConeModel, Window};
use conesmith::quotient::{quotient_analysis, KltOutcome, DEFAULT_GROUP_BOUND};
use conesmith::report;
use conesmith::scene::{load_cone_file, load_fan_file, load_group_file, load_lattice, SceneFile};
use conesmith::toric::{fan_singularity_verdict, singularity_verdict};
use conesmith::Error;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_REFUSAL: u8 = 2;
const EXIT_CERTIFICATE_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "conesmith",
    about = "Exact arithmetic for lattices, rational cones, toric singularities, \
             perfect cone decompositions and finite quotient certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Singularity verdict for a cone or a fan.
    AnalyzeCone(AnalyzeConeArgs),
    /// Local perfect cone decomposition of a self-adjoint cone.
    PerfectFan(PerfectFanArgs),
    /// Quotient analysis of a toric cone by a finite matrix group.
    Quotient(QuotientArgs),
    /// Polarized K3 lattice scenario for a given half-degree d.
    K3(K3Args),
    /// Reproduce the worked quotient example end to end.
    PaperExample,
    /// Validate a scene file and print diagnostics.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct AnalyzeConeArgs {
    /// Cone file: JSON {"generators": [[..]]}.
    #[arg(long)]
    cone: Option<PathBuf>,
    /// Fan file: JSON {"cones": [[[..]]]} (maximal cones; faces are added).
    #[arg(long)]
    fan: Option<PathBuf>,
}

#[derive(Args)]
struct PerfectFanArgs {
    /// Cone model: "lorentzian" or "psd".
    #[arg(long)]
    model: String,
    /// Lattice file or built-in name (lorentzian model).
    #[arg(long)]
    lattice: Option<String>,
    /// Number of form variables (psd model).
    #[arg(long)]
    g: Option<usize>,
    /// Window cone file: JSON {"generators": [[..]]}.
    #[arg(long)]
    window: PathBuf,
    /// Sample height bound (default: 6 for Lorentzian rank <= 3, 4 otherwise).
    #[arg(long)]
    height: Option<i64>,
    /// Component-selecting interior point, comma-separated (lorentzian).
    #[arg(long)]
    component: Option<String>,
}

#[derive(Args)]
struct QuotientArgs {
    /// Cone file: JSON {"generators": [[..]]}.
    #[arg(long)]
    cone: PathBuf,
    /// Group file: JSON list of integer generator matrices.
    #[arg(long)]
    group: PathBuf,
}

#[derive(Args)]
struct K3Args {
    /// Polarization half-degree.
    #[arg(long)]
    d: i64,
    /// Height bound for the reflection-lifting probe (0 = skip).
    #[arg(long, default_value_t = 0)]
    probe_height: i64,
    /// Search bound for each reflection lift.
    #[arg(long, default_value_t = 4)]
    lift_bound: i64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scene file to check.
    scene: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                // --help / --version print on stdout and succeed.
                ExitCode::from(EXIT_OK)
            };
        }
    };
    match run(cli) {
        Ok((value, code, summary)) => {
            print!("{}", report::to_pretty_string(&value));
            eprintln!("{summary}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::CertificateFailure { .. } => EXIT_CERTIFICATE_FAILURE,
                Error::GroupDoesNotAct => EXIT_REFUSAL,
                _ => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> conesmith::Result<(Value, u8, String)> {
    match cli.command {
        Command::AnalyzeCone(args) => analyze_cone(args),
        Command::PerfectFan(args) => perfect_fan(args),
        Command::Quotient(args) => quotient(args),
        Command::K3(args) => k3(args),
        Command::PaperExample => {
            let value = report::paper_example()?;
            let summary = summarize_quotient(&value["report"]);
            Ok((value, EXIT_OK, summary))
        }
        Command::Validate(args) => validate(args),
    }
}

fn analyze_cone(args: AnalyzeConeArgs) -> conesmith::Result<(Value, u8, String)> {
    match (&args.cone, &args.fan) {
        (Some(path), None) => {
            let cone = load_cone_file(path)?;
            let verdict = singularity_verdict(&cone)?;
            let summary = format!(
                "analyze-cone: q_gorenstein={} canonical={}{}",
                verdict.is_q_gorenstein(),
                verdict.is_canonical(),
                verdict
                    .gorenstein_index
                    .as_ref()
                    .map(|i| format!(" index={i}"))
                    .unwrap_or_default()
            );
            let body = json!({
                "cone": report::cone_value(&cone),
                "verdict": report::verdict_value(&verdict),
            });
            Ok((
                report::command_report("analyze-cone", body),
                EXIT_OK,
                summary,
            ))
        }
        (None, Some(path)) => {
            let fan = load_fan_file(path)?;
            let verdict = fan_singularity_verdict(&fan)?;
            let summary = format!(
                "analyze-cone: fan with {} maximal cones, q_gorenstein={} canonical={}",
                verdict.per_cone.len(),
                verdict.q_gorenstein,
                verdict.canonical
            );
            let body = json!({
                "fan": {
                    "cones": fan.cones().len(),
                    "maximal_cones": verdict.per_cone.len(),
                },
                "per_cone": Value::Array(
                    verdict.per_cone.iter().map(report::verdict_value).collect()
                ),
                "q_gorenstein": verdict.q_gorenstein,
                "canonical": verdict.canonical,
            });
            Ok((
                report::command_report("analyze-cone", body),
                EXIT_OK,
                summary,
            ))
        }
        _ => Err(Error::Other(
            "analyze-cone needs exactly one of --cone or --fan".into(),
        )),
    }
}

fn parse_component(text: &str) -> conesmith::Result<IntVec> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map(bint)
                .map_err(|_| Error::Other(format!("bad component entry '{t}'")))
        })
        .collect()
}

fn perfect_fan(args: PerfectFanArgs) -> conesmith::Result<(Value, u8, String)> {
    let model = match args.model.as_str() {
        "lorentzian" => {
            let name = args.lattice.as_deref().ok_or_else(|| {
                Error::Other("--lattice is required for the lorentzian model".into())
            })?;
            let lattice = load_lattice(name)?;
            match &args.component {
                Some(text) => SelfAdjointConeModel::lorentzian(lattice, parse_component(text)?)?,
                None => SelfAdjointConeModel::lorentzian_auto(lattice)?,
            }
        }
        "psd" => {
            let g = args
                .g
                .ok_or_else(|| Error::Other("--g is required for the psd model".into()))?;
            SelfAdjointConeModel::psd(g)
        }
        other => {
            return Err(Error::Other(format!(
                "unknown model '{other}' (expected lorentzian or psd)"
            )))
        }
    };
    let window_cone = load_cone_file(&args.window)?;
    let window = Window::new(&model, window_cone)?;
    let height = args.height.unwrap_or_else(|| default_height(&model));
    let result = verify_perfect_canonical(&model, &window, height)?;
    let ok = result.falsification_witnesses.is_empty();
    let summary = format!(
        "perfect-fan: {} facets, all_q_gorenstein={} all_canonical={}",
        result.piece.facets.len(),
        result.all_q_gorenstein,
        result.all_canonical
    );
    let body = json!({
        "model": report::model_value(&model),
        "window": report::cone_value(&window.cone),
        "result": report::perfect_canonical_value(&result),
    });
    let code = if ok { EXIT_OK } else { EXIT_REFUSAL };
    Ok((report::command_report("perfect-fan", body), code, summary))
}

fn quotient(args: QuotientArgs) -> conesmith::Result<(Value, u8, String)> {
    let cone = load_cone_file(&args.cone)?;
    let generators = load_group_file(&args.group)?;
    let analysis = quotient_analysis(&cone, &generators, DEFAULT_GROUP_BOUND)?;
    let certified = matches!(analysis.klt, KltOutcome::Certificate(_));
    let body = report::quotient_value(&cone, &analysis);
    let summary = summarize_quotient(&body);
    let code = if certified { EXIT_OK } else { EXIT_REFUSAL };
    Ok((report::command_report("quotient", body), code, summary))
}

fn summarize_quotient(body: &Value) -> String {
    format!(
        "quotient: canonical={} group_order={} reflections={} klt_certificate={}",
        body["verdict"]["canonical"]["status"]
            .as_str()
            .unwrap_or("?"),
        body["group_order"],
        body["ramification"]
            .as_array()
            .map(|a| a.len())
            .unwrap_or(0),
        body["klt"]["certificate"]
    )
}

fn k3(args: K3Args) -> conesmith::Result<(Value, u8, String)> {
    let scenario = standard_scenario(args.d)?;
    let probe = if args.probe_height > 0 {
        Some(main_theorem_probe(
            &scenario.isotropic,
            args.probe_height,
            args.lift_bound,
        )?)
    } else {
        None
    };
    let body = report::scenario_value(&scenario, Some(args.d), probe.as_ref());
    let summary = format!(
        "k3: d={} rank={} signature=(2,19) discriminant_order={}",
        args.d,
        scenario.lattice.rank(),
        2 * args.d
    );
    Ok((report::command_report("k3", body), EXIT_OK, summary))
}

fn validate(args: ValidateArgs) -> conesmith::Result<(Value, u8, String)> {
    let scene = SceneFile::from_path(&args.scene)?;
    let diagnostics = scene.validate();
    let ok = diagnostics.is_empty();
    let body = json!({
        "file": args.scene.display().to_string(),
        "ok": ok,
        "diagnostics": diagnostics
            .iter()
            .map(|d| json!({"field": d.field, "message": d.message}))
            .collect::<Vec<_>>(),
    });
    let summary = if ok {
        "validate: ok".to_string()
    } else {
        format!("validate: {} problem(s) found", diagnostics.len())
    };
    let code = if ok { EXIT_OK } else { EXIT_USAGE };
    Ok((report::command_report("validate", body), code, summary))
}
