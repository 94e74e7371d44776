use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use kdyn_core::arith::{parse_rational, Deadline, Rational};
use kdyn_core::catalog::{amplified_building_block, BuildingBlockKind};
use kdyn_core::cone::faithful_functional_with_deadline;
use kdyn_core::dynamics::{
    check_coboundary_with_deadline, check_pimsner_with_deadline, invariant_quotient_with_deadline,
    mf_witness_with_deadline, validate_action, validate_endomorphism, CoboundaryVerdict, FreeGroupAction,
};
use kdyn_core::error::Error;
use kdyn_core::order::{GroupElement, OrderedGroup};
use kdyn_core::schema::{self, Document, SCHEMA};
use kdyn_core::states::{approximate_state_sequence_with_deadline, state_preserving_with_deadline};
use kdyn_core::verify::verify;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_FAILS: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "kdyn", version, about = "Decide dynamical conditions on ordered abelian groups with checkable certificates")]
struct Cli {
    /// Soft deadline in seconds (overrides KDYN_DEADLINE_SECS).
    #[arg(long, global = true)]
    deadline: Option<f64>,

    /// Write output here instead of stdout (a directory in batch mode).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Run the command on every *.json file in a directory.
    #[arg(long, global = true)]
    batch: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Validation report for an ordered group.
    Validate { group: Option<PathBuf> },
    /// Decide the coboundary condition for an action (exit 3 when it fails).
    CheckCoboundary { action: Option<PathBuf> },
    /// Integer orbit-constant functional positive on a set.
    Witness {
        action: Option<PathBuf>,
        #[arg(long)]
        set: Option<PathBuf>,
    },
    /// Faithful state normalized at the unit.
    FaithfulState { group: Option<PathBuf> },
    /// State close to a target on a finite set, optionally invariant.
    StatePreserving {
        group: Option<PathBuf>,
        #[arg(long)]
        beta: PathBuf,
        #[arg(long)]
        action: Option<PathBuf>,
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long, default_value = "1/1000000")]
        eps: String,
    },
    /// Quotient by the coboundary subgroup with the image order.
    Quotient { action: Option<PathBuf> },
    /// Decide the Pimsner condition for an endomorphism (exit 3 when it fails).
    Pimsner { endomorphism: Option<PathBuf> },
    /// Approximate state stages as JSON lines.
    Sequence {
        group: Option<PathBuf>,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        action: Option<PathBuf>,
        #[arg(long)]
        enumeration: Option<PathBuf>,
    },
    /// Building-block group: point, circle, wn N, dimension-drop N.
    Catalog {
        kind: String,
        n: Option<u32>,
        #[arg(long, default_value_t = 1)]
        amplify: u32,
    },
    /// Re-check a certificate against its instance.
    Verify { certificate: PathBuf, instance: PathBuf },
    /// Execute a task bundle.
    Run { task: PathBuf },
}

/// What a command produced: documents to print and the exit code.
struct Outcome {
    docs: Vec<Value>,
    lines: bool,
    code: u8,
}

impl Outcome {
    fn one(doc: Value, code: u8) -> Self {
        Outcome {
            docs: vec![doc],
            lines: false,
            code,
        }
    }

    fn render(&self) -> String {
        if self.lines {
            self.docs
                .iter()
                .map(|d| serde_json::to_string(d).expect("serializable") + "\n")
                .collect()
        } else {
            self.docs.iter().map(schema::to_canonical_string).collect()
        }
    }
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) => match e {
                Error::CoboundaryFails(_) => EXIT_FAILS,
                Error::Unsupported(_) | Error::DeadlineExceeded | Error::Internal(_) => EXIT_INTERNAL,
                _ => EXIT_VALIDATION,
            },
        }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({"schema": SCHEMA, "kind": "error", "exit_code": self.code()});
        match self {
            Failure::Usage(m) => v["message"] = json!(m),
            Failure::Core(e) => {
                v["message"] = json!(e.to_string());
                if let Error::Schema { path, .. } = e {
                    v["path"] = json!(path);
                }
            }
        }
        v
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read_json(path: &Path) -> Res<Value> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Core(Error::schema("/", format!("{}: {e}", path.display()))))
}

/// JSON documents in a file; a `.jsonl` file or multi-line stream yields several.
fn read_json_stream(path: &Path) -> Res<Vec<Value>> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::Deserializer::from_str(&text)
        .into_iter::<Value>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Failure::Core(Error::schema("/", format!("{}: {e}", path.display()))))
}

fn required(p: &Option<PathBuf>, what: &str) -> Res<PathBuf> {
    p.clone().ok_or_else(|| Failure::Usage(format!("missing {what} argument")))
}

fn group_doc(v: &Value) -> Res<OrderedGroup> {
    match schema::ingest(v)? {
        Document::Group(g) => Ok(g),
        Document::Action(g, _) | Document::Endomorphism(g, _) => Ok(g),
        _ => Err(Failure::Core(Error::schema("/kind", "expected a group document"))),
    }
}

fn action_doc(v: &Value) -> Res<(OrderedGroup, FreeGroupAction)> {
    let (g, a) = schema::action_of(v, "")?;
    g.validate_structure()?;
    validate_action(&a, &g)?;
    Ok((g, a))
}

fn set_doc(v: &Value, g: &OrderedGroup) -> Res<Vec<GroupElement>> {
    Ok(schema::set_of(v, "", g)?)
}

fn rational_arg(s: &str) -> Res<Rational> {
    parse_rational(s).ok_or_else(|| Failure::Usage(format!("bad rational {s:?}")))
}

/// Inputs already loaded from disk.
struct Inputs {
    primary: Value,
    beta: Option<Value>,
    action: Option<Value>,
    set: Option<Value>,
    eps: Option<Rational>,
    n_max: Option<usize>,
}

fn dispatch(command: &str, inp: &Inputs, deadline: &Deadline) -> Res<Outcome> {
    match command {
        "validate" => {
            let g = schema::group_of(&inp.primary, "")?;
            let report = g.inspect()?;
            let code = if report.is_valid() { EXIT_OK } else { EXIT_VALIDATION };
            Ok(Outcome::one(schema::validation_json(&report), code))
        }
        "check-coboundary" => {
            let (g, a) = action_doc(&inp.primary)?;
            let v = check_coboundary_with_deadline(&a, &g, deadline)?;
            let code = if v.holds() { EXIT_OK } else { EXIT_FAILS };
            Ok(Outcome::one(schema::verdict_json("coboundary_verdict", &v, &g)?, code))
        }
        "witness" => {
            let (g, a) = action_doc(&inp.primary)?;
            let set = inp.set.as_ref().map(|s| set_doc(s, &g)).transpose()?;
            let w = mf_witness_with_deadline(&a, &g, set, deadline)?;
            Ok(Outcome::one(schema::witness_json(&w, &g)?, EXIT_OK))
        }
        "faithful-state" => {
            let g = group_doc(&inp.primary)?;
            let f = faithful_functional_with_deadline(&g, deadline)?;
            Ok(Outcome::one(schema::faithful_json(&f, &g)?, EXIT_OK))
        }
        "state-preserving" => {
            let g = group_doc(&inp.primary)?;
            let action = inp.action.as_ref().map(action_doc).transpose()?;
            if let Some((ag, _)) = &action {
                if ag != &g {
                    return Err(Failure::Core(Error::InvalidAction(
                        "the action is defined on a different group".into(),
                    )));
                }
            }
            let beta_v = inp.beta.as_ref().ok_or_else(|| Failure::Usage("missing --beta".into()))?;
            let beta = schema::state_of(beta_v, "", &g)?;
            let set = match &inp.set {
                Some(s) => set_doc(s, &g)?,
                None => {
                    let mut s = vec![g.unit.clone()];
                    s.extend(g.cone_generators()?);
                    s
                }
            };
            let eps = inp.eps.clone().unwrap_or_else(|| Rational::new(1.into(), 1_000_000.into()));
            let sigma = action.as_ref().map(|(_, a)| a);
            let r = state_preserving_with_deadline(&g, sigma, &beta, &set, &eps, deadline)?;
            Ok(Outcome::one(schema::state_preserving_json(&r, &beta, &set, &g)?, EXIT_OK))
        }
        "quotient" => {
            let (g, a) = action_doc(&inp.primary)?;
            let q = invariant_quotient_with_deadline(&a, &g, deadline)?;
            Ok(Outcome::one(schema::quotient_json(&q), EXIT_OK))
        }
        "pimsner" => {
            let (g, h) = schema::endomorphism_of(&inp.primary, "")?;
            validate_endomorphism(&h, &g)?;
            let v = check_pimsner_with_deadline(&h, &g, deadline)?;
            let code = match v {
                CoboundaryVerdict::Holds { .. } => EXIT_OK,
                CoboundaryVerdict::Fails { .. } => EXIT_FAILS,
            };
            Ok(Outcome::one(schema::verdict_json("pimsner_verdict", &v, &g)?, code))
        }
        "sequence" => {
            let g = group_doc(&inp.primary)?;
            let n_max = inp.n_max.ok_or_else(|| Failure::Usage("missing --n-max".into()))?;
            if n_max < 1 {
                return Err(Failure::Usage("--n-max must be at least 1".into()));
            }
            let action = inp.action.as_ref().map(action_doc).transpose()?;
            let enumeration = inp.set.as_ref().map(|s| set_doc(s, &g)).transpose()?;
            let stages = approximate_state_sequence_with_deadline(
                &g,
                enumeration,
                n_max,
                action.as_ref().map(|(_, a)| a),
                deadline,
            )?;
            let docs = stages
                .iter()
                .map(|s| schema::stage_record_json(s, &g))
                .collect::<kdyn_core::error::Result<Vec<_>>>()?;
            let code = if stages.iter().all(|s| s.is_sound()) { EXIT_OK } else { EXIT_VALIDATION };
            Ok(Outcome {
                docs,
                lines: true,
                code,
            })
        }
        other => Err(Failure::Usage(format!("unknown command {other:?}"))),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::CheckCoboundary { .. } => "check-coboundary",
        Command::Witness { .. } => "witness",
        Command::FaithfulState { .. } => "faithful-state",
        Command::StatePreserving { .. } => "state-preserving",
        Command::Quotient { .. } => "quotient",
        Command::Pimsner { .. } => "pimsner",
        Command::Sequence { .. } => "sequence",
        Command::Catalog { .. } => "catalog",
        Command::Verify { .. } => "verify",
        Command::Run { .. } => "run",
    }
}

/// Loads everything except the primary instance.
fn side_inputs(c: &Command) -> Res<Inputs> {
    let opt = |p: &Option<PathBuf>| p.as_deref().map(read_json).transpose();
    let mut inp = Inputs {
        primary: Value::Null,
        beta: None,
        action: None,
        set: None,
        eps: None,
        n_max: None,
    };
    match c {
        Command::Witness { set, .. } => inp.set = opt(set)?,
        Command::StatePreserving {
            beta, action, set, eps, ..
        } => {
            inp.beta = Some(read_json(beta)?);
            inp.action = opt(action)?;
            inp.set = opt(set)?;
            inp.eps = Some(rational_arg(eps)?);
            if !inp.eps.as_ref().is_some_and(|e| e > &Rational::from_integer(0.into())) {
                return Err(Failure::Usage("--eps must be positive".into()));
            }
        }
        Command::Sequence {
            n_max,
            action,
            enumeration,
            ..
        } => {
            inp.n_max = Some(*n_max);
            inp.action = opt(action)?;
            inp.set = opt(enumeration)?;
        }
        _ => {}
    }
    Ok(inp)
}

fn primary_path(c: &Command) -> Option<&Option<PathBuf>> {
    match c {
        Command::Validate { group }
        | Command::FaithfulState { group }
        | Command::StatePreserving { group, .. }
        | Command::Sequence { group, .. } => Some(group),
        Command::CheckCoboundary { action } | Command::Witness { action, .. } | Command::Quotient { action } => {
            Some(action)
        }
        Command::Pimsner { endomorphism } => Some(endomorphism),
        _ => None,
    }
}

fn run_task(path: &Path, deadline: &Deadline) -> Res<Outcome> {
    let v = read_json(path)?;
    let Document::Task(t) = schema::ingest(&v)? else {
        return Err(Failure::Core(Error::schema("/kind", "expected a task document")));
    };
    let inp = Inputs {
        primary: t.instance,
        beta: t.beta,
        action: None,
        set: t.set,
        eps: t.epsilon,
        n_max: t.n_max,
    };
    dispatch(&t.command, &inp, deadline)
}

fn verify_command(cert: &Path, instance: &Path) -> Res<Outcome> {
    let certs = read_json_stream(cert)?;
    let inst = read_json(instance)?;
    if certs.is_empty() {
        return Err(Failure::Usage(format!("{}: no certificate found", cert.display())));
    }
    let mut docs = Vec::new();
    let mut accepted = true;
    for c in &certs {
        let r = verify(c, &inst)?;
        accepted &= r.ok();
        docs.push(json!({
            "schema": SCHEMA,
            "kind": "verification",
            "certificate_kind": r.kind,
            "accepted": r.ok(),
            "checks": r.checks.iter().map(|c| json!({"name": c.name, "ok": c.ok, "detail": c.detail})).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome {
        lines: docs.len() > 1,
        docs,
        code: if accepted { EXIT_OK } else { EXIT_VALIDATION },
    })
}

fn catalog_command(kind: &str, n: Option<u32>, amplify: u32) -> Res<Outcome> {
    if amplify == 0 {
        return Err(Failure::Usage("--amplify must be at least 1".into()));
    }
    let kind = match kind.split_once(':') {
        Some(_) => kind.parse::<BuildingBlockKind>(),
        None => BuildingBlockKind::parse(kind, n),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let g = amplified_building_block(kind, amplify);
    Ok(Outcome::one(schema::group_json(&g), EXIT_OK))
}

fn deadline_from(secs: Option<f64>) -> Res<Option<Duration>> {
    let secs = match secs {
        Some(s) => Some(s),
        None => match std::env::var("KDYN_DEADLINE_SECS") {
            Ok(s) if !s.trim().is_empty() => Some(
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::Usage(format!("bad KDYN_DEADLINE_SECS {s:?}")))?,
            ),
            _ => None,
        },
    };
    match secs {
        Some(s) if !(s.is_finite() && s > 0.0) => Err(Failure::Usage("deadline must be positive".into())),
        Some(s) => Ok(Some(Duration::from_secs_f64(s))),
        None => Ok(None),
    }
}

fn fresh(d: Option<Duration>) -> Deadline {
    d.map_or_else(Deadline::none, Deadline::after)
}

fn emit(out: &Outcome, path: Option<&Path>) -> Res<()> {
    let text = out.render();
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn batch(cli: &Cli, dir: &Path, budget: Option<Duration>) -> Res<u8> {
    let name = command_name(&cli.command);
    if primary_path(&cli.command).is_none() && !matches!(cli.command, Command::Run { .. }) {
        return Err(Failure::Usage(format!("{name} does not support --batch")));
    }
    let side = side_inputs(&cli.command)?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let out_dir = cli.output.clone().unwrap_or_else(|| dir.join("results"));
    fs::create_dir_all(&out_dir).map_err(|e| Failure::Usage(format!("{}: {e}", out_dir.display())))?;
    let results: Vec<(PathBuf, u8, Value)> = files
        .par_iter()
        .map(|f| {
            let deadline = fresh(budget);
            let res = if matches!(cli.command, Command::Run { .. }) {
                run_task(f, &deadline)
            } else {
                read_json(f).and_then(|primary| {
                    let inp = Inputs {
                        primary,
                        beta: side.beta.clone(),
                        action: side.action.clone(),
                        set: side.set.clone(),
                        eps: side.eps.clone(),
                        n_max: side.n_max,
                    };
                    dispatch(name, &inp, &deadline)
                })
            };
            let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let target = out_dir.join(format!("{stem}.{name}.json"));
            let (code, written) = match res {
                Ok(o) => match emit(&o, Some(&target)) {
                    Ok(()) => (o.code, Some(target)),
                    Err(e) => (e.code(), None),
                },
                Err(e) => {
                    let o = Outcome::one(e.to_json(), e.code());
                    let _ = emit(&o, Some(&target));
                    (e.code(), Some(target))
                }
            };
            let summary = json!({
                "input": f.display().to_string(),
                "output": written.map(|p| p.display().to_string()),
                "exit_code": code,
            });
            (f.clone(), code, summary)
        })
        .collect();
    for (_, _, s) in &results {
        println!("{}", serde_json::to_string(s).expect("serializable"));
    }
    Ok(results.iter().map(|(_, c, _)| *c).max().unwrap_or(EXIT_OK))
}

fn real_main() -> Res<u8> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return Ok(code);
        }
    };
    let budget = deadline_from(cli.deadline)?;
    if let Some(dir) = &cli.batch {
        return batch(&cli, dir, budget);
    }
    let deadline = fresh(budget);
    let out = match &cli.command {
        Command::Catalog { kind, n, amplify } => catalog_command(kind, *n, *amplify)?,
        Command::Verify { certificate, instance } => verify_command(certificate, instance)?,
        Command::Run { task } => run_task(task, &deadline)?,
        c => {
            let path = required(primary_path(c).expect("instance command"), "instance")?;
            let mut inp = side_inputs(c)?;
            inp.primary = read_json(&path)?;
            dispatch(command_name(c), &inp, &deadline)?
        }
    };
    emit(&out, cli.output.as_deref())?;
    Ok(out.code)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.to_json()).expect("serializable"));
            ExitCode::from(e.code())
        }
    }
}
