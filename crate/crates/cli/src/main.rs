//! `tlj`: checks and constructions for graph-generated Temperley-Lieb-Jones
//! categories, reading and writing JSON documents.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tlj_core::classify::{graph_from_solution, solution_from_graph, solutions_equivalent, ClassifyError};
use tlj_core::diagram::DiagramError;
use tlj_core::fair::{balance_analysis, check_fair, FairError, FairGraph};
use tlj_core::families::{a_path_delta, generate_family, Family};
use tlj_core::functor::{evaluate_functor, FunctorError};
use tlj_core::graph::{standard_gamma, validate_bigraph, BiGraph, BiGraphData, GraphError, StandardKind};
use tlj_core::io::{
    block_operator_json, fair_graph_document, gamma_document, read_document, read_fair_graph, read_gamma,
    read_morphism, read_solution, report_document, serialize, solution_document, witness_document, Document,
    DocumentKind, IoError, WitnessPayload,
};
use tlj_core::iso::fair_graph_isomorphic;
use tlj_core::mw::{check_mw_type, MwCheck};
use tlj_core::random::{random_fair_graph, random_solution, random_unitaries, RandomParams};
use tlj_core::report::{ValidationReport, Violation, ViolationCode};
use tlj_core::solution::{conjugate_solution, FundamentalSolution, SolutionError};

#[derive(Parser)]
#[command(name = "tlj", version, about = "Fair graphs, fundamental solutions and diagram evaluation")]
struct Cli {
    /// Tolerance for every numerical comparison in the pipeline.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the invariants of a base graph.
    Validate {
        #[arg(long)]
        gamma: PathBuf,
    },
    /// Check that a graph is fair over its base graph.
    Fair {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        fair_graph: PathBuf,
    },
    /// Search for a balancing involution.
    Balance {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        fair_graph: PathBuf,
    },
    /// Build the fundamental solution of a balanced fair graph.
    BuildSolution {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        fair_graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Recover the fair graph of a fundamental solution.
    Classify {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        solution: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Graph to solution and back, then look for an isomorphism.
    Roundtrip {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        fair_graph: PathBuf,
    },
    /// Decide isomorphism of two fair graphs.
    Iso {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Look for a dimension function or an inconsistent cycle.
    Mw {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        fair_graph: PathBuf,
    },
    /// Evaluate a morphism through a solution.
    Eval {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        morphism: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide unitary equivalence of two solutions.
    Equiv {
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Also check `a` against this many random conjugates of itself.
        #[arg(long, default_value_t = 0)]
        fuzz: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a base graph, fair graph or solution.
    Gen {
        /// gamma, a-path, two-vertex, integer-sheets, cover, relabel,
        /// random-graph or random-solution.
        #[arg(long)]
        family: String,
        #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long)]
        fair_graph: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Fair { .. } => "fair",
            Command::Balance { .. } => "balance",
            Command::BuildSolution { .. } => "build-solution",
            Command::Classify { .. } => "classify",
            Command::Roundtrip { .. } => "roundtrip",
            Command::Iso { .. } => "iso",
            Command::Mw { .. } => "mw",
            Command::Eval { .. } => "eval",
            Command::Equiv { .. } => "equiv",
            Command::Gen { .. } => "gen",
        }
    }
}

/// A finished run: the report decides the exit code.
struct Outcome {
    report: ValidationReport,
    data: Value,
}

impl Outcome {
    fn ok(data: Value) -> Self {
        Outcome {
            report: ValidationReport::new(),
            data,
        }
    }
}

enum Failure {
    /// Bad input or usage; exit code 2.
    Input { code: &'static str, message: String },
    /// The input was read but a check failed; exit code 1.
    Check(ValidationReport),
}

fn input(code: &'static str, message: impl Into<String>) -> Failure {
    Failure::Input {
        code,
        message: message.into(),
    }
}

fn single(code: ViolationCode, id: &str, message: String) -> Failure {
    let mut r = ValidationReport::new();
    r.push(Violation::new(code, vec![id.to_string()], message));
    Failure::Check(r)
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Invalid(r) => Failure::Check(r),
            other => input("INVALID_INPUT", other.to_string()),
        }
    }
}

impl From<FairError> for Failure {
    fn from(e: FairError) -> Self {
        let message = e.to_string();
        match e {
            FairError::Graph(g) => g.into(),
            FairError::NotFair(r) | FairError::NotBalanced(r) => Failure::Check(r),
            FairError::DuplicateId(id) => single(ViolationCode::DuplicateId, &id, message),
            FairError::Dangling { edge, .. } => single(ViolationCode::DanglingReference, &edge, message),
            FairError::NotHomomorphism(id) => single(ViolationCode::NotHomomorphism, &id, message),
            FairError::NonpositiveWeight(id) => single(ViolationCode::NonpositiveWeight, &id, message),
            FairError::Family(_) => input("INVALID_PARAMS", message),
        }
    }
}

impl From<SolutionError> for Failure {
    fn from(e: SolutionError) -> Self {
        match e {
            SolutionError::Graph(g) => g.into(),
            SolutionError::GammaMismatch => input("GAMMA_MISMATCH", e.to_string()),
            other => input("INVALID_INPUT", other.to_string()),
        }
    }
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Self {
        match e {
            DiagramError::Invalid(r) => Failure::Check(r),
            DiagramError::Graph(g) => g.into(),
            other => input("INVALID_INPUT", other.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Graph(g) => g.into(),
            IoError::Fair(f) => f.into(),
            IoError::Solution(s) => s.into(),
            IoError::Diagram(d) => d.into(),
            other => input(other.code(), other.to_string()),
        }
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Fair(f) => f.into(),
            ClassifyError::Solution(s) => s.into(),
            ClassifyError::NotZigzag(r)
            | ClassifyError::NotBalanced(r)
            | ClassifyError::BadInvolution(r)
            | ClassifyError::DimensionSelfCheck(r) => Failure::Check(r),
            ClassifyError::GammaMismatch => input("GAMMA_MISMATCH", e.to_string()),
            ClassifyError::Unsupported(_) => input("UNSUPPORTED", e.to_string()),
        }
    }
}

impl From<FunctorError> for Failure {
    fn from(e: FunctorError) -> Self {
        match e {
            FunctorError::Diagram(d) => d.into(),
            FunctorError::GammaMismatch => input("GAMMA_MISMATCH", e.to_string()),
            other => input("INVALID_INPUT", other.to_string()),
        }
    }
}

type Run = Result<Outcome, Failure>;

fn load_gamma(path: Option<&Path>) -> Result<Option<Arc<BiGraph>>, Failure> {
    match path {
        None => Ok(None),
        Some(p) => Ok(Some(Arc::new(read_gamma(&read_document(p)?)?))),
    }
}

fn load_fair(path: &Path, gamma: Option<&Arc<BiGraph>>) -> Result<FairGraph, Failure> {
    Ok(read_fair_graph(&read_document(path)?, path.parent(), gamma)?)
}

fn load_solution(path: &Path, gamma: Option<&Arc<BiGraph>>) -> Result<FundamentalSolution, Failure> {
    Ok(read_solution(&read_document(path)?, path.parent(), gamma)?)
}

fn write(path: &Path, doc: &Document) -> Result<(), Failure> {
    std::fs::write(path, serialize(doc))
        .map_err(|e| input("FILE_ERROR", format!("cannot write `{}`: {e}", path.display())))
}

fn witness_value(w: WitnessPayload) -> Value {
    serde_json::to_value(witness_document(&w)).expect("witnesses are plain data")
}

fn shape(l: &FairGraph) -> Value {
    json!({ "vertices": l.vertex_count(), "edges": l.edge_count() })
}

/// `TLJ_SEED` wins over `--seed`; both default to zero.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    match std::env::var("TLJ_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| input("USAGE", format!("TLJ_SEED must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}

struct Params(Vec<(String, String)>);

impl Params {
    fn parse(raw: &[String]) -> Result<Self, Failure> {
        raw.iter()
            .map(|p| match p.split_once('=') {
                Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
                _ => Err(input("INVALID_PARAMS", format!("expected KEY=VALUE, got `{p}`"))),
            })
            .collect::<Result<_, _>>()
            .map(Params)
    }

    fn only(&self, allowed: &[&str]) -> Result<(), Failure> {
        match self.0.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => Err(input(
                "INVALID_PARAMS",
                format!("unknown parameter `{k}`; expected one of {allowed:?}"),
            )),
            None => Ok(()),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> Result<T, Failure> {
        match self.0.iter().rev().find(|(k, _)| k == key) {
            Some((_, v)) => v
                .parse()
                .map_err(|_| input("INVALID_PARAMS", format!("cannot parse `{key}={v}`"))),
            None => default.ok_or_else(|| input("INVALID_PARAMS", format!("missing parameter `{key}`"))),
        }
    }
}

fn need<'a>(what: &str, family: &str, p: Option<&'a PathBuf>) -> Result<&'a PathBuf, Failure> {
    p.ok_or_else(|| input("USAGE", format!("family `{family}` needs --{what}")))
}

fn gen(
    family: &str,
    params: &Params,
    seed: u64,
    gamma: Option<&PathBuf>,
    fair_graph: Option<&PathBuf>,
    output: &Path,
) -> Run {
    let supplied = load_gamma(gamma.map(PathBuf::as_path))?;
    let random = |p: &Params| -> Result<RandomParams, Failure> {
        p.only(&["sheets", "relabel"])?;
        Ok(RandomParams {
            sheets: p.get("sheets", Some(1))?,
            relabel: p.get("relabel", Some(true))?,
        })
    };
    let doc = match family {
        "gamma" => {
            params.only(&["kind", "weights"])?;
            let kind = match params.get::<String>("kind", None)?.as_str() {
                "unoriented" => StandardKind::Unoriented,
                "oriented" => StandardKind::Oriented,
                "two-color" => StandardKind::TwoColor,
                "shaded" => StandardKind::Shaded,
                other => return Err(input("INVALID_PARAMS", format!("unknown kind `{other}`"))),
            };
            let weights = params
                .get::<String>("weights", None)?
                .split(',')
                .map(|w| w.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| input("INVALID_PARAMS", "weights must be comma-separated numbers"))?;
            gamma_document(&standard_gamma(kind, &weights)?)
        }
        "a-path" => {
            params.only(&["n"])?;
            let n: usize = params.get("n", None)?;
            if n < 2 {
                return Err(input("INVALID_PARAMS", "n must be at least 2"));
            }
            let g = match supplied {
                Some(g) => g,
                None => Arc::new(standard_gamma(StandardKind::Unoriented, &[a_path_delta(n)])?),
            };
            fair_graph_document(&generate_family(&Family::APathQuantumDim(n), &g)?)
        }
        "two-vertex" => {
            params.only(&["a"])?;
            let a: f64 = params.get("a", None)?;
            if !(a >= 1.0 && a.is_finite()) {
                return Err(input("INVALID_PARAMS", "a must be a finite number ≥ 1"));
            }
            let g = match supplied {
                Some(g) => g,
                None => Arc::new(standard_gamma(StandardKind::Oriented, &[a + 1.0 / a])?),
            };
            fair_graph_document(&generate_family(&Family::TwoVertexReciprocal(a), &g)?)
        }
        "integer-sheets" => {
            params.only(&["sheets"])?;
            let g = supplied.ok_or_else(|| input("USAGE", "family `integer-sheets` needs --gamma"))?;
            fair_graph_document(&generate_family(&Family::IntegerSheets(params.get("sheets", None)?), &g)?)
        }
        "cover" | "relabel" => {
            let l = load_fair(need("fair-graph", family, fair_graph)?, supplied.as_ref())?;
            let f = if family == "cover" {
                params.only(&["sheets"])?;
                Family::Cover(Box::new(l.clone()), params.get("sheets", None)?)
            } else {
                params.only(&[])?;
                Family::Relabel(Box::new(l.clone()), seed)
            };
            fair_graph_document(&generate_family(&f, l.gamma())?)
        }
        "random-graph" => {
            let g = supplied.ok_or_else(|| input("USAGE", "family `random-graph` needs --gamma"))?;
            fair_graph_document(&random_fair_graph(&g, seed, random(params)?)?)
        }
        "random-solution" => {
            let g = supplied.ok_or_else(|| input("USAGE", "family `random-solution` needs --gamma"))?;
            solution_document(&random_solution(&g, seed, random(params)?)?)
        }
        other => return Err(input("USAGE", format!("unknown family `{other}`"))),
    };
    write(output, &doc)?;
    Ok(Outcome::ok(json!({
        "family": family,
        "seed": seed,
        "kind": doc.kind,
        "output": output.display().to_string(),
    })))
}

fn run(cli: &Cli) -> Run {
    let tol = cli.tol;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(input("USAGE", format!("--tol must be a finite non-negative number, got {tol}")));
    }
    match &cli.command {
        Command::Validate { gamma } => {
            let data: BiGraphData = read_document(gamma)?.payload_as(DocumentKind::Gamma)?;
            Ok(Outcome {
                report: validate_bigraph(&data),
                data: json!({ "vertices": data.vertices.len(), "edges": data.edges.len() }),
            })
        }
        Command::Fair { gamma, fair_graph } => {
            let g = load_gamma(gamma.as_deref())?;
            let l = load_fair(fair_graph, g.as_ref())?;
            Ok(Outcome {
                report: check_fair(&l, tol),
                data: shape(&l),
            })
        }
        Command::Balance { gamma, fair_graph } => {
            let g = load_gamma(gamma.as_deref())?;
            let l = load_fair(fair_graph, g.as_ref())?;
            let analysis = balance_analysis(&l, tol);
            let data = match &analysis.involution {
                Some(inv) => witness_value(WitnessPayload::Involution {
                    pairing: inv.to_id_map(&l),
                }),
                None => Value::Null,
            };
            Ok(Outcome {
                report: analysis.report(&l),
                data,
            })
        }
        Command::BuildSolution { gamma, fair_graph, output } => {
            let g = load_gamma(gamma.as_deref())?;
            let l = load_fair(fair_graph, g.as_ref())?;
            let s = solution_from_graph(&l, tol)?;
            write(output, &solution_document(&s))?;
            Ok(Outcome::ok(json!({
                "blocks": s.cups().len(),
                "output": output.display().to_string(),
            })))
        }
        Command::Classify { gamma, solution, output } => {
            let g = load_gamma(gamma.as_deref())?;
            let s = load_solution(solution, g.as_ref())?;
            let l = graph_from_solution(&s, tol)?;
            write(output, &fair_graph_document(&l))?;
            let mut data = shape(&l);
            data["output"] = json!(output.display().to_string());
            Ok(Outcome::ok(data))
        }
        Command::Roundtrip { gamma, fair_graph } => {
            let g = load_gamma(gamma.as_deref())?;
            let l = load_fair(fair_graph, g.as_ref())?;
            let back = graph_from_solution(&solution_from_graph(&l, tol)?, tol)?;
            iso_outcome(&l, &back, tol)
        }
        Command::Iso { gamma, a, b } => {
            let g = load_gamma(gamma.as_deref())?;
            let la = load_fair(a, g.as_ref())?;
            let lb = load_fair(b, g.as_ref())?;
            iso_outcome(&la, &lb, tol)
        }
        Command::Mw { gamma, fair_graph } => {
            let g = load_gamma(gamma.as_deref())?;
            let l = load_fair(fair_graph, g.as_ref())?;
            match check_mw_type(&l, tol)? {
                MwCheck::Dimension(d) => Ok(Outcome::ok(witness_value(WitnessPayload::Dimension(d)))),
                MwCheck::Inconsistent(c) => {
                    let mut report = ValidationReport::new();
                    report.push(
                        Violation::new(
                            ViolationCode::InconsistentCycle,
                            c.edges.clone(),
                            format!("cycle weight product is {}, not 1", c.product),
                        )
                        .with_residual((c.product - 1.0).abs()),
                    );
                    Ok(Outcome {
                        report,
                        data: witness_value(WitnessPayload::Cycle(c)),
                    })
                }
            }
        }
        Command::Eval { gamma, solution, morphism, output } => {
            let g = load_gamma(gamma.as_deref())?;
            let s = load_solution(solution, g.as_ref())?;
            let m = read_morphism(&read_document(morphism)?, s.gamma())?;
            let op = evaluate_functor(&s, &m)?;
            let out = Outcome::ok(json!({ "operator": block_operator_json(&s, &op) }));
            if let Some(path) = output {
                write(path, &report_document("eval", &out.report, out.data.clone()))?;
            }
            Ok(out)
        }
        Command::Equiv { gamma, a, b, fuzz, seed } => {
            let g = load_gamma(gamma.as_deref())?;
            let s = load_solution(a, g.as_ref())?;
            let t = load_solution(b, g.as_ref())?;
            let mut report = ValidationReport::new();
            let equivalent = solutions_equivalent(&s, &t, tol)?;
            if !equivalent {
                report.push(Violation::new(
                    ViolationCode::NotEquivalent,
                    vec![a.display().to_string(), b.display().to_string()],
                    "the induced fair graphs are not isomorphic",
                ));
            }
            let mut data = json!({ "equivalent": equivalent });
            if *fuzz > 0 {
                let base = resolve_seed(*seed)?;
                for k in 0..*fuzz as u64 {
                    let mut rng = ChaCha8Rng::seed_from_u64(base.wrapping_add(k));
                    let u = random_unitaries(&s, &mut rng);
                    if !solutions_equivalent(&s, &conjugate_solution(&s, &u)?, tol)? {
                        report.push(Violation::new(
                            ViolationCode::NotEquivalent,
                            vec![a.display().to_string()],
                            format!("conjugate with seed {} not recognised as equivalent", base.wrapping_add(k)),
                        ));
                    }
                }
                data["fuzz"] = json!({ "trials": fuzz, "seed": base });
            }
            Ok(Outcome { report, data })
        }
        Command::Gen {
            family,
            params,
            seed,
            gamma,
            fair_graph,
            output,
        } => gen(
            family,
            &Params::parse(params)?,
            resolve_seed(*seed)?,
            gamma.as_ref(),
            fair_graph.as_ref(),
            output,
        ),
    }
}

fn iso_outcome(a: &FairGraph, b: &FairGraph, tol: f64) -> Run {
    match fair_graph_isomorphic(a, b, tol)? {
        Some(w) => Ok(Outcome::ok(witness_value(WitnessPayload::Isomorphism(w)))),
        None => {
            let mut report = ValidationReport::new();
            report.push(Violation::new(
                ViolationCode::NotIsomorphic,
                Vec::new(),
                "no weight-preserving isomorphism over Γ exists",
            ));
            Ok(Outcome {
                report,
                data: Value::Null,
            })
        }
    }
}

fn code_name(code: ViolationCode) -> String {
    serde_json::to_value(code)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn summarize(command: &str, report: &ValidationReport) {
    if report.ok {
        eprintln!("{command}: ok");
    } else {
        eprintln!("{command}: failed with {} violation(s)", report.violations.len());
    }
    for v in report.violations.iter().take(10) {
        eprintln!("  {} {:?}: {}", code_name(v.code), v.ids, v.message);
    }
    for w in report.warnings.iter().take(10) {
        eprintln!("  warning {} {:?}: {}", code_name(w.code), w.ids, w.message);
    }
}

fn emit(doc: &Document) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    // A closed pipe is not worth a panic.
    let _ = out.write_all(&serialize(doc));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(&cli) {
        Ok(out) => {
            emit(&report_document(command, &out.report, out.data));
            summarize(command, &out.report);
            ExitCode::from(if out.report.ok { 0 } else { 1 })
        }
        Err(Failure::Check(report)) => {
            emit(&report_document(command, &report, Value::Null));
            summarize(command, &report);
            ExitCode::from(1)
        }
        Err(Failure::Input { code, message }) => {
            let data = json!({ "error": { "code": code, "message": message } });
            emit(&report_document(command, &ValidationReport { ok: false, ..Default::default() }, data));
            eprintln!("{command}: error {code}: {message}");
            ExitCode::from(2)
        }
    }
}
