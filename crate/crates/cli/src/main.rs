use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use epitopo::complex::{invariants, Agents, ModelBuilder, ModelError, SimplicialModel};
use epitopo::del::{product_update, DelError, Update};
use epitopo::duality::{to_kripke, to_simplicial, DualityError};
use epitopo::generators;
use epitopo::io::{self, Format, IoError};
use epitopo::kripke::check_kripke;
use epitopo::logic::{check, parse, CheckError, ParseError};
use epitopo::protocols::{protocol_model, ProtocolError, DEFAULT_FACET_LIMIT};
use epitopo::solver::{
    connectivity_obstruction, logical_obstruction, solve, verify, Certificate, SolveOptions,
    SolveResult, SolverError, Stats, Status,
};
use epitopo::tasks::{self, Task, TaskError};

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error(transparent)]
    Del(#[from] DelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Simplicial models of knowledge, product update, and task solvability.
#[derive(Parser)]
#[command(name = "epitopo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, validate, convert and generate models.
    Model {
        #[command(subcommand)]
        command: ModelCommand,
    },
    /// Evaluate a formula at a facet (or Kripke state).
    Check {
        #[arg(long)]
        model: PathBuf,
        /// `#index`, a value word such as `01`, or comma-separated vertex ids.
        #[arg(long)]
        facet: String,
        #[arg(long)]
        formula: String,
    },
    /// Product update of a model with an action model.
    Update {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        action: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Protocol models.
    Protocol {
        #[command(subcommand)]
        command: ProtocolCommand,
    },
    /// Generate a task action model over an input model.
    Task {
        /// `consensus`, `ksa:K`, `approx:N`, or a task JSON file.
        spec: String,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Decide whether a protocol solves a task.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// `is:R` for R rounds of immediate snapshot.
        #[arg(long, default_value = "is:1")]
        protocol: String,
        /// `consensus`, `ksa:K`, `approx:N`, or a task JSON file.
        #[arg(long)]
        task: String,
        /// Try an obstruction first: `connectivity` or `logic:<formula>`.
        #[arg(long)]
        obstruction: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Export the facet-adjacency graph.
    Export {
        #[arg(long, required = true)]
        dot: bool,
        #[arg(long)]
        model: PathBuf,
        /// Only link facets through vertices of these agents.
        #[arg(long, value_delimiter = ',')]
        agents: Vec<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Topological invariants of a model.
    Stats {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Build a model from value rows, e.g. `--agents g,w 00 01 11 10`.
    Build {
        #[arg(long, value_delimiter = ',', required = true)]
        agents: Vec<String>,
        /// Keep every row's vertices separate instead of gluing equal labels.
        #[arg(long)]
        no_glue: bool,
        /// One value per agent: a word of single characters or a comma list.
        #[arg(required = true)]
        rows: Vec<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Check a simplicial or Kripke model file.
    Validate { file: PathBuf },
    /// Convert between the simplicial and Kripke formats.
    Dualize {
        file: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Built-in models.
    Gen {
        #[command(subcommand)]
        model: GenCommand,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// All binary input assignments.
    BinaryInputs {
        #[arg(long, default_value_t = 2)]
        agents: usize,
    },
    /// Three agents each holding a distinct card.
    Cards {
        #[arg(long, default_value_t = 4)]
        deck: usize,
    },
    /// Three triangles glued along an edge and a vertex.
    Strip,
    /// A single facet with all inputs 0.
    Single {
        #[arg(long, default_value_t = 3)]
        agents: usize,
    },
}

#[derive(Subcommand)]
enum ProtocolCommand {
    /// Iterated immediate snapshot over an input model.
    Is {
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FACET_LIMIT)]
        limit: usize,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args)]
struct Out {
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

impl Out {
    fn emit(&self, text: &str) -> Result<String> {
        match &self.out {
            Some(path) => {
                let mut body = text.to_string();
                if !body.ends_with('\n') {
                    body.push('\n');
                }
                fs::write(path, body).map_err(|source| CliError::Write {
                    path: path.clone(),
                    source,
                })?;
                Ok(String::new())
            }
            None => Ok(text.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load_model(path: &Path) -> Result<SimplicialModel> {
    let text = read(path)?;
    match io::detect_format(&text)? {
        Format::Simplicial => Ok(io::model_from_json(&text)?),
        Format::Kripke => Ok(to_simplicial(&io::kripke_from_json(&text)?)?),
    }
}

fn parse_row(row: &str, n: usize) -> Result<Vec<String>> {
    let values: Vec<String> = if row.contains(',') {
        row.split(',').map(|s| s.trim().to_string()).collect()
    } else {
        row.chars().map(String::from).collect()
    };
    if values.len() != n {
        return Err(CliError::Usage(format!(
            "row `{row}` has {} values for {n} agents",
            values.len()
        )));
    }
    Ok(values)
}

fn load_task(spec: &str, m: &SimplicialModel) -> Result<Task> {
    let values: Vec<String> = m.values().into_iter().collect();
    if spec == "consensus" {
        return Ok(tasks::consensus(m, &values)?);
    }
    if let Some(k) = spec.strip_prefix("ksa:") {
        let k = k
            .parse()
            .map_err(|_| CliError::Usage(format!("bad k in `{spec}`")))?;
        return Ok(tasks::k_set_agreement(m, &values, k)?);
    }
    if let Some(n) = spec.strip_prefix("approx:") {
        let n = n
            .parse()
            .map_err(|_| CliError::Usage(format!("bad granularity in `{spec}`")))?;
        return Ok(tasks::approximate_agreement(m, n)?);
    }
    if spec == "identity" {
        return Ok(tasks::identity_task(m)?);
    }
    let (task, warnings) = tasks::custom_task(m, &read(Path::new(spec))?)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(task)
}

fn parse_rounds(spec: &str) -> Result<usize> {
    spec.strip_prefix("is:")
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| CliError::Usage(format!("protocol `{spec}` is not of the form is:R")))
}

fn certificate_json(c: &Certificate, protocol: &Update, task: &Update) -> Json {
    let pnames = protocol.model.facet_names();
    let tnames = task.model.facet_names();
    let names = |xs: &[usize], all: &[String]| -> Vec<String> {
        xs.iter().map(|&x| all[x].clone()).collect()
    };
    match c {
        Certificate::Exhausted => json!({ "kind": "exhausted" }),
        Certificate::Connectivity(c) => json!({
            "kind": "connectivity",
            "path": names(&c.path, &pnames),
            "candidates_start": names(&c.candidates_start, &tnames),
            "candidates_end": names(&c.candidates_end, &tnames),
            "components_start": c.components_start,
            "components_end": c.components_end,
        }),
        Certificate::Logical(c) => json!({
            "kind": "logical",
            "facet": pnames[c.facet],
            "formula": c.formula.display(protocol.model.agents()).to_string(),
            "candidates": names(&c.candidates, &tnames),
        }),
    }
}

fn stats_json(s: &Stats) -> Json {
    json!({ "nodes": s.nodes, "backtracks": s.backtracks, "revisions": s.revisions })
}

fn render_solve(result: &SolveResult, protocol: &Update, task: &Update, as_json: bool) -> String {
    let verified = match &result.status {
        Status::Unsolvable(Certificate::Exhausted) => None,
        _ => Some(verify(result, protocol, task)),
    };
    if as_json {
        let mut out = Map::new();
        out.insert("status".into(), json!(result.status.label()));
        match &result.status {
            Status::Solvable(delta) => {
                let pc = protocol.model.complex();
                let tc = task.model.complex();
                let map: Map<String, Json> = delta
                    .map
                    .iter()
                    .enumerate()
                    .map(|(v, &w)| (pc.vertex(v).id.clone(), json!(tc.vertex(w).id)))
                    .collect();
                out.insert("delta".into(), Json::Object(map));
            }
            Status::Unsolvable(c) => {
                out.insert("certificate".into(), certificate_json(c, protocol, task));
            }
            Status::Unknown(note) => {
                out.insert("note".into(), json!(note));
            }
        }
        if let Some(v) = verified {
            out.insert("verified".into(), json!(v));
        }
        out.insert("statistics".into(), stats_json(&result.stats));
        return io::to_pretty(&Json::Object(out));
    }
    let mut lines = vec![result.status.label().to_string()];
    match &result.status {
        Status::Solvable(_) => {}
        Status::Unsolvable(Certificate::Exhausted) => {
            lines.push("certificate: search exhausted".into())
        }
        Status::Unsolvable(Certificate::Connectivity(c)) => {
            let names = protocol.model.facet_names();
            let path: Vec<&str> = c.path.iter().map(|&x| names[x].as_str()).collect();
            lines.push(format!(
                "certificate: connectivity, path {} links facets with disjoint output components {:?} and {:?}",
                path.join(" "),
                c.components_start,
                c.components_end
            ));
        }
        Status::Unsolvable(Certificate::Logical(c)) => {
            let names = protocol.model.facet_names();
            lines.push(format!(
                "certificate: logical, {} fails at {} but holds at all {} candidate images",
                c.formula.display(protocol.model.agents()),
                names[c.facet],
                c.candidates.len()
            ));
        }
        Status::Unknown(note) => lines.push(format!("note: {note}")),
    }
    if let Some(v) = verified {
        lines.push(format!("verified: {v}"));
    }
    lines.push(format!(
        "nodes: {}, backtracks: {}",
        result.stats.nodes, result.stats.backtracks
    ));
    lines.join("\n")
}

fn run_solve(
    input: &Path,
    protocol: &str,
    task: &str,
    obstruction: Option<&str>,
    as_json: bool,
) -> Result<String> {
    let m = Arc::new(load_model(input)?);
    let rounds = parse_rounds(protocol)?;
    let mut p = protocol_model(&m, rounds, DEFAULT_FACET_LIMIT)?;
    p.projection.target = m.clone();
    let t = load_task(task, &m)?;
    let mut tm = t.model(&m)?;
    tm.projection.target = m.clone();

    let certificate = match obstruction {
        None => None,
        Some("connectivity") => connectivity_obstruction(&p, &tm)?.map(Certificate::Connectivity),
        Some(spec) => match spec.strip_prefix("logic:") {
            Some(text) => {
                let phi = parse(text, m.agents())?;
                logical_obstruction(&p, &tm, &phi)?.map(Certificate::Logical)
            }
            None => {
                return Err(CliError::Usage(format!(
                    "obstruction `{spec}` is not `connectivity` or `logic:<formula>`"
                )))
            }
        },
    };
    let result = match certificate {
        Some(c) => SolveResult {
            status: Status::Unsolvable(c),
            stats: Stats::default(),
        },
        None => {
            if obstruction.is_some() {
                eprintln!("no obstruction found; searching");
            }
            let r = solve(&p, &tm, &SolveOptions::from_env())?;
            eprintln!("search time: {:?}", r.stats.elapsed);
            r
        }
    };
    Ok(render_solve(&result, &p, &tm, as_json))
}

fn stats_text(m: &SimplicialModel, as_json: bool) -> String {
    let inv = invariants(m.complex());
    if as_json {
        return io::to_pretty(&json!({
            "agents": m.agents().names(),
            "facets": m.num_facets(),
            "vertices": m.complex().vertices().len(),
            "f_vector": inv.counts,
            "euler_characteristic": inv.euler_characteristic,
            "connected": inv.connected,
            "strongly_connected": inv.strongly_connected,
            "pseudomanifold_with_boundary": inv.pseudomanifold_with_boundary,
        }));
    }
    format!(
        "agents: {}\nfacets: {}\nvertices: {}\n{inv}",
        m.agents().names().join(","),
        m.num_facets(),
        m.complex().vertices().len()
    )
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Model { command } => match command {
            ModelCommand::Build {
                agents,
                no_glue,
                rows,
                out,
            } => {
                let agents = Agents::new(agents)?;
                let n = agents.len();
                let mut b = ModelBuilder::new(agents);
                for row in &rows {
                    b.values_row(&parse_row(row, n)?);
                }
                if !no_glue {
                    b.glue_by_label();
                }
                out.emit(&io::model_to_json(&b.build()?))
            }
            ModelCommand::Validate { file } => {
                let text = read(&file)?;
                match io::detect_format(&text)? {
                    Format::Simplicial => {
                        let m = io::model_from_json(&text)?;
                        Ok(format!(
                            "valid simplicial model: {} agents, {} vertices, {} facets",
                            m.agents().len(),
                            m.complex().vertices().len(),
                            m.num_facets()
                        ))
                    }
                    Format::Kripke => {
                        let k = io::kripke_from_json(&text)?;
                        Ok(format!(
                            "valid Kripke model: {} agents, {} states, proper: {}, local: {}",
                            k.agents().len(),
                            k.num_states(),
                            k.is_proper(),
                            k.is_local()
                        ))
                    }
                }
            }
            ModelCommand::Dualize { file, out } => {
                let text = read(&file)?;
                let converted = match io::detect_format(&text)? {
                    Format::Simplicial => {
                        io::kripke_to_json(&to_kripke(&io::model_from_json(&text)?))
                    }
                    Format::Kripke => {
                        io::model_to_json(&to_simplicial(&io::kripke_from_json(&text)?)?)
                    }
                };
                out.emit(&converted)
            }
            ModelCommand::Gen { model, out } => {
                let m = match model {
                    GenCommand::BinaryInputs { agents } => {
                        require_agents(agents)?;
                        generators::binary_inputs(agents)
                    }
                    GenCommand::Cards { deck } => {
                        if deck < 3 {
                            return Err(CliError::Usage("a deck needs at least 3 cards".into()));
                        }
                        generators::cards(deck)
                    }
                    GenCommand::Strip => generators::strip(),
                    GenCommand::Single { agents } => {
                        require_agents(agents)?;
                        generators::single_facet(agents)
                    }
                };
                out.emit(&io::model_to_json(&m))
            }
        },
        Command::Check {
            model,
            facet,
            formula,
        } => {
            let text = read(&model)?;
            let truth = match io::detect_format(&text)? {
                Format::Simplicial => {
                    let m = io::model_from_json(&text)?;
                    let x = m.find_facet(&facet)?;
                    check(&m, x, &parse(&formula, m.agents())?)?
                }
                Format::Kripke => {
                    let k = io::kripke_from_json(&text)?;
                    let s = k
                        .state_index(&facet)
                        .ok_or_else(|| CliError::Usage(format!("no state named `{facet}`")))?;
                    check_kripke(&k, s, &parse(&formula, k.agents())?)?
                }
            };
            Ok(truth.to_string())
        }
        Command::Update { model, action, out } => {
            let m = load_model(&model)?;
            let a = io::action_from_json(&read(&action)?)?;
            let u = product_update(&m, &a)?;
            if u.is_empty() {
                eprintln!("warning: no action is executable; the updated model is empty");
            }
            out.emit(&io::projected_model_to_json(
                &u.model,
                &m,
                &u.projection.map,
            ))
        }
        Command::Protocol {
            command:
                ProtocolCommand::Is {
                    rounds,
                    input,
                    limit,
                    out,
                },
        } => {
            let m = load_model(&input)?;
            let p = protocol_model(&m, rounds, limit)?;
            let text = io::projected_model_to_json(&p.model, &m, &p.projection.map);
            if out.out.is_some() {
                out.emit(&text)?;
                Ok(format!(
                    "{} facets, {} vertices",
                    p.model.num_facets(),
                    p.model.complex().vertices().len()
                ))
            } else {
                Ok(text)
            }
        }
        Command::Task { spec, input, out } => {
            let m = load_model(&input)?;
            let t = load_task(&spec, &m)?;
            out.emit(&io::to_pretty(&tasks::to_spec(&t)))
        }
        Command::Solve {
            input,
            protocol,
            task,
            obstruction,
            json,
        } => run_solve(&input, &protocol, &task, obstruction.as_deref(), json),
        Command::Export {
            dot: _,
            model,
            agents,
            out,
        } => {
            let m = load_model(&model)?;
            let subset = agents
                .iter()
                .map(|a| m.agents().require(a))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let subset = (!subset.is_empty()).then_some(subset.as_slice());
            out.emit(&epitopo::dot::facet_graph_dot(&m, subset))
        }
        Command::Stats { model, json } => Ok(stats_text(&load_model(&model)?, json)),
    }
}

fn require_agents(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CliError::Usage("at least one agent is required".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream is not an error of ours
            let _ = stdout.write_all(text.as_bytes());
            if !text.is_empty() && !text.ends_with('\n') {
                let _ = stdout.write_all(b"\n");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
