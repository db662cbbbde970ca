use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abinitio::chain::{build_generic, hat, ChainApproximation, ChainConfig};
use abinitio::verify::{extension_property_report, verify_suite, VerificationReport, VerifyConfig};
use abinitio::{
    geometry_of, surgery, to_dot, AmalgamKind, AmalgamProblem, ClassId, Error, SStructure, StructureDocument, VSet, Vertex,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "abinitio", version, about = "Finite combinatorics of the n-ary ab initio construction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal cliques, one per line.
    Cliques(Io),
    /// Predimension of the structure, or of a subset.
    Delta {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        subset: Option<String>,
    },
    /// Whether a subset is strong, with a witness when it is not.
    Strong {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        subset: String,
    },
    /// Self-sufficient closure of a subset.
    Scl {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        subset: String,
    },
    /// Class membership with witnesses.
    Class {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        class: Option<ClassId>,
    },
    /// Rank, purity, flats and flatness of the associated geometry.
    Geometry {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
    },
    /// The geo operator applied to the associated geometry.
    GeoOp {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
    },
    /// The hat of a structure.
    Hat(Io),
    /// Amalgam of two structures over their common vertices, or over `--base`.
    Amalgam {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value_t = Kind::Standard)]
        kind: Kind,
        #[arg(long)]
        base: Option<String>,
    },
    /// Replaces `A` inside `D` by `B`: `--in D --in A --in B`.
    Surgery(Io),
    /// Builds a finite approximation of a generic structure.
    BuildGeneric {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Strong extensions of small strong substructures that do not embed.
    ExtensionReport {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value = "C")]
        class: ClassId,
        #[arg(long, default_value_t = 3)]
        a_cap: usize,
        #[arg(long, default_value_t = 5)]
        d_cap: usize,
    },
    /// Runs verification suites.
    Verify {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// A random member of a class.
    Gen {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        class: ClassId,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        arity: usize,
    },
    /// Clique hypergraph as a DOT bipartite incidence graph.
    ExportDot(Io),
}

#[derive(Args, Clone)]
struct Io {
    /// Input structure document; repeat for commands taking several.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    /// Write the output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// TOML file with run parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ChainArgs {
    #[arg(long)]
    class: Option<ClassId>,
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest stage.
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    a_cap: Option<usize>,
    #[arg(long)]
    d_cap: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Doc,
    Dot,
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Standard,
    Geometric,
}

/// Errors carry the exit code they map to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) => EXIT_FAILURE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Cliques(io) => {
            let a = one_input(&io)?;
            let lines: Vec<String> = a.maximal_cliques().iter().map(|k| k.to_string()).collect();
            emit_lines(&io, &lines)
        }
        Command::Delta { io, subset } => {
            let a = one_input(&io)?;
            let d = match subset {
                Some(s) => a.predim_of(parse_subset(&s)?)?,
                None => a.predim(),
            };
            emit_lines(&io, &[d.to_string()])
        }
        Command::Strong { io, subset } => {
            let a = one_input(&io)?;
            let line = match a.strong_witness(parse_subset(&subset)?)? {
                None => "true".to_string(),
                Some(w) => format!("false witness {w}"),
            };
            emit_lines(&io, &[line])
        }
        Command::Scl { io, subset } => {
            let a = one_input(&io)?;
            let c = a.self_sufficient_closure(parse_subset(&subset)?)?;
            emit_lines(&io, &[c.to_string()])
        }
        Command::Class { io, class } => {
            let a = one_input(&io)?;
            let classes = match class {
                Some(c) => vec![c],
                None => ClassId::ALL.to_vec(),
            };
            let checks: Vec<_> = classes.iter().map(|&c| a.class_check(c)).collect();
            if io.format == Some(Format::Json) {
                return emit(&io, &json(&checks)?);
            }
            let lines: Vec<String> = checks
                .iter()
                .map(|c| {
                    let mut l = format!("{} {}", c.class, c.member);
                    if let Some(w) = c.witness {
                        l.push_str(&format!(" witness {w}"));
                    }
                    if let Some(r) = &c.reason {
                        l.push_str(&format!(" ({r})"));
                    }
                    l
                })
                .collect();
            emit_lines(&io, &lines)
        }
        Command::Geometry { io, k_max } => {
            let a = one_input(&io)?;
            let g = geometry_of(&a)?;
            let flatness = g.flatness_check(k_max);
            let mut lines = vec![
                format!("kind {:?}", g.kind()).to_lowercase(),
                format!("rank {}", g.rank(a.universe())?),
                format!("purity {}", g.purity()),
            ];
            match &flatness.violation {
                None => lines.push(format!("flat up to {k_max} flats ({} families)", flatness.families_checked)),
                Some((fam, sum)) => lines.push(format!(
                    "not flat: {} has signed sum {sum}",
                    fam.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ")
                )),
            }
            for f in g.flats().flats {
                lines.push(format!("flat {f} rank {}", g.rank(f)?));
            }
            emit_lines(&io, &lines)
        }
        Command::GeoOp { io, k_max } => {
            let a = one_input(&io)?;
            let h = geometry_of(&a)?.geo_operator_checked(a.arity(), k_max)?;
            emit_structure(&io, &StructureDocument::new(h))
        }
        Command::Hat(io) => {
            let a = one_input(&io)?;
            emit_structure(&io, &StructureDocument::new(hat(&a)?))
        }
        Command::Amalgam { io, kind, base } => {
            let [a1, a2] = inputs::<2>(&io)?;
            let p = match base {
                Some(b) => AmalgamProblem::new(a1, a2, parse_subset(&b)?)?,
                None => AmalgamProblem::over_common(a1, a2)?,
            };
            let kind = match kind {
                Kind::Standard => AmalgamKind::Standard,
                Kind::Geometric => AmalgamKind::Geometric,
            };
            emit_structure(&io, &StructureDocument::new(p.solve(kind)?))
        }
        Command::Surgery(io) => {
            let [d, a, b] = inputs::<3>(&io)?;
            emit_structure(&io, &StructureDocument::new(surgery(&d, &a, &b)?))
        }
        Command::BuildGeneric { io, chain } => {
            let config = verify_config(&io, &chain)?.chain;
            let c = build_generic(&config)?;
            match io.format.unwrap_or(Format::Json) {
                Format::Json => emit(&io, &json(&c)?),
                Format::Text => emit(&io, &chain_summary(&c)),
                Format::Doc => emit_structure(&io, &final_stage(&c)),
                Format::Dot => emit(&io, &to_dot(c.last(), "generic")),
            }
        }
        Command::ExtensionReport { io, class, a_cap, d_cap } => {
            let m = one_input(&io)?;
            let config = verify_config(&io, &no_chain_args())?;
            let r = extension_property_report(&m, class, a_cap, d_cap, &config)?;
            emit_reports(&io, &[r])
        }
        Command::Verify { io, suite, chain } => {
            let config = verify_config(&io, &chain)?;
            let reports = verify_suite(&suite, &config)?;
            emit_reports(&io, &reports)
        }
        Command::Gen {
            io,
            class,
            size,
            density,
            seed,
            arity,
        } => {
            let a = abinitio::random::random_structure(class, arity, size, density, seed)?;
            let doc = StructureDocument {
                structure: a,
                name: Some(format!("random-{class}-{size}")),
                seed: Some(seed),
                class: Some(class),
            };
            emit_structure(&io, &doc)
        }
        Command::ExportDot(io) => {
            let a = one_input(&io)?;
            let name = io.inputs[0]
                .file_stem()
                .map_or("structure".to_string(), |s| s.to_string_lossy().into_owned());
            emit(&io, &to_dot(&a, &name))
        }
    }
}

fn no_chain_args() -> ChainArgs {
    ChainArgs {
        class: None,
        arity: None,
        steps: None,
        seed: None,
        max_size: None,
        a_cap: None,
        d_cap: None,
        k_max: None,
    }
}

fn read_structure(path: &Path) -> Result<SStructure, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    StructureDocument::parse(&text)
        .map(|d| d.structure)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn inputs<const K: usize>(io: &Io) -> Result<[SStructure; K], Failure> {
    if io.inputs.len() != K {
        return Err(usage(format!("expected {K} --in files, got {}", io.inputs.len())));
    }
    let v: Vec<SStructure> = io.inputs.iter().map(|p| read_structure(p)).collect::<Result<_, _>>()?;
    Ok(v.try_into().unwrap_or_else(|_| unreachable!()))
}

fn one_input(io: &Io) -> Result<SStructure, Failure> {
    let [a] = inputs::<1>(io)?;
    Ok(a)
}

/// Vertices separated by commas or spaces, optionally in braces.
fn parse_subset(s: &str) -> Result<VSet, Failure> {
    let mut out = VSet::EMPTY;
    for w in s.trim().trim_start_matches('{').trim_end_matches('}').split([',', ' ']).filter(|w| !w.is_empty()) {
        let v: Vertex = w.parse().map_err(|_| usage(format!("bad vertex `{w}` in subset `{s}`")))?;
        if v as usize >= 64 {
            return Err(usage(format!("vertex {v} is out of range")));
        }
        out.insert(v);
    }
    Ok(out)
}

fn verify_config(io: &Io, chain: &ChainArgs) -> Result<VerifyConfig, Failure> {
    let mut config = match &io.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => VerifyConfig::default(),
    };
    let c: &mut ChainConfig = &mut config.chain;
    if let Some(v) = chain.class {
        c.class = v;
    }
    if let Some(v) = chain.arity {
        config.arity = v;
        c.arity = v;
    }
    if let Some(v) = chain.steps {
        c.steps = v;
    }
    if let Some(v) = chain.seed {
        config.seed = v;
        c.seed = v;
    }
    if let Some(v) = chain.max_size {
        c.stage_cap = v;
    }
    if let Some(v) = chain.a_cap {
        c.a_cap = v;
    }
    if let Some(v) = chain.d_cap {
        c.d_cap = v;
    }
    if let Some(v) = chain.k_max {
        config.k_max = v;
    }
    Ok(config)
}

fn final_stage(c: &ChainApproximation) -> StructureDocument {
    StructureDocument {
        structure: c.last().clone(),
        name: Some(format!("generic-{}-stage-{}", c.config.class, c.stages.len() - 1)),
        seed: Some(c.config.seed),
        class: Some(c.config.class),
    }
}

fn chain_summary(c: &ChainApproximation) -> String {
    let mut out = String::new();
    for (i, s) in c.stages.iter().enumerate() {
        out.push_str(&format!("stage {i}: {} vertices, {} edges\n", s.len(), s.edge_count()));
    }
    let satisfied = c.requirements.iter().filter(|r| r.satisfied_at.is_some()).count();
    out.push_str(&format!(
        "requirements: {} logged, {satisfied} satisfied; stopped: {:?}\n",
        c.requirements.len(),
        c.stop
    ));
    out
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        })
}

fn emit(io: &Io, text: &str) -> Outcome {
    match &io.out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn emit_lines(io: &Io, lines: &[String]) -> Outcome {
    let mut text = lines.join("\n");
    text.push('\n');
    emit(io, &text)
}

fn emit_structure(io: &Io, doc: &StructureDocument) -> Outcome {
    match io.format.unwrap_or(Format::Doc) {
        Format::Dot => emit(io, &to_dot(&doc.structure, doc.name.as_deref().unwrap_or("structure"))),
        Format::Json => emit(io, &json(&doc.structure)?),
        Format::Doc | Format::Text => emit(io, &doc.to_text()),
    }
}

fn emit_reports(io: &Io, reports: &[VerificationReport]) -> Outcome {
    let text = match io.format.unwrap_or(Format::Text) {
        Format::Json => json(&reports)?,
        _ => reports.iter().map(|r| r.to_text()).collect(),
    };
    emit(io, &text)?;
    Ok(reports.iter().all(|r| r.passed()))
}
