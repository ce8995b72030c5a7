//! Argument parsing and file I/O around the `foon` library. Every verb reads
//! its inputs, calls one library operation and writes the result; nothing
//! else happens here.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use foon::experiment::{run_experiment, ExperimentFile};
use foon::parser::{
    parse_category_index, parse_goal, parse_kitchen, parse_label_list, parse_similarity_matrix, parse_subgraph,
    parse_subgraph_checked, parse_taxonomy, serialize_similarity_matrix, serialize_units, Subgraph,
};
use foon::retrieval::{RetrievalOutcome, SearchBudget};
use foon::similarity::{build_similarity_index, SimilarityIndex, SimilaritySource};
use foon::transform::{abstract_to_level, expand, generalize, merge, ExpansionConfig, GeneralizeMode};
use foon::{Exec, FoonGraph, HierarchyLevel, ParseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSOLVABLE: i32 = 1;
pub const EXIT_TIMED_OUT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "foon", version, about = "Build, transform and search functional object-oriented networks")]
struct Cli {
    /// Hierarchy level for object identity (default 3; `bench` defaults to its config).
    #[arg(long, global = true, value_parser = parse_level)]
    level: Option<HierarchyLevel>,
    #[command(subcommand)]
    command: Command,
}

fn parse_level(s: &str) -> Result<HierarchyLevel, String> {
    s.parse().map_err(|e: foon::ModelError| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that subgraph files parse.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Motion index (one label per line); unknown motions are errors.
        #[arg(long)]
        motions: Option<PathBuf>,
    },
    /// Merge subgraph files into one network.
    Merge {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-key a network at the coarser level given by --level.
    Abstract {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add units with similar objects substituted.
    Expand {
        file: PathBuf,
        /// Similarity matrix (TSV), e.g. from `foon similarity`.
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 0.89)]
        threshold: f64,
        #[arg(long)]
        max_units: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace objects by their categories.
    Generalize {
        file: PathBuf,
        #[arg(long)]
        categories: PathBuf,
        #[arg(long, default_value = "first")]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wu-Palmer similarity index over a taxonomy.
    Similarity {
        #[arg(long)]
        taxonomy: PathBuf,
        /// Object labels, one per line.
        #[arg(long)]
        objects: PathBuf,
        #[arg(long, default_value_t = 0.89)]
        threshold: f64,
        /// Similarity matrix whose scores replace taxonomy scores.
        #[arg(long)]
        overrides: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a task tree for a goal object.
    Retrieve {
        #[arg(long)]
        graph: PathBuf,
        /// `label[:state,...][@ingredient,...]`
        #[arg(long)]
        goal: String,
        #[arg(long)]
        kitchen: PathBuf,
        /// Maximum candidate-unit expansions.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded REG/EXP/GEN retrieval experiment.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Summary table instead of JSON lines.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print object, motion and unit counts.
    Stats {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    NoInput(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::NoInput(_) => EXIT_NO_INPUT,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::NoInput(m) | Failure::Io(m) => m,
        }
    }
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::NoInput(format!("{}: {e}", path.display())))
}

fn parsed<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_subgraph(path: &Path) -> Result<Subgraph, Failure> {
    let name = path.display().to_string();
    parsed(path, parse_subgraph(&read(path)?, &name))
}

fn load_graph(path: &Path, level: HierarchyLevel) -> Result<FoonGraph, Failure> {
    Ok(FoonGraph::from_units(level, load_subgraph(path)?.units))
}

/// Writes to `--out` when given, otherwise to `out`.
fn emit(text: &str, target: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match target {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

/// Runs one command line and returns the process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let level = cli.level.unwrap_or(HierarchyLevel::L3);
    let exec = Exec::default();
    match cli.command {
        Command::Validate { files, motions } => {
            let motions: Option<BTreeSet<String>> = match motions {
                Some(p) => Some(parsed(&p, parse_label_list(&read(&p)?))?),
                None => None,
            };
            for f in files {
                let text = read(&f)?;
                let name = f.display().to_string();
                let sub = match &motions {
                    Some(m) => parsed(&f, parse_subgraph_checked(&text, &name, m))?,
                    None => parsed(&f, parse_subgraph(&text, &name))?,
                };
                emit(&format!("{name}: {} units\n", sub.units.len()), None, out)?;
            }
        }
        Command::Merge { files, out: target } => {
            let subs = files.iter().map(|f| load_subgraph(f)).collect::<Result<Vec<_>, _>>()?;
            let g = merge(&subs, level);
            emit(&serialize_units(g.units()), target.as_deref(), out)?;
        }
        Command::Abstract { file, out: target } => {
            let Some(to) = cli.level else {
                return Err(Failure::Usage("abstract needs --level".into()));
            };
            let g = load_graph(&file, HierarchyLevel::L3)?;
            let a = abstract_to_level(&g, to).map_err(data)?;
            emit(&serialize_units(a.units()), target.as_deref(), out)?;
        }
        Command::Expand { file, index, threshold, max_units, out: target } => {
            let g = load_graph(&file, level)?;
            let m = parsed(&index, parse_similarity_matrix(&read(&index)?))?;
            let idx = SimilarityIndex::from_matrix(&m, threshold).map_err(data)?;
            let e = expand(&g, &idx, &ExpansionConfig { threshold, max_units }, exec).map_err(data)?;
            emit(&serialize_units(e.units()), target.as_deref(), out)?;
        }
        Command::Generalize { file, categories, mode, out: target } => {
            let mode: GeneralizeMode = mode.parse().map_err(|e: foon::transform::TransformError| Failure::Usage(e.to_string()))?;
            let g = load_graph(&file, level)?;
            let cats = parsed(&categories, parse_category_index(&read(&categories)?))?;
            let gen = generalize(&g, &cats, mode, exec);
            emit(&serialize_units(gen.units()), target.as_deref(), out)?;
        }
        Command::Similarity { taxonomy, objects, threshold, overrides, out: target } => {
            let t = parsed(&taxonomy, parse_taxonomy(&read(&taxonomy)?))?;
            let labels = parsed(&objects, parse_label_list(&read(&objects)?))?;
            let overrides = match overrides {
                Some(p) => Some(parsed(&p, parse_similarity_matrix(&read(&p)?))?),
                None => None,
            };
            let source = SimilaritySource::Taxonomy { taxonomy: &t, overrides: overrides.as_ref() };
            let build = build_similarity_index(source, &labels, threshold, exec).map_err(data)?;
            for label in &build.unresolved {
                let _ = writeln!(err, "warning: `{label}` is not in the taxonomy");
            }
            emit(&serialize_similarity_matrix(&build.index.to_matrix()), target.as_deref(), out)?;
        }
        Command::Retrieve { graph, goal, kitchen, budget, out: target } => {
            let g = load_graph(&graph, level)?;
            let goal = parse_goal(&goal).map_err(|e| Failure::Usage(format!("--goal: {e}")))?;
            let k = parsed(&kitchen, parse_kitchen(&read(&kitchen)?))?;
            let budget = budget.map_or_else(SearchBudget::default, SearchBudget::expansions);
            match foon::retrieval::retrieve_task_tree(&g, &goal, &k, budget) {
                RetrievalOutcome::Solved { tree, .. } => emit(&serialize_units(&tree.units), target.as_deref(), out)?,
                RetrievalOutcome::Unsolvable => {
                    let _ = writeln!(err, "unsolvable: {}", goal.key(level));
                    return Ok(EXIT_UNSOLVABLE);
                }
                RetrievalOutcome::TimedOut { expansions } => {
                    let _ = writeln!(err, "timed out after {expansions} expansions");
                    return Ok(EXIT_TIMED_OUT);
                }
            }
        }
        Command::Bench { config, csv, out: target } => {
            let mut file = ExperimentFile::parse(&read(&config)?).map_err(data)?;
            if let Some(l) = cli.level {
                file.level = l.number();
            }
            let (cfg, nets) = file.build(config.parent().unwrap_or(Path::new("."))).map_err(data)?;
            let report = run_experiment(&cfg, &nets).map_err(data)?;
            let text = if csv { report.to_csv() } else { report.to_json_lines() };
            emit(&text, target.as_deref(), out)?;
        }
        Command::Stats { graph } => {
            let g = load_graph(&graph, level)?;
            emit(&format!("{}\n", g.stats()), None, out)?;
        }
    }
    Ok(EXIT_OK)
}
