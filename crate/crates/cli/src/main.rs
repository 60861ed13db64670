use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fqdilate::counting::verify_chain;
use fqdilate::edges::EdgeSet;
use fqdilate::error::Error;
use fqdilate::experiment::{
    edge_set, records_to_csv, resolve_ratios, run_method, run_quotient_check, run_threshold_sweep,
    sample_subset, summarize, ExperimentConfig, MethodChoice, QuotientConfig, QuotientPart,
};
use fqdilate::field::{prime_power, Field, FieldElem};
use fqdilate::geometry::{PointSet, Space};
use fqdilate::orthogonal::enumerate_orthogonal;
use fqdilate::search::{SearchOutcome, DEFAULT_NODE_GUARD};
use fqdilate::sharpness::{
    build_subfield_grid, build_unit_sphere, certify_all, single_edges, Construction,
};

#[derive(Debug, Parser)]
#[command(
    name = "fqdilate",
    version,
    about = "Dilated point configurations over finite fields"
)]
struct Cli {
    /// Base seed for random sets and sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Node budget for exhaustive searches.
    #[arg(long, global = true)]
    guard_nodes: Option<u64>,
    /// JSON experiment config (sweep and quotient); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
struct FieldArgs {
    /// Field order `p^ℓ`.
    #[arg(long, conflicts_with_all = ["p", "ell"])]
    q: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    ell: Option<u32>,
}

impl FieldArgs {
    fn resolve(&self) -> anyhow::Result<Option<(u64, u32)>> {
        match (self.q, self.p) {
            (Some(q), _) => Ok(Some(prime_power(q)?)),
            (None, Some(p)) => Ok(Some((p, self.ell.unwrap_or(1)))),
            (None, None) => Ok(None),
        }
    }

    fn field(&self) -> anyhow::Result<Arc<Field>> {
        let (p, ell) = self
            .resolve()?
            .ok_or_else(|| anyhow!("pass --q or --p/--ell"))?;
        Ok(Field::new(p, ell)?)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample sets of several sizes and look for dilated configurations.
    Sweep {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        edges: Option<String>,
        /// `all-squares`, `auto` or a field element.
        #[arg(long)]
        r: Option<String>,
        /// Comma-separated set sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        method: Option<MethodChoice>,
        /// Record wall-clock time per row.
        #[arg(long)]
        timing: bool,
    },
    /// Compute every counting quantity for one set and check the inequalities.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "path")]
        edges: String,
        #[arg(long, default_value = "auto")]
        r: String,
        /// A point-set file or `random:<size>:<seed>`.
        #[arg(long)]
        set: String,
    },
    /// Look for a dilated configuration in one set.
    Search {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "path")]
        shape: String,
        #[arg(long, default_value = "all-squares")]
        r: String,
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "bruteforce")]
        method: MethodChoice,
    },
    /// Certify the extremal constructions by exhaustive search.
    Sharpness {
        #[arg(long, value_enum)]
        construction: ConstructionArg,
        #[command(flatten)]
        field: FieldArgs,
        /// Edge spec, or `single` for every one-edge set; defaults to
        /// `single` for the grid and `triangle` for the sphere.
        #[arg(long)]
        edges: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        /// Restrict to one ratio instead of every admissible one.
        #[arg(long)]
        r: Option<String>,
    },
    /// Size (and optionally the elements) of the orthogonal group.
    Ortho {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        list: bool,
    },
    /// Check that random large sets have a full quotient set.
    Quotient {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Check only that every square is a quotient (odd `d`).
        #[arg(long)]
        squares: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstructionArg {
    Grid,
    Sphere,
}

/// Exit status beyond success.
#[derive(Debug)]
enum Status {
    Falsified,
    Guard,
}

struct Output {
    text: String,
    status: Option<Status>,
}

impl Output {
    fn json(value: &impl serde::Serialize) -> anyhow::Result<Output> {
        Ok(Output {
            text: serde_json::to_string_pretty(value)? + "\n",
            status: None,
        })
    }

    fn with_status(mut self, status: Option<Status>) -> Output {
        self.status = status;
        self
    }
}

fn load_set(spec: &str, field: Option<Arc<Field>>, d: usize) -> anyhow::Result<PointSet> {
    if let Some(rest) = spec.strip_prefix("random:") {
        let (size, seed) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("expected random:<size>:<seed>, got {spec:?}"))?;
        let field = field.ok_or_else(|| anyhow!("random sets need --q or --p/--ell"))?;
        let space = Space::new(&field, d)?;
        return Ok(sample_subset(&space, size.parse()?, seed.parse()?, 0)?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let set = PointSet::from_text(&text)?;
    if let Some(f) = field {
        if !f.same_as(set.field()) || set.space().dim() != d {
            bail!(
                "{spec} is over F_{}^{}, not the requested space",
                set.field().order(),
                set.space().dim()
            );
        }
    }
    Ok(set)
}

fn sweep_config(cli: &Cli, cmd: &Command) -> anyhow::Result<ExperimentConfig> {
    let Command::Sweep {
        field,
        d,
        k,
        edges,
        r,
        sizes,
        trials,
        method,
        timing,
    } = cmd
    else {
        unreachable!()
    };
    let mut config = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let (p, ell) = field
                .resolve()?
                .ok_or_else(|| anyhow!("pass --q, --p or --config"))?;
            ExperimentConfig::new(p, ell, 2, 1)
        }
    };
    if let Some((p, ell)) = field.resolve()? {
        config.p = p;
        config.ell = ell;
    }
    config.d = d.unwrap_or(config.d);
    config.k = k.unwrap_or(config.k);
    config.edges = edges.clone().unwrap_or(config.edges);
    config.r = r.clone().unwrap_or(config.r);
    config.sizes = sizes.clone().unwrap_or(config.sizes);
    config.trials = trials.unwrap_or(config.trials);
    config.method = method.unwrap_or(config.method);
    config.seed = cli.seed.unwrap_or(config.seed);
    config.guard_nodes = cli.guard_nodes.unwrap_or(config.guard_nodes);
    config.timing |= timing;
    Ok(config)
}

fn quotient_config(cli: &Cli, cmd: &Command) -> anyhow::Result<QuotientConfig> {
    let Command::Quotient {
        field,
        d,
        size,
        trials,
        squares,
    } = cmd
    else {
        unreachable!()
    };
    let mut config = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let (p, ell) = field
                .resolve()?
                .ok_or_else(|| anyhow!("pass --q, --p or --config"))?;
            QuotientConfig {
                p,
                ell,
                d: 2,
                size: None,
                trials: 100,
                seed: 0,
                part: QuotientPart::Full,
            }
        }
    };
    if let Some((p, ell)) = field.resolve()? {
        config.p = p;
        config.ell = ell;
    }
    config.d = d.unwrap_or(config.d);
    config.size = size.or(config.size);
    config.trials = trials.unwrap_or(config.trials);
    config.seed = cli.seed.unwrap_or(config.seed);
    if *squares {
        config.part = QuotientPart::Squares;
    }
    Ok(config)
}

fn render_pairs(
    space: &Space,
    xs: &[fqdilate::geometry::Point],
    ys: &[fqdilate::geometry::Point],
) -> Value {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| json!([space.render(x), space.render(y)]))
        .collect()
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let guard = cli.guard_nodes.unwrap_or(DEFAULT_NODE_GUARD);
    match &cli.command {
        cmd @ Command::Sweep { .. } => {
            let config = sweep_config(cli, cmd)?;
            let records = run_threshold_sweep(&config)?;
            let text = match cli.format {
                Format::Csv => records_to_csv(&records)?,
                Format::Json => {
                    let body = json!({
                        "config": config,
                        "summary": summarize(&records),
                        "records": records,
                    });
                    serde_json::to_string_pretty(&body)? + "\n"
                }
            };
            let guard_hit = records.iter().any(|r| r.guard());
            Ok(Output {
                text,
                status: guard_hit.then_some(Status::Guard),
            })
        }
        Command::Verify {
            field,
            d,
            k,
            edges,
            r,
            set,
        } => {
            let field = field.field().ok();
            let set = load_set(set, field, *d)?;
            let edges = edge_set(edges, *k)?;
            let reports = resolve_ratios(set.field(), r)?
                .into_iter()
                .map(|r| verify_chain(&set, r, &edges, guard))
                .collect::<Result<Vec<_>, _>>()?;
            let failed = reports.iter().any(|rep| !rep.flags.all_pass());
            let out = if reports.len() == 1 {
                Output::json(&reports[0])?
            } else {
                Output::json(&reports)?
            };
            Ok(out.with_status(failed.then_some(Status::Falsified)))
        }
        Command::Search {
            field,
            d,
            k,
            shape,
            r,
            set,
            method,
        } => {
            let field = field.field().ok();
            let set = load_set(set, field, *d)?;
            let edges = edge_set(shape, *k)?;
            let space = set.space();
            let mut guard_hit = false;
            let mut results = Vec::new();
            for ratio in resolve_ratios(set.field(), r)? {
                let (used, report) = run_method(&set, ratio, &edges, *method, guard)?;
                let (outcome, witness) = match &report.outcome {
                    SearchOutcome::Found(w) => ("FOUND", render_pairs(space, &w.xs, &w.ys)),
                    SearchOutcome::NoWitness => ("NONE", Value::Null),
                    SearchOutcome::GuardExceeded => {
                        guard_hit = true;
                        ("GUARD", Value::Null)
                    }
                };
                results.push(json!({
                    "r": set.field().render(ratio),
                    "edges": edges.to_string(),
                    "method": used.name(),
                    "outcome": outcome,
                    "nodes": report.nodes,
                    "witness": witness,
                }));
            }
            Ok(Output::json(&results)?.with_status(guard_hit.then_some(Status::Guard)))
        }
        Command::Sharpness {
            construction,
            field,
            edges,
            k,
            r,
        } => {
            let (label, set, default_r, default_edges) = match construction {
                ConstructionArg::Grid => {
                    let (p, ell) = match field.resolve()? {
                        Some(pe) if field.q.is_none() => pe,
                        _ => bail!("the grid takes --p and --ell"),
                    };
                    let grid = build_subfield_grid(p, ell)?;
                    let label = Construction::SubfieldGrid { p: grid.p, ell };
                    (label, grid.set.clone(), grid.admissible_r.clone(), "single")
                }
                ConstructionArg::Sphere => {
                    let q = match (field.q, field.resolve()?) {
                        (Some(q), _) => q,
                        (None, Some((p, ell))) => p.pow(ell),
                        _ => bail!("the sphere takes --q"),
                    };
                    let set = build_unit_sphere(q)?;
                    let f = set.field().clone();
                    let ratios: Vec<FieldElem> = f
                        .squares_nonzero()
                        .into_iter()
                        .filter(|&x| x != f.one())
                        .collect();
                    (
                        Construction::UnitSphere { q: f.order() },
                        set,
                        ratios,
                        "triangle",
                    )
                }
            };
            let ratios = match r {
                Some(text) => resolve_ratios(set.field(), text)?,
                None => default_r,
            };
            let spec = edges.as_deref().unwrap_or(default_edges);
            let shapes: Vec<EdgeSet> = match spec {
                "single" => {
                    let mut all = single_edges(1)?;
                    all.extend(single_edges(k.unwrap_or(2))?);
                    all.dedup();
                    all
                }
                "cycle" => vec![edge_set(spec, k.unwrap_or(2))?],
                other => vec![EdgeSet::parse(other, k.unwrap_or(1))?],
            };
            let certs = certify_all(label, &set, &ratios, &shapes, guard)?;
            let report: Vec<Value> = certs
                .iter()
                .map(|c| {
                    let mut v = serde_json::to_value(c).expect("certificate serializes");
                    v["valid"] = json!(c.valid());
                    v
                })
                .collect();
            let guard_hit = certs.iter().any(|c| !c.exhausted);
            Ok(Output::json(&report)?.with_status(guard_hit.then_some(Status::Guard)))
        }
        Command::Ortho { field, d, list } => {
            let f = field.field()?;
            let group = enumerate_orthogonal(&f, *d)?;
            let mut body = json!({ "q": f.order(), "d": d, "order": group.len() });
            if *list {
                body["matrices"] = group.iter().map(|m| json!(m.render(&f))).collect();
            }
            Output::json(&body)
        }
        cmd @ Command::Quotient { .. } => {
            let config = quotient_config(cli, cmd)?;
            let report = run_quotient_check(&config)?;
            let failed = !report.all_pass();
            Ok(Output::json(&report)?.with_status(failed.then_some(Status::Falsified)))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Falsified(_)) => 2,
        Some(Error::GuardExceeded(_)) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    let output = match run(&cli) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(exit_code(&err));
        }
    };
    let written = match &cli.out {
        Some(path) => {
            fs::write(path, &output.text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{}", output.text);
            Ok(())
        }
    };
    if let Err(err) = written {
        eprintln!("error: {err:#}");
        return ExitCode::from(4);
    }
    match output.status {
        None => ExitCode::SUCCESS,
        Some(Status::Falsified) => ExitCode::from(2),
        Some(Status::Guard) => ExitCode::from(3),
    }
}
