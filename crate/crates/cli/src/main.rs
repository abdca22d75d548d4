use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mlpart_core::algdist::{algebraic_distances, RelaxationParams};
use mlpart_core::harness::generators::{grid2d, preferential_attachment, random_connected};
use mlpart_core::harness::{run_experiment, ExperimentOptions, MixtureSpec, NamedGraph, DEFAULT_SEEDS};
use mlpart_core::{
    coarsen, normalize_and_round, partition_graph, read_graph, write_graph, write_partition_string, Config,
    EdgeRating, MatchingSchedule, PenaltyForm, Preset,
};

#[derive(Parser, Debug)]
#[command(name = "mlpart", version, about = "Multilevel k-way graph partitioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition a graph file and write one block id per line
    Partition(PartitionArgs),
    /// Print the algebraic distance of every edge as "u v rho" (1-based ids)
    Rho(RhoArgs),
    /// Coarsen a graph and write the coarsest level with integer edge weights
    ExportCoarsest(ExportArgs),
    /// Build a star-like mixture from a TOML description
    GenHard {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic graph
    GenGraph {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run every graph/preset/k/seed combination and write CSV reports
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
enum Family {
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    /// Preferential attachment
    Pa {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        attach: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random spanning tree plus extra edges
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        extra: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Eco,
    EcoAlg,
    AmgEco,
    Strong,
    Amg,
    FCycle,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Eco => Preset::Eco,
            PresetArg::EcoAlg => Preset::EcoAlg,
            PresetArg::AmgEco => Preset::AmgEco,
            PresetArg::Strong => Preset::Strong,
            PresetArg::Amg => Preset::Amg,
            PresetArg::FCycle => Preset::FCycle,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MatchingArg {
    Random,
    Gpa,
    Randomgpa,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RatingArg {
    Exp2,
    Innerouter,
    Exalg,
}

impl From<RatingArg> for EdgeRating {
    fn from(r: RatingArg) -> Self {
        match r {
            RatingArg::Exp2 => EdgeRating::ExpansionSquared,
            RatingArg::Innerouter => EdgeRating::InnerOuter,
            RatingArg::Exalg => EdgeRating::ExAlg,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PenaltyArg {
    Overload,
    Printed,
}

#[derive(Args, Debug)]
struct Tuning {
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.03)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = PresetArg::Eco)]
    preset: PresetArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the preset's matching algorithm
    #[arg(long, value_enum)]
    matching: Option<MatchingArg>,
    /// Edge rating for GPA matching (default exp2)
    #[arg(long, value_enum)]
    rating: Option<RatingArg>,
    /// Coupling strength threshold for seed selection
    #[arg(long)]
    theta: Option<f64>,
    /// Strongest seed neighbors considered per node
    #[arg(long)]
    kappa: Option<usize>,
    /// Aggregate volume cap (default: L_max)
    #[arg(long)]
    max_agg_volume: Option<f64>,
    #[arg(long)]
    coarsest_attempts: Option<usize>,
    /// Nodes per block below which coarsening stops
    #[arg(long)]
    stop_threshold: Option<usize>,
    #[arg(long)]
    max_stall: Option<usize>,
    #[arg(long, value_enum)]
    penalty_form: Option<PenaltyArg>,
}

impl Tuning {
    fn config(&self) -> Result<Config> {
        let mut config = Config::new(self.k, self.preset.into())
            .with_seed(self.seed)
            .with_epsilon(self.epsilon);
        let rating = self.rating.map(EdgeRating::from);
        config.matching_override = match (self.matching, rating) {
            (None, None) => None,
            (Some(MatchingArg::Random), _) => Some(MatchingSchedule::Random),
            (Some(MatchingArg::Randomgpa), r) => {
                Some(MatchingSchedule::RandomGpa(r.unwrap_or(EdgeRating::ExpansionSquared)))
            }
            (Some(MatchingArg::Gpa) | None, r) => {
                let r = r.unwrap_or(EdgeRating::ExpansionSquared);
                Some(MatchingSchedule::Gpa { first: r, rest: r })
            }
        };
        if config.matching_override.is_some() && matches!(self.preset, PresetArg::Amg | PresetArg::AmgEco) {
            bail!("--matching/--rating apply to matching-based presets only");
        }
        if let Some(theta) = self.theta {
            config.theta = theta;
        }
        if let Some(kappa) = self.kappa {
            config.kappa = kappa;
        }
        config.max_aggregate_volume = self.max_agg_volume;
        if let Some(a) = self.coarsest_attempts {
            config.coarsest.attempts = a;
        }
        if let Some(t) = self.stop_threshold {
            config.coarsest.stop_threshold = t;
        }
        if let Some(s) = self.max_stall {
            config.max_stall = s;
        }
        if let Some(PenaltyArg::Printed) = self.penalty_form {
            config.penalty = PenaltyForm::Printed;
        }
        Ok(config)
    }
}

#[derive(Args, Debug)]
struct PartitionArgs {
    graph: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long, default_value_t = 1)]
    iterations: usize,
    /// Partition file; stdout if omitted
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RhoArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    vectors: usize,
    #[arg(long, default_value_t = 20)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ExportArgs {
    graph: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, num_args = 1.., required = true)]
    graphs: Vec<PathBuf>,
    /// Comma-separated preset names
    #[arg(long, default_value = "eco,eco-alg,amg-eco")]
    presets: String,
    #[arg(long, default_value = "2,4,8")]
    ks: String,
    /// "a..b" (inclusive) or a comma-separated list
    #[arg(long, default_value = "1..10")]
    seeds: String,
    #[arg(long, default_value_t = 0.03)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    iterations: usize,
    #[arg(long)]
    out: PathBuf,
    /// Ratios CSV; defaults to `<out>` with a `.ratios.csv` suffix
    #[arg(long)]
    ratios: Option<PathBuf>,
    /// Leave out the timing columns so reports compare byte for byte
    #[arg(long)]
    no_timings: bool,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("bad {what} '{s}': {e}")))
        .collect()
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty seed range {text}");
        }
        return Ok((a..=b).collect());
    }
    parse_list(text, "seed")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn load(path: &Path) -> Result<mlpart_core::Graph> {
    read_graph(path).with_context(|| format!("cannot read graph {}", path.display()))
}

fn partition(args: &PartitionArgs) -> Result<ExitCode> {
    let g = load(&args.graph)?;
    let config = args.tuning.config()?;
    let out = partition_graph(&g, &config, args.iterations)?;
    let p = &out.partition;
    let text = write_partition_string(p.assignment());
    match &args.output {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    let max_block = p.block_weights().iter().copied().fold(0.0, f64::max);
    eprintln!(
        "preset {} k {} cut {} max block {} (L_max {:.2}) levels {} time {:.1} ms",
        config.preset,
        config.k,
        p.cut(),
        max_block,
        p.l_max(),
        out.stats.levels,
        out.stats.total_time.as_secs_f64() * 1e3
    );
    if p.is_balanced() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: partition violates the balance constraint");
        Ok(ExitCode::from(2))
    }
}

fn rho(args: &RhoArgs) -> Result<()> {
    let g = load(&args.graph)?;
    let params = RelaxationParams {
        alpha: args.alpha,
        num_vectors: args.vectors,
        iterations: args.iterations,
        seed: args.seed,
    };
    let rho = algebraic_distances(&g, &params)?;
    let mut w = BufWriter::new(io::stdout().lock());
    for (e, (u, v, _)) in g.edges().enumerate() {
        writeln!(w, "{} {} {}", u + 1, v + 1, rho.rho(e))?;
    }
    w.flush()?;
    Ok(())
}

fn export_coarsest(args: &ExportArgs) -> Result<()> {
    let g = load(&args.graph)?;
    let config = args.tuning.config()?;
    let h = coarsen(&g, &config)?;
    let coarsest = normalize_and_round(h.coarsest(), config.seed);
    write_graph(&coarsest, &args.output)?;
    eprintln!("{} levels, coarsest graph has {} nodes and {} edges", h.len(), coarsest.n(), coarsest.m());
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let presets: Vec<Preset> = parse_list(&args.presets, "preset")?;
    let ks: Vec<usize> = parse_list(&args.ks, "k")?;
    let seeds = if args.seeds.is_empty() {
        DEFAULT_SEEDS.to_vec()
    } else {
        parse_seeds(&args.seeds)?
    };
    let graphs = args
        .graphs
        .iter()
        .map(|path| {
            let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok(NamedGraph { name, graph: load(path)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let options = ExperimentOptions {
        epsilon: args.epsilon,
        iterations: args.iterations,
    };
    let report = run_experiment(&graphs, &presets, &ks, &seeds, &options);
    report.write_csv(create(&args.out)?, !args.no_timings)?;
    let ratios = args
        .ratios
        .clone()
        .unwrap_or_else(|| args.out.with_extension("ratios.csv"));
    report.write_ratios_csv(create(&ratios)?)?;
    let failed = report.runs.iter().filter(|r| r.outcome.is_err()).count();
    eprintln!("{} runs ({failed} failed), ratios in {}", report.runs.len(), ratios.display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Partition(args) => return partition(&args),
        Command::Rho(args) => rho(&args)?,
        Command::ExportCoarsest(args) => export_coarsest(&args)?,
        Command::GenHard { spec, out } => {
            let g = MixtureSpec::generate_from_file(&spec)?;
            write_graph(&g, &out)?;
            eprintln!("mixture with {} nodes and {} edges", g.n(), g.m());
        }
        Command::GenGraph { family, out } => {
            let g = match family {
                Family::Grid { rows, cols } => grid2d(rows, cols),
                Family::Pa { n, attach, seed } => {
                    if attach == 0 || n <= attach {
                        bail!("need n > attach >= 1");
                    }
                    preferential_attachment(n, attach, seed)
                }
                Family::Random { n, extra, seed } => random_connected(n, extra, seed),
            };
            match out {
                Some(path) => write_graph(&g, &path)?,
                None => io::stdout().lock().write_all(mlpart_core::write_graph_string(&g).as_bytes())?,
            }
        }
        Command::Bench(args) => bench(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
