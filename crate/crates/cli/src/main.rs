//! `auxsel`: select conditioning sources, simulate, mix, check and score.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use auxsel_core::mixing::MixingKind;
use auxsel_core::rank::{Variant, DEFAULT_RANK_TOLERANCE};
use auxsel_core::scm::NoiseFamily;

#[derive(Parser)]
#[command(name = "auxsel", version, about = "Observed-source selection and latent-recovery toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// graph JSON: {"nodes":[{"id","label","observed"}],"edges":[[from,to]]}
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct SeedArg {
    #[arg(long, env = "AUXSEL_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Decide d-separation of two node sets given a third
    Dsep {
        #[command(flatten)]
        graph: GraphArg,
        /// comma-separated labels
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Partition the unobserved nodes given observed conditioning nodes
    Partition {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Choose the conditioning subset with the finest partition
    Select {
        #[command(flatten)]
        graph: GraphArg,
        /// include candidates, pruned nodes and the per-subset table
        #[arg(long)]
        explain: bool,
        /// keep observed nodes that act only as colliders
        #[arg(long)]
        no_prune: bool,
    },
    /// Sample a linear SCM over the graph to CSV
    Simulate {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// write the sampled coefficients and noise as JSON
        #[arg(long)]
        spec_out: Option<PathBuf>,
        /// replay an existing spec instead of drawing one (its seed is used)
        #[arg(long, conflicts_with = "noise")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        noise: Option<NoiseArg>,
    },
    /// Generate a volume-preserving mixing spec
    MixingSpec {
        #[arg(long, value_enum, default_value_t = KindArg::AdditiveCouplingStack)]
        kind: KindArg,
        /// dimension; defaults to the node count of --graph
        #[arg(long, required_unless_present = "graph")]
        dim: Option<usize>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a mixing spec (or its inverse) to every row of a CSV
    Mix {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Check the rank condition on the conditional score vectors
    CheckRank {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        spec: PathBuf,
        /// partition JSON; defaults to the selected partition
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = VariantArg::Direct)]
        variant: VariantArg,
        /// number of conditioning draws M; defaults to 4 per group
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = DEFAULT_RANK_TOLERANCE)]
        tol: f64,
        /// exit 1 when the verdict is "violated"
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score estimated latents against true latents (MCC, D, C)
    Evaluate {
        #[arg(long = "true")]
        truth: PathBuf,
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// select -> simulate -> mix -> exact inverse -> check-rank -> evaluate
    Pipeline {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = KindArg::AdditiveCouplingStack)]
        mixing: KindArg,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Direct)]
        variant: VariantArg,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_RANK_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        no_prune: bool,
        /// exit 1 when the rank verdict is "violated" (the bundle is still written)
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    SpecialOrthogonal,
    AdditiveCouplingStack,
}

impl From<KindArg> for MixingKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::SpecialOrthogonal => MixingKind::SpecialOrthogonal,
            KindArg::AdditiveCouplingStack => MixingKind::AdditiveCouplingStack,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Direct,
    Subtracted,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Direct => Variant::Direct,
            VariantArg::Subtracted => Variant::Subtracted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Gaussian,
    Laplace,
}

impl From<NoiseArg> for NoiseFamily {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Gaussian => NoiseFamily::Gaussian,
            NoiseArg::Laplace => NoiseFamily::Laplace,
        }
    }
}

fn dispatch(command: Command) -> Result<(), error::CliError> {
    use commands::*;
    match command {
        Command::Dsep { graph, a, b, given } => dsep(&graph.graph, &a, &b, &given),
        Command::Partition { graph, given } => partition(&graph.graph, &given),
        Command::Select { graph, explain, no_prune } => select(&graph.graph, explain, !no_prune),
        Command::Simulate { graph, seed, n, out, spec_out, spec, noise } => simulate(Simulate {
            graph: graph.graph,
            seed: seed.seed,
            rows: n,
            out,
            spec_out,
            spec,
            noise: noise.map(Into::into),
        }),
        Command::MixingSpec { kind, dim, graph, layers, seed, out } => {
            mixing_spec(kind.into(), dim, graph.as_deref(), layers, seed.seed, &out)
        }
        Command::Mix { spec, input, out, inverse } => mix(&spec, &input, &out, inverse),
        Command::CheckRank { graph, spec, partition, variant, samples, seed, tol, strict, out } => {
            check_rank(CheckRank {
                graph: graph.graph,
                spec,
                partition,
                variant: variant.into(),
                samples,
                seed: seed.seed,
                tol,
                strict,
                out,
            })
        }
        Command::Evaluate { truth, est, out } => evaluate(&truth, &est, out.as_deref()),
        Command::Pipeline { graph, seed, n, out_dir, mixing, layers, variant, samples, tol, no_prune, strict } => {
            pipeline(Pipeline {
                graph: graph.graph,
                out_dir,
                strict,
                options: auxsel_core::pipeline::PipelineOptions {
                    seed: seed.seed,
                    rows: n,
                    mixing: mixing.into(),
                    layers,
                    variant: variant.into(),
                    rank_samples: samples,
                    tolerance: tol,
                    select: auxsel_core::select::SelectOptions { prune: !no_prune },
                },
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("auxsel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
