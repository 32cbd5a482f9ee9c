use std::path::{Path, PathBuf};

use auxsel_core::dsep::{self, LatentPartition, PartitionFile};
use auxsel_core::metrics;
use auxsel_core::mixing::{self, MixingKind, MixingSpec};
use auxsel_core::pipeline::{self, PipelineOptions};
use auxsel_core::rank::{self, Variant, Verdict};
use auxsel_core::scm::{self, Noise, NoiseFamily, ScmFile, ScmSpec};
use auxsel_core::select::{self, SelectOptions};
use auxsel_core::Dag;

use crate::error::CliError;
use crate::io::*;

pub fn dsep(graph: &Path, a: &[String], b: &[String], given: &[String]) -> Result<(), CliError> {
    let dag = read_graph(graph)?;
    let separated = dsep::d_separated(&dag, &dag.ids_of(a)?, &dag.ids_of(b)?, &dag.ids_of(given)?)?;
    println!("d-separated: {separated}");
    Ok(())
}

pub fn partition(graph: &Path, given: &[String]) -> Result<(), CliError> {
    let dag = read_graph(graph)?;
    let p = dsep::partition(&dag, &dag.ids_of(given)?)?;
    print!("{}", to_json_line(&p.to_file(&dag)));
    Ok(())
}

pub fn select(graph: &Path, explain: bool, prune: bool) -> Result<(), CliError> {
    let dag = read_graph(graph)?;
    let report = select::select(&dag, SelectOptions { prune })?;
    print!("{}", to_json_line(&report.summary(&dag, explain)));
    Ok(())
}

pub struct Simulate {
    pub graph: PathBuf,
    pub seed: u64,
    pub rows: usize,
    pub out: PathBuf,
    pub spec_out: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub noise: Option<NoiseFamily>,
}

fn read_spec(dag: &Dag, path: &Path) -> Result<ScmSpec, CliError> {
    let file: ScmFile = read_json(path)?;
    Ok(ScmSpec::from_file(dag, &file)?)
}

pub fn simulate(args: Simulate) -> Result<(), CliError> {
    let mut inputs = vec![args.graph.as_path()];
    inputs.extend(args.spec.as_deref());
    require_inputs(&inputs)?;
    if args.rows == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let dag = read_graph(&args.graph)?;
    let spec = match &args.spec {
        Some(path) => read_spec(&dag, path)?,
        None => {
            let spec = scm::random_spec(&dag, args.seed);
            match args.noise {
                Some(family) => spec.with_noise(vec![Noise { family, scale: 1.0 }; dag.n()])?,
                None => spec,
            }
        }
    };
    let z = scm::sample(&spec, args.rows)?;
    let csv = z.to_csv()?;
    write_atomic(&args.out, &csv)?;
    if let Some(path) = &args.spec_out {
        write_atomic(path, &to_json_pretty(&spec.to_file()))?;
    }
    Ok(())
}

pub fn mixing_spec(
    kind: MixingKind,
    dim: Option<usize>,
    graph: Option<&Path>,
    layers: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let dim = match (dim, graph) {
        (Some(d), _) => d,
        (None, Some(g)) => read_graph(g)?.n(),
        (None, None) => return Err(CliError::Usage("either --dim or --graph is required".into())),
    };
    let spec = mixing::random_mixing(kind, dim, seed, layers)?;
    write_atomic(out, &to_json_pretty(&spec))
}

pub fn mix(spec: &Path, input: &Path, out: &Path, inverse: bool) -> Result<(), CliError> {
    require_inputs(&[spec, input])?;
    let spec: MixingSpec = read_json(spec)?;
    spec.validate()?;
    let data = read_samples(input)?;
    let result = if inverse { mixing::inverse(&spec, &data)? } else { mixing::forward(&spec, &data)? };
    write_atomic(out, &result.to_csv()?)
}

pub struct CheckRank {
    pub graph: PathBuf,
    pub spec: PathBuf,
    pub partition: Option<PathBuf>,
    pub variant: Variant,
    pub samples: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    pub strict: bool,
    pub out: Option<PathBuf>,
}

pub fn check_rank(args: CheckRank) -> Result<(), CliError> {
    let mut inputs = vec![args.graph.as_path(), args.spec.as_path()];
    inputs.extend(args.partition.as_deref());
    require_inputs(&inputs)?;
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let dag = read_graph(&args.graph)?;
    let spec = read_spec(&dag, &args.spec)?;
    let partition = match &args.partition {
        Some(path) => {
            let file: PartitionFile = read_json(path)?;
            LatentPartition::from_file(&dag, &file)?
        }
        None => select::select(&dag, SelectOptions::default())?.partition,
    };
    let samples = args.samples.unwrap_or(4 * partition.group_count());
    let report = rank::check_scm(&spec, &partition, args.variant, samples, args.seed, args.tol)?;
    let text = to_json_pretty(&report);
    match &args.out {
        Some(path) => write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    if args.strict && report.verdict == Verdict::Violated {
        return Err(CliError::Violated);
    }
    Ok(())
}

pub fn evaluate(truth: &Path, est: &Path, out: Option<&Path>) -> Result<(), CliError> {
    require_inputs(&[truth, est])?;
    let z = read_samples(truth)?;
    let z_hat = read_samples(est)?;
    let report = metrics::evaluate(&z, &z_hat)?;
    let text = to_json_pretty(&report);
    match out {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub struct Pipeline {
    pub graph: PathBuf,
    pub out_dir: PathBuf,
    pub strict: bool,
    pub options: PipelineOptions,
}

pub fn pipeline(args: Pipeline) -> Result<(), CliError> {
    if args.options.rows == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let dag = read_graph(&args.graph)?;
    let output = pipeline::run(&dag, &args.options)?;
    write_bundle(&args.out_dir, &output.files)?;
    eprintln!(
        "wrote {} files to {} (mcc {:.6}, rank {}/{} {})",
        output.files.len(),
        args.out_dir.display(),
        output.report.mcc,
        output.rank.achieved_rank,
        output.rank.required_rank,
        if output.rank.verdict == Verdict::Satisfied { "satisfied" } else { "violated" },
    );
    if args.strict && output.rank.verdict == Verdict::Violated {
        return Err(CliError::Violated);
    }
    Ok(())
}
