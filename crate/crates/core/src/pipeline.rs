//! graph -> select -> simulate -> mix -> exact inverse -> evaluate, with the
//! rank check on the selected partition. Everything is computed in memory so
//! callers can write the bundle only once it is complete.

use serde::Serialize;

use crate::error::Result;
use crate::graph::Dag;
use crate::metrics::{evaluate, EvalReport};
use crate::mixing::{forward, inverse, random_mixing, MixingKind, MixingSpec};
use crate::rank::{check_scm, RankReport, Variant, DEFAULT_RANK_TOLERANCE};
use crate::scm::{random_spec, sample, ScmSpec};
use crate::select::{select, SelectOptions, SelectionReport};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub seed: u64,
    pub rows: usize,
    pub mixing: MixingKind,
    pub layers: usize,
    pub variant: Variant,
    /// conditioning samples for the rank check; `None` means 4 per group
    pub rank_samples: Option<usize>,
    pub tolerance: f64,
    pub select: SelectOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            seed: 0,
            rows: 10_000,
            mixing: MixingKind::AdditiveCouplingStack,
            layers: 3,
            variant: Variant::Direct,
            rank_samples: None,
            tolerance: DEFAULT_RANK_TOLERANCE,
            select: SelectOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub selection: SelectionReport,
    pub spec: ScmSpec,
    pub mixing: MixingSpec,
    pub rank: RankReport,
    pub report: EvalReport,
    /// (file name, contents) in write order
    pub files: Vec<(String, String)>,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn run(dag: &Dag, options: &PipelineOptions) -> Result<PipelineOutput> {
    let selection = select(dag, options.select)?;
    let spec = random_spec(dag, options.seed);
    let z = sample(&spec, options.rows)?;
    // coupling needs two coordinates; fall back to a rotation below that
    let kind = if dag.n() < 2 { MixingKind::SpecialOrthogonal } else { options.mixing };
    let mixing = random_mixing(kind, dag.n(), options.seed, options.layers)?;
    let x = forward(&mixing, &z)?;
    let z_hat = inverse(&mixing, &x)?;
    let report = evaluate(&z, &z_hat)?;
    let samples = options.rank_samples.unwrap_or(4 * selection.group_count);
    let rank = check_scm(
        &spec,
        &selection.partition,
        options.variant,
        samples,
        options.seed,
        options.tolerance,
    )?;

    let files = vec![
        ("spec.json".to_string(), json(&spec.to_file())),
        ("mix.json".to_string(), json(&mixing)),
        ("selection.json".to_string(), json(&selection.summary(dag, true))),
        ("partition.json".to_string(), json(&selection.partition.to_file(dag))),
        ("z.csv".to_string(), z.to_csv()?),
        ("x.csv".to_string(), x.to_csv()?),
        ("rank.json".to_string(), json(&rank)),
        ("report.json".to_string(), json(&report)),
    ];
    Ok(PipelineOutput { selection, spec, mixing, rank, report, files })
}
