use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ads_core::features::read_feature_matrix;
use ads_core::model::SavedModel;
use ads_core::pipeline::{
    self, drift_pair, features_stage, load_inputs, missingness_stage, run_pipeline, run_profile, train_stage,
    AtStage, DriftSummary, PipelineConfig, Stage, StageResult,
};
use ads_core::{report, save_table, synth, Dataset, Error, Table};
use clap::{Args, Parser, Subcommand};

/// Automated data-science toolkit for CSV tables.
#[derive(Debug, Parser)]
#[command(name = "ads", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Master seed; per-stage seeds are fixed offsets from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file (a run manifest is also accepted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    delimiter: Option<char>,
    /// Comma-separated tokens read as missing.
    #[arg(long, global = true, value_delimiter = ',')]
    na_tokens: Option<Vec<String>>,
    /// Flag numeric sentinel codes (e.g. -999) as missing.
    #[arg(long, global = true)]
    detect_sentinels: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Profile tables: types, structure, associations and missingness.
    Profile {
        inputs: Vec<PathBuf>,
    },
    /// Generate the feature matrix for an anchor column.
    Features {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        anchor: Option<String>,
        /// Label column, kept out of the features.
        #[arg(long)]
        label: Option<String>,
    },
    /// Train on features.csv in the output directory.
    Train {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Compare two tables; exits 3 on drift.
    Drift {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "new")]
        incoming: PathBuf,
        #[arg(long)]
        projections: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Score a feature matrix with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        lineage: Option<PathBuf>,
    },
    /// Run every configured stage; exits 3 when drift is detected.
    Run {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        anchor: Option<String>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long, num_args = 1..)]
        compare: Vec<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Write the bundled demo tables.
    DemoData {
        /// Customers in the planted churn dataset.
        #[arg(long, default_value_t = 600)]
        customers: usize,
    },
}

fn base_config(g: &Global) -> StageResult<PipelineConfig> {
    let mut c = match &g.config {
        Some(p) => PipelineConfig::from_file(p).at(Stage::Config)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(o) = &g.out {
        c.out = o.clone();
    }
    if let Some(d) = g.delimiter {
        c.delimiter = d;
    }
    if let Some(t) = &g.na_tokens {
        c.na.na_tokens = t.clone();
    }
    if g.detect_sentinels {
        c.na.detect_sentinels = true;
    }
    Ok(c)
}

fn set_inputs(c: &mut PipelineConfig, inputs: Vec<PathBuf>) {
    if !inputs.is_empty() {
        c.inputs = inputs;
    }
}

fn set_model(c: &mut PipelineConfig, folds: Option<usize>, budget: Option<usize>) {
    if let Some(f) = folds {
        c.model.prep.folds = f;
    }
    if let Some(b) = budget {
        c.model.budget = b;
    }
}

fn tables(c: &PipelineConfig, stage: Stage) -> StageResult<Vec<Table>> {
    Ok(load_inputs(&c.inputs, c).at(stage)?.into_iter().map(|(t, _)| t).collect())
}

fn mkdir(dir: &Path) -> StageResult<()> {
    std::fs::create_dir_all(dir).map_err(Error::from).at(Stage::Config)
}

fn list(artifacts: &[&str]) {
    for a in artifacts {
        println!("{a}");
    }
}

fn run(cli: Cli) -> StageResult<ExitCode> {
    let mut c = base_config(&cli.global)?;
    match cli.command {
        Command::Profile { inputs } => {
            set_inputs(&mut c, inputs);
            let mut written = Vec::new();
            run_profile(&c, &c.out, &mut written)?;
            written.iter().for_each(|a| println!("{a}"));
        }
        Command::Features { inputs, anchor, label } => {
            set_inputs(&mut c, inputs);
            if anchor.is_some() {
                c.anchor = anchor;
            }
            if label.is_some() {
                c.label = label;
            }
            let anchor = c
                .anchor
                .clone()
                .ok_or_else(|| Error::InvalidConfig("--anchor is required".into()))
                .at(Stage::Config)?;
            mkdir(&c.out)?;
            let ds = Dataset::new(tables(&c, Stage::Profile)?).at(Stage::Features)?;
            features_stage(&ds, &anchor, &c, &c.out).at(Stage::Features)?;
            list(&[pipeline::FEATURES_CSV, pipeline::LINEAGE_JSON, pipeline::RELATIONS_DOT]);
        }
        Command::Train {
            inputs,
            label,
            folds,
            budget,
        } => {
            set_inputs(&mut c, inputs);
            set_model(&mut c, folds, budget);
            if label.is_some() {
                c.label = label;
            }
            let label = c
                .label
                .clone()
                .ok_or_else(|| Error::InvalidConfig("--label is required".into()))
                .at(Stage::Config)?;
            let ts = tables(&c, Stage::Profile)?;
            let missing = missingness_stage(&ts, &c).at(Stage::Missingness)?;
            let matrix = read_feature_matrix(
                &c.out.join(pipeline::FEATURES_CSV),
                Some(&c.out.join(pipeline::LINEAGE_JSON)),
            )
            .at(Stage::Train)?;
            let ds = Dataset::new(ts).at(Stage::Train)?;
            let r = train_stage(&ds, &matrix, &label, &missing.systematic_columns(), &c, &c.out).at(Stage::Train)?;
            list(&[pipeline::MODEL_REPORT_JSON, pipeline::MODEL_JSON]);
            if let Some(auc) = r.test_metrics.auc {
                eprintln!("test auc {auc:.4}, accuracy {:.4}", r.test_metrics.accuracy);
            }
        }
        Command::Drift {
            reference,
            incoming,
            projections,
            alpha,
        } => {
            if let Some(k) = projections {
                c.drift.projections = k;
            }
            if let Some(a) = alpha {
                c.drift.alpha = a;
            }
            mkdir(&c.out)?;
            let load = |p: PathBuf| -> StageResult<Table> {
                Ok(load_inputs(&[p], &c).at(Stage::Drift)?.remove(0).0)
            };
            let (r, n) = (load(reference)?, load(incoming)?);
            let table = drift_pair(&r, &n, &c).at(Stage::Drift)?;
            let summary = DriftSummary {
                drift: table.report.drift,
                tables: vec![table],
            };
            report::write_json(&c.out.join(pipeline::DRIFT_JSON), &summary).at(Stage::Drift)?;
            list(&[pipeline::DRIFT_JSON]);
            if summary.drift {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Predict {
            model,
            features,
            lineage,
        } => {
            let m = SavedModel::load(&model).at(Stage::Train)?;
            let matrix = read_feature_matrix(&features, lineage.as_deref()).at(Stage::Train)?;
            let scores = m.predict(&matrix).at(Stage::Train)?;
            println!("{},score", matrix.anchor);
            for (k, s) in matrix.keys.iter().zip(scores) {
                println!("{k},{s}");
            }
        }
        Command::Run {
            inputs,
            anchor,
            label,
            compare,
            folds,
            budget,
        } => {
            set_inputs(&mut c, inputs);
            set_model(&mut c, folds, budget);
            if anchor.is_some() {
                c.anchor = anchor;
            }
            if label.is_some() {
                c.label = label;
            }
            if !compare.is_empty() {
                c.compare = compare;
            }
            let summary = run_pipeline(&c)?;
            summary.artifacts.iter().for_each(|a| println!("{a}"));
            if summary.drift == Some(true) {
                return Ok(ExitCode::from(3));
            }
        }
        Command::DemoData { customers } => {
            let illustrative = c.out.join("illustrative");
            let planted = c.out.join("planted");
            mkdir(&illustrative)?;
            mkdir(&planted)?;
            let (cust, orders) = synth::planted_ecommerce(customers, c.seed);
            let outputs = synth::illustrative_tables()
                .into_iter()
                .map(|t| (illustrative.clone(), t))
                .chain([(planted.clone(), cust), (planted, orders)]);
            for (dir, t) in outputs {
                let path = dir.join(format!("{}.csv", t.name()));
                save_table(&t, &path, b',').at(Stage::Config)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(2)
        }
    }
}
