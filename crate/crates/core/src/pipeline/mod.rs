//! End-to-end orchestration: profile, structure, missingness, features,
//! model and drift, each writing its artifacts to the output directory.
//!
//! Every JSON artifact is wrapped in the versioned envelope of
//! [`crate::report`]. Only `run-manifest.json` carries timestamps, so
//! reruns with the same configuration and inputs reproduce every other
//! artifact byte for byte.

pub mod dot;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::drift::{drift_tables, DriftConfig, TableDriftReport};
use crate::error::{Error, Result};
use crate::features::{
    build_relation_graph, generate_features_with_graph, write_feature_matrix, FeatureConfig, FeatureKind, FeatureMatrix,
};
use crate::infer::{profile_table, ColumnProfile, ProfileConfig};
use crate::ingest::{load_table, IngestOptions};
use crate::missingness::{analyze_missingness, ClusterExplanation, ExplainConfig};
use crate::model::{anchor_labels, build_model, ModelConfig, ModelReport};
use crate::na::{normalize_missing, NaOptions, SentinelReport};
use crate::relation::relation_dot;
use crate::report;
use crate::structure::{
    build_association_graph, build_schema_tree, mine_linear_constraints, AssociationGraph, ConstraintConfig,
    FdConfig, LinearConstraint, SchemaTree,
};
use crate::table::{Dataset, Table};

pub const PROFILE_JSON: &str = "profile.json";
pub const STRUCTURE_JSON: &str = "structure.json";
pub const SCHEMA_DOT: &str = "schema.dot";
pub const ASSOCIATIONS_DOT: &str = "associations.dot";
pub const MISSINGNESS_JSON: &str = "missingness.json";
pub const FEATURES_CSV: &str = "features.csv";
pub const LINEAGE_JSON: &str = "lineage.json";
pub const RELATIONS_DOT: &str = "relations.dot";
pub const MODEL_REPORT_JSON: &str = "model_report.json";
pub const MODEL_JSON: &str = "model.json";
pub const DRIFT_JSON: &str = "drift.json";
pub const MANIFEST_JSON: &str = "run-manifest.json";

/// Offsets added to the master seed for each randomized step.
pub mod seeds {
    pub const CONSTRAINTS: u64 = 1;
    /// The model uses this for the split, `+1` for folds and `+2` for search.
    pub const MODEL: u64 = 2;
    pub const DRIFT: u64 = 5;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissingnessConfig {
    pub jaccard_threshold: f64,
    pub explain: ExplainConfig,
}

impl Default for MissingnessConfig {
    fn default() -> Self {
        Self {
            jaccard_threshold: 0.8,
            explain: ExplainConfig::default(),
        }
    }
}

/// Complete run configuration. `features.profile`, `features.fd` and
/// `features.label` are overwritten from the top-level fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    /// Tables compared against `inputs` (matched by file stem) for drift.
    pub compare: Vec<PathBuf>,
    pub anchor: Option<String>,
    pub label: Option<String>,
    pub seed: u64,
    pub out: PathBuf,
    pub delimiter: char,
    pub na: NaOptions,
    pub profile: ProfileConfig,
    pub fd: FdConfig,
    pub association_threshold: f64,
    pub constraints: ConstraintConfig,
    pub missingness: MissingnessConfig,
    pub features: FeatureConfig,
    pub model: ModelConfig,
    pub drift: DriftConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            compare: Vec::new(),
            anchor: None,
            label: None,
            seed: 0,
            out: PathBuf::from("ads-out"),
            delimiter: ',',
            na: NaOptions::default(),
            profile: ProfileConfig::default(),
            fd: FdConfig::default(),
            association_threshold: 0.9,
            constraints: ConstraintConfig::default(),
            missingness: MissingnessConfig::default(),
            features: FeatureConfig::default(),
            model: ModelConfig::default(),
            drift: DriftConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn ingest_options(&self) -> Result<IngestOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidConfig(format!("delimiter `{}` is not ASCII", self.delimiter)));
        }
        Ok(IngestOptions {
            delimiter: self.delimiter as u8,
            ..IngestOptions::default()
        })
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            profile: self.profile.clone(),
            fd: self.fd.clone(),
            label: self.label.clone(),
            ..self.features.clone()
        }
    }

    /// Reads a JSON config file; a run manifest is accepted and its
    /// embedded config used.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
            _ => e.into(),
        })?;
        let artifact = |e: serde_json::Error| Error::Artifact {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(artifact)?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(artifact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Profile,
    Structure,
    Missingness,
    Features,
    Train,
    Drift,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Profile => "profile",
            Stage::Structure => "structure",
            Stage::Missingness => "missingness",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Drift => "drift",
        }
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Box<Error>,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.name(), self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(self.error.as_ref())
    }
}

impl StageError {
    /// Single-line `{"stage", "code", "message"}` JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "stage": self.stage.name(),
            "code": self.error.code(),
            "message": self.error.to_string(),
        })
        .to_string()
    }
}

pub trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError {
            stage,
            error: Box::new(error),
        })
    }
}

pub type StageResult<T> = std::result::Result<T, StageError>;

/// Loads and normalizes the given CSV files; tables are named by file stem.
pub fn load_inputs(paths: &[PathBuf], config: &PipelineConfig) -> Result<Vec<(Table, SentinelReport)>> {
    if paths.is_empty() {
        return Err(Error::InvalidConfig("no input files".into()));
    }
    let options = config.ingest_options()?;
    let mut names = BTreeSet::new();
    paths
        .iter()
        .map(|p| {
            let raw = load_table(p, &options)?;
            if !names.insert(raw.name().to_string()) {
                return Err(Error::InvalidConfig(format!("two inputs are named `{}`", raw.name())));
            }
            Ok(normalize_missing(&raw, &config.na))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableProfile {
    pub table: String,
    pub rows: usize,
    pub columns: Vec<ColumnProfile>,
    pub sentinels: SentinelReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub tables: Vec<TableProfile>,
}

pub fn profile_stage(tables: &[(Table, SentinelReport)], config: &PipelineConfig) -> ProfileReport {
    ProfileReport {
        tables: tables
            .par_iter()
            .map(|(t, s)| TableProfile {
                table: t.name().to_string(),
                rows: t.row_count(),
                columns: profile_table(t, &config.profile),
                sentinels: s.clone(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableStructure {
    pub table: String,
    pub schema: SchemaTree,
    pub associations: AssociationGraph,
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub tables: Vec<TableStructure>,
}

pub fn structure_stage(tables: &[Table], profiles: &ProfileReport, config: &PipelineConfig) -> Result<StructureReport> {
    let tables = tables
        .par_iter()
        .zip(&profiles.tables)
        .map(|(t, p)| {
            let schema = build_schema_tree(t, &config.fd)?;
            let associations = build_association_graph(t, &p.columns, config.association_threshold);
            let numeric: Vec<(&ColumnProfile, usize)> = p
                .columns
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_numeric())
                .map(|(j, c)| (c, j))
                .collect();
            let names: Vec<String> = numeric.iter().map(|(c, _)| c.name.clone()).collect();
            let values: Vec<Vec<Option<f64>>> = numeric
                .iter()
                .map(|(c, j)| t.columns()[*j].values.iter().map(|v| c.numeric_value(v)).collect())
                .collect();
            let constraints = mine_linear_constraints(&names, &values, &config.constraints, config.seed + seeds::CONSTRAINTS);
            Ok(TableStructure {
                table: t.name().to_string(),
                schema,
                associations,
                constraints,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StructureReport { tables })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMissingness {
    pub table: String,
    pub clusters: Vec<ClusterExplanation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingnessReport {
    pub tables: Vec<TableMissingness>,
}

impl MissingnessReport {
    /// Columns of clusters with at least one rule predicting missingness.
    pub fn systematic_columns(&self) -> BTreeSet<String> {
        self.tables
            .iter()
            .flat_map(|t| &t.clusters)
            .filter(|c| c.rules.iter().any(|r| r.predicted))
            .flat_map(|c| c.cluster.columns.iter().cloned())
            .collect()
    }
}

pub fn missingness_stage(tables: &[Table], config: &PipelineConfig) -> Result<MissingnessReport> {
    let tables = tables
        .iter()
        .map(|t| {
            Ok(TableMissingness {
                table: t.name().to_string(),
                clusters: analyze_missingness(t, config.missingness.jaccard_threshold, &config.missingness.explain)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MissingnessReport { tables })
}

/// Numeric features whose terminal column is systematically missing.
pub fn systematic_features(matrix: &FeatureMatrix, columns: &BTreeSet<String>) -> BTreeSet<String> {
    matrix
        .features
        .iter()
        .filter(|f| f.lineage.kind == FeatureKind::Numeric)
        .filter(|f| {
            let terminal = f.lineage.steps.last().map_or(matrix.anchor.as_str(), |s| s.to.as_str());
            columns.contains(terminal)
        })
        .map(|f| f.name.clone())
        .collect()
}

/// Writes the feature matrix, its lineage and the relation graph.
pub fn features_stage(dataset: &Dataset, anchor: &str, config: &PipelineConfig, out: &Path) -> Result<FeatureMatrix> {
    let fc = config.feature_config();
    let graph = build_relation_graph(dataset, &fc)?;
    std::fs::write(out.join(RELATIONS_DOT), relation_dot(&graph))?;
    let matrix = generate_features_with_graph(dataset, &graph, anchor, &fc)?;
    write_feature_matrix(&matrix, &out.join(FEATURES_CSV), &out.join(LINEAGE_JSON))?;
    Ok(matrix)
}

/// Builds and writes the model report and the saved model.
pub fn train_stage(
    dataset: &Dataset,
    matrix: &FeatureMatrix,
    label: &str,
    systematic_columns: &BTreeSet<String>,
    config: &PipelineConfig,
    out: &Path,
) -> Result<ModelReport> {
    let labels = anchor_labels(dataset, matrix, label)?;
    let systematic = systematic_features(matrix, systematic_columns);
    let (report, saved) = build_model(matrix, &labels, &systematic, &config.model, config.seed + seeds::MODEL)?;
    report::write_json(&out.join(MODEL_REPORT_JSON), &report)?;
    saved.save(&out.join(MODEL_JSON))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDrift {
    pub table: String,
    /// Columns left out: configured exclusions plus single-column keys.
    pub excluded: Vec<String>,
    pub report: TableDriftReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub tables: Vec<TableDrift>,
    pub drift: bool,
}

/// Drift for one table pair; single-column keys of the reference are
/// excluded alongside the configured columns.
pub fn drift_pair(reference: &Table, incoming: &Table, config: &PipelineConfig) -> Result<TableDrift> {
    let tree = build_schema_tree(reference, &config.fd)?;
    let mut excluded: Vec<String> = config.drift.exclude.clone();
    if let [key] = tree.key.as_slice() {
        let identifier = reference.column(key).is_some_and(crate::missingness::is_identifier);
        if identifier && tree.key_violation == 0.0 && !excluded.contains(key) {
            excluded.push(key.clone());
        }
    }
    let dc = DriftConfig {
        exclude: excluded.clone(),
        ..config.drift.clone()
    };
    Ok(TableDrift {
        table: reference.name().to_string(),
        excluded,
        report: drift_tables(reference, incoming, &dc, config.seed + seeds::DRIFT)?,
    })
}

/// Compares same-named tables; at least one name must match.
pub fn drift_stage(reference: &[Table], incoming: &[Table], config: &PipelineConfig) -> Result<DriftSummary> {
    let tables = reference
        .iter()
        .filter_map(|r| incoming.iter().find(|t| t.name() == r.name()).map(|t| (r, t)))
        .map(|(r, t)| drift_pair(r, t, config))
        .collect::<Result<Vec<_>>>()?;
    if tables.is_empty() {
        return Err(Error::InvalidConfig("no comparison table shares a name with an input".into()));
    }
    let drift = tables.iter().any(|t| t.report.drift);
    Ok(DriftSummary { tables, drift })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub artifacts: Vec<ArtifactDigest>,
}

pub fn digest(dir: &Path, name: &str) -> Result<ArtifactDigest> {
    let bytes = std::fs::read(dir.join(name))?;
    let hash = Sha256::digest(&bytes);
    Ok(ArtifactDigest {
        name: name.to_string(),
        bytes: bytes.len() as u64,
        sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub artifacts: Vec<String>,
    pub model: Option<ModelReport>,
    /// Present when a comparison dataset was given.
    pub drift: Option<bool>,
}

/// Writes the profile-stage artifacts: profile, structure, DOT diagrams
/// and missingness. Returns the normalized tables.
pub fn run_profile(config: &PipelineConfig, out: &Path, written: &mut Vec<String>) -> StageResult<(Vec<Table>, MissingnessReport)> {
    std::fs::create_dir_all(out).map_err(Error::from).at(Stage::Config)?;
    let loaded = load_inputs(&config.inputs, config).at(Stage::Profile)?;
    let profiles = profile_stage(&loaded, config);
    report::write_json(&out.join(PROFILE_JSON), &profiles).at(Stage::Profile)?;
    written.push(PROFILE_JSON.into());
    let tables: Vec<Table> = loaded.into_iter().map(|(t, _)| t).collect();

    let structure = structure_stage(&tables, &profiles, config).at(Stage::Structure)?;
    report::write_json(&out.join(STRUCTURE_JSON), &structure).at(Stage::Structure)?;
    let trees: Vec<SchemaTree> = structure.tables.iter().map(|t| t.schema.clone()).collect();
    std::fs::write(out.join(SCHEMA_DOT), dot::schema_dot(&trees)).map_err(Error::from).at(Stage::Structure)?;
    let graphs: Vec<(String, AssociationGraph)> = structure
        .tables
        .iter()
        .map(|t| (t.table.clone(), t.associations.without_key_edges()))
        .collect();
    std::fs::write(out.join(ASSOCIATIONS_DOT), dot::association_dot(&graphs)).map_err(Error::from).at(Stage::Structure)?;
    written.extend([STRUCTURE_JSON.into(), SCHEMA_DOT.into(), ASSOCIATIONS_DOT.into()]);

    let missing = missingness_stage(&tables, config).at(Stage::Missingness)?;
    report::write_json(&out.join(MISSINGNESS_JSON), &missing).at(Stage::Missingness)?;
    written.push(MISSINGNESS_JSON.into());
    Ok((tables, missing))
}

/// Runs every configured stage. Artifacts of completed stages stay on disk
/// when a later stage fails. Features need `anchor`, training needs
/// `label`, drift needs `compare`.
pub fn run_pipeline(config: &PipelineConfig) -> StageResult<RunSummary> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let out = config.out.as_path();
    let mut written = Vec::new();
    let (tables, missing) = run_profile(config, out, &mut written)?;

    let mut model = None;
    if config.label.is_some() && config.anchor.is_none() {
        return Err(Error::InvalidConfig("training needs an anchor".into())).at(Stage::Config);
    }
    if let Some(anchor) = &config.anchor {
        let dataset = Dataset::new(tables.clone()).at(Stage::Features)?;
        let matrix = features_stage(&dataset, anchor, config, out).at(Stage::Features)?;
        written.extend([FEATURES_CSV.into(), LINEAGE_JSON.into(), RELATIONS_DOT.into()]);
        if let Some(label) = &config.label {
            let r = train_stage(&dataset, &matrix, label, &missing.systematic_columns(), config, out).at(Stage::Train)?;
            written.extend([MODEL_REPORT_JSON.into(), MODEL_JSON.into()]);
            model = Some(r);
        }
    }

    let mut drift = None;
    if !config.compare.is_empty() {
        let incoming: Vec<Table> = load_inputs(&config.compare, config)
            .at(Stage::Drift)?
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        let summary = drift_stage(&tables, &incoming, config).at(Stage::Drift)?;
        report::write_json(&out.join(DRIFT_JSON), &summary).at(Stage::Drift)?;
        written.push(DRIFT_JSON.into());
        drift = Some(summary.drift);
    }

    let artifacts = written
        .iter()
        .map(|n| digest(out, n))
        .collect::<Result<Vec<_>>>()
        .at(Stage::Config)?;
    let manifest = RunManifest {
        tool: "ads".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        seed: config.seed,
        config: config.clone(),
        artifacts,
    };
    report::write_json(&out.join(MANIFEST_JSON), &manifest).at(Stage::Config)?;
    written.push(MANIFEST_JSON.into());
    Ok(RunSummary {
        artifacts: written,
        model,
        drift,
    })
}
