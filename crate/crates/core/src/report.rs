//! Batch suite driver and machine-readable reports.
//!
//! A [`RunConfig`] selects a suite, an ensemble shape, and tolerances; the
//! driver evaluates every sample (in parallel when a rayon pool is available)
//! and produces a [`SuiteReport`] whose JSON serialization is byte-identical
//! across reruns and worker counts: per-sample seeds are derived from the
//! sample index alone and aggregation runs in index order. Wall time is
//! printed by the CLI, never serialized into the report.
//!
//! Per-sample failures (for instance `SupportDeficient` on a provided
//! rank-deficient state) never abort a batch; the sample is recorded as
//! failed with its reason and the run continues.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{self, ChainVerdict};
use crate::entropy::ExtendedReal;
use crate::error::{Error, Result};
use crate::linalg::{hermitize, CMatrix, C64};
use crate::markov::{self, EnsembleKind, MarkovReport, MarkovVerdict, ScanSummary};
use crate::states::{
    derive_seed, random_channel, random_multipartite_hs, MultipartiteState, StateKind,
};

/// Number of Kraus operators used for generated channels in the
/// channel-monotonicity suite.
const SUITE_N_KRAUS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Substate,
    NormSandwich,
    Monotonicity,
    Bipartite,
    Cmi,
    Berta,
    BertaGeneral,
    MarginalMono,
    SuperSsa,
    SigmaSubstate,
    TwoMarginal,
    GoldenThompson,
    Markov,
    Scan,
    All,
}

impl Suite {
    pub const ALL_CONCRETE: [Suite; 14] = [
        Suite::Substate,
        Suite::NormSandwich,
        Suite::Monotonicity,
        Suite::Bipartite,
        Suite::Cmi,
        Suite::Berta,
        Suite::BertaGeneral,
        Suite::MarginalMono,
        Suite::SuperSsa,
        Suite::SigmaSubstate,
        Suite::TwoMarginal,
        Suite::GoldenThompson,
        Suite::Markov,
        Suite::Scan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Substate => "substate",
            Suite::NormSandwich => "norm-sandwich",
            Suite::Monotonicity => "monotonicity",
            Suite::Bipartite => "bipartite",
            Suite::Cmi => "cmi",
            Suite::Berta => "berta",
            Suite::BertaGeneral => "berta-general",
            Suite::MarginalMono => "marginal-mono",
            Suite::SuperSsa => "super-ssa",
            Suite::SigmaSubstate => "sigma-substate",
            Suite::TwoMarginal => "two-marginal",
            Suite::GoldenThompson => "golden-thompson",
            Suite::Markov => "markov",
            Suite::Scan => "scan",
            Suite::All => "all",
        }
    }

    /// How many provided state files one sample consumes.
    fn input_arity(&self) -> usize {
        match self {
            Suite::Cmi | Suite::TwoMarginal | Suite::Markov | Suite::Scan => 1,
            Suite::BertaGeneral => 4,
            _ => 2,
        }
    }

    /// Number of subsystems the suite's states must carry.
    fn required_parts(&self) -> Option<usize> {
        match self {
            Suite::Bipartite => Some(2),
            Suite::Cmi
            | Suite::Berta
            | Suite::BertaGeneral
            | Suite::MarginalMono
            | Suite::SuperSsa
            | Suite::SigmaSubstate
            | Suite::TwoMarginal
            | Suite::Markov
            | Suite::Scan => Some(3),
            _ => None,
        }
    }

    /// Subsystem shape this suite runs at, given the configured dims: a
    /// longer vector is truncated to the required split, a shorter one is an
    /// error.
    fn effective_dims(&self, dims: &[usize]) -> Result<Vec<usize>> {
        match self.required_parts() {
            None => Ok(dims.to_vec()),
            Some(k) if dims.len() >= k => Ok(dims[..k].to_vec()),
            Some(k) => Err(Error::InvalidConfig(format!(
                "suite {} needs {k} subsystem dimensions, got {dims:?}",
                self.name()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

fn default_dims() -> Vec<usize> {
    vec![2, 2, 2]
}
fn default_n() -> usize {
    100
}
fn default_seed() -> u64 {
    1
}
fn default_tol() -> f64 {
    1e-8
}
fn default_format() -> ReportFormat {
    ReportFormat::Json
}

/// Everything a `verify` run needs; echoed verbatim into the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub suite: Suite,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_n")]
    pub n_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol_identity: f64,
    #[serde(default = "default_tol")]
    pub tol_inequality: f64,
    #[serde(default)]
    pub input_files: Vec<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: ReportFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::InvalidConfig("n_samples must be >= 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidConfig(format!(
                "every subsystem dimension must be >= 2, got {:?}",
                self.dims
            )));
        }
        for tol in [self.tol_identity, self.tol_inequality] {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::InvalidConfig("tolerances must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Outcome of a single sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SampleOutcome {
    Chain { verdict: ChainVerdict },
    Markov { report: MarkovReport },
    ScanValue { trace_m: f64 },
    Failed { error: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub seed: u64,
    pub pass: bool,
    #[serde(flatten)]
    pub outcome: SampleOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub pass_count: usize,
    pub fail_count: usize,
    /// Most negative finite chain gap seen in the section, if any.
    pub worst_gap: Option<f64>,
    pub worst_sample_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteSection {
    pub suite: Suite,
    /// Subsystem split the suite actually ran at (config dims, truncated to
    /// the suite's required number of parts).
    pub dims: Vec<usize>,
    pub samples: Vec<SampleRecord>,
    pub aggregate: Aggregate,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scan_summary: Option<ScanSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub sections: Vec<SuiteSection>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.sections
            .iter()
            .all(|s| s.aggregate.fail_count == 0)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

// ---------------------------------------------------------------------------
// Sample evaluation
// ---------------------------------------------------------------------------

/// Hermitian (not PSD) test matrix for the Golden-Thompson suite.
fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    hermitize(&g)
}

/// PSD matrix with a seed-derived scale in [0.5, 2], for the norm sandwich.
fn random_scaled_psd(dims: &[usize], seed: u64) -> CMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5_5a5a);
    let scale = 0.5 + 1.5 * rng.random::<f64>();
    random_multipartite_hs(dims, seed).matrix * C64::new(scale, 0.0)
}

fn as_substate(mut st: MultipartiteState, factor: f64) -> MultipartiteState {
    st.matrix *= C64::new(factor, 0.0);
    st.kind = StateKind::Substate;
    st
}

/// Inputs for one sample: either freshly generated from the derived seed or
/// a slice of the provided state files.
enum SampleSource<'a> {
    Generated,
    Provided(&'a [MultipartiteState]),
}

fn evaluate_sample(
    suite: Suite,
    config: &RunConfig,
    dims: &[usize],
    sample_seed: u64,
    source: &SampleSource<'_>,
) -> Result<SampleOutcome> {
    let tol_id = config.tol_identity;
    let tol_ineq = config.tol_inequality;

    let provided = |k: usize| -> Result<MultipartiteState> {
        match source {
            SampleSource::Provided(states) => Ok(states[k].clone()),
            SampleSource::Generated => {
                Ok(random_multipartite_hs(dims, derive_seed(sample_seed, k as u64)))
            }
        }
    };

    let verdict = match suite {
        Suite::Substate => {
            let rho = provided(0)?;
            let sigma = match source {
                SampleSource::Provided(states) => as_substate(states[1].clone(), 1.0),
                SampleSource::Generated => as_substate(
                    random_multipartite_hs(dims, derive_seed(sample_seed, 1)),
                    0.9,
                ),
            };
            chains::check_substate_chain(&rho, &sigma, tol_ineq)?
        }
        Suite::NormSandwich => {
            let (m, n) = match source {
                SampleSource::Provided(states) => {
                    (states[0].matrix.clone(), states[1].matrix.clone())
                }
                SampleSource::Generated => (
                    random_scaled_psd(dims, derive_seed(sample_seed, 0)),
                    random_scaled_psd(dims, derive_seed(sample_seed, 1)),
                ),
            };
            chains::check_norm_sandwich(&m, &n, tol_ineq)?
        }
        Suite::Monotonicity => {
            let rho = provided(0)?;
            let sigma = provided(1)?;
            let d: usize = dims.iter().product();
            let phi = random_channel(d, d, SUITE_N_KRAUS, derive_seed(sample_seed, 2))?;
            chains::check_monotonicity_gap(&rho, &sigma, &phi, tol_ineq)?
        }
        Suite::Bipartite => chains::check_bipartite_chain(&provided(0)?, &provided(1)?, tol_ineq)?,
        Suite::Cmi => chains::check_cmi_chain(&provided(0)?, tol_ineq)?,
        Suite::Berta => chains::berta_identity_verdict(&provided(0)?, &provided(1)?, tol_id)?,
        Suite::BertaGeneral => {
            let rho = provided(0)?;
            let (d_a, d_b, d_c) = (dims[0], dims[1], dims[2]);
            let (s_ac, t_bc, w_c) = match source {
                SampleSource::Provided(states) => (
                    states[1].matrix.clone(),
                    states[2].matrix.clone(),
                    states[3].matrix.clone(),
                ),
                SampleSource::Generated => (
                    random_multipartite_hs(&[d_a, d_c], derive_seed(sample_seed, 1)).matrix,
                    random_multipartite_hs(&[d_b, d_c], derive_seed(sample_seed, 2)).matrix,
                    random_multipartite_hs(&[d_c], derive_seed(sample_seed, 3)).matrix,
                ),
            };
            chains::berta_identity_general_verdict(&rho, &s_ac, &t_bc, &w_c, tol_id)?
        }
        Suite::MarginalMono => {
            chains::check_marginal_monotonicity(&provided(0)?, &provided(1)?, tol_ineq)?
        }
        Suite::SuperSsa => chains::check_super_ssa(&provided(0)?, &provided(1)?, tol_ineq)?,
        Suite::SigmaSubstate => {
            chains::check_sigma_substate_chain(&provided(0)?, &provided(1)?, tol_ineq)?
        }
        Suite::TwoMarginal => chains::check_two_marginal_chain(&provided(0)?, tol_ineq)?,
        Suite::GoldenThompson => {
            let (a, b) = match source {
                SampleSource::Provided(states) => {
                    (states[0].matrix.clone(), states[1].matrix.clone())
                }
                SampleSource::Generated => {
                    let d: usize = dims.iter().product();
                    (
                        random_hermitian(d, derive_seed(sample_seed, 0)),
                        random_hermitian(d, derive_seed(sample_seed, 1)),
                    )
                }
            };
            chains::check_golden_thompson(&a, &b, tol_ineq)?
        }
        Suite::Markov => {
            let report = markov::check_markov_trace_theorem(&provided(0)?, tol_id)?;
            return Ok(SampleOutcome::Markov { report });
        }
        Suite::Scan => {
            let trace_m = markov::trace_of_markov_operator(&provided(0)?)?;
            return Ok(SampleOutcome::ScanValue { trace_m });
        }
        Suite::All => unreachable!("expanded before evaluation"),
    };
    Ok(SampleOutcome::Chain { verdict })
}

fn outcome_pass(outcome: &SampleOutcome, config: &RunConfig) -> bool {
    match outcome {
        SampleOutcome::Chain { verdict } => verdict.pass,
        SampleOutcome::Markov { report } => {
            matches!(report.verdict, MarkovVerdict::Markov | MarkovVerdict::NotMarkov)
        }
        SampleOutcome::ScanValue { trace_m } => *trace_m <= 1.0 + config.tol_inequality,
        SampleOutcome::Failed { .. } => false,
    }
}

fn run_one_suite(suite: Suite, config: &RunConfig) -> Result<SuiteSection> {
    let dims = suite.effective_dims(&config.dims)?;
    let inputs: Vec<MultipartiteState> = config
        .input_files
        .iter()
        .map(|p| MultipartiteState::read_json(p))
        .collect::<Result<_>>()?;
    let arity = suite.input_arity();
    // only the leading file of each sample group must carry the suite's
    // split; trailing files of the general identity are marginal operators
    if let (Some(parts), false) = (suite.required_parts(), inputs.is_empty()) {
        for st in inputs.iter().step_by(arity) {
            if st.dims.len() != parts {
                return Err(Error::InvalidConfig(format!(
                    "suite {} needs {parts}-part states, file has {:?}",
                    suite.name(),
                    st.dims
                )));
            }
        }
    }
    let n_samples = if inputs.is_empty() {
        config.n_samples
    } else {
        if !inputs.len().is_multiple_of(arity) {
            return Err(Error::InvalidConfig(format!(
                "suite {} consumes {arity} state file(s) per sample, got {}",
                suite.name(),
                inputs.len()
            )));
        }
        inputs.len() / arity
    };

    let samples: Vec<SampleRecord> = (0..n_samples)
        .into_par_iter()
        .map(|index| {
            let sample_seed = derive_seed(config.seed, index as u64);
            let source = if inputs.is_empty() {
                SampleSource::Generated
            } else {
                SampleSource::Provided(&inputs[index * arity..(index + 1) * arity])
            };
            let outcome = match evaluate_sample(suite, config, &dims, sample_seed, &source) {
                Ok(outcome) => outcome,
                Err(e) => SampleOutcome::Failed {
                    error: e.to_string(),
                },
            };
            SampleRecord {
                index,
                seed: sample_seed,
                pass: outcome_pass(&outcome, config),
                outcome,
            }
        })
        .collect();

    let pass_count = samples.iter().filter(|s| s.pass).count();
    let mut worst_gap: Option<f64> = None;
    let mut worst_sample_seed = None;
    for s in &samples {
        if let SampleOutcome::Chain { verdict } = &s.outcome {
            let g = verdict.worst_gap();
            if g.is_finite() && worst_gap.is_none_or(|w| g < w) {
                worst_gap = Some(g);
                worst_sample_seed = Some(s.seed);
            }
        }
    }
    if worst_sample_seed.is_none() {
        worst_sample_seed = samples.iter().find(|s| !s.pass).map(|s| s.seed);
    }

    let scan_summary = if suite == Suite::Scan && inputs.is_empty() {
        Some(markov::scan_trace_statistic(
            &dims,
            config.n_samples,
            config.seed,
            EnsembleKind::Hs,
        )?)
    } else {
        None
    };

    Ok(SuiteSection {
        suite,
        dims,
        samples,
        aggregate: Aggregate {
            pass_count,
            fail_count: n_samples - pass_count,
            worst_gap,
            worst_sample_seed,
        },
        scan_summary,
    })
}

/// Run the configured suite (or every concrete suite for `all`).
pub fn run_suite(config: &RunConfig) -> Result<SuiteReport> {
    config.validate()?;
    let suites: Vec<Suite> = match config.suite {
        Suite::All => Suite::ALL_CONCRETE.to_vec(),
        s => vec![s],
    };
    let sections = suites
        .into_iter()
        .map(|s| run_one_suite(s, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        config: config.clone(),
        sections,
    })
}

// ---------------------------------------------------------------------------
// CSV rendering: long format, one metric per row, numbers rendered exactly as
// in the JSON report
// ---------------------------------------------------------------------------

fn csv_number(v: f64) -> String {
    if v == f64::INFINITY {
        "Infinity".into()
    } else if v == f64::NEG_INFINITY {
        "-Infinity".into()
    } else {
        serde_json::to_string(&v).expect("finite float")
    }
}

fn csv_extended(v: &ExtendedReal) -> String {
    match v {
        ExtendedReal::Finite(x) => csv_number(*x),
        ExtendedReal::Infinity => "Infinity".into(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render a report as `suite,sample,seed,metric,value` rows carrying the same
/// numeric content as the JSON serialization.
pub fn report_to_csv(report: &SuiteReport) -> String {
    let mut out = String::from("suite,sample,seed,metric,value\n");
    for section in &report.sections {
        let suite = section.suite.name();
        for s in &section.samples {
            let mut push = |metric: &str, value: String| {
                out.push_str(&format!(
                    "{suite},{},{},{},{}\n",
                    s.index,
                    s.seed,
                    csv_escape(metric),
                    csv_escape(&value)
                ));
            };
            push("pass", (s.pass as u8).to_string());
            match &s.outcome {
                SampleOutcome::Chain { verdict } => {
                    push("tol", csv_number(verdict.tol));
                    for (label, value) in &verdict.links {
                        push(&format!("link:{label}"), csv_extended(value));
                    }
                    for (i, g) in verdict.gaps.iter().enumerate() {
                        push(&format!("gap:{i}"), csv_number(*g));
                    }
                }
                SampleOutcome::Markov { report } => {
                    push("trace_m", csv_number(report.trace_m));
                    push("cmi_rho", csv_number(report.cmi_rho));
                    push("cmi_m", csv_number(report.cmi_m));
                    push("log_residual", csv_number(report.log_residual));
                    push(
                        "trace_distance_m_rho",
                        csv_number(report.trace_distance_m_rho),
                    );
                    push(
                        "reconstruction_residual_c",
                        csv_number(report.reconstruction_residual_c),
                    );
                    push(
                        "reconstruction_residual_literal_i",
                        csv_number(report.reconstruction_residual_literal_i),
                    );
                    push(
                        "reconstruction_residual_literal_ii",
                        csv_number(report.reconstruction_residual_literal_ii),
                    );
                    push(
                        "verdict",
                        serde_json::to_value(report.verdict)
                            .expect("enum")
                            .as_str()
                            .expect("string enum")
                            .to_string(),
                    );
                }
                SampleOutcome::ScanValue { trace_m } => {
                    push("trace_m", csv_number(*trace_m));
                }
                SampleOutcome::Failed { error } => {
                    push("error", error.clone());
                }
            }
        }
    }
    out
}

/// Serialize the report in the requested format and optionally write it out.
pub fn write_report(report: &SuiteReport, path: Option<&Path>) -> Result<String> {
    let rendered = match report.config.format {
        ReportFormat::Json => report.to_json_string(),
        ReportFormat::Csv => report_to_csv(report),
    };
    if let Some(p) = path {
        if let Some(parent) = p.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(p, &rendered)?;
    }
    Ok(rendered)
}
