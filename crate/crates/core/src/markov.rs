//! Markov-state machinery for tripartite states: the operator
//! `M = exp(log rho_AC + log rho_BC - log rho_C)` (always a substate), its
//! trace criterion, Petz-type reconstruction formulas, Ruskai's log-sum
//! equality condition, and a seeded scanner for the trace statistic.
//!
//! Every operation here requires the relevant operators to be full rank after
//! the support cutoff; rank-deficient inputs yield `SupportDeficient` instead
//! of a silently projected computation, because the log-sum formulas presume
//! invertibility.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{cmi, cmi_matrices};
use crate::error::{Error, Result};
use crate::linalg::{
    expm_hermitian, frobenius_norm, hermitize, inv_sqrtm_psd, lift_to_full, logm_psd,
    partial_trace, sqrtm_psd, support_info, trace_norm, trace_re, CMatrix, C64,
};
use crate::states::{
    derive_seed, random_markov_classical_c, random_multipartite_hs, MultipartiteState,
};

/// Verdict of the trace-criterion check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkovVerdict {
    Markov,
    NotMarkov,
    /// `|Tr M - 1|` falls in the near-equality band `(tol, 10 tol]`, too close
    /// to the float boundary to classify.
    Indeterminate,
}

/// Reconstruction formulas compared against the Markov operator.
///
/// The C-conditioned form `rho_AC^{1/2} rho_C^{-1/2} rho_BC rho_C^{-1/2}
/// rho_AC^{1/2}` recovers Markov states exactly; the two literal forms swap in
/// the AB/B marginals and are reported side by side rather than silently
/// preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructionForm {
    CConditioned,
    PaperLiteralI,
    PaperLiteralII,
}

/// Full diagnostic record of the trace-criterion pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovReport {
    pub trace_m: f64,
    pub cmi_rho: f64,
    /// Conditional mutual information of `M / Tr M` (always a valid state).
    pub cmi_m: f64,
    /// `|| log rho_ABC + log rho_C - log rho_AC - log rho_BC ||_2`.
    pub log_residual: f64,
    /// `|| M - rho_ABC ||_1`.
    pub trace_distance_m_rho: f64,
    /// `|| M - R ||_1` for the C-conditioned reconstruction.
    pub reconstruction_residual_c: f64,
    /// `|| M - R ||_1` for the two literal forms.
    pub reconstruction_residual_literal_i: f64,
    pub reconstruction_residual_literal_ii: f64,
    pub verdict: MarkovVerdict,
    pub tol: f64,
}

fn require_tripartite(dims: &[usize]) -> Result<()> {
    if dims.len() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "expected a tripartite split, got {} subsystems",
            dims.len()
        )));
    }
    Ok(())
}

/// Error unless the operator is full rank after the scale-aware cutoff.
pub fn require_full_rank(m: &CMatrix, what: &str) -> Result<()> {
    let info = support_info(m, None)?;
    if info.rank != m.nrows() {
        return Err(Error::SupportDeficient(format!(
            "{what} has rank {} of {}",
            info.rank,
            m.nrows()
        )));
    }
    Ok(())
}

/// Lifted logarithm of a marginal: `log` of `Tr_complement(m)` embedded back
/// into the full space on the `occupied` subsystems.
fn lifted_log_of_marginal(
    m: &CMatrix,
    dims: &[usize],
    occupied: &[usize],
    what: &str,
) -> Result<CMatrix> {
    let marginal = partial_trace(m, dims, occupied)?;
    require_full_rank(&marginal, what)?;
    lift_to_full(&logm_psd(&marginal)?, dims, occupied)
}

/// `log m_AC + log m_BC (- log m_C)`, every term lifted to the full space.
/// This is the exponent of the Markov operator when `include_c` is true, and
/// of the two-marginal substate when false.
pub fn tripartite_log_combination(
    m: &CMatrix,
    dims: &[usize],
    include_c: bool,
) -> Result<CMatrix> {
    require_tripartite(dims)?;
    let mut arg = lifted_log_of_marginal(m, dims, &[0, 2], "the AC marginal")?
        + lifted_log_of_marginal(m, dims, &[1, 2], "the BC marginal")?;
    if include_c {
        arg -= lifted_log_of_marginal(m, dims, &[2], "the C marginal")?;
    }
    Ok(hermitize(&arg))
}

/// The Markov operator `M = exp(log rho_AC + log rho_BC - log rho_C)`,
/// Hermitian PSD with `Tr M <= 1`.
pub fn markov_operator(rho: &MultipartiteState) -> Result<CMatrix> {
    expm_hermitian(&tripartite_log_combination(&rho.matrix, &rho.dims, true)?)
}

pub fn trace_of_markov_operator(rho: &MultipartiteState) -> Result<f64> {
    Ok(trace_re(&markov_operator(rho)?))
}

/// Ruskai's equality statistic
/// `|| log rho_ABC + log rho_C - log rho_AC - log rho_BC ||_2`;
/// zero exactly on Markov states.
pub fn ruskai_log_residual(rho: &MultipartiteState) -> Result<f64> {
    require_tripartite(&rho.dims)?;
    require_full_rank(&rho.matrix, "rho_ABC")?;
    let log_full = logm_psd(&rho.matrix)?;
    let combo = tripartite_log_combination(&rho.matrix, &rho.dims, true)?;
    Ok(frobenius_norm(&(log_full - combo)))
}

/// Sandwich reconstruction of a tripartite state from two of its marginals.
pub fn petz_reconstruction(
    rho: &MultipartiteState,
    form: ReconstructionForm,
) -> Result<CMatrix> {
    require_tripartite(&rho.dims)?;
    let dims = &rho.dims;
    let m = &rho.matrix;
    // (outer, inverted, middle) subsystem groups of the sandwich
    let (outer, inverted, middle) = match form {
        ReconstructionForm::CConditioned => (&[0usize, 2][..], &[2usize][..], &[1usize, 2][..]),
        ReconstructionForm::PaperLiteralI => (&[0usize, 1][..], &[1usize][..], &[1usize, 2][..]),
        ReconstructionForm::PaperLiteralII => (&[1usize, 2][..], &[1usize][..], &[0usize, 1][..]),
    };
    let outer_marginal = partial_trace(m, dims, outer)?;
    let inverted_marginal = partial_trace(m, dims, inverted)?;
    require_full_rank(&inverted_marginal, "the inverted marginal")?;
    let sqrt_outer = lift_to_full(&sqrtm_psd(&outer_marginal)?, dims, outer)?;
    let inv_sqrt = lift_to_full(&inv_sqrtm_psd(&inverted_marginal)?, dims, inverted)?;
    let mid = lift_to_full(&partial_trace(m, dims, middle)?, dims, middle)?;
    Ok(hermitize(
        &(&sqrt_outer * &inv_sqrt * mid * inv_sqrt * sqrt_outer),
    ))
}

/// Trace-criterion pipeline: computes `M`, classifies the state, and records
/// every diagnostic whether or not the criterion fires.
pub fn check_markov_trace_theorem(rho: &MultipartiteState, tol: f64) -> Result<MarkovReport> {
    require_tripartite(&rho.dims)?;
    require_full_rank(&rho.matrix, "rho_ABC")?;
    let m = markov_operator(rho)?;
    let trace_m = trace_re(&m);
    let cmi_rho = cmi(rho)?;
    let log_residual = ruskai_log_residual(rho)?;
    let trace_distance_m_rho = trace_norm(&(&m - &rho.matrix));

    let residual_for = |form: ReconstructionForm| -> Result<f64> {
        Ok(trace_norm(&(&m - petz_reconstruction(rho, form)?)))
    };
    let reconstruction_residual_c = residual_for(ReconstructionForm::CConditioned)?;
    let reconstruction_residual_literal_i = residual_for(ReconstructionForm::PaperLiteralI)?;
    let reconstruction_residual_literal_ii = residual_for(ReconstructionForm::PaperLiteralII)?;

    let normalized = &m / C64::new(trace_m, 0.0);
    let cmi_m = cmi_matrices(&normalized, &rho.dims)?;

    let deviation = (trace_m - 1.0).abs();
    let verdict = if deviation <= tol {
        // `Tr M = 1` certifies that M reconstructs and is itself Markov; a
        // failure of those certified facts leaves the sample unclassifiable.
        if cmi_m <= tol && reconstruction_residual_c <= tol {
            MarkovVerdict::Markov
        } else {
            MarkovVerdict::Indeterminate
        }
    } else if deviation <= 10.0 * tol {
        MarkovVerdict::Indeterminate
    } else {
        MarkovVerdict::NotMarkov
    };

    Ok(MarkovReport {
        trace_m,
        cmi_rho,
        cmi_m,
        log_residual,
        trace_distance_m_rho,
        reconstruction_residual_c,
        reconstruction_residual_literal_i,
        reconstruction_residual_literal_ii,
        verdict,
        tol,
    })
}

// ---------------------------------------------------------------------------
// Trace-statistic scanner
// ---------------------------------------------------------------------------

/// Ensembles the scanner (and the CLI generator) can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Hs,
    Pure,
    MarkovClassicalC,
}

impl EnsembleKind {
    pub fn sample(&self, dims: &[usize], seed: u64) -> Result<MultipartiteState> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "invalid subsystem dimensions {dims:?}"
            )));
        }
        match self {
            EnsembleKind::Hs => Ok(random_multipartite_hs(dims, seed)),
            EnsembleKind::Pure => {
                let d: usize = dims.iter().product();
                let mut st = crate::states::random_pure(d, seed);
                st.dims = dims.to_vec();
                st.labels = crate::states::default_labels(dims.len());
                Ok(st)
            }
            EnsembleKind::MarkovClassicalC => {
                require_tripartite(dims)?;
                Ok(random_markov_classical_c(dims[0], dims[1], dims[2], seed))
            }
        }
    }
}

/// Summary of `Tr M` over a seeded ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSummary {
    pub dims: Vec<usize>,
    pub n_samples: usize,
    pub seed: u64,
    pub kind: EnsembleKind,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `[left_edge, count]` rows over `[min, max]`.
    pub histogram: Vec<(f64, usize)>,
    /// The sampled states closest to `Tr M = 1`, as reloadable state file
    /// objects annotated with their seed and trace value.
    pub top_states: Vec<serde_json::Value>,
}

const SCAN_HISTOGRAM_BINS: usize = 20;
const SCAN_TOP_K: usize = 5;

/// Sample `n_samples` states, compute `Tr M` for each, and summarize.
/// Deterministic in `seed` and independent of worker count: per-sample seeds
/// are derived as `seed ^ index` and aggregation runs over the index order.
pub fn scan_trace_statistic(
    dims: &[usize],
    n_samples: usize,
    seed: u64,
    kind: EnsembleKind,
) -> Result<ScanSummary> {
    require_tripartite(dims)?;
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be >= 1".into()));
    }
    let values: Vec<(u64, f64)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let sample_seed = derive_seed(seed, i);
            let st = kind.sample(dims, sample_seed)?;
            Ok((sample_seed, trace_of_markov_operator(&st)?))
        })
        .collect::<Result<_>>()?;

    let min = values.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let max = values
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().map(|&(_, v)| v).sum::<f64>() / n_samples as f64;

    let histogram = if max > min {
        let width = (max - min) / SCAN_HISTOGRAM_BINS as f64;
        let mut counts = [0usize; SCAN_HISTOGRAM_BINS];
        for &(_, v) in &values {
            let bin = (((v - min) / width) as usize).min(SCAN_HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
        counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (min + i as f64 * width, c))
            .collect()
    } else {
        vec![(min, n_samples)]
    };

    let mut by_closeness: Vec<&(u64, f64)> = values.iter().collect();
    by_closeness.sort_by(|a, b| {
        (a.1 - 1.0)
            .abs()
            .total_cmp(&(b.1 - 1.0).abs())
            .then(a.0.cmp(&b.0))
    });
    let top_states = by_closeness
        .iter()
        .take(SCAN_TOP_K.min(n_samples))
        .map(|&&(sample_seed, trace_m)| {
            let st = kind.sample(dims, sample_seed)?;
            let mut v = st.to_json_value();
            let obj = v.as_object_mut().expect("state files are objects");
            obj.insert("sample_seed".into(), serde_json::json!(sample_seed));
            obj.insert("trace_m".into(), serde_json::json!(trace_m));
            Ok(v)
        })
        .collect::<Result<_>>()?;

    Ok(ScanSummary {
        dims: dims.to_vec(),
        n_samples,
        seed,
        kind,
        min,
        max,
        mean,
        histogram,
        top_states,
    })
}
