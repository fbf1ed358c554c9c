//! Scalar entropy functionals: von Neumann entropy, Umegaki relative entropy
//! with the support branch, Renyi relative entropy for orders in (0, 1), the
//! root overlap `Tr sqrt(rho) sqrt(sigma)`, and conditional mutual
//! information.
//!
//! Everything is in nats; [`crate::NATS_TO_BITS`] converts for display only.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, logm_psd, partial_trace, sqrtm_psd, support_contained, trace_re, CMatrix,
    DEFAULT_HERMITICITY_TOL,
};
use crate::states::MultipartiteState;

/// Relative tolerance for the support-leak test deciding the `+Infinity`
/// branch of the relative entropy.
pub const SUPPORT_LEAK_TOL: f64 = 1e-10;

/// A finite real or `+Infinity` (the value of `S(rho||sigma)` on disjoint
/// supports). Serialized as a JSON number, or the string `"Infinity"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(*x),
            ExtendedReal::Infinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(x) => *x,
            ExtendedReal::Infinity => f64::INFINITY,
        }
    }

    /// Difference with the conventions used for chain gaps:
    /// `Inf - Inf = 0`, `Inf - finite = +inf`, `finite - Inf = -inf`.
    pub fn gap_to(&self, next: &ExtendedReal) -> f64 {
        match (self, next) {
            (ExtendedReal::Infinity, ExtendedReal::Infinity) => 0.0,
            (ExtendedReal::Infinity, ExtendedReal::Finite(_)) => f64::INFINITY,
            (ExtendedReal::Finite(_), ExtendedReal::Infinity) => f64::NEG_INFINITY,
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a - b,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            ExtendedReal::Finite(x)
        } else {
            ExtendedReal::Infinity
        }
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::Infinity => write!(f, "Infinity"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => serializer.serialize_f64(*x),
            ExtendedReal::Infinity => serializer.serialize_str("Infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        match v {
            serde_json::Value::Number(n) => {
                let x = n
                    .as_f64()
                    .ok_or_else(|| D::Error::custom("not an f64"))?;
                Ok(ExtendedReal::Finite(x))
            }
            serde_json::Value::String(s) if s == "Infinity" || s == "inf" => {
                Ok(ExtendedReal::Infinity)
            }
            other => Err(D::Error::custom(format!(
                "expected a number or \"Infinity\", got {other}"
            ))),
        }
    }
}

fn check_same_dim(rho: &CMatrix, sigma: &CMatrix) -> Result<()> {
    if rho.nrows() != sigma.nrows() || rho.ncols() != sigma.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "operators are {}x{} and {}x{}",
            rho.nrows(),
            rho.ncols(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    Ok(())
}

/// Spectrum of a (sub-)density matrix, rejecting genuine negativity.
fn state_spectrum(m: &CMatrix) -> Result<(Vec<f64>, f64)> {
    let eig = eig_hermitian(m, DEFAULT_HERMITICITY_TOL).map_err(|e| match e {
        Error::NotHermitian { residual, .. } => {
            Error::InvalidState(format!("not Hermitian, residual {residual:.3e}"))
        }
        other => other,
    })?;
    let cutoff = eig.default_support_cutoff();
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -1e-9 * eig.max_abs_eigenvalue().max(1.0) {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
    }
    Ok((eig.eigenvalues, cutoff))
}

/// `-Tr(m log m)` over the support eigenvalues (`0 log 0 = 0`).
pub fn entropy_of_matrix(m: &CMatrix) -> Result<f64> {
    let (eigs, cutoff) = state_spectrum(m)?;
    Ok(-eigs
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| l * l.ln())
        .sum::<f64>())
}

/// von Neumann entropy `S(rho) = -Tr(rho log rho)`, in nats.
pub fn von_neumann_entropy(rho: &MultipartiteState) -> Result<f64> {
    entropy_of_matrix(&rho.matrix)
}

/// `Tr(rho log rho)` (negative entropy), shared by the relative entropies.
fn tr_rho_log_rho(rho: &CMatrix) -> Result<f64> {
    entropy_of_matrix(rho).map(|s| -s)
}

/// Umegaki relative entropy between raw matrices:
/// `Tr rho (log rho - log sigma)` when `supp(rho) <= supp(sigma)`, else
/// `+Infinity`. The two traces are taken separately so that slightly
/// different supports never force the explicit difference `log rho - log sigma`.
pub fn relative_entropy_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<ExtendedReal> {
    check_same_dim(rho, sigma)?;
    if !support_contained(rho, sigma, SUPPORT_LEAK_TOL)? {
        return Ok(ExtendedReal::Infinity);
    }
    let t1 = tr_rho_log_rho(rho)?;
    let log_sigma = logm_psd(sigma)?;
    let t2 = trace_re(&(rho * log_sigma));
    Ok(ExtendedReal::Finite(t1 - t2))
}

/// Relative entropy `S(rho || sigma)`; `sigma` may be a substate.
pub fn relative_entropy(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
) -> Result<ExtendedReal> {
    relative_entropy_matrices(&rho.matrix, &sigma.matrix)
}

/// Petz-Renyi relative entropy `(alpha - 1)^{-1} log Tr(rho^alpha sigma^{1-alpha})`
/// for `alpha` in (0, 1). At `alpha = 1/2` this equals
/// `-2 log Tr(sqrt(rho) sqrt(sigma))`.
pub fn renyi_relative_entropy(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    alpha: f64,
) -> Result<ExtendedReal> {
    renyi_relative_entropy_matrices(&rho.matrix, &sigma.matrix, alpha)
}

pub fn renyi_relative_entropy_matrices(
    rho: &CMatrix,
    sigma: &CMatrix,
    alpha: f64,
) -> Result<ExtendedReal> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    check_same_dim(rho, sigma)?;
    let ra = crate::linalg::powm_psd(rho, alpha)?;
    let sa = crate::linalg::powm_psd(sigma, 1.0 - alpha)?;
    let t = trace_re(&(ra * sa));
    if t <= 0.0 {
        return Ok(ExtendedReal::Infinity);
    }
    Ok(ExtendedReal::Finite(t.ln() / (alpha - 1.0)))
}

/// `Tr(sqrt(rho) sqrt(sigma))`, in [0, 1] for substates; callers take
/// `-2 log` of it to reach the Renyi-1/2 bound.
pub fn root_overlap(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let sr = sqrtm_psd(rho)?;
    let ss = sqrtm_psd(sigma)?;
    Ok(trace_re(&(sr * ss)))
}

/// Conditional mutual information
/// `I(A:B|C) = S(rho_AC) + S(rho_BC) - S(rho_ABC) - S(rho_C)` in nats,
/// on a tripartite split `(A, B, C)`.
pub fn cmi(rho: &MultipartiteState) -> Result<f64> {
    cmi_matrices(&rho.matrix, &rho.dims)
}

pub fn cmi_matrices(rho: &CMatrix, dims: &[usize]) -> Result<f64> {
    if dims.len() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "conditional mutual information needs a tripartite split, got {} subsystems",
            dims.len()
        )));
    }
    let s_ac = entropy_of_matrix(&partial_trace(rho, dims, &[0, 2])?)?;
    let s_bc = entropy_of_matrix(&partial_trace(rho, dims, &[1, 2])?)?;
    let s_c = entropy_of_matrix(&partial_trace(rho, dims, &[2])?)?;
    let s_abc = entropy_of_matrix(rho)?;
    Ok(s_ac + s_bc - s_abc - s_c)
}
