//! One verifier per inequality chain or identity: each computes every link,
//! records the pairwise gaps, and judges the ordering within tolerance.
//!
//! Chains are stored largest-first, so a verdict passes when every gap
//! `link_i - link_{i+1}` is at least `-tol`. `+Infinity` links are legal as a
//! prefix (the substate chain starts at `S(rho||sigma) = +Infinity` for
//! disjoint supports); an infinite link below a finite one can never pass.
//! Identities are judged two-sided: `|lhs - rhs| <= tol`.
//!
//! Support policy: the verifiers gate exactly the operators whose logarithm
//! enters a lifted sum (via `SupportDeficient`); relative entropies handle
//! their own support branch and may legitimately return `+Infinity`.

use serde::{Deserialize, Serialize};

use crate::entropy::{
    cmi_matrices, entropy_of_matrix, relative_entropy_matrices, ExtendedReal,
};
use crate::error::{Error, Result};
use crate::linalg::{
    expm_hermitian, frobenius_norm, hermitize, lift_to_full, logm_psd, partial_trace, sqrtm_psd,
    trace_norm, trace_re, CMatrix,
};
use crate::markov::{markov_operator, require_full_rank, tripartite_log_combination};
use crate::states::{MultipartiteState, QuantumChannel};

/// Dimension-aware tolerance: the base tolerance grows as `d / 8` beyond
/// `d = 8`.
pub fn scaled_tol(tol: f64, dim: usize) -> f64 {
    if dim > 8 {
        tol * dim as f64 / 8.0
    } else {
        tol
    }
}

mod gap_serde {
    use serde::de::Error as _;
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for &x in v {
            if x == f64::INFINITY {
                seq.serialize_element("Infinity")?;
            } else if x == f64::NEG_INFINITY {
                seq.serialize_element("-Infinity")?;
            } else {
                seq.serialize_element(&x)?;
            }
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<serde_json::Value> = serde::Deserialize::deserialize(d)?;
        raw.into_iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => {
                    n.as_f64().ok_or_else(|| D::Error::custom("bad number"))
                }
                serde_json::Value::String(s) if s == "Infinity" => Ok(f64::INFINITY),
                serde_json::Value::String(s) if s == "-Infinity" => Ok(f64::NEG_INFINITY),
                other => Err(D::Error::custom(format!("bad gap entry {other}"))),
            })
            .collect()
    }
}

/// Record of one verified chain: ordered link values, pairwise gaps, and the
/// pass/fail judgment at the effective tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainVerdict {
    pub name: String,
    pub links: Vec<(String, ExtendedReal)>,
    #[serde(with = "gap_serde")]
    pub gaps: Vec<f64>,
    pub pass: bool,
    pub tol: f64,
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

impl ChainVerdict {
    fn from_links(
        name: &str,
        links: Vec<(String, ExtendedReal)>,
        tol: f64,
        metadata: serde_json::Map<String, serde_json::Value>,
    ) -> Self {
        let gaps: Vec<f64> = links
            .windows(2)
            .map(|w| w[0].1.gap_to(&w[1].1))
            .collect();
        let pass = gaps.iter().all(|&g| g >= -tol);
        ChainVerdict {
            name: name.to_string(),
            links,
            gaps,
            pass,
            tol,
            metadata,
        }
    }

    fn identity(
        name: &str,
        lhs: (String, ExtendedReal),
        rhs: (String, ExtendedReal),
        tol: f64,
        mut metadata: serde_json::Map<String, serde_json::Value>,
    ) -> Self {
        let gap = lhs.1.gap_to(&rhs.1);
        let pass = gap.abs() <= tol;
        metadata.insert("two_sided".into(), serde_json::json!(true));
        ChainVerdict {
            name: name.to_string(),
            links: vec![lhs, rhs],
            gaps: vec![gap],
            pass,
            tol,
            metadata,
        }
    }

    /// Fold an extra condition into the verdict, recording it by name.
    fn require(&mut self, label: &str, ok: bool) {
        self.metadata.insert(label.to_string(), serde_json::json!(ok));
        self.pass &= ok;
    }

    /// Smallest gap (most negative first); `+Infinity` gaps are ignored so the
    /// value stays informative for regression tracking.
    pub fn worst_gap(&self) -> f64 {
        self.gaps
            .iter()
            .copied()
            .filter(|g| *g < f64::INFINITY)
            .fold(f64::INFINITY, f64::min)
    }

    /// Identity residual (largest |gap|), for two-sided records.
    pub fn residual(&self) -> f64 {
        self.gaps.iter().fold(0.0f64, |a, g| a.max(g.abs()))
    }
}

fn meta(pairs: &[(&str, serde_json::Value)]) -> serde_json::Map<String, serde_json::Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// The three lower links shared by every substate-style chain:
/// `-2 ln Tr[sqrt(rho) sqrt(x)] >= ||sqrt(rho) - sqrt(x)||_2^2
///  >= (1/4) ||rho - x||_1^2`.
fn overlap_links(rho: &CMatrix, x: &CMatrix) -> Result<(ExtendedReal, f64, f64)> {
    let sq_rho = sqrtm_psd(rho)?;
    let sq_x = sqrtm_psd(x)?;
    let overlap = trace_re(&(&sq_rho * &sq_x));
    let bound = if overlap <= 0.0 {
        ExtendedReal::Infinity
    } else {
        ExtendedReal::Finite(-2.0 * overlap.ln())
    };
    let hs = frobenius_norm(&(&sq_rho - &sq_x)).powi(2);
    let tn = 0.25 * trace_norm(&(rho - x)).powi(2);
    Ok((bound, hs, tn))
}

/// `S(rho||sigma) >= -2 ln Tr[sqrt(rho) sqrt(sigma)]
///  >= ||sqrt(rho) - sqrt(sigma)||_2^2 >= (1/4) ||rho - sigma||_1^2`
/// for a state `rho` and a substate `sigma`.
pub fn check_substate_chain(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    tol: f64,
) -> Result<ChainVerdict> {
    let tol = scaled_tol(tol, rho.dim());
    let trace_sigma = trace_re(&sigma.matrix);
    if trace_sigma > 1.0 + tol {
        return Err(Error::InvalidState(format!(
            "sigma has trace {trace_sigma}, not a substate"
        )));
    }
    let s = relative_entropy_matrices(&rho.matrix, &sigma.matrix)?;
    let (bound, hs, tn) = overlap_links(&rho.matrix, &sigma.matrix)?;
    Ok(ChainVerdict::from_links(
        "substate-chain",
        vec![
            ("S(rho||sigma)".into(), s),
            ("-2 ln Tr[sqrt(rho) sqrt(sigma)]".into(), bound),
            (
                "||sqrt(rho) - sqrt(sigma)||_2^2".into(),
                ExtendedReal::Finite(hs),
            ),
            (
                "(1/4) ||rho - sigma||_1^2".into(),
                ExtendedReal::Finite(tn),
            ),
        ],
        tol,
        meta(&[
            ("dims", serde_json::json!(rho.dims)),
            ("trace_sigma", serde_json::json!(trace_sigma)),
        ]),
    ))
}

/// `||sqrt(M) - sqrt(N)||_2^2 <= ||M - N||_1
///  <= ||sqrt(M) - sqrt(N)||_2 ||sqrt(M) + sqrt(N)||_2`
/// for positive matrices, stored largest-first.
pub fn check_norm_sandwich(m: &CMatrix, n: &CMatrix, tol: f64) -> Result<ChainVerdict> {
    let tol = scaled_tol(tol, m.nrows());
    let sq_m = sqrtm_psd(m)?;
    let sq_n = sqrtm_psd(n)?;
    let diff = frobenius_norm(&(&sq_m - &sq_n));
    let upper = diff * frobenius_norm(&(&sq_m + &sq_n));
    let middle = trace_norm(&(m - n));
    let lower = diff.powi(2);
    Ok(ChainVerdict::from_links(
        "norm-sandwich",
        vec![
            (
                "||sqrt(M) - sqrt(N)||_2 ||sqrt(M) + sqrt(N)||_2".into(),
                ExtendedReal::Finite(upper),
            ),
            ("||M - N||_1".into(), ExtendedReal::Finite(middle)),
            (
                "||sqrt(M) - sqrt(N)||_2^2".into(),
                ExtendedReal::Finite(lower),
            ),
        ],
        tol,
        meta(&[("dim", serde_json::json!(m.nrows()))]),
    ))
}

/// Channel monotonicity with its overlap lower bound:
/// `S(rho||sigma) - S(Phi rho||Phi sigma) >=
///  -2 ln Tr[sqrt(rho) sqrt(exp(log sigma + Phi*(log Phi rho) - Phi*(log Phi sigma)))]`,
/// plus the data-processing sanity check that the left side is nonnegative.
pub fn check_monotonicity_gap(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    phi: &QuantumChannel,
    tol: f64,
) -> Result<ChainVerdict> {
    let tol = scaled_tol(tol, rho.dim());
    require_full_rank(&rho.matrix, "rho")?;
    require_full_rank(&sigma.matrix, "sigma")?;
    let phi_rho = phi.apply(&rho.matrix)?;
    let phi_sigma = phi.apply(&sigma.matrix)?;
    require_full_rank(&phi_rho, "Phi(rho)")?;
    require_full_rank(&phi_sigma, "Phi(sigma)")?;

    let s_in = relative_entropy_matrices(&rho.matrix, &sigma.matrix)?;
    let s_out = relative_entropy_matrices(&phi_rho, &phi_sigma)?;
    let lhs = match (s_in, s_out) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a - b,
        _ => {
            return Err(Error::SupportDeficient(
                "full-rank gate should have kept both relative entropies finite".into(),
            ))
        }
    };
    let arg = hermitize(
        &(logm_psd(&sigma.matrix)?
            + phi.apply_adjoint(&logm_psd(&phi_rho)?)?
            - phi.apply_adjoint(&logm_psd(&phi_sigma)?)?),
    );
    let x = expm_hermitian(&arg)?;
    let (bound, _, _) = overlap_links(&rho.matrix, &x)?;

    let mut verdict = ChainVerdict::from_links(
        "monotonicity-gap",
        vec![
            (
                "S(rho||sigma) - S(Phi(rho)||Phi(sigma))".into(),
                ExtendedReal::Finite(lhs),
            ),
            (
                "-2 ln Tr[sqrt(rho) sqrt(exp(log sigma + Phi*(log Phi(rho)) - Phi*(log Phi(sigma))))]"
                    .into(),
                bound,
            ),
        ],
        tol,
        meta(&[
            ("dims", serde_json::json!(rho.dims)),
            ("n_kraus", serde_json::json!(phi.kraus.len())),
        ]),
    );
    verdict.require("data_processing_nonnegative", lhs >= -tol);
    Ok(verdict)
}

/// Bipartite chain: with `X = exp(log sigma_AB - log sigma_A + log rho_A)`,
/// `S(rho_AB||sigma_AB) - S(rho_A||sigma_A) >= -2 ln Tr[sqrt(rho_AB) sqrt(X)]
///  >= ||sqrt(rho_AB) - sqrt(X)||_2^2 >= (1/4) ||rho_AB - X||_1^2`.
pub fn check_bipartite_chain(
    rho_ab: &MultipartiteState,
    sigma_ab: &MultipartiteState,
    tol: f64,
) -> Result<ChainVerdict> {
    if rho_ab.dims.len() != 2 || sigma_ab.dims != rho_ab.dims {
        return Err(Error::DimensionMismatch(format!(
            "need matching bipartite splits, got {:?} and {:?}",
            rho_ab.dims, sigma_ab.dims
        )));
    }
    let tol = scaled_tol(tol, rho_ab.dim());
    let dims = &rho_ab.dims;
    let rho_a = partial_trace(&rho_ab.matrix, dims, &[0])?;
    let sigma_a = partial_trace(&sigma_ab.matrix, dims, &[0])?;
    require_full_rank(&sigma_ab.matrix, "sigma_AB")?;
    require_full_rank(&sigma_a, "sigma_A")?;
    require_full_rank(&rho_a, "rho_A")?;

    let s_ab = relative_entropy_matrices(&rho_ab.matrix, &sigma_ab.matrix)?;
    let s_a = relative_entropy_matrices(&rho_a, &sigma_a)?;
    let lhs = s_ab.to_f64() - s_a.to_f64();
    let arg = hermitize(
        &(logm_psd(&sigma_ab.matrix)? - lift_to_full(&logm_psd(&sigma_a)?, dims, &[0])?
            + lift_to_full(&logm_psd(&rho_a)?, dims, &[0])?),
    );
    let x = expm_hermitian(&arg)?;
    let (bound, hs, tn) = overlap_links(&rho_ab.matrix, &x)?;
    Ok(ChainVerdict::from_links(
        "bipartite-chain",
        vec![
            (
                "S(rho_AB||sigma_AB) - S(rho_A||sigma_A)".into(),
                ExtendedReal::Finite(lhs),
            ),
            ("-2 ln Tr[sqrt(rho_AB) sqrt(X)]".into(), bound),
            (
                "||sqrt(rho_AB) - sqrt(X)||_2^2".into(),
                ExtendedReal::Finite(hs),
            ),
            ("(1/4) ||rho_AB - X||_1^2".into(), ExtendedReal::Finite(tn)),
        ],
        tol,
        meta(&[
            ("dims", serde_json::json!(dims)),
            (
                "x_operator",
                serde_json::json!("exp(log sigma_AB - log sigma_A + log rho_A)"),
            ),
        ]),
    ))
}

/// Conditional-mutual-information chain: with
/// `M = exp(log rho_AC - log rho_C + log rho_BC)`,
/// `S(rho_ABC||M) >= -2 ln Tr[sqrt(rho_ABC) sqrt(M)]
///  >= ||sqrt(rho_ABC) - sqrt(M)||_2^2 >= (1/4) ||rho_ABC - M||_1^2`.
///
/// The first link is the relative-entropy form of `I(A:B|C)`; the
/// entropy-difference form is recorded in the metadata so the two independent
/// computations can be compared.
pub fn check_cmi_chain(rho: &MultipartiteState, tol: f64) -> Result<ChainVerdict> {
    let tol = scaled_tol(tol, rho.dim());
    require_full_rank(&rho.matrix, "rho_ABC")?;
    let m = markov_operator(rho)?;
    let s = relative_entropy_matrices(&rho.matrix, &m)?;
    let (bound, hs, tn) = overlap_links(&rho.matrix, &m)?;
    let cmi_diff = cmi_matrices(&rho.matrix, &rho.dims)?;
    Ok(ChainVerdict::from_links(
        "cmi-chain",
        vec![
            ("S(rho_ABC||M)".into(), s),
            ("-2 ln Tr[sqrt(rho_ABC) sqrt(M)]".into(), bound),
            (
                "||sqrt(rho_ABC) - sqrt(M)||_2^2".into(),
                ExtendedReal::Finite(hs),
            ),
            ("(1/4) ||rho_ABC - M||_1^2".into(), ExtendedReal::Finite(tn)),
        ],
        tol,
        meta(&[
            ("dims", serde_json::json!(rho.dims)),
            (
                "m_operator",
                serde_json::json!("exp(log rho_AC - log rho_C + log rho_BC)"),
            ),
            ("cmi_entropy_difference", serde_json::json!(cmi_diff)),
            ("trace_m", serde_json::json!(trace_re(&m))),
        ]),
    ))
}

fn tripartite_marginals(m: &CMatrix, dims: &[usize]) -> Result<(CMatrix, CMatrix, CMatrix)> {
    Ok((
        partial_trace(m, dims, &[0, 2])?,
        partial_trace(m, dims, &[1, 2])?,
        partial_trace(m, dims, &[2])?,
    ))
}

/// Exact identity
/// `S(rho_ABC || exp(log sigma_AC + log tau_BC - log omega_C))
///  = I(A:B|C)_rho + S(rho_AC||sigma_AC) + S(rho_BC||tau_BC) - S(rho_C||omega_C)`
/// with independent operators on AC, BC and C. Returns the full verdict;
/// [`berta_identity_general`] exposes just the residual.
pub fn berta_identity_general_verdict(
    rho: &MultipartiteState,
    sigma_ac: &CMatrix,
    tau_bc: &CMatrix,
    omega_c: &CMatrix,
    tol: f64,
) -> Result<ChainVerdict> {
    if rho.dims.len() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "need a tripartite split, got {:?}",
            rho.dims
        )));
    }
    let tol = scaled_tol(tol, rho.dim());
    let dims = &rho.dims;
    require_full_rank(sigma_ac, "sigma_AC")?;
    require_full_rank(tau_bc, "tau_BC")?;
    require_full_rank(omega_c, "omega_C")?;

    let arg = hermitize(
        &(lift_to_full(&logm_psd(sigma_ac)?, dims, &[0, 2])?
            + lift_to_full(&logm_psd(tau_bc)?, dims, &[1, 2])?
            - lift_to_full(&logm_psd(omega_c)?, dims, &[2])?),
    );
    let x = expm_hermitian(&arg)?;
    let lhs = relative_entropy_matrices(&rho.matrix, &x)?;

    let (rho_ac, rho_bc, rho_c) = tripartite_marginals(&rho.matrix, dims)?;
    let i_abc = cmi_matrices(&rho.matrix, dims)?;
    let s_ac = relative_entropy_matrices(&rho_ac, sigma_ac)?.to_f64();
    let s_bc = relative_entropy_matrices(&rho_bc, tau_bc)?.to_f64();
    let s_c = relative_entropy_matrices(&rho_c, omega_c)?.to_f64();
    let rhs = ExtendedReal::from(i_abc + s_ac + s_bc - s_c);

    Ok(ChainVerdict::identity(
        "identity-general",
        (
            "S(rho_ABC||exp(log sigma_AC + log tau_BC - log omega_C))".into(),
            lhs,
        ),
        (
            "I(A:B|C) + S(rho_AC||sigma_AC) + S(rho_BC||tau_BC) - S(rho_C||omega_C)".into(),
            rhs,
        ),
        tol,
        meta(&[("dims", serde_json::json!(dims))]),
    ))
}

/// Residual `|lhs - rhs|` of the general identity.
pub fn berta_identity_general(
    rho: &MultipartiteState,
    sigma_ac: &CMatrix,
    tau_bc: &CMatrix,
    omega_c: &CMatrix,
) -> Result<f64> {
    Ok(berta_identity_general_verdict(rho, sigma_ac, tau_bc, omega_c, f64::INFINITY)?.residual())
}

/// The single-`sigma` specialization: the AC, BC and C operators are the
/// marginals of one tripartite `sigma_ABC`.
pub fn berta_identity_verdict(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    tol: f64,
) -> Result<ChainVerdict> {
    if sigma.dims != rho.dims {
        return Err(Error::DimensionMismatch(format!(
            "splits differ: {:?} vs {:?}",
            rho.dims, sigma.dims
        )));
    }
    let (sigma_ac, sigma_bc, sigma_c) = tripartite_marginals(&sigma.matrix, &sigma.dims)?;
    let mut v = berta_identity_general_verdict(rho, &sigma_ac, &sigma_bc, &sigma_c, tol)?;
    v.name = "identity-single-sigma".into();
    Ok(v)
}

pub fn berta_identity(rho: &MultipartiteState, sigma: &MultipartiteState) -> Result<f64> {
    Ok(berta_identity_verdict(rho, sigma, f64::INFINITY)?.residual())
}

/// Marginal monotonicity consequence:
/// `(1/2)[S(rho_AC||sigma_AC) + S(rho_BC||sigma_BC)] >= S(rho_C||sigma_C)`.
pub fn check_marginal_monotonicity(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    tol: f64,
) -> Result<ChainVerdict> {
    if rho.dims.len() != 3 || sigma.dims != rho.dims {
        return Err(Error::DimensionMismatch(format!(
            "need matching tripartite splits, got {:?} and {:?}",
            rho.dims, sigma.dims
        )));
    }
    let tol = scaled_tol(tol, rho.dim());
    let (rho_ac, rho_bc, rho_c) = tripartite_marginals(&rho.matrix, &rho.dims)?;
    let (sigma_ac, sigma_bc, sigma_c) = tripartite_marginals(&sigma.matrix, &sigma.dims)?;
    let s_ac = relative_entropy_matrices(&rho_ac, &sigma_ac)?;
    let s_bc = relative_entropy_matrices(&rho_bc, &sigma_bc)?;
    let s_c = relative_entropy_matrices(&rho_c, &sigma_c)?;
    let lhs = match (s_ac, s_bc) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
            ExtendedReal::Finite(0.5 * (a + b))
        }
        _ => ExtendedReal::Infinity,
    };
    Ok(ChainVerdict::from_links(
        "marginal-monotonicity",
        vec![
            (
                "(1/2)[S(rho_AC||sigma_AC) + S(rho_BC||sigma_BC)]".into(),
                lhs,
            ),
            ("S(rho_C||sigma_C)".into(), s_c),
        ],
        tol,
        meta(&[("dims", serde_json::json!(rho.dims))]),
    ))
}

/// Strengthened subadditivity bound: with
/// `X = exp(log sigma_AC + log sigma_BC - log sigma_C)`,
/// `S(rho_ABC||X) >= I(A:B|C)_rho + (1/2) S(rho_AC||sigma_AC)
///  + (1/2) S(rho_BC||sigma_BC) >= 0`.
///
/// When the left side vanishes, the equality branch additionally checks that
/// `rho_ABC` coincides with `X` in trace norm and that every term on the
/// right vanishes individually.
pub fn check_super_ssa(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    tol: f64,
) -> Result<ChainVerdict> {
    if rho.dims.len() != 3 || sigma.dims != rho.dims {
        return Err(Error::DimensionMismatch(format!(
            "need matching tripartite splits, got {:?} and {:?}",
            rho.dims, sigma.dims
        )));
    }
    let tol = scaled_tol(tol, rho.dim());
    let x = expm_hermitian(&tripartite_log_combination(&sigma.matrix, &sigma.dims, true)?)?;
    let lhs = relative_entropy_matrices(&rho.matrix, &x)?;

    let (rho_ac, rho_bc, _) = tripartite_marginals(&rho.matrix, &rho.dims)?;
    let (sigma_ac, sigma_bc, _) = tripartite_marginals(&sigma.matrix, &sigma.dims)?;
    let i_abc = cmi_matrices(&rho.matrix, &rho.dims)?;
    let s_ac = relative_entropy_matrices(&rho_ac, &sigma_ac)?.to_f64();
    let s_bc = relative_entropy_matrices(&rho_bc, &sigma_bc)?.to_f64();
    let rhs = ExtendedReal::from(i_abc + 0.5 * s_ac + 0.5 * s_bc);

    let mut verdict = ChainVerdict::from_links(
        "super-ssa",
        vec![
            (
                "S(rho_ABC||exp(log sigma_AC + log sigma_BC - log sigma_C))".into(),
                lhs,
            ),
            (
                "I(A:B|C) + (1/2) S(rho_AC||sigma_AC) + (1/2) S(rho_BC||sigma_BC)".into(),
                rhs,
            ),
            ("0".into(), ExtendedReal::Finite(0.0)),
        ],
        tol,
        meta(&[
            ("dims", serde_json::json!(rho.dims)),
            ("cmi_rho", serde_json::json!(i_abc)),
            ("s_ac", serde_json::json!(s_ac)),
            ("s_bc", serde_json::json!(s_bc)),
        ]),
    );

    if let ExtendedReal::Finite(l) = lhs {
        if l <= tol {
            let distance = trace_norm(&(&rho.matrix - &x));
            verdict
                .metadata
                .insert("equality_trace_distance".into(), serde_json::json!(distance));
            verdict.require(
                "equality_state_recovered",
                distance <= (2.0 * tol).sqrt(),
            );
            verdict.require("equality_cmi_vanishes", i_abc <= tol);
            verdict.require("equality_s_ac_vanishes", s_ac <= tol);
            verdict.require("equality_s_bc_vanishes", s_bc <= tol);
        }
    }
    Ok(verdict)
}

/// Substate chain seeded by a second state's marginals: with
/// `X = exp(log sigma_AC + log sigma_BC - log sigma_C)` (a substate),
/// `S(rho_ABC||X) >= -2 ln Tr[sqrt(rho_ABC) sqrt(X)]
///  >= ||sqrt(rho_ABC) - sqrt(X)||_2^2 >= (1/4) ||rho_ABC - X||_1^2`.
pub fn check_sigma_substate_chain(
    rho: &MultipartiteState,
    sigma: &MultipartiteState,
    tol: f64,
) -> Result<ChainVerdict> {
    if rho.dims.len() != 3 || sigma.dims != rho.dims {
        return Err(Error::DimensionMismatch(format!(
            "need matching tripartite splits, got {:?} and {:?}",
            rho.dims, sigma.dims
        )));
    }
    let tol = scaled_tol(tol, rho.dim());
    let x = expm_hermitian(&tripartite_log_combination(&sigma.matrix, &sigma.dims, true)?)?;
    let trace_x = trace_re(&x);
    let s = relative_entropy_matrices(&rho.matrix, &x)?;
    let (bound, hs, tn) = overlap_links(&rho.matrix, &x)?;
    let mut verdict = ChainVerdict::from_links(
        "sigma-substate-chain",
        vec![
            ("S(rho_ABC||X)".into(), s),
            ("-2 ln Tr[sqrt(rho_ABC) sqrt(X)]".into(), bound),
            (
                "||sqrt(rho_ABC) - sqrt(X)||_2^2".into(),
                ExtendedReal::Finite(hs),
            ),
            ("(1/4) ||rho_ABC - X||_1^2".into(), ExtendedReal::Finite(tn)),
        ],
        tol,
        meta(&[
            ("dims", serde_json::json!(rho.dims)),
            (
                "x_operator",
                serde_json::json!("exp(log sigma_AC + log sigma_BC - log sigma_C)"),
            ),
            ("trace_x", serde_json::json!(trace_x)),
        ]),
    );
    verdict.require("substate_precheck", trace_x <= 1.0 + tol);
    Ok(verdict)
}

/// Two-marginal chain: with `Y = exp(log rho_AC + log rho_BC)`,
/// `S(rho_AC) + S(rho_BC) - S(rho_ABC) >= -2 ln Tr[sqrt(rho_ABC) sqrt(Y)]
///  >= ||sqrt(rho_ABC) - sqrt(Y)||_2^2 >= (1/4) ||rho_ABC - Y||_1^2`,
/// together with the substate certificate
/// `Tr Y <= Tr[rho_AC rho_BC] = Tr rho_C^2 <= 1`.
pub fn check_two_marginal_chain(rho: &MultipartiteState, tol: f64) -> Result<ChainVerdict> {
    if rho.dims.len() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "need a tripartite split, got {:?}",
            rho.dims
        )));
    }
    let tol = scaled_tol(tol, rho.dim());
    require_full_rank(&rho.matrix, "rho_ABC")?;
    let dims = &rho.dims;
    let y = expm_hermitian(&tripartite_log_combination(&rho.matrix, dims, false)?)?;
    let (rho_ac, rho_bc, rho_c) = tripartite_marginals(&rho.matrix, dims)?;

    let lhs = entropy_of_matrix(&rho_ac)? + entropy_of_matrix(&rho_bc)?
        - entropy_of_matrix(&rho.matrix)?;
    let (bound, hs, tn) = overlap_links(&rho.matrix, &y)?;

    // substate certificate: Golden-Thompson turns Tr Y into Tr[rho_AC rho_BC],
    // which collapses to the purity of the C marginal
    let trace_y = trace_re(&y);
    let lifted_product = lift_to_full(&rho_ac, dims, &[0, 2])? * lift_to_full(&rho_bc, dims, &[1, 2])?;
    let trace_product = trace_re(&lifted_product);
    let purity_c = trace_re(&(&rho_c * &rho_c));

    let mut verdict = ChainVerdict::from_links(
        "two-marginal-chain",
        vec![
            (
                "S(rho_AC) + S(rho_BC) - S(rho_ABC)".into(),
                ExtendedReal::Finite(lhs),
            ),
            ("-2 ln Tr[sqrt(rho_ABC) sqrt(Y)]".into(), bound),
            (
                "||sqrt(rho_ABC) - sqrt(Y)||_2^2".into(),
                ExtendedReal::Finite(hs),
            ),
            ("(1/4) ||rho_ABC - Y||_1^2".into(), ExtendedReal::Finite(tn)),
        ],
        tol,
        meta(&[
            ("dims", serde_json::json!(dims)),
            ("y_operator", serde_json::json!("exp(log rho_AC + log rho_BC)")),
            ("trace_y", serde_json::json!(trace_y)),
            ("trace_rho_ac_rho_bc", serde_json::json!(trace_product)),
            ("trace_rho_c_squared", serde_json::json!(purity_c)),
        ]),
    );
    verdict.require("certificate_trace_y_bounded", trace_y <= trace_product + tol);
    verdict.require(
        "certificate_product_is_c_purity",
        (trace_product - purity_c).abs() <= tol,
    );
    verdict.require("certificate_purity_bounded", purity_c <= 1.0 + tol);
    Ok(verdict)
}

/// `Tr exp(A + B) <= Tr exp(A) exp(B)` for Hermitian `A`, `B`.
pub fn check_golden_thompson(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<ChainVerdict> {
    let tol = scaled_tol(tol, a.nrows());
    let joint = trace_re(&expm_hermitian(&(a + b))?);
    let split = trace_re(&(expm_hermitian(a)? * expm_hermitian(b)?));
    Ok(ChainVerdict::from_links(
        "golden-thompson",
        vec![
            ("Tr[exp(A) exp(B)]".into(), ExtendedReal::Finite(split)),
            ("Tr[exp(A + B)]".into(), ExtendedReal::Finite(joint)),
        ],
        tol,
        meta(&[("dim", serde_json::json!(a.nrows()))]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::cmi;
    use crate::linalg::{tensor, C64};
    use crate::states::{
        derive_seed, random_channel, random_density_hs, random_markov_classical_c,
        random_multipartite_hs, random_pure, random_unitary, MultipartiteState, QuantumChannel,
        StateKind,
    };
    use nalgebra::DVector;

    fn real_diag(vals: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ))
    }

    fn substate(m: CMatrix, dims: Vec<usize>) -> MultipartiteState {
        MultipartiteState::from_parts(m, dims, StateKind::Substate)
    }

    fn shrunk(st: &MultipartiteState, factor: f64) -> MultipartiteState {
        let mut s = st.clone();
        s.matrix *= C64::new(factor, 0.0);
        s.kind = StateKind::Substate;
        s
    }

    #[test]
    fn substate_chain_collapses_at_equality() {
        let rho = random_density_hs(4, 1);
        let v = check_substate_chain(&rho, &rho, 1e-9).unwrap();
        assert!(v.pass);
        for (label, link) in &v.links {
            assert!(link.finite().unwrap().abs() <= 1e-10, "{label}");
        }
    }

    #[test]
    fn substate_chain_handles_orthogonal_supports() {
        // S = +Infinity, -2 ln 0 = +Infinity, then the exact values 2 and 1
        let rho = MultipartiteState::from_parts(real_diag(&[1.0, 0.0]), vec![2], StateKind::State);
        let sigma = substate(real_diag(&[0.0, 1.0]), vec![2]);
        let v = check_substate_chain(&rho, &sigma, 1e-9).unwrap();
        assert!(v.pass, "gaps {:?}", v.gaps);
        assert_eq!(v.links[0].1, ExtendedReal::Infinity);
        assert_eq!(v.links[1].1, ExtendedReal::Infinity);
        assert!((v.links[2].1.finite().unwrap() - 2.0).abs() < 1e-12);
        assert!((v.links[3].1.finite().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn substate_chain_rejects_oversized_sigma() {
        let rho = random_density_hs(2, 0);
        let sigma = shrunk(&random_density_hs(2, 1), 1.3);
        assert!(matches!(
            check_substate_chain(&rho, &sigma, 1e-9),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn substate_chain_holds_on_random_substate_pairs() {
        for d in [2usize, 3, 4] {
            let n = if d == 4 { 1000 } else { 200 };
            for i in 0..n {
                let rho = random_density_hs(d, derive_seed(1000 + d as u64, i));
                let sigma = shrunk(&random_density_hs(d, derive_seed(2000 + d as u64, i)), 0.9);
                let v = check_substate_chain(&rho, &sigma, 1e-9).unwrap();
                assert!(v.pass, "d={d} sample {i}: gaps {:?}", v.gaps);
            }
        }
    }

    #[test]
    fn norm_sandwich_equality_cases() {
        let m = random_density_hs(3, 4).matrix;
        let v = check_norm_sandwich(&m, &m, 1e-10).unwrap();
        assert!(v.pass);
        for (_, link) in &v.links {
            assert!(link.finite().unwrap().abs() < 1e-12);
        }
        // orthogonal projectors: all three links equal 2
        let v = check_norm_sandwich(&real_diag(&[1.0, 0.0]), &real_diag(&[0.0, 1.0]), 1e-10)
            .unwrap();
        for (_, link) in &v.links {
            assert!((link.finite().unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_sandwich_holds_on_random_psd_pairs() {
        for d in [2usize, 3, 4] {
            for i in 0..334u64 {
                let a = random_density_hs(d, derive_seed(100 + d as u64, i)).matrix
                    * C64::new(1.7, 0.0);
                let b = random_density_hs(d, derive_seed(200 + d as u64, i)).matrix
                    * C64::new(0.6, 0.0);
                let v = check_norm_sandwich(&a, &b, 1e-9).unwrap();
                assert!(v.pass, "d={d} sample {i}: gaps {:?}", v.gaps);
            }
        }
    }

    #[test]
    fn monotonicity_gap_is_zero_for_identity_channel_at_equality() {
        let rho = random_density_hs(2, 5);
        let phi = QuantumChannel::new(vec![CMatrix::identity(2, 2)], 2, 2).unwrap();
        let v = check_monotonicity_gap(&rho, &rho, &phi, 1e-9).unwrap();
        assert!(v.pass);
        assert!(v.links[0].1.finite().unwrap().abs() < 1e-10);
    }

    #[test]
    fn monotonicity_gap_under_unitary_conjugation() {
        // unitary channels change nothing: lhs = 0 and the bound collapses to 0
        for seed in 0..20u64 {
            let rho = random_density_hs(2, derive_seed(300, seed));
            let sigma = random_density_hs(2, derive_seed(400, seed));
            let u = random_unitary(2, derive_seed(500, seed));
            let phi = QuantumChannel::new(vec![u], 2, 2).unwrap();
            let v = check_monotonicity_gap(&rho, &sigma, &phi, 1e-9).unwrap();
            assert!(v.pass, "seed {seed}");
            assert!(v.links[0].1.finite().unwrap().abs() <= 1e-9, "lhs nonzero");
            assert!(v.links[1].1.finite().unwrap() <= 1e-9, "bound above zero");
        }
    }

    #[test]
    fn monotonicity_gap_holds_on_random_triples() {
        for i in 0..100u64 {
            let rho = random_density_hs(2, derive_seed(600, i));
            let sigma = random_density_hs(2, derive_seed(700, i));
            let phi = random_channel(2, 2, 2, derive_seed(800, i)).unwrap();
            let v = check_monotonicity_gap(&rho, &sigma, &phi, 1e-8).unwrap();
            assert!(v.pass, "sample {i}: gaps {:?}", v.gaps);
        }
    }

    #[test]
    fn bipartite_chain_collapses_when_sigma_equals_rho() {
        let rho = random_multipartite_hs(&[2, 2], 9);
        let v = check_bipartite_chain(&rho, &rho, 1e-9).unwrap();
        assert!(v.pass);
        for (label, link) in &v.links {
            assert!(link.finite().unwrap().abs() <= 1e-9, "{label}");
        }
    }

    #[test]
    fn bipartite_chain_matches_commuting_scalar_oracle() {
        // diagonal product states: every link reduces to classical arithmetic
        // over the eigenvalue distributions; values pinned by that oracle
        let pa = [0.6, 0.4];
        let pb = [0.2, 0.8];
        let qa = [0.5, 0.5];
        let qb = [0.7, 0.3];
        let kron = |x: &[f64; 2], y: &[f64; 2]| {
            [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]]
        };
        let p_ab = kron(&pa, &pb);
        let q_ab = kron(&qa, &qb);
        let rho = MultipartiteState::from_parts(real_diag(&p_ab), vec![2, 2], StateKind::State);
        let sigma = MultipartiteState::from_parts(real_diag(&q_ab), vec![2, 2], StateKind::State);
        let v = check_bipartite_chain(&rho, &sigma, 1e-9).unwrap();
        assert!(v.pass);

        // scalar oracle, evaluated in place: x_ab = q_ab * p_a / q_a
        let x: Vec<f64> = (0..4)
            .map(|i| q_ab[i] * pa[i / 2] / qa[i / 2])
            .collect();
        let kl = |p: &[f64], q: &[f64]| -> f64 {
            p.iter().zip(q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum()
        };
        let o1 = kl(&p_ab, &q_ab) - kl(&pa, &qa);
        let o2 = -2.0
            * p_ab
                .iter()
                .zip(&x)
                .map(|(&pi, &xi)| (pi * xi).sqrt())
                .sum::<f64>()
                .ln();
        let o3: f64 = p_ab
            .iter()
            .zip(&x)
            .map(|(&pi, &xi)| (pi.sqrt() - xi.sqrt()).powi(2))
            .sum();
        let o4 = 0.25
            * p_ab
                .iter()
                .zip(&x)
                .map(|(&pi, &xi)| (pi - xi).abs())
                .sum::<f64>()
                .powi(2);
        for (k, oracle) in [o1, o2, o3, o4].into_iter().enumerate() {
            let got = v.links[k].1.finite().unwrap();
            assert!(
                (got - oracle).abs() < 1e-10,
                "link {k}: matrix {got} vs scalar {oracle}"
            );
        }
    }

    #[test]
    fn bipartite_chain_holds_on_random_pairs() {
        for i in 0..1000u64 {
            let rho = random_multipartite_hs(&[2, 2], derive_seed(900, i));
            let sigma = random_multipartite_hs(&[2, 2], derive_seed(950, i));
            let v = check_bipartite_chain(&rho, &sigma, 1e-8).unwrap();
            assert!(v.pass, "sample {i}: gaps {:?}", v.gaps);
        }
    }

    #[test]
    fn cmi_chain_collapses_on_markov_states() {
        let rho = random_markov_classical_c(2, 2, 2, 13);
        let v = check_cmi_chain(&rho, 1e-9).unwrap();
        assert!(v.pass);
        for (label, link) in &v.links {
            assert!(link.finite().unwrap().abs() <= 1e-9, "{label}");
        }
    }

    #[test]
    fn cmi_chain_rejects_rank_deficient_states() {
        let mut ghz = CMatrix::zeros(8, 8);
        for &i in &[0usize, 7] {
            for &j in &[0usize, 7] {
                ghz[(i, j)] = C64::new(0.5, 0.0);
            }
        }
        let st = MultipartiteState::from_parts(ghz, vec![2, 2, 2], StateKind::State);
        assert!(matches!(
            check_cmi_chain(&st, 1e-8),
            Err(Error::SupportDeficient(_))
        ));
    }

    #[test]
    fn cmi_chain_first_link_agrees_with_entropy_difference_form() {
        for i in 0..1000u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(1100, i));
            let v = check_cmi_chain(&rho, 1e-8).unwrap();
            assert!(v.pass, "sample {i}");
            let relative_form = v.links[0].1.finite().unwrap();
            let difference_form = cmi(&rho).unwrap();
            assert!(
                (relative_form - difference_form).abs() <= 1e-9,
                "sample {i}: {relative_form} vs {difference_form}"
            );
        }
    }

    #[test]
    fn identity_general_residual_vanishes_on_own_marginals() {
        let rho = random_multipartite_hs(&[2, 2, 2], 3);
        let (ac, bc, c) = tripartite_marginals(&rho.matrix, &rho.dims).unwrap();
        let v = berta_identity_general_verdict(&rho, &ac, &bc, &c, 1e-10).unwrap();
        assert!(v.pass, "residual {}", v.residual());
        // both sides equal the conditional mutual information
        let i_abc = cmi(&rho).unwrap();
        assert!((v.links[0].1.finite().unwrap() - i_abc).abs() < 1e-10);
    }

    #[test]
    fn identity_general_holds_on_random_quadruples() {
        for i in 0..200u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(1200, i));
            let s_ac = random_multipartite_hs(&[2, 2], derive_seed(1300, i)).matrix;
            let t_bc = random_multipartite_hs(&[2, 2], derive_seed(1400, i)).matrix;
            let w_c = random_density_hs(2, derive_seed(1500, i)).matrix;
            let r = berta_identity_general(&rho, &s_ac, &t_bc, &w_c).unwrap();
            assert!(r <= 1e-8, "sample {i}: residual {r}");
        }
    }

    #[test]
    fn identity_general_on_maximally_mixed_arguments_is_zero_both_sides() {
        let dims = [2usize, 2, 2];
        let rho = MultipartiteState::from_parts(
            CMatrix::identity(8, 8) / C64::new(8.0, 0.0),
            dims.to_vec(),
            StateKind::State,
        );
        let id4 = CMatrix::identity(4, 4) / C64::new(4.0, 0.0);
        let id2 = CMatrix::identity(2, 2) / C64::new(2.0, 0.0);
        let v = berta_identity_general_verdict(&rho, &id4, &id4, &id2, 1e-10).unwrap();
        assert!(v.pass);
        assert!(v.links[0].1.finite().unwrap().abs() < 1e-10);
        assert!(v.links[1].1.finite().unwrap().abs() < 1e-10);
    }

    #[test]
    fn identity_single_sigma_cases() {
        let rho = random_multipartite_hs(&[2, 2, 2], 21);
        let v = berta_identity_verdict(&rho, &rho, 1e-10).unwrap();
        assert!(v.pass, "residual {}", v.residual());
        assert!(
            (v.links[0].1.finite().unwrap() - cmi(&rho).unwrap()).abs() < 1e-9,
            "sides must equal the conditional mutual information at sigma = rho"
        );

        for i in 0..200u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(1600, i));
            let sigma = random_multipartite_hs(&[2, 2, 2], derive_seed(1700, i));
            let r = berta_identity(&rho, &sigma).unwrap();
            assert!(r <= 1e-8, "sample {i}: residual {r}");
        }

        // sigma a Markov state, rho random
        for i in 0..50u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(1800, i));
            let sigma = random_markov_classical_c(2, 2, 2, derive_seed(1900, i));
            let r = berta_identity(&rho, &sigma).unwrap();
            assert!(r <= 1e-8, "sample {i}: residual {r}");
        }
    }

    #[test]
    fn marginal_monotonicity_cases() {
        let rho = random_multipartite_hs(&[2, 2, 2], 31);
        let v = check_marginal_monotonicity(&rho, &rho, 1e-9).unwrap();
        assert!(v.pass);
        assert!(v.links[0].1.finite().unwrap().abs() < 1e-10);

        for i in 0..1000u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(2100, i));
            let sigma = random_multipartite_hs(&[2, 2, 2], derive_seed(2200, i));
            let v = check_marginal_monotonicity(&rho, &sigma, 1e-9).unwrap();
            assert!(v.pass, "sample {i}: gaps {:?}", v.gaps);
        }
    }

    #[test]
    fn marginal_monotonicity_on_ac_b_products_reduces_to_data_processing() {
        // rho = rho_AC x rho_B: then S(rho_BC||sigma_BC) splits as
        // S(rho_B||sigma_B) + S(rho_C||sigma_C), an additivity oracle
        for i in 0..20u64 {
            let dims = [2usize, 2, 2];
            let make = |s1: u64, s2: u64| {
                let ac = random_multipartite_hs(&[2, 2], s1).matrix;
                let b = random_density_hs(2, s2).matrix;
                let m = lift_to_full(&ac, &dims, &[0, 2]).unwrap()
                    * lift_to_full(&b, &dims, &[1]).unwrap();
                MultipartiteState::from_parts(hermitize(&m), dims.to_vec(), StateKind::State)
            };
            let rho = make(derive_seed(2300, i), derive_seed(2400, i));
            let sigma = make(derive_seed(2500, i), derive_seed(2600, i));
            let v = check_marginal_monotonicity(&rho, &sigma, 1e-9).unwrap();
            assert!(v.pass, "sample {i}");

            let (_, rho_bc, rho_c) = tripartite_marginals(&rho.matrix, &rho.dims).unwrap();
            let (_, sigma_bc, sigma_c) =
                tripartite_marginals(&sigma.matrix, &sigma.dims).unwrap();
            let rho_b = partial_trace(&rho.matrix, &rho.dims, &[1]).unwrap();
            let sigma_b = partial_trace(&sigma.matrix, &sigma.dims, &[1]).unwrap();
            let joint = relative_entropy_matrices(&rho_bc, &sigma_bc)
                .unwrap()
                .finite()
                .unwrap();
            let split = relative_entropy_matrices(&rho_b, &sigma_b)
                .unwrap()
                .finite()
                .unwrap()
                + relative_entropy_matrices(&rho_c, &sigma_c)
                    .unwrap()
                    .finite()
                    .unwrap();
            assert!(
                (joint - split).abs() <= 1e-9,
                "sample {i}: additivity broke, {joint} vs {split}"
            );
        }
    }

    #[test]
    fn super_ssa_equality_branch_on_markov_states() {
        let rho = random_markov_classical_c(2, 2, 2, 17);
        let v = check_super_ssa(&rho, &rho, 1e-8).unwrap();
        assert!(v.pass, "metadata {:?}", v.metadata);
        assert!(v.links[0].1.finite().unwrap() <= 1e-8);
        assert_eq!(
            v.metadata.get("equality_state_recovered"),
            Some(&serde_json::json!(true))
        );
    }

    #[test]
    fn super_ssa_at_sigma_equals_rho_reduces_to_cmi() {
        for i in 0..50u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(2700, i));
            let v = check_super_ssa(&rho, &rho, 1e-8).unwrap();
            assert!(v.pass, "sample {i}");
            let lhs = v.links[0].1.finite().unwrap();
            let rhs = v.links[1].1.finite().unwrap();
            let i_abc = cmi(&rho).unwrap();
            assert!((lhs - i_abc).abs() <= 1e-9, "lhs {lhs} vs cmi {i_abc}");
            assert!((lhs - rhs).abs() <= 1e-9, "gap should vanish at sigma = rho");
        }
    }

    #[test]
    fn super_ssa_holds_on_random_pairs() {
        for i in 0..200u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(2800, i));
            let sigma = random_multipartite_hs(&[2, 2, 2], derive_seed(2900, i));
            let v = check_super_ssa(&rho, &sigma, 1e-8).unwrap();
            assert!(v.pass, "sample {i}: gaps {:?}", v.gaps);
        }
    }

    #[test]
    fn sigma_substate_chain_cases() {
        let markov = random_markov_classical_c(2, 2, 2, 23);
        let v = check_sigma_substate_chain(&markov, &markov, 1e-8).unwrap();
        assert!(v.pass);
        for (label, link) in &v.links {
            assert!(link.finite().unwrap().abs() <= 1e-8, "{label}");
        }

        for i in 0..1000u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(3000, i));
            let sigma = random_multipartite_hs(&[2, 2, 2], derive_seed(3100, i));
            let v = check_sigma_substate_chain(&rho, &sigma, 1e-8).unwrap();
            assert!(v.pass, "sample {i}: gaps {:?}", v.gaps);
            let trace_x = v.metadata["trace_x"].as_f64().unwrap();
            assert!(trace_x <= 1.0 + 1e-9, "sample {i}: Tr X = {trace_x}");
        }
    }

    #[test]
    fn two_marginal_chain_commuting_case_pins_the_certificate() {
        // product state: Tr Y = Tr rho_C^2 exactly
        let a = random_density_hs(2, 41).matrix;
        let b = random_density_hs(2, 42).matrix;
        let c = random_density_hs(2, 43).matrix;
        let rho = MultipartiteState::from_parts(
            tensor(&tensor(&a, &b), &c),
            vec![2, 2, 2],
            StateKind::State,
        );
        let v = check_two_marginal_chain(&rho, 1e-8).unwrap();
        assert!(v.pass);
        let trace_y = v.metadata["trace_y"].as_f64().unwrap();
        let purity_c = v.metadata["trace_rho_c_squared"].as_f64().unwrap();
        assert!((trace_y - purity_c).abs() <= 1e-11, "{trace_y} vs {purity_c}");
    }

    #[test]
    fn two_marginal_chain_on_maximally_mixed_state() {
        // uniform spectrum oracle: first link = 2 ln 4 - ln 8 = ln 2
        let rho = MultipartiteState::from_parts(
            CMatrix::identity(8, 8) / C64::new(8.0, 0.0),
            vec![2, 2, 2],
            StateKind::State,
        );
        let v = check_two_marginal_chain(&rho, 1e-9).unwrap();
        assert!(v.pass);
        let first = v.links[0].1.finite().unwrap();
        assert!((first - 2f64.ln()).abs() < 1e-12, "first link {first}");
    }

    #[test]
    fn two_marginal_chain_holds_on_random_states() {
        for i in 0..200u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(3200, i));
            let v = check_two_marginal_chain(&rho, 1e-8).unwrap();
            assert!(v.pass, "sample {i}: gaps {:?} meta {:?}", v.gaps, v.metadata);
        }
    }

    #[test]
    fn golden_thompson_equality_for_commuting_pairs() {
        for seed in 0..20u64 {
            let a = real_diag(&[0.3 + seed as f64 * 0.01, -0.7, 1.1, 0.2]);
            let b = real_diag(&[-0.4, 0.9, 0.5, -1.0 - seed as f64 * 0.01]);
            let v = check_golden_thompson(&a, &b, 1e-10).unwrap();
            assert!(v.pass);
            assert!(v.gaps[0].abs() <= 1e-10, "commuting gap {}", v.gaps[0]);
        }
    }

    #[test]
    fn golden_thompson_strict_on_pauli_pair() {
        // closed forms for A = x Z, B = y X:
        //   Tr e^{A+B} = 2 cosh(sqrt(x^2 + y^2)) = 4.605959648221622
        //   Tr e^A e^B = 2 cosh(x) cosh(y)      = 4.947660909325899
        let (x, y) = (0.7, -1.3);
        let a = real_diag(&[x, -x]);
        let mut b = CMatrix::zeros(2, 2);
        b[(0, 1)] = C64::new(y, 0.0);
        b[(1, 0)] = C64::new(y, 0.0);
        let v = check_golden_thompson(&a, &b, 1e-10).unwrap();
        assert!(v.pass);
        let split = v.links[0].1.finite().unwrap();
        let joint = v.links[1].1.finite().unwrap();
        assert!((joint - 4.605959648221622).abs() < 1e-12);
        assert!((split - 4.947660909325899).abs() < 1e-12);
        assert!(split > joint + 0.1, "inequality must be strict here");
    }

    #[test]
    fn golden_thompson_holds_on_random_hermitian_pairs() {
        use rand::{Rng, SeedableRng};
        for i in 0..200u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(3300, i));
            let mut draw = || {
                let mut g = CMatrix::zeros(4, 4);
                for r in 0..4 {
                    for cc in 0..4 {
                        g[(r, cc)] =
                            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    }
                }
                hermitize(&g)
            };
            let a = draw();
            let b = draw();
            let v = check_golden_thompson(&a, &b, 1e-9).unwrap();
            assert!(v.pass, "sample {i}: gap {}", v.gaps[0]);
        }
    }

    #[test]
    fn chain_links_are_invariant_under_local_unitaries() {
        for i in 0..10u64 {
            let rho = random_multipartite_hs(&[2, 2, 2], derive_seed(3400, i));
            let sigma = random_multipartite_hs(&[2, 2, 2], derive_seed(3500, i));
            let u = tensor(
                &tensor(
                    &random_unitary(2, derive_seed(3600, i)),
                    &random_unitary(2, derive_seed(3700, i)),
                ),
                &random_unitary(2, derive_seed(3800, i)),
            );
            let rotate = |st: &MultipartiteState| {
                MultipartiteState::from_parts(
                    &u * &st.matrix * u.adjoint(),
                    st.dims.clone(),
                    st.kind,
                )
            };
            let before = check_super_ssa(&rho, &sigma, 1e-8).unwrap();
            let after = check_super_ssa(&rotate(&rho), &rotate(&sigma), 1e-8).unwrap();
            for (b, a) in before.links.iter().zip(&after.links) {
                let shift = (b.1.to_f64() - a.1.to_f64()).abs();
                assert!(shift <= 1e-8, "link {} moved by {shift}", b.0);
            }

            let before = check_cmi_chain(&rho, 1e-8).unwrap();
            let after = check_cmi_chain(&rotate(&rho), 1e-8).unwrap();
            for (b, a) in before.links.iter().zip(&after.links) {
                let shift = (b.1.to_f64() - a.1.to_f64()).abs();
                assert!(shift <= 1e-8, "link {} moved by {shift}", b.0);
            }
        }
    }

    #[test]
    fn equality_detection_sandwiches_every_downstream_link() {
        // whenever a chain's first link is ~0, all later links must be too
        for i in 0..20u64 {
            let markov = random_markov_classical_c(2, 2, 3, derive_seed(3900, i));
            for v in [
                check_cmi_chain(&markov, 1e-8).unwrap(),
                check_substate_chain(&markov, &markov, 1e-8).unwrap(),
            ] {
                let first = v.links[0].1.finite().unwrap();
                if first <= 1e-9 {
                    for (label, link) in &v.links[1..] {
                        assert!(
                            link.finite().unwrap() <= 1e-8,
                            "sample {i}: link {label} not sandwiched"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn verdicts_with_infinite_links_survive_serde() {
        let rho = MultipartiteState::from_parts(real_diag(&[1.0, 0.0]), vec![2], StateKind::State);
        let sigma = substate(real_diag(&[0.0, 1.0]), vec![2]);
        let v = check_substate_chain(&rho, &sigma, 1e-9).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.contains("\"Infinity\""));
        let back: ChainVerdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back.pass, v.pass);
        assert_eq!(back.links, v.links);
        assert_eq!(back.gaps, v.gaps);
    }

    #[test]
    fn pure_rho_is_fine_where_only_sigma_logs_are_taken() {
        // the sigma-substate chain and identities gate sigma, not rho
        let rho = {
            let mut st = random_pure(8, 4);
            st.dims = vec![2, 2, 2];
            st.labels = crate::states::default_labels(3);
            st
        };
        let sigma = random_multipartite_hs(&[2, 2, 2], 5);
        let v = check_sigma_substate_chain(&rho, &sigma, 1e-8).unwrap();
        assert!(v.pass, "gaps {:?}", v.gaps);
        assert!(berta_identity(&rho, &sigma).unwrap() <= 1e-8);
    }
}
