//! Dense Hermitian linear algebra on complex matrices.
//!
//! Everything downstream (entropies, inequality chains, Markov operators) is
//! built from the primitives here: a single eigendecomposition routine, matrix
//! functions restricted to the support, Kronecker/partial-trace index algebra,
//! and Schatten norms.
//!
//! Index convention, fixed globally: subsystem 0 is the most significant index
//! (row-major Kronecker), i.e. the flat row index of a multi-index
//! `(i_0, ..., i_{n-1})` over dimensions `(d_0, ..., d_{n-1})` is
//! `i_0 * d_1 * ... * d_{n-1} + ... + i_{n-1}`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Default tolerance (relative to `max(1, ||H||_2)`) for accepting a matrix as
/// Hermitian before symmetrizing it.
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order, eigenvectors as the columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianEigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U f(diag) U^dag`, re-Hermitized. Matrix functions never bypass this.
    pub fn map_spectrum<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let flam = C64::new(f(lambda), 0.0);
            for i in 0..d {
                scaled[(i, j)] *= flam;
            }
        }
        hermitize(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|x| x)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// Scale-aware absolute threshold below which an eigenvalue counts as part
    /// of the kernel: `d * lambda_max * 2^-45`.
    pub fn default_support_cutoff(&self) -> f64 {
        self.dim() as f64 * self.max_abs_eigenvalue() * 2f64.powi(-45)
    }
}

/// Orthogonal projector onto the numerical range of a PSD matrix.
#[derive(Debug, Clone)]
pub struct SupportInfo {
    pub projector: CMatrix,
    pub rank: usize,
    pub cutoff: f64,
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj).map(|z| z * 0.5)
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermiticity_residual(m) <= tol * m.norm().max(1.0)
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// The input is symmetrized to `(H + H^dag)/2` before decomposition; inputs
/// whose anti-Hermitian part exceeds `hermiticity_tol * max(1, ||H||_2)` are
/// rejected rather than silently projected.
pub fn eig_hermitian(h: &CMatrix, hermiticity_tol: f64) -> Result<HermitianEigenSystem> {
    let d = check_square(h)?;
    let residual = hermiticity_residual(h);
    if residual > hermiticity_tol * h.norm().max(1.0) {
        return Err(Error::NotHermitian {
            residual,
            tol: hermiticity_tol,
        });
    }
    let sym = hermitize(h);
    let max_iter = 200 * d.max(4);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, max_iter)
        .ok_or(Error::ConvergenceFailure { dim: d })?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Support of a PSD matrix at the given absolute eigenvalue cutoff
/// (`None` selects the scale-aware default).
pub fn support_info(a: &CMatrix, cutoff: Option<f64>) -> Result<SupportInfo> {
    let eig = eig_hermitian(a, DEFAULT_HERMITICITY_TOL)?;
    let cutoff = cutoff.unwrap_or_else(|| eig.default_support_cutoff());
    let rank = eig.eigenvalues.iter().filter(|&&l| l > cutoff).count();
    let projector = eig.map_spectrum(|l| if l > cutoff { 1.0 } else { 0.0 });
    Ok(SupportInfo {
        projector,
        rank,
        cutoff,
    })
}

/// Apply a scalar function to a PSD matrix on its support.
///
/// Eigenvalues above the cutoff are mapped through `f`; the kernel is mapped
/// to zero (so `log` and negative powers act on the support only). An
/// eigenvalue below `-cutoff` is a genuine negativity and is an error.
pub fn matrix_function_psd<F: Fn(f64) -> f64>(
    a: &CMatrix,
    f: F,
    cutoff: Option<f64>,
) -> Result<CMatrix> {
    let eig = eig_hermitian(a, DEFAULT_HERMITICITY_TOL)?;
    let cutoff = cutoff.unwrap_or_else(|| eig.default_support_cutoff());
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if min < -cutoff {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map_spectrum(|l| if l > cutoff { f(l) } else { 0.0 }))
}

pub fn sqrtm_psd(a: &CMatrix) -> Result<CMatrix> {
    matrix_function_psd(a, f64::sqrt, None)
}

/// Support-restricted matrix logarithm: kernel eigenvalues map to 0, not -inf.
/// Whether a kernel is fatal is decided by the relative-entropy layer.
pub fn logm_psd(a: &CMatrix) -> Result<CMatrix> {
    matrix_function_psd(a, f64::ln, None)
}

/// `A^{-1/2}` on the support (kernel to 0).
pub fn inv_sqrtm_psd(a: &CMatrix) -> Result<CMatrix> {
    matrix_function_psd(a, |l| 1.0 / l.sqrt(), None)
}

pub fn powm_psd(a: &CMatrix, p: f64) -> Result<CMatrix> {
    matrix_function_psd(a, |l| l.powf(p), None)
}

/// Matrix exponential of a Hermitian matrix (always Hermitian PD).
pub fn expm_hermitian(h: &CMatrix) -> Result<CMatrix> {
    let eig = eig_hermitian(h, DEFAULT_HERMITICITY_TOL)?;
    Ok(eig.map_spectrum(f64::exp))
}

/// Kronecker product; the left factor is the most significant index.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn validate_subsystems(m: &CMatrix, dims: &[usize], subset: &[usize]) -> Result<Vec<usize>> {
    let d = check_square(m)?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "invalid subsystem dimensions {dims:?}"
        )));
    }
    let prod: usize = dims.iter().product();
    if prod != d {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} multiply to {prod} but the matrix is {d}x{d}"
        )));
    }
    let mut idx: Vec<usize> = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != subset.len() || idx.iter().any(|&s| s >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem selection {subset:?} is not a subset of 0..{}",
            dims.len()
        )));
    }
    Ok(idx)
}

/// Row-major strides: `stride[s] = d_{s+1} * ... * d_{n-1}`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        out[s] = out[s + 1] * dims[s + 1];
    }
    out
}

/// Decompose `flat` into digits over `dims` (subsystem 0 most significant).
fn digits(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for s in (0..dims.len()).rev() {
        out[s] = flat % dims[s];
        flat /= dims[s];
    }
    out
}

/// Trace out every subsystem not listed in `keep`; the global order of the
/// kept subsystems is preserved.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let keep = validate_subsystems(m, dims, keep)?;
    if keep.is_empty() {
        return Err(Error::DimensionMismatch(
            "partial trace must keep at least one subsystem".into(),
        ));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
    let stride = strides(dims);
    let kept_dims: Vec<usize> = keep.iter().map(|&s| dims[s]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    let base = |multi: &[usize], subsystems: &[usize]| -> usize {
        multi
            .iter()
            .zip(subsystems)
            .map(|(&digit, &s)| digit * stride[s])
            .sum()
    };

    let mut out = CMatrix::zeros(dk, dk);
    for ik in 0..dk {
        let row_k = base(&digits(ik, &kept_dims), &keep);
        for jk in 0..dk {
            let col_k = base(&digits(jk, &kept_dims), &keep);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                let off = base(&digits(t, &traced_dims), &traced);
                acc += m[(row_k + off, col_k + off)];
            }
            out[(ik, jk)] = acc;
        }
    }
    Ok(out)
}

/// Embed an operator living on the `occupied` subsystems into the full space
/// by tensoring with the identity on every other factor, respecting the
/// global subsystem order.
pub fn lift_to_full(m: &CMatrix, dims: &[usize], occupied: &[usize]) -> Result<CMatrix> {
    let occ = {
        let mut idx: Vec<usize> = occupied.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != occupied.len() || idx.iter().any(|&s| s >= dims.len()) {
            return Err(Error::DimensionMismatch(format!(
                "subsystem selection {occupied:?} is not a subset of 0..{}",
                dims.len()
            )));
        }
        idx
    };
    let occ_dims: Vec<usize> = occ.iter().map(|&s| dims[s]).collect();
    let dm: usize = occ_dims.iter().product();
    if m.nrows() != dm || m.ncols() != dm {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but the occupied subsystems {occ:?} have total dimension {dm}",
            m.nrows(),
            m.ncols()
        )));
    }
    let free: Vec<usize> = (0..dims.len()).filter(|s| !occ.contains(s)).collect();
    let free_dims: Vec<usize> = free.iter().map(|&s| dims[s]).collect();
    let df: usize = free_dims.iter().product();
    let d: usize = dims.iter().product();
    let stride = strides(dims);

    let base = |multi: &[usize], subsystems: &[usize]| -> usize {
        multi
            .iter()
            .zip(subsystems)
            .map(|(&digit, &s)| digit * stride[s])
            .sum()
    };

    let mut out = CMatrix::zeros(d, d);
    for i in 0..dm {
        let row_o = base(&digits(i, &occ_dims), &occ);
        for j in 0..dm {
            let col_o = base(&digits(j, &occ_dims), &occ);
            let v = m[(i, j)];
            for k in 0..df {
                let off = base(&digits(k, &free_dims), &free);
                out[(row_o + off, col_o + off)] = v;
            }
        }
    }
    Ok(out)
}

/// Trace norm (sum of singular values). Hermitian inputs go through the
/// eigenvalue path, which is markedly more accurate for near-zero matrices.
pub fn trace_norm(a: &CMatrix) -> f64 {
    if a.nrows() == a.ncols() && is_hermitian(a, DEFAULT_HERMITICITY_TOL) {
        if let Ok(eig) = eig_hermitian(a, DEFAULT_HERMITICITY_TOL) {
            return eig.eigenvalues.iter().map(|l| l.abs()).sum();
        }
    }
    singular_values(a).iter().sum()
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.norm()
}

/// Schatten p-norm for `p` in {1, 2}.
pub fn schatten_norm(a: &CMatrix, p: u32) -> f64 {
    match p {
        1 => trace_norm(a),
        2 => frobenius_norm(a),
        _ => panic!("schatten_norm supports only p = 1 or p = 2, got {p}"),
    }
}

fn singular_values(a: &CMatrix) -> Vec<f64> {
    let max_iter = 200 * a.nrows().max(a.ncols()).max(4);
    match nalgebra::linalg::SVD::try_new(a.clone(), false, false, f64::EPSILON, max_iter) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        // Fall back to sqrt-eigenvalues of A^dag A; only reachable if the SVD
        // iteration stalls, which the eigen path does not share.
        None => {
            let gram = a.adjoint() * a;
            eig_hermitian(&gram, DEFAULT_HERMITICITY_TOL)
                .map(|e| {
                    e.eigenvalues
                        .iter()
                        .map(|l| l.max(0.0).sqrt())
                        .collect::<Vec<_>>()
                })
                .unwrap_or_default()
        }
    }
}

pub fn trace(a: &CMatrix) -> C64 {
    a.trace()
}

pub fn trace_re(a: &CMatrix) -> f64 {
    a.trace().re
}

/// Whether the support of `rho` is contained in the support of `sigma`:
/// `||(I - P_sigma) rho (I - P_sigma)||_1 <= leak_tol * Tr rho`.
pub fn support_contained(rho: &CMatrix, sigma: &CMatrix, leak_tol: f64) -> Result<bool> {
    let d = check_square(rho)?;
    if d != check_square(sigma)? {
        return Err(Error::DimensionMismatch(format!(
            "rho is {}x{} but sigma is {}x{}",
            d,
            d,
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let support = support_info(sigma, None)?;
    if support.rank == d {
        return Ok(true);
    }
    let complement = CMatrix::identity(d, d) - &support.projector;
    let leak = trace_norm(&(&complement * rho * &complement));
    Ok(leak <= leak_tol * trace_re(rho).max(f64::MIN_POSITIVE))
}
