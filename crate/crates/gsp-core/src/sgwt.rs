//! Spectral graph wavelets: the piecewise power-law band-pass kernel, frame
//! design with a low-pass channel, forward and inverse transforms, and frame
//! bound certification.
//!
//! Wavelet frames live on symmetric operator bases (real spectra); the
//! transform is computed through the exact spectral route.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;

use crate::error::{GspError, Result};
use crate::filter::{FilterResponse, NamedKernel};
use crate::linalg;
use crate::spectral::{gft, inverse_gft, SpectralBasis};

static NEXT_FRAME_ID: AtomicU64 = AtomicU64::new(0);

/// Band-pass kernel h(lambda): a power law lambda^alpha below lambda1, a
/// power law lambda^{-beta} above lambda2, and the unique cubic joining the
/// two branches with matching values and slopes.
#[derive(Debug, Clone)]
pub struct SgwKernel {
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Normalization point of the left branch, equal to lambda1 so that
    /// h(lambda1) = 1.
    pub lambda_star: f64,
    /// Cubic coefficients, constant first.
    pub cubic: Vec<f64>,
}

/// Solve for the transition cubic and assemble the kernel.
pub fn sgw_kernel(alpha: f64, beta: f64, lambda1: f64, lambda2: f64) -> Result<SgwKernel> {
    if alpha <= 0.0 || beta <= 0.0 || lambda1 <= 0.0 || lambda2 < lambda1 {
        return Err(GspError::Unsupported(format!(
            "kernel parameters need alpha, beta > 0 and 0 < lambda1 <= lambda2, got alpha={alpha}, beta={beta}, lambda1={lambda1}, lambda2={lambda2}"
        )));
    }
    if lambda1 == lambda2 {
        return Err(GspError::Singular("sgw cubic system (lambda1 = lambda2)".into()));
    }
    // Value and slope conditions at both junctions.
    let rows = [
        ([1.0, lambda1, lambda1 * lambda1, lambda1.powi(3)], 1.0),
        ([1.0, lambda2, lambda2 * lambda2, lambda2.powi(3)], 1.0),
        ([0.0, 1.0, 2.0 * lambda1, 3.0 * lambda1 * lambda1], alpha / lambda1),
        ([0.0, 1.0, 2.0 * lambda2, 3.0 * lambda2 * lambda2], -beta / lambda2),
    ];
    let mut a = Array2::zeros((4, 4));
    let mut b = Array1::zeros(4);
    for (i, (row, rhs)) in rows.iter().enumerate() {
        for j in 0..4 {
            a[(i, j)] = row[j];
        }
        b[i] = *rhs;
    }
    let cubic = linalg::solve_vec(&a.view(), &b)
        .map_err(|_| GspError::Singular("sgw cubic system".into()))?;
    let kernel = SgwKernel {
        alpha,
        beta,
        lambda1,
        lambda2,
        lambda_star: lambda1,
        cubic: cubic.to_vec(),
    };
    for &j in &[lambda1, lambda2] {
        let gap = (kernel.branch_value(j, true) - kernel.branch_value(j, false)).abs();
        if gap > 1e-10 {
            return Err(GspError::CheckFailed { context: format!("sgw kernel continuity at {j}"), residual: gap });
        }
    }
    Ok(kernel)
}

impl SgwKernel {
    /// Value from the power-law branches (`outer` = true) or the cubic.
    fn branch_value(&self, lambda: f64, outer: bool) -> f64 {
        if outer {
            if lambda <= self.lambda1 {
                self.lambda_star.powf(-self.alpha) * lambda.powf(self.alpha)
            } else {
                self.lambda2.powf(self.beta) * lambda.powf(-self.beta)
            }
        } else {
            crate::poly::eval(&self.cubic, lambda)
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            0.0
        } else if lambda < self.lambda1 {
            self.lambda_star.powf(-self.alpha) * lambda.powf(self.alpha)
        } else if lambda <= self.lambda2 {
            crate::poly::eval(&self.cubic, lambda)
        } else {
            self.lambda2.powf(self.beta) * lambda.powf(-self.beta)
        }
    }
}

/// Parameters of a frame design; `..Default::default()` gives the reference
/// choice alpha = beta = 2, lambda1 = 1, lambda2 = 2 with four scales.
#[derive(Debug, Clone, Copy)]
pub struct SgwDesign {
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Number of wavelet scales.
    pub m: usize,
}

impl Default for SgwDesign {
    fn default() -> Self {
        SgwDesign { alpha: 2.0, beta: 2.0, lambda1: 1.0, lambda2: 2.0, m: 4 }
    }
}

/// Spread factor: the coarsest scale puts lambda1 at K_SPREAD / lambda_max.
const K_SPREAD: f64 = 20.0;

/// A wavelet analysis system: m scaled band-pass channels plus a low-pass
/// scaling channel.
#[derive(Debug, Clone)]
pub struct WaveletFrame {
    /// Scales, descending (coarse to fine).
    pub scales: Vec<f64>,
    pub kernel: SgwKernel,
    pub lowpass: FilterResponse,
    /// Basis the frame was designed on; None for universal designs.
    pub basis_id: Option<u64>,
    id: u64,
}

impl WaveletFrame {
    pub fn custom(scales: Vec<f64>, kernel: SgwKernel, lowpass: FilterResponse, basis_id: Option<u64>) -> Self {
        let mut scales = scales;
        scales.sort_by(|x, y| y.partial_cmp(x).unwrap());
        WaveletFrame { scales, kernel, lowpass, basis_id, id: NEXT_FRAME_ID.fetch_add(1, Ordering::Relaxed) }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Wavelet channels plus the scaling channel.
    pub fn channels(&self) -> usize {
        self.scales.len() + 1
    }

    /// G(lambda) = h0(lambda)^2 + sum_s h(s lambda)^2.
    pub fn g_value(&self, lambda: f64) -> f64 {
        let h0 = self.lowpass.eval(lambda);
        let mut g = h0 * h0;
        for &s in &self.scales {
            let h = self.kernel.eval(s * lambda);
            g += h * h;
        }
        g
    }
}

/// Log-spaced scales between the two endpoint products, descending.
fn log_scales(m: usize, lambda_max: f64, design: &SgwDesign) -> Vec<f64> {
    let lo = 2.0 * design.lambda2 / lambda_max;
    let hi = K_SPREAD * design.lambda1 / lambda_max;
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    if m == 1 {
        return vec![(lo * hi).sqrt()];
    }
    (0..m)
        .map(|i| (hi.ln() + (lo.ln() - hi.ln()) * i as f64 / (m - 1) as f64).exp())
        .collect()
}

/// Design a frame for a specific basis: the low-pass width comes from the
/// smallest nonzero eigenvalue.
pub fn design_frame(basis: &SpectralBasis, design: &SgwDesign) -> Result<WaveletFrame> {
    check_basis(basis)?;
    if design.m == 0 {
        return Err(GspError::Unsupported("frame design needs at least one scale".into()));
    }
    let lambda_max = basis.lambda_max();
    if !(lambda_max > 0.0) {
        return Err(GspError::Unsupported("frame design needs a nonzero spectrum".into()));
    }
    // Smallest nonzero eigenvalue, at eigenspace-group resolution.
    let lambdas = basis.real_eigenvalues();
    let lambda_min_pos = basis
        .eigenspaces
        .iter()
        .map(|group| lambdas[group[0]])
        .find(|&l| l > 1e-12 * lambda_max.max(1.0))
        .ok_or_else(|| GspError::Unsupported("frame design needs a nonzero eigenvalue".into()))?;
    let kernel = sgw_kernel(design.alpha, design.beta, design.lambda1, design.lambda2)?;
    let lowpass = FilterResponse::named(
        NamedKernel::QuarticDecay { scale: 0.6 * lambda_min_pos },
        (0.0, f64::INFINITY),
    );
    Ok(WaveletFrame::custom(log_scales(design.m, lambda_max, design), kernel, lowpass, Some(basis.id)))
}

/// Graph-independent design for spectra inside [0, lambda_max]: the
/// low-pass width defaults to lambda_max / (2m).
pub fn design_frame_universal(lambda_max: f64, design: &SgwDesign) -> Result<WaveletFrame> {
    if design.m == 0 {
        return Err(GspError::Unsupported("frame design needs at least one scale".into()));
    }
    if !(lambda_max > 0.0) {
        return Err(GspError::Unsupported("frame design needs lambda_max > 0".into()));
    }
    let kernel = sgw_kernel(design.alpha, design.beta, design.lambda1, design.lambda2)?;
    let lowpass = FilterResponse::named(
        NamedKernel::QuarticDecay { scale: 0.6 * lambda_max / (2.0 * design.m as f64) },
        (0.0, f64::INFINITY),
    );
    Ok(WaveletFrame::custom(log_scales(design.m, lambda_max, design), kernel, lowpass, None))
}

/// Coefficients of one analysis: m wavelet rows and a scaling row.
#[derive(Debug, Clone)]
pub struct SgwCoefficients {
    /// Row i holds the coefficients at scale `scales[i]`.
    pub wavelet: Array2<f64>,
    pub scaling: Array1<f64>,
    pub frame_id: u64,
}

fn check_basis(basis: &SpectralBasis) -> Result<()> {
    if !basis.symmetric || !basis.real_spectrum {
        return Err(GspError::Unsupported("wavelet frames need a symmetric operator basis".into()));
    }
    Ok(())
}

fn check_frame(basis: &SpectralBasis, frame: &WaveletFrame) -> Result<()> {
    check_basis(basis)?;
    if let Some(bid) = frame.basis_id {
        if bid != basis.id {
            return Err(GspError::Unsupported(format!(
                "frame was designed on basis {bid}, not basis {}",
                basis.id
            )));
        }
    }
    Ok(())
}

/// y = U diag(values) U^T x on a symmetric basis, staying real.
fn apply_diagonal(basis: &SpectralBasis, values: &[f64], x: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let xhat = gft(basis, x)?;
    let weighted: Array1<Complex64> =
        Array1::from_iter(xhat.iter().zip(values).map(|(&c, &v)| c * v));
    inverse_gft(basis, &weighted.view())
}

/// The wavelet atom psi_{s,a}: the band-pass kernel at scale s localized at
/// node a.
pub fn wavelet_atom(basis: &SpectralBasis, frame: &WaveletFrame, s: f64, a: usize) -> Result<Array1<f64>> {
    check_frame(basis, frame)?;
    let n = basis.n();
    if a >= n {
        return Err(GspError::DimensionMismatch { expected: n, got: a });
    }
    if !(s > 0.0) {
        return Err(GspError::Unsupported(format!("scale must be positive, got {s}")));
    }
    let lambdas = basis.real_eigenvalues();
    let values: Vec<f64> = lambdas.iter().map(|&l| frame.kernel.eval(s * l)).collect();
    let mut delta = Array1::zeros(n);
    delta[a] = 1.0;
    apply_diagonal(basis, &values, &delta.view())
}

/// Analysis: wavelet coefficients at every scale plus the scaling channel.
pub fn sgwt_forward(basis: &SpectralBasis, frame: &WaveletFrame, x: &ArrayView1<f64>) -> Result<SgwCoefficients> {
    check_frame(basis, frame)?;
    let n = basis.n();
    if x.len() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: x.len() });
    }
    let lambdas = basis.real_eigenvalues();
    let mut wavelet = Array2::zeros((frame.scales.len(), n));
    for (i, &s) in frame.scales.iter().enumerate() {
        let values: Vec<f64> = lambdas.iter().map(|&l| frame.kernel.eval(s * l)).collect();
        let row = apply_diagonal(basis, &values, x)?;
        wavelet.row_mut(i).assign(&row);
    }
    let values: Vec<f64> = lambdas.iter().map(|&l| frame.lowpass.eval(l)).collect();
    let scaling = apply_diagonal(basis, &values, x)?;
    Ok(SgwCoefficients { wavelet, scaling, frame_id: frame.id })
}

/// Frames with a lower bound beneath this are flagged as numerically
/// non-invertible.
pub const FRAME_A_FLOOR: f64 = 1e-10;

/// Certified extremes of G over an evaluation set.
#[derive(Debug, Clone)]
pub struct FrameBounds {
    pub a: f64,
    pub b: f64,
    pub warning: Option<String>,
}

fn bounds_over(frame: &WaveletFrame, lambdas: impl Iterator<Item = f64>) -> FrameBounds {
    let mut a = f64::INFINITY;
    let mut b = f64::NEG_INFINITY;
    for l in lambdas {
        let g = frame.g_value(l);
        a = a.min(g);
        b = b.max(g);
    }
    let warning = (a < FRAME_A_FLOOR).then(|| "numerically non-invertible frame".to_string());
    FrameBounds { a, b, warning }
}

/// Exact frame bounds for a fixed graph: min and max of G over the
/// eigenvalue multiset.
pub fn frame_bounds(frame: &WaveletFrame, basis: &SpectralBasis) -> Result<FrameBounds> {
    check_frame(basis, frame)?;
    Ok(bounds_over(frame, basis.real_eigenvalues().iter().copied()))
}

/// Number of grid points of the universal frame-bound evaluation.
pub const FRAME_GRID_POINTS: usize = 10_001;

/// Universal frame bounds: G sampled on a uniform grid of [0, lambda_max].
/// The minimum over a continuum is approximated at grid resolution, so the
/// certified A of a fixed graph may sit slightly above this value.
pub fn frame_bounds_universal(frame: &WaveletFrame, lambda_max: f64) -> FrameBounds {
    let pts = (0..FRAME_GRID_POINTS)
        .map(move |i| lambda_max * i as f64 / (FRAME_GRID_POINTS - 1) as f64);
    bounds_over(frame, pts)
}

/// Least-squares synthesis by spectral division: x_hat_k = sum over
/// channels of h_c(lambda_k) c_hat_k / G(lambda_k).
pub fn sgwt_inverse(basis: &SpectralBasis, frame: &WaveletFrame, coeffs: &SgwCoefficients) -> Result<Array1<f64>> {
    check_frame(basis, frame)?;
    if coeffs.frame_id != frame.id {
        return Err(GspError::Unsupported(format!(
            "coefficients from frame {} cannot be inverted with frame {}",
            coeffs.frame_id, frame.id
        )));
    }
    let n = basis.n();
    if coeffs.scaling.len() != n || coeffs.wavelet.ncols() != n || coeffs.wavelet.nrows() != frame.scales.len() {
        return Err(GspError::DimensionMismatch { expected: n, got: coeffs.scaling.len() });
    }
    let bounds = frame_bounds(frame, basis)?;
    if bounds.a < FRAME_A_FLOOR {
        return Err(GspError::FrameNotInvertible { lower: bounds.a });
    }
    let lambdas = basis.real_eigenvalues();
    let mut xhat: Array1<Complex64> = gft(basis, &coeffs.scaling.view())?;
    for (k, x) in xhat.iter_mut().enumerate() {
        *x *= frame.lowpass.eval(lambdas[k]);
    }
    for (i, &s) in frame.scales.iter().enumerate() {
        let row = coeffs.wavelet.row(i);
        let chat = gft(basis, &row)?;
        for (k, x) in xhat.iter_mut().enumerate() {
            *x += chat[k] * frame.kernel.eval(s * lambdas[k]);
        }
    }
    for (k, x) in xhat.iter_mut().enumerate() {
        *x /= frame.g_value(lambdas[k]);
    }
    inverse_gft(basis, &xhat.view())
}
