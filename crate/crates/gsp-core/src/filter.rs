//! Graph filters: parametric frequency responses, exact spectral filtering,
//! polynomial-equivalence and commutation oracles, and ARMA / AR coefficient
//! design.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;

use crate::error::{GspError, Result};
use crate::linalg;
use crate::operator::ReferenceOperator;
use crate::poly;
use crate::spectral::SpectralBasis;

/// Width of the acceptance band of the Kronecker-delta response.
const DELTA_TOL: f64 = 1e-8;

/// The square-root kernels have infinite slope at the band edges, turning
/// O(1e-16) eigenvalue noise into O(1e-8) response error; frequencies this
/// close to 0 or 2 can only be noisy copies of the exact edge values.
const QMF_EDGE_SNAP: f64 = 1e-9;

fn snap_qmf(nu: f64) -> f64 {
    if nu.abs() <= QMF_EDGE_SNAP {
        0.0
    } else if (nu - 2.0).abs() <= QMF_EDGE_SNAP {
        2.0
    } else {
        nu
    }
}

/// Named closed-form kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedKernel {
    /// h(nu) = exp(-nu / nu0).
    Heat { nu0: f64 },
    /// Ideal low-pass: 1 on [0, nu_c], 0 above.
    Lowpass { nu_c: f64 },
    /// All-pass scaled by c.
    Constant { c: f64 },
    /// Pass only the frequency nu_star (within DELTA_TOL).
    Delta { nu_star: f64 },
    /// h(nu) = exp(-(nu/scale)^4), a flat-topped low-pass with fast decay.
    QuarticDecay { scale: f64 },
    /// h(nu) = sqrt(2 - nu), the low half of the quadrature-mirror pair.
    QmfLow,
    /// h(nu) = sqrt(nu) = QmfLow mirrored through nu = 1.
    QmfHigh,
}

/// Parametric form of a frequency response.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseForm {
    /// Sorted (lambda, h) samples, linearly interpolated.
    Tabulated(Vec<(f64, f64)>),
    /// a_0 + a_1 lambda + ...
    Polynomial(Vec<f64>),
    /// p_q(lambda) / p_p(lambda), denominator constant-first with den[0] = 1.
    Rational { num: Vec<f64>, den: Vec<f64> },
    Named(NamedKernel),
}

/// A scalar function of frequency, valid on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterResponse {
    pub form: ResponseForm,
    /// [lo, hi]; hi may be infinite for responses valid on the whole ray.
    pub domain: (f64, f64),
}

impl FilterResponse {
    pub fn tabulated(mut pairs: Vec<(f64, f64)>, domain: (f64, f64)) -> Result<Self> {
        if pairs.is_empty() {
            return Err(GspError::Unsupported("tabulated response needs at least one sample".into()));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(FilterResponse { form: ResponseForm::Tabulated(pairs), domain })
    }

    pub fn polynomial(coeffs: Vec<f64>, domain: (f64, f64)) -> Self {
        FilterResponse { form: ResponseForm::Polynomial(coeffs), domain }
    }

    /// Rational response with the denominator-root safety check: no real root
    /// of the denominator may fall inside the domain.
    pub fn rational(num: Vec<f64>, den: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        if den.is_empty() || den[0] == 0.0 {
            return Err(GspError::Unsupported("rational denominator must start at 1".into()));
        }
        let r = FilterResponse { form: ResponseForm::Rational { num: num.clone(), den: den.clone() }, domain };
        let (lo, hi) = domain;
        // Real denominator roots inside the domain make the response unusable.
        for z in poly::roots(&den)? {
            let real_enough = z.im.abs() <= 1e-8 * z.norm().max(1.0);
            let inside = z.re >= lo - 1e-8 && (!hi.is_finite() || z.re <= hi + 1e-8);
            if real_enough && inside {
                return Err(GspError::UnstableDesign { re: z.re, im: z.im });
            }
        }
        if hi.is_finite() {
            // Grid scan catches near-real poles hugging the interval.
            let bad = (0..1000)
                .map(|i| lo + (hi - lo) * i as f64 / 999.0)
                .find(|&x| poly::eval(&den, x).abs() <= 1e-8);
            if let Some(x) = bad {
                let root = nearest_root(&den, x)?;
                return Err(GspError::UnstableDesign { re: root.re, im: root.im });
            }
        }
        Ok(r)
    }

    pub fn named(kernel: NamedKernel, domain: (f64, f64)) -> Self {
        FilterResponse { form: ResponseForm::Named(kernel), domain }
    }

    pub fn constant(c: f64) -> Self {
        FilterResponse::named(NamedKernel::Constant { c }, (0.0, f64::INFINITY))
    }

    /// Check a frequency against the domain, with a small slack for fp noise
    /// in computed eigenvalues.
    pub fn check_domain(&self, nu: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        let slack = 1e-9 * (1.0 + lo.abs().max(if hi.is_finite() { hi.abs() } else { 0.0 }));
        if nu < lo - slack || nu > hi + slack {
            return Err(GspError::DomainViolation { lambda: nu, lo, hi });
        }
        Ok(())
    }

    /// Evaluate at a real frequency. Does not enforce the domain; callers
    /// filtering a spectrum run `check_domain` first.
    pub fn eval(&self, nu: f64) -> f64 {
        match &self.form {
            ResponseForm::Tabulated(pairs) => {
                if nu <= pairs[0].0 {
                    return pairs[0].1;
                }
                if nu >= pairs[pairs.len() - 1].0 {
                    return pairs[pairs.len() - 1].1;
                }
                let j = pairs.partition_point(|&(x, _)| x <= nu);
                let (x0, y0) = pairs[j - 1];
                let (x1, y1) = pairs[j];
                if x1 == x0 {
                    y0
                } else {
                    y0 + (y1 - y0) * (nu - x0) / (x1 - x0)
                }
            }
            ResponseForm::Polynomial(c) => poly::eval(c, nu),
            ResponseForm::Rational { num, den } => poly::eval(num, nu) / poly::eval(den, nu),
            ResponseForm::Named(k) => match *k {
                NamedKernel::Heat { nu0 } => (-nu / nu0).exp(),
                NamedKernel::Lowpass { nu_c } => {
                    if nu <= nu_c {
                        1.0
                    } else {
                        0.0
                    }
                }
                NamedKernel::Constant { c } => c,
                NamedKernel::Delta { nu_star } => {
                    if (nu - nu_star).abs() <= DELTA_TOL {
                        1.0
                    } else {
                        0.0
                    }
                }
                NamedKernel::QuarticDecay { scale } => (-(nu / scale).powi(4)).exp(),
                NamedKernel::QmfLow => (2.0 - snap_qmf(nu)).max(0.0).sqrt(),
                NamedKernel::QmfHigh => snap_qmf(nu).max(0.0).sqrt(),
            },
        }
    }

    /// Evaluate at a complex eigenvalue.
    ///
    /// Polynomial, rational and heat forms continue analytically; the
    /// remaining forms act on the modulus, which keeps conjugate eigenvalues
    /// on conjugate values and therefore filter matrices real.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        match &self.form {
            ResponseForm::Polynomial(c) => poly::eval_c(c, z),
            ResponseForm::Rational { num, den } => poly::eval_c(num, z) / poly::eval_c(den, z),
            ResponseForm::Named(NamedKernel::Heat { nu0 }) => (-z / *nu0).exp(),
            _ => Complex64::new(self.eval(z.norm()), 0.0),
        }
    }
}

/// A materialized filter H = U h(Lambda) U^{-1}.
#[derive(Debug, Clone)]
pub struct FilterMatrix {
    pub matrix: Array2<f64>,
    pub response: FilterResponse,
    pub basis_id: u64,
}

fn check_spectrum_in_domain(basis: &SpectralBasis, h: &FilterResponse) -> Result<()> {
    for &nu in basis.frequencies.iter() {
        h.check_domain(nu)?;
    }
    Ok(())
}

/// Per-eigenvalue response weights for a basis.
fn response_weights(basis: &SpectralBasis, h: &FilterResponse) -> Result<Array1<Complex64>> {
    check_spectrum_in_domain(basis, h)?;
    let w = if basis.real_spectrum {
        basis.eigenvalues.mapv(|z| Complex64::new(h.eval(z.re), 0.0))
    } else {
        basis.eigenvalues.mapv(|z| h.eval_complex(z))
    };
    Ok(w)
}

/// Exact spectral filtering: y = U h(Lambda) U^{-1} x.
pub fn apply_exact(basis: &SpectralBasis, h: &FilterResponse, x: &ArrayView1<f64>) -> Result<Array1<f64>> {
    if x.len() != basis.n() {
        return Err(GspError::DimensionMismatch { expected: basis.n(), got: x.len() });
    }
    let w = response_weights(basis, h)?;
    let xc = x.mapv(|t| Complex64::new(t, 0.0));
    let mut xhat = basis.v.dot(&xc);
    xhat.zip_mut_with(&w, |a, b| *a *= *b);
    Ok(basis.u.dot(&xhat).mapv(|z| z.re))
}

/// Materialize the filter matrix, cross-checking the diagonal construction
/// U h(Lambda) U^{-1} against the projector sum over eigenspaces.
pub fn filter_matrix(basis: &SpectralBasis, h: &FilterResponse) -> Result<FilterMatrix> {
    let n = basis.n();
    let w = response_weights(basis, h)?;

    // Diagonal form.
    let mut hw = basis.u.clone();
    for (mut col, &wk) in hw.columns_mut().into_iter().zip(w.iter()) {
        col.map_inplace(|z| *z *= wk);
    }
    let diag_form = hw.dot(&basis.v);

    // Projector form: sum over eigenspaces of h(lambda) Pr_lambda, with one
    // weight per group so repeated eigenvalues are treated as one eigenspace.
    let mut proj_form = Array2::<Complex64>::zeros((n, n));
    for group in &basis.eigenspaces {
        let wg = w[group[0]];
        let mut pr = Array2::<Complex64>::zeros((n, n));
        for &k in group {
            let uk = basis.u.column(k);
            let vk = basis.v.row(k);
            for i in 0..n {
                for j in 0..n {
                    pr[(i, j)] += uk[i] * vk[j];
                }
            }
        }
        proj_form += &pr.mapv(|z| z * wg);
    }

    let scale = diag_form.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mismatch = diag_form
        .iter()
        .zip(proj_form.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if mismatch > 1e-9 * scale {
        return Err(GspError::CheckFailed {
            context: "filter matrix projector-sum cross-check".into(),
            residual: mismatch,
        });
    }

    Ok(FilterMatrix {
        matrix: diag_form.mapv(|z| z.re),
        response: h.clone(),
        basis_id: basis.id,
    })
}

/// Interpolating polynomial through the distinct eigenvalues, returned in
/// monomial form; realizes the filter as sum a_i R^i.
///
/// Interpolation runs in a Chebyshev basis on the spectral interval to keep
/// the system well conditioned.
pub fn poly_equivalence_oracle(basis: &SpectralBasis, h: &FilterResponse) -> Result<Vec<f64>> {
    if !basis.symmetric {
        return Err(GspError::Unsupported("polynomial equivalence needs a symmetric operator".into()));
    }
    check_spectrum_in_domain(basis, h)?;
    // One node per eigenspace.
    let nodes: Vec<f64> = basis.eigenspaces.iter().map(|g| basis.eigenvalues[g[0]].re).collect();
    let values: Vec<f64> = nodes.iter().map(|&x| h.eval(x)).collect();
    let m = nodes.len();
    if m == 1 {
        return Ok(vec![values[0]]);
    }
    let lo = nodes[0];
    let hi = nodes[m - 1];
    let ts: Vec<f64> = nodes.iter().map(|&x| poly::to_unit(x, lo, hi)).collect();
    let vander = poly::cheb_vander(&ts, m - 1);
    let cond = linalg::cond_2(&vander.view())?;
    if cond > 1e12 {
        return Err(GspError::IllConditioned { context: "eigenvalue interpolation system".into(), cond });
    }
    let c = linalg::solve_vec(&vander.view(), &Array1::from_vec(values))?;
    Ok(poly::cheb_to_monomial(c.as_slice().unwrap(), lo, hi))
}

/// Commutation residual ||R H - H R||_F.
pub fn commutation_check(h: &FilterMatrix, op: &ReferenceOperator) -> Result<f64> {
    if h.matrix.nrows() != op.n() {
        return Err(GspError::DimensionMismatch { expected: op.n(), got: h.matrix.nrows() });
    }
    let rh = op.matrix.dot(&h.matrix);
    let hr = h.matrix.dot(&op.matrix);
    Ok(linalg::fro_norm(&(&rh - &hr).view()))
}

/// Tikhonov denoising response h(lambda) = 1 / (1 + gamma lambda).
pub fn tikhonov_response(gamma: f64) -> Result<FilterResponse> {
    if gamma <= 0.0 {
        return Err(GspError::Unsupported(format!("tikhonov weight must be positive, got {gamma}")));
    }
    FilterResponse::rational(vec![1.0], vec![1.0, gamma], (0.0, f64::INFINITY))
}

fn nearest_root(den: &[f64], near: f64) -> Result<Complex64> {
    let roots = poly::roots(den)?;
    roots
        .into_iter()
        .min_by(|a, b| {
            (a - near).norm().partial_cmp(&(b - near).norm()).unwrap()
        })
        .ok_or_else(|| GspError::Singular("denominator has no roots".into()))
}

/// Sampling grid for universal (graph-independent) designs.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    /// Uniform grid with the default 1000 points.
    pub fn uniform(lo: f64, hi: f64) -> Self {
        GridSpec { lo, hi, points: 1000 }
    }

    pub fn sample(&self) -> Vec<f64> {
        let k = self.points.max(2);
        (0..k).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (k - 1) as f64).collect()
    }
}

/// An ARMA(p, q) design: h(lambda) ~ p_q(lambda) / p_p(lambda).
#[derive(Debug, Clone)]
pub struct ArmaDesign {
    /// Denominator coefficients a_1..a_p (the constant 1 is implicit).
    pub a: Vec<f64>,
    /// Numerator coefficients b_0..b_q.
    pub b: Vec<f64>,
    pub target: FilterResponse,
    /// Sum of squared errors of the design objective.
    pub fit_error: f64,
    /// Interval the design is valid on.
    pub domain: (f64, f64),
}

impl ArmaDesign {
    /// The achieved rational response (with the stability check applied).
    pub fn response(&self) -> Result<FilterResponse> {
        let mut den = vec![1.0];
        den.extend_from_slice(&self.a);
        FilterResponse::rational(self.b.clone(), den, self.domain)
    }
}

/// Degree headroom of the polynomial proxy in Shank step 1 over p + q.
const SHANK_PROXY_EXTRA_DEG: usize = 12;

/// Universal ARMA design by Shank's method.
///
/// Step 1 fits a polynomial proxy P_h of degree p+q+12 to the target on the
/// grid and picks a_1..a_p so that p_p(lambda) P_h(lambda) has vanishing
/// coefficients in degrees q+1..q+p. Step 2 solves the least-squares problem
/// for b_0..b_q against the true error on the grid.
pub fn design_arma_shank(
    h_target: &FilterResponse,
    p: usize,
    q: usize,
    grid: &GridSpec,
) -> Result<ArmaDesign> {
    if p + q == 0 {
        // Degenerate constant fit.
        let xs = grid.sample();
        let mean = xs.iter().map(|&x| h_target.eval(x)).sum::<f64>() / xs.len() as f64;
        let fit_error = xs.iter().map(|&x| (h_target.eval(x) - mean).powi(2)).sum();
        return Ok(ArmaDesign {
            a: vec![],
            b: vec![mean],
            target: h_target.clone(),
            fit_error,
            domain: (grid.lo, grid.hi),
        });
    }
    let xs = grid.sample();
    let ys: Vec<f64> = xs.iter().map(|&x| h_target.eval(x)).collect();

    // Step 1: polynomial proxy, then the p x p Shanks system on its
    // monomial coefficients phi.
    let a = if p == 0 {
        vec![]
    } else {
        let proxy_deg = p + q + SHANK_PROXY_EXTRA_DEG;
        let c = poly::cheb_fit(&xs, &ys, grid.lo, grid.hi, proxy_deg)?;
        let phi = poly::cheb_to_monomial(&c, grid.lo, grid.hi);
        let mut g = Array2::<f64>::zeros((p, p));
        let mut rhs = Array1::<f64>::zeros(p);
        for (row, r) in (q + 1..=q + p).enumerate() {
            for i in 1..=p {
                g[(row, i - 1)] = if r >= i { phi[r - i] } else { 0.0 };
            }
            rhs[row] = -phi[r];
        }
        linalg::solve_vec(&g.view(), &rhs)?.to_vec()
    };

    let mut den = vec![1.0];
    den.extend_from_slice(&a);

    // Step 2: numerator by least squares on the true approximation error,
    // with design matrix lambda^j / p_p(lambda).
    let mut m = Array2::<f64>::zeros((xs.len(), q + 1));
    for (i, &x) in xs.iter().enumerate() {
        let d = poly::eval(&den, x);
        if d.abs() <= 1e-12 {
            let root = nearest_root(&den, x)?;
            return Err(GspError::UnstableDesign { re: root.re, im: root.im });
        }
        let mut pw = 1.0;
        for j in 0..=q {
            m[(i, j)] = pw / d;
            pw *= x;
        }
    }
    let fit = linalg::lstsq(&m.view(), &Array1::from_vec(ys), 1e-13)?;
    let b = fit.x.to_vec();

    let design = ArmaDesign {
        a,
        b,
        target: h_target.clone(),
        fit_error: fit.residual_sq,
        domain: (grid.lo, grid.hi),
    };
    // Enforce the denominator-root invariant before handing the design out.
    design.response()?;
    Ok(design)
}

/// Graph-dependent ARMA design: least squares on the equation error
/// h(lambda_k) p_p(lambda_k) - p_q(lambda_k) over the spectrum.
pub fn design_arma_graph_dependent(
    basis: &SpectralBasis,
    h_target: &FilterResponse,
    p: usize,
    q: usize,
) -> Result<ArmaDesign> {
    let unknowns = p + q + 1;
    if basis.eigenspaces.len() < unknowns {
        return Err(GspError::RankDeficient { rank: basis.eigenspaces.len(), needed: unknowns });
    }
    check_spectrum_in_domain(basis, h_target)?;
    let n = basis.n();
    // Residual per eigenvalue: h(l)(1 + sum a_i l^i) - sum b_j l^j.
    // Complex eigenvalues contribute their real and imaginary parts as
    // separate rows.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for k in 0..n {
        let lam = basis.eigenvalues[k];
        let hk = if basis.real_spectrum {
            Complex64::new(h_target.eval(lam.re), 0.0)
        } else {
            h_target.eval_complex(lam)
        };
        let mut row_re = Vec::with_capacity(unknowns);
        let mut row_im = Vec::with_capacity(unknowns);
        let mut pw = lam;
        for _ in 1..=p {
            let t = hk * pw;
            row_re.push(t.re);
            row_im.push(t.im);
            pw *= lam;
        }
        let mut pw = Complex64::new(1.0, 0.0);
        for _ in 0..=q {
            row_re.push(-pw.re);
            row_im.push(-pw.im);
            pw *= lam;
        }
        rows.push(row_re);
        rhs.push(-hk.re);
        if !basis.real_spectrum {
            rows.push(row_im);
            rhs.push(-hk.im);
        }
    }
    let nrows = rows.len();
    let mut m = Array2::<f64>::zeros((nrows, unknowns));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let fit = linalg::lstsq(&m.view(), &Array1::from_vec(rhs), 1e-11)?;
    if fit.rank < unknowns {
        return Err(GspError::RankDeficient { rank: fit.rank, needed: unknowns });
    }
    let a = fit.x.iter().take(p).copied().collect();
    let b = fit.x.iter().skip(p).copied().collect();
    let lo = basis.frequencies[0].min(0.0);
    let hi = basis.frequencies[basis.n() - 1];
    Ok(ArmaDesign {
        a,
        b,
        target: h_target.clone(),
        fit_error: fit.residual_sq,
        domain: (lo, hi),
    })
}

/// AR predictor fit of x from (Rx, ..., R^p x).
#[derive(Debug, Clone)]
pub struct ArFit {
    pub a: Vec<f64>,
    /// ||x - B a||_2
    pub residual: f64,
    /// Set when B was rank-deficient and the solution came from the
    /// truncated-spectrum pseudo-inverse.
    pub rank_deficient: bool,
}

/// Least-squares AR(p) prediction coefficients a = (B^T B)^{-1} B^T x with
/// B = (Rx, R^2 x, ..., R^p x).
pub fn fit_ar_predictor(op: &ReferenceOperator, x: &ArrayView1<f64>, p: usize) -> Result<ArFit> {
    let n = op.n();
    if x.len() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: x.len() });
    }
    if p == 0 {
        return Err(GspError::Unsupported("AR order must be at least 1".into()));
    }
    let mut b = Array2::<f64>::zeros((n, p));
    let mut cur = x.to_owned();
    for j in 0..p {
        cur = op.matrix.dot(&cur);
        b.column_mut(j).assign(&cur);
    }
    // Rank threshold against the natural magnitude ||R||_F ||x||_2, not just
    // B's own largest singular value; otherwise a numerically-zero B (x in
    // the kernel of R) masquerades as full rank.
    let xnorm = x.dot(x).sqrt();
    let smax = linalg::singular_values(&b.view())?[0];
    let floor = 1e-10 * smax.max(linalg::fro_norm(&op.matrix.view()) * xnorm);
    if smax <= floor {
        return Ok(ArFit { a: vec![0.0; p], residual: xnorm, rank_deficient: true });
    }
    let fit = linalg::lstsq(&b.view(), &x.to_owned(), (floor / smax).min(0.5))?;
    Ok(ArFit {
        a: fit.x.to_vec(),
        residual: fit.residual_sq.sqrt(),
        rank_deficient: fit.rank < p,
    })
}

/// Yule-Walker AR(p) fit from an ensemble of realizations.
///
/// Moments gamma(m) = E[x^T R^m x] are estimated by plain ensemble means and
/// the orthogonality-principle normal equations gamma(m) = sum_i a_i
/// gamma(m+i) are solved for a.
pub fn fit_ar_yule_walker(
    op: &ReferenceOperator,
    ensemble: &[Array1<f64>],
    p: usize,
) -> Result<Vec<f64>> {
    if !op.symmetric {
        return Err(GspError::Unsupported("yule-walker fitting needs a symmetric operator".into()));
    }
    if ensemble.is_empty() {
        return Err(GspError::Unsupported("yule-walker fitting needs at least one realization".into()));
    }
    if p == 0 {
        return Err(GspError::Unsupported("AR order must be at least 1".into()));
    }
    let n = op.n();
    // gamma_hat(m) for m = 0..2p.
    let mut gamma = vec![0.0f64; 2 * p + 1];
    for x in ensemble {
        if x.len() != n {
            return Err(GspError::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut cur = x.clone();
        gamma[0] += x.dot(x);
        for m in 1..=2 * p {
            cur = op.matrix.dot(&cur);
            gamma[m] += x.dot(&cur);
        }
    }
    for g in gamma.iter_mut() {
        *g /= ensemble.len() as f64;
    }
    let mut g = Array2::<f64>::zeros((p, p));
    let mut rhs = Array1::<f64>::zeros(p);
    for m in 1..=p {
        for i in 1..=p {
            g[(m - 1, i - 1)] = gamma[m + i];
        }
        rhs[m - 1] = gamma[m];
    }
    linalg::solve_vec(&g.view(), &rhs)
        .map(|a| a.to_vec())
        .map_err(|e| match e {
            GspError::Lapack { routine: "dgesv", .. } => {
                GspError::Singular("yule-walker moment matrix".into())
            }
            other => other,
        })
}
