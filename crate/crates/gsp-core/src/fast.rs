//! Eigendecomposition-free filtering backends: Chebyshev (with optional
//! Jackson damping), Lanczos, and the iterative first-order ARMA recursion.
//!
//! All backends touch the operator only through matrix-vector products, so
//! they scale with the edge count rather than N^3. Accuracy is traded for
//! that: each plan records enough state to bound or measure the error
//! against the dense reference path.

use std::cell::Cell;

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GspError, Result};
use crate::filter::{ArmaDesign, FilterResponse};
use crate::linalg;
use crate::operator::ReferenceOperator;
use crate::poly;

/// Matrix-free view of a linear operator.
pub trait MatVec {
    fn n(&self) -> usize;
    fn matvec(&self, v: &ArrayView1<f64>) -> Array1<f64>;
}

impl MatVec for ReferenceOperator {
    fn n(&self) -> usize {
        self.matrix.nrows()
    }

    fn matvec(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        self.matrix.dot(v)
    }
}

impl MatVec for ndarray::Array2<f64> {
    fn n(&self) -> usize {
        self.nrows()
    }

    fn matvec(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        self.dot(v)
    }
}

/// Wrapper that counts matrix-vector products, used to audit the
/// matrix-free contract of the iterative backends.
pub struct CountingOp<'a, O: MatVec> {
    inner: &'a O,
    count: Cell<usize>,
}

impl<'a, O: MatVec> CountingOp<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingOp { inner, count: Cell::new(0) }
    }

    /// Number of products performed so far.
    pub fn count(&self) -> usize {
        self.count.get()
    }

    pub fn reset(&self) {
        self.count.set(0);
    }
}

impl<'a, O: MatVec> MatVec for CountingOp<'a, O> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn matvec(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        self.count.set(self.count.get() + 1);
        self.inner.matvec(v)
    }
}

/// Relative safety margin added to both ends of an estimated spectral
/// interval.
const INTERVAL_MARGIN: f64 = 0.01;

/// Relative change in the Rayleigh quotient below which power iteration is
/// considered converged.
const POWER_TOL: f64 = 1e-12;

fn rand_unit(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let mut v = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0f64..1.0));
    let norm = v.dot(&v).sqrt();
    if norm > 0.0 {
        v /= norm;
    }
    v
}

/// Power iteration for the extreme eigenvalue of `shift * I + sign * R`,
/// returning the Rayleigh quotient of that composite operator.
fn power_extreme(
    op: &impl MatVec,
    shift: f64,
    sign: f64,
    rng: &mut ChaCha8Rng,
    max_iters: usize,
) -> Result<f64> {
    let n = op.n();
    let mut v = rand_unit(n, rng);
    let mut rho = 0.0;
    for it in 0..max_iters {
        let mut w = op.matvec(&v.view());
        w.mapv_inplace(|x| sign * x);
        w.scaled_add(shift, &v);
        let norm = w.dot(&w).sqrt();
        if norm <= 1e-300 {
            // The composite operator annihilates the iterate: eigenvalue 0.
            return Ok(0.0);
        }
        w /= norm;
        let next = {
            let mut rw = op.matvec(&w.view());
            rw.mapv_inplace(|x| sign * x);
            rw.scaled_add(shift, &w);
            w.dot(&rw)
        };
        if it > 0 && (next - rho).abs() <= POWER_TOL * next.abs().max(1.0) {
            return Ok(next);
        }
        rho = next;
        v = w;
    }
    Err(GspError::NonConvergence { context: "spectral interval power iteration".into(), iters: max_iters })
}

/// Estimate an interval containing the spectrum of a symmetric operator by
/// power iteration, inflated by a 1% safety margin on both ends.
///
/// Three sweeps: the spectral radius first (so the follow-up shifts cannot
/// suffer sign ambiguity), then the largest eigenvalue of R + sI, then of
/// lambda_max I - R for the smallest.
pub fn estimate_spectral_interval(op: &impl MatVec, seed: u64, max_iters: usize) -> Result<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // max |lambda| via norm growth; Rayleigh on R itself can stall when the
    // extremes tie in magnitude with opposite signs.
    let n = op.n();
    let mut v = rand_unit(n, &mut rng);
    let mut s = 0.0;
    let mut converged = false;
    for it in 0..max_iters {
        let w = op.matvec(&v.view());
        let norm = w.dot(&w).sqrt();
        if norm <= 1e-300 {
            s = 0.0;
            converged = true;
            break;
        }
        if it > 0 && (norm - s).abs() <= POWER_TOL * norm.max(1.0) {
            s = norm;
            converged = true;
            break;
        }
        s = norm;
        v = w / norm;
    }
    if !converged {
        return Err(GspError::NonConvergence { context: "spectral radius power iteration".into(), iters: max_iters });
    }

    let (lo, hi) = if s == 0.0 {
        (0.0, 0.0)
    } else {
        let hi = power_extreme(op, s, 1.0, &mut rng, max_iters)? - s;
        let lo = hi - power_extreme(op, hi, -1.0, &mut rng, max_iters)?;
        (lo.min(hi), hi)
    };
    let margin = INTERVAL_MARGIN * (hi - lo).max(hi.abs()).max(lo.abs());
    Ok([lo - margin, hi + margin])
}

/// Damping applied to truncated Chebyshev coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damping {
    None,
    Jackson,
}

/// A truncated Chebyshev expansion of a filter response on a spectral
/// interval.
#[derive(Debug, Clone)]
pub struct ChebyshevPlan {
    pub order: usize,
    /// Coefficients c_0..c_p of sum c_j T_j on the mapped interval, with
    /// any damping already folded in.
    pub coeffs: Vec<f64>,
    pub damping: Damping,
    pub spectral_interval: [f64; 2],
}

impl ChebyshevPlan {
    /// Expand `h` to the given order on the interval by Gauss-Chebyshev
    /// quadrature with 4(p+1) nodes.
    pub fn design(h: &FilterResponse, order: usize, damping: Damping, interval: [f64; 2]) -> Result<Self> {
        if order == 0 {
            return Err(GspError::Unsupported("chebyshev order must be positive".into()));
        }
        let [lo, hi] = interval;
        if !(hi > lo) {
            return Err(GspError::Unsupported(format!("degenerate spectral interval [{lo}, {hi}]")));
        }
        let k = 4 * (order + 1);
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        // Sample h at the Chebyshev nodes of the interval.
        let samples: Vec<f64> = (0..k)
            .map(|j| {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
                h.eval(center + half * theta.cos())
            })
            .collect();
        let mut coeffs = Vec::with_capacity(order + 1);
        for m in 0..=order {
            let mut c = 0.0;
            for (j, &s) in samples.iter().enumerate() {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
                c += s * (m as f64 * theta).cos();
            }
            c *= 2.0 / k as f64;
            if m == 0 {
                c *= 0.5;
            }
            coeffs.push(c);
        }
        if damping == Damping::Jackson {
            let mp1 = (order + 1) as f64;
            let cot = 1.0 / (std::f64::consts::PI / mp1).tan();
            for (j, c) in coeffs.iter_mut().enumerate() {
                let a = std::f64::consts::PI * j as f64 / mp1;
                *c *= ((mp1 - j as f64) * a.cos() + a.sin() * cot) / mp1;
            }
        }
        Ok(ChebyshevPlan { order, coeffs, damping, spectral_interval: interval })
    }

    /// The realized (post-truncation, post-damping) response at `lambda`.
    pub fn response_at(&self, lambda: f64) -> f64 {
        let [lo, hi] = self.spectral_interval;
        poly::cheb_eval(&self.coeffs, poly::to_unit(lambda, lo, hi))
    }

    /// Largest deviation of the realized response from `h` over the given
    /// points, the a-priori error constant of the filtered output.
    pub fn max_deviation(&self, h: &FilterResponse, lambdas: &[f64]) -> f64 {
        lambdas
            .iter()
            .map(|&l| (self.response_at(l) - h.eval(l)).abs())
            .fold(0.0, f64::max)
    }
}

/// Apply the planned Chebyshev filter with the three-term recurrence,
/// using exactly `order` matrix-vector products.
pub fn chebyshev_filter(op: &impl MatVec, x: &ArrayView1<f64>, plan: &ChebyshevPlan) -> Result<Array1<f64>> {
    if op.n() != x.len() {
        return Err(GspError::DimensionMismatch { expected: op.n(), got: x.len() });
    }
    let [lo, hi] = plan.spectral_interval;
    let center = 0.5 * (lo + hi);
    let inv_half = 2.0 / (hi - lo);
    // t_prev/t_cur hold T_{j-1}(R~) x and T_j(R~) x for the mapped operator
    // R~ = (R - c I) * 2/(hi - lo).
    let mapped = |v: &Array1<f64>| -> Array1<f64> {
        let mut w = op.matvec(&v.view());
        w.scaled_add(-center, v);
        w *= inv_half;
        w
    };
    let mut t_prev = x.to_owned();
    let mut y = &t_prev * plan.coeffs[0];
    let mut t_cur = mapped(&t_prev);
    y.scaled_add(plan.coeffs[1], &t_cur);
    for j in 2..=plan.order {
        let mut t_next = mapped(&t_cur);
        t_next *= 2.0;
        t_next -= &t_prev;
        y.scaled_add(plan.coeffs[j], &t_next);
        t_prev = t_cur;
        t_cur = t_next;
    }
    Ok(y)
}

/// Krylov dimension and reorthogonalization policy for Lanczos filtering.
#[derive(Debug, Clone, Copy)]
pub struct LanczosPlan {
    pub p: usize,
    pub reorthogonalize: bool,
}

/// Problem size below which full reorthogonalization is on by default.
const REORTH_DEFAULT_MAX_N: usize = 2000;

impl LanczosPlan {
    /// Reorthogonalization enabled for problems up to 2000 nodes.
    pub fn new(p: usize, n: usize) -> Self {
        LanczosPlan { p, reorthogonalize: n <= REORTH_DEFAULT_MAX_N }
    }
}

/// Result of a Lanczos filtering run.
#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub y: Array1<f64>,
    /// Krylov steps actually taken (< p when the subspace became invariant).
    pub steps: usize,
    /// True when the iteration broke down early; the result is then exact
    /// on the converged invariant subspace.
    pub breakdown: bool,
}

/// Filter `x` through `h` in the `plan.p`-dimensional Krylov subspace of
/// the operator: y = ||x|| V_p h(H_p) e_1 with H_p the Lanczos tridiagonal.
pub fn lanczos_filter(
    op: &impl MatVec,
    h: &FilterResponse,
    x: &ArrayView1<f64>,
    plan: &LanczosPlan,
) -> Result<LanczosOutcome> {
    let n = op.n();
    if x.len() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: x.len() });
    }
    if plan.p == 0 || plan.p > n {
        return Err(GspError::Unsupported(format!("krylov dimension {} out of range 1..={n}", plan.p)));
    }
    let xnorm = x.dot(x).sqrt();
    if xnorm == 0.0 {
        return Ok(LanczosOutcome { y: Array1::zeros(n), steps: 0, breakdown: false });
    }

    let mut basis: Vec<Array1<f64>> = vec![x.to_owned() / xnorm];
    let mut alphas: Vec<f64> = Vec::with_capacity(plan.p);
    let mut betas: Vec<f64> = Vec::with_capacity(plan.p);
    let mut breakdown = false;
    let mut scale = 1.0f64;
    for j in 0..plan.p {
        let vj = &basis[j];
        let mut w = op.matvec(&vj.view());
        let alpha = vj.dot(&w);
        w.scaled_add(-alpha, vj);
        if j > 0 {
            let beta_prev = betas[j - 1];
            w.scaled_add(-beta_prev, &basis[j - 1]);
        }
        if plan.reorthogonalize {
            // Two Gram-Schmidt passes against the whole basis keep the
            // Krylov vectors orthogonal to working precision.
            for _ in 0..2 {
                for v in &basis {
                    let c = v.dot(&w);
                    w.scaled_add(-c, v);
                }
            }
        }
        alphas.push(alpha);
        scale = scale.max(alpha.abs());
        if j + 1 == plan.p {
            break;
        }
        let beta = w.dot(&w).sqrt();
        if beta <= 1e-14 * scale {
            breakdown = true;
            break;
        }
        scale = scale.max(beta);
        betas.push(beta);
        basis.push(w / beta);
    }

    // Dense spectral calculus on the (small) tridiagonal.
    let steps = alphas.len();
    let mut hmat = ndarray::Array2::zeros((steps, steps));
    for i in 0..steps {
        hmat[(i, i)] = alphas[i];
        if i + 1 < steps {
            hmat[(i, i + 1)] = betas[i];
            hmat[(i + 1, i)] = betas[i];
        }
    }
    let (theta, wmat) = linalg::eigh(&hmat.view())?;
    // h(H_p) e_1 = W h(Theta) W^T e_1.
    let mut coef: Array1<f64> = Array1::zeros(steps);
    for k in 0..steps {
        let hk = h.eval(theta[k]);
        let w_1k = wmat[(0, k)];
        for i in 0..steps {
            coef[i] += wmat[(i, k)] * hk * w_1k;
        }
    }
    let mut y = Array1::zeros(n);
    for (i, v) in basis.iter().enumerate() {
        y.scaled_add(xnorm * coef[i], v);
    }
    Ok(LanczosOutcome { y, steps, breakdown })
}

/// One first-order term of the ARMA recursion in the shifted variable.
#[derive(Debug, Clone, Copy)]
pub struct ArmaTerm {
    pub c: Complex64,
    pub d: Complex64,
    /// 1 for a real pole, 2 for the representative of a conjugate pair
    /// (the partner is folded in as twice the real part).
    pub weight: u8,
}

/// Iteration plan for the parallel first-order ARMA recursion
/// y(t+1) = c M y(t) + d x with M = (lambda_hi - lambda_lo) I - R.
#[derive(Debug, Clone)]
pub struct ArmaRecursionPlan {
    pub terms: Vec<ArmaTerm>,
    /// Shift constant lambda_hi - lambda_lo.
    pub delta: f64,
    /// Upper bound on the spectral radius of M over the given interval.
    pub rho_m: f64,
    pub spectral_interval: [f64; 2],
    pub max_iters: usize,
    pub conv_tol: f64,
}

pub const DEFAULT_ARMA_MAX_ITERS: usize = 200;
pub const DEFAULT_ARMA_CONV_TOL: f64 = 1e-8;

/// Poles closer than this (relative to the spectral scale) are treated as
/// repeated, which the first-order split cannot represent.
const POLE_SEP_TOL: f64 = 1e-8;

impl ArmaRecursionPlan {
    /// Split the design's rational response into first-order terms and
    /// derive per-term recursion parameters for the given spectral
    /// interval.
    pub fn new(design: &ArmaDesign, interval: [f64; 2], max_iters: usize, conv_tol: f64) -> Result<Self> {
        let mut den = vec![1.0];
        den.extend_from_slice(&design.a);
        let mut num = design.b.clone();
        while num.last() == Some(&0.0) && num.len() > 1 {
            num.pop();
        }
        while den.last() == Some(&0.0) {
            den.pop();
        }
        if num.len() >= den.len() {
            return Err(GspError::Unsupported(format!(
                "arma recursion needs a strictly proper response (numerator degree {} >= denominator degree {})",
                num.len().max(1) - 1,
                den.len().max(1) - 1,
            )));
        }
        let poles = poly::roots(&den)?;
        let pscale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
        for i in 0..poles.len() {
            for j in i + 1..poles.len() {
                if (poles[i] - poles[j]).norm() <= POLE_SEP_TOL * pscale {
                    return Err(GspError::Unsupported(format!(
                        "repeated pole near {:.6e}{:+.6e}i: the first-order split assumes simple poles",
                        poles[i].re, poles[i].im,
                    )));
                }
            }
        }
        let dden = poly::derivative(&den);
        let residues: Vec<Complex64> = poles
            .iter()
            .map(|&p| {
                let nv = poly::eval_c(&num, p);
                let dv = poly::eval_c(&dden, p);
                nv / dv
            })
            .collect();

        // Recombination check: the split must reproduce the response away
        // from the poles.
        let [lo, hi] = interval;
        let mut worst = 0.0f64;
        for i in 0..=200 {
            let lam = lo + (hi - lo) * i as f64 / 200.0;
            let denv = poly::eval(&den, lam);
            if denv.abs() <= 1e-9 * pscale {
                continue;
            }
            let direct = poly::eval(&num, lam) / denv;
            let split: Complex64 = poles
                .iter()
                .zip(&residues)
                .map(|(&p, &r)| r / (Complex64::new(lam, 0.0) - p))
                .sum();
            worst = worst.max((split - direct).norm());
        }
        if worst > 1e-8 {
            return Err(GspError::CheckFailed { context: "partial-fraction recombination".into(), residual: worst });
        }

        let delta = hi - lo;
        let rho_m = (delta - lo).abs().max((delta - hi).abs());
        let mut terms = Vec::new();
        for (&p, &r) in poles.iter().zip(&residues) {
            if p.im < -POLE_SEP_TOL * pscale {
                continue; // folded into the conjugate representative
            }
            let weight = if p.im > POLE_SEP_TOL * pscale { 2 } else { 1 };
            // In the mu = delta - lambda variable the pole sits at
            // delta - p, so c = 1/(delta - p), d = r/(delta - p).
            let shifted = Complex64::new(delta, 0.0) - p;
            if shifted.norm() <= rho_m {
                return Err(GspError::DivergentRecursion { re: p.re, im: p.im });
            }
            terms.push(ArmaTerm { c: 1.0 / shifted, d: r / shifted, weight });
        }
        Ok(ArmaRecursionPlan { terms, delta, rho_m, spectral_interval: interval, max_iters, conv_tol })
    }

    /// Contraction factor |c| rho(M) bound per term, in plan order.
    pub fn contraction_bounds(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.c.norm() * self.rho_m).collect()
    }
}

/// Residual history of one recursion term.
#[derive(Debug, Clone)]
pub struct ArmaTermTrace {
    pub iters: usize,
    /// ||y(t+1) - y(t)||_2 per iteration.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ArmaOutcome {
    pub y: Array1<f64>,
    pub traces: Vec<ArmaTermTrace>,
}

/// Run the per-pole first-order recursions to convergence and sum them.
///
/// Complex terms use one complex iteration (two real products per step)
/// standing in for the conjugate pair.
pub fn arma_recursion_filter(op: &impl MatVec, x: &ArrayView1<f64>, plan: &ArmaRecursionPlan) -> Result<ArmaOutcome> {
    let n = op.n();
    if x.len() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: x.len() });
    }
    let xnorm = x.dot(x).sqrt();
    let mut y = Array1::zeros(n);
    let mut traces = Vec::with_capacity(plan.terms.len());
    if xnorm == 0.0 {
        for _ in &plan.terms {
            traces.push(ArmaTermTrace { iters: 0, residuals: Vec::new() });
        }
        return Ok(ArmaOutcome { y, traces });
    }
    for term in &plan.terms {
        // State as two real vectors: z = zr + i zi. M z = delta z - R z.
        let mut zr: Array1<f64> = Array1::zeros(n);
        let mut zi: Array1<f64> = Array1::zeros(n);
        let mut residuals = Vec::new();
        let mut iters = plan.max_iters;
        let mut converged = false;
        for it in 0..plan.max_iters {
            let mut mr = op.matvec(&zr.view());
            mr.mapv_inplace(|v| -v);
            mr.scaled_add(plan.delta, &zr);
            let mi = if term.weight == 2 || term.c.im != 0.0 || term.d.im != 0.0 {
                let mut mi = op.matvec(&zi.view());
                mi.mapv_inplace(|v| -v);
                mi.scaled_add(plan.delta, &zi);
                mi
            } else {
                Array1::zeros(n)
            };
            // next = c * Mz + d * x, componentwise complex arithmetic.
            let mut next_r = &mr * term.c.re - &mi * term.c.im;
            next_r.scaled_add(term.d.re, x);
            let mut next_i = &mr * term.c.im + &mi * term.c.re;
            next_i.scaled_add(term.d.im, x);
            let mut res = 0.0;
            for i in 0..n {
                let dr = next_r[i] - zr[i];
                let di = next_i[i] - zi[i];
                res += dr * dr + di * di;
            }
            let res = res.sqrt();
            residuals.push(res);
            zr = next_r;
            zi = next_i;
            if res < plan.conv_tol * xnorm {
                iters = it + 1;
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(GspError::NonConvergence {
                context: format!(
                    "arma recursion (last residual {:.3e}, tol {:.3e})",
                    residuals.last().copied().unwrap_or(f64::NAN),
                    plan.conv_tol * xnorm,
                ),
                iters: plan.max_iters,
            });
        }
        if term.weight == 2 {
            y.scaled_add(2.0, &zr);
        } else {
            y += &zr;
        }
        traces.push(ArmaTermTrace { iters, residuals });
    }
    Ok(ArmaOutcome { y, traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::operator::{reference_operator, OperatorKind, OperatorOptions};
    use crate::spectral::{decompose, FrequencyConvention};
    use crate::filter::{apply_exact, tikhonov_response, NamedKernel};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn p2_laplacian() -> ReferenceOperator {
        let g = Graph::build(&[(0, 1, 1.0)], false).unwrap();
        reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap()
    }

    fn random_graph(n: usize, extra: usize, seed: u64) -> Graph {
        // Connected: a random spanning tree plus `extra` random chords.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.push((u, v, rng.gen_range(0.5..2.0)));
        }
        for _ in 0..extra {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                edges.push((u.min(v), u.max(v), rng.gen_range(0.5..2.0)));
            }
        }
        Graph::build_with_n(n, &edges, false).unwrap()
    }

    #[test]
    fn interval_contains_p2_spectrum() {
        let op = p2_laplacian();
        let [lo, hi] = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        assert!(lo <= 0.0 && hi >= 2.0);
        assert!(hi <= 2.03, "hi = {hi}");
    }

    #[test]
    fn interval_of_normalized_laplacian_stays_under_two_plus_margin() {
        for seed in 0..4 {
            let g = random_graph(40, 60, seed);
            let op = reference_operator(&g, OperatorKind::Ln, &OperatorOptions::default()).unwrap();
            let [_, hi] = estimate_spectral_interval(&op, 0, 10_000).unwrap();
            assert!(hi <= 2.03, "seed {seed}: hi = {hi}");
        }
    }

    #[test]
    fn interval_of_identity_operator() {
        let id = ndarray::Array2::<f64>::eye(5);
        let [lo, hi] = estimate_spectral_interval(&id, 0, 10_000).unwrap();
        assert!(lo <= 1.0 && lo >= 0.98);
        assert!(hi >= 1.0 && hi <= 1.02);
    }

    #[test]
    fn interval_handles_sign_symmetric_spectrum() {
        // Adjacency of P2 has eigenvalues -1 and 1; plain Rayleigh power
        // iteration stalls here, the norm-growth sweep must not.
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        let [lo, hi] = estimate_spectral_interval(&a, 0, 10_000).unwrap();
        assert!(lo <= -1.0 && lo >= -1.05);
        assert!(hi >= 1.0 && hi <= 1.05);
    }

    #[test]
    fn chebyshev_constant_response_is_exact() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let h = FilterResponse::constant(3.5);
        let plan = ChebyshevPlan::design(&h, 7, Damping::None, interval).unwrap();
        let x = array![0.3, -1.2];
        let y = chebyshev_filter(&op, &x.view(), &plan).unwrap();
        assert_abs_diff_eq!(y[0], 3.5 * x[0], epsilon = 1e-12);
        assert_abs_diff_eq!(y[1], 3.5 * x[1], epsilon = 1e-12);
    }

    #[test]
    fn chebyshev_heat_kernel_matches_dense_oracle() {
        let g = random_graph(100, 150, 7);
        let op = reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap();
        let basis = decompose(&op, FrequencyConvention::default()).unwrap();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let h = FilterResponse::named(NamedKernel::Heat { nu0: 1.0 }, (0.0, f64::INFINITY));
        let plan = ChebyshevPlan::design(&h, 50, Damping::None, interval).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array1::from_shape_fn(op.n(), |_| rng.gen_range(-1.0f64..1.0));
        let y = chebyshev_filter(&op, &x.view(), &plan).unwrap();
        let exact = apply_exact(&basis, &h, &x.view()).unwrap();
        let rel = (&y - &exact).dot(&(&y - &exact)).sqrt() / exact.dot(&exact).sqrt();
        assert!(rel < 1e-6, "rel = {rel:.3e}");

        // Realized error must respect the uniform bound on the spectrum.
        let lambdas = basis.real_eigenvalues();
        let eps = plan.max_deviation(&h, lambdas.as_slice().unwrap());
        let err = (&y - &exact).dot(&(&y - &exact)).sqrt();
        assert!(err <= eps * x.dot(&x).sqrt() + 1e-12, "err {err:.3e} > bound {eps:.3e}");
    }

    #[test]
    fn chebyshev_error_decreases_with_order_for_heat_kernel() {
        let g = random_graph(80, 120, 3);
        let op = reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap();
        let basis = decompose(&op, FrequencyConvention::default()).unwrap();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let h = FilterResponse::named(NamedKernel::Heat { nu0: 1.0 }, (0.0, f64::INFINITY));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array1::from_shape_fn(op.n(), |_| rng.gen_range(-1.0f64..1.0));
        let exact = apply_exact(&basis, &h, &x.view()).unwrap();
        for p in [5usize, 10, 20] {
            let err_at = |order: usize| {
                let plan = ChebyshevPlan::design(&h, order, Damping::None, interval).unwrap();
                let y = chebyshev_filter(&op, &x.view(), &plan).unwrap();
                (&y - &exact).dot(&(&y - &exact)).sqrt()
            };
            assert!(err_at(2 * p) <= err_at(p), "order {p}");
        }
    }

    #[test]
    fn jackson_damping_suppresses_lowpass_overshoot() {
        let g = random_graph(60, 90, 11);
        let op = reference_operator(&g, OperatorKind::Ln, &OperatorOptions::default()).unwrap();
        let basis = decompose(&op, FrequencyConvention::default()).unwrap();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let h = FilterResponse::named(NamedKernel::Lowpass { nu_c: 1.0 }, (0.0, f64::INFINITY));
        let damped = ChebyshevPlan::design(&h, 30, Damping::Jackson, interval).unwrap();
        let plain = ChebyshevPlan::design(&h, 30, Damping::None, interval).unwrap();
        let lambdas = basis.real_eigenvalues();
        let peak = |plan: &ChebyshevPlan| lambdas.iter().map(|&l| plan.response_at(l)).fold(f64::MIN, f64::max);
        assert!(peak(&damped) <= 1.0 + 1e-3, "damped peak {}", peak(&damped));
        assert!(peak(&plain) > 1.0 + 1e-3, "undamped peak {}", peak(&plain));
    }

    #[test]
    fn chebyshev_uses_at_most_order_products() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let h = FilterResponse::named(NamedKernel::Heat { nu0: 2.0 }, (0.0, f64::INFINITY));
        let plan = ChebyshevPlan::design(&h, 9, Damping::None, interval).unwrap();
        let counter = CountingOp::new(&op);
        let x = array![1.0, -1.0];
        chebyshev_filter(&counter, &x.view(), &plan).unwrap();
        assert!(counter.count() <= plan.order + 1, "count = {}", counter.count());
    }

    #[test]
    fn lanczos_on_eigenvector_converges_in_one_step() {
        let g = Graph::build(&[(0, 1, 1.0), (1, 2, 1.0)], false).unwrap();
        let op = reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap();
        let basis = decompose(&op, FrequencyConvention::default()).unwrap();
        let u1: Array1<f64> = basis.u.column(1).mapv(|z| z.re);
        let lam = basis.real_eigenvalues()[1];
        let h = FilterResponse::named(NamedKernel::Heat { nu0: 1.0 }, (0.0, f64::INFINITY));
        let out = lanczos_filter(&op, &h, &u1.view(), &LanczosPlan::new(3, 3)).unwrap();
        assert!(out.breakdown);
        assert_eq!(out.steps, 1);
        let want = &u1 * h.eval(lam);
        for i in 0..3 {
            assert_abs_diff_eq!(out.y[i], want[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn lanczos_full_dimension_is_exact_on_p3() {
        let g = Graph::build(&[(0, 1, 1.0), (1, 2, 1.0)], false).unwrap();
        let op = reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap();
        let basis = decompose(&op, FrequencyConvention::default()).unwrap();
        let h = FilterResponse::named(NamedKernel::Heat { nu0: 0.7 }, (0.0, f64::INFINITY));
        let x = array![0.4, -1.0, 2.2];
        let out = lanczos_filter(&op, &h, &x.view(), &LanczosPlan::new(3, 3)).unwrap();
        let exact = apply_exact(&basis, &h, &x.view()).unwrap();
        let rel = (&out.y - &exact).dot(&(&out.y - &exact)).sqrt() / exact.dot(&exact).sqrt();
        assert!(rel < 1e-8, "rel = {rel:.3e}");
    }

    #[test]
    fn lanczos_low_dimension_tracks_heat_kernel() {
        let g = random_graph(200, 300, 17);
        let op = reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap();
        let basis = decompose(&op, FrequencyConvention::default()).unwrap();
        let h = FilterResponse::named(NamedKernel::Heat { nu0: 1.0 }, (0.0, f64::INFINITY));
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = Array1::from_shape_fn(op.n(), |_| rng.gen_range(-1.0f64..1.0));
        let out = lanczos_filter(&op, &h, &x.view(), &LanczosPlan::new(30, op.n())).unwrap();
        let exact = apply_exact(&basis, &h, &x.view()).unwrap();
        let rel = (&out.y - &exact).dot(&(&out.y - &exact)).sqrt() / exact.dot(&exact).sqrt();
        assert!(rel < 1e-6, "rel = {rel:.3e}");
    }

    #[test]
    fn arma_tikhonov_on_p2_reaches_closed_form() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let design = ArmaDesign {
            a: vec![0.5],
            b: vec![1.0],
            target: tikhonov_response(0.5).unwrap(),
            fit_error: 0.0,
            domain: (0.0, f64::INFINITY),
        };
        let plan = ArmaRecursionPlan::new(&design, interval, 200, 1e-8).unwrap();
        let x = array![1.0, 0.0];
        let out = arma_recursion_filter(&op, &x.view(), &plan).unwrap();
        assert_abs_diff_eq!(out.y[0], 0.75, epsilon = 1e-6);
        assert_abs_diff_eq!(out.y[1], 0.25, epsilon = 1e-6);
        assert!(out.traces[0].iters <= 200);
    }

    #[test]
    fn arma_zero_input_returns_zero() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let design = ArmaDesign {
            a: vec![0.5],
            b: vec![1.0],
            target: tikhonov_response(0.5).unwrap(),
            fit_error: 0.0,
            domain: (0.0, f64::INFINITY),
        };
        let plan = ArmaRecursionPlan::new(&design, interval, 200, 1e-8).unwrap();
        let x = array![0.0, 0.0];
        let out = arma_recursion_filter(&op, &x.view(), &plan).unwrap();
        assert_eq!(out.y, array![0.0, 0.0]);
        assert_eq!(out.traces[0].iters, 0);
    }

    #[test]
    fn arma_contraction_matches_bound() {
        let g = random_graph(50, 70, 29);
        let op = reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let design = ArmaDesign {
            a: vec![0.5],
            b: vec![1.0],
            target: tikhonov_response(0.5).unwrap(),
            fit_error: 0.0,
            domain: (0.0, f64::INFINITY),
        };
        let plan = ArmaRecursionPlan::new(&design, interval, 2000, 1e-13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = Array1::from_shape_fn(op.n(), |_| rng.gen_range(-1.0f64..1.0));
        let out = arma_recursion_filter(&op, &x.view(), &plan).unwrap();
        let bound = plan.contraction_bounds()[0];
        let res = &out.traces[0].residuals;
        assert!(res.len() > 50);
        for t in 10..50 {
            let ratio = res[t] / res[t - 1];
            assert!(ratio <= bound + 1e-3, "iter {t}: ratio {ratio:.6} > bound {bound:.6}");
        }
    }

    #[test]
    fn arma_rejects_improper_response() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let design = ArmaDesign {
            a: vec![0.5],
            b: vec![1.0, 2.0], // degree q = p, not strictly proper
            target: FilterResponse::constant(1.0),
            fit_error: 0.0,
            domain: (0.0, 2.0),
        };
        assert!(matches!(ArmaRecursionPlan::new(&design, interval, 200, 1e-8), Err(GspError::Unsupported(_))));
    }

    #[test]
    fn arma_rejects_repeated_poles() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        // Denominator (1 + lambda)^2: double pole at -1.
        let design = ArmaDesign {
            a: vec![2.0, 1.0],
            b: vec![1.0],
            target: FilterResponse::constant(1.0),
            fit_error: 0.0,
            domain: (0.0, 2.0),
        };
        assert!(matches!(ArmaRecursionPlan::new(&design, interval, 200, 1e-8), Err(GspError::Unsupported(_))));
    }

    #[test]
    fn arma_complex_pole_pair_matches_exact_filter() {
        let g = random_graph(40, 60, 41);
        let op = reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap();
        let basis = decompose(&op, FrequencyConvention::default()).unwrap();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        // 1 / (1 + lambda/2 + lambda^2/2): conjugate poles at -0.5 +- 1.32i.
        let design = ArmaDesign {
            a: vec![0.5, 0.5],
            b: vec![1.0],
            target: FilterResponse::constant(1.0),
            fit_error: 0.0,
            domain: (0.0, f64::INFINITY),
        };
        let plan = ArmaRecursionPlan::new(&design, interval, 3000, 1e-10).unwrap();
        assert_eq!(plan.terms.len(), 1);
        assert_eq!(plan.terms[0].weight, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let x = Array1::from_shape_fn(op.n(), |_| rng.gen_range(-1.0f64..1.0));
        let out = arma_recursion_filter(&op, &x.view(), &plan).unwrap();
        let h = design.response().unwrap();
        let exact = apply_exact(&basis, &h, &x.view()).unwrap();
        let rel = (&out.y - &exact).dot(&(&out.y - &exact)).sqrt() / exact.dot(&exact).sqrt();
        assert!(rel < 1e-6, "rel = {rel:.3e}");
    }

    #[test]
    fn arma_matvec_count_within_poles_times_iters() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        let design = ArmaDesign {
            a: vec![0.5],
            b: vec![1.0],
            target: tikhonov_response(0.5).unwrap(),
            fit_error: 0.0,
            domain: (0.0, f64::INFINITY),
        };
        let plan = ArmaRecursionPlan::new(&design, interval, 200, 1e-8).unwrap();
        let counter = CountingOp::new(&op);
        let x = array![1.0, 0.0];
        let out = arma_recursion_filter(&counter, &x.view(), &plan).unwrap();
        let iters: usize = out.traces.iter().map(|t| t.iters).sum();
        assert!(counter.count() <= iters, "count {} > iters {}", counter.count(), iters);
    }

    #[test]
    fn divergent_pole_is_rejected_before_iterating() {
        let op = p2_laplacian();
        let interval = estimate_spectral_interval(&op, 0, 10_000).unwrap();
        // Pole at lambda = 1 sits inside the spectrum, so the shifted
        // iteration matrix cannot contract.
        let design = ArmaDesign {
            a: vec![-1.0],
            b: vec![1.0],
            target: FilterResponse::constant(1.0),
            fit_error: 0.0,
            domain: (0.0, 2.0),
        };
        assert!(matches!(
            ArmaRecursionPlan::new(&design, interval, 200, 1e-8),
            Err(GspError::DivergentRecursion { .. })
        ));
    }
}
