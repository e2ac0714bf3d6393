//! Eigendecomposition of reference operators, the graph Fourier transform,
//! and the variation functionals behind the frequency ordering.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView1, Axis};
use num_complex::Complex64;

use crate::error::{GspError, Result};
use crate::linalg;
use crate::operator::{OperatorKind, ReferenceOperator};

static NEXT_BASIS_ID: AtomicU64 = AtomicU64::new(1);

/// Condition-number ceiling on the eigenvector matrix before an operator is
/// declared near-defective.
pub const COND_MAX: f64 = 1e10;

/// Default size ceiling for the dense eigendecomposition.
pub const DEFAULT_MAX_DENSE_N: usize = 5_000;

/// Dense ceiling, overridable through the GSP_MAX_DENSE_N environment
/// variable.
pub fn max_dense_n() -> usize {
    std::env::var("GSP_MAX_DENSE_N")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MAX_DENSE_N)
}

/// How a complex eigenvalue maps to a nonnegative frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyConvention {
    /// nu = Re(lambda).
    RealPart,
    /// nu = |lambda|; the default, consistent with the deformed-Laplacian
    /// total variation result.
    #[default]
    Modulus,
}

/// Spectral decomposition of a reference operator, stored frequency-sorted.
///
/// Columns of `u` are right eigenvectors, rows of `v` the matching left
/// eigenvectors, so `v = u^{-1}` and the GFT is `v . x`. Entries are complex
/// even for symmetric operators (with zero imaginary parts there).
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub eigenvalues: Array1<Complex64>,
    pub u: Array2<Complex64>,
    pub v: Array2<Complex64>,
    /// Frequencies nu_k, nondecreasing.
    pub frequencies: Array1<f64>,
    /// order[k] = position of eigenvalue k in the eigensolver's output, for
    /// provenance.
    pub order: Vec<usize>,
    /// Indices (into the sorted storage) grouped by coinciding eigenvalues.
    pub eigenspaces: Vec<Vec<usize>>,
    pub symmetric: bool,
    /// All eigenvalues real (up to fp noise); true for every symmetric
    /// operator and for some nonsymmetric ones such as L_rw.
    pub real_spectrum: bool,
    pub convention: FrequencyConvention,
    pub id: u64,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Real parts of the eigenvalues; the full spectrum when `real_spectrum`.
    pub fn real_eigenvalues(&self) -> Array1<f64> {
        self.eigenvalues.mapv(|z| z.re)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Decompose `op` into its spectral basis.
///
/// Symmetric operators use the dedicated symmetric eigensolver; general ones
/// get a complex decomposition and a diagonalizability check on cond(U).
pub fn decompose(op: &ReferenceOperator, conv: FrequencyConvention) -> Result<SpectralBasis> {
    let n = op.n();
    let ceiling = max_dense_n();
    if n > ceiling {
        return Err(GspError::TooLarge { n, max: ceiling });
    }

    let (eigenvalues, mut u) = if op.symmetric {
        let (w, ur) = linalg::eigh(&op.matrix.view())?;
        (w.mapv(|x| Complex64::new(x, 0.0)), ur.mapv(|x| Complex64::new(x, 0.0)))
    } else {
        let (w, uc) = linalg::eig(&op.matrix.view())?;
        let cond = linalg::cond_2_complex(&uc.view())?;
        if !(cond <= COND_MAX) {
            return Err(GspError::NearDefective { cond, max: COND_MAX });
        }
        (w, uc)
    };

    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let real_spectrum = op.symmetric || eigenvalues.iter().all(|z| z.im.abs() <= 1e-12 * scale.max(1.0));

    let frequencies: Array1<f64> = if real_spectrum {
        eigenvalues.mapv(|z| z.re)
    } else {
        match conv {
            FrequencyConvention::RealPart => eigenvalues.mapv(|z| z.re),
            FrequencyConvention::Modulus => eigenvalues.mapv(|z| z.norm()),
        }
    };

    // Sort by (nu, Im lambda, original index).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        frequencies[a]
            .partial_cmp(&frequencies[b])
            .unwrap()
            .then(eigenvalues[a].im.partial_cmp(&eigenvalues[b].im).unwrap())
            .then(a.cmp(&b))
    });
    let eigenvalues = Array1::from_iter(order.iter().map(|&k| eigenvalues[k]));
    let frequencies = Array1::from_iter(order.iter().map(|&k| frequencies[k]));
    u = u.select(Axis(1), &order);

    // Phase convention: rotate each eigenvector so its largest-magnitude
    // entry is positive real, for reproducible output across backends.
    for mut col in u.columns_mut() {
        let mut best = 0usize;
        let mut best_mod = -1.0f64;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best_mod {
                best_mod = z.norm();
                best = i;
            }
        }
        if best_mod > 0.0 {
            let phase = col[best] / best_mod;
            let rot = phase.conj();
            col.map_inplace(|z| *z *= rot);
        }
    }

    let v = if op.symmetric {
        u.t().to_owned()
    } else {
        linalg::inv_complex(&u.view())?
    };

    // Eigenspace grouping: sorted equal eigenvalues are adjacent, so chain
    // clustering at group_tol suffices.
    let group_tol = 1e-8 * scale;
    let mut eigenspaces: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match eigenspaces.last_mut() {
            Some(group) if (eigenvalues[k] - eigenvalues[*group.last().unwrap()]).norm() <= group_tol => {
                group.push(k)
            }
            _ => eigenspaces.push(vec![k]),
        }
    }

    Ok(SpectralBasis {
        eigenvalues,
        u,
        v,
        frequencies,
        order,
        eigenspaces,
        symmetric: op.symmetric,
        real_spectrum,
        convention: conv,
        id: NEXT_BASIS_ID.fetch_add(1, Ordering::Relaxed),
    })
}

/// Graph Fourier transform: x_hat = U^{-1} x, i.e. projections on the left
/// eigenvectors, in frequency order.
pub fn gft(basis: &SpectralBasis, x: &ArrayView1<f64>) -> Result<Array1<Complex64>> {
    if x.len() != basis.n() {
        return Err(GspError::DimensionMismatch { expected: basis.n(), got: x.len() });
    }
    let xc = x.mapv(|t| Complex64::new(t, 0.0));
    Ok(basis.v.dot(&xc))
}

/// Inverse GFT: U x_hat, returned as the real signal.
///
/// For real signals the imaginary parts cancel up to fp noise; they are
/// dropped here.
pub fn inverse_gft(basis: &SpectralBasis, xhat: &ArrayView1<Complex64>) -> Result<Array1<f64>> {
    if xhat.len() != basis.n() {
        return Err(GspError::DimensionMismatch { expected: basis.n(), got: xhat.len() });
    }
    Ok(basis.u.dot(xhat).mapv(|z| z.re))
}

/// Frequency analysis: (nu_k, x_hat_k) pairs, nondecreasing in nu.
pub fn frequency_analysis(basis: &SpectralBasis, x: &ArrayView1<f64>) -> Result<Vec<(f64, Complex64)>> {
    let xhat = gft(basis, x)?;
    Ok(basis.frequencies.iter().copied().zip(xhat.iter().copied()).collect())
}

/// Dirichlet variation x^T R x for R in {L, Ln, Q, Qn}.
///
/// Computed both as the quadratic form and as the edge-sum formula; the two
/// are cross-checked to 1e-9 relative before the edge-sum value is returned.
pub fn dirichlet_form(op: &ReferenceOperator, x: &ArrayView1<f64>) -> Result<f64> {
    let n = op.n();
    if x.len() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: x.len() });
    }
    let quad = x.dot(&op.matrix.dot(x));
    let a = op.graph().adjacency();

    let edge_sum = match op.kind {
        OperatorKind::L | OperatorKind::Ln => {
            if op.graph().directed() {
                return Err(GspError::Unsupported(
                    "edge-sum Dirichlet form of L/Ln needs an undirected graph; use the Q family for directed walks".into(),
                ));
            }
            let d = op.graph().strengths().out_strengths;
            let y: Array1<f64> = if op.kind == OperatorKind::Ln {
                // V_Ln substitutes x_i / sqrt(d_i).
                Array1::from_shape_fn(n, |i| if d[i] > 0.0 { x[i] / d[i].sqrt() } else { 0.0 })
            } else {
                x.to_owned()
            };
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if a[(i, j)] > 0.0 {
                        acc += 0.5 * a[(i, j)] * (y[i] - y[j]).powi(2);
                    }
                }
            }
            acc
        }
        OperatorKind::Q | OperatorKind::Qn => {
            let pi = &op
                .pi
                .as_ref()
                .ok_or_else(|| GspError::Unsupported("Q-family operator is missing its stationary distribution".into()))?
                .pi;
            let p = op
                .walk
                .as_ref()
                .ok_or_else(|| GspError::Unsupported("Q-family operator is missing its walk matrix".into()))?;
            let y: Array1<f64> = if op.kind == OperatorKind::Qn {
                Array1::from_shape_fn(n, |i| if pi[i] > 0.0 { x[i] / pi[i].sqrt() } else { 0.0 })
            } else {
                x.to_owned()
            };
            // V_Q = 1/2 sum_ij pi_i P_ij (x_i - x_j)^2
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if p[(i, j)] > 0.0 {
                        acc += 0.5 * pi[i] * p[(i, j)] * (y[i] - y[j]).powi(2);
                    }
                }
            }
            acc
        }
        _ => {
            return Err(GspError::Unsupported(format!(
                "dirichlet form is defined for L, Ln, Q, Qn; use total_variation for {}",
                op.kind
            )))
        }
    };

    let tol = 1e-9 * quad.abs().max(edge_sum.abs()) + 1e-12 * x.dot(x).max(1e-300);
    if (quad - edge_sum).abs() > tol {
        return Err(GspError::CheckFailed {
            context: "dirichlet form quadratic vs edge-sum".into(),
            residual: (quad - edge_sum).abs(),
        });
    }
    Ok(edge_sum)
}

/// Total variation ||L_d x||_2 under the deformed Laplacian.
pub fn total_variation(op: &ReferenceOperator, x: &ArrayView1<f64>) -> Result<f64> {
    if op.kind != OperatorKind::Ld {
        return Err(GspError::Unsupported(format!(
            "total variation is defined through Ld, not {}",
            op.kind
        )));
    }
    if x.len() != op.n() {
        return Err(GspError::DimensionMismatch { expected: op.n(), got: x.len() });
    }
    let y = op.matrix.dot(x);
    Ok(y.dot(&y).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::operator::{reference_operator, OperatorOptions};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op_l(edges: &[(usize, usize, f64)]) -> ReferenceOperator {
        let g = Graph::build(edges, false).unwrap();
        reference_operator(&g, OperatorKind::L, &OperatorOptions::default()).unwrap()
    }

    fn basis_l(edges: &[(usize, usize, f64)]) -> SpectralBasis {
        decompose(&op_l(edges), FrequencyConvention::Modulus).unwrap()
    }

    #[test]
    fn p2_basis_closed_form() {
        let b = basis_l(&[(0, 1, 1.0)]);
        assert_abs_diff_eq!(b.frequencies[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.frequencies[1], 2.0, epsilon = 1e-12);
        let s = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(b.u[(0, 0)].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(b.u[(1, 0)].re, s, epsilon = 1e-12);
        // Sign convention puts the first tied-magnitude entry positive.
        assert_abs_diff_eq!(b.u[(0, 1)].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(b.u[(1, 1)].re, -s, epsilon = 1e-12);
    }

    #[test]
    fn p3_eigenvalues() {
        let b = basis_l(&[(0, 1, 1.0), (1, 2, 1.0)]);
        let expect = [0.0, 1.0, 3.0];
        for (got, want) in b.frequencies.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn ring3_q_frequencies() {
        let g = Graph::build(&[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], true).unwrap();
        let q = reference_operator(&g, OperatorKind::Q, &OperatorOptions::default()).unwrap();
        let b = decompose(&q, FrequencyConvention::Modulus).unwrap();
        assert_abs_diff_eq!(b.frequencies[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.frequencies[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b.frequencies[2], 0.5, epsilon = 1e-12);
        assert_eq!(b.eigenspaces.len(), 2);
        assert_eq!(b.eigenspaces[1], vec![1, 2]);
    }

    #[test]
    fn gft_examples_on_p2() {
        let b = basis_l(&[(0, 1, 1.0)]);
        let xhat = gft(&b, &array![1.0, 1.0].view()).unwrap();
        assert_abs_diff_eq!(xhat[0].re, 2.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(xhat[1].norm(), 0.0, epsilon = 1e-12);

        let xhat = gft(&b, &array![1.0, 0.0].view()).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(xhat[0].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(xhat[1].re, s, epsilon = 1e-12);

        let xhat = gft(&b, &array![0.0, 0.0].view()).unwrap();
        assert!(xhat.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn inverse_gft_round_trip() {
        let b = basis_l(&[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.5)]);
        let x = array![0.3, -1.2, 0.7, 2.0];
        let xhat = gft(&b, &x.view()).unwrap();
        let back = inverse_gft(&b, &xhat.view()).unwrap();
        for (a, c) in x.iter().zip(back.iter()) {
            assert_abs_diff_eq!(*a, *c, epsilon = 1e-9);
        }

        // Unit impulse in frequency domain recovers the basis column.
        let mut delta = Array1::from_elem(4, Complex64::new(0.0, 0.0));
        delta[2] = Complex64::new(1.0, 0.0);
        let u2 = inverse_gft(&b, &delta.view()).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(u2[i], b.u[(i, 2)].re, epsilon = 1e-12);
        }
    }

    #[test]
    fn parseval_on_symmetric_basis() {
        let b = basis_l(&[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 0.7)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = Array1::from_shape_fn(4, |_| rng.gen_range(-1.0f64..1.0));
            let xhat = gft(&b, &x.view()).unwrap();
            let nx = x.dot(&x).sqrt();
            let nh = xhat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert_abs_diff_eq!(nx, nh, epsilon = 1e-10);
        }
    }

    #[test]
    fn directed_basis_left_right_inverse() {
        let g = Graph::build(&[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], true).unwrap();
        let p = reference_operator(&g, OperatorKind::P, &OperatorOptions::default()).unwrap();
        let b = decompose(&p, FrequencyConvention::Modulus).unwrap();
        assert!(!b.real_spectrum);
        let vu = b.v.dot(&b.u);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vu[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-8);
            }
        }
        // Modulus convention: all three eigenvalues of the cyclic walk sit on
        // the unit circle.
        for nu in b.frequencies.iter() {
            assert_abs_diff_eq!(*nu, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn near_defective_rejected() {
        let g = Graph::build(&[(0, 1, 1.0)], true).unwrap();
        let jordan = array![[1.0, 1.0], [0.0, 1.0]];
        let op = ReferenceOperator::custom(jordan, g, false).unwrap();
        let err = decompose(&op, FrequencyConvention::Modulus).unwrap_err();
        assert!(matches!(err, GspError::NearDefective { .. }));
    }

    #[test]
    fn eigenspace_grouping_on_c4() {
        let b = basis_l(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        let sizes: Vec<usize> = b.eigenspaces.iter().map(|g| g.len()).collect();
        assert_eq!(sizes, vec![1, 2, 1]);
    }

    #[test]
    fn dirichlet_examples() {
        let p2 = op_l(&[(0, 1, 1.0)]);
        assert_abs_diff_eq!(dirichlet_form(&p2, &array![1.0, -1.0].view()).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dirichlet_form(&p2, &array![3.0, 3.0].view()).unwrap(), 0.0, epsilon = 1e-12);

        // Unit eigenvector at lambda = 1 on the path P3 has variation 1.
        let p3 = op_l(&[(0, 1, 1.0), (1, 2, 1.0)]);
        let b = decompose(&p3, FrequencyConvention::Modulus).unwrap();
        let u_mid = b.u.column(1).mapv(|z| z.re);
        assert_abs_diff_eq!(dirichlet_form(&p3, &u_mid.view()).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn dirichlet_q_on_directed_ring() {
        let g = Graph::build(&[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], true).unwrap();
        let q = reference_operator(&g, OperatorKind::Q, &OperatorOptions::default()).unwrap();
        // x = [1, -1, 0]: V_Q = 1/2 sum pi_i P_ij (x_i - x_j)^2
        //                     = (1/6)(4 + 1 + 1) = 1.
        let v = dirichlet_form(&q, &array![1.0, -1.0, 0.0].view()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn total_variation_examples() {
        let g = Graph::build(&[(0, 1, 1.0)], false).unwrap();
        let ld = reference_operator(&g, OperatorKind::Ld, &OperatorOptions::default()).unwrap();
        let tv = total_variation(&ld, &array![1.0, -1.0].view()).unwrap();
        assert_abs_diff_eq!(tv, 2.0 * 2.0f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(
            total_variation(&ld, &array![1.0, 1.0].view()).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert_eq!(total_variation(&ld, &array![0.0, 0.0].view()).unwrap(), 0.0);

        let l = op_l(&[(0, 1, 1.0)]);
        assert!(total_variation(&l, &array![1.0, 0.0].view()).is_err());
    }

    #[test]
    fn ln_spectrum_within_two() {
        let g = Graph::build(&[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 0.5)], false).unwrap();
        let ln = reference_operator(&g, OperatorKind::Ln, &OperatorOptions::default()).unwrap();
        let b = decompose(&ln, FrequencyConvention::Modulus).unwrap();
        for nu in b.frequencies.iter() {
            assert!(*nu >= -1e-9 && *nu <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn lrw_eigenvectors_from_ln() {
        let g = Graph::build(&[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (2, 3, 1.0)], false).unwrap();
        let opts = OperatorOptions::default();
        let ln = reference_operator(&g, OperatorKind::Ln, &opts).unwrap();
        let lrw = reference_operator(&g, OperatorKind::Lrw, &opts).unwrap();
        let b = decompose(&ln, FrequencyConvention::Modulus).unwrap();
        let d = g.strengths().out_strengths;
        for k in 0..g.n() {
            // D^{-1/2} u_k is an L_rw eigenvector with the same eigenvalue.
            let w = Array1::from_shape_fn(g.n(), |i| b.u[(i, k)].re / d[i].sqrt());
            let r = lrw.matrix.dot(&w) - &(&w * b.frequencies[k]);
            let resid = r.dot(&r).sqrt();
            assert!(resid < 1e-8, "residual {resid} at k={k}");
        }
    }

    #[test]
    fn frequency_analysis_sorted_pairs() {
        let b = basis_l(&[(0, 1, 1.0)]);
        let pairs = frequency_analysis(&b, &array![1.0, 0.0].view()).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(pairs[0].0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[0].1.re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[1].0, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[1].1.re, s, epsilon = 1e-12);
    }

    #[test]
    fn gft_continuity_under_edge_perturbation() {
        // Weighted path keeps eigenvector magnitudes away from ties so the
        // sign convention is stable as the extra edge vanishes.
        let base = &[(0usize, 1usize, 1.0f64), (1, 2, 2.0)];
        let b0 = basis_l(base);
        let x = array![0.9, -0.4, 1.3];
        let ref_hat = gft(&b0, &x.view()).unwrap();
        for omega in [1e-3, 1e-6] {
            let mut edges = base.to_vec();
            edges.push((0, 2, omega));
            let b = basis_l(&edges);
            let xhat = gft(&b, &x.view()).unwrap();
            let diff: f64 = xhat
                .iter()
                .zip(ref_hat.iter())
                .map(|(a, c)| (a - c).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff <= 10.0 * omega, "diff {diff} at omega {omega}");
        }
    }

}
