//! Reference operators of the Laplacian family, for undirected and directed
//! graphs, plus the random-walk stationary distribution the directed variants
//! are built on.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GspError, Result};
use crate::graph::Graph;

/// Which reference operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Combinatorial Laplacian L = D - A (directed: D_in - A^T).
    L,
    /// Normalized Laplacian L_n = I - D^{-1/2} A D^{-1/2}.
    Ln,
    /// Random walk Laplacian L_rw = I - D^{-1} A.
    Lrw,
    /// Deformed Laplacian L_d = I - A^T / ||A||_2.
    Ld,
    /// Chung's directed Laplacian Q = Pi - (Pi P + P^T Pi)/2.
    Q,
    /// Normalized directed Laplacian Q_n = Pi^{-1/2} Q Pi^{-1/2}.
    Qn,
    /// Random walk form Q_rw = I - (P + Pi^{-1} P^T Pi)/2.
    Qrw,
    /// Deformed form Q_d = I - (Pi P + P^T Pi)/||Pi P + P^T Pi||_2.
    Qd,
    /// Random walk matrix P = D^{-1} A.
    P,
    /// Caller-supplied matrix adopted as a reference operator.
    Custom,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 9] = [
        OperatorKind::L,
        OperatorKind::Ln,
        OperatorKind::Lrw,
        OperatorKind::Ld,
        OperatorKind::Q,
        OperatorKind::Qn,
        OperatorKind::Qrw,
        OperatorKind::Qd,
        OperatorKind::P,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::L => "L",
            OperatorKind::Ln => "Ln",
            OperatorKind::Lrw => "Lrw",
            OperatorKind::Ld => "Ld",
            OperatorKind::Q => "Q",
            OperatorKind::Qn => "Qn",
            OperatorKind::Qrw => "Qrw",
            OperatorKind::Qd => "Qd",
            OperatorKind::P => "P",
            OperatorKind::Custom => "custom",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = GspError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l" => Ok(OperatorKind::L),
            "ln" => Ok(OperatorKind::Ln),
            "lrw" => Ok(OperatorKind::Lrw),
            "ld" => Ok(OperatorKind::Ld),
            "q" => Ok(OperatorKind::Q),
            "qn" => Ok(OperatorKind::Qn),
            "qrw" => Ok(OperatorKind::Qrw),
            "qd" => Ok(OperatorKind::Qd),
            "p" => Ok(OperatorKind::P),
            other => Err(GspError::Unsupported(format!("unknown operator kind `{other}`"))),
        }
    }
}

/// How to scale the stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryMode {
    /// pi sums to 1.
    Probability,
    /// pi_i = d_i exactly; only defined for undirected graphs.
    DegreeMeasure,
}

/// Stationary distribution of the random walk on a graph.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub pi: Array1<f64>,
    /// True when pi sums to 1; false in degree-measure mode.
    pub normalized: bool,
}

/// Knobs for operator construction.
#[derive(Debug, Clone)]
pub struct OperatorOptions {
    /// Treat D^{-1} and D^{-1/2} entries of zero-strength nodes as 0 instead
    /// of rejecting the graph.
    pub allow_isolated: bool,
    /// Mix the walk matrix with uniform teleportation, P <- (1-eps) P + eps/N,
    /// to force ergodicity. None leaves the walk untouched.
    pub teleport: Option<f64>,
    /// Scaling of pi used by the Q-family.
    pub stationary_mode: StationaryMode,
    /// Seed for the power iterations (spectral norm, stationary distribution).
    pub seed: u64,
    /// Iteration cap for those power iterations.
    pub max_power_iters: usize,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        OperatorOptions {
            allow_isolated: false,
            teleport: None,
            stationary_mode: StationaryMode::Probability,
            seed: 0,
            max_power_iters: 10_000,
        }
    }
}

/// Default teleportation weight when the caller enables the fix without
/// choosing one.
pub const DEFAULT_TELEPORT_EPS: f64 = 1e-2;

/// A named N x N operator together with the graph it came from.
#[derive(Debug, Clone)]
pub struct ReferenceOperator {
    pub kind: OperatorKind,
    pub matrix: Array2<f64>,
    pub symmetric: bool,
    /// Stationary distribution used in construction (Q-family only).
    pub pi: Option<StationaryDistribution>,
    /// Walk matrix the Q-family was built from; kept for the edge-sum form
    /// of the Dirichlet variation.
    pub(crate) walk: Option<Array2<f64>>,
    graph: Graph,
}

impl ReferenceOperator {
    /// Adopt an arbitrary square matrix as a reference operator on `graph`.
    pub fn custom(matrix: Array2<f64>, graph: Graph, symmetric: bool) -> Result<Self> {
        if matrix.nrows() != graph.n() || matrix.ncols() != graph.n() {
            return Err(GspError::DimensionMismatch { expected: graph.n(), got: matrix.nrows() });
        }
        Ok(ReferenceOperator { kind: OperatorKind::Custom, matrix, symmetric, pi: None, walk: None, graph })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Provenance handle of the originating graph.
    pub fn graph_id(&self) -> u64 {
        self.graph.id()
    }
}

/// Largest singular value of `a`, by power iteration on A^T A.
///
/// Runs to relative tolerance 1e-10 on the squared estimate; errors if the
/// iteration cap is hit first.
pub fn spectral_norm(a: &ArrayView2<f64>, seed: u64, max_iters: usize) -> Result<f64> {
    let n = a.ncols();
    if n == 0 || a.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Array1::from_shape_fn(n, |_| rng.gen_range(0.1f64..1.0));
    let norm = v.dot(&v).sqrt();
    v /= norm;
    let mut est = 0.0f64;
    for _ in 0..max_iters {
        // w = A^T (A v); the Rayleigh quotient ||A v||^2 estimates sigma_max^2.
        let av = a.dot(&v);
        let next_est = av.dot(&av);
        let mut w = a.t().dot(&av);
        let wnorm = w.dot(&w).sqrt();
        if wnorm == 0.0 {
            return Ok(0.0);
        }
        w /= wnorm;
        if (next_est - est).abs() <= 1e-10 * next_est {
            return Ok(next_est.sqrt());
        }
        est = next_est;
        v = w;
    }
    Err(GspError::NonConvergence { context: "spectral norm power iteration".into(), iters: max_iters })
}

/// Stationary distribution of the random walk on `g`.
///
/// Undirected graphs use the closed form pi proportional to d. Directed
/// graphs run power iteration on pi^T P from a uniform start; the teleport
/// option in `opts` is applied first when set.
pub fn stationary_distribution(
    g: &Graph,
    mode: StationaryMode,
    opts: &OperatorOptions,
) -> Result<StationaryDistribution> {
    let d = g.strengths().out_strengths;
    // Undirected walks have the closed form pi proportional to d (and a
    // possibly periodic chain that defeats power iteration), so skip the
    // iteration unless teleportation changes the walk.
    if !g.directed() && opts.teleport.is_none() {
        return match mode {
            StationaryMode::DegreeMeasure => {
                Ok(StationaryDistribution { pi: d, normalized: false })
            }
            StationaryMode::Probability => {
                let vol = d.sum();
                if vol == 0.0 {
                    return Err(GspError::NonErgodic("graph has no edges".into()));
                }
                Ok(StationaryDistribution { pi: d / vol, normalized: true })
            }
        };
    }
    if mode == StationaryMode::DegreeMeasure {
        let reason = if g.directed() {
            "degree-measure stationary distribution is only defined for undirected graphs"
        } else {
            "degree-measure stationary distribution is not valid for a teleported walk"
        };
        return Err(GspError::Unsupported(reason.into()));
    }
    let p = walk_matrix(g, opts)?;
    let pi = stationary_from_walk(&p.view(), opts.max_power_iters)?;
    Ok(StationaryDistribution { pi, normalized: true })
}

/// Power-iterate pi^T <- pi^T P until the l1 residual drops below 1e-12.
fn stationary_from_walk(p: &ArrayView2<f64>, max_iters: usize) -> Result<Array1<f64>> {
    let n = p.nrows();
    let mut pi = Array1::from_elem(n, 1.0 / n as f64);
    for _ in 0..max_iters {
        let next = p.t().dot(&pi);
        let mass = next.sum();
        if mass <= 0.0 {
            return Err(GspError::NonErgodic("walk loses all probability mass".into()));
        }
        let next = next / mass;
        let residual: f64 = p.t().dot(&next).iter().zip(next.iter()).map(|(a, b)| (a - b).abs()).sum();
        if residual < 1e-12 {
            if next.iter().any(|&x| x <= 1e-15) {
                return Err(GspError::NonErgodic(
                    "stationary distribution has zero entries; the walk is reducible (enable teleport)".into(),
                ));
            }
            return Ok(next);
        }
        pi = next;
    }
    Err(GspError::NonErgodic(format!(
        "power iteration did not converge in {max_iters} iterations; the walk is likely periodic or reducible (enable teleport)"
    )))
}

/// Random walk matrix P = D_out^{-1} A, with the teleport mix applied when
/// requested.
fn walk_matrix(g: &Graph, opts: &OperatorOptions) -> Result<Array2<f64>> {
    let n = g.n();
    let d = g.strengths().out_strengths;
    let mut p = g.adjacency().to_owned();
    for i in 0..n {
        if d[i] > 0.0 {
            let mut row = p.row_mut(i);
            row /= d[i];
        } else if opts.allow_isolated && opts.teleport.is_none() {
            // Zero row stays zero under the opt-in policy.
        } else if opts.teleport.is_none() {
            return Err(GspError::IsolatedNode { node: i, operator: "P" });
        }
        // Teleportation fills dangling rows below.
    }
    if let Some(eps) = opts.teleport {
        if !(0.0..=1.0).contains(&eps) {
            return Err(GspError::Unsupported(format!("teleport weight {eps} outside [0, 1]")));
        }
        let uniform = 1.0 / n as f64;
        for i in 0..n {
            if d[i] > 0.0 {
                for j in 0..n {
                    p[(i, j)] = (1.0 - eps) * p[(i, j)] + eps * uniform;
                }
            } else {
                // A dangling node teleports with probability one.
                for j in 0..n {
                    p[(i, j)] = uniform;
                }
            }
        }
    }
    Ok(p)
}

/// Build the reference operator `kind` on `g`.
pub fn reference_operator(g: &Graph, kind: OperatorKind, opts: &OperatorOptions) -> Result<ReferenceOperator> {
    let n = g.n();
    let a = g.adjacency();
    let deg = g.strengths();
    let eye = Array2::<f64>::eye(n);
    let directed = g.directed();

    let require_positive = |d: &Array1<f64>, op: &'static str| -> Result<()> {
        if opts.allow_isolated {
            return Ok(());
        }
        match d.iter().position(|&x| x == 0.0) {
            Some(i) => Err(GspError::IsolatedNode { node: i, operator: op }),
            None => Ok(()),
        }
    };
    // Inverse powers of the strength vector under the isolated-node policy.
    let inv_pow = |d: &Array1<f64>, exp: f64| -> Array1<f64> {
        d.mapv(|x| if x > 0.0 { x.powf(exp) } else { 0.0 })
    };

    let mut walk = None;
    let (matrix, symmetric, pi) = match kind {
        OperatorKind::L => {
            if directed {
                // L = D_in - A^T
                let mut m = -a.t().to_owned();
                for i in 0..n {
                    m[(i, i)] += deg.in_strengths[i];
                }
                (m, false, None)
            } else {
                let mut m = -a.to_owned();
                for i in 0..n {
                    m[(i, i)] += deg.out_strengths[i];
                }
                (m, true, None)
            }
        }
        OperatorKind::Ln => {
            require_positive(&deg.out_strengths, "Ln")?;
            let dm = inv_pow(&deg.out_strengths, -0.5);
            let mut m = eye.clone();
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] -= dm[i] * a[(i, j)] * dm[j];
                }
            }
            (m, !directed, None)
        }
        OperatorKind::Lrw => {
            require_positive(&deg.out_strengths, "Lrw")?;
            let dinv = inv_pow(&deg.out_strengths, -1.0);
            let mut m = eye.clone();
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] -= dinv[i] * a[(i, j)];
                }
            }
            (m, false, None)
        }
        OperatorKind::Ld => {
            let norm = spectral_norm(&a, opts.seed, opts.max_power_iters)?;
            if norm == 0.0 {
                return Err(GspError::Unsupported("deformed laplacian of an edgeless graph".into()));
            }
            let m = &eye - &(a.t().to_owned() / norm);
            (m, !directed, None)
        }
        OperatorKind::P => {
            let p = walk_matrix(g, opts)?;
            (p, false, None)
        }
        OperatorKind::Q | OperatorKind::Qn | OperatorKind::Qrw | OperatorKind::Qd => {
            require_positive(&deg.out_strengths, kind.name())?;
            let p = walk_matrix(g, opts)?;
            let sd = stationary_distribution(g, opts.stationary_mode, opts)?;
            let pi = &sd.pi;
            // S = Pi P + P^T Pi, the symmetrized weighted walk.
            let mut s = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    s[(i, j)] = pi[i] * p[(i, j)] + p[(j, i)] * pi[j];
                }
            }
            let m = match kind {
                OperatorKind::Q => {
                    let mut m = s.mapv(|x| -0.5 * x);
                    for i in 0..n {
                        m[(i, i)] += pi[i];
                    }
                    m
                }
                OperatorKind::Qn => {
                    let pim = pi.mapv(|x| if x > 0.0 { x.powf(-0.5) } else { 0.0 });
                    let mut m = Array2::<f64>::zeros((n, n));
                    for i in 0..n {
                        for j in 0..n {
                            m[(i, j)] = -0.5 * pim[i] * s[(i, j)] * pim[j];
                        }
                        m[(i, i)] += if pi[i] > 0.0 { 1.0 } else { 0.0 };
                    }
                    m
                }
                OperatorKind::Qrw => {
                    // Q_rw = I - (P + Pi^{-1} P^T Pi) / 2
                    let pinv = pi.mapv(|x| if x > 0.0 { 1.0 / x } else { 0.0 });
                    let mut m = eye.clone();
                    for i in 0..n {
                        for j in 0..n {
                            m[(i, j)] -= 0.5 * (p[(i, j)] + pinv[i] * p[(j, i)] * pi[j]);
                        }
                    }
                    m
                }
                OperatorKind::Qd => {
                    let norm = spectral_norm(&s.view(), opts.seed, opts.max_power_iters)?;
                    if norm == 0.0 {
                        return Err(GspError::Unsupported("deformed directed laplacian of an edgeless graph".into()));
                    }
                    &eye - &(s.mapv(|x| x / norm))
                }
                _ => unreachable!(),
            };
            let sym = kind != OperatorKind::Qrw;
            walk = Some(p);
            (m, sym, Some(sd))
        }
        OperatorKind::Custom => {
            return Err(GspError::Unsupported(
                "custom operators are built with ReferenceOperator::custom".into(),
            ));
        }
    };

    Ok(ReferenceOperator { kind, matrix, symmetric, pi, walk, graph: g.clone() })
}
