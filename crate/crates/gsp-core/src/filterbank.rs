//! Discrete multiscale transforms: the two-channel perfect-reconstruction
//! filterbank on bipartite graphs (via spectral folding of the normalized
//! Laplacian), the aggregation-based Haar filterbank with coarse-graph
//! construction, Kron reduction, and multi-level cascades of either.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{GspError, Result};
use crate::filter::{apply_exact, filter_matrix, FilterResponse, NamedKernel, ResponseForm};
use crate::graph::Graph;
use crate::linalg;
use crate::operator::{reference_operator, OperatorKind, OperatorOptions};
use crate::spectral::{decompose, FrequencyConvention, SpectralBasis};

/// Frobenius tolerance of the perfect-reconstruction matrix identities.
pub const PR_TOL: f64 = 1e-8;

/// Max-norm tolerance on per-level analysis orthogonality in a cascade.
const ORTHO_TOL: f64 = 1e-10;

/// A two-set node partition; for bipartite use no edge may run inside
/// either set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePartition2 {
    v0: Vec<usize>,
    v1: Vec<usize>,
}

impl NodePartition2 {
    /// Validated constructor: the two sets must be disjoint and cover 0..n.
    pub fn new(n: usize, mut v0: Vec<usize>, mut v1: Vec<usize>) -> Result<Self> {
        v0.sort_unstable();
        v0.dedup();
        v1.sort_unstable();
        v1.dedup();
        if v0.len() + v1.len() != n {
            return Err(GspError::DimensionMismatch { expected: n, got: v0.len() + v1.len() });
        }
        let mut seen = vec![false; n];
        for &i in v0.iter().chain(v1.iter()) {
            if i >= n || seen[i] {
                return Err(GspError::Unsupported(format!("node {i} repeated or out of range in partition")));
            }
            seen[i] = true;
        }
        Ok(NodePartition2 { v0, v1 })
    }

    pub fn v0(&self) -> &[usize] {
        &self.v0
    }

    pub fn v1(&self) -> &[usize] {
        &self.v1
    }

    pub fn n(&self) -> usize {
        self.v0.len() + self.v1.len()
    }
}

/// The sampler J = diag(1_{V0}) - diag(1_{V1}); J^2 = I.
#[derive(Debug, Clone)]
pub struct SamplerJ {
    signs: Array1<f64>,
}

impl SamplerJ {
    pub fn from_partition(p: &NodePartition2) -> Self {
        let mut signs = Array1::zeros(p.n());
        for &i in &p.v0 {
            signs[i] = 1.0;
        }
        for &i in &p.v1 {
            signs[i] = -1.0;
        }
        SamplerJ { signs }
    }

    pub fn signs(&self) -> &Array1<f64> {
        &self.signs
    }

    pub fn matrix(&self) -> Array2<f64> {
        Array2::from_diag(&self.signs)
    }

    pub fn apply(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        &self.signs * x
    }
}

/// Outcome of the bipartiteness test: a 2-coloring or an odd-cycle
/// certificate.
#[derive(Debug, Clone)]
pub enum Bipartiteness {
    Bipartite(NodePartition2),
    OddCycle(Vec<usize>),
}

fn neighbor_lists(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let a = g.adjacency();
    let mut nbrs = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] > 0.0 {
                nbrs[i].push(j);
            }
        }
    }
    nbrs
}

/// Rotate and orient a cycle so it starts at its smallest node and steps to
/// the smaller neighbor first, making certificates deterministic.
fn normalize_cycle(mut cycle: Vec<usize>) -> Vec<usize> {
    let pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|&(_, &v)| v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle.rotate_left(pos);
    if cycle.len() > 2 && cycle[1] > cycle[cycle.len() - 1] {
        cycle[1..].reverse();
    }
    cycle
}

/// 2-color the graph by BFS; failure returns the odd cycle made of the two
/// tree paths behind the offending edge.
pub fn bipartition_check(g: &Graph) -> Result<Bipartiteness> {
    if g.directed() {
        return Err(GspError::Unsupported("bipartiteness is checked on undirected graphs".into()));
    }
    let n = g.n();
    let nbrs = neighbor_lists(g);
    let mut color = vec![-1i8; n];
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    for root in 0..n {
        if color[root] >= 0 {
            continue;
        }
        color[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &nbrs[u] {
                if color[v] < 0 {
                    color[v] = 1 - color[u];
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                } else if color[v] == color[u] && v != u {
                    // Equal colors: the tree paths from u and v to their
                    // lowest common ancestor close an odd cycle.
                    let (mut a, mut b) = (u, v);
                    let mut left = vec![a];
                    let mut right = vec![b];
                    while depth[a] > depth[b] {
                        a = parent[a];
                        left.push(a);
                    }
                    while depth[b] > depth[a] {
                        b = parent[b];
                        right.push(b);
                    }
                    while a != b {
                        a = parent[a];
                        b = parent[b];
                        left.push(a);
                        right.push(b);
                    }
                    right.pop();
                    right.reverse();
                    left.extend(right);
                    return Ok(Bipartiteness::OddCycle(normalize_cycle(left)));
                }
            }
        }
    }
    let v0 = (0..n).filter(|&i| color[i] == 0).collect();
    let v1 = (0..n).filter(|&i| color[i] == 1).collect();
    Ok(Bipartiteness::Bipartite(NodePartition2 { v0, v1 }))
}

fn real_columns(basis: &SpectralBasis) -> Array2<f64> {
    basis.u.mapv(|z| z.re)
}

/// Verify that `partition` bipartitions `g`, returning the odd-cycle error
/// when the graph itself is at fault.
fn check_bipartition(g: &Graph, partition: &NodePartition2) -> Result<SamplerJ> {
    if partition.n() != g.n() {
        return Err(GspError::DimensionMismatch { expected: g.n(), got: partition.n() });
    }
    let j = SamplerJ::from_partition(partition);
    for (u, v, _) in g.edges() {
        if j.signs[u] == j.signs[v] {
            return match bipartition_check(g)? {
                Bipartiteness::OddCycle(cycle) => Err(GspError::NotBipartite { cycle }),
                Bipartiteness::Bipartite(_) => Err(GspError::Unsupported(format!(
                    "partition keeps edge ({u}, {v}) inside one side"
                ))),
            };
        }
    }
    Ok(j)
}

/// Largest Frobenius mismatch of Pr_lambda J = J Pr_{2-lambda} over the
/// distinct eigenvalues of the normalized-Laplacian basis.
pub fn spectral_folding_residual(g: &Graph, basis: &SpectralBasis, partition: &NodePartition2) -> Result<f64> {
    let j = check_bipartition(g, partition)?;
    if !basis.symmetric || basis.n() != g.n() {
        return Err(GspError::Unsupported("folding needs the symmetric normalized-Laplacian basis of the same graph".into()));
    }
    let lambdas = basis.real_eigenvalues();
    let scale = basis.lambda_max().max(1.0);
    let u = real_columns(basis);
    let jm = j.matrix();
    let projector = |group: &[usize]| -> Array2<f64> {
        let cols = u.select(ndarray::Axis(1), group);
        cols.dot(&cols.t())
    };
    let mut worst = 0.0f64;
    for group in &basis.eigenspaces {
        let lam = lambdas[group[0]];
        let mirror = 2.0 - lam;
        let pr = projector(group);
        let partner = basis
            .eigenspaces
            .iter()
            .find(|other| (lambdas[other[0]] - mirror).abs() <= 1e-8 * scale);
        let pr_mirror = match partner {
            Some(other) => projector(other),
            None => Array2::zeros((g.n(), g.n())),
        };
        let diff = pr.dot(&jm) - jm.dot(&pr_mirror);
        worst = worst.max(linalg::fro_norm(&diff.view()));
    }
    Ok(worst)
}

/// A certified (or measured) two-channel bank on a bipartite graph.
#[derive(Debug, Clone)]
pub struct TwoChannelBank {
    pub h0: FilterResponse,
    pub h1: FilterResponse,
    pub g0: FilterResponse,
    pub g1: FilterResponse,
    pub partition: NodePartition2,
    pub basis_id: u64,
    /// True when both PR matrix identities hold within PR_TOL.
    pub certified: bool,
    /// Largest measured Frobenius residual of the two identities.
    pub pr_residual: f64,
}

/// The quadrature-mirror responses h0 = sqrt(2 - lambda), h1 = sqrt(lambda)
/// on [0, 2]; the unique nonnegative power-complement pair with g = h.
pub fn qmf_responses() -> (FilterResponse, FilterResponse) {
    (
        FilterResponse::named(NamedKernel::QmfLow, (0.0, 2.0)),
        FilterResponse::named(NamedKernel::QmfHigh, (0.0, 2.0)),
    )
}

fn certify_bank(
    basis: &SpectralBasis,
    partition: &NodePartition2,
    h0: &FilterResponse,
    h1: &FilterResponse,
    g0: &FilterResponse,
    g1: &FilterResponse,
) -> Result<f64> {
    let n = basis.n();
    let j = SamplerJ::from_partition(partition).matrix();
    let h0m = filter_matrix(basis, h0)?.matrix;
    let h1m = filter_matrix(basis, h1)?.matrix;
    let g0m = filter_matrix(basis, g0)?.matrix;
    let g1m = filter_matrix(basis, g1)?.matrix;
    let mut sum = g0m.dot(&h0m) + &g1m.dot(&h1m);
    for i in 0..n {
        sum[(i, i)] -= 2.0;
    }
    let e31 = linalg::fro_norm(&sum.view());
    let alt = g0m.dot(&j).dot(&h0m) - g1m.dot(&j).dot(&h1m);
    let e32 = linalg::fro_norm(&alt.view());
    Ok(e31.max(e32))
}

/// Assemble a bank from user responses, measuring (not assuming) perfect
/// reconstruction.
pub fn custom_bank(
    basis: &SpectralBasis,
    partition: NodePartition2,
    h0: FilterResponse,
    h1: FilterResponse,
    g0: FilterResponse,
    g1: FilterResponse,
) -> Result<TwoChannelBank> {
    if !basis.symmetric {
        return Err(GspError::Unsupported("two-channel banks need a symmetric basis".into()));
    }
    if partition.n() != basis.n() {
        return Err(GspError::DimensionMismatch { expected: basis.n(), got: partition.n() });
    }
    let pr_residual = certify_bank(basis, &partition, &h0, &h1, &g0, &g1)?;
    Ok(TwoChannelBank {
        h0,
        h1,
        g0,
        g1,
        partition,
        basis_id: basis.id,
        certified: pr_residual < PR_TOL,
        pr_residual,
    })
}

/// The QMF bank on a bipartite normalized-Laplacian basis, certified
/// against the PR identities.
pub fn design_qmf_bank(basis: &SpectralBasis, partition: NodePartition2) -> Result<TwoChannelBank> {
    let (h0, h1) = qmf_responses();
    let bank = custom_bank(basis, partition, h0.clone(), h1.clone(), h0, h1)?;
    if !bank.certified {
        return Err(GspError::CheckFailed {
            context: "qmf bank certification".into(),
            residual: bank.pr_residual,
        });
    }
    Ok(bank)
}

/// Critically sampled analysis output: y0 on V0, y1 on V1, in ascending
/// node order.
#[derive(Debug, Clone)]
pub struct TwoChannelCoefficients {
    pub y0: Array1<f64>,
    pub y1: Array1<f64>,
}

fn gather(x: &Array1<f64>, idx: &[usize]) -> Array1<f64> {
    Array1::from_iter(idx.iter().map(|&i| x[i]))
}

fn scatter(n: usize, idx: &[usize], values: &ArrayView1<f64>) -> Array1<f64> {
    let mut out = Array1::zeros(n);
    for (&i, &v) in idx.iter().zip(values.iter()) {
        out[i] = v;
    }
    out
}

/// y0 = H0 x restricted to V0; y1 = H1 x restricted to V1.
pub fn two_channel_analyze(
    basis: &SpectralBasis,
    bank: &TwoChannelBank,
    x: &ArrayView1<f64>,
) -> Result<TwoChannelCoefficients> {
    if bank.basis_id != basis.id {
        return Err(GspError::Unsupported(format!(
            "bank was certified on basis {}, not basis {}",
            bank.basis_id, basis.id
        )));
    }
    if x.len() != basis.n() {
        return Err(GspError::DimensionMismatch { expected: basis.n(), got: x.len() });
    }
    let full0 = apply_exact(basis, &bank.h0, x)?;
    let full1 = apply_exact(basis, &bank.h1, x)?;
    Ok(TwoChannelCoefficients {
        y0: gather(&full0, bank.partition.v0()),
        y1: gather(&full1, bank.partition.v1()),
    })
}

/// Synthesis output; `warning` is set when the bank is not certified.
#[derive(Debug, Clone)]
pub struct SynthesisOutcome {
    pub x: Array1<f64>,
    pub warning: Option<String>,
}

/// x~ = G0 (upsampled y0) + G1 (upsampled y1).
pub fn two_channel_synthesize(
    basis: &SpectralBasis,
    bank: &TwoChannelBank,
    coeffs: &TwoChannelCoefficients,
) -> Result<SynthesisOutcome> {
    if bank.basis_id != basis.id {
        return Err(GspError::Unsupported(format!(
            "bank was certified on basis {}, not basis {}",
            bank.basis_id, basis.id
        )));
    }
    let n = basis.n();
    if coeffs.y0.len() != bank.partition.v0().len() || coeffs.y1.len() != bank.partition.v1().len() {
        return Err(GspError::DimensionMismatch {
            expected: n,
            got: coeffs.y0.len() + coeffs.y1.len(),
        });
    }
    let up0 = scatter(n, bank.partition.v0(), &coeffs.y0.view());
    let up1 = scatter(n, bank.partition.v1(), &coeffs.y1.view());
    let x = apply_exact(basis, &bank.g0, &up0.view())? + apply_exact(basis, &bank.g1, &up1.view())?;
    let warning = (!bank.certified).then(|| {
        format!(
            "bank is not perfect-reconstruction: identity residual {:.3e}",
            bank.pr_residual
        )
    });
    Ok(SynthesisOutcome { x, warning })
}

/// A partition into supernodes: disjoint covering subsets, each connected
/// in the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupernodePartition {
    subsets: Vec<Vec<usize>>,
}

impl SupernodePartition {
    /// Validated constructor; subsets are sorted internally and ordered by
    /// their smallest member.
    pub fn new(g: &Graph, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let n = g.n();
        let mut subsets: Vec<Vec<usize>> = subsets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        subsets.sort_by_key(|s| s.first().copied().unwrap_or(usize::MAX));
        let mut seen = vec![false; n];
        let mut total = 0usize;
        let nbrs = neighbor_lists(g);
        for s in &subsets {
            if s.is_empty() {
                return Err(GspError::Unsupported("empty subset in partition".into()));
            }
            for &i in s {
                if i >= n || seen[i] {
                    return Err(GspError::Unsupported(format!("node {i} repeated or out of range in partition")));
                }
                seen[i] = true;
            }
            total += s.len();
            // Connectivity inside the subset.
            let inside: std::collections::BTreeSet<usize> = s.iter().copied().collect();
            let mut reached = std::collections::BTreeSet::from([s[0]]);
            let mut queue = std::collections::VecDeque::from([s[0]]);
            while let Some(u) = queue.pop_front() {
                for &v in &nbrs[u] {
                    if inside.contains(&v) && reached.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
            if reached.len() != s.len() {
                return Err(GspError::Unsupported(format!(
                    "subset starting at node {} is not connected in the graph",
                    s[0]
                )));
            }
        }
        if total != n {
            return Err(GspError::DimensionMismatch { expected: n, got: total });
        }
        Ok(SupernodePartition { subsets })
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

/// Haar analysis output: per-subset averages, Helmert details, and the
/// orthogonal analysis matrix (approximation rows first).
#[derive(Debug, Clone)]
pub struct HaarAnalysis {
    pub approx: Array1<f64>,
    pub details: Array1<f64>,
    pub matrix: Array2<f64>,
}

/// The orthogonal Haar analysis matrix of a partition: averaging rows for
/// each subset, then Helmert contrast rows (detail k weighs elements 1..k
/// against element k+1).
pub fn haar_matrix(partition: &SupernodePartition, n: usize) -> Array2<f64> {
    let j_count = partition.len();
    let mut matrix = Array2::zeros((n, n));
    let mut detail_row = j_count;
    for (j, subset) in partition.subsets().iter().enumerate() {
        let sz = subset.len();
        let scale = 1.0 / (sz as f64).sqrt();
        for &i in subset {
            matrix[(j, i)] = scale;
        }
        for k in 1..sz {
            let denom = (k as f64 * (k + 1) as f64).sqrt();
            for &i in &subset[..k] {
                matrix[(detail_row, i)] = 1.0 / denom;
            }
            matrix[(detail_row, subset[k])] = -(k as f64) / denom;
            detail_row += 1;
        }
    }
    matrix
}

/// Average over each subset (scaled to unit row norm) and complete with
/// Helmert contrasts.
pub fn haar_analysis(g: &Graph, partition: &SupernodePartition, x: &ArrayView1<f64>) -> Result<HaarAnalysis> {
    let n = g.n();
    if x.len() != n {
        return Err(GspError::DimensionMismatch { expected: n, got: x.len() });
    }
    let j_count = partition.len();
    let matrix = haar_matrix(partition, n);
    let coeffs = matrix.dot(x);
    let approx = coeffs.slice(ndarray::s![..j_count]).to_owned();
    let details = coeffs.slice(ndarray::s![j_count..]).to_owned();
    Ok(HaarAnalysis { approx, details, matrix })
}

/// Contract each subset to one supernode; inter-subset weights are summed
/// and intra-subset weights dropped.
pub fn coarse_graph(g: &Graph, partition: &SupernodePartition) -> Result<Graph> {
    let mut owner = vec![0usize; g.n()];
    for (j, subset) in partition.subsets().iter().enumerate() {
        for &i in subset {
            owner[i] = j;
        }
    }
    let mut edges = Vec::new();
    let mut acc: std::collections::BTreeMap<(usize, usize), f64> = std::collections::BTreeMap::new();
    for (u, v, w) in g.edges() {
        let (a, b) = (owner[u], owner[v]);
        if a != b {
            *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
    }
    for ((a, b), w) in acc {
        edges.push((a, b, w));
    }
    Graph::build_with_n(partition.len(), &edges, false)
}

/// Kron reduction onto `keep`: the Schur complement of the Laplacian over
/// the discarded nodes, read back as a graph (self-loop mass dropped).
pub fn kron_reduce(g: &Graph, keep: &[usize]) -> Result<Graph> {
    if g.directed() {
        return Err(GspError::Unsupported("kron reduction is defined on undirected graphs".into()));
    }
    let n = g.n();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(GspError::Unsupported("empty keep set".into()));
    }
    if *keep.last().unwrap() >= n {
        return Err(GspError::DimensionMismatch { expected: n, got: *keep.last().unwrap() + 1 });
    }
    let a = g.adjacency();
    let mut lap = -a.to_owned();
    for i in 0..n {
        lap[(i, i)] += a.row(i).sum();
    }
    let kept = keep.clone();
    let dropped: Vec<usize> = (0..n).filter(|i| kept.binary_search(i).is_err()).collect();
    let take = |rows: &[usize], cols: &[usize]| -> Array2<f64> {
        Array2::from_shape_fn((rows.len(), cols.len()), |(r, c)| lap[(rows[r], cols[c])])
    };
    let l_red = if dropped.is_empty() {
        take(&kept, &kept)
    } else {
        let ldd = take(&dropped, &dropped);
        let ldk = take(&dropped, &kept);
        let x = linalg::solve(&ldd.view(), &ldk.view())
            .map_err(|_| GspError::Singular("kron interior block".into()))?;
        take(&kept, &kept) - take(&kept, &dropped).dot(&x)
    };
    let scale = l_red.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut edges = Vec::new();
    for i in 0..kept.len() {
        for j in i + 1..kept.len() {
            let w = -0.5 * (l_red[(i, j)] + l_red[(j, i)]);
            if w > 1e-12 * scale {
                edges.push((i, j, w));
            }
        }
    }
    Graph::build_with_n(kept.len(), &edges, false)
}

/// Greedy heavy-edge matching: pair endpoints of the heaviest remaining
/// edge (ties to the lower node ids) until the supernode count reaches
/// target_ratio * N; unmatched nodes stay singletons.
pub fn partition_by_matching(g: &Graph, target_ratio: f64) -> Result<SupernodePartition> {
    let n = g.n();
    let mut edges = g.edges();
    edges.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    let floor = (target_ratio * n as f64).ceil().max(1.0) as usize;
    let mut matched = vec![false; n];
    let mut subsets = Vec::new();
    let mut count = n;
    for (u, v, _) in edges {
        if count <= floor {
            break;
        }
        if !matched[u] && !matched[v] {
            matched[u] = true;
            matched[v] = true;
            subsets.push(vec![u, v]);
            count -= 1;
        }
    }
    for i in 0..n {
        if !matched[i] {
            subsets.push(vec![i]);
        }
    }
    SupernodePartition::new(g, subsets)
}

/// Split nodes by the sign of the highest-frequency eigenvector; zero
/// entries land in V0.
pub fn polarity_bipartition(basis: &SpectralBasis, g: &Graph) -> Result<NodePartition2> {
    if !basis.symmetric {
        return Err(GspError::Unsupported("polarity bipartition needs a symmetric basis".into()));
    }
    if basis.n() != g.n() {
        return Err(GspError::DimensionMismatch { expected: g.n(), got: basis.n() });
    }
    let n = basis.n();
    let last = basis.u.column(n - 1);
    let v0: Vec<usize> = (0..n).filter(|&i| last[i].re >= 0.0).collect();
    let v1: Vec<usize> = (0..n).filter(|&i| last[i].re < 0.0).collect();
    Ok(NodePartition2 { v0, v1 })
}

/// Critically sampled analysis matrix of a bank: H0 rows on V0 stacked
/// over H1 rows on V1; orthogonal whenever the bank is certified.
pub fn two_channel_analysis_matrix(basis: &SpectralBasis, bank: &TwoChannelBank) -> Result<Array2<f64>> {
    if bank.basis_id != basis.id {
        return Err(GspError::Unsupported(format!(
            "bank was certified on basis {}, not basis {}",
            bank.basis_id, basis.id
        )));
    }
    let n = basis.n();
    let h0m = filter_matrix(basis, &bank.h0)?.matrix;
    let h1m = filter_matrix(basis, &bank.h1)?.matrix;
    let mut t = Array2::zeros((n, n));
    for (r, &i) in bank.partition.v0().iter().enumerate() {
        t.row_mut(r).assign(&h0m.row(i));
    }
    let off = bank.partition.v0().len();
    for (r, &i) in bank.partition.v1().iter().enumerate() {
        t.row_mut(off + r).assign(&h1m.row(i));
    }
    Ok(t)
}

/// Analysis policy of a cascade level.
#[derive(Debug, Clone, Copy)]
pub enum CascadePolicy {
    /// Haar on a heavy-edge-matching partition with the given coarsening
    /// ratio.
    Haar { target_ratio: f64 },
    /// QMF two-channel on bipartite levels; the coarse graph is the Kron
    /// reduction onto V0.
    TwoChannel,
}

/// Partition used by one cascade level.
#[derive(Debug, Clone)]
pub enum LevelPartition {
    Supernodes(SupernodePartition),
    Bipartition(NodePartition2),
}

/// One level of a multiresolution cascade.
#[derive(Debug, Clone)]
pub struct MultiresLevel {
    pub coarse: Graph,
    pub approx: Array1<f64>,
    pub details: Array1<f64>,
    /// Orthogonal analysis matrix of this level (approximation rows first).
    pub analysis: Array2<f64>,
    pub partition: LevelPartition,
}

#[derive(Debug, Clone)]
pub struct MultiresDecomposition {
    pub levels: Vec<MultiresLevel>,
    /// Node count of the original graph.
    pub n: usize,
}

impl MultiresDecomposition {
    /// Coefficient count: all detail vectors plus the deepest
    /// approximation; equals n at every depth by critical sampling.
    pub fn coefficient_count(&self) -> usize {
        self.levels.iter().map(|l| l.details.len()).sum::<usize>()
            + self.levels.last().map_or(0, |l| l.approx.len())
    }
}

fn orthogonality_residual(q: &Array2<f64>) -> f64 {
    let mut gram = q.t().dot(q);
    for i in 0..gram.nrows() {
        gram[(i, i)] -= 1.0;
    }
    gram.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Cascade `depth` analysis levels, each applied to the previous level's
/// approximation on the previous level's coarse graph.
pub fn multires_cascade(g: &Graph, x: &ArrayView1<f64>, depth: usize, policy: CascadePolicy) -> Result<MultiresDecomposition> {
    if depth == 0 {
        return Err(GspError::Unsupported("cascade depth must be at least 1".into()));
    }
    if x.len() != g.n() {
        return Err(GspError::DimensionMismatch { expected: g.n(), got: x.len() });
    }
    let mut current = g.clone();
    let mut approx = x.to_owned();
    let mut levels = Vec::with_capacity(depth);
    for level in 0..depth {
        let (next_graph, next_approx, details, analysis, partition) = match policy {
            CascadePolicy::Haar { target_ratio } => {
                let part = partition_by_matching(&current, target_ratio)?;
                let ha = haar_analysis(&current, &part, &approx.view())?;
                let coarse = coarse_graph(&current, &part)?;
                (coarse, ha.approx, ha.details, ha.matrix, LevelPartition::Supernodes(part))
            }
            CascadePolicy::TwoChannel => {
                let part = match bipartition_check(&current)? {
                    Bipartiteness::Bipartite(p) => p,
                    Bipartiteness::OddCycle(cycle) => {
                        return Err(GspError::Unsupported(format!(
                            "level {level} coarse graph is not bipartite (odd cycle {cycle:?}); use the haar policy"
                        )));
                    }
                };
                let op = reference_operator(&current, OperatorKind::Ln, &OperatorOptions::default())?;
                let basis = decompose(&op, FrequencyConvention::default())?;
                let bank = design_qmf_bank(&basis, part.clone())?;
                let coeffs = two_channel_analyze(&basis, &bank, &approx.view())?;
                let t = two_channel_analysis_matrix(&basis, &bank)?;
                let coarse = kron_reduce(&current, part.v0())?;
                (coarse, coeffs.y0, coeffs.y1, t, LevelPartition::Bipartition(part))
            }
        };
        let ortho = orthogonality_residual(&analysis);
        if ortho >= ORTHO_TOL {
            return Err(GspError::CheckFailed {
                context: format!("level {level} analysis orthogonality"),
                residual: ortho,
            });
        }
        levels.push(MultiresLevel {
            coarse: next_graph.clone(),
            approx: next_approx.clone(),
            details,
            analysis,
            partition,
        });
        current = next_graph;
        approx = next_approx;
    }
    Ok(MultiresDecomposition { levels, n: x.len() })
}

/// Invert a cascade through the transposes of its orthogonal analysis
/// matrices.
pub fn multires_reconstruct(decomp: &MultiresDecomposition) -> Result<Array1<f64>> {
    let mut approx = match decomp.levels.last() {
        Some(l) => l.approx.clone(),
        None => return Err(GspError::Unsupported("empty decomposition".into())),
    };
    for level in decomp.levels.iter().rev() {
        let mut stacked = Array1::zeros(level.analysis.nrows());
        stacked.slice_mut(ndarray::s![..approx.len()]).assign(&approx);
        stacked.slice_mut(ndarray::s![approx.len()..]).assign(&level.details);
        approx = level.analysis.t().dot(&stacked);
    }
    Ok(approx)
}

/// True when the response pair is the QMF design (used by serialization).
pub fn is_qmf_bank(bank: &TwoChannelBank) -> bool {
    matches!(bank.h0.form, ResponseForm::Named(NamedKernel::QmfLow))
        && matches!(bank.h1.form, ResponseForm::Named(NamedKernel::QmfHigh))
        && matches!(bank.g0.form, ResponseForm::Named(NamedKernel::QmfLow))
        && matches!(bank.g1.form, ResponseForm::Named(NamedKernel::QmfHigh))
}
