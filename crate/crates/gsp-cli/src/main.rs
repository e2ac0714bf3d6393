//! The `gsp` command: operator construction, graph Fourier transforms,
//! filtering with exact and accelerated backends, wavelet transforms,
//! two-channel filterbanks and multiresolution cascades, all driven by
//! plain text files. Outputs are deterministic for fixed inputs and seeds;
//! every numeric output carries a `.meta.json` sidecar.

mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gsp_core::fast::{
    arma_recursion_filter, chebyshev_filter, estimate_spectral_interval, lanczos_filter,
    ArmaRecursionPlan, ChebyshevPlan, Damping, LanczosPlan, DEFAULT_ARMA_CONV_TOL,
    DEFAULT_ARMA_MAX_ITERS,
};
use gsp_core::filter::{apply_exact, tikhonov_response, ArmaDesign, GridSpec};
use gsp_core::filterbank::{
    design_qmf_bank, multires_cascade, multires_reconstruct, spectral_folding_residual,
    two_channel_analyze, two_channel_synthesize, CascadePolicy,
};
use gsp_core::sgwt::{
    design_frame, design_frame_universal, frame_bounds, frame_bounds_universal, sgwt_forward,
    sgwt_inverse, SgwDesign,
};
use gsp_core::spectral::{decompose, gft, max_dense_n, FrequencyConvention, SpectralBasis};
use gsp_core::{
    design_arma_shank, reference_operator, FilterResponse, Graph, GspError, NamedKernel,
    OperatorKind, OperatorOptions, ReferenceOperator, ResponseForm, Result,
};

/// Iteration cap of the spectral-interval power iterations.
const POWER_ITERS_CAP: usize = 10_000;

/// Grid size for realized-response plots when the spectrum is unavailable.
const RESPONSE_GRID_POINTS: usize = 201;

#[derive(Parser)]
#[command(name = "gsp", version, about = "Graph signal processing toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a reference operator; write its matrix and spectrum.
    Operator(OperatorArgs),
    /// Graph Fourier transform of a signal.
    Gft(GftArgs),
    /// Filter a signal through a frequency response.
    Filter(FilterArgs),
    /// Spectral graph wavelet transform, forward or inverse.
    Sgwt(SgwtArgs),
    /// Two-channel filterbank on a bipartite graph.
    Fb(FbArgs),
    /// Multiresolution cascade; decompose to an archive or reconstruct one.
    Multires(MultiresArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CliOperator {
    L,
    Ln,
    Lrw,
    Ld,
    Q,
    Qn,
    Qrw,
    Qd,
    P,
}

impl CliOperator {
    fn kind(self) -> OperatorKind {
        match self {
            CliOperator::L => OperatorKind::L,
            CliOperator::Ln => OperatorKind::Ln,
            CliOperator::Lrw => OperatorKind::Lrw,
            CliOperator::Ld => OperatorKind::Ld,
            CliOperator::Q => OperatorKind::Q,
            CliOperator::Qn => OperatorKind::Qn,
            CliOperator::Qrw => OperatorKind::Qrw,
            CliOperator::Qd => OperatorKind::Qd,
            CliOperator::P => OperatorKind::P,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CliOperator::L => "l",
            CliOperator::Ln => "ln",
            CliOperator::Lrw => "lrw",
            CliOperator::Ld => "ld",
            CliOperator::Q => "q",
            CliOperator::Qn => "qn",
            CliOperator::Qrw => "qrw",
            CliOperator::Qd => "qd",
            CliOperator::P => "p",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Exact,
    Chebyshev,
    Lanczos,
    Arma,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliDamping {
    None,
    Jackson,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliPolicy {
    Haar,
    TwoChannel,
}

/// Flags shared by every command that builds an operator.
#[derive(Args)]
struct OperatorFlags {
    /// Reference operator kind.
    #[arg(long, value_enum, ignore_case = true, default_value = "ln")]
    operator: CliOperator,
    /// Teleportation mix for non-ergodic walks (Q-family and P only).
    #[arg(long)]
    teleport_eps: Option<f64>,
    /// Treat zero-strength nodes as absorbing instead of rejecting them.
    #[arg(long)]
    allow_isolated: bool,
    /// Seed of every randomized internal step.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OperatorFlags {
    fn build(&self, g: &Graph) -> Result<ReferenceOperator> {
        let opts = OperatorOptions {
            allow_isolated: self.allow_isolated,
            teleport: self.teleport_eps,
            seed: self.seed,
            ..Default::default()
        };
        reference_operator(g, self.operator.kind(), &opts)
    }
}

#[derive(Args)]
struct OperatorArgs {
    /// Graph edge-list file.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    flags: OperatorFlags,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GftArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Signal CSV (node,value).
    #[arg(long)]
    signal: PathBuf,
    #[command(flatten)]
    flags: OperatorFlags,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    /// Frequency response, e.g. tikhonov:0.5, heat:1.0, lowpass:0.7,
    /// constant:2, delta:0, quartic:0.6.
    #[arg(long)]
    response: String,
    /// Filtering backend.
    #[arg(long, value_enum, default_value = "exact")]
    backend: Backend,
    /// Polynomial order (chebyshev) or rational fit order (arma on
    /// non-rational responses); defaults: 50 and 4.
    #[arg(long)]
    order: Option<usize>,
    /// Chebyshev damping.
    #[arg(long, value_enum, default_value = "none")]
    damping: CliDamping,
    /// Krylov subspace dimension of the lanczos backend.
    #[arg(long, default_value_t = 30)]
    krylov_dim: usize,
    /// Iteration cap of the arma recursion.
    #[arg(long, default_value_t = DEFAULT_ARMA_MAX_ITERS)]
    max_iters: usize,
    /// Convergence tolerance of the arma recursion.
    #[arg(long, default_value_t = DEFAULT_ARMA_CONV_TOL)]
    tol: f64,
    #[command(flatten)]
    flags: OperatorFlags,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SgwtArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Signal CSV; required for the forward transform.
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Invert coefficients instead of analyzing a signal.
    #[arg(long)]
    inverse: bool,
    /// Coefficient CSV to invert.
    #[arg(long)]
    coefficients: Option<PathBuf>,
    /// Frame descriptor JSON to invert with.
    #[arg(long)]
    frame: Option<PathBuf>,
    /// Number of wavelet scales.
    #[arg(long, default_value_t = 4)]
    scales: usize,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 2.0)]
    lambda2: f64,
    /// Graph-independent design (low-pass width from lambda_max alone).
    #[arg(long)]
    universal: bool,
    #[command(flatten)]
    flags: OperatorFlags,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FbArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    /// Seed of every randomized internal step.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct MultiresArgs {
    /// Graph edge-list file (decompose mode).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Signal CSV (decompose mode).
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Cascade depth.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Per-level analysis policy.
    #[arg(long, value_enum, default_value = "haar")]
    policy: CliPolicy,
    /// Coarsening ratio of the haar policy.
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// Reconstruct from an archive instead of decomposing.
    #[arg(long)]
    reconstruct: bool,
    /// Archive directory to reconstruct from.
    #[arg(long)]
    archive: Option<PathBuf>,
    /// Seed of every randomized internal step.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; the archive root in decompose mode.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("{}: {err}", error_code(&err));
        std::process::exit(1);
    }
}

fn error_code(err: &GspError) -> &'static str {
    match err {
        GspError::Io(_) => "E_IO",
        GspError::Parse { .. } => "E_PARSE",
        GspError::InvalidWeight { .. }
        | GspError::SelfLoop { .. }
        | GspError::EmptyGraph
        | GspError::IsolatedNode { .. } => "E_GRAPH",
        GspError::NonErgodic(_) => "E_NON_ERGODIC",
        GspError::DimensionMismatch { .. } => "E_DIMENSION",
        GspError::NearDefective { .. } => "E_NEAR_DEFECTIVE",
        GspError::NonConvergence { .. } => "E_NON_CONVERGENCE",
        GspError::Unsupported(_) => "E_UNSUPPORTED",
        GspError::DomainViolation { .. } => "E_DOMAIN",
        GspError::UnstableDesign { .. } => "E_UNSTABLE",
        GspError::RankDeficient { .. } | GspError::Singular(_) | GspError::IllConditioned { .. } => {
            "E_SINGULAR"
        }
        GspError::NotBipartite { .. } => "E_NOT_BIPARTITE",
        GspError::DivergentRecursion { .. } => "E_DIVERGENT",
        GspError::FrameNotInvertible { .. } => "E_FRAME",
        GspError::CheckFailed { .. } => "E_CHECK",
        GspError::TooLarge { .. } => "E_TOO_LARGE",
        GspError::Lapack { .. } => "E_LAPACK",
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Operator(a) => run_operator(a),
        Command::Gft(a) => run_gft(a),
        Command::Filter(a) => run_filter(a),
        Command::Sgwt(a) => run_sgwt(a),
        Command::Fb(a) => run_fb(a),
        Command::Multires(a) => run_multires(a),
    }
}

fn ensure_dir(dir: &PathBuf) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn sidecar_body(command: &str, flags: Option<&OperatorFlags>, extra: Value) -> Value {
    let mut body = json!({ "command": command });
    if let Some(f) = flags {
        body["operator"] = json!(f.operator.name());
        body["seed"] = json!(f.seed);
        if let Some(eps) = f.teleport_eps {
            body["teleport_eps"] = json!(eps);
        }
    }
    if let Value::Object(map) = extra {
        for (k, v) in map {
            body[k] = v;
        }
    }
    body
}

fn run_operator(a: OperatorArgs) -> Result<()> {
    ensure_dir(&a.out_dir)?;
    let g = io::read_graph(&a.graph)?;
    let op = a.flags.build(&g)?;
    let basis = decompose(&op, FrequencyConvention::default())?;

    let matrix_path = a.out_dir.join("operator.tsv");
    let mut out = format!("# n={} operator={}\n", g.n(), a.flags.operator.name());
    for row in op.matrix.rows() {
        let cells: Vec<String> = row.iter().map(|v| io::fmt_f64(*v)).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    std::fs::write(&matrix_path, out)?;

    let eig_path = a.out_dir.join("eigenvalues.tsv");
    let mut out = String::from("# k\tfrequency\treal\timag\n");
    for (k, (nu, z)) in basis.frequencies.iter().zip(basis.eigenvalues.iter()).enumerate() {
        out.push_str(&format!("{k}\t{}\t{}\t{}\n", io::fmt_f64(*nu), io::fmt_f64(z.re), io::fmt_f64(z.im)));
    }
    std::fs::write(&eig_path, out)?;

    let body = sidecar_body(
        "operator",
        Some(&a.flags),
        json!({ "n": g.n(), "symmetric": op.symmetric, "max_dense_n": max_dense_n() }),
    );
    io::write_sidecar(&matrix_path, body.clone())?;
    io::write_sidecar(&eig_path, body)?;
    Ok(())
}

fn run_gft(a: GftArgs) -> Result<()> {
    ensure_dir(&a.out_dir)?;
    let g = io::read_graph(&a.graph)?;
    let x = io::read_signal(&a.signal)?;
    let op = a.flags.build(&g)?;
    let basis = decompose(&op, FrequencyConvention::default())?;
    let xhat = gft(&basis, &x.view())?;

    let gft_path = a.out_dir.join("gft.csv");
    io::write_gft(&gft_path, &basis.frequencies, &xhat)?;
    let plot_path = a.out_dir.join("spectrum.tsv");
    io::emit_spectrum_plot(&plot_path, &basis.frequencies, &xhat)?;

    let body = sidecar_body("gft", Some(&a.flags), json!({ "n": g.n() }));
    io::write_sidecar(&gft_path, body.clone())?;
    io::write_sidecar(&plot_path, body)?;
    Ok(())
}

/// Parse `name:param` response strings.
fn parse_response(spec: &str) -> Result<FilterResponse> {
    let bad = |msg: String| GspError::Parse { line: 0, message: msg };
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let value = || -> Result<f64> {
        param
            .ok_or_else(|| bad(format!("response {name} needs a parameter, e.g. {name}:1.0")))?
            .parse::<f64>()
            .map_err(|_| bad(format!("bad response parameter in {spec:?}")))
    };
    match name {
        "tikhonov" => tikhonov_response(value()?),
        "heat" => Ok(FilterResponse::named(NamedKernel::Heat { nu0: value()? }, (0.0, f64::INFINITY))),
        "lowpass" => Ok(FilterResponse::named(NamedKernel::Lowpass { nu_c: value()? }, (0.0, f64::INFINITY))),
        "constant" => Ok(FilterResponse::constant(value()?)),
        "delta" => Ok(FilterResponse::named(NamedKernel::Delta { nu_star: value()? }, (0.0, f64::INFINITY))),
        "quartic" => Ok(FilterResponse::named(NamedKernel::QuarticDecay { scale: value()? }, (0.0, f64::INFINITY))),
        other => Err(bad(format!("unknown response {other:?}"))),
    }
}

/// Frequencies to sample a realized response at: the spectrum when the
/// graph fits under the dense ceiling, otherwise a uniform grid.
fn sample_points(basis: Option<&SpectralBasis>, interval: [f64; 2]) -> Vec<f64> {
    match basis {
        Some(b) => b.frequencies.to_vec(),
        None => GridSpec { lo: interval[0], hi: interval[1], points: RESPONSE_GRID_POINTS }.sample(),
    }
}

fn maybe_decompose(op: &ReferenceOperator) -> Option<SpectralBasis> {
    if op.n() <= max_dense_n() {
        decompose(op, FrequencyConvention::default()).ok()
    } else {
        None
    }
}

/// Turn a rational response into the matching recursion design; other
/// responses get a least-squares rational fit of the given order.
fn arma_design_for(h: &FilterResponse, fit_order: usize, interval: [f64; 2]) -> Result<ArmaDesign> {
    if let ResponseForm::Rational { num, den } = &h.form {
        let scale = den[0];
        Ok(ArmaDesign {
            a: den[1..].iter().map(|c| c / scale).collect(),
            b: num.iter().map(|c| c / scale).collect(),
            target: h.clone(),
            fit_error: 0.0,
            domain: h.domain,
        })
    } else {
        let p = fit_order.max(1);
        let grid = GridSpec::uniform(interval[0], interval[1]);
        design_arma_shank(h, p, p - 1, &grid)
    }
}

fn run_filter(a: FilterArgs) -> Result<()> {
    ensure_dir(&a.out_dir)?;
    let g = io::read_graph(&a.graph)?;
    let x = io::read_signal(&a.signal)?;
    let op = a.flags.build(&g)?;
    let h = parse_response(&a.response)?;
    let damping = match a.damping {
        CliDamping::None => Damping::None,
        CliDamping::Jackson => Damping::Jackson,
    };

    let (y, metadata, samples, extra) = match a.backend {
        Backend::Exact => {
            let basis = decompose(&op, FrequencyConvention::default())?;
            let y = apply_exact(&basis, &h, &x.view())?;
            let pts = sample_points(Some(&basis), [0.0, basis.lambda_max()]);
            let samples: Vec<(f64, f64)> = pts.iter().map(|&nu| (nu, h.eval(nu))).collect();
            (y, "backend=exact".to_string(), samples, json!({}))
        }
        Backend::Chebyshev => {
            let order = a.order.unwrap_or(50);
            let interval = estimate_spectral_interval(&op, a.flags.seed, POWER_ITERS_CAP)?;
            let plan = ChebyshevPlan::design(&h, order, damping, interval)?;
            let y = chebyshev_filter(&op, &x.view(), &plan)?;
            let basis = maybe_decompose(&op);
            let samples: Vec<(f64, f64)> = sample_points(basis.as_ref(), interval)
                .iter()
                .map(|&nu| (nu, plan.response_at(nu)))
                .collect();
            let damping_name = match a.damping {
                CliDamping::None => "none",
                CliDamping::Jackson => "jackson",
            };
            let metadata = format!(
                "backend=chebyshev order={order} coefficients={} damping={damping_name}",
                order + 1
            );
            (y, metadata, samples, json!({ "spectral_interval": interval.to_vec() }))
        }
        Backend::Lanczos => {
            let plan = LanczosPlan::new(a.krylov_dim, g.n());
            let outcome = lanczos_filter(&op, &h, &x.view(), &plan)?;
            let basis = maybe_decompose(&op);
            let lo_hi = [0.0, basis.as_ref().map_or(2.0, |b| b.lambda_max())];
            let samples: Vec<(f64, f64)> = sample_points(basis.as_ref(), lo_hi)
                .iter()
                .map(|&nu| (nu, h.eval(nu)))
                .collect();
            let metadata = format!(
                "backend=lanczos krylov_dim={} steps={} breakdown={}",
                a.krylov_dim, outcome.steps, outcome.breakdown
            );
            (outcome.y, metadata, samples, json!({ "steps": outcome.steps }))
        }
        Backend::Arma => {
            let interval = estimate_spectral_interval(&op, a.flags.seed, POWER_ITERS_CAP)?;
            let design = arma_design_for(&h, a.order.unwrap_or(4), interval)?;
            let plan = ArmaRecursionPlan::new(&design, interval, a.max_iters, a.tol)?;
            let outcome = arma_recursion_filter(&op, &x.view(), &plan)?;
            let design_path = a.out_dir.join("arma_design.json");
            io::write_arma_design(&design_path, &design.a, &design.b, design.fit_error)?;
            let realized = design.response()?;
            let basis = maybe_decompose(&op);
            let samples: Vec<(f64, f64)> = sample_points(basis.as_ref(), interval)
                .iter()
                .map(|&nu| (nu, realized.eval(nu)))
                .collect();
            let iters: Vec<usize> = outcome.traces.iter().map(|t| t.iters).collect();
            let metadata = format!("backend=arma poles={} max_iters={}", design.a.len(), a.max_iters);
            (
                outcome.y,
                metadata,
                samples,
                json!({
                    "spectral_interval": interval.to_vec(),
                    "fit_error": design.fit_error,
                    "iterations": iters,
                }),
            )
        }
    };

    let filtered_path = a.out_dir.join("filtered.csv");
    io::write_signal(&filtered_path, &y)?;
    let response_path = a.out_dir.join("response.tsv");
    io::emit_response_plot(&response_path, &metadata, &samples)?;

    let body = sidecar_body(
        "filter",
        Some(&a.flags),
        json!({
            "response": io::response_json(&h),
            "backend": metadata,
            "tolerances": { "conv_tol": a.tol },
            "details": extra,
        }),
    );
    io::write_sidecar(&filtered_path, body.clone())?;
    io::write_sidecar(&response_path, body)?;
    Ok(())
}

fn run_sgwt(a: SgwtArgs) -> Result<()> {
    ensure_dir(&a.out_dir)?;
    let g = io::read_graph(&a.graph)?;
    let op = a.flags.build(&g)?;
    let basis = decompose(&op, FrequencyConvention::default())?;
    let design = SgwDesign {
        alpha: a.alpha,
        beta: a.beta,
        lambda1: a.lambda1,
        lambda2: a.lambda2,
        m: a.scales,
    };

    if a.inverse {
        let frame_path = a
            .frame
            .ok_or_else(|| GspError::Unsupported("--inverse needs --frame".into()))?;
        let coeff_path = a
            .coefficients
            .ok_or_else(|| GspError::Unsupported("--inverse needs --coefficients".into()))?;
        let frame = io::read_frame(&frame_path)?;
        let coeffs = io::read_sgwt_coefficients(&coeff_path, &frame)?;
        let y = sgwt_inverse(&basis, &frame, &coeffs)?;
        let out_path = a.out_dir.join("x_hat.csv");
        io::write_signal(&out_path, &y)?;
        let bounds = frame_bounds(&frame, &basis)?;
        let body = sidecar_body(
            "sgwt",
            Some(&a.flags),
            json!({ "mode": "inverse", "frame_bounds": [bounds.a, bounds.b] }),
        );
        io::write_sidecar(&out_path, body)?;
        return Ok(());
    }

    let signal_path = a
        .signal
        .ok_or_else(|| GspError::Unsupported("forward transform needs --signal".into()))?;
    let x = io::read_signal(&signal_path)?;
    let frame = if a.universal {
        design_frame_universal(basis.lambda_max(), &design)?
    } else {
        design_frame(&basis, &design)?
    };
    let coeffs = sgwt_forward(&basis, &frame, &x.view())?;
    let bounds = if a.universal {
        frame_bounds_universal(&frame, basis.lambda_max())
    } else {
        frame_bounds(&frame, &basis)?
    };

    let coeff_path = a.out_dir.join("coefficients.csv");
    io::write_sgwt_coefficients(&coeff_path, &frame, &coeffs)?;
    let frame_path = a.out_dir.join("frame.json");
    io::write_frame(&frame_path, &frame)?;

    let mut extra = json!({
        "mode": "forward",
        "frame_bounds": [bounds.a, bounds.b],
        "scales": frame.scales,
        "universal": a.universal,
    });
    if let Some(w) = &bounds.warning {
        extra["warning"] = json!(w);
    }
    let body = sidecar_body("sgwt", Some(&a.flags), extra);
    io::write_sidecar(&coeff_path, body.clone())?;
    io::write_sidecar(&frame_path, body)?;
    Ok(())
}

fn run_fb(a: FbArgs) -> Result<()> {
    ensure_dir(&a.out_dir)?;
    let g = io::read_graph(&a.graph)?;
    let x = io::read_signal(&a.signal)?;
    let partition = io::require_bipartition(&g)?;
    let opts = OperatorOptions { seed: a.seed, ..Default::default() };
    let op = reference_operator(&g, OperatorKind::Ln, &opts)?;
    let basis = decompose(&op, FrequencyConvention::default())?;
    let folding = spectral_folding_residual(&g, &basis, &partition)?;
    let bank = design_qmf_bank(&basis, partition)?;
    let coeffs = two_channel_analyze(&basis, &bank, &x.view())?;
    let outcome = two_channel_synthesize(&basis, &bank, &coeffs)?;

    let approx_path = a.out_dir.join("approx.csv");
    io::write_labeled_signal(&approx_path, bank.partition.v0(), &coeffs.y0)?;
    let detail_path = a.out_dir.join("detail.csv");
    io::write_labeled_signal(&detail_path, bank.partition.v1(), &coeffs.y1)?;
    let xhat_path = a.out_dir.join("x_hat.csv");
    io::write_signal(&xhat_path, &outcome.x)?;

    let body = sidecar_body(
        "fb",
        None,
        json!({
            "operator": "ln",
            "seed": a.seed,
            "pr_residual": bank.pr_residual,
            "folding_residual": folding,
            "certified": bank.certified,
            "v0_size": bank.partition.v0().len(),
        }),
    );
    io::write_sidecar(&approx_path, body.clone())?;
    io::write_sidecar(&detail_path, body.clone())?;
    io::write_sidecar(&xhat_path, body)?;
    Ok(())
}

fn run_multires(a: MultiresArgs) -> Result<()> {
    if a.reconstruct {
        let archive = a
            .archive
            .ok_or_else(|| GspError::Unsupported("--reconstruct needs --archive".into()))?;
        let (_, decomp, _) = io::read_multires(&archive)?;
        io::check_archive_consistency(&decomp)?;
        let y = multires_reconstruct(&decomp)?;
        ensure_dir(&a.out_dir)?;
        let out_path = a.out_dir.join("x_hat.csv");
        io::write_signal(&out_path, &y)?;
        let body = sidecar_body(
            "multires",
            None,
            json!({ "mode": "reconstruct", "levels": decomp.levels.len(), "seed": a.seed }),
        );
        io::write_sidecar(&out_path, body)?;
        return Ok(());
    }

    let graph_path = a.graph.ok_or_else(|| GspError::Unsupported("decompose needs --graph".into()))?;
    let signal_path = a.signal.ok_or_else(|| GspError::Unsupported("decompose needs --signal".into()))?;
    let g = io::read_graph(&graph_path)?;
    let x = io::read_signal(&signal_path)?;
    let policy = match a.policy {
        CliPolicy::Haar => CascadePolicy::Haar { target_ratio: a.ratio },
        CliPolicy::TwoChannel => CascadePolicy::TwoChannel,
    };
    let decomp = multires_cascade(&g, &x.view(), a.depth, policy)?;
    io::write_multires(&a.out_dir, &g, &decomp, policy)?;
    io::emit_level_plots(&a.out_dir.join("plot"), &decomp)?;

    let policy_name = match a.policy {
        CliPolicy::Haar => "haar",
        CliPolicy::TwoChannel => "two-channel",
    };
    let body = sidecar_body(
        "multires",
        None,
        json!({
            "mode": "decompose",
            "policy": policy_name,
            "depth": a.depth,
            "coefficients": decomp.coefficient_count(),
            "seed": a.seed,
        }),
    );
    for (k, _) in decomp.levels.iter().enumerate() {
        let sub = a.out_dir.join(format!("level_{k}"));
        io::write_sidecar(&sub.join("approx.csv"), body.clone())?;
        io::write_sidecar(&sub.join("details.csv"), body.clone())?;
    }
    Ok(())
}
