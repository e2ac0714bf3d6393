//! Graph signal processing on weighted graphs: reference operators, graph
//! Fourier transforms, spectral filter design, fast polynomial and rational
//! filtering, spectral graph wavelets and two-channel filterbanks.

pub mod error;
pub mod fast;
pub mod filter;
pub mod filterbank;
pub mod graph;
pub mod linalg;
pub mod operator;
pub(crate) mod poly;
pub mod sgwt;
pub mod spectral;

/// Crate version, recorded in output metadata by downstream tools.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{GspError, Result};
pub use fast::{
    arma_recursion_filter, chebyshev_filter, estimate_spectral_interval, lanczos_filter,
    ArmaOutcome, ArmaRecursionPlan, ArmaTerm, ChebyshevPlan, CountingOp, Damping, LanczosOutcome,
    LanczosPlan, MatVec,
};
pub use graph::{DegreeVector, Graph};
pub use operator::{
    reference_operator, spectral_norm, stationary_distribution, OperatorKind, OperatorOptions,
    ReferenceOperator, StationaryDistribution, StationaryMode,
};
pub use filter::{
    apply_exact, commutation_check, design_arma_graph_dependent, design_arma_shank,
    filter_matrix, fit_ar_predictor, fit_ar_yule_walker, poly_equivalence_oracle,
    tikhonov_response, ArFit, ArmaDesign, FilterMatrix, FilterResponse, GridSpec, NamedKernel,
    ResponseForm,
};
pub use filterbank::{
    bipartition_check, coarse_graph, custom_bank, design_qmf_bank, haar_analysis, haar_matrix,
    kron_reduce,
    multires_cascade, multires_reconstruct, partition_by_matching, polarity_bipartition,
    qmf_responses, spectral_folding_residual, two_channel_analysis_matrix, two_channel_analyze,
    two_channel_synthesize,
    Bipartiteness, CascadePolicy, HaarAnalysis, LevelPartition, MultiresDecomposition,
    MultiresLevel, NodePartition2, SamplerJ, SupernodePartition, SynthesisOutcome,
    TwoChannelBank, TwoChannelCoefficients,
};
pub use sgwt::{
    design_frame, design_frame_universal, frame_bounds, frame_bounds_universal, sgw_kernel,
    sgwt_forward, sgwt_inverse, wavelet_atom, FrameBounds, SgwCoefficients, SgwDesign, SgwKernel,
    WaveletFrame,
};
pub use spectral::{
    decompose, dirichlet_form, frequency_analysis, gft, inverse_gft, total_variation,
    FrequencyConvention, SpectralBasis,
};
