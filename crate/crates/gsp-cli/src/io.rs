//! File formats: graph edge lists, signal and coefficient CSVs, frame and
//! design descriptors, multiresolution archives, plot data and metadata
//! sidecars. Floats are printed at 17 significant digits so every payload
//! round-trips bit-for-bit.

use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde_json::{json, Value};

use gsp_core::filterbank::{
    bipartition_check, design_qmf_bank, haar_matrix, two_channel_analysis_matrix, Bipartiteness,
    CascadePolicy, LevelPartition, MultiresDecomposition, MultiresLevel, NodePartition2,
    SupernodePartition,
};
use gsp_core::sgwt::{sgw_kernel, SgwCoefficients, WaveletFrame};
use gsp_core::spectral::{decompose, FrequencyConvention};
use gsp_core::{
    reference_operator, FilterResponse, Graph, GspError, NamedKernel, OperatorKind,
    OperatorOptions, ResponseForm, Result,
};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn perr(line: usize, message: impl Into<String>) -> GspError {
    GspError::Parse { line, message: message.into() }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| perr(line, format!("expected a number, got {s:?}")))
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| perr(line, format!("expected a nonnegative integer, got {s:?}")))
}

// ---------------------------------------------------------------------------
// Graph edge lists
// ---------------------------------------------------------------------------

/// One edge per line `src<TAB>dst<TAB>weight`; `#` starts a comment; header
/// lines `directed=true|false` (default false) and `n=<count>` (for
/// isolated trailing nodes) may precede the edges.
pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    let mut directed = false;
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("directed=") {
            directed = match rest.trim() {
                "true" => true,
                "false" => false,
                other => return Err(perr(line, format!("directed must be true or false, got {other:?}"))),
            };
            continue;
        }
        if let Some(rest) = content.strip_prefix("n=") {
            n = Some(parse_usize(rest, line)?);
            continue;
        }
        let fields: Vec<&str> = content.split('\t').collect();
        if fields.len() != 3 {
            return Err(perr(line, format!("expected src<TAB>dst<TAB>weight, got {} fields", fields.len())));
        }
        let src = parse_usize(fields[0], line)?;
        let dst = parse_usize(fields[1], line)?;
        let weight = parse_f64(fields[2], line)?;
        edges.push((src, dst, weight));
    }
    Graph::build_opts(n, &edges, directed, false)
}

pub fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("directed={}\n", g.directed()));
    out.push_str(&format!("n={}\n", g.n()));
    for (u, v, w) in g.edges() {
        out.push_str(&format!("{u}\t{v}\t{}\n", fmt_f64(w)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Signal CSVs
// ---------------------------------------------------------------------------

/// CSV with header `node,value`, one row per node; rows may arrive in any
/// order but must cover 0..n-1 exactly once.
pub fn read_signal(path: &Path) -> Result<Array1<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "node,value" => {}
        Some((_, header)) => return Err(perr(1, format!("expected header node,value, got {header:?}"))),
        None => return Err(perr(1, "empty signal file")),
    }
    let mut pairs = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        let (node, value) = content
            .split_once(',')
            .ok_or_else(|| perr(line, "expected node,value"))?;
        pairs.push((parse_usize(node, line)?, parse_f64(value, line)?, line));
    }
    let n = pairs.len();
    let mut x = Array1::zeros(n);
    let mut seen = vec![false; n];
    for (node, value, line) in pairs {
        if node >= n || seen[node] {
            return Err(perr(line, format!("node {node} repeated or out of range for {n} rows")));
        }
        seen[node] = true;
        x[node] = value;
    }
    Ok(x)
}

pub fn write_signal(path: &Path, x: &Array1<f64>) -> Result<()> {
    let mut out = String::from("node,value\n");
    for (i, v) in x.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_f64(*v)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Like write_signal but with caller-chosen node labels (restrictions onto
/// one side of a partition keep their original ids).
pub fn write_labeled_signal(path: &Path, labels: &[usize], values: &Array1<f64>) -> Result<()> {
    let mut out = String::from("node,value\n");
    for (&i, v) in labels.iter().zip(values.iter()) {
        out.push_str(&format!("{i},{}\n", fmt_f64(*v)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// GFT CSVs
// ---------------------------------------------------------------------------

pub fn write_gft(path: &Path, frequencies: &Array1<f64>, coefficients: &Array1<Complex64>) -> Result<()> {
    let mut out = String::from("k,frequency,coefficient_real,coefficient_imag\n");
    for (k, (nu, c)) in frequencies.iter().zip(coefficients.iter()).enumerate() {
        out.push_str(&format!("{k},{},{},{}\n", fmt_f64(*nu), fmt_f64(c.re), fmt_f64(c.im)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
pub fn read_gft(path: &Path) -> Result<(Array1<f64>, Array1<Complex64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "k,frequency,coefficient_real,coefficient_imag" => {}
        other => return Err(perr(1, format!("bad GFT header: {:?}", other.map(|(_, h)| h)))),
    }
    let mut freqs = Vec::new();
    let mut coeffs = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(perr(line, "expected k,frequency,coefficient_real,coefficient_imag"));
        }
        let k = parse_usize(fields[0], line)?;
        if k != freqs.len() {
            return Err(perr(line, format!("row index {k} out of order")));
        }
        freqs.push(parse_f64(fields[1], line)?);
        coeffs.push(Complex64::new(parse_f64(fields[2], line)?, parse_f64(fields[3], line)?));
    }
    Ok((Array1::from(freqs), Array1::from(coeffs)))
}

// ---------------------------------------------------------------------------
// Wavelet coefficient CSVs and frame descriptors
// ---------------------------------------------------------------------------

/// CSV `channel,scale,node,value` with channel in {scaling, wavelet};
/// scaling rows carry scale 0.
pub fn write_sgwt_coefficients(path: &Path, frame: &WaveletFrame, coeffs: &SgwCoefficients) -> Result<()> {
    let mut out = String::from("channel,scale,node,value\n");
    for (i, v) in coeffs.scaling.iter().enumerate() {
        out.push_str(&format!("scaling,{},{i},{}\n", fmt_f64(0.0), fmt_f64(*v)));
    }
    for (j, &s) in frame.scales.iter().enumerate() {
        for (i, v) in coeffs.wavelet.row(j).iter().enumerate() {
            out.push_str(&format!("wavelet,{},{i},{}\n", fmt_f64(s), fmt_f64(*v)));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_sgwt_coefficients(path: &Path, frame: &WaveletFrame) -> Result<SgwCoefficients> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "channel,scale,node,value" => {}
        other => return Err(perr(1, format!("bad coefficient header: {:?}", other.map(|(_, h)| h)))),
    }
    let mut scaling: Vec<(usize, f64)> = Vec::new();
    let mut wavelet: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(perr(line, "expected channel,scale,node,value"));
        }
        let scale = parse_f64(fields[1], line)?;
        let node = parse_usize(fields[2], line)?;
        let value = parse_f64(fields[3], line)?;
        match fields[0].trim() {
            "scaling" => scaling.push((node, value)),
            "wavelet" => {
                let j = frame
                    .scales
                    .iter()
                    .position(|&s| s == scale)
                    .ok_or_else(|| perr(line, format!("scale {scale:e} is not in the frame")))?;
                wavelet.push((j, node, value));
            }
            other => return Err(perr(line, format!("unknown channel {other:?}"))),
        }
    }
    let n = scaling.len();
    let mut sc = Array1::zeros(n);
    let mut seen = vec![false; n];
    for (node, value) in scaling {
        if node >= n || seen[node] {
            return Err(perr(0, format!("scaling node {node} repeated or out of range")));
        }
        seen[node] = true;
        sc[node] = value;
    }
    let mut wv = Array2::zeros((frame.scales.len(), n));
    let mut filled = vec![false; frame.scales.len() * n];
    for (j, node, value) in wavelet {
        if node >= n || filled[j * n + node] {
            return Err(perr(0, format!("wavelet entry ({j}, {node}) repeated or out of range")));
        }
        filled[j * n + node] = true;
        wv[(j, node)] = value;
    }
    if !filled.iter().all(|&f| f) {
        return Err(perr(0, "missing wavelet coefficients"));
    }
    Ok(SgwCoefficients { wavelet: wv, scaling: sc, frame_id: frame.id() })
}

/// JSON descriptor {alpha, beta, lambda1, lambda2, scales[], lowpass} where
/// lowpass is the width of the quartic-decay scaling kernel.
pub fn write_frame(path: &Path, frame: &WaveletFrame) -> Result<()> {
    let lowpass = match frame.lowpass.form {
        ResponseForm::Named(NamedKernel::QuarticDecay { scale }) => scale,
        _ => {
            return Err(GspError::Unsupported(
                "only quartic-decay low-pass frames are serializable".into(),
            ))
        }
    };
    let v = json!({
        "alpha": frame.kernel.alpha,
        "beta": frame.kernel.beta,
        "lambda1": frame.kernel.lambda1,
        "lambda2": frame.kernel.lambda2,
        "scales": frame.scales,
        "lowpass": lowpass,
    });
    std::fs::write(path, serde_json::to_string_pretty(&v).map_err(|e| GspError::Io(e.into()))?)?;
    Ok(())
}

fn from_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| perr(e.line(), e.to_string()))
}

fn jf64(v: &Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| perr(0, format!("missing or non-numeric field {key:?}")))
}

fn jf64_array(v: &Value, key: &str) -> Result<Vec<f64>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| perr(0, format!("missing array field {key:?}")))?
        .iter()
        .map(|e| e.as_f64().ok_or_else(|| perr(0, format!("non-numeric entry in {key:?}"))))
        .collect()
}

fn jusize_matrix(v: &Value, key: &str) -> Result<Vec<Vec<usize>>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| perr(0, format!("missing array field {key:?}")))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| perr(0, format!("non-array entry in {key:?}")))?
                .iter()
                .map(|e| {
                    e.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| perr(0, format!("non-integer entry in {key:?}")))
                })
                .collect()
        })
        .collect()
}

fn jusize_array(v: &Value, key: &str) -> Result<Vec<usize>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| perr(0, format!("missing array field {key:?}")))?
        .iter()
        .map(|e| {
            e.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| perr(0, format!("non-integer entry in {key:?}")))
        })
        .collect()
}

/// Rebuild a frame from its descriptor; the result is universal (not bound
/// to any basis) since ids do not survive a process boundary.
pub fn read_frame(path: &Path) -> Result<WaveletFrame> {
    let v = from_json(&std::fs::read_to_string(path)?)?;
    let kernel = sgw_kernel(jf64(&v, "alpha")?, jf64(&v, "beta")?, jf64(&v, "lambda1")?, jf64(&v, "lambda2")?)?;
    let scales = jf64_array(&v, "scales")?;
    let lowpass = FilterResponse::named(
        NamedKernel::QuarticDecay { scale: jf64(&v, "lowpass")? },
        (0.0, f64::INFINITY),
    );
    Ok(WaveletFrame::custom(scales, kernel, lowpass, None))
}

// ---------------------------------------------------------------------------
// Filter response and ARMA design descriptors
// ---------------------------------------------------------------------------

fn domain_json(domain: (f64, f64)) -> Value {
    let hi = if domain.1.is_finite() { json!(domain.1) } else { Value::Null };
    json!([domain.0, hi])
}

/// JSON {form, params, domain}; an infinite upper domain endpoint is null.
#[cfg(test)]
pub fn write_response(path: &Path, h: &FilterResponse) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&response_json(h)).map_err(|e| GspError::Io(e.into()))?)?;
    Ok(())
}

pub fn response_json(h: &FilterResponse) -> Value {
    let (form, params) = match &h.form {
        ResponseForm::Tabulated(pairs) => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            ("tabulated", json!({ "lambdas": xs, "values": ys }))
        }
        ResponseForm::Polynomial(c) => ("polynomial", json!({ "coefficients": c })),
        ResponseForm::Rational { num, den } => ("rational", json!({ "num": num, "den": den })),
        ResponseForm::Named(k) => match *k {
            NamedKernel::Heat { nu0 } => ("heat", json!({ "nu0": nu0 })),
            NamedKernel::Lowpass { nu_c } => ("lowpass", json!({ "nu_c": nu_c })),
            NamedKernel::Constant { c } => ("constant", json!({ "c": c })),
            NamedKernel::Delta { nu_star } => ("delta", json!({ "nu_star": nu_star })),
            NamedKernel::QuarticDecay { scale } => ("quartic", json!({ "scale": scale })),
            NamedKernel::QmfLow => ("qmf-low", json!({})),
            NamedKernel::QmfHigh => ("qmf-high", json!({})),
        },
    };
    json!({ "form": form, "params": params, "domain": domain_json(h.domain) })
}

#[cfg(test)]
pub fn read_response(path: &Path) -> Result<FilterResponse> {
    let v = from_json(&std::fs::read_to_string(path)?)?;
    let domain_v = v
        .get("domain")
        .and_then(Value::as_array)
        .ok_or_else(|| perr(0, "missing domain"))?;
    if domain_v.len() != 2 {
        return Err(perr(0, "domain must have two entries"));
    }
    let lo = domain_v[0].as_f64().ok_or_else(|| perr(0, "non-numeric domain start"))?;
    let hi = if domain_v[1].is_null() {
        f64::INFINITY
    } else {
        domain_v[1].as_f64().ok_or_else(|| perr(0, "non-numeric domain end"))?
    };
    let domain = (lo, hi);
    let form = v.get("form").and_then(Value::as_str).ok_or_else(|| perr(0, "missing form"))?;
    let params = v.get("params").cloned().unwrap_or(Value::Null);
    match form {
        "tabulated" => {
            let xs = jf64_array(&params, "lambdas")?;
            let ys = jf64_array(&params, "values")?;
            if xs.len() != ys.len() {
                return Err(perr(0, "lambdas and values differ in length"));
            }
            FilterResponse::tabulated(xs.into_iter().zip(ys).collect(), domain)
        }
        "polynomial" => Ok(FilterResponse {
            form: ResponseForm::Polynomial(jf64_array(&params, "coefficients")?),
            domain,
        }),
        "rational" => FilterResponse::rational(jf64_array(&params, "num")?, jf64_array(&params, "den")?, domain),
        "heat" => Ok(FilterResponse::named(NamedKernel::Heat { nu0: jf64(&params, "nu0")? }, domain)),
        "lowpass" => Ok(FilterResponse::named(NamedKernel::Lowpass { nu_c: jf64(&params, "nu_c")? }, domain)),
        "constant" => Ok(FilterResponse::named(NamedKernel::Constant { c: jf64(&params, "c")? }, domain)),
        "delta" => Ok(FilterResponse::named(NamedKernel::Delta { nu_star: jf64(&params, "nu_star")? }, domain)),
        "quartic" => Ok(FilterResponse::named(NamedKernel::QuarticDecay { scale: jf64(&params, "scale")? }, domain)),
        "qmf-low" => Ok(FilterResponse::named(NamedKernel::QmfLow, domain)),
        "qmf-high" => Ok(FilterResponse::named(NamedKernel::QmfHigh, domain)),
        other => Err(perr(0, format!("unknown response form {other:?}"))),
    }
}

/// JSON {a, b, fit_error} of a rational design.
pub fn write_arma_design(path: &Path, a: &[f64], b: &[f64], fit_error: f64) -> Result<()> {
    let v = json!({ "a": a, "b": b, "fit_error": fit_error });
    std::fs::write(path, serde_json::to_string_pretty(&v).map_err(|e| GspError::Io(e.into()))?)?;
    Ok(())
}

#[cfg(test)]
pub fn read_arma_design(path: &Path) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let v = from_json(&std::fs::read_to_string(path)?)?;
    Ok((jf64_array(&v, "a")?, jf64_array(&v, "b")?, jf64(&v, "fit_error")?))
}

// ---------------------------------------------------------------------------
// Multiresolution archives
// ---------------------------------------------------------------------------

fn write_indexed_csv(path: &Path, header: &str, values: &Array1<f64>) -> Result<()> {
    let mut out = format!("{header}\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_f64(*v)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn read_indexed_csv(path: &Path, header: &str) -> Result<Array1<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        other => return Err(perr(1, format!("expected header {header:?}, got {:?}", other.map(|(_, h)| h)))),
    }
    let mut values = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (k, value) = raw.split_once(',').ok_or_else(|| perr(line, format!("expected {header}")))?;
        if parse_usize(k, line)? != values.len() {
            return Err(perr(line, "row index out of order"));
        }
        values.push(parse_f64(value, line)?);
    }
    Ok(Array1::from(values))
}

fn partition_json(partition: &LevelPartition) -> Value {
    match partition {
        LevelPartition::Supernodes(p) => json!({ "type": "supernodes", "subsets": p.subsets() }),
        LevelPartition::Bipartition(p) => json!({ "type": "bipartition", "v0": p.v0(), "v1": p.v1() }),
    }
}

/// Layout: `graph.tsv`, `meta.json`, then per level `level_k/` holding
/// `coarse_graph.tsv`, `approx.csv`, `details.csv`, `partition.json`.
pub fn write_multires(dir: &Path, g: &Graph, decomp: &MultiresDecomposition, policy: CascadePolicy) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_graph(&dir.join("graph.tsv"), g)?;
    let policy_v = match policy {
        CascadePolicy::Haar { target_ratio } => json!({ "policy": "haar", "target_ratio": target_ratio }),
        CascadePolicy::TwoChannel => json!({ "policy": "two-channel" }),
    };
    let meta = json!({
        "depth": decomp.levels.len(),
        "n": decomp.n,
        "analysis": policy_v,
    });
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta).map_err(|e| GspError::Io(e.into()))?)?;
    for (k, level) in decomp.levels.iter().enumerate() {
        let sub = dir.join(format!("level_{k}"));
        std::fs::create_dir_all(&sub)?;
        write_graph(&sub.join("coarse_graph.tsv"), &level.coarse)?;
        write_indexed_csv(&sub.join("approx.csv"), "node,value", &level.approx)?;
        write_indexed_csv(&sub.join("details.csv"), "k,value", &level.details)?;
        std::fs::write(
            sub.join("partition.json"),
            serde_json::to_string_pretty(&partition_json(&level.partition)).map_err(|e| GspError::Io(e.into()))?,
        )?;
    }
    Ok(())
}

fn rebuild_level(input: &Graph, partition_v: &Value) -> Result<(Array2<f64>, LevelPartition)> {
    match partition_v.get("type").and_then(Value::as_str) {
        Some("supernodes") => {
            let subsets = jusize_matrix(partition_v, "subsets")?;
            let part = SupernodePartition::new(input, subsets)?;
            let matrix = haar_matrix(&part, input.n());
            Ok((matrix, LevelPartition::Supernodes(part)))
        }
        Some("bipartition") => {
            let part = NodePartition2::new(
                input.n(),
                jusize_array(partition_v, "v0")?,
                jusize_array(partition_v, "v1")?,
            )?;
            let op = reference_operator(input, OperatorKind::Ln, &OperatorOptions::default())?;
            let basis = decompose(&op, FrequencyConvention::default())?;
            let bank = design_qmf_bank(&basis, part.clone())?;
            let matrix = two_channel_analysis_matrix(&basis, &bank)?;
            Ok((matrix, LevelPartition::Bipartition(part)))
        }
        other => Err(perr(0, format!("unknown partition type {other:?}"))),
    }
}

/// Read an archive back, rebuilding the per-level analysis matrices from
/// the stored partitions and graphs.
pub fn read_multires(dir: &Path) -> Result<(Graph, MultiresDecomposition, CascadePolicy)> {
    let g = read_graph(&dir.join("graph.tsv"))?;
    let meta = from_json(&std::fs::read_to_string(dir.join("meta.json"))?)?;
    let depth = meta
        .get("depth")
        .and_then(Value::as_u64)
        .ok_or_else(|| perr(0, "missing depth"))? as usize;
    let analysis = meta.get("analysis").cloned().unwrap_or(Value::Null);
    let policy = match analysis.get("policy").and_then(Value::as_str) {
        Some("haar") => CascadePolicy::Haar { target_ratio: jf64(&analysis, "target_ratio")? },
        Some("two-channel") => CascadePolicy::TwoChannel,
        other => return Err(perr(0, format!("unknown policy {other:?}"))),
    };
    let mut levels = Vec::with_capacity(depth);
    let mut input = g.clone();
    for k in 0..depth {
        let sub = dir.join(format!("level_{k}"));
        let coarse = read_graph(&sub.join("coarse_graph.tsv"))?;
        let approx = read_indexed_csv(&sub.join("approx.csv"), "node,value")?;
        let details = read_indexed_csv(&sub.join("details.csv"), "k,value")?;
        let partition_v = from_json(&std::fs::read_to_string(sub.join("partition.json"))?)?;
        let (analysis, partition) = rebuild_level(&input, &partition_v)?;
        levels.push(MultiresLevel { coarse: coarse.clone(), approx, details, analysis, partition });
        input = coarse;
    }
    let n = g.n();
    Ok((g, MultiresDecomposition { levels, n }, policy))
}

/// Verify that the stored partition regenerates under its policy; a cheap
/// tamper check before reconstruction.
pub fn check_archive_consistency(decomp: &MultiresDecomposition) -> Result<()> {
    let mut expected = decomp.n;
    for (k, level) in decomp.levels.iter().enumerate() {
        let produced = level.approx.len() + level.details.len();
        if produced != expected {
            return Err(GspError::DimensionMismatch { expected, got: produced });
        }
        if level.approx.len() != level.coarse.n() {
            return Err(perr(0, format!("level {k} approximation does not match its coarse graph")));
        }
        expected = level.approx.len();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Plot data and sidecars
// ---------------------------------------------------------------------------

/// Spectrum scatter (nu, |xhat|), one TSV row per frequency.
pub fn emit_spectrum_plot(path: &Path, frequencies: &Array1<f64>, coefficients: &Array1<Complex64>) -> Result<()> {
    let mut out = String::from("# frequency\tmagnitude\n");
    for (nu, c) in frequencies.iter().zip(coefficients.iter()) {
        out.push_str(&format!("{}\t{}\n", fmt_f64(*nu), fmt_f64(c.norm())));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Realized response samples with a leading metadata line describing the
/// backend (for polynomial backends: order and coefficient count).
pub fn emit_response_plot(path: &Path, metadata: &str, samples: &[(f64, f64)]) -> Result<()> {
    let mut out = format!("# {metadata}\n# frequency\tresponse\n");
    for (nu, h) in samples {
        out.push_str(&format!("{}\t{}\n", fmt_f64(*nu), fmt_f64(*h)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One approximation TSV per level of a decomposition.
pub fn emit_level_plots(dir: &Path, decomp: &MultiresDecomposition) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (k, level) in decomp.levels.iter().enumerate() {
        let mut out = String::from("# node\tapproximation\n");
        for (i, v) in level.approx.iter().enumerate() {
            out.push_str(&format!("{i}\t{}\n", fmt_f64(*v)));
        }
        std::fs::write(dir.join(format!("level_{k}_approx.tsv")), out)?;
    }
    Ok(())
}

/// `<file>.meta.json` next to a numeric output, recording the command, the
/// operator kind, tolerances and versions.
pub fn write_sidecar(data_path: &Path, body: Value) -> Result<()> {
    let mut meta = body;
    meta["versions"] = json!({ "gsp-core": gsp_core::VERSION, "gsp-cli": env!("CARGO_PKG_VERSION") });
    let mut name = data_path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    let path = data_path.with_file_name(name);
    std::fs::write(path, serde_json::to_string_pretty(&meta).map_err(|e| GspError::Io(e.into()))?)?;
    Ok(())
}

/// Shared helper for commands: detect bipartiteness or fail with the
/// odd-cycle certificate.
pub fn require_bipartition(g: &Graph) -> Result<NodePartition2> {
    match bipartition_check(g)? {
        Bipartiteness::Bipartite(p) => Ok(p),
        Bipartiteness::OddCycle(cycle) => Err(GspError::NotBipartite { cycle }),
    }
}
