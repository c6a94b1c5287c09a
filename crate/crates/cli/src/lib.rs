//! Batch commands behind the `sdi-duality` binary.
//!
//! Every command is a pure function from its parameters to an output body
//! plus a [`RunManifest`]; the binary only parses flags and writes bytes.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::io::Read;

use sdi_duality::bounds::{
    self, classical_maximum, dv_threshold, p_b_from_duality, security_verdict, QuantumAnsatz, SecurityVerdict,
    SeeSawConfig, IMPROVED_PB_THRESHOLD, ORIGINAL_PB_THRESHOLD,
};
use sdi_duality::dataio::{self, EstimateWithError, ExtremumMode, ScanDataset};
use sdi_duality::exec::Execution;
use sdi_duality::interferometer::{duality_estimate, phi_s_grid};
use sdi_duality::witness::{bb84_preparations, bob_success, duality_witness_max, witness_at};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Witness value reachable by classical two-level messages.
pub const CLASSICAL_BOUND: f64 = 2.0;
/// Largest witness value reachable with qubits.
pub const QUANTUM_BOUND: f64 = 2.0 * SQRT_2;
/// `phi_x` grid used by `scan` before golden-section refinement.
pub const SCAN_POINTS: usize = 64;
/// Margin applied when flagging `D + V` against a threshold, so that
/// rounding at the boundary does not produce a spurious flag.
pub const FLAG_MARGIN: f64 = 1e-9;

pub const SCAN_HEADER: &str =
    "phi_s,D,V,S_half,classical_bound,sec_original,sec_improved,violates_classical,secure_original,secure_improved";
pub const ANALYZE_HEADER: &str = "phi_s,D,D_sigma,V,V_sigma,S_half,S_half_sigma,p_b,phi_x_settings,\
violates_classical,secure_original,secure_improved";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] sdi_duality::Error),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io(_) => 2,
            CliError::Certification(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Lower-case hex SHA-256 of the output bytes.
    pub output_sha256: String,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub body: String,
    pub manifest: RunManifest,
}

fn finish(command: &str, parameters: Value, seed: Option<u64>, body: String) -> CommandOutput {
    let manifest = RunManifest {
        command: command.to_string(),
        parameters,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        output_sha256: sha256_hex(body.as_bytes()),
    };
    CommandOutput { body, manifest }
}

fn to_json_body<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn require_json(format: Format, command: &str) -> CliResult<()> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(format!("{command} emits a JSON report; --format csv is not supported"))),
    }
}

fn require_finite(name: &str, x: f64) -> CliResult<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be finite, got {x}")))
    }
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

// ---------------------------------------------------------------- scan

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub phi_s: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "S_half")]
    pub s_half: f64,
    pub classical_bound: f64,
    pub sec_original: f64,
    pub sec_improved: f64,
    pub violates_classical: bool,
    pub secure_original: bool,
    pub secure_improved: bool,
}

/// Model-level `D`, `V` and `S/2 = D + V` over a uniform TBS grid.
pub fn scan_rows(phi_s_min: f64, phi_s_max: f64, steps: usize) -> CliResult<Vec<ScanRow>> {
    require_finite("--phi-s-min", phi_s_min)?;
    require_finite("--phi-s-max", phi_s_max)?;
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    if !(phi_s_min < phi_s_max) {
        return Err(CliError::Usage(format!(
            "empty range: --phi-s-min {phi_s_min} must be below --phi-s-max {phi_s_max}"
        )));
    }
    let sec_original = dv_threshold(ORIGINAL_PB_THRESHOLD);
    let sec_improved = dv_threshold(IMPROVED_PB_THRESHOLD);
    let grid = phi_s_grid(phi_s_min, phi_s_max, steps);
    let rows = Execution::Parallel.map_slice(&grid, |&phi_s| -> CliResult<ScanRow> {
        let est = duality_estimate(phi_s, SCAN_POINTS)?;
        let s_half = est.d_mean + est.v_mean;
        Ok(ScanRow {
            phi_s,
            d: est.d_mean,
            v: est.v_mean,
            s_half,
            classical_bound: CLASSICAL_BOUND / 2.0,
            sec_original,
            sec_improved,
            violates_classical: s_half > CLASSICAL_BOUND / 2.0 + FLAG_MARGIN,
            secure_original: s_half > sec_original + FLAG_MARGIN,
            secure_improved: s_half > sec_improved + FLAG_MARGIN,
        })
    });
    rows.into_iter().collect()
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.phi_s,
            r.d,
            r.v,
            r.s_half,
            r.classical_bound,
            r.sec_original,
            r.sec_improved,
            flag(r.violates_classical),
            flag(r.secure_original),
            flag(r.secure_improved)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn cmd_scan(phi_s_min: f64, phi_s_max: f64, steps: usize, format: Format) -> CliResult<CommandOutput> {
    let rows = scan_rows(phi_s_min, phi_s_max, steps)?;
    let body = match format {
        Format::Csv => scan_csv(&rows),
        Format::Json => to_json_body(&rows),
    };
    let params = json!({
        "phi_s_min": phi_s_min,
        "phi_s_max": phi_s_max,
        "steps": steps,
        "scan_points": SCAN_POINTS,
        "format": format.as_str(),
    });
    Ok(finish("scan", params, None, body))
}

// ---------------------------------------------------- verify-classical

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalReport {
    pub max: f64,
    pub argmax_encoder: [u8; 4],
    pub argmax_decoder: [[u8; 2]; 2],
    pub strategies: usize,
    pub bound: f64,
    pub certified: bool,
}

pub fn verify_classical_report() -> ClassicalReport {
    let cert = classical_maximum();
    ClassicalReport {
        max: cert.max,
        argmax_encoder: cert.argmax.encoder,
        argmax_decoder: cert.argmax.decoder,
        strategies: cert.strategies,
        bound: CLASSICAL_BOUND,
        certified: cert.max == CLASSICAL_BOUND && cert.strategies == bounds::CLASSICAL_STRATEGY_COUNT,
    }
}

/// Fails with [`CliError::Certification`] unless the enumeration yields
/// exactly 2 over all 256 strategies. The report is returned either way.
pub fn cmd_verify_classical(format: Format) -> (CommandOutput, CliResult<()>) {
    let report = verify_classical_report();
    let status = if report.certified {
        Ok(())
    } else {
        Err(CliError::Certification(format!(
            "classical maximum {} over {} strategies, expected {} over {}",
            report.max,
            report.strategies,
            CLASSICAL_BOUND,
            bounds::CLASSICAL_STRATEGY_COUNT
        )))
    };
    let out = finish("verify-classical", json!({ "format": format.as_str() }), None, to_json_body(&report));
    (out, status)
}

// ---------------------------------------------------- optimize-quantum

#[derive(Debug, Clone, Serialize)]
pub struct QuantumReport {
    pub value: f64,
    pub tsirelson: f64,
    pub gap: f64,
    pub ansatz: QuantumAnsatz,
    pub seed: u64,
    pub restarts: usize,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
    pub trace_length: usize,
    pub converged: bool,
    /// No restart exceeds the qubit bound by more than 1e-9.
    pub within_bound: bool,
    /// The best restart reached the qubit bound within 1e-6.
    pub reached_bound: bool,
}

pub fn optimize_quantum_report(seed: u64, restarts: usize) -> CliResult<QuantumReport> {
    if restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    let opt = bounds::quantum_maximum_with(seed, restarts, &SeeSawConfig::default(), Execution::Parallel)?;
    let within_bound = opt.restart_values.iter().all(|&v| v <= QUANTUM_BOUND + 1e-9);
    Ok(QuantumReport {
        value: opt.value,
        tsirelson: QUANTUM_BOUND,
        gap: QUANTUM_BOUND - opt.value,
        ansatz: opt.ansatz,
        seed,
        restarts,
        best_restart: opt.best_restart,
        trace_length: opt.trace.len(),
        restart_values: opt.restart_values,
        converged: opt.converged,
        within_bound,
        reached_bound: (opt.value - QUANTUM_BOUND).abs() <= 1e-6,
    })
}

pub fn cmd_optimize_quantum(seed: u64, restarts: usize, format: Format) -> CliResult<(CommandOutput, CliResult<()>)> {
    require_json(format, "optimize-quantum")?;
    let report = optimize_quantum_report(seed, restarts)?;
    let status = if !report.within_bound {
        Err(CliError::Certification(format!("a restart exceeded the qubit bound {QUANTUM_BOUND}")))
    } else if !report.reached_bound {
        Err(CliError::Certification(format!("best value {} is not within 1e-6 of {QUANTUM_BOUND}", report.value)))
    } else {
        Ok(())
    };
    let params = json!({ "seed": seed, "restarts": restarts, "format": format.as_str() });
    Ok((finish("optimize-quantum", params, Some(seed), to_json_body(&report)), status))
}

// -------------------------------------------------------------- bounds

/// Exactly one of `p_b` or the pair `(d, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundsInput {
    SuccessProbability(f64),
    Duality { d: f64, v: f64 },
}

impl BoundsInput {
    pub fn from_flags(p_b: Option<f64>, d: Option<f64>, v: Option<f64>) -> CliResult<Self> {
        match (p_b, d, v) {
            (Some(p), None, None) => Ok(BoundsInput::SuccessProbability(p)),
            (None, Some(d), Some(v)) => Ok(BoundsInput::Duality { d, v }),
            (None, None, None) => Err(CliError::Usage("bounds needs either --pb or both --d and --v".into())),
            (Some(_), _, _) => Err(CliError::Usage("--pb cannot be combined with --d/--v".into())),
            _ => Err(CliError::Usage("--d and --v must be given together".into())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub input: Value,
    #[serde(flatten)]
    pub verdict: SecurityVerdict,
}

pub fn bounds_report(input: BoundsInput) -> CliResult<BoundsReport> {
    let (p_b, input_json) = match input {
        BoundsInput::SuccessProbability(p) => {
            require_finite("--pb", p)?;
            (p, json!({ "p_b": p }))
        }
        BoundsInput::Duality { d, v } => {
            require_finite("--d", d)?;
            require_finite("--v", v)?;
            for (name, x) in [("--d (must lie in [0, 1])", d), ("--v (must lie in [0, 1])", v)] {
                if !(0.0..=1.0).contains(&x) {
                    return Err(CliError::Data(sdi_duality::Error::OutOfDomain { what: name, value: x }));
                }
            }
            (p_b_from_duality(d, v), json!({ "d": d, "v": v }))
        }
    };
    Ok(BoundsReport { input: input_json, verdict: security_verdict(p_b)? })
}

pub fn cmd_bounds(input: BoundsInput, format: Format) -> CliResult<CommandOutput> {
    require_json(format, "bounds")?;
    let report = bounds_report(input)?;
    let params = json!({ "input": report.input, "format": format.as_str() });
    Ok(finish("bounds", params, None, to_json_body(&report)))
}

// ------------------------------------------------------------- analyze

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyzeRow {
    pub phi_s: f64,
    #[serde(rename = "D")]
    pub d: EstimateWithError,
    #[serde(rename = "V")]
    pub v: EstimateWithError,
    #[serde(rename = "S_half")]
    pub s_half: EstimateWithError,
    pub p_b: f64,
    pub phi_x_settings: usize,
    pub violates_classical: bool,
    pub secure_original: bool,
    pub secure_improved: bool,
}

pub fn analyze_dataset(ds: &ScanDataset, mode: ExtremumMode) -> CliResult<Vec<AnalyzeRow>> {
    let groups = dataio::estimate_groups(ds, mode)?;
    groups
        .into_iter()
        .map(|g| {
            let s_half = EstimateWithError::sum(g.d, g.v);
            let p_b = p_b_from_duality(g.d.value, g.v.value).clamp(0.0, 1.0);
            let verdict = security_verdict(p_b)?;
            Ok(AnalyzeRow {
                phi_s: g.phi_s,
                d: g.d,
                v: g.v,
                s_half,
                p_b,
                phi_x_settings: g.phi_x_settings,
                violates_classical: s_half.value > CLASSICAL_BOUND / 2.0,
                secure_original: verdict.secure_original,
                secure_improved: verdict.secure_improved,
            })
        })
        .collect()
}

pub fn analyze_csv(rows: &[AnalyzeRow]) -> String {
    let mut out = String::from(ANALYZE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.phi_s,
            r.d.value,
            r.d.sigma,
            r.v.value,
            r.v.sigma,
            r.s_half.value,
            r.s_half.sigma,
            r.p_b,
            r.phi_x_settings,
            flag(r.violates_classical),
            flag(r.secure_original),
            flag(r.secure_improved)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, Clone, Serialize)]
struct AnalyzeReport<'a> {
    mode: ExtremumMode,
    records: usize,
    metadata: &'a dataio::ScanMetadata,
    groups: &'a [AnalyzeRow],
}

/// Analyzes scan CSV bytes; `source` only labels the manifest.
pub fn cmd_analyze(input: impl Read, source: &str, mode: ExtremumMode, format: Format) -> CliResult<CommandOutput> {
    let mut bytes = Vec::new();
    let mut input = input;
    input.read_to_end(&mut bytes)?;
    let ds = dataio::parse_scan(bytes.as_slice())?;
    let rows = analyze_dataset(&ds, mode)?;
    let body = match format {
        Format::Csv => analyze_csv(&rows),
        Format::Json => to_json_body(&AnalyzeReport { mode, records: ds.len(), metadata: &ds.metadata, groups: &rows }),
    };
    let params = json!({
        "file": source,
        "input_sha256": sha256_hex(&bytes),
        "mode": mode.as_str(),
        "format": format.as_str(),
    });
    Ok(finish("analyze", params, ds.metadata.seed, body))
}

// ------------------------------------------------------------- witness

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessRow {
    pub phi_s: f64,
    pub phi_x: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub p_b: f64,
    /// Whether `phi_x` was chosen by maximizing `S`.
    pub maximized: bool,
}

/// `S` and `P_B` for the BB84 preparations; maximizes over `phi_x` when it
/// is not given.
pub fn witness_row(phi_s: f64, phi_x: Option<f64>) -> CliResult<WitnessRow> {
    require_finite("--phi-s", phi_s)?;
    let prep = bb84_preparations();
    let (phi_x, s, maximized) = match phi_x {
        Some(x) => {
            require_finite("--phi-x", x)?;
            (x, witness_at(&prep, phi_s, x)?, false)
        }
        None => {
            let r = duality_witness_max(&prep, phi_s)?;
            (r.phi_x_star, r.s_value, true)
        }
    };
    Ok(WitnessRow { phi_s, phi_x, s, p_b: bob_success(s)?, maximized })
}

pub fn cmd_witness(phi_s: f64, phi_x: Option<f64>, format: Format) -> CliResult<CommandOutput> {
    let row = witness_row(phi_s, phi_x)?;
    let body = match format {
        Format::Csv => format!(
            "phi_s,phi_x,S,p_b,maximized\n{},{},{},{},{}\n",
            row.phi_s,
            row.phi_x,
            row.s,
            row.p_b,
            flag(row.maximized)
        ),
        Format::Json => to_json_body(&row),
    };
    let params = json!({ "phi_s": phi_s, "phi_x": phi_x, "format": format.as_str() });
    Ok(finish("witness", params, None, body))
}

// ---------------------------------------------------------- synthesize

/// Poisson-sampled scan CSV for the given TBS settings.
pub fn cmd_synthesize(phi_s: &[f64], settings: usize, mean_total: f64, seed: u64) -> CliResult<CommandOutput> {
    if phi_s.is_empty() {
        return Err(CliError::Usage("synthesize needs at least one --phi-s".into()));
    }
    for &p in phi_s {
        require_finite("--phi-s", p)?;
    }
    if settings < dataio::MIN_PHI_X_SETTINGS {
        return Err(CliError::Usage(format!(
            "--settings must be at least {}, got {settings}",
            dataio::MIN_PHI_X_SETTINGS
        )));
    }
    if !(mean_total.is_finite() && mean_total > 0.0) {
        return Err(CliError::Usage(format!("--mean-total must be positive, got {mean_total}")));
    }
    let ds = dataio::synthesize_sweep(phi_s, &dataio::uniform_phi_x_grid(settings), mean_total, seed)?;
    let mut bytes = Vec::new();
    dataio::write_scan(&ds, &mut bytes)?;
    let body = String::from_utf8(bytes).expect("scan writer emits UTF-8");
    let params = json!({ "phi_s": phi_s, "settings": settings, "mean_total": mean_total, "seed": seed });
    Ok(finish("synthesize", params, Some(seed), body))
}
