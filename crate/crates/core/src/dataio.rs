//! Photon-count scan data: CSV ingestion, synthetic generation from the
//! interferometer model, and estimation of `D` and `V` with Poisson errors.
//!
//! CSV layout (header required, `#` lines are comments):
//!
//! ```text
//! # source: synthetic
//! phi_x,phi_s,block,counts_d0,counts_d1
//! 0,0.7853981633974483,none,5012,4979
//! ```
//!
//! Comments of the form `# key: value` with keys `source`,
//! `mean_photon_number`, `mean_total` and `seed` carry dataset metadata.
//!
//! For a ratio `r = (a − b)/(a + b)` of independent Poisson counts the
//! first-order error is `σ(r) = 2√(ab(a + b))/(a + b)²`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::exec::Execution;
use crate::interferometer::{propagate, Block, InterferometerConfig};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["phi_x", "phi_s", "block", "counts_d0", "counts_d1"];

/// Minimum number of distinct `phi_x` settings in an unblocked group.
pub const MIN_PHI_X_SETTINGS: usize = 8;
/// Default number of `phi_x` settings for synthetic scans.
pub const DEFAULT_PHI_X_SETTINGS: usize = 64;
/// Default expected total counts per setting for synthetic scans.
pub const DEFAULT_MEAN_TOTAL: f64 = 1e4;
/// Mean photon number per pulse of the reference source (metadata only).
pub const REFERENCE_MEAN_PHOTON_NUMBER: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub phi_x: f64,
    pub phi_s: f64,
    pub block: Block,
    pub counts_d0: u64,
    pub counts_d1: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ScanMetadata {
    pub source: Option<String>,
    pub mean_photon_number: Option<f64>,
    pub mean_total: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ScanDataset {
    pub records: Vec<ScanRecord>,
    pub metadata: ScanMetadata,
}

impl ScanDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct TBS settings, ascending.
    pub fn phi_s_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.records.iter().map(|r| r.phi_s).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| a.to_bits() == b.to_bits());
        v
    }

    /// Records sharing one exact `phi_s` value.
    pub fn group(&self, phi_s: f64) -> impl Iterator<Item = &ScanRecord> {
        self.records.iter().filter(move |r| r.phi_s.to_bits() == phi_s.to_bits())
    }
}

fn parse_error(row: usize, message: impl Into<String>) -> Error {
    Error::Parse { row, message: message.into() }
}

fn parse_phase(row: usize, field: &str, raw: &str) -> Result<f64> {
    let v: f64 =
        raw.parse().map_err(|_| parse_error(row, format!("field {field}: cannot parse {raw:?} as a number")))?;
    if !v.is_finite() {
        return Err(parse_error(row, format!("field {field}: non-finite value {raw:?}")));
    }
    Ok(v)
}

fn parse_count(row: usize, field: &str, raw: &str) -> Result<u64> {
    match raw.parse::<i128>() {
        Ok(v) if v < 0 => Err(parse_error(row, format!("field {field}: negative count {v}"))),
        Ok(v) => u64::try_from(v).map_err(|_| parse_error(row, format!("field {field}: count {v} too large"))),
        Err(_) => Err(parse_error(row, format!("field {field}: cannot parse {raw:?} as a non-negative integer"))),
    }
}

fn parse_metadata_line(row: usize, line: &str, meta: &mut ScanMetadata) -> Result<()> {
    let body = line.trim_start_matches('#').trim();
    let Some((key, value)) = body.split_once(':') else {
        return Ok(());
    };
    let value = value.trim();
    let number = |what: &str| -> Result<f64> {
        value.parse().map_err(|_| parse_error(row, format!("metadata {what}: cannot parse {value:?}")))
    };
    match key.trim() {
        "source" => meta.source = Some(value.to_string()),
        "mean_photon_number" => meta.mean_photon_number = Some(number("mean_photon_number")?),
        "mean_total" => meta.mean_total = Some(number("mean_total")?),
        "seed" => {
            meta.seed =
                Some(value.parse().map_err(|_| parse_error(row, format!("metadata seed: cannot parse {value:?}")))?)
        }
        _ => {}
    }
    Ok(())
}

/// Parses a scan CSV. Diagnostics name the 1-based line number.
pub fn parse_scan(mut source: impl Read) -> Result<ScanDataset> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;

    let mut metadata = ScanMetadata::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            parse_metadata_line(i + 1, line.trim_start(), &mut metadata)?;
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());

    let header_line =
        text.lines().position(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')).map_or(1, |i| i + 1);
    let headers = reader.headers().map_err(|e| parse_error(header_line, e.to_string()))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(parse_error(header_line, "empty input: missing header"));
    }
    let mut columns = [0usize; 5];
    for (slot, name) in columns.iter_mut().zip(CSV_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_error(header_line, format!("missing column {name}")))?;
    }
    if headers.len() != CSV_HEADER.len() {
        return Err(parse_error(
            header_line,
            format!("expected exactly the columns {}, found {}", CSV_HEADER.join(","), headers.len()),
        ));
    }

    let mut records = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            parse_error(row, e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |k: usize| record.get(columns[k]).unwrap_or("");
        let block: Block =
            field(2).parse().map_err(|_| parse_error(row, format!("field block: unknown value {:?}", field(2))))?;
        records.push(ScanRecord {
            phi_x: parse_phase(row, "phi_x", field(0))?,
            phi_s: parse_phase(row, "phi_s", field(1))?,
            block,
            counts_d0: parse_count(row, "counts_d0", field(3))?,
            counts_d1: parse_count(row, "counts_d1", field(4))?,
        });
    }
    Ok(ScanDataset { records, metadata })
}

/// Writes a dataset in the format read by [`parse_scan`]. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_scan(ds: &ScanDataset, mut sink: impl Write) -> Result<()> {
    let m = &ds.metadata;
    if let Some(s) = &m.source {
        writeln!(sink, "# source: {s}")?;
    }
    if let Some(mu) = m.mean_photon_number {
        writeln!(sink, "# mean_photon_number: {mu}")?;
    }
    if let Some(t) = m.mean_total {
        writeln!(sink, "# mean_total: {t}")?;
    }
    if let Some(seed) = m.seed {
        writeln!(sink, "# seed: {seed}")?;
    }
    writeln!(sink, "{}", CSV_HEADER.join(","))?;
    for r in &ds.records {
        writeln!(sink, "{},{},{},{},{}", r.phi_x, r.phi_s, r.block.as_str(), r.counts_d0, r.counts_d1)?;
    }
    Ok(())
}

/// A value with its one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
}

impl EstimateWithError {
    /// Mean of two independent estimates, errors in quadrature.
    pub fn average(a: EstimateWithError, b: EstimateWithError) -> Self {
        EstimateWithError { value: 0.5 * (a.value + b.value), sigma: 0.5 * a.sigma.hypot(b.sigma) }
    }

    /// Sum of two independent estimates, errors in quadrature.
    pub fn sum(a: EstimateWithError, b: EstimateWithError) -> Self {
        EstimateWithError { value: a.value + b.value, sigma: a.sigma.hypot(b.sigma) }
    }

    /// `|value − truth| ≤ k σ`.
    pub fn covers(&self, truth: f64, k: f64) -> bool {
        (self.value - truth).abs() <= k * self.sigma
    }
}

/// `(a − b)/(a + b)` with first-order Poisson error.
pub fn count_ratio(a: f64, b: f64) -> Result<EstimateWithError> {
    let total = a + b;
    if !(total > 0.0) {
        return Err(Error::Dataset("zero total counts in a setting used for estimation".into()));
    }
    Ok(EstimateWithError { value: (a - b) / total, sigma: 2.0 * (a * b * total).sqrt() / (total * total) })
}

/// How fringe extrema are extracted from counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumMode {
    /// Largest and smallest count among the scanned settings.
    #[default]
    MaxMin,
    /// Weighted least-squares fit of `c + a cos phi_x + b sin phi_x`.
    SinusoidFit,
}

impl ExtremumMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremumMode::MaxMin => "max-min",
            ExtremumMode::SinusoidFit => "sinusoid-fit",
        }
    }
}

/// Estimates for one TBS setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupEstimate {
    pub phi_s: f64,
    pub d: EstimateWithError,
    pub v: EstimateWithError,
    pub d_upper: EstimateWithError,
    pub d_lower: EstimateWithError,
    pub v_port0: EstimateWithError,
    pub v_port1: EstimateWithError,
    pub mode: ExtremumMode,
    pub phi_x_settings: usize,
}

/// Unblocked counts summed per distinct `phi_x`, ascending in `phi_x`.
fn fringe(records: &[&ScanRecord]) -> Vec<(f64, [f64; 2])> {
    let mut by_phase: BTreeMap<u64, (f64, [f64; 2])> = BTreeMap::new();
    for r in records.iter().filter(|r| r.block == Block::None) {
        let e = by_phase.entry(r.phi_x.to_bits()).or_insert((r.phi_x, [0.0; 2]));
        e.1[0] += r.counts_d0 as f64;
        e.1[1] += r.counts_d1 as f64;
    }
    let mut out: Vec<_> = by_phase.into_values().collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn port_visibility_max_min(points: &[(f64, [f64; 2])], port: usize) -> Result<EstimateWithError> {
    let counts = points.iter().map(|p| p.1[port]);
    let max = counts.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = counts.fold(f64::INFINITY, f64::min);
    count_ratio(max, min)
}

fn solve3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if !(det.abs() > f64::EPSILON) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            // Cofactor C_ji divided by det gives inv_ij.
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *entry = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

fn port_visibility_fit(points: &[(f64, [f64; 2])], port: usize) -> Result<EstimateWithError> {
    // Normal equations with Poisson weights 1/max(n, 1).
    let mut normal = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for &(phi, counts) in points {
        let n = counts[port];
        let w = 1.0 / n.max(1.0);
        let basis = [1.0, phi.cos(), phi.sin()];
        for i in 0..3 {
            rhs[i] += w * basis[i] * n;
            for j in 0..3 {
                normal[i][j] += w * basis[i] * basis[j];
            }
        }
    }
    let cov = solve3(normal).ok_or_else(|| Error::Dataset("fringe fit is singular (phases not spread)".into()))?;
    let coef: Vec<f64> = (0..3).map(|i| (0..3).map(|j| cov[i][j] * rhs[j]).sum()).collect();
    let (c, a, b) = (coef[0], coef[1], coef[2]);
    if !(c > 0.0) {
        return Err(Error::Dataset("zero total counts in a setting used for estimation".into()));
    }
    let amp = a.hypot(b);
    let value = amp / c;
    let grad = if amp > 0.0 { [-amp / (c * c), a / (amp * c), b / (amp * c)] } else { [0.0, 1.0 / c, 0.0] };
    let var: f64 = (0..3).map(|i| (0..3).map(|j| grad[i] * cov[i][j] * grad[j]).sum::<f64>()).sum();
    Ok(EstimateWithError { value, sigma: var.max(0.0).sqrt() })
}

fn blocked_distinguishability(records: &[&ScanRecord], block: Block, phi_s: f64) -> Result<EstimateWithError> {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut seen = false;
    for r in records.iter().filter(|r| r.block == block) {
        a += r.counts_d0 as f64;
        b += r.counts_d1 as f64;
        seen = true;
    }
    if !seen {
        return Err(Error::Dataset(format!("phi_s = {phi_s}: no records with the {} path blocked", block.as_str())));
    }
    let r = count_ratio(a, b)?;
    Ok(EstimateWithError { value: r.value.abs(), sigma: r.sigma })
}

/// Estimates `D` and `V` for every TBS setting in the dataset.
pub fn estimate_groups(ds: &ScanDataset, mode: ExtremumMode) -> Result<Vec<GroupEstimate>> {
    if ds.is_empty() {
        return Err(Error::Dataset("dataset has no records".into()));
    }
    ds.phi_s_values()
        .into_iter()
        .map(|phi_s| {
            let records: Vec<&ScanRecord> = ds.group(phi_s).collect();
            let points = fringe(&records);
            if points.len() < MIN_PHI_X_SETTINGS {
                return Err(Error::Dataset(format!(
                    "phi_s = {phi_s}: visibility needs at least {MIN_PHI_X_SETTINGS} distinct unblocked phi_x settings, found {}",
                    points.len()
                )));
            }
            let port = |j| match mode {
                ExtremumMode::MaxMin => port_visibility_max_min(&points, j),
                ExtremumMode::SinusoidFit => port_visibility_fit(&points, j),
            };
            let v_port0 = port(0)?;
            let v_port1 = port(1)?;
            let d_upper = blocked_distinguishability(&records, Block::Upper, phi_s)?;
            let d_lower = blocked_distinguishability(&records, Block::Lower, phi_s)?;
            Ok(GroupEstimate {
                phi_s,
                d: EstimateWithError::average(d_upper, d_lower),
                v: EstimateWithError::average(v_port0, v_port1),
                d_upper,
                d_lower,
                v_port0,
                v_port1,
                mode,
                phi_x_settings: points.len(),
            })
        })
        .collect()
}

/// `(D, V)` for a dataset holding a single TBS setting.
pub fn estimate_duality(ds: &ScanDataset) -> Result<(EstimateWithError, EstimateWithError)> {
    estimate_duality_with(ds, ExtremumMode::default())
}

pub fn estimate_duality_with(ds: &ScanDataset, mode: ExtremumMode) -> Result<(EstimateWithError, EstimateWithError)> {
    let groups = estimate_groups(ds, mode)?;
    match groups.as_slice() {
        [g] => Ok((g.d, g.v)),
        _ => {
            Err(Error::Dataset(format!("expected a single phi_s setting, found {}; use estimate_groups", groups.len())))
        }
    }
}

/// `n` uniform phases on `[0, 2π)`.
pub fn uniform_phi_x_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

fn draw(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let sample: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    sample as u64
}

/// Poisson counts from the interferometer model: for every block state and
/// every `phi_x` in the grid, detector means are `mean_total · p_j`.
pub fn synthesize_counts(phi_s: f64, phi_x_grid: &[f64], mean_total: f64, seed: u64) -> Result<ScanDataset> {
    if !(mean_total > 0.0 && mean_total.is_finite()) {
        return Err(Error::InvalidArgument(format!("mean_total must be positive, got {mean_total}")));
    }
    if phi_x_grid.is_empty() {
        return Err(Error::InvalidArgument("phi_x grid is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(3 * phi_x_grid.len());
    for block in Block::ALL {
        for &phi_x in phi_x_grid {
            let p = propagate(&InterferometerConfig::new(phi_x, phi_s, block)?);
            records.push(ScanRecord {
                phi_x,
                phi_s,
                block,
                counts_d0: draw(&mut rng, mean_total * p.p0),
                counts_d1: draw(&mut rng, mean_total * p.p1),
            });
        }
    }
    Ok(ScanDataset {
        records,
        metadata: ScanMetadata {
            source: Some("synthetic".into()),
            mean_photon_number: None,
            mean_total: Some(mean_total),
            seed: Some(seed),
        },
    })
}

/// Concatenated synthetic scans over several TBS settings; setting `k` is
/// drawn with seed `seed + k`.
pub fn synthesize_sweep(phi_s_values: &[f64], phi_x_grid: &[f64], mean_total: f64, seed: u64) -> Result<ScanDataset> {
    let mut out = ScanDataset::default();
    for (k, &phi_s) in phi_s_values.iter().enumerate() {
        out.records.extend(synthesize_counts(phi_s, phi_x_grid, mean_total, seed.wrapping_add(k as u64))?.records);
    }
    out.metadata = ScanMetadata {
        source: Some("synthetic".into()),
        mean_photon_number: None,
        mean_total: Some(mean_total),
        seed: Some(seed),
    };
    Ok(out)
}

/// Outcome of one synthetic estimation trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trial {
    pub seed: u64,
    pub d: EstimateWithError,
    pub v: EstimateWithError,
}

/// Fraction of trials whose estimates cover the model truth `(cos, sin)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSummary {
    pub phi_s: f64,
    pub mean_total: f64,
    pub k_sigma: f64,
    pub trials: Vec<Trial>,
    pub d_coverage: f64,
    pub v_coverage: f64,
}

/// Runs `trials` independent synthesize-then-estimate trials with seeds
/// `seed0, seed0 + 1, ...` on the default 64-setting grid.
pub fn coverage_study(
    phi_s: f64,
    mean_total: f64,
    trials: usize,
    seed0: u64,
    k_sigma: f64,
    mode: ExtremumMode,
    exec: Execution,
) -> Result<CoverageSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("coverage study needs at least one trial".into()));
    }
    let grid = uniform_phi_x_grid(DEFAULT_PHI_X_SETTINGS);
    let results = exec.map_indices(trials, |k| -> Result<Trial> {
        let seed = seed0.wrapping_add(k as u64);
        let ds = synthesize_counts(phi_s, &grid, mean_total, seed)?;
        let (d, v) = estimate_duality_with(&ds, mode)?;
        Ok(Trial { seed, d, v })
    });
    let trials: Vec<Trial> = results.into_iter().collect::<Result<_>>()?;
    let n = trials.len() as f64;
    let d_coverage = trials.iter().filter(|t| t.d.covers(phi_s.cos(), k_sigma)).count() as f64 / n;
    let v_coverage = trials.iter().filter(|t| t.v.covers(phi_s.sin(), k_sigma)).count() as f64 / n;
    Ok(CoverageSummary { phi_s, mean_total, k_sigma, trials, d_coverage, v_coverage })
}
