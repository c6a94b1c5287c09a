//! Mach-Zehnder interferometer closed by a tunable beam splitter (TBS).
//!
//! A photon enters in path `|0⟩`, crosses the input beam splitter, an
//! optional path blocker, the internal phase `phi_x`, and the TBS realized
//! as `BS2 · PM(phi_s) · BS2`. Path index 0 is the lower arm and index 1 the
//! upper arm. Unblocked detection probabilities are
//! `p0 = ½(1 + sin phi_x sin phi_s)` and `p1 = ½(1 − sin phi_x sin phi_s)`.
//!
//! Blocking is a projector without renormalization, so blocked port
//! probabilities sum to ½. The estimators below use only ratios, which are
//! insensitive to that.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::Mat2;
use crate::search::{maximize_periodic, minimize_periodic};
use crate::{tol, Error, Result};

/// Which interferometer arm, if any, is blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    None,
    Upper,
    Lower,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::None, Block::Upper, Block::Lower];

    pub fn as_str(self) -> &'static str {
        match self {
            Block::None => "none",
            Block::Upper => "upper",
            Block::Lower => "lower",
        }
    }
}

impl std::str::FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Block::None),
            "upper" => Ok(Block::Upper),
            "lower" => Ok(Block::Lower),
            other => {
                Err(Error::InvalidArgument(format!("unknown block state {other:?} (expected none, upper or lower)")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    pub phi_x: f64,
    pub phi_s: f64,
    pub block: Block,
}

impl InterferometerConfig {
    pub fn new(phi_x: f64, phi_s: f64, block: Block) -> Result<Self> {
        if !(phi_x.is_finite() && phi_s.is_finite()) {
            return Err(Error::NonFinite("interferometer phases"));
        }
        Ok(InterferometerConfig { phi_x, phi_s, block })
    }

    pub fn unblocked(phi_x: f64, phi_s: f64) -> Result<Self> {
        Self::new(phi_x, phi_s, Block::None)
    }

    /// The TBS setting folded into `[0, π/2]` with the same `(D, V)`:
    /// `atan2(|sin phi_s|, |cos phi_s|)`.
    pub fn canonical_phi_s(&self) -> f64 {
        self.phi_s.sin().abs().atan2(self.phi_s.cos().abs())
    }
}

/// Squared output amplitudes at detectors `D0` and `D1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortProbabilities {
    pub p0: f64,
    pub p1: f64,
    /// `false` when a path was blocked (total ½, not renormalized).
    pub normalized: bool,
}

impl PortProbabilities {
    pub fn total(&self) -> f64 {
        self.p0 + self.p1
    }

    pub fn port(&self, j: usize) -> f64 {
        if j == 0 {
            self.p0
        } else {
            self.p1
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Input 50:50 beam splitter `(1/√2)[[1, i], [i, 1]]`.
pub fn input_beam_splitter() -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)).scale(c(FRAC_1_SQRT_2, 0.0))
}

/// Output beam splitter `(1/√2)[[i, −1], [−1, i]]`.
pub fn output_beam_splitter() -> Mat2 {
    Mat2::new(c(0.0, 1.0), c(-1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)).scale(c(FRAC_1_SQRT_2, 0.0))
}

/// Phase modulator `diag(1, e^{iφ})`.
pub fn phase_modulator(phi: f64) -> Mat2 {
    Mat2::diag(c(1.0, 0.0), Complex64::from_polar(1.0, phi))
}

/// Tunable beam splitter `BS2 · PM(phi_s) · BS2`.
pub fn tunable_beam_splitter(phi_s: f64) -> Mat2 {
    let bs = output_beam_splitter();
    bs * phase_modulator(phi_s) * bs
}

/// Path blocker: identity, or the projector keeping the unblocked arm.
pub fn blocker(block: Block) -> Mat2 {
    match block {
        Block::None => Mat2::IDENTITY,
        Block::Upper => Mat2::diag(c(1.0, 0.0), c(0.0, 0.0)),
        Block::Lower => Mat2::diag(c(0.0, 0.0), c(1.0, 0.0)),
    }
}

/// Full transfer matrix of the interferometer for `config`.
pub fn transfer_matrix(config: &InterferometerConfig) -> Mat2 {
    tunable_beam_splitter(config.phi_s) * phase_modulator(config.phi_x) * blocker(config.block) * input_beam_splitter()
}

/// Output amplitudes for a photon entering in path `|0⟩`.
pub fn output_amplitudes(config: &InterferometerConfig) -> [Complex64; 2] {
    transfer_matrix(config).apply([c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn propagate(config: &InterferometerConfig) -> PortProbabilities {
    let [a0, a1] = output_amplitudes(config);
    PortProbabilities { p0: a0.norm_sqr(), p1: a1.norm_sqr(), normalized: config.block == Block::None }
}

/// Closed-form unblocked detection probabilities `(p0, p1)`.
pub fn closed_form(phi_x: f64, phi_s: f64) -> (f64, f64) {
    let t = phi_x.sin() * phi_s.sin();
    (0.5 * (1.0 + t), 0.5 * (1.0 - t))
}

/// Normalized imbalance `|a − b| / (a + b)`.
pub fn imbalance(a: f64, b: f64) -> Result<f64> {
    let total = a + b;
    if !(total > 0.0) {
        return Err(Error::DarkOutputs);
    }
    Ok((a - b).abs() / total)
}

/// Per-port and averaged fringe visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Visibility {
    pub port0: f64,
    pub port1: f64,
    pub mean: f64,
}

/// Per-blocked-path and averaged input distinguishability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distinguishability {
    pub upper: f64,
    pub lower: f64,
    pub mean: f64,
}

/// Operational `D` and `V` for one TBS setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityEstimate {
    pub d_upper: f64,
    pub d_lower: f64,
    pub d_mean: f64,
    pub v_port0: f64,
    pub v_port1: f64,
    pub v_mean: f64,
}

impl DualityEstimate {
    pub fn from_parts(d: Distinguishability, v: Visibility) -> Self {
        DualityEstimate {
            d_upper: d.upper,
            d_lower: d.lower,
            d_mean: d.mean,
            v_port0: v.port0,
            v_port1: v.port1,
            v_mean: v.mean,
        }
    }
}

/// Minimum number of `phi_x` grid points for the visibility scan.
pub const MIN_SCAN_POINTS: usize = 8;

/// Fringe visibility from a `phi_x` scan of the matrix model.
///
/// Each port's extrema are located on a uniform grid of `scan_points` over
/// `[0, 2π)` and refined by golden-section search; the closed form is never
/// consulted.
pub fn visibility(phi_s: f64, scan_points: usize) -> Result<Visibility> {
    if scan_points < MIN_SCAN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "visibility scan needs at least {MIN_SCAN_POINTS} points, got {scan_points}"
        )));
    }
    if !phi_s.is_finite() {
        return Err(Error::NonFinite("phi_s"));
    }
    let port_visibility = |j: usize| -> Result<f64> {
        let p = |phi_x: f64| propagate(&InterferometerConfig { phi_x, phi_s, block: Block::None }).port(j);
        let max = maximize_periodic(p, scan_points, tol::ARGUMENT).value;
        let min = minimize_periodic(p, scan_points, tol::ARGUMENT).value;
        if !(max + min > 0.0) {
            return Err(Error::DarkOutputs);
        }
        Ok((max - min) / (max + min))
    };
    let port0 = port_visibility(0)?;
    let port1 = port_visibility(1)?;
    Ok(Visibility { port0, port1, mean: 0.5 * (port0 + port1) })
}

/// Input distinguishability from the two blocked configurations.
pub fn distinguishability(phi_s: f64) -> Result<Distinguishability> {
    if !phi_s.is_finite() {
        return Err(Error::NonFinite("phi_s"));
    }
    let blocked = |block| -> Result<f64> {
        // phi_x is irrelevant once a path is blocked; any value works.
        let p = propagate(&InterferometerConfig { phi_x: 0.0, phi_s, block });
        imbalance(p.p0, p.p1)
    };
    let upper = blocked(Block::Upper)?;
    let lower = blocked(Block::Lower)?;
    Ok(Distinguishability { upper, lower, mean: 0.5 * (upper + lower) })
}

pub fn duality_estimate(phi_s: f64, scan_points: usize) -> Result<DualityEstimate> {
    Ok(DualityEstimate::from_parts(distinguishability(phi_s)?, visibility(phi_s, scan_points)?))
}

/// Uniform grid of `steps` TBS settings on `[lo, hi]`, endpoints included.
pub fn phi_s_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 })
            .collect(),
    }
}

/// The canonical TBS range `[0, π/2]`.
pub const PHI_S_RANGE: (f64, f64) = (0.0, FRAC_PI_2);

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI, TAU};

    #[test]
    fn component_matrices_are_unitary() {
        for m in [input_beam_splitter(), output_beam_splitter(), phase_modulator(0.4), tunable_beam_splitter(1.1)] {
            assert!((m.adjoint() * m).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        }
    }

    #[test]
    fn propagate_examples() {
        let p = propagate(&InterferometerConfig::unblocked(FRAC_PI_2, FRAC_PI_2).unwrap());
        assert!((p.p0 - 1.0).abs() < 1e-15 && p.p1.abs() < 1e-15);
        assert!(p.normalized);

        for phi_x in [0.0, 0.9, 2.5, -4.0] {
            let p = propagate(&InterferometerConfig::unblocked(phi_x, 0.0).unwrap());
            assert!((p.p0 - 0.5).abs() < 1e-15 && (p.p1 - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn blocked_upper_example_against_hand_product() {
        // Hand oracle for the lower arm alone (upper blocked): after BS1 the
        // amplitude is (1/√2, 0); BS2 gives ½(i, −1); PM(φs) gives ½(i, −e^{iφs});
        // BS2 gives (1/(2√2))(e^{iφs} − 1, −i(1 + e^{iφs})), so
        // p0 = (1 − cos φs)/4 and p1 = (1 + cos φs)/4.
        let phi_s = FRAC_PI_3;
        let p = propagate(&InterferometerConfig::new(0.7, phi_s, Block::Upper).unwrap());
        assert!((p.p0 - (1.0 - phi_s.cos()) / 4.0).abs() < 1e-15);
        assert!((p.p1 - (1.0 + phi_s.cos()) / 4.0).abs() < 1e-15);
        assert!(!p.normalized);
        assert!((imbalance(p.p0, p.p1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn blocked_totals_are_half() {
        for block in [Block::Upper, Block::Lower] {
            for phi_s in phi_s_grid(0.0, FRAC_PI_2, 7) {
                let p = propagate(&InterferometerConfig::new(1.3, phi_s, block).unwrap());
                assert!(p.total() <= 0.5 + 1e-12);
                assert!((p.total() - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blocking_removes_phi_x_dependence() {
        for block in [Block::Upper, Block::Lower] {
            for phi_s in phi_s_grid(0.0, FRAC_PI_2, 9) {
                let reference = propagate(&InterferometerConfig::new(0.0, phi_s, block).unwrap());
                for k in 0..64 {
                    let phi_x = TAU * k as f64 / 64.0;
                    let p = propagate(&InterferometerConfig::new(phi_x, phi_s, block).unwrap());
                    assert!((p.p0 - reference.p0).abs() < 1e-12);
                    assert!((p.p1 - reference.p1).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn visibility_examples() {
        assert!((visibility(FRAC_PI_2, 64).unwrap().mean - 1.0).abs() < 1e-9);
        assert!((visibility(FRAC_PI_4, 64).unwrap().mean - FRAC_1_SQRT_2).abs() < 1e-9);
        let v = visibility(0.3, 64).unwrap();
        assert!((v.mean - 0.3f64.sin()).abs() < 1e-9);
        assert!((v.port0 - v.port1).abs() < 1e-9);
        assert!((0.3f64.sin() - 0.295_520_206_661_339_6).abs() < 1e-15);
    }

    #[test]
    fn visibility_rejects_coarse_scans() {
        assert!(matches!(visibility(0.5, 7), Err(Error::InvalidArgument(_))));
        assert!(visibility(0.5, 8).is_ok());
    }

    #[test]
    fn distinguishability_examples() {
        assert!((distinguishability(0.0).unwrap().mean - 1.0).abs() < 1e-12);
        assert!((distinguishability(FRAC_PI_4).unwrap().mean - FRAC_1_SQRT_2).abs() < 1e-12);
        let d = distinguishability(1.0).unwrap();
        assert!((d.mean - 1.0f64.cos()).abs() < 1e-12);
        assert!((d.upper - d.lower).abs() < 1e-12);
    }

    #[test]
    fn imbalance_guards_dark_outputs() {
        assert!(matches!(imbalance(0.0, 0.0), Err(Error::DarkOutputs)));
        assert_eq!(imbalance(3.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn duality_identity_and_monotonicity() {
        let grid = phi_s_grid(0.0, FRAC_PI_2, 41);
        let est: Vec<DualityEstimate> = grid.iter().map(|&s| duality_estimate(s, 32).unwrap()).collect();
        for e in &est {
            assert!((e.d_mean.powi(2) + e.v_mean.powi(2) - 1.0).abs() < 1e-9);
        }
        for w in est.windows(2) {
            assert!(w[1].v_mean > w[0].v_mean);
            assert!(w[1].d_mean < w[0].d_mean);
        }
    }

    #[test]
    fn canonical_phi_s_folds_into_quarter_turn() {
        let cfg = InterferometerConfig::unblocked(0.0, PI - 0.2).unwrap();
        assert!((cfg.canonical_phi_s() - 0.2).abs() < 1e-12);
        let cfg = InterferometerConfig::unblocked(0.0, 0.6).unwrap();
        assert!((cfg.canonical_phi_s() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = phi_s_grid(0.0, FRAC_PI_2, 3);
        assert_eq!(g, vec![0.0, FRAC_PI_4, FRAC_PI_2]);
    }

    #[test]
    fn block_parses() {
        assert_eq!("upper".parse::<Block>().unwrap(), Block::Upper);
        assert!("Upper".parse::<Block>().is_err());
    }
}
