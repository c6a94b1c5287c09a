//! Classical and quantum bounds of the witness, and the security criteria.
//!
//! * The classical bound is certified by enumerating all 16 × 16
//!   deterministic encoder/decoder pairs with a one-bit message. Shared
//!   randomness only mixes these, and `S` is linear, so their maximum is the
//!   classical bound.
//! * The quantum maximum is found by see-saw: for fixed measurements the
//!   best preparation for each input is the unit Bloch vector along
//!   `Σ_y c(a, y) m_y`, and symmetrically for the measurements.
//! * Eve's guessing probability is the per-bit Helstrom bound with
//!   knowledge of which bit (`y`) is targeted.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::exec::Execution;
use crate::qcore::{helstrom, BinaryObservable, BlochVector, QubitState};
use crate::witness::{coefficient, correlators, witness_value, CorrelatorTable, PreparationSet, INPUTS};
use crate::{tol, Error, Result};

/// Number of deterministic one-bit strategies: 16 encoders × 16 decoders.
pub const CLASSICAL_STRATEGY_COUNT: usize = 256;

/// Previously known constant threshold on `P_B`.
pub const ORIGINAL_PB_THRESHOLD: f64 = 0.8415;
/// Fixed point of [`improved_eve_cap`]; quoted as 0.833 in the literature.
pub const IMPROVED_PB_THRESHOLD: f64 = 5.0 / 6.0;
/// `D + V` form of the improved threshold as usually quoted (`4/3` rounded down).
pub const IMPROVED_DV_THRESHOLD_QUOTED: f64 = 1.332;

/// A deterministic classical strategy with a one-bit message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassicalStrategy {
    /// Message sent for input `(a0, a1)`, indexed `2·a0 + a1`.
    pub encoder: [u8; 4],
    /// Bob's answer, indexed `[message][y]`.
    pub decoder: [[u8; 2]; 2],
}

impl ClassicalStrategy {
    /// Strategy number `index` in `0..256`: high nibble encodes the encoder
    /// table, low nibble the decoder table.
    pub fn from_index(index: usize) -> Self {
        assert!(index < CLASSICAL_STRATEGY_COUNT);
        let enc = index >> 4;
        let dec = index & 0xF;
        let bit = |word: usize, k: usize| ((word >> k) & 1) as u8;
        ClassicalStrategy {
            encoder: [bit(enc, 0), bit(enc, 1), bit(enc, 2), bit(enc, 3)],
            decoder: [[bit(dec, 0), bit(dec, 1)], [bit(dec, 2), bit(dec, 3)]],
        }
    }

    pub fn answer(&self, a0: u8, a1: u8, y: u8) -> u8 {
        let message = self.encoder[2 * a0 as usize + a1 as usize];
        self.decoder[message as usize][y as usize]
    }

    /// Deterministic correlators: `E = 1` when Bob answers 0.
    pub fn correlators(&self) -> CorrelatorTable {
        CorrelatorTable::from_fn(|a0, a1, y| if self.answer(a0, a1, y) == 0 { 1.0 } else { 0.0 })
    }

    pub fn witness(&self) -> f64 {
        witness_value(&self.correlators()).expect("deterministic tables are complete")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalCertificate {
    pub max: f64,
    /// First maximizer in enumeration order.
    pub argmax: ClassicalStrategy,
    pub strategies: usize,
}

pub fn classical_maximum() -> ClassicalCertificate {
    classical_maximum_with(Execution::default())
}

pub fn classical_maximum_with(exec: Execution) -> ClassicalCertificate {
    let values = exec.map_indices(CLASSICAL_STRATEGY_COUNT, |i| ClassicalStrategy::from_index(i).witness());
    let (best, max) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    ClassicalCertificate { max, argmax: ClassicalStrategy::from_index(best), strategies: values.len() }
}

/// Optimization variables of a qubit strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumAnsatz {
    /// Bloch vectors of `ρ00, ρ01, ρ10, ρ11`.
    pub preparations: [BlochVector; 4],
    /// Unit directions of Bob's two measurements.
    pub measurements: [BlochVector; 2],
}

fn random_unit(rng: &mut impl Rng) -> BlochVector {
    loop {
        let v = BlochVector::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

impl QuantumAnsatz {
    pub fn random(rng: &mut impl Rng) -> Self {
        QuantumAnsatz {
            preparations: std::array::from_fn(|_| random_unit(rng)),
            measurements: std::array::from_fn(|_| random_unit(rng)),
        }
    }

    /// `S = ½ Σ c(a, y) n_a · m_y` (the constant term vanishes because the
    /// coefficients sum to zero).
    pub fn witness_linear(&self) -> f64 {
        let mut s = 0.0;
        for (k, &(a0, a1)) in INPUTS.iter().enumerate() {
            for y in 0..2u8 {
                s += 0.5 * coefficient(a0, a1, y) * self.preparations[k].dot(self.measurements[y as usize]);
            }
        }
        s
    }

    pub fn preparation_set(&self) -> Result<PreparationSet> {
        PreparationSet::from_bloch(self.preparations)
    }

    pub fn observables(&self) -> Result<[BinaryObservable; 2]> {
        Ok([
            BinaryObservable::from_direction(self.measurements[0])?,
            BinaryObservable::from_direction(self.measurements[1])?,
        ])
    }

    /// Correlator table evaluated through the Born rule.
    pub fn correlators(&self) -> Result<CorrelatorTable> {
        let [m0, m1] = self.observables()?;
        Ok(correlators(&self.preparation_set()?, &m0, &m1))
    }

    pub fn witness(&self) -> Result<f64> {
        witness_value(&self.correlators()?)
    }
}

/// Best preparations for fixed measurement directions.
///
/// A vanishing gradient (e.g. parallel measurements for the odd inputs)
/// leaves the corresponding entry of `previous` unchanged.
pub fn optimal_preparations(measurements: [BlochVector; 2], previous: [BlochVector; 4]) -> [BlochVector; 4] {
    let mut out = previous;
    for (k, &(a0, a1)) in INPUTS.iter().enumerate() {
        let g = measurements[0].scale(coefficient(a0, a1, 0)) + measurements[1].scale(coefficient(a0, a1, 1));
        if g.norm() > tol::ALGEBRAIC {
            out[k] = g.normalized().unwrap_or(previous[k]);
        }
    }
    out
}

/// Best measurement directions for fixed preparations. With `tied`, both
/// measurements are constrained to a single common direction.
pub fn optimal_measurements(
    preparations: [BlochVector; 4],
    previous: [BlochVector; 2],
    tied: bool,
) -> [BlochVector; 2] {
    let grad = |y: u8| {
        INPUTS
            .iter()
            .enumerate()
            .fold(BlochVector::ORIGIN, |acc, (k, &(a0, a1))| acc + preparations[k].scale(coefficient(a0, a1, y)))
    };
    let pick = |g: BlochVector, prev: BlochVector| {
        if g.norm() > tol::ALGEBRAIC {
            g.normalized().unwrap_or(prev)
        } else {
            prev
        }
    };
    if tied {
        let m = pick(grad(0) + grad(1), previous[0]);
        [m, m]
    } else {
        [pick(grad(0), previous[0]), pick(grad(1), previous[1])]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeeSawConfig {
    pub max_iterations: usize,
    /// Stop once one full sweep changes `S` by less than this.
    pub tolerance: f64,
    /// Restrict Bob to one measurement direction for both `y`.
    pub tied_measurements: bool,
}

impl Default for SeeSawConfig {
    fn default() -> Self {
        SeeSawConfig { max_iterations: 1000, tolerance: tol::SEE_SAW, tied_measurements: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeeSawRun {
    pub value: f64,
    pub ansatz: QuantumAnsatz,
    /// `S` after every sweep.
    pub trace: Vec<f64>,
    /// The initial ansatz followed by the ansatz after every sweep.
    pub visited: Vec<QuantumAnsatz>,
    pub converged: bool,
}

pub fn see_saw(initial: QuantumAnsatz, config: &SeeSawConfig) -> SeeSawRun {
    let mut ansatz = initial;
    if config.tied_measurements {
        ansatz.measurements[1] = ansatz.measurements[0];
    }
    let mut visited = vec![ansatz];
    let mut trace = Vec::new();
    let mut last = ansatz.witness_linear();
    let mut converged = false;
    for _ in 0..config.max_iterations {
        ansatz.preparations = optimal_preparations(ansatz.measurements, ansatz.preparations);
        ansatz.measurements = optimal_measurements(ansatz.preparations, ansatz.measurements, config.tied_measurements);
        let s = ansatz.witness_linear();
        trace.push(s);
        visited.push(ansatz);
        if (s - last).abs() < config.tolerance {
            converged = true;
            break;
        }
        last = s;
    }
    let value = ansatz.witness().unwrap_or(last);
    SeeSawRun { value, ansatz, trace, visited, converged }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumOptimum {
    pub value: f64,
    pub ansatz: QuantumAnsatz,
    pub seed: u64,
    /// Index of the winning restart (lowest index among ties).
    pub best_restart: usize,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
    /// Convergence trace of the winning restart.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Default number of see-saw restarts.
pub const DEFAULT_RESTARTS: usize = 20;

/// Runs one see-saw restart. Restart `k` draws its initial ansatz from
/// stream `k` of a ChaCha8 generator seeded with `seed`, so results do not
/// depend on scheduling.
pub fn see_saw_restart(seed: u64, restart: usize, config: &SeeSawConfig) -> SeeSawRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    see_saw(QuantumAnsatz::random(&mut rng), config)
}

pub fn quantum_maximum(seed: u64, restarts: usize) -> Result<QuantumOptimum> {
    quantum_maximum_with(seed, restarts, &SeeSawConfig::default(), Execution::default())
}

pub fn quantum_maximum_with(
    seed: u64,
    restarts: usize,
    config: &SeeSawConfig,
    exec: Execution,
) -> Result<QuantumOptimum> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one see-saw restart is required".into()));
    }
    let runs = exec.map_indices(restarts, |k| see_saw_restart(seed, k, config));
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = k;
        }
    }
    let restart_values = runs.iter().map(|r| r.value).collect();
    let winner = runs.into_iter().nth(best).expect("restarts >= 1");
    Ok(QuantumOptimum {
        value: winner.value,
        ansatz: winner.ansatz,
        seed,
        best_restart: best,
        restart_values,
        trace: winner.trace,
        converged: winner.converged,
    })
}

/// Eve's per-bit Helstrom guessing probabilities `[P_E(a0), P_E(a1)]`.
pub fn eve_bit_success(prep: &PreparationSet) -> [f64; 2] {
    let mix = QubitState::mix;
    let a0 = helstrom(&mix(prep.state(0, 0), prep.state(0, 1)), &mix(prep.state(1, 0), prep.state(1, 1)));
    let a1 = helstrom(&mix(prep.state(0, 0), prep.state(1, 0)), &mix(prep.state(0, 1), prep.state(1, 1)));
    [a0, a1]
}

/// `P_E = ½[P_E(a0) + P_E(a1)]`.
pub fn eve_success(prep: &PreparationSet) -> f64 {
    let [a0, a1] = eve_bit_success(prep);
    0.5 * (a0 + a1)
}

/// Upper bound on Eve's guessing probability given Bob's success:
/// `(3 + √(1 − 2(2 P_B − 1)²)) / 4`.
///
/// Defined for `|2 P_B − 1| ≤ √2/2`; larger `P_B` is not attainable with a
/// qubit.
pub fn improved_eve_cap(p_b: f64) -> Result<f64> {
    let u = 2.0 * p_b - 1.0;
    if !(u.abs() <= FRAC_1_SQRT_2 + tol::ALGEBRAIC) {
        return Err(Error::OutOfDomain { what: "improved_eve_cap (|2 P_B - 1| must not exceed 1/sqrt 2)", value: p_b });
    }
    let arg = (1.0 - 2.0 * u * u).max(0.0);
    Ok((3.0 + arg.sqrt()) / 4.0)
}

/// `Σ_i (n · m_i)²` for an orthonormal triad `m_i`; at most `|n|²`.
pub fn hyperbit_check(n: BlochVector, triad: [BlochVector; 3]) -> Result<f64> {
    let mut deviation: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((triad[i].dot(triad[j]) - target).abs());
        }
    }
    if !(deviation <= tol::SPECTRAL) {
        return Err(Error::NonOrthonormalTriad { deviation });
    }
    Ok(triad.iter().map(|m| n.dot(*m).powi(2)).sum())
}

/// `P_B` of the symmetric strategy from interferometric data:
/// `(2(D + V) + 4) / 8`.
pub fn p_b_from_duality(d: f64, v: f64) -> f64 {
    (2.0 * (d + v) + 4.0) / 8.0
}

/// `D + V` corresponding to a `P_B` threshold: `4 P_B − 2`.
pub fn dv_threshold(p_b_threshold: f64) -> f64 {
    4.0 * p_b_threshold - 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityVerdict {
    pub p_b: f64,
    /// `D + V` implied by `p_b` for the symmetric strategy.
    pub d_plus_v: f64,
    /// Constant-threshold rule: secure iff `P_B` exceeds this value.
    pub p_e_cap_original: f64,
    /// [`improved_eve_cap`] at `p_b`; `None` outside its domain.
    pub p_e_cap_improved: Option<f64>,
    pub secure_original: bool,
    pub secure_improved: bool,
    pub pb_threshold_original: f64,
    pub pb_threshold_improved: f64,
    pub dv_threshold_original: f64,
    pub dv_threshold_improved: f64,
    pub dv_threshold_improved_quoted: f64,
}

pub fn security_verdict(p_b: f64) -> Result<SecurityVerdict> {
    if !(0.0..=1.0).contains(&p_b) {
        return Err(Error::OutOfDomain { what: "security_verdict (P_B must lie in [0, 1])", value: p_b });
    }
    Ok(SecurityVerdict {
        p_b,
        d_plus_v: 4.0 * p_b - 2.0,
        p_e_cap_original: ORIGINAL_PB_THRESHOLD,
        p_e_cap_improved: improved_eve_cap(p_b).ok(),
        secure_original: p_b > ORIGINAL_PB_THRESHOLD,
        secure_improved: p_b > IMPROVED_PB_THRESHOLD,
        pb_threshold_original: ORIGINAL_PB_THRESHOLD,
        pb_threshold_improved: IMPROVED_PB_THRESHOLD,
        dv_threshold_original: dv_threshold(ORIGINAL_PB_THRESHOLD),
        dv_threshold_improved: dv_threshold(IMPROVED_PB_THRESHOLD),
        dv_threshold_improved_quoted: IMPROVED_DV_THRESHOLD_QUOTED,
    })
}
