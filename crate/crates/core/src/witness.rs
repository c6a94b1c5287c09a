//! The (4,2,2) prepare-and-measure game and its duality decomposition.
//!
//! Alice encodes two bits `a0 a1` into a qubit, Bob measures one of two
//! binary observables `y` and outputs `b`. With correlators
//! `E[a0a1,y] = P(b = 0 | a0 a1, y)` the witness is
//!
//! ```text
//! S = E00,0 + E00,1 + E01,0 − E01,1 − E10,0 + E10,1 − E11,0 − E11,1
//! ```
//!
//! and Bob's random-access-code success is `P_B = (S + 4) / 8`. Classical
//! two-level messages reach at most `S = 2`, qubits up to `2√2`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::qcore::{outcome_prob, BinaryObservable, BlochVector, QubitState};
use crate::search::maximize_periodic;
use crate::{tol, Error, Result};

/// Number of preparations, measurements and outcomes.
pub const SCENARIO: (usize, usize, usize) = (4, 2, 2);
/// Message dimension.
pub const DIMENSION: usize = 2;

/// The four inputs `(a0, a1)` in table order.
pub const INPUTS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Witness coefficient of `E[a0a1,y]`, indexed `[a0][a1][y]`.
pub const WITNESS_COEFFICIENTS: [[[f64; 2]; 2]; 2] = [[[1.0, 1.0], [1.0, -1.0]], [[-1.0, 1.0], [-1.0, -1.0]]];

/// Grid size for maximizing over `phi_x` before golden-section refinement.
pub const PHI_X_GRID: usize = 256;

#[inline]
pub fn coefficient(a0: u8, a1: u8, y: u8) -> f64 {
    WITNESS_COEFFICIENTS[a0 as usize][a1 as usize][y as usize]
}

#[inline]
fn input_index(a0: u8, a1: u8) -> usize {
    debug_assert!(a0 <= 1 && a1 <= 1);
    2 * a0 as usize + a1 as usize
}

/// The bit Bob is asked for with measurement `y`.
#[inline]
pub fn target_bit(a0: u8, a1: u8, y: u8) -> u8 {
    if y == 0 {
        a0
    } else {
        a1
    }
}

/// Alice's four states, indexed by `(a0, a1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparationSet {
    states: [QubitState; 4],
}

impl PreparationSet {
    /// States in [`INPUTS`] order: `00, 01, 10, 11`.
    pub fn new(states: [QubitState; 4]) -> Self {
        PreparationSet { states }
    }

    pub fn from_bloch(vectors: [BlochVector; 4]) -> Result<Self> {
        let mut states = [QubitState::from_bloch(BlochVector::ORIGIN)?; 4];
        for (s, v) in states.iter_mut().zip(vectors) {
            *s = QubitState::from_bloch(v)?;
        }
        Ok(PreparationSet { states })
    }

    pub fn state(&self, a0: u8, a1: u8) -> &QubitState {
        &self.states[input_index(a0, a1)]
    }

    pub fn bloch_vectors(&self) -> [BlochVector; 4] {
        self.states.map(|s| s.bloch())
    }

    /// Deviation between the even- and odd-parity mixtures.
    pub fn parity_obliviousness_gap(&self) -> f64 {
        let even = QubitState::mix(self.state(0, 0), self.state(1, 1));
        let odd = QubitState::mix(self.state(0, 1), self.state(1, 0));
        even.matrix().max_abs_diff(odd.matrix())
    }

    pub fn is_parity_oblivious(&self) -> bool {
        self.parity_obliviousness_gap() <= tol::ALGEBRAIC
    }

    /// The set whose input `(a0, a1)` carries this set's state for `relabel(a0, a1)`.
    pub fn relabeled(&self, relabel: impl Fn(u8, u8) -> (u8, u8)) -> Self {
        let mut states = self.states;
        for (slot, &(a0, a1)) in states.iter_mut().zip(INPUTS.iter()) {
            let (b0, b1) = relabel(a0, a1);
            *slot = *self.state(b0, b1);
        }
        PreparationSet { states }
    }
}

/// `ρ00 = |0⟩⟨0|`, `ρ01 = |−⟩⟨−|`, `ρ10 = |+⟩⟨+|`, `ρ11 = |1⟩⟨1|`.
pub fn bb84_preparations() -> PreparationSet {
    PreparationSet::from_bloch([BlochVector::Z, -BlochVector::X, BlochVector::X, -BlochVector::Z])
        .expect("unit Bloch vectors are physical")
}

/// Bob's tunable observable
/// `cos phi_s σz + sin phi_s (cos phi_x σx + sin phi_x σy)`.
pub fn tunable_observable(phi_s: f64, phi_x: f64) -> Result<BinaryObservable> {
    if !(phi_s.is_finite() && phi_x.is_finite()) {
        return Err(Error::NonFinite("measurement phases"));
    }
    BinaryObservable::from_direction(BlochVector::new(
        phi_s.sin() * phi_x.cos(),
        phi_s.sin() * phi_x.sin(),
        phi_s.cos(),
    ))
}

/// Bob's two measurements; `m1` is `m0` with `phi_x` advanced by `π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementPair {
    pub m0: BinaryObservable,
    pub m1: BinaryObservable,
    pub phi_s: f64,
    pub phi_x: f64,
}

impl MeasurementPair {
    pub fn observable(&self, y: u8) -> &BinaryObservable {
        if y == 0 {
            &self.m0
        } else {
            &self.m1
        }
    }
}

pub fn tunable_measurements(phi_s: f64, phi_x: f64) -> Result<MeasurementPair> {
    Ok(MeasurementPair {
        m0: tunable_observable(phi_s, phi_x)?,
        m1: tunable_observable(phi_s, phi_x + std::f64::consts::PI)?,
        phi_s,
        phi_x,
    })
}

/// The eight correlators `E[a0a1,y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CorrelatorTable {
    entries: [Option<f64>; 8],
}

impl CorrelatorTable {
    #[inline]
    fn slot(a0: u8, a1: u8, y: u8) -> usize {
        4 * a0 as usize + 2 * a1 as usize + y as usize
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_fn(mut f: impl FnMut(u8, u8, u8) -> f64) -> Self {
        let mut t = Self::empty();
        for (a0, a1) in INPUTS {
            for y in 0..2 {
                t.set(a0, a1, y, f(a0, a1, y));
            }
        }
        t
    }

    pub fn set(&mut self, a0: u8, a1: u8, y: u8, value: f64) {
        self.entries[Self::slot(a0, a1, y)] = Some(value);
    }

    pub fn get(&self, a0: u8, a1: u8, y: u8) -> Option<f64> {
        self.entries[Self::slot(a0, a1, y)]
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    /// `(a0, a1, y, E)` for every populated entry, in table order.
    pub fn iter(&self) -> impl Iterator<Item = (u8, u8, u8, f64)> + '_ {
        INPUTS
            .iter()
            .flat_map(move |&(a0, a1)| (0..2u8).filter_map(move |y| self.get(a0, a1, y).map(|e| (a0, a1, y, e))))
    }
}

/// Correlators of an arbitrary pair of binary observables.
pub fn correlators(prep: &PreparationSet, m0: &BinaryObservable, m1: &BinaryObservable) -> CorrelatorTable {
    CorrelatorTable::from_fn(|a0, a1, y| {
        let obs = if y == 0 { m0 } else { m1 };
        outcome_prob(prep.state(a0, a1), obs, 0)
    })
}

pub fn correlator_table(prep: &PreparationSet, meas: &MeasurementPair) -> CorrelatorTable {
    correlators(prep, &meas.m0, &meas.m1)
}

/// The witness `S`; fails on a table with missing entries.
pub fn witness_value(table: &CorrelatorTable) -> Result<f64> {
    let mut s = 0.0;
    for (a0, a1) in INPUTS {
        for y in 0..2 {
            let e = table.get(a0, a1, y).ok_or(Error::IncompleteTable { a0, a1, y })?;
            s += coefficient(a0, a1, y) * e;
        }
    }
    Ok(s)
}

/// `P_B = (S + 4) / 8` for `S ∈ [−4, 4]`.
pub fn bob_success(s_value: f64) -> Result<f64> {
    if !(s_value.abs() <= 4.0 + tol::ALGEBRAIC) {
        return Err(Error::OutOfDomain { what: "bob_success (S must lie in [-4, 4])", value: s_value });
    }
    Ok((s_value + 4.0) / 8.0)
}

/// Witness of the symmetric tunable strategy, `max_phi_x S = 2(D + V)`.
pub fn symmetric_witness(d: f64, v: f64) -> Result<f64> {
    for (what, x) in [("symmetric_witness (D must lie in [0, 1])", d), ("symmetric_witness (V must lie in [0, 1])", v)]
    {
        if !(-tol::ALGEBRAIC..=1.0 + tol::ALGEBRAIC).contains(&x) {
            return Err(Error::OutOfDomain { what, value: x });
        }
    }
    Ok(2.0 * (d + v))
}

/// Per-configuration duality quantities for one TBS setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityTables {
    pub phi_s: f64,
    /// `D[a0][a1][y] = 2 P(b = a0 | a0 a1, y) − 1`, even-parity inputs only.
    pub distinguishability: [[[Option<f64>; 2]; 2]; 2],
    /// `V[a0][a1][y][b] = 2 max_phi_x P(b | a0 a1, y) − 1`, odd-parity inputs only.
    pub visibility: [[[[Option<f64>; 2]; 2]; 2]; 2],
}

impl DualityTables {
    pub fn d(&self, a0: u8, a1: u8, y: u8) -> Option<f64> {
        self.distinguishability[a0 as usize][a1 as usize][y as usize]
    }

    pub fn v(&self, a0: u8, a1: u8, y: u8, b: u8) -> Option<f64> {
        self.visibility[a0 as usize][a1 as usize][y as usize][b as usize]
    }

    /// `½ Σ D δ(parity 0) + ½ Σ V^b δ(parity 1) δ(b = a_y)`.
    pub fn decomposition(&self) -> f64 {
        let mut total = 0.0;
        for (a0, a1) in INPUTS {
            for y in 0..2 {
                if a0 == a1 {
                    total += 0.5 * self.d(a0, a1, y).unwrap_or(0.0);
                } else {
                    total += 0.5 * self.v(a0, a1, y, target_bit(a0, a1, y)).unwrap_or(0.0);
                }
            }
        }
        total
    }
}

/// Number of `phi_x` samples used to confirm that even-parity `D` is phase independent.
const DRIFT_SAMPLES: usize = 64;

pub fn per_config_duality(prep: &PreparationSet, phi_s: f64) -> Result<DualityTables> {
    if !phi_s.is_finite() {
        return Err(Error::NonFinite("phi_s"));
    }
    let prob = |a0: u8, a1: u8, y: u8, b: u8, phi_x: f64| -> Result<f64> {
        let meas = tunable_measurements(phi_s, phi_x)?;
        Ok(outcome_prob(prep.state(a0, a1), meas.observable(y), b))
    };

    let mut tables =
        DualityTables { phi_s, distinguishability: [[[None; 2]; 2]; 2], visibility: [[[[None; 2]; 2]; 2]; 2] };
    for (a0, a1) in INPUTS {
        for y in 0..2u8 {
            if a0 == a1 {
                let d_at = |phi_x| prob(a0, a1, y, a0, phi_x).map(|p| 2.0 * p - 1.0);
                let d0 = d_at(0.0)?;
                let mut drift: f64 = 0.0;
                for k in 1..DRIFT_SAMPLES {
                    drift = drift.max((d_at(TAU * k as f64 / DRIFT_SAMPLES as f64)? - d0).abs());
                }
                if drift > tol::ARGUMENT {
                    return Err(Error::EncodingViolated { a0, a1, y, drift });
                }
                tables.distinguishability[a0 as usize][a1 as usize][y as usize] = Some(d0);
            } else {
                for b in 0..2u8 {
                    // Phases are finite here, so prob cannot fail.
                    let p_max = maximize_periodic(
                        |phi_x| prob(a0, a1, y, b, phi_x).unwrap_or(f64::NAN),
                        PHI_X_GRID,
                        tol::ARGUMENT,
                    )
                    .value;
                    tables.visibility[a0 as usize][a1 as usize][y as usize][b as usize] = Some(2.0 * p_max - 1.0);
                }
            }
        }
    }
    Ok(tables)
}

/// `S` as a function of `phi_x` for a fixed TBS setting.
pub fn witness_at(prep: &PreparationSet, phi_s: f64, phi_x: f64) -> Result<f64> {
    witness_value(&correlator_table(prep, &tunable_measurements(phi_s, phi_x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessReport {
    pub phi_s: f64,
    /// Maximized witness `max_phi_x S`.
    pub s_value: f64,
    pub p_b: f64,
    /// Smallest non-negative maximizer in `[0, 2π)`.
    pub phi_x_star: f64,
    /// Right-hand side of the duality decomposition.
    pub decomposition: f64,
    /// Whether direct maximization and the decomposition agree within 1e-6.
    pub consistent: bool,
    pub duality: DualityTables,
}

/// Maximizes `S` over `phi_x` and evaluates the duality decomposition.
pub fn duality_witness_max(prep: &PreparationSet, phi_s: f64) -> Result<WitnessReport> {
    let duality = per_config_duality(prep, phi_s)?;
    let best = maximize_periodic(|phi_x| witness_at(prep, phi_s, phi_x).unwrap_or(f64::NAN), PHI_X_GRID, tol::ARGUMENT);
    let decomposition = duality.decomposition();
    Ok(WitnessReport {
        phi_s,
        s_value: best.value,
        p_b: bob_success(best.value)?,
        phi_x_star: best.arg,
        decomposition,
        consistent: (best.value - decomposition).abs() <= tol::OPTIMIZATION,
        duality,
    })
}
