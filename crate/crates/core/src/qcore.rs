//! Exact two-dimensional linear algebra and qubit primitives.
//!
//! Everything here is closed-form: eigenprojectors of a binary observable
//! with unit Bloch direction `m` are `½(I ± m·σ)`, and trace norms of 2x2
//! Hermitian matrices come from their Pauli decomposition.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{tol, Error, Result};

pub type ComplexScalar = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const PAULI_X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const PAULI_Y: Mat2 = Mat2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const PAULI_Z: Mat2 = Mat2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    pub fn new(a00: Complex64, a01: Complex64, a10: Complex64, a11: Complex64) -> Self {
        Mat2([[a00, a01], [a10, a11]])
    }

    pub fn diag(d0: Complex64, d1: Complex64) -> Self {
        Mat2([[d0, ZERO], [ZERO, d1]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// `v·σ` for a real 3-vector.
    pub fn pauli_combination(v: BlochVector) -> Self {
        Mat2([
            [Complex64::new(v.z, 0.0), Complex64::new(v.x, -v.y)],
            [Complex64::new(v.x, v.y), Complex64::new(-v.z, 0.0)],
        ])
    }

    /// Decomposes a Hermitian matrix as `h0·I + h·σ`, returning `(h0, h)`.
    pub fn pauli_decomposition(&self) -> (f64, BlochVector) {
        let m = &self.0;
        let h0 = 0.5 * (m[0][0].re + m[1][1].re);
        let h = BlochVector::new(m[1][0].re, m[1][0].im, 0.5 * (m[0][0].re - m[1][1].re));
        (h0, h)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self.0;
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry += rhs.0[r][c];
            }
        }
        Mat2(out)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-ONE)
    }
}

/// Real 3-vector on or inside the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: BlochVector = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };
    pub const ORIGIN: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    /// Unit vector with polar angle `theta` from +z and azimuth `phi`.
    pub fn spherical(theta: f64, phi: f64) -> Self {
        BlochVector::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }

    pub fn dot(self, other: BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<BlochVector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        self.scale(-1.0)
    }
}

/// A qubit density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Mat2,
}

impl QubitState {
    /// `ρ = ½(I + n·σ)`; rejects `|n| > 1 + 1e-12`.
    pub fn from_bloch(n: BlochVector) -> Result<Self> {
        if !n.is_finite() {
            return Err(Error::NonFinite("Bloch vector"));
        }
        let norm = n.norm();
        if norm > 1.0 + tol::ALGEBRAIC {
            return Err(Error::UnphysicalBloch { norm });
        }
        let rho = (Mat2::IDENTITY + Mat2::pauli_combination(n)).scale(Complex64::new(0.5, 0.0));
        Ok(QubitState { rho })
    }

    /// Validates a density matrix: Hermitian, unit trace, positive semidefinite.
    pub fn from_matrix(rho: Mat2) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::NonFinite("density matrix"));
        }
        if !rho.is_hermitian(tol::ALGEBRAIC) {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr - ONE).norm() > tol::ALGEBRAIC {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} != 1")));
        }
        // Eigenvalues are h0 ± |h|; with h0 = ½ the smallest is ½ - |h|.
        let (h0, h) = rho.pauli_decomposition();
        let min_eig = h0 - h.norm();
        if min_eig < -tol::ALGEBRAIC {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(QubitState { rho })
    }

    /// Pure state `|ψ⟩⟨ψ|` from (not necessarily normalized) amplitudes.
    pub fn from_amplitudes(psi: [Complex64; 2]) -> Result<Self> {
        let norm2 = psi[0].norm_sqr() + psi[1].norm_sqr();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::InvalidArgument("zero or non-finite state vector".into()));
        }
        let s = 1.0 / norm2;
        let rho = Mat2::new(
            psi[0] * psi[0].conj() * s,
            psi[0] * psi[1].conj() * s,
            psi[1] * psi[0].conj() * s,
            psi[1] * psi[1].conj() * s,
        );
        QubitState::from_matrix(rho)
    }

    /// Equal-weight mixture of two states.
    pub fn mix(a: &QubitState, b: &QubitState) -> QubitState {
        QubitState { rho: (a.rho + b.rho).scale(Complex64::new(0.5, 0.0)) }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.rho
    }

    pub fn bloch(&self) -> BlochVector {
        let (_, h) = self.rho.pauli_decomposition();
        h.scale(2.0)
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }
}

/// A ±1-valued observable `m·σ` with unit Bloch direction `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryObservable {
    op: Mat2,
    direction: BlochVector,
}

impl BinaryObservable {
    /// Builds `m·σ`; the direction must be unit within the spectral tolerance
    /// and is renormalized exactly.
    pub fn from_direction(m: BlochVector) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("measurement direction"));
        }
        let norm = m.norm();
        if (norm - 1.0).abs() > tol::SPECTRAL {
            return Err(Error::InvalidArgument(format!("measurement direction has norm {norm}")));
        }
        let direction = m.scale(1.0 / norm);
        Ok(BinaryObservable { op: Mat2::pauli_combination(direction), direction })
    }

    pub fn sigma_x() -> Self {
        BinaryObservable { op: Mat2::PAULI_X, direction: BlochVector::X }
    }

    pub fn sigma_y() -> Self {
        BinaryObservable { op: Mat2::PAULI_Y, direction: BlochVector::Y }
    }

    pub fn sigma_z() -> Self {
        BinaryObservable { op: Mat2::PAULI_Z, direction: BlochVector::Z }
    }

    pub fn operator(&self) -> &Mat2 {
        &self.op
    }

    pub fn direction(&self) -> BlochVector {
        self.direction
    }

    /// The observable with outcomes relabelled (`-m·σ`).
    pub fn flipped(&self) -> Self {
        BinaryObservable { op: self.op.scale(-ONE), direction: -self.direction }
    }

    /// Eigenprojector for outcome `b`: `b = 0` is the +1 eigenspace.
    pub fn projector(&self, b: u8) -> Mat2 {
        let sign = if b == 0 { 1.0 } else { -1.0 };
        (Mat2::IDENTITY + self.op.scale(Complex64::new(sign, 0.0))).scale(Complex64::new(0.5, 0.0))
    }
}

/// Born rule `Tr(ρ Π_b)`.
pub fn outcome_prob(rho: &QubitState, obs: &BinaryObservable, b: u8) -> f64 {
    debug_assert!(b <= 1);
    (rho.rho * obs.projector(b)).trace().re
}

/// `⟨m·σ⟩ = n·m`.
pub fn expectation(rho: &QubitState, obs: &BinaryObservable) -> f64 {
    (rho.rho * obs.op).trace().re
}

/// Trace norm of a Hermitian 2x2 matrix, `|h0 + |h|| + |h0 - |h||`.
pub fn trace_norm_hermitian(h: &Mat2) -> f64 {
    let (h0, v) = h.pauli_decomposition();
    let r = v.norm();
    (h0 + r).abs() + (h0 - r).abs()
}

/// Optimal probability of discriminating two equiprobable states,
/// `½ + ¼‖ρ0 − ρ1‖₁`.
pub fn helstrom(rho0: &QubitState, rho1: &QubitState) -> f64 {
    0.5 + 0.25 * trace_norm_hermitian(&(rho0.rho - rho1.rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn plus() -> QubitState {
        QubitState::from_bloch(BlochVector::X).unwrap()
    }

    fn minus() -> QubitState {
        QubitState::from_bloch(-BlochVector::X).unwrap()
    }

    fn ket0() -> QubitState {
        QubitState::from_bloch(BlochVector::Z).unwrap()
    }

    fn ket1() -> QubitState {
        QubitState::from_bloch(-BlochVector::Z).unwrap()
    }

    #[test]
    fn state_from_bloch_examples() {
        assert_eq!(*ket0().matrix(), Mat2::diag(c(1.0), c(0.0)));
        let mixed = QubitState::from_bloch(BlochVector::ORIGIN).unwrap();
        assert_eq!(*mixed.matrix(), Mat2::IDENTITY.scale(c(0.5)));
        assert_eq!(*plus().matrix(), Mat2::new(c(0.5), c(0.5), c(0.5), c(0.5)));
    }

    #[test]
    fn unphysical_bloch_rejected() {
        assert!(matches!(QubitState::from_bloch(BlochVector::new(0.0, 0.8, 0.8)), Err(Error::UnphysicalBloch { .. })));
        assert!(QubitState::from_bloch(BlochVector::new(0.0, 0.0, 1.0 + 5e-13)).is_ok());
        assert!(QubitState::from_bloch(BlochVector::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn from_matrix_validation() {
        assert!(QubitState::from_matrix(Mat2::diag(c(0.7), c(0.3))).is_ok());
        assert!(QubitState::from_matrix(Mat2::diag(c(0.7), c(0.4))).is_err());
        assert!(QubitState::from_matrix(Mat2::diag(c(1.2), c(-0.2))).is_err());
        assert!(QubitState::from_matrix(Mat2::new(c(0.5), c(0.1), c(0.2), c(0.5))).is_err());
    }

    #[test]
    fn amplitudes_match_bloch() {
        let s = QubitState::from_amplitudes([c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)]).unwrap();
        assert!(s.matrix().max_abs_diff(minus().matrix()) < 1e-15);
    }

    #[test]
    fn outcome_prob_examples() {
        let z = BinaryObservable::sigma_z();
        assert_eq!(outcome_prob(&ket0(), &z, 0), 1.0);
        assert!((outcome_prob(&plus(), &z, 0) - 0.5).abs() < 1e-15);

        // M0(φs = π/4, φx = 0) has direction (sin π/4, 0, cos π/4).
        let m0 = BinaryObservable::from_direction(BlochVector::spherical(PI / 4.0, 0.0)).unwrap();
        // Hand evaluation: ρ = ½[[1,-1],[-1,1]], Π0 = ½[[1+c, s],[s, 1-c]] with c = s = √2/2,
        // Tr(ρΠ0) = ¼(1 + c - s - s + 1 - c) = ¼(2 - 2s).
        let s = FRAC_1_SQRT_2;
        let expected = 0.25 * (2.0 - 2.0 * s);
        assert!((outcome_prob(&minus(), &m0, 0) - expected).abs() < 1e-15);
        assert!((expected - 0.146_446_609_406_726_24).abs() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(expectation(&ket0(), &BinaryObservable::sigma_z()), 1.0);
        let mixed = QubitState::from_bloch(BlochVector::ORIGIN).unwrap();
        assert_eq!(expectation(&mixed, &BinaryObservable::sigma_y()), 0.0);
        let n = QubitState::from_bloch(BlochVector::new(0.0, 0.0, 0.6)).unwrap();
        assert!((expectation(&n, &BinaryObservable::sigma_z()) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn observable_invariants() {
        let y = BinaryObservable::sigma_y();
        assert!((*y.operator() * *y.operator()).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        assert!(BinaryObservable::from_direction(BlochVector::new(1.0, 1.0, 0.0)).is_err());
        let p0 = y.projector(0);
        let p1 = y.projector(1);
        assert!((p0 + p1).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        assert!((p0 * p1).max_abs_diff(&Mat2::ZERO) < 1e-15);
    }

    #[test]
    fn helstrom_examples() {
        assert!((helstrom(&ket0(), &ket1()) - 1.0).abs() < 1e-15);
        assert_eq!(helstrom(&plus(), &plus()), 0.5);
        let rho0 = QubitState::mix(&ket0(), &minus());
        let rho1 = QubitState::mix(&plus(), &ket1());
        // ρ0 − ρ1 = ½(σz − σx), eigenvalues ±√2/2, trace norm √2.
        assert!((helstrom(&rho0, &rho1) - (0.5 + SQRT_2 / 4.0)).abs() < 1e-15);
    }

    fn bloch_in_ball() -> impl Strategy<Value = BlochVector> {
        (0.0..=1.0f64, 0.0..PI, 0.0..(2.0 * PI)).prop_map(|(r, t, p)| BlochVector::spherical(t, p).scale(r))
    }

    fn unit_bloch() -> impl Strategy<Value = BlochVector> {
        (0.0..PI, 0.0..(2.0 * PI)).prop_map(|(t, p)| BlochVector::spherical(t, p))
    }

    proptest! {
        #[test]
        fn born_probabilities_normalize(n in bloch_in_ball(), m in unit_bloch()) {
            let rho = QubitState::from_bloch(n).unwrap();
            let obs = BinaryObservable::from_direction(m).unwrap();
            let p0 = outcome_prob(&rho, &obs, 0);
            let p1 = outcome_prob(&rho, &obs, 1);
            prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p0));
            prop_assert!((expectation(&rho, &obs) - (2.0 * p0 - 1.0)).abs() < 1e-12);
            prop_assert!((expectation(&rho, &obs) - n.dot(obs.direction())).abs() < 1e-12);
        }

        #[test]
        fn pure_states_are_projectors_and_round_trip(n in unit_bloch()) {
            let rho = QubitState::from_bloch(n).unwrap();
            prop_assert!((rho.purity() - 1.0).abs() < 1e-10);
            let back = rho.bloch();
            prop_assert!((back - n).norm() < 1e-12);
        }

        #[test]
        fn helstrom_symmetric_and_at_least_half(a in bloch_in_ball(), b in bloch_in_ball()) {
            let ra = QubitState::from_bloch(a).unwrap();
            let rb = QubitState::from_bloch(b).unwrap();
            let h = helstrom(&ra, &rb);
            prop_assert_eq!(h, helstrom(&rb, &ra));
            prop_assert!(h >= 0.5);
            // Pure-state/qubit closed form: ½ + ¼|a − b|.
            prop_assert!((h - (0.5 + 0.25 * (a - b).norm())).abs() < 1e-12);
        }
    }
}
