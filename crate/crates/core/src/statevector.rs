//! Dense statevector with the gate kernels used by the trajectory
//! simulator: X/Y rotations, the two-qubit ZZ rotation, and Pauli words.
//!
//! Basis index bit `q` holds the state of qubit `q` (qubit 0 is the least
//! significant bit).

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `n` qubits.
    pub fn zero(n: usize) -> StateVector {
        assert!(n <= 26, "statevector limited to 26 qubits");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    /// Product state `prod_q Ry(angle_q) |0>`.
    pub fn product(angles: &[f64]) -> StateVector {
        let mut state = StateVector::zero(angles.len());
        for (q, &angle) in angles.iter().enumerate() {
            if angle != 0.0 {
                state.apply_ry(angle, q).expect("qubit in range");
            }
        }
        state
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        Ok(())
    }

    /// Generic single-qubit unitary, applied over amplitude pairs that
    /// differ only in bit `q`.
    fn apply_1q(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for base in 0..self.amps.len() {
            if base & bit == 0 {
                let a = self.amps[base];
                let b = self.amps[base | bit];
                self.amps[base] = u[0][0] * a + u[0][1] * b;
                self.amps[base | bit] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// `exp(-i theta X / 2)`.
    pub fn apply_rx(&mut self, theta: f64, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        self.apply_1q(
            q,
            [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
        );
        Ok(())
    }

    /// `exp(-i theta Y / 2)`.
    pub fn apply_ry(&mut self, theta: f64, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        self.apply_1q(
            q,
            [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
        );
        Ok(())
    }

    /// `exp(-i theta Z x Z)`: diagonal phase `exp(-i theta)` on even-parity
    /// basis states and `exp(+i theta)` on odd-parity ones.
    pub fn apply_rzz(&mut self, theta: f64, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::InvalidParameter(format!(
                "rzz requires distinct qubits, got {q1} twice"
            )));
        }
        let minus = Complex64::from_polar(1.0, -theta);
        let plus = Complex64::from_polar(1.0, theta);
        let b1 = 1usize << q1;
        let b2 = 1usize << q2;
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            let parity = ((idx & b1 != 0) as u8) ^ ((idx & b2 != 0) as u8);
            *amp *= if parity == 0 { minus } else { plus };
        }
        Ok(())
    }

    /// Apply a Pauli word on the full register (exact phases kept).
    pub fn apply_pauli(&mut self, word: &PauliString) -> Result<()> {
        if word.num_qubits() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                got: word.num_qubits(),
            });
        }
        for q in 0..self.n {
            match word.op(q) {
                Pauli::I => {}
                Pauli::X => self.apply_x(q),
                Pauli::Y => self.apply_y(q),
                Pauli::Z => self.apply_z(q),
            }
        }
        Ok(())
    }

    fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        for base in 0..self.amps.len() {
            if base & bit == 0 {
                self.amps.swap(base, base | bit);
            }
        }
    }

    fn apply_y(&mut self, q: usize) {
        let bit = 1usize << q;
        let i = Complex64::new(0.0, 1.0);
        for base in 0..self.amps.len() {
            if base & bit == 0 {
                let a = self.amps[base];
                let b = self.amps[base | bit];
                // Y|0> = i|1>, Y|1> = -i|0>.
                self.amps[base] = -i * b;
                self.amps[base | bit] = i * a;
            }
        }
    }

    fn apply_z(&mut self, q: usize) {
        let bit = 1usize << q;
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & bit != 0 {
                *amp = -*amp;
            }
        }
    }

    /// Dispatch one circuit gate.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Rx { theta, qubit } => self.apply_rx(*theta, *qubit),
            Gate::Ry { theta, qubit } => self.apply_ry(*theta, *qubit),
            Gate::Rzz { theta, qubits } => self.apply_rzz(*theta, qubits.0, qubits.1),
            Gate::PauliWord { word } => self.apply_pauli(word),
        }
    }

    /// Sample a computational-basis outcome from `|amplitude|^2`.
    pub fn sample_z_basis<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (idx, amp) in self.amps.iter().enumerate() {
            acc += amp.norm_sqr();
            if u < acc {
                return idx as u64;
            }
        }
        (self.amps.len() - 1) as u64
    }

    /// `sum_b |amp_b|^2 f(b)` for a diagnostic diagonal functional.
    pub fn diagonal_expectation(&self, f: impl Fn(u64) -> f64) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(idx, amp)| amp.norm_sqr() * f(idx as u64))
            .sum()
    }
}
