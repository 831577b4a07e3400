//! Exact small-system oracles: density-matrix evolution with channels
//! applied exactly, per-order generator-insertion expectations, and a
//! full superoperator mode for 1-2 qubit circuits.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::channel::{QuasiInverseChannel, StochasticPauliChannel};
use crate::circuit::{Circuit, CircuitOp, Gate};
use crate::error::{Error, Result};
use crate::observable::DiagonalObservable;
use crate::pauli::PauliString;
use crate::statevector::StateVector;

/// Density-matrix oracle cap.
pub const MAX_DENSITY_QUBITS: usize = 12;
/// Superoperator oracle caps.
pub const MAX_SUPEROP_QUBITS: usize = 2;
pub const MAX_SUPEROP_SITES: usize = 6;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense Hermitian-by-construction density matrix, row-major.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|psi><psi|` for the product state `prod_q Ry(angle_q)|0>`.
    pub fn from_product(angles: &[f64]) -> DensityMatrix {
        let state = StateVector::product(angles);
        DensityMatrix::from_statevector(&state)
    }

    pub fn from_statevector(state: &StateVector) -> DensityMatrix {
        let n = state.num_qubits();
        let dim = 1usize << n;
        let amps = state.amplitudes();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        DensityMatrix { n, dim, data }
    }

    fn zeros(n: usize) -> DensityMatrix {
        let dim = 1usize << n;
        DensityMatrix {
            n,
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `rho <- U rho` for a single-qubit unitary on `q`.
    fn apply_1q_left(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for r0 in 0..self.dim {
            if r0 & bit != 0 {
                continue;
            }
            let r1 = r0 | bit;
            for c in 0..self.dim {
                let a = self.data[r0 * self.dim + c];
                let b = self.data[r1 * self.dim + c];
                self.data[r0 * self.dim + c] = u[0][0] * a + u[0][1] * b;
                self.data[r1 * self.dim + c] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// `rho <- rho U^dagger` for a single-qubit unitary on `q`.
    fn apply_1q_right_dagger(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for c0 in 0..self.dim {
            if c0 & bit != 0 {
                continue;
            }
            let c1 = c0 | bit;
            for r in 0..self.dim {
                let a = self.data[r * self.dim + c0];
                let b = self.data[r * self.dim + c1];
                self.data[r * self.dim + c0] = a * u[0][0].conj() + b * u[0][1].conj();
                self.data[r * self.dim + c1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    fn apply_1q(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        self.apply_1q_left(q, u);
        self.apply_1q_right_dagger(q, u);
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let check = |q: usize| -> Result<()> {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
            Ok(())
        };
        match gate {
            Gate::Rx { theta, qubit } => {
                check(*qubit)?;
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                self.apply_1q(
                    *qubit,
                    [
                        [Complex64::new(c, 0.0), -I * s],
                        [-I * s, Complex64::new(c, 0.0)],
                    ],
                );
            }
            Gate::Ry { theta, qubit } => {
                check(*qubit)?;
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                self.apply_1q(
                    *qubit,
                    [
                        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                    ],
                );
            }
            Gate::Rzz { theta, qubits } => {
                check(qubits.0)?;
                check(qubits.1)?;
                let minus = Complex64::from_polar(1.0, -*theta);
                let plus = Complex64::from_polar(1.0, *theta);
                let b1 = 1usize << qubits.0;
                let b2 = 1usize << qubits.1;
                let phase = |idx: usize| {
                    if ((idx & b1 != 0) as u8) ^ ((idx & b2 != 0) as u8) == 0 {
                        minus
                    } else {
                        plus
                    }
                };
                for r in 0..self.dim {
                    let pr = phase(r);
                    for c in 0..self.dim {
                        self.data[r * self.dim + c] *= pr * phase(c).conj();
                    }
                }
            }
            Gate::PauliWord { word } => {
                if word.num_qubits() != self.n {
                    return Err(Error::ArityMismatch {
                        expected: self.n,
                        got: word.num_qubits(),
                    });
                }
                self.apply_pauli_conjugation(word);
            }
        }
        Ok(())
    }

    /// `rho <- P rho P^dagger` for a full-register Pauli word.
    ///
    /// Phases reduce to `(-1)^(z . (a xor b))` since the word's internal
    /// phase cancels between the two sides of the conjugation.
    pub fn apply_pauli_conjugation(&mut self, word: &PauliString) {
        let x = word.x_mask() as usize;
        let z = word.z_mask();
        if x == 0 && z == 0 {
            return;
        }
        let src = self.data.clone();
        for a in 0..self.dim {
            let sa = a ^ x;
            for b in 0..self.dim {
                let sign = if (z & (a ^ b) as u64).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                self.data[a * self.dim + b] = src[sa * self.dim + (b ^ x)] * sign;
            }
        }
    }

    /// `rho <- sum_i w_i P_i rho P_i` for signed conjugation weights with
    /// words already embedded on the full register.
    pub fn apply_weighted_conjugations(&mut self, terms: &[(f64, PauliString)]) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for (w, word) in terms {
            let x = word.x_mask() as usize;
            let z = word.z_mask();
            for a in 0..self.dim {
                let sa = a ^ x;
                let row_out = a * self.dim;
                let row_src = sa * self.dim;
                for b in 0..self.dim {
                    let sign = if (z & (a ^ b) as u64).count_ones() % 2 == 0 {
                        *w
                    } else {
                        -*w
                    };
                    out[row_out + b] += self.data[row_src + (b ^ x)] * sign;
                }
            }
        }
        self.data = out;
    }

    /// Apply a stochastic Pauli channel exactly on `support`.
    pub fn apply_stochastic_channel(
        &mut self,
        channel: &StochasticPauliChannel,
        support: &[usize],
    ) -> Result<()> {
        let terms = embed_weights(channel.probs(), self.n, support)?;
        self.apply_weighted_conjugations(&terms);
        Ok(())
    }

    /// Apply a quasi-inverse channel exactly on `support`: weight
    /// `1 + eps1` on the identity and `-eps2 c_i` on each term. Output may
    /// be non-physical but stays Hermitian with unit trace.
    pub fn apply_quasi_inverse(
        &mut self,
        quasi: &QuasiInverseChannel,
        support: &[usize],
    ) -> Result<()> {
        let terms = embed_weights(&quasi.conjugation_weights(), self.n, support)?;
        self.apply_weighted_conjugations(&terms);
        Ok(())
    }

    /// Apply the signed generator `E = sum_i c_i V_i(.)V_i` on `support`.
    pub fn apply_generator(
        &mut self,
        quasi: &QuasiInverseChannel,
        support: &[usize],
    ) -> Result<()> {
        let map: BTreeMap<PauliString, f64> = quasi
            .terms
            .iter()
            .map(|t| (t.word, t.coeff))
            .collect();
        let terms = embed_weights(&map, self.n, support)?;
        self.apply_weighted_conjugations(&terms);
        Ok(())
    }

    /// `Tr[O rho]` for a diagonal observable.
    pub fn expectation(&self, obs: &DiagonalObservable) -> Result<f64> {
        let mut total = 0.0;
        for b in 0..self.dim {
            total += self.data[b * self.dim + b].re * obs.evaluate(b as u64, self.n)?;
        }
        Ok(total)
    }

    fn add_assign(&mut self, other: &DensityMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

fn embed_weights(
    weights: &BTreeMap<PauliString, f64>,
    n: usize,
    support: &[usize],
) -> Result<Vec<(f64, PauliString)>> {
    weights
        .iter()
        .map(|(word, &w)| Ok((w, word.embed(n, support)?)))
        .collect()
}

/// Exact `Tr[O C(rho)]` with every channel applied exactly (no sampling).
///
/// Uses a pure statevector when the circuit carries no noise, and density
/// matrix evolution (capped at [`MAX_DENSITY_QUBITS`]) otherwise.
pub fn exact_expectation(
    circuit: &Circuit,
    injections: &[(usize, PauliString)],
    obs: &DiagonalObservable,
) -> Result<f64> {
    let n = circuit.num_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::SizeLimit(format!(
            "exact expectation limited to {MAX_DENSITY_QUBITS} qubits, circuit has {n}"
        )));
    }
    let mut by_site: BTreeMap<usize, Vec<&PauliString>> = BTreeMap::new();
    for (site, word) in injections {
        if *site >= circuit.noise_site_count() {
            return Err(Error::InvalidSite(format!("site index {site} out of range")));
        }
        by_site.entry(*site).or_default().push(word);
    }
    if circuit.is_noiseless() {
        // Injections are unitary Pauli words, so the state stays pure.
        let mut state = StateVector::product(circuit.initial_angles());
        let mut site_idx = 0usize;
        for op in circuit.ops() {
            match op {
                CircuitOp::Gate(gate) => state.apply_gate(gate)?,
                CircuitOp::Noise(site) => {
                    if let Some(words) = by_site.get(&site_idx) {
                        for word in words {
                            state.apply_pauli(&word.embed(n, &site.support)?)?;
                        }
                    }
                    site_idx += 1;
                }
            }
        }
        return Ok(state.diagonal_expectation(|bits| {
            obs.evaluate(bits, n).expect("bitstring length matches")
        }));
    }
    let mut rho = DensityMatrix::from_product(circuit.initial_angles());
    let mut site_idx = 0usize;
    for op in circuit.ops() {
        match op {
            CircuitOp::Gate(gate) => rho.apply_gate(gate)?,
            CircuitOp::Noise(site) => {
                let channel = site.effective_channel()?;
                rho.apply_stochastic_channel(&channel, &site.support)?;
                if let Some(words) = by_site.get(&site_idx) {
                    for word in words {
                        rho.apply_pauli_conjugation(&word.embed(n, &site.support)?);
                    }
                }
                site_idx += 1;
            }
        }
    }
    rho.expectation(obs)
}

/// Exact per-order expectations `<O>_k` for `k = 0..=k_max`: the value of
/// the noisy circuit with `k` generator insertions averaged over all
/// location subsets, computed by a running polynomial of density
/// matrices (one slot per order).
pub fn exact_order_expectations(
    circuit: &Circuit,
    quasi: &QuasiInverseChannel,
    k_max: usize,
    obs: &DiagonalObservable,
) -> Result<Vec<f64>> {
    let n = circuit.num_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::SizeLimit(format!(
            "per-order oracle limited to {MAX_DENSITY_QUBITS} qubits, circuit has {n}"
        )));
    }
    let l = circuit.noise_site_count();
    let k_max = k_max.min(l);
    let mut slots: Vec<DensityMatrix> = Vec::with_capacity(k_max + 1);
    slots.push(DensityMatrix::from_product(circuit.initial_angles()));
    for _ in 0..k_max {
        slots.push(DensityMatrix::zeros(n));
    }
    for op in circuit.ops() {
        match op {
            CircuitOp::Gate(gate) => {
                for slot in &mut slots {
                    slot.apply_gate(gate)?;
                }
            }
            CircuitOp::Noise(site) => {
                let channel = site.effective_channel()?;
                for slot in &mut slots {
                    slot.apply_stochastic_channel(&channel, &site.support)?;
                }
                // Descending so each lower-order slot is read before its
                // own update at this site.
                for j in (1..=k_max).rev() {
                    let mut with_generator = slots[j - 1].clone();
                    with_generator.apply_generator(quasi, &site.support)?;
                    slots[j].add_assign(&with_generator);
                }
            }
        }
    }
    let mut values = Vec::with_capacity(k_max + 1);
    for (k, slot) in slots.iter().enumerate() {
        values.push(slot.expectation(obs)? / binomial(l, k));
    }
    Ok(values)
}

pub(crate) fn binomial(l: usize, k: usize) -> f64 {
    if k > l {
        return 0.0;
    }
    let k = k.min(l - k);
    let mut b = 1.0f64;
    for j in 0..k {
        b = b * (l - j) as f64 / (j + 1) as f64;
    }
    b
}

// ---------------------------------------------------------------------------
// Superoperator mode
// ---------------------------------------------------------------------------

/// Dense complex matrix, row-major. Used for superoperators (dimension
/// `4^n`) and the unitaries feeding them.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> CMat {
        CMat {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> CMat {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut out = CMat::zeros(dim);
        for r in 0..dim {
            for k in 0..dim {
                let a = self.data[r * dim + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..dim {
                    out.data[r * dim + c] += a * other.data[k * dim + c];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..self.dim {
                acc += self.data[r * self.dim + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn kron(&self, other: &CMat) -> CMat {
        let dim = self.dim * other.dim;
        let mut out = CMat::zeros(dim);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        out.set(
                            r1 * other.dim + r2,
                            c1 * other.dim + c2,
                            a * other.get(r2, c2),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn conj(&self) -> CMat {
        CMat {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &CMat, w: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * w;
        }
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Dense `2^n x 2^n` matrix of a Pauli word, built by Kronecker products
/// (qubit 0 is the least significant factor).
pub fn dense_pauli(word: &PauliString) -> CMat {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let single = |p: crate::pauli::Pauli| -> CMat {
        let data = match p {
            crate::pauli::Pauli::I => vec![one, zero, zero, one],
            crate::pauli::Pauli::X => vec![zero, one, one, zero],
            crate::pauli::Pauli::Y => vec![zero, -I, I, zero],
            crate::pauli::Pauli::Z => vec![one, zero, zero, -one],
        };
        CMat { dim: 2, data }
    };
    let mut m = CMat::identity(1);
    for q in (0..word.num_qubits()).rev() {
        m = m.kron(&single(word.op(q)));
    }
    m
}

/// Dense unitary of one gate on the full `n`-qubit register.
pub fn dense_gate(gate: &Gate, n: usize) -> Result<CMat> {
    let dim = 1usize << n;
    match gate {
        Gate::Rx { theta, qubit } => {
            let word = PauliString::single(n, *qubit, crate::pauli::Pauli::X);
            Ok(pauli_exponential(&word, theta / 2.0, dim))
        }
        Gate::Ry { theta, qubit } => {
            let word = PauliString::single(n, *qubit, crate::pauli::Pauli::Y);
            Ok(pauli_exponential(&word, theta / 2.0, dim))
        }
        Gate::Rzz { theta, qubits } => {
            let mut word = PauliString::identity(n);
            word.set(qubits.0, crate::pauli::Pauli::Z);
            word.set(qubits.1, crate::pauli::Pauli::Z);
            Ok(pauli_exponential(&word, *theta, dim))
        }
        Gate::PauliWord { word } => Ok(dense_pauli(word)),
    }
}

/// `exp(-i alpha P) = cos(alpha) I - i sin(alpha) P` for involutory `P`.
fn pauli_exponential(word: &PauliString, alpha: f64, dim: usize) -> CMat {
    let mut m = CMat::identity(dim);
    let p = dense_pauli(word);
    for (out, pw) in m.data.iter_mut().zip(&p.data) {
        *out = *out * alpha.cos() - I * alpha.sin() * pw;
    }
    m
}

/// A superoperator in column-stacking convention: `vec(A X B) =
/// (B^T kron A) vec(X)`.
#[derive(Debug, Clone)]
pub struct SuperOp(pub CMat);

impl SuperOp {
    pub fn identity(n: usize) -> SuperOp {
        SuperOp(CMat::identity(1 << (2 * n)))
    }

    pub fn from_unitary(u: &CMat) -> SuperOp {
        SuperOp(u.conj().kron(u))
    }

    /// `sum_i w_i P_i(.)P_i` for signed conjugation weights on the full
    /// register.
    pub fn from_pauli_mixture(terms: &[(f64, PauliString)], n: usize) -> SuperOp {
        let dim = 1usize << (2 * n);
        let mut acc = CMat::zeros(dim);
        for (w, word) in terms {
            let p = dense_pauli(word);
            acc.add_scaled(&p.conj().kron(&p), *w);
        }
        SuperOp(acc)
    }

    /// Composition `other` after `self`.
    pub fn then(&self, other: &SuperOp) -> SuperOp {
        SuperOp(other.0.matmul(&self.0))
    }

    pub fn scaled(&self, w: f64) -> SuperOp {
        let mut m = CMat::zeros(self.0.dim);
        m.add_scaled(&self.0, w);
        SuperOp(m)
    }

    pub fn add_scaled(&mut self, other: &SuperOp, w: f64) {
        self.0.add_scaled(&other.0, w);
    }

    pub fn max_abs_diff(&self, other: &SuperOp) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// Apply to a density matrix given in column-stacked form and return
    /// `Tr[O rho_out]`.
    pub fn expectation(
        &self,
        initial_angles: &[f64],
        obs: &DiagonalObservable,
    ) -> Result<f64> {
        let n = initial_angles.len();
        let dim = 1usize << n;
        let rho = DensityMatrix::from_product(initial_angles);
        let mut vec_rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for c in 0..dim {
            for r in 0..dim {
                vec_rho[c * dim + r] = rho.entry(r, c);
            }
        }
        let out = self.0.matvec(&vec_rho);
        let mut total = 0.0;
        for b in 0..dim {
            total += out[b * dim + b].re * obs.evaluate(b as u64, n)?;
        }
        Ok(total)
    }
}

fn check_superop_limits(circuit: &Circuit) -> Result<()> {
    if circuit.num_qubits() > MAX_SUPEROP_QUBITS {
        return Err(Error::SizeLimit(format!(
            "superoperator mode limited to {MAX_SUPEROP_QUBITS} qubits, circuit has {}",
            circuit.num_qubits()
        )));
    }
    if circuit.noise_site_count() > MAX_SUPEROP_SITES {
        return Err(Error::SizeLimit(format!(
            "superoperator mode limited to {MAX_SUPEROP_SITES} noise sites, circuit has {}",
            circuit.noise_site_count()
        )));
    }
    Ok(())
}

/// Full superoperator of the circuit, with optional signed Pauli-mixture
/// insertions applied after the listed noise sites.
pub fn circuit_superoperator(
    circuit: &Circuit,
    insertions: &BTreeMap<usize, Vec<(f64, PauliString)>>,
) -> Result<SuperOp> {
    check_superop_limits(circuit)?;
    let n = circuit.num_qubits();
    let mut acc = SuperOp::identity(n);
    let mut site_idx = 0usize;
    for op in circuit.ops() {
        match op {
            CircuitOp::Gate(gate) => {
                acc = acc.then(&SuperOp::from_unitary(&dense_gate(gate, n)?));
            }
            CircuitOp::Noise(site) => {
                let channel = site.effective_channel()?;
                let terms = embed_weights(channel.probs(), n, &site.support)?;
                acc = acc.then(&SuperOp::from_pauli_mixture(&terms, n));
                if let Some(mix) = insertions.get(&site_idx) {
                    let embedded: Vec<(f64, PauliString)> = mix
                        .iter()
                        .map(|(w, word)| Ok((*w, word.embed(n, &site.support)?)))
                        .collect::<Result<_>>()?;
                    acc = acc.then(&SuperOp::from_pauli_mixture(&embedded, n));
                }
                site_idx += 1;
            }
        }
    }
    Ok(acc)
}

/// Average superoperator of the order-`k` insertion class: generator
/// insertions at every size-`k` subset of the noise sites, averaged.
pub fn order_k_superoperator(
    circuit: &Circuit,
    quasi: &QuasiInverseChannel,
    k: usize,
) -> Result<SuperOp> {
    check_superop_limits(circuit)?;
    let l = circuit.noise_site_count();
    if k > l {
        return Err(Error::InvalidParameter(format!(
            "order {k} exceeds {l} noise sites"
        )));
    }
    let generator: Vec<(f64, PauliString)> =
        quasi.terms.iter().map(|t| (t.coeff, t.word)).collect();
    let n = circuit.num_qubits();
    let mut acc = SuperOp(CMat::zeros(1 << (2 * n)));
    let subsets = subsets_of_size(l, k);
    for subset in &subsets {
        let mut insertions = BTreeMap::new();
        for &site in subset {
            insertions.insert(site, generator.clone());
        }
        acc.add_scaled(&circuit_superoperator(circuit, &insertions)?, 1.0);
    }
    Ok(acc.scaled(1.0 / subsets.len() as f64))
}

/// Exact expectation via the superoperator route (1-2 qubit circuits).
pub fn exact_expectation_superoperator(
    circuit: &Circuit,
    injections: &[(usize, PauliString)],
    obs: &DiagonalObservable,
) -> Result<f64> {
    let mut insertions: BTreeMap<usize, Vec<(f64, PauliString)>> = BTreeMap::new();
    for (site, word) in injections {
        insertions.entry(*site).or_default().push((1.0, *word));
    }
    let superop = circuit_superoperator(circuit, &insertions)?;
    superop.expectation(circuit.initial_angles(), obs)
}

fn subsets_of_size(l: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn recurse(start: usize, l: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..l {
            current.push(i);
            recurse(i + 1, l, k, current, out);
            current.pop();
        }
    }
    recurse(0, l, k, &mut current, &mut out);
    out
}
