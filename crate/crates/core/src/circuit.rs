//! Circuit intermediate representation with annotated noise sites, plus
//! the builder for second-order Trotter circuits of the transverse-field
//! Ising model on a periodic lattice.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::StochasticPauliChannel;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Gate set of the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(-i theta X / 2)`.
    Rx { theta: f64, qubit: usize },
    /// `exp(-i theta Y / 2)`.
    Ry { theta: f64, qubit: usize },
    /// `exp(-i theta Z x Z)`.
    Rzz { theta: f64, qubits: (usize, usize) },
    /// A Pauli word on the full register.
    PauliWord { word: PauliString },
}

impl Gate {
    pub fn support(&self) -> Vec<usize> {
        match self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } => vec![*qubit],
            Gate::Rzz { qubits, .. } => vec![qubits.0, qubits.1],
            Gate::PauliWord { word } => (0..word.num_qubits()).collect(),
        }
    }
}

/// A noise location: a stochastic Pauli channel acting on `support`,
/// with an accumulated noise-scaling factor applied lazily so repeated
/// scalings compose exactly.
#[derive(Debug, Clone)]
pub struct NoiseSite {
    pub support: Vec<usize>,
    pub channel: Arc<StochasticPauliChannel>,
    pub scale: f64,
}

impl NoiseSite {
    /// The channel with the accumulated scale factor applied.
    pub fn effective_channel(&self) -> Result<StochasticPauliChannel> {
        if self.scale == 1.0 {
            Ok((*self.channel).clone())
        } else {
            self.channel.scaled(self.scale)
        }
    }
}

impl PartialEq for NoiseSite {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support
            && self.scale == other.scale
            && *self.channel == *other.channel
    }
}

/// One entry of the execution sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitOp {
    Gate(Gate),
    Noise(NoiseSite),
}

/// Ordered gate list with interleaved noise sites and a product initial
/// state given by one Ry angle per qubit. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    initial_angles: Vec<f64>,
    ops: Vec<CircuitOp>,
    num_sites: usize,
}

impl Circuit {
    pub fn new(n: usize) -> Circuit {
        Circuit {
            n,
            initial_angles: vec![0.0; n],
            ops: Vec::new(),
            num_sites: 0,
        }
    }

    pub fn with_initial_angles(mut self, angles: Vec<f64>) -> Circuit {
        assert_eq!(angles.len(), self.n);
        self.initial_angles = angles;
        self
    }

    pub fn push_gate(&mut self, gate: Gate) -> Result<()> {
        for q in gate.support() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        if let Gate::PauliWord { word } = &gate {
            if word.num_qubits() != self.n {
                return Err(Error::ArityMismatch {
                    expected: self.n,
                    got: word.num_qubits(),
                });
            }
        }
        self.ops.push(CircuitOp::Gate(gate));
        Ok(())
    }

    /// Attach a noise site acting on `support` at the current position.
    pub fn push_noise(
        &mut self,
        support: Vec<usize>,
        channel: Arc<StochasticPauliChannel>,
    ) -> Result<()> {
        if channel.num_qubits() != support.len() {
            return Err(Error::ArityMismatch {
                expected: channel.num_qubits(),
                got: support.len(),
            });
        }
        for &q in &support {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        self.ops.push(CircuitOp::Noise(NoiseSite {
            support,
            channel,
            scale: 1.0,
        }));
        self.num_sites += 1;
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn initial_angles(&self) -> &[f64] {
        &self.initial_angles
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    /// Number of noise sites `l`.
    pub fn noise_site_count(&self) -> usize {
        self.num_sites
    }

    pub fn noise_sites(&self) -> impl Iterator<Item = &NoiseSite> {
        self.ops.iter().filter_map(|op| match op {
            CircuitOp::Noise(site) => Some(site),
            CircuitOp::Gate(_) => None,
        })
    }

    /// `true` when every noise site is noiseless.
    pub fn is_noiseless(&self) -> bool {
        self.noise_sites()
            .all(|site| site.scale == 0.0 || site.channel.is_noiseless())
    }

    /// The shared (channel, scale) pair when all sites are identical, as
    /// required by the homogeneous-channel estimators.
    pub fn homogeneous_site(&self) -> Option<&NoiseSite> {
        let mut sites = self.noise_sites();
        let first = sites.next()?;
        for site in sites {
            if site.scale != first.scale || *site.channel != *first.channel {
                return None;
            }
        }
        Some(first)
    }

    /// Copy of the circuit with every noise-site error probability
    /// multiplied by `factor`.
    ///
    /// Scaling accumulates multiplicatively on each site, so
    /// `scale_noise(scale_noise(c, a), b)` equals `scale_noise(c, a * b)`
    /// exactly.
    pub fn scale_noise(&self, factor: f64) -> Result<Circuit> {
        if factor < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise scale factor {factor} must be non-negative"
            )));
        }
        let mut scaled = self.clone();
        for op in &mut scaled.ops {
            if let CircuitOp::Noise(site) = op {
                let new_scale = site.scale * factor;
                if new_scale * site.channel.error_weight() >= 1.0 {
                    return Err(Error::InvalidProbability(format!(
                        "scaled error mass {} >= 1",
                        new_scale * site.channel.error_weight()
                    )));
                }
                site.scale = new_scale;
            }
        }
        Ok(scaled)
    }
}

/// Rectangular lattice with periodic boundaries on both dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    /// ZZ coupling `J`.
    pub coupling: f64,
    /// Transverse field `h`.
    pub field: f64,
    /// Trotter step size `tau`.
    pub tau: f64,
    /// Number of Trotter repetitions.
    pub steps: usize,
}

impl LatticeSpec {
    pub fn num_qubits(&self) -> usize {
        self.rows * self.cols
    }

    fn vertex(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    /// Deduplicated torus edge set: horizontal edges in row-major order,
    /// then vertical ones. For rows, cols >= 3 this yields exactly
    /// `2 * rows * cols` edges; wrap duplicates (dimension 2) and
    /// self-loops (dimension 1) are dropped.
    pub fn torus_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut push = |a: usize, b: usize| {
            if a == b {
                return;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                edges.push((a, b));
            }
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                push(self.vertex(r, c), self.vertex(r, (c + 1) % self.cols));
            }
        }
        for r in 0..self.rows {
            for c in 0..self.cols {
                push(self.vertex(r, c), self.vertex((r + 1) % self.rows, c));
            }
        }
        edges
    }
}

/// Build the second-order Trotter circuit for the periodic-lattice TFIM.
///
/// Each step applies a half-angle X layer (`Rx(h * tau)` per qubit, i.e.
/// `exp(-i h X tau / 2)`), then `Rzz(J * tau)` on every torus edge with a
/// noise site after each two-qubit gate, then the closing half X layer.
/// Half layers of adjacent steps are not merged, so the noise-site count
/// is exactly `steps * edges`.
pub fn build_tfim_trotter(
    spec: &LatticeSpec,
    channel: &StochasticPauliChannel,
    initial_angle: f64,
) -> Result<Circuit> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidParameter(
            "lattice dimensions must be >= 1".into(),
        ));
    }
    if channel.num_qubits() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            got: channel.num_qubits(),
        });
    }
    let n = spec.num_qubits();
    let edges = spec.torus_edges();
    let channel = Arc::new(channel.clone());
    let mut circuit = Circuit::new(n).with_initial_angles(vec![initial_angle; n]);
    let half_x = spec.field * spec.tau;
    let zz = spec.coupling * spec.tau;
    for _ in 0..spec.steps {
        for q in 0..n {
            circuit.push_gate(Gate::Rx {
                theta: half_x,
                qubit: q,
            })?;
        }
        for &(a, b) in &edges {
            circuit.push_gate(Gate::Rzz {
                theta: zz,
                qubits: (a, b),
            })?;
            circuit.push_noise(vec![a, b], Arc::clone(&channel))?;
        }
        for q in 0..n {
            circuit.push_gate(Gate::Rx {
                theta: half_x,
                qubit: q,
            })?;
        }
    }
    Ok(circuit)
}

/// Convert an averaged gate infidelity into a uniform depolarizing
/// channel on `n` qubits.
///
/// With `d = 2^n`, average fidelity relates to process fidelity by
/// `F_avg = (d F_pro + 1) / (d + 1)` and a uniform depolarizing channel
/// has `F_pro = 1 - eps`, giving `eps = infidelity * (d + 1) / d`.
pub fn infidelity_to_depolarizing(
    avg_infidelity: f64,
    n: usize,
) -> Result<StochasticPauliChannel> {
    if !(0.0..1.0).contains(&avg_infidelity) {
        return Err(Error::InvalidParameter(format!(
            "average infidelity {avg_infidelity} outside [0, 1)"
        )));
    }
    let d = (1u64 << n) as f64;
    let eps = avg_infidelity * (d + 1.0) / d;
    StochasticPauliChannel::depolarizing(n, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lattice(rows: usize, cols: usize, steps: usize) -> LatticeSpec {
        LatticeSpec {
            rows,
            cols,
            coupling: 1.0,
            field: 2.0,
            tau: 0.2,
            steps,
        }
    }

    #[test]
    fn torus_3x3_edge_count_and_degree() {
        let edges = lattice(3, 3, 1).torus_edges();
        assert_eq!(edges.len(), 18);
        let mut degree = vec![0usize; 9];
        for (a, b) in edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        assert!(degree.iter().all(|&d| d == 4));
    }

    #[test]
    fn torus_4x5_edge_count() {
        assert_eq!(lattice(4, 5, 1).torus_edges().len(), 40);
    }

    #[test]
    fn small_dimensions_deduplicate() {
        // 2 x 3: vertical wrap edges coincide pairwise.
        assert_eq!(lattice(2, 3, 1).torus_edges().len(), 9);
        // 1 x 3 ring.
        assert_eq!(lattice(1, 3, 1).torus_edges().len(), 3);
        // Single vertex: no edges.
        assert_eq!(lattice(1, 1, 1).torus_edges().len(), 0);
    }

    #[test]
    fn tfim_build_counts() {
        let channel = StochasticPauliChannel::depolarizing(2, 1e-3).unwrap();
        let circuit = build_tfim_trotter(&lattice(3, 3, 2), &channel, 0.1).unwrap();
        assert_eq!(circuit.num_qubits(), 9);
        assert_eq!(circuit.noise_site_count(), 36);
        let gates = circuit
            .ops()
            .iter()
            .filter(|op| matches!(op, CircuitOp::Gate(_)))
            .count();
        // Per step: 9 + 18 + 9 gates.
        assert_eq!(gates, 2 * (9 + 18 + 9));
    }

    #[test]
    fn tfim_zero_steps_is_state_prep_only() {
        let channel = StochasticPauliChannel::depolarizing(2, 1e-3).unwrap();
        let circuit = build_tfim_trotter(&lattice(3, 3, 0), &channel, 0.3).unwrap();
        assert!(circuit.ops().is_empty());
        assert_eq!(circuit.noise_site_count(), 0);
        assert!(circuit.initial_angles().iter().all(|&a| a == 0.3));
    }

    #[test]
    fn tfim_rejects_one_qubit_channel() {
        let channel = StochasticPauliChannel::depolarizing(1, 1e-3).unwrap();
        assert!(build_tfim_trotter(&lattice(3, 3, 1), &channel, 0.0).is_err());
    }

    #[test]
    fn build_is_deterministic() {
        let channel = StochasticPauliChannel::depolarizing(2, 1e-3).unwrap();
        let a = build_tfim_trotter(&lattice(4, 5, 3), &channel, 0.25).unwrap();
        let b = build_tfim_trotter(&lattice(4, 5, 3), &channel, 0.25).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scale_noise_identity_factor() {
        let channel = StochasticPauliChannel::depolarizing(2, 6e-4).unwrap();
        let circuit = build_tfim_trotter(&lattice(3, 3, 1), &channel, 0.0).unwrap();
        assert_eq!(circuit.scale_noise(1.0).unwrap(), circuit);
    }

    #[test]
    fn scale_noise_scales_error_weight() {
        let channel = StochasticPauliChannel::depolarizing(2, 6e-4).unwrap();
        let circuit = build_tfim_trotter(&lattice(3, 3, 1), &channel, 0.0).unwrap();
        let scaled = circuit.scale_noise(4.0).unwrap();
        for site in scaled.noise_sites() {
            assert_abs_diff_eq!(
                site.effective_channel().unwrap().error_weight(),
                2.4e-3,
                epsilon = 1e-18
            );
        }
    }

    #[test]
    fn scale_noise_composes_exactly() {
        let channel = StochasticPauliChannel::depolarizing(2, 1e-2).unwrap();
        let circuit = build_tfim_trotter(&lattice(2, 2, 1), &channel, 0.0).unwrap();
        let two_hops = circuit
            .scale_noise(1.7)
            .unwrap()
            .scale_noise(3.1)
            .unwrap();
        let one_hop = circuit.scale_noise(1.7 * 3.1).unwrap();
        assert_eq!(two_hops, one_hop);
    }

    #[test]
    fn scale_noise_rejects_saturation() {
        let mut probs = std::collections::BTreeMap::new();
        probs.insert(PauliString::parse("X").unwrap(), 0.3);
        let channel =
            Arc::new(StochasticPauliChannel::from_probs(1, probs).unwrap());
        let mut circuit = Circuit::new(1);
        circuit
            .push_gate(Gate::Rx {
                theta: 0.0,
                qubit: 0,
            })
            .unwrap();
        circuit.push_noise(vec![0], channel).unwrap();
        assert!(circuit.scale_noise(4.0).is_err());
    }

    #[test]
    fn infidelity_conversion_values() {
        let ch = infidelity_to_depolarizing(5.3e-4, 2).unwrap();
        assert_abs_diff_eq!(ch.error_weight(), 6.625e-4, epsilon = 1e-18);
        let ch1 = infidelity_to_depolarizing(0.01, 1).unwrap();
        assert_abs_diff_eq!(ch1.error_weight(), 0.015, epsilon = 1e-16);
        let id = infidelity_to_depolarizing(0.0, 2).unwrap();
        assert!(id.is_noiseless());
    }

    #[test]
    fn homogeneous_site_detection() {
        let channel = StochasticPauliChannel::depolarizing(2, 1e-3).unwrap();
        let circuit = build_tfim_trotter(&lattice(2, 3, 2), &channel, 0.0).unwrap();
        assert!(circuit.homogeneous_site().is_some());
        let mut mixed = circuit.clone();
        let other = Arc::new(StochasticPauliChannel::depolarizing(2, 5e-3).unwrap());
        mixed.push_noise(vec![0, 1], other).unwrap();
        assert!(mixed.homogeneous_site().is_none());
    }
}
