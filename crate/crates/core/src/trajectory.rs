//! Per-shot trajectory execution: one sampled Pauli per noise site, an
//! optional injected Pauli after it, and a final Z-basis measurement.
//!
//! Shots are embarrassingly parallel; each owns an [`RngStream`] so the
//! aggregate is bit-identical for any thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, CircuitOp, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::rng::RngStream;
use crate::statevector::StateVector;

enum PlanOp {
    Gate(Gate),
    Site(usize),
}

struct PlanSite {
    /// Cumulative probabilities paired with words already embedded on the
    /// full register; absent for noiseless sites.
    sampler: Option<(Vec<f64>, Vec<PauliString>)>,
    support: Vec<usize>,
}

/// A circuit prepared for repeated shot execution: per-site samplers are
/// materialized once (scale factors applied, words embedded).
pub struct CompiledCircuit {
    n: usize,
    initial_angles: Vec<f64>,
    ops: Vec<PlanOp>,
    sites: Vec<PlanSite>,
}

impl CompiledCircuit {
    pub fn new(circuit: &Circuit) -> Result<CompiledCircuit> {
        let n = circuit.num_qubits();
        let mut ops = Vec::with_capacity(circuit.ops().len());
        let mut sites = Vec::with_capacity(circuit.noise_site_count());
        for op in circuit.ops() {
            match op {
                CircuitOp::Gate(gate) => ops.push(PlanOp::Gate(gate.clone())),
                CircuitOp::Noise(site) => {
                    let channel = site.effective_channel()?;
                    let sampler = if channel.is_noiseless() {
                        None
                    } else {
                        let mut cdf = Vec::with_capacity(channel.probs().len());
                        let mut words = Vec::with_capacity(channel.probs().len());
                        let mut acc = 0.0;
                        for (word, &p) in channel.probs() {
                            acc += p;
                            cdf.push(acc);
                            words.push(word.embed(n, &site.support)?);
                        }
                        Some((cdf, words))
                    };
                    ops.push(PlanOp::Site(sites.len()));
                    sites.push(PlanSite {
                        sampler,
                        support: site.support.clone(),
                    });
                }
            }
        }
        Ok(CompiledCircuit {
            n,
            initial_angles: circuit.initial_angles().to_vec(),
            ops,
            sites,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site_support(&self, site: usize) -> &[usize] {
        &self.sites[site].support
    }

    /// Run one trajectory and return the measured bitstring.
    ///
    /// `injections` pairs a noise-site index with a Pauli word on that
    /// site's support, applied after the site's sampled noise Pauli.
    pub fn run_shot(
        &self,
        injections: &[(usize, PauliString)],
        rng: &mut ChaCha8Rng,
    ) -> Result<u64> {
        let mut embedded: Vec<Vec<PauliString>> = vec![Vec::new(); self.sites.len()];
        for (site, word) in injections {
            let plan = self
                .sites
                .get(*site)
                .ok_or_else(|| Error::InvalidSite(format!("site index {site} out of range")))?;
            embedded[*site].push(word.embed(self.n, &plan.support)?);
        }
        let mut state = StateVector::product(&self.initial_angles);
        for op in &self.ops {
            match op {
                PlanOp::Gate(gate) => state.apply_gate(gate)?,
                PlanOp::Site(idx) => {
                    if let Some((cdf, words)) = &self.sites[*idx].sampler {
                        let u: f64 = rng.gen();
                        let pick = cdf.partition_point(|&c| c <= u).min(words.len() - 1);
                        let word = &words[pick];
                        if !word.is_identity() {
                            state.apply_pauli(word)?;
                        }
                    }
                    for word in &embedded[*idx] {
                        if !word.is_identity() {
                            state.apply_pauli(word)?;
                        }
                    }
                }
            }
        }
        Ok(state.sample_z_basis(rng))
    }
}

/// One-off trajectory run (compiles the circuit first).
pub fn run_trajectory(
    circuit: &Circuit,
    injections: &[(usize, PauliString)],
    stream: RngStream,
) -> Result<u64> {
    CompiledCircuit::new(circuit)?.run_shot(injections, &mut stream.rng())
}

/// Map shots `0..count` to values in parallel and return them in shot
/// order, so reductions are independent of the thread count.
pub fn collect_shot_values<F>(count: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    (0..count as u64)
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<f64>>>()
}

/// Mean and unbiased sample variance via compensated accumulation;
/// variance is 0 for a single value.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0, "no shot values");
    let mean = kahan_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, ss / (n - 1) as f64)
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
