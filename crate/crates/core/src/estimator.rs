//! Assembly of the truncated-expansion estimator: uniform location
//! sampling for the order-`k` observables, sign-weighted generator-term
//! draws, and the variance accounting of the deterministic allocation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::QuasiInverseChannel;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gamma::{allocate_shots, GammaSeries, ShotPlan, TruncationPolicy};
use crate::observable::DiagonalObservable;
use crate::pauli::PauliString;
use crate::rng::RngStream;
use crate::trajectory::{collect_shot_values, mean_and_variance, CompiledCircuit};

/// Estimation method tag used across reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Raw,
    Pec,
    Zne,
    Fpec,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Raw => "raw",
            Method::Pec => "pec",
            Method::Zne => "zne",
            Method::Fpec => "fpec",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Method, String> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Method::Raw),
            "pec" => Ok(Method::Pec),
            "zne" => Ok(Method::Zne),
            "fpec" => Ok(Method::Fpec),
            other => Err(format!(
                "unknown method '{other}', expected raw, pec, zne or fpec"
            )),
        }
    }
}

/// Per-order statistics of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerOrderStats {
    pub k: usize,
    pub gamma: f64,
    pub shots: u64,
    pub mean: f64,
    pub var: f64,
}

/// A mitigated (or raw) estimate with its error accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub method: Method,
    pub mean: f64,
    /// Absent when a variance cannot be formed (single shot).
    pub std_error: Option<f64>,
    #[serde(rename = "K")]
    pub truncation_order: usize,
    pub bias_bound: f64,
    pub per_k: Vec<PerOrderStats>,
}

impl EstimatorReport {
    /// Per-shot variance `M * std_error^2`, comparable across methods at
    /// equal budget.
    pub fn var_per_shot(&self) -> Option<f64> {
        let total: u64 = self.per_k.iter().map(|p| p.shots).sum();
        self.std_error.map(|se| se * se * total as f64)
    }
}

/// Draws generator terms with probability `|c_i|`, recording the
/// coefficient sign.
pub(crate) struct GeneratorSampler {
    cdf: Vec<f64>,
    words: Vec<PauliString>,
    signs: Vec<f64>,
}

impl GeneratorSampler {
    pub(crate) fn new(quasi: &QuasiInverseChannel) -> GeneratorSampler {
        let mut cdf = Vec::with_capacity(quasi.terms.len());
        let mut words = Vec::with_capacity(quasi.terms.len());
        let mut signs = Vec::with_capacity(quasi.terms.len());
        let mut acc = 0.0;
        for term in &quasi.terms {
            acc += term.coeff.abs();
            cdf.push(acc);
            words.push(term.word);
            signs.push(term.coeff.signum());
        }
        GeneratorSampler { cdf, words, signs }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> (PauliString, f64) {
        let u: f64 = rng.gen::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let pick = self.cdf.partition_point(|&c| c <= u).min(self.words.len() - 1);
        (self.words[pick], self.signs[pick])
    }
}

/// Uniform size-`k` subset of `0..l` by partial Fisher-Yates, returned
/// sorted so downstream draws happen in site order.
pub(crate) fn sample_locations(l: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..l).collect();
    for i in 0..k {
        let j = i + rng.gen_range(0..l - i);
        pool.swap(i, j);
    }
    let mut subset = pool[..k].to_vec();
    subset.sort_unstable();
    subset
}

fn order_k_shot(
    compiled: &CompiledCircuit,
    sampler: &GeneratorSampler,
    k: usize,
    obs: &DiagonalObservable,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let l = compiled.num_sites();
    let mut injections = Vec::with_capacity(k);
    let mut sign = 1.0;
    if k > 0 {
        for site in sample_locations(l, k, rng) {
            let (word, term_sign) = sampler.draw(rng);
            sign *= term_sign;
            injections.push((site, word));
        }
    }
    let bits = compiled.run_shot(&injections, rng)?;
    Ok(sign * obs.evaluate(bits, compiled.num_qubits())?)
}

pub(crate) fn estimate_order_compiled(
    compiled: &CompiledCircuit,
    sampler: &GeneratorSampler,
    k: usize,
    shots: u64,
    obs: &DiagonalObservable,
    stream: RngStream,
) -> Result<(f64, f64)> {
    if k > compiled.num_sites() {
        return Err(Error::InvalidParameter(format!(
            "order {k} exceeds {} noise sites",
            compiled.num_sites()
        )));
    }
    if k > 0 && sampler.is_empty() {
        return Err(Error::InvalidParameter(
            "inverse generator has no terms but k > 0".into(),
        ));
    }
    let values = collect_shot_values(shots as usize, |shot| {
        order_k_shot(compiled, sampler, k, obs, &mut stream.substream(shot).rng())
    })?;
    Ok(mean_and_variance(&values))
}

/// Mean and unbiased sample variance of the order-`k` observable: each
/// shot injects generator terms at a uniformly random `k`-subset of the
/// noise sites and multiplies the measured value by the recorded signs.
pub fn estimate_order_k(
    circuit: &Circuit,
    quasi: &QuasiInverseChannel,
    k: usize,
    shots: u64,
    obs: &DiagonalObservable,
    stream: RngStream,
) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::ShotBudget("order estimate needs shots".into()));
    }
    let compiled = CompiledCircuit::new(circuit)?;
    let sampler = GeneratorSampler::new(quasi);
    estimate_order_compiled(&compiled, &sampler, k, shots, obs, stream)
}

/// Estimator variance for a given allocation:
/// `(sum_{k<=K} |gamma_k|) * sum_{k<=K} |gamma_k| var_k`.
pub fn estimator_variance(series: &GammaSeries, truncation_order: usize, vars: &[f64]) -> f64 {
    let norms: Vec<f64> = (0..=truncation_order)
        .map(|k| series.gamma(k).abs())
        .collect();
    let norm_sum: f64 = norms.iter().sum();
    let weighted: f64 = norms.iter().zip(vars).map(|(g, v)| g * v).sum();
    norm_sum * weighted
}

/// Full protocol: invert-derived `(eps1, eps2)` produce the coefficient
/// series, the policy fixes `K`, shots are allocated proportionally to
/// `|gamma_k|`, each order is measured, and the estimate is
/// `sum_k gamma_k <O>_k` with `std_error^2 = sum_k gamma_k^2 var_k / m_k`.
pub fn fpec_estimate(
    circuit: &Circuit,
    quasi: &QuasiInverseChannel,
    shots: u64,
    policy: TruncationPolicy,
    obs: &DiagonalObservable,
    stream: RngStream,
) -> Result<EstimatorReport> {
    let l = circuit.noise_site_count();
    if l > 0 && circuit.homogeneous_site().is_none() {
        return Err(Error::InvalidParameter(
            "expansion estimator requires one shared channel across noise sites".into(),
        ));
    }
    let series = GammaSeries::new(quasi.eps1, quasi.eps2, l)?;
    let truncation_order = match policy {
        TruncationPolicy::ShotLimited => series.truncate_by_shots(shots)?,
        TruncationPolicy::BiasTolerance { delta } => {
            series.truncate_by_bias(delta, obs.operator_norm())?
        }
    };
    let plan = allocate_shots(&series, truncation_order, shots, policy)?;
    fpec_estimate_with_plan(circuit, quasi, &series, &plan, obs, stream)
}

/// Run the estimator against an externally fixed shot plan.
pub fn fpec_estimate_with_plan(
    circuit: &Circuit,
    quasi: &QuasiInverseChannel,
    series: &GammaSeries,
    plan: &ShotPlan,
    obs: &DiagonalObservable,
    stream: RngStream,
) -> Result<EstimatorReport> {
    let compiled = CompiledCircuit::new(circuit)?;
    let sampler = GeneratorSampler::new(quasi);
    let mut per_k = Vec::with_capacity(plan.shots.len());
    let mut mean = 0.0;
    let mut var_of_mean = 0.0;
    for (k, &m_k) in plan.shots.iter().enumerate() {
        let (mean_k, var_k) =
            estimate_order_compiled(&compiled, &sampler, k, m_k, obs, stream.substream(k as u64))?;
        let gamma = series.gamma(k);
        mean += gamma * mean_k;
        var_of_mean += gamma * gamma * var_k / m_k as f64;
        per_k.push(PerOrderStats {
            k,
            gamma,
            shots: m_k,
            mean: mean_k,
            var: var_k,
        });
    }
    Ok(EstimatorReport {
        method: Method::Fpec,
        mean,
        std_error: Some(var_of_mean.sqrt()),
        truncation_order: plan.truncation_order,
        bias_bound: series.bias_bound(plan.truncation_order, obs.operator_norm()),
        per_k,
    })
}
