//! Baseline estimators: standard per-gate quasi-probability sampling,
//! two-point exponential zero-noise extrapolation, unmitigated
//! estimation, and the deterministic-vs-sampled allocation variance gap.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::QuasiInverseChannel;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::estimator::{EstimatorReport, Method, PerOrderStats};
use crate::gamma::GammaSeries;
use crate::observable::DiagonalObservable;
use crate::pauli::PauliString;
use crate::rng::RngStream;
use crate::trajectory::{collect_shot_values, mean_and_variance, CompiledCircuit};

/// Per-site quasi-sampling distribution of the standard protocol: with
/// probability `(1 + eps1) / g` inject nothing, with probability
/// `eps2 |c_i| / g` inject `V_i` carrying sign `-sign(c_i)`, where
/// `g = 1 + eps1 + eps2`.
struct PecSampler {
    nothing_prob: f64,
    cdf: Vec<f64>,
    words: Vec<PauliString>,
    signs: Vec<f64>,
}

impl PecSampler {
    fn new(quasi: &QuasiInverseChannel) -> PecSampler {
        let g = quasi.gate_overhead();
        let nothing_prob = (1.0 + quasi.eps1) / g;
        let mut cdf = Vec::with_capacity(quasi.terms.len());
        let mut words = Vec::with_capacity(quasi.terms.len());
        let mut signs = Vec::with_capacity(quasi.terms.len());
        let mut acc = nothing_prob;
        for term in &quasi.terms {
            acc += quasi.eps2 * term.coeff.abs() / g;
            cdf.push(acc);
            words.push(term.word);
            signs.push(-term.coeff.signum());
        }
        PecSampler {
            nothing_prob,
            cdf,
            words,
            signs,
        }
    }

    /// Returns the injected word and its sign, or `None` for the identity
    /// branch. A trivial inverse consumes no randomness, so it matches the
    /// raw estimator draw for draw.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<(PauliString, f64)> {
        if self.words.is_empty() {
            return None;
        }
        let u: f64 = rng.gen();
        if u < self.nothing_prob {
            return None;
        }
        let pick = self.cdf.partition_point(|&c| c <= u).min(self.words.len() - 1);
        Some((self.words[pick], self.signs[pick]))
    }
}

/// Standard gate-wise quasi-probability estimator: every noise site
/// independently samples from the inverse channel, the measured value
/// carries the product of recorded signs, and the mean is rescaled by
/// `g^l`.
pub fn pec_estimate(
    circuit: &Circuit,
    quasi: &QuasiInverseChannel,
    shots: u64,
    obs: &DiagonalObservable,
    stream: RngStream,
) -> Result<EstimatorReport> {
    if shots == 0 {
        return Err(Error::ShotBudget("pec estimate needs shots".into()));
    }
    let compiled = CompiledCircuit::new(circuit)?;
    let sampler = PecSampler::new(quasi);
    let l = compiled.num_sites();
    let log_rescale = l as f64 * quasi.gate_overhead().ln();
    let rescale = log_rescale.exp();
    if !rescale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "quasi-probability rescale exp({log_rescale:.3}) overflows"
        )));
    }
    let n = compiled.num_qubits();
    let values = collect_shot_values(shots as usize, |shot| {
        let mut rng = stream.substream(shot).rng();
        let mut sign = 1.0;
        let mut injections = Vec::new();
        for site in 0..l {
            if let Some((word, s)) = sampler.draw(&mut rng) {
                sign *= s;
                injections.push((site, word));
            }
        }
        let bits = compiled.run_shot(&injections, &mut rng)?;
        Ok(sign * obs.evaluate(bits, n)?)
    })?;
    let (raw_mean, raw_var) = mean_and_variance(&values);
    let std_error = if shots > 1 {
        Some(rescale * (raw_var / shots as f64).sqrt())
    } else {
        None
    };
    Ok(EstimatorReport {
        method: Method::Pec,
        mean: rescale * raw_mean,
        std_error,
        truncation_order: 0,
        bias_bound: 0.0,
        per_k: vec![PerOrderStats {
            k: 0,
            gamma: rescale,
            shots,
            mean: raw_mean,
            var: raw_var,
        }],
    })
}

/// Unmitigated estimate of the noisy circuit.
pub fn raw_estimate(
    circuit: &Circuit,
    shots: u64,
    obs: &DiagonalObservable,
    stream: RngStream,
) -> Result<EstimatorReport> {
    if shots == 0 {
        return Err(Error::ShotBudget("raw estimate needs shots".into()));
    }
    let compiled = CompiledCircuit::new(circuit)?;
    let n = compiled.num_qubits();
    let values = collect_shot_values(shots as usize, |shot| {
        let mut rng = stream.substream(shot).rng();
        let bits = compiled.run_shot(&[], &mut rng)?;
        obs.evaluate(bits, n)
    })?;
    let (mean, var) = mean_and_variance(&values);
    let std_error = if shots > 1 {
        Some((var / shots as f64).sqrt())
    } else {
        None
    };
    Ok(EstimatorReport {
        method: Method::Raw,
        mean,
        std_error,
        truncation_order: 0,
        bias_bound: 0.0,
        per_k: vec![PerOrderStats {
            k: 0,
            gamma: 1.0,
            shots,
            mean,
            var,
        }],
    })
}

/// Extrapolation model actually used by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZneModel {
    Exponential,
    LinearFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZnePoint {
    pub scale: f64,
    pub mean: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneFit {
    pub points: Vec<ZnePoint>,
    pub model: ZneModel,
    pub extrapolated: f64,
    pub extrapolated_std_error: Option<f64>,
}

/// Threshold below which a measured mean is treated as zero for the
/// exponential ansatz.
const ZNE_MAGNITUDE_FLOOR: f64 = 1e-6;

/// Fit `y(scale) = A exp(-b scale)` through the measured points and
/// extrapolate to zero noise; falls back to a straight line whenever the
/// means change sign or sit below the magnitude floor. Two points make
/// both fits exact interpolations.
pub fn fit_zero_noise(points: &[ZnePoint]) -> Result<(ZneModel, f64, Option<f64>)> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "extrapolation needs at least two scales".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.scale).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let sigmas: Option<Vec<f64>> = points.iter().map(|p| p.std_error).collect();
    let exponential_ok = ys.iter().all(|&y| y.abs() >= ZNE_MAGNITUDE_FLOOR)
        && ys.windows(2).all(|w| w[0].signum() == w[1].signum());
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    // Weight of y_i in the zero-noise intercept of a least-squares line.
    let weight = |x: f64| 1.0 / n - x_mean * (x - x_mean) / sxx;
    if exponential_ok {
        let sign = ys[0].signum();
        let zs: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
        let z_mean = zs.iter().sum::<f64>() / n;
        let slope: f64 = xs
            .iter()
            .zip(&zs)
            .map(|(x, z)| (x - x_mean) * (z - z_mean))
            .sum::<f64>()
            / sxx;
        let intercept = z_mean - slope * x_mean;
        let extrapolated = sign * intercept.exp();
        let std_error = sigmas.map(|sigmas| {
            let var: f64 = xs
                .iter()
                .zip(ys.iter().zip(&sigmas))
                .map(|(&x, (&y, &s))| {
                    let w = weight(x) / y;
                    w * w * s * s
                })
                .sum();
            extrapolated.abs() * var.sqrt()
        });
        Ok((ZneModel::Exponential, extrapolated, std_error))
    } else {
        let y_mean = ys.iter().sum::<f64>() / n;
        let slope: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - x_mean) * (y - y_mean))
            .sum::<f64>()
            / sxx;
        let extrapolated = y_mean - slope * x_mean;
        let std_error = sigmas.map(|sigmas| {
            let var: f64 = xs
                .iter()
                .zip(&sigmas)
                .map(|(&x, &s)| {
                    let w = weight(x);
                    w * w * s * s
                })
                .sum();
            var.sqrt()
        });
        Ok((ZneModel::LinearFallback, extrapolated, std_error))
    }
}

/// Zero-noise extrapolation: measure the raw observable at each noise
/// scale (shots split evenly) and extrapolate with the exponential
/// ansatz.
pub fn zne_estimate(
    circuit: &Circuit,
    scales: &[f64],
    shots: u64,
    obs: &DiagonalObservable,
    stream: RngStream,
) -> Result<ZneFit> {
    if scales.len() < 2 {
        return Err(Error::InvalidParameter(
            "zero-noise extrapolation needs at least two scales".into(),
        ));
    }
    for pair in scales.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidParameter(
                "noise scales must be strictly increasing".into(),
            ));
        }
    }
    if scales[0] < 1.0 {
        return Err(Error::InvalidParameter(
            "noise scales must be >= 1".into(),
        ));
    }
    let per_scale = shots / scales.len() as u64;
    if per_scale < 2 {
        return Err(Error::ShotBudget(format!(
            "{shots} shots across {} scales leave fewer than 2 per point",
            scales.len()
        )));
    }
    let mut points = Vec::with_capacity(scales.len());
    for (idx, &scale) in scales.iter().enumerate() {
        let scaled = circuit.scale_noise(scale)?;
        let report = raw_estimate(&scaled, per_scale, obs, stream.substream(idx as u64))?;
        points.push(ZnePoint {
            scale,
            mean: report.mean,
            std_error: report.std_error,
        });
    }
    let (model, extrapolated, extrapolated_std_error) = fit_zero_noise(&points)?;
    Ok(ZneFit {
        points,
        model,
        extrapolated,
        extrapolated_std_error,
    })
}

/// Variance accounting comparing deterministic allocation against
/// category sampling of the per-order observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceComparison {
    pub var_est: f64,
    pub var_sampling: f64,
    pub delta: f64,
}

/// Gap computation from an explicit signed coefficient vector, one entry
/// per retained order.
pub fn variance_comparison_from_gammas(
    gammas: &[f64],
    means: &[f64],
    vars: &[f64],
) -> VarianceComparison {
    assert_eq!(gammas.len(), means.len());
    assert_eq!(gammas.len(), vars.len());
    let norm: f64 = gammas.iter().map(|g| g.abs()).sum();
    let var_est: f64 = norm
        * gammas
            .iter()
            .zip(vars)
            .map(|(g, v)| g.abs() * v)
            .sum::<f64>();
    let p: Vec<f64> = gammas.iter().map(|g| g.abs() / norm).collect();
    let second_moment: f64 = p.iter().zip(means).map(|(p, m)| p * m * m).sum();
    let signed_mean: f64 = p
        .iter()
        .zip(gammas.iter().zip(means))
        .map(|(p, (g, m))| p * g.signum() * m)
        .sum();
    let delta = norm * norm * (second_moment - signed_mean * signed_mean);
    VarianceComparison {
        var_est,
        var_sampling: var_est + delta,
        delta,
    }
}

/// As [`variance_comparison_from_gammas`], with the coefficients taken
/// from a series truncated at `K`.
pub fn sampling_variance_delta(
    series: &GammaSeries,
    truncation_order: usize,
    means: &[f64],
    vars: &[f64],
) -> VarianceComparison {
    let gammas: Vec<f64> = (0..=truncation_order).map(|k| series.gamma(k)).collect();
    variance_comparison_from_gammas(&gammas, means, vars)
}
