//! Seeded end-to-end runs: single estimates, step sweeps, the channel
//! mischaracterization study and the coefficient profile.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fpec_core::{
    build_tfim_trotter, derive_seed, exact_expectation, fpec_estimate, pec_estimate,
    raw_estimate, zne_estimate, Circuit, EstimatorReport, GammaSeries, Method,
    QuasiInverseChannel, RngStream, StochasticPauliChannel, ZneFit,
};

use crate::config::Experiment;
use crate::error::CliError;

/// Exact values are attached only up to this register size.
pub const MAX_EXACT_QUBITS: usize = fpec_core::exact::MAX_DENSITY_QUBITS;

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub steps: usize,
    pub method: Method,
    pub mean: f64,
    pub std_error: Option<f64>,
    /// Exact noiseless value; absent beyond the oracle size cap.
    pub exact_value: Option<f64>,
    /// `|mean - exact_value|` when the exact value exists.
    pub bias: Option<f64>,
    /// `shots * std_error^2`, comparable across methods at equal budget.
    pub var_per_shot: Option<f64>,
    #[serde(rename = "K")]
    pub truncation_order: Option<usize>,
    pub bias_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Error message when a point aborted the sweep and only partial
    /// rows are present.
    #[serde(default)]
    pub incomplete: Option<String>,
}

/// Result of a single-point estimate.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum PointOutput {
    Report(EstimatorReport),
    Zne(ZneFit),
}

fn build_circuit(experiment: &Experiment, steps: usize) -> Result<Circuit, CliError> {
    build_tfim_trotter(
        &experiment.lattice.spec(steps),
        &experiment.channel,
        experiment.lattice.initial_angle,
    )
    .map_err(CliError::Run)
}

fn inverse_channel(experiment: &Experiment) -> Result<QuasiInverseChannel, CliError> {
    let assumed = experiment
        .assumed_channel
        .as_ref()
        .unwrap_or(&experiment.channel);
    assumed.invert().map_err(CliError::Run)
}

fn method_tag(method: Method) -> u64 {
    match method {
        Method::Raw => 1,
        Method::Pec => 2,
        Method::Zne => 3,
        Method::Fpec => 4,
    }
}

/// Run one (steps, method) point.
pub fn estimate_point(
    experiment: &Experiment,
    steps: usize,
    method: Method,
) -> Result<PointOutput, CliError> {
    let circuit = build_circuit(experiment, steps)?;
    let seed = derive_seed(
        experiment.seed,
        (steps as u64) << 8 | method_tag(method),
    );
    let stream = RngStream::root(seed);
    let obs = &experiment.observable;
    let output = match method {
        Method::Raw => {
            PointOutput::Report(raw_estimate(&circuit, experiment.shots, obs, stream)?)
        }
        Method::Pec => {
            let quasi = inverse_channel(experiment)?;
            PointOutput::Report(pec_estimate(
                &circuit,
                &quasi,
                experiment.shots,
                obs,
                stream,
            )?)
        }
        Method::Fpec => {
            let quasi = inverse_channel(experiment)?;
            PointOutput::Report(fpec_estimate(
                &circuit,
                &quasi,
                experiment.shots,
                experiment.truncation,
                obs,
                stream,
            )?)
        }
        Method::Zne => PointOutput::Zne(zne_estimate(
            &circuit,
            &experiment.zne_scales,
            experiment.shots,
            obs,
            stream,
        )?),
    };
    Ok(output)
}

/// Exact noiseless observable value at this depth, when the register is
/// small enough for the oracle.
pub fn exact_noiseless_value(
    experiment: &Experiment,
    steps: usize,
) -> Result<Option<f64>, CliError> {
    if experiment.num_qubits() > MAX_EXACT_QUBITS {
        return Ok(None);
    }
    let noiseless = build_tfim_trotter(
        &experiment.lattice.spec(steps),
        &StochasticPauliChannel::identity(2),
        experiment.lattice.initial_angle,
    )
    .map_err(CliError::Run)?;
    exact_expectation(&noiseless, &[], &experiment.observable)
        .map(Some)
        .map_err(CliError::Run)
}

fn row_from_output(
    steps: usize,
    method: Method,
    shots: u64,
    output: &PointOutput,
    exact_value: Option<f64>,
) -> SweepRow {
    let (mean, std_error, truncation_order, bias_bound) = match output {
        PointOutput::Report(report) => (
            report.mean,
            report.std_error,
            matches!(method, Method::Fpec).then_some(report.truncation_order),
            matches!(method, Method::Fpec).then_some(report.bias_bound),
        ),
        PointOutput::Zne(fit) => (fit.extrapolated, fit.extrapolated_std_error, None, None),
    };
    SweepRow {
        steps,
        method,
        mean,
        std_error,
        exact_value,
        bias: exact_value.map(|e| (mean - e).abs()),
        var_per_shot: std_error.map(|se| se * se * shots as f64),
        truncation_order,
        bias_bound,
    }
}

/// Sweep every configured method over the step range. Points run as
/// independent parallel jobs; a failed point aborts the sweep and the
/// completed rows are returned flagged incomplete.
pub fn run_sweep(experiment: &Experiment) -> Result<SweepResult, CliError> {
    let points: Vec<(usize, Method)> = experiment
        .sweep
        .steps()
        .flat_map(|steps| experiment.methods.iter().map(move |&m| (steps, m)))
        .collect();
    let outcomes: Vec<Result<SweepRow, CliError>> = points
        .par_iter()
        .map(|&(steps, method)| {
            let output = estimate_point(experiment, steps, method)?;
            let exact = exact_noiseless_value(experiment, steps)?;
            Ok(row_from_output(steps, method, experiment.shots, &output, exact))
        })
        .collect();
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut incomplete = None;
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => {
                incomplete = Some(e.to_string());
                break;
            }
        }
    }
    Ok(SweepResult { rows, incomplete })
}

/// Robustness study: the inverse is built from the assumed channel while
/// trajectories use the true one. Runs the unmitigated baseline next to
/// the mitigated rows for comparison.
pub fn mischaracterization_study(experiment: &Experiment) -> Result<SweepResult, CliError> {
    if experiment.assumed_channel.is_none() {
        return Err(CliError::Config(
            "mischaracterization study needs an [assumed_channel] section".into(),
        ));
    }
    let mut study = experiment.clone();
    study.methods = vec![Method::Raw, Method::Fpec];
    run_sweep(&study)
}

/// Emit the coefficient profile `(k, |gamma_k|, log10 |gamma_k|)` up to
/// the stored cap.
pub fn gamma_profile(l: usize, eps1: f64, eps2: f64) -> Result<Vec<(usize, f64, f64)>, CliError> {
    if l < 1 {
        return Err(CliError::Config("coefficient profile needs l >= 1".into()));
    }
    let series = GammaSeries::new(eps1, eps2, l).map_err(CliError::Run)?;
    Ok((0..=series.k_max())
        .map(|k| {
            let log10 = series.log_abs_gamma(k) / std::f64::consts::LN_10;
            (k, series.gamma(k).abs(), log10)
        })
        .collect())
}
