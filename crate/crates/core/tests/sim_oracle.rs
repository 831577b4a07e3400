//! Simulator cross-checks: a dense matrix-exponential reference for the
//! Trotter builder, trajectory-vs-exact convergence, the two exact
//! oracle routes against each other, and reproducibility across thread
//! counts.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fpec_core::{
    build_tfim_trotter, exact_expectation, exact_expectation_superoperator, fpec_estimate,
    infidelity_to_depolarizing, raw_estimate, sampling_variance_delta, Circuit, CircuitOp,
    DiagonalObservable, GammaSeries, Gate, LatticeSpec, PauliString, RngStream,
    StochasticPauliChannel, TruncationPolicy,
};

// --- dense reference helpers -------------------------------------------------

type Vector = Vec<Complex64>;

fn pauli_action(word: &PauliString, v: &Vector) -> Vector {
    // Dense Pauli action built from explicit per-qubit 2x2 blocks via
    // index arithmetic on the Kronecker structure.
    let n = word.num_qubits();
    let dim = 1usize << n;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (idx, amp) in v.iter().enumerate() {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut target = idx;
        for q in 0..n {
            let bit = (idx >> q) & 1;
            match word.op(q) {
                fpec_core::Pauli::I => {}
                fpec_core::Pauli::X => target ^= 1 << q,
                fpec_core::Pauli::Y => {
                    target ^= 1 << q;
                    phase *= if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                }
                fpec_core::Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        out[target] += phase * amp;
    }
    out
}

/// `exp(-i alpha P) v = cos(alpha) v - i sin(alpha) P v`.
fn pauli_exp_action(word: &PauliString, alpha: f64, v: &Vector) -> Vector {
    let pv = pauli_action(word, v);
    v.iter()
        .zip(&pv)
        .map(|(a, b)| a * alpha.cos() - Complex64::new(0.0, 1.0) * alpha.sin() * b)
        .collect()
}

/// Second-order Trotter reference evolved term by term with exact Pauli
/// exponentials, independent of the simulator's gate kernels.
fn trotter_reference_sz_squared(spec: &LatticeSpec, initial_angle: f64) -> f64 {
    let n = spec.num_qubits();
    let dim = 1usize << n;
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[0] = Complex64::new(1.0, 0.0);
    for q in 0..n {
        let y = PauliString::single(n, q, fpec_core::Pauli::Y);
        v = pauli_exp_action(&y, initial_angle / 2.0, &v);
    }
    let edges = spec.torus_edges();
    for _ in 0..spec.steps {
        for q in 0..n {
            let x = PauliString::single(n, q, fpec_core::Pauli::X);
            v = pauli_exp_action(&x, spec.field * spec.tau / 2.0, &v);
        }
        for &(a, b) in &edges {
            let mut zz = PauliString::identity(n);
            zz.set(a, fpec_core::Pauli::Z);
            zz.set(b, fpec_core::Pauli::Z);
            v = pauli_exp_action(&zz, spec.coupling * spec.tau, &v);
        }
        for q in 0..n {
            let x = PauliString::single(n, q, fpec_core::Pauli::X);
            v = pauli_exp_action(&x, spec.field * spec.tau / 2.0, &v);
        }
    }
    let mut total = 0.0;
    for (idx, amp) in v.iter().enumerate() {
        let ones = (idx as u64).count_ones() as f64;
        let m = (n as f64 - 2.0 * ones) / n as f64;
        total += amp.norm_sqr() * m * m;
    }
    total
}

#[test]
fn noiseless_trotter_matches_dense_reference() {
    let identity = StochasticPauliChannel::identity(2);
    for (rows, cols, steps, angle) in [(2usize, 2usize, 3usize, 0.0), (3, 3, 2, 0.5236), (2, 3, 4, 0.3)]
    {
        let spec = LatticeSpec {
            rows,
            cols,
            coupling: 1.0,
            field: 2.0,
            tau: 0.2,
            steps,
        };
        let circuit = build_tfim_trotter(&spec, &identity, angle).unwrap();
        let simulated =
            exact_expectation(&circuit, &[], &DiagonalObservable::SzSquared).unwrap();
        let reference = trotter_reference_sz_squared(&spec, angle);
        assert!(
            (simulated - reference).abs() < 1e-10,
            "{rows}x{cols}, {steps} steps: {simulated} vs {reference}"
        );
    }
}

// --- trajectory vs exact ------------------------------------------------------

#[test]
fn trajectory_mean_converges_to_exact_noisy_value() {
    let spec = LatticeSpec {
        rows: 2,
        cols: 2,
        coupling: 1.0,
        field: 2.0,
        tau: 0.2,
        steps: 2,
    };
    let channel = StochasticPauliChannel::depolarizing(2, 0.02).unwrap();
    let circuit = build_tfim_trotter(&spec, &channel, 0.4).unwrap();
    let obs = DiagonalObservable::SzSquared;
    let exact = exact_expectation(&circuit, &[], &obs).unwrap();
    let shots = 20_000;
    let report = raw_estimate(&circuit, shots, &obs, RngStream::root(2718)).unwrap();
    let se = report.std_error.unwrap();
    assert!(
        (report.mean - exact).abs() < 4.0 * se,
        "trajectory mean {} vs exact {exact} (se {se})",
        report.mean
    );
}

#[test]
fn superoperator_and_density_matrix_agree_on_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    for _ in 0..8 {
        let n = rng.gen_range(1..=2usize);
        let mut circuit = Circuit::new(n)
            .with_initial_angles((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let arity_words = 4usize.pow(n as u32);
        let mut probs = BTreeMap::new();
        let eps: f64 = rng.gen_range(0.01..0.2);
        let word = PauliString::from_index(n, rng.gen_range(1..arity_words));
        probs.insert(word, eps);
        let channel = Arc::new(StochasticPauliChannel::from_probs(n, probs).unwrap());
        let support: Vec<usize> = (0..n).collect();
        for _ in 0..rng.gen_range(1..=3usize) {
            circuit
                .push_gate(Gate::Rx {
                    theta: rng.gen_range(-2.0..2.0),
                    qubit: rng.gen_range(0..n),
                })
                .unwrap();
            if n == 2 {
                circuit
                    .push_gate(Gate::Rzz {
                        theta: rng.gen_range(-1.0..1.0),
                        qubits: (0, 1),
                    })
                    .unwrap();
            }
            circuit.push_noise(support.clone(), Arc::clone(&channel)).unwrap();
        }
        let obs = DiagonalObservable::SzSquared;
        let injections = if circuit.noise_site_count() > 0 && rng.gen_bool(0.5) {
            vec![(0usize, PauliString::from_index(n, rng.gen_range(0..arity_words)))]
        } else {
            Vec::new()
        };
        let dm = exact_expectation(&circuit, &injections, &obs).unwrap();
        let sop = exact_expectation_superoperator(&circuit, &injections, &obs).unwrap();
        assert!((dm - sop).abs() < 1e-12, "dm {dm} vs superop {sop}");
    }
}

// --- determinism ---------------------------------------------------------------

#[test]
fn estimates_are_bit_identical_across_thread_counts() {
    let spec = LatticeSpec {
        rows: 2,
        cols: 2,
        coupling: 1.0,
        field: 2.0,
        tau: 0.2,
        steps: 1,
    };
    let channel = infidelity_to_depolarizing(5.3e-4, 2).unwrap();
    let circuit = build_tfim_trotter(&spec, &channel, 0.5).unwrap();
    let quasi = channel.invert().unwrap();
    let obs = DiagonalObservable::SzSquared;
    let run = || {
        fpec_estimate(
            &circuit,
            &quasi,
            400,
            TruncationPolicy::BiasTolerance { delta: 0.001 },
            &obs,
            RngStream::root(99),
        )
        .unwrap()
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    let multi = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(single.mean.to_bits(), multi.mean.to_bits());
    assert_eq!(
        single.std_error.unwrap().to_bits(),
        multi.std_error.unwrap().to_bits()
    );
    assert_eq!(single.per_k, multi.per_k);
}

// --- infidelity conversion oracle ----------------------------------------------

/// Average fidelity via the twirl identity from the channel's Kraus form:
/// `F_pro = sum_k |Tr K_k|^2 / d^2`, `F_avg = (d F_pro + 1) / (d + 1)`.
fn average_fidelity_from_kraus(channel: &StochasticPauliChannel) -> f64 {
    let n = channel.num_qubits();
    let d = (1u64 << n) as f64;
    let mut process_fidelity = 0.0;
    for (word, &p) in channel.probs() {
        // Kraus operator sqrt(p) P; the trace of a Pauli word is d for
        // the identity and 0 otherwise.
        let tr: f64 = if word.is_identity() { d } else { 0.0 };
        process_fidelity += p * (tr / d) * (tr / d);
    }
    (d * process_fidelity + 1.0) / (d + 1.0)
}

#[test]
fn infidelity_conversion_matches_twirl_identity() {
    for (r, n) in [(5.3e-4, 2usize), (0.01, 1), (2e-3, 2)] {
        let channel = infidelity_to_depolarizing(r, n).unwrap();
        let f_avg = average_fidelity_from_kraus(&channel);
        assert!(
            ((1.0 - f_avg) - r).abs() < 1e-15,
            "n={n}: infidelity {} vs {r}",
            1.0 - f_avg
        );
    }
}

// --- variance gap Monte Carlo ----------------------------------------------------

#[test]
fn delta_matches_categorical_sampling() {
    // Draw an order with probability p_k and score sign(gamma_k) <O>_k;
    // the variance of that draw, scaled by the squared norm, is the gap.
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..5 {
        let orders = rng.gen_range(2..5usize);
        let series = GammaSeries::new(
            rng.gen_range(0.05..0.3),
            rng.gen_range(0.05..0.3),
            orders + rng.gen_range(0..3),
        )
        .unwrap();
        let means: Vec<f64> = (0..=orders).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vars = vec![0.0; orders + 1];
        let cmp = sampling_variance_delta(&series, orders, &means, &vars);
        // With zero within-order variance the analytic gap is the whole
        // sampled variance.
        let gammas: Vec<f64> = (0..=orders).map(|k| series.gamma(k)).collect();
        let norm: f64 = gammas.iter().map(|g| g.abs()).sum();
        let draws = 400_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let mut u: f64 = rng.gen::<f64>() * norm;
            let mut pick = 0;
            for (k, g) in gammas.iter().enumerate() {
                u -= g.abs();
                if u <= 0.0 {
                    pick = k;
                    break;
                }
            }
            let value = gammas[pick].signum() * means[pick];
            sum += value;
            sum_sq += value * value;
        }
        let mean = sum / draws as f64;
        let empirical = norm * norm * (sum_sq / draws as f64 - mean * mean);
        if cmp.delta > 0.05 {
            let rel = (empirical - cmp.delta).abs() / cmp.delta;
            assert!(
                rel < 0.05,
                "empirical {empirical} vs analytic {} (rel {rel})",
                cmp.delta
            );
        }
    }
}

// --- circuit walk sanity ---------------------------------------------------------

#[test]
fn compiled_ops_match_circuit_structure() {
    let spec = LatticeSpec {
        rows: 3,
        cols: 3,
        coupling: 1.0,
        field: 2.0,
        tau: 0.2,
        steps: 1,
    };
    let channel = StochasticPauliChannel::depolarizing(2, 1e-3).unwrap();
    let circuit = build_tfim_trotter(&spec, &channel, 0.0).unwrap();
    let mut rzz_seen = 0;
    let mut expect_noise_next = false;
    for op in circuit.ops() {
        match op {
            CircuitOp::Gate(Gate::Rzz { .. }) => {
                rzz_seen += 1;
                expect_noise_next = true;
            }
            CircuitOp::Noise(site) => {
                assert!(expect_noise_next, "noise site must follow its gate");
                assert_eq!(site.support.len(), 2);
                expect_noise_next = false;
            }
            _ => {
                assert!(!expect_noise_next);
            }
        }
    }
    assert_eq!(rzz_seen, 18);
}
