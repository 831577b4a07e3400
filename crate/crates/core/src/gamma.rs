//! Binomial reorganization of a gate-wise inverse channel: coefficients
//! `gamma_k = C(l, k) (1 + eps1)^(l-k) (-eps2)^k`, the truncation rules
//! that pick the retained order `K`, and deterministic shot allocation
//! proportional to `|gamma_k|`.
//!
//! All norms and tails are computed in log space; `C(l, k)` never
//! materializes as a float.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_10: f64 = std::f64::consts::LN_10;
/// Coefficients below `1e-30 * |gamma_0|` on the decaying branch are not
/// stored; they are numerically void for any realistic shot budget.
const STORE_CUTOFF_LOG: f64 = -30.0 * LN_10;

/// The signed coefficient sequence of one circuit's expansion.
#[derive(Debug, Clone)]
pub struct GammaSeries {
    l: usize,
    eps1: f64,
    eps2: f64,
    /// `ln |gamma_k|` for `k = 0..=k_max` (capped tail dropped).
    log_abs: Vec<f64>,
    /// `ln sum_{k=0}^{l} |gamma_k| = l ln(1 + eps1 + eps2)`.
    log_total_norm: f64,
}

impl GammaSeries {
    pub fn new(eps1: f64, eps2: f64, l: usize) -> Result<GammaSeries> {
        if eps1 < 0.0 || eps2 < 0.0 || !eps1.is_finite() || !eps2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eps1 {eps1} and eps2 {eps2} must be non-negative"
            )));
        }
        let log_total_norm = l as f64 * (eps1 + eps2).ln_1p();
        let mut log_abs = vec![l as f64 * eps1.ln_1p()];
        if eps2 > 0.0 {
            let log_step = eps2.ln() - eps1.ln_1p();
            for k in 0..l {
                // ln |gamma_{k+1}| = ln |gamma_k| + ln((l-k)/(k+1)) + ln(eps2/(1+eps1)).
                let ratio = ((l - k) as f64).ln() - ((k + 1) as f64).ln() + log_step;
                let next = log_abs[k] + ratio;
                let decaying = ratio < 0.0;
                if decaying && next - log_abs[0] < STORE_CUTOFF_LOG {
                    break;
                }
                log_abs.push(next);
            }
        }
        Ok(GammaSeries {
            l,
            eps1,
            eps2,
            log_abs,
            log_total_norm,
        })
    }

    pub fn noise_sites(&self) -> usize {
        self.l
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    /// Largest stored order.
    pub fn k_max(&self) -> usize {
        self.log_abs.len() - 1
    }

    /// `ln |gamma_k|` for any `k <= l`, recomputed beyond the stored cap.
    pub fn log_abs_gamma(&self, k: usize) -> f64 {
        if k > self.l {
            return f64::NEG_INFINITY;
        }
        if let Some(&v) = self.log_abs.get(k) {
            return v;
        }
        if self.eps2 == 0.0 {
            return f64::NEG_INFINITY;
        }
        ln_binomial(self.l, k)
            + (self.l - k) as f64 * self.eps1.ln_1p()
            + k as f64 * self.eps2.ln()
    }

    /// Signed `gamma_k` (sign `(-1)^k`); underflows to signed zero far in
    /// the tail.
    pub fn gamma(&self, k: usize) -> f64 {
        let magnitude = self.log_abs_gamma(k).exp();
        if k % 2 == 0 {
            magnitude
        } else {
            -magnitude
        }
    }

    /// `sum_{k=0}^{l} |gamma_k| = (1 + eps1 + eps2)^l`.
    pub fn total_norm(&self) -> f64 {
        self.log_total_norm.exp()
    }

    pub fn log_total_norm(&self) -> f64 {
        self.log_total_norm
    }

    /// `ln sum_{k=K+1}^{l} |gamma_k|`, with the capped remainder bounded
    /// by a geometric continuation (a slight overestimate, keeping bias
    /// bounds valid).
    pub fn log_tail_norm(&self, k_from_exclusive: usize) -> f64 {
        let mut terms: Vec<f64> = (k_from_exclusive + 1..=self.k_max())
            .map(|k| self.log_abs[k])
            .collect();
        if self.k_max() < self.l && self.eps2 > 0.0 {
            let k = self.k_max().max(k_from_exclusive);
            if k < self.l {
                let log_step = self.eps2.ln() - self.eps1.ln_1p();
                let ratio =
                    ((self.l - k) as f64).ln() - ((k + 1) as f64).ln() + log_step;
                if ratio < 0.0 {
                    // sum_{j>k} |gamma_j| <= |gamma_k| r / (1 - r).
                    let r = ratio.exp();
                    terms.push(self.log_abs_gamma(k) + ratio - (1.0 - r).ln());
                } else {
                    // Still on the rising branch; fall back to the full
                    // norm as a safe bound.
                    terms.push(self.log_total_norm);
                }
            }
        }
        log_sum_exp(&terms)
    }

    /// Truncation bias bound `norm(O) * sum_{k>K} |gamma_k|`.
    pub fn bias_bound(&self, truncation_order: usize, obs_norm: f64) -> f64 {
        (self.log_tail_norm(truncation_order) + obs_norm.ln()).exp()
    }

    /// Shot-limited truncation: the largest `K` such that every order up
    /// to `K` receives at least one shot out of `M` when allocated
    /// against the full norm. Truncates at the first unresolvable order.
    pub fn truncate_by_shots(&self, shots: u64) -> Result<usize> {
        if shots == 0 {
            return Err(Error::ShotBudget("no shots provided".into()));
        }
        let log_m = (shots as f64).ln();
        let resolvable =
            |k: usize| log_m + self.log_abs_gamma(k) - self.log_total_norm >= 0.0;
        if !resolvable(0) {
            return Err(Error::ShotBudget(format!(
                "{shots} shots cannot resolve even the zeroth order"
            )));
        }
        let mut truncation = 0;
        for k in 1..=self.l {
            if resolvable(k) {
                truncation = k;
            } else {
                break;
            }
        }
        Ok(truncation)
    }

    /// Bias-tolerance truncation: the minimal `K` with
    /// `norm(O) * sum_{k>K} |gamma_k| <= delta`.
    pub fn truncate_by_bias(&self, delta: f64, obs_norm: f64) -> Result<usize> {
        if delta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bias tolerance {delta} must be positive"
            )));
        }
        let log_delta = delta.ln();
        for k in 0..=self.l {
            if self.log_tail_norm(k) + obs_norm.ln() <= log_delta {
                return Ok(k);
            }
        }
        Ok(self.l)
    }
}

fn ln_binomial(l: usize, k: usize) -> f64 {
    let k = k.min(l - k);
    let mut acc = 0.0;
    for j in 1..=k {
        acc += ((l + 1 - j) as f64).ln() - (j as f64).ln();
    }
    acc
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

/// How the truncation order was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TruncationPolicy {
    ShotLimited,
    BiasTolerance { delta: f64 },
}

/// Deterministic shot allocation over orders `0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    #[serde(rename = "K")]
    pub truncation_order: usize,
    /// Shots per order, `sum = total`, every entry >= 1.
    pub shots: Vec<u64>,
    pub total: u64,
    pub policy: TruncationPolicy,
}

/// Allocate `round(M |gamma_k| / sum_{j<=K} |gamma_j|)` shots per order,
/// fixed up by largest remainder so the total is exactly `M` and every
/// order keeps at least one shot.
pub fn allocate_shots(
    series: &GammaSeries,
    truncation_order: usize,
    total: u64,
    policy: TruncationPolicy,
) -> Result<ShotPlan> {
    let orders = truncation_order + 1;
    if total < orders as u64 {
        return Err(Error::ShotBudget(format!(
            "{total} shots cannot cover {orders} orders"
        )));
    }
    let log_weights: Vec<f64> = (0..orders).map(|k| series.log_abs_gamma(k)).collect();
    let log_norm = log_sum_exp(&log_weights);
    let shares: Vec<f64> = log_weights
        .iter()
        .map(|lw| total as f64 * (lw - log_norm).exp())
        .collect();
    let mut shots: Vec<u64> = shares.iter().map(|s| s.floor() as u64).collect();
    let mut assigned: u64 = shots.iter().sum();
    // Largest remainders first; ties resolved toward lower order.
    let mut order: Vec<usize> = (0..orders).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut cursor = 0;
    while assigned < total {
        shots[order[cursor % orders]] += 1;
        assigned += 1;
        cursor += 1;
    }
    // Floor of one shot per retained order, taken from the largest pot.
    for k in 0..orders {
        if shots[k] == 0 {
            let donor = (0..orders)
                .max_by_key(|&j| shots[j])
                .expect("non-empty plan");
            shots[donor] -= 1;
            shots[k] += 1;
        }
    }
    debug_assert_eq!(shots.iter().sum::<u64>(), total);
    Ok(ShotPlan {
        truncation_order,
        shots,
        total,
        policy,
    })
}
