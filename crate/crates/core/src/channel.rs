//! Stochastic Pauli channels, their diagonal Pauli-transfer-matrix
//! representation, and inversion into the quasi-probability form
//! `(1 + eps1) * I - eps2 * E` with `E` a signed mixture of Pauli
//! conjugations normalized to unit one-norm.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Tolerance for probability normalization; deviations below this are
/// silently renormalized, larger ones are rejected.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// PTM entries with absolute value below this make a channel
/// non-invertible for any practical shot budget.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// A channel applying Pauli word `P` with probability `p_P`.
///
/// The identity entry is always stored explicitly; probabilities sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticPauliChannel {
    n: usize,
    probs: BTreeMap<PauliString, f64>,
}

impl StochasticPauliChannel {
    /// Build from a full probability map (identity included or implied by
    /// the complement of the listed mass).
    ///
    /// If the identity entry is present the total must be 1 within
    /// [`PROB_TOLERANCE`]; otherwise the identity probability is inferred
    /// as `1 - sum(others)`.
    pub fn from_probs(n: usize, probs: BTreeMap<PauliString, f64>) -> Result<StochasticPauliChannel> {
        let identity = PauliString::identity(n);
        for (word, &p) in &probs {
            if word.num_qubits() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    got: word.num_qubits(),
                });
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidProbability(format!(
                    "probability {p} for {word} is not in [0, 1]"
                )));
            }
        }
        let mut probs = probs;
        let listed: f64 = probs.values().sum();
        if probs.contains_key(&identity) {
            if (listed - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::InvalidProbability(format!(
                    "probabilities sum to {listed}, expected 1"
                )));
            }
            // Renormalize away the sub-tolerance drift.
            for p in probs.values_mut() {
                *p /= listed;
            }
        } else {
            if listed > 1.0 + PROB_TOLERANCE {
                return Err(Error::InvalidProbability(format!(
                    "non-identity probabilities sum to {listed} > 1"
                )));
            }
            let id_prob = (1.0 - listed).max(0.0);
            probs.insert(identity, id_prob);
        }
        probs.retain(|word, p| *p > 0.0 || word.is_identity());
        Ok(StochasticPauliChannel { n, probs })
    }

    /// The identity channel on `n` qubits.
    pub fn identity(n: usize) -> StochasticPauliChannel {
        let mut probs = BTreeMap::new();
        probs.insert(PauliString::identity(n), 1.0);
        StochasticPauliChannel { n, probs }
    }

    /// Uniform depolarizing channel: total error probability `eps` split
    /// evenly over the `4^n - 1` non-identity words.
    pub fn depolarizing(n: usize, eps: f64) -> Result<StochasticPauliChannel> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing error probability {eps} outside [0, 1)"
            )));
        }
        let mut probs = BTreeMap::new();
        let words = 4usize.pow(n as u32);
        let per_word = eps / (words - 1) as f64;
        probs.insert(PauliString::identity(n), 1.0 - eps);
        if eps > 0.0 {
            for word in PauliString::all(n).filter(|w| !w.is_identity()) {
                probs.insert(word, per_word);
            }
        }
        Ok(StochasticPauliChannel { n, probs })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Total non-identity probability mass.
    pub fn error_weight(&self) -> f64 {
        self.probs
            .iter()
            .filter(|(w, _)| !w.is_identity())
            .map(|(_, p)| p)
            .sum()
    }

    pub fn identity_prob(&self) -> f64 {
        *self
            .probs
            .get(&PauliString::identity(self.n))
            .unwrap_or(&0.0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.error_weight() == 0.0
    }

    /// Probability map, identity included.
    pub fn probs(&self) -> &BTreeMap<PauliString, f64> {
        &self.probs
    }

    /// Channel with each non-identity probability multiplied by `factor`
    /// and the identity adjusted to keep the total at 1.
    pub fn scaled(&self, factor: f64) -> Result<StochasticPauliChannel> {
        if factor < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise scale factor {factor} must be non-negative"
            )));
        }
        let mass = factor * self.error_weight();
        if mass >= 1.0 {
            return Err(Error::InvalidProbability(format!(
                "scaled error mass {mass} >= 1"
            )));
        }
        let mut probs = BTreeMap::new();
        for (word, &p) in &self.probs {
            if word.is_identity() {
                probs.insert(*word, 1.0 - mass);
            } else {
                probs.insert(*word, p * factor);
            }
        }
        Ok(StochasticPauliChannel { n: self.n, probs })
    }

    /// Diagonal of the channel's Pauli transfer matrix.
    ///
    /// The entry for word `Q` is `sum_P p_P * s(P, Q)` with `s = +1` when
    /// the words commute and `-1` otherwise; the identity entry is exactly 1.
    pub fn ptm_diagonal(&self) -> PtmDiagonal {
        let dim = 4usize.pow(self.n as u32);
        let mut entries = vec![0.0f64; dim];
        for (idx, entry) in entries.iter_mut().enumerate() {
            let q = PauliString::from_index(self.n, idx);
            *entry = self
                .probs
                .iter()
                .map(|(p, &prob)| prob * p.ptm_sign(&q))
                .sum();
        }
        entries[0] = 1.0;
        PtmDiagonal {
            n: self.n,
            entries,
        }
    }

    /// Invert the channel into `(1 + eps1) * I - eps2 * E` form.
    ///
    /// The PTM diagonal is inverted entrywise, transformed back to Pauli
    /// conjugation weights, and split into the identity weight `1 + eps1`
    /// and the signed non-identity mixture normalized so `sum |c_i| = 1`.
    pub fn invert(&self) -> Result<QuasiInverseChannel> {
        let ptm = self.ptm_diagonal();
        for &entry in &ptm.entries {
            if entry.abs() < SINGULARITY_THRESHOLD {
                return Err(Error::NonInvertibleChannel { entry });
            }
        }
        let dim = ptm.entries.len();
        let inv_scale = 1.0 / dim as f64;
        let mut eps2 = 0.0;
        let mut terms = Vec::new();
        let mut weight_identity = 0.0;
        for p_idx in 0..dim {
            let p = PauliString::from_index(self.n, p_idx);
            // Inverse character transform of the reciprocal diagonal.
            let mut weight = 0.0;
            for (q_idx, &lambda) in ptm.entries.iter().enumerate() {
                let q = PauliString::from_index(self.n, q_idx);
                weight += p.ptm_sign(&q) / lambda;
            }
            weight *= inv_scale;
            if p.is_identity() {
                weight_identity = weight;
            } else if weight.abs() > 1e-15 {
                terms.push((weight, p));
            }
        }
        let eps1 = weight_identity - 1.0;
        for (w, _) in &terms {
            eps2 += w.abs();
        }
        let terms = if eps2 > 0.0 {
            terms
                .into_iter()
                .map(|(w, p)| QuasiTerm {
                    coeff: -w / eps2,
                    word: p,
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(QuasiInverseChannel {
            n: self.n,
            eps1,
            eps2,
            terms,
        })
    }
}

/// Diagonal of a Pauli transfer matrix, indexed by PTM word index.
#[derive(Debug, Clone, PartialEq)]
pub struct PtmDiagonal {
    n: usize,
    pub entries: Vec<f64>,
}

impl PtmDiagonal {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn entry(&self, word: &PauliString) -> f64 {
        self.entries[word.index()]
    }

    /// Entrywise product, used to check `PTM(inv) * PTM(channel) = 1`.
    pub fn entrywise_product(&self, other: &PtmDiagonal) -> Vec<f64> {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .collect()
    }

    /// Recover conjugation probabilities via the inverse character
    /// transform (the PTM map is an involution up to `4^n`).
    pub fn to_probs(&self) -> BTreeMap<PauliString, f64> {
        let dim = self.entries.len();
        let mut probs = BTreeMap::new();
        for p_idx in 0..dim {
            let p = PauliString::from_index(self.n, p_idx);
            let mut weight = 0.0;
            for (q_idx, &lambda) in self.entries.iter().enumerate() {
                let q = PauliString::from_index(self.n, q_idx);
                weight += p.ptm_sign(&q) * lambda;
            }
            probs.insert(p, weight / dim as f64);
        }
        probs
    }
}

/// One signed term `c * V(.)V` of an inverse generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiTerm {
    #[serde(rename = "c")]
    pub coeff: f64,
    #[serde(rename = "pauli")]
    pub word: PauliString,
}

/// The quasi-probability inverse `(1 + eps1) * I - eps2 * sum_i c_i V_i(.)V_i`
/// with `sum_i |c_i| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiInverseChannel {
    #[serde(rename = "arity")]
    pub n: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub terms: Vec<QuasiTerm>,
}

impl QuasiInverseChannel {
    /// The trivial inverse of a noiseless channel.
    pub fn identity(n: usize) -> QuasiInverseChannel {
        QuasiInverseChannel {
            n,
            eps1: 0.0,
            eps2: 0.0,
            terms: Vec::new(),
        }
    }

    /// Inverse of the n-qubit depolarizing channel in state-replacement
    /// form: the generator is the uniform mixture over all `4^n` Pauli
    /// words, identity included, which maps every input to the maximally
    /// mixed state.
    ///
    /// This is the same superoperator as [`StochasticPauliChannel::invert`]
    /// applied to `depolarizing(n, eps)`, regrouped so that any circuit
    /// with one or more generator insertions has zero mean for traceless
    /// observables.
    pub fn depolarizing_replacement(n: usize, eps: f64) -> Result<QuasiInverseChannel> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing error probability {eps} outside [0, 1)"
            )));
        }
        // Replacement probability g: (1-eps) I + eps/(4^n-1) sum_{P != I}
        // equals (1-g) rho + g * mixed with g = eps * 4^n / (4^n - 1).
        let dim = 4usize.pow(n as u32) as f64;
        let g = eps * dim / (dim - 1.0);
        if g >= 1.0 {
            return Err(Error::NonInvertibleChannel { entry: 1.0 - g });
        }
        let eps1 = g / (1.0 - g);
        let eps2 = g / (1.0 - g);
        let coeff = 1.0 / dim;
        let terms = PauliString::all(n)
            .map(|word| QuasiTerm { coeff, word })
            .collect();
        Ok(QuasiInverseChannel {
            n,
            eps1,
            eps2,
            terms,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// One-norm of the signed term coefficients (1 by construction for
    /// non-trivial inverses, 0 for the identity inverse).
    pub fn coeff_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Signed conjugation weight map of the full inverse superoperator:
    /// `1 + eps1` on the identity, `-eps2 * c_i` on each `V_i`.
    pub fn conjugation_weights(&self) -> BTreeMap<PauliString, f64> {
        let mut weights = BTreeMap::new();
        weights.insert(PauliString::identity(self.n), 1.0 + self.eps1);
        for term in &self.terms {
            *weights.entry(term.word).or_insert(0.0) += -self.eps2 * term.coeff;
        }
        weights
    }

    /// PTM diagonal of the inverse superoperator.
    pub fn ptm_diagonal(&self) -> PtmDiagonal {
        let dim = 4usize.pow(self.n as u32);
        let weights = self.conjugation_weights();
        let mut entries = vec![0.0f64; dim];
        for (idx, entry) in entries.iter_mut().enumerate() {
            let q = PauliString::from_index(self.n, idx);
            *entry = weights
                .iter()
                .map(|(p, &w)| w * p.ptm_sign(&q))
                .sum();
        }
        PtmDiagonal {
            n: self.n,
            entries,
        }
    }

    /// Sampling overhead of one gate inversion, `1 + eps1 + eps2`.
    pub fn gate_overhead(&self) -> f64 {
        1.0 + self.eps1 + self.eps2
    }
}

/// On-disk channel description.
///
/// ```json
/// {"arity": 2, "probs": [{"pauli": "XI", "p": 0.01}]}
/// ```
///
/// The identity entry may be omitted and is inferred as one minus the
/// listed mass.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub arity: usize,
    pub probs: Vec<ChannelFileEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelFileEntry {
    pub pauli: PauliString,
    pub p: f64,
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<StochasticPauliChannel> {
        let mut probs = BTreeMap::new();
        for entry in &self.probs {
            if probs.insert(entry.pauli, entry.p).is_some() {
                return Err(Error::InvalidProbability(format!(
                    "duplicate Pauli entry {}",
                    entry.pauli
                )));
            }
        }
        StochasticPauliChannel::from_probs(self.arity, probs)
    }

    pub fn from_channel(channel: &StochasticPauliChannel) -> ChannelFile {
        let mut probs: Vec<ChannelFileEntry> = channel
            .probs()
            .iter()
            .map(|(&pauli, &p)| ChannelFileEntry { pauli, p })
            .collect();
        probs.sort_by_key(|e| e.pauli.index());
        ChannelFile {
            arity: channel.num_qubits(),
            probs,
        }
    }

    pub fn from_json(json: &str) -> Result<ChannelFile> {
        serde_json::from_str(json)
            .map_err(|e| Error::InvalidProbability(format!("channel file parse error: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use approx::assert_abs_diff_eq;

    fn x_flip(p: f64) -> StochasticPauliChannel {
        let mut probs = BTreeMap::new();
        probs.insert(PauliString::single(1, 0, Pauli::X), p);
        StochasticPauliChannel::from_probs(1, probs).unwrap()
    }

    #[test]
    fn identity_channel_ptm_is_all_ones() {
        let ptm = StochasticPauliChannel::identity(2).ptm_diagonal();
        assert!(ptm.entries.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn x_flip_ptm_matches_direct_entries() {
        let ptm = x_flip(0.1).ptm_diagonal();
        // (I, X, Y, Z) entries.
        assert_abs_diff_eq!(ptm.entries[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ptm.entries[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ptm.entries[2], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(ptm.entries[3], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn depolarizing_ptm_entries() {
        let ptm = StochasticPauliChannel::depolarizing(1, 0.1)
            .unwrap()
            .ptm_diagonal();
        for idx in 1..4 {
            assert_abs_diff_eq!(ptm.entries[idx], 13.0 / 15.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn depolarizing_uniform_split() {
        let ch = StochasticPauliChannel::depolarizing(2, 0.15).unwrap();
        assert_abs_diff_eq!(ch.identity_prob(), 0.85, epsilon = 1e-15);
        let non_identity: Vec<f64> = ch
            .probs()
            .iter()
            .filter(|(w, _)| !w.is_identity())
            .map(|(_, &p)| p)
            .collect();
        assert_eq!(non_identity.len(), 15);
        for p in non_identity {
            assert_abs_diff_eq!(p, 0.01, epsilon = 1e-15);
        }
        assert!(StochasticPauliChannel::depolarizing(1, 1.0).is_err());
        assert!(StochasticPauliChannel::depolarizing(1, -0.1).is_err());
    }

    #[test]
    fn depolarizing_zero_noise_is_identity() {
        let ch = StochasticPauliChannel::depolarizing(1, 0.0).unwrap();
        assert_eq!(ch.probs().len(), 1);
        assert_eq!(ch.identity_prob(), 1.0);
    }

    #[test]
    fn invert_identity_channel() {
        let quasi = StochasticPauliChannel::identity(2).invert().unwrap();
        assert_eq!(quasi.eps1, 0.0);
        assert_eq!(quasi.eps2, 0.0);
        assert!(quasi.terms.is_empty());
    }

    #[test]
    fn invert_x_flip() {
        let quasi = x_flip(0.1).invert().unwrap();
        assert_abs_diff_eq!(quasi.eps1, 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(quasi.eps2, 0.125, epsilon = 1e-12);
        assert_eq!(quasi.terms.len(), 1);
        assert_abs_diff_eq!(quasi.terms[0].coeff, 1.0, epsilon = 1e-12);
        assert_eq!(quasi.terms[0].word.to_string(), "X");
    }

    #[test]
    fn invert_depolarizing() {
        let quasi = StochasticPauliChannel::depolarizing(1, 0.1)
            .unwrap()
            .invert()
            .unwrap();
        assert_abs_diff_eq!(quasi.eps1, 3.0 / 26.0, epsilon = 1e-12);
        assert_abs_diff_eq!(quasi.eps2, 3.0 / 26.0, epsilon = 1e-12);
        assert_eq!(quasi.terms.len(), 3);
        for term in &quasi.terms {
            assert_abs_diff_eq!(term.coeff, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_ptm_product_is_identity() {
        let ch = StochasticPauliChannel::depolarizing(2, 0.2).unwrap();
        let quasi = ch.invert().unwrap();
        let product = quasi.ptm_diagonal().entrywise_product(&ch.ptm_diagonal());
        for entry in product {
            assert_abs_diff_eq!(entry, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_channel_rejected() {
        // X-flip with p = 0.5 kills the Y and Z PTM entries.
        let err = x_flip(0.5).invert().unwrap_err();
        assert!(matches!(err, Error::NonInvertibleChannel { .. }));
    }

    #[test]
    fn ptm_round_trip_recovers_probs() {
        let ch = StochasticPauliChannel::depolarizing(2, 0.17).unwrap();
        let recovered = ch.ptm_diagonal().to_probs();
        for (word, &p) in ch.probs() {
            assert_abs_diff_eq!(recovered[word], p, epsilon = 1e-12);
        }
    }

    #[test]
    fn scaled_channel_adjusts_identity() {
        let ch = StochasticPauliChannel::depolarizing(2, 6e-4).unwrap();
        let scaled = ch.scaled(4.0).unwrap();
        assert_abs_diff_eq!(scaled.error_weight(), 2.4e-3, epsilon = 1e-16);
        assert_abs_diff_eq!(scaled.identity_prob(), 1.0 - 2.4e-3, epsilon = 1e-15);
        assert!(x_flip(0.3).scaled(4.0).is_err());
    }

    #[test]
    fn replacement_inverse_matches_canonical_superoperator() {
        let eps = 0.05;
        let canonical = StochasticPauliChannel::depolarizing(1, eps)
            .unwrap()
            .invert()
            .unwrap();
        let replacement = QuasiInverseChannel::depolarizing_replacement(1, eps).unwrap();
        let a = canonical.conjugation_weights();
        let b = replacement.conjugation_weights();
        for word in PauliString::all(1) {
            let wa = a.get(&word).copied().unwrap_or(0.0);
            let wb = b.get(&word).copied().unwrap_or(0.0);
            assert_abs_diff_eq!(wa, wb, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(replacement.coeff_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn channel_file_identity_inferred() {
        let file = ChannelFile::from_json(
            r#"{"arity": 2, "probs": [{"pauli": "XI", "p": 0.01}, {"pauli": "ZZ", "p": 0.02}]}"#,
        )
        .unwrap();
        let ch = file.to_channel().unwrap();
        assert_abs_diff_eq!(ch.identity_prob(), 0.97, epsilon = 1e-15);
        assert_abs_diff_eq!(ch.error_weight(), 0.03, epsilon = 1e-15);
    }

    #[test]
    fn channel_file_rejects_bad_data() {
        let overfull = ChannelFile::from_json(
            r#"{"arity": 1, "probs": [{"pauli": "X", "p": 0.7}, {"pauli": "Z", "p": 0.6}]}"#,
        )
        .unwrap();
        assert!(overfull.to_channel().is_err());
        let dup = ChannelFile::from_json(
            r#"{"arity": 1, "probs": [{"pauli": "X", "p": 0.1}, {"pauli": "X", "p": 0.1}]}"#,
        )
        .unwrap();
        assert!(dup.to_channel().is_err());
        let bad_arity = ChannelFile::from_json(
            r#"{"arity": 2, "probs": [{"pauli": "X", "p": 0.1}]}"#,
        )
        .unwrap();
        assert!(bad_arity.to_channel().is_err());
    }
}
