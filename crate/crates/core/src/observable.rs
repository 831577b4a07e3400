//! Z-diagonal observables evaluated on measured bitstrings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observables diagonal in the computational basis, all with operator
/// norm 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagonalObservable {
    /// `((sum_j Z_j) / n)^2`.
    SzSquared,
    /// `(sum_j prod_{i<=j} Z_i) / n`.
    ZPrefixAverage,
    /// Product of `Z` over the listed qubits.
    PauliZWord { qubits: Vec<usize> },
}

impl DiagonalObservable {
    pub fn operator_norm(&self) -> f64 {
        1.0
    }

    /// Evaluate on a measured bitstring (bit `q` of `bits` is qubit `q`).
    pub fn evaluate(&self, bits: u64, n: usize) -> Result<f64> {
        match self {
            DiagonalObservable::SzSquared => {
                let ones = (bits & mask(n)).count_ones() as i64;
                let m = (n as i64 - 2 * ones) as f64 / n as f64;
                Ok(m * m)
            }
            DiagonalObservable::ZPrefixAverage => {
                let mut prefix = 1.0f64;
                let mut total = 0.0;
                for q in 0..n {
                    if (bits >> q) & 1 == 1 {
                        prefix = -prefix;
                    }
                    total += prefix;
                }
                Ok(total / n as f64)
            }
            DiagonalObservable::PauliZWord { qubits } => {
                let mut value = 1.0f64;
                for &q in qubits {
                    if q >= n {
                        return Err(Error::QubitOutOfRange { index: q, n });
                    }
                    if (bits >> q) & 1 == 1 {
                        value = -value;
                    }
                }
                Ok(value)
            }
        }
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Parse a bitstring such as `"010"`; the leftmost character is qubit 0.
pub fn parse_bitstring(s: &str) -> Result<(u64, usize)> {
    let mut bits = 0u64;
    for (q, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => bits |= 1 << q,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "invalid bit character '{c}'"
                )))
            }
        }
    }
    Ok((bits, s.len()))
}
