//! Quantum registers: uniform initialization, observation, attract-to-target
//! rotation, and the quantum-order metrics.
//!
//! Amplitudes are real and nonnegative. Bit strings are read most significant
//! bit first, so the first gene of a register selects the upper half of the
//! basis: `"10"` is basis index 2 and weights `amplitudes[2]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::CounterRng;
use crate::scalar::Scalar;

/// Largest supported register order.
pub const MAX_ORDER: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcoreError {
    #[error("register order {0} is not supported (expected 1 or 2)")]
    UnsupportedOrder(usize),
    #[error("target `{0}` contains a non-binary symbol")]
    InvalidTarget(String),
    #[error("target has {got} bits but the register has order {expected}")]
    TargetLength { expected: usize, got: usize },
    #[error("amplitude vector of length {0} is not 2 or 4")]
    AmplitudeLength(usize),
    #[error("amplitudes must be finite and nonnegative")]
    NegativeAmplitude,
    #[error("squared amplitudes sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("invalid order pair r={r}, n={n} (need 1 <= r <= n)")]
    InvalidOrderPair { r: usize, n: usize },
}

/// A register of `order` qubits holding `2^order` real amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumRegister<T> {
    order: usize,
    amplitudes: Vec<T>,
}

/// Basis state produced by observing a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    index: usize,
    order: usize,
}

impl Outcome {
    pub fn new(index: usize, order: usize) -> Self {
        debug_assert!(index < 1 << order);
        Self { index, order }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Gene `i`, counted from the most significant bit.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.order, "gene {i} out of range");
        (self.index >> (self.order - 1 - i)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.order).map(move |i| self.bit(i))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses a bit string such as `"10"` into its basis index.
pub fn parse_bits(bits: &str) -> Result<usize, QcoreError> {
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(QcoreError::InvalidTarget(bits.to_owned())),
    })
}

/// Basis index for genes listed most significant first.
pub fn basis_index<I: IntoIterator<Item = bool>>(genes: I) -> usize {
    genes
        .into_iter()
        .fold(0, |acc, b| (acc << 1) | usize::from(b))
}

fn check_order(order: usize) -> Result<(), QcoreError> {
    if (1..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(QcoreError::UnsupportedOrder(order))
    }
}

impl<T: Scalar> QuantumRegister<T> {
    /// Equal superposition: every amplitude is `2^(-order/2)`.
    pub fn uniform(order: usize) -> Result<Self, QcoreError> {
        check_order(order)?;
        let dim = 1usize << order;
        let amp = T::one() / T::from_count(dim).sqrt();
        Ok(Self {
            order,
            amplitudes: vec![amp; dim],
        })
    }

    /// Builds a register from explicit amplitudes (length 2 or 4, nonnegative, unit norm).
    pub fn from_amplitudes(amplitudes: Vec<T>) -> Result<Self, QcoreError> {
        let order = match amplitudes.len() {
            2 => 1,
            4 => 2,
            len => return Err(QcoreError::AmplitudeLength(len)),
        };
        if amplitudes.iter().any(|a| !a.is_finite() || *a < T::zero()) {
            return Err(QcoreError::NegativeAmplitude);
        }
        let norm: T = amplitudes.iter().map(|a| *a * *a).sum();
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(QcoreError::NotNormalized(norm.to_f64_lossy()));
        }
        Ok(Self { order, amplitudes })
    }

    /// Register sitting exactly on one basis state.
    pub fn basis(order: usize, index: usize) -> Result<Self, QcoreError> {
        check_order(order)?;
        let dim = 1usize << order;
        if index >= dim {
            return Err(QcoreError::TargetLength {
                expected: order,
                got: usize::BITS as usize - index.leading_zeros() as usize,
            });
        }
        let mut amplitudes = vec![T::zero(); dim];
        amplitudes[index] = T::one();
        Ok(Self { order, amplitudes })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    /// Born-rule probabilities `amplitudes[k]^2`.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| *a * *a).collect()
    }

    pub fn norm_squared(&self) -> T {
        self.amplitudes.iter().map(|a| *a * *a).sum()
    }

    /// Samples a basis state. Consumes exactly one draw from `rng`.
    pub fn observe(&self, rng: &mut CounterRng) -> Outcome {
        let u: T = rng.next_unit();
        let mut cumulative = T::zero();
        let mut last_supported = 0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            let p = *a * *a;
            if p > T::zero() {
                last_supported = k;
            }
            cumulative = cumulative + p;
            if u < cumulative {
                return Outcome::new(k, self.order);
            }
        }
        // rounding left the cumulative sum a hair under 1
        Outcome::new(last_supported, self.order)
    }

    /// Rotates toward the basis state named by `target` (e.g. `"11"`).
    pub fn rotate_toward(&self, target: &str, theta: T) -> Result<Self, QcoreError> {
        if target.chars().count() != self.order {
            // report symbol errors ahead of length errors
            parse_bits(target)?;
            return Err(QcoreError::TargetLength {
                expected: self.order,
                got: target.chars().count(),
            });
        }
        Ok(self.rotate_toward_basis(parse_bits(target)?, theta))
    }

    /// Givens rotation in the plane spanned by the current state and `e_index`,
    /// by `min(theta, phi)` where `phi` is the angle between them. The cap
    /// stops the state on the basis vector instead of overshooting it.
    pub fn rotate_toward_basis(&self, index: usize, theta: T) -> Self {
        assert!(index < self.dimension(), "basis index out of range");
        if theta <= T::zero() {
            return self.clone();
        }
        let along = self.amplitudes[index];
        let across: T = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != index)
            .map(|(_, a)| *a * *a)
            .sum::<T>()
            .sqrt();
        if across <= T::zero() {
            return self.clone();
        }
        let phi = across.atan2(along);
        let remaining = phi - theta.min(phi);
        let scale = remaining.sin() / across;
        let mut amplitudes: Vec<T> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if k == index {
                    remaining.cos()
                } else {
                    (*a * scale).max(T::zero())
                }
            })
            .collect();
        let norm: T = amplitudes.iter().map(|a| *a * *a).sum::<T>().sqrt();
        for a in &mut amplitudes {
            *a = *a / norm;
        }
        Self {
            order: self.order,
            amplitudes,
        }
    }

    /// Angle between the current state and basis vector `index`.
    pub fn angle_to_basis(&self, index: usize) -> T {
        let along = self.amplitudes[index];
        let across: T = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != index)
            .map(|(_, a)| *a * *a)
            .sum::<T>()
            .sqrt();
        across.atan2(along)
    }
}

/// Quantum order `r`, problem size `n`, relative order `r/n`, and `log2` of the
/// quantum factor `2^r / ((r/n) 2^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderMetrics<T> {
    pub quantum_order: usize,
    pub problem_size: usize,
    pub relative_order: T,
    pub log2_quantum_factor: T,
}

impl<T: Scalar> OrderMetrics<T> {
    pub fn new(quantum_order: usize, problem_size: usize) -> Result<Self, QcoreError> {
        Ok(Self {
            quantum_order,
            problem_size,
            relative_order: relative_order(quantum_order, problem_size)?,
            log2_quantum_factor: quantum_factor_log2(quantum_order, problem_size)?,
        })
    }

    /// Linear quantum factor; underflows to zero for large problems.
    pub fn quantum_factor(&self) -> T {
        T::lit(2.0).powf(self.log2_quantum_factor)
    }
}

fn check_pair(r: usize, n: usize) -> Result<(), QcoreError> {
    if r == 0 || n == 0 || r > n {
        Err(QcoreError::InvalidOrderPair { r, n })
    } else {
        Ok(())
    }
}

/// `r / n`.
pub fn relative_order<T: Scalar>(r: usize, n: usize) -> Result<T, QcoreError> {
    check_pair(r, n)?;
    Ok(T::from_count(r) / T::from_count(n))
}

/// `log2(2^r / ((r/n) 2^n)) = r - n - log2(r/n)`, kept in the log domain since
/// `2^n` overflows for realistic problem sizes.
pub fn quantum_factor_log2<T: Scalar>(r: usize, n: usize) -> Result<T, QcoreError> {
    check_pair(r, n)?;
    let w: T = relative_order(r, n)?;
    Ok((T::from_count(r) - T::from_count(n)) - w.log2())
}
