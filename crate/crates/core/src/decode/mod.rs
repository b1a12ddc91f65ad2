//! Concrete zero-error decoders and converse probes.
//!
//! The decoders here are exhaustive: [`l0_decode`] tries every support,
//! [`kron_decode`] runs multi-start damped Gauss–Newton on every support
//! pair. Both report ambiguity and failure instead of guessing, so the
//! experiment harness can count how often `g_A(Ax) ≠ x`.

mod collision;
mod gauss_newton;
mod interleave;
mod kron;
mod l0;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::setgen::{KroneckerSignal, StructuredSignal};

pub use collision::{collision_search, polish_collision, CollisionReport, MIN_SEPARATION, MAX_COLLISION_OBJECTIVE};
pub use interleave::{deinterleave, graph_point, interleave_compress, MAX_PRECISION};
pub use kron::{kron_decode, KronOptions, KronShape, MAX_SUPPORT_PAIRS};
pub use l0::{l0_decode, MAX_SUPPORTS};

/// Relative exact-fit tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Recovered entries below this magnitude disqualify a support.
pub const ZERO_ENTRY: f64 = 1e-8;
/// Candidates closer than this in embedding space are the same solution.
pub const DISTINCT: f64 = 1e-6;
/// At most this many candidates are kept; the full count is still reported.
pub const CANDIDATE_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStatus {
    Unique,
    Ambiguous,
    NoSolution,
}

impl DecodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Unique => "unique",
            Self::Ambiguous => "ambiguous",
            Self::NoSolution => "no_solution",
        }
    }
}

impl std::fmt::Display for DecodeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A structurally valid exact fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub signal: StructuredSignal,
    pub embedding: DVector<f64>,
    /// `‖A x − y‖₂ / max(1, ‖y‖₂)`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// Present iff the status is unique.
    pub estimate: Option<DVector<f64>>,
    /// Distinct exact fits in enumeration order, capped at [`CANDIDATE_CAP`].
    pub candidates: Vec<Candidate>,
    /// Number of distinct exact fits before capping.
    pub candidate_count: usize,
    /// Relative residual of the estimate, or the smallest one seen otherwise.
    pub residual: f64,
    /// Smallest relative residual among supports that did not fit; infinite
    /// when every support fit.
    pub margin: f64,
}

/// Serializable form `{status, residual, support, values}` of an outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub status: DecodeStatus,
    pub residual: f64,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl DecodeOutcome {
    pub(crate) fn zero(dim: usize) -> Self {
        Self {
            status: DecodeStatus::Unique,
            estimate: Some(DVector::zeros(dim)),
            candidates: Vec::new(),
            candidate_count: 1,
            residual: 0.0,
            margin: f64::INFINITY,
        }
    }

    /// Resolves a list of accepted fits (in deterministic order) into an outcome.
    pub(crate) fn from_fits(fits: Vec<Candidate>, best_residual: f64, margin: f64) -> Self {
        let mut distinct: Vec<Candidate> = Vec::new();
        let mut count = 0;
        for c in fits {
            let dup = distinct
                .iter()
                .any(|d| (&d.embedding - &c.embedding).norm() <= DISTINCT);
            if !dup {
                count += 1;
                if distinct.len() < CANDIDATE_CAP {
                    distinct.push(c);
                }
            }
        }
        match count {
            0 => Self {
                status: DecodeStatus::NoSolution,
                estimate: None,
                candidates: distinct,
                candidate_count: 0,
                residual: best_residual,
                margin,
            },
            1 => Self {
                status: DecodeStatus::Unique,
                estimate: Some(distinct[0].embedding.clone()),
                residual: distinct[0].residual,
                candidates: distinct,
                candidate_count: 1,
                margin,
            },
            _ => Self {
                status: DecodeStatus::Ambiguous,
                estimate: None,
                residual: distinct.iter().map(|c| c.residual).fold(f64::INFINITY, f64::min),
                candidates: distinct,
                candidate_count: count,
                margin,
            },
        }
    }

    /// The recovered Kronecker factors, when the outcome is a unique Kronecker fit.
    pub fn kronecker_estimate(&self) -> Option<&KroneckerSignal> {
        match (self.status, self.candidates.first()) {
            (DecodeStatus::Unique, Some(Candidate { signal: StructuredSignal::Kronecker(k), .. })) => Some(k),
            _ => None,
        }
    }

    pub fn record(&self) -> OutcomeRecord {
        let (support, values) = match &self.estimate {
            Some(x) => x
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .unzip(),
            None => (Vec::new(), Vec::new()),
        };
        OutcomeRecord {
            status: self.status,
            residual: self.residual,
            support,
            values,
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Lexicographic enumeration of the `k`-subsets of `0..n`.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
