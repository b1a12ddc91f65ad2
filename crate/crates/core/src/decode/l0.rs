use nalgebra::{DMatrix, DVector};

use super::{binomial, subsets, Candidate, DecodeOutcome, ZERO_ENTRY};
use crate::error::{invalid, AlcError, Result};
use crate::linalg::{householder_lstsq, lstsq};
use crate::measureop::MeasurementMatrix;
use crate::setgen::SparseSignal;

/// Refuse enumerations with more size-`s` supports than this.
pub const MAX_SUPPORTS: f64 = 1e7;

/// Exhaustive ℓ0 decoder.
///
/// Every support of size `0..=s` is tried in order of size, then
/// lexicographically. A support is a candidate when its least-squares fit
/// has relative residual `‖A_S x_S − y‖ / max(1, ‖y‖) ≤ tol` and every
/// recovered entry has magnitude at least [`ZERO_ENTRY`]. The outcome is
/// unique when exactly one distinct embedding survives.
pub fn l0_decode(a: &MeasurementMatrix, y: &DVector<f64>, s: usize, tol: f64) -> Result<DecodeOutcome> {
    let (n, m) = (a.n(), a.m());
    if y.len() != n {
        return Err(invalid(format!("measurement has length {}, expected {n}", y.len())));
    }
    if s > n || s > m {
        return Err(invalid(format!("need s <= n and s <= m, got s={s}, n={n}, m={m}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if binomial(m, s) > MAX_SUPPORTS {
        return Err(AlcError::ResourceLimit(format!(
            "C({m},{s}) supports exceed the budget of {MAX_SUPPORTS}"
        )));
    }

    let scale = y.norm().max(1.0);
    let entries = a.entries();
    let mut fits = Vec::new();
    let mut best = f64::INFINITY;
    let mut margin = f64::INFINITY;
    let mut cols = Vec::with_capacity(n * s);

    for size in 0..=s {
        for support in subsets(m, size) {
            cols.clear();
            for &j in &support {
                cols.extend(entries.column(j).iter());
            }
            let values = match householder_lstsq(&cols, n, size, y.as_slice()) {
                Some(v) => v,
                None => {
                    // rank-deficient A_S: minimum-norm solution
                    let sub = DMatrix::from_column_slice(n, size, &cols);
                    match lstsq(&sub, y) {
                        Some(v) => v.iter().copied().collect(),
                        None => continue,
                    }
                }
            };
            let mut fitted = DVector::zeros(n);
            for (k, &v) in values.iter().enumerate() {
                fitted.axpy(v, &entries.column(support[k]), 1.0);
            }
            let residual = (fitted - y).norm() / scale;
            best = best.min(residual);
            let structural = values.iter().all(|v| v.abs() >= ZERO_ENTRY);
            if residual <= tol && structural {
                let signal = SparseSignal::new(m, support.clone(), values)?;
                let embedding = crate::setgen::embed(&signal.clone().into());
                fits.push(Candidate {
                    signal: signal.into(),
                    embedding,
                    residual,
                });
            } else if structural {
                margin = margin.min(residual);
            }
        }
    }
    Ok(DecodeOutcome::from_fits(fits, best, margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::{DecodeStatus, DEFAULT_TOL};
    use crate::measureop::{apply, sample_matrix};

    #[test]
    fn zero_measurement_decodes_to_zero() {
        let a = sample_matrix(3, 8, 1).unwrap();
        let out = l0_decode(&a, &DVector::zeros(3), 2, DEFAULT_TOL).unwrap();
        assert_eq!(out.status, DecodeStatus::Unique);
        assert_eq!(out.estimate.unwrap(), DVector::zeros(8));
    }

    #[test]
    fn one_sparse_recovery() {
        let a = sample_matrix(2, 6, 9).unwrap();
        let mut x = DVector::zeros(6);
        x[3] = 2.5;
        let y = apply(&a, &x).unwrap();
        let out = l0_decode(&a, &y, 1, DEFAULT_TOL).unwrap();
        assert_eq!(out.status, DecodeStatus::Unique);
        let est = out.estimate.unwrap();
        assert!((est - &x).norm() < 1e-9);
        // support {3} fits exactly by hand
        let col = a.entries().column(3) * 2.5;
        assert!((col - y).norm() < 1e-12);
    }

    #[test]
    fn square_systems_are_ambiguous() {
        let a = sample_matrix(3, 8, 4).unwrap();
        let x = crate::setgen::embed(&crate::setgen::gen_sparse(8, 3, 5).unwrap().into());
        let y = apply(&a, &x).unwrap();
        let out = l0_decode(&a, &y, 3, DEFAULT_TOL).unwrap();
        assert_eq!(out.status, DecodeStatus::Ambiguous);
        assert_eq!(out.candidate_count, 56);
        assert_eq!(out.candidates.len(), crate::decode::CANDIDATE_CAP);
    }

    #[test]
    fn argument_checks() {
        let a = sample_matrix(3, 8, 4).unwrap();
        assert!(matches!(
            l0_decode(&a, &DVector::zeros(3), 4, DEFAULT_TOL),
            Err(AlcError::InvalidArgument(_))
        ));
        assert!(l0_decode(&a, &DVector::zeros(2), 1, DEFAULT_TOL).is_err());
        let big = sample_matrix(12, 60, 1).unwrap();
        assert!(matches!(
            l0_decode(&big, &DVector::zeros(12), 12, DEFAULT_TOL),
            Err(AlcError::ResourceLimit(_))
        ));
    }
}
