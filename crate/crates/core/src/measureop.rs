//! Gaussian measurement matrices, numerical kernels and empirical null-space
//! property checks.
//!
//! "Almost all matrices" is realized as "a Gaussian draw": any Lebesgue-null
//! set of bad matrices has probability zero under the Gaussian ensemble.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, AlcError, Result};
use crate::linalg::{full_right_svd, singular_values};
use crate::rng::{mix, SeedStream};
use crate::setgen::{embed, gen_kron, gen_sparse, nonzero_normal, SparseSignal, StructuredSignal};

/// Singular values below this multiple of the largest one count as zero.
pub const DEFAULT_RANK_RTOL: f64 = 1e-10;

/// A dense `n × m` measurement operator `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    entries: DMatrix<f64>,
    seed: Option<u64>,
}

impl MeasurementMatrix {
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let (n, m) = entries.shape();
        if n == 0 || m == 0 {
            return Err(invalid("measurement matrix must be non-empty"));
        }
        if n > m {
            return Err(invalid(format!("need n <= m, got {n} x {m}")));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(invalid("measurement matrix entries must be finite"));
        }
        Ok(Self {
            entries,
            seed: None,
        })
    }

    pub fn from_row_slice(n: usize, m: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * m {
            return Err(invalid("row data does not match the declared shape"));
        }
        Self::from_matrix(DMatrix::from_row_slice(n, m, data))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn m(&self) -> usize {
        self.entries.ncols()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: &self.entries * c,
            seed: self.seed,
        }
    }

    /// The first `rows` rows, as a matrix of its own.
    pub fn top_rows(&self, rows: usize) -> Result<Self> {
        if rows == 0 || rows > self.n() {
            return Err(invalid(format!("cannot take {rows} of {} rows", self.n())));
        }
        Ok(Self {
            entries: self.entries.rows(0, rows).into_owned(),
            seed: self.seed,
        })
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.entries)
    }

    pub fn numerical_rank(&self, rtol: f64) -> usize {
        let sv = self.singular_values();
        let cut = sv.first().copied().unwrap_or(0.0) * rtol;
        sv.iter().filter(|s| **s > cut).count()
    }

    /// Row-major CSV preceded by a `# n m seed` header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        writeln!(w, "# {} {} {}", self.n(), self.m(), seed)?;
        for row in self.entries.row_iter() {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| invalid("empty matrix file"))??;
        let fields: Vec<&str> = header
            .strip_prefix('#')
            .ok_or_else(|| invalid("matrix file must start with `# n m seed`"))?
            .split_whitespace()
            .collect();
        if fields.len() != 3 {
            return Err(invalid("matrix header must be `# n m seed`"));
        }
        let n: usize = fields[0].parse().map_err(|_| invalid("bad n in matrix header"))?;
        let m: usize = fields[1].parse().map_err(|_| invalid("bad m in matrix header"))?;
        let seed = match fields[2] {
            "none" => None,
            s => Some(s.parse().map_err(|_| invalid("bad seed in matrix header"))?),
        };
        let mut data = Vec::with_capacity(n * m);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for f in line.split(',') {
                data.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| invalid(format!("cannot parse matrix entry `{f}`")))?,
                );
            }
        }
        let mut a = Self::from_row_slice(n, m, &data)?;
        a.seed = seed;
        Ok(a)
    }
}

/// I.i.d. standard normal `n × m` matrix. Entries are drawn row by row, so the
/// first `n'` rows of a draw with `n > n'` equal the draw with `n'` rows.
pub fn sample_matrix(n: usize, m: usize, seed: u64) -> Result<MeasurementMatrix> {
    if n == 0 || m == 0 {
        return Err(invalid("matrix dimensions must be positive"));
    }
    if n > m {
        return Err(invalid(format!("need n <= m, got n={n}, m={m}")));
    }
    let mut rng = SeedStream::new(seed);
    let entries =
        DMatrix::from_row_iterator(n, m, (0..n * m).map(|_| rng.sample::<f64, _>(StandardNormal)));
    Ok(MeasurementMatrix {
        entries,
        seed: Some(seed),
    })
}

pub fn apply(a: &MeasurementMatrix, x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != a.m() {
        return Err(invalid(format!(
            "vector of length {} does not match {} columns",
            x.len(),
            a.m()
        )));
    }
    Ok(&a.entries * x)
}

/// Orthonormal basis of the numerical null space.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    pub vectors: Vec<DVector<f64>>,
    /// Singular values at or below `tol` were treated as zero.
    pub tol: f64,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Default absolute kernel tolerance, `1e-10 × σ_max`.
pub fn default_kernel_tol(a: &MeasurementMatrix) -> f64 {
    let smax = a.singular_values().first().copied().unwrap_or(0.0);
    (smax * DEFAULT_RANK_RTOL).max(f64::MIN_POSITIVE)
}

/// Null-space basis from the right singular vectors of `A` (padded with zero
/// rows so that all `m` are available).
pub fn kernel_basis(a: &MeasurementMatrix, tol: f64) -> Result<KernelBasis> {
    if !(tol > 0.0) {
        return Err(invalid("kernel tolerance must be positive"));
    }
    let (sv, v_t) = full_right_svd(&a.entries);
    let vectors = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    Ok(KernelBasis { vectors, tol })
}

/// Where `nsp_min_gain` draws its unit vectors from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SignalFamily {
    /// Uniform support of size `s`, Gaussian values.
    Sparse { m: usize, s: usize },
    /// Fixed support, Gaussian values.
    SparseOn { m: usize, support: Vec<usize> },
    Kronecker { k: usize, l: usize, r: usize, t: usize },
}

impl SignalFamily {
    pub fn dim(&self) -> usize {
        match self {
            Self::Sparse { m, .. } | Self::SparseOn { m, .. } => *m,
            Self::Kronecker { k, l, .. } => k * l,
        }
    }

    pub fn draw(&self, seed: u64) -> Result<StructuredSignal> {
        Ok(match self {
            Self::Sparse { m, s } => gen_sparse(*m, *s, seed)?.into(),
            Self::SparseOn { m, support } => {
                let mut rng = SeedStream::new(seed);
                let values = support.iter().map(|_| nonzero_normal(&mut rng)).collect();
                SparseSignal::new(*m, support.clone(), values)?.into()
            }
            Self::Kronecker { k, l, r, t } => gen_kron(*k, *l, *r, *t, seed)?.into(),
        })
    }
}

/// Smallest observed `‖A u‖₂` over sampled unit vectors `u` of a signal family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NspReport {
    pub trials: usize,
    pub min_gain: f64,
    pub argmin_u: Vec<f64>,
    pub argmin_trial: usize,
}

const MAX_REDRAWS: u64 = 16;

fn unit_draw(family: &SignalFamily, seed: u64, trial: usize) -> Result<DVector<f64>> {
    let root = mix(seed, trial as u64);
    for attempt in 0..MAX_REDRAWS {
        let draw_seed = if attempt == 0 { root } else { mix(root, attempt) };
        let x = embed(&family.draw(draw_seed)?);
        let norm = x.norm();
        if norm > 0.0 {
            return Ok(x / norm);
        }
    }
    Err(AlcError::NotApplicable(format!(
        "signal family produced the zero vector {MAX_REDRAWS} times in trial {trial}"
    )))
}

/// Empirical null-space check: draws `trials` signals, normalizes each to unit
/// norm and records the smallest image norm. A positive minimum is consistent
/// with `ker(A)` meeting the family's support set only at zero; it is not a
/// certificate. Ties are broken by the lowest trial index.
pub fn nsp_min_gain(
    a: &MeasurementMatrix,
    family: &SignalFamily,
    trials: usize,
    seed: u64,
) -> Result<NspReport> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if family.dim() != a.m() {
        return Err(invalid(format!(
            "family dimension {} does not match {} columns",
            family.dim(),
            a.m()
        )));
    }
    let gains: Vec<(f64, usize)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let u = unit_draw(family, seed, i)?;
            Ok(((&a.entries * u).norm(), i))
        })
        .collect::<Result<_>>()?;
    let (min_gain, argmin_trial) = gains
        .into_iter()
        .fold((f64::INFINITY, usize::MAX), |best, cur| {
            if cur.0 < best.0 || (cur.0 == best.0 && cur.1 < best.1) {
                cur
            } else {
                best
            }
        });
    let argmin_u = unit_draw(family, seed, argmin_trial)?;
    Ok(NspReport {
        trials,
        min_gain,
        argmin_u: argmin_u.iter().copied().collect(),
        argmin_trial,
    })
}

/// Unit vector with support `{0, ..., n}` in the kernel of `A`, showing that
/// the `s`-sparse vectors meet `ker(A)` when `s > n`.
///
/// The null vector of the `n × (n+1)` submatrix is taken as its generalized
/// cross product (signed maximal minors); for a rank-deficient submatrix the
/// SVD null vector is used instead.
pub fn sparse_kernel_witness(a: &MeasurementMatrix, s: usize) -> Result<DVector<f64>> {
    let (n, m) = (a.n(), a.m());
    if s <= n {
        return Err(AlcError::NotApplicable(format!(
            "no s-sparse kernel vector is guaranteed for s={s} <= n={n}"
        )));
    }
    if n + 1 > m {
        return Err(AlcError::NotApplicable(format!("need n + 1 <= m, got n={n}, m={m}")));
    }
    let sub = a.entries.columns(0, n + 1).into_owned();
    let mut u: Vec<f64> = (0..=n)
        .map(|j| {
            let minor = sub.clone().remove_column(j);
            let det = if n == 0 { 1.0 } else { minor.determinant() };
            if j % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect();
    let mut norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let residual = |u: &[f64], norm: f64| {
        (&sub * DVector::from_column_slice(u)).norm() / norm
    };
    if !(norm > 0.0) || residual(&u, norm) > 1e-12 {
        let (sv, v_t) = full_right_svd(&sub);
        let smallest = (0..sv.len()).fold(0, |b, i| if sv[i] < sv[b] { i } else { b });
        u = v_t.row(smallest).iter().copied().collect();
        norm = 1.0;
    }
    let mut out = DVector::zeros(m);
    for (j, v) in u.iter().enumerate() {
        out[j] = v / norm;
    }
    let len = out.norm();
    Ok(out / len)
}
