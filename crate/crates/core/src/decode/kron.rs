use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gauss_newton::{minimize, LeastSquares, LmSettings};
use super::{binomial, subsets, Candidate, DecodeOutcome, DEFAULT_TOL, ZERO_ENTRY};
use crate::error::{invalid, AlcError, Result};
use crate::linalg::householder_lstsq;
use crate::measureop::MeasurementMatrix;
use crate::rng::{mix, SeedStream};
use crate::setgen::{embed, KroneckerSignal};

/// Refuse Kronecker decoding when there are more support pairs than this.
pub const MAX_SUPPORT_PAIRS: f64 = 1e6;

/// Dimensions of `a ⊗ b` with `a ∈ ℝ^k` (`r` nonzeros) and `b ∈ ℝ^l` (`t` nonzeros).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KronShape {
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub t: usize,
}

impl KronShape {
    pub fn new(k: usize, l: usize, r: usize, t: usize) -> Result<Self> {
        if r == 0 || t == 0 || r > k || t > l {
            return Err(invalid(format!(
                "need 1 <= r <= k and 1 <= t <= l, got k={k} l={l} r={r} t={t}"
            )));
        }
        Ok(Self { k, l, r, t })
    }

    pub fn dim(&self) -> usize {
        self.k * self.l
    }

    /// Number of free real parameters once the first nonzero of `a` is fixed to one.
    pub fn free_params(&self) -> usize {
        self.r + self.t - 1
    }

    pub fn support_pairs(&self) -> f64 {
        binomial(self.k, self.r) * binomial(self.l, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KronOptions {
    /// Random initializations per support pair.
    pub starts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for KronOptions {
    fn default() -> Self {
        Self {
            starts: 20,
            tol: DEFAULT_TOL,
            seed: 0,
            max_iter: 200,
        }
    }
}

/// `A·vec(a ⊗ b)` restricted to one support pair: bilinear in the nonzero
/// values of `a` and `b`.
pub(crate) struct SupportBlock {
    pub n: usize,
    pub l: usize,
    pub a_support: Vec<usize>,
    pub b_support: Vec<usize>,
    /// Column `A[:, a_i * l + b_j]` at offset `(i * t + j) * n`.
    cols: Vec<f64>,
}

impl SupportBlock {
    pub fn new(a: &MeasurementMatrix, l: usize, a_support: &[usize], b_support: &[usize]) -> Self {
        let n = a.n();
        let e = a.entries();
        let mut cols = Vec::with_capacity(n * a_support.len() * b_support.len());
        for &i in a_support {
            for &j in b_support {
                cols.extend(e.column(i * l + j).iter());
            }
        }
        Self {
            n,
            l,
            a_support: a_support.to_vec(),
            b_support: b_support.to_vec(),
            cols,
        }
    }

    pub fn r(&self) -> usize {
        self.a_support.len()
    }

    pub fn t(&self) -> usize {
        self.b_support.len()
    }

    fn col(&self, i: usize, j: usize) -> &[f64] {
        let off = (i * self.t() + j) * self.n;
        &self.cols[off..off + self.n]
    }

    /// `out += sign · Σ a_i b_j A_ij` with `a = (1, a_rest)`.
    pub fn accumulate(&self, a_rest: &[f64], b: &[f64], sign: f64, out: &mut [f64]) {
        for i in 0..self.r() {
            let ai = if i == 0 { 1.0 } else { a_rest[i - 1] };
            for (j, &bj) in b.iter().enumerate() {
                let w = sign * ai * bj;
                for (o, c) in out.iter_mut().zip(self.col(i, j)) {
                    *o += w * c;
                }
            }
        }
    }

    /// Writes the Jacobian columns for `(a_1..a_{r-1}, b_0..b_{t-1})`,
    /// scaled by `sign`, starting at column `offset`.
    pub fn jacobian_into(&self, a_rest: &[f64], b: &[f64], sign: f64, jac: &mut [f64], offset: usize) {
        let (n, r, t) = (self.n, self.r(), self.t());
        for i in 1..r {
            let dst = &mut jac[(offset + i - 1) * n..(offset + i) * n];
            dst.fill(0.0);
            for (j, &bj) in b.iter().enumerate() {
                let w = sign * bj;
                for (d, c) in dst.iter_mut().zip(self.col(i, j)) {
                    *d += w * c;
                }
            }
        }
        for j in 0..t {
            let dst = &mut jac[(offset + r - 1 + j) * n..(offset + r + j) * n];
            dst.copy_from_slice(self.col(0, j));
            for i in 1..r {
                let w = a_rest[i - 1];
                for (d, c) in dst.iter_mut().zip(self.col(i, j)) {
                    *d += w * c;
                }
            }
            if sign != 1.0 {
                dst.iter_mut().for_each(|d| *d *= sign);
            }
        }
    }

    /// `M(a) = Σ a_i A_i·` as a column-major `n × t` matrix.
    fn mixed_columns(&self, a: &[f64]) -> Vec<f64> {
        let (n, t) = (self.n, self.t());
        let mut m = vec![0.0; n * t];
        for j in 0..t {
            for (i, &ai) in a.iter().enumerate() {
                for (d, c) in m[j * n..(j + 1) * n].iter_mut().zip(self.col(i, j)) {
                    *d += ai * c;
                }
            }
        }
        m
    }
}

struct FitProblem<'a> {
    block: &'a SupportBlock,
    y: &'a [f64],
}

impl LeastSquares for FitProblem<'_> {
    fn n_residuals(&self) -> usize {
        self.block.n
    }

    fn n_params(&self) -> usize {
        self.block.r() + self.block.t() - 1
    }

    fn residual(&self, v: &[f64], out: &mut [f64]) {
        let (a_rest, b) = v.split_at(self.block.r() - 1);
        out.iter_mut().zip(self.y).for_each(|(o, y)| *o = -y);
        self.block.accumulate(a_rest, b, 1.0, out);
    }

    fn jacobian(&self, v: &[f64], jac: &mut [f64]) {
        let (a_rest, b) = v.split_at(self.block.r() - 1);
        self.block.jacobian_into(a_rest, b, 1.0, jac, 0);
    }
}

struct PairResult {
    fit: Option<Candidate>,
    best: f64,
}

/// Fits one support pair to the unit vector `y_unit = y / y_norm`. Residuals
/// and values are reported in the scale of the original `y`.
fn solve_pair(
    block: &SupportBlock,
    shape: KronShape,
    y_unit: &DVector<f64>,
    y_norm: f64,
    opts: &KronOptions,
    pair_seed: u64,
) -> Result<PairResult> {
    // ‖r‖ / max(1, ‖y‖) for a residual measured on the unit problem
    let to_rel = y_norm / y_norm.max(1.0);
    let problem = FitProblem { block, y: y_unit.as_slice() };
    let settings = LmSettings {
        max_iter: opts.max_iter,
        target: 1e-3 * opts.tol,
        stall_rtol: 1e-2,
        max_stalls: 2,
        ..LmSettings::default()
    };
    let (r, t) = (shape.r, shape.t);
    let mut best = f64::INFINITY;
    let mut a = Vec::with_capacity(r);
    for start in 0..opts.starts {
        let mut rng = SeedStream::new(mix(pair_seed, start as u64));
        let mut v: Vec<f64> = (0..r - 1).map(|_| rng.sample(StandardNormal)).collect();
        a.clear();
        a.push(1.0);
        a.extend_from_slice(&v);
        // b from the linear least-squares fit given a, else random
        let b = householder_lstsq(&block.mixed_columns(&a), block.n, t, y_unit.as_slice())
            .unwrap_or_else(|| (0..t).map(|_| rng.sample(StandardNormal)).collect());
        v.extend(b);

        let Some(res) = minimize(&problem, &mut v, settings) else {
            continue;
        };
        let rel = res * to_rel;
        best = best.min(rel);
        v[r - 1..].iter_mut().for_each(|b| *b *= y_norm);
        let structural = v.iter().all(|x| x.abs() >= ZERO_ENTRY);
        if rel <= opts.tol && structural {
            let mut a_values = vec![1.0];
            a_values.extend_from_slice(&v[..r - 1]);
            let sig = KroneckerSignal::new(
                shape.k,
                shape.l,
                block.a_support.clone(),
                a_values,
                block.b_support.clone(),
                v[r - 1..].to_vec(),
            )?;
            let embedding = embed(&sig.clone().into());
            return Ok(PairResult {
                fit: Some(Candidate {
                    signal: sig.into(),
                    embedding,
                    residual: rel,
                }),
                best,
            });
        }
    }
    Ok(PairResult { fit: None, best })
}

/// Bilinear decoder for `y = A·vec(a ⊗ b)`.
///
/// For every support pair `(S_a, S_b)` the `r + t − 1` free values (the first
/// nonzero of `a` is pinned to one) are fitted by damped Gauss–Newton from
/// `opts.starts` seeded initializations; the first start reaching relative
/// residual `tol` is accepted for that pair. The outcome is unique when all
/// accepted fits agree in embedding, and `no_solution` when no start fits,
/// which happens when every start lands in a local minimum.
pub fn kron_decode(
    a: &MeasurementMatrix,
    y: &DVector<f64>,
    shape: KronShape,
    opts: &KronOptions,
) -> Result<DecodeOutcome> {
    let n = a.n();
    if a.m() != shape.dim() {
        return Err(invalid(format!("matrix has {} columns, expected k*l = {}", a.m(), shape.dim())));
    }
    if y.len() != n {
        return Err(invalid(format!("measurement has length {}, expected {n}", y.len())));
    }
    if n < shape.r + shape.t {
        return Err(invalid(format!("need n >= r + t, got n={n}, r + t = {}", shape.r + shape.t)));
    }
    if opts.starts == 0 || !(opts.tol > 0.0) {
        return Err(invalid("starts must be positive and tol > 0"));
    }
    if shape.support_pairs() > MAX_SUPPORT_PAIRS {
        return Err(AlcError::ResourceLimit(format!(
            "{} support pairs exceed the budget of {MAX_SUPPORT_PAIRS}",
            shape.support_pairs()
        )));
    }
    if y.iter().all(|v| *v == 0.0) {
        return Ok(DecodeOutcome::zero(shape.dim()));
    }

    // the search runs on y / ‖y‖, so rescaling y by a power of two leaves it unchanged
    let y_norm = y.norm();
    let y_unit = y / y_norm;
    let a_sets = subsets(shape.k, shape.r);
    let b_sets = subsets(shape.l, shape.t);
    let pairs = a_sets.len() * b_sets.len();
    let results: Vec<PairResult> = (0..pairs)
        .into_par_iter()
        .map(|p| {
            let block = SupportBlock::new(a, shape.l, &a_sets[p / b_sets.len()], &b_sets[p % b_sets.len()]);
            solve_pair(&block, shape, &y_unit, y_norm, opts, mix(opts.seed, p as u64))
        })
        .collect::<Result<_>>()?;

    let mut fits = Vec::new();
    let mut best = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for r in results {
        best = best.min(r.best);
        match r.fit {
            Some(c) => fits.push(c),
            None => margin = margin.min(r.best),
        }
    }
    Ok(DecodeOutcome::from_fits(fits, best, margin))
}
