//! Example sets, structured signals and elementary geometry.
//!
//! A [`PointCloud`] is the finite stand-in for a set `U ⊆ ℝ^m`; a
//! [`ChartedSet`] holds samples of a countable union of Lipschitz images of
//! parameter domains. Signals are drawn from seeded [`SeedStream`]s, so every
//! generator is a pure function of its arguments.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::DVector;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, AlcError, Result};
use crate::rng::SeedStream;
use crate::special::gamma;

/// Deepest supported middle-thirds construction level.
pub const MAX_CANTOR_DEPTH: u32 = 26;

/// A finite, non-empty sample of points in `ℝ^ambient_dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    ambient_dim: usize,
    coords: Vec<f64>,
    pub label: String,
    pub seed: Option<u64>,
}

impl PointCloud {
    /// Builds a cloud from flat row-major coordinates.
    pub fn new(ambient_dim: usize, coords: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(invalid("ambient dimension must be positive"));
        }
        if coords.is_empty() {
            return Err(invalid("point cloud must be non-empty"));
        }
        if !coords.len().is_multiple_of(ambient_dim) {
            return Err(invalid(format!(
                "{} coordinates do not split into points of dimension {ambient_dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(invalid(format!(
                "non-finite coordinate in point {}",
                bad / ambient_dim
            )));
        }
        Ok(Self {
            ambient_dim,
            coords,
            label: label.into(),
            seed: None,
        })
    }

    pub fn from_points(points: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return Err(invalid(format!("point {i} has the wrong dimension")));
        }
        Self::new(dim, points.concat(), label)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.ambient_dim
    }

    /// Always false; clouds are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.ambient_dim)
    }

    /// Sub-cloud of the points satisfying `keep`, or `None` if nothing survives.
    pub fn filter(&self, label: &str, mut keep: impl FnMut(&[f64]) -> bool) -> Option<Self> {
        let coords: Vec<f64> = self
            .points()
            .filter(|p| keep(p))
            .flatten()
            .copied()
            .collect();
        (!coords.is_empty()).then(|| Self {
            ambient_dim: self.ambient_dim,
            coords,
            label: label.to_string(),
            seed: self.seed,
        })
    }

    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.ambient_dim {
            return Err(invalid("shift has the wrong dimension"));
        }
        let mut out = self.clone();
        for p in out.coords.chunks_exact_mut(self.ambient_dim) {
            for (c, s) in p.iter_mut().zip(shift) {
                *c += s;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coords.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Writes the cloud as CSV with header `x0,...,x{m-1}`, one point per row.
    /// Floats use the shortest representation that parses back to the same value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record((0..self.ambient_dim).map(|i| format!("x{i}")))?;
        for p in self.points() {
            wtr.write_record(p.iter().map(f64::to_string))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, label: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        for (i, h) in header.iter().enumerate() {
            if h.trim() != format!("x{i}") {
                return Err(invalid(format!("unexpected CSV column `{h}` at position {i}")));
            }
        }
        let dim = header.len();
        let mut coords = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(invalid(format!("row {row} has {} fields, expected {dim}", rec.len())));
            }
            for field in rec.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("row {row}: cannot parse `{field}`")))?;
                coords.push(v);
            }
        }
        Self::new(dim, coords, label)
    }
}

/// One chart of a rectifiable set: parameter samples and their images.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    params: Vec<f64>,
    images: Vec<f64>,
}

impl Chart {
    pub fn len(&self, param_dim: usize) -> usize {
        self.params.len() / param_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn images(&self) -> &[f64] {
        &self.images
    }
}

/// Samples of `⋃ φ_i(A_i)` for maps `φ_i: A_i ⊆ ℝ^s → ℝ^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartedSet {
    param_dim: usize,
    ambient_dim: usize,
    charts: Vec<Chart>,
}

impl ChartedSet {
    pub fn new(param_dim: usize, ambient_dim: usize) -> Result<Self> {
        if param_dim == 0 || param_dim > ambient_dim {
            return Err(invalid(format!(
                "need 1 <= param_dim <= ambient_dim, got {param_dim} and {ambient_dim}"
            )));
        }
        Ok(Self {
            param_dim,
            ambient_dim,
            charts: Vec::new(),
        })
    }

    /// Adds a chart by evaluating `map` on every parameter point.
    pub fn push_chart<F>(&mut self, params: &[Vec<f64>], map: F) -> Result<()>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let mut flat_params = Vec::with_capacity(params.len() * self.param_dim);
        let mut images = Vec::with_capacity(params.len() * self.ambient_dim);
        for (i, p) in params.iter().enumerate() {
            if p.len() != self.param_dim {
                return Err(invalid(format!("parameter point {i} has the wrong dimension")));
            }
            let img = map(p);
            if img.len() != self.ambient_dim || img.iter().any(|c| !c.is_finite()) {
                return Err(invalid(format!("chart image of point {i} is malformed")));
            }
            flat_params.extend_from_slice(p);
            images.extend(img);
        }
        self.charts.push(Chart {
            params: flat_params,
            images,
        });
        Ok(())
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    /// All chart images pooled into one cloud.
    pub fn pooled(&self, label: &str) -> Result<PointCloud> {
        let coords: Vec<f64> = self.charts.iter().flat_map(|c| c.images.iter().copied()).collect();
        PointCloud::new(self.ambient_dim, coords, label)
    }
}

/// Regular grid with `per_axis` points per axis on `[lo, hi]^dim`.
pub fn param_grid(dim: usize, lo: f64, hi: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let step = if per_axis > 1 {
        (hi - lo) / (per_axis - 1) as f64
    } else {
        0.0
    };
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            (0..dim)
                .map(|_| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    lo + step * k as f64
                })
                .collect()
        })
        .collect()
}

/// An `s`-sparse vector in `ℝ^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub m: usize,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(m: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(invalid("support and values differ in length"));
        }
        if support.len() > m {
            return Err(invalid("more support entries than coordinates"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) || support.iter().any(|&i| i >= m) {
            return Err(invalid("support must be strictly increasing indices below m"));
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(invalid("sparse values must be finite and nonzero"));
        }
        Ok(Self { m, support, values })
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }
}

/// `a ⊗ b` with `a ∈ ℝ^k` carrying `r` nonzeros whose first equals 1, and
/// `b ∈ ℝ^l` carrying `t` nonzeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSignal {
    pub k: usize,
    pub l: usize,
    pub a_support: Vec<usize>,
    pub a_values: Vec<f64>,
    pub b_support: Vec<usize>,
    pub b_values: Vec<f64>,
}

impl KroneckerSignal {
    pub fn new(
        k: usize,
        l: usize,
        a_support: Vec<usize>,
        a_values: Vec<f64>,
        b_support: Vec<usize>,
        b_values: Vec<f64>,
    ) -> Result<Self> {
        let a = SparseSignal::new(k, a_support, a_values)?;
        let b = SparseSignal::new(l, b_support, b_values)?;
        if a.values.first() != Some(&1.0) {
            return Err(invalid("first nonzero entry of a must equal 1"));
        }
        if b.support.is_empty() {
            return Err(invalid("b must have at least one nonzero"));
        }
        Ok(Self {
            k,
            l,
            a_support: a.support,
            a_values: a.values,
            b_support: b.support,
            b_values: b.values,
        })
    }

    pub fn r(&self) -> usize {
        self.a_support.len()
    }

    pub fn t(&self) -> usize {
        self.b_support.len()
    }
}

/// A realization of the random vector `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructuredSignal {
    Sparse(SparseSignal),
    Kronecker(KroneckerSignal),
}

impl From<SparseSignal> for StructuredSignal {
    fn from(s: SparseSignal) -> Self {
        Self::Sparse(s)
    }
}

impl From<KroneckerSignal> for StructuredSignal {
    fn from(s: KroneckerSignal) -> Self {
        Self::Kronecker(s)
    }
}

impl StructuredSignal {
    pub fn dim(&self) -> usize {
        match self {
            Self::Sparse(s) => s.m,
            Self::Kronecker(s) => s.k * s.l,
        }
    }

    pub fn embed(&self) -> DVector<f64> {
        embed(self)
    }
}

/// Dense embedding. Kronecker entries are laid out row-major: index `i*l + j`
/// holds `a_i * b_j`.
pub fn embed(sig: &StructuredSignal) -> DVector<f64> {
    let mut x = DVector::zeros(sig.dim());
    match sig {
        StructuredSignal::Sparse(s) => {
            for (&i, &v) in s.support.iter().zip(&s.values) {
                x[i] = v;
            }
        }
        StructuredSignal::Kronecker(s) => {
            for (&i, &a) in s.a_support.iter().zip(&s.a_values) {
                for (&j, &b) in s.b_support.iter().zip(&s.b_values) {
                    x[i * s.l + j] = a * b;
                }
            }
        }
    }
    x
}

pub(crate) fn nonzero_normal(rng: &mut SeedStream) -> f64 {
    loop {
        let v: f64 = rng.sample(StandardNormal);
        if v != 0.0 {
            return v;
        }
    }
}

fn sorted_support(rng: &mut SeedStream, m: usize, s: usize) -> Vec<usize> {
    let mut support = index::sample(rng, m, s).into_vec();
    support.sort_unstable();
    support
}

/// `s` i.i.d. standard normal entries at `s` uniformly chosen positions of `ℝ^m`.
pub fn gen_sparse(m: usize, s: usize, seed: u64) -> Result<SparseSignal> {
    if s < 1 || s > m {
        return Err(invalid(format!("sparsity must satisfy 1 <= s <= m, got s={s}, m={m}")));
    }
    let mut rng = SeedStream::new(seed);
    let support = sorted_support(&mut rng, m, s);
    let values = (0..s).map(|_| nonzero_normal(&mut rng)).collect();
    Ok(SparseSignal { m, support, values })
}

/// Sparse `a ∈ ℝ^k` (r nonzeros) and `b ∈ ℝ^l` (t nonzeros), rescaled so the
/// first nonzero of `a` is exactly one.
pub fn gen_kron(k: usize, l: usize, r: usize, t: usize, seed: u64) -> Result<KroneckerSignal> {
    if r < 1 || t < 1 || r > k || t > l {
        return Err(invalid(format!(
            "need 1 <= r <= k and 1 <= t <= l, got k={k} l={l} r={r} t={t}"
        )));
    }
    let mut rng = SeedStream::new(seed);
    let a_support = sorted_support(&mut rng, k, r);
    let mut a_values: Vec<f64> = (0..r).map(|_| nonzero_normal(&mut rng)).collect();
    let b_support = sorted_support(&mut rng, l, t);
    let mut b_values: Vec<f64> = (0..t).map(|_| nonzero_normal(&mut rng)).collect();

    let scale = a_values[0];
    a_values.iter_mut().for_each(|v| *v /= scale);
    a_values[0] = 1.0;
    b_values.iter_mut().for_each(|v| *v *= scale);
    Ok(KroneckerSignal {
        k,
        l,
        a_support,
        a_values,
        b_support,
        b_values,
    })
}

/// `{0} ∪ {1/i : i = 2, ..., count + 1}` on the real line.
pub fn gen_set_f(count: usize) -> Result<PointCloud> {
    if count == 0 {
        return Err(invalid("count must be positive"));
    }
    let coords = std::iter::once(0.0)
        .chain((2..=count + 1).map(|i| 1.0 / i as f64))
        .collect();
    PointCloud::new(1, coords, format!("set_f({count})"))
}

/// Left endpoints of the `2^depth` intervals of the middle-thirds construction.
pub fn gen_cantor(depth: u32) -> Result<PointCloud> {
    if depth == 0 {
        return Err(invalid("depth must be positive"));
    }
    if depth > MAX_CANTOR_DEPTH {
        return Err(AlcError::ResourceLimit(format!(
            "cantor depth {depth} exceeds {MAX_CANTOR_DEPTH}"
        )));
    }
    // Numerators over 3^depth stay below 2^53, so each point is one correctly
    // rounded division.
    let denom = 3u64.pow(depth) as f64;
    let coords = (0u64..1 << depth)
        .map(|code| {
            let mut num = 0u64;
            for level in 0..depth {
                let bit = (code >> (depth - 1 - level)) & 1;
                num = num * 3 + 2 * bit;
            }
            num as f64 / denom
        })
        .collect();
    PointCloud::new(1, coords, format!("cantor({depth})"))
}

/// Uniform points on the segment `[0,1] × {0} ⊂ ℝ²`.
pub fn gen_segment(count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return Err(invalid("count must be positive"));
    }
    let mut rng = SeedStream::new(seed);
    let coords = (0..count)
        .flat_map(|_| [rng.random::<f64>(), 0.0])
        .collect();
    Ok(PointCloud::new(2, coords, format!("segment({count})"))?.with_seed(seed))
}

/// Uniform points on the filled square `[0,1]² × {0} ⊂ ℝ³`.
pub fn gen_square(count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return Err(invalid("count must be positive"));
    }
    let mut rng = SeedStream::new(seed);
    let coords = (0..count)
        .flat_map(|_| [rng.random::<f64>(), rng.random::<f64>(), 0.0])
        .collect();
    Ok(PointCloud::new(3, coords, format!("square({count})"))?.with_seed(seed))
}

/// Uniform points in the unit cube `[0,1]^dim`.
pub fn gen_uniform_cube(dim: usize, count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 || dim == 0 {
        return Err(invalid("dimension and count must be positive"));
    }
    let mut rng = SeedStream::new(seed);
    let coords = (0..count * dim).map(|_| rng.random::<f64>()).collect();
    Ok(PointCloud::new(dim, coords, format!("cube{dim}({count})"))?.with_seed(seed))
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Largest pairwise Euclidean distance between points of a flat row-major buffer;
/// zero for the empty set and for singletons.
pub fn diam_of(dim: usize, coords: &[f64]) -> f64 {
    if dim == 0 || coords.len() <= dim {
        return 0.0;
    }
    let pts: Vec<&[f64]> = coords.chunks_exact(dim).collect();

    // Two farthest-point sweeps give a lower bound that is usually tight.
    let farthest = |from: &[f64]| -> (usize, f64) {
        pts.iter()
            .enumerate()
            .map(|(i, p)| (i, dist2(from, p)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    };
    let (i1, _) = farthest(pts[0]);
    let (_, d) = farthest(pts[i1]);
    let mut best = d;

    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in &pts {
        for c in 0..dim {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    // A point whose farthest bounding-box corner is no farther than the current
    // best cannot be an endpoint of a longer pair.
    let reach2 = |p: &[f64]| -> f64 {
        (0..dim)
            .map(|c| {
                let e = (p[c] - lo[c]).abs().max((hi[c] - p[c]).abs());
                e * e
            })
            .sum()
    };
    let candidates: Vec<&[f64]> = pts.iter().copied().filter(|p| reach2(p) > best).collect();
    for (i, p) in candidates.iter().enumerate() {
        if reach2(p) <= best {
            continue;
        }
        for q in &candidates[i + 1..] {
            let d = dist2(p, q);
            if d > best {
                best = d;
            }
        }
    }
    best.sqrt()
}

pub fn diam(cloud: &PointCloud) -> f64 {
    diam_of(cloud.ambient_dim(), cloud.coords())
}

/// Volume of the radius-`rho` ball in dimension `k`, `π^{k/2} ρ^k / Γ(k/2 + 1)`,
/// extended to real `k ≥ 0`. Returns NaN outside the domain.
pub fn ball_volume(k: f64, rho: f64) -> f64 {
    if k.is_nan() || k < 0.0 || rho.is_nan() || rho <= 0.0 {
        return f64::NAN;
    }
    PI.powf(k / 2.0) * rho.powf(k) / gamma(k / 2.0 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_full_support() {
        for seed in 0..20 {
            let s = gen_sparse(5, 5, seed).unwrap();
            assert_eq!(s.support, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn sparse_single_nonzero() {
        let x = embed(&gen_sparse(6, 1, 3).unwrap().into());
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn sparse_is_deterministic() {
        assert_eq!(gen_sparse(20, 3, 42).unwrap(), gen_sparse(20, 3, 42).unwrap());
        assert_ne!(gen_sparse(20, 3, 42).unwrap(), gen_sparse(20, 3, 43).unwrap());
    }

    #[test]
    fn sparse_rejects_bad_sparsity() {
        assert!(matches!(gen_sparse(4, 0, 1), Err(AlcError::InvalidArgument(_))));
        assert!(matches!(gen_sparse(4, 5, 1), Err(AlcError::InvalidArgument(_))));
    }

    #[test]
    fn kron_trivial_and_normalized() {
        let sig = gen_kron(2, 2, 1, 1, 11).unwrap();
        assert_eq!(sig.a_values[0], 1.0);
        let x = embed(&sig.into());
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 1);
        assert!(matches!(gen_kron(2, 2, 3, 1, 0), Err(AlcError::InvalidArgument(_))));
        assert!(matches!(gen_kron(2, 2, 1, 3, 0), Err(AlcError::InvalidArgument(_))));
    }

    #[test]
    fn embed_examples() {
        let s = SparseSignal::new(3, vec![1], vec![2.5]).unwrap();
        assert_eq!(embed(&s.into()).as_slice(), &[0.0, 2.5, 0.0]);
        let kr = KroneckerSignal::new(2, 2, vec![0], vec![1.0], vec![1], vec![3.0]).unwrap();
        assert_eq!(embed(&kr.into()).as_slice(), &[0.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn kron_constructor_checks_normalization() {
        assert!(KroneckerSignal::new(2, 2, vec![0], vec![2.0], vec![1], vec![3.0]).is_err());
    }

    #[test]
    fn set_f_fixtures() {
        let f = gen_set_f(2).unwrap();
        assert_eq!(f.coords(), &[0.0, 0.5, 1.0 / 3.0]);
        let f = gen_set_f(1000).unwrap();
        assert_eq!(f.len(), 1001);
        let min = f.coords().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = f.coords().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, 0.0);
        assert_eq!(max, 0.5);
    }

    #[test]
    fn cantor_fixtures() {
        assert_eq!(gen_cantor(1).unwrap().coords(), &[0.0, 2.0 / 3.0]);
        assert_eq!(gen_cantor(2).unwrap().coords(), &[0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0]);
        assert!(matches!(gen_cantor(27), Err(AlcError::ResourceLimit(_))));
    }

    #[test]
    fn cantor_digits_are_zero_or_two() {
        let depth = 12;
        let c = gen_cantor(depth).unwrap();
        assert_eq!(c.len(), 4096);
        let scale = 3f64.powi(depth as i32);
        for &x in c.coords() {
            assert!((0.0..=1.0).contains(&x));
            let n = (x * scale).round();
            assert!((x * scale - n).abs() < 1e-6);
            let mut n = n as u64;
            for _ in 0..depth {
                assert_ne!(n % 3, 1, "x = {x}");
                n /= 3;
            }
            assert_eq!(n, 0);
        }
    }

    #[test]
    fn diam_examples() {
        let c = PointCloud::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]], "t").unwrap();
        assert_eq!(diam(&c), 5.0);
        let single = PointCloud::new(2, vec![1.0, 2.0], "one").unwrap();
        assert_eq!(diam(&single), 0.0);
        assert_eq!(diam_of(2, &[]), 0.0);
    }

    #[test]
    fn ball_volume_examples() {
        assert!((ball_volume(1.0, 1.0) - 2.0).abs() < 1e-12);
        assert!((ball_volume(2.0, 1.0) - PI).abs() < 1e-12);
        assert!((ball_volume(3.0, 2.0) - 32.0 * PI / 3.0).abs() < 1e-11);
        assert!((ball_volume(0.0, 1.0) - 1.0).abs() < 1e-12);
        assert!(ball_volume(-1.0, 1.0).is_nan());
    }

    #[test]
    fn csv_round_trip() {
        let c = gen_uniform_cube(3, 50, 9).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,x2\n"));
        let back = PointCloud::read_csv(buf.as_slice(), "back").unwrap();
        assert_eq!(back.coords(), c.coords());
    }

    #[test]
    fn point_cloud_invariants() {
        assert!(PointCloud::new(2, vec![], "e").is_err());
        assert!(PointCloud::new(2, vec![1.0, 2.0, 3.0], "odd").is_err());
        assert!(PointCloud::new(1, vec![f64::NAN], "nan").is_err());
    }

    #[test]
    fn charted_set_pools_images() {
        let mut cs = ChartedSet::new(1, 2).unwrap();
        let grid = param_grid(1, 0.0, 1.0, 11);
        cs.push_chart(&grid, |p| vec![p[0], p[0] * p[0]]).unwrap();
        cs.push_chart(&grid, |p| vec![p[0] + 2.0, 0.0]).unwrap();
        assert_eq!(cs.charts()[0].len(1), 11);
        assert_eq!(cs.pooled("c").unwrap().len(), 22);
        assert!(ChartedSet::new(3, 2).is_err());
    }
}
