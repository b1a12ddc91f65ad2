//! Covering numbers, Minkowski-type dimension estimates, Hausdorff δ-measures
//! and Jacobians on finite samples.
//!
//! Covering numbers are counted with axis-aligned grids: a cell of side
//! `2ρ/√m` fits inside a ball of radius `ρ`, so the number of occupied cells
//! is an upper bound on the ball covering number, while a `ρ`-ball meets at
//! most a number of cells depending only on `m`. Log–log slopes are therefore
//! the same for both counts.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::setgen::{ball_volume, diam_of, PointCloud};

/// Tolerance used when checking that the regression slope lies between the
/// extreme local slopes.
pub const SLOPE_TOL: f64 = 1e-9;

/// A strictly decreasing list of at least three positive radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    radii: Vec<f64>,
}

impl ScaleSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 3 {
            return Err(invalid("a scale schedule needs at least 3 radii"));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(invalid("radii must be finite and positive"));
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("radii must be strictly decreasing"));
        }
        Ok(Self { radii })
    }

    /// Radii `base^-j` for `j = j_min..=j_max`.
    pub fn geometric(base: f64, j_min: i32, j_max: i32) -> Result<Self> {
        if !(base > 1.0) {
            return Err(invalid("geometric schedule base must exceed 1"));
        }
        Self::new((j_min..=j_max).map(|j| base.powi(-j)).collect())
    }

    /// Radii `2^-j` for `j = j_min..=j_max`.
    pub fn dyadic(j_min: i32, j_max: i32) -> Result<Self> {
        Self::geometric(2.0, j_min, j_max)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.radii.iter().map(|r| r * factor).collect())
    }
}

/// Covering counts across scales plus the log–log regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// `(ρ, N(ρ))` in schedule order.
    pub per_scale: Vec<(f64, usize)>,
    pub slope: f64,
    /// Smallest local slope between consecutive unsaturated scales (liminf proxy).
    pub slope_lo: f64,
    /// Largest local slope between consecutive unsaturated scales (limsup proxy).
    pub slope_hi: f64,
    pub r2: f64,
    /// Radii whose count equals 1 or the number of sample points.
    pub saturated_scales: Vec<f64>,
}

impl DimensionEstimate {
    /// True when every scale is saturated, i.e. the sample looks finite.
    pub fn fully_saturated(&self) -> bool {
        self.saturated_scales.len() == self.per_scale.len()
    }

    /// Diagnostics record with keys `slope, slope_lo, slope_hi, r2, saturated_scales`.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope,
            "slope_lo": self.slope_lo,
            "slope_hi": self.slope_hi,
            "r2": self.r2,
            "saturated_scales": self.saturated_scales,
        })
    }

    /// CSV with columns `rho,count`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["rho", "count"])?;
        for (rho, count) in &self.per_scale {
            wtr.write_record([rho.to_string(), count.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn cell_key(p: &[f64], anchor: &[f64], side: f64) -> Vec<i64> {
    p.iter()
        .zip(anchor)
        .map(|(x, a)| ((x - a) / side).floor() as i64)
        .collect()
}

fn grid_side(rho: f64, dim: usize) -> f64 {
    2.0 * rho / (dim as f64).sqrt()
}

/// Number of occupied cells of the origin-anchored grid with side `2ρ/√m`.
pub fn covering_number(cloud: &PointCloud, rho: f64) -> Result<usize> {
    let anchor = vec![0.0; cloud.ambient_dim()];
    covering_number_anchored(cloud, rho, &anchor)
}

/// [`covering_number`] with the grid anchored at `anchor` instead of the origin.
pub fn covering_number_anchored(cloud: &PointCloud, rho: f64, anchor: &[f64]) -> Result<usize> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {rho}")));
    }
    if anchor.len() != cloud.ambient_dim() {
        return Err(invalid("grid anchor has the wrong dimension"));
    }
    let side = grid_side(rho, cloud.ambient_dim());
    let cells: HashSet<Vec<i64>> = cloud.points().map(|p| cell_key(p, anchor, side)).collect();
    Ok(cells.len())
}

/// Groups the points of `cloud` by grid cell of the given side; cells are
/// returned in lexicographic order of their integer keys.
pub fn grid_cover(cloud: &PointCloud, side: f64) -> Result<Vec<PointCloud>> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(invalid(format!("cell side must be positive, got {side}")));
    }
    let dim = cloud.ambient_dim();
    let anchor = vec![0.0; dim];
    let mut keyed: Vec<(Vec<i64>, usize)> = cloud
        .points()
        .enumerate()
        .map(|(i, p)| (cell_key(p, &anchor, side), i))
        .collect();
    keyed.sort();
    let mut out = Vec::new();
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start + 1;
        while end < keyed.len() && keyed[end].0 == keyed[start].0 {
            end += 1;
        }
        let coords: Vec<f64> = keyed[start..end]
            .iter()
            .flat_map(|(_, i)| cloud.point(*i).iter().copied())
            .collect();
        out.push(PointCloud::new(dim, coords, "cell")?);
        start = end;
    }
    Ok(out)
}

/// Least-squares fit `y ≈ c + slope·x`; returns `(slope, r2)`.
fn regress(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, r2)
}

/// Builds a [`DimensionEstimate`] from per-scale counts of a sample with
/// `sample_size` points.
///
/// Scales where the count is 1 or `sample_size` carry no information about
/// the underlying set and are flagged. The regression and the local slopes
/// use the unsaturated scales only; with fewer than two of them the slope is
/// reported as zero.
pub fn estimate_from_counts(per_scale: Vec<(f64, usize)>, sample_size: usize) -> DimensionEstimate {
    let saturated = |c: usize| c <= 1 || c >= sample_size;
    let saturated_scales: Vec<f64> = per_scale
        .iter()
        .filter(|(_, c)| saturated(*c))
        .map(|(r, _)| *r)
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = per_scale
        .iter()
        .filter(|(_, c)| !saturated(*c))
        .map(|(r, c)| ((1.0 / r).ln(), (*c as f64).ln()))
        .unzip();

    if xs.len() < 2 {
        return DimensionEstimate {
            per_scale,
            slope: 0.0,
            slope_lo: 0.0,
            slope_hi: 0.0,
            r2: 0.0,
            saturated_scales,
        };
    }
    let (slope, r2) = regress(&xs, &ys);
    let local: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let lo = local.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
    let hi = local.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    DimensionEstimate {
        per_scale,
        slope: slope.max(0.0),
        slope_lo: lo,
        slope_hi: hi,
        r2,
        saturated_scales,
    }
}

/// Box-counting estimate of the Minkowski dimension over a scale schedule.
///
/// The finest radius should not fall below about a quarter of the smallest
/// inter-point spacing; below that the counts saturate at the sample size and
/// are flagged in [`DimensionEstimate::saturated_scales`].
pub fn minkowski_dim(cloud: &PointCloud, sched: &ScaleSchedule) -> Result<DimensionEstimate> {
    let anchor = vec![0.0; cloud.ambient_dim()];
    minkowski_dim_anchored(cloud, sched, &anchor)
}

pub fn minkowski_dim_anchored(
    cloud: &PointCloud,
    sched: &ScaleSchedule,
    anchor: &[f64],
) -> Result<DimensionEstimate> {
    let counts: Vec<(f64, usize)> = sched
        .radii()
        .par_iter()
        .map(|&rho| covering_number_anchored(cloud, rho, anchor).map(|c| (rho, c)))
        .collect::<Result<_>>()?;
    Ok(estimate_from_counts(counts, cloud.len()))
}

/// Finite-cover surrogate for the modified Minkowski dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDimensionEstimate {
    /// Estimate of the block with the largest slope.
    pub worst: DimensionEstimate,
    pub worst_block: usize,
    pub block_slopes: Vec<f64>,
}

impl BlockDimensionEstimate {
    pub fn slope(&self) -> f64 {
        self.worst.slope
    }
}

/// Supremum over the supplied blocks of their box-counting slopes. The caller
/// chooses the cover; no search over covers is attempted.
pub fn modified_minkowski_dim(
    blocks: &[PointCloud],
    sched: &ScaleSchedule,
) -> Result<BlockDimensionEstimate> {
    if blocks.is_empty() {
        return Err(invalid("block list must be non-empty"));
    }
    let estimates: Vec<DimensionEstimate> = blocks
        .iter()
        .map(|b| minkowski_dim(b, sched))
        .collect::<Result<_>>()?;
    let block_slopes: Vec<f64> = estimates.iter().map(|e| e.slope).collect();
    // first maximum wins ties
    let worst_block = block_slopes
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if *s > block_slopes[best] { i } else { best });
    Ok(BlockDimensionEstimate {
        worst: estimates[worst_block].clone(),
        worst_block,
        block_slopes,
    })
}

/// `(V(s,1)/2^s) Σ diam(U_i)^s` for one given cover, with `diam^0 = 1`.
pub fn hausdorff_measure_delta(cover: &[PointCloud], s: f64) -> Result<f64> {
    let diams: Vec<f64> = cover.iter().map(crate::setgen::diam).collect();
    hausdorff_sum(&diams, s)
}

/// [`hausdorff_measure_delta`] from precomputed cover diameters.
pub fn hausdorff_sum(diams: &[f64], s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(invalid(format!("Hausdorff exponent must be non-negative, got {s}")));
    }
    if diams.is_empty() {
        return Err(invalid("cover must be non-empty"));
    }
    let sum: f64 = if s == 0.0 {
        diams.len() as f64
    } else {
        diams.iter().map(|d| d.powf(s)).sum()
    };
    Ok(ball_volume(s, 1.0) / 2f64.powf(s) * sum)
}

/// Grid-cover values of `H^s_δ` over a grid of exponents and mesh sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffSweep {
    pub s_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    /// `values[i][j]` is the estimate at `s_grid[i]`, `delta_grid[j]`.
    pub values: Vec<Vec<f64>>,
    pub transition_s: f64,
}

impl HausdorffSweep {
    /// CSV with columns `s,delta,value`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["s", "delta", "value"])?;
        for (s, row) in self.s_grid.iter().zip(&self.values) {
            for (d, v) in self.delta_grid.iter().zip(row) {
                wtr.write_record([s.to_string(), d.to_string(), v.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Locates the jump of `H^s` from large to small values.
///
/// For every exponent the grid-cover value at the finest mesh is compared with
/// the value at the coarsest mesh. Below the dimension the value grows as the
/// mesh is refined, above it the value shrinks. `transition_s` is the first
/// exponent where the finest value drops below the coarsest one, linearly
/// interpolated in the log ratio between neighbouring exponents. An exponent
/// whose value vanishes at every mesh counts as dropped.
pub fn hausdorff_dim_estimate(
    cloud: &PointCloud,
    s_grid: &[f64],
    delta_grid: &[f64],
) -> Result<HausdorffSweep> {
    if s_grid.is_empty() || s_grid.windows(2).any(|w| w[1] <= w[0]) || s_grid[0] < 0.0 {
        return Err(invalid("s grid must be non-empty, non-negative and increasing"));
    }
    if delta_grid.len() < 2
        || delta_grid.windows(2).any(|w| w[1] >= w[0])
        || delta_grid.iter().any(|d| !(*d > 0.0))
    {
        return Err(invalid("delta grid needs at least two positive decreasing values"));
    }
    let dim = cloud.ambient_dim();
    let diams_per_delta: Vec<Vec<f64>> = delta_grid
        .par_iter()
        .map(|&delta| {
            let cells = grid_cover(cloud, delta / (dim as f64).sqrt())?;
            Ok(cells.iter().map(|c| diam_of(dim, c.coords())).collect())
        })
        .collect::<Result<_>>()?;

    let values: Vec<Vec<f64>> = s_grid
        .iter()
        .map(|&s| {
            diams_per_delta
                .iter()
                .map(|d| hausdorff_sum(d, s))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    // log(finest / coarsest); -inf when the finest value vanishes
    let log_ratio: Vec<f64> = values
        .iter()
        .map(|row| {
            let (coarse, fine) = (row[0], row[row.len() - 1]);
            match (coarse > 0.0, fine > 0.0) {
                (true, true) => (fine / coarse).ln(),
                (_, false) => f64::NEG_INFINITY,
                (false, true) => f64::INFINITY,
            }
        })
        .collect();
    let transition_s = match log_ratio.iter().position(|g| *g < 0.0) {
        None => *s_grid.last().unwrap(),
        Some(0) => s_grid[0],
        Some(j) => {
            let (g0, g1) = (log_ratio[j - 1], log_ratio[j]);
            if g1.is_infinite() || g0.is_infinite() {
                s_grid[j - 1]
            } else {
                s_grid[j - 1] + g0 / (g0 - g1) * (s_grid[j] - s_grid[j - 1])
            }
        }
    };
    Ok(HausdorffSweep {
        s_grid: s_grid.to_vec(),
        delta_grid: delta_grid.to_vec(),
        values,
        transition_s,
    })
}

/// `min(k,l)`-dimensional Jacobian of a differential `D` with `l` rows and `k`
/// columns: `√det(D Dᵀ)` when `l < k`, else `√det(Dᵀ D)`.
pub fn jacobian(d: &DMatrix<f64>) -> f64 {
    let gram = if d.nrows() < d.ncols() {
        d * d.transpose()
    } else {
        d.transpose() * d
    };
    let det = gram.determinant();
    if det < 0.0 && det.abs() < 1e-12 {
        return 0.0;
    }
    det.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setgen::{gen_set_f, PointCloud};

    #[test]
    fn schedule_validation() {
        assert!(ScaleSchedule::new(vec![1.0, 0.5]).is_err());
        assert!(ScaleSchedule::new(vec![1.0, 0.5, 0.5]).is_err());
        assert!(ScaleSchedule::new(vec![1.0, 0.5, -0.1]).is_err());
        assert_eq!(ScaleSchedule::dyadic(1, 3).unwrap().radii(), &[0.5, 0.25, 0.125]);
    }

    #[test]
    fn singleton_covers_with_one_cell() {
        let c = PointCloud::new(3, vec![0.3, -1.2, 7.0], "pt").unwrap();
        for rho in [1e-6, 0.01, 1.0, 100.0] {
            assert_eq!(covering_number(&c, rho).unwrap(), 1);
        }
        assert!(covering_number(&c, 0.0).is_err());
        assert!(covering_number(&c, -1.0).is_err());
    }

    #[test]
    fn equispaced_interval_count() {
        let coords: Vec<f64> = (0..=1024).map(|i| i as f64 / 1024.0).collect();
        let c = PointCloud::new(1, coords, "grid").unwrap();
        assert_eq!(covering_number(&c, 1.0 / 32.0).unwrap(), 17);
    }

    #[test]
    fn set_f_count_bracket() {
        let f = gen_set_f(10_000).unwrap();
        let rho: f64 = 1e-4;
        let c = covering_number(&f, rho).unwrap() as f64;
        assert!(c >= 0.5 * rho.powf(-0.5) && c <= 4.0 * rho.powf(-0.5), "count {c}");
    }

    #[test]
    fn saturated_scales_are_flagged() {
        let c = PointCloud::new(1, vec![0.0, 0.3], "two").unwrap();
        let e = minkowski_dim(&c, &ScaleSchedule::dyadic(0, 8).unwrap()).unwrap();
        assert!(e.fully_saturated());
        assert_eq!(e.slope, 0.0);
    }

    #[test]
    fn single_block_matches_plain_estimate() {
        let f = gen_set_f(2000).unwrap();
        let sched = ScaleSchedule::dyadic(3, 9).unwrap();
        let plain = minkowski_dim(&f, &sched).unwrap();
        let blocks = modified_minkowski_dim(std::slice::from_ref(&f), &sched).unwrap();
        assert_eq!(blocks.worst, plain);
        assert!(modified_minkowski_dim(&[], &sched).is_err());
    }

    fn unit_cover(s_count: usize) -> Vec<PointCloud> {
        (0..s_count)
            .map(|i| {
                let a = i as f64 / 10.0;
                PointCloud::new(1, vec![a, a + 0.1], "piece").unwrap()
            })
            .collect()
    }

    #[test]
    fn hausdorff_formula_fixtures() {
        let cover = unit_cover(10);
        let h1 = hausdorff_measure_delta(&cover, 1.0).unwrap();
        let h0 = hausdorff_measure_delta(&cover, 0.0).unwrap();
        let h2 = hausdorff_measure_delta(&cover, 2.0).unwrap();
        assert!((h1 - 1.0).abs() < 1e-10);
        assert!((h0 - 10.0).abs() < 1e-10);
        assert!((h2 - std::f64::consts::PI / 40.0).abs() < 1e-10);
        assert!(hausdorff_measure_delta(&cover, -0.5).is_err());
    }

    #[test]
    fn zero_exponent_counts_degenerate_pieces() {
        let cover = vec![PointCloud::new(1, vec![0.5], "p").unwrap()];
        assert_eq!(hausdorff_measure_delta(&cover, 0.0).unwrap(), 1.0);
        assert_eq!(hausdorff_measure_delta(&cover, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn singleton_sweep_drops_immediately() {
        let c = PointCloud::new(2, vec![0.25, 0.75], "pt").unwrap();
        let s_grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let deltas = [0.5, 0.1, 0.01];
        let sweep = hausdorff_dim_estimate(&c, &s_grid, &deltas).unwrap();
        assert!(sweep.transition_s <= 0.05);
    }

    #[test]
    fn jacobian_fixtures() {
        assert!((jacobian(&DMatrix::identity(3, 3)) - 1.0).abs() < 1e-12);
        let proj = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((jacobian(&proj) - 1.0).abs() < 1e-12);
        let h = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert!((jacobian(&h) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn jacobian_of_rank_deficient_is_zero() {
        let d = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(jacobian(&d).abs() < 1e-6);
    }
}
