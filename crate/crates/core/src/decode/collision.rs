use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gauss_newton::{minimize, LeastSquares, LmSettings};
use super::kron::{KronShape, SupportBlock};
use super::subsets;
use crate::error::{invalid, Result};
use crate::measureop::{apply, MeasurementMatrix};
use crate::rng::{mix, SeedStream};
use crate::setgen::{embed, KroneckerSignal, StructuredSignal};

/// Reports closer than this in embedding space are not collisions.
pub const MIN_SEPARATION: f64 = 1e-3;
/// A pair counts as a collision only below this objective.
pub const MAX_COLLISION_OBJECTIVE: f64 = 1e-10;

/// Two separated structured signals with (numerically) equal measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    /// `‖A(embed(x1) − embed(x2))‖₂`.
    pub objective: f64,
    /// `‖embed(x1) − embed(x2)‖₂`.
    pub separation: f64,
    pub x1: StructuredSignal,
    pub x2: StructuredSignal,
}

impl CollisionReport {
    /// Recomputes the objective from the stored signals.
    pub fn recompute_objective(&self, a: &MeasurementMatrix) -> Result<f64> {
        Ok(apply(a, &(embed(&self.x1) - embed(&self.x2)))?.norm())
    }
}

/// `A(x1 − x2)` over two fixed support pairs, with the separation pinned to one
/// by rescaling both `b` factors.
struct PairProblem<'a> {
    first: &'a SupportBlock,
    second: &'a SupportBlock,
    dim: usize,
}

impl PairProblem<'_> {
    fn p1(&self) -> usize {
        self.first.r() + self.first.t() - 1
    }

    /// `(a1_rest, b1, a2_rest, b2)`.
    fn split<'v>(&self, v: &'v [f64]) -> (&'v [f64], &'v [f64], &'v [f64], &'v [f64]) {
        let (v1, v2) = v.split_at(self.p1());
        let (a1, b1) = v1.split_at(self.first.r() - 1);
        let (a2, b2) = v2.split_at(self.second.r() - 1);
        (a1, b1, a2, b2)
    }

    fn separation(&self, v: &[f64]) -> f64 {
        let (a1, b1, a2, b2) = self.split(v);
        let mut d = vec![0.0; self.dim];
        for (block, a_rest, b, sign) in [(self.first, a1, b1, 1.0), (self.second, a2, b2, -1.0)] {
            for (ii, &i) in block.a_support.iter().enumerate() {
                let ai = if ii == 0 { 1.0 } else { a_rest[ii - 1] };
                for (&j, bj) in block.b_support.iter().zip(b) {
                    d[i * block.l + j] += sign * ai * bj;
                }
            }
        }
        d.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl LeastSquares for PairProblem<'_> {
    fn n_residuals(&self) -> usize {
        self.first.n
    }

    fn n_params(&self) -> usize {
        self.p1() + self.second.r() + self.second.t() - 1
    }

    fn residual(&self, v: &[f64], out: &mut [f64]) {
        let (a1, b1, a2, b2) = self.split(v);
        out.fill(0.0);
        self.first.accumulate(a1, b1, 1.0, out);
        self.second.accumulate(a2, b2, -1.0, out);
    }

    fn jacobian(&self, v: &[f64], jac: &mut [f64]) {
        let (a1, b1, a2, b2) = self.split(v);
        self.first.jacobian_into(a1, b1, 1.0, jac, 0);
        self.second.jacobian_into(a2, b2, -1.0, jac, self.p1());
    }

    fn project(&self, v: &mut [f64]) -> bool {
        let sep = self.separation(v);
        if !(sep > 1e-12) || !sep.is_finite() {
            return false;
        }
        let (r1, p1, r2) = (self.first.r(), self.p1(), self.second.r());
        for x in v[r1 - 1..p1].iter_mut() {
            *x /= sep;
        }
        for x in v[p1 + r2 - 1..].iter_mut() {
            *x /= sep;
        }
        true
    }
}

fn settings() -> LmSettings {
    LmSettings {
        target: 1e-3 * MAX_COLLISION_OBJECTIVE,
        ..LmSettings::default()
    }
}

fn signal(shape: &KronShape, block: &SupportBlock, v: &[f64]) -> Option<StructuredSignal> {
    let r = block.r();
    let mut a = vec![1.0];
    a.extend_from_slice(&v[..r - 1]);
    KroneckerSignal::new(
        shape.k,
        shape.l,
        block.a_support.clone(),
        a,
        block.b_support.clone(),
        v[r - 1..].to_vec(),
    )
    .ok()
    .map(Into::into)
}

/// Builds a report from a converged parameter vector, enforcing both gates.
fn report(a: &MeasurementMatrix, shape: &KronShape, prob: &PairProblem, v: &[f64]) -> Option<CollisionReport> {
    let p1 = prob.p1();
    let x1 = signal(shape, prob.first, &v[..p1])?;
    let x2 = signal(shape, prob.second, &v[p1..])?;
    let diff = embed(&x1) - embed(&x2);
    let separation = diff.norm();
    let objective = apply(a, &diff).ok()?.norm();
    (objective < MAX_COLLISION_OBJECTIVE && separation >= MIN_SEPARATION).then_some(CollisionReport {
        objective,
        separation,
        x1,
        x2,
    })
}

/// Searches for two Kronecker signals with equal measurements.
///
/// The first signal lives on the lexicographically first support pair, the
/// second on the last. Each start draws random factors, normalizes the
/// separation `‖embed(x1) − embed(x2)‖` to one and runs projected damped
/// Gauss–Newton on `‖A(embed(x1) − embed(x2))‖²`. The best pair is returned
/// when its objective is below [`MAX_COLLISION_OBJECTIVE`]. `None` means no
/// collision was found, not that `A` is injective on the family.
pub fn collision_search(
    a: &MeasurementMatrix,
    shape: KronShape,
    starts: usize,
    seed: u64,
) -> Result<Option<CollisionReport>> {
    if starts == 0 {
        return Err(invalid("starts must be at least 1"));
    }
    if a.m() != shape.dim() {
        return Err(invalid(format!("matrix has {} columns, expected k*l = {}", a.m(), shape.dim())));
    }
    let a_sets = subsets(shape.k, shape.r);
    let b_sets = subsets(shape.l, shape.t);
    let first = SupportBlock::new(a, shape.l, &a_sets[0], &b_sets[0]);
    let second = SupportBlock::new(a, shape.l, &a_sets[a_sets.len() - 1], &b_sets[b_sets.len() - 1]);
    let prob = PairProblem {
        first: &first,
        second: &second,
        dim: shape.dim(),
    };
    let p = prob.n_params();
    let mut best: Option<CollisionReport> = None;
    for start in 0..starts {
        let mut rng = SeedStream::new(mix(seed, start as u64));
        let mut v: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        if minimize(&prob, &mut v, settings()).is_none() {
            continue;
        }
        if let Some(rep) = report(a, &shape, &prob, &v) {
            if best.as_ref().is_none_or(|b| rep.objective < b.objective) {
                best = Some(rep);
            }
        }
    }
    Ok(best)
}

/// Runs the projected descent from a given pair of Kronecker signals. Returns
/// `None` when the pair cannot be separated (for instance `x1 = x2`) or no
/// collision is reached.
pub fn polish_collision(
    a: &MeasurementMatrix,
    x1: &KroneckerSignal,
    x2: &KroneckerSignal,
) -> Result<Option<CollisionReport>> {
    if x1.k != x2.k || x1.l != x2.l || x1.r() != x2.r() || x1.t() != x2.t() {
        return Err(invalid("signals must share the Kronecker shape"));
    }
    let shape = KronShape::new(x1.k, x1.l, x1.r(), x1.t())?;
    if a.m() != shape.dim() {
        return Err(invalid(format!("matrix has {} columns, expected k*l = {}", a.m(), shape.dim())));
    }
    let first = SupportBlock::new(a, shape.l, &x1.a_support, &x1.b_support);
    let second = SupportBlock::new(a, shape.l, &x2.a_support, &x2.b_support);
    let prob = PairProblem {
        first: &first,
        second: &second,
        dim: shape.dim(),
    };
    let mut v = Vec::with_capacity(prob.n_params());
    for x in [x1, x2] {
        let lead = x.a_values[0];
        v.extend(x.a_values[1..].iter().map(|a| a / lead));
        v.extend(x.b_values.iter().map(|b| b * lead));
    }
    if prob.separation(&v) < MIN_SEPARATION * 1e-3 {
        return Ok(None);
    }
    if minimize(&prob, &mut v, settings()).is_none() {
        return Ok(None);
    }
    Ok(report(a, &shape, &prob, &v))
}
