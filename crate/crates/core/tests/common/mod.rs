//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use alc::{MeasurementMatrix, DISTINCT, ZERO_ENTRY};
use nalgebra::DVector;

/// Solves the square system `g x = b` by Gaussian elimination with partial
/// pivoting. `None` when a pivot is negligible.
pub fn gauss_solve(mut g: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    let scale = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| g[i][col].abs().total_cmp(&g[j][col].abs()))?;
        if g[piv][col].abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        g.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..k {
            let f = g[row][col] / g[col][col];
            let pivot_row = g[col].clone();
            for (dst, src) in g[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = (row + 1..k).map(|c| g[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / g[row][row];
    }
    Some(x)
}

/// All `k`-subsets of `0..m` in lexicographic order, by recursion.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force exact-fit enumeration: normal equations per support, sizes
/// `0..=s`, same acceptance rules as the decoder. Returns the distinct
/// embeddings in enumeration order (uncapped).
pub fn l0_oracle(a: &MeasurementMatrix, y: &DVector<f64>, s: usize, tol: f64) -> Vec<DVector<f64>> {
    let (n, m) = (a.n(), a.m());
    let e = a.entries();
    let scale = y.norm().max(1.0);
    let mut found: Vec<DVector<f64>> = Vec::new();
    for size in 0..=s {
        for sup in combinations(m, size) {
            let g: Vec<Vec<f64>> = sup
                .iter()
                .map(|&i| sup.iter().map(|&j| (0..n).map(|r| e[(r, i)] * e[(r, j)]).sum()).collect())
                .collect();
            let b: Vec<f64> = sup.iter().map(|&i| (0..n).map(|r| e[(r, i)] * y[r]).sum()).collect();
            let Some(x) = gauss_solve(g, b) else { continue };
            let mut res = 0.0;
            for r in 0..n {
                let fit: f64 = sup.iter().zip(&x).map(|(&j, v)| e[(r, j)] * v).sum();
                res += (fit - y[r]).powi(2);
            }
            if res.sqrt() / scale > tol || x.iter().any(|v| v.abs() < ZERO_ENTRY) {
                continue;
            }
            let mut emb = DVector::zeros(m);
            for (&j, v) in sup.iter().zip(&x) {
                emb[j] = *v;
            }
            if !found.iter().any(|f| (f - &emb).norm() <= DISTINCT) {
                found.push(emb);
            }
        }
    }
    found
}

/// Diameter by comparing all pairs.
pub fn brute_diam(points: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let d: f64 = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            best = best.max(d);
        }
    }
    best
}
