//! Small dense helpers shared by the measurement and decoding modules.

use nalgebra::{DMatrix, DVector};

/// Right singular vectors and singular values of `a`, padded so that all `ncols`
/// right singular vectors are returned (zero rows do not change the row space).
pub(crate) fn full_right_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (n, m) = a.shape();
    let square = if n < m {
        let mut p = DMatrix::zeros(m, m);
        p.view_mut((0, 0), (n, m)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.resize(m, 0.0);
    (sv, v_t)
}

pub(crate) fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Solves the symmetric positive definite system `g x = b` in place by
/// Cholesky; `g` is row-major `p × p`. Returns false if `g` is not positive definite.
pub(crate) fn cholesky_solve(g: &mut [f64], b: &mut [f64], p: usize) -> bool {
    for j in 0..p {
        let mut d = g[j * p + j];
        for k in 0..j {
            d -= g[j * p + k] * g[j * p + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        g[j * p + j] = d;
        for i in j + 1..p {
            let mut s = g[i * p + j];
            for k in 0..j {
                s -= g[i * p + k] * g[j * p + k];
            }
            g[i * p + j] = s / d;
        }
    }
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= g[i * p + k] * b[k];
        }
        b[i] = s / g[i * p + i];
    }
    for i in (0..p).rev() {
        let mut s = b[i];
        for k in i + 1..p {
            s -= g[k * p + i] * b[k];
        }
        b[i] = s / g[i * p + i];
    }
    true
}

/// Least-squares solution of `a x ≈ y` via SVD with relative cutoff `1e-12`.
pub(crate) fn lstsq(a: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    svd.solve(y, eps).ok()
}

/// Least squares for a small column-major `n × k` matrix (`k <= n`) by
/// Householder QR. Returns `None` when a pivot of `R` is negligible relative
/// to the largest column norm.
pub(crate) fn householder_lstsq(cols: &[f64], n: usize, k: usize, y: &[f64]) -> Option<Vec<f64>> {
    debug_assert!(k <= n && cols.len() == n * k && y.len() == n);
    let mut a = cols.to_vec();
    let mut b = y.to_vec();
    let scale = (0..k)
        .map(|j| a[j * n..(j + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return if k == 0 { Some(Vec::new()) } else { None };
    }
    for j in 0..k {
        let col = j * n;
        let norm = a[col + j..col + n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale {
            return None;
        }
        let alpha = if a[col + j] > 0.0 { -norm } else { norm };
        // v = x - alpha e_1, stored in place
        a[col + j] -= alpha;
        let vnorm2: f64 = a[col + j..col + n].iter().map(|v| v * v).sum();
        if vnorm2 > 0.0 {
            for c in j + 1..k {
                let cc = c * n;
                let dot: f64 = (j..n).map(|i| a[col + i] * a[cc + i]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in j..n {
                    a[cc + i] -= f * a[col + i];
                }
            }
            let dot: f64 = (j..n).map(|i| a[col + i] * b[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..n {
                b[i] -= f * a[col + i];
            }
        }
        // R_jj = alpha; off-diagonal R entries live in the updated columns
        a[col + j] = alpha;
    }
    let mut x = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = b[j];
        for c in j + 1..k {
            s -= a[c * n + j] * x[c];
        }
        x[j] = s / a[j * n + j];
    }
    Some(x)
}
