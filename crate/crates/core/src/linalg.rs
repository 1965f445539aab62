//! Small dense real linear algebra used by the numerical probes.

use crate::Complex;

/// `σ₂/σ₁` of the `2 × m` matrix with rows `u`, `v`, or 0 when `σ₁ = 0`.
///
/// The determinant of the Gram matrix is accumulated as a sum of squared
/// `2 × 2` minors, which keeps full relative accuracy near rank one.
pub(crate) fn singular_ratio(u: &[f64], v: &[f64]) -> f64 {
    let tr: f64 = u.iter().chain(v).map(|x| x * x).sum();
    if tr == 0.0 || !tr.is_finite() {
        return 0.0;
    }
    let det = minors_sq_sum(u, v);
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lmax = 0.5 * (tr + disc);
    let lmin = det / lmax;
    (lmin / lmax).max(0.0).sqrt().min(1.0)
}

fn minors_sq_sum(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..u.len() {
        for k in j + 1..u.len() {
            let m = u[j] * v[k] - u[k] * v[j];
            s += m * m;
        }
    }
    s
}

/// All `2 × 2` minors `u_j v_k − u_k v_j` (`j < k`) divided by `‖u‖² + ‖v‖²`.
/// The squared norm of the result is `det(G) / tr(G)²`.
pub(crate) fn scaled_minors(u: &[f64], v: &[f64], out: &mut Vec<f64>) {
    out.clear();
    let tr: f64 = u.iter().chain(v).map(|x| x * x).sum();
    let inv = if tr > 0.0 { 1.0 / tr } else { 0.0 };
    for j in 0..u.len() {
        for k in j + 1..u.len() {
            out.push((u[j] * v[k] - u[k] * v[j]) * inv);
        }
    }
}

/// Interleaves real and imaginary parts: `ℂ^k → ℝ^{2k}`.
pub(crate) fn to_real(z: &[Complex]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of the span of `vectors` by modified Gram–Schmidt.
/// Vectors whose remaining norm is below `rel_tol` times their original
/// norm are treated as dependent and dropped.
pub(crate) fn orthonormal_basis(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = norm(&w);
        if nw > rel_tol * n0 {
            for wi in &mut w {
                *wi /= nw;
            }
            basis.push(w);
        }
    }
    basis
}

/// Component of `x` orthogonal to the span of an orthonormal `basis`.
pub(crate) fn orthogonal_part(x: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = x.to_vec();
    for b in basis {
        let c = dot(&r, b);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= c * bi;
        }
    }
    r
}

/// Component of `x` inside the span of an orthonormal `basis`.
pub(crate) fn span_part(x: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let o = orthogonal_part(x, basis);
    x.iter().zip(&o).map(|(a, b)| a - b).collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular matrix.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
