//! Local minimizers: a compass (pattern) search followed by
//! Levenberg–Marquardt with a central-difference Jacobian. Both work on a
//! feasible set described by a projection.

use crate::linalg;

pub(crate) type Projection<'a> = &'a dyn Fn(&mut [f64]);

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Coordinate pattern search on `cost`. Returns the best point found.
pub(crate) fn compass_search(
    mut x: Vec<f64>,
    cost: &dyn Fn(&[f64]) -> f64,
    project: Projection<'_>,
    mut step: f64,
    min_step: f64,
    max_evals: usize,
) -> Vec<f64> {
    project(&mut x);
    let mut best = cost(&x);
    let mut evals = 1;
    let mut trial = x.clone();
    while step > min_step && evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[i] += dir * step;
                project(&mut trial);
                let c = cost(&trial);
                evals += 1;
                if c < best {
                    best = c;
                    x.copy_from_slice(&trial);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    x
}

pub(crate) struct LmOptions {
    pub max_iters: usize,
    /// Stop once the squared residual norm drops below this.
    pub target_cost: f64,
    pub fd_step: f64,
}

/// Damped Gauss–Newton on `‖residual(x)‖²`.
pub(crate) fn levenberg_marquardt(
    mut x: Vec<f64>,
    residual: &dyn Fn(&[f64], &mut Vec<f64>),
    project: Projection<'_>,
    opts: &LmOptions,
) -> Vec<f64> {
    project(&mut x);
    let p = x.len();
    let mut r = Vec::new();
    residual(&x, &mut r);
    let mut cost = cost_of(&r);
    let mut mu = -1.0;
    let mut rp = Vec::new();
    let mut rm = Vec::new();
    let mut xt = x.clone();
    for _ in 0..opts.max_iters {
        if cost <= opts.target_cost {
            break;
        }
        let m = r.len();
        // jac[k] is the column for parameter k.
        let mut jac = vec![vec![0.0; m]; p];
        for k in 0..p {
            let h = opts.fd_step;
            xt.copy_from_slice(&x);
            xt[k] += h;
            residual(&xt, &mut rp);
            xt[k] -= 2.0 * h;
            residual(&xt, &mut rm);
            for i in 0..m {
                jac[k][i] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut a = vec![vec![0.0; p]; p];
        let mut g = vec![0.0; p];
        for i in 0..p {
            for j in i..p {
                let v = linalg::dot(&jac[i], &jac[j]);
                a[i][j] = v;
                a[j][i] = v;
            }
            g[i] = -linalg::dot(&jac[i], &r);
        }
        let max_diag = (0..p).map(|i| a[i][i]).fold(0.0, f64::max);
        if max_diag == 0.0 {
            break;
        }
        if mu < 0.0 {
            mu = 1e-3 * max_diag;
        }
        let mut accepted = false;
        while mu < 1e10 * max_diag {
            let mut damped = a.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += mu * a[i][i].max(1e-12 * max_diag);
            }
            if let Some(delta) = linalg::solve(damped, g.clone()) {
                xt.copy_from_slice(&x);
                for (xi, di) in xt.iter_mut().zip(&delta) {
                    *xi += di;
                }
                project(&mut xt);
                residual(&xt, &mut rp);
                let c = cost_of(&rp);
                if c < cost {
                    let moved = xt.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    x.copy_from_slice(&xt);
                    std::mem::swap(&mut r, &mut rp);
                    cost = c;
                    mu = (mu / 3.0).max(1e-15 * max_diag);
                    accepted = moved > 0.0;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lm_solves_rosenbrock() {
        let res = |x: &[f64], out: &mut Vec<f64>| {
            out.clear();
            out.push(10.0 * (x[1] - x[0] * x[0]));
            out.push(1.0 - x[0]);
        };
        let opts = LmOptions {
            max_iters: 200,
            target_cost: 1e-28,
            fd_step: 1e-7,
        };
        let x = levenberg_marquardt(vec![-1.2, 1.0], &res, &|_| {}, &opts);
        assert!((x[0] - 1.0).abs() < 1e-8 && (x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn projection_is_respected() {
        let res = |x: &[f64], out: &mut Vec<f64>| {
            out.clear();
            out.push(x[0] - 3.0);
        };
        let clamp = |x: &mut [f64]| x[0] = x[0].min(1.0);
        let opts = LmOptions {
            max_iters: 50,
            target_cost: 0.0,
            fd_step: 1e-7,
        };
        let x = levenberg_marquardt(vec![0.0], &res, &clamp, &opts);
        assert!((x[0] - 1.0).abs() < 1e-12);
        let y = compass_search(vec![0.0], &|x| (x[0] - 3.0).powi(2), &clamp, 0.25, 1e-9, 1000);
        assert!((y[0] - 1.0).abs() < 1e-8);
    }
}
