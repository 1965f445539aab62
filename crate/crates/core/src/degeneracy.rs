//! Strong non-degeneracy: the exact monomial rule for single-term faces and
//! a seeded multistart search for mixed critical points on the torus for
//! every other compact face.

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg;
use crate::mixedpoly::lambda_fit;
use crate::newton::{self, Face};
use crate::optim::{self, LmOptions};
use crate::seed;
use crate::{Complex, Error, MixedPolynomial, Result, Subset};

/// Largest screening lattice evaluated before the local searches.
const LATTICE_CAP: usize = 65_536;

/// Starts are run in chunks so a search can stop deterministically once
/// some chunk has produced a witness.
const CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub multistarts: usize,
    pub grid_per_dim: usize,
    pub radial_bounds: (f64, f64),
    pub tol_accept: f64,
    pub tol_floor: f64,
    pub max_refine_iters: usize,
    /// Use the exact rule for single-term face functions.
    pub monomial_fast_path: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            multistarts: 512,
            grid_per_dim: 16,
            radial_bounds: (0.2, 5.0),
            tol_accept: 1e-9,
            tol_floor: 1e-3,
            max_refine_iters: 100,
            monomial_fast_path: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.radial_bounds;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "radial bounds must satisfy 0 < r_min <= r_max, got [{}, {}]",
                lo, hi
            )));
        }
        if !(self.tol_accept > 0.0 && self.tol_accept < self.tol_floor) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < tol_accept < tol_floor, got {} and {}",
                self.tol_accept, self.tol_floor
            )));
        }
        if self.multistarts == 0 {
            return Err(Error::InvalidConfig("multistarts must be positive".into()));
        }
        Ok(())
    }
}

/// A point of the torus where `conj(∂f) = λ ∂̄f` up to `residual`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalityWitness {
    pub z: Vec<Complex>,
    pub lambda: Complex,
    /// `min(σ₂/σ₁, ‖J‖/M)` of the real Jacobian `J` at `z`.
    pub residual: f64,
    /// `min_{|λ|=1} ‖conj(∂f) − λ∂̄f‖ / ‖(∂f, ∂̄f)‖` at `z`.
    pub lambda_residual: f64,
}

impl CriticalityWitness {
    pub(crate) fn at(f: &MixedPolynomial, z: Vec<Complex>, vars: Subset) -> Self {
        let grad = f.gradient_unchecked(&z);
        let (lambda, lambda_residual) = lambda_fit(&grad, vars);
        CriticalityWitness {
            residual: f.combined_criticality(&z, vars),
            z,
            lambda,
            lambda_residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FaceStatus {
    ProvenNondegenerate,
    ProvenDegenerate { witness: CriticalityWitness },
    NoCriticalPointFound,
    CriticalPointFound { witness: CriticalityWitness },
}

impl FaceStatus {
    pub fn passes(&self) -> bool {
        matches!(
            self,
            FaceStatus::ProvenNondegenerate | FaceStatus::NoCriticalPointFound
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            FaceStatus::ProvenNondegenerate => "PROVEN_NONDEGENERATE",
            FaceStatus::ProvenDegenerate { .. } => "PROVEN_DEGENERATE",
            FaceStatus::NoCriticalPointFound => "NO_CRITICAL_POINT_FOUND",
            FaceStatus::CriticalPointFound { .. } => "CRITICAL_POINT_FOUND",
        }
    }

    pub fn witness(&self) -> Option<&CriticalityWitness> {
        match self {
            FaceStatus::ProvenDegenerate { witness } | FaceStatus::CriticalPointFound { witness } => {
                Some(witness)
            }
            _ => None,
        }
    }

    /// Worse statuses compare greater.
    fn severity(&self) -> u8 {
        match self {
            FaceStatus::ProvenNondegenerate => 0,
            FaceStatus::NoCriticalPointFound => 1,
            FaceStatus::CriticalPointFound { .. } => 2,
            FaceStatus::ProvenDegenerate { .. } => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceVerdict {
    pub face: Option<Face>,
    #[serde(flatten)]
    pub status: FaceStatus,
    pub min_residual_seen: f64,
    /// Minimum residual landed in `(tol_accept, tol_floor)`.
    pub low_margin: bool,
    pub starts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub faces: Vec<FaceVerdict>,
    pub passes: bool,
}

impl NondegeneracyReport {
    pub fn worst(&self) -> Option<&FaceVerdict> {
        self.faces.iter().max_by_key(|v| v.status.severity())
    }
}

/// The exact verdict for a single-term `f = c z^ν z̄^μ` on the torus.
///
/// `|∂f/∂z_i| = ν_i |f/z_i|` and `|∂f/∂z̄_i| = μ_i |f/z_i|`, so `|λ| = 1`
/// forces `ν = μ`; conversely `ν = μ` gives `conj(∂f) = (c̄/c) ∂̄f`.
pub fn monomial_rule(f: &MixedPolynomial) -> Result<FaceStatus> {
    if f.len() != 1 {
        return Err(Error::NotAMonomial(f.len()));
    }
    let (key, c) = f.terms().next().unwrap();
    if key.nu != key.mu {
        return Ok(FaceStatus::ProvenNondegenerate);
    }
    let z = vec![Complex::new(1.0, 0.0); f.n()];
    let mut witness = CriticalityWitness::at(f, z, Subset::full(f.n()));
    witness.lambda = c.conj() / c;
    Ok(FaceStatus::ProvenDegenerate { witness })
}

/// Parameterization `z_i = exp(x_{2i} + i x_{2i+1})` of the torus, with a
/// projection that encodes the feasible set.
pub(crate) struct TorusProblem<'a> {
    pub f: &'a MixedPolynomial,
    /// Variables with respect to which criticality is measured.
    pub vars: Subset,
    pub project: Box<dyn Fn(&mut [f64]) + Sync + 'a>,
}

pub(crate) fn point_of(x: &[f64]) -> Vec<Complex> {
    x.chunks(2)
        .map(|p| Complex::from_polar(p[0].exp(), p[1]))
        .collect()
}

pub(crate) fn params_of(z: &[Complex]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.norm().ln(), c.arg()]).collect()
}

impl TorusProblem<'_> {
    fn rows(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.f.gradient_unchecked(&point_of(x)).real_rows(self.vars)
    }

    pub fn ratio(&self, x: &[f64]) -> f64 {
        self.f.combined_criticality(&point_of(x), self.vars)
    }

    fn cost(&self, x: &[f64]) -> f64 {
        let (u, v) = self.rows(x);
        let mut m = Vec::new();
        linalg::scaled_minors(&u, &v, &mut m);
        let c: f64 = m.iter().map(|t| t * t).sum();
        if c.is_finite() {
            c
        } else {
            f64::MAX
        }
    }

    fn on_torus(x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite()) && point_of(x).iter().all(|z| z.norm() > 0.0 && z.norm().is_finite())
    }

    /// Compass search then Levenberg–Marquardt on the rank defect, and
    /// separately Levenberg–Marquardt on the normalized gradient. Returns
    /// the better end point and the combined criticality there.
    pub fn refine(&self, x0: Vec<f64>, cfg: &SearchConfig) -> (Vec<f64>, f64) {
        let project = |x: &mut [f64]| (self.project)(x);
        let opts = LmOptions {
            max_iters: cfg.max_refine_iters,
            target_cost: (cfg.tol_accept * 1e-3).powi(2),
            fd_step: 1e-7,
        };
        let vanishing = |x: &[f64], out: &mut Vec<f64>| {
            let z = point_of(x);
            let (u, v) = self.f.gradient_unchecked(&z).real_rows(self.vars);
            let bound = self.f.gradient_majorant(&z, self.vars);
            out.clear();
            out.extend(u.iter().chain(&v).map(|t| {
                let r = t / bound;
                if r.is_finite() {
                    r
                } else {
                    1.0
                }
            }));
        };
        let xv = optim::levenberg_marquardt(x0.clone(), &vanishing, &project, &opts);
        let x = optim::compass_search(
            x0,
            &|x| self.cost(x),
            &project,
            0.25,
            1e-3,
            24 * (self.f.n() + 1),
        );
        let residual = |x: &[f64], out: &mut Vec<f64>| {
            let (u, v) = self.rows(x);
            linalg::scaled_minors(&u, &v, out);
            for t in out.iter_mut() {
                if !t.is_finite() {
                    *t = 1.0;
                }
            }
        };
        let x = optim::levenberg_marquardt(x, &residual, &project, &opts);
        let score = |x: &[f64]| if Self::on_torus(x) { self.ratio(x) } else { 1.0 };
        let (r, rv) = (score(&x), score(&xv));
        if rv < r {
            (xv, rv)
        } else {
            (x, r)
        }
    }
}

/// Result of running many refinements.
pub(crate) struct MultistartOutcome {
    pub min_residual: f64,
    pub witness: Option<(Vec<f64>, f64)>,
    pub starts: usize,
}

/// Refines every start (in chunks, in parallel) and merges in start order.
pub(crate) fn run_starts(
    problem: &TorusProblem<'_>,
    starts: &[Vec<f64>],
    cfg: &SearchConfig,
) -> MultistartOutcome {
    let mut out = MultistartOutcome {
        min_residual: f64::INFINITY,
        witness: None,
        starts: 0,
    };
    for chunk in starts.chunks(CHUNK) {
        let results: Vec<(Vec<f64>, f64)> = chunk
            .par_iter()
            .map(|x0| problem.refine(x0.clone(), cfg))
            .collect();
        out.starts += chunk.len();
        for (x, r) in results {
            let r = if r.is_finite() { r } else { 1.0 };
            if r < out.min_residual {
                out.min_residual = r;
            }
            if out.witness.is_none() && r < cfg.tol_accept {
                out.witness = Some((x, r));
            }
        }
        if out.witness.is_some() {
            break;
        }
    }
    out
}

pub(crate) fn poly_fingerprint(f: &MixedPolynomial) -> u64 {
    let mut words = vec![f.n() as u64];
    for (k, c) in f.terms() {
        words.extend(k.nu.iter().chain(&k.mu).map(|&e| e as u64));
        words.push(c.re.to_bits());
        words.push(c.im.to_bits());
    }
    seed::fingerprint(words)
}

/// Box or weighted-slice projection on the log-radii; phases are free.
pub(crate) fn radial_projection(
    n: usize,
    bounds: (f64, f64),
    weights: Option<Vec<f64>>,
) -> Box<dyn Fn(&mut [f64]) + Sync> {
    let (lo, hi) = (bounds.0.ln(), bounds.1.ln());
    match weights {
        None => Box::new(move |x: &mut [f64]| {
            for i in 0..n {
                x[2 * i] = x[2 * i].clamp(lo, hi);
            }
        }),
        Some(w) => Box::new(move |x: &mut [f64]| {
            normalize_weighted(x, &w, lo - hi);
        }),
    }
}

/// Moves `x` along the orbit `ρ ↦ ρ + s·w` so that `max ρ_i/w_i = 0`, then
/// bounds each `ρ_i/w_i` below by `floor`. Entries with `w_i = 0` are left
/// alone.
pub(crate) fn normalize_weighted(x: &mut [f64], w: &[f64], floor: f64) {
    let m = w
        .iter()
        .enumerate()
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(i, &wi)| x[2 * i] / wi)
        .fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return;
    }
    for (i, &wi) in w.iter().enumerate() {
        if wi > 0.0 {
            x[2 * i] = (x[2 * i] - m * wi).max(floor * wi);
        }
    }
}

fn lattice_starts(
    problem: &TorusProblem<'_>,
    cfg: &SearchConfig,
    count: usize,
) -> Vec<Vec<f64>> {
    let n = problem.f.n();
    let dims = 2 * n as u32;
    let mut g = cfg.grid_per_dim.max(2);
    while g > 2 && (g as u64).checked_pow(dims).map_or(true, |v| v > LATTICE_CAP as u64) {
        g -= 1;
    }
    let total = (g as u64).pow(dims) as usize;
    let (lo, hi) = (cfg.radial_bounds.0.ln(), cfg.radial_bounds.1.ln());
    let coord = |idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; 2 * n];
        let mut rest = idx;
        for (k, xk) in x.iter_mut().enumerate() {
            let j = rest % g;
            rest /= g;
            let frac = (j as f64 + 0.5) / g as f64;
            *xk = if k % 2 == 0 {
                lo + (hi - lo) * frac
            } else {
                std::f64::consts::TAU * frac
            };
        }
        (problem.project)(&mut x);
        x
    };
    let mut scored: Vec<(f64, usize)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let c = problem.cost(&coord(i));
            (if c.is_finite() { c } else { f64::MAX }, i)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(count).map(|(_, i)| coord(i)).collect()
}

fn random_starts(
    problem: &TorusProblem<'_>,
    cfg: &SearchConfig,
    task: u64,
    count: usize,
) -> Vec<Vec<f64>> {
    use rand::Rng;
    let n = problem.f.n();
    let (lo, hi) = (cfg.radial_bounds.0.ln(), cfg.radial_bounds.1.ln());
    (0..count)
        .map(|k| {
            let mut rng = seed::task_rng(cfg.seed, task, k as u64);
            let mut x: Vec<f64> = (0..2 * n)
                .map(|j| {
                    if j % 2 == 0 {
                        rng.gen_range(lo..=hi)
                    } else {
                        rng.gen_range(0.0..std::f64::consts::TAU)
                    }
                })
                .collect();
            (problem.project)(&mut x);
            x
        })
        .collect()
}

fn search(
    f: &MixedPolynomial,
    cfg: &SearchConfig,
    weights: Option<Vec<f64>>,
    face: Option<Face>,
) -> Result<FaceVerdict> {
    cfg.validate()?;
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = f.n();
    let problem = TorusProblem {
        f,
        vars: Subset::full(n),
        project: radial_projection(n, cfg.radial_bounds, weights),
    };
    let from_lattice = cfg.multistarts / 2;
    let mut starts = lattice_starts(&problem, cfg, from_lattice);
    let task = poly_fingerprint(f);
    let remaining = cfg.multistarts - starts.len();
    starts.extend(random_starts(&problem, cfg, task, remaining));
    let outcome = run_starts(&problem, &starts, cfg);
    let status = match outcome.witness {
        Some((x, _)) => FaceStatus::CriticalPointFound {
            witness: CriticalityWitness::at(f, point_of(&x), Subset::full(n)),
        },
        None => FaceStatus::NoCriticalPointFound,
    };
    Ok(FaceVerdict {
        face,
        low_margin: matches!(status, FaceStatus::NoCriticalPointFound)
            && outcome.min_residual < cfg.tol_floor,
        status,
        min_residual_seen: outcome.min_residual,
        starts: outcome.starts,
    })
}

/// Multistart search for mixed critical points of `f` on the torus box
/// `r_min ≤ |z_i| ≤ r_max`.
pub fn search_torus_critical_points(f: &MixedPolynomial, cfg: &SearchConfig) -> Result<FaceVerdict> {
    search(f, cfg, None, None)
}

/// Search for the face function of a compact face. With a positive weight
/// certificate the search is restricted to the slice `max_i ln|z_i|/w_i = 0`
/// of the weighted `ℝ₊`-action.
pub fn search_face(f_delta: &MixedPolynomial, face: &Face, cfg: &SearchConfig) -> Result<FaceVerdict> {
    let weights = (face.weight.iter().all(|&w| w > 0)
        && f_delta.radial_homogeneous_degree(&face.weight).is_some())
    .then(|| face.weight.iter().map(|&w| w as f64).collect());
    search(f_delta, cfg, weights, Some(face.clone()))
}

/// Re-runs the local refinement from `z0`. With `weights`, the weighted
/// normalization is applied first.
pub fn refine_from(
    f: &MixedPolynomial,
    z0: &[Complex],
    cfg: &SearchConfig,
    weights: Option<&[u64]>,
) -> Result<CriticalityWitness> {
    cfg.validate()?;
    if z0.len() != f.n() || z0.iter().any(|c| c.norm() == 0.0) {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: z0.len(),
        });
    }
    let n = f.n();
    let problem = TorusProblem {
        f,
        vars: Subset::full(n),
        project: match weights {
            Some(w) => {
                let w: Vec<f64> = w.iter().map(|&x| x as f64).collect();
                let floor = (cfg.radial_bounds.0 / cfg.radial_bounds.1).ln();
                Box::new(move |x: &mut [f64]| normalize_weighted(x, &w, floor))
            }
            None => Box::new(|_: &mut [f64]| {}),
        },
    };
    let (x, _) = problem.refine(params_of(z0), cfg);
    Ok(CriticalityWitness::at(f, point_of(&x), Subset::full(n)))
}

/// Checks every compact face of `Γ(f)`: the monomial rule for single-term
/// face functions, the torus search otherwise.
pub fn check_strong_nondegeneracy(f: &MixedPolynomial, cfg: &SearchConfig) -> Result<NondegeneracyReport> {
    cfg.validate()?;
    let boundary = newton::enumerate_nc_boundary(f)?;
    let mut faces = Vec::with_capacity(boundary.compact_faces.len());
    for face in boundary.compact_faces {
        let f_delta = newton::face_function(f, &face)?;
        let verdict = if cfg.monomial_fast_path && f_delta.len() == 1 {
            FaceVerdict {
                status: monomial_rule(&f_delta)?,
                face: Some(face),
                min_residual_seen: f64::NAN,
                low_margin: false,
                starts: 0,
            }
        } else {
            search_face(&f_delta, &face, cfg)?
        };
        faces.push(verdict);
    }
    let passes = faces.iter().all(|v| v.status.passes());
    Ok(NondegeneracyReport { faces, passes })
}
