use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::family::FamilyPolynomial;
use crate::mixedpoly::radial_degree;
use crate::tameness::serialize_radius;
use crate::optim::{levenberg_marquardt, LmOptions};
use crate::{linalg, newton, seed};
use crate::{Complex, Error, MixedPolynomial, Result, Subset};

const TASK: u64 = 0x5907_c4ec;

const ON_HYPERSURFACE_REL: f64 = 1e-8;

const SINGULAR_FLOOR: f64 = 1e-12;

/// `‖z − P z‖ / ‖z‖` with `P` the projection onto `span_ℝ{∂̄g, ∂̄h}` over
/// the coordinates in `vars`. Zero when `V(f)` is tangent to the sphere
/// through `z`.
pub fn sphere_transversality_residual(f: &MixedPolynomial, z: &[Complex]) -> Result<f64> {
    let value = f.evaluate(z)?.norm();
    if value > ON_HYPERSURFACE_REL * f.abs_sum(z).max(f64::MIN_POSITIVE) {
        return Err(Error::PointNotOnHypersurface(value));
    }
    let ratio = f.combined_criticality(z, Subset::full(f.n()));
    if ratio < SINGULAR_FLOOR {
        return Err(Error::SingularPoint(ratio));
    }
    transversality(f, z, Subset::full(f.n()))
}

fn transversality(f: &MixedPolynomial, z: &[Complex], vars: Subset) -> Result<f64> {
    let w = f.wirtinger_gradient(z)?;
    let (g, h) = (w.dbar_real(), w.dbar_imag());
    let pick = |v: &[Complex]| -> Vec<Complex> { vars.iter().map(|i| v[i]).collect() };
    let x = linalg::to_real(&pick(z));
    let nx = linalg::norm(&x);
    if nx == 0.0 {
        return Err(Error::InvalidConfig("sphere transversality at the origin".into()));
    }
    let basis = linalg::orthonormal_basis(
        &[linalg::to_real(&pick(&g)), linalg::to_real(&pick(&h))],
        1e-14,
    );
    Ok(linalg::norm(&linalg::orthogonal_part(&x, &basis)) / nx)
}

/// Relative defect of the Euler identity
/// `d·f = Σ w_i (z_i ∂_i f + z̄_i ∂̄_i f)` for a radially weighted
/// homogeneous `f` of degree `d`.
pub fn euler_residual(f: &MixedPolynomial, w: &[u64], z: &[Complex]) -> Result<f64> {
    let mut degrees = f.terms().map(|(k, _)| radial_degree(k, w));
    let d = degrees.next().ok_or(Error::NotHomogeneous("zero polynomial"))?;
    if degrees.any(|e| e != d) {
        return Err(Error::NotHomogeneous("terms have different radial degrees"));
    }
    let value = f.evaluate(z)?;
    let grad = f.wirtinger_gradient(z)?;
    let euler: Complex = (0..z.len())
        .map(|i| (z[i] * grad.dz[i] + z[i].conj() * grad.dzbar[i]) * w[i] as f64)
        .sum();
    let scale = f.abs_sum(z).max(f64::MIN_POSITIVE);
    Ok((value * d as f64 - euler).norm() / (d.max(1) as f64 * scale))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpotMode {
    /// Points of `V(f_t)`.
    Smoothness,
    /// Points of `f_t = η`.
    NearbyFibres,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotcheckConfig {
    pub mode: SpotMode,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub t_values: Vec<Complex>,
    /// `|η|` for nearby fibres.
    pub eta: f64,
    /// Combined criticality `min(σ₂/σ₁, ‖J‖/M)` below this is a critical point.
    pub critical_threshold: f64,
    /// Sphere transversality residual below this is a tangency.
    pub transversality_threshold: f64,
    pub max_counterexamples: usize,
}

impl SpotcheckConfig {
    pub fn new(mode: SpotMode) -> Self {
        SpotcheckConfig {
            mode,
            radius: 1.0,
            samples: 200,
            seed: 0,
            t_values: vec![Complex::new(0.0, 0.0)],
            eta: 1e-3,
            critical_threshold: 1e-4,
            transversality_threshold: 1e-5,
            max_counterexamples: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("radius must be positive, got {}", self.radius)));
        }
        if self.t_values.is_empty() {
            return Err(Error::InvalidConfig("no t values to sample".into()));
        }
        if self.mode == SpotMode::NearbyFibres && !(self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!("eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotPoint {
    pub t: Complex,
    pub subset: Subset,
    pub z: Vec<Complex>,
    pub criticality: f64,
    pub transversality: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotcheckReport {
    pub mode: SpotMode,
    pub radius: f64,
    pub requested: usize,
    pub accepted: usize,
    #[serde(serialize_with = "serialize_radius")]
    pub min_criticality: f64,
    #[serde(serialize_with = "serialize_radius")]
    pub min_transversality: f64,
    pub counterexample_count: usize,
    pub counterexamples: Vec<SpotPoint>,
    pub passes: bool,
}

impl SpotcheckReport {
    pub fn failure_summary(&self) -> String {
        match self.counterexamples.first() {
            None if self.accepted == 0 => "no sample points found".into(),
            None => "none".into(),
            Some(p) => format!(
                "{} of {} points fail; first at t = {} on C*{} with criticality {:.3e}, transversality {:.3e}",
                self.counterexample_count,
                self.accepted,
                p.t,
                p.subset,
                p.criticality,
                p.transversality
            ),
        }
    }
}

fn random_unit(rng: &mut impl Rng, vars: Subset, n: usize) -> Vec<Complex> {
    loop {
        let mut v = vec![Complex::new(0.0, 0.0); n];
        for i in vars.iter() {
            v[i] = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let r = linalg::norm(&linalg::to_real(&v));
        if r > 1e-3 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

fn sample_point(
    f: &MixedPolynomial,
    t: Complex,
    vars: Subset,
    k: usize,
    cfg: &SpotcheckConfig,
) -> Result<Option<SpotPoint>> {
    let n = f.n();
    let mut rng = seed::task_rng(cfg.seed, TASK, k as u64);
    let u: f64 = rng.gen_range(0.05..1.0);
    let a: Vec<Complex> = random_unit(&mut rng, vars, n)
        .into_iter()
        .map(|c| c * (cfg.radius * u))
        .collect();
    let b = random_unit(&mut rng, vars, n);
    let eta = match cfg.mode {
        SpotMode::Smoothness => Complex::new(0.0, 0.0),
        SpotMode::NearbyFibres => {
            let fa = f.evaluate(&a)?;
            Complex::from_polar(cfg.eta, if fa.norm() > 0.0 { fa.arg() } else { 0.0 })
        }
    };
    let line = |x: &[f64]| -> Vec<Complex> {
        let lambda = Complex::new(x[0], x[1]);
        a.iter().zip(&b).map(|(ai, bi)| ai + lambda * bi).collect()
    };
    let residual = |x: &[f64], out: &mut Vec<f64>| {
        let v = f.evaluate(&line(x)).map_or(Complex::new(f64::NAN, 0.0), |v| v - eta);
        out.clear();
        out.push(v.re);
        out.push(v.im);
    };
    let scale: f64 = f.abs_sum(&a)
        .max(eta.norm())
        .max(f64::MIN_POSITIVE);
    let opts = LmOptions {
        max_iters: 200,
        target_cost: (1e-14 * scale).powi(2),
        fd_step: 1e-7 * cfg.radius,
    };
    let x = levenberg_marquardt(vec![0.0, 0.0], &residual, &|_| {}, &opts);
    let z = line(&x);
    let defect = (f.evaluate(&z)? - eta).norm();
    let zn = linalg::norm(&linalg::to_real(&z));
    let local_scale = f.abs_sum(&z) + eta.norm();
    if !(defect <= 1e-10 * local_scale.max(f64::MIN_POSITIVE))
        || !(zn < cfg.radius)
        || vars.iter().any(|i| z[i].norm() == 0.0)
    {
        return Ok(None);
    }
    let criticality = f.combined_criticality(&z, vars);
    let transversality = transversality(f, &z, vars)?;
    Ok(Some(SpotPoint {
        t,
        subset: vars,
        z,
        criticality,
        transversality,
    }))
}

/// Samples points of `V(f_t)` (or of `f_t = η`) in `B_R ∩ (ℂ*)^I` for
/// `I ∈ 𝓘_nv(f_0)` and tests them for criticality and tangency to spheres.
pub fn spotcheck_regularity(family: &FamilyPolynomial, cfg: &SpotcheckConfig) -> Result<SpotcheckReport> {
    cfg.validate()?;
    let f0 = family.specialize(Complex::new(0.0, 0.0));
    let subsets: Vec<Subset> = newton::classify_subspaces(&f0)?
        .nonvanishing
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    if subsets.is_empty() {
        return Err(Error::InvalidConfig("f_0 vanishes on every coordinate subspace".into()));
    }
    let members: Vec<MixedPolynomial> = cfg.t_values.iter().map(|&t| family.specialize(t)).collect();
    let (nt, ns) = (cfg.t_values.len(), subsets.len());
    let points: Vec<SpotPoint> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let vars = subsets[k % ns];
            let ti = (k / ns) % nt;
            sample_point(&members[ti], cfg.t_values[ti], vars, k, cfg)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let bad = |p: &SpotPoint| {
        p.criticality < cfg.critical_threshold || p.transversality < cfg.transversality_threshold
    };
    let failing: Vec<&SpotPoint> = points.iter().filter(|p| bad(p)).collect();
    Ok(SpotcheckReport {
        mode: cfg.mode,
        radius: cfg.radius,
        requested: cfg.samples,
        accepted: points.len(),
        min_criticality: points.iter().map(|p| p.criticality).fold(f64::INFINITY, f64::min),
        min_transversality: points.iter().map(|p| p.transversality).fold(f64::INFINITY, f64::min),
        counterexample_count: failing.len(),
        counterexamples: failing.iter().take(cfg.max_counterexamples).map(|p| (*p).clone()).collect(),
        passes: failing.is_empty(),
    })
}
