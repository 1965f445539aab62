//! Local tameness of essential non-compact faces: probes for critical points
//! of the slices `z_I = u` with `‖u‖ ≤ r`, radius sweeps with bisection, and
//! the radii `r_I(f)` and `r_nc(f)`.

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::degeneracy::{
    normalize_weighted, point_of, poly_fingerprint, run_starts, CriticalityWitness, SearchConfig,
    TorusProblem,
};
use crate::newton::{self, Face};
use crate::seed;
use crate::{Complex, Error, MixedPolynomial, Result, Subset};

/// Inner shell is placed just inside the probed radius.
const SHELL_EPS: f64 = 1e-3;

/// Slice values are kept at least this fraction of the radius away from 0.
const MIN_SLICE_FRACTION: f64 = 1e-3;

/// Screening lattice per slice, over the free variables only.
const SLICE_LATTICE_PER_DIM: usize = 8;
const SLICE_LATTICE_CAP: usize = 4096;

/// Serializes `+∞` as the string `"inf"`.
pub fn serialize_radius<S: Serializer>(r: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if r.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TamenessConfig {
    pub radius_grid: Vec<f64>,
    pub sphere_samples: usize,
    pub inner: SearchConfig,
    pub bisection_iters: usize,
    /// Local searches per sampled slice value.
    pub slice_starts: usize,
}

impl Default for TamenessConfig {
    fn default() -> Self {
        TamenessConfig {
            radius_grid: vec![0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 10.0],
            sphere_samples: 16,
            inner: SearchConfig::default(),
            bisection_iters: 20,
            slice_starts: 4,
        }
    }
}

impl TamenessConfig {
    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        if self.radius_grid.is_empty()
            || self.radius_grid[0] <= 0.0
            || self.radius_grid.windows(2).any(|w| w[1] <= w[0])
            || self.radius_grid.iter().any(|r| !r.is_finite())
        {
            return Err(Error::InvalidConfig(
                "radius grid must be positive, finite and strictly increasing".into(),
            ));
        }
        if self.sphere_samples < 8 {
            return Err(Error::InvalidConfig("sphere_samples must be at least 8".into()));
        }
        if self.slice_starts == 0 {
            return Err(Error::InvalidConfig("slice_starts must be positive".into()));
        }
        Ok(())
    }
}

/// A slice value `u` with a critical point of the slice function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceWitness {
    /// Probed radius.
    pub radius: f64,
    /// Values on `I_Δ`, in increasing index order.
    pub u: Vec<Complex>,
    pub witness: CriticalityWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TamenessStatus {
    TameUpTo {
        #[serde(serialize_with = "serialize_radius")]
        radius: f64,
    },
    FailureAt { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceTamenessReport {
    pub face: Face,
    /// Largest probed radius without a witness (0 if even the smallest
    /// bracket failed).
    pub r_lower: f64,
    pub first_failure: Option<SliceWitness>,
    #[serde(flatten)]
    pub status: TamenessStatus,
    pub probes: usize,
}

impl FaceTamenessReport {
    /// The radius estimate for this face: `r_lower` after a failure, `+∞`
    /// when the whole grid is clean.
    pub fn estimate(&self) -> f64 {
        match self.status {
            TamenessStatus::TameUpTo { .. } => f64::INFINITY,
            TamenessStatus::FailureAt { .. } => self.r_lower,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusEntry {
    pub subset: Subset,
    #[serde(serialize_with = "serialize_radius")]
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TamenessSummary {
    pub faces: Vec<FaceTamenessReport>,
    /// `r_I` for each `I` carrying at least one essential face.
    pub per_i: Vec<RadiusEntry>,
    #[serde(serialize_with = "serialize_radius")]
    pub r_nc: f64,
}

/// Substitutes `z_i = u_i` for `i ∈ direction`; `u` lists the values in
/// increasing index order. The result keeps the ambient dimension.
pub fn restrict_face_slice(
    f_delta: &MixedPolynomial,
    direction: Subset,
    u: &[Complex],
) -> Result<MixedPolynomial> {
    if u.len() != direction.len() {
        return Err(Error::DimensionMismatch {
            expected: direction.len(),
            got: u.len(),
        });
    }
    let mut full = vec![Complex::new(0.0, 0.0); f_delta.n()];
    for (k, i) in direction.iter().enumerate() {
        if u[k].norm() == 0.0 {
            return Err(Error::ZeroSliceValue(i + 1));
        }
        if !(u[k].re.is_finite() && u[k].im.is_finite()) {
            return Err(Error::NonFinite("slice value"));
        }
        full[i] = u[k];
    }
    Ok(f_delta.substitute(direction, &full))
}

/// Unit directions in `ℂ^m` with no coordinate near zero, fixed per face so
/// that every radius reuses them.
fn sphere_directions(m: usize, count: usize, cfg: &TamenessConfig, task: u64) -> Vec<Vec<Complex>> {
    (0..count)
        .map(|k| {
            if m == 1 {
                let theta = std::f64::consts::TAU * seed::radical_inverse(k as u64 + 1, 2);
                return vec![Complex::from_polar(1.0, theta)];
            }
            let mut rng = seed::task_rng(cfg.inner.seed, task ^ 0x5ee1_d1c5, k as u64);
            loop {
                let v: Vec<Complex> = (0..m)
                    .map(|_| {
                        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        Complex::new(a, b)
                    })
                    .collect();
                let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 && norm <= 1.0 && v.iter().all(|c| c.norm() > 0.05 * norm) {
                    return v.into_iter().map(|c| c / norm).collect();
                }
            }
        })
        .collect()
}

struct Setup<'a> {
    f: &'a MixedPolynomial,
    direction: Subset,
    free: Subset,
    weights: Vec<f64>,
    task: u64,
}

fn setup<'a>(f_delta: &'a MixedPolynomial, face: &Face) -> Result<Setup<'a>> {
    if face.direction.is_empty() {
        return Err(Error::CompactFace);
    }
    if face.weight.len() != f_delta.n() {
        return Err(Error::DimensionMismatch {
            expected: f_delta.n(),
            got: face.weight.len(),
        });
    }
    let n = f_delta.n();
    Ok(Setup {
        f: f_delta,
        direction: face.direction,
        free: face.direction.complement(n),
        weights: face.weight.iter().map(|&w| w as f64).collect(),
        task: poly_fingerprint(f_delta) ^ face.direction.bits(),
    })
}

/// Projection onto `{‖u‖ ≤ r, |u_i| ≥ r·MIN_SLICE_FRACTION}` × the weighted
/// slice in the free variables.
fn slice_projection(s: &Setup<'_>, r: f64, floor: f64) -> Box<dyn Fn(&mut [f64]) + Sync> {
    let dir: Vec<usize> = s.direction.iter().collect();
    let w = s.weights.clone();
    let lo = (r * MIN_SLICE_FRACTION).ln();
    let hi = r.ln();
    Box::new(move |x: &mut [f64]| {
        normalize_weighted(x, &w, floor);
        for &i in &dir {
            x[2 * i] = x[2 * i].min(hi);
        }
        let norm2: f64 = dir.iter().map(|&i| (2.0 * x[2 * i]).exp()).sum();
        if norm2 > r * r {
            let shift = 0.5 * (norm2 / (r * r)).ln();
            for &i in &dir {
                x[2 * i] -= shift;
            }
        }
        for &i in &dir {
            x[2 * i] = x[2 * i].max(lo);
        }
    })
}

fn probe(s: &Setup<'_>, r: f64, cfg: &TamenessConfig) -> Option<SliceWitness> {
    let n = s.f.n();
    let inner = &cfg.inner;
    let floor = (inner.radial_bounds.0 / inner.radial_bounds.1).ln();
    let problem = TorusProblem {
        f: s.f,
        vars: s.free,
        project: slice_projection(s, r, floor),
    };
    let m = s.direction.len();
    let dirs = sphere_directions(m, cfg.sphere_samples, cfg, s.task);
    let free: Vec<usize> = s.free.iter().collect();
    let dims = 2 * free.len() as u32;
    let mut g = SLICE_LATTICE_PER_DIM;
    while g > 2 && (g as u64).pow(dims) > SLICE_LATTICE_CAP as u64 {
        g -= 1;
    }
    let lattice_total = (g as u64).pow(dims) as usize;
    let (lo, hi) = (inner.radial_bounds.0.ln(), inner.radial_bounds.1.ln());
    let from_lattice = cfg.slice_starts.div_ceil(2);

    let mut starts = Vec::new();
    for (shell_idx, shell) in [r * (1.0 - SHELL_EPS), 2.0 * r / 3.0, r / 3.0].into_iter().enumerate() {
        for (k, d) in dirs.iter().enumerate() {
            let mut base = vec![0.0; 2 * n];
            for (j, i) in s.direction.iter().enumerate() {
                let u = d[j] * shell;
                base[2 * i] = u.norm().ln();
                base[2 * i + 1] = u.arg();
            }
            let with_free = |coords: &[f64]| {
                let mut x = base.clone();
                for (j, &i) in free.iter().enumerate() {
                    x[2 * i] = coords[2 * j];
                    x[2 * i + 1] = coords[2 * j + 1];
                }
                (problem.project)(&mut x);
                x
            };
            let mut scored: Vec<(f64, Vec<f64>)> = (0..lattice_total)
                .map(|idx| {
                    let mut rest = idx;
                    let coords: Vec<f64> = (0..2 * free.len())
                        .map(|c| {
                            let j = rest % g;
                            rest /= g;
                            let frac = (j as f64 + 0.5) / g as f64;
                            if c % 2 == 0 {
                                lo + (hi - lo) * frac
                            } else {
                                std::f64::consts::TAU * frac
                            }
                        })
                        .collect();
                    let x = with_free(&coords);
                    (problem.ratio(&x), x)
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0));
            starts.extend(scored.into_iter().take(from_lattice).map(|(_, x)| x));
            let mut rng = seed::task_rng(inner.seed, s.task, (shell_idx * dirs.len() + k) as u64);
            for _ in from_lattice..cfg.slice_starts {
                let coords: Vec<f64> = (0..2 * free.len())
                    .map(|c| {
                        if c % 2 == 0 {
                            rng.gen_range(lo..=hi)
                        } else {
                            rng.gen_range(0.0..std::f64::consts::TAU)
                        }
                    })
                    .collect();
                starts.push(with_free(&coords));
            }
        }
    }
    let outcome = run_starts(&problem, &starts, inner);
    outcome.witness.map(|(x, _)| {
        let z = point_of(&x);
        let u = s.direction.iter().map(|i| z[i]).collect();
        SliceWitness {
            radius: r,
            u,
            witness: CriticalityWitness::at(s.f, z, s.free),
        }
    })
}

/// Looks for `u` with `‖u‖ ≤ r` such that the slice `z_I = u` of `f_Δ` has
/// a critical point in the free variables.
pub fn probe_radius(
    f_delta: &MixedPolynomial,
    face: &Face,
    r: f64,
    cfg: &TamenessConfig,
) -> Result<Option<SliceWitness>> {
    cfg.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {}", r)));
    }
    let s = setup(f_delta, face)?;
    Ok(probe(&s, r, cfg))
}

/// Sweeps the radius grid and bisects the first failing bracket.
pub fn estimate_radius(
    f_delta: &MixedPolynomial,
    face: &Face,
    cfg: &TamenessConfig,
) -> Result<FaceTamenessReport> {
    cfg.validate()?;
    let s = setup(f_delta, face)?;
    let mut lo = 0.0;
    let mut failure = None;
    let mut probes = 0;
    for &r in &cfg.radius_grid {
        probes += 1;
        if let Some(w) = probe(&s, r, cfg) {
            failure = Some(w);
            break;
        }
        lo = r;
    }
    let Some(mut first) = failure else {
        return Ok(FaceTamenessReport {
            face: face.clone(),
            r_lower: lo,
            first_failure: None,
            status: TamenessStatus::TameUpTo { radius: lo },
            probes,
        });
    };
    let mut hi = first.radius;
    for _ in 0..cfg.bisection_iters {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        match probe(&s, mid, cfg) {
            Some(w) => {
                hi = mid;
                first = w;
            }
            None => lo = mid,
        }
    }
    Ok(FaceTamenessReport {
        face: face.clone(),
        r_lower: lo,
        first_failure: Some(first),
        status: TamenessStatus::FailureAt { radius: hi },
        probes,
    })
}

/// `r_I(f)` per represented `I` and `r_nc(f)`, probing every essential face.
pub fn tameness_summary(f: &MixedPolynomial, cfg: &TamenessConfig) -> Result<TamenessSummary> {
    cfg.validate()?;
    let boundary = newton::enumerate_nc_boundary(f)?;
    let mut faces = Vec::new();
    for face in &boundary.essential_noncompact {
        let f_delta = newton::face_function(f, face)?;
        faces.push(estimate_radius(&f_delta, face, cfg)?);
    }
    let mut per_i: Vec<RadiusEntry> = Vec::new();
    for rep in &faces {
        let r = rep.estimate();
        match per_i.iter_mut().find(|e| e.subset == rep.face.direction) {
            Some(e) => e.radius = e.radius.min(r),
            None => per_i.push(RadiusEntry {
                subset: rep.face.direction,
                radius: r,
            }),
        }
    }
    per_i.sort_by_key(|e| (e.subset.len(), e.subset.bits()));
    let r_nc = per_i.iter().map(|e| e.radius).fold(f64::INFINITY, f64::min);
    Ok(TamenessSummary { faces, per_i, r_nc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(text: &str, n: usize) -> MixedPolynomial {
        MixedPolynomial::parse(text, n).unwrap()
    }

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn slice_substitution() {
        let f = poly("~z1^2*z2^3 + 2*z1^2*z2^4", 2);
        let s = restrict_face_slice(&f, Subset::from_one_based([2]), &[c(0.3)]).unwrap();
        let terms: Vec<_> = s.terms().map(|(k, v)| (k.nu.clone(), k.mu.clone(), *v)).collect();
        assert_eq!(terms.len(), 2);
        assert_eq!((terms[0].0.clone(), terms[0].1.clone()), (vec![0, 0], vec![2, 0]));
        assert!((terms[0].2 - c(0.027)).norm() < 1e-15);
        assert_eq!((terms[1].0.clone(), terms[1].1.clone()), (vec![2, 0], vec![0, 0]));
        assert!((terms[1].2 - c(2.0 * 0.0081)).norm() < 1e-15);

        let g = poly("z1^3*~z2^2", 2);
        let s = restrict_face_slice(&g, Subset::from_one_based([1]), &[c(1.0)]).unwrap();
        assert_eq!(s, poly("~z2^2", 2));

        let m = poly("(2-1i)*z1*~z2^3", 2);
        let s = restrict_face_slice(&m, Subset::from_one_based([1]), &[c(1.0)]).unwrap();
        assert_eq!(s.terms().next().unwrap().1, &Complex::new(2.0, -1.0));
    }

    #[test]
    fn zero_slice_value_is_rejected() {
        let f = poly("z1*z2", 2);
        assert_eq!(
            restrict_face_slice(&f, Subset::from_one_based([2]), &[c(0.0)]),
            Err(Error::ZeroSliceValue(2))
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = TamenessConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.radius_grid = vec![1.0, 0.5];
        assert!(cfg.validate().is_err());
        cfg = TamenessConfig {
            sphere_samples: 4,
            ..TamenessConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn radius_serializes_infinity_as_string() {
        let e = RadiusEntry {
            subset: Subset::from_one_based([1]),
            radius: f64::INFINITY,
        };
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"subset":[1],"radius":"inf"}"#
        );
    }
}
