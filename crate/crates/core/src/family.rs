//! One-parameter families `f(t, z, z̄)`: specialization, constancy of the
//! non-compact Newton boundary, the numerical admissibility pipeline, strata
//! and branched-covering pullbacks.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::degeneracy::{self, SearchConfig};
use crate::mixedpoly::parse_family_terms;
use crate::newton::{self, Point};
use crate::probe::{self, SpotMode, SpotcheckConfig, SpotcheckReport};
use crate::tameness::{self, serialize_radius, RadiusEntry, TamenessConfig};
use crate::{Complex, Error, MixedPolynomial, MonomialKey, Result, Subset};

/// A family `Σ c_{ν,μ}(t) z^ν z̄^μ` with polynomial coefficients in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyPolynomial {
    n: usize,
    /// Coefficients of `t^0, t^1, ..`; trailing zeros are trimmed.
    terms: BTreeMap<MonomialKey, Vec<Complex>>,
}

impl FamilyPolynomial {
    /// Parses the mixed-polynomial grammar extended by `t`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let parsed = parse_family_terms(text, n)?;
        let mut terms: BTreeMap<MonomialKey, Vec<Complex>> = BTreeMap::new();
        for ((key, k), c) in parsed.terms {
            let coeffs = terms.entry(key).or_default();
            if coeffs.len() <= k as usize {
                coeffs.resize(k as usize + 1, Complex::new(0.0, 0.0));
            }
            coeffs[k as usize] += c;
        }
        Ok(Self::normalized(n, terms))
    }

    /// The constant family `f_t = f`.
    pub fn constant(f: &MixedPolynomial) -> Self {
        let terms = f.terms().map(|(k, c)| (k.clone(), vec![*c])).collect();
        Self::normalized(f.n(), terms)
    }

    fn normalized(n: usize, mut terms: BTreeMap<MonomialKey, Vec<Complex>>) -> Self {
        let zero = Complex::new(0.0, 0.0);
        for coeffs in terms.values_mut() {
            while coeffs.last() == Some(&zero) {
                coeffs.pop();
            }
        }
        terms.retain(|_, c| !c.is_empty());
        FamilyPolynomial { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialKey, &[Complex])> {
        self.terms.iter().map(|(k, c)| (k, c.as_slice()))
    }

    pub fn t_degree(&self) -> usize {
        self.terms.values().map(|c| c.len() - 1).max().unwrap_or(0)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|k| k.mu.iter().all(|&e| e == 0))
    }

    /// `f_t`: every coefficient evaluated at `t`, zero terms dropped.
    pub fn specialize(&self, t: Complex) -> MixedPolynomial {
        let terms = self.terms.iter().map(|(k, coeffs)| {
            let c = coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &a| acc * t + a);
            (c, k.nu.clone(), k.mu.clone())
        });
        MixedPolynomial::from_terms(self.n, terms).expect("family terms are well formed")
    }

    /// `f(t, z)` at a point, with `t` in front.
    pub fn evaluate(&self, t: Complex, z: &[Complex]) -> Result<Complex> {
        self.specialize(t).evaluate(z)
    }
}

impl fmt::Display for FamilyPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (key, coeffs) in &self.terms {
            for (k, c) in coeffs.iter().enumerate() {
                if *c == Complex::new(0.0, 0.0) {
                    continue;
                }
                let mut m = MixedPolynomial::zero(self.n);
                m.add_term(key.clone(), *c);
                let text = m.to_string();
                let text = match k {
                    0 => text,
                    1 => append_t(&text, "t"),
                    _ => append_t(&text, &format!("t^{}", k)),
                };
                match (first, text.strip_prefix('-')) {
                    (true, _) => f.write_str(&text)?,
                    (false, Some(rest)) => write!(f, " - {}", rest)?,
                    (false, None) => write!(f, " + {}", text)?,
                }
                first = false;
            }
        }
        Ok(())
    }
}

fn append_t(term: &str, t: &str) -> String {
    match term {
        "1" => t.to_string(),
        "-1" => format!("-{}", t),
        _ => format!("{}*{}", term, t),
    }
}

/// Sampled parameter values: rings `|t| = t_max·2^{-k}`, `k < rings`, with
/// `angles_per_ring` equally spaced phases each, plus optionally `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TSamplingPolicy {
    pub t_max: f64,
    pub rings: usize,
    pub angles_per_ring: usize,
    pub include_zero: bool,
}

impl TSamplingPolicy {
    pub fn with_t_max(t_max: f64) -> Self {
        TSamplingPolicy {
            t_max,
            rings: 4,
            angles_per_ring: 8,
            include_zero: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.rings > 0 && self.angles_per_ring == 0 {
            return Err(Error::InvalidConfig("angles_per_ring must be positive".into()));
        }
        Ok(())
    }

    /// Sample points ordered by `(|t|, arg t)` with `arg t ∈ [0, 2π)`.
    pub fn samples(&self) -> Vec<Complex> {
        let mut out = Vec::new();
        if self.include_zero {
            out.push(Complex::new(0.0, 0.0));
        }
        for k in (0..self.rings).rev() {
            let r = self.t_max / (1u64 << k) as f64;
            for j in 0..self.angles_per_ring {
                let theta = std::f64::consts::TAU * j as f64 / self.angles_per_ring as f64;
                out.push(if j == 0 {
                    Complex::new(r, 0.0)
                } else {
                    Complex::from_polar(r, theta)
                });
            }
        }
        out
    }
}

impl Default for TSamplingPolicy {
    fn default() -> Self {
        Self::with_t_max(0.9)
    }
}

/// The data compared between members of a family.
#[derive(Clone, Debug, PartialEq)]
struct BoundarySignature {
    vertices: Vec<Point>,
    compact: Vec<Vec<Point>>,
    essential: Vec<(Vec<Point>, Subset)>,
}

fn signature(f: &MixedPolynomial) -> Result<Option<BoundarySignature>> {
    if f.is_zero() {
        return Ok(None);
    }
    let poly = newton::build_polyhedron(f)?;
    let boundary = newton::enumerate_nc_boundary(f)?;
    Ok(Some(BoundarySignature {
        vertices: poly.vertices,
        compact: boundary.compact_faces.into_iter().map(|f| f.vertices).collect(),
        essential: boundary
            .essential_noncompact
            .into_iter()
            .map(|f| (f.vertices, f.direction))
            .collect(),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstancyReport {
    pub constant: bool,
    /// First sampled `t` whose boundary differs from `f_0`.
    pub offending_t: Option<Complex>,
    pub sampled: usize,
    pub diagnostics: Vec<String>,
}

/// Compares `Γ₊`, the compact faces and the essential faces of every sampled
/// `f_t` with those of `f_0`.
pub fn check_newton_constancy(
    family: &FamilyPolynomial,
    policy: &TSamplingPolicy,
) -> Result<ConstancyReport> {
    policy.validate()?;
    let reference = signature(&family.specialize(Complex::new(0.0, 0.0)))?;
    let ts = policy.samples();
    let mut report = ConstancyReport {
        constant: true,
        offending_t: None,
        sampled: ts.len(),
        diagnostics: Vec::new(),
    };
    for t in ts {
        let sig = signature(&family.specialize(t))?;
        if sig == reference {
            continue;
        }
        let what = match (&reference, &sig) {
            (Some(a), Some(b)) if a.vertices != b.vertices => format!(
                "vertices {:?} differ from {:?} at t = {}",
                b.vertices, a.vertices, t
            ),
            (Some(a), Some(b)) if a.compact != b.compact => {
                format!("compact faces differ at t = {}", t)
            }
            (Some(_), Some(_)) => format!("essential faces differ at t = {}", t),
            (None, _) => format!("f_0 vanishes identically but f_t does not at t = {}", t),
            (_, None) => format!("f_t vanishes identically at t = {}", t),
        };
        report.diagnostics.push(what);
        if report.constant {
            report.constant = false;
            report.offending_t = Some(t);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityConfig {
    pub nondegeneracy: SearchConfig,
    pub tameness: TamenessConfig,
    /// Points for the smoothness spot-check in `B_ρ`; 0 skips it.
    pub smoothness_samples: usize,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        AdmissibilityConfig {
            nondegeneracy: SearchConfig::default(),
            tameness: TamenessConfig::default(),
            smoothness_samples: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberReport {
    pub t: Complex,
    pub convenient: bool,
    pub nondegenerate: bool,
    /// Label of the worst face verdict.
    pub worst_face: &'static str,
    pub per_i: Vec<RadiusEntry>,
    #[serde(serialize_with = "serialize_radius")]
    pub r_nc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdmissibilityVerdict {
    NumericallyAdmissible,
    Failed { reason: String },
}

impl AdmissibilityVerdict {
    pub fn passes(&self) -> bool {
        matches!(self, AdmissibilityVerdict::NumericallyAdmissible)
    }
}

/// Sampled surrogate for admissibility. The radius `R` of the smoothness
/// statement is not computed; `smoothness` reports a spot-check in `B_ρ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub rho: f64,
    pub policy: TSamplingPolicy,
    pub newton: ConstancyReport,
    pub convenient_fast_path: bool,
    pub per_t: Vec<MemberReport>,
    #[serde(serialize_with = "serialize_radius")]
    pub min_r_nc: f64,
    pub uniform_tame: bool,
    pub smoothness: Option<SpotcheckReport>,
    #[serde(flatten)]
    pub verdict: AdmissibilityVerdict,
    pub failures: Vec<String>,
}

fn analyse_member(
    f: &MixedPolynomial,
    t: Complex,
    skip_tameness: bool,
    cfg: &AdmissibilityConfig,
) -> Result<MemberReport> {
    let nondeg = degeneracy::check_strong_nondegeneracy(f, &cfg.nondegeneracy)?;
    let worst_face = nondeg
        .worst()
        .map(|v| v.status.label())
        .unwrap_or("PROVEN_NONDEGENERATE");
    let (per_i, r_nc) = if skip_tameness {
        (Vec::new(), f64::INFINITY)
    } else {
        let summary = tameness::tameness_summary(f, &cfg.tameness)?;
        (summary.per_i, summary.r_nc)
    };
    Ok(MemberReport {
        t,
        convenient: newton::is_convenient(f),
        nondegenerate: nondeg.passes,
        worst_face,
        per_i,
        r_nc,
    })
}

/// Newton constancy, strong non-degeneracy and tameness of every sampled
/// `f_t`, the uniform bound `r_nc(f_t) ≥ ρ`, and a smoothness spot-check.
pub fn check_admissibility(
    family: &FamilyPolynomial,
    rho: f64,
    policy: &TSamplingPolicy,
    cfg: &AdmissibilityConfig,
) -> Result<AdmissibilityReport> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidConfig(format!("rho must be positive, got {}", rho)));
    }
    cfg.nondegeneracy.validate()?;
    cfg.tameness.validate()?;
    let newton_report = check_newton_constancy(family, policy)?;
    let ts = policy.samples();
    let members: Vec<MixedPolynomial> = ts.iter().map(|&t| family.specialize(t)).collect();
    if let Some(k) = members.iter().position(|f| f.is_zero()) {
        return Err(Error::InvalidConfig(format!(
            "f_t vanishes identically at t = {}",
            ts[k]
        )));
    }
    let fast_path = members.iter().all(newton::is_convenient);
    let per_t = ts
        .par_iter()
        .zip(members.par_iter())
        .map(|(&t, f)| analyse_member(f, t, fast_path, cfg))
        .collect::<Result<Vec<_>>>()?;
    let min_r_nc = per_t.iter().map(|m| m.r_nc).fold(f64::INFINITY, f64::min);
    let uniform_tame = min_r_nc >= rho;

    let smoothness = if cfg.smoothness_samples > 0 {
        let spot = SpotcheckConfig {
            radius: rho,
            samples: cfg.smoothness_samples,
            seed: cfg.nondegeneracy.seed,
            t_values: ts.clone(),
            ..SpotcheckConfig::new(SpotMode::Smoothness)
        };
        Some(probe::spotcheck_regularity(family, &spot)?)
    } else {
        None
    };

    let mut failures = Vec::new();
    if !newton_report.constant {
        failures.push(format!(
            "non-compact Newton boundary changes at t = {}",
            newton_report.offending_t.unwrap()
        ));
    }
    if let Some(m) = per_t.iter().find(|m| !m.nondegenerate) {
        failures.push(format!(
            "f_t is not strongly non-degenerate at t = {} ({})",
            m.t, m.worst_face
        ));
    }
    if !uniform_tame {
        let m = per_t.iter().find(|m| m.r_nc == min_r_nc).unwrap();
        failures.push(format!(
            "r_nc(f_t) ≈ {:.6} < rho = {} at t = {}",
            min_r_nc, rho, m.t
        ));
    }
    if let Some(s) = smoothness.as_ref().filter(|s| !s.passes) {
        failures.push(format!(
            "smoothness spot-check in B_{} failed: {}",
            rho,
            s.failure_summary()
        ));
    }
    let verdict = match failures.first() {
        None => AdmissibilityVerdict::NumericallyAdmissible,
        Some(r) => AdmissibilityVerdict::Failed { reason: r.clone() },
    };
    Ok(AdmissibilityReport {
        rho,
        policy: policy.clone(),
        newton: newton_report,
        convenient_fast_path: fast_path,
        per_t,
        min_r_nc,
        uniform_tame,
        smoothness,
        verdict,
        failures,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum StratumKind {
    A,
    B,
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StratumDescriptor {
    pub kind: StratumKind,
    pub subset: Subset,
    /// `C_∅`, the parameter axis.
    pub t_axis: bool,
}

impl fmt::Display for StratumDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            StratumKind::A => "A",
            StratumKind::B => "B",
            StratumKind::C => "C",
        };
        write!(f, "{}_{}", kind, self.subset)
    }
}

/// `A_I`, `B_I` for `I ∈ 𝓘_nv(f_0)` and `C_I` for `I ∈ 𝓘_v(f_0)`.
pub fn enumerate_strata(family: &FamilyPolynomial) -> Result<Vec<StratumDescriptor>> {
    let f0 = family.specialize(Complex::new(0.0, 0.0));
    let classes = newton::classify_subspaces(&f0)?;
    let mut out = Vec::new();
    for &subset in &classes.nonvanishing {
        for kind in [StratumKind::A, StratumKind::B] {
            out.push(StratumDescriptor {
                kind,
                subset,
                t_axis: false,
            });
        }
    }
    for &subset in &classes.vanishing {
        out.push(StratumDescriptor {
            kind: StratumKind::C,
            subset,
            t_axis: subset.is_empty(),
        });
    }
    Ok(out)
}

/// The branched covering `z_i ↦ z_i^{ν_i} z̄_i^{μ_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveringSpec {
    pub nu: Vec<u32>,
    pub mu: Vec<u32>,
    pub delta: u32,
}

impl CoveringSpec {
    pub fn new(nu: Vec<u32>, mu: Vec<u32>, delta: u32) -> Result<Self> {
        let spec = CoveringSpec { nu, mu, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn identity(n: usize) -> Self {
        CoveringSpec {
            nu: vec![1; n],
            mu: vec![0; n],
            delta: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu.len() != self.mu.len() {
            return Err(Error::InvalidCovering(format!(
                "nu has {} entries but mu has {}",
                self.nu.len(),
                self.mu.len()
            )));
        }
        if self.delta == 0 {
            return Err(Error::InvalidCovering("delta must be positive".into()));
        }
        for (i, (&a, &b)) in self.nu.iter().zip(&self.mu).enumerate() {
            if a == 0 || a <= b || a as u64 + b as u64 != self.delta as u64 {
                return Err(Error::InvalidCovering(format!(
                    "need nu_i >= 1, nu_i > mu_i and nu_i + mu_i = delta; index {} has ({}, {}) with delta {}",
                    i + 1,
                    a,
                    b,
                    self.delta
                )));
            }
        }
        Ok(())
    }
}

/// Pulls a holomorphic family back along the covering `z_i ↦ z_i^{ν_i} z̄_i^{μ_i}`.
pub fn pullback_covering(family: &FamilyPolynomial, spec: &CoveringSpec) -> Result<FamilyPolynomial> {
    spec.validate()?;
    if spec.nu.len() != family.n {
        return Err(Error::DimensionMismatch {
            expected: family.n,
            got: spec.nu.len(),
        });
    }
    if !family.is_holomorphic() {
        return Err(Error::NotHolomorphic);
    }
    let mut terms = BTreeMap::new();
    for (key, coeffs) in &family.terms {
        let scale = |v: &[u32]| -> Result<Vec<u32>> {
            key.nu
                .iter()
                .zip(v)
                .map(|(&a, &e)| {
                    a.checked_mul(e)
                        .filter(|&x| x <= crate::mixedpoly::EXPONENT_CAP)
                        .ok_or(Error::ExponentOverflow {
                            pos: 0,
                            value: a as u64 * e as u64,
                            cap: crate::mixedpoly::EXPONENT_CAP,
                        })
                })
                .collect()
        };
        let mapped = MonomialKey {
            nu: scale(&spec.nu)?,
            mu: scale(&spec.mu)?,
        };
        terms.insert(mapped, coeffs.clone());
    }
    Ok(FamilyPolynomial::normalized(family.n, terms))
}
