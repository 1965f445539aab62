use rayon::prelude::*;
use serde::Serialize;

use super::arc::{family_terms, gradient_terms, majorant, numeric_gradients, compose_terms, Arc, Term};
use super::reduction::{order_with_eps, whitney_reduction, Leading, ReductionStep, ZERO_REL};
use super::series::{SeriesVector, TruncatedSeries};
use crate::family::{FamilyPolynomial, StratumDescriptor, StratumKind};
use crate::linalg;
use crate::newton;
use crate::{Complex, Error, Result, Subset};

/// Parameter values `s = 2^{-k}` of the numeric cross-check.
pub const SAMPLE_EXPONENTS: std::ops::RangeInclusive<i32> = 6..=20;

/// Extra series terms kept beyond the leading weighted degree.
pub const TRUNCATION_MARGIN: i32 = 8;

/// Relative size below which `f` is taken to vanish along an arc.
const ON_HYPERSURFACE_REL: f64 = 1e-10;

/// `σ₂/σ₁` below this marks a point of `Σf`.
const CRITICAL_FLOOR: f64 = 1e-10;

const DEPENDENCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl ProbeVerdict {
    pub fn label(self) -> &'static str {
        match self {
            ProbeVerdict::Pass => "PASS",
            ProbeVerdict::Fail => "FAIL",
            ProbeVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericSample {
    pub k: i32,
    pub s: f64,
    pub residual: f64,
}

/// Limits of `∂̄g`, `∂̄h` along an arc and the containment test built on them.
/// Vector components are ordered `(t, z_1, .., z_n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    pub truncation: i32,
    /// `g` and `h` were exchanged (`f` replaced by `√−1 f`).
    pub swapped: bool,
    pub o_g: i32,
    pub o_h: i32,
    pub i_g: usize,
    pub i_h: usize,
    pub c_g: Complex,
    pub c_h: Complex,
    pub reduction_steps: usize,
    pub trace: Vec<ReductionStep>,
    /// Leading data of the reduced `v_h`.
    pub reduced: Leading,
    pub limit_g: Vec<Complex>,
    pub limit_h: Vec<Complex>,
    /// Unit vectors required to lie in the limit tangent space.
    pub targets: Vec<Vec<Complex>>,
    /// Distance of the targets from the limit tangent space.
    pub series_residual: f64,
    pub numeric: Vec<NumericSample>,
    /// Numeric residual at the smallest sampled `s`.
    pub containment_residual: f64,
    pub tol: f64,
    pub verdict: ProbeVerdict,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhitneyOptions {
    pub tol: f64,
    pub truncation: Option<i32>,
    /// Negative-control hook: added to the secant direction before
    /// normalization, in both the series and the numeric check.
    pub secant_perturbation: Option<Vec<Complex>>,
}

impl Default for WhitneyOptions {
    fn default() -> Self {
        WhitneyOptions {
            tol: 1e-3,
            truncation: None,
            secant_perturbation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThomOptions {
    pub tol: f64,
    pub truncation: Option<i32>,
    /// Negative-control hook: replaces `(∂̄g, ∂̄h)` by fixed vectors over
    /// `(t, z)`, in both the series and the numeric check.
    pub gradient_override: Option<(Vec<Complex>, Vec<Complex>)>,
}

impl Default for ThomOptions {
    fn default() -> Self {
        ThomOptions {
            tol: 1e-3,
            truncation: None,
            gradient_override: None,
        }
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = linalg::norm(v);
    v.iter().map(|x| x / n).collect()
}

fn to_complex(v: &[f64]) -> Vec<Complex> {
    v.chunks(2).map(|p| Complex::new(p[0], p[1])).collect()
}

/// Lowest weighted degree of the terms of `f` along the arc.
fn arc_degree(terms: &[Term], arc: &Arc) -> i32 {
    let ord = |s: &TruncatedSeries| s.order(0.0);
    terms
        .iter()
        .filter_map(|term| {
            let mut d = 0;
            if term.k > 0 {
                d += term.k as i32 * ord(&arc.t)?;
            }
            for i in 0..term.nu.len() {
                let e = (term.nu[i] + term.mu[i]) as i32;
                if e > 0 {
                    d += e * ord(&arc.z[i])?;
                }
            }
            Some(d)
        })
        .min()
        .unwrap_or(0)
}

fn default_truncation(terms: &[Term], arcs: &[&Arc]) -> i32 {
    let mut top = 0;
    for arc in arcs {
        top = top.max(arc_degree(terms, arc));
        for s in arc.z.iter().chain([&arc.t]) {
            top = top.max(s.order(0.0).unwrap_or(0));
        }
    }
    top + TRUNCATION_MARGIN
}

fn residual_of(targets: &[Vec<f64>], g: &[f64], h: &[f64]) -> Option<f64> {
    let basis = linalg::orthonormal_basis(&[g.to_vec(), h.to_vec()], DEPENDENCE_TOL);
    if basis.len() < 2 {
        return None;
    }
    Some(
        targets
            .iter()
            .map(|x| linalg::norm(&linalg::span_part(x, &basis)))
            .fold(0.0, f64::max),
    )
}

/// The reduction and limit vectors shared by both tests.
struct Limits {
    swapped: bool,
    g0: Leading,
    h0: Leading,
    steps: usize,
    trace: Vec<ReductionStep>,
    reduced: Leading,
    limit_g: Vec<f64>,
    limit_h: Vec<f64>,
    exhausted: bool,
}

fn limits(vg: SeriesVector, vh: SeriesVector) -> Result<Limits> {
    let eps = ZERO_REL * vg.scale().max(vh.scale());
    let lg = order_with_eps(&vg, Subset::empty(), eps)?;
    let lh = order_with_eps(&vh, Subset::empty(), eps)?;
    let swapped = lh.order < lg.order;
    let (vg, vh, g0, h0) = if swapped {
        (vh, vg, lh, lg)
    } else {
        (vg, vh, lg, lh)
    };
    let red = whitney_reduction(&vg, &vh)?;
    let limit_g = unit(&linalg::to_real(&vg.coeffs_at(red.g.order)));
    let limit_h = unit(&linalg::to_real(&red.v_h.coeffs_at(red.h.order)));
    Ok(Limits {
        swapped,
        g0,
        h0,
        steps: red.steps,
        trace: red.trace,
        reduced: red.h,
        limit_g,
        limit_h,
        exhausted: red.exhausted,
    })
}

fn assemble(
    lim: Limits,
    truncation: i32,
    targets: &[Vec<f64>],
    override_grad: Option<(&[f64], &[f64])>,
    numeric: Vec<NumericSample>,
    tol: f64,
    mut notes: Vec<String>,
) -> LimitReport {
    let (lg, lh) = match override_grad {
        Some((g, h)) => (unit(g), unit(h)),
        None => (lim.limit_g.clone(), lim.limit_h.clone()),
    };
    let series = residual_of(targets, &lg, &lh);
    let containment = numeric.last().map_or(f64::NAN, |s| s.residual);
    let verdict = match series {
        _ if lim.exhausted => {
            notes.push("reduction did not separate the leading coefficients within the truncation".into());
            ProbeVerdict::Inconclusive
        }
        None => {
            notes.push("limit gradient vectors are ℝ-linearly dependent".into());
            ProbeVerdict::Inconclusive
        }
        Some(r) if !((r - containment).abs() <= tol) => {
            notes.push(format!(
                "series limit residual {:.3e} disagrees with the numeric residual {:.3e}",
                r, containment
            ));
            ProbeVerdict::Inconclusive
        }
        Some(r) if r < tol && containment < tol => ProbeVerdict::Pass,
        Some(_) => ProbeVerdict::Fail,
    };
    LimitReport {
        truncation,
        swapped: lim.swapped,
        o_g: lim.g0.order,
        o_h: lim.h0.order,
        i_g: lim.g0.index,
        i_h: lim.h0.index,
        c_g: lim.g0.coeff,
        c_h: lim.h0.coeff,
        reduction_steps: lim.steps,
        trace: lim.trace,
        reduced: lim.reduced,
        limit_g: to_complex(&lg),
        limit_h: to_complex(&lh),
        targets: targets.iter().map(|t| to_complex(t)).collect(),
        series_residual: series.unwrap_or(f64::NAN),
        numeric,
        containment_residual: containment,
        tol,
        verdict,
        notes,
    }
}

fn check_on_hypersurface(terms: &[Term], arc: &Arc, trunc: i32) -> Result<()> {
    let f = compose_terms(terms, arc, trunc);
    let bound = majorant(terms, arc, trunc);
    for (e, c) in f.terms() {
        let scale = bound.coeff(e).norm().max(f64::MIN_POSITIVE);
        if c.norm() > ON_HYPERSURFACE_REL * scale {
            return Err(Error::ArcNotOnHypersurface(format!(
                "coefficient of s^{} is {:.3e}",
                e,
                c.norm()
            )));
        }
    }
    Ok(())
}

fn point_at(arc: &Arc, s: f64) -> Vec<Complex> {
    let (t, z) = arc.point(s);
    let mut p = vec![t];
    p.extend(z);
    p
}

/// Numeric-and-series test of Whitney (b) for `A_J` over `C_I`, with
/// `p_arc ⊂ C_I` and `q_arc ⊂ A_J`.
pub fn check_whitney_b(
    family: &FamilyPolynomial,
    p_arc: &Arc,
    q_arc: &Arc,
    opts: &WhitneyOptions,
) -> Result<LimitReport> {
    let n = family.n();
    p_arc.validate(n)?;
    q_arc.validate(n)?;
    let terms = family_terms(family);
    let trunc = opts
        .truncation
        .unwrap_or_else(|| default_truncation(&terms, &[p_arc, q_arc]));

    let classes = newton::classify_subspaces(&family.specialize(Complex::new(0.0, 0.0)))?;
    let i = p_arc.support();
    let j = q_arc.support();
    if !classes.vanishing.contains(&i) {
        return Err(Error::ArcNotInStratum(format!(
            "p_arc lies in C^*{} which is not a vanishing coordinate subspace",
            i
        )));
    }
    if !classes.nonvanishing.contains(&j) || !i.is_subset_of(j) {
        return Err(Error::ArcNotInStratum(format!(
            "q_arc lies in C^*{}, which does not give a stratum A_J with I = {} ⊆ J",
            j, i
        )));
    }
    let p0 = point_at(p_arc, 0.0);
    let q0 = point_at(q_arc, 0.0);
    if p0.iter().zip(&q0).any(|(a, b)| (a - b).norm() > 1e-12 * (1.0 + a.norm())) {
        return Err(Error::ArcNotInStratum("the arcs have different limit points".into()));
    }
    check_on_hypersurface(&terms, q_arc, trunc)?;

    let mut ell: Vec<TruncatedSeries> = vec![q_arc.t.sub(&p_arc.t).truncate(trunc)];
    ell.extend(q_arc.z.iter().zip(&p_arc.z).map(|(a, b)| a.sub(b).truncate(trunc)));
    let ell = SeriesVector::new(0, ell);
    let lead = order_with_eps(&ell, Subset::empty(), ZERO_REL * ell.scale())
        .map_err(|_| Error::ArcNotInStratum("the arcs coincide".into()))?;
    let perturb = opts.secant_perturbation.as_ref().map(|p| linalg::to_real(p));
    let perturbed = |v: Vec<f64>| -> Vec<f64> {
        let v = unit(&v);
        match &perturb {
            Some(p) => unit(&v.iter().zip(p).map(|(a, b)| a + b).collect::<Vec<_>>()),
            None => v,
        }
    };
    let ell_inf = perturbed(linalg::to_real(&ell.coeffs_at(lead.order)));

    let grads = gradient_terms(&terms, n, q_arc, trunc);
    let (vg, vh) = grads.full();
    let lim = limits(vg, vh)?;

    let numeric: Vec<NumericSample> = SAMPLE_EXPONENTS
        .into_par_iter()
        .map(|k| {
            let s = (-k as f64).exp2();
            let q = point_at(q_arc, s);
            let p = point_at(p_arc, s);
            let secant: Vec<Complex> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
            let target = perturbed(linalg::to_real(&secant));
            let (g, h) = numeric_gradients(&terms, q[0], &q[1..]);
            let residual = residual_of(&[target], &linalg::to_real(&g), &linalg::to_real(&h))
                .unwrap_or(f64::NAN);
            NumericSample { k, s, residual }
        })
        .collect();

    let notes = vec![format!("pair C_{} over A_{}", i, j)];
    Ok(assemble(lim, trunc, &[ell_inf], None, numeric, opts.tol, notes))
}

/// `‖(∂̄g, ∂̄h)‖ / bound` over `(t, z)`, with the bound taken term by term.
fn vanishing_ratio(terms: &[Term], p: &[Complex], g: &[f64], h: &[f64]) -> f64 {
    let mut m = vec![0.0; p.len()];
    let abs: Vec<f64> = p.iter().map(|c| c.norm()).collect();
    for term in terms {
        let mut exps = vec![term.k];
        exps.extend(term.nu.iter().zip(&term.mu).map(|(a, b)| a + b));
        for (i, mi) in m.iter_mut().enumerate() {
            if exps[i] == 0 {
                continue;
            }
            let mut a = term.c.norm() * exps[i] as f64;
            for (j, &e) in exps.iter().enumerate() {
                let e = e - u32::from(j == i);
                if e > 0 {
                    a *= abs[j].powi(e as i32);
                }
            }
            *mi += a;
        }
    }
    let bound = linalg::norm(&m);
    let frob = linalg::norm(g).hypot(linalg::norm(h)) * std::f64::consts::SQRT_2;
    if bound > 0.0 && bound.is_finite() {
        (frob / bound).min(1.0)
    } else {
        0.0
    }
}

fn stratum_basis(
    terms: &[Term],
    stratum: &StratumDescriptor,
    p0: &[Complex],
) -> Result<Vec<Vec<f64>>> {
    let dim = 2 * p0.len();
    let mut coords = vec![0];
    coords.extend(stratum.subset.iter().map(|i| i + 1));
    let mut plane = Vec::new();
    for &c in &coords {
        for part in 0..2 {
            let mut e = vec![0.0; dim];
            e[2 * c + part] = 1.0;
            plane.push(e);
        }
    }
    match stratum.kind {
        StratumKind::C => Ok(plane),
        StratumKind::A => {
            let (g, h) = numeric_gradients(terms, p0[0], &p0[1..]);
            let normals = linalg::orthonormal_basis(&[linalg::to_real(&g), linalg::to_real(&h)], DEPENDENCE_TOL);
            let projected: Vec<Vec<f64>> = plane
                .iter()
                .map(|e| linalg::orthogonal_part(e, &normals))
                .collect();
            Ok(linalg::orthonormal_basis(&projected, 1e-6))
        }
        StratumKind::B => Err(Error::ArcNotInStratum(
            "the Thom condition concerns strata inside V(f); B strata are not".into(),
        )),
    }
}

/// Numeric-and-series test of Thom's `a_f` condition along `arc` for the
/// stratum containing `arc(0)`.
pub fn check_thom_af(
    family: &FamilyPolynomial,
    arc: &Arc,
    stratum: &StratumDescriptor,
    opts: &ThomOptions,
) -> Result<LimitReport> {
    let n = family.n();
    arc.validate(n)?;
    let terms = family_terms(family);
    let trunc = opts
        .truncation
        .unwrap_or_else(|| default_truncation(&terms, &[arc]));

    let p0 = point_at(arc, 0.0);
    if let Some(i) = (0..n).find(|&i| !stratum.subset.contains(i) && p0[i + 1].norm() > 0.0) {
        return Err(Error::ArcNotInStratum(format!(
            "arc(0) has z{} ≠ 0 outside {}",
            i + 1,
            stratum.subset
        )));
    }
    let f0 = family.specialize(p0[0]).evaluate(&p0[1..])?;
    if f0.norm() > 1e-12 {
        return Err(Error::ArcNotOnHypersurface(format!("|f(arc(0))| = {:.3e}", f0.norm())));
    }
    let targets = stratum_basis(&terms, stratum, &p0)?;

    let override_real = opts
        .gradient_override
        .as_ref()
        .map(|(g, h)| (linalg::to_real(g), linalg::to_real(h)));
    let numeric: Vec<NumericSample> = SAMPLE_EXPONENTS
        .into_par_iter()
        .map(|k| {
            let s = (-k as f64).exp2();
            let p = point_at(arc, s);
            let (g, h) = numeric_gradients(&terms, p[0], &p[1..]);
            let (g, h) = (linalg::to_real(&g), linalg::to_real(&h));
            let ratio = linalg::singular_ratio(&g, &h).min(vanishing_ratio(&terms, &p, &g, &h));
            let residual = match &override_real {
                Some((og, oh)) => residual_of(&targets, og, oh),
                None => residual_of(&targets, &g, &h),
            }
            .unwrap_or(f64::NAN);
            (NumericSample { k, s, residual }, ratio)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(sample, ratio)| {
            if ratio < CRITICAL_FLOOR {
                Err(Error::ArcMeetsCriticalSet(sample.s))
            } else {
                Ok(sample)
            }
        })
        .collect::<Result<_>>()?;

    let grads = gradient_terms(&terms, n, arc, trunc);
    let (vg, vh) = grads.full();
    let lim = limits(vg, vh)?;
    let notes = vec![format!("stratum {}", stratum)];
    let ov = override_real.as_ref().map(|(g, h)| (g.as_slice(), h.as_slice()));
    Ok(assemble(lim, trunc, &targets, ov, numeric, opts.tol, notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn fam(text: &str, n: usize) -> FamilyPolynomial {
        FamilyPolynomial::parse(text, n).unwrap()
    }

    const F51: &str = "~z1^2*z2^3 + z1^3*~z2^2 + t*z1^2*z2^4";

    fn phase() -> Complex {
        Complex::from_polar(1.0, std::f64::consts::PI / 5.0)
    }

    #[test]
    fn whitney_pass_on_t_axis_pair() {
        let f = fam(F51, 2);
        let p = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[], &[]]);
        let q = Arc::polynomial(&[], &[&[(1, c(1.0, 0.0))], &[(1, phase())]]);
        let r = check_whitney_b(&f, &p, &q, &WhitneyOptions::default()).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Pass, "{:?}", r);
        assert!(r.series_residual < 1e-10);
        assert!(r.containment_residual < 1e-3);
        assert_eq!(r.o_g, 4);
    }

    #[test]
    fn whitney_negative_controls() {
        let f = fam(F51, 2);
        let p = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[], &[]]);
        let q = Arc::polynomial(&[], &[&[(1, c(1.0, 0.0))], &[(1, phase())]]);
        let opts = WhitneyOptions {
            secant_perturbation: Some(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]),
            ..WhitneyOptions::default()
        };
        let r = check_whitney_b(&f, &p, &q, &opts).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Fail, "{:?}", r);

        // Two lines crossing over the t-axis.
        let g = fam("t*z1 + z1^2", 1);
        let p = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[]]);
        let q = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[(1, c(-1.0, 0.0))]]);
        let r = check_whitney_b(&g, &p, &q, &WhitneyOptions::default()).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Fail);
        assert!((r.series_residual - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn whitney_smooth_case() {
        let f = fam("z2 - z1^2", 2);
        let p = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[], &[]]);
        let q = Arc::polynomial(&[], &[&[(1, c(1.0, 0.0))], &[(2, c(1.0, 0.0))]]);
        let r = check_whitney_b(&f, &p, &q, &WhitneyOptions::default()).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Pass);
    }

    #[test]
    fn whitney_rejects_arc_off_hypersurface() {
        let f = fam(F51, 2);
        let p = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[], &[]]);
        let q = Arc::polynomial(&[], &[&[(1, c(1.0, 0.0))], &[(1, c(1.0, 0.0))]]);
        assert!(matches!(
            check_whitney_b(&f, &p, &q, &WhitneyOptions::default()),
            Err(Error::ArcNotOnHypersurface(_))
        ));
    }

    fn t_axis() -> StratumDescriptor {
        StratumDescriptor {
            kind: StratumKind::C,
            subset: Subset::empty(),
            t_axis: true,
        }
    }

    #[test]
    fn thom_pass_on_diagonal_arc() {
        let f = fam(F51, 2);
        let one = [(1, c(1.0, 0.0))];
        let arc = Arc::polynomial(&one, &[&one, &one]);
        let r = check_thom_af(&f, &arc, &t_axis(), &ThomOptions::default()).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Pass, "{:?}", r);
    }

    #[test]
    fn thom_negative_controls() {
        let f = fam(F51, 2);
        let one = [(1, c(1.0, 0.0))];
        let arc = Arc::polynomial(&one, &[&one, &one]);
        let opts = ThomOptions {
            gradient_override: Some((
                vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)],
            )),
            ..ThomOptions::default()
        };
        let r = check_thom_af(&f, &arc, &t_axis(), &opts).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Fail);

        let g = fam("t*z1 + z1^2", 1);
        let arc = Arc::polynomial(&one, &[&one]);
        let r = check_thom_af(&g, &arc, &t_axis(), &ThomOptions::default()).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Fail);
    }

    #[test]
    fn thom_rejects_arcs_in_the_critical_set() {
        let f = fam("z1^2", 1);
        let arc = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[]]);
        assert!(matches!(
            check_thom_af(&f, &arc, &t_axis(), &ThomOptions::default()),
            Err(Error::ArcMeetsCriticalSet(_))
        ));
    }

    #[test]
    fn thom_submersion() {
        let f = fam("z1", 2);
        let arc = Arc::polynomial(&[(1, c(1.0, 0.0))], &[&[(2, c(1.0, 0.0))], &[(1, c(0.0, 1.0))]]);
        let stratum = StratumDescriptor {
            kind: StratumKind::C,
            subset: Subset::empty(),
            t_axis: true,
        };
        let r = check_thom_af(&f, &arc, &stratum, &ThomOptions::default()).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Pass);
    }
}
