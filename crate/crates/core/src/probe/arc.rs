use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::series::{SeriesVector, TruncatedSeries, EXACT};
use crate::family::FamilyPolynomial;
use crate::{Complex, Error, MixedPolynomial, Result, Subset};

/// A real analytic arc `s ↦ (t(s), z(s))`, given by truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub t: TruncatedSeries,
    pub z: Vec<TruncatedSeries>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    exp: i32,
    re: f64,
    #[serde(default)]
    im: f64,
}

/// On-disk form: each coordinate is a list of `{exp, re, im}` terms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcJson {
    #[serde(default)]
    t: Vec<TermJson>,
    z: Vec<Vec<TermJson>>,
}

/// On-disk form of a pair of arcs for the Whitney test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcPairJson {
    pub p_arc: ArcJson,
    pub q_arc: ArcJson,
}

fn series_of(terms: &[TermJson]) -> Result<TruncatedSeries> {
    for t in terms {
        if t.exp < 0 {
            return Err(Error::InvalidConfig(format!(
                "arc exponents must be non-negative, got {}",
                t.exp
            )));
        }
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(Error::NonFinite("arc coefficient"));
        }
    }
    Ok(TruncatedSeries::from_terms(
        terms.iter().map(|t| (t.exp, Complex::new(t.re, t.im))),
        EXACT,
    ))
}

fn terms_of(s: &TruncatedSeries) -> Vec<TermJson> {
    s.terms()
        .map(|(exp, c)| TermJson {
            exp,
            re: c.re,
            im: c.im,
        })
        .collect()
}

impl TryFrom<ArcJson> for Arc {
    type Error = Error;

    fn try_from(a: ArcJson) -> Result<Arc> {
        Ok(Arc {
            t: series_of(&a.t)?,
            z: a.z.iter().map(|c| series_of(c)).collect::<Result<_>>()?,
        })
    }
}

impl From<&Arc> for ArcJson {
    fn from(a: &Arc) -> ArcJson {
        ArcJson {
            t: terms_of(&a.t),
            z: a.z.iter().map(terms_of).collect(),
        }
    }
}

impl Arc {
    /// Polynomial arc from `(exponent, coefficient)` lists.
    pub fn polynomial(t: &[(i32, Complex)], z: &[&[(i32, Complex)]]) -> Self {
        Arc {
            t: TruncatedSeries::from_terms(t.iter().copied(), EXACT),
            z: z
                .iter()
                .map(|c| TruncatedSeries::from_terms(c.iter().copied(), EXACT))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `(t(s), z(s))` at a parameter value.
    pub fn point(&self, s: f64) -> (Complex, Vec<Complex>) {
        (self.t.eval(s), self.z.iter().map(|c| c.eval(s)).collect())
    }

    /// Coordinates that are not identically zero.
    pub fn support(&self) -> Subset {
        Subset::from_indices((0..self.n()).filter(|&i| self.z[i].order(0.0).is_some()))
    }

    /// Orders `w_i` of the coordinates; 0 for identically zero ones.
    pub fn weights(&self) -> Vec<i32> {
        self.z.iter().map(|c| c.order(0.0).unwrap_or(0)).collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.n(),
            });
        }
        Ok(())
    }

    fn truncated(&self, trunc: i32) -> Arc {
        Arc {
            t: self.t.truncate(trunc),
            z: self.z.iter().map(|c| c.truncate(trunc)).collect(),
        }
    }

    fn abs(&self) -> Arc {
        Arc {
            t: self.t.abs(),
            z: self.z.iter().map(|c| c.abs()).collect(),
        }
    }
}

/// A family term `c t^k z^ν z̄^μ`.
#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub c: Complex,
    pub k: u32,
    pub nu: Vec<u32>,
    pub mu: Vec<u32>,
}

pub(crate) fn family_terms(f: &FamilyPolynomial) -> Vec<Term> {
    let mut out = Vec::new();
    for (key, coeffs) in f.terms() {
        for (k, &c) in coeffs.iter().enumerate() {
            if c != Complex::new(0.0, 0.0) {
                out.push(Term {
                    c,
                    k: k as u32,
                    nu: key.nu.clone(),
                    mu: key.mu.clone(),
                });
            }
        }
    }
    out
}

/// Partial derivatives of a term list.
#[derive(Clone, Copy)]
pub(crate) enum Var {
    T,
    Z(usize),
    Zbar(usize),
}

pub(crate) fn derive(terms: &[Term], var: Var) -> Vec<Term> {
    terms
        .iter()
        .filter_map(|t| {
            let mut d = t.clone();
            let e = match var {
                Var::T => &mut d.k,
                Var::Z(i) => &mut d.nu[i],
                Var::Zbar(i) => &mut d.mu[i],
            };
            if *e == 0 {
                return None;
            }
            d.c *= *e as f64;
            *e -= 1;
            Some(d)
        })
        .collect()
}

/// Caches `x(s)^e` for the arc coordinates and their conjugates.
struct Powers<'a> {
    arc: &'a Arc,
    trunc: i32,
    cache: HashMap<(usize, bool, u32), TruncatedSeries>,
}

impl<'a> Powers<'a> {
    /// Coordinate 0 is `t`, coordinate `i + 1` is `z_i`.
    fn get(&mut self, coord: usize, conj: bool, e: u32) -> TruncatedSeries {
        if e == 0 {
            return TruncatedSeries::constant(Complex::new(1.0, 0.0), self.trunc);
        }
        if let Some(p) = self.cache.get(&(coord, conj, e)) {
            return p.clone();
        }
        let base = if coord == 0 {
            self.arc.t.clone()
        } else {
            self.arc.z[coord - 1].clone()
        };
        let base = if conj { base.conj() } else { base };
        let p = if e == 1 {
            base
        } else {
            self.get(coord, conj, e - 1).mul(&base).truncate(self.trunc)
        };
        self.cache.insert((coord, conj, e), p.clone());
        p
    }
}

pub(crate) fn compose_terms(terms: &[Term], arc: &Arc, trunc: i32) -> TruncatedSeries {
    let arc = arc.truncated(trunc);
    let mut pw = Powers {
        arc: &arc,
        trunc,
        cache: HashMap::new(),
    };
    let mut acc = TruncatedSeries::zero(trunc);
    for term in terms {
        let mut p = pw.get(0, false, term.k);
        for i in 0..term.nu.len() {
            p = p.mul(&pw.get(i + 1, false, term.nu[i])).truncate(trunc);
            p = p.mul(&pw.get(i + 1, true, term.mu[i])).truncate(trunc);
        }
        acc = acc.add(&p.scale_by(term.c));
    }
    acc
}

/// `f(z(s), z̄(s))` as a series, truncated at `trunc`.
pub fn compose(f: &MixedPolynomial, arc: &Arc, trunc: i32) -> Result<TruncatedSeries> {
    compose_family(&FamilyPolynomial::constant(f), arc, trunc)
}

/// `f(t(s), z(s), z̄(s))` as a series, truncated at `trunc`.
pub fn compose_family(f: &FamilyPolynomial, arc: &Arc, trunc: i32) -> Result<TruncatedSeries> {
    arc.validate(f.n())?;
    Ok(compose_terms(&family_terms(f), arc, trunc))
}

/// Coefficientwise bound for `|f(arc(s))|` used as a vanishing scale.
pub(crate) fn majorant(terms: &[Term], arc: &Arc, trunc: i32) -> TruncatedSeries {
    let abs_terms: Vec<Term> = terms
        .iter()
        .map(|t| Term {
            c: Complex::new(t.c.norm(), 0.0),
            ..t.clone()
        })
        .collect();
    compose_terms(&abs_terms, &arc.abs(), trunc)
}

/// `∂̄g` and `∂̄h` of `g = Re f`, `h = Im f` along an arc.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientSeries {
    /// `(∂g/∂z̄_1, .., ∂g/∂z̄_n)`.
    pub v_g: SeriesVector,
    pub v_h: SeriesVector,
    /// `∂g/∂t̄` and `∂h/∂t̄`.
    pub v_g0: TruncatedSeries,
    pub v_h0: TruncatedSeries,
}

impl GradientSeries {
    /// `(v_{g,0}, v_g)` and `(v_{h,0}, v_h)`, indexed from 0.
    pub fn full(&self) -> (SeriesVector, SeriesVector) {
        (
            self.v_g.prepend(self.v_g0.clone()),
            self.v_h.prepend(self.v_h0.clone()),
        )
    }
}

fn real_imag(dz: &TruncatedSeries, dzbar: &TruncatedSeries) -> (TruncatedSeries, TruncatedSeries) {
    let conj_dz = dz.conj();
    let g = dzbar.add(&conj_dz).scale_by(Complex::new(0.5, 0.0));
    let h = dzbar.sub(&conj_dz).scale_by(Complex::new(0.0, -0.5));
    (g, h)
}

pub(crate) fn gradient_terms(terms: &[Term], n: usize, arc: &Arc, trunc: i32) -> GradientSeries {
    let mut vg = Vec::with_capacity(n);
    let mut vh = Vec::with_capacity(n);
    for i in 0..n {
        let dz = compose_terms(&derive(terms, Var::Z(i)), arc, trunc);
        let dzbar = compose_terms(&derive(terms, Var::Zbar(i)), arc, trunc);
        let (g, h) = real_imag(&dz, &dzbar);
        vg.push(g);
        vh.push(h);
    }
    let dt = compose_terms(&derive(terms, Var::T), arc, trunc);
    let (g0, h0) = real_imag(&dt, &TruncatedSeries::zero(trunc));
    GradientSeries {
        v_g: SeriesVector::new(1, vg),
        v_h: SeriesVector::new(1, vh),
        v_g0: g0,
        v_h0: h0,
    }
}

/// Gradient series of a mixed polynomial along an arc (the `t` parts vanish).
pub fn gradient_series(f: &MixedPolynomial, arc: &Arc, trunc: i32) -> Result<GradientSeries> {
    gradient_series_family(&FamilyPolynomial::constant(f), arc, trunc)
}

pub fn gradient_series_family(f: &FamilyPolynomial, arc: &Arc, trunc: i32) -> Result<GradientSeries> {
    arc.validate(f.n())?;
    Ok(gradient_terms(&family_terms(f), f.n(), arc, trunc))
}

/// Numeric `(∂f/∂t, ∂f/∂z, ∂f/∂z̄)` of a term list at a point.
pub(crate) fn numeric_derivatives(
    terms: &[Term],
    t: Complex,
    z: &[Complex],
) -> (Complex, Vec<Complex>, Vec<Complex>) {
    let n = z.len();
    let zero = Complex::new(0.0, 0.0);
    let (mut dt, mut dz, mut dzbar) = (zero, vec![zero; n], vec![zero; n]);
    let zc: Vec<Complex> = z.iter().map(|c| c.conj()).collect();
    for term in terms {
        let mono = |skip: Option<(usize, bool)>| -> Complex {
            let mut v = term.c;
            for i in 0..n {
                let (mut a, mut b) = (term.nu[i], term.mu[i]);
                match skip {
                    Some((j, false)) if j == i => a -= 1,
                    Some((j, true)) if j == i => b -= 1,
                    _ => {}
                }
                v *= z[i].powu(a) * zc[i].powu(b);
            }
            v
        };
        let tk = t.powu(term.k);
        if term.k > 0 {
            dt += mono(None) * t.powu(term.k - 1) * term.k as f64;
        }
        for i in 0..n {
            if term.nu[i] > 0 {
                dz[i] += mono(Some((i, false))) * tk * term.nu[i] as f64;
            }
            if term.mu[i] > 0 {
                dzbar[i] += mono(Some((i, true))) * tk * term.mu[i] as f64;
            }
        }
    }
    (dt, dz, dzbar)
}

/// Numeric `(∂̄g, ∂̄h)` over `(t, z_1, .., z_n)`.
pub(crate) fn numeric_gradients(terms: &[Term], t: Complex, z: &[Complex]) -> (Vec<Complex>, Vec<Complex>) {
    let (dt, dz, dzbar) = numeric_derivatives(terms, t, z);
    let mut g = vec![dt.conj() * 0.5];
    let mut h = vec![dt.conj() * Complex::new(0.0, 0.5)];
    for i in 0..z.len() {
        g.push((dzbar[i] + dz[i].conj()) * 0.5);
        h.push((dzbar[i] - dz[i].conj()) * Complex::new(0.0, -0.5));
    }
    (g, h)
}
