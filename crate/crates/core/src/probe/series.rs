use std::fmt;

use serde::Serialize;

use crate::Complex;

/// Truncation order used for series that are exact polynomials.
pub const EXACT: i32 = 1 << 24;

const ZERO: Complex = Complex::new(0.0, 0.0);

/// `Σ_{e < trunc} c_e s^e` in a real parameter `s`; exponents may be
/// negative. Coefficients at exponents `≥ trunc` are unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    low: i32,
    coeffs: Vec<Complex>,
    trunc: i32,
}

impl TruncatedSeries {
    pub fn zero(trunc: i32) -> Self {
        TruncatedSeries {
            low: 0,
            coeffs: Vec::new(),
            trunc: trunc.min(EXACT),
        }
    }

    pub fn constant(c: Complex, trunc: i32) -> Self {
        Self::monomial(c, 0, trunc)
    }

    pub fn monomial(c: Complex, exp: i32, trunc: i32) -> Self {
        Self::from_terms([(exp, c)], trunc)
    }

    /// Sums `(exponent, coefficient)` pairs; terms at or past `trunc` are
    /// dropped.
    pub fn from_terms<I: IntoIterator<Item = (i32, Complex)>>(terms: I, trunc: i32) -> Self {
        let trunc = trunc.min(EXACT);
        let terms: Vec<(i32, Complex)> = terms.into_iter().filter(|&(e, _)| e < trunc).collect();
        let Some(low) = terms.iter().map(|&(e, _)| e).min() else {
            return Self::zero(trunc);
        };
        let high = terms.iter().map(|&(e, _)| e).max().unwrap();
        let mut coeffs = vec![ZERO; (high - low + 1) as usize];
        for (e, c) in terms {
            coeffs[(e - low) as usize] += c;
        }
        TruncatedSeries { low, coeffs, trunc }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.low = 0;
        } else if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i32;
        }
        self
    }

    pub fn truncation(&self) -> i32 {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc >= EXACT
    }

    pub fn coeff(&self, e: i32) -> Complex {
        let k = e - self.low;
        if k < 0 {
            return ZERO;
        }
        self.coeffs.get(k as usize).copied().unwrap_or(ZERO)
    }

    /// Non-zero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, Complex)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(move |(k, c)| (self.low + k as i32, *c))
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Lowest exponent whose coefficient exceeds `eps` in modulus.
    pub fn order(&self, eps: f64) -> Option<i32> {
        self.leading(eps).map(|(e, _)| e)
    }

    pub fn leading(&self, eps: f64) -> Option<(i32, Complex)> {
        self.terms().find(|(_, c)| c.norm() > eps)
    }

    fn exact_order(&self) -> i32 {
        self.terms().next().map_or(self.trunc, |(e, _)| e)
    }

    pub fn truncate(&self, trunc: i32) -> Self {
        if trunc >= self.trunc {
            return self.clone();
        }
        Self::from_terms(self.terms(), trunc)
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        Self::from_terms(self.terms().chain(other.terms()), trunc)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_by(Complex::new(-1.0, 0.0)))
    }

    pub fn scale_by(&self, c: Complex) -> Self {
        if c == ZERO {
            return Self::zero(self.trunc);
        }
        Self::from_terms(self.terms().map(|(e, a)| (e, a * c)), self.trunc)
    }

    /// Multiplication by `s^k`.
    pub fn shift(&self, k: i32) -> Self {
        let trunc = if self.is_exact() { EXACT } else { self.trunc + k };
        Self::from_terms(self.terms().map(|(e, a)| (e + k, a)), trunc)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (oa, ob) = (self.exact_order(), other.exact_order());
        let trunc = bound(self.trunc, ob).min(bound(other.trunc, oa));
        let mut out = Vec::new();
        for (ea, a) in self.terms() {
            for (eb, b) in other.terms() {
                if ea + eb < trunc {
                    out.push((ea + eb, a * b));
                }
            }
        }
        Self::from_terms(out, trunc)
    }

    /// Conjugates the coefficients, which is `conj` of the series for real `s`.
    pub fn conj(&self) -> Self {
        TruncatedSeries {
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
            trunc: self.trunc,
        }
    }

    /// Evaluates the known part at `s`.
    pub fn eval(&self, s: f64) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(ZERO, |acc, &c| acc * s + c)
            * s.powi(self.low)
    }

    /// Coefficient moduli, keeping the exponents.
    pub fn abs(&self) -> Self {
        TruncatedSeries {
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| Complex::new(c.norm(), 0.0)).collect(),
            trunc: self.trunc,
        }
    }
}

fn bound(trunc: i32, order: i32) -> i32 {
    if trunc >= EXACT || order >= EXACT {
        EXACT
    } else {
        (trunc + order).min(EXACT)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (e, c) in self.terms() {
            if any {
                f.write_str(" + ")?;
            }
            write!(f, "({}{:+}i)*s^{}", c.re, c.im, e)?;
            any = true;
        }
        if !any {
            f.write_str("0")?;
        }
        if !self.is_exact() {
            write!(f, " + O(s^{})", self.trunc)?;
        }
        Ok(())
    }
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            exp: i32,
            re: f64,
            im: f64,
        }
        s.collect_seq(self.terms().map(|(exp, c)| Term {
            exp,
            re: c.re,
            im: c.im,
        }))
    }
}

/// Components sharing a truncation order. `first_index` is the label of the
/// first component: 1 for `(v_1, .., v_n)`, 0 when a `t` component leads.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesVector {
    pub first_index: usize,
    pub components: Vec<TruncatedSeries>,
}

impl SeriesVector {
    pub fn new(first_index: usize, components: Vec<TruncatedSeries>) -> Self {
        let trunc = components.iter().map(|c| c.truncation()).min().unwrap_or(EXACT);
        SeriesVector {
            first_index,
            components: components.into_iter().map(|c| c.truncate(trunc)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn truncation(&self) -> i32 {
        self.components.iter().map(|c| c.truncation()).min().unwrap_or(EXACT)
    }

    pub fn scale(&self) -> f64 {
        self.components.iter().map(|c| c.scale()).fold(0.0, f64::max)
    }

    /// Coefficients of `s^e` in every component.
    pub fn coeffs_at(&self, e: i32) -> Vec<Complex> {
        self.components.iter().map(|c| c.coeff(e)).collect()
    }

    pub fn eval(&self, s: f64) -> Vec<Complex> {
        self.components.iter().map(|c| c.eval(s)).collect()
    }

    /// `self − c·s^k·other`, componentwise.
    pub fn sub_scaled_shift(&self, c: Complex, k: i32, other: &SeriesVector) -> SeriesVector {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(&b.shift(k).scale_by(c)))
            .collect();
        SeriesVector::new(self.first_index, comps)
    }

    pub fn prepend(&self, head: TruncatedSeries) -> SeriesVector {
        let mut comps = vec![head];
        comps.extend(self.components.iter().cloned());
        SeriesVector::new(self.first_index.saturating_sub(1), comps)
    }
}
