//! Mixed polynomials `f(z, z̄) = Σ c_{ν,μ} z^ν z̄^μ`: representation, parsing,
//! evaluation and Wirtinger calculus.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::linalg;
use crate::{Error, Result, Subset};

pub use parse::{infer_dimension, parse_family_terms, FamilyTerms};

pub type Complex = num_complex::Complex64;

/// Largest exponent accepted anywhere in a mixed polynomial.
pub const EXPONENT_CAP: u32 = 1 << 20;

/// The exponent pair `(ν, μ)` of a mixed monomial `z^ν z̄^μ`.
///
/// Ordered lexicographically on `(ν, μ)`, which is the canonical term order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MonomialKey {
    pub nu: Vec<u32>,
    pub mu: Vec<u32>,
}

impl MonomialKey {
    pub fn one(n: usize) -> Self {
        MonomialKey {
            nu: vec![0; n],
            mu: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    /// The lattice point `ν + μ` of the monomial.
    pub fn support_point(&self) -> Vec<i64> {
        self.nu
            .iter()
            .zip(&self.mu)
            .map(|(&a, &b)| a as i64 + b as i64)
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.nu.iter().chain(&self.mu).all(|&e| e == 0)
    }

    /// Variables that actually occur in the monomial.
    pub fn variables(&self) -> Subset {
        Subset::from_indices((0..self.n()).filter(|&i| self.nu[i] + self.mu[i] > 0))
    }

    pub fn conj(&self) -> Self {
        MonomialKey {
            nu: self.mu.clone(),
            mu: self.nu.clone(),
        }
    }

    fn times(&self, other: &MonomialKey) -> Result<MonomialKey> {
        let add = |a: &[u32], b: &[u32]| -> Result<Vec<u32>> {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let s = x as u64 + y as u64;
                    if s > EXPONENT_CAP as u64 {
                        Err(Error::ExponentOverflow {
                            pos: 0,
                            value: s,
                            cap: EXPONENT_CAP,
                        })
                    } else {
                        Ok(s as u32)
                    }
                })
                .collect()
        };
        Ok(MonomialKey {
            nu: add(&self.nu, &other.nu)?,
            mu: add(&self.mu, &other.mu)?,
        })
    }

    /// `z^ν z̄^μ` at `z`.
    pub fn eval(&self, z: &[Complex]) -> Complex {
        let mut acc = Complex::new(1.0, 0.0);
        for (i, zi) in z.iter().enumerate() {
            if self.nu[i] > 0 {
                acc *= zi.powu(self.nu[i]);
            }
            if self.mu[i] > 0 {
                acc *= zi.conj().powu(self.mu[i]);
            }
        }
        acc
    }
}

/// A single term `c · z^ν z̄^μ` with `c ≠ 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedMonomial {
    pub coeff: Complex,
    pub key: MonomialKey,
}

impl MixedMonomial {
    /// Radial degree `Σ w_i (ν_i + μ_i)`.
    pub fn radial_degree(&self, w: &[u64]) -> u64 {
        radial_degree(&self.key, w)
    }
}

/// Radial degree of a monomial with respect to the weights `w`.
pub fn radial_degree(key: &MonomialKey, w: &[u64]) -> u64 {
    key.nu
        .iter()
        .zip(&key.mu)
        .zip(w)
        .map(|((&a, &b), &wi)| wi * (a as u64 + b as u64))
        .sum()
}

/// Wirtinger derivatives `(∂f/∂z_i, ∂f/∂z̄_i)` evaluated at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct WirtingerPair {
    pub dz: Vec<Complex>,
    pub dzbar: Vec<Complex>,
}

impl WirtingerPair {
    /// `∂̄g` for `g = Re f`: `(∂̄f + conj(∂f)) / 2`.
    pub fn dbar_real(&self) -> Vec<Complex> {
        self.dz
            .iter()
            .zip(&self.dzbar)
            .map(|(a, b)| (b + a.conj()) * 0.5)
            .collect()
    }

    /// `∂̄h` for `h = Im f`: `(∂̄f − conj(∂f)) / 2i`.
    pub fn dbar_imag(&self) -> Vec<Complex> {
        let two_i = Complex::new(0.0, 2.0);
        self.dz
            .iter()
            .zip(&self.dzbar)
            .map(|(a, b)| (b - a.conj()) / two_i)
            .collect()
    }

    /// The rows `dg`, `dh` of the real Jacobian, as vectors in `R^{2m}` laid
    /// out `(x_1, y_1, x_2, y_2, ..)`, restricted to the variables in `vars`.
    pub fn real_rows(&self, vars: Subset) -> (Vec<f64>, Vec<f64>) {
        let g = self.dbar_real();
        let h = self.dbar_imag();
        let mut u = Vec::with_capacity(2 * vars.len());
        let mut v = Vec::with_capacity(2 * vars.len());
        for i in vars.iter().filter(|&i| i < g.len()) {
            // ∂k/∂x = 2 Re ∂̄k and ∂k/∂y = 2 Im ∂̄k for real-valued k.
            u.push(2.0 * g[i].re);
            u.push(2.0 * g[i].im);
            v.push(2.0 * h[i].re);
            v.push(2.0 * h[i].im);
        }
        (u, v)
    }
}

/// A mixed polynomial in `n` variables with canonically ordered terms.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedPolynomial {
    n: usize,
    terms: BTreeMap<MonomialKey, Complex>,
}

impl MixedPolynomial {
    pub fn zero(n: usize) -> Self {
        MixedPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from `(coefficient, ν, μ)` triples, merging like
    /// terms and dropping zero coefficients.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex, Vec<u32>, Vec<u32>)>,
    {
        let mut p = MixedPolynomial::zero(n);
        for (c, nu, mu) in terms {
            if nu.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: nu.len(),
                });
            }
            if mu.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: mu.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite("coefficient"));
            }
            if let Some(&e) = nu.iter().chain(&mu).find(|&&e| e > EXPONENT_CAP) {
                return Err(Error::ExponentOverflow {
                    pos: 0,
                    value: e as u64,
                    cap: EXPONENT_CAP,
                });
            }
            p.add_term(MonomialKey { nu, mu }, c);
        }
        Ok(p)
    }

    /// Parses the textual grammar `z1`, `~z2`, `(a+bi)`, `+ - * ^`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let parsed = parse_family_terms(text, n)?;
        if let Some(pos) = parsed.parameter_pos {
            return Err(Error::UnexpectedParameter { pos });
        }
        let mut p = MixedPolynomial::zero(n);
        for ((key, _), c) in parsed.terms {
            p.add_term(key, c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, key: MonomialKey, c: Complex) {
        debug_assert_eq!(key.n(), self.n);
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                if c != Complex::new(0.0, 0.0) {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == Complex::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_constant_term(&self) -> bool {
        self.terms.keys().any(MonomialKey::is_constant)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialKey, &Complex)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<MixedMonomial> {
        self.terms
            .iter()
            .map(|(k, &c)| MixedMonomial {
                coeff: c,
                key: k.clone(),
            })
            .collect()
    }

    pub fn coeff(&self, key: &MonomialKey) -> Complex {
        self.terms.get(key).copied().unwrap_or_default()
    }

    /// Distinct lattice points `ν + μ` of the support, sorted.
    pub fn support(&self) -> Vec<Vec<i64>> {
        let mut pts: Vec<Vec<i64>> = self.terms.keys().map(MonomialKey::support_point).collect();
        pts.sort();
        pts.dedup();
        pts
    }

    /// True when no conjugate variable occurs.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|k| k.mu.iter().all(|&e| e == 0))
    }

    fn check_point(&self, z: &[Complex]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        if z.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("point"));
        }
        Ok(())
    }

    pub fn evaluate(&self, z: &[Complex]) -> Result<Complex> {
        self.check_point(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex]) -> Complex {
        self.terms.iter().map(|(k, c)| c * k.eval(z)).sum()
    }

    /// `Σ |c z^ν z̄^μ|` at `z`; a natural magnitude for relative tolerances.
    pub(crate) fn abs_sum(&self, z: &[Complex]) -> f64 {
        self.terms.iter().map(|(k, c)| (c * k.eval(z)).norm()).sum()
    }

    pub fn wirtinger_gradient(&self, z: &[Complex]) -> Result<WirtingerPair> {
        self.check_point(z)?;
        Ok(self.gradient_unchecked(z))
    }

    pub(crate) fn gradient_unchecked(&self, z: &[Complex]) -> WirtingerPair {
        let n = self.n;
        let zbar: Vec<Complex> = z.iter().map(|c| c.conj()).collect();
        let mut dz = vec![Complex::new(0.0, 0.0); n];
        let mut dzbar = vec![Complex::new(0.0, 0.0); n];
        // Per-variable powers are recomputed per term; supports are small.
        for (key, &c) in &self.terms {
            for i in 0..n {
                let (a, b) = (key.nu[i], key.mu[i]);
                if a == 0 && b == 0 {
                    continue;
                }
                let mut rest = c;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    if key.nu[j] > 0 {
                        rest *= z[j].powu(key.nu[j]);
                    }
                    if key.mu[j] > 0 {
                        rest *= zbar[j].powu(key.mu[j]);
                    }
                }
                if a > 0 {
                    dz[i] += rest * a as f64 * z[i].powu(a - 1) * zbar[i].powu(b);
                }
                if b > 0 {
                    dzbar[i] += rest * b as f64 * z[i].powu(a) * zbar[i].powu(b - 1);
                }
            }
        }
        WirtingerPair { dz, dzbar }
    }

    /// `∂f/∂z_i` as a mixed polynomial.
    pub fn derivative_z(&self, i: usize) -> MixedPolynomial {
        let mut out = MixedPolynomial::zero(self.n);
        for (key, &c) in &self.terms {
            if key.nu[i] > 0 {
                let mut k = key.clone();
                k.nu[i] -= 1;
                out.add_term(k, c * key.nu[i] as f64);
            }
        }
        out
    }

    /// `∂f/∂z̄_i` as a mixed polynomial.
    pub fn derivative_zbar(&self, i: usize) -> MixedPolynomial {
        let mut out = MixedPolynomial::zero(self.n);
        for (key, &c) in &self.terms {
            if key.mu[i] > 0 {
                let mut k = key.clone();
                k.mu[i] -= 1;
                out.add_term(k, c * key.mu[i] as f64);
            }
        }
        out
    }

    /// `conj(f)`: swaps `ν ↔ μ` and conjugates coefficients.
    pub fn conj(&self) -> MixedPolynomial {
        let mut out = MixedPolynomial::zero(self.n);
        for (key, c) in &self.terms {
            out.add_term(key.conj(), c.conj());
        }
        out
    }

    /// `g = Re f = (f + conj f) / 2` as a real-valued mixed polynomial.
    pub fn real_part(&self) -> MixedPolynomial {
        self.add(&self.conj()).scale(Complex::new(0.5, 0.0))
    }

    /// `h = Im f = (f − conj f) / 2i`.
    pub fn imag_part(&self) -> MixedPolynomial {
        self.sub(&self.conj()).scale(Complex::new(0.0, -0.5))
    }

    pub fn add(&self, other: &MixedPolynomial) -> MixedPolynomial {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (k, &c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &MixedPolynomial) -> MixedPolynomial {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex) -> MixedPolynomial {
        let mut out = MixedPolynomial::zero(self.n);
        for (k, &c) in &self.terms {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &MixedPolynomial) -> Result<MixedPolynomial> {
        assert_eq!(self.n, other.n);
        let mut out = MixedPolynomial::zero(self.n);
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                out.add_term(ka.times(kb)?, ca * cb);
            }
        }
        Ok(out)
    }

    /// Sets `z_i = z̄_i = 0` for every `i ∉ keep`. The result stays in the
    /// same ambient dimension.
    pub fn restrict(&self, keep: Subset) -> MixedPolynomial {
        let mut out = MixedPolynomial::zero(self.n);
        for (k, &c) in &self.terms {
            if k.variables().is_subset_of(keep) {
                out.add_term(k.clone(), c);
            }
        }
        out
    }

    /// Keeps the terms whose support point satisfies `pred`.
    pub fn filter_support<F: Fn(&[i64]) -> bool>(&self, pred: F) -> MixedPolynomial {
        let mut out = MixedPolynomial::zero(self.n);
        for (k, &c) in &self.terms {
            if pred(&k.support_point()) {
                out.add_term(k.clone(), c);
            }
        }
        out
    }

    /// Substitutes `z_i = u_i` for the indices in `fixed` (values taken from
    /// the full-length `u`), folding the constants into the coefficients.
    pub(crate) fn substitute(&self, fixed: Subset, u: &[Complex]) -> MixedPolynomial {
        let mut out = MixedPolynomial::zero(self.n);
        for (k, &c) in &self.terms {
            let mut coeff = c;
            let mut key = k.clone();
            for i in fixed.iter() {
                coeff *= u[i].powu(k.nu[i]) * u[i].conj().powu(k.mu[i]);
                key.nu[i] = 0;
                key.mu[i] = 0;
            }
            out.add_term(key, coeff);
        }
        out
    }

    /// Returns `Some(d)` if every term has radial degree `d` for `w`.
    pub fn radial_homogeneous_degree(&self, w: &[u64]) -> Option<u64> {
        let mut degs = self.terms.keys().map(|k| radial_degree(k, w));
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    /// Scale-invariant criticality measure `σ₂/σ₁` of the real `2 × 2n`
    /// Jacobian with rows `dg`, `dh`. Zero exactly at mixed critical points.
    pub fn criticality_residual(&self, z: &[Complex]) -> f64 {
        self.criticality_residual_on(z, Subset::full(self.n))
    }

    /// As [`criticality_residual`](Self::criticality_residual), but treating
    /// `f` as a function of the variables in `vars` only.
    pub fn criticality_residual_on(&self, z: &[Complex], vars: Subset) -> f64 {
        let grad = self.gradient_unchecked(z);
        let (u, v) = grad.real_rows(vars);
        linalg::singular_ratio(&u, &v)
    }

    /// `‖(dg, dh)‖_F / M` over the variables in `vars`, where `M` bounds the
    /// Frobenius norm term by term. Lies in `[0, 1]` and vanishes exactly
    /// where the whole gradient does, which `σ₂/σ₁` cannot see nearby.
    pub fn gradient_vanishing_residual(&self, z: &[Complex], vars: Subset) -> f64 {
        let (u, v) = self.gradient_unchecked(z).real_rows(vars);
        let frob = linalg::norm(&u).hypot(linalg::norm(&v));
        let bound = self.gradient_majorant(z, vars);
        if bound > 0.0 && bound.is_finite() {
            (frob / bound).min(1.0)
        } else {
            0.0
        }
    }

    /// `√2 ‖m‖` with `m_i = Σ |c| (ν_i + μ_i) |z^ν z̄^μ| / |z_i|`.
    pub(crate) fn gradient_majorant(&self, z: &[Complex], vars: Subset) -> f64 {
        let mut sq = 0.0;
        for i in vars.iter().filter(|&i| i < self.n) {
            let mut m = 0.0;
            for (k, c) in &self.terms {
                let e = k.nu[i] + k.mu[i];
                if e == 0 {
                    continue;
                }
                let mut a = c.norm() * e as f64;
                for (j, zj) in z.iter().enumerate() {
                    let p = k.nu[j] + k.mu[j] - u32::from(j == i);
                    if p > 0 {
                        a *= zj.norm().powi(p as i32);
                    }
                }
                m += a;
            }
            sq += m * m;
        }
        (2.0 * sq).sqrt()
    }

    /// `min(σ₂/σ₁, ‖(dg, dh)‖/M)`: zero exactly at mixed critical points, and
    /// small near rank-deficient as well as near vanishing Jacobians.
    pub fn combined_criticality(&self, z: &[Complex], vars: Subset) -> f64 {
        self.criticality_residual_on(z, vars)
            .min(self.gradient_vanishing_residual(z, vars))
    }

    /// Best-fit `λ` with `|λ| = 1` for `conj(∂f) = λ ∂̄f`, and the normalized
    /// residual `min_λ ‖conj(∂f) − λ∂̄f‖ / ‖(∂f, ∂̄f)‖`.
    pub fn lambda_fit(&self, z: &[Complex], vars: Subset) -> (Complex, f64) {
        let grad = self.gradient_unchecked(z);
        lambda_fit(&grad, vars)
    }

    pub fn variables(&self) -> Subset {
        self.terms
            .keys()
            .fold(Subset::empty(), |acc, k| acc.union(k.variables()))
    }
}

pub(crate) fn lambda_fit(grad: &WirtingerPair, vars: Subset) -> (Complex, f64) {
    let mut a2 = 0.0;
    let mut b2 = 0.0;
    let mut ab = Complex::new(0.0, 0.0);
    for i in vars.iter().filter(|&i| i < grad.dz.len()) {
        let a = grad.dz[i].conj();
        let b = grad.dzbar[i];
        a2 += a.norm_sqr();
        b2 += b.norm_sqr();
        // ⟨b, a⟩ = Σ conj(b) a; ‖a − λb‖² = ‖a‖² + ‖b‖² − 2 Re(λ conj⟨b,a⟩).
        ab += b.conj() * a;
    }
    let scale = (a2 + b2).sqrt();
    if scale == 0.0 {
        return (Complex::new(1.0, 0.0), 0.0);
    }
    let lambda = if ab.norm() > 0.0 {
        ab / ab.norm()
    } else {
        Complex::new(1.0, 0.0)
    };
    let r2 = (a2 + b2 - 2.0 * ab.norm()).max(0.0);
    (lambda, r2.sqrt() / scale)
}

fn fmt_real(x: f64) -> String {
    // `Display` for f64 prints the shortest string that round-trips.
    format!("{}", x)
}

impl fmt::Display for MixedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (key, c)) in self.terms.iter().enumerate() {
            let mono = monomial_text(key);
            let (negative, body) = coefficient_text(*c, mono.is_empty());
            match (idx, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            match (body.is_empty(), mono.is_empty()) {
                (true, true) => f.write_str("1")?,
                (true, false) => f.write_str(&mono)?,
                (false, true) => f.write_str(&body)?,
                (false, false) => write!(f, "{}*{}", body, mono)?,
            }
        }
        Ok(())
    }
}

/// Returns (is_negative, magnitude text). An empty text means a unit
/// coefficient that can be omitted in front of a non-constant monomial.
fn coefficient_text(c: Complex, constant: bool) -> (bool, String) {
    if c.im == 0.0 {
        let neg = c.re.is_sign_negative();
        let m = c.re.abs();
        if m == 1.0 && !constant {
            return (neg, String::new());
        }
        return (neg, fmt_real(m));
    }
    if c.re == 0.0 {
        let neg = c.im.is_sign_negative();
        let m = c.im.abs();
        if m == 1.0 {
            return (neg, "i".to_string());
        }
        return (neg, format!("{}i", fmt_real(m)));
    }
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    (
        false,
        format!("({}{}{}i)", fmt_real(c.re), sign, fmt_real(c.im.abs())),
    )
}

fn monomial_text(key: &MonomialKey) -> String {
    let mut parts = Vec::new();
    for i in 0..key.n() {
        for (e, prefix) in [(key.nu[i], ""), (key.mu[i], "~")] {
            match e {
                0 => {}
                1 => parts.push(format!("{}z{}", prefix, i + 1)),
                _ => parts.push(format!("{}z{}^{}", prefix, i + 1, e)),
            }
        }
    }
    parts.join("*")
}
