use serde::Serialize;

use super::series::SeriesVector;
use crate::{Complex, Error, Result, Subset};

/// Coefficients below this fraction of a vector's largest coefficient are
/// treated as zero when reading off orders.
pub const ZERO_REL: f64 = 1e-11;

/// Leading coefficients `c_g`, `c_h` are ℝ-dependent when
/// `|Im(c_h/c_g)| ≤ REAL_RATIO_TOL · |c_h/c_g|`.
pub const REAL_RATIO_TOL: f64 = 1e-10;

/// Order `o`, essential index and leading coefficient of a series vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Leading {
    pub order: i32,
    /// Largest component label attaining `order`.
    pub index: usize,
    pub coeff: Complex,
}

/// `o = min` order over components outside `skip` (positions), the largest
/// label attaining it, and the coefficient of `s^o` there.
pub fn order_and_essential_index(v: &SeriesVector, skip: Subset) -> Result<Leading> {
    order_with_eps(v, skip, ZERO_REL * v.scale())
}

pub(crate) fn order_with_eps(v: &SeriesVector, skip: Subset, eps: f64) -> Result<Leading> {
    let mut best: Option<(i32, usize, Complex)> = None;
    for (k, comp) in v.components.iter().enumerate() {
        if skip.contains(k) {
            continue;
        }
        if let Some((o, c)) = comp.leading(eps) {
            if best.map_or(true, |(bo, _, _)| o <= bo) {
                best = Some((o, k, c));
            }
        }
    }
    let (order, k, coeff) = best.ok_or(Error::ZeroSeries)?;
    Ok(Leading {
        order,
        index: v.first_index + k,
        coeff,
    })
}

/// One elimination `v_h ← v_h − (c_h/c_g) s^{o(h)−o(g)} v_g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionStep {
    pub before: Leading,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reduction {
    pub v_h: SeriesVector,
    pub steps: usize,
    pub trace: Vec<ReductionStep>,
    pub g: Leading,
    /// Leading data of the reduced `v_h`.
    pub h: Leading,
    /// The step guard was hit before the indices separated.
    pub exhausted: bool,
}

pub(crate) fn real_ratio(c_h: Complex, c_g: Complex) -> Option<f64> {
    let r = c_h / c_g;
    (r.im.abs() <= REAL_RATIO_TOL * r.norm()).then_some(r.re)
}

/// Eliminates ℝ-dependent leading coefficients of `v_h` against `v_g` at a
/// shared essential index. Requires `o(g) ≤ o(h)`; callers swap `g` and `h`
/// (multiplication of `f` by `√−1`) when needed.
pub fn whitney_reduction(v_g: &SeriesVector, v_h: &SeriesVector) -> Result<Reduction> {
    let eps = ZERO_REL * v_g.scale().max(v_h.scale());
    let g = order_with_eps(v_g, Subset::empty(), eps)?;
    let mut vh = v_h.clone();
    let mut h = order_with_eps(&vh, Subset::empty(), eps)?;
    if h.order < g.order {
        return Err(Error::InvalidConfig(format!(
            "reduction needs o(g) <= o(h), got {} > {}",
            g.order, h.order
        )));
    }
    let guard = vh.truncation().max(0) as usize + 1;
    let mut trace = Vec::new();
    let mut exhausted = false;
    while h.index == g.index {
        let Some(ratio) = real_ratio(h.coeff, g.coeff) else {
            break;
        };
        if trace.len() >= guard {
            exhausted = true;
            break;
        }
        trace.push(ReductionStep { before: h, ratio });
        let shift = h.order - g.order;
        vh = vh.sub_scaled_shift(Complex::new(ratio, 0.0), shift, v_g);
        // The killed coefficient is zero by construction.
        let pos = h.index - vh.first_index;
        let comp = &mut vh.components[pos];
        *comp = comp.sub(&super::series::TruncatedSeries::monomial(
            comp.coeff(h.order),
            h.order,
            comp.truncation(),
        ));
        match order_with_eps(&vh, Subset::empty(), eps) {
            Ok(next) if next.order < vh.truncation() => h = next,
            _ => {
                exhausted = true;
                break;
            }
        }
    }
    Ok(Reduction {
        v_h: vh,
        steps: trace.len(),
        trace,
        g,
        h,
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::super::series::{TruncatedSeries, EXACT};
    use super::*;

    fn mono(re: f64, im: f64, e: i32) -> TruncatedSeries {
        TruncatedSeries::monomial(Complex::new(re, im), e, EXACT)
    }

    fn zero() -> TruncatedSeries {
        TruncatedSeries::zero(EXACT)
    }

    fn vector(comps: Vec<TruncatedSeries>) -> SeriesVector {
        SeriesVector::new(1, comps)
    }

    #[test]
    fn leading_data() {
        let v = vector(vec![mono(3.0, 0.0, 2), mono(5.0, 0.0, 2), zero()]);
        let l = order_and_essential_index(&v, Subset::empty()).unwrap();
        assert_eq!((l.order, l.index, l.coeff), (2, 2, Complex::new(5.0, 0.0)));

        let v = vector(vec![mono(1.0, 0.0, 3), mono(1.0, 0.0, 1)]);
        let l = order_and_essential_index(&v, Subset::empty()).unwrap();
        assert_eq!((l.order, l.index, l.coeff), (1, 2, Complex::new(1.0, 0.0)));

        let v = vector(vec![mono(1.0, 0.0, 1), mono(1.0, 0.0, 3)]);
        let l = order_and_essential_index(&v, Subset::empty()).unwrap();
        assert_eq!(l.index, 1);

        let l = order_and_essential_index(&v, Subset::from_indices([0])).unwrap();
        assert_eq!((l.order, l.index), (3, 2));

        assert_eq!(
            order_and_essential_index(&vector(vec![zero(), zero()]), Subset::empty()),
            Err(Error::ZeroSeries)
        );
    }

    #[test]
    fn distinct_indices_need_no_reduction() {
        let g = vector(vec![mono(1.0, 0.0, 1), zero()]);
        let h = vector(vec![zero(), mono(1.0, 0.0, 1)]);
        assert_eq!(whitney_reduction(&g, &h).unwrap().steps, 0);
    }

    #[test]
    fn one_real_step() {
        let g = vector(vec![mono(1.0, 0.0, 1), mono(1.0, 0.0, 2)]);
        let h = vector(vec![mono(2.0, 0.0, 1), mono(1.0, 0.0, 2)]);
        let r = whitney_reduction(&g, &h).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(r.trace[0].ratio, 2.0);
        assert_eq!(r.v_h.components[0].order(0.0), None);
        assert_eq!(
            r.v_h.components[1].terms().collect::<Vec<_>>(),
            vec![(2, Complex::new(-1.0, 0.0))]
        );
        assert_eq!((r.h.order, r.h.index), (2, 2));
    }

    #[test]
    fn non_real_ratio_stops() {
        let g = vector(vec![mono(1.0, 0.0, 1), mono(1.0, 0.0, 2)]);
        let h = vector(vec![mono(0.0, 1.0, 1), mono(1.0, 0.0, 2)]);
        assert_eq!(whitney_reduction(&g, &h).unwrap().steps, 0);
    }

    #[test]
    fn reduction_orders_increase() {
        // v_h = 2 v_g + 3 s v_g + (i s^2) e_1: two real steps, then stop.
        let g = vector(vec![mono(1.0, 0.0, 1), mono(1.0, 0.0, 4)]);
        let h = vector(vec![
            TruncatedSeries::from_terms(
                [(1, Complex::new(2.0, 0.0)), (2, Complex::new(3.0, 0.0)), (3, Complex::new(0.0, 1.0))],
                EXACT,
            ),
            TruncatedSeries::from_terms([(4, Complex::new(2.0, 0.0)), (5, Complex::new(3.0, 0.0))], EXACT),
        ]);
        let r = whitney_reduction(&g, &h).unwrap();
        assert_eq!(r.steps, 2);
        let orders: Vec<i32> = r.trace.iter().map(|s| s.before.order).collect();
        assert_eq!(orders, vec![1, 2]);
        assert_eq!((r.h.order, r.h.index), (3, 1));
        assert!(r.h.coeff.im != 0.0 && !r.exhausted);
    }
}
