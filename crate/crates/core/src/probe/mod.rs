//! Arc probes. Real-analytic arcs `s ↦ (t(s), z(s))` are handled as
//! truncated Laurent series in `s`; compositions, gradient series, the
//! essential-index reduction and the limit tangent spaces of Whitney (b)
//! and Thom `a_f` are computed on them and cross-checked numerically at
//! `s = 2^{-k}`. Smoothness and nearby-fibre spot-checks live here as well.

mod arc;
mod limits;
mod reduction;
mod series;
mod spot;

pub use arc::{
    compose, compose_family, gradient_series, gradient_series_family, Arc, ArcJson, ArcPairJson,
    GradientSeries, TermJson,
};
pub use limits::{
    check_thom_af, check_whitney_b, LimitReport, NumericSample, ProbeVerdict, ThomOptions, WhitneyOptions,
    SAMPLE_EXPONENTS, TRUNCATION_MARGIN,
};
pub use reduction::{
    order_and_essential_index, whitney_reduction, Leading, Reduction, ReductionStep, REAL_RATIO_TOL, ZERO_REL,
};
pub use series::{SeriesVector, TruncatedSeries, EXACT};
pub use spot::{
    euler_residual, sphere_transversality_residual, spotcheck_regularity, SpotMode, SpotPoint, SpotcheckConfig,
    SpotcheckReport,
};
