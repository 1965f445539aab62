use std::collections::BTreeSet;

use mixed_newton::family::{
    check_admissibility, check_newton_constancy, enumerate_strata, pullback_covering, AdmissibilityConfig,
    CoveringSpec, FamilyPolynomial, TSamplingPolicy,
};
use mixed_newton::newton::classify_subspaces;
use mixed_newton::{Complex, MixedPolynomial};
use proptest::prelude::*;

const F51: &str = "~z1^2*z2^3 + z1^3*~z2^2 + t*z1^2*z2^4";
const F52: &str = "~z1^2*z2^3 + z1^3*~z2^2 + (1+t)*z1^3*~z2^3";
const EX23: &str = "~z2^4 + z1*z2^2 + z1^2*~z1";

fn fam(text: &str, n: usize) -> FamilyPolynomial {
    FamilyPolynomial::parse(text, n).unwrap()
}

fn zero() -> Complex {
    Complex::new(0.0, 0.0)
}

#[test]
fn example52_specializations() {
    let f = fam(F52, 2);
    assert_eq!(f.specialize(Complex::new(-1.0, 0.0)).len(), 2);
    assert_eq!(f.specialize(zero()).len(), 3);
    let r = check_newton_constancy(&f, &TSamplingPolicy::default()).unwrap();
    assert!(r.constant, "{:?}", r.diagnostics);
}

#[test]
fn example52_is_admissible() {
    let r = check_admissibility(&fam(F52, 2), 1.0, &TSamplingPolicy::default(), &AdmissibilityConfig::default())
        .unwrap();
    assert!(r.verdict.passes(), "{:?}", r.failures);
    assert!(r.per_t.iter().all(|m| m.nondegenerate));
}

#[test]
fn convenient_constant_family_takes_fast_path() {
    let f = FamilyPolynomial::constant(&MixedPolynomial::parse(EX23, 2).unwrap());
    let r = check_admissibility(&f, 1.0, &TSamplingPolicy::default(), &AdmissibilityConfig::default()).unwrap();
    assert!(r.convenient_fast_path);
    assert!(r.verdict.passes(), "{:?}", r.failures);
    assert_eq!(r.min_r_nc, f64::INFINITY);
}

#[test]
fn strata_of_the_corpus() {
    let names = |f: &FamilyPolynomial| -> BTreeSet<String> {
        enumerate_strata(f).unwrap().iter().map(|s| s.to_string()).collect()
    };
    let expected: BTreeSet<String> = ["A_{1,2}", "B_{1,2}", "C_{}", "C_{1}", "C_{2}"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(names(&fam(F51, 2)), expected);
    let ex23 = names(&fam(EX23, 2));
    assert!(ex23.contains("C_{}") && ex23.len() == 7, "{:?}", ex23);
    let lin: BTreeSet<String> = ["A_{1}", "B_{1}", "C_{}"].iter().map(|s| s.to_string()).collect();
    assert_eq!(names(&fam("z1", 1)), lin);
    assert!(enumerate_strata(&fam(F51, 2)).unwrap().iter().filter(|s| s.t_axis).count() == 1);
}

#[test]
fn pullback_of_convenient_family() {
    let f = fam("z1^2 + z2^3", 2);
    let spec = CoveringSpec::new(vec![2, 2], vec![1, 1], 3).unwrap();
    let g = pullback_covering(&f, &spec).unwrap();
    assert_eq!(g.to_string(), fam("z1^4*~z1^2 + z2^6*~z2^3", 2).to_string());
    let v = |f: &FamilyPolynomial| classify_subspaces(&f.specialize(zero())).unwrap().vanishing;
    assert_eq!(v(&g), v(&f));
    let r = check_admissibility(&g, 0.9, &TSamplingPolicy::default(), &AdmissibilityConfig::default()).unwrap();
    assert!(r.verdict.passes(), "{:?}", r.failures);
}

#[test]
fn larger_sampling_disk_only_loses_admissibility() {
    let f = fam("z1^2 + z2^2 + t*z1*z2", 2);
    let cfg = AdmissibilityConfig {
        smoothness_samples: 40,
        ..AdmissibilityConfig::default()
    };
    let verdicts: Vec<bool> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&tm| {
            let r = check_admissibility(&f, 1.0, &TSamplingPolicy::with_t_max(tm), &cfg).unwrap();
            r.verdict.passes()
        })
        .collect();
    // f_2 = (z1 + z2)^2.
    assert!(verdicts[0]);
    assert!(!verdicts[2]);
    assert!(verdicts.windows(2).all(|w| w[0] || !w[1]));
}

fn holomorphic_family() -> impl Strategy<Value = (usize, FamilyPolynomial)> {
    (1usize..=3).prop_flat_map(|n| {
        let term = (proptest::collection::vec(0u32..=5, n), 1i32..=4, 0usize..=1);
        proptest::collection::vec(term, 1..=5).prop_filter_map("degree above five", move |terms| {
            let mut parts = Vec::new();
            for (exps, c, tpow) in terms {
                if exps.iter().sum::<u32>() > 5 || exps.iter().all(|&e| e == 0) {
                    continue;
                }
                let mono: Vec<String> = exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| format!("z{}^{}", i + 1, e))
                    .collect();
                let coeff = if tpow == 1 { format!("({}*t)", c) } else { c.to_string() };
                parts.push(format!("{}*{}", coeff, mono.join("*")));
            }
            if parts.is_empty() {
                return None;
            }
            FamilyPolynomial::parse(&parts.join(" + "), n).ok().map(|f| (n, f))
        })
    })
}

fn covering(n: usize) -> impl Strategy<Value = CoveringSpec> {
    (1u32..=4).prop_flat_map(move |delta| {
        proptest::collection::vec(0u32..delta, n).prop_filter_map("nu > mu", move |mu| {
            CoveringSpec::new(mu.iter().map(|m| delta - m).collect(), mu, delta).ok()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn pullback_scales_supports((n, f, spec) in holomorphic_family().prop_flat_map(|(n, f)| (Just(n), Just(f), covering(n)))) {
        let g = pullback_covering(&f, &spec).unwrap();
        let support = |f: &FamilyPolynomial| -> BTreeSet<Vec<i64>> {
            f.terms()
                .map(|(k, _)| (0..n).map(|i| (k.nu[i] + k.mu[i]) as i64).collect())
                .collect()
        };
        let scaled: BTreeSet<Vec<i64>> = support(&f)
            .into_iter()
            .map(|p| p.into_iter().map(|x| x * spec.delta as i64).collect())
            .collect();
        prop_assert_eq!(support(&g), scaled);
        let v = |f: &FamilyPolynomial| classify_subspaces(&f.specialize(zero())).unwrap().vanishing;
        prop_assert_eq!(v(&g), v(&f));
    }
}
