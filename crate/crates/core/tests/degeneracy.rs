use mixed_newton::degeneracy::{
    check_strong_nondegeneracy, monomial_rule, refine_from, search_face, search_torus_critical_points,
    FaceStatus, SearchConfig,
};
use mixed_newton::newton::{build_polyhedron, face_function, face_of_weight};
use mixed_newton::{Complex, MixedPolynomial, Subset};

fn poly(text: &str, n: usize) -> MixedPolynomial {
    MixedPolynomial::parse(text, n).unwrap()
}

#[test]
fn example23_is_strongly_nondegenerate() {
    let f = poly("~z2^4 + z1*z2^2 + z1^2*~z1", 2);
    let report = check_strong_nondegeneracy(&f, &SearchConfig::default()).unwrap();
    assert_eq!(report.faces.len(), 5);
    assert!(report.passes);
    for v in &report.faces {
        let face = v.face.as_ref().unwrap();
        if face.dim == 0 {
            assert_eq!(v.status, FaceStatus::ProvenNondegenerate);
        } else {
            assert_eq!(v.status, FaceStatus::NoCriticalPointFound);
            assert!(v.min_residual_seen > 1e-3, "{}", v.min_residual_seen);
            assert!(v.starts >= 512);
            assert!(!v.low_margin);
        }
    }
}

#[test]
fn family_member_is_strongly_nondegenerate() {
    let f = poly("~z1^2*z2^3 + z1^3*~z2^2 + 0.5*z1^2*z2^4", 2);
    let report = check_strong_nondegeneracy(&f, &SearchConfig::default()).unwrap();
    assert_eq!(report.faces.len(), 3);
    assert!(report.passes);
}

#[test]
fn sphere_without_fast_path() {
    let cfg = SearchConfig {
        monomial_fast_path: false,
        ..SearchConfig::default()
    };
    let r = check_strong_nondegeneracy(&poly("z1*~z1", 1), &cfg).unwrap();
    assert!(!r.passes);
    match &r.faces[0].status {
        FaceStatus::CriticalPointFound { witness } => {
            assert!(witness.residual < 1e-9);
            assert!((witness.lambda - Complex::new(1.0, 0.0)).norm() < 1e-6);
        }
        other => panic!("{:?}", other),
    }
}

/// Weighted scaling `t∘z = (t^{w_i} z_i)` maps critical points of a
/// radially homogeneous face function to critical points.
#[test]
fn witnesses_survive_weighted_scaling() {
    // Radially homogeneous of degree 4 for w = (1, 2).
    let f = poly("z1^2*~z1^2 + i*z2*~z2 + z1^2*z2", 2);
    let p = build_polyhedron(&f).unwrap();
    let face = face_of_weight(&p, &[1, 2]).unwrap();
    let fd = face_function(&f, &face).unwrap();
    let cfg = SearchConfig {
        monomial_fast_path: false,
        multistarts: 64,
        ..SearchConfig::default()
    };
    let v = search_face(&fd, &face, &cfg).unwrap();
    let w = v.status.witness().expect("degenerate face must yield a witness").clone();
    for t in [0.5f64, 2.0] {
        let z: Vec<Complex> = w
            .z
            .iter()
            .zip(&face.weight)
            .map(|(z, &wi)| z * t.powi(wi as i32))
            .collect();
        let again = refine_from(&fd, &z, &cfg, Some(&face.weight)).unwrap();
        assert!(again.residual < cfg.tol_accept, "t = {}: {}", t, again.residual);
    }
}

#[test]
fn search_is_deterministic() {
    let f = poly("~z2^4 + z1*z2^2", 2);
    let cfg = SearchConfig {
        multistarts: 128,
        seed: 99,
        ..SearchConfig::default()
    };
    let a = search_torus_critical_points(&f, &cfg).unwrap();
    let b = search_torus_critical_points(&f, &cfg).unwrap();
    assert_eq!(a.min_residual_seen.to_bits(), b.min_residual_seen.to_bits());
    assert_eq!(a, b);
}

/// If `f` passes and `I ∈ 𝓘_nv`, then `f|_{ℂ^I}` passes as a function of the
/// `I`-variables.
#[test]
fn restrictions_stay_nondegenerate() {
    let cfg = SearchConfig {
        multistarts: 128,
        ..SearchConfig::default()
    };
    for text in ["~z2^4 + z1*z2^2 + z1^2*~z1", "~z1^2*z2^3 + z1^3*~z2^2 + 0.5*z1^2*z2^4"] {
        let f = poly(text, 2);
        assert!(check_strong_nondegeneracy(&f, &cfg).unwrap().passes);
        for i in [Subset::from_one_based([1]), Subset::from_one_based([2])] {
            let r = f.restrict(i);
            if r.is_zero() {
                continue;
            }
            // Drop the inert variable by re-parsing in one variable.
            let k = i.iter().next().unwrap() + 1;
            let text = r.to_string().replace(&format!("z{}", k), "z1");
            let g = poly(&text, 1);
            assert!(check_strong_nondegeneracy(&g, &cfg).unwrap().passes, "{}", g);
        }
    }
}

#[test]
fn monomial_rule_matches_definition_on_vertices() {
    let f = poly("~z2^4 + z1*z2^2 + z1^2*~z1", 2);
    for m in f.monomials() {
        let g = MixedPolynomial::from_terms(2, [(m.coeff, m.key.nu.clone(), m.key.mu.clone())]).unwrap();
        assert_eq!(monomial_rule(&g).unwrap(), FaceStatus::ProvenNondegenerate);
    }
}
