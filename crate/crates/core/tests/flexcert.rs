mod common;

use common::*;
use proptest::prelude::*;
use sullivan::catalog;
use sullivan::cohomology::{find_volume_form, VolumeForm};
use sullivan::endo::verify_morphism;
use sullivan::flexcert::*;
use sullivan::{SullivanAlgebra, Q};

fn load(name: &str) -> (SullivanAlgebra, VolumeForm) {
    let alg = catalog::load(name).unwrap().algebra;
    let cert = alg.ellipticity_certificate().unwrap();
    let vol = find_volume_form(&alg, &cert).unwrap();
    (alg, vol)
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

const GRADED: [&str; 7] = ["ex02", "CP(1)", "CP(4)", "sphere(2)", "sphere(4)", "prop1(4,2)", "prop3(5)"];

#[test]
fn two_stage_implies_the_condition() {
    for name in CATALOG_REFS.iter().chain(GRADED.iter()) {
        let alg = catalog::load(name).unwrap().algebra;
        if let Some(g) = two_stage_grading(&alg) {
            assert_eq!(check_prop4_condition(&alg, &g), Ok(()), "{name}");
        }
    }
}

#[test]
fn monomial_differentials_admit_a_grading() {
    for name in CATALOG_REFS.iter().chain(GRADED.iter()) {
        let alg = catalog::load(name).unwrap().algebra;
        if monomial_differential_check(&alg).is_ok() {
            assert!(construct_lower_grading(&alg).is_ok(), "{name}");
        }
    }
}

#[test]
fn two_stage_scaling_is_the_word_length_convention() {
    // Q scaled by 2^deg and P by 2^(deg+1), built directly from the generator lists
    for name in ["prop1(4,2)", "prop2(4)", "prop3(5)", "CP(4)", "sphere(4)", "CL-reduced"] {
        let (alg, vol) = load(name);
        let Some((qs, ps)) = two_stage_decomposition(&alg) else { continue };
        let mut images = vec![None; alg.ngens()];
        for &v in &qs {
            images[v] = Some(alg.generator_element(v).scale(&q(1 << alg.generators()[v].degree)));
        }
        for &v in &ps {
            images[v] = Some(alg.generator_element(v).scale(&q(1 << (alg.generators()[v].degree + 1))));
        }
        let images: Vec<_> = images.into_iter().map(Option::unwrap).collect();
        let g = two_stage_grading(&alg).unwrap();
        assert_eq!(scaling_images(&alg, &g, &q(2)), images, "{name}");
        let c = verify_morphism(&alg, &images, &vol);
        assert!(c.valid, "{name}");
        let cert = scaling_certificate(&alg, &g, &vol).unwrap();
        assert_eq!(c.degree, Some(cert.degree.clone()));
        assert!(cert.degree > q(1), "{name}");
    }
}

#[test]
fn ex02_multiples() {
    let (alg, vol) = load("ex02");
    let g = construct_lower_grading(&alg).unwrap();
    let cert = scaling_certificate(&alg, &g, &vol).unwrap();
    // a*b*n*m: lower 0+0+1+2 plus degree 3+3+5+7
    assert_eq!(cert.exponent, 21);
    assert_eq!(cert.degree, q(2097152));
    let checks = multiple_family_verify(&alg, &cert, &vol, &[1, 2, 3]);
    for (c, expected) in checks.iter().zip([q(2).pow(21), q(4).pow(21), q(6).pow(21)]) {
        assert!(c.passed(), "{c:?}");
        assert_eq!(c.degree, Some(expected));
        assert!(c.classes_checked >= 8);
    }
}

#[test]
fn prop1_second_multiple() {
    let (alg, vol) = load("prop1(4,2)");
    let g = two_stage_grading(&alg).unwrap();
    let cert = scaling_certificate(&alg, &g, &vol).unwrap();
    let checks = multiple_family_verify(&alg, &cert, &vol, &[2]);
    assert!(checks[0].passed(), "{:?}", checks[0]);
    assert_eq!(checks[0].degree, Some(q(4).pow(cert.exponent as i32)));
}

#[test]
fn projective_spaces_scale_by_powers_of_four() {
    for n in 1..=4i32 {
        let (alg, vol) = load(&format!("CP({n})"));
        let g = construct_lower_grading(&alg).unwrap();
        let cert = scaling_certificate(&alg, &g, &vol).unwrap();
        // f(x) = 4x and the top class is [x^(2n)]
        assert_eq!(cert.degree, q(4).pow(2 * n), "CP({n})");
    }
}

#[test]
fn sphere_scaling() {
    let (alg, vol) = load("sphere(2)");
    let g = construct_lower_grading(&alg).unwrap();
    let cert = scaling_certificate(&alg, &g, &vol).unwrap();
    assert_eq!(cert.degree, q(4));
    let (alg, vol) = load("sphere(4)");
    let g = construct_lower_grading(&alg).unwrap();
    assert_eq!(scaling_certificate(&alg, &g, &vol).unwrap().degree, q(16));
}

#[test]
fn a0_is_not_certified() {
    let (alg, vol) = load("A(0)");
    let g = construct_lower_grading(&alg).unwrap();
    assert_eq!(scaling_certificate(&alg, &g, &vol), Err(FlexError::Condition(5)));
}

#[test]
fn differential_lowers_the_grading_by_one() {
    let pool: Vec<(SullivanAlgebra, LowerGrading)> = GRADED
        .iter()
        .map(|name| {
            let alg = catalog::load(name).unwrap().algebra;
            let g = construct_lower_grading(&alg)
                .ok()
                .filter(|g| check_prop4_condition(&alg, g).is_ok())
                .or_else(|| two_stage_grading(&alg))
                .unwrap();
            assert_eq!(check_prop4_condition(&alg, &g), Ok(()), "{name}");
            (alg, g)
        })
        .collect();
    let strategy = (0..pool.len(), 0u32..40, any::<prop::sample::Index>());
    runner(1000)
        .run(&strategy, |(which, n, pick)| {
            let (alg, g) = &pool[which];
            let basis = alg.gca().basis_of_degree(n);
            if basis.is_empty() {
                return Ok(());
            }
            let m = &basis[pick.index(basis.len())];
            let l = g.of_monomial(m);
            for t in alg.d_monomial(m).monomials() {
                prop_assert_eq!(g.of_monomial(t) + 1, l);
            }
            Ok(())
        })
        .unwrap();
}
