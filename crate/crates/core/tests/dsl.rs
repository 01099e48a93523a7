mod common;

use common::*;
use proptest::prelude::*;
use sullivan::catalog;
use sullivan::dsl::{parse_algebra, parse_element, parse_morphism, print_algebra, print_morphism, ErrorKind};
use sullivan::endo::identity_images;
use sullivan::Q;

const A0: &str = "\
gen x1 : 4
gen x2 : 6
gen y1 : 27
gen y2 : 29
gen y3 : 31
gen z : 77
gen z' : 75
d y1 = x1^4 * x2^2
d y2 = x1^3*x2^3
d y3 = x1^2*x2^4
d z = x1*x2^3*y1*y2 - x1^2*x2^2*y1*y3 + x1^3*x2*y2*y3 + x2*x1^18 + x2^13
d z' = x1^19
";

#[test]
fn a0_presentation_parses() {
    let f = parse_algebra(A0).unwrap();
    let alg = &f.algebra;
    let z = alg.index_of("z").unwrap();
    assert_eq!(alg.differential(z).num_terms(), 5);
    let y1 = alg.index_of("y1").unwrap();
    let dy1 = alg.differential(y1);
    assert_eq!(dy1.num_terms(), 1);
    let (m, c) = dy1.terms().next().unwrap();
    assert_eq!(*m, monomial(alg, &[("x1", 4), ("x2", 2)]));
    assert_eq!(*c, Q::from_integer(1.into()));
    assert_eq!(*alg, catalog::load("A(0)").unwrap().algebra);
}

#[test]
fn inhomogeneous_differential_is_a_semantic_error() {
    let text = A0.replace("d y1 = x1^4 * x2^2", "d y1 = x1 + x2");
    let err = parse_algebra(&text).unwrap_err();
    assert_eq!(err.kind, ErrorKind::Semantic);
    assert_eq!(err.line, 8);
    assert!(err.to_string().starts_with("8:"), "{err}");
}

#[test]
fn wrong_degree_differential_is_reported() {
    let err = parse_algebra("gen x : 2\ngen y : 5\nd y = x^2\n").unwrap_err();
    assert_eq!(err.kind, ErrorKind::Semantic);
    assert_eq!(err.line, 3);
}

#[test]
fn odd_generator_squared_is_rejected() {
    let err = parse_algebra("gen a : 3\ngen m : 7\nd m = a^2*a^0*a\n").unwrap_err();
    assert_eq!(err.kind, ErrorKind::Semantic);
    // a product that merely vanishes is not an error
    let f = parse_algebra("gen a : 3\ngen b : 6\nvolume a*a\n").unwrap();
    assert!(f.volume.unwrap().is_zero());
}

#[test]
fn unknown_names_and_syntax_errors_carry_positions() {
    let err = parse_algebra("gen x : 2\nd y = x\n").unwrap_err();
    assert_eq!((err.kind, err.line), (ErrorKind::Semantic, 2));
    let err = parse_algebra("gen x : 2\ngen y : 5\nd y = (x^3\n").unwrap_err();
    assert_eq!((err.kind, err.line), (ErrorKind::Syntax, 3));
    assert!(err.col > 6, "{err}");
    let err = parse_algebra("gen x : 2\ngen y : 3\nd y = x ** x\n").unwrap_err();
    assert_eq!((err.kind, err.line, err.col), (ErrorKind::Syntax, 3, 10));
}

#[test]
fn precedence_and_odd_ordering() {
    let alg = parse_algebra("gen a : 3\ngen b : 3\ngen x : 2\n").unwrap().algebra;
    assert_eq!(parse_element(&alg, "b*a").unwrap(), parse_element(&alg, "-a*b").unwrap());
    assert_eq!(parse_element(&alg, "x^3^2").unwrap(), parse_element(&alg, "x^9").unwrap());
    assert_eq!(parse_element(&alg, "2*x^3").unwrap(), parse_element(&alg, "x^3 + x*x^2").unwrap());
    assert_eq!(parse_element(&alg, "2*x^2 - x*x + 1/2*x^2").unwrap(), parse_element(&alg, "3/2*x^2").unwrap());
    assert_eq!(parse_element(&alg, "(x + x)^2").unwrap(), parse_element(&alg, "4*x^2").unwrap());
}

#[test]
fn catalog_degrees() {
    let degs = |r: &str| catalog::load(r).unwrap().algebra.generators().iter().map(|g| g.degree).collect::<Vec<_>>();
    assert_eq!(degs("A(0)"), vec![4, 6, 27, 29, 31, 77, 75]);
    assert_eq!(degs("prop1(4,2)"), vec![2, 4, 11, 11, 17, 19]);
    assert_eq!(degs("ex02"), vec![3, 3, 5, 7]);
}

#[test]
fn catalog_parameter_ranges() {
    assert!(catalog::load("prop3(4)").is_err());
    assert!(catalog::load("prop3(5)").is_ok());
    assert!(catalog::load("prop1(1,2)").is_err());
    assert!(catalog::load("prop2(3)").is_err());
    assert!(catalog::load("A(-1)").is_err());
    assert!(catalog::load("nonsense").is_err());
    assert!(catalog::load("ex02(1)").is_err());
}

#[test]
fn print_parse_round_trip_on_the_catalog() {
    for (name, _) in catalog_algebras() {
        let f = catalog::load(&name).unwrap();
        let text = print_algebra(&f.algebra, f.volume.as_ref());
        let g = parse_algebra(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        assert_eq!(g.algebra, f.algebra, "{name}");
        assert_eq!(g.volume, f.volume, "{name}");
        assert_eq!(g.algebra.name(), f.algebra.name());
    }
}

#[test]
fn morphism_round_trip() {
    let alg = catalog::load("prop3(5)").unwrap().algebra;
    let id = identity_images(&alg);
    assert_eq!(parse_morphism(&alg, &print_morphism(&alg, &id)).unwrap(), id);
    assert!(parse_morphism(&alg, "f x1 = x1\n").is_err());
    assert!(parse_morphism(&alg, &print_morphism(&alg, &id).replace("f x1 = x1", "f x1 = x2")).is_err());
}

#[test]
fn element_print_parse_round_trip() {
    let pool = property_pool();
    let strat = (any::<usize>(), any::<u32>(), raw_terms(), 1i64..=7);
    runner(500)
        .run(&strat, |(idx, n, (p, c), den)| {
            let (alg, cap) = &pool[idx % pool.len()];
            let e = element_from(alg.gca(), n % (cap + 1), &p, &c).scale(&Q::new(1.into(), den.into()));
            let text = alg.gca().fmt_element(&e);
            prop_assert_eq!(parse_element(alg, &text).unwrap(), e);
            Ok(())
        })
        .unwrap();
}
