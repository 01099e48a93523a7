#![allow(dead_code)]

use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use sullivan::catalog;
use sullivan::cohomology;
use sullivan::linalg::Echelon;
use sullivan::{Element, FreeGca, Generator, Monomial, SullivanAlgebra, Q};

pub const SEED: [u8; 32] = *b"sullivan-property-suite-seed-001";

/// Every catalog entry at its default parameters, plus the other members
/// of the `A` family used elsewhere.
pub const CATALOG_REFS: &[&str] = &[
    "A(0)",
    "A(1)",
    "A(2)",
    "CL-base",
    "CL-fibered",
    "CL-reduced",
    "prop1(4,2)",
    "prop2(4)",
    "prop3(5)",
    "ex02",
    "CP(4)",
    "sphere(4)",
];

pub fn catalog_algebras() -> Vec<(String, SullivanAlgebra)> {
    CATALOG_REFS.iter().map(|r| (r.to_string(), catalog::load(r).unwrap().algebra)).collect()
}

pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

/// Number of monomials in each degree `0..=max`, from the generating
/// function `prod (1 + t^odd) * prod 1/(1 - t^even)`.
pub fn basis_count_oracle(degrees: &[u32], max: u32) -> Vec<u64> {
    let n = max as usize;
    let mut series = vec![0u64; n + 1];
    series[0] = 1;
    for &d in degrees {
        let d = d as usize;
        if d == 0 || d > n {
            continue;
        }
        if d % 2 == 1 {
            for k in (d..=n).rev() {
                series[k] += series[k - d];
            }
        } else {
            for k in d..=n {
                series[k] += series[k - d];
            }
        }
    }
    series
}

/// Rank by dense Gaussian elimination; independent of the sparse echelon code.
pub fn dense_rank(rows: usize, cols: &[std::collections::BTreeMap<usize, Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = vec![vec![Q::zero(); cols.len()]; rows];
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c {
            m[*i][j] = v.clone();
        }
    }
    let mut rank = 0;
    for col in 0..cols.len() {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = &m[r][col] * &inv;
                for k in col..cols.len() {
                    let t = &f * &m[rank][k];
                    m[r][k] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Element of degree `n` built from raw picks: term `k` is
/// `coeffs[k] * basis[picks[k] % len]`.
pub fn element_from(gca: &FreeGca, n: u32, picks: &[usize], coeffs: &[i64]) -> Element {
    let basis = gca.basis_of_degree(n);
    if basis.is_empty() {
        return Element::zero();
    }
    let mut e = Element::zero();
    for (p, c) in picks.iter().zip(coeffs) {
        e.add_term(basis[p % basis.len()].clone(), Q::from_integer((*c).into()));
    }
    e
}

pub fn raw_terms() -> impl Strategy<Value = (Vec<usize>, Vec<i64>)> {
    (prop::collection::vec(any::<usize>(), 1..5), prop::collection::vec(-5i64..=5, 4))
}

pub fn free_gca_strategy() -> impl Strategy<Value = FreeGca> {
    prop::collection::vec(2u32..=7, 2..5).prop_map(|ds| {
        FreeGca::new(ds.iter().enumerate().map(|(i, d)| Generator::new(format!("g{i}"), *d)).collect()).unwrap()
    })
}

/// Small algebras for the differential properties; degrees are capped
/// per algebra so the random elements stay cheap.
pub fn property_pool() -> Vec<(SullivanAlgebra, u32)> {
    [("ex02", 18), ("sphere(4)", 14), ("CP(2)", 14), ("prop3(5)", 30), ("A(0)", 40), ("CL-base", 30), ("CL-fibered", 24)]
        .iter()
        .map(|(r, n)| (catalog::load(r).unwrap().algebra, *n))
        .collect()
}

pub fn sign(odd: bool) -> Q {
    if odd {
        -Q::one()
    } else {
        Q::one()
    }
}

/// Kernel of `d` in degree `n` via the tracked echelon, checked to map to zero.
pub fn kernel_dim(alg: &SullivanAlgebra, n: u32) -> usize {
    let dm = cohomology::d_matrix(alg, n);
    let ech = Echelon::from_columns(dm.columns.iter(), true);
    for k in ech.kernel() {
        let e = Element::from_terms(k.iter().map(|(j, c)| (dm.domain[*j].clone(), c.clone())));
        assert!(alg.d(&e).is_zero(), "kernel vector is not closed");
    }
    ech.kernel().len()
}

pub fn monomial(alg: &SullivanAlgebra, pairs: &[(&str, u32)]) -> Monomial {
    let mut exps = vec![0; alg.ngens()];
    for (name, e) in pairs {
        exps[alg.index_of(name).unwrap()] = *e;
    }
    Monomial::from_exponents(exps)
}

fn pool_element(pool: &[(SullivanAlgebra, u32)], idx: usize, n: u32, picks: &[usize], coeffs: &[i64]) -> (usize, u32, Element) {
    let (alg, cap) = &pool[idx % pool.len()];
    let n = n % (cap + 1);
    (idx % pool.len(), n, element_from(alg.gca(), n, picks, coeffs))
}

/// `ab = (-1)^{|a||b|} ba` in random free algebras.
pub fn check_koszul(cases: u32) -> Result<(), String> {
    let strat = (free_gca_strategy(), 0u32..=12, 0u32..=12, raw_terms(), raw_terms());
    runner(cases)
        .run(&strat, |(gca, n, m, (pa, ca), (pb, cb))| {
            let a = element_from(&gca, n, &pa, &ca);
            let b = element_from(&gca, m, &pb, &cb);
            let ba = gca.mul(&b, &a).scale(&sign(n % 2 == 1 && m % 2 == 1));
            prop_assert_eq!(gca.mul(&a, &b), ba);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn check_associativity(cases: u32) -> Result<(), String> {
    let strat = (free_gca_strategy(), 0u32..=8, 0u32..=8, 0u32..=8, raw_terms(), raw_terms(), raw_terms());
    runner(cases)
        .run(&strat, |(gca, n, m, k, (pa, ca), (pb, cb), (pc, cc))| {
            let a = element_from(&gca, n, &pa, &ca);
            let b = element_from(&gca, m, &pb, &cb);
            let c = element_from(&gca, k, &pc, &cc);
            prop_assert_eq!(gca.mul(&gca.mul(&a, &b), &c), gca.mul(&a, &gca.mul(&b, &c)));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `d(ab) = d(a)b + (-1)^{|a|} a d(b)` on catalog algebras.
pub fn check_leibniz(cases: u32) -> Result<(), String> {
    let pool = property_pool();
    let strat = (any::<usize>(), any::<u32>(), any::<u32>(), raw_terms(), raw_terms());
    runner(cases)
        .run(&strat, |(idx, n, m, (pa, ca), (pb, cb))| {
            let (i, n, a) = pool_element(&pool, idx, n, &pa, &ca);
            let (_, _, b) = pool_element(&pool, i, m, &pb, &cb);
            let alg = &pool[i].0;
            let gca = alg.gca();
            let lhs = alg.d(&gca.mul(&a, &b));
            let rhs = gca.mul(&alg.d(&a), &b).add(&gca.mul(&a, &alg.d(&b)).scale(&sign(n % 2 == 1)));
            prop_assert_eq!(lhs, rhs);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn check_d_squared(cases: u32) -> Result<(), String> {
    let pool = property_pool();
    let strat = (any::<usize>(), any::<u32>(), raw_terms());
    runner(cases)
        .run(&strat, |(idx, n, (p, c))| {
            let (i, _, x) = pool_element(&pool, idx, n, &p, &c);
            let alg = &pool[i].0;
            prop_assert!(alg.d(&alg.d(&x)).is_zero());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `dim C^n = rank d_n + dim ker d_n`, with the rank from a dense
/// elimination and the kernel from the sparse one.
pub fn check_rank_nullity(cases: u32) -> Result<(), String> {
    let pool = property_pool();
    let strat = (any::<usize>(), any::<u32>());
    runner(cases)
        .run(&strat, |(idx, n)| {
            let (alg, cap) = &pool[idx % pool.len()];
            let n = n % (cap + 1);
            let dm = cohomology::d_matrix(alg, n);
            let r = dense_rank(dm.codomain.len(), &dm.columns);
            prop_assert_eq!(r, dm.rank());
            prop_assert_eq!(r + kernel_dim(alg, n), dm.domain.len());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Exact elements come with a replaying preimage; closed non-exact ones
/// with a cocycle that kills every exact element and not the target.
pub fn check_witness_replay(cases: u32) -> Result<(), String> {
    let pool = property_pool();
    let strat = (any::<usize>(), any::<u32>(), raw_terms(), prop::collection::vec(-3i64..=3, 3));
    runner(cases)
        .run(&strat, |(idx, n, (p, c), class_coeffs)| {
            let (i, n, w) = pool_element(&pool, idx, n, &p, &c);
            let alg = &pool[i].0;
            let e = alg.d(&w);
            match cohomology::is_exact(alg, &e) {
                Ok(cohomology::Exactness::Exact(wit)) => prop_assert!(wit.replays(alg)),
                other => prop_assert!(false, "d(w) reported as {:?}", other),
            }
            let target = n + 1;
            let classes = cohomology::cohomology_basis(alg, target);
            let mut z = e.clone();
            for (rep, k) in classes.iter().zip(&class_coeffs) {
                z.add_assign(&rep.scale(&Q::from_integer((*k).into())));
            }
            if class_coeffs.iter().take(classes.len()).any(|k| *k != 0) {
                match cohomology::is_exact(alg, &z) {
                    Ok(cohomology::Exactness::NotExact(coc)) => {
                        prop_assert!(coc.annihilates_exact(alg));
                        prop_assert!(!coc.eval(&z).is_zero());
                    }
                    other => prop_assert!(false, "class combination reported as {:?}", other),
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Sign and support of `a * b` by sorting the concatenated word of odd
/// letters and counting transpositions.
pub fn koszul_oracle(odd: &[bool], a: &[u32], b: &[u32]) -> Option<(bool, Vec<u32>)> {
    let word: Vec<usize> = [a, b]
        .iter()
        .flat_map(|m| m.iter().enumerate().filter(|(i, e)| odd[*i] && **e > 0).map(|(i, _)| i).collect::<Vec<_>>())
        .collect();
    let mut inversions = 0;
    for i in 0..word.len() {
        for j in i + 1..word.len() {
            if word[i] == word[j] {
                return None;
            }
            if word[i] > word[j] {
                inversions += 1;
            }
        }
    }
    Some((inversions % 2 == 1, a.iter().zip(b).map(|(x, y)| x + y).collect()))
}

pub fn check_monomial_signs(cases: u32) -> Result<(), String> {
    let strat = prop::collection::vec((2u32..=7, 0u32..=2, 0u32..=2), 1..7);
    runner(cases)
        .run(&strat, |gens| {
            let gca = FreeGca::new(gens.iter().enumerate().map(|(i, (d, _, _))| Generator::new(format!("g{i}"), *d)).collect())
                .unwrap();
            let odd: Vec<bool> = gens.iter().map(|(d, _, _)| d % 2 == 1).collect();
            let clamp = |e: u32, o: bool| if o { e.min(1) } else { e };
            let a: Vec<u32> = gens.iter().zip(&odd).map(|((_, x, _), o)| clamp(*x, *o)).collect();
            let b: Vec<u32> = gens.iter().zip(&odd).map(|((_, _, y), o)| clamp(*y, *o)).collect();
            let got = gca
                .mul_monomials(&Monomial::from_exponents(a.clone()), &Monomial::from_exponents(b.clone()))
                .map(|(s, m)| (s, m.exponents().to_vec()));
            prop_assert_eq!(got, koszul_oracle(&odd, &a, &b));
            Ok(())
        })
        .map_err(|e| e.to_string())
}
