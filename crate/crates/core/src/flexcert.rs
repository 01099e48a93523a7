//! Flexibility certificates from a lower grading of the generators.
//!
//! When the differential lowers a grading `V = V_0 + V_1 + ...` by exactly
//! one, the map `v -> b^(i+j) v` (`i` the lower degree, `j` the degree of
//! `v`) commutes with `d`, and its degree grows with `b`.

use crate::cohomology::VolumeForm;
use crate::endo::verify_morphism;
use crate::gca::{Element, Monomial};
use crate::linalg::{Echelon, SparseVec};
use crate::rational::{pow_q, Q};
use crate::sullivan::SullivanAlgebra;
use num_traits::Zero;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlexError {
    #[error("no lower grading: the differential of generator {0} never becomes assignable")]
    NoGrading(usize),
    #[error("lower-grading condition fails at generator {0}")]
    Condition(usize),
    #[error("scaling map fails to commute with d at generator {0}")]
    NotAMorphism(usize),
    #[error("scaling map has degree zero")]
    ZeroDegree,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerGrading {
    pub lower: Vec<u32>,
}

impl LowerGrading {
    pub fn of_monomial(&self, m: &Monomial) -> u32 {
        m.support().map(|(g, e)| e * self.lower[g]).sum()
    }

    /// Lower degree of an element, if all its monomials agree.
    pub fn of_element(&self, e: &Element) -> Option<u32> {
        let mut it = e.monomials().map(|m| self.of_monomial(m));
        let first = it.next()?;
        it.all(|x| x == first).then_some(first)
    }
}

/// First generator whose differential has more than one term.
pub fn monomial_differential_check(alg: &SullivanAlgebra) -> Result<(), usize> {
    match alg.differentials().iter().position(|d| d.num_terms() > 1) {
        Some(g) => Err(g),
        None => Ok(()),
    }
}

/// Closed generators get 0; any other generator gets one more than the
/// largest lower degree among the generators in its differential.
pub fn construct_lower_grading(alg: &SullivanAlgebra) -> Result<LowerGrading, FlexError> {
    let n = alg.ngens();
    let mut lower: Vec<Option<u32>> =
        alg.differentials().iter().map(|d| if d.is_zero() { Some(0) } else { None }).collect();
    loop {
        let mut progress = false;
        for g in 0..n {
            if lower[g].is_some() {
                continue;
            }
            let mut max = 0;
            let mut ready = true;
            for m in alg.differential(g).monomials() {
                for (h, _) in m.support() {
                    match lower[h] {
                        Some(l) => max = max.max(l),
                        None => ready = false,
                    }
                }
            }
            if ready {
                lower[g] = Some(max + 1);
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    match lower.iter().position(Option::is_none) {
        Some(g) => Err(FlexError::NoGrading(g)),
        None => Ok(LowerGrading { lower: lower.into_iter().map(Option::unwrap).collect() }),
    }
}

/// Every monomial of `dv` must have lower degree `lower(v) - 1`.
pub fn check_prop4_condition(alg: &SullivanAlgebra, g: &LowerGrading) -> Result<(), usize> {
    for (v, dv) in alg.differentials().iter().enumerate() {
        if dv.monomials().any(|m| g.of_monomial(m) + 1 != g.lower[v]) {
            return Err(v);
        }
    }
    Ok(())
}

/// `(Q, P)` with `Q` the closed generators, if `dP` lies in the algebra on `Q`.
pub fn two_stage_decomposition(alg: &SullivanAlgebra) -> Option<(Vec<usize>, Vec<usize>)> {
    let (q, p): (Vec<usize>, Vec<usize>) = (0..alg.ngens()).partition(|&g| alg.differential(g).is_zero());
    let closed = |h: usize| alg.differential(h).is_zero();
    let ok = p.iter().all(|&g| alg.differential(g).monomials().all(|m| m.support().all(|(h, _)| closed(h))));
    ok.then_some((q, p))
}

/// The grading with `Q` in lower degree 0 and `P` in lower degree 1.
pub fn two_stage_grading(alg: &SullivanAlgebra) -> Option<LowerGrading> {
    let (_, p) = two_stage_decomposition(alg)?;
    let mut lower = vec![0; alg.ngens()];
    for g in p {
        lower[g] = 1;
    }
    Some(LowerGrading { lower })
}

/// `v -> base^(lower(v) + deg(v)) v`.
pub fn scaling_images(alg: &SullivanAlgebra, g: &LowerGrading, base: &Q) -> Vec<Element> {
    (0..alg.ngens())
        .map(|v| alg.generator_element(v).scale(&pow_q(base, g.lower[v] + alg.generators()[v].degree)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingCertificate {
    pub base: Q,
    pub grading: LowerGrading,
    pub images: Vec<Element>,
    pub degree: Q,
    /// `degree = base^exponent`, and the k-th multiple has degree `(base*k)^exponent`.
    pub exponent: u32,
}

/// Builds and verifies the scaling map with base 2.
pub fn scaling_certificate(
    alg: &SullivanAlgebra,
    g: &LowerGrading,
    vol: &VolumeForm,
) -> Result<ScalingCertificate, FlexError> {
    check_prop4_condition(alg, g).map_err(FlexError::Condition)?;
    let base = Q::from_integer(2.into());
    let images = scaling_images(alg, g, &base);
    let check = verify_morphism(alg, &images, vol);
    if !check.valid {
        return Err(FlexError::NotAMorphism(check.failing_generator.unwrap_or(0)));
    }
    let degree = check.degree.expect("valid morphism has a degree");
    if degree.is_zero() {
        return Err(FlexError::ZeroDegree);
    }
    let exponent = vol
        .representative
        .monomials()
        .map(|m| g.of_monomial(m) + alg.gca().degree(m))
        .find(|&e| pow_q(&base, e) == degree)
        .ok_or(FlexError::ZeroDegree)?;
    Ok(ScalingCertificate { base, grading: g.clone(), images, degree, exponent })
}

/// Basis of the cohomology classes of degree `n` that are homogeneous for
/// the lower grading, grouped by lower degree.
pub fn bihomogeneous_cohomology_basis(alg: &SullivanAlgebra, g: &LowerGrading, n: u32) -> Vec<(u32, Element)> {
    let gca = alg.gca();
    let by_lower = |deg: u32| -> HashMap<u32, Vec<Monomial>> {
        let mut out: HashMap<u32, Vec<Monomial>> = HashMap::new();
        for m in gca.basis_of_degree(deg) {
            out.entry(g.of_monomial(&m)).or_default().push(m);
        }
        out
    };
    let here = by_lower(n);
    let below = if n == 0 { HashMap::new() } else { by_lower(n - 1) };
    let mut lowers: Vec<u32> = here.keys().copied().collect();
    lowers.sort_unstable();
    let mut out = Vec::new();
    for l in lowers {
        let basis = &here[&l];
        let index: HashMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut image = Echelon::new(false);
        for m in below.get(&(l + 1)).into_iter().flatten() {
            let col: SparseVec = alg
                .d_monomial(m)
                .terms()
                .filter_map(|(t, c)| index.get(t).map(|&i| (i, c.clone())))
                .collect();
            image.push_column(col);
        }
        // kernel of d on this piece
        let mut cod: HashMap<Monomial, usize> = HashMap::new();
        let cols: Vec<SparseVec> = basis
            .iter()
            .map(|m| {
                alg.d_monomial(m)
                    .into_terms()
                    .map(|(t, c)| {
                        let k = cod.len();
                        (*cod.entry(t).or_insert(k), c)
                    })
                    .collect()
            })
            .collect();
        let ker = Echelon::from_columns(cols.iter(), true);
        for z in ker.kernel() {
            if image.push_column(z.clone()).is_some() {
                out.push((l, Element::from_terms(z.iter().map(|(i, c)| (basis[*i].clone(), c.clone())))));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipleCheck {
    pub k: u64,
    pub valid: bool,
    pub degree: Option<Q>,
    pub expected_degree: Q,
    pub classes_checked: usize,
    /// (degree, lower degree) of the first class on which the action is wrong.
    pub failure: Option<(u32, u32)>,
}

impl MultipleCheck {
    pub fn passed(&self) -> bool {
        self.valid && self.failure.is_none() && self.degree.as_ref() == Some(&self.expected_degree)
    }
}

/// Verifies `kf(v) = (2k)^(i+j) v` for each `k`: the map commutes with `d`,
/// has degree `(2k)^exponent`, and scales every bihomogeneous class `[x]`
/// of degree `n` and lower degree `l` by `(2k)^(l+n)` up to an exact term.
pub fn multiple_family_verify(
    alg: &SullivanAlgebra,
    cert: &ScalingCertificate,
    vol: &VolumeForm,
    ks: &[u64],
) -> Vec<MultipleCheck> {
    let classes: Vec<(u32, u32, Element)> = (0..=vol.degree)
        .flat_map(|n| bihomogeneous_cohomology_basis(alg, &cert.grading, n).into_iter().map(move |(l, e)| (n, l, e)))
        .collect();
    ks.iter()
        .map(|&k| {
            let base = &cert.base * Q::from_integer(k.into());
            let images = scaling_images(alg, &cert.grading, &base);
            let check = verify_morphism(alg, &images, vol);
            let expected_degree = pow_q(&base, cert.exponent);
            let mut map = crate::gca::AlgebraMap::new(alg.gca(), alg.gca(), &images);
            let failure = classes
                .iter()
                .find(|(n, l, x)| {
                    let diff = map.image(x).sub(&x.scale(&pow_q(&base, l + n)));
                    !matches!(crate::cohomology::is_exact(alg, &diff), Ok(crate::cohomology::Exactness::Exact(_)))
                        && !diff.is_zero()
                })
                .map(|(n, l, _)| (*n, *l));
            MultipleCheck {
                k,
                valid: check.valid,
                degree: check.degree,
                expected_degree,
                classes_checked: classes.len(),
                failure,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load;
    use crate::cohomology::verify_volume_form;

    #[test]
    fn ex02_grading_and_scaling() {
        let f = load("ex02").unwrap();
        let a = &f.algebra;
        assert!(monomial_differential_check(a).is_ok());
        let g = construct_lower_grading(a).unwrap();
        assert_eq!(g.lower, vec![0, 0, 1, 2]);
        assert!(check_prop4_condition(a, &g).is_ok());
        assert!(two_stage_decomposition(a).is_none());
        let cert = a.ellipticity_certificate().unwrap();
        let vol = verify_volume_form(a, f.volume.as_ref().unwrap(), &cert).unwrap();
        let s = scaling_certificate(a, &g, &vol).unwrap();
        assert_eq!(s.exponent, 21);
    }

    #[test]
    fn sphere_convention() {
        let f = load("sphere(2)").unwrap();
        let a = &f.algebra;
        let g = construct_lower_grading(a).unwrap();
        let imgs = scaling_images(a, &g, &Q::from_integer(2.into()));
        assert_eq!(imgs[0], a.generator_element(0).scale(&Q::from_integer(4.into())));
        assert_eq!(imgs[1], a.generator_element(1).scale(&Q::from_integer(16.into())));
    }

    #[test]
    fn a0_fails_condition() {
        let a = load("A(0)").unwrap().algebra;
        assert_eq!(monomial_differential_check(&a), Err(5));
        let g = construct_lower_grading(&a).unwrap();
        assert_eq!(check_prop4_condition(&a, &g), Err(5));
    }
}
