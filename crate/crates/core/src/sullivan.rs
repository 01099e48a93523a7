//! Sullivan algebras: a free graded-commutative algebra with a differential
//! given on generators and extended as a degree +1 derivation.

use crate::cohomology;
use crate::gca::{AlgebraError, AlgebraMap, Coefficient, Element, FreeGca, Generator, Monomial};
use crate::rational::Q;
use num_traits::One;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct SullivanAlgebra {
    name: String,
    gca: FreeGca,
    diff: Vec<Element>,
    factors: Vec<Factor>,
}

/// A tensor factor occupying the generators `offset..offset + algebra.ngens()`.
#[derive(Clone, Debug)]
pub struct Factor {
    pub offset: usize,
    pub algebra: Arc<SullivanAlgebra>,
}

impl PartialEq for SullivanAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.gca == other.gca && self.diff == other.diff
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NilpotencyWitness {
    pub generator: usize,
    pub exponent: u32,
    /// `d(witness) = x^exponent`
    pub witness: Element,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityCertificate {
    pub entries: Vec<NilpotencyWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EllipticityFailure {
    DSquaredNonzero { generator: usize },
    /// No power up to `bound` of the generator was exact; this is not a disproof.
    BoundExceeded { generator: usize, bound: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormalDimension(pub u32);

impl SullivanAlgebra {
    /// Validates that every differential is homogeneous of degree one more
    /// than its generator. `d^2 = 0` is not enforced; see [`Self::check_d_squared`].
    pub fn new(name: impl Into<String>, gens: Vec<Generator>, diff: Vec<Element>) -> Result<Self, AlgebraError> {
        let gca = FreeGca::new(gens)?;
        if diff.len() != gca.ngens() {
            return Err(AlgebraError::Other(format!(
                "{} differentials for {} generators",
                diff.len(),
                gca.ngens()
            )));
        }
        for (g, dg) in diff.iter().enumerate() {
            let expected = gca.generators()[g].degree + 1;
            if let Some(found) = gca.element_degree(dg)? {
                if found != expected {
                    return Err(AlgebraError::DegreeMismatch {
                        name: gca.generators()[g].name.clone(),
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(SullivanAlgebra { name: name.into(), gca, diff, factors: Vec::new() })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn gca(&self) -> &FreeGca {
        &self.gca
    }

    pub fn generators(&self) -> &[Generator] {
        self.gca.generators()
    }

    pub fn ngens(&self) -> usize {
        self.gca.ngens()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gca.index_of(name)
    }

    pub fn differential(&self, g: usize) -> &Element {
        &self.diff[g]
    }

    pub fn differentials(&self) -> &[Element] {
        &self.diff
    }

    /// Tensor factors, when the algebra was built by [`tensor_product`].
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn generator_element(&self, g: usize) -> Element {
        self.gca.generator_element(g)
    }

    pub fn d_monomial(&self, m: &Monomial) -> Element {
        let gca = &self.gca;
        let mut r = Element::zero();
        for (g, e) in m.support() {
            if gca.is_odd(g) || self.diff[g].is_zero() {
                continue;
            }
            let rest = Element::from_monomial(m.with_exponent(g, e - 1), Q::one());
            let t = gca.mul(&self.diff[g], &rest);
            r.add_assign(&t.scale(&Q::from_integer(e.into())));
        }
        let odd: Vec<usize> = m.support().map(|(g, _)| g).filter(|&g| gca.is_odd(g)).collect();
        for (j, &g) in odd.iter().enumerate() {
            if self.diff[g].is_zero() {
                continue;
            }
            let mut prefix = m.clone();
            for &h in &odd[j..] {
                prefix = prefix.with_exponent(h, 0);
            }
            let mut suffix = gca.unit();
            for &h in &odd[j + 1..] {
                suffix = suffix.with_exponent(h, 1);
            }
            let left = gca.mul(&Element::from_monomial(prefix, Q::one()), &self.diff[g]);
            let t = gca.mul(&left, &Element::from_monomial(suffix, Q::one()));
            if j % 2 == 1 {
                r.add_assign(&t.neg());
            } else {
                r.add_assign(&t);
            }
        }
        r
    }

    /// The derivation extension of the differential, linear in coefficients.
    pub fn d<C: Coefficient>(&self, e: &Element<C>) -> Element<C> {
        let mut r = Element::zero();
        for (m, c) in e.terms() {
            for (dm, dc) in self.d_monomial(m).into_terms() {
                r.add_term(dm, c.scale_q(&dc));
            }
        }
        r
    }

    pub fn try_d<C: Coefficient>(&self, e: &Element<C>) -> Result<Element<C>, AlgebraError> {
        for m in e.monomials() {
            self.gca.check_monomial(m)?;
        }
        Ok(self.d(e))
    }

    /// Generators `g` with `d(d(g)) != 0`, paired with the nonzero value.
    pub fn check_d_squared(&self) -> Vec<(usize, Element)> {
        (0..self.ngens())
            .filter_map(|g| {
                let dd = self.d(&self.diff[g]);
                (!dd.is_zero()).then_some((g, dd))
            })
            .collect()
    }

    /// Differential terms of word length below 2, as `(generator, monomial)`.
    pub fn check_minimality(&self) -> Vec<(usize, Monomial)> {
        let mut bad = Vec::new();
        for (g, dg) in self.diff.iter().enumerate() {
            for m in dg.monomials() {
                if m.word_length() < 2 {
                    bad.push((g, m.clone()));
                }
            }
        }
        bad
    }

    /// `sum deg(odd) - sum (deg(even) - 1)`; meaningful for elliptic algebras.
    pub fn formal_dimension_formula(&self) -> i64 {
        self.generators()
            .iter()
            .map(|g| if g.is_odd() { g.degree as i64 } else { -(g.degree as i64 - 1) })
            .sum()
    }

    pub fn even_generators(&self) -> Vec<usize> {
        (0..self.ngens()).filter(|&g| !self.gca.is_odd(g)).collect()
    }

    /// Search bound for the nilpotency exponent of an even generator of
    /// degree `deg`: the least `N` with `N * deg > formula + max degree`.
    pub fn nilpotency_bound(&self, deg: u32) -> u32 {
        let max_deg = self.generators().iter().map(|g| g.degree).max().unwrap_or(0) as i64;
        let ceiling = self.formal_dimension_formula() + max_deg;
        if ceiling < 0 {
            return 1;
        }
        (ceiling / deg as i64 + 1) as u32
    }

    /// For every even generator, the least exact power with a witness.
    pub fn ellipticity_certificate(&self) -> Result<EllipticityCertificate, EllipticityFailure> {
        self.ellipticity_certificate_with_bound(None)
    }

    /// With `max_degree`, powers are searched only up to that degree
    /// instead of the default exponent bound.
    pub fn ellipticity_certificate_with_bound(
        &self,
        max_degree: Option<u32>,
    ) -> Result<EllipticityCertificate, EllipticityFailure> {
        if let Some((g, _)) = self.check_d_squared().into_iter().next() {
            return Err(EllipticityFailure::DSquaredNonzero { generator: g });
        }
        let mut entries = Vec::new();
        for g in self.even_generators() {
            let deg = self.generators()[g].degree;
            let n_max = max_degree.map_or_else(|| self.nilpotency_bound(deg), |m| m / deg);
            let x = self.generator_element(g);
            let mut found = None;
            let mut power = self.gca.one();
            for n in 1..=n_max {
                power = self.gca.mul(&power, &x);
                if let cohomology::Exactness::Exact(w) = cohomology::is_exact(self, &power).expect("closed power") {
                    found = Some(NilpotencyWitness { generator: g, exponent: n, witness: w.preimage });
                    break;
                }
            }
            match found {
                Some(w) => entries.push(w),
                None => return Err(EllipticityFailure::BoundExceeded { generator: g, bound: n_max }),
            }
        }
        Ok(EllipticityCertificate { entries })
    }

    pub fn formal_dimension(&self, cert: &EllipticityCertificate) -> FormalDimension {
        assert!(cert.replays(self), "certificate does not belong to this algebra");
        FormalDimension(self.formal_dimension_formula().max(0) as u32)
    }

    /// Element in the target algebra obtained by mapping each generator.
    pub fn map_element<C: Coefficient>(&self, target: &FreeGca, images: &[Element<C>], e: &Element) -> Element<C> {
        AlgebraMap::new(&self.gca, target, images).image(e)
    }

    /// Removes the pair `(w, x)` with `d(w) = m - x`, substituting `m` for `x`.
    pub fn eliminate_contractible_pair(&self, w: &str, x: &str) -> Result<SullivanAlgebra, AlgebraError> {
        let wi = self.index_of(w).ok_or_else(|| AlgebraError::UnknownGenerator(w.into()))?;
        let xi = self.index_of(x).ok_or_else(|| AlgebraError::UnknownGenerator(x.into()))?;
        let xm = self.gca.generator(xi);
        if self.diff[wi].coefficient(&xm) != Some(&-Q::one()) {
            return Err(AlgebraError::Other(format!("d({w}) does not have the form m - {x}")));
        }
        let m = self.diff[wi].add(&self.generator_element(xi));
        if m.monomials().any(|mm| mm.exponent(xi) > 0 || mm.exponent(wi) > 0) {
            return Err(AlgebraError::Other(format!("m in d({w}) = m - {x} involves {w} or {x}")));
        }
        if !self.diff[xi].is_zero() {
            return Err(AlgebraError::Other(format!("{x} is not closed")));
        }
        for (g, dg) in self.diff.iter().enumerate() {
            if g != wi && dg.monomials().any(|mm| mm.exponent(wi) > 0) {
                return Err(AlgebraError::Other(format!(
                    "d({}) involves {w}",
                    self.generators()[g].name
                )));
            }
        }
        let mut images: Vec<Element> = (0..self.ngens()).map(|g| self.generator_element(g)).collect();
        images[xi] = m;
        images[wi] = Element::zero();
        let keep: Vec<usize> = (0..self.ngens()).filter(|&g| g != wi && g != xi).collect();
        let project = |e: &Element| -> Element {
            Element::from_terms(e.terms().map(|(mm, c)| {
                (Monomial::from_exponents(keep.iter().map(|&g| mm.exponent(g)).collect()), c.clone())
            }))
        };
        let mut map = AlgebraMap::new(&self.gca, &self.gca, &images);
        let gens = keep.iter().map(|&g| self.generators()[g].clone()).collect();
        let diff = keep.iter().map(|&g| project(&map.image(&self.diff[g]))).collect();
        SullivanAlgebra::new(self.name.clone(), gens, diff)
    }

    /// Restricts an element of a factor into this algebra's generator set.
    pub fn embed_from_factor(&self, factor: usize, e: &Element) -> Element {
        let f = &self.factors[factor];
        let n = self.ngens();
        Element::from_terms(e.terms().map(|(m, c)| {
            let mut exps = vec![0; n];
            exps[f.offset..f.offset + m.len()].copy_from_slice(m.exponents());
            (Monomial::from_exponents(exps), c.clone())
        }))
    }
}

impl EllipticityCertificate {
    /// Re-checks every witness by applying the differential.
    pub fn replays(&self, alg: &SullivanAlgebra) -> bool {
        let evens = alg.even_generators();
        evens.len() == self.entries.len()
            && self.entries.iter().zip(&evens).all(|(w, &g)| {
                w.generator == g && alg.d(&w.witness) == alg.gca().pow(&alg.generator_element(g), w.exponent)
            })
    }

    pub fn exponent_of(&self, g: usize) -> Option<u32> {
        self.entries.iter().find(|w| w.generator == g).map(|w| w.exponent)
    }
}

/// Tensor product; when generator names collide every generator gets the
/// suffix `_k` of its factor index `k` (starting at 1).
pub fn tensor_product(a: &SullivanAlgebra, b: &SullivanAlgebra) -> SullivanAlgebra {
    let collide = a.generators().iter().any(|g| b.index_of(&g.name).is_some());
    let rename = |g: &Generator, k: usize| {
        if collide {
            Generator::new(format!("{}_{}", g.name, k), g.degree)
        } else {
            g.clone()
        }
    };
    let (na, nb) = (a.ngens(), b.ngens());
    let mut gens: Vec<Generator> = a.generators().iter().map(|g| rename(g, 1)).collect();
    gens.extend(b.generators().iter().map(|g| rename(g, 2)));
    let shift = |e: &Element, offset: usize| -> Element {
        Element::from_terms(e.terms().map(|(m, c)| {
            let mut exps = vec![0; na + nb];
            exps[offset..offset + m.len()].copy_from_slice(m.exponents());
            (Monomial::from_exponents(exps), c.clone())
        }))
    };
    let mut diff: Vec<Element> = a.differentials().iter().map(|e| shift(e, 0)).collect();
    diff.extend(b.differentials().iter().map(|e| shift(e, na)));
    let name = if na == 0 {
        b.name().to_string()
    } else if nb == 0 {
        a.name().to_string()
    } else {
        format!("{} (x) {}", a.name(), b.name())
    };
    let mut out = SullivanAlgebra::new(name, gens, diff).expect("tensor product of valid algebras");
    let mut factors = Vec::new();
    for (alg, offset) in [(a, 0), (b, na)] {
        if alg.ngens() == 0 {
            continue;
        }
        if alg.factors.is_empty() {
            factors.push(Factor { offset, algebra: Arc::new(alg.clone()) });
        } else {
            factors.extend(alg.factors.iter().map(|f| Factor { offset: offset + f.offset, algebra: f.algebra.clone() }));
        }
    }
    if factors.len() >= 2 {
        out.factors = factors;
    }
    out
}
