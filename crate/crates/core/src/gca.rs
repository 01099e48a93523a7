//! Free graded-commutative algebras over the rationals.
//!
//! A [`Monomial`] stores one exponent per generator, in declaration order.
//! Odd generators carry exponent 0 or 1, and the monomial stands for the
//! product of the even part with the odd factors taken in declaration order.

use crate::rational::Q;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("generator set mismatch: expected {expected} generators, found {found}")]
    GeneratorMismatch { expected: usize, found: usize },
    #[error("generator {name} has degree {degree}; degrees must be at least 2")]
    InvalidDegree { name: String, degree: u32 },
    #[error("duplicate generator name {0}")]
    DuplicateName(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("element is not homogeneous")]
    Inhomogeneous,
    #[error("d({name}) must have degree {expected}, found {found}")]
    DegreeMismatch { name: String, expected: u32, found: u32 },
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Generator { name: name.into(), degree }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// Exponent vector over the generators of one algebra.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    exps: Box<[u32]>,
}

impl Monomial {
    pub fn one(ngens: usize) -> Self {
        Monomial { exps: vec![0; ngens].into_boxed_slice() }
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial { exps: exps.into_boxed_slice() }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn exponent(&self, g: usize) -> u32 {
        self.exps[g]
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn word_length(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// Generators with nonzero exponent.
    pub fn support(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e))
    }

    pub fn with_exponent(&self, g: usize, e: u32) -> Monomial {
        let mut exps = self.exps.clone();
        exps[g] = e;
        Monomial { exps }
    }

    /// Restriction to the generators `offset..offset + len`.
    pub fn slice(&self, offset: usize, len: usize) -> Monomial {
        Monomial { exps: self.exps[offset..offset + len].to_vec().into_boxed_slice() }
    }
}

/// Scalars an [`Element`] can carry: exact rationals, or polynomials in
/// unknowns when expanding a symbolic self-map.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_coeff() -> Self;
    fn one_coeff() -> Self;
    fn is_zero_coeff(&self) -> bool;
    fn add_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn from_q(q: &Q) -> Self;
    fn scale_q(&self, q: &Q) -> Self;
}

impl Coefficient for Q {
    fn zero_coeff() -> Self {
        Zero::zero()
    }
    fn one_coeff() -> Self {
        One::one()
    }
    fn is_zero_coeff(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn scale_q(&self, q: &Q) -> Self {
        self * q
    }
}

/// Finite linear combination of monomials; zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct Element<C = Q> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> Default for Element<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> Element<C> {
    pub fn zero() -> Self {
        Element { terms: BTreeMap::new() }
    }

    pub fn from_monomial(m: Monomial, c: C) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut e = Self::zero();
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, C)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero_coeff() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&c);
                if o.get().is_zero_coeff() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.negated());
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.map_coefficients(|c| c.negated())
    }

    pub fn scale(&self, q: &Q) -> Self {
        self.map_coefficients(|c| c.scale_q(q))
    }

    pub fn scale_by(&self, c: &C) -> Self {
        self.map_coefficients(|x| x.mul_ref(c))
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Element<D> {
        let mut e = Element::zero();
        for (m, c) in &self.terms {
            e.add_term(m.clone(), f(c));
        }
        e
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn ngens(&self) -> Option<usize> {
        self.terms.keys().next().map(|m| m.len())
    }
}

impl Element<Q> {
    pub fn lift<C: Coefficient>(&self) -> Element<C> {
        self.map_coefficients(|q| C::from_q(q))
    }
}

/// Generator list of a free graded-commutative algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeGca {
    gens: Vec<Generator>,
}

impl FreeGca {
    pub fn new(gens: Vec<Generator>) -> Result<Self, AlgebraError> {
        for (i, g) in gens.iter().enumerate() {
            if g.degree < 2 {
                return Err(AlgebraError::InvalidDegree { name: g.name.clone(), degree: g.degree });
            }
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(AlgebraError::DuplicateName(g.name.clone()));
            }
        }
        Ok(FreeGca { gens })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn is_odd(&self, g: usize) -> bool {
        self.gens[g].is_odd()
    }

    pub fn generator(&self, g: usize) -> Monomial {
        Monomial::one(self.ngens()).with_exponent(g, 1)
    }

    pub fn generator_element(&self, g: usize) -> Element {
        Element::from_monomial(self.generator(g), Q::one())
    }

    pub fn unit(&self) -> Monomial {
        Monomial::one(self.ngens())
    }

    pub fn one(&self) -> Element {
        Element::from_monomial(self.unit(), Q::one())
    }

    pub fn degree(&self, m: &Monomial) -> u32 {
        m.exps.iter().zip(&self.gens).map(|(&e, g)| e * g.degree).sum()
    }

    /// Degree of a homogeneous element; `None` for zero, error if inhomogeneous.
    pub fn element_degree<C: Coefficient>(&self, e: &Element<C>) -> Result<Option<u32>, AlgebraError> {
        let mut deg = None;
        for m in e.monomials() {
            self.check_monomial(m)?;
            let d = self.degree(m);
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => return Err(AlgebraError::Inhomogeneous),
                _ => {}
            }
        }
        Ok(deg)
    }

    pub fn check_monomial(&self, m: &Monomial) -> Result<(), AlgebraError> {
        if m.len() != self.ngens() {
            return Err(AlgebraError::GeneratorMismatch { expected: self.ngens(), found: m.len() });
        }
        Ok(())
    }

    /// Product of two monomials: `None` if it vanishes, otherwise
    /// `(negative, monomial)` where `negative` is the Koszul sign.
    pub fn try_mul_monomials(
        &self,
        a: &Monomial,
        b: &Monomial,
    ) -> Result<Option<(bool, Monomial)>, AlgebraError> {
        self.check_monomial(a)?;
        self.check_monomial(b)?;
        Ok(self.mul_monomials(a, b))
    }

    /// Unchecked variant of [`Self::try_mul_monomials`]; panics on a
    /// generator count mismatch.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        assert_eq!(a.len(), self.ngens(), "monomial over a different generator set");
        assert_eq!(b.len(), self.ngens(), "monomial over a different generator set");
        let mut exps = Vec::with_capacity(a.len());
        let mut negative = false;
        // number of odd factors of `a` strictly after the current position
        let mut a_odd_after: u32 = a
            .exps
            .iter()
            .zip(&self.gens)
            .filter(|(&e, g)| e > 0 && g.is_odd())
            .count() as u32;
        for (i, g) in self.gens.iter().enumerate() {
            let (ea, eb) = (a.exps[i], b.exps[i]);
            if g.is_odd() {
                if ea > 0 {
                    a_odd_after -= 1;
                }
                if ea > 0 && eb > 0 {
                    return None;
                }
                // b's odd factor i moves left past a's odd factors with larger index
                if eb > 0 && a_odd_after % 2 == 1 {
                    negative = !negative;
                }
            }
            exps.push(ea + eb);
        }
        Some((negative, Monomial::from_exponents(exps)))
    }

    pub fn mul<C: Coefficient>(&self, a: &Element<C>, b: &Element<C>) -> Element<C> {
        let mut r = Element::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                if let Some((neg, m)) = self.mul_monomials(ma, mb) {
                    let c = ca.mul_ref(cb);
                    r.add_term(m, if neg { c.negated() } else { c });
                }
            }
        }
        r
    }

    pub fn try_mul<C: Coefficient>(&self, a: &Element<C>, b: &Element<C>) -> Result<Element<C>, AlgebraError> {
        for m in a.monomials().chain(b.monomials()) {
            self.check_monomial(m)?;
        }
        Ok(self.mul(a, b))
    }

    pub fn pow<C: Coefficient>(&self, a: &Element<C>, n: u32) -> Element<C> {
        let mut result = Element::from_monomial(self.unit(), C::one_coeff());
        let mut base = a.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = self.mul(&result, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// All monomials of degree `n`, sorted. Odd subsets are enumerated first,
    /// then the even exponents filling the remaining degree.
    pub fn basis_of_degree(&self, n: u32) -> Vec<Monomial> {
        let odd: Vec<usize> = (0..self.ngens()).filter(|&i| self.is_odd(i)).collect();
        let even: Vec<usize> = (0..self.ngens()).filter(|&i| !self.is_odd(i)).collect();
        let mut out = Vec::new();
        let mut exps = vec![0u32; self.ngens()];
        self.odd_subsets(&odd, 0, n, &even, &mut exps, &mut out);
        out.sort();
        out
    }

    fn odd_subsets(
        &self,
        odd: &[usize],
        k: usize,
        remaining: u32,
        even: &[usize],
        exps: &mut Vec<u32>,
        out: &mut Vec<Monomial>,
    ) {
        if k == odd.len() {
            self.even_fill(even, 0, remaining, exps, out);
            return;
        }
        self.odd_subsets(odd, k + 1, remaining, even, exps, out);
        let d = self.gens[odd[k]].degree;
        if d <= remaining {
            exps[odd[k]] = 1;
            self.odd_subsets(odd, k + 1, remaining - d, even, exps, out);
            exps[odd[k]] = 0;
        }
    }

    fn even_fill(&self, even: &[usize], k: usize, remaining: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if k == even.len() {
            if remaining == 0 {
                out.push(Monomial::from_exponents(exps.clone()));
            }
            return;
        }
        let d = self.gens[even[k]].degree;
        let mut e = 0;
        loop {
            exps[even[k]] = e;
            self.even_fill(even, k + 1, remaining - e * d, exps, out);
            if (e + 1) * d > remaining {
                break;
            }
            e += 1;
        }
        exps[even[k]] = 0;
    }

    pub fn fmt_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, e) in m.support() {
            if e == 1 {
                parts.push(self.gens[i].name.clone());
            } else {
                parts.push(format!("{}^{}", self.gens[i].name, e));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// DSL-compatible text of a rational element.
    pub fn fmt_element(&self, e: &Element) -> String {
        self.fmt_element_with(e, crate::rational::to_short, true)
    }

    /// Text of an element with arbitrary coefficients; `atomic` says whether
    /// the coefficient text can be juxtaposed without parentheses.
    pub fn fmt_element_with<C: Coefficient>(
        &self,
        e: &Element<C>,
        fmt_c: impl Fn(&C) -> String,
        atomic: bool,
    ) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in e.terms().enumerate() {
            let mut ct = fmt_c(c);
            let mono = self.fmt_monomial(m);
            let negative = atomic && ct.starts_with('-');
            if negative {
                ct.remove(0);
            }
            if i > 0 {
                s.push_str(if negative { " - " } else { " + " });
            } else if negative {
                s.push('-');
            }
            let ct = if atomic { ct } else { format!("({ct})") };
            if m.is_one() {
                s.push_str(&ct);
            } else if ct == "1" {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{ct}*{mono}"));
            }
        }
        s
    }
}

/// Evaluates the multiplicative extension of generator images, caching
/// powers of the images of even generators.
pub struct AlgebraMap<'a, C: Coefficient> {
    target: &'a FreeGca,
    images: &'a [Element<C>],
    source_odd: Vec<bool>,
    powers: std::collections::HashMap<(usize, u32), Element<C>>,
}

impl<'a, C: Coefficient> AlgebraMap<'a, C> {
    pub fn new(source: &FreeGca, target: &'a FreeGca, images: &'a [Element<C>]) -> Self {
        assert_eq!(images.len(), source.ngens(), "one image per source generator");
        AlgebraMap {
            target,
            images,
            source_odd: (0..source.ngens()).map(|g| source.is_odd(g)).collect(),
            powers: Default::default(),
        }
    }

    pub fn image_monomial(&mut self, m: &Monomial) -> Element<C> {
        let mut r = Element::from_monomial(self.target.unit(), C::one_coeff());
        for (g, e) in m.support() {
            if self.source_odd[g] {
                continue;
            }
            let key = (g, e);
            if !self.powers.contains_key(&key) {
                let p = self.target.pow(&self.images[g], e);
                self.powers.insert(key, p);
            }
            r = self.target.mul(&r, &self.powers[&key]);
            if r.is_zero() {
                return r;
            }
        }
        for (g, _) in m.support() {
            if self.source_odd[g] {
                r = self.target.mul(&r, &self.images[g]);
                if r.is_zero() {
                    return r;
                }
            }
        }
        r
    }

    pub fn image(&mut self, e: &Element) -> Element<C> {
        let mut r = Element::zero();
        for (m, c) in e.terms() {
            let im = self.image_monomial(m);
            r.add_assign(&im.scale(c));
        }
        r
    }
}
