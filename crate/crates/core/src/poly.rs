//! Sparse multivariate polynomials over the rationals in numbered unknowns.

use crate::gca::Coefficient;
use crate::rational::{pow_q, to_short, Q};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub type Var = u32;

/// Power product of unknowns, sorted by variable with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct PMono(Vec<(Var, u32)>);

impl PMono {
    pub fn one() -> Self {
        PMono(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        PMono(vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(Var, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort();
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((w, f)) if *w == v => *f += e,
                _ => out.push((v, e)),
            }
        }
        PMono(out)
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map(|&(_, e)| e).unwrap_or(0)
    }

    pub fn mul(&self, other: &PMono) -> PMono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        PMono(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &PMono) -> Option<PMono> {
        let mut out = Vec::new();
        let mut j = 0;
        for &(v, e) in &self.0 {
            let f = if j < other.0.len() && other.0[j].0 == v {
                j += 1;
                other.0[j - 1].1
            } else {
                0
            };
            if f > e {
                return None;
            }
            if e > f {
                out.push((v, e - f));
            }
        }
        // leftover variables of `other` do not occur in `self`
        if j < other.0.len() {
            return None;
        }
        Some(PMono(out))
    }

    pub fn gcd(&self, other: &PMono) -> PMono {
        let mut out = Vec::new();
        for &(v, e) in &self.0 {
            let f = other.degree_in(v);
            if f > 0 {
                out.push((v, e.min(f)));
            }
        }
        PMono(out)
    }

    pub fn without(&self, v: Var) -> PMono {
        PMono(self.0.iter().copied().filter(|&(w, _)| w != v).collect())
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }
}

/// Polynomial with rational coefficients; zero terms are never stored.
#[derive(Clone, PartialEq, Eq, Debug, Default, Hash, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<PMono, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Q) -> Self {
        Self::term(PMono::one(), c)
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn var(v: Var) -> Self {
        Self::term(PMono::var(v), Q::one())
    }

    pub fn term(m: PMono, c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMono, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: PMono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, q: &Q) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                r.add_term(ma.mul(mb), ca * cb);
            }
        }
        r
    }

    pub fn mul_mono(&self, m: &PMono, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    pub fn constant_value(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(&PMono, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Greatest common monomial factor of all terms.
    pub fn monomial_content(&self) -> PMono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return PMono::one() };
        let mut g = first.clone();
        for m in it {
            g = g.gcd(m);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Exact division by a monomial dividing every term.
    pub fn div_mono(&self, m: &PMono) -> Option<Poly> {
        let mut r = Poly::zero();
        for (k, c) in &self.terms {
            r.add_term(k.div(m)?, c.clone());
        }
        Some(r)
    }

    /// Splits `self = a * v + b` when `self` has degree at most 1 in `v`.
    pub fn linear_split(&self, v: Var) -> Option<(Poly, Poly)> {
        let mut a = Poly::zero();
        let mut b = Poly::zero();
        for (m, c) in &self.terms {
            match m.degree_in(v) {
                0 => b.add_term(m.clone(), c.clone()),
                1 => a.add_term(m.without(v), c.clone()),
                _ => return None,
            }
        }
        Some((a, b))
    }

    /// Simultaneous substitution of unknowns by polynomials.
    pub fn substitute(&self, subs: &HashMap<Var, Poly>) -> Poly {
        if subs.is_empty() || !self.terms.keys().any(|m| m.vars().any(|v| subs.contains_key(&v))) {
            return self.clone();
        }
        let mut powers: HashMap<(Var, u32), Poly> = HashMap::new();
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = Poly::constant(c.clone());
            for &(v, e) in m.pairs() {
                if let Some(p) = subs.get(&v) {
                    let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e)).clone();
                    factor = factor.mul(&pw);
                    if factor.is_zero() {
                        break;
                    }
                } else {
                    kept.push((v, e));
                }
            }
            if factor.is_zero() {
                continue;
            }
            let km = PMono(kept);
            for (fm, fc) in factor.terms {
                r.add_term(fm.mul(&km), fc);
            }
        }
        r
    }

    pub fn substitute_one(&self, v: Var, p: &Poly) -> Poly {
        let mut subs = HashMap::new();
        subs.insert(v, p.clone());
        self.substitute(&subs)
    }

    /// Value at a full assignment; `None` if an unknown is unassigned.
    pub fn evaluate(&self, values: &HashMap<Var, Q>) -> Option<Q> {
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.pairs() {
                t *= pow_q(values.get(&v)?, e);
            }
            total += t;
        }
        Some(total)
    }

    /// Normalises the leading coefficient to 1 (sign and scale canonical form).
    pub fn monic(&self) -> Poly {
        match self.terms.iter().next_back() {
            Some((_, c)) => self.scale(&c.recip()),
            None => Poly::zero(),
        }
    }

    pub fn fmt_with(&self, name: &dyn Fn(Var) -> String) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = m
                .pairs()
                .iter()
                .map(|&(v, e)| if e == 1 { name(v) } else { format!("{}^{}", name(v), e) })
                .collect();
            if mono.is_empty() {
                s.push_str(&to_short(&a));
            } else if a.is_one() {
                s.push_str(&mono.join("*"));
            } else {
                s.push_str(&format!("{}*{}", to_short(&a), mono.join("*")));
            }
        }
        s
    }
}

impl Coefficient for Poly {
    fn zero_coeff() -> Self {
        Poly::zero()
    }
    fn one_coeff() -> Self {
        Poly::one()
    }
    fn is_zero_coeff(&self) -> bool {
        Poly::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        Poly::add_assign(self, other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn negated(&self) -> Self {
        self.neg()
    }
    fn from_q(q: &Q) -> Self {
        Poly::constant(q.clone())
    }
    fn scale_q(&self, q: &Q) -> Self {
        self.scale(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn substitution_and_evaluation() {
        // p = k0^2 k1 - 3 k2
        let p = Poly::var(0).pow(2).mul(&Poly::var(1)).sub(&Poly::var(2).scale(&q(3)));
        let mut subs = HashMap::new();
        subs.insert(2, Poly::var(0).mul(&Poly::var(1)));
        let r = p.substitute(&subs);
        let vals: HashMap<Var, Q> = [(0, q(2)), (1, q(5))].into_iter().collect();
        assert_eq!(r.evaluate(&vals), Some(q(20 - 30)));
    }

    #[test]
    fn content_and_division() {
        let p = Poly::term(PMono::from_pairs(vec![(0, 3), (1, 1)]), q(2))
            .add(&Poly::term(PMono::from_pairs(vec![(0, 1), (1, 2)]), q(-1)));
        let g = p.monomial_content();
        assert_eq!(g, PMono::from_pairs(vec![(0, 1), (1, 1)]));
        let d = p.div_mono(&g).unwrap();
        assert_eq!(d.mul_mono(&g, &q(1)), p);
        assert!(PMono::var(0).div(&PMono::var(1)).is_none());
    }

    #[test]
    fn linear_split_detects_degree() {
        let p = Poly::var(0).mul(&Poly::var(1)).add(&Poly::var(2));
        let (a, b) = p.linear_split(0).unwrap();
        assert_eq!(a, Poly::var(1));
        assert_eq!(b, Poly::var(2));
        assert!(Poly::var(0).pow(2).linear_split(0).is_none());
    }
}
