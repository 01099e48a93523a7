//! Exact graded linear algebra on Sullivan algebras: differential matrices,
//! exactness with witnesses, Betti numbers and the top cohomology class.

use crate::gca::{Coefficient, Element, Monomial};
use crate::linalg::{dot, Echelon, SparseVec};
use crate::rational::Q;
use crate::sullivan::{EllipticityCertificate, SullivanAlgebra};
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("element is not homogeneous")]
    Inhomogeneous,
    #[error("element is not closed")]
    NotClosed,
    #[error("element is over a different generator set")]
    GeneratorMismatch,
    #[error("top cohomology has dimension {0}, expected 1")]
    TopNotOneDimensional(usize),
    #[error("element has degree {found}, expected the top degree {expected}")]
    NotTopDegree { found: u32, expected: u32 },
}

#[derive(Clone, Debug)]
pub struct DifferentialMatrix {
    pub degree: u32,
    pub domain: Vec<Monomial>,
    pub codomain: Vec<Monomial>,
    /// column `j` holds the coordinates of `d(domain[j])`
    pub columns: Vec<SparseVec>,
}

pub fn basis_index(basis: &[Monomial]) -> HashMap<Monomial, usize> {
    basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect()
}

/// Coordinates of `e` in a basis; `None` if a monomial is missing.
pub fn coordinates(index: &HashMap<Monomial, usize>, e: &Element) -> Option<SparseVec> {
    let mut v = SparseVec::new();
    for (m, c) in e.terms() {
        v.insert(*index.get(m)?, c.clone());
    }
    Some(v)
}

pub fn d_matrix(alg: &SullivanAlgebra, n: u32) -> DifferentialMatrix {
    let domain = alg.gca().basis_of_degree(n);
    let codomain = alg.gca().basis_of_degree(n + 1);
    let index = basis_index(&codomain);
    let columns = domain
        .iter()
        .map(|m| coordinates(&index, &alg.d_monomial(m)).expect("d raises degree by one"))
        .collect();
    DifferentialMatrix { degree: n, domain, codomain, columns }
}

impl DifferentialMatrix {
    pub fn rank(&self) -> usize {
        Echelon::from_columns(self.columns.iter(), false).rank()
    }
}

/// `d(preimage) = target`
#[derive(Clone, Debug, PartialEq)]
pub struct ExactnessWitness {
    pub target: Element,
    pub preimage: Element,
}

impl ExactnessWitness {
    pub fn replays(&self, alg: &SullivanAlgebra) -> bool {
        alg.d(&self.preimage) == self.target
    }
}

/// Linear functional on degree `n` vanishing on all exact elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    pub degree: u32,
    pub values: BTreeMap<Monomial, Q>,
}

impl Cocycle {
    pub fn eval<C: Coefficient>(&self, e: &Element<C>) -> C {
        let mut s = C::zero_coeff();
        for (m, c) in e.terms() {
            if let Some(v) = self.values.get(m) {
                s.add_assign_ref(&c.scale_q(v));
            }
        }
        s
    }

    /// Checks that the functional kills `d` of every basis monomial of
    /// degree `n - 1`.
    pub fn annihilates_exact(&self, alg: &SullivanAlgebra) -> bool {
        if self.degree == 0 {
            return true;
        }
        alg.gca()
            .basis_of_degree(self.degree - 1)
            .iter()
            .all(|m| Zero::is_zero(&self.eval(&alg.d_monomial(m))))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Exactness {
    Exact(ExactnessWitness),
    /// The cocycle kills every exact element but not the target.
    NotExact(Cocycle),
}

fn homogeneous_degree(alg: &SullivanAlgebra, e: &Element) -> Result<Option<u32>, CohomologyError> {
    alg.gca().element_degree(e).map_err(|err| match err {
        crate::gca::AlgebraError::Inhomogeneous => CohomologyError::Inhomogeneous,
        _ => CohomologyError::GeneratorMismatch,
    })
}

pub fn is_closed(alg: &SullivanAlgebra, e: &Element) -> Result<bool, CohomologyError> {
    homogeneous_degree(alg, e)?;
    Ok(alg.d(e).is_zero())
}

pub fn is_exact(alg: &SullivanAlgebra, e: &Element) -> Result<Exactness, CohomologyError> {
    let Some(n) = homogeneous_degree(alg, e)? else {
        return Ok(Exactness::Exact(ExactnessWitness { target: e.clone(), preimage: Element::zero() }));
    };
    if !alg.d(e).is_zero() {
        return Err(CohomologyError::NotClosed);
    }
    if n == 0 {
        return Ok(Exactness::NotExact(Cocycle { degree: 0, values: [(alg.gca().unit(), Q::one())].into() }));
    }
    let dm = d_matrix(alg, n - 1);
    let index = basis_index(&dm.codomain);
    let target = coordinates(&index, e).expect("homogeneous element");
    let ech = Echelon::from_columns(dm.columns.iter(), true);
    match ech.solve(&target) {
        Some(x) => {
            let preimage = Element::from_terms(x.into_iter().map(|(j, c)| (dm.domain[j].clone(), c)));
            Ok(Exactness::Exact(ExactnessWitness { target: e.clone(), preimage }))
        }
        None => Ok(Exactness::NotExact(cocycle_detecting(&ech, &dm.codomain, &target, n))),
    }
}

/// Cocycle vanishing on the span of `ech` and nonzero on `target`.
fn cocycle_detecting(ech: &Echelon, rows: &[Monomial], target: &SparseVec, degree: u32) -> Cocycle {
    let (rem, _) = ech.reduce_full(target);
    let (&r0, _) = rem.iter().next().expect("target outside the span");
    let y = ech.annihilator(r0);
    let scale = dot(&y, target).recip();
    Cocycle { degree, values: y.into_iter().map(|(r, v)| (rows[r].clone(), v * &scale)).collect() }
}

pub fn betti(alg: &SullivanAlgebra, n: u32) -> usize {
    let dim = alg.gca().basis_of_degree(n).len();
    let rank_out = d_matrix(alg, n).rank();
    let rank_in = if n == 0 { 0 } else { d_matrix(alg, n - 1).rank() };
    dim - rank_out - rank_in
}

/// Betti numbers in degrees `0..=up_to`, computed in parallel.
pub fn betti_table(alg: &SullivanAlgebra, up_to: u32) -> Vec<usize> {
    let ranks: Vec<usize> = (0..=up_to).into_par_iter().map(|n| d_matrix(alg, n).rank()).collect();
    (0..=up_to)
        .map(|n| {
            let dim = alg.gca().basis_of_degree(n).len();
            let rank_in = if n == 0 { 0 } else { ranks[n as usize - 1] };
            dim - ranks[n as usize] - rank_in
        })
        .collect()
}

/// Cohomology representatives in degree `n`: closed elements whose classes
/// form a basis of `H^n`, chosen in elimination order.
pub fn cohomology_basis(alg: &SullivanAlgebra, n: u32) -> Vec<Element> {
    let dn = d_matrix(alg, n);
    let kernel = Echelon::from_columns(dn.columns.iter(), true);
    let mut image = if n == 0 {
        Echelon::new(false)
    } else {
        Echelon::from_columns(d_matrix(alg, n - 1).columns.iter(), false)
    };
    let mut out = Vec::new();
    for k in kernel.kernel() {
        if image.push_column(k.clone()).is_some() {
            out.push(Element::from_terms(k.iter().map(|(j, c)| (dn.domain[*j].clone(), c.clone()))));
        }
    }
    out
}

/// Functional on the top degree vanishing on exact elements, normalised to
/// 1 on the volume form. Tensor products use the product of the factors'
/// functionals on the top bidegree.
#[derive(Clone, Debug, PartialEq)]
pub enum TopFunctional {
    Direct(Cocycle),
    Tensor(Vec<TensorPart>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorPart {
    pub offset: usize,
    pub len: usize,
    pub functional: Cocycle,
}

impl TopFunctional {
    pub fn eval_monomial(&self, m: &Monomial) -> Q {
        match self {
            TopFunctional::Direct(c) => c.values.get(m).cloned().unwrap_or_else(Q::zero),
            TopFunctional::Tensor(parts) => {
                let mut v = Q::one();
                for p in parts {
                    let part = m.slice(p.offset, p.len);
                    match p.functional.values.get(&part) {
                        Some(x) => v *= x,
                        None => return Q::zero(),
                    }
                }
                v
            }
        }
    }

    pub fn eval<C: Coefficient>(&self, e: &Element<C>) -> C {
        let mut s = C::zero_coeff();
        for (m, c) in e.terms() {
            let v = self.eval_monomial(m);
            if !v.is_zero() {
                s.add_assign_ref(&c.scale_q(&v));
            }
        }
        s
    }

    fn scaled(self, k: &Q) -> TopFunctional {
        let scale = |c: Cocycle| Cocycle { degree: c.degree, values: c.values.into_iter().map(|(m, v)| (m, v * k)).collect() };
        match self {
            TopFunctional::Direct(c) => TopFunctional::Direct(scale(c)),
            TopFunctional::Tensor(mut parts) => {
                let first = parts.remove(0);
                parts.insert(0, TensorPart { functional: scale(first.functional), ..first });
                TopFunctional::Tensor(parts)
            }
        }
    }
}

/// `[D | vol]` in echelon form; solving against it reads off the top-class
/// coefficient as the multiple of the adjoined volume column.
#[derive(Debug)]
pub struct AdjoinedSystem {
    echelon: Echelon,
    index: HashMap<Monomial, usize>,
    vol_column: usize,
}

impl AdjoinedSystem {
    fn coefficient(&self, e: &Element) -> Option<Q> {
        let v = coordinates(&self.index, e)?;
        let x = self.echelon.solve(&v)?;
        Some(x.get(&self.vol_column).cloned().unwrap_or_else(Q::zero))
    }
}

#[derive(Clone, Debug)]
pub struct VolumeForm {
    pub representative: Element,
    pub degree: u32,
    pub functional: TopFunctional,
    adjoined: Option<Arc<AdjoinedSystem>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VolumeRejection {
    Inhomogeneous,
    WrongDegree { found: Option<u32>, expected: u32 },
    NotClosed,
    /// Exact; the witness is absent when exactness follows from the product functional.
    Exact(Option<ExactnessWitness>),
    TopNotOneDimensional(usize),
    FactorNotElliptic(usize),
}

impl std::fmt::Display for VolumeRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VolumeRejection::Inhomogeneous => write!(f, "not homogeneous"),
            VolumeRejection::WrongDegree { found: Some(d), expected } => {
                write!(f, "degree {d} differs from the formal dimension {expected}")
            }
            VolumeRejection::WrongDegree { found: None, expected } => {
                write!(f, "zero element, formal dimension {expected}")
            }
            VolumeRejection::NotClosed => write!(f, "not closed"),
            VolumeRejection::Exact(_) => write!(f, "exact"),
            VolumeRejection::TopNotOneDimensional(k) => write!(f, "top cohomology has dimension {k}"),
            VolumeRejection::FactorNotElliptic(k) => write!(f, "no ellipticity certificate for tensor factor {k}"),
        }
    }
}

/// Accepts `e` iff it is homogeneous of the formal dimension, closed and not exact.
pub fn verify_volume_form(
    alg: &SullivanAlgebra,
    e: &Element,
    cert: &EllipticityCertificate,
) -> Result<VolumeForm, VolumeRejection> {
    let n = alg.formal_dimension(cert).0;
    let deg = homogeneous_degree(alg, e).map_err(|_| VolumeRejection::Inhomogeneous)?;
    if deg != Some(n) {
        return Err(VolumeRejection::WrongDegree { found: deg, expected: n });
    }
    if !alg.d(e).is_zero() {
        return Err(VolumeRejection::NotClosed);
    }
    if !alg.factors().is_empty() {
        return product_volume_form(alg, e, n);
    }
    let top = betti(alg, n);
    if top != 1 {
        return Err(VolumeRejection::TopNotOneDimensional(top));
    }
    let dm = d_matrix(alg, n - 1);
    let index = basis_index(&dm.codomain);
    let target = coordinates(&index, e).expect("homogeneous element");
    let mut ech = Echelon::from_columns(dm.columns.iter(), true);
    if let Some(x) = ech.solve(&target) {
        let preimage = Element::from_terms(x.into_iter().map(|(j, c)| (dm.domain[j].clone(), c)));
        return Err(VolumeRejection::Exact(Some(ExactnessWitness { target: e.clone(), preimage })));
    }
    let functional = TopFunctional::Direct(cocycle_detecting(&ech, &dm.codomain, &target, n));
    let vol_column = ech.ncols();
    ech.push_column(target);
    let adjoined = AdjoinedSystem { echelon: ech, index, vol_column };
    Ok(VolumeForm { representative: e.clone(), degree: n, functional, adjoined: Some(Arc::new(adjoined)) })
}

fn product_volume_form(alg: &SullivanAlgebra, e: &Element, n: u32) -> Result<VolumeForm, VolumeRejection> {
    let mut parts = Vec::new();
    for (k, f) in alg.factors().iter().enumerate() {
        let a = &f.algebra;
        let cert = a.ellipticity_certificate().map_err(|_| VolumeRejection::FactorNotElliptic(k))?;
        let na = a.formal_dimension(&cert).0;
        let top = top_class_representative(a, na)?;
        let vf = verify_volume_form(a, &top, &cert)?;
        let TopFunctional::Direct(c) = vf.functional else { unreachable!("factors are not products") };
        parts.push(TensorPart { offset: f.offset, len: a.ngens(), functional: c });
    }
    let functional = TopFunctional::Tensor(parts);
    let value = functional.eval(e);
    if value.is_zero() {
        return Err(VolumeRejection::Exact(None));
    }
    let functional = functional.scaled(&value.recip());
    Ok(VolumeForm { representative: e.clone(), degree: n, functional, adjoined: None })
}

/// A closed, non-exact element of degree `n` when `H^n` is one-dimensional.
pub fn top_class_representative(alg: &SullivanAlgebra, n: u32) -> Result<Element, VolumeRejection> {
    let basis = cohomology_basis(alg, n);
    if basis.len() != 1 {
        return Err(VolumeRejection::TopNotOneDimensional(basis.len()));
    }
    Ok(basis.into_iter().next().unwrap())
}

/// Volume form for an algebra without a declared one: the first top class
/// in elimination order.
pub fn find_volume_form(alg: &SullivanAlgebra, cert: &EllipticityCertificate) -> Result<VolumeForm, VolumeRejection> {
    let n = alg.formal_dimension(cert).0;
    if alg.factors().is_empty() {
        let rep = top_class_representative(alg, n)?;
        verify_volume_form(alg, &rep, cert)
    } else {
        let mut rep = alg.gca().one();
        for (k, f) in alg.factors().iter().enumerate() {
            let c = f.algebra.ellipticity_certificate().map_err(|_| VolumeRejection::FactorNotElliptic(k))?;
            let r = top_class_representative(&f.algebra, f.algebra.formal_dimension(&c).0)?;
            rep = alg.gca().mul(&rep, &alg.embed_from_factor(k, &r));
        }
        verify_volume_form(alg, &rep, cert)
    }
}

/// The scalar `lambda` with `e - lambda * vol` exact.
///
/// For algebras without tensor structure this solves one linear system with
/// the volume form adjoined as an extra column; products use the product
/// functional instead.
pub fn top_class_coefficient(alg: &SullivanAlgebra, e: &Element, vol: &VolumeForm) -> Result<Q, CohomologyError> {
    let deg = homogeneous_degree(alg, e)?;
    if let Some(d) = deg {
        if d != vol.degree {
            return Err(CohomologyError::NotTopDegree { found: d, expected: vol.degree });
        }
    } else {
        return Ok(Q::zero());
    }
    if !alg.d(e).is_zero() {
        return Err(CohomologyError::NotClosed);
    }
    match &vol.adjoined {
        Some(sys) => Ok(sys.coefficient(e).expect("top cohomology is spanned by the volume form")),
        None => Ok(vol.functional.eval(e)),
    }
}

/// Same coefficient through the top functional alone.
pub fn top_class_coefficient_by_functional(e: &Element, vol: &VolumeForm) -> Q {
    vol.functional.eval(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::{FreeGca, Generator};
    use crate::rational::q;

    fn ex02() -> SullivanAlgebra {
        let gens = vec![
            Generator::new("a", 3),
            Generator::new("b", 3),
            Generator::new("n", 5),
            Generator::new("m", 7),
        ];
        let gca = FreeGca::new(gens.clone()).unwrap();
        let g = |i| gca.generator_element(i);
        let diff = vec![Element::zero(), Element::zero(), gca.mul(&g(0), &g(1)), gca.mul(&g(0), &g(2))];
        SullivanAlgebra::new("ex02", gens, diff).unwrap()
    }

    #[test]
    fn ex02_bn_closed_not_exact() {
        let alg = ex02();
        let bn = alg.gca().mul(&alg.generator_element(1), &alg.generator_element(2));
        assert!(is_closed(&alg, &bn).unwrap());
        match is_exact(&alg, &bn).unwrap() {
            Exactness::NotExact(c) => {
                assert!(c.annihilates_exact(&alg));
                assert!(!c.eval(&bn).is_zero());
            }
            Exactness::Exact(_) => panic!("bn must not be exact"),
        }
        let ab = alg.gca().mul(&alg.generator_element(0), &alg.generator_element(1));
        match is_exact(&alg, &ab).unwrap() {
            Exactness::Exact(w) => assert!(w.replays(&alg)),
            _ => panic!("ab = dn"),
        }
        assert_eq!(is_exact(&alg, &alg.generator_element(2)), Err(CohomologyError::NotClosed));
    }

    #[test]
    fn ex02_betti_and_volume() {
        let alg = ex02();
        let table = betti_table(&alg, 18);
        assert_eq!(table[0], 1);
        assert_eq!(table[1], 0);
        assert_eq!(table[18], 1);
        for k in 0..=18 {
            assert_eq!(table[k], table[18 - k]);
            assert_eq!(table[k], betti(&alg, k as u32));
        }
        let cert = alg.ellipticity_certificate().unwrap();
        let vol = find_volume_form(&alg, &cert).unwrap();
        assert_eq!(top_class_coefficient(&alg, &vol.representative, &vol).unwrap(), q(1));
        assert_eq!(top_class_coefficient(&alg, &Element::zero(), &vol).unwrap(), q(0));
        let three = vol.representative.scale(&q(3));
        assert_eq!(top_class_coefficient(&alg, &three, &vol).unwrap(), q(3));
        assert_eq!(top_class_coefficient_by_functional(&three, &vol), q(3));
    }
}
