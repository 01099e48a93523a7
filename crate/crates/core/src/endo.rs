//! Self-maps of a minimal Sullivan algebra and the degrees they can have.
//!
//! A generic self-map sends each generator to a combination of all basis
//! monomials of its degree, one unknown per coefficient. Commuting with the
//! differential gives polynomial constraints on the unknowns; these are
//! solved by substitution and case splits down to equations between
//! monomials, whose solutions over the nonzero rationals are described by an
//! integer lattice (magnitudes, one coordinate per prime) and a system over
//! GF(2) (signs). The degree of the map is a polynomial in the unknowns that
//! is then read off on every case.

use crate::cohomology::{top_class_coefficient, VolumeForm};
use crate::gca::{AlgebraMap, Element, Monomial};
use crate::linalg::{solve_gf2, Echelon, Gf2Solution, IntegerEchelon, SparseVec};
use crate::poly::{PMono, Poly, Var};
use crate::rational::{pow_q, Q};
use crate::sullivan::SullivanAlgebra;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub const DEFAULT_CASE_DEPTH: usize = 12;

#[derive(Clone, Debug)]
pub struct Unknown {
    pub name: String,
    pub generator: usize,
    pub monomial: Monomial,
    /// Coefficient of the generator on itself.
    pub diagonal: bool,
}

#[derive(Clone, Debug)]
pub struct EndoAnsatz {
    pub unknowns: Vec<Unknown>,
    pub images: Vec<Element<Poly>>,
}

impl EndoAnsatz {
    pub fn name(&self, v: Var) -> &str {
        &self.unknowns[v as usize].name
    }

    pub fn var_of(&self, generator: usize, m: &Monomial) -> Option<Var> {
        self.unknowns
            .iter()
            .position(|u| u.generator == generator && &u.monomial == m)
            .map(|i| i as Var)
    }

    pub fn diagonal(&self, generator: usize) -> Option<Var> {
        self.unknowns.iter().position(|u| u.generator == generator && u.diagonal).map(|i| i as Var)
    }

    pub fn unknowns_of(&self, generator: usize) -> impl Iterator<Item = Var> + '_ {
        self.unknowns.iter().enumerate().filter(move |(_, u)| u.generator == generator).map(|(i, _)| i as Var)
    }

    pub fn fmt_poly(&self, p: &Poly) -> String {
        p.fmt_with(&|v| self.name(v).to_string())
    }

    /// Images of the generators at a full assignment of the unknowns.
    pub fn instantiate(&self, values: &HashMap<Var, Q>) -> Vec<Element> {
        self.images
            .iter()
            .map(|img| {
                Element::from_terms(img.terms().filter_map(|(m, p)| {
                    let c = p.evaluate(values).unwrap_or_else(Q::zero);
                    (!c.is_zero()).then(|| (m.clone(), c))
                }))
            })
            .collect()
    }
}

/// One unknown per basis monomial of each generator's degree.
pub fn generic_ansatz(alg: &SullivanAlgebra) -> EndoAnsatz {
    let gca = alg.gca();
    let mut unknowns = Vec::new();
    let mut images = Vec::new();
    for (g, gen) in alg.generators().iter().enumerate() {
        let own = gca.generator(g);
        let mut img = Element::zero();
        for m in gca.basis_of_degree(gen.degree) {
            let v = unknowns.len() as Var;
            unknowns.push(Unknown {
                name: format!("c[{}|{}]", gen.name, gca.fmt_monomial(&m)),
                generator: g,
                diagonal: m == own,
                monomial: m.clone(),
            });
            img.add_term(m, Poly::var(v));
        }
        images.push(img);
    }
    EndoAnsatz { unknowns, images }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialConstraint {
    pub generator: usize,
    pub monomial: Monomial,
    pub poly: Poly,
}

/// Coefficients of `d(f(v)) - f(dv)` for every generator `v`.
pub fn extract_constraints(alg: &SullivanAlgebra, ansatz: &EndoAnsatz) -> Vec<PolynomialConstraint> {
    let gca = alg.gca();
    let mut map = AlgebraMap::new(gca, gca, &ansatz.images);
    let mut out = Vec::new();
    for g in 0..alg.ngens() {
        let lhs = alg.d(&ansatz.images[g]);
        let rhs = map.image(alg.differential(g));
        for (m, p) in lhs.sub(&rhs).into_terms() {
            out.push(PolynomialConstraint { generator: g, monomial: m, poly: p });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Assumption {
    Zero,
    NonZero,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CaseContext {
    pub assumptions: BTreeMap<Var, Assumption>,
    /// Eliminated unknowns, expressed in the surviving ones.
    pub substitutions: BTreeMap<Var, Poly>,
    /// Split decisions along the path from the root, in order.
    pub path: Vec<(Var, Assumption)>,
}

impl CaseContext {
    pub fn is_nonzero(&self, v: Var) -> bool {
        self.assumptions.get(&v) == Some(&Assumption::NonZero)
    }

    fn eliminate(&mut self, v: Var, value: Poly, constraints: &mut [Poly]) {
        for p in self.substitutions.values_mut() {
            if p.degree_in(v) > 0 {
                *p = p.substitute_one(v, &value);
            }
        }
        for c in constraints.iter_mut() {
            if c.degree_in(v) > 0 {
                *c = c.substitute_one(v, &value);
            }
        }
        if value.is_zero() {
            self.assumptions.insert(v, Assumption::Zero);
        }
        self.substitutions.insert(v, value);
    }

    fn assume(&mut self, v: Var, a: Assumption, constraints: &mut [Poly]) {
        self.path.push((v, a));
        match a {
            Assumption::Zero => self.eliminate(v, Poly::zero(), constraints),
            Assumption::NonZero => {
                self.assumptions.insert(v, a);
            }
        }
    }

    /// Full assignment from values of the surviving unknowns.
    pub fn complete(&self, survivors: &HashMap<Var, Q>) -> HashMap<Var, Q> {
        let mut all = survivors.clone();
        for (v, p) in &self.substitutions {
            let mut vals = survivors.clone();
            for u in p.vars() {
                vals.entry(u).or_insert_with(Q::zero);
            }
            all.insert(*v, p.evaluate(&vals).expect("all variables assigned"));
        }
        all
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimplifyOutcome {
    Contradiction,
    /// Every remaining constraint is a binomial in unknowns assumed nonzero.
    Solved,
    Split(Var),
    /// Nothing applies and no unknown is eligible for splitting.
    Stuck,
}

fn normalize(constraints: &mut Vec<Poly>) {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in constraints.drain(..) {
        if c.is_zero() {
            continue;
        }
        let m = c.monic();
        if seen.insert(format!("{m:?}")) {
            out.push(m);
        }
    }
    *constraints = out;
}

fn is_binomial_in_nonzero(c: &Poly, ctx: &CaseContext) -> bool {
    c.num_terms() == 2 && c.vars().iter().all(|&v| ctx.is_nonzero(v))
}

/// One pass of the rewriting rules, repeated to a fixed point.
///
/// `diagonal` marks unknowns eligible for splitting besides those occurring
/// in a product set to zero.
pub fn simplify(constraints: &mut Vec<Poly>, ctx: &mut CaseContext, diagonal: &BTreeSet<Var>) -> SimplifyOutcome {
    loop {
        normalize(constraints);
        if constraints.iter().any(|c| c.constant_value().is_some()) {
            return SimplifyOutcome::Contradiction;
        }
        // strip monomial factors known to be nonzero
        let mut changed = false;
        for c in constraints.iter_mut() {
            let content = c.monomial_content();
            let known: Vec<(Var, u32)> =
                content.pairs().iter().copied().filter(|&(v, _)| ctx.is_nonzero(v)).collect();
            if !known.is_empty() {
                *c = c.div_mono(&PMono::from_pairs(known)).unwrap();
                changed = true;
            }
        }
        if changed {
            continue;
        }
        if constraints.iter().any(|c| c.constant_value().is_some()) {
            return SimplifyOutcome::Contradiction;
        }
        // a single monomial vanishing with one possibly-zero factor
        if let Some(v) = constraints.iter().find_map(|c| {
            let (m, _) = c.as_monomial()?;
            let open: Vec<Var> = m.vars().filter(|v| !ctx.is_nonzero(*v)).collect();
            (open.len() == 1).then(|| open[0])
        }) {
            ctx.eliminate(v, Poly::zero(), constraints);
            ctx.assumptions.insert(v, Assumption::Zero);
            continue;
        }
        if let Some((v, value)) = linear_candidate(constraints, ctx, diagonal, false)
            .or_else(|| linear_candidate(constraints, ctx, diagonal, true))
        {
            ctx.eliminate(v, value, constraints);
            continue;
        }
        if constraints.iter().all(|c| is_binomial_in_nonzero(c, ctx)) {
            return SimplifyOutcome::Solved;
        }
        return match split_candidate(constraints, ctx, diagonal) {
            Some(v) => SimplifyOutcome::Split(v),
            None => SimplifyOutcome::Stuck,
        };
    }
}

/// `u = value` from a constraint linear in `u`. Without `monomial_coeff` the
/// coefficient of `u` must be a constant; with it, a monomial in unknowns
/// assumed nonzero that divides the rest of the constraint.
fn linear_candidate(
    constraints: &[Poly],
    ctx: &CaseContext,
    diagonal: &BTreeSet<Var>,
    monomial_coeff: bool,
) -> Option<(Var, Poly)> {
    let mut best: Option<((bool, Var), Poly)> = None;
    for c in constraints {
        for v in c.vars() {
            if c.degree_in(v) != 1 {
                continue;
            }
            let (a, b) = c.linear_split(v).unwrap();
            let value = if let Some(k) = a.constant_value() {
                if k.is_zero() {
                    continue;
                }
                b.scale(&(-k.recip()))
            } else if monomial_coeff {
                let Some((m, k)) = a.as_monomial() else { continue };
                if !m.vars().all(|u| ctx.is_nonzero(u)) {
                    continue;
                }
                match b.div_mono(m) {
                    Some(q) => q.scale(&(-k.recip())),
                    None => continue,
                }
            } else {
                continue;
            };
            // prefer non-diagonal unknowns, then the latest one
            let key = (!diagonal.contains(&v), v);
            if best.as_ref().is_none_or(|(k, _)| key > *k) {
                best = Some((key, value));
            }
        }
        if best.as_ref().is_some_and(|((nd, _), _)| *nd) && !monomial_coeff {
            break;
        }
    }
    best.map(|((_, v), p)| (v, p))
}

fn split_candidate(constraints: &[Poly], ctx: &CaseContext, diagonal: &BTreeSet<Var>) -> Option<Var> {
    let open = |v: &Var| !ctx.assumptions.contains_key(v);
    // factors of a product set to zero
    let mut product: BTreeSet<Var> = BTreeSet::new();
    for c in constraints {
        product.extend(c.monomial_content().vars().filter(open));
    }
    if let Some(v) = product.iter().find(|v| diagonal.contains(v)).or(product.iter().next()) {
        return Some(*v);
    }
    let mut involved: BTreeSet<Var> = BTreeSet::new();
    for c in constraints {
        for (m, _) in c.terms() {
            if m.total_degree() >= 2 {
                involved.extend(m.vars().filter(open));
            }
        }
    }
    let pick = involved.iter().find(|v| diagonal.contains(v)).or(involved.iter().next());
    pick.copied()
}

/// Substitutions only, from constraints linear in an unknown with a constant
/// coefficient; no case splits. Returns the reduced constraints and the
/// substitutions made.
pub fn linear_reduction(constraints: &[Poly], diagonal: &BTreeSet<Var>) -> (Vec<Poly>, BTreeMap<Var, Poly>) {
    let mut cs = constraints.to_vec();
    let mut ctx = CaseContext::default();
    loop {
        normalize(&mut cs);
        match linear_candidate(&cs, &ctx, diagonal, false) {
            Some((v, value)) => ctx.eliminate(v, value, &mut cs),
            None => return (cs, ctx.substitutions),
        }
    }
}

/// Whether `p` is a rational linear combination of `basis`.
pub fn in_linear_span(basis: &[Poly], p: &Poly) -> bool {
    let mut index: BTreeMap<PMono, usize> = BTreeMap::new();
    let mut coords = |q: &Poly| -> SparseVec {
        let mut v = SparseVec::new();
        for (m, c) in q.terms() {
            let n = index.len();
            let i = *index.entry(m.clone()).or_insert(n);
            v.insert(i, c.clone());
        }
        v
    };
    let cols: Vec<SparseVec> = basis.iter().map(&mut coords).collect();
    let target = coords(p);
    Echelon::from_columns(cols.iter(), false).contains(&target)
}

/// An equation `lhs = constant * rhs` between monomials of nonzero unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialEquation {
    pub lhs: PMono,
    pub rhs: PMono,
    pub constant: Q,
}

impl MonomialEquation {
    /// From a binomial `a*M + b*N = 0`.
    pub fn from_binomial(p: &Poly) -> Option<Self> {
        let mut it = p.terms();
        let (m1, c1) = it.next()?;
        let (m2, c2) = it.next()?;
        if it.next().is_some() {
            return None;
        }
        Some(MonomialEquation { lhs: m1.clone(), rhs: m2.clone(), constant: -(c2 / c1) })
    }
}

/// Solutions of a monomial system over the nonzero rationals:
/// `u_i = sign_i * prod_p p^(v_p)_i * prod_j t_j^(K_j)_i` with `t_j` positive
/// rationals and signs from an affine space over GF(2).
#[derive(Clone, Debug)]
pub struct MonomialSolution {
    pub vars: Vec<Var>,
    pub kernel: Vec<Vec<BigInt>>,
    pub particular: BTreeMap<BigInt, Vec<BigInt>>,
    pub signs: Gf2Solution,
}

impl MonomialSolution {
    fn position(&self, v: Var) -> Option<usize> {
        self.vars.binary_search(&v).ok()
    }

    /// Whether |u| is the same at every solution.
    pub fn magnitude_fixed(&self, v: Var) -> bool {
        let i = self.position(v).expect("variable of the system");
        self.kernel.iter().all(|k| k[i].is_zero())
    }

    /// Absolute value of the particular solution times `t^shift`.
    fn magnitude(&self, i: usize, shift: &[BigInt], t: &Q) -> Q {
        let mut x = Q::one();
        for (p, v) in &self.particular {
            x *= pow_signed(&Q::from_integer(p.clone()), &v[i]);
        }
        if let Some(s) = shift.get(i) {
            x *= pow_signed(t, s);
        }
        x
    }

    /// Values of the system's unknowns for the sign vector `signs`, shifted
    /// along the lattice direction `shift` with parameter `t`.
    pub fn point(&self, signs: &[bool], shift: &[BigInt], t: &Q) -> HashMap<Var, Q> {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let m = self.magnitude(i, shift, t);
                (v, if signs[i] { -m } else { m })
            })
            .collect()
    }

    /// Finite solution set, when the kernel is trivial and the sign space small.
    pub fn finite_points(&self, max_log: usize) -> Option<Vec<HashMap<Var, Q>>> {
        if !self.kernel.is_empty() {
            return None;
        }
        let signs = self.signs.enumerate(max_log)?;
        Some(signs.iter().map(|s| self.point(s, &[], &Q::one())).collect())
    }
}

fn pow_signed(x: &Q, e: &BigInt) -> Q {
    let n = e.abs().to_u32().expect("exponent fits");
    let p = pow_q(x, n);
    if e.is_negative() {
        p.recip()
    } else {
        p
    }
}

/// Prime factorisation by trial division; a cofactor left above the search
/// bound is returned as if it were prime.
fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    let bound = BigInt::from(1_000_000u32);
    while &p * &p <= n && p <= bound {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

fn valuations(q: &Q) -> BTreeMap<BigInt, BigInt> {
    let mut v = BTreeMap::new();
    for (p, e) in factor(q.numer()) {
        *v.entry(p).or_insert_with(BigInt::zero) += e;
    }
    for (p, e) in factor(q.denom()) {
        *v.entry(p).or_insert_with(BigInt::zero) -= e;
    }
    v
}

/// Solves a monomial system over the given unknowns (all assumed nonzero).
/// `None` when it has no solution in nonzero rationals.
pub fn solve_monomial_system(eqs: &[MonomialEquation], vars: &[Var]) -> Option<MonomialSolution> {
    let mut vars = vars.to_vec();
    for e in eqs {
        vars.extend(e.lhs.vars().chain(e.rhs.vars()));
    }
    vars.sort_unstable();
    vars.dedup();
    let n = vars.len();
    let pos = |v: Var| vars.binary_search(&v).unwrap();
    let rows: Vec<Vec<BigInt>> = eqs
        .iter()
        .map(|e| {
            let mut r = vec![BigInt::zero(); n];
            for &(v, k) in e.lhs.pairs() {
                r[pos(v)] += k;
            }
            for &(v, k) in e.rhs.pairs() {
                r[pos(v)] -= k;
            }
            r
        })
        .collect();
    let ech = IntegerEchelon::new(&rows, n);
    let vals: Vec<BTreeMap<BigInt, BigInt>> = eqs.iter().map(|e| valuations(&e.constant)).collect();
    let primes: BTreeSet<BigInt> = vals.iter().flat_map(|v| v.keys().cloned()).collect();
    let mut particular = BTreeMap::new();
    for p in primes {
        let b: Vec<BigInt> = vals.iter().map(|v| v.get(&p).cloned().unwrap_or_default()).collect();
        particular.insert(p, ech.solve(&b)?);
    }
    let parity = |x: &BigInt| x.is_odd();
    let gf_rows: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(parity).collect()).collect();
    let rhs: Vec<bool> = eqs.iter().map(|e| e.constant.is_negative()).collect();
    let signs = solve_gf2(&gf_rows, &rhs, n)?;
    Some(MonomialSolution { vars, kernel: ech.kernel(), particular, signs })
}

/// Set of values the degree takes on one case.
#[derive(Clone, Debug, PartialEq)]
pub enum DegreeSet {
    Finite(BTreeSet<Q>),
    /// `{c * t^exponent : c in coefficients, t positive rational}`.
    Power { coefficients: BTreeSet<Q>, exponent: u32 },
    /// All values of an expression affine in an unconstrained unknown.
    Affine { expression: String },
    Unresolved { reason: String },
}

impl DegreeSet {
    pub fn has_negative(&self) -> bool {
        match self {
            DegreeSet::Finite(s) => s.iter().any(|q| q.is_negative()),
            DegreeSet::Power { coefficients, .. } => coefficients.iter().any(|q| q.is_negative()),
            DegreeSet::Affine { .. } => true,
            DegreeSet::Unresolved { .. } => true,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, DegreeSet::Power { .. } | DegreeSet::Affine { .. })
    }

    /// Membership; unresolved sets admit everything.
    pub fn contains(&self, x: &Q) -> bool {
        match self {
            DegreeSet::Finite(s) => s.contains(x),
            DegreeSet::Power { coefficients, exponent } => {
                coefficients.iter().any(|c| is_positive_power(&(x / c), *exponent))
            }
            DegreeSet::Affine { .. } | DegreeSet::Unresolved { .. } => true,
        }
    }
}

/// Whether `x = t^n` for a positive rational `t`.
pub fn is_positive_power(x: &Q, n: u32) -> bool {
    if !x.is_positive() {
        return false;
    }
    let root = |a: &BigInt| {
        let r = a.nth_root(n);
        num_traits::pow(r.clone(), n as usize) == *a
    };
    root(x.numer()) && root(x.denom())
}

impl fmt::Display for DegreeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &BTreeSet<Q>| s.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            DegreeSet::Finite(s) => write!(f, "{{{}}}", list(s)),
            DegreeSet::Power { coefficients, exponent } => {
                let cs: Vec<String> = coefficients
                    .iter()
                    .map(|c| match c {
                        c if c.is_one() => String::new(),
                        c if *c == -Q::one() => "-".to_string(),
                        c => format!("{c}*"),
                    })
                    .collect();
                let forms: Vec<String> = cs.iter().map(|c| format!("{c}t^{exponent}")).collect();
                write!(f, "{{{} : t > 0 rational}}", forms.join(", "))
            }
            DegreeSet::Affine { expression } => write!(f, "all values of {expression}"),
            DegreeSet::Unresolved { reason } => write!(f, "unresolved ({reason})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CaseLeaf {
    pub context: CaseContext,
    /// Remaining binomial constraints, or the residual system when unresolved.
    pub residual: Vec<Poly>,
    pub degree: Poly,
    pub degrees: DegreeSet,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub leaf: usize,
    pub images: Vec<Element>,
    pub degree: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Every degree lies in {-1, 0, 1}.
    Inflexible { spectrum: BTreeSet<Q> },
    /// No case admits a negative degree. `flexible` records whether verified
    /// instances of unbounded degree were found as well.
    NoOrientationReversal { forms: Vec<DegreeSet>, flexible: bool },
    /// Verified instances of unbounded degree; `orientation_reversing` is
    /// `Some(true)` when one of them has negative degree.
    Flexible { orientation_reversing: Option<bool> },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Inflexible { .. } => "Inflexible",
            Verdict::NoOrientationReversal { .. } => "NoOrientationReversal",
            Verdict::Flexible { .. } => "Flexible",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub case_depth: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { case_depth: DEFAULT_CASE_DEPTH }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub ansatz: EndoAnsatz,
    pub constraints: Vec<PolynomialConstraint>,
    /// Degree of the generic map before any case assumption.
    pub degree: Poly,
    pub leaves: Vec<CaseLeaf>,
    /// Paths of the cases closed by a contradiction.
    pub pruned: Vec<Vec<(Var, Assumption)>>,
    pub instances: Vec<Instance>,
    pub verdict: Verdict,
}

impl SpectrumResult {
    pub fn fmt_path(&self, path: &[(Var, Assumption)]) -> String {
        if path.is_empty() {
            return "root".to_string();
        }
        path.iter()
            .map(|(v, a)| match a {
                Assumption::Zero => format!("{} = 0", self.ansatz.name(*v)),
                Assumption::NonZero => format!("{} != 0", self.ansatz.name(*v)),
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Union of the finite parts; `None` if some case is not finite.
    pub fn finite_spectrum(&self) -> Option<BTreeSet<Q>> {
        let mut all = BTreeSet::new();
        for l in &self.leaves {
            match &l.degrees {
                DegreeSet::Finite(s) => all.extend(s.iter().cloned()),
                _ => return None,
            }
        }
        Some(all)
    }

    pub fn contains_degree(&self, x: &Q) -> bool {
        self.leaves.iter().any(|l| l.degrees.contains(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorphismCheck {
    pub valid: bool,
    pub failing_generator: Option<usize>,
    pub degree: Option<Q>,
}

/// Checks `d f(v) = f(dv)` on generators; for a valid map also returns its degree.
pub fn verify_morphism(alg: &SullivanAlgebra, images: &[Element], vol: &VolumeForm) -> MorphismCheck {
    let gca = alg.gca();
    let degrees_ok = images.len() == alg.ngens()
        && images.iter().enumerate().all(|(g, e)| {
            e.ngens().is_none_or(|n| n == alg.ngens())
                && e.monomials().all(|m| gca.degree(m) == alg.generators()[g].degree)
        });
    if !degrees_ok {
        let bad = (0..alg.ngens()).find(|&g| {
            images.get(g).is_none_or(|e| e.monomials().any(|m| gca.degree(m) != alg.generators()[g].degree))
        });
        return MorphismCheck { valid: false, failing_generator: bad, degree: None };
    }
    let mut map = AlgebraMap::new(gca, gca, images);
    for g in 0..alg.ngens() {
        if alg.d(&images[g]) != map.image(alg.differential(g)) {
            return MorphismCheck { valid: false, failing_generator: Some(g), degree: None };
        }
    }
    let image = map.image(&vol.representative);
    let degree = top_class_coefficient(alg, &image, vol).expect("image of a closed top form");
    MorphismCheck { valid: true, failing_generator: None, degree: Some(degree) }
}

pub fn identity_images(alg: &SullivanAlgebra) -> Vec<Element> {
    (0..alg.ngens()).map(|g| alg.generator_element(g)).collect()
}

/// Degree of the generic map as a polynomial in the unknowns.
pub fn volume_degree_polynomial(alg: &SullivanAlgebra, ansatz: &EndoAnsatz, vol: &VolumeForm) -> Poly {
    let gca = alg.gca();
    let image = AlgebraMap::new(gca, gca, &ansatz.images).image(&vol.representative);
    vol.functional.eval(&image)
}

struct Explorer<'a> {
    alg: &'a SullivanAlgebra,
    vol: &'a VolumeForm,
    ansatz: &'a EndoAnsatz,
    diagonal: BTreeSet<Var>,
    degree: Poly,
    depth: usize,
    leaves: Vec<CaseLeaf>,
    pruned: Vec<Vec<(Var, Assumption)>>,
    solutions: Vec<Option<MonomialSolution>>,
    recipes: Vec<Vec<Recipe>>,
}

impl Explorer<'_> {
    fn explore(&mut self, mut cs: Vec<Poly>, mut ctx: CaseContext) {
        let outcome = simplify(&mut cs, &mut ctx, &self.diagonal);
        let split = match outcome {
            SimplifyOutcome::Contradiction => {
                self.pruned.push(ctx.path);
                return;
            }
            SimplifyOutcome::Split(v) => Some(v),
            SimplifyOutcome::Stuck => {
                let degree = self.degree_at(&ctx);
                self.push_leaf(ctx, cs, degree, DegreeSet::Unresolved { reason: "no rule applies".into() }, None, Vec::new());
                return;
            }
            SimplifyOutcome::Solved => {
                let degree = self.degree_at(&ctx);
                // make every unknown of a one-term degree nonzero or zero
                let open = degree
                    .as_monomial()
                    .and_then(|(m, _)| m.vars().find(|v| !ctx.assumptions.contains_key(v)));
                match open {
                    Some(v) => Some(v),
                    None => {
                        self.solve_leaf(ctx, cs, degree);
                        return;
                    }
                }
            }
        };
        let v = split.unwrap();
        if ctx.path.len() >= self.depth {
            let degree = self.degree_at(&ctx);
            self.push_leaf(ctx, cs, degree, DegreeSet::Unresolved { reason: "case depth limit".into() }, None, Vec::new());
            return;
        }
        let mut zero_cs = cs.clone();
        let mut zero_ctx = ctx.clone();
        zero_ctx.assume(v, Assumption::Zero, &mut zero_cs);
        self.explore(zero_cs, zero_ctx);
        ctx.assume(v, Assumption::NonZero, &mut cs);
        self.explore(cs, ctx);
    }

    fn degree_at(&self, ctx: &CaseContext) -> Poly {
        let subs: HashMap<Var, Poly> = ctx.substitutions.iter().map(|(v, p)| (*v, p.clone())).collect();
        self.degree.substitute(&subs)
    }

    fn push_leaf(
        &mut self,
        context: CaseContext,
        residual: Vec<Poly>,
        degree: Poly,
        degrees: DegreeSet,
        sol: Option<MonomialSolution>,
        recipes: Vec<Recipe>,
    ) {
        self.leaves.push(CaseLeaf { context, residual, degree, degrees });
        self.solutions.push(sol);
        self.recipes.push(recipes);
    }

    fn solve_leaf(&mut self, ctx: CaseContext, cs: Vec<Poly>, degree: Poly) {
        let eqs: Vec<MonomialEquation> = cs.iter().filter_map(MonomialEquation::from_binomial).collect();
        let nonzero: Vec<Var> = ctx
            .assumptions
            .iter()
            .filter(|(v, a)| **a == Assumption::NonZero && !ctx.substitutions.contains_key(v))
            .map(|(v, _)| *v)
            .collect();
        let Some(sol) = solve_monomial_system(&eqs, &nonzero) else {
            self.pruned.push(ctx.path);
            return;
        };
        let (degrees, recipes) = classify_degree(&degree, &sol, self.ansatz);
        self.push_leaf(ctx, cs, degree, degrees, Some(sol), recipes);
    }
}

fn ext_gcd(xs: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut coeffs: Vec<BigInt> = vec![BigInt::zero(); xs.len()];
    for (i, x) in xs.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let e = g.extended_gcd(x);
        for c in coeffs.iter_mut().take(i) {
            *c *= &e.x;
        }
        coeffs[i] = e.y;
        g = e.gcd;
    }
    if g.is_negative() {
        g = -g;
        for c in &mut coeffs {
            *c = -c.clone();
        }
    }
    (g, coeffs)
}

fn signed(m: &Q, negative: bool) -> Q {
    if negative {
        -m.clone()
    } else {
        m.clone()
    }
}

/// Sign vectors of the solution set, one per distinct pattern on `vars`.
fn sign_patterns(sol: &MonomialSolution, vars: &[Var], max_log: usize) -> Option<Vec<Vec<bool>>> {
    let idx: Vec<usize> = vars.iter().filter_map(|v| sol.position(*v)).collect();
    let project = |s: &[bool]| idx.iter().map(|&i| s[i]).collect::<Vec<bool>>();
    // reduce the null basis on the projected coordinates
    let mut basis: Vec<(Vec<bool>, Vec<bool>)> = Vec::new();
    for n in &sol.signs.null_basis {
        let mut full = n.clone();
        let mut proj = project(n);
        for (bp, bf) in &basis {
            let lead = bp.iter().position(|x| *x).unwrap();
            if proj[lead] {
                proj.iter_mut().zip(bp).for_each(|(x, y)| *x ^= *y);
                full.iter_mut().zip(bf).for_each(|(x, y)| *x ^= *y);
            }
        }
        if proj.iter().any(|x| *x) {
            basis.push((proj, full));
        }
    }
    if basis.len() > max_log {
        return None;
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << basis.len()) {
        let mut s = sol.signs.particular.clone();
        for (k, (_, f)) in basis.iter().enumerate() {
            if mask >> k & 1 == 1 {
                s.iter_mut().zip(f).for_each(|(x, y)| *x ^= *y);
            }
        }
        out.push(s);
    }
    Some(out)
}

/// A polynomial in the lattice parameters `t_j` (integer exponents) with
/// coefficients polynomial in the unknowns outside the monomial system.
type Laurent = BTreeMap<Vec<BigInt>, Poly>;

/// The degree on the solutions with sign vector `signs`, as a function of
/// the lattice parameters.
fn parametrize(degree: &Poly, sol: &MonomialSolution, signs: &[bool]) -> Laurent {
    let mut out: Laurent = BTreeMap::new();
    let ones: Vec<BigInt> = Vec::new();
    for (m, c) in degree.terms() {
        let mut coeff = c.clone();
        let mut expo = vec![BigInt::zero(); sol.kernel.len()];
        let mut rest = Vec::new();
        for &(v, e) in m.pairs() {
            match sol.position(v) {
                Some(i) => {
                    coeff *= pow_q(&signed(&sol.magnitude(i, &ones, &Q::one()), signs[i]), e);
                    for (x, k) in expo.iter_mut().zip(&sol.kernel) {
                        *x += &k[i] * e;
                    }
                }
                None => rest.push((v, e)),
            }
        }
        let term = Poly::term(PMono::from_pairs(rest), coeff);
        let slot = out.entry(expo).or_insert_with(Poly::zero);
        slot.add_assign(&term);
        if slot.is_zero() {
            let key: Vec<Vec<BigInt>> = out.iter().filter(|(_, p)| p.is_zero()).map(|(k, _)| k.clone()).collect();
            for k in key {
                out.remove(&k);
            }
        }
    }
    out
}

/// How to build a concrete map realising one degree of a leaf.
#[derive(Clone, Debug)]
struct Recipe {
    signs: Vec<bool>,
    shift: Vec<BigInt>,
    t: Q,
    free: HashMap<Var, Q>,
    expected: Q,
}

fn classify_degree(degree: &Poly, sol: &MonomialSolution, ansatz: &EndoAnsatz) -> (DegreeSet, Vec<Recipe>) {
    let unresolved = |r: &str| (DegreeSet::Unresolved { reason: r.to_string() }, Vec::new());
    let in_system: Vec<Var> = degree.vars().into_iter().filter(|v| sol.position(*v).is_some()).collect();
    let Some(patterns) = sign_patterns(sol, &in_system, 12) else {
        return unresolved("too many sign patterns");
    };
    let none: Vec<BigInt> = Vec::new();
    let mut finite = BTreeSet::new();
    let mut powers: BTreeMap<BigInt, BTreeSet<Q>> = BTreeMap::new();
    let mut affine: Option<String> = None;
    let mut recipes = Vec::new();
    for s in &patterns {
        let l = parametrize(degree, sol, s);
        if l.values().any(|p| p.constant_value().is_none()) {
            // unknowns outside the system remain: look for one occurring linearly
            if l.len() != 1 || !l.keys().next().unwrap().iter().all(|x| x.is_zero()) {
                return unresolved("degree depends on lattice parameters and free unknowns");
            }
            let p = l.values().next().unwrap();
            let Some(u) = free_linear_var(p, sol) else {
                return unresolved("degree is not affine in a free unknown");
            };
            let others: HashMap<Var, Poly> =
                p.vars().into_iter().filter(|v| *v != u).map(|v| (v, Poly::zero())).collect();
            let (a, b) = p.substitute(&others).linear_split(u).unwrap();
            if let (Some(a), Some(b)) = (a.constant_value(), b.constant_value()) {
                if !a.is_zero() {
                    for target in [-2, 3] {
                        let target = Q::from_integer(target.into());
                        let mut free: HashMap<Var, Q> = others.keys().map(|v| (*v, Q::zero())).collect();
                        free.insert(u, (&target - &b) / &a);
                        recipes.push(Recipe { signs: s.clone(), shift: none.clone(), t: Q::one(), free, expected: target });
                    }
                }
            }
            affine = Some(ansatz.fmt_poly(p));
            continue;
        }
        match l.len() {
            0 => {
                finite.insert(Q::zero());
                recipes.push(Recipe { signs: s.clone(), shift: none.clone(), t: Q::one(), free: HashMap::new(), expected: Q::zero() });
            }
            1 => {
                let (m, c) = l.iter().next().unwrap();
                let c = c.constant_value().unwrap();
                let (g, a) = ext_gcd(m);
                if g.is_zero() {
                    finite.insert(c.clone());
                    recipes.push(Recipe { signs: s.clone(), shift: none.clone(), t: Q::one(), free: HashMap::new(), expected: c });
                    continue;
                }
                let mut shift = vec![BigInt::zero(); sol.vars.len()];
                for (k, aj) in sol.kernel.iter().zip(&a) {
                    for (x, y) in shift.iter_mut().zip(k) {
                        *x += aj * y;
                    }
                }
                let e = g.to_u32().expect("exponent fits");
                for t in [2, 3] {
                    let t = Q::from_integer(t.into());
                    let expected = &c * pow_q(&t, e);
                    recipes.push(Recipe { signs: s.clone(), shift: shift.clone(), t, free: HashMap::new(), expected });
                }
                powers.entry(g).or_default().insert(c);
            }
            _ => return unresolved("degree is not a monomial in the lattice parameters"),
        }
    }
    let set = match (affine, powers.len(), finite.is_empty()) {
        (Some(expression), _, _) => DegreeSet::Affine { expression },
        (None, 0, _) => DegreeSet::Finite(finite),
        (None, 1, true) => {
            let (g, coefficients) = powers.into_iter().next().unwrap();
            DegreeSet::Power { coefficients, exponent: g.to_u32().unwrap() }
        }
        _ => return unresolved("degree mixes several shapes across sign patterns"),
    };
    (set, recipes)
}

/// An unknown outside the monomial system occurring linearly.
fn free_linear_var(p: &Poly, sol: &MonomialSolution) -> Option<Var> {
    p.vars().into_iter().find(|v| sol.position(*v).is_none() && p.degree_in(*v) == 1)
}

impl Explorer<'_> {
    /// Concrete verified maps realising the degrees of one leaf.
    fn instances(&self, leaf_index: usize) -> Vec<Instance> {
        let leaf = &self.leaves[leaf_index];
        let Some(sol) = &self.solutions[leaf_index] else { return Vec::new() };
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for r in &self.recipes[leaf_index] {
            if !seen.insert(r.expected.clone()) {
                continue;
            }
            let mut survivors = sol.point(&r.signs, &r.shift, &r.t);
            survivors.extend(r.free.iter().map(|(v, q)| (*v, q.clone())));
            let values = leaf.context.complete(&survivors);
            let images = self.ansatz.instantiate(&values);
            let check = verify_morphism(self.alg, &images, self.vol);
            if let (true, Some(degree)) = (check.valid, check.degree) {
                if degree == r.expected {
                    out.push(Instance { leaf: leaf_index, images, degree });
                }
            }
        }
        out
    }
}

/// Full pipeline: ansatz, constraints, case tree, degrees, verdict.
pub fn degree_spectrum(alg: &SullivanAlgebra, vol: &VolumeForm, opts: &SpectrumOptions) -> SpectrumResult {
    let ansatz = generic_ansatz(alg);
    let constraints = extract_constraints(alg, &ansatz);
    if !alg.factors().is_empty() {
        return SpectrumResult {
            ansatz,
            constraints,
            degree: Poly::zero(),
            leaves: Vec::new(),
            pruned: Vec::new(),
            instances: Vec::new(),
            verdict: Verdict::Inconclusive {
                reason: "tensor products are outside the automated solver; the extracted constraints are the residual system"
                    .into(),
            },
        };
    }
    let degree = volume_degree_polynomial(alg, &ansatz, vol);
    let diagonal: BTreeSet<Var> = (0..alg.ngens()).filter_map(|g| ansatz.diagonal(g)).collect();
    let mut ex = Explorer {
        alg,
        vol,
        ansatz: &ansatz,
        diagonal,
        degree: degree.clone(),
        depth: opts.case_depth,
        leaves: Vec::new(),
        pruned: Vec::new(),
        solutions: Vec::new(),
        recipes: Vec::new(),
    };
    ex.explore(constraints.iter().map(|c| c.poly.clone()).collect(), CaseContext::default());
    let instances: Vec<Instance> = (0..ex.leaves.len()).flat_map(|i| ex.instances(i)).collect();
    let verdict = classify(&ex.leaves, &instances);
    let (leaves, pruned) = (ex.leaves, ex.pruned);
    SpectrumResult { ansatz, constraints, degree, leaves, pruned, instances, verdict }
}

fn classify(leaves: &[CaseLeaf], instances: &[Instance]) -> Verdict {
    let resolved = leaves.iter().all(|l| !matches!(l.degrees, DegreeSet::Unresolved { .. }));
    let negative = leaves.iter().any(|l| l.degrees.has_negative());
    let unbounded = leaves.iter().any(|l| l.degrees.is_unbounded());
    let big = instances.iter().any(|i| i.degree.abs() > Q::one());
    let reversing = instances.iter().any(|i| i.degree.is_negative());
    if resolved && !unbounded {
        let all: BTreeSet<Q> = leaves
            .iter()
            .flat_map(|l| match &l.degrees {
                DegreeSet::Finite(s) => s.clone(),
                _ => BTreeSet::new(),
            })
            .collect();
        if all.iter().all(|q| q.abs() <= Q::one() && (q.is_zero() || q.abs().is_one())) {
            return Verdict::Inflexible { spectrum: all };
        }
        return Verdict::Inconclusive { reason: "finite spectrum outside {-1, 0, 1}".into() };
    }
    if resolved && !negative {
        let forms = leaves
            .iter()
            .map(|l| l.degrees.clone())
            .filter(|d| !matches!(d, DegreeSet::Finite(s) if s.iter().all(|q| q.is_zero())))
            .collect();
        return Verdict::NoOrientationReversal { forms, flexible: big };
    }
    if big {
        return Verdict::Flexible { orientation_reversing: if reversing { Some(true) } else { None } };
    }
    Verdict::Inconclusive {
        reason: if resolved {
            "negative or unbounded degrees predicted but no verified instance".into()
        } else {
            "unresolved cases remain".into()
        },
    }
}

/// Random verified maps drawn from the solved cases; returns (degree,
/// whether the degree lies in the reported spectrum).
pub fn sample_instances<R: Rng>(
    alg: &SullivanAlgebra,
    vol: &VolumeForm,
    result: &SpectrumResult,
    rng: &mut R,
    count: usize,
) -> Vec<(Q, bool)> {
    let mut out = Vec::new();
    let resolvable: Vec<usize> = (0..result.leaves.len())
        .filter(|&i| !matches!(result.leaves[i].degrees, DegreeSet::Unresolved { .. }))
        .collect();
    if resolvable.is_empty() {
        return out;
    }
    for _ in 0..count {
        let li = resolvable[rng.random_range(0..resolvable.len())];
        let leaf = &result.leaves[li];
        let eqs: Vec<MonomialEquation> = leaf.residual.iter().filter_map(MonomialEquation::from_binomial).collect();
        let nonzero: Vec<Var> = leaf
            .context
            .assumptions
            .iter()
            .filter(|(v, a)| **a == Assumption::NonZero && !leaf.context.substitutions.contains_key(v))
            .map(|(v, _)| *v)
            .collect();
        let Some(sol) = solve_monomial_system(&eqs, &nonzero) else { continue };
        let mut signs = sol.signs.particular.clone();
        for n in &sol.signs.null_basis {
            if rng.random_bool(0.5) {
                signs.iter_mut().zip(n).for_each(|(x, y)| *x ^= *y);
            }
        }
        let mut shift = vec![BigInt::zero(); sol.vars.len()];
        for k in &sol.kernel {
            let a = BigInt::from(rng.random_range(-1i64..=1));
            for (s, x) in shift.iter_mut().zip(k) {
                *s += &a * x;
            }
        }
        let t = Q::from_integer(rng.random_range(1i64..=5).into());
        let mut survivors = sol.point(&signs, &shift, &t);
        // unknowns outside the system that survived unconstrained
        let mut free: BTreeSet<Var> = leaf.degree.vars();
        for p in leaf.context.substitutions.values() {
            free.extend(p.vars());
        }
        for v in free {
            if !survivors.contains_key(&v) && !leaf.context.substitutions.contains_key(&v) {
                survivors.insert(v, Q::from_integer(rng.random_range(-5i64..=5).into()));
            }
        }
        let values = leaf.context.complete(&survivors);
        let images = result.ansatz.instantiate(&values);
        let check = verify_morphism(alg, &images, vol);
        if let (true, Some(d)) = (check.valid, check.degree) {
            let inside = result.contains_degree(&d);
            out.push((d, inside));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn mono(pairs: &[(Var, u32)]) -> PMono {
        PMono::from_pairs(pairs.to_vec())
    }

    #[test]
    fn monomial_system_with_trivial_kernel() {
        // k1^8 k2^8 = k1^18 k2 = k2^13
        let eqs = vec![
            MonomialEquation { lhs: mono(&[(0, 8), (1, 8)]), rhs: mono(&[(0, 18), (1, 1)]), constant: q(1) },
            MonomialEquation { lhs: mono(&[(0, 18), (1, 1)]), rhs: mono(&[(1, 13)]), constant: q(1) },
        ];
        let sol = solve_monomial_system(&eqs, &[]).unwrap();
        let mut pts: Vec<(Q, Q)> =
            sol.finite_points(8).unwrap().iter().map(|p| (p[&0].clone(), p[&1].clone())).collect();
        pts.sort();
        assert_eq!(pts, vec![(q(-1), q(1)), (q(1), q(1))]);
    }

    #[test]
    fn monomial_system_with_constant() {
        // k^2 = 4 and k^3 = -8 force k = -2
        let eqs = vec![
            MonomialEquation { lhs: mono(&[(0, 2)]), rhs: PMono::one(), constant: q(4) },
            MonomialEquation { lhs: mono(&[(0, 3)]), rhs: PMono::one(), constant: q(-8) },
        ];
        let sol = solve_monomial_system(&eqs, &[]).unwrap();
        let pts = sol.finite_points(4).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0][&0], q(-2));
        let bad = vec![MonomialEquation { lhs: mono(&[(0, 2)]), rhs: PMono::one(), constant: q(2) }];
        assert!(solve_monomial_system(&bad, &[]).is_none());
    }

    #[test]
    fn monomial_system_free_parameter() {
        let eqs = vec![MonomialEquation { lhs: mono(&[(0, 2)]), rhs: mono(&[(0, 2)]), constant: q(1) }];
        let sol = solve_monomial_system(&eqs, &[]).unwrap();
        assert_eq!(sol.kernel.len(), 1);
        assert!(sol.finite_points(4).is_none());
    }

    #[test]
    fn powers() {
        assert!(is_positive_power(&q_frac_(16, 81), 4));
        assert!(!is_positive_power(&q(-16), 4));
        assert!(!is_positive_power(&q(8), 2));
    }

    fn q_frac_(a: i64, b: i64) -> Q {
        crate::rational::q_frac(a, b)
    }

    #[test]
    fn simplify_eliminates_and_splits() {
        // k3 - k1^4 k2^2, and k1 * c = 0 with k1 nonzero
        let k1 = Poly::var(0);
        let k2 = Poly::var(1);
        let k3 = Poly::var(2);
        let c = Poly::var(3);
        let mut cs = vec![k3.sub(&k1.pow(4).mul(&k2.pow(2))), k1.mul(&c)];
        let mut ctx = CaseContext::default();
        ctx.assumptions.insert(0, Assumption::NonZero);
        let diag = BTreeSet::from([0, 1, 2]);
        assert_eq!(simplify(&mut cs, &mut ctx, &diag), SimplifyOutcome::Solved);
        assert!(ctx.substitutions.contains_key(&2));
        assert_eq!(ctx.substitutions[&3], Poly::zero());
        let mut cs = vec![k1.mul(&k2)];
        let mut ctx = CaseContext::default();
        assert_eq!(simplify(&mut cs, &mut ctx, &diag), SimplifyOutcome::Split(0));
    }
}
