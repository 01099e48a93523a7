//! Machine-readable reports and their replay.
//!
//! A report carries the algebra as DSL text and every certificate in a form
//! that can be checked again without rerunning the search that produced it:
//! exactness witnesses are replayed by applying `d`, cocycles by checking
//! that they kill all exact elements, and morphisms by checking `df = fd`
//! on generators and evaluating the top functional.

use crate::cohomology::{Cocycle, TensorPart, TopFunctional};
use crate::dsl::{parse_algebra, parse_element, parse_morphism, print_algebra, print_morphism};
use crate::gca::{Element, Monomial};
use crate::rational::{parse_q, to_pq, Q};
use crate::sullivan::{tensor_product, SullivanAlgebra};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<serde_json::Value>,
}

impl Check {
    pub fn new(name: &str, status: Status, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status, detail: detail.into(), value: None }
    }

    pub fn with_value(mut self, v: serde_json::Value) -> Self {
        self.value = Some(v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraRecord {
    pub dsl: String,
    /// DSL text of the tensor factors, when the algebra is a product.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<String>,
}

impl AlgebraRecord {
    pub fn of(alg: &SullivanAlgebra, volume: Option<&Element>) -> Self {
        AlgebraRecord {
            dsl: print_algebra(alg, volume),
            factors: alg.factors().iter().map(|f| print_algebra(&f.algebra, None)).collect(),
        }
    }

    /// Rebuilds the algebra, with its tensor structure if it has one.
    pub fn load(&self) -> Result<SullivanAlgebra, ReplayError> {
        let parsed = parse_algebra(&self.dsl).map_err(|e| ReplayError::Parse(e.to_string()))?.algebra;
        if self.factors.is_empty() {
            return Ok(parsed);
        }
        let mut it = self.factors.iter().map(|t| {
            parse_algebra(t).map(|f| f.algebra).map_err(|e| ReplayError::Parse(e.to_string()))
        });
        let mut prod = it.next().unwrap()?;
        for f in it {
            prod = tensor_product(&prod, &f?);
        }
        if prod.gca() != parsed.gca() || prod.differentials() != parsed.differentials() {
            return Err(ReplayError::Parse("factors do not multiply to the recorded algebra".into()));
        }
        Ok(prod.with_name(parsed.name().to_string()))
    }
}

/// `(monomial, value)` pairs of a linear functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleRecord {
    pub degree: u32,
    pub values: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalRecord {
    Direct { cocycle: CocycleRecord },
    Tensor { parts: Vec<TensorPartRecord> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorPartRecord {
    pub factor: usize,
    pub offset: usize,
    pub len: usize,
    pub cocycle: CocycleRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub generator: String,
    pub exponent: u32,
    pub preimage: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub path: String,
    pub substitutions: Vec<String>,
    pub residual: Vec<String>,
    pub degree: String,
    pub degrees: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `d(preimage) = target`.
    Exact { target: String, preimage: String },
    /// A cocycle killing every exact element and not the target.
    NotExact { target: String, cocycle: CocycleRecord },
    /// One nilpotency witness per even generator.
    Ellipticity { witnesses: Vec<WitnessRecord> },
    /// Closed representative and a top functional normalised to 1 on it.
    Volume { representative: String, degree: u32, functional: FunctionalRecord },
    /// A map given on generators; `degree` is checked against the last volume certificate.
    Morphism { label: String, images: String, degree: Option<String> },
    /// Lower degree per generator; replay re-checks the grading condition.
    Grading { lower: Vec<(String, u32)> },
    /// Case tree of the degree analysis. Replay does not re-derive it; its
    /// concrete instances are separate morphism certificates.
    Spectrum {
        verdict: String,
        summary: String,
        unknowns: usize,
        constraints: usize,
        degree: String,
        leaves: Vec<LeafRecord>,
        pruned: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraRecord>,
    pub status: Status,
    pub checks: Vec<Check>,
    pub certificates: Vec<Certificate>,
}

impl Report {
    pub fn new(command: Vec<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            algebra: None,
            status: Status::Pass,
            checks: Vec::new(),
            certificates: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.status = self.status.max(c.status);
        self.checks.push(c);
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Inconclusive => "INCONCLUSIVE",
            };
            s.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        s
    }
}

pub fn cocycle_record(alg: &SullivanAlgebra, c: &Cocycle) -> CocycleRecord {
    CocycleRecord {
        degree: c.degree,
        values: c.values.iter().map(|(m, v)| (alg.gca().fmt_monomial(m), to_pq(v))).collect(),
    }
}

pub fn functional_record(alg: &SullivanAlgebra, f: &TopFunctional) -> FunctionalRecord {
    match f {
        TopFunctional::Direct(c) => FunctionalRecord::Direct { cocycle: cocycle_record(alg, c) },
        TopFunctional::Tensor(parts) => FunctionalRecord::Tensor {
            parts: parts
                .iter()
                .map(|p| {
                    let factor = alg.factors().iter().position(|f| f.offset == p.offset).expect("tensor part");
                    TensorPartRecord {
                        factor,
                        offset: p.offset,
                        len: p.len,
                        cocycle: cocycle_record(&alg.factors()[factor].algebra, &p.functional),
                    }
                })
                .collect(),
        },
    }
}

pub fn morphism_certificate(alg: &SullivanAlgebra, label: impl Into<String>, images: &[Element], degree: Option<&Q>) -> Certificate {
    Certificate::Morphism { label: label.into(), images: print_morphism(alg, images), degree: degree.map(to_pq) }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("{0}")]
    Parse(String),
    #[error("report has certificates but no algebra")]
    NoAlgebra,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReplayOutcome {
    Verified,
    /// Carried along without an independent check.
    Recorded,
    Failed(String),
}

fn parse_in(alg: &SullivanAlgebra, text: &str) -> Result<Element, String> {
    parse_element(alg, text).map_err(|e| format!("cannot parse {text:?}: {e}"))
}

fn parse_monomial(alg: &SullivanAlgebra, text: &str) -> Result<Monomial, String> {
    let e = parse_in(alg, text)?;
    let single = match e.terms().next() {
        Some((m, c)) if e.num_terms() == 1 && c.is_one() => Some(m.clone()),
        _ => None,
    };
    single.ok_or_else(|| format!("{text:?} is not a monomial"))
}

fn load_cocycle(alg: &SullivanAlgebra, r: &CocycleRecord) -> Result<Cocycle, String> {
    let mut values = BTreeMap::new();
    for (m, v) in &r.values {
        let m = parse_monomial(alg, m)?;
        if alg.gca().degree(&m) != r.degree {
            return Err(format!("monomial of the wrong degree in a degree {} cocycle", r.degree));
        }
        values.insert(m, parse_q(v).ok_or_else(|| format!("bad rational {v:?}"))?);
    }
    Ok(Cocycle { degree: r.degree, values })
}

fn load_functional(alg: &SullivanAlgebra, r: &FunctionalRecord) -> Result<TopFunctional, String> {
    match r {
        FunctionalRecord::Direct { cocycle } => {
            let c = load_cocycle(alg, cocycle)?;
            if !c.annihilates_exact(alg) {
                return Err("functional does not vanish on exact elements".into());
            }
            Ok(TopFunctional::Direct(c))
        }
        FunctionalRecord::Tensor { parts } => {
            let mut out = Vec::new();
            for p in parts {
                let f = alg.factors().get(p.factor).ok_or("unknown tensor factor")?;
                if f.offset != p.offset || f.algebra.ngens() != p.len {
                    return Err("tensor part does not match the factor layout".into());
                }
                let c = load_cocycle(&f.algebra, &p.cocycle)?;
                if !c.annihilates_exact(&f.algebra) {
                    return Err(format!("factor {} functional does not vanish on exact elements", p.factor));
                }
                out.push(TensorPart { offset: p.offset, len: p.len, functional: c });
            }
            if out.len() != alg.factors().len() {
                return Err("one functional per tensor factor is required".into());
            }
            Ok(TopFunctional::Tensor(out))
        }
    }
}

struct ReplayState {
    alg: Option<SullivanAlgebra>,
    volume: Option<(Element, TopFunctional)>,
}

impl ReplayState {
    fn alg(&self) -> Result<&SullivanAlgebra, String> {
        self.alg.as_ref().ok_or_else(|| "no algebra in report".to_string())
    }

    fn replay(&mut self, c: &Certificate) -> Result<ReplayOutcome, String> {
        let alg = self.alg()?;
        match c {
            Certificate::Exact { target, preimage } => {
                let (t, p) = (parse_in(alg, target)?, parse_in(alg, preimage)?);
                Ok(if alg.d(&p) == t {
                    ReplayOutcome::Verified
                } else {
                    ReplayOutcome::Failed(format!("d({preimage}) differs from {target}"))
                })
            }
            Certificate::NotExact { target, cocycle } => {
                let t = parse_in(alg, target)?;
                let c = load_cocycle(alg, cocycle)?;
                Ok(if !alg.d(&t).is_zero() {
                    ReplayOutcome::Failed(format!("{target} is not closed"))
                } else if !c.annihilates_exact(alg) {
                    ReplayOutcome::Failed("cocycle does not vanish on exact elements".into())
                } else if c.eval(&t).is_zero() {
                    ReplayOutcome::Failed("cocycle vanishes on the target".into())
                } else {
                    ReplayOutcome::Verified
                })
            }
            Certificate::Ellipticity { witnesses } => {
                let evens = alg.even_generators();
                if witnesses.len() != evens.len() {
                    return Ok(ReplayOutcome::Failed("one witness per even generator is required".into()));
                }
                for w in witnesses {
                    let g = alg.index_of(&w.generator).ok_or(format!("unknown generator {}", w.generator))?;
                    if !evens.contains(&g) {
                        return Ok(ReplayOutcome::Failed(format!("{} is not even", w.generator)));
                    }
                    let p = parse_in(alg, &w.preimage)?;
                    if alg.d(&p) != alg.gca().pow(&alg.generator_element(g), w.exponent) {
                        return Ok(ReplayOutcome::Failed(format!("witness for {}^{} fails", w.generator, w.exponent)));
                    }
                }
                Ok(ReplayOutcome::Verified)
            }
            Certificate::Volume { representative, degree, functional } => {
                let rep = parse_in(alg, representative)?;
                if alg.gca().element_degree(&rep) != Ok(Some(*degree)) {
                    return Ok(ReplayOutcome::Failed("representative has the wrong degree".into()));
                }
                if !alg.d(&rep).is_zero() {
                    return Ok(ReplayOutcome::Failed("representative is not closed".into()));
                }
                let f = match load_functional(alg, functional) {
                    Ok(f) => f,
                    Err(e) => return Ok(ReplayOutcome::Failed(e)),
                };
                if !f.eval(&rep).is_one() {
                    return Ok(ReplayOutcome::Failed("functional is not 1 on the representative".into()));
                }
                self.volume = Some((rep, f));
                Ok(ReplayOutcome::Verified)
            }
            Certificate::Morphism { images, degree, .. } => {
                let imgs = parse_morphism(alg, images).map_err(|e| e.to_string())?;
                let mut map = crate::gca::AlgebraMap::new(alg.gca(), alg.gca(), &imgs);
                for g in 0..alg.ngens() {
                    if alg.d(&imgs[g]) != map.image(alg.differential(g)) {
                        return Ok(ReplayOutcome::Failed(format!(
                            "d f({0}) != f(d {0})",
                            alg.generators()[g].name
                        )));
                    }
                }
                let Some(claimed) = degree else { return Ok(ReplayOutcome::Verified) };
                let claimed = parse_q(claimed).ok_or(format!("bad rational {claimed:?}"))?;
                let Some((rep, f)) = &self.volume else {
                    return Ok(ReplayOutcome::Failed("degree claimed without a volume certificate".into()));
                };
                let found = f.eval(&map.image(rep));
                Ok(if found == claimed {
                    ReplayOutcome::Verified
                } else {
                    ReplayOutcome::Failed(format!("degree is {found}, report claims {claimed}"))
                })
            }
            Certificate::Grading { lower } => {
                let mut g = vec![0; alg.ngens()];
                for (name, l) in lower {
                    g[alg.index_of(name).ok_or(format!("unknown generator {name}"))?] = *l;
                }
                let grading = crate::flexcert::LowerGrading { lower: g };
                Ok(match crate::flexcert::check_prop4_condition(alg, &grading) {
                    Ok(()) => ReplayOutcome::Verified,
                    Err(v) => ReplayOutcome::Failed(format!("condition fails at {}", alg.generators()[v].name)),
                })
            }
            Certificate::Spectrum { .. } => Ok(ReplayOutcome::Recorded),
        }
    }
}

/// Re-verifies every certificate, in order, against the recorded algebra.
pub fn replay(report: &Report) -> Result<Vec<ReplayOutcome>, ReplayError> {
    if report.schema_version != SCHEMA_VERSION {
        return Err(ReplayError::Version(report.schema_version));
    }
    let alg = report.algebra.as_ref().map(AlgebraRecord::load).transpose()?;
    if alg.is_none() && !report.certificates.is_empty() {
        return Err(ReplayError::NoAlgebra);
    }
    let mut st = ReplayState { alg, volume: None };
    Ok(report
        .certificates
        .iter()
        .map(|c| st.replay(c).unwrap_or_else(ReplayOutcome::Failed))
        .collect())
}

pub fn certificate_kind(c: &Certificate) -> &'static str {
    match c {
        Certificate::Exact { .. } => "exact",
        Certificate::NotExact { .. } => "not_exact",
        Certificate::Ellipticity { .. } => "ellipticity",
        Certificate::Volume { .. } => "volume",
        Certificate::Morphism { .. } => "morphism",
        Certificate::Grading { .. } => "grading",
        Certificate::Spectrum { .. } => "spectrum",
    }
}

