//! Command-line front end. [`run`] returns the output and exit code instead
//! of printing, so the binary is a thin wrapper and tests can drive it.

use crate::catalog::{self, CatalogError};
use crate::cohomology::{self, find_volume_form, verify_volume_form, Exactness, VolumeForm, VolumeRejection};
use crate::dsl::{parse_algebra_with, parse_element, parse_morphism, print_algebra, AlgebraFile};
use crate::endo::{degree_spectrum, sample_instances, verify_morphism, DegreeSet, SpectrumOptions, SpectrumResult, Verdict};
use crate::flexcert;
use crate::gca::Element;
use crate::rational::to_pq;
use crate::report::{
    cocycle_record, functional_record, morphism_certificate, replay, AlgebraRecord, Certificate, Check, LeafRecord,
    Report, ReplayOutcome, Status, WitnessRecord,
};
use crate::sullivan::{tensor_product, EllipticityCertificate, EllipticityFailure, SullivanAlgebra};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::PathBuf;

pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "sullivan", version, about = "Exact computations with minimal Sullivan algebras")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Search powers of even generators only up to this degree.
    #[arg(long, global = true, value_name = "N")]
    pub max_degree: Option<u32>,
    /// Maximum number of case splits along one branch of `spectrum`.
    #[arg(long, global = true, value_name = "N")]
    pub case_depth: Option<usize>,
    /// Seed for the randomized instance sampling of `spectrum`.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Algebra file.
    pub file: Option<PathBuf>,
    /// Catalog entry such as `A(0)` or `prop1(4,2)`; repeat for a tensor product.
    #[arg(long = "catalog", value_name = "NAME")]
    pub catalog: Vec<String>,
    /// Parameter override `NAME=VALUE`.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, i64)>,
}

fn parse_param(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v = v.trim().parse::<i64>().map_err(|e| format!("{v:?}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// d^2 = 0, minimality and ellipticity.
    Check(Source),
    /// Formal dimension.
    Dim(Source),
    /// Betti numbers up to a degree.
    Betti {
        /// Highest degree; defaults to the formal dimension.
        #[arg(long, value_name = "N")]
        max: Option<u32>,
        #[command(flatten)]
        source: Source,
    },
    /// Whether an element is closed and exact, with a witness either way.
    Exact {
        expr: String,
        #[command(flatten)]
        source: Source,
    },
    /// Verifies the declared volume form, or one given with --expr.
    Volume {
        #[arg(long, value_name = "EXPR")]
        expr: Option<String>,
        #[command(flatten)]
        source: Source,
    },
    /// Degrees of self-maps.
    Spectrum(Source),
    /// Lower grading and scaling certificate.
    Flex(Source),
    /// Checks a morphism file (`f NAME = EXPR` lines) and computes its degree.
    Verify {
        morphism: PathBuf,
        #[command(flatten)]
        source: Source,
    },
    /// Re-verifies the certificates of a JSON report.
    Replay { report: PathBuf },
    /// Lists catalog entries, or prints one.
    Catalog {
        name: Option<String>,
        #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
        params: Vec<(String, i64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Usage(String);

impl From<CatalogError> for Usage {
    fn from(e: CatalogError) -> Self {
        Usage(e.to_string())
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let command: Vec<String> = argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect();
    match execute(&cli, command) {
        Ok((report, text)) => {
            let stdout = if cli.json { report.to_json() + "\n" } else { text.unwrap_or_else(|| report.to_text()) };
            Outcome { code: report.exit_code(), stdout, stderr: String::new() }
        }
        Err(Usage(msg)) => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}

fn load(source: &Source) -> Result<AlgebraFile, Usage> {
    match (&source.file, source.catalog.as_slice()) {
        (Some(_), [_, ..]) => Err(Usage("give either an algebra file or --catalog, not both".into())),
        (None, []) => Err(Usage("no algebra given: pass a file or --catalog NAME".into())),
        (Some(path), []) => {
            let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            parse_algebra_with(&text, &source.params).map_err(|e| Usage(format!("{}:{e}", path.display())))
        }
        (None, [one]) => Ok(catalog::load_with(one, &source.params)?),
        (None, many) => {
            if !source.params.is_empty() {
                return Err(Usage("--param cannot be combined with a tensor product".into()));
            }
            let files = many.iter().map(|n| catalog::load(n)).collect::<Result<Vec<_>, _>>()?;
            let mut alg = files[0].algebra.clone();
            for f in &files[1..] {
                alg = tensor_product(&alg, &f.algebra);
            }
            let name = files.iter().map(|f| f.algebra.name().to_string()).collect::<Vec<_>>().join(" x ");
            let alg = alg.with_name(name.clone());
            Ok(AlgebraFile { name: Some(name), params: Vec::new(), values: Vec::new(), algebra: alg, volume: None })
        }
    }
}

fn ellipticity_certificate(alg: &SullivanAlgebra, cert: &EllipticityCertificate) -> Certificate {
    Certificate::Ellipticity {
        witnesses: cert
            .entries
            .iter()
            .map(|w| WitnessRecord {
                generator: alg.generators()[w.generator].name.clone(),
                exponent: w.exponent,
                preimage: alg.gca().fmt_element(&w.witness),
            })
            .collect(),
    }
}

fn volume_certificate(alg: &SullivanAlgebra, vol: &VolumeForm) -> Certificate {
    Certificate::Volume {
        representative: alg.gca().fmt_element(&vol.representative),
        degree: vol.degree,
        functional: functional_record(alg, &vol.functional),
    }
}

/// Runs the ellipticity search and records it; `None` when it did not succeed.
fn ellipticity(cli: &Cli, alg: &SullivanAlgebra, report: &mut Report) -> Option<EllipticityCertificate> {
    match alg.ellipticity_certificate_with_bound(cli.max_degree) {
        Ok(cert) => {
            let exps: Vec<String> = cert
                .entries
                .iter()
                .map(|w| format!("{}^{}", alg.generators()[w.generator].name, w.exponent))
                .collect();
            let value: serde_json::Map<String, serde_json::Value> = cert
                .entries
                .iter()
                .map(|w| (alg.generators()[w.generator].name.clone(), json!(w.exponent)))
                .collect();
            report.push(
                Check::new("ellipticity", Status::Pass, if exps.is_empty() { "no even generators".to_string() } else { format!("exact powers {}", exps.join(", ")) })
                    .with_value(serde_json::Value::Object(value)),
            );
            report.certificates.push(ellipticity_certificate(alg, &cert));
            Some(cert)
        }
        Err(EllipticityFailure::DSquaredNonzero { generator }) => {
            let name = &alg.generators()[generator].name;
            report.push(Check::new("ellipticity", Status::Fail, format!("d^2({name}) is nonzero")));
            None
        }
        Err(EllipticityFailure::BoundExceeded { generator, bound }) => {
            let name = &alg.generators()[generator].name;
            report.push(Check::new(
                "ellipticity",
                Status::Inconclusive,
                format!("no exact power of {name} up to exponent {bound}"),
            ));
            None
        }
    }
}

/// Verifies `declared` (or the file's volume, or a found one) and records it.
fn volume(
    alg: &SullivanAlgebra,
    cert: &EllipticityCertificate,
    declared: Option<&Element>,
    report: &mut Report,
) -> Option<VolumeForm> {
    let result = match declared {
        Some(e) => verify_volume_form(alg, e, cert),
        None => find_volume_form(alg, cert),
    };
    let how = if declared.is_some() { "declared" } else { "found" };
    match result {
        Ok(vol) => {
            report.push(
                Check::new(
                    "volume",
                    Status::Pass,
                    format!("{how} volume form {} of degree {}", alg.gca().fmt_element(&vol.representative), vol.degree),
                )
                .with_value(json!(alg.gca().fmt_element(&vol.representative))),
            );
            report.certificates.push(volume_certificate(alg, &vol));
            Some(vol)
        }
        Err(rej) => {
            if let VolumeRejection::Exact(Some(w)) = &rej {
                report.certificates.push(Certificate::Exact {
                    target: alg.gca().fmt_element(&w.target),
                    preimage: alg.gca().fmt_element(&w.preimage),
                });
            }
            let status = match rej {
                VolumeRejection::FactorNotElliptic(_) => Status::Inconclusive,
                _ => Status::Fail,
            };
            report.push(Check::new("volume", status, format!("{how} volume form rejected: {rej}")));
            None
        }
    }
}

fn execute(cli: &Cli, command: Vec<String>) -> Result<(Report, Option<String>), Usage> {
    let mut report = Report::new(command);
    let mut text = None;
    match &cli.command {
        Command::Check(src) => {
            let f = load(src)?;
            let alg = &f.algebra;
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            let bad = alg.check_d_squared();
            match bad.first() {
                None => report.push(Check::new("d_squared", Status::Pass, "d^2 = 0 on every generator")),
                Some((g, e)) => report.push(Check::new(
                    "d_squared",
                    Status::Fail,
                    format!("d^2({}) = {}", alg.generators()[*g].name, alg.gca().fmt_element(e)),
                )),
            }
            match alg.check_minimality().first() {
                None => report.push(Check::new("minimality", Status::Pass, "no differential has a linear term")),
                Some((g, m)) => report.push(Check::new(
                    "minimality",
                    Status::Fail,
                    format!("d({}) has the linear term {}", alg.generators()[*g].name, alg.gca().fmt_monomial(m)),
                )),
            }
            if bad.is_empty() {
                if let Some(cert) = ellipticity(cli, alg, &mut report) {
                    let n = alg.formal_dimension(&cert).0;
                    report.push(Check::new("formal_dimension", Status::Pass, n.to_string()).with_value(json!(n)));
                }
            }
        }
        Command::Dim(src) => {
            let f = load(src)?;
            let alg = &f.algebra;
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            if let Some(cert) = ellipticity(cli, alg, &mut report) {
                let n = alg.formal_dimension(&cert).0;
                report.push(Check::new("formal_dimension", Status::Pass, n.to_string()).with_value(json!(n)));
                text = Some(format!("{n}\n"));
            }
        }
        Command::Betti { max, source } => {
            let f = load(source)?;
            let alg = &f.algebra;
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            let top = match max {
                Some(m) => Some(*m),
                None => ellipticity(cli, alg, &mut report).map(|c| alg.formal_dimension(&c).0),
            };
            if let Some(top) = top {
                let table = cohomology::betti_table(alg, top);
                let euler: i64 = table.iter().enumerate().map(|(n, b)| if n % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum();
                let mut t = String::new();
                for (n, b) in table.iter().enumerate() {
                    t.push_str(&format!("b{n} = {b}\n"));
                }
                t.push_str(&format!("euler characteristic (degrees <= {top}) = {euler}\n"));
                report.push(
                    Check::new("betti", Status::Pass, format!("degrees 0..={top}: {table:?}"))
                        .with_value(json!({ "betti": table, "euler": euler })),
                );
                text = Some(t);
            }
        }
        Command::Exact { expr, source } => {
            let f = load(source)?;
            let alg = &f.algebra;
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            let e = parse_element(alg, expr).map_err(|err| Usage(format!("expression: {err}")))?;
            let shown = alg.gca().fmt_element(&e);
            match cohomology::is_exact(alg, &e) {
                Err(cohomology::CohomologyError::NotClosed) => {
                    report.push(
                        Check::new("exact", Status::Fail, format!("{shown} is not closed"))
                            .with_value(json!({ "closed": false })),
                    );
                }
                Err(err) => return Err(Usage(format!("expression: {err}"))),
                Ok(Exactness::Exact(w)) => {
                    report.push(
                        Check::new("exact", Status::Pass, format!("{shown} is exact: d({}) = {shown}", alg.gca().fmt_element(&w.preimage)))
                            .with_value(json!({ "closed": true, "exact": true })),
                    );
                    report.certificates.push(Certificate::Exact {
                        target: shown.clone(),
                        preimage: alg.gca().fmt_element(&w.preimage),
                    });
                }
                Ok(Exactness::NotExact(c)) => {
                    report.push(
                        Check::new("exact", Status::Pass, format!("{shown} is closed and not exact"))
                            .with_value(json!({ "closed": true, "exact": false })),
                    );
                    report.certificates.push(Certificate::NotExact { target: shown, cocycle: cocycle_record(alg, &c) });
                }
            }
        }
        Command::Volume { expr, source } => {
            let f = load(source)?;
            let alg = &f.algebra;
            let declared = match expr {
                Some(t) => Some(parse_element(alg, t).map_err(|err| Usage(format!("expression: {err}")))?),
                None => f.volume.clone(),
            };
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            if let Some(cert) = ellipticity(cli, alg, &mut report) {
                volume(alg, &cert, declared.as_ref(), &mut report);
            }
        }
        Command::Spectrum(src) => {
            let f = load(src)?;
            let alg = &f.algebra;
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            if let Some(cert) = ellipticity(cli, alg, &mut report) {
                if let Some(vol) = volume(alg, &cert, f.volume.as_ref(), &mut report) {
                    let opts = SpectrumOptions { case_depth: cli.case_depth.unwrap_or(SpectrumOptions::default().case_depth) };
                    let result = degree_spectrum(alg, &vol, &opts);
                    spectrum_report(alg, &vol, &result, cli.seed, &mut report);
                }
            }
        }
        Command::Flex(src) => {
            let f = load(src)?;
            let alg = &f.algebra;
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            flex_report(cli, alg, f.volume.as_ref(), &mut report);
        }
        Command::Verify { morphism, source } => {
            let f = load(source)?;
            let alg = &f.algebra;
            report.algebra = Some(AlgebraRecord::of(alg, f.volume.as_ref()));
            let t = std::fs::read_to_string(morphism).map_err(|e| Usage(format!("{}: {e}", morphism.display())))?;
            let images = parse_morphism(alg, &t).map_err(|e| Usage(format!("{}:{e}", morphism.display())))?;
            if let Some(cert) = ellipticity(cli, alg, &mut report) {
                if let Some(vol) = volume(alg, &cert, f.volume.as_ref(), &mut report) {
                    let check = verify_morphism(alg, &images, &vol);
                    match (check.valid, &check.degree) {
                        (true, Some(d)) => {
                            report.push(
                                Check::new("morphism", Status::Pass, format!("commutes with d; degree {d}"))
                                    .with_value(json!({ "degree": to_pq(d) })),
                            );
                            report.certificates.push(morphism_certificate(alg, morphism.display().to_string(), &images, Some(d)));
                        }
                        _ => {
                            let g = check.failing_generator.map(|g| alg.generators()[g].name.clone()).unwrap_or_default();
                            report.push(Check::new("morphism", Status::Fail, format!("fails to commute with d at {g}")));
                        }
                    }
                }
            }
        }
        Command::Replay { report: path } => {
            let t = std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            let input: Report =
                serde_json::from_str(&t).map_err(|e| Usage(format!("{}: not a report: {e}", path.display())))?;
            report.algebra = input.algebra.clone();
            let outcomes = replay(&input).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            for (i, (c, o)) in input.certificates.iter().zip(&outcomes).enumerate() {
                let name = format!("certificate {i} ({})", crate::report::certificate_kind(c));
                report.push(match o {
                    ReplayOutcome::Verified => Check::new(&name, Status::Pass, "verified"),
                    ReplayOutcome::Recorded => Check::new(&name, Status::Pass, "recorded, not re-derived"),
                    ReplayOutcome::Failed(why) => Check::new(&name, Status::Fail, why.clone()),
                });
            }
            if outcomes.is_empty() {
                report.push(Check::new("replay", Status::Pass, "no certificates"));
            }
        }
        Command::Catalog { name: None, .. } => {
            let mut t = String::new();
            let mut list = Vec::new();
            for e in catalog::entries() {
                let head = if e.params.is_empty() { e.name.to_string() } else { format!("{}({})", e.name, e.params.join(",")) };
                let aliases = if e.aliases.is_empty() { String::new() } else { format!(" [{}]", e.aliases.join(", ")) };
                t.push_str(&format!("{head:<16} {}{aliases}\n", e.summary));
                list.push(json!({ "name": e.name, "params": e.params, "aliases": e.aliases, "summary": e.summary }));
            }
            report.push(Check::new("catalog", Status::Pass, format!("{} entries", list.len())).with_value(json!(list)));
            text = Some(t);
        }
        Command::Catalog { name: Some(name), params } => {
            let f = catalog::load_with(name, params)?;
            let dsl = print_algebra(&f.algebra, f.volume.as_ref());
            report.algebra = Some(AlgebraRecord::of(&f.algebra, f.volume.as_ref()));
            report.push(Check::new("catalog", Status::Pass, f.algebra.name().to_string()));
            text = Some(dsl);
        }
    }
    Ok((report, text))
}

pub fn verdict_summary(result: &SpectrumResult) -> String {
    let list = |s: &std::collections::BTreeSet<crate::rational::Q>| {
        s.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", ")
    };
    let forms = |fs: &[DegreeSet]| fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" and ");
    match &result.verdict {
        Verdict::Inflexible { spectrum } => format!("Inflexible, degrees {{{}}}", list(spectrum)),
        Verdict::NoOrientationReversal { forms: fs, flexible } => format!(
            "NoOrientationReversal, degrees {}{}",
            forms(fs),
            if *flexible { "; flexible (verified maps of degree > 1)" } else { "" }
        ),
        Verdict::Flexible { orientation_reversing } => format!(
            "Flexible{}",
            match orientation_reversing {
                Some(true) => ", verified maps of negative degree",
                Some(false) => ", no negative degree found",
                None => "",
            }
        ),
        Verdict::Inconclusive { reason } => format!("Inconclusive: {reason}"),
    }
}

fn spectrum_report(alg: &SullivanAlgebra, vol: &VolumeForm, result: &SpectrumResult, seed: u64, report: &mut Report) {
    let a = &result.ansatz;
    let summary = verdict_summary(result);
    let status = match result.verdict {
        Verdict::Inconclusive { .. } => Status::Inconclusive,
        _ => Status::Pass,
    };
    let degrees: Vec<String> = result.instances.iter().map(|i| to_pq(&i.degree)).collect();
    let value = json!({
        "verdict": result.verdict.label(),
        "spectrum": result.finite_spectrum().map(|s| s.iter().map(to_pq).collect::<Vec<_>>()),
        "cases": result.leaves.iter().map(|l| l.degrees.to_string()).collect::<Vec<_>>(),
        "instances": degrees,
    });
    report.push(Check::new("spectrum", status, summary.clone()).with_value(value));
    let leaves = result
        .leaves
        .iter()
        .map(|l| LeafRecord {
            path: result.fmt_path(&l.context.path),
            substitutions: l
                .context
                .substitutions
                .iter()
                .map(|(v, p)| format!("{} = {}", a.name(*v), a.fmt_poly(p)))
                .collect(),
            residual: l.residual.iter().map(|p| a.fmt_poly(p)).collect(),
            degree: a.fmt_poly(&l.degree),
            degrees: l.degrees.to_string(),
        })
        .collect();
    report.certificates.push(Certificate::Spectrum {
        verdict: result.verdict.label().to_string(),
        summary,
        unknowns: a.unknowns.len(),
        constraints: result.constraints.len(),
        degree: a.fmt_poly(&result.degree),
        leaves,
        pruned: result.pruned.iter().map(|p| result.fmt_path(p)).collect(),
    });
    for inst in &result.instances {
        report.certificates.push(morphism_certificate(
            alg,
            format!("instance of case {}", inst.leaf),
            &inst.images,
            Some(&inst.degree),
        ));
    }
    if !result.leaves.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = sample_instances(alg, vol, result, &mut rng, 16);
        let outside: Vec<String> = samples.iter().filter(|(_, inside)| !inside).map(|(d, _)| d.to_string()).collect();
        let status = if outside.is_empty() { Status::Pass } else { Status::Fail };
        let detail = if outside.is_empty() {
            format!("{} random verified maps, all degrees inside the reported set", samples.len())
        } else {
            format!("degrees outside the reported set: {}", outside.join(", "))
        };
        report.push(Check::new("sampling", status, detail));
    }
}

fn flex_report(cli: &Cli, alg: &SullivanAlgebra, declared: Option<&Element>, report: &mut Report) {
    let name = |g: usize| alg.generators()[g].name.clone();
    match flexcert::monomial_differential_check(alg) {
        Ok(()) => report.push(Check::new("monomial_differential", Status::Pass, "every differential is a monomial")),
        Err(g) => report.push(Check::new(
            "monomial_differential",
            Status::Pass,
            format!("d({}) is not a monomial", name(g)),
        )
        .with_value(json!(false))),
    }
    match flexcert::two_stage_decomposition(alg) {
        Some((q, p)) => {
            let names = |v: &[usize]| v.iter().map(|&g| name(g)).collect::<Vec<_>>().join(", ");
            report.push(Check::new("two_stage", Status::Pass, format!("Q = {{{}}}, P = {{{}}}", names(&q), names(&p))));
        }
        None => report.push(Check::new("two_stage", Status::Pass, "not two-stage").with_value(json!(null))),
    }
    let g = match flexcert::construct_lower_grading(alg) {
        Ok(g) => g,
        Err(e) => {
            report.push(Check::new("lower_grading", Status::Inconclusive, e.to_string()));
            return;
        }
    };
    let shown: Vec<String> = (0..alg.ngens()).map(|v| format!("{}:{}", name(v), g.lower[v])).collect();
    report.push(Check::new("lower_grading", Status::Pass, shown.join(" ")).with_value(json!(g.lower)));
    if let Err(v) = flexcert::check_prop4_condition(alg, &g) {
        report.push(Check::new(
            "grading_condition",
            Status::Inconclusive,
            format!("d({}) has a term of the wrong lower degree", name(v)),
        ));
        return;
    }
    report.push(Check::new("grading_condition", Status::Pass, "d lowers the grading by exactly one"));
    report.certificates.push(Certificate::Grading { lower: (0..alg.ngens()).map(|v| (name(v), g.lower[v])).collect() });
    let Some(cert) = ellipticity(cli, alg, report) else { return };
    let Some(vol) = volume(alg, &cert, declared, report) else { return };
    let sc = match flexcert::scaling_certificate(alg, &g, &vol) {
        Ok(s) => s,
        Err(e) => {
            report.push(Check::new("scaling", Status::Fail, e.to_string()));
            return;
        }
    };
    report.push(
        Check::new("scaling", Status::Pass, format!("degree {} = 2^{}; k-th multiple has degree (2k)^{}", sc.degree, sc.exponent, sc.exponent))
            .with_value(json!({ "degree": to_pq(&sc.degree), "exponent": sc.exponent })),
    );
    for m in flexcert::multiple_family_verify(alg, &sc, &vol, &[1, 2, 3]) {
        let status = if m.passed() { Status::Pass } else { Status::Fail };
        let detail = match (&m.degree, m.failure) {
            (_, Some((n, l))) => format!("wrong action on a class of degree {n}, lower degree {l}"),
            (Some(d), None) => format!("degree {d}, {} cohomology classes checked", m.classes_checked),
            (None, None) => "not a morphism".to_string(),
        };
        report.push(Check::new(&format!("multiple k={}", m.k), status, detail));
        let base = crate::rational::Q::from_integer((2 * m.k).into());
        let images = flexcert::scaling_images(alg, &g, &base);
        report.certificates.push(morphism_certificate(alg, format!("scaling map, k = {}", m.k), &images, m.degree.as_ref()));
    }
}
