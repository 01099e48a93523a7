//! Built-in presentations, addressed as `NAME` or `NAME(args)`.

use crate::dsl::{parse_algebra, parse_algebra_with, print_algebra, AlgebraFile, DslError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    Unknown(String),
    #[error("malformed catalog reference {0:?}")]
    Malformed(String),
    #[error("{name} takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("{0}")]
    Parameter(String),
    #[error("catalog entry {name}: {source}")]
    Template {
        name: String,
        #[source]
        source: DslError,
    },
}

pub struct Entry {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub params: &'static [&'static str],
    pub summary: &'static str,
    source: Source,
}

enum Source {
    Text(&'static str),
    /// Another entry with one contractible pair `(w, x)` removed.
    Reduced { base: &'static str, w: &'static str, x: &'static str, volume: &'static str },
    Sphere,
}

const A: &str = include_str!("../catalog/A.sdga");

const CL_BASE: &str = include_str!("../catalog/CL-base.sdga");

const CL_FIBERED: &str = include_str!("../catalog/CL-fibered.sdga");

const PROP1: &str = include_str!("../catalog/prop1.sdga");

const PROP2: &str = include_str!("../catalog/prop2.sdga");

const PROP3: &str = include_str!("../catalog/prop3.sdga");

const EX02: &str = include_str!("../catalog/ex02.sdga");

/// Model of the complex projective space of complex dimension `2n`.
const CP: &str = include_str!("../catalog/CP.sdga");

const SPHERE: &str = include_str!("../catalog/sphere.sdga");

static ENTRIES: &[Entry] = &[
    Entry { name: "A", aliases: &[], params: &["i"], summary: "inflexible family, dimension 231+4i", source: Source::Text(A) },
    Entry { name: "CL-base", aliases: &[], params: &[], summary: "base of the fibration, dimension 64", source: Source::Text(CL_BASE) },
    Entry {
        name: "CL-fibered",
        aliases: &["ex01"],
        params: &[],
        summary: "non-minimal total space with the pair (x2p, x2)",
        source: Source::Text(CL_FIBERED),
    },
    Entry {
        name: "CL-reduced",
        aliases: &["ex01-fibered-reduced", "ex01-reduced"],
        params: &[],
        summary: "CL-fibered with the contractible pair (x2p, x2) eliminated, dimension 66",
        source: Source::Reduced { base: "CL-fibered", w: "x2p", x: "x2", volume: "xb2^33" },
    },
    Entry { name: "prop1", aliases: &[], params: &["l1", "l2"], summary: "pure family, dimension 4l1+8l2+22", source: Source::Text(PROP1) },
    Entry { name: "prop2", aliases: &[], params: &["l"], summary: "pure family, dimension 4l+57", source: Source::Text(PROP2) },
    Entry { name: "prop3", aliases: &[], params: &["l"], summary: "pure family, dimension 4l+27", source: Source::Text(PROP3) },
    Entry { name: "ex02", aliases: &[], params: &[], summary: "non-formal three-stage flexible algebra, dimension 18", source: Source::Text(EX02) },
    Entry { name: "CP", aliases: &[], params: &["n"], summary: "complex projective space of complex dimension 2n", source: Source::Text(CP) },
    Entry { name: "sphere", aliases: &[], params: &["2n"], summary: "even-dimensional sphere", source: Source::Sphere },
];

pub fn entries() -> &'static [Entry] {
    ENTRIES
}

impl Entry {
    /// DSL text with default parameters; derived entries are printed.
    pub fn template(&self) -> String {
        match &self.source {
            Source::Text(t) => t.to_string(),
            Source::Sphere => SPHERE.to_string(),
            Source::Reduced { .. } => {
                let f = self.instantiate(&[]).expect("catalog entry instantiates");
                print_algebra(&f.algebra, f.volume.as_ref())
            }
        }
    }

    fn instantiate(&self, args: &[i64]) -> Result<AlgebraFile, CatalogError> {
        let tmpl = |name: &str, text: &str, overrides: &[(String, i64)]| {
            parse_algebra_with(text, overrides).map_err(|e| {
                if e.line == 0 {
                    CatalogError::Parameter(format!("{name}: {}", e.message))
                } else {
                    CatalogError::Template { name: name.to_string(), source: e }
                }
            })
        };
        match &self.source {
            Source::Text(text) => {
                let overrides: Vec<(String, i64)> =
                    self.params.iter().zip(args).map(|(p, v)| (p.to_string(), *v)).collect();
                let mut f = tmpl(self.name, text, &overrides)?;
                let display = display_name(self.name, args);
                f.algebra = f.algebra.with_name(display.clone());
                f.name = Some(display);
                Ok(f)
            }
            Source::Sphere => {
                let dim = args.first().copied().unwrap_or(2);
                if dim < 2 || dim % 2 != 0 {
                    return Err(CatalogError::Parameter(format!("sphere: dimension {dim} must be even and at least 2")));
                }
                let mut f = tmpl(self.name, SPHERE, &[("n".to_string(), dim / 2)])?;
                let display = format!("sphere({dim})");
                f.algebra = f.algebra.with_name(display.clone());
                f.name = Some(display);
                Ok(f)
            }
            Source::Reduced { base, w, x, volume } => {
                let base = load(base)?;
                let reduced = base
                    .algebra
                    .eliminate_contractible_pair(w, x)
                    .map_err(|e| CatalogError::Parameter(format!("{}: {e}", self.name)))?
                    .with_name(self.name);
                let mut text = print_algebra(&reduced, None);
                text.push_str(&format!("volume {volume}\n"));
                tmpl(self.name, &text, &[])
            }
        }
    }
}

fn display_name(name: &str, args: &[i64]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        let a: Vec<String> = args.iter().map(|v| v.to_string()).collect();
        format!("{name}({})", a.join(","))
    }
}

pub fn find(name: &str) -> Option<&'static Entry> {
    ENTRIES
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name) || e.aliases.iter().any(|a| a.eq_ignore_ascii_case(name)))
}

fn split_reference(reference: &str) -> Result<(&str, Vec<i64>), CatalogError> {
    let malformed = || CatalogError::Malformed(reference.to_string());
    let r = reference.trim();
    let Some(open) = r.find('(') else {
        return Ok((r, Vec::new()));
    };
    let inner = r[open + 1..].strip_suffix(')').ok_or_else(malformed)?;
    let args = inner
        .split(',')
        .map(|a| a.trim().parse::<i64>().map_err(|_| malformed()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((r[..open].trim(), args))
}

/// Loads `NAME` or `NAME(a,b,..)`; missing arguments take their defaults.
pub fn load(reference: &str) -> Result<AlgebraFile, CatalogError> {
    load_with(reference, &[])
}

/// Like [`load`], with `k=v` parameter overrides applied after positional arguments.
pub fn load_with(reference: &str, overrides: &[(String, i64)]) -> Result<AlgebraFile, CatalogError> {
    let (name, mut args) = split_reference(reference)?;
    let entry = find(name).ok_or_else(|| CatalogError::Unknown(name.to_string()))?;
    if args.len() > entry.params.len() || (!args.is_empty() && args.len() != entry.params.len()) {
        return Err(CatalogError::Arity { name: entry.name.to_string(), expected: entry.params.len(), got: args.len() });
    }
    if args.is_empty() && !entry.params.is_empty() {
        args = defaults(entry)?;
    }
    for (k, v) in overrides {
        let pos = entry
            .params
            .iter()
            .position(|p| p == k)
            .ok_or_else(|| CatalogError::Parameter(format!("{} has no parameter {k}", entry.name)))?;
        args[pos] = *v;
    }
    entry.instantiate(&args)
}

fn defaults(entry: &Entry) -> Result<Vec<i64>, CatalogError> {
    let text = match &entry.source {
        Source::Text(t) => *t,
        Source::Sphere => return Ok(vec![2]),
        Source::Reduced { .. } => return Ok(Vec::new()),
    };
    let f = parse_algebra(text).map_err(|e| CatalogError::Template { name: entry.name.to_string(), source: e })?;
    Ok(f.params.iter().map(|p| p.default).collect())
}
