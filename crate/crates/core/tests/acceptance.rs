//! One PASS/FAIL line per acceptance criterion.

mod common;

use common::*;
use serde_json::Value;
use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};
use sullivan::catalog;
use sullivan::cli::run;
use sullivan::cohomology::{
    betti_table, find_volume_form, is_exact, top_class_coefficient, top_class_coefficient_by_functional,
    verify_volume_form, Exactness, TopFunctional, VolumeForm,
};
use sullivan::dsl::{parse_algebra, parse_element, parse_morphism};
use sullivan::endo::{degree_spectrum, in_linear_span, linear_reduction, verify_morphism, DegreeSet, SpectrumOptions, Verdict};
use sullivan::flexcert::*;
use sullivan::poly::Poly;
use sullivan::sullivan::tensor_product;
use sullivan::{SullivanAlgebra, Q};

struct Criterion {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { notes: Vec::new(), failures: Vec::new() }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn within(&mut self, label: &str, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.expect(t <= limit, format!("{label} runtime {:.1}s (limit {}s)", t.as_secs_f64(), limit.as_secs()));
    }
}

type Run = fn(&mut Criterion);

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["sullivan", "--json"];
    argv.extend_from_slice(args);
    let out = run(argv);
    (out.code, serde_json::from_str(&out.stdout).unwrap_or(Value::Null))
}

fn check_value<'a>(report: &'a Value, name: &str) -> Option<&'a Value> {
    report["checks"].as_array()?.iter().find(|c| c["name"] == name)
}

fn load(name: &str) -> (SullivanAlgebra, VolumeForm) {
    let alg = catalog::load(name).unwrap().algebra;
    let cert = alg.ellipticity_certificate().unwrap();
    let vol = find_volume_form(&alg, &cert).unwrap();
    (alg, vol)
}

fn criterion_1(c: &mut Criterion) {
    for i in 0..3i64 {
        let start = Instant::now();
        let name = format!("A({i})");
        let (code, r) = json(&["check", "--catalog", &name]);
        c.expect(code == 0, format!("{name} check exit {code}"));
        let ell = check_value(&r, "ellipticity").map(|v| v["value"].clone()).unwrap_or(Value::Null);
        let (e1, e2) = (ell["x1"].as_i64(), ell["x2"].as_i64());
        c.expect(e1 == Some(19 + i), format!("{name} x1-exponent {e1:?}, expected {}", 19 + i));
        c.expect(e2 == Some(26), format!("{name} x2-exponent {e2:?}, expected 26"));
        if e2 == Some(25) {
            // independent confirmation: x2^25 is exact with a replayed witness, x2^24 is not
            let alg = catalog::load(&name).unwrap().algebra;
            let x2_25 = parse_element(&alg, "x2^25").unwrap();
            let x2_24 = parse_element(&alg, "x2^24").unwrap();
            let w = match is_exact(&alg, &x2_25) {
                Ok(Exactness::Exact(w)) => w.replays(&alg) && alg.d(&w.preimage) == x2_25,
                _ => false,
            };
            let not24 = matches!(is_exact(&alg, &x2_24), Ok(Exactness::NotExact(_)));
            c.notes.push(format!("{name} oracle: x2^25 exact with replayed witness {w}, x2^24 not exact {not24}"));
        }
        let out = run(["sullivan", "dim", "--catalog", &name]);
        c.expect(out.stdout == format!("{}\n", 231 + 4 * i), format!("{name} dim {}", out.stdout.trim()));
        let expr = format!("x2^26*z' - x1^{}*x2^24*y1", 15 + i);
        let (code, _) = json(&["volume", "--catalog", &name, "--expr", &expr]);
        c.expect(code == 0, format!("{name} volume accepts {expr} (exit {code})"));
        let alg = catalog::load(&name).unwrap().algebra;
        let e = parse_element(&alg, &expr).unwrap();
        let vol = verify_volume_form(&alg, &e, &alg.ellipticity_certificate().unwrap()).unwrap();
        let adjoined = top_class_coefficient(&alg, &e, &vol).unwrap();
        let functional = top_class_coefficient_by_functional(&e, &vol);
        c.expect(adjoined == q(1) && functional == q(1), format!("{name} dual-route coefficient {adjoined} / {functional}"));
        c.within(&name, start, Duration::from_secs(60));
    }
}

fn criterion_2(c: &mut Criterion) {
    for (i, expected) in [(0, vec![-1, 0, 1]), (1, vec![0, 1])] {
        let start = Instant::now();
        let name = format!("A({i})");
        let (_, r) = json(&["spectrum", "--catalog", &name]);
        let v = check_value(&r, "spectrum").map(|c| c["value"].clone()).unwrap_or(Value::Null);
        c.expect(v["verdict"] == "Inflexible", format!("{name} verdict {}", v["verdict"]));
        let want: Vec<String> = expected.iter().map(|k| format!("{k}/1")).collect();
        c.expect(v["spectrum"] == serde_json::json!(want), format!("{name} spectrum {}", v["spectrum"]));

        let (alg, vol) = load(&name);
        let res = degree_spectrum(&alg, &vol, &SpectrumOptions::default());
        let a = &res.ansatz;
        let k = |gen: &str, mono: &[(&str, u32)]| {
            Poly::var(a.var_of(alg.index_of(gen).unwrap(), &monomial(&alg, mono)).unwrap())
        };
        let (k1, k2) = (k("x1", &[("x1", 1)]), k("x2", &[("x2", 1)]));
        let (k3, k4, k5) = (k("y1", &[("y1", 1)]), k("y2", &[("y2", 1)]), k("y3", &[("y3", 1)]));
        let k6 = k("y3", &[("x1", 1), ("y1", 1)]);
        let m = |a: u32, b: u32| k1.pow(a).mul(&k2.pow(b));
        let relations = [
            ("k3 = k1^4 k2^2", k3.sub(&m(4, 2))),
            ("k4 = k1^3 k2^3", k4.sub(&m(3, 3))),
            ("k5 = k1^2 k2^4", k5.sub(&m(2, 4))),
            ("k6 = 0", k6),
            ("k1^8 k2^8 = k1^18 k2", m(8, 8).sub(&m(18, 1))),
            ("k1^18 k2 = k2^13", m(18, 1).sub(&m(0, 13))),
        ];
        let raw: Vec<Poly> = res.constraints.iter().map(|p| p.poly.clone()).collect();
        let diagonal: BTreeSet<_> = (0..alg.ngens()).filter_map(|g| a.diagonal(g)).collect();
        let (reduced, subs) = linear_reduction(&raw, &diagonal);
        let subs: HashMap<_, _> = subs.into_iter().collect();
        for (label, rel) in relations {
            let mut p = rel.clone();
            for _ in 0..16 {
                let next = p.substitute(&subs);
                if next == p {
                    break;
                }
                p = next;
            }
            let found = in_linear_span(&raw, &rel) || p.is_zero() || in_linear_span(&reduced, &p);
            c.expect(found, format!("{name} constraints imply {label}"));
        }
        c.within(&name, start, Duration::from_secs(600));
    }
}

fn criterion_3(c: &mut Criterion) {
    let start = Instant::now();
    let entry = catalog::find("CL-fibered").unwrap();
    let fibered = parse_algebra(&entry.template()).unwrap().algebra;
    let reduced = fibered.eliminate_contractible_pair("x2p", "x2").unwrap();
    c.expect(reduced == catalog::load("CL-reduced").unwrap().algebra, "elimination matches the reduced entry");
    c.expect(reduced.check_minimality().is_empty(), "reduced algebra is minimal");
    let out = run(["sullivan", "dim", "--catalog", "CL-reduced"]);
    c.expect(out.stdout == "66\n", format!("dim {}", out.stdout.trim()));
    let out = run(["sullivan", "dim", "--catalog", "CL-fibered"]);
    c.expect(out.stdout == "66\n", format!("fibered dim {}", out.stdout.trim()));
    let (code, _) = json(&["volume", "--catalog", "CL-reduced", "--expr", "xb2^33"]);
    c.expect(code == 0, format!("volume accepts xb2^33 (exit {code})"));
    let (_, r) = json(&["spectrum", "--catalog", "CL-reduced"]);
    let v = check_value(&r, "spectrum").map(|c| c["value"].clone()).unwrap_or(Value::Null);
    c.expect(v["verdict"] == "Inflexible", format!("verdict {}", v["verdict"]));
    c.expect(v["spectrum"] == serde_json::json!(["-1/1", "0/1", "1/1"]), format!("spectrum {}", v["spectrum"]));
    c.within("ex01 chain", start, Duration::from_secs(120));
}

fn criterion_4(c: &mut Criterion) {
    let start = Instant::now();
    let reversals = [
        "f n4 = -n4 + 2*x2^2*n2 - 2*x1^2*x2*n2 + 2*x2^2*n1\n",
        "f n4 = -n4 + 2*x2^2*n2 - 2*x1^2*x2*n2 + 2*x1*n5\n",
    ];
    for (idx, (name, dim, exponent)) in [("prop1(4,2)", 54, 28u32), ("prop2(4)", 73, 38), ("prop3(5)", 47, 24)].into_iter().enumerate() {
        let (alg, vol) = load(name);
        c.expect(vol.degree == dim, format!("{name} dim {}", vol.degree));
        let res = degree_spectrum(&alg, &vol, &SpectrumOptions::default());
        let unresolved = res.leaves.iter().filter(|l| matches!(l.degrees, DegreeSet::Unresolved { .. })).count();
        c.expect(unresolved == 0, format!("{name} unresolved cases {unresolved}"));
        let powers_ok = res.leaves.iter().all(|l| match &l.degrees {
            DegreeSet::Power { coefficients, exponent: e } => *e == exponent && coefficients.iter().all(|k| *k > q(0)),
            DegreeSet::Finite(s) => s.iter().all(|k| *k >= q(0)),
            _ => false,
        });
        c.expect(powers_ok, format!("{name} degrees of the form t^{exponent}"));
        let label = res.verdict.label();
        c.expect(label == "NoOrientationReversal", format!("{name} verdict {label}"));
        if let Some(text) = reversals.get(idx) {
            let mut full = String::new();
            for g in alg.generators().iter().filter(|g| g.name != "n4") {
                full.push_str(&format!("f {0} = {0}\n", g.name));
            }
            full.push_str(text);
            let images = parse_morphism(&alg, &full).unwrap();
            let m = verify_morphism(&alg, &images, &vol);
            c.notes.push(format!(
                "{name} oracle: explicit map {} is a morphism {} of degree {}",
                text.trim(),
                m.valid,
                m.degree.map(|d| d.to_string()).unwrap_or_default()
            ));
        }
    }
    c.within("chirality suite", start, Duration::from_secs(600));
}

fn criterion_5(c: &mut Criterion) {
    let start = Instant::now();
    let (alg, vol) = load("ex02");
    c.expect(monomial_differential_check(&alg).is_ok(), "monomial differentials");
    match construct_lower_grading(&alg) {
        Ok(g) => {
            c.expect(g.lower == [0, 0, 1, 2], format!("grading {:?}", g.lower));
            c.expect(check_prop4_condition(&alg, &g).is_ok(), "lower-grading condition");
            match scaling_certificate(&alg, &g, &vol) {
                Ok(cert) => {
                    // a*b*n*m: (0+3) + (0+3) + (1+5) + (2+7) = 21
                    c.expect(cert.degree == q(2).pow(21), format!("scaling degree {}", cert.degree));
                    for m in multiple_family_verify(&alg, &cert, &vol, &[1, 2, 3]) {
                        let want = q(2 * m.k as i64).pow(21);
                        c.expect(
                            m.passed() && m.degree.as_ref() == Some(&want),
                            format!("multiple k={} degree {:?} on {} classes", m.k, m.degree.map(|d| d.to_string()), m.classes_checked),
                        );
                    }
                }
                Err(e) => c.expect(false, format!("scaling certificate: {e}")),
            }
        }
        Err(e) => c.expect(false, format!("grading: {e}")),
    }
    let bn = parse_element(&alg, "b*n").unwrap();
    c.expect(
        alg.d(&bn).is_zero() && matches!(is_exact(&alg, &bn), Ok(Exactness::NotExact(_))),
        "b*n closed and not exact",
    );
    c.expect(two_stage_decomposition(&alg).is_none(), "not two-stage");

    let (alg, vol) = load("CP(4)");
    let res = degree_spectrum(&alg, &vol, &SpectrumOptions::default());
    match &res.verdict {
        Verdict::NoOrientationReversal { forms, flexible } => {
            let t8 = forms.iter().any(|f| matches!(f, DegreeSet::Power { exponent: 8, coefficients } if coefficients.iter().all(|k| *k == q(1))));
            c.expect(t8 && *flexible, format!("CP(4) {} flexible {flexible}", forms.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ")));
        }
        v => c.expect(false, format!("CP(4) verdict {}", v.label())),
    }
    c.within("flexibility suite", start, Duration::from_secs(30));
}

fn criterion_6(c: &mut Criterion) {
    let start = Instant::now();
    let a0 = catalog::load("A(0)").unwrap().algebra;
    let prod = tensor_product(&a0, &a0);
    let cert = prod.ellipticity_certificate().unwrap();
    c.expect(prod.formal_dimension(&cert).0 == 462, format!("dim {}", prod.formal_dimension(&cert).0));
    let vol = match find_volume_form(&prod, &cert) {
        Ok(v) => v,
        Err(e) => {
            c.expect(false, format!("product volume form: {e}"));
            return;
        }
    };
    c.expect(matches!(vol.functional, TopFunctional::Tensor(_)), "product volume form verifies through the tensor functional");
    let res = degree_spectrum(&prod, &vol, &SpectrumOptions::default());
    c.expect(matches!(res.verdict, Verdict::Inconclusive { .. }), format!("spectrum {}", res.verdict.label()));
    let n = a0.ngens();
    let swap: Vec<_> = (0..2 * n).map(|g| prod.generator_element((g + n) % (2 * n))).collect();
    let m = verify_morphism(&prod, &swap, &vol);
    c.expect(m.valid, "swap is a morphism");
    c.expect(m.degree == Some(q(1)), format!("swap degree {}", m.degree.clone().map(|d| d.to_string()).unwrap_or_default()));
    // oracle: swapping the two top classes of degree n costs the Koszul sign (-1)^(n*n)
    let na = a0.formal_dimension(&a0.ellipticity_certificate().unwrap()).0;
    let koszul = if (na * na) % 2 == 1 { q(-1) } else { q(1) };
    c.notes.push(format!("swap oracle: Koszul sign {koszul}"));
    c.within("product construction", start, Duration::from_secs(300));
}

fn criterion_7(c: &mut Criterion) {
    for (label, r) in [
        ("Koszul", check_koszul(1000)),
        ("monomial signs", check_monomial_signs(1000)),
        ("associativity", check_associativity(1000)),
        ("Leibniz", check_leibniz(1000)),
        ("d^2", check_d_squared(1000)),
        ("rank-nullity", check_rank_nullity(1000)),
        ("witness replay", check_witness_replay(1000)),
    ] {
        c.expect(r.is_ok(), format!("{label} 1000 cases{}", r.err().map(|e| format!(": {e}")).unwrap_or_default()));
    }
    let (alg, vol) = load("ex02");
    let b = betti_table(&alg, vol.degree);
    let symmetric = (0..=vol.degree as usize).all(|k| b[k] == b[vol.degree as usize - k]);
    c.expect(symmetric && b.len() == 19, format!("ex02 duality over {} degrees", b.len()));
    let mut agree = true;
    for (name, alg) in catalog_algebras() {
        let degrees: Vec<u32> = alg.generators().iter().map(|g| g.degree).collect();
        let oracle = basis_count_oracle(&degrees, 40);
        for n in 0..=40u32 {
            if alg.gca().basis_of_degree(n).len() as u64 != oracle[n as usize] {
                agree = false;
                c.failures.push(format!("{name} basis count in degree {n}"));
            }
        }
    }
    c.expect(agree, "basis counts agree with the generating function up to degree 40");
}

#[test]
fn acceptance() {
    let criteria: [(&str, Run); 7] = [
        ("1 A(i) suite", criterion_1),
        ("2 A(i) spectra", criterion_2),
        ("3 fibered example", criterion_3),
        ("4 chirality suite", criterion_4),
        ("5 flexibility suite", criterion_5),
        ("6 product construction", criterion_6),
        ("7 property suites", criterion_7),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let mut c = Criterion::new();
        f(&mut c);
        let status = if c.failures.is_empty() { "PASS" } else { "FAIL" };
        let detail = if c.failures.is_empty() { c.notes.join("; ") } else { c.failures.join("; ") };
        println!("{status} criterion {name}: {detail}");
        if !c.failures.is_empty() {
            for n in &c.notes {
                println!("    {n}");
            }
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
