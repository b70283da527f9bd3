//! User-declared scenarios: finite spaces, measures and maps read from JSON,
//! with the suites to run against them.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "spaces": { "X": { "carrier": ["a", "b"], "sigma": [["a"]] } },
//!   "measures": { "P": { "space": "X", "atoms": [{ "atom": "a", "weight": "1/2" },
//!                                                { "atom": "b", "weight": "1/2" }] } },
//!   "maps": {
//!     "sq": { "kind": "polynomial", "domain": "closed_unit", "codomain": "closed_unit",
//!             "coefficients": ["0", "0", "1"] },
//!     "f":  { "kind": "table", "source": "X", "target": "ext_real",
//!             "values": { "a": "0", "b": "inf" } }
//!   },
//!   "suites": [ { "suite": "triangle", "space": "X" }, { "suite": "morphism", "map": "sq" } ]
//! }
//! ```
//!
//! `sigma` lists generators and defaults to the powerset. Suites are
//! `triangle`, `phi`, `monad` and `axioms` on a space (for `axioms` also one
//! of `closed_unit`, `open_unit`, `ext_real`), `phi` on a measure, and
//! `morphism`, `naturality` and `measurable` on a map.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::giry::{barycenter, dirac, monad_mu, phi, phi_inverse, pushforward, GirySpace, ProbMeasure};
use crate::laws::{check_naturality_epsilon, merge_reports, rescaled_additivity, LawConfig};
use crate::meas::{generate_sigma_algebra, is_measurable, FiniteMeasurableSpace, MeasurableMap};
use crate::numerics::{format_rational, parse_rational, rational, ExtReal, PartitionOfOne, Rational};
use crate::report::{LawCheck, LawReport, Seeds};
use crate::scvx::{
    check_axiom1, check_axiom2, check_morphism, check_morphism_cases, make_interval_space, AffineMap, IntervalKind,
    IntervalSpace, SuperConvexSpace,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Validation { field: field.into(), message: message.to_string() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: u32,
    #[serde(default)]
    spaces: BTreeMap<String, RawSpace>,
    #[serde(default)]
    measures: BTreeMap<String, RawMeasure>,
    #[serde(default)]
    maps: BTreeMap<String, RawMap>,
    suites: Vec<RawSuite>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    carrier: Vec<String>,
    sigma: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    space: String,
    atoms: Vec<RawAtom>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    atom: String,
    weight: String,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawMap {
    Polynomial { domain: String, codomain: String, coefficients: Vec<String> },
    Table { source: String, target: String, values: BTreeMap<String, String> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    suite: String,
    space: Option<String>,
    measure: Option<String>,
    map: Option<String>,
}

#[derive(Clone, Debug)]
enum Target {
    Space(String),
    ExtReal,
}

#[derive(Clone, Debug)]
enum MapDecl {
    Polynomial { domain: IntervalKind, codomain: IntervalKind, coefficients: Vec<Rational> },
    Table { source: String, target: Target, values: Vec<String> },
}

#[derive(Clone, Debug)]
enum SuiteDecl {
    Triangle(String),
    PhiSpace(String),
    PhiMeasure(String),
    Monad(String),
    Axioms(String),
    AxiomsInterval(IntervalKind),
    Morphism(String),
    Naturality(String),
    Measurable(String),
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    spaces: BTreeMap<String, FiniteMeasurableSpace>,
    measures: BTreeMap<String, (String, ProbMeasure<usize>)>,
    maps: BTreeMap<String, MapDecl>,
    suites: Vec<SuiteDecl>,
}

/// Outcome of one declared suite.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioResult {
    pub suite: String,
    pub object: String,
    pub report: LawReport,
}

fn interval_kind(name: &str) -> Option<IntervalKind> {
    match name {
        "closed_unit" => Some(IntervalKind::ClosedUnit),
        "open_unit" => Some(IntervalKind::OpenUnit),
        "ext_real" => Some(IntervalKind::ExtRealLine),
        _ => None,
    }
}

impl Scenario {
    /// Parses and validates; `origin` names the source in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::validate(raw)
    }

    fn validate(raw: RawScenario) -> Result<Scenario, ScenarioError> {
        if raw.schema != 1 {
            return Err(invalid("schema", format!("unsupported schema {} (expected 1)", raw.schema)));
        }
        let mut spaces = BTreeMap::new();
        for (name, s) in &raw.spaces {
            let field = format!("spaces.{name}");
            if interval_kind(name).is_some() {
                return Err(invalid(field, "name is reserved for a built-in space"));
            }
            if s.carrier.is_empty() {
                return Err(invalid(format!("{field}.carrier"), "carrier must be nonempty"));
            }
            let space = match &s.sigma {
                None => FiniteMeasurableSpace::powerset(s.carrier.clone()),
                Some(generators) => FiniteMeasurableSpace::powerset(s.carrier.clone()).and_then(|full| {
                    let masks = generators.iter().map(|g| full.subset_of(g)).collect::<Result<Vec<_>, _>>()?;
                    generate_sigma_algebra(s.carrier.clone(), &masks)
                }),
            }
            .map_err(|e| invalid(format!("{field}.sigma"), e))?;
            spaces.insert(name.clone(), space);
        }
        let space_ref = |field: &str, name: &str| -> Result<FiniteMeasurableSpace, ScenarioError> {
            spaces.get(name).cloned().ok_or_else(|| invalid(field, format!("unknown space {name:?}")))
        };

        let mut measures = BTreeMap::new();
        for (name, m) in &raw.measures {
            let field = format!("measures.{name}");
            let space = space_ref(&format!("{field}.space"), &m.space)?;
            let mut atoms = Vec::new();
            for (k, a) in m.atoms.iter().enumerate() {
                let at = format!("{field}.atoms[{k}]");
                let index = space.index_of(&a.atom).map_err(|e| invalid(format!("{at}.atom"), e))?;
                let weight = parse_rational(&a.weight).map_err(|e| invalid(format!("{at}.weight"), e))?;
                atoms.push((index, weight));
            }
            let p = ProbMeasure::from_atoms(atoms).map_err(|e| invalid(format!("{field}.atoms"), e))?;
            measures.insert(name.clone(), (m.space.clone(), p));
        }

        let mut maps = BTreeMap::new();
        for (name, m) in &raw.maps {
            let field = format!("maps.{name}");
            let decl = match m {
                RawMap::Polynomial { domain, codomain, coefficients } => {
                    let kind = |f: &str, n: &str| {
                        interval_kind(n).ok_or_else(|| invalid(format!("{field}.{f}"), format!("unknown interval {n:?}")))
                    };
                    let (domain, codomain) = (kind("domain", domain)?, kind("codomain", codomain)?);
                    let coefficients = coefficients
                        .iter()
                        .enumerate()
                        .map(|(k, c)| parse_rational(c).map_err(|e| invalid(format!("{field}.coefficients[{k}]"), e)))
                        .collect::<Result<Vec<_>, _>>()?;
                    if coefficients.is_empty() {
                        return Err(invalid(format!("{field}.coefficients"), "at least one coefficient required"));
                    }
                    let leading = coefficients.iter().skip(1).rev().find(|c| !c.is_zero());
                    if domain == IntervalKind::ExtRealLine && leading.is_some_and(|c| c.is_negative()) {
                        return Err(invalid(format!("{field}.coefficients"), "negative leading coefficient sends ∞ to −∞"));
                    }
                    MapDecl::Polynomial { domain, codomain, coefficients }
                }
                RawMap::Table { source, target, values } => {
                    let src = space_ref(&format!("{field}.source"), source)?;
                    let target_decl = if target == "ext_real" {
                        Target::ExtReal
                    } else {
                        space_ref(&format!("{field}.target"), target)?;
                        Target::Space(target.clone())
                    };
                    let mut table = Vec::new();
                    for label in src.labels() {
                        let v = values
                            .get(label)
                            .ok_or_else(|| invalid(format!("{field}.values"), format!("missing value for {label:?}")))?;
                        match &target_decl {
                            Target::ExtReal => {
                                ExtReal::parse(v).map_err(|e| invalid(format!("{field}.values.{label}"), e))?;
                            }
                            Target::Space(t) => {
                                spaces[t].index_of(v).map_err(|e| invalid(format!("{field}.values.{label}"), e))?;
                            }
                        }
                        table.push(v.clone());
                    }
                    if let Some(extra) = values.keys().find(|k| !src.labels().contains(k)) {
                        return Err(invalid(format!("{field}.values.{extra}"), "not a point of the source"));
                    }
                    MapDecl::Table { source: source.clone(), target: target_decl, values: table }
                }
            };
            maps.insert(name.clone(), decl);
        }

        let mut suites = Vec::new();
        for (k, s) in raw.suites.iter().enumerate() {
            let field = format!("suites[{k}]");
            let need = |what: &str, v: &Option<String>| {
                v.clone().ok_or_else(|| invalid(format!("{field}.{what}"), format!("suite {:?} needs a {what}", s.suite)))
            };
            let known_space = |name: String| {
                if spaces.contains_key(&name) {
                    Ok(name)
                } else {
                    Err(invalid(format!("{field}.space"), format!("unknown space {name:?}")))
                }
            };
            let known_map = |name: String| {
                if maps.contains_key(&name) {
                    Ok(name)
                } else {
                    Err(invalid(format!("{field}.map"), format!("unknown map {name:?}")))
                }
            };
            let decl = match s.suite.as_str() {
                "triangle" => SuiteDecl::Triangle(known_space(need("space", &s.space)?)?),
                "monad" => SuiteDecl::Monad(known_space(need("space", &s.space)?)?),
                "phi" => match (&s.measure, &s.space) {
                    (Some(m), _) if measures.contains_key(m) => SuiteDecl::PhiMeasure(m.clone()),
                    (Some(m), _) => return Err(invalid(format!("{field}.measure"), format!("unknown measure {m:?}"))),
                    (None, space) => SuiteDecl::PhiSpace(known_space(need("space", space)?)?),
                },
                "axioms" => {
                    let name = need("space", &s.space)?;
                    match interval_kind(&name) {
                        Some(kind) => SuiteDecl::AxiomsInterval(kind),
                        None => SuiteDecl::Axioms(known_space(name)?),
                    }
                }
                "morphism" => SuiteDecl::Morphism(known_map(need("map", &s.map)?)?),
                "naturality" => SuiteDecl::Naturality(known_map(need("map", &s.map)?)?),
                "measurable" => {
                    let name = known_map(need("map", &s.map)?)?;
                    if matches!(maps[&name], MapDecl::Polynomial { .. }) {
                        return Err(invalid(format!("{field}.map"), "measurable needs a table map"));
                    }
                    SuiteDecl::Measurable(name)
                }
                other => return Err(invalid(format!("{field}.suite"), format!("unknown suite {other:?}"))),
            };
            suites.push(decl);
        }
        Ok(Scenario { spaces, measures, maps, suites })
    }

    fn measures_on(&self, space: &str) -> Vec<ProbMeasure<usize>> {
        self.measures.values().filter(|(s, _)| s == space).map(|(_, p)| p.clone()).collect()
    }

    /// Runs every declared suite in order.
    pub fn run(&self, config: &LawConfig) -> Vec<ScenarioResult> {
        self.suites
            .iter()
            .map(|decl| {
                let (suite, object) = describe(decl);
                let seeds = Seeds::new(config.seed, config.cases).salted(&format!("{suite}/{object}"));
                let mut report = self.run_one(decl, config, seeds);
                report.law = suite.clone();
                report.instance = object.clone();
                ScenarioResult { suite, object, report }
            })
            .collect()
    }

    fn run_one(&self, decl: &SuiteDecl, config: &LawConfig, seeds: Seeds) -> LawReport {
        match decl {
            SuiteDecl::Triangle(name) => {
                let gx = GirySpace::new(self.spaces[name].clone());
                let mut check = LawCheck::new("triangle", name, seeds);
                for p in self.measures_on(name) {
                    let got = barycenter(&gx, &dirac(p.clone()));
                    check.record(matches!(&got, Ok(q) if gx.elem_eq(q, &p)), || {
                        json!({"identity": "P ↦ δ_P ↦ P", "P": gx.label(&p), "got": format!("{got:?}")})
                    });
                }
                let sampled = crate::laws::check_triangle_identities(&gx, &gx, seeds);
                merge_reports("triangle", name, seeds, [check.finish(), sampled])
            }
            SuiteDecl::PhiMeasure(name) => {
                let (space, p) = &self.measures[name];
                self.phi_cases(space, std::slice::from_ref(p), seeds)
            }
            SuiteDecl::PhiSpace(name) => {
                let gx = GirySpace::new(self.spaces[name].clone());
                let mut ps = self.measures_on(name);
                let mut rng = crate::report::rng_for(seeds.base);
                ps.extend((0..seeds.count).map(|_| gx.sample(&mut rng)));
                self.phi_cases(name, &ps, seeds)
            }
            SuiteDecl::Monad(name) => self.monad_cases(name, seeds),
            SuiteDecl::Axioms(name) => {
                let gx = GirySpace::new(self.spaces[name].clone());
                merge_reports(
                    "axioms",
                    name,
                    seeds,
                    [check_axiom1(&gx, seeds, config.depth), check_axiom2(&gx, seeds.salted("2"), config.depth)],
                )
            }
            SuiteDecl::AxiomsInterval(kind) => {
                let space = make_interval_space(*kind);
                merge_reports(
                    "axioms",
                    &space.name(),
                    seeds,
                    [check_axiom1(&space, seeds, config.depth), check_axiom2(&space, seeds.salted("2"), config.depth)],
                )
            }
            SuiteDecl::Morphism(name) => match &self.maps[name] {
                MapDecl::Polynomial { domain, codomain, coefficients } => {
                    let (source, target) = (make_interval_space(*domain), make_interval_space(*codomain));
                    let m = polynomial_map(name, coefficients.clone());
                    let (a, b) = midpoint_probe(&source);
                    let half = PartitionOfOne::from_weights([rational(1, 2), rational(1, 2)])
                        .expect("valid");
                    let fixed = check_morphism_cases(&source, &target, &m, seeds, [(half, vec![a, b])]);
                    let sampled = check_morphism(&source, &target, &m, seeds, config.depth);
                    merge_reports("morphism", name, seeds, [fixed, sampled])
                }
                MapDecl::Table { source, target, values } => {
                    let gx = GirySpace::new(self.spaces[source].clone());
                    match target {
                        Target::ExtReal => {
                            let m = gx.integral_map(name, ext_values(values));
                            check_morphism(&gx, &make_interval_space(IntervalKind::ExtRealLine), &m, seeds, config.depth)
                        }
                        Target::Space(t) => {
                            let gy = GirySpace::new(self.spaces[t].clone());
                            let m = self.pushforward_map(name, t, values);
                            check_morphism(&gx, &gy, &m, seeds, config.depth)
                        }
                    }
                }
            },
            SuiteDecl::Naturality(name) => match &self.maps[name] {
                MapDecl::Polynomial { domain, codomain, coefficients } => {
                    let m = polynomial_map(name, coefficients.clone());
                    check_naturality_epsilon(&make_interval_space(*domain), &make_interval_space(*codomain), |_| m.clone(), seeds, 4)
                }
                MapDecl::Table { source, target, values } => {
                    let gx = GirySpace::new(self.spaces[source].clone());
                    match target {
                        Target::ExtReal => {
                            let m = gx.integral_map(name, ext_values(values));
                            check_naturality_epsilon(&gx, &make_interval_space(IntervalKind::ExtRealLine), |_| m.clone(), seeds, 3)
                        }
                        Target::Space(t) => {
                            let gy = GirySpace::new(self.spaces[t].clone());
                            let m = self.pushforward_map(name, t, values);
                            check_naturality_epsilon(&gx, &gy, |_| m.clone(), seeds, 3)
                        }
                    }
                }
            },
            SuiteDecl::Measurable(name) => {
                let MapDecl::Table { source, target, values } = &self.maps[name] else {
                    unreachable!("validated as a table map")
                };
                let src = self.spaces[source].clone();
                let f = match target {
                    Target::ExtReal => MeasurableMap::to_ext_real(src, ext_values(values)),
                    Target::Space(t) => {
                        let tgt = self.spaces[t].clone();
                        let table = values.iter().map(|v| tgt.index_of(v).expect("validated")).collect();
                        MeasurableMap::to_finite(src, tgt, table)
                    }
                };
                let mut check = LawCheck::new("measurable", name, seeds);
                match f {
                    Ok(f) => {
                        let ok = is_measurable(&f);
                        check.record(ok, || json!({"map": name, "measurable": false}));
                    }
                    Err(e) => check.fail_case(json!({"map": name, "error": e.to_string()})),
                }
                check.finish()
            }
        }
    }

    fn pushforward_map(&self, name: &str, target: &str, values: &[String]) -> AffineMap<ProbMeasure<usize>, ProbMeasure<usize>> {
        let tgt = &self.spaces[target];
        let table: Vec<usize> = values.iter().map(|v| tgt.index_of(v).expect("validated")).collect();
        AffineMap::new(format!("push {name}"), move |p: &ProbMeasure<usize>| pushforward(p, |&x| table[x]))
    }

    fn phi_cases(&self, space: &str, ps: &[ProbMeasure<usize>], seeds: Seeds) -> LawReport {
        let x = &self.spaces[space];
        let gx = GirySpace::new(x.clone());
        let mut check = LawCheck::new("phi", space, seeds);
        for p in ps {
            let back = phi_inverse(&phi(p), x);
            check.record(matches!(&back, Ok(q) if gx.elem_eq(q, p)), || {
                json!({"part": "round trip", "P": gx.label(p), "got": format!("{back:?}")})
            });
            let family = x.atoms();
            let values = rescaled_additivity(&phi(p), x.size(), &family[..family.len().min(8)]);
            check.record(matches!(&values, Ok(v) if v.iter().all(|y| y == &v[0])), || {
                json!({"part": "rescaled additivity", "P": gx.label(p), "values": format!("{values:?}")})
            });
        }
        check.finish()
    }

    fn monad_cases(&self, space: &str, seeds: Seeds) -> LawReport {
        let gx = GirySpace::new(self.spaces[space].clone());
        let mut ps = self.measures_on(space);
        let mut rng = crate::report::rng_for(seeds.base);
        ps.extend((0..seeds.count).map(|_| gx.sample(&mut rng)));
        let mut check = LawCheck::new("monad", space, seeds);
        for p in &ps {
            let left = monad_mu(&pushforward(p, |&x| dirac(x)));
            check.record(&left == p, || json!({"law": "left unit", "P": gx.label(p), "got": gx.label(&left)}));
            let right = monad_mu(&dirac(p.clone()));
            check.record(&right == p, || json!({"law": "right unit", "P": gx.label(p), "got": gx.label(&right)}));
        }
        for pair in ps.windows(2) {
            let q = ProbMeasure::uniform(pair.iter().cloned());
            let r = ProbMeasure::uniform([q.clone(), dirac(pair[0].clone())]);
            let lhs = monad_mu(&pushforward(&r, monad_mu));
            let rhs = monad_mu(&monad_mu(&r));
            check.record(lhs == rhs, || json!({"law": "associativity", "lhs": gx.label(&lhs), "rhs": gx.label(&rhs)}));
        }
        check.finish()
    }
}

fn describe(decl: &SuiteDecl) -> (String, String) {
    let (suite, object) = match decl {
        SuiteDecl::Triangle(s) => ("triangle", s.clone()),
        SuiteDecl::PhiSpace(s) => ("phi", s.clone()),
        SuiteDecl::PhiMeasure(m) => ("phi", m.clone()),
        SuiteDecl::Monad(s) => ("monad", s.clone()),
        SuiteDecl::Axioms(s) => ("axioms", s.clone()),
        SuiteDecl::AxiomsInterval(k) => ("axioms", make_interval_space(*k).name()),
        SuiteDecl::Morphism(m) => ("morphism", m.clone()),
        SuiteDecl::Naturality(m) => ("naturality", m.clone()),
        SuiteDecl::Measurable(m) => ("measurable", m.clone()),
    };
    (suite.to_string(), object)
}

fn ext_values(values: &[String]) -> Vec<ExtReal> {
    values.iter().map(|v| ExtReal::parse(v).expect("validated")).collect()
}

/// Two carrier points whose midpoint exposes non-affine polynomials.
fn midpoint_probe(space: &IntervalSpace) -> (ExtReal, ExtReal) {
    match space.kind() {
        IntervalKind::OpenUnit => (ExtReal::ratio(1, 4), ExtReal::ratio(3, 4)),
        _ => (ExtReal::zero(), ExtReal::one()),
    }
}

/// `x ↦ Σ c_k x^k`; `∞` goes to `∞` unless the polynomial is constant.
pub fn polynomial_map(name: &str, coefficients: Vec<Rational>) -> AffineMap<ExtReal, ExtReal> {
    let shown: Vec<String> = coefficients.iter().map(format_rational).collect();
    AffineMap::new(format!("{name} = poly[{}]", shown.join(", ")), move |x: &ExtReal| match x {
        ExtReal::Finite(v) => {
            ExtReal::Finite(coefficients.iter().rev().fold(Rational::zero(), |acc, c| acc * v + c))
        }
        ExtReal::Infinity if coefficients.iter().skip(1).all(|c| c.is_zero()) => ExtReal::Finite(coefficients[0].clone()),
        ExtReal::Infinity => ExtReal::Infinity,
    })
}

/// Reports whether every result passed.
pub fn all_pass(results: &[ScenarioResult]) -> bool {
    results.iter().all(|r| r.report.pass)
}
