//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use supercvx::giry::{dirac, GeneralizedPoint, GirySpace};
use supercvx::laws::{
    check_generalized_point_naturality, check_image_property, check_monad_law, check_naturality_epsilon,
    check_phi_round_trip, check_triangle_identities, demo_divergent_sum, demo_half_cauchy, demo_open_interval,
    half_cauchy_closed_form, random_pushforward_map, random_unit_affine, recover_evaluation_point, registry, run_suites,
    select, FunctionalKind, LawConfig, MonadLaw, MuKind,
};
use supercvx::numerics::{integer, ExtReal};
use supercvx::report::{LawReport, Seeds};
use supercvx::scvx::{
    check_axiom1, check_axiom2, make_interval_space, make_product_space, ChainSemilattice, IntervalKind, IntervalSpace,
    SuperConvexSpace,
};

const CASES: usize = 200;

fn seeds(tag: &str) -> Seeds {
    Seeds::new(0, CASES).salted(tag)
}

fn closed() -> IntervalSpace {
    make_interval_space(IntervalKind::ClosedUnit)
}

fn open() -> IntervalSpace {
    make_interval_space(IntervalKind::OpenUnit)
}

fn ext() -> IntervalSpace {
    make_interval_space(IntervalKind::ExtRealLine)
}

/// Exact suites: no failures and at least `min_cases` cases actually run.
fn clean(reports: &[LawReport], min_cases: usize) -> Result<String, String> {
    for r in reports {
        if !r.pass || r.cases < min_cases {
            return Err(format!(
                "{}: {}/{} passed, counterexample {:?}",
                r.suite_name(),
                r.passed,
                r.cases,
                r.counterexample
            ));
        }
    }
    let cases: usize = reports.iter().map(|r| r.cases).sum();
    Ok(format!("{} reports, {cases} cases, 0 failures", reports.len()))
}

fn axiom_suites() -> Result<String, String> {
    let started = Instant::now();
    let depth = 8;
    let mut reports = Vec::new();
    macro_rules! both {
        ($space:expr) => {{
            let space = $space;
            reports.push(check_axiom1(&space, seeds(&format!("a1 {}", space.name())), depth));
            reports.push(check_axiom2(&space, seeds(&format!("a2 {}", space.name())), depth));
        }};
    }
    both!(closed());
    both!(open());
    both!(ext());
    both!(make_product_space(vec![closed(), open(), ext()]).unwrap());
    for n in 2..=4 {
        both!(GirySpace::discrete(n));
    }
    let elapsed = started.elapsed();
    let summary = clean(&reports, CASES)?;
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{summary}, {:.2}s", elapsed.as_secs_f64()))
}

fn morphism_suite() -> Result<String, String> {
    let config = LawConfig::default();
    let lawful: Vec<_> = registry().into_iter().filter(|s| s.name.starts_with("morphism/") && !s.mutant).collect();
    let summary = clean(&run_suites(&lawful, &config), CASES)?;
    let square = registry().into_iter().find(|s| s.name == "morphism/mutant-square").unwrap().run(&config);
    let witness = square.counterexample.clone().ok_or("x ↦ x² produced no witness")?;
    // (1/2·0 + 1/2·1)² = 1/4 while 1/2·0² + 1/2·1² = 1/2.
    let expected = serde_json::json!({
        "omega": "{1: \"1/2\", 2: \"1/2\"}",
        "sequence": ["0/1", "1/1"],
        "map_of_combination": "1/4",
        "combination_of_images": "1/2",
    });
    if square.pass || witness != expected {
        return Err(format!("square mutant: pass={} witness={witness}", square.pass));
    }
    Ok(format!("{summary}; x ↦ x² fails with witness ω = (1/2, 1/2), a = (0, 1)"))
}

fn triangle() -> Result<String, String> {
    let reports = [
        check_triangle_identities(&GirySpace::discrete(4), &closed(), seeds("tri closed")),
        check_triangle_identities(&GirySpace::discrete(3), &ext(), seeds("tri ext")),
        check_triangle_identities(&GirySpace::discrete(2), &ChainSemilattice::new(5), seeds("tri chain")),
    ];
    // Two identities per seed.
    clean(&reports, 2 * CASES)
}

fn naturality() -> Result<String, String> {
    let half_map = supercvx::scvx::linear_map(supercvx::numerics::rational(1, 2), supercvx::numerics::rational(1, 2));
    let p = supercvx::giry::ProbMeasure::uniform([ExtReal::zero(), ExtReal::one()]);
    let lhs = half_map.apply(&supercvx::giry::barycenter(&closed(), &p).unwrap());
    if lhs != ExtReal::ratio(3, 4) {
        return Err(format!("hand example gave {lhs}"));
    }
    let reports = [
        check_naturality_epsilon(&closed(), &closed(), random_unit_affine, seeds("nat unit"), 4),
        check_naturality_epsilon(
            &GirySpace::discrete(3),
            &GirySpace::discrete(2),
            |rng| random_pushforward_map(3, 2, rng),
            seeds("nat giry"),
            3,
        ),
    ];
    clean(&reports, CASES)
}

fn phi_round_trip() -> Result<String, String> {
    // Two checks per seed: round trip and the rescaled additivity identity.
    clean(&[check_phi_round_trip(seeds("phi"), 8, FunctionalKind::Measure)], 2 * CASES)
}

fn monad_laws() -> Result<String, String> {
    let reports: Vec<_> = [MonadLaw::LeftUnit, MonadLaw::RightUnit, MonadLaw::Associativity]
        .into_iter()
        .map(|law| check_monad_law(law, MuKind::Lawful, seeds(law.tag())))
        .collect();
    clean(&reports, CASES)
}

fn image_property() -> Result<String, String> {
    let kind = FunctionalKind::Measure;
    let product = make_product_space(vec![closed(), open(), ext()]).unwrap();
    let reports = [
        check_image_property(&closed(), seeds("img closed"), 4, kind),
        check_image_property(&open(), seeds("img open"), 4, kind),
        check_image_property(&ext(), seeds("img ext"), 4, kind),
        check_image_property(&product, seeds("img product"), 4, kind),
        check_image_property(&ChainSemilattice::new(5), seeds("img chain"), 4, kind),
        check_image_property(&GirySpace::discrete(3), seeds("img giry"), 3, kind),
    ];
    let summary = clean(&reports, CASES)?;
    let naturality = [check_generalized_point_naturality(&closed(), seeds("gp"), 4, kind)];
    clean(&naturality, CASES)?;
    if demo_half_cauchy(&[1.0]).unwrap().limit_in_image {
        return Err("half-Cauchy limit ∞ was accepted as a point of [0, ∞)".into());
    }
    Ok(format!("{summary}; half-Cauchy non-example flagged"))
}

fn recovery() -> Result<String, String> {
    let mut checked = 0;
    for size in 1..=6 {
        let chain = ChainSemilattice::new(size);
        let carrier = chain.carrier().unwrap();
        let maps = chain.generating_maps();
        // Oracle: the evaluation profiles are pairwise distinct, so any
        // matching point is unique.
        let profiles: Vec<Vec<ExtReal>> = carrier.iter().map(|a| maps.iter().map(|m| m.apply(a)).collect()).collect();
        for i in 0..profiles.len() {
            for j in i + 1..profiles.len() {
                if profiles[i] == profiles[j] {
                    return Err(format!("points {i} and {j} are not separated on a chain of size {size}"));
                }
            }
        }
        for &a in &carrier {
            let by_point = recover_evaluation_point(&GeneralizedPoint::Point(a), &carrier, &maps);
            let by_dirac = recover_evaluation_point(&GeneralizedPoint::Measure(dirac(a)), &carrier, &maps);
            if by_point != Ok(a) || by_dirac != Ok(a) {
                return Err(format!("size {size}, point {a}: {by_point:?} / {by_dirac:?}"));
            }
            checked += 2;
        }
    }
    if supercvx::laws::abstract_pair_non_example() != Err(supercvx::laws::LawError::NoPoint) {
        return Err("uniform measure on the abstract pair recovered a point".into());
    }
    Ok(format!("{checked} functionals recovered uniquely on chains of size 1..=6"))
}

fn half_cauchy() -> Result<String, String> {
    let ns = [1.0, 10.0, 100.0, 1e4];
    let demo = demo_half_cauchy(&ns).map_err(|e| e.to_string())?;
    let mut worst = 0f64;
    for (row, n) in demo.rows.iter().zip(ns) {
        let oracle = (1.0 + n * n).ln() / std::f64::consts::PI;
        let diff = (row.quadrature - oracle).abs();
        worst = worst.max(diff);
        if diff > 1e-6 {
            return Err(format!("N = {n}: quadrature {} vs {oracle}", row.quadrature));
        }
    }
    let at_1e7 = half_cauchy_closed_form(1e7);
    if !(demo.strictly_increasing && at_1e7 > 5.0) {
        return Err(format!("increasing = {}, E(1e7) = {at_1e7}", demo.strictly_increasing));
    }
    Ok(format!("max |quadrature − closed form| = {worst:.2e}, E_(10^7) = {at_1e7:.4}"))
}

fn divergent_sum() -> Result<String, String> {
    for n in [1usize, 10, 100] {
        let oracle = integer((n * (n + 1) / 2) as i64);
        let got = demo_divergent_sum(n).map_err(|e| e.to_string())?;
        if got != oracle {
            return Err(format!("N = {n}: {got} vs {oracle}"));
        }
    }
    Ok("N(N+1)/2 at N ∈ {1, 10, 100}; 100 → 5050".into())
}

fn open_interval() -> Result<String, String> {
    let demo = demo_open_interval(50).map_err(|e| e.to_string())?;
    // Oracle: partial sums of Σ 1/(2^i (i+1)) with tail Σ_{i>N} 2^-i/(i+1) ≤ 2^-N / (N+2).
    let partial: f64 = (1..=60).map(|i| 1.0 / (2f64.powi(i) * (i as f64 + 1.0))).sum();
    let tail = 2f64.powi(-60) / 62.0;
    let width = demo.width;
    if width > 2f64.powi(-40) {
        return Err(format!("width {width:e}"));
    }
    if !demo.enclosure.contains_f64(0.3862943, 1e-6) || !demo.enclosure.contains_f64(partial, tail + 1e-15) {
        return Err(format!("enclosure [{}, {}] misses the oracle {partial}", demo.lower, demo.upper));
    }
    if !(demo.inside_open_unit && demo.lower > 0.0 && demo.upper < 1.0) {
        return Err("enclosure not inside (0, 1)".into());
    }
    Ok(format!("[{:.12}, {:.12}], width {width:.2e}", demo.lower, demo.upper))
}

fn report_json(config: &LawConfig) -> String {
    serde_json::to_string(&run_suites(&select(None, false), config)).unwrap()
}

fn determinism() -> Result<String, String> {
    let config = LawConfig::default();
    let (a, b) = (report_json(&config), report_json(&config));
    if a != b {
        return Err("reports differ between runs".into());
    }
    let other = report_json(&LawConfig { seed: 1, ..LawConfig::default() });
    if other == a {
        return Err("seed has no effect on the report".into());
    }
    Ok(format!("{} bytes identical across runs", a.len()))
}

fn full_suite() -> Result<String, String> {
    let started = Instant::now();
    let reports = run_suites(&select(None, false), &LawConfig::default());
    let elapsed = started.elapsed();
    let summary = clean(&reports, 1)?;
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{summary}, {:.2}s", elapsed.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, fn() -> Result<String, String>); 13] = [
        ("axiom suites", axiom_suites),
        ("morphism suite", morphism_suite),
        ("triangle identities", triangle),
        ("naturality of the counit", naturality),
        ("phi round trip and rescaled additivity", phi_round_trip),
        ("monad laws", monad_laws),
        ("image property", image_property),
        ("evaluation-point recovery", recovery),
        ("half-Cauchy demo", half_cauchy),
        ("divergent-sum demo", divergent_sum),
        ("open-interval barycenter", open_interval),
        ("determinism", determinism),
        ("full default suite under 60 s", full_suite),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
