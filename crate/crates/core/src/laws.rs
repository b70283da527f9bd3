//! Executable law suites over the shipped instances, the mutants that each
//! suite must reject, and the counterexample demos.

use std::f64::consts::PI;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::giry::{
    barycenter, barycenter_countable, dirac, indicator, integrate, monad_mu, phi, phi_inverse, pushforward,
    CountableMeasure, Functional, FunctionalFn, GeneralizedPoint, GiryError, GirySpace, ProbMeasure,
};
use crate::meas::{generate_sigma_algebra, is_measurable, sigma_functor, FiniteMeasurableSpace, MeasurableMap, Subset};
use crate::numerics::{
    countable_combine, format_rational, integer, inverse_power_of_two, rational, rational_to_f64, random_rational,
    Budget, Certificate, Combination, DivergenceWitness, Enclosure, ExtReal, PartitionOfOne, Rational,
};
use crate::report::{rng_for, LawCheck, LawReport, Seeds};
use crate::scvx::{
    check_axiom1, check_axiom2, check_lazy_regression, check_morphism, check_morphism_cases, check_pointwise_combine,
    linear_map, make_interval_space, make_product_space, random_sparse_partition, AffineMap, Bound, ChainSemilattice,
    FunctionSpace, ImageSet, IntervalKind, IntervalSpace, Mutant, MutantKind, Piece, ProductSpace, SuperConvexSpace,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error("no point of the carrier matches every evaluation")]
    NoPoint,
    #[error("{0} points match every evaluation; the maps do not separate points")]
    Ambiguous(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Giry(#[from] GiryError),
}

/// A random atomic measure with at most `max_atoms` sampled atoms.
pub fn sample_measure<S: SuperConvexSpace>(space: &S, rng: &mut ChaCha8Rng, max_atoms: usize) -> ProbMeasure<S::Elem> {
    let k = rng.gen_range(1..=max_atoms.max(1));
    let parts: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=7)).collect();
    let total: i64 = parts.iter().sum();
    let atoms: Vec<_> = parts.into_iter().map(|p| (space.sample(rng), rational(p, total))).collect();
    ProbMeasure::from_atoms(atoms).expect("normalized by construction")
}

/// Test family of countably affine endomaps of R∞: identity, constants,
/// convex interpolations with constants and nonnegative rescalings.
pub fn g_family() -> Vec<AffineMap<ExtReal, ExtReal>> {
    vec![
        crate::scvx::identity(),
        AffineMap::constant(ExtReal::zero()),
        AffineMap::constant(ExtReal::ratio(5, 2)),
        AffineMap::constant(ExtReal::Infinity),
        linear_map(integer(1), rational(1, 2)),
        linear_map(integer(-1), rational(2, 3)),
        linear_map(integer(-1), integer(3)),
        linear_map(rational(7, 2), rational(1, 5)),
    ]
}

/// Which functional a suite builds from a sampled measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalKind {
    /// `m ↦ ∫ m dP`.
    Measure,
    /// `m ↦ m(a)` for the first atom of `P`.
    Point,
    /// `m ↦ m(a_1) + m(a_2)`; not weakly averaging.
    DoubleCount,
    /// `m ↦ 10 − ∫ m dP` on finite integrals; reverses the order.
    Antitone,
}

impl FunctionalKind {
    fn tag(self) -> &'static str {
        match self {
            FunctionalKind::Measure => "measure",
            FunctionalKind::Point => "point",
            FunctionalKind::DoubleCount => "mutant-double-count",
            FunctionalKind::Antitone => "mutant-antitone",
        }
    }

    pub fn build<T: Ord + Clone + std::fmt::Debug + Send + Sync + 'static>(
        self,
        p: &ProbMeasure<T>,
    ) -> Box<dyn Functional<T>> {
        let first = p.atoms().next().map(|(x, _)| x.clone()).expect("measures are nonempty");
        match self {
            FunctionalKind::Measure => Box::new(GeneralizedPoint::Measure(p.clone())),
            FunctionalKind::Point => Box::new(GeneralizedPoint::Point(first)),
            FunctionalKind::DoubleCount => {
                let second = p.atoms().nth(1).map(|(x, _)| x.clone()).unwrap_or_else(|| first.clone());
                Box::new(FunctionalFn::new("m(a1) + m(a2)", move |m: &AffineMap<T, ExtReal>| {
                    m.apply(&first).add(&m.apply(&second))
                }))
            }
            FunctionalKind::Antitone => {
                let p = p.clone();
                Box::new(FunctionalFn::new("10 − ∫m dP", move |m: &AffineMap<T, ExtReal>| {
                    match integrate(&p, |x| m.apply(x)) {
                        ExtReal::Finite(v) => ExtReal::Finite(integer(10) - v),
                        ExtReal::Infinity => ExtReal::zero(),
                    }
                }))
            }
        }
    }
}

/// `J(m) ∈ Image(m)` for every generating map, with `J` built from a sampled
/// measure. Maps whose image the instance cannot compute are skipped and
/// counted in the note.
pub fn check_image_property<S: SuperConvexSpace>(
    space: &S,
    seeds: Seeds,
    max_atoms: usize,
    kind: FunctionalKind,
) -> LawReport {
    let mut check = LawCheck::new("image", format!("{} [{}]", space.name(), kind.tag()), seeds);
    let maps = space.generating_maps();
    let mut skipped = 0usize;
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let p = sample_measure(space, &mut rng, max_atoms);
        let j = kind.build(&p);
        for m in &maps {
            let Some(image) = space.image(m) else {
                skipped += 1;
                continue;
            };
            let value = j.evaluate(m);
            check.record(image.contains(&value), || {
                json!({"seed": seed, "map": m.name(), "measure": format!("{p:?}"), "value": value.to_json_string(),
                       "image": format!("{image:?}")})
            });
        }
    }
    if skipped > 0 {
        check.note(format!("{skipped} evaluations skipped where the image was not computable"));
    }
    check.finish()
}

/// `J(g ∘ m) = g(J(m))` for every generating map `m` and every `g` in
/// [`g_family`].
pub fn check_generalized_point_naturality<S: SuperConvexSpace>(
    space: &S,
    seeds: Seeds,
    max_atoms: usize,
    kind: FunctionalKind,
) -> LawReport {
    let mut check = LawCheck::new("gp-naturality", format!("{} [{}]", space.name(), kind.tag()), seeds);
    let maps = space.generating_maps();
    let gs = g_family();
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let p = sample_measure(space, &mut rng, max_atoms);
        let j = kind.build(&p);
        for m in &maps {
            let jm = j.evaluate(m);
            for g in &gs {
                let lhs = j.evaluate(&m.then(g));
                let rhs = g.apply(&jm);
                check.record(lhs == rhs, || {
                    json!({"seed": seed, "map": m.name(), "g": g.name(), "functional": j.describe(),
                           "j_of_composite": lhs.to_json_string(), "g_of_j": rhs.to_json_string()})
                });
            }
        }
    }
    check.finish()
}

/// Monotonicity of `J` on the function space: `f ≤ g` pointwise (on the
/// atoms and fresh samples) implies `J(f) ≤ J(g)`. Pairs are `f` against
/// `c + f` and against `½ f + ½ ∞`.
pub fn check_order_preservation<S: SuperConvexSpace>(
    space: &S,
    seeds: Seeds,
    max_atoms: usize,
    kind: FunctionalKind,
) -> LawReport {
    let mut check = LawCheck::new("order", format!("{} [{}]", space.name(), kind.tag()), seeds);
    let fs = FunctionSpace::new(space);
    let half = PartitionOfOne::from_weights([rational(1, 2), rational(1, 2)]).expect("valid");
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let p = sample_measure(space, &mut rng, max_atoms);
        let j = kind.build(&p);
        let mut points: Vec<S::Elem> = p.atoms().map(|(x, _)| x.clone()).collect();
        points.extend((0..4).map(|_| space.sample(&mut rng)));
        for f in fs.maps() {
            let c = random_rational(&mut rng, 0, 4, 6);
            let shifted = f.then(&linear_map(c, integer(1)));
            let raised = fs.combine(&half, &[f.clone(), AffineMap::constant(ExtReal::Infinity)]).expect("two terms");
            for g in [shifted, raised] {
                let ordered = fs.le(f, &g, &points);
                let (jf, jg) = (j.evaluate(f), j.evaluate(&g));
                check.record(ordered && jf <= jg, || {
                    json!({"seed": seed, "f": f.name(), "g": g.name(), "pointwise_le": ordered,
                           "j_f": jf.to_json_string(), "j_g": jg.to_json_string()})
                });
            }
        }
    }
    check.finish()
}

/// `m(ε_A(P)) = ε_B(P m⁻¹)` with a fresh map and measure per seed.
pub fn check_naturality_epsilon<A: SuperConvexSpace, B: SuperConvexSpace>(
    source: &A,
    target: &B,
    maps: impl Fn(&mut ChaCha8Rng) -> AffineMap<A::Elem, B::Elem>,
    seeds: Seeds,
    max_atoms: usize,
) -> LawReport {
    let mut check = LawCheck::new("naturality-eps", format!("{} → {}", source.name(), target.name()), seeds);
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let m = maps(&mut rng);
        let p = sample_measure(source, &mut rng, max_atoms);
        let lhs = barycenter(source, &p).map(|x| m.apply(&x));
        let rhs = barycenter(target, &pushforward(&p, |x| m.apply(x)));
        let ok = matches!((&lhs, &rhs), (Ok(l), Ok(r)) if target.elem_eq(l, r));
        check.record(ok, || {
            let show = |r: &Result<B::Elem, GiryError>| match r {
                Ok(x) => target.label(x),
                Err(e) => format!("error: {e}"),
            };
            json!({"seed": seed, "map": m.name(), "measure": format!("{p:?}"),
                   "map_of_barycenter": show(&lhs), "barycenter_of_pushforward": show(&rhs)})
        });
    }
    check.finish()
}

/// A random affine self-map of `[0, 1]`, `x ↦ y0 + (y1 − y0) x`.
pub fn random_unit_affine(rng: &mut ChaCha8Rng) -> AffineMap<ExtReal, ExtReal> {
    let y0 = random_rational(rng, 0, 1, 9);
    let y1 = random_rational(rng, 0, 1, 9);
    let slope = &y1 - &y0;
    linear_map(y0, slope)
}

/// `x ↦ x²`, which is not affine.
pub fn square_map() -> AffineMap<ExtReal, ExtReal> {
    AffineMap::new("x ↦ x²", |x: &ExtReal| match x {
        ExtReal::Finite(v) => ExtReal::Finite(v * v),
        ExtReal::Infinity => ExtReal::Infinity,
    })
}

/// `P ↦ P f⁻¹` for a random `f : X → Y`, an affine map `G(X) → G(Y)`.
pub fn random_pushforward_map(
    source: usize,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> AffineMap<ProbMeasure<usize>, ProbMeasure<usize>> {
    let table: Vec<usize> = (0..source).map(|_| rng.gen_range(0..target)).collect();
    AffineMap::new(format!("push {table:?}"), move |p: &ProbMeasure<usize>| pushforward(p, |&x| table[x]))
}

/// Both triangle identities: `ε_{G X}(δ_P) = P` and `ε_A(δ_a) = a`.
pub fn check_triangle_identities<S: SuperConvexSpace>(gx: &GirySpace, space: &S, seeds: Seeds) -> LawReport {
    check_triangle_with(gx, space, seeds, |q| barycenter(gx, q))
}

/// Triangle identities with a caller-supplied counit on `G(X)`.
pub fn check_triangle_with<S: SuperConvexSpace>(
    gx: &GirySpace,
    space: &S,
    seeds: Seeds,
    eps: impl Fn(&ProbMeasure<ProbMeasure<usize>>) -> Result<ProbMeasure<usize>, GiryError>,
) -> LawReport {
    let mut check = LawCheck::new("triangle", format!("{} & {}", gx.name(), space.name()), seeds);
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let p = gx.sample(&mut rng);
        let back = eps(&dirac(p.clone()));
        check.record(matches!(&back, Ok(q) if gx.elem_eq(q, &p)), || {
            json!({"seed": seed, "identity": "P ↦ δ_P ↦ P", "P": gx.label(&p), "got": format!("{back:?}")})
        });
        let a = space.sample(&mut rng);
        let back = barycenter(space, &dirac(a.clone()));
        check.record(matches!(&back, Ok(b) if space.elem_eq(b, &a)), || {
            json!({"seed": seed, "identity": "a ↦ δ_a ↦ a", "a": space.label(&a), "got": format!("{back:?}")})
        });
    }
    check.finish()
}

/// The uniform measure on the support of the true barycenter; breaks the
/// `G(X)` triangle identity on non-uniform measures.
pub fn uniformizing_counit(gx: &GirySpace, q: &ProbMeasure<ProbMeasure<usize>>) -> Result<ProbMeasure<usize>, GiryError> {
    let p = barycenter(gx, q)?;
    Ok(ProbMeasure::uniform(p.atoms().map(|(&x, _)| x)))
}

/// Random finite measurable space with at most `max_points` points: the
/// powerset half the time, otherwise a σ-algebra generated by one or two
/// random sets.
pub fn random_finite_space(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteMeasurableSpace {
    let n = rng.gen_range(1..=max_points);
    if rng.gen_bool(0.5) {
        return FiniteMeasurableSpace::discrete(n);
    }
    let labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let generators: Vec<Subset> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..1u64 << n)).collect();
    generate_sigma_algebra(labels, &generators).expect("small carrier")
}

/// The rescaling identity for a disjoint family `U_1..U_k`: with
/// `α_i = 2^-i` (the last weight doubled so they sum to 1),
/// `J(χ_∪U) = J(Σ α_i (α_i⁻¹ χ_Ui)) = Σ α_i J(α_i⁻¹ χ_Ui) = Σ J(χ_Ui)`.
/// Returns the four quantities when the pointwise identity
/// `Σ α_i α_i⁻¹ χ_Ui = χ_∪U` holds on the carrier.
pub fn rescaled_additivity(
    j: &dyn Functional<usize>,
    carrier: usize,
    family: &[Subset],
) -> Result<[ExtReal; 4], LawError> {
    let k = family.len();
    if k == 0 || family.iter().enumerate().any(|(i, a)| family[i + 1..].iter().any(|b| a & b != 0)) {
        return Err(LawError::InvalidArgument("family must be nonempty and pairwise disjoint".into()));
    }
    let alpha: Vec<Rational> =
        (1..=k).map(|i| if i < k { inverse_power_of_two(i) } else { inverse_power_of_two(k - 1) }).collect();
    let weights = PartitionOfOne::from_weights(alpha.iter().cloned()).expect("sums to 1");
    let scaled: Vec<AffineMap<usize, ExtReal>> = family
        .iter()
        .zip(&alpha)
        .map(|(&u, a)| {
            let inverse = a.recip();
            let chi = indicator(u);
            AffineMap::new(format!("{}·{}", format_rational(&inverse), chi.name()), move |x: &usize| {
                chi.apply(x).scale(&inverse)
            })
        })
        .collect();
    let union: Subset = family.iter().fold(0, |acc, u| acc | u);
    let combined_terms: Vec<(Rational, AffineMap<usize, ExtReal>)> = alpha.iter().cloned().zip(scaled.clone()).collect();
    let combined = AffineMap::new("Σ α_i α_i⁻¹ χ_Ui", move |x: &usize| {
        crate::numerics::finite_combine(combined_terms.iter().map(|(w, f)| (w, f.apply(x))))
    });
    let chi_union = indicator(union);
    if (0..carrier).any(|x| combined.apply(&x) != chi_union.apply(&x)) {
        return Err(LawError::InvalidArgument("rescaled sum differs from the union indicator".into()));
    }
    let by_affinity = crate::numerics::finite_combine(
        weights.support().expect("finite").iter().zip(&scaled).map(|((_, w), f)| (w, j.evaluate(f))),
    );
    let by_sets = family.iter().fold(ExtReal::zero(), |acc, &u| acc.add(&j.evaluate(&indicator(u))));
    Ok([j.evaluate(&chi_union), j.evaluate(&combined), by_affinity, by_sets])
}

/// Random disjoint family of size at most eight, built from σ-atoms.
fn random_disjoint_family(rng: &mut ChaCha8Rng, space: &FiniteMeasurableSpace) -> Vec<Subset> {
    let mut atoms = space.atoms();
    atoms.shuffle(rng);
    let k = rng.gen_range(1..=atoms.len().min(8));
    let mut family = vec![0; k];
    for a in atoms {
        if rng.gen_bool(0.8) {
            family[rng.gen_range(0..k)] |= a;
        }
    }
    family
}

/// `φ⁻¹(φ(P)) = P` on random finite spaces of at most `max_points` points,
/// together with the rescaling identity on a random disjoint family.
pub fn check_phi_round_trip(seeds: Seeds, max_points: usize, kind: FunctionalKind) -> LawReport {
    let mut check = LawCheck::new("phi", format!("X≤{max_points} [{}]", kind.tag()), seeds);
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let space = random_finite_space(&mut rng, max_points);
        let gx = GirySpace::new(space.clone());
        let p = gx.sample(&mut rng);
        let j: Box<dyn Functional<usize>> = match kind {
            FunctionalKind::Measure => Box::new(phi(&p)),
            other => other.build(&p),
        };
        let back = phi_inverse(j.as_ref(), &space);
        let exact = space.is_powerset();
        let ok = matches!(&back, Ok(q) if gx.elem_eq(q, &p) && (!exact || q == &p));
        check.record(ok, || {
            json!({"seed": seed, "part": "round trip", "space": space.to_record(), "P": gx.label(&p),
                   "got": format!("{back:?}")})
        });
        let family = random_disjoint_family(&mut rng, &space);
        let identity = rescaled_additivity(j.as_ref(), space.size(), &family);
        let ok = matches!(&identity, Ok(vals) if vals.iter().all(|v| v == &vals[0]));
        check.record(ok, || {
            json!({"seed": seed, "part": "rescaled additivity", "family": family, "P": gx.label(&p),
                   "values": format!("{identity:?}")})
        });
    }
    check.finish()
}

/// A flattening map under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuKind {
    Lawful,
    /// Pairs the `i`-th weight with the `(n+1−i)`-th inner measure.
    ReversedWeights,
    /// Uniform on the support of the true flattening.
    Uniformizing,
}

pub fn apply_mu<T: Ord + Clone>(kind: MuKind, q: &ProbMeasure<ProbMeasure<T>>) -> ProbMeasure<T> {
    match kind {
        MuKind::Lawful => monad_mu(q),
        MuKind::ReversedWeights => {
            let (weights, mut inner) = q.as_partition();
            inner.reverse();
            crate::giry::mixture(&weights, &inner).expect("same length")
        }
        MuKind::Uniformizing => ProbMeasure::uniform(monad_mu(q).atoms().map(|(x, _)| x.clone())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonadLaw {
    /// `μ ∘ Gη = id`.
    LeftUnit,
    /// `μ ∘ ηG = id`.
    RightUnit,
    /// `μ ∘ Gμ = μ ∘ μG`.
    Associativity,
}

impl MonadLaw {
    pub fn tag(self) -> &'static str {
        match self {
            MonadLaw::LeftUnit => "monad-left-unit",
            MonadLaw::RightUnit => "monad-right-unit",
            MonadLaw::Associativity => "monad-assoc",
        }
    }
}

fn sample_nested<T: Ord + Clone>(
    rng: &mut ChaCha8Rng,
    max_atoms: usize,
    mut inner: impl FnMut(&mut ChaCha8Rng) -> T,
) -> ProbMeasure<T> {
    let k = rng.gen_range(1..=max_atoms);
    let parts: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = parts.iter().sum();
    let atoms: Vec<_> = parts.into_iter().map(|p| (inner(rng), rational(p, total))).collect();
    ProbMeasure::from_atoms(atoms).expect("normalized")
}

/// One monad law on random rational instances over `X` of at most four
/// points, exact equality.
pub fn check_monad_law(law: MonadLaw, kind: MuKind, seeds: Seeds) -> LawReport {
    let instance = match kind {
        MuKind::Lawful => "finite".to_string(),
        MuKind::ReversedWeights => "mutant-reversed-mu".to_string(),
        MuKind::Uniformizing => "mutant-uniformizing-mu".to_string(),
    };
    let mut check = LawCheck::new(law.tag(), instance, seeds);
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let gx = GirySpace::discrete(rng.gen_range(1..=4));
        let (ok, lhs, rhs) = match law {
            MonadLaw::LeftUnit => {
                let p = gx.sample(&mut rng);
                let got = apply_mu(kind, &pushforward(&p, |&x| dirac(x)));
                (got == p, format!("{got:?}"), format!("{p:?}"))
            }
            MonadLaw::RightUnit => {
                let p = gx.sample(&mut rng);
                let got = apply_mu(kind, &dirac(p.clone()));
                (got == p, format!("{got:?}"), format!("{p:?}"))
            }
            MonadLaw::Associativity => {
                let r = sample_nested(&mut rng, 3, |rng| sample_nested(rng, 3, |rng| gx.sample(rng)));
                let lhs = apply_mu(kind, &pushforward(&r, |q| apply_mu(kind, q)));
                let rhs = apply_mu(kind, &apply_mu(kind, &r));
                (lhs == rhs, format!("{lhs:?}"), format!("{rhs:?}"))
            }
        };
        check.record(ok, || json!({"seed": seed, "carrier": gx.base().size(), "lhs": lhs, "rhs": rhs}));
    }
    check.finish()
}

/// The unique carrier point `a` with `J(m) = m(a)` for every map, found by
/// exhaustive search.
pub fn recover_evaluation_point<T: Clone + 'static>(
    j: &dyn Functional<T>,
    carrier: &[T],
    maps: &[AffineMap<T, ExtReal>],
) -> Result<T, LawError> {
    let values: Vec<ExtReal> = maps.iter().map(|m| j.evaluate(m)).collect();
    let matches: Vec<&T> =
        carrier.iter().filter(|a| maps.iter().zip(&values).all(|(m, v)| &m.apply(a) == v)).collect();
    match matches.as_slice() {
        [] => Err(LawError::NoPoint),
        [a] => Ok((*a).clone()),
        many => Err(LawError::Ambiguous(many.len())),
    }
}

/// The uniform measure on the abstract two-point set `{0, 1}` seen through
/// the inclusion into R∞ evaluates to `1/2`, which no point attains.
pub fn abstract_pair_non_example() -> Result<usize, LawError> {
    let inclusion = AffineMap::new("0 ↦ 0, 1 ↦ 1", |&x: &usize| ExtReal::int(x as i64));
    let j = GeneralizedPoint::Measure(ProbMeasure::uniform([0usize, 1]));
    recover_evaluation_point(&j, &[0, 1], &[inclusion])
}

/// Recovery on chains of size `1..=max_size`: every point- and Dirac-backed
/// functional recovers its point, and seeded measures recover their
/// barycenter. `maps_for` supplies the evaluation family.
pub fn check_recovery(
    max_size: usize,
    seeds: Seeds,
    maps_for: impl Fn(&ChainSemilattice) -> Vec<AffineMap<usize, ExtReal>>,
    instance: &str,
) -> LawReport {
    let mut check = LawCheck::new("recovery", instance, seeds);
    for size in 1..=max_size {
        let chain = ChainSemilattice::new(size);
        let carrier = chain.carrier().expect("finite");
        let maps = maps_for(&chain);
        for a in &carrier {
            for (backing, j) in
                [("point", GeneralizedPoint::Point(*a)), ("dirac", GeneralizedPoint::Measure(dirac(*a)))]
            {
                let got = recover_evaluation_point(&j, &carrier, &maps);
                check.record(got.as_ref() == Ok(a), || {
                    json!({"size": size, "backing": backing, "point": a, "got": format!("{got:?}")})
                });
            }
        }
        for seed in seeds.iter() {
            let mut rng = rng_for(seed);
            let p = sample_measure(&chain, &mut rng, 4);
            let expected = barycenter(&chain, &p).map_err(LawError::from);
            let got = recover_evaluation_point(&GeneralizedPoint::Measure(p.clone()), &carrier, &maps);
            check.record(got.is_ok() && got == expected, || {
                json!({"size": size, "seed": seed, "backing": "measure", "measure": format!("{p:?}"),
                       "got": format!("{got:?}"), "barycenter": format!("{expected:?}")})
            });
        }
    }
    check.note(format!("uniqueness by exhaustive search over every carrier of size ≤ {max_size}"));
    check.finish()
}

/// Generator-level agreement on `G(X)`: each `ev_U` is affine on sampled
/// mixtures, and two combinations of evaluations that agree on Diracs agree
/// on sampled mixtures. `ev` builds the evaluation maps under test.
pub fn check_sigma_agreement(
    gx: &GirySpace,
    seeds: Seeds,
    depth: usize,
    mixtures_per_case: usize,
    ev: impl Fn(&GirySpace, Subset) -> AffineMap<ProbMeasure<usize>, ExtReal>,
    instance: &str,
) -> LawReport {
    let mut check = LawCheck::new("sigma-agreement", instance, seeds);
    let unit = make_interval_space(IntervalKind::ClosedUnit);
    let sets: Vec<Subset> = gx.base().sigma().iter().copied().collect();
    let atoms = gx.base().atoms();
    let n = gx.base().size();
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let u = sets[rng.gen_range(0..sets.len())];
        let ev_u = ev(gx, u);
        let affine = check_morphism(gx, &unit, &ev_u, Seeds::new(seed, 1), depth);
        check.record(affine.pass, || json!({"seed": seed, "part": "ev affine", "set": u, "witness": affine.counterexample}));

        let terms: Vec<(Rational, AffineMap<ProbMeasure<usize>, ExtReal>)> = (0..rng.gen_range(1..=3))
            .map(|_| (random_rational(&mut rng, 0, 3, 5), ev(gx, sets[rng.gen_range(0..sets.len())])))
            .collect();
        let by_atoms: Vec<(Rational, AffineMap<ProbMeasure<usize>, ExtReal>)> = atoms
            .iter()
            .map(|&a| {
                let x = a.trailing_zeros() as usize;
                let value = terms.iter().fold(Rational::zero(), |acc, (c, m)| {
                    acc + c * m.apply(&dirac(x)).as_finite().cloned().unwrap_or_else(Rational::zero)
                });
                (value, ev(gx, a))
            })
            .collect();
        let eval = |ts: &[(Rational, AffineMap<ProbMeasure<usize>, ExtReal>)], p: &ProbMeasure<usize>| {
            ts.iter().fold(ExtReal::zero(), |acc, (c, m)| acc.add(&m.apply(p).scale(c)))
        };
        let on_diracs = (0..n).all(|x| eval(&terms, &dirac(x)) == eval(&by_atoms, &dirac(x)));
        let mut on_mixtures = true;
        for _ in 0..mixtures_per_case {
            let k = rng.gen_range(1..=4);
            let ps: Vec<_> = (0..k).map(|_| gx.sample(&mut rng)).collect();
            let omega = PartitionOfOne::random_with(&mut rng, k);
            let mix = gx.combine(&omega, &ps).expect("same base");
            if eval(&terms, &mix) != eval(&by_atoms, &mix) {
                on_mixtures = false;
                break;
            }
        }
        check.record(on_diracs && on_mixtures, || {
            json!({"seed": seed, "part": "determined by Diracs", "on_diracs": on_diracs, "on_mixtures": on_mixtures})
        });
    }
    check.note("σ-algebra equality on G(X) itself is not desk-checkable; generator-level checks only");
    check.finish()
}

/// `P ↦ P(U)²`; agrees with `ev_U` on Diracs only.
pub fn squared_ev(gx: &GirySpace, u: Subset) -> AffineMap<ProbMeasure<usize>, ExtReal> {
    let ev = gx.ev(u);
    AffineMap::new(format!("{}²", ev.name()), move |p: &ProbMeasure<usize>| match ev.apply(p) {
        ExtReal::Finite(v) => ExtReal::Finite(&v * &v),
        ExtReal::Infinity => ExtReal::Infinity,
    })
}

/// The Σ-functor σ-algebra makes every generating map measurable, and it is
/// no larger than the σ-algebra generated by their fibers.
pub fn check_sigma_functor<S: SuperConvexSpace>(space: &S, seeds: Seeds) -> LawReport {
    let mut check = LawCheck::new("sigma-functor", space.name(), seeds);
    let maps = space.generating_maps();
    match sigma_functor(space, &maps) {
        Ok((sigma_space, carrier)) => {
            for m in &maps {
                let values: Vec<ExtReal> = carrier.iter().map(|x| m.apply(x)).collect();
                let measurable = MeasurableMap::to_ext_real(sigma_space.clone(), values).map(|f| is_measurable(&f));
                check.record(measurable == Ok(true), || json!({"map": m.name(), "measurable": format!("{measurable:?}")}));
            }
            for &u in sigma_space.sigma() {
                let needed = sigma_space.atoms().iter().all(|&a| a & u == 0 || a & u == a);
                check.record(needed, || json!({"set": sigma_space.labels_of(u)}));
            }
        }
        Err(e) => check.fail_case(json!({"error": e.to_string()})),
    }
    check.finish()
}

/// Countable combination under the configured budget: bounded sequences are
/// enclosed within `max(tolerance, 2·B·tail(N))` and the divergent geometric
/// sequence is certified infinite.
pub fn check_countable_combine(seeds: Seeds, budget: &Budget) -> LawReport {
    let mut check = LawCheck::new("countable-combine", "geometric", seeds);
    let geometric = PartitionOfOne::geometric();
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let b_int: i64 = rng.gen_range(1..=10);
        let bound = integer(b_int);
        let a = random_rational(&mut rng, -b_int, b_int, 7);
        let b = random_rational(&mut rng, -b_int, b_int, 7);
        let u = |i: usize| ExtReal::Finite(if i % 2 == 1 { a.clone() } else { b.clone() });
        // Oracle: Σ_{odd i} 2^-i = 2/3, Σ_{even i} 2^-i = 1/3.
        let exact = &a * rational(2, 3) + &b * rational(1, 3);
        let result = countable_combine(&geometric, u, &Certificate::Bounded(bound.clone()), budget);
        let ok = match &result {
            Ok(Combination::Enclosed { enclosure, depth, .. }) => {
                let allowed = ExtReal::Finite(
                    budget.tolerance.clone().max(integer(2) * &bound * geometric.tail_mass(*depth)),
                );
                enclosure.contains(&exact) && enclosure.width() <= allowed
            }
            Ok(Combination::Exact(v)) => v == &ExtReal::Finite(exact.clone()),
            Err(_) => false,
        };
        check.record(ok, || {
            json!({"seed": seed, "odd_term": format_rational(&a), "even_term": format_rational(&b),
                   "exact": format_rational(&exact), "result": format!("{result:?}")})
        });
    }
    let witness = DivergenceWitness::new(|n| integer(n as i64) * integer(n as i64 + 1) / integer(2));
    let divergent = countable_combine(
        &geometric,
        |i| ExtReal::Finite(integer(i as i64) / inverse_power_of_two(i)),
        &Certificate::Divergent(witness),
        budget,
    );
    check.record(divergent == Ok(Combination::Exact(ExtReal::Infinity)), || {
        json!({"case": "u_i = i·2^i", "result": format!("{divergent:?}")})
    });
    check.note(format!("enclosure width ≤ max({}, 2·B·tail(N)), N ≤ {}", format_rational(&budget.tolerance), budget.max_depth));
    check.finish()
}

/// One row of the half-Cauchy table.
#[derive(Clone, Debug, Serialize)]
pub struct HalfCauchyRow {
    pub n: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfCauchyDemo {
    pub rows: Vec<HalfCauchyRow>,
    pub strictly_increasing: bool,
    /// Whether the limit ∞ of the truncated expectations lies in
    /// `Image(inclusion) = [0, ∞)`.
    pub limit_in_image: bool,
}

/// `E_N = ∫₀^N x·(2/π)/(1+x²) dx = ln(1+N²)/π`.
pub fn half_cauchy_closed_form(n: f64) -> f64 {
    (n * n).ln_1p() / PI
}

fn half_cauchy_integrand(x: f64) -> f64 {
    x * (2.0 / PI) / (1.0 + x * x)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f((a + b) / 2.0) + f(b))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = (a + b) / 2.0;
    let (left, right) = (simpson(f, a, mid), simpson(f, mid, b));
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, mid, left, tol / 2.0, depth - 1) + adaptive_simpson(f, mid, b, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `E_N`, split at powers of ten.
pub fn half_cauchy_quadrature(n: f64) -> f64 {
    let mut breaks = vec![0.0];
    let mut edge = 1.0;
    while edge < n {
        breaks.push(edge);
        edge *= 10.0;
    }
    breaks.push(n);
    breaks
        .windows(2)
        .map(|w| {
            let whole = simpson(&half_cauchy_integrand, w[0], w[1]);
            adaptive_simpson(&half_cauchy_integrand, w[0], w[1], whole, 1e-11, 48)
        })
        .sum()
}

pub fn demo_half_cauchy(ns: &[f64]) -> Result<HalfCauchyDemo, LawError> {
    if ns.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
        return Err(LawError::InvalidArgument("N values must be positive".into()));
    }
    let rows: Vec<HalfCauchyRow> = ns
        .iter()
        .map(|&n| {
            let (closed_form, quadrature) = (half_cauchy_closed_form(n), half_cauchy_quadrature(n));
            HalfCauchyRow { n, closed_form, quadrature, difference: (closed_form - quadrature).abs() }
        })
        .collect();
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.n.total_cmp(&b.n));
    let strictly_increasing = sorted.windows(2).all(|w| w[0].n == w[1].n || w[0].closed_form < w[1].closed_form);
    let positive_half_line = ImageSet::new(vec![Piece::Interval { lower: Bound::Closed(integer(0)), upper: Bound::Unbounded }]);
    Ok(HalfCauchyDemo { rows, strictly_increasing, limit_in_image: positive_half_line.contains(&ExtReal::Infinity) })
}

/// `Σ_{i≤N} 2^-i · i·2^i`, computed term by term in exact arithmetic.
pub fn demo_divergent_sum(n: usize) -> Result<Rational, LawError> {
    if n == 0 {
        return Err(LawError::InvalidArgument("N must be at least 1".into()));
    }
    Ok((1..=n).fold(Rational::zero(), |acc, i| {
        let weight = inverse_power_of_two(i);
        let atom = integer(i as i64) / inverse_power_of_two(i);
        acc + weight * atom
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct OpenIntervalDemo {
    pub depth: usize,
    pub enclosure: Enclosure,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub estimate: f64,
    pub inside_open_unit: bool,
}

/// Barycenter in `(0, 1)` of `Σ 2^-i δ_{1/(i+1)}`, enclosed at the given
/// truncation depth.
pub fn demo_open_interval(depth: usize) -> Result<OpenIntervalDemo, LawError> {
    if depth == 0 {
        return Err(LawError::InvalidArgument("depth must be at least 1".into()));
    }
    let open = make_interval_space(IntervalKind::OpenUnit);
    let p = CountableMeasure::of_points(PartitionOfOne::geometric(), |i| ExtReal::ratio(1, i as i64 + 1));
    let result = barycenter_countable(&open, &p, &Certificate::Bounded(Rational::one()), &Budget::fixed_depth(depth))?;
    let enclosure = result.enclosure().cloned().unwrap_or_else(|| Enclosure::point(result.value().as_finite().cloned().unwrap_or_else(Rational::zero)));
    Ok(OpenIntervalDemo {
        depth,
        lower: rational_to_f64(enclosure.lower()),
        upper: enclosure.upper().to_f64(),
        width: enclosure.width().to_f64(),
        estimate: result.value().to_f64(),
        inside_open_unit: open.certifies(&enclosure),
        enclosure,
    })
}

/// Run-wide settings shared by every suite.
#[derive(Clone, Debug)]
pub struct LawConfig {
    pub seed: u64,
    pub cases: usize,
    pub depth: usize,
    pub budget: Budget,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig { seed: 0, cases: 200, depth: 8, budget: Budget::default() }
    }
}

type SuiteFn = Box<dyn Fn(&LawConfig, Seeds) -> LawReport + Send + Sync>;

/// A named law applied to one instance. Mutant suites are expected to fail.
pub struct Suite {
    pub name: String,
    pub mutant: bool,
    run: SuiteFn,
}

impl Suite {
    fn new(name: &str, mutant: bool, run: impl Fn(&LawConfig, Seeds) -> LawReport + Send + Sync + 'static) -> Self {
        Suite { name: name.to_string(), mutant, run: Box::new(run) }
    }

    pub fn run(&self, config: &LawConfig) -> LawReport {
        let seeds = Seeds::new(config.seed, config.cases).salted(&self.name);
        let mut report = (self.run)(config, seeds);
        let (law, instance) = self.name.split_once('/').unwrap_or((&self.name, ""));
        report.law = law.to_string();
        report.instance = instance.to_string();
        report
    }
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

fn product() -> ProductSpace<IntervalSpace> {
    make_product_space(vec![closed(), open(), ext()]).expect("nonempty")
}

fn interval_to_ext_maps(space: IntervalSpace) -> impl Fn(&mut ChaCha8Rng) -> AffineMap<ExtReal, ExtReal> {
    let maps = space.generating_maps();
    move |rng| maps[rng.gen_range(0..maps.len())].clone()
}

/// Every shipped suite in a fixed order, mutants included.
pub fn registry() -> Vec<Suite> {
    let mut suites = Vec::new();
    macro_rules! per_space {
        ($law:literal, $check:ident) => {
            suites.push(Suite::new(concat!($law, "/closed_unit"), false, |c, s| $check(&closed(), s, c.depth)));
            suites.push(Suite::new(concat!($law, "/open_unit"), false, |c, s| $check(&open(), s, c.depth)));
            suites.push(Suite::new(concat!($law, "/ext_real"), false, |c, s| $check(&ext(), s, c.depth)));
            suites.push(Suite::new(concat!($law, "/product3"), false, |c, s| $check(&product(), s, c.depth)));
            suites.push(Suite::new(concat!($law, "/chain5"), false, |c, s| $check(&ChainSemilattice::new(5), s, c.depth)));
            for n in 2..=4 {
                let name = format!(concat!($law, "/giry_x{}"), n);
                suites.push(Suite::new(&name, false, move |c, s| $check(&GirySpace::discrete(n), s, c.depth)));
            }
        };
    }
    per_space!("axiom1", check_axiom1);
    per_space!("axiom2", check_axiom2);
    suites.push(Suite::new("axiom1/mutant-first-term", true, |c, s| {
        check_axiom1(&Mutant { inner: closed(), kind: MutantKind::FirstTerm }, s, c.depth)
    }));
    suites.push(Suite::new("axiom2/mutant-reversed-weights", true, |c, s| {
        check_axiom2(&Mutant { inner: closed(), kind: MutantKind::ReversedWeights }, s, c.depth)
    }));
    suites.push(Suite::new("axiom-lazy/closed_unit", false, |_, s| check_lazy_regression(&closed(), s, 50)));
    suites.push(Suite::new("axiom-lazy/open_unit", false, |_, s| check_lazy_regression(&open(), s, 50)));

    suites.push(Suite::new("countable-combine/geometric", false, |c, s| check_countable_combine(s, &c.budget)));

    per_space!("pointwise", check_pointwise_combine);
    suites.push(Suite::new("pointwise/mutant-first-term", true, |c, s| {
        check_pointwise_combine(&Mutant { inner: closed(), kind: MutantKind::FirstTerm }, s, c.depth)
    }));

    macro_rules! morphisms {
        ($name:literal, $space:expr) => {
            suites.push(Suite::new(concat!("morphism/", $name), false, |c, s| {
                let space = $space;
                merge_reports("morphism", $name, s, space.generating_maps().iter().enumerate().map(|(k, m)| {
                    check_morphism(&space, &ext(), m, s.salted(&k.to_string()), c.depth)
                }))
            }));
        };
    }
    morphisms!("closed_unit", closed());
    morphisms!("open_unit", open());
    morphisms!("ext_real", ext());
    morphisms!("product3", product());
    morphisms!("chain5", ChainSemilattice::new(5));
    morphisms!("giry_x3", GirySpace::discrete(3));
    suites.push(Suite::new("morphism/closed_unit-affine", false, |c, s| {
        let cases = s.iter().map(|seed| {
            let mut rng = rng_for(seed);
            let a: Vec<_> = (0..c.depth).map(|_| closed().sample(&mut rng)).collect();
            let m = random_unit_affine(&mut rng);
            (m, random_sparse_partition(&mut rng, c.depth), a)
        });
        let reports: Vec<_> = cases
            .enumerate()
            .map(|(k, (m, omega, a))| check_morphism_cases(&closed(), &closed(), &m, Seeds::new(s.base ^ k as u64, 1), [(omega, a)]))
            .collect();
        merge_reports("morphism", "closed_unit-affine", s, reports)
    }));
    suites.push(Suite::new("morphism/mutant-square", true, |c, s| {
        let half = PartitionOfOne::from_weights([rational(1, 2), rational(1, 2)]).expect("valid");
        let fixed = (half, vec![ExtReal::zero(), ExtReal::one()]);
        let sampled = s.iter().map(|seed| {
            let mut rng = rng_for(seed);
            let a: Vec<_> = (0..c.depth).map(|_| closed().sample(&mut rng)).collect();
            (random_sparse_partition(&mut rng, c.depth), a)
        });
        let cases: Vec<_> = std::iter::once(fixed).chain(sampled).collect();
        check_morphism_cases(&closed(), &closed(), &square_map(), s, cases)
    }));

    suites.push(Suite::new("triangle/closed_unit", false, |_, s| {
        check_triangle_identities(&GirySpace::discrete(4), &closed(), s)
    }));
    suites.push(Suite::new("triangle/ext_real", false, |_, s| {
        check_triangle_identities(&GirySpace::discrete(3), &ext(), s)
    }));
    suites.push(Suite::new("triangle/product3", false, |_, s| {
        check_triangle_identities(&GirySpace::discrete(2), &product(), s)
    }));
    suites.push(Suite::new("triangle/chain5", false, |_, s| {
        check_triangle_identities(&GirySpace::discrete(4), &ChainSemilattice::new(5), s)
    }));
    suites.push(Suite::new("triangle/mutant-uniformizing", true, |_, s| {
        let gx = GirySpace::discrete(4);
        check_triangle_with(&gx, &closed(), s, |q| uniformizing_counit(&gx, q))
    }));

    suites.push(Suite::new("naturality-eps/closed_unit-affine", false, |_, s| {
        check_naturality_epsilon(&closed(), &closed(), random_unit_affine, s, 4)
    }));
    suites.push(Suite::new("naturality-eps/closed_unit-ext_real", false, |_, s| {
        check_naturality_epsilon(&closed(), &ext(), interval_to_ext_maps(closed()), s, 4)
    }));
    suites.push(Suite::new("naturality-eps/ext_real", false, |_, s| {
        check_naturality_epsilon(&ext(), &ext(), interval_to_ext_maps(ext()), s, 4)
    }));
    suites.push(Suite::new("naturality-eps/giry_x3-ext_real", false, |_, s| {
        let gx = GirySpace::discrete(3);
        let maps = gx.generating_maps();
        check_naturality_epsilon(&gx, &ext(), |rng| maps[rng.gen_range(0..maps.len())].clone(), s, 3)
    }));
    suites.push(Suite::new("naturality-eps/giry_x3-giry_x2", false, |_, s| {
        check_naturality_epsilon(
            &GirySpace::discrete(3),
            &GirySpace::discrete(2),
            |rng| random_pushforward_map(3, 2, rng),
            s,
            3,
        )
    }));
    suites.push(Suite::new("naturality-eps/mutant-square", true, |_, s| {
        check_naturality_epsilon(&closed(), &closed(), |_| square_map(), s, 4)
    }));

    macro_rules! functionals {
        ($law:literal, $check:ident, $mutant:expr) => {
            for kind in [FunctionalKind::Measure, FunctionalKind::Point] {
                let tag = if kind == FunctionalKind::Point { "-point" } else { "" };
                suites.push(Suite::new(&format!(concat!($law, "/closed_unit{}"), tag), false, move |_, s| $check(&closed(), s, 4, kind)));
                suites.push(Suite::new(&format!(concat!($law, "/open_unit{}"), tag), false, move |_, s| $check(&open(), s, 4, kind)));
                suites.push(Suite::new(&format!(concat!($law, "/ext_real{}"), tag), false, move |_, s| $check(&ext(), s, 4, kind)));
                suites.push(Suite::new(&format!(concat!($law, "/product3{}"), tag), false, move |_, s| $check(&product(), s, 4, kind)));
                suites.push(Suite::new(&format!(concat!($law, "/chain5{}"), tag), false, move |_, s| {
                    $check(&ChainSemilattice::new(5), s, 4, kind)
                }));
                suites.push(Suite::new(&format!(concat!($law, "/giry_x3{}"), tag), false, move |_, s| {
                    $check(&GirySpace::discrete(3), s, 3, kind)
                }));
            }
            suites.push(Suite::new(&format!(concat!($law, "/{}"), $mutant.tag()), true, |_, s| $check(&closed(), s, 4, $mutant)));
        };
    }
    functionals!("image", check_image_property, FunctionalKind::DoubleCount);
    functionals!("gp-naturality", check_generalized_point_naturality, FunctionalKind::DoubleCount);
    functionals!("order", check_order_preservation, FunctionalKind::Antitone);

    suites.push(Suite::new("phi/finite", false, |_, s| check_phi_round_trip(s, 8, FunctionalKind::Measure)));
    suites.push(Suite::new("phi/mutant-double-count", true, |_, s| {
        check_phi_round_trip(s, 8, FunctionalKind::DoubleCount)
    }));

    for law in [MonadLaw::LeftUnit, MonadLaw::RightUnit, MonadLaw::Associativity] {
        suites.push(Suite::new(&format!("{}/finite", law.tag()), false, move |_, s| check_monad_law(law, MuKind::Lawful, s)));
        let mutant = if law == MonadLaw::RightUnit { MuKind::Uniformizing } else { MuKind::ReversedWeights };
        let name = format!("{}/{}", law.tag(), if mutant == MuKind::Uniformizing { "mutant-uniformizing-mu" } else { "mutant-reversed-mu" });
        suites.push(Suite::new(&name, true, move |_, s| check_monad_law(law, mutant, s)));
    }

    suites.push(Suite::new("recovery/chain", false, |_, s| {
        check_recovery(6, Seeds::new(s.base, s.count.min(20)), |c| c.generating_maps(), "chain")
    }));
    suites.push(Suite::new("recovery/mutant-constant-maps", true, |_, s| {
        check_recovery(6, Seeds::new(s.base, s.count.min(20)), |_| vec![AffineMap::constant(ExtReal::int(3))], "mutant-constant-maps")
    }));

    for n in [3usize, 4] {
        suites.push(Suite::new(&format!("sigma-agreement/giry_x{n}"), false, move |c, s| {
            check_sigma_agreement(&GirySpace::discrete(n), s, c.depth, 100, |gx, u| gx.ev(u), "")
        }));
    }
    suites.push(Suite::new("sigma-agreement/mutant-squared-ev", true, |c, s| {
        check_sigma_agreement(&GirySpace::discrete(3), s, c.depth, 100, squared_ev, "")
    }));

    suites.push(Suite::new("sigma-functor/chain5", false, |_, s| check_sigma_functor(&ChainSemilattice::new(5), s)));
    suites
}

/// Folds per-map reports into one, keeping the first counterexample.
pub fn merge_reports(law: &str, instance: &str, seeds: Seeds, reports: impl IntoIterator<Item = LawReport>) -> LawReport {
    let mut check = LawCheck::new(law, instance, seeds);
    for report in reports {
        for _ in 0..report.passed {
            check.pass_case();
        }
        for _ in 0..report.failures {
            let witness = json!({"instance": report.instance, "witness": report.counterexample});
            check.fail_case(witness);
        }
    }
    check.finish()
}

/// Suites whose name matches `filter` (all when `None`), mutants only when
/// asked for.
pub fn select(filter: Option<&glob::Pattern>, mutants: bool) -> Vec<Suite> {
    registry()
        .into_iter()
        .filter(|s| mutants || !s.mutant)
        .filter(|s| filter.map_or(true, |p| p.matches(&s.name)))
        .collect()
}

/// Runs suites in parallel; reports come back in registry order.
pub fn run_suites(suites: &[Suite], config: &LawConfig) -> Vec<LawReport> {
    suites.par_iter().map(|s| s.run(config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> LawConfig {
        LawConfig { cases: 20, ..LawConfig::default() }
    }

    #[test]
    fn every_lawful_suite_passes_and_every_mutant_fails() {
        let config = small();
        for suite in registry() {
            let report = suite.run(&config);
            assert_eq!(report.pass, !suite.mutant, "{}: {:?}", suite.name, report.counterexample);
            if suite.mutant {
                assert!(report.counterexample.is_some(), "{}", suite.name);
            }
        }
    }

    #[test]
    fn every_law_has_a_mutant() {
        let suites = registry();
        let law = |s: &Suite| s.name.split('/').next().unwrap().to_string();
        let killed: std::collections::BTreeSet<String> = suites.iter().filter(|s| s.mutant).map(law).collect();
        let exempt = ["axiom-lazy", "countable-combine", "sigma-functor"];
        for s in &suites {
            let l = law(s);
            assert!(killed.contains(&l) || exempt.contains(&l.as_str()), "no mutant for {l}");
        }
    }

    #[test]
    fn suite_names_are_unique() {
        let names: Vec<_> = registry().into_iter().map(|s| s.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn filter_selects_by_glob() {
        let pattern = glob::Pattern::new("axiom*").unwrap();
        let suites = select(Some(&pattern), false);
        assert!(!suites.is_empty());
        assert!(suites.iter().all(|s| s.name.starts_with("axiom") && !s.mutant));
    }

    #[test]
    fn square_map_witness_is_the_midpoint() {
        let report = registry().into_iter().find(|s| s.name == "morphism/mutant-square").unwrap().run(&small());
        let witness = report.counterexample.unwrap();
        assert_eq!(witness["sequence"], json!(["0/1", "1/1"]));
        assert_eq!(witness["map_of_combination"], json!("1/4"));
        assert_eq!(witness["combination_of_images"], json!("1/2"));
    }

    #[test]
    fn epsilon_naturality_hand_example() {
        // x ↦ (x + 1)/2 on uniform{0, 1}: both sides are 3/4.
        let m = linear_map(rational(1, 2), rational(1, 2));
        let p = ProbMeasure::uniform([ExtReal::zero(), ExtReal::one()]);
        let lhs = m.apply(&barycenter(&closed(), &p).unwrap());
        let rhs = barycenter(&closed(), &pushforward(&p, |x| m.apply(x))).unwrap();
        assert_eq!(lhs, ExtReal::ratio(3, 4));
        assert_eq!(rhs, ExtReal::ratio(3, 4));
    }

    #[test]
    fn naturality_interpolation_by_expansion() {
        // ∫ (x/2 + c/2) dP = (∫x dP)/2 + c/2 with P = 1/3 δ_0 + 2/3 δ_1, c = 2.
        let p = ProbMeasure::from_atoms([(ExtReal::zero(), rational(1, 3)), (ExtReal::one(), rational(2, 3))]).unwrap();
        let j = GeneralizedPoint::Measure(p);
        let g = linear_map(integer(1), rational(1, 2));
        let id = crate::scvx::identity::<ExtReal>();
        assert_eq!(j.apply(&id.then(&g)), ExtReal::ratio(4, 3));
        assert_eq!(g.apply(&j.apply(&id)), ExtReal::ratio(4, 3));
    }

    #[test]
    fn weakly_averaging_on_constants() {
        let p = ProbMeasure::uniform([ExtReal::zero(), ExtReal::ratio(1, 3)]);
        for c in [ExtReal::int(7), ExtReal::Infinity] {
            assert_eq!(GeneralizedPoint::Measure(p.clone()).apply(&AffineMap::constant(c.clone())), c);
        }
    }

    #[test]
    fn image_examples() {
        let unit = closed();
        let id = crate::scvx::identity::<ExtReal>();
        let j = GeneralizedPoint::Measure(ProbMeasure::uniform([ExtReal::zero(), ExtReal::one()]));
        assert!(unit.image(&id).unwrap().contains(&j.apply(&id)));
        let demo = demo_half_cauchy(&[1.0]).unwrap();
        assert!(!demo.limit_in_image);
    }

    #[test]
    fn recovery_examples() {
        let chain = ChainSemilattice::new(4);
        let carrier = chain.carrier().unwrap();
        let maps = chain.generating_maps();
        for a in 0..4 {
            assert_eq!(recover_evaluation_point(&GeneralizedPoint::Point(a), &carrier, &maps), Ok(a));
            assert_eq!(recover_evaluation_point(&GeneralizedPoint::Measure(dirac(a)), &carrier, &maps), Ok(a));
        }
        assert_eq!(abstract_pair_non_example(), Err(LawError::NoPoint));
        let constant = [AffineMap::constant(ExtReal::int(3))];
        assert_eq!(
            recover_evaluation_point(&GeneralizedPoint::Point(1), &carrier, &constant),
            Err(LawError::Ambiguous(4))
        );
    }

    #[test]
    fn rescaling_identity_on_a_known_family() {
        let p = ProbMeasure::from_atoms([(0usize, rational(1, 2)), (1, rational(1, 4)), (3, rational(1, 4))]).unwrap();
        let vals = rescaled_additivity(&phi(&p), 4, &[0b0001, 0b0010, 0b1000]).unwrap();
        assert!(vals.iter().all(|v| v == &ExtReal::one()));
        assert!(rescaled_additivity(&phi(&p), 4, &[0b0011, 0b0010]).is_err());
    }

    #[test]
    fn half_cauchy_rows() {
        let demo = demo_half_cauchy(&[1.0, 10.0, 100.0, 1e4]).unwrap();
        assert!(demo.strictly_increasing);
        for row in &demo.rows {
            assert!(row.difference < 1e-6, "{row:?}");
        }
        assert!((demo.rows[0].closed_form - 2f64.ln() / PI).abs() < 1e-15);
        assert!(half_cauchy_closed_form(1e7) > 5.0);
        let gap = half_cauchy_closed_form(1e6) - half_cauchy_closed_form(1e3);
        assert!((gap - 1e6f64.ln() / PI).abs() < 1e-6);
    }

    #[test]
    fn divergent_sum_values() {
        assert_eq!(demo_divergent_sum(1).unwrap(), integer(1));
        assert_eq!(demo_divergent_sum(10).unwrap(), integer(55));
        assert_eq!(demo_divergent_sum(100).unwrap(), integer(5050));
        assert!(demo_divergent_sum(0).is_err());
    }

    #[test]
    fn open_interval_enclosure() {
        let demo = demo_open_interval(50).unwrap();
        assert!(demo.width <= 2f64.powi(-40));
        assert!(demo.inside_open_unit);
        assert!(demo.enclosure.contains_f64(0.3862943, 1e-6));
    }
}
