//! Atomic probability measures: unit, mixture, pushforward, integration,
//! the barycenter map and the correspondence between measures and
//! generalized points.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::meas::{FiniteMeasurableSpace, Subset};
use crate::numerics::{
    countable_combine, finite_combine, format_rational, rational, rational_str, Budget, Certificate, Combination,
    ExtReal, NumericsError, PartitionOfOne, Rational,
};
use crate::scvx::{supported_terms, AffineMap, ImageSet, IntervalSpace, Piece, ScvxError, SuperConvexSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GiryError {
    #[error("measures live on different bases")]
    BaseMismatch,
    #[error("not a probability measure: {0}")]
    NotAMeasure(String),
    #[error("barycenter {barycenter} disagrees with the integral {integral} under {map}")]
    EvaluationMismatch { map: String, barycenter: String, integral: String },
    #[error(transparent)]
    Scvx(#[from] ScvxError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A finitely supported probability measure. Atoms are kept sorted with
/// positive weights, so structural equality is equality of measures.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbMeasure<T: Ord> {
    atoms: BTreeMap<T, Rational>,
}

impl<T: Ord + fmt::Debug> fmt::Debug for ProbMeasure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (x, w) in &self.atoms {
            m.entry(x, &format_rational(w));
        }
        m.finish()
    }
}

impl<T: Ord + Clone> ProbMeasure<T> {
    /// Duplicate atoms are merged; weights must lie in `[0, 1]` and sum to 1.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (T, Rational)>) -> Result<Self, GiryError> {
        let mut merged: BTreeMap<T, Rational> = BTreeMap::new();
        for (k, (x, w)) in atoms.into_iter().enumerate() {
            if w.is_negative() || w > Rational::one() {
                return Err(NumericsError::WeightOutOfRange { index: k + 1, weight: format_rational(&w) }.into());
            }
            *merged.entry(x).or_insert_with(Rational::zero) += w;
        }
        merged.retain(|_, w| !w.is_zero());
        let total: Rational = merged.values().sum();
        if !total.is_one() {
            return Err(NumericsError::NotNormalized { sum: format_rational(&total) }.into());
        }
        Ok(ProbMeasure { atoms: merged })
    }

    pub fn uniform(points: impl IntoIterator<Item = T>) -> Self {
        let points: Vec<T> = points.into_iter().collect();
        let w = rational(1, points.len() as i64);
        Self::from_atoms(points.into_iter().map(|x| (x, w.clone()))).expect("uniform weights sum to one")
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.atoms.iter()
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn weight(&self, x: &T) -> Rational {
        self.atoms.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn mass_where(&self, pred: impl Fn(&T) -> bool) -> Rational {
        self.atoms.iter().filter(|(x, _)| pred(x)).map(|(_, w)| w).sum()
    }

    /// Weights as a partition of one, with the atoms in matching order.
    pub fn as_partition(&self) -> (PartitionOfOne, Vec<T>) {
        let weights = PartitionOfOne::from_weights(self.atoms.values().cloned()).expect("stored weights are normalized");
        (weights, self.atoms.keys().cloned().collect())
    }
}

impl ProbMeasure<usize> {
    /// `P(U)` for a mask over carrier indices.
    pub fn mass(&self, u: Subset) -> Rational {
        self.mass_where(|&x| x < 64 && u >> x & 1 == 1)
    }

    pub fn to_record(&self, space: &FiniteMeasurableSpace) -> MeasureRecord {
        MeasureRecord {
            base: space.labels().to_vec(),
            atoms: self
                .atoms
                .iter()
                .map(|(x, w)| AtomRecord { atom: space.labels()[*x].clone(), weight: w.clone() })
                .collect(),
        }
    }

    pub fn from_record(space: &FiniteMeasurableSpace, record: &MeasureRecord) -> Result<Self, GiryError> {
        if record.base != space.labels() {
            return Err(GiryError::BaseMismatch);
        }
        let atoms: Result<Vec<_>, _> = record
            .atoms
            .iter()
            .map(|a| space.index_of(&a.atom).map(|i| (i, a.weight.clone())))
            .collect();
        Self::from_atoms(atoms.map_err(|e| GiryError::NotAMeasure(e.to_string()))?)
    }
}

/// JSON form of a measure on a finite space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub base: Vec<String>,
    pub atoms: Vec<AtomRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub atom: String,
    #[serde(with = "rational_str")]
    pub weight: Rational,
}

/// The unit: `x ↦ δ_x`.
pub fn dirac<T: Ord + Clone>(x: T) -> ProbMeasure<T> {
    ProbMeasure { atoms: BTreeMap::from([(x, Rational::one())]) }
}

/// `Σ_i ω_i P_i` for finitely supported `ω`; `measures[i - 1]` is `P_i`.
pub fn mixture<T: Ord + Clone>(weights: &PartitionOfOne, measures: &[ProbMeasure<T>]) -> Result<ProbMeasure<T>, GiryError> {
    let mut atoms: BTreeMap<T, Rational> = BTreeMap::new();
    for (w, p) in supported_terms(weights, measures)? {
        for (x, v) in &p.atoms {
            *atoms.entry(x.clone()).or_insert_with(Rational::zero) += w * v;
        }
    }
    atoms.retain(|_, w| !w.is_zero());
    Ok(ProbMeasure { atoms })
}

/// Transport of atoms along `m`, merging collisions.
pub fn pushforward<T: Ord + Clone, U: Ord + Clone>(p: &ProbMeasure<T>, m: impl Fn(&T) -> U) -> ProbMeasure<U> {
    let mut atoms: BTreeMap<U, Rational> = BTreeMap::new();
    for (x, w) in &p.atoms {
        *atoms.entry(m(x)).or_insert_with(Rational::zero) += w;
    }
    ProbMeasure { atoms }
}

/// `∫ f dP`, exact.
pub fn integrate<T: Ord + Clone>(p: &ProbMeasure<T>, f: impl Fn(&T) -> ExtReal) -> ExtReal {
    finite_combine(p.atoms.iter().map(|(x, w)| (w, f(x))))
}

/// Multiplication: flattens a measure over measures,
/// `μ(Σ q_j δ_{P_j}) = Σ q_j P_j`.
pub fn monad_mu<T: Ord + Clone>(q: &ProbMeasure<ProbMeasure<T>>) -> ProbMeasure<T> {
    let (weights, inner) = q.as_partition();
    mixture(&weights, &inner).expect("partition built from the measure itself")
}

/// A countable mixture `Σ_i ω_i P_i` over a lazily generated partition.
#[derive(Clone)]
pub struct CountableMeasure<T: Ord> {
    weights: PartitionOfOne,
    components: Arc<dyn Fn(usize) -> ProbMeasure<T> + Send + Sync>,
}

impl<T: Ord + Clone + 'static> CountableMeasure<T> {
    pub fn new(weights: PartitionOfOne, components: impl Fn(usize) -> ProbMeasure<T> + Send + Sync + 'static) -> Self {
        CountableMeasure { weights, components: Arc::new(components) }
    }

    /// `Σ_i ω_i δ_{x_i}`.
    pub fn of_points(weights: PartitionOfOne, points: impl Fn(usize) -> T + Send + Sync + 'static) -> Self {
        Self::new(weights, move |i| dirac(points(i)))
    }

    pub fn weights(&self) -> &PartitionOfOne {
        &self.weights
    }

    pub fn component(&self, i: usize) -> ProbMeasure<T> {
        (self.components)(i)
    }

    pub fn integrate(
        &self,
        f: impl Fn(&T) -> ExtReal,
        certificate: &Certificate,
        budget: &Budget,
    ) -> Result<Combination, GiryError> {
        Ok(countable_combine(&self.weights, |i| integrate(&self.component(i), &f), certificate, budget)?)
    }

    /// Mass of `{x : pred(x)}`, enclosed to the budget's tolerance.
    pub fn mass_where(&self, pred: impl Fn(&T) -> bool, budget: &Budget) -> Result<Combination, GiryError> {
        let certificate = Certificate::Bounded(Rational::one());
        Ok(countable_combine(
            &self.weights,
            |i| ExtReal::Finite(self.component(i).mass_where(&pred)),
            &certificate,
            budget,
        )?)
    }
}

/// The barycenter `ε_A(P)`: the combination of the atoms under their
/// weights, checked against `m(ε_A(P)) = ∫ m dP` for every generating map.
pub fn barycenter<S: SuperConvexSpace>(space: &S, p: &ProbMeasure<S::Elem>) -> Result<S::Elem, GiryError> {
    let (weights, atoms) = p.as_partition();
    let point = space.combine(&weights, &atoms)?;
    for m in space.generating_maps() {
        let at_point = m.apply(&point);
        let integral = integrate(p, |x| m.apply(x));
        if at_point != integral {
            return Err(GiryError::EvaluationMismatch {
                map: m.name().to_string(),
                barycenter: space.label(&point),
                integral: integral.to_json_string(),
            });
        }
    }
    Ok(point)
}

/// Barycenter of a countable mixture in an interval space, as an exact value
/// or an enclosure.
pub fn barycenter_countable(
    space: &IntervalSpace,
    p: &CountableMeasure<ExtReal>,
    certificate: &Certificate,
    budget: &Budget,
) -> Result<Combination, GiryError> {
    let failure = std::sync::Mutex::new(None);
    let result = space.combine_lazy(
        p.weights(),
        |i| match barycenter(space, &p.component(i)) {
            Ok(x) => x,
            Err(e) => {
                failure.lock().expect("unpoisoned").get_or_insert(e);
                ExtReal::zero()
            }
        },
        certificate,
        budget,
    );
    match failure.into_inner().expect("unpoisoned") {
        Some(e) => Err(e),
        None => Ok(result?),
    }
}

/// `G(X)` for a finite measurable space, with mixtures as its structure.
///
/// Measures are stored on points; two measures are equal when they agree on
/// every measurable set.
#[derive(Clone, Debug, PartialEq)]
pub struct GirySpace {
    base: FiniteMeasurableSpace,
}

impl GirySpace {
    pub fn new(base: FiniteMeasurableSpace) -> Self {
        GirySpace { base }
    }

    pub fn discrete(size: usize) -> Self {
        Self::new(FiniteMeasurableSpace::discrete(size))
    }

    pub fn base(&self) -> &FiniteMeasurableSpace {
        &self.base
    }

    /// `ev_U : P ↦ P(U)`.
    pub fn ev(&self, u: Subset) -> AffineMap<ProbMeasure<usize>, ExtReal> {
        let name = format!("ev{{{}}}", self.base.labels_of(u).join(","));
        AffineMap::new(name, move |p: &ProbMeasure<usize>| ExtReal::Finite(p.mass(u)))
    }

    /// `P ↦ ∫ f dP` for `f` given on carrier indices.
    pub fn integral_map(&self, name: &str, f: Vec<ExtReal>) -> AffineMap<ProbMeasure<usize>, ExtReal> {
        AffineMap::new(format!("∫{name}"), move |p: &ProbMeasure<usize>| integrate(p, |&x| f[x].clone()))
    }

    fn representatives(&self) -> Vec<usize> {
        self.base.atoms().iter().map(|a| a.trailing_zeros() as usize).collect()
    }

    /// Uniformly random support with integer-composition weights.
    pub fn sample_measure(&self, rng: &mut ChaCha8Rng) -> ProbMeasure<usize> {
        let n = self.base.size();
        let k = rng.gen_range(1..=n);
        let points = sample(rng, n, k);
        let parts: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
        let total: i64 = parts.iter().sum();
        ProbMeasure::from_atoms(points.iter().zip(parts).map(|(x, p)| (x, rational(p, total)))).expect("normalized")
    }

    /// Flattening with a base check on every inner measure.
    pub fn mu(&self, q: &ProbMeasure<ProbMeasure<usize>>) -> Result<ProbMeasure<usize>, GiryError> {
        if q.atoms().any(|(p, _)| !self.contains(p)) {
            return Err(GiryError::BaseMismatch);
        }
        Ok(monad_mu(q))
    }
}

impl SuperConvexSpace for GirySpace {
    type Elem = ProbMeasure<usize>;

    fn name(&self) -> String {
        format!("G(X{})", self.base.size())
    }

    fn contains(&self, p: &ProbMeasure<usize>) -> bool {
        p.atoms().all(|(&x, _)| x < self.base.size())
    }

    fn elem_eq(&self, p: &ProbMeasure<usize>, q: &ProbMeasure<usize>) -> bool {
        self.base.atoms().iter().all(|&a| p.mass(a) == q.mass(a))
    }

    fn combine(&self, weights: &PartitionOfOne, a: &[ProbMeasure<usize>]) -> Result<ProbMeasure<usize>, ScvxError> {
        if supported_terms(weights, a)?.iter().any(|(_, p)| !self.contains(p)) {
            return Err(ScvxError::BaseMismatch);
        }
        mixture(weights, a).map_err(|e| match e {
            GiryError::Scvx(inner) => inner,
            other => ScvxError::CarrierViolation { space: self.name(), element: other.to_string() },
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ProbMeasure<usize> {
        self.sample_measure(rng)
    }

    /// `ev_U` for every σ-atom and the whole space, plus two integrals of
    /// measurable functions, one of them infinite on the last atom.
    fn generating_maps(&self) -> Vec<AffineMap<ProbMeasure<usize>, ExtReal>> {
        let atoms = self.base.atoms();
        let mut maps: Vec<_> = atoms.iter().map(|&a| self.ev(a)).collect();
        maps.push(self.ev(self.base.full()));
        let value_on = |f: &dyn Fn(usize) -> ExtReal| -> Vec<ExtReal> {
            (0..self.base.size())
                .map(|x| {
                    let k = atoms.iter().position(|a| a >> x & 1 == 1).expect("atoms cover the carrier");
                    f(k)
                })
                .collect()
        };
        let last = atoms.len() - 1;
        maps.push(self.integral_map("f", value_on(&|k| ExtReal::ratio(3 * k as i64 - 2, 2))));
        maps.push(self.integral_map("g", value_on(&|k| if k == last { ExtReal::Infinity } else { ExtReal::int(k as i64) })));
        maps
    }

    /// An affine map on `G(X)` is determined by its values at Diracs: the
    /// finite ones span a closed interval and any infinite one adds `∞`.
    fn image(&self, m: &AffineMap<ProbMeasure<usize>, ExtReal>) -> Option<ImageSet> {
        let values: Vec<ExtReal> = self.representatives().into_iter().map(|x| m.apply(&dirac(x))).collect();
        let finite: Vec<&Rational> = values.iter().filter_map(|v| v.as_finite()).collect();
        let mut pieces = Vec::new();
        if let (Some(lo), Some(hi)) = (finite.iter().min(), finite.iter().max()) {
            use crate::scvx::Bound;
            pieces.push(Piece::Interval { lower: Bound::Closed((*lo).clone()), upper: Bound::Closed((*hi).clone()) });
        }
        if values.iter().any(|v| v.is_infinite()) {
            pieces.push(Piece::Point(ExtReal::Infinity));
        }
        Some(ImageSet::new(pieces))
    }

    fn label(&self, p: &ProbMeasure<usize>) -> String {
        let parts: Vec<_> =
            p.atoms().map(|(&x, w)| format!("{}:{}", self.base.labels()[x], format_rational(w))).collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// A functional on maps `A → R∞`.
pub trait Functional<T> {
    fn evaluate(&self, m: &AffineMap<T, ExtReal>) -> ExtReal;

    fn describe(&self) -> String;
}

/// An R∞-generalized point backed by a point (`ev_a`) or by a measure
/// (`m ↦ ∫ m dP`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneralizedPoint<T: Ord> {
    Point(T),
    Measure(ProbMeasure<T>),
}

impl<T: Ord + Clone + fmt::Debug + 'static> GeneralizedPoint<T> {
    pub fn apply(&self, m: &AffineMap<T, ExtReal>) -> ExtReal {
        match self {
            GeneralizedPoint::Point(a) => m.apply(a),
            GeneralizedPoint::Measure(p) => integrate(p, |x| m.apply(x)),
        }
    }
}

impl<T: Ord + Clone + fmt::Debug + 'static> Functional<T> for GeneralizedPoint<T> {
    fn evaluate(&self, m: &AffineMap<T, ExtReal>) -> ExtReal {
        self.apply(m)
    }

    fn describe(&self) -> String {
        match self {
            GeneralizedPoint::Point(a) => format!("ev at {a:?}"),
            GeneralizedPoint::Measure(p) => format!("∫ · d{p:?}"),
        }
    }
}

/// A functional given by an arbitrary closure; used for non-examples.
pub struct FunctionalFn<T> {
    name: String,
    f: Arc<dyn Fn(&AffineMap<T, ExtReal>) -> ExtReal + Send + Sync>,
}

impl<T> FunctionalFn<T> {
    pub fn new(name: impl Into<String>, f: impl Fn(&AffineMap<T, ExtReal>) -> ExtReal + Send + Sync + 'static) -> Self {
        FunctionalFn { name: name.into(), f: Arc::new(f) }
    }
}

impl<T> Functional<T> for FunctionalFn<T> {
    fn evaluate(&self, m: &AffineMap<T, ExtReal>) -> ExtReal {
        (self.f)(m)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// `χ_U` as a function on carrier indices.
pub fn indicator(u: Subset) -> AffineMap<usize, ExtReal> {
    AffineMap::new(format!("χ{u:#b}"), move |&x: &usize| {
        if x < 64 && u >> x & 1 == 1 {
            ExtReal::one()
        } else {
            ExtReal::zero()
        }
    })
}

/// `φ(P)`: the functional `f ↦ ∫ f dP`, so that `φ(P)(χ_U) = P(U)`.
pub fn phi(p: &ProbMeasure<usize>) -> GeneralizedPoint<usize> {
    GeneralizedPoint::Measure(p.clone())
}

/// `φ⁻¹(J)`: the set function `U ↦ J(χ_U)`, validated as a probability
/// measure on the σ-algebra of `space`. On a finite algebra additivity is
/// checked by comparing every measurable set with the sum over the σ-atoms
/// it contains. Each atom's mass is placed on its least point.
pub fn phi_inverse(j: &(impl Functional<usize> + ?Sized), space: &FiniteMeasurableSpace) -> Result<ProbMeasure<usize>, GiryError> {
    let value = |u: Subset| -> Result<Rational, GiryError> {
        match j.evaluate(&indicator(u)) {
            ExtReal::Finite(v) if !v.is_negative() && v <= Rational::one() => Ok(v),
            other => Err(GiryError::NotAMeasure(format!(
                "J(χ{{{}}}) = {other} is outside [0, 1]",
                space.labels_of(u).join(",")
            ))),
        }
    };
    if !value(0)?.is_zero() {
        return Err(GiryError::NotAMeasure("J(χ_∅) ≠ 0".into()));
    }
    if !value(space.full())?.is_one() {
        return Err(GiryError::NotAMeasure("J(χ_X) ≠ 1".into()));
    }
    let atoms = space.atoms();
    let atom_mass: Vec<Rational> = atoms.iter().map(|&a| value(a)).collect::<Result<_, _>>()?;
    for &u in space.sigma() {
        let sum: Rational = atoms.iter().zip(&atom_mass).filter(|(a, _)| *a & u == **a).map(|(_, m)| m).sum();
        let direct = value(u)?;
        if direct != sum {
            return Err(GiryError::NotAMeasure(format!(
                "not additive on {{{}}}: {} vs sum over atoms {}",
                space.labels_of(u).join(","),
                format_rational(&direct),
                format_rational(&sum)
            )));
        }
    }
    ProbMeasure::from_atoms(atoms.iter().zip(atom_mass).map(|(a, m)| (a.trailing_zeros() as usize, m)))
}
