//! Super convex spaces, countably affine maps, and the axiom and morphism
//! checkers.
//!
//! A space combines a sequence `a_1, a_2, …` under a partition of one. Only
//! finitely supported partitions go through [`SuperConvexSpace::combine`];
//! lazily generated ones are handled by [`IntervalSpace::combine_lazy`], which
//! returns an enclosure rather than an element.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::numerics::{
    compose_partitions, countable_combine, finite_combine, integer, random_rational, rational, Budget, Certificate,
    Combination, Enclosure, ExtReal, NumericsError, PartitionOfOne, Rational,
};
use crate::report::{rng_for, LawCheck, LawReport, Seeds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScvxError {
    #[error("{element} is not in the carrier of {space}")]
    CarrierViolation { space: String, element: String },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("sequence has no term {0}")]
    MissingTerm(usize),
    #[error("measures live on different bases")]
    BaseMismatch,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A named map between carriers. Whether it is countably affine is a claim
/// checked by [`check_morphism`], not enforced by construction.
pub struct AffineMap<A, B> {
    name: String,
    f: Arc<dyn Fn(&A) -> B + Send + Sync>,
}

impl<A, B> Clone for AffineMap<A, B> {
    fn clone(&self) -> Self {
        AffineMap { name: self.name.clone(), f: Arc::clone(&self.f) }
    }
}

impl<A, B> fmt::Debug for AffineMap<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineMap({})", self.name)
    }
}

impl<A: 'static, B: 'static> AffineMap<A, B> {
    pub fn new(name: impl Into<String>, f: impl Fn(&A) -> B + Send + Sync + 'static) -> Self {
        AffineMap { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, x: &A) -> B {
        (self.f)(x)
    }

    pub fn then<C: 'static>(&self, next: &AffineMap<B, C>) -> AffineMap<A, C> {
        let (f, g) = (Arc::clone(&self.f), Arc::clone(&next.f));
        AffineMap::new(format!("{}∘{}", next.name, self.name), move |x| g(&f(x)))
    }
}

impl<A: 'static> AffineMap<A, ExtReal> {
    pub fn constant(value: ExtReal) -> Self {
        AffineMap::new(format!("const {value}"), move |_| value.clone())
    }
}

/// `x ↦ offset + slope·x` on R∞, sending infinity to infinity unless the
/// slope is zero. Countably affine exactly when `slope ≥ 0` or the domain
/// avoids infinity.
pub fn linear_map(offset: Rational, slope: Rational) -> AffineMap<ExtReal, ExtReal> {
    let name = format!("x ↦ {offset} + {slope}·x");
    AffineMap::new(name, move |x: &ExtReal| match x {
        ExtReal::Finite(v) => ExtReal::Finite(&offset + &slope * v),
        ExtReal::Infinity if slope.is_zero() => ExtReal::Finite(offset.clone()),
        ExtReal::Infinity => ExtReal::Infinity,
    })
}

/// The identity on any carrier.
pub fn identity<A: Clone + 'static>() -> AffineMap<A, A> {
    AffineMap::new("id", |x: &A| x.clone())
}

/// A set with a structural map combining sequences under partitions of one.
pub trait SuperConvexSpace: Send + Sync {
    type Elem: Clone + fmt::Debug + Ord + Send + Sync + 'static;

    fn name(&self) -> String;

    fn contains(&self, x: &Self::Elem) -> bool;

    fn elem_eq(&self, x: &Self::Elem, y: &Self::Elem) -> bool {
        x == y
    }

    /// `Σ_i ω_i a_i` for finitely supported `ω`, where `a[i - 1]` is `a_i`.
    fn combine(&self, weights: &PartitionOfOne, a: &[Self::Elem]) -> Result<Self::Elem, ScvxError>;

    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem;

    /// A finite family standing in for all countably affine maps into R∞.
    fn generating_maps(&self) -> Vec<AffineMap<Self::Elem, ExtReal>>;

    /// The full carrier, when finite.
    fn carrier(&self) -> Option<Vec<Self::Elem>> {
        None
    }

    /// The image of a countably affine map, when it can be computed.
    fn image(&self, m: &AffineMap<Self::Elem, ExtReal>) -> Option<ImageSet> {
        self.carrier().map(|points| ImageSet::from_points(points.iter().map(|x| m.apply(x))))
    }

    fn label(&self, x: &Self::Elem) -> String {
        format!("{x:?}")
    }
}

/// Finite support of `weights` with the terms of `a` it selects.
pub(crate) fn supported_terms<'a, T>(
    weights: &'a PartitionOfOne,
    a: &'a [T],
) -> Result<Vec<(&'a Rational, &'a T)>, ScvxError> {
    let support = weights
        .support()
        .ok_or(NumericsError::UnsupportedRepresentation("lazy partition needs combine_lazy"))?;
    support
        .iter()
        .map(|(i, w)| a.get(i - 1).map(|x| (w, x)).ok_or(ScvxError::MissingTerm(*i)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Unbounded,
    Open(Rational),
    Closed(Rational),
}

impl Bound {
    fn add(&self, other: &Bound) -> Bound {
        match (self, other) {
            (Bound::Unbounded, _) | (_, Bound::Unbounded) => Bound::Unbounded,
            (Bound::Closed(a), Bound::Closed(b)) => Bound::Closed(a + b),
            (Bound::Open(a) | Bound::Closed(a), Bound::Open(b) | Bound::Closed(b)) => Bound::Open(a + b),
        }
    }

    fn shift(&self, c: &Rational) -> Bound {
        match self {
            Bound::Unbounded => Bound::Unbounded,
            Bound::Open(a) => Bound::Open(a + c),
            Bound::Closed(a) => Bound::Closed(a + c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Piece {
    Point(ExtReal),
    /// A real interval; never contains infinity.
    Interval { lower: Bound, upper: Bound },
}

impl Piece {
    fn contains(&self, x: &ExtReal) -> bool {
        match (self, x) {
            (Piece::Point(p), _) => p == x,
            (Piece::Interval { .. }, ExtReal::Infinity) => false,
            (Piece::Interval { lower, upper }, ExtReal::Finite(v)) => {
                let above = match lower {
                    Bound::Unbounded => true,
                    Bound::Open(l) => v > l,
                    Bound::Closed(l) => v >= l,
                };
                let below = match upper {
                    Bound::Unbounded => true,
                    Bound::Open(u) => v < u,
                    Bound::Closed(u) => v <= u,
                };
                above && below
            }
        }
    }

    fn add(&self, other: &Piece) -> Piece {
        match (self, other) {
            (Piece::Point(ExtReal::Infinity), _) | (_, Piece::Point(ExtReal::Infinity)) => {
                Piece::Point(ExtReal::Infinity)
            }
            (Piece::Point(p), Piece::Point(q)) => Piece::Point(p.add(q)),
            (Piece::Point(ExtReal::Finite(c)), Piece::Interval { lower, upper })
            | (Piece::Interval { lower, upper }, Piece::Point(ExtReal::Finite(c))) => {
                Piece::Interval { lower: lower.shift(c), upper: upper.shift(c) }
            }
            (Piece::Interval { lower: l1, upper: u1 }, Piece::Interval { lower: l2, upper: u2 }) => {
                Piece::Interval { lower: l1.add(l2), upper: u1.add(u2) }
            }
        }
    }
}

/// A finite union of points and real intervals inside R∞.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageSet {
    pieces: Vec<Piece>,
}

impl ImageSet {
    pub fn new(pieces: Vec<Piece>) -> Self {
        ImageSet { pieces }
    }

    pub fn from_points(points: impl IntoIterator<Item = ExtReal>) -> Self {
        let distinct: BTreeSet<ExtReal> = points.into_iter().collect();
        ImageSet { pieces: distinct.into_iter().map(Piece::Point).collect() }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn contains(&self, x: &ExtReal) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    /// Minkowski sum.
    pub fn sum(&self, other: &ImageSet) -> ImageSet {
        let pieces = self.pieces.iter().flat_map(|p| other.pieces.iter().map(move |q| p.add(q))).collect();
        ImageSet { pieces }
    }

    pub fn shift(&self, c: &Rational) -> ImageSet {
        self.sum(&ImageSet::from_points([ExtReal::Finite(c.clone())]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntervalKind {
    ClosedUnit,
    OpenUnit,
    ExtRealLine,
}

/// `[0, 1]`, `(0, 1)` or R∞ with combination inherited from R∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalSpace {
    kind: IntervalKind,
}

pub fn make_interval_space(kind: IntervalKind) -> IntervalSpace {
    IntervalSpace { kind }
}

impl IntervalSpace {
    pub fn kind(&self) -> IntervalKind {
        self.kind
    }

    /// Countable combination for lazily generated partitions. The result is
    /// exact (infinity, or a vanishing tail) or an enclosure of width at most
    /// `2·B·tail(N)`; an enclosure disjoint from the carrier is reported as a
    /// carrier violation.
    pub fn combine_lazy(
        &self,
        weights: &PartitionOfOne,
        u: impl Fn(usize) -> ExtReal,
        certificate: &Certificate,
        budget: &Budget,
    ) -> Result<Combination, ScvxError> {
        let result = countable_combine(weights, u, certificate, budget)?;
        let plausible = match &result {
            Combination::Exact(v) => self.contains(v),
            Combination::Enclosed { enclosure, .. } => self.meets(enclosure),
        };
        if !plausible {
            return Err(ScvxError::CarrierViolation { space: self.name(), element: format!("{result:?}") });
        }
        Ok(result)
    }

    /// Whether the enclosure lies inside the carrier.
    pub fn certifies(&self, enclosure: &Enclosure) -> bool {
        let (lo, hi) = (enclosure.lower(), enclosure.upper());
        match self.kind {
            IntervalKind::ClosedUnit => !lo.is_negative() && hi <= &ExtReal::one(),
            IntervalKind::OpenUnit => lo.is_positive() && hi < &ExtReal::one(),
            IntervalKind::ExtRealLine => true,
        }
    }

    fn meets(&self, enclosure: &Enclosure) -> bool {
        let (lo, hi) = (enclosure.lower(), enclosure.upper());
        match self.kind {
            IntervalKind::ClosedUnit => lo <= &Rational::one() && hi >= &ExtReal::zero(),
            IntervalKind::OpenUnit => lo < &Rational::one() && hi > &ExtReal::zero(),
            IntervalKind::ExtRealLine => true,
        }
    }

    /// Two interior points used to recover the affine part of a map.
    fn probes(&self) -> (Rational, Rational) {
        match self.kind {
            IntervalKind::ExtRealLine => (integer(0), integer(1)),
            _ => (rational(1, 3), rational(2, 3)),
        }
    }
}

impl SuperConvexSpace for IntervalSpace {
    type Elem = ExtReal;

    fn name(&self) -> String {
        match self.kind {
            IntervalKind::ClosedUnit => "closed_unit",
            IntervalKind::OpenUnit => "open_unit",
            IntervalKind::ExtRealLine => "ext_real",
        }
        .to_string()
    }

    fn contains(&self, x: &ExtReal) -> bool {
        match (self.kind, x) {
            (IntervalKind::ExtRealLine, _) => true,
            (_, ExtReal::Infinity) => false,
            (IntervalKind::ClosedUnit, ExtReal::Finite(v)) => !v.is_negative() && v <= &Rational::one(),
            (IntervalKind::OpenUnit, ExtReal::Finite(v)) => v.is_positive() && v < &Rational::one(),
        }
    }

    fn combine(&self, weights: &PartitionOfOne, a: &[ExtReal]) -> Result<ExtReal, ScvxError> {
        let terms = supported_terms(weights, a)?;
        let result = finite_combine(terms.into_iter().map(|(w, x)| (w, x.clone())));
        if !self.contains(&result) {
            return Err(ScvxError::CarrierViolation { space: self.name(), element: result.to_string() });
        }
        Ok(result)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ExtReal {
        match self.kind {
            IntervalKind::ClosedUnit => match rng.gen_range(0..10) {
                0 => ExtReal::zero(),
                1 => ExtReal::one(),
                _ => ExtReal::Finite(random_rational(rng, 0, 1, 12)),
            },
            IntervalKind::OpenUnit => {
                let d = rng.gen_range(2..=12);
                ExtReal::ratio(rng.gen_range(1..d), d)
            }
            IntervalKind::ExtRealLine => match rng.gen_range(0..8) {
                0 => ExtReal::Infinity,
                _ => ExtReal::Finite(random_rational(rng, -20, 20, 8)),
            },
        }
    }

    fn generating_maps(&self) -> Vec<AffineMap<ExtReal, ExtReal>> {
        let mut maps = vec![
            identity(),
            linear_map(integer(2), integer(3)),
            AffineMap::constant(ExtReal::int(5)),
            AffineMap::constant(ExtReal::Infinity),
        ];
        match self.kind {
            IntervalKind::ClosedUnit | IntervalKind::OpenUnit => {
                maps.push(linear_map(integer(1), integer(-1)));
                maps.push(linear_map(rational(-1, 2), rational(7, 4)));
            }
            IntervalKind::ExtRealLine => {
                maps.push(linear_map(integer(-4), rational(1, 3)));
            }
        }
        match self.kind {
            // ∞ on the half-open face [0, 1), finite at the closed end.
            IntervalKind::ClosedUnit => maps.push(AffineMap::new("∞ below 1", |x: &ExtReal| {
                if x == &ExtReal::one() {
                    ExtReal::zero()
                } else {
                    ExtReal::Infinity
                }
            })),
            IntervalKind::ExtRealLine => maps.push(AffineMap::new("indicator of ∞ (0 / ∞)", |x: &ExtReal| {
                if x.is_infinite() {
                    ExtReal::Infinity
                } else {
                    ExtReal::zero()
                }
            })),
            IntervalKind::OpenUnit => {}
        }
        maps
    }

    /// Interior behaviour is affine (or identically ∞) and is recovered from
    /// two probes; endpoints in the carrier are added as points.
    fn image(&self, m: &AffineMap<ExtReal, ExtReal>) -> Option<ImageSet> {
        let (a, b) = self.probes();
        let (ma, mb) = (m.apply(&ExtReal::Finite(a.clone())), m.apply(&ExtReal::Finite(b.clone())));
        let interior = match (&ma, &mb) {
            (ExtReal::Infinity, ExtReal::Infinity) => Piece::Point(ExtReal::Infinity),
            (ExtReal::Finite(va), ExtReal::Finite(vb)) => {
                let slope = (vb - va) / (&b - &a);
                if slope.is_zero() {
                    Piece::Point(ma.clone())
                } else if self.kind == IntervalKind::ExtRealLine {
                    Piece::Interval { lower: Bound::Unbounded, upper: Bound::Unbounded }
                } else {
                    let at0 = va - &slope * &a;
                    let at1 = &at0 + &slope;
                    let (lo, hi) = if at0 < at1 { (at0, at1) } else { (at1, at0) };
                    Piece::Interval { lower: Bound::Open(lo), upper: Bound::Open(hi) }
                }
            }
            _ => return None,
        };
        let mut pieces = vec![interior];
        match self.kind {
            IntervalKind::ClosedUnit => {
                pieces.push(Piece::Point(m.apply(&ExtReal::zero())));
                pieces.push(Piece::Point(m.apply(&ExtReal::one())));
            }
            IntervalKind::ExtRealLine => pieces.push(Piece::Point(m.apply(&ExtReal::Infinity))),
            IntervalKind::OpenUnit => {}
        }
        Some(ImageSet::new(pieces))
    }

    fn label(&self, x: &ExtReal) -> String {
        x.to_json_string()
    }
}

/// Cartesian product with componentwise combination.
#[derive(Clone, Debug)]
pub struct ProductSpace<S> {
    factors: Vec<S>,
}

pub fn make_product_space<S: SuperConvexSpace>(factors: Vec<S>) -> Result<ProductSpace<S>, ScvxError> {
    if factors.is_empty() {
        return Err(ScvxError::ArityMismatch { expected: 1, got: 0 });
    }
    Ok(ProductSpace { factors })
}

impl<S: SuperConvexSpace + Clone + 'static> ProductSpace<S> {
    pub fn factors(&self) -> &[S] {
        &self.factors
    }

    pub fn projection(&self, k: usize) -> AffineMap<Vec<S::Elem>, S::Elem> {
        AffineMap::new(format!("π{k}"), move |x: &Vec<S::Elem>| x[k].clone())
    }
}

impl<S: SuperConvexSpace + Clone + 'static> SuperConvexSpace for ProductSpace<S> {
    type Elem = Vec<S::Elem>;

    fn name(&self) -> String {
        let names: Vec<_> = self.factors.iter().map(|f| f.name()).collect();
        names.join("×")
    }

    fn contains(&self, x: &Self::Elem) -> bool {
        x.len() == self.factors.len() && self.factors.iter().zip(x).all(|(f, xi)| f.contains(xi))
    }

    fn elem_eq(&self, x: &Self::Elem, y: &Self::Elem) -> bool {
        x.len() == y.len() && self.factors.iter().zip(x.iter().zip(y)).all(|(f, (a, b))| f.elem_eq(a, b))
    }

    fn combine(&self, weights: &PartitionOfOne, a: &[Self::Elem]) -> Result<Self::Elem, ScvxError> {
        let arity = self.factors.len();
        if let Some(bad) = a.iter().find(|t| t.len() != arity) {
            return Err(ScvxError::ArityMismatch { expected: arity, got: bad.len() });
        }
        self.factors
            .iter()
            .enumerate()
            .map(|(k, factor)| {
                let column: Vec<_> = a.iter().map(|t| t[k].clone()).collect();
                factor.combine(weights, &column)
            })
            .collect()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem {
        self.factors.iter().map(|f| f.sample(rng)).collect()
    }

    fn generating_maps(&self) -> Vec<AffineMap<Self::Elem, ExtReal>> {
        let mut maps = Vec::new();
        for (k, factor) in self.factors.iter().enumerate() {
            let proj = self.projection(k);
            maps.extend(factor.generating_maps().iter().map(|g| proj.then(g)));
        }
        let firsts: Vec<_> = self.factors.iter().map(|f| f.generating_maps()[1].clone()).collect();
        maps.push(AffineMap::new("Σ_k g_k(x_k)", move |x: &Self::Elem| {
            firsts.iter().zip(x).fold(ExtReal::zero(), |acc, (g, xi)| acc.add(&g.apply(xi)))
        }));
        maps
    }

    fn carrier(&self) -> Option<Vec<Self::Elem>> {
        let mut points = vec![Vec::new()];
        for factor in &self.factors {
            let column = factor.carrier()?;
            points = points
                .into_iter()
                .flat_map(|p| {
                    column.iter().map(move |c| {
                        let mut q = p.clone();
                        q.push(c.clone());
                        q
                    })
                })
                .collect();
        }
        Some(points)
    }

    /// An affine map on a product splits as `m(x) = Σ_k m(x₀[k ↦ x_k]) − (K−1)·m(x₀)`
    /// around any base point where `m` is finite; the image is the matching
    /// Minkowski sum of factor images.
    fn image(&self, m: &AffineMap<Self::Elem, ExtReal>) -> Option<ImageSet> {
        let mut rng = rng_for(0x1417);
        let (base, value) = (0..32).find_map(|_| {
            let x0 = self.sample(&mut rng);
            match m.apply(&x0) {
                ExtReal::Finite(c) => Some((x0, c)),
                ExtReal::Infinity => None,
            }
        })?;
        let mut total: Option<ImageSet> = None;
        for (k, factor) in self.factors.iter().enumerate() {
            let (m, base) = (m.clone(), base.clone());
            let slice = AffineMap::new(format!("slice {k}"), move |xk: &S::Elem| {
                let mut x = base.clone();
                x[k] = xk.clone();
                m.apply(&x)
            });
            let img = factor.image(&slice)?;
            total = Some(match total {
                None => img,
                Some(acc) => acc.sum(&img),
            });
        }
        let correction = -(value * integer(self.factors.len() as i64 - 1));
        Some(total?.shift(&correction))
    }

    fn label(&self, x: &Self::Elem) -> String {
        let parts: Vec<_> = self.factors.iter().zip(x).map(|(f, xi)| f.label(xi)).collect();
        format!("({})", parts.join(", "))
    }
}

/// The chain `0 < 1 < … < size−1` where a combination is the largest
/// positively weighted term. A finite super convex space whose maps into R∞
/// are the threshold maps (`c` below `k`, `∞` from `k` on).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainSemilattice {
    size: usize,
}

impl ChainSemilattice {
    pub fn new(size: usize) -> Self {
        assert!(size >= 1, "chain needs at least one point");
        ChainSemilattice { size }
    }

    pub fn threshold_map(k: usize, below: ExtReal) -> AffineMap<usize, ExtReal> {
        AffineMap::new(format!("threshold {k}"), move |x: &usize| if *x >= k { ExtReal::Infinity } else { below.clone() })
    }
}

impl SuperConvexSpace for ChainSemilattice {
    type Elem = usize;

    fn name(&self) -> String {
        format!("chain{}", self.size)
    }

    fn contains(&self, x: &usize) -> bool {
        *x < self.size
    }

    fn combine(&self, weights: &PartitionOfOne, a: &[usize]) -> Result<usize, ScvxError> {
        let terms = supported_terms(weights, a)?;
        let top = terms.iter().map(|(_, x)| **x).max().expect("partitions have nonempty support");
        if !self.contains(&top) {
            return Err(ScvxError::CarrierViolation { space: self.name(), element: top.to_string() });
        }
        Ok(top)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(0..self.size)
    }

    fn generating_maps(&self) -> Vec<AffineMap<usize, ExtReal>> {
        let mut maps = vec![AffineMap::constant(ExtReal::int(3))];
        maps.extend((1..self.size).map(|k| Self::threshold_map(k, ExtReal::int(k as i64))));
        maps
    }

    fn carrier(&self) -> Option<Vec<usize>> {
        Some((0..self.size).collect())
    }

    fn label(&self, x: &usize) -> String {
        format!("s{x}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutantKind {
    /// Ignores the weights and returns `a_1`.
    FirstTerm,
    /// Reads weight `ω_i` against `a_{n+1−i}`, `n` the largest support index.
    ReversedWeights,
}

/// A deliberately broken structure map around a lawful space.
#[derive(Clone, Debug)]
pub struct Mutant<S> {
    pub inner: S,
    pub kind: MutantKind,
}

impl<S: SuperConvexSpace> SuperConvexSpace for Mutant<S> {
    type Elem = S::Elem;

    fn name(&self) -> String {
        let tag = match self.kind {
            MutantKind::FirstTerm => "first-term",
            MutantKind::ReversedWeights => "reversed-weights",
        };
        format!("mutant-{tag}({})", self.inner.name())
    }

    fn contains(&self, x: &Self::Elem) -> bool {
        self.inner.contains(x)
    }

    fn elem_eq(&self, x: &Self::Elem, y: &Self::Elem) -> bool {
        self.inner.elem_eq(x, y)
    }

    fn combine(&self, weights: &PartitionOfOne, a: &[Self::Elem]) -> Result<Self::Elem, ScvxError> {
        match self.kind {
            MutantKind::FirstTerm => a.first().cloned().ok_or(ScvxError::MissingTerm(1)),
            MutantKind::ReversedWeights => {
                let n = weights.max_index().ok_or(NumericsError::UnsupportedRepresentation("lazy"))?;
                let flipped = PartitionOfOne::finite(
                    weights.support().unwrap_or_default().iter().map(|(i, w)| (n + 1 - i, w.clone())),
                )?;
                self.inner.combine(&flipped, a)
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem {
        self.inner.sample(rng)
    }

    fn generating_maps(&self) -> Vec<AffineMap<Self::Elem, ExtReal>> {
        self.inner.generating_maps()
    }

    fn carrier(&self) -> Option<Vec<Self::Elem>> {
        self.inner.carrier()
    }

    fn image(&self, m: &AffineMap<Self::Elem, ExtReal>) -> Option<ImageSet> {
        self.inner.image(m)
    }

    fn label(&self, x: &Self::Elem) -> String {
        self.inner.label(x)
    }
}

/// A finite generating family standing in for `R∞^A`, with pointwise
/// structure and orders.
pub struct FunctionSpace<'a, S: SuperConvexSpace> {
    base: &'a S,
    maps: Vec<AffineMap<S::Elem, ExtReal>>,
}

impl<'a, S: SuperConvexSpace> FunctionSpace<'a, S> {
    pub fn new(base: &'a S) -> Self {
        FunctionSpace { maps: base.generating_maps(), base }
    }

    pub fn with_maps(base: &'a S, maps: Vec<AffineMap<S::Elem, ExtReal>>) -> Self {
        FunctionSpace { base, maps }
    }

    pub fn base(&self) -> &S {
        self.base
    }

    pub fn maps(&self) -> &[AffineMap<S::Elem, ExtReal>] {
        &self.maps
    }

    /// Pointwise `Σ_i ω_i f_i` for finitely supported `ω`.
    pub fn combine(
        &self,
        weights: &PartitionOfOne,
        fs: &[AffineMap<S::Elem, ExtReal>],
    ) -> Result<AffineMap<S::Elem, ExtReal>, ScvxError> {
        let terms: Vec<(Rational, AffineMap<S::Elem, ExtReal>)> =
            supported_terms(weights, fs)?.into_iter().map(|(w, f)| (w.clone(), f.clone())).collect();
        let names: Vec<_> = terms.iter().map(|(w, f)| format!("{w}·{}", f.name())).collect();
        Ok(AffineMap::new(names.join(" + "), move |x: &S::Elem| {
            finite_combine(terms.iter().map(|(w, f)| (w, f.apply(x))))
        }))
    }

    /// `f ≤ g` at every point of `points`.
    pub fn le(&self, f: &AffineMap<S::Elem, ExtReal>, g: &AffineMap<S::Elem, ExtReal>, points: &[S::Elem]) -> bool {
        points.iter().all(|x| f.apply(x) <= g.apply(x))
    }

    pub fn lt(&self, f: &AffineMap<S::Elem, ExtReal>, g: &AffineMap<S::Elem, ExtReal>, points: &[S::Elem]) -> bool {
        points.iter().all(|x| f.apply(x) < g.apply(x))
    }
}

/// Finite partition with a random support of at most four indices in
/// `1..=depth`.
pub fn random_sparse_partition(rng: &mut ChaCha8Rng, depth: usize) -> PartitionOfOne {
    let size = rng.gen_range(1..=depth.min(4));
    let indices = sample(rng, depth, size);
    let parts: Vec<i64> = (0..size).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = parts.iter().sum();
    PartitionOfOne::finite(indices.iter().zip(parts).map(|(i, p)| (i + 1, rational(p, total))))
        .expect("normalized by construction")
}

fn labels<S: SuperConvexSpace>(space: &S, xs: &[S::Elem]) -> Vec<String> {
    xs.iter().map(|x| space.label(x)).collect()
}

fn outcome_label<S: SuperConvexSpace>(space: &S, r: &Result<S::Elem, ScvxError>) -> String {
    match r {
        Ok(x) => space.label(x),
        Err(e) => format!("error: {e}"),
    }
}

/// Projection: `Σ_i δ^j_i a_i = a_j` for every `j ≤ depth`.
pub fn check_axiom1<S: SuperConvexSpace>(space: &S, seeds: Seeds, depth: usize) -> LawReport {
    let mut check = LawCheck::new("axiom1", space.name(), seeds);
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let a: Vec<_> = (0..depth).map(|_| space.sample(&mut rng)).collect();
        let failure = (1..=depth).find_map(|j| {
            let got = space.combine(&PartitionOfOne::dirac(j).expect("j ≥ 1"), &a);
            match &got {
                Ok(x) if space.elem_eq(x, &a[j - 1]) => None,
                _ => Some(json!({
                    "seed": seed,
                    "j": j,
                    "sequence": labels(space, &a),
                    "got": outcome_label(space, &got),
                    "expected": space.label(&a[j - 1]),
                })),
            }
        });
        match failure {
            None => check.pass_case(),
            Some(w) => check.fail_case(w),
        }
    }
    check.finish()
}

/// Associativity: `Σ_i α_i (Σ_j β^i_j a_j) = Σ_j (Σ_i α_i β^i_j) a_j`.
pub fn check_axiom2<S: SuperConvexSpace>(space: &S, seeds: Seeds, depth: usize) -> LawReport {
    let mut check = LawCheck::new("axiom2", space.name(), seeds);
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let a: Vec<_> = (0..depth).map(|_| space.sample(&mut rng)).collect();
        let alpha = random_sparse_partition(&mut rng, depth);
        let betas: Vec<_> = (0..depth).map(|_| random_sparse_partition(&mut rng, depth)).collect();
        let inner: Result<Vec<_>, _> = betas.iter().map(|b| space.combine(b, &a)).collect();
        let lhs = inner.and_then(|b| space.combine(&alpha, &b));
        let rhs = compose_partitions(&alpha, |i| betas[i - 1].clone())
            .map_err(ScvxError::from)
            .and_then(|g| space.combine(&g, &a));
        let ok = matches!((&lhs, &rhs), (Ok(l), Ok(r)) if space.elem_eq(l, r));
        check.record(ok, || {
            json!({
                "seed": seed,
                "alpha": format!("{alpha:?}"),
                "betas": betas.iter().map(|b| format!("{b:?}")).collect::<Vec<_>>(),
                "sequence": labels(space, &a),
                "nested": outcome_label(space, &lhs),
                "composed": outcome_label(space, &rhs),
            })
        });
    }
    check.finish()
}

/// `m(Σ ω_i a_i) = Σ ω_i m(a_i)` on explicit cases.
pub fn check_morphism_cases<A: SuperConvexSpace, B: SuperConvexSpace>(
    source: &A,
    target: &B,
    m: &AffineMap<A::Elem, B::Elem>,
    seeds: Seeds,
    cases: impl IntoIterator<Item = (PartitionOfOne, Vec<A::Elem>)>,
) -> LawReport {
    let mut check = LawCheck::new("morphism", format!("{}: {} → {}", m.name(), source.name(), target.name()), seeds);
    for (omega, a) in cases {
        let lhs = source.combine(&omega, &a).map(|x| m.apply(&x));
        let images: Vec<_> = a.iter().map(|x| m.apply(x)).collect();
        let rhs = target.combine(&omega, &images);
        let ok = matches!((&lhs, &rhs), (Ok(l), Ok(r)) if target.elem_eq(l, r));
        check.record(ok, || {
            json!({
                "omega": format!("{omega:?}"),
                "sequence": labels(source, &a),
                "map_of_combination": outcome_label(target, &lhs),
                "combination_of_images": outcome_label(target, &rhs),
            })
        });
    }
    check.finish()
}

/// Morphism law on seeded random cases of length `depth`.
pub fn check_morphism<A: SuperConvexSpace, B: SuperConvexSpace>(
    source: &A,
    target: &B,
    m: &AffineMap<A::Elem, B::Elem>,
    seeds: Seeds,
    depth: usize,
) -> LawReport {
    let cases = seeds.iter().map(|seed| {
        let mut rng = rng_for(seed);
        let a: Vec<_> = (0..depth).map(|_| source.sample(&mut rng)).collect();
        (random_sparse_partition(&mut rng, depth), a)
    });
    check_morphism_cases(source, target, m, seeds, cases.collect::<Vec<_>>())
}

/// Pointwise combination of generating maps agrees with combining values and
/// stays countably affine.
pub fn check_pointwise_combine<S: SuperConvexSpace>(space: &S, seeds: Seeds, depth: usize) -> LawReport {
    let fs = FunctionSpace::new(space);
    let mut check = LawCheck::new("pointwise-combine", space.name(), seeds);
    let r_inf = make_interval_space(IntervalKind::ExtRealLine);
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let maps: Vec<_> = (0..depth).map(|_| fs.maps()[rng.gen_range(0..fs.maps().len())].clone()).collect();
        let omega = random_sparse_partition(&mut rng, depth);
        let combined = match fs.combine(&omega, &maps) {
            Ok(c) => c,
            Err(e) => {
                check.fail_case(json!({"seed": seed, "error": e.to_string()}));
                continue;
            }
        };
        let x = space.sample(&mut rng);
        let values: Vec<_> = maps.iter().map(|f| f.apply(&x)).collect();
        let expected = r_inf.combine(&omega, &values);
        let pointwise_ok = matches!(&expected, Ok(v) if *v == combined.apply(&x));
        let law = check_morphism(space, &r_inf, &combined, Seeds::new(seed, 1), depth);
        check.record(pointwise_ok && law.pass, || {
            json!({
                "seed": seed,
                "map": combined.name(),
                "point": space.label(&x),
                "pointwise": pointwise_ok,
                "affine_witness": law.counterexample,
            })
        });
    }
    check.finish()
}

/// Geometric-weight regression on an interval space: a constant sequence
/// combines to an enclosure of that constant inside the carrier.
pub fn check_lazy_regression(space: &IntervalSpace, seeds: Seeds, depth: usize) -> LawReport {
    let mut check = LawCheck::new("axiom-lazy", space.name(), seeds);
    let geometric = PartitionOfOne::geometric();
    for seed in seeds.iter() {
        let mut rng = rng_for(seed);
        let c = loop {
            let c = space.sample(&mut rng);
            if c.is_finite() {
                break c;
            }
        };
        let bound = c.as_finite().map(|v| v.abs()).unwrap_or_else(Rational::zero).max(Rational::one());
        let budget = Budget::fixed_depth(depth);
        let result = space.combine_lazy(&geometric, |_| c.clone(), &Certificate::Bounded(bound.clone()), &budget);
        let ok = match &result {
            Ok(Combination::Enclosed { enclosure, .. }) => {
                enclosure.contains(c.as_finite().expect("finite"))
                    && enclosure.width() <= ExtReal::Finite(integer(2) * &bound * geometric.tail_mass(depth))
            }
            Ok(Combination::Exact(v)) => v == &c,
            Err(_) => false,
        };
        check.record(ok, || json!({"seed": seed, "constant": c.to_json_string(), "result": format!("{result:?}")}));
    }
    check.note(format!("geometric weights, enclosure width ≤ 2·B·2^-{depth}"));
    check.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> IntervalSpace {
        make_interval_space(IntervalKind::ClosedUnit)
    }

    fn half() -> PartitionOfOne {
        PartitionOfOne::from_weights([rational(1, 2), rational(1, 2)]).unwrap()
    }

    #[test]
    fn closed_unit_midpoint() {
        let got = unit().combine(&half(), &[ExtReal::zero(), ExtReal::one()]).unwrap();
        assert_eq!(got, ExtReal::ratio(1, 2));
    }

    #[test]
    fn ext_real_absorbs_infinity() {
        let space = make_interval_space(IntervalKind::ExtRealLine);
        let w = PartitionOfOne::from_weights([rational(1, 4), rational(3, 4)]).unwrap();
        assert_eq!(space.combine(&w, &[ExtReal::int(8), ExtReal::Infinity]).unwrap(), ExtReal::Infinity);
    }

    #[test]
    fn open_unit_rejects_endpoints() {
        let space = make_interval_space(IntervalKind::OpenUnit);
        assert!(!space.contains(&ExtReal::zero()));
        assert!(!space.contains(&ExtReal::one()));
        let err = space.combine(&PartitionOfOne::dirac(1).unwrap(), &[ExtReal::one()]).unwrap_err();
        assert!(matches!(err, ScvxError::CarrierViolation { .. }));
    }

    #[test]
    fn missing_terms_are_reported() {
        let err = unit().combine(&PartitionOfOne::dirac(3).unwrap(), &[ExtReal::zero()]).unwrap_err();
        assert_eq!(err, ScvxError::MissingTerm(3));
    }

    #[test]
    fn open_unit_lazy_combination() {
        let space = make_interval_space(IntervalKind::OpenUnit);
        let result = space
            .combine_lazy(
                &PartitionOfOne::geometric(),
                |i| ExtReal::ratio(1, i as i64 + 1),
                &Certificate::Bounded(integer(1)),
                &Budget::fixed_depth(50),
            )
            .unwrap();
        let enc = result.enclosure().unwrap();
        assert!(enc.contains_f64(2.0 * std::f64::consts::LN_2 - 1.0, 0.0));
        assert!(space.certifies(enc));
    }

    #[test]
    fn product_space_examples() {
        let p = make_product_space(vec![unit(), unit()]).unwrap();
        let got = p
            .combine(&half(), &[vec![ExtReal::zero(), ExtReal::one()], vec![ExtReal::one(), ExtReal::zero()]])
            .unwrap();
        assert_eq!(got, vec![ExtReal::ratio(1, 2), ExtReal::ratio(1, 2)]);
        let err = p.combine(&half(), &[vec![ExtReal::zero()], vec![ExtReal::one()]]).unwrap_err();
        assert_eq!(err, ScvxError::ArityMismatch { expected: 2, got: 1 });
        assert!(make_product_space::<IntervalSpace>(vec![]).is_err());

        let single = make_product_space(vec![unit()]).unwrap();
        let x = single.combine(&half(), &[vec![ExtReal::ratio(1, 3)], vec![ExtReal::one()]]).unwrap();
        assert_eq!(x, vec![unit().combine(&half(), &[ExtReal::ratio(1, 3), ExtReal::one()]).unwrap()]);

        for k in 0..2 {
            assert!(check_morphism(&p, &unit(), &p.projection(k), Seeds::new(1, 50), 8).pass);
        }
    }

    #[test]
    fn shipped_instances_satisfy_axioms() {
        let seeds = Seeds::new(3, 40);
        for kind in [IntervalKind::ClosedUnit, IntervalKind::OpenUnit, IntervalKind::ExtRealLine] {
            let s = make_interval_space(kind);
            assert!(check_axiom1(&s, seeds, 8).pass);
            assert!(check_axiom2(&s, seeds, 8).pass);
        }
        let p = make_product_space(vec![unit(), make_interval_space(IntervalKind::ExtRealLine)]).unwrap();
        assert!(check_axiom1(&p, seeds, 8).pass);
        assert!(check_axiom2(&p, seeds, 8).pass);
        let c = ChainSemilattice::new(5);
        assert!(check_axiom1(&c, seeds, 8).pass);
        assert!(check_axiom2(&c, seeds, 8).pass);
    }

    #[test]
    fn infinite_terms_pass_axiom1() {
        let space = make_interval_space(IntervalKind::ExtRealLine);
        let a = vec![ExtReal::int(1), ExtReal::Infinity, ExtReal::Infinity];
        for j in 1..=3 {
            assert_eq!(space.combine(&PartitionOfOne::dirac(j).unwrap(), &a).unwrap(), a[j - 1]);
        }
    }

    #[test]
    fn first_term_mutant_fails_axiom1_at_j2() {
        let mutant = Mutant { inner: unit(), kind: MutantKind::FirstTerm };
        let report = check_axiom1(&mutant, Seeds::new(0, 20), 8);
        assert!(!report.pass);
        let witness = report.counterexample.unwrap();
        // Sequences with a_1 = a_2 would hide the failure until a later j.
        let sequence = witness["sequence"].as_array().unwrap();
        let first_distinct = (2..=8).find(|&j| sequence[j - 1] != sequence[0]).unwrap();
        assert_eq!(witness["j"], first_distinct);
    }

    #[test]
    fn first_term_mutant_witness_is_j2_on_distinct_terms() {
        let mutant = Mutant { inner: unit(), kind: MutantKind::FirstTerm };
        let a = [ExtReal::zero(), ExtReal::ratio(1, 2), ExtReal::one()];
        let failing: Vec<_> = (1..=3)
            .filter(|&j| mutant.combine(&PartitionOfOne::dirac(j).unwrap(), &a).unwrap() != a[j - 1])
            .collect();
        assert_eq!(failing.first(), Some(&2));
    }

    #[test]
    fn reversed_weights_mutant_fails_axiom2() {
        let mutant = Mutant { inner: unit(), kind: MutantKind::ReversedWeights };
        assert!(!check_axiom2(&mutant, Seeds::new(0, 50), 8).pass);
    }

    #[test]
    fn morphism_examples() {
        assert!(check_morphism(&unit(), &unit(), &identity(), Seeds::new(0, 50), 8).pass);
        let affine = linear_map(rational(1, 3), rational(1, 2));
        assert!(check_morphism(&unit(), &unit(), &affine, Seeds::new(0, 50), 8).pass);

        let square = AffineMap::new("x²", |x: &ExtReal| match x {
            ExtReal::Finite(v) => ExtReal::Finite(v * v),
            ExtReal::Infinity => ExtReal::Infinity,
        });
        assert!(!check_morphism(&unit(), &unit(), &square, Seeds::new(0, 50), 8).pass);
        let report = check_morphism_cases(
            &unit(),
            &unit(),
            &square,
            Seeds::new(0, 1),
            [(half(), vec![ExtReal::zero(), ExtReal::one()])],
        );
        let w = report.counterexample.unwrap();
        assert_eq!(w["map_of_combination"], "1/4");
        assert_eq!(w["combination_of_images"], "1/2");
    }

    #[test]
    fn generating_maps_are_affine() {
        let seeds = Seeds::new(11, 40);
        let r_inf = make_interval_space(IntervalKind::ExtRealLine);
        for kind in [IntervalKind::ClosedUnit, IntervalKind::OpenUnit, IntervalKind::ExtRealLine] {
            let s = make_interval_space(kind);
            for m in s.generating_maps() {
                assert!(check_morphism(&s, &r_inf, &m, seeds, 8).pass, "{kind:?} {}", m.name());
            }
        }
        let c = ChainSemilattice::new(4);
        for m in c.generating_maps() {
            assert!(check_morphism(&c, &r_inf, &m, seeds, 8).pass, "{}", m.name());
        }
        let p = make_product_space(vec![unit(), make_interval_space(IntervalKind::OpenUnit)]).unwrap();
        for m in p.generating_maps() {
            assert!(check_morphism(&p, &r_inf, &m, seeds, 8).pass, "{}", m.name());
        }
    }

    #[test]
    fn pointwise_combination_law() {
        assert!(check_pointwise_combine(&unit(), Seeds::new(2, 40), 6).pass);
        assert!(check_pointwise_combine(&make_interval_space(IntervalKind::ExtRealLine), Seeds::new(2, 40), 6).pass);
    }

    #[test]
    fn function_space_orders() {
        let space = unit();
        let fs = FunctionSpace::new(&space);
        let pts = [ExtReal::zero(), ExtReal::ratio(1, 2), ExtReal::one()];
        let low = AffineMap::constant(ExtReal::zero());
        let id = identity();
        let high = AffineMap::constant(ExtReal::int(2));
        assert!(fs.le(&low, &id, &pts));
        assert!(!fs.lt(&low, &id, &pts));
        assert!(fs.lt(&id, &high, &pts));
    }

    #[test]
    fn interval_images() {
        let closed = unit();
        let img = closed.image(&linear_map(integer(1), integer(-1))).unwrap();
        assert!(img.contains(&ExtReal::zero()) && img.contains(&ExtReal::one()) && img.contains(&ExtReal::ratio(1, 3)));
        assert!(!img.contains(&ExtReal::int(2)));

        let open = make_interval_space(IntervalKind::OpenUnit);
        let img = open.image(&identity()).unwrap();
        assert!(!img.contains(&ExtReal::zero()) && img.contains(&ExtReal::ratio(1, 2)));

        let face = &closed.generating_maps()[6];
        let img = closed.image(face).unwrap();
        assert!(img.contains(&ExtReal::Infinity) && img.contains(&ExtReal::zero()));
        assert!(!img.contains(&ExtReal::ratio(1, 2)));

        let line = make_interval_space(IntervalKind::ExtRealLine);
        let img = line.image(&identity()).unwrap();
        assert!(img.contains(&ExtReal::int(-1000)) && img.contains(&ExtReal::Infinity));
    }

    #[test]
    fn product_image_is_minkowski_sum() {
        let p = make_product_space(vec![unit(), make_interval_space(IntervalKind::OpenUnit)]).unwrap();
        let sum = AffineMap::new("x + y", |x: &Vec<ExtReal>| x[0].add(&x[1]));
        let img = p.image(&sum).unwrap();
        assert!(img.contains(&ExtReal::ratio(1, 100)));
        assert!(img.contains(&ExtReal::ratio(199, 100)));
        assert!(!img.contains(&ExtReal::zero()));
        assert!(!img.contains(&ExtReal::int(2)));
    }
}
