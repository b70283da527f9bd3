//! Exact arithmetic on the one-point extension of the reals and on countable
//! partitions of one.
//!
//! Finite values are exact rationals. A countable combination over a lazily
//! generated partition is only evaluated when the caller hands over a
//! [`Certificate`]: a uniform bound on the terms (yielding an [`Enclosure`])
//! or a divergence witness (yielding infinity). Without one the result is
//! [`NumericsError::Undecided`] unless the partial sums cross the configured
//! divergence threshold.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("weight {weight} at index {index} is outside [0, 1]")]
    WeightOutOfRange { index: usize, weight: String },
    #[error("weights must sum to 1 (got {sum})")]
    NotNormalized { sum: String },
    #[error("partition indices start at 1 (got {0})")]
    InvalidIndex(usize),
    #[error("partition has empty support")]
    EmptySupport,
    #[error("undecided after {depth} terms: {reason}")]
    Undecided { depth: usize, reason: String },
    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(&'static str),
    #[error("certificate violated at term {index}: {reason}")]
    CertificateViolated { index: usize, reason: String },
    #[error("cannot parse number {0:?}")]
    Parse(String),
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `1 / 2^n`.
pub fn inverse_power_of_two(n: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n)
}

/// Canonical `"p/q"` string, also used for integers (`"5/1"`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, an integer, a decimal (`"0.25"`) or scientific notation
/// (`"1e-12"`). Decimal inputs are converted exactly.
pub fn parse_rational(text: &str) -> Result<Rational, NumericsError> {
    let s = text.trim();
    let err = || NumericsError::Parse(text.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| err())?);
    let shift = exponent - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if negative { -value } else { value })
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// A point of the real line extended by a single point at infinity.
///
/// The derived order places every finite value below `Infinity`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtReal {
    Finite(Rational),
    Infinity,
}

impl ExtReal {
    pub fn zero() -> Self {
        ExtReal::Finite(Rational::zero())
    }

    pub fn one() -> Self {
        ExtReal::Finite(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        ExtReal::Finite(integer(n))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        ExtReal::Finite(rational(numer, denom))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtReal::Finite(r) => Some(r),
            ExtReal::Infinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(r) => rational_to_f64(r),
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    /// Sum in R∞: infinity absorbs.
    pub fn add(&self, other: &ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinity,
        }
    }

    /// `s · self`. A zero scalar annihilates infinity.
    ///
    /// # Panics
    /// If `self` is infinite and `s` is negative: R∞ has no `-∞`.
    pub fn scale(&self, s: &Rational) -> ExtReal {
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a * s),
            ExtReal::Infinity if s.is_zero() => ExtReal::zero(),
            ExtReal::Infinity => {
                assert!(s.is_positive(), "negative multiple of infinity is not in R∞");
                ExtReal::Infinity
            }
        }
    }

    pub fn parse(text: &str) -> Result<ExtReal, NumericsError> {
        match text.trim() {
            "inf" | "∞" | "+inf" | "infinity" => Ok(ExtReal::Infinity),
            other => parse_rational(other).map(ExtReal::Finite),
        }
    }

    /// The JSON string form: `"p/q"` or `"inf"`.
    pub fn to_json_string(&self) -> String {
        match self {
            ExtReal::Finite(r) => format_rational(r),
            ExtReal::Infinity => "inf".to_string(),
        }
    }
}

impl From<Rational> for ExtReal {
    fn from(r: Rational) -> Self {
        ExtReal::Finite(r)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(r) => write!(f, "{r}"),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_json_string())
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        ExtReal::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A certified range `[lower, upper]` for a value that was only computed to
/// finite depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enclosure {
    #[serde(with = "rational_str")]
    lower: Rational,
    upper: ExtReal,
}

impl Enclosure {
    pub fn new(lower: Rational, upper: ExtReal) -> Option<Self> {
        (ExtReal::Finite(lower.clone()) <= upper).then_some(Enclosure { lower, upper })
    }

    pub fn point(value: Rational) -> Self {
        Enclosure { upper: ExtReal::Finite(value.clone()), lower: value }
    }

    pub fn lower(&self) -> &Rational {
        &self.lower
    }

    pub fn upper(&self) -> &ExtReal {
        &self.upper
    }

    pub fn width(&self) -> ExtReal {
        match &self.upper {
            ExtReal::Finite(u) => ExtReal::Finite(u - &self.lower),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        x >= &self.lower && ExtReal::Finite(x.clone()) <= self.upper
    }

    /// Float containment with slack `tol` on both sides.
    pub fn contains_f64(&self, x: f64, tol: f64) -> bool {
        rational_to_f64(&self.lower) - tol <= x && x <= self.upper.to_f64() + tol
    }
}

/// Lazily generated weights `i ↦ α_i` together with the exact tail mass
/// `N ↦ 1 − Σ_{i≤N} α_i`.
#[derive(Clone)]
pub struct LazyWeights {
    name: String,
    weight: Arc<dyn Fn(usize) -> Rational + Send + Sync>,
    tail: Arc<dyn Fn(usize) -> Rational + Send + Sync>,
}

#[derive(Clone)]
enum Repr {
    Finite(Vec<(usize, Rational)>),
    Lazy(LazyWeights),
}

/// An element of Ω: nonnegative weights indexed from 1 summing to one.
#[derive(Clone)]
pub struct PartitionOfOne {
    repr: Repr,
}

impl fmt::Debug for PartitionOfOne {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Finite(entries) => {
                let mut list = f.debug_map();
                for (i, w) in entries {
                    list.entry(i, &format_rational(w));
                }
                list.finish()
            }
            Repr::Lazy(lazy) => write!(f, "Lazy({})", lazy.name),
        }
    }
}

impl PartialEq for PartitionOfOne {
    /// Finite partitions compare by their weights; lazy ones only by name.
    fn eq(&self, other: &Self) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Finite(a), Repr::Finite(b)) => a == b,
            (Repr::Lazy(a), Repr::Lazy(b)) => a.name == b.name,
            _ => false,
        }
    }
}

impl PartitionOfOne {
    /// Finite support from `(index, weight)` pairs. Duplicate indices are
    /// merged and zero weights dropped.
    pub fn finite(entries: impl IntoIterator<Item = (usize, Rational)>) -> Result<Self, NumericsError> {
        let mut merged: std::collections::BTreeMap<usize, Rational> = Default::default();
        for (index, weight) in entries {
            if index == 0 {
                return Err(NumericsError::InvalidIndex(index));
            }
            if weight.is_negative() || weight > Rational::one() {
                return Err(NumericsError::WeightOutOfRange { index, weight: format_rational(&weight) });
            }
            *merged.entry(index).or_insert_with(Rational::zero) += weight;
        }
        let entries: Vec<_> = merged.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        let sum: Rational = entries.iter().map(|(_, w)| w).sum();
        if !sum.is_one() {
            return Err(NumericsError::NotNormalized { sum: format_rational(&sum) });
        }
        Ok(PartitionOfOne { repr: Repr::Finite(entries) })
    }

    /// Weights for indices `1..=weights.len()`.
    pub fn from_weights(weights: impl IntoIterator<Item = Rational>) -> Result<Self, NumericsError> {
        Self::finite(weights.into_iter().enumerate().map(|(i, w)| (i + 1, w)))
    }

    pub fn dirac(j: usize) -> Result<Self, NumericsError> {
        if j == 0 {
            return Err(NumericsError::InvalidIndex(0));
        }
        Ok(PartitionOfOne { repr: Repr::Finite(vec![(j, Rational::one())]) })
    }

    /// `α_i = 1/2^i`, with tail mass `1/2^N`.
    pub fn geometric() -> Self {
        Self::lazy("geometric", inverse_power_of_two, inverse_power_of_two)
    }

    pub fn lazy(
        name: &str,
        weight: impl Fn(usize) -> Rational + Send + Sync + 'static,
        tail: impl Fn(usize) -> Rational + Send + Sync + 'static,
    ) -> Self {
        PartitionOfOne {
            repr: Repr::Lazy(LazyWeights { name: name.to_string(), weight: Arc::new(weight), tail: Arc::new(tail) }),
        }
    }

    /// Normalized random integer composition with full support `1..=size`.
    pub fn random(seed: u64, support_size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(&mut rng, support_size)
    }

    pub fn random_with<R: Rng + ?Sized>(rng: &mut R, support_size: usize) -> Self {
        assert!(support_size >= 1, "support_size must be positive");
        let parts: Vec<i64> = (0..support_size).map(|_| rng.gen_range(1..=12)).collect();
        let total: i64 = parts.iter().sum();
        let entries = parts.iter().enumerate().map(|(i, &p)| (i + 1, rational(p, total))).collect();
        PartitionOfOne { repr: Repr::Finite(entries) }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.repr, Repr::Finite(_))
    }

    /// The `(index, weight)` pairs of a finite partition, sorted by index.
    pub fn support(&self) -> Option<&[(usize, Rational)]> {
        match &self.repr {
            Repr::Finite(entries) => Some(entries),
            Repr::Lazy(_) => None,
        }
    }

    /// Largest index with positive weight, for finite partitions.
    pub fn max_index(&self) -> Option<usize> {
        self.support().and_then(|s| s.last().map(|(i, _)| *i))
    }

    pub fn weight(&self, index: usize) -> Rational {
        match &self.repr {
            Repr::Finite(entries) => entries
                .binary_search_by_key(&index, |(i, _)| *i)
                .map(|pos| entries[pos].1.clone())
                .unwrap_or_else(|_| Rational::zero()),
            Repr::Lazy(_) if index == 0 => Rational::zero(),
            Repr::Lazy(lazy) => (lazy.weight)(index),
        }
    }

    /// `1 − Σ_{i≤depth} α_i`.
    pub fn tail_mass(&self, depth: usize) -> Rational {
        match &self.repr {
            Repr::Finite(entries) => {
                let head: Rational = entries.iter().filter(|(i, _)| *i <= depth).map(|(_, w)| w).sum();
                Rational::one() - head
            }
            Repr::Lazy(lazy) => (lazy.tail)(depth),
        }
    }

    /// Checks the certified tail against the generated weights for every
    /// depth up to `depth`: exact agreement, weights in `[0, 1]`, and a
    /// nonincreasing tail.
    pub fn verify_tail(&self, depth: usize) -> bool {
        let Repr::Lazy(lazy) = &self.repr else {
            return true;
        };
        let mut head = Rational::zero();
        let mut previous = Rational::one();
        if !(lazy.tail)(0).is_one() {
            return false;
        }
        for n in 1..=depth {
            let w = (lazy.weight)(n);
            if w.is_negative() || w > Rational::one() {
                return false;
            }
            head += w;
            let tail = (lazy.tail)(n);
            if tail != Rational::one() - &head || tail > previous || tail.is_negative() {
                return false;
            }
            previous = tail;
        }
        true
    }
}

/// Evidence that makes a countable combination over a lazy partition
/// decidable.
#[derive(Clone, Default)]
pub enum Certificate {
    #[default]
    None,
    /// `|u_i| ≤ B` for every index.
    Bounded(Rational),
    /// The partial sums are unbounded above.
    Divergent(DivergenceWitness),
}

impl fmt::Debug for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::None => f.write_str("None"),
            Certificate::Bounded(b) => write!(f, "Bounded({b})"),
            Certificate::Divergent(_) => f.write_str("Divergent"),
        }
    }
}

/// A closed-form lower bound `N ↦ L(N)` on the partial sums, unbounded in `N`.
///
/// The bound is spot-checked against the computed partial sums before it is
/// trusted.
#[derive(Clone)]
pub struct DivergenceWitness {
    lower_bound: Arc<dyn Fn(usize) -> Rational + Send + Sync>,
}

impl DivergenceWitness {
    pub fn new(lower_bound: impl Fn(usize) -> Rational + Send + Sync + 'static) -> Self {
        DivergenceWitness { lower_bound: Arc::new(lower_bound) }
    }

    pub fn lower_bound(&self, depth: usize) -> Rational {
        (self.lower_bound)(depth)
    }
}

/// Number of leading terms checked against a divergence witness.
const WITNESS_CHECK_DEPTH: usize = 256;

/// Evaluation limits for countable combinations.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Largest truncation depth evaluated.
    pub max_depth: usize,
    /// Stop once the enclosure width is at most this.
    pub tolerance: Rational,
    /// Partial sums beyond this magnitude are treated as divergent.
    pub divergence_threshold: Rational,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_depth: 1_000_000,
            tolerance: rational(1, 1_000_000_000_000),
            divergence_threshold: integer(1_000_000_000_000),
        }
    }
}

impl Budget {
    /// Evaluates exactly `depth` terms (no early stop).
    pub fn fixed_depth(depth: usize) -> Self {
        Budget { max_depth: depth, tolerance: Rational::zero(), ..Budget::default() }
    }
}

/// The value of a countable combination.
#[derive(Clone, Debug, PartialEq)]
pub enum Combination {
    Exact(ExtReal),
    /// Truncated at `depth`, the partial sum being `estimate`.
    Enclosed { estimate: Rational, enclosure: Enclosure, depth: usize },
}

impl Combination {
    /// Exact value, or the partial-sum estimate.
    pub fn value(&self) -> ExtReal {
        match self {
            Combination::Exact(v) => v.clone(),
            Combination::Enclosed { estimate, .. } => ExtReal::Finite(estimate.clone()),
        }
    }

    pub fn exact(&self) -> Option<&ExtReal> {
        match self {
            Combination::Exact(v) => Some(v),
            Combination::Enclosed { .. } => None,
        }
    }

    pub fn enclosure(&self) -> Option<&Enclosure> {
        match self {
            Combination::Enclosed { enclosure, .. } => Some(enclosure),
            Combination::Exact(_) => None,
        }
    }
}

/// `(1 − r)·u + r·v` in R∞.
///
/// # Panics
/// If `r` is outside `[0, 1]`.
pub fn binary_combine(r: &Rational, u: &ExtReal, v: &ExtReal) -> ExtReal {
    assert!(!r.is_negative() && r <= &Rational::one(), "weight outside [0, 1]");
    let keep = Rational::one() - r;
    u.scale(&keep).add(&v.scale(r))
}

/// Exact sum `Σ w_i u_i` over finitely many terms; positively weighted
/// infinity wins.
pub fn finite_combine<'a>(terms: impl IntoIterator<Item = (&'a Rational, ExtReal)>) -> ExtReal {
    let mut acc = Rational::zero();
    for (w, u) in terms {
        if w.is_zero() {
            continue;
        }
        match u {
            ExtReal::Infinity => return ExtReal::Infinity,
            ExtReal::Finite(x) => acc += w * x,
        }
    }
    ExtReal::Finite(acc)
}

/// `Σ_i ω_i u_i` with the limit-or-∞ semantics of R∞.
///
/// Finite partitions are summed exactly and the certificate is ignored.
pub fn countable_combine(
    weights: &PartitionOfOne,
    u: impl Fn(usize) -> ExtReal,
    certificate: &Certificate,
    budget: &Budget,
) -> Result<Combination, NumericsError> {
    let lazy = match &weights.repr {
        Repr::Finite(entries) => {
            return Ok(Combination::Exact(finite_combine(entries.iter().map(|(i, w)| (w, u(*i))))));
        }
        Repr::Lazy(lazy) => lazy,
    };
    match certificate {
        Certificate::Bounded(bound) => combine_bounded(lazy, &u, bound, budget),
        Certificate::Divergent(witness) => combine_divergent(lazy, &u, witness, budget),
        Certificate::None => combine_uncertified(lazy, &u, budget),
    }
}

fn combine_bounded(
    lazy: &LazyWeights,
    u: &impl Fn(usize) -> ExtReal,
    bound: &Rational,
    budget: &Budget,
) -> Result<Combination, NumericsError> {
    let two = integer(2);
    let mut partial = Rational::zero();
    let mut depth = 0;
    loop {
        let tail = (lazy.tail)(depth);
        let radius = bound * &tail;
        if tail.is_zero() || &two * &radius <= budget.tolerance || depth >= budget.max_depth {
            if radius.is_zero() {
                return Ok(Combination::Exact(ExtReal::Finite(partial)));
            }
            let enclosure = Enclosure::new(&partial - &radius, ExtReal::Finite(&partial + &radius))
                .expect("radius is nonnegative");
            return Ok(Combination::Enclosed { estimate: partial, enclosure, depth });
        }
        depth += 1;
        let w = (lazy.weight)(depth);
        match u(depth) {
            ExtReal::Infinity if !w.is_zero() => return Ok(Combination::Exact(ExtReal::Infinity)),
            ExtReal::Infinity => {
                return Err(NumericsError::CertificateViolated {
                    index: depth,
                    reason: "infinite term under a finite bound".into(),
                })
            }
            ExtReal::Finite(x) => {
                if x.abs() > *bound {
                    return Err(NumericsError::CertificateViolated {
                        index: depth,
                        reason: format!("|{x}| exceeds bound {bound}"),
                    });
                }
                partial += w * x;
            }
        }
    }
}

fn combine_divergent(
    lazy: &LazyWeights,
    u: &impl Fn(usize) -> ExtReal,
    witness: &DivergenceWitness,
    budget: &Budget,
) -> Result<Combination, NumericsError> {
    let mut partial = Rational::zero();
    for n in 1..=budget.max_depth.min(WITNESS_CHECK_DEPTH) {
        let w = (lazy.weight)(n);
        match u(n) {
            ExtReal::Infinity if !w.is_zero() => return Ok(Combination::Exact(ExtReal::Infinity)),
            ExtReal::Infinity => {}
            ExtReal::Finite(x) => partial += w * x,
        }
        if partial < witness.lower_bound(n) {
            return Err(NumericsError::CertificateViolated {
                index: n,
                reason: format!("partial sum {partial} below witnessed bound {}", witness.lower_bound(n)),
            });
        }
    }
    // The witness must itself exceed the threshold at some depth.
    let mut n: usize = 1;
    while n < (1usize << 62) {
        if witness.lower_bound(n) > budget.divergence_threshold {
            return Ok(Combination::Exact(ExtReal::Infinity));
        }
        n *= 2;
    }
    Err(NumericsError::Undecided { depth: n, reason: "witness never exceeds the divergence threshold".into() })
}

fn combine_uncertified(
    lazy: &LazyWeights,
    u: &impl Fn(usize) -> ExtReal,
    budget: &Budget,
) -> Result<Combination, NumericsError> {
    let mut partial = Rational::zero();
    for n in 1..=budget.max_depth {
        let w = (lazy.weight)(n);
        match u(n) {
            ExtReal::Infinity if !w.is_zero() => return Ok(Combination::Exact(ExtReal::Infinity)),
            ExtReal::Infinity => {}
            ExtReal::Finite(x) => partial += w * x,
        }
        if (lazy.tail)(n).is_zero() {
            return Ok(Combination::Exact(ExtReal::Finite(partial)));
        }
        match partial.abs().cmp(&budget.divergence_threshold) {
            Ordering::Greater if partial.is_positive() => return Ok(Combination::Exact(ExtReal::Infinity)),
            Ordering::Greater => {
                return Err(NumericsError::Undecided {
                    depth: n,
                    reason: "partial sums head toward -inf, which is not a point of R∞".into(),
                })
            }
            _ => {}
        }
    }
    Err(NumericsError::Undecided {
        depth: budget.max_depth,
        reason: "no certificate supplied and the partial sums did not cross the divergence threshold".into(),
    })
}

/// `γ_j = Σ_i α_i β^i_j` for finite partitions.
pub fn compose_partitions(
    alpha: &PartitionOfOne,
    beta: impl Fn(usize) -> PartitionOfOne,
) -> Result<PartitionOfOne, NumericsError> {
    let outer = alpha
        .support()
        .ok_or(NumericsError::UnsupportedRepresentation("composition needs a finite outer partition"))?;
    let mut composed: std::collections::BTreeMap<usize, Rational> = Default::default();
    for (i, a) in outer {
        let inner = beta(*i);
        let inner = inner
            .support()
            .ok_or(NumericsError::UnsupportedRepresentation("composition needs finite inner partitions"))?;
        for (j, b) in inner {
            *composed.entry(*j).or_insert_with(Rational::zero) += a * b;
        }
    }
    Ok(PartitionOfOne { repr: Repr::Finite(composed.into_iter().filter(|(_, w)| !w.is_zero()).collect()) })
}

/// Random rational in `[lo, hi]` with denominator at most `max_denom`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64, max_denom: i64) -> Rational {
    let denom = rng.gen_range(1..=max_denom);
    let numer = rng.gen_range(lo * denom..=hi * denom);
    rational(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(values: &[ExtReal]) -> impl Fn(usize) -> ExtReal + '_ {
        move |i| values[i - 1].clone()
    }

    #[test]
    fn binary_combine_examples() {
        assert_eq!(binary_combine(&rational(1, 2), &ExtReal::int(1), &ExtReal::int(3)), ExtReal::int(2));
        assert_eq!(binary_combine(&rational(1, 4), &ExtReal::int(8), &ExtReal::Infinity), ExtReal::Infinity);
        assert_eq!(binary_combine(&integer(0), &ExtReal::int(5), &ExtReal::Infinity), ExtReal::int(5));
    }

    #[test]
    #[should_panic]
    fn binary_combine_rejects_weights_outside_unit_interval() {
        binary_combine(&rational(3, 2), &ExtReal::int(1), &ExtReal::int(2));
    }

    #[test]
    fn order_puts_infinity_on_top() {
        assert!(ExtReal::int(1_000_000) < ExtReal::Infinity);
        assert!(ExtReal::int(-3) < ExtReal::zero());
    }

    #[test]
    fn singleton_combination() {
        let omega = PartitionOfOne::dirac(1).unwrap();
        let u = [ExtReal::int(5), ExtReal::int(9)];
        let got = countable_combine(&omega, seq(&u), &Certificate::None, &Budget::default()).unwrap();
        assert_eq!(got, Combination::Exact(ExtReal::int(5)));
    }

    #[test]
    fn dirac_projects() {
        let u = [ExtReal::int(1), ExtReal::ratio(2, 7), ExtReal::Infinity, ExtReal::int(4)];
        for j in 1..=4 {
            let omega = PartitionOfOne::dirac(j).unwrap();
            let got = countable_combine(&omega, seq(&u), &Certificate::None, &Budget::default()).unwrap();
            assert_eq!(got.value(), u[j - 1]);
        }
        assert!(PartitionOfOne::dirac(0).is_err());
    }

    #[test]
    fn geometric_against_divergent_terms_is_infinite() {
        let omega = PartitionOfOne::geometric();
        let u = |i: usize| ExtReal::Finite(integer(i as i64) * (integer(1) / inverse_power_of_two(i)));
        let witness = DivergenceWitness::new(|n| integer((n * (n + 1) / 2) as i64));
        let got = countable_combine(&omega, u, &Certificate::Divergent(witness), &Budget::default()).unwrap();
        assert_eq!(got, Combination::Exact(ExtReal::Infinity));
    }

    #[test]
    fn false_divergence_witness_is_rejected() {
        let omega = PartitionOfOne::geometric();
        let witness = DivergenceWitness::new(|n| integer(n as i64));
        let err = countable_combine(&omega, |_| ExtReal::one(), &Certificate::Divergent(witness), &Budget::default())
            .unwrap_err();
        assert!(matches!(err, NumericsError::CertificateViolated { .. }));
    }

    #[test]
    fn geometric_against_ones_encloses_one() {
        let omega = PartitionOfOne::geometric();
        for depth in [1usize, 5, 20] {
            let got = countable_combine(&omega, |_| ExtReal::one(), &Certificate::Bounded(integer(1)), &Budget::fixed_depth(depth))
                .unwrap();
            let enc = got.enclosure().unwrap();
            assert!(enc.contains(&integer(1)));
            assert!(enc.width() <= ExtReal::Finite(integer(2) * inverse_power_of_two(depth)));
        }
    }

    #[test]
    fn bounded_certificate_is_checked() {
        let omega = PartitionOfOne::geometric();
        let err = countable_combine(&omega, |i| ExtReal::int(i as i64), &Certificate::Bounded(integer(3)), &Budget::fixed_depth(10))
            .unwrap_err();
        assert_eq!(err, NumericsError::CertificateViolated { index: 4, reason: "|4| exceeds bound 3".into() });
    }

    #[test]
    fn uncertified_lazy_combination_is_undecided() {
        let omega = PartitionOfOne::geometric();
        let budget = Budget { max_depth: 64, ..Budget::default() };
        let err = countable_combine(&omega, |_| ExtReal::one(), &Certificate::None, &budget).unwrap_err();
        assert!(matches!(err, NumericsError::Undecided { depth: 64, .. }));
    }

    #[test]
    fn uncertified_negative_divergence_is_refused() {
        let omega = PartitionOfOne::geometric();
        let budget = Budget { max_depth: 200, divergence_threshold: integer(1000), ..Budget::default() };
        let u = |i: usize| ExtReal::Finite(-integer(i as i64) / inverse_power_of_two(i));
        let err = countable_combine(&omega, u, &Certificate::None, &budget).unwrap_err();
        match err {
            NumericsError::Undecided { reason, .. } => assert!(reason.contains("-inf")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn uncertified_positive_divergence_crosses_threshold() {
        let omega = PartitionOfOne::geometric();
        let budget = Budget { max_depth: 200, divergence_threshold: integer(1000), ..Budget::default() };
        let u = |i: usize| ExtReal::Finite(integer(i as i64) / inverse_power_of_two(i));
        let got = countable_combine(&omega, u, &Certificate::None, &budget).unwrap();
        assert_eq!(got, Combination::Exact(ExtReal::Infinity));
    }

    #[test]
    fn compose_examples() {
        let a = PartitionOfOne::from_weights([rational(1, 2), rational(1, 2)]).unwrap();
        let d = |i| PartitionOfOne::dirac(i).unwrap();
        assert_eq!(compose_partitions(&a, d).unwrap(), a);

        let a = PartitionOfOne::from_weights([rational(1, 3), rational(2, 3)]).unwrap();
        let b1 = PartitionOfOne::from_weights([rational(1, 2), rational(1, 2)]).unwrap();
        let b2 = PartitionOfOne::from_weights([rational(1, 4), rational(3, 4)]).unwrap();
        let beta = |i| if i == 1 { b1.clone() } else { b2.clone() };
        let expected = PartitionOfOne::from_weights([rational(1, 3), rational(2, 3)]).unwrap();
        assert_eq!(compose_partitions(&a, beta).unwrap(), expected);

        let got = compose_partitions(&PartitionOfOne::dirac(2).unwrap(), |i| if i == 2 { b2.clone() } else { b1.clone() })
            .unwrap();
        assert_eq!(got, b2);
    }

    #[test]
    fn compose_rejects_lazy_input() {
        let err = compose_partitions(&PartitionOfOne::geometric(), |i| PartitionOfOne::dirac(i).unwrap()).unwrap_err();
        assert!(matches!(err, NumericsError::UnsupportedRepresentation(_)));
    }

    #[test]
    fn partition_validation() {
        assert!(matches!(
            PartitionOfOne::from_weights([rational(1, 2), rational(1, 4)]),
            Err(NumericsError::NotNormalized { .. })
        ));
        assert!(matches!(
            PartitionOfOne::from_weights([rational(3, 2), rational(-1, 2)]),
            Err(NumericsError::WeightOutOfRange { .. })
        ));
        let merged = PartitionOfOne::finite([(2, rational(1, 2)), (2, rational(1, 2)), (5, integer(0))]).unwrap();
        assert_eq!(merged.support().unwrap(), &[(2, integer(1))]);
    }

    #[test]
    fn random_partition_examples() {
        assert_eq!(PartitionOfOne::random(0, 1), PartitionOfOne::dirac(1).unwrap());
        let p = PartitionOfOne::random(42, 3);
        let sum: Rational = p.support().unwrap().iter().map(|(_, w)| w).sum();
        assert!(sum.is_one());
        assert_eq!(p.support().unwrap().len(), 3);
        assert_eq!(PartitionOfOne::random(42, 3), p);
    }

    #[test]
    fn geometric_tail_is_certified() {
        assert!(PartitionOfOne::geometric().verify_tail(64));
        let wrong = PartitionOfOne::lazy("wrong", inverse_power_of_two, |n| inverse_power_of_two(n + 1));
        assert!(!wrong.verify_tail(4));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("1e-12").unwrap(), rational(1, 1_000_000_000_000));
        assert_eq!(parse_rational("-2.5e1").unwrap(), integer(-25));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&integer(5)), "5/1");
        assert_eq!(serde_json::to_string(&ExtReal::Infinity).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&ExtReal::ratio(-1, 2)).unwrap(), "\"-1/2\"");
        let back: ExtReal = serde_json::from_str("\"7/14\"").unwrap();
        assert_eq!(back, ExtReal::ratio(1, 2));
    }
}
