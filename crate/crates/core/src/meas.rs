//! Finite measurable spaces and the σ-algebra a super convex space inherits
//! from its maps into R∞.
//!
//! Subsets of a carrier with at most 64 points are bit masks. On a finite
//! carrier the σ-algebra generated by a family of sets is determined by its
//! atoms (points grouped by which generators contain them), and the σ-algebra
//! generated by a real-valued map is the one generated by its fibers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::ExtReal;
use crate::scvx::{AffineMap, SuperConvexSpace};

pub type Subset = u64;

/// Largest carrier representable as a mask.
pub const MAX_CARRIER: usize = 64;
/// Largest carrier for which brute-force minimality oracles are run.
pub const BRUTE_FORCE_CAP: usize = 16;
/// σ-algebras with more atoms than this are not enumerated.
const MAX_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasError {
    #[error("not a σ-algebra: {0}")]
    NotASigmaAlgebra(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("carrier is not finite")]
    InfiniteCarrier,
    #[error("carrier of {size} points exceeds the limit of {max}")]
    CarrierTooLarge { size: usize, max: usize },
    #[error("map table has {got} entries for a carrier of {expected}")]
    ArityMismatch { expected: usize, got: usize },
}

pub fn full_mask(size: usize) -> Subset {
    if size == 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

/// A finite carrier with an explicit σ-algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMeasurableSpace {
    labels: Vec<String>,
    sigma: BTreeSet<Subset>,
}

fn check_labels(labels: &[String]) -> Result<(), MeasError> {
    if labels.len() > MAX_CARRIER {
        return Err(MeasError::CarrierTooLarge { size: labels.len(), max: MAX_CARRIER });
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(MeasError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl FiniteMeasurableSpace {
    /// Validates closure under complement and union.
    pub fn new(labels: Vec<String>, sigma: impl IntoIterator<Item = Subset>) -> Result<Self, MeasError> {
        check_labels(&labels)?;
        let full = full_mask(labels.len());
        let sigma: BTreeSet<Subset> = sigma.into_iter().collect();
        if let Some(bad) = sigma.iter().find(|u| *u & !full != 0) {
            return Err(MeasError::NotASigmaAlgebra(format!("set {bad:#b} leaves the carrier")));
        }
        if !sigma.contains(&0) || !sigma.contains(&full) {
            return Err(MeasError::NotASigmaAlgebra("must contain ∅ and the carrier".into()));
        }
        for &u in &sigma {
            if !sigma.contains(&(full & !u)) {
                return Err(MeasError::NotASigmaAlgebra(format!("complement of {u:#b} missing")));
            }
            for &v in &sigma {
                if !sigma.contains(&(u | v)) {
                    return Err(MeasError::NotASigmaAlgebra(format!("union of {u:#b} and {v:#b} missing")));
                }
            }
        }
        Ok(FiniteMeasurableSpace { labels, sigma })
    }

    pub fn powerset(labels: Vec<String>) -> Result<Self, MeasError> {
        let generators: Vec<Subset> = (0..labels.len()).map(|i| 1 << i).collect();
        generate_sigma_algebra(labels, &generators)
    }

    pub fn trivial(labels: Vec<String>) -> Result<Self, MeasError> {
        generate_sigma_algebra(labels, &[])
    }

    /// Carrier `x0, x1, …` with the power set.
    pub fn discrete(size: usize) -> Self {
        Self::powerset((0..size).map(|i| format!("x{i}")).collect()).expect("small discrete space")
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn full(&self) -> Subset {
        full_mask(self.labels.len())
    }

    pub fn sigma(&self) -> &BTreeSet<Subset> {
        &self.sigma
    }

    pub fn is_measurable_set(&self, u: Subset) -> bool {
        self.sigma.contains(&u)
    }

    pub fn is_powerset(&self) -> bool {
        self.sigma.len() as u128 == 1u128 << self.labels.len()
    }

    /// Minimal nonempty measurable sets, ordered by their least point.
    pub fn atoms(&self) -> Vec<Subset> {
        let mut atoms: Vec<Subset> = self
            .sigma
            .iter()
            .copied()
            .filter(|&u| u != 0 && !self.sigma.iter().any(|&v| v != 0 && v != u && v & u == v))
            .collect();
        atoms.sort_by_key(|u| u.trailing_zeros());
        atoms
    }

    pub fn index_of(&self, label: &str) -> Result<usize, MeasError> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| MeasError::UnknownLabel(label.to_string()))
    }

    pub fn subset_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Subset, MeasError> {
        labels.iter().try_fold(0, |acc, l| Ok(acc | 1 << self.index_of(l.as_ref())?))
    }

    pub fn labels_of(&self, u: Subset) -> Vec<String> {
        (0..self.size()).filter(|i| u >> i & 1 == 1).map(|i| self.labels[i].clone()).collect()
    }

    pub fn to_record(&self) -> SpaceRecord {
        let mut sigma: Vec<Vec<String>> = self
            .sigma
            .iter()
            .map(|&u| {
                let mut ls = self.labels_of(u);
                ls.sort();
                ls
            })
            .collect();
        sigma.sort();
        SpaceRecord { carrier: self.labels.clone(), sigma }
    }

    pub fn from_record(record: &SpaceRecord) -> Result<Self, MeasError> {
        check_labels(&record.carrier)?;
        let probe = FiniteMeasurableSpace { labels: record.carrier.clone(), sigma: BTreeSet::new() };
        let sets: Result<Vec<_>, _> = record.sigma.iter().map(|s| probe.subset_of(s)).collect();
        Self::new(record.carrier.clone(), sets?)
    }
}

/// JSON form: carrier labels plus σ as sorted lists of sorted labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub carrier: Vec<String>,
    pub sigma: Vec<Vec<String>>,
}

/// Smallest σ-algebra on `labels` containing `generators`.
pub fn generate_sigma_algebra(labels: Vec<String>, generators: &[Subset]) -> Result<FiniteMeasurableSpace, MeasError> {
    check_labels(&labels)?;
    let full = full_mask(labels.len());
    let mut by_signature: BTreeMap<Vec<bool>, Subset> = BTreeMap::new();
    for p in 0..labels.len() {
        let signature: Vec<bool> = generators.iter().map(|g| g >> p & 1 == 1).collect();
        *by_signature.entry(signature).or_insert(0) |= 1 << p;
    }
    let atoms: Vec<Subset> = by_signature.into_values().collect();
    if atoms.len() > MAX_ATOMS {
        return Err(MeasError::CarrierTooLarge { size: atoms.len(), max: MAX_ATOMS });
    }
    let sigma = (0u64..1 << atoms.len()).map(|choice| {
        atoms.iter().enumerate().filter(|(k, _)| choice >> k & 1 == 1).fold(0, |acc, (_, a)| acc | a) & full
    });
    Ok(FiniteMeasurableSpace { labels, sigma: sigma.collect() })
}

/// Fibers `m^{-1}(v)` of a map on an enumerated carrier.
pub fn fibers<T: Ord + Clone>(values: &[T]) -> Vec<Subset> {
    let mut by_value: BTreeMap<&T, Subset> = BTreeMap::new();
    for (p, v) in values.iter().enumerate() {
        *by_value.entry(v).or_insert(0) |= 1 << p;
    }
    by_value.into_values().collect()
}

/// The σ-algebra on a finite carrier generated by maps into R∞, i.e. by
/// their fiber partitions. Returns the carrier alongside, in label order.
pub fn sigma_functor<S: SuperConvexSpace>(
    space: &S,
    maps: &[AffineMap<S::Elem, ExtReal>],
) -> Result<(FiniteMeasurableSpace, Vec<S::Elem>), MeasError> {
    let carrier = space.carrier().ok_or(MeasError::InfiniteCarrier)?;
    if carrier.len() > MAX_CARRIER {
        return Err(MeasError::CarrierTooLarge { size: carrier.len(), max: MAX_CARRIER });
    }
    let generators: Vec<Subset> = maps
        .iter()
        .flat_map(|m| {
            let values: Vec<ExtReal> = carrier.iter().map(|x| m.apply(x)).collect();
            fibers(&values)
        })
        .collect();
    let labels = carrier.iter().map(|x| space.label(x)).collect();
    Ok((generate_sigma_algebra(labels, &generators)?, carrier))
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapTable {
    /// Point `p` goes to point `table[p]` of a finite target.
    ToFinite { target: FiniteMeasurableSpace, table: Vec<usize> },
    /// Point `p` goes to `values[p]` in R∞ with its Borel structure.
    ToExtReal { values: Vec<ExtReal> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurableMap {
    source: FiniteMeasurableSpace,
    table: MapTable,
}

impl MeasurableMap {
    pub fn to_finite(
        source: FiniteMeasurableSpace,
        target: FiniteMeasurableSpace,
        table: Vec<usize>,
    ) -> Result<Self, MeasError> {
        if table.len() != source.size() {
            return Err(MeasError::ArityMismatch { expected: source.size(), got: table.len() });
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= target.size()) {
            return Err(MeasError::UnknownLabel(format!("target index {bad}")));
        }
        Ok(MeasurableMap { source, table: MapTable::ToFinite { target, table } })
    }

    pub fn to_ext_real(source: FiniteMeasurableSpace, values: Vec<ExtReal>) -> Result<Self, MeasError> {
        if values.len() != source.size() {
            return Err(MeasError::ArityMismatch { expected: source.size(), got: values.len() });
        }
        Ok(MeasurableMap { source, table: MapTable::ToExtReal { values } })
    }

    pub fn identity(space: FiniteMeasurableSpace) -> Self {
        let table = (0..space.size()).collect();
        MeasurableMap { table: MapTable::ToFinite { target: space.clone(), table }, source: space }
    }

    /// `χ_U` into R∞.
    pub fn indicator(space: FiniteMeasurableSpace, u: Subset) -> Self {
        let values = (0..space.size()).map(|p| if u >> p & 1 == 1 { ExtReal::one() } else { ExtReal::zero() }).collect();
        MeasurableMap { source: space, table: MapTable::ToExtReal { values } }
    }

    pub fn source(&self) -> &FiniteMeasurableSpace {
        &self.source
    }

    pub fn table(&self) -> &MapTable {
        &self.table
    }

    pub fn preimage(&self, target_set: Subset) -> Subset {
        match &self.table {
            MapTable::ToFinite { table, .. } => {
                table.iter().enumerate().filter(|(_, &t)| target_set >> t & 1 == 1).fold(0, |acc, (p, _)| acc | 1 << p)
            }
            MapTable::ToExtReal { .. } => panic!("preimage of a mask is only defined for finite targets"),
        }
    }
}

/// Every measurable target set pulls back to a measurable source set. For
/// R∞ targets it suffices to check fibers: the image is finite, so every
/// Borel preimage is a union of fibers, `{∞}` included.
pub fn is_measurable(f: &MeasurableMap) -> bool {
    match &f.table {
        MapTable::ToFinite { target, .. } => target.sigma().iter().all(|&v| f.source.is_measurable_set(f.preimage(v))),
        MapTable::ToExtReal { values } => fibers(values).into_iter().all(|u| f.source.is_measurable_set(u)),
    }
}
