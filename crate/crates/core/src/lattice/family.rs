use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{LatticeError, RadixVector, TupleSet};

/// Identifier of a member set.
///
/// Integer labels name elements of `Z_d`; anything else (notably the extra
/// set of the modified construction) is a named token. Integer labels sort
/// numerically and before named ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Index(usize),
    Named(String),
}

impl Label {
    pub const EXTRA: &'static str = "extra";

    pub fn extra() -> Self {
        Label::Named(Self::EXTRA.to_string())
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Label::Index(i) => Some(*i),
            Label::Named(_) => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Index(i) => write!(f, "{i}"),
            Label::Named(s) => f.write_str(s),
        }
    }
}

impl FromStr for Label {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(LatticeError::EmptyLabel);
        }
        if s.bytes().all(|b| b.is_ascii_digit()) {
            s.parse()
                .map(Label::Index)
                .map_err(|_| LatticeError::EmptyLabel)
        } else {
            Ok(Label::Named(s.to_string()))
        }
    }
}

impl From<usize> for Label {
    fn from(i: usize) -> Self {
        Label::Index(i)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered, labeled collection of pairwise disjoint tuple sets over a
/// common radix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    radix: RadixVector,
    sets: BTreeMap<Label, TupleSet>,
}

impl SetFamily {
    /// Builds a family, checking radix agreement, label uniqueness and
    /// pairwise disjointness.
    pub fn new<I>(radix: RadixVector, sets: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = (Label, TupleSet)>,
    {
        let family = Self::new_allow_overlap(radix, sets)?;
        family.check_disjoint()?;
        Ok(family)
    }

    /// Like [`new`](Self::new) but skips the disjointness check. Used to
    /// build deliberately invalid inputs for predicates such as
    /// [`verify_partition`](super::verify_partition).
    pub fn new_allow_overlap<I>(radix: RadixVector, sets: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = (Label, TupleSet)>,
    {
        let mut map = BTreeMap::new();
        for (label, set) in sets {
            if set.radix() != &radix {
                return Err(LatticeError::RadixMismatch);
            }
            if map.contains_key(&label) {
                return Err(LatticeError::DuplicateLabel(label));
            }
            map.insert(label, set);
        }
        Ok(Self { radix, sets: map })
    }

    fn check_disjoint(&self) -> Result<(), LatticeError> {
        let mut owner: Vec<(u64, &Label)> = self
            .sets
            .iter()
            .flat_map(|(l, s)| s.ranks().iter().map(move |&r| (r, l)))
            .collect();
        owner.sort_unstable();
        for w in owner.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(LatticeError::OverlappingSets {
                    first: w[0].1.clone(),
                    second: w[1].1.clone(),
                    tuple: self.radix.unrank(w[0].0),
                });
            }
        }
        Ok(())
    }

    /// Every tuple of the cube as its own singleton set, labeled by rank.
    pub fn computational_basis(radix: RadixVector) -> Self {
        let sets = (0..radix.cube_size())
            .map(|r| {
                (
                    Label::Index(r as usize),
                    TupleSet::from_sorted_ranks(radix.clone(), vec![r]),
                )
            })
            .collect();
        Self { radix, sets }
    }

    pub fn radix(&self) -> &RadixVector {
        &self.radix
    }

    /// Number of member sets.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, label: &Label) -> Option<&TupleSet> {
        self.sets.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.sets.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &TupleSet)> {
        self.sets.iter()
    }

    /// Total number of tuples over all members.
    pub fn total_len(&self) -> usize {
        self.sets.values().map(TupleSet::len).sum()
    }

    pub fn union(&self) -> TupleSet {
        let mut ranks: Vec<u64> = self
            .sets
            .values()
            .flat_map(|s| s.ranks().iter().copied())
            .collect();
        ranks.sort_unstable();
        ranks.dedup();
        TupleSet::from_sorted_ranks(self.radix.clone(), ranks)
    }

    /// The family with one member removed.
    pub fn without_label(&self, label: &Label) -> Result<SetFamily, LatticeError> {
        if !self.sets.contains_key(label) {
            return Err(LatticeError::MissingLabel(label.clone()));
        }
        let mut sets = self.sets.clone();
        sets.remove(label);
        Ok(Self {
            radix: self.radix.clone(),
            sets,
        })
    }

    /// Which member contains a tuple, if any.
    pub fn owner_of(&self, digits: &[usize]) -> Option<&Label> {
        self.sets
            .iter()
            .find(|(_, s)| s.contains(digits))
            .map(|(l, _)| l)
    }

    pub fn into_sets(self) -> BTreeMap<Label, TupleSet> {
        self.sets
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Tuple;

    #[test]
    fn label_order_and_parse() {
        let mut labels = [
            Label::extra(),
            Label::Index(10),
            Label::Index(2),
            "B".parse().unwrap(),
        ];
        labels.sort();
        let shown: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(shown, ["2", "10", "B", "extra"]);
        assert_eq!("7".parse::<Label>().unwrap(), Label::Index(7));
        assert!("".parse::<Label>().is_err());
    }

    #[test]
    fn overlap_is_rejected() {
        let radix = RadixVector::uniform(2, 1).unwrap();
        let a = TupleSet::from_tuples(radix.clone(), vec![Tuple(vec![0])]).unwrap();
        let err = SetFamily::new(
            radix.clone(),
            vec![(Label::Index(0), a.clone()), (Label::Index(1), a.clone())],
        )
        .unwrap_err();
        assert!(matches!(err, LatticeError::OverlappingSets { .. }));
        assert!(SetFamily::new_allow_overlap(
            radix,
            vec![(Label::Index(0), a.clone()), (Label::Index(1), a)]
        )
        .is_ok());
    }

    #[test]
    fn computational_basis_partitions_cube() {
        let fam = SetFamily::computational_basis(RadixVector::new(vec![2, 3]).unwrap());
        assert_eq!(fam.len(), 6);
        assert_eq!(fam.union().len(), 6);
        assert_eq!(fam.owner_of(&[1, 2]), Some(&Label::Index(5)));
    }
}
