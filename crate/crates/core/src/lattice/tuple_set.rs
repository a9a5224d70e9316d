use super::{LatticeError, RadixVector, Tuple};

/// A finite set of tuples over one radix.
///
/// Members are stored as strictly increasing mixed-radix ranks, which is the
/// canonical lexicographic order used everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TupleSet {
    radix: RadixVector,
    ranks: Vec<u64>,
}

impl TupleSet {
    pub fn empty(radix: RadixVector) -> Self {
        Self {
            radix,
            ranks: Vec::new(),
        }
    }

    /// All tuples of the cube.
    pub fn full(radix: RadixVector) -> Self {
        let ranks = (0..radix.cube_size()).collect();
        Self { radix, ranks }
    }

    /// Builds a set from explicit tuples, rejecting out-of-range digits and
    /// duplicates.
    pub fn from_tuples<I>(radix: RadixVector, tuples: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = Tuple>,
    {
        let mut ranks = Vec::new();
        for t in tuples {
            radix.validate(t.digits())?;
            ranks.push(radix.rank(t.digits()));
        }
        Self::from_ranks(radix, ranks)
    }

    pub fn from_ranks(radix: RadixVector, mut ranks: Vec<u64>) -> Result<Self, LatticeError> {
        ranks.sort_unstable();
        if let Some(w) = ranks.windows(2).find(|w| w[0] == w[1]) {
            return Err(LatticeError::DuplicateTuple(radix.unrank(w[0])));
        }
        if let Some(&last) = ranks.last() {
            if last >= radix.cube_size() {
                return Err(LatticeError::RankOutOfRange { rank: last });
            }
        }
        Ok(Self { radix, ranks })
    }

    /// Caller guarantees strictly increasing, in-range ranks.
    pub(crate) fn from_sorted_ranks(radix: RadixVector, ranks: Vec<u64>) -> Self {
        debug_assert!(ranks.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(ranks.last().is_none_or(|&r| r < radix.cube_size()));
        Self { radix, ranks }
    }

    pub fn radix(&self) -> &RadixVector {
        &self.radix
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }

    pub fn iter(&self) -> impl Iterator<Item = Tuple> + '_ {
        self.ranks.iter().map(|&r| self.radix.unrank(r))
    }

    pub fn contains_rank(&self, rank: u64) -> bool {
        self.ranks.binary_search(&rank).is_ok()
    }

    pub fn contains(&self, digits: &[usize]) -> bool {
        self.radix.validate(digits).is_ok() && self.contains_rank(self.radix.rank(digits))
    }

    /// Position of a tuple in canonical order.
    pub fn position_of_rank(&self, rank: u64) -> Option<usize> {
        self.ranks.binary_search(&rank).ok()
    }

    fn same_radix(&self, other: &TupleSet) {
        assert_eq!(
            self.radix, other.radix,
            "tuple set operation across different radices"
        );
    }

    pub fn union(&self, other: &TupleSet) -> TupleSet {
        self.same_radix(other);
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ranks.len() && j < other.ranks.len() {
            let (a, b) = (self.ranks[i], other.ranks[j]);
            if a < b {
                out.push(a);
                i += 1;
            } else if b < a {
                out.push(b);
                j += 1;
            } else {
                out.push(a);
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&self.ranks[i..]);
        out.extend_from_slice(&other.ranks[j..]);
        TupleSet::from_sorted_ranks(self.radix.clone(), out)
    }

    pub fn difference(&self, other: &TupleSet) -> TupleSet {
        self.same_radix(other);
        let ranks = self
            .ranks
            .iter()
            .copied()
            .filter(|&r| !other.contains_rank(r))
            .collect();
        TupleSet::from_sorted_ranks(self.radix.clone(), ranks)
    }

    pub fn intersection_len(&self, other: &TupleSet) -> usize {
        self.same_radix(other);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.ranks.len() && j < other.ranks.len() {
            match self.ranks[i].cmp(&other.ranks[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub fn is_disjoint(&self, other: &TupleSet) -> bool {
        self.intersection_len(other) == 0
    }

    pub fn is_subset(&self, other: &TupleSet) -> bool {
        self.same_radix(other);
        self.ranks.iter().all(|&r| other.contains_rank(r))
    }

    /// The set with the given tuples removed (absent tuples are ignored).
    pub fn without<'a, I>(&self, tuples: I) -> TupleSet
    where
        I: IntoIterator<Item = &'a Tuple>,
    {
        let mut drop: Vec<u64> = tuples
            .into_iter()
            .filter(|t| self.radix.validate(t.digits()).is_ok())
            .map(|t| self.radix.rank(t.digits()))
            .collect();
        drop.sort_unstable();
        let ranks = self
            .ranks
            .iter()
            .copied()
            .filter(|r| drop.binary_search(r).is_err())
            .collect();
        TupleSet::from_sorted_ranks(self.radix.clone(), ranks)
    }

    /// Image under a position permutation: output position `p` holds the
    /// digit from input position `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<TupleSet, LatticeError> {
        let n = self.radix.len();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(LatticeError::InvalidPermutation);
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.radix.dims()[p]).collect();
        let target = RadixVector::new(dims)?;
        let mut src = vec![0; n];
        let mut dst = vec![0; n];
        let mut ranks: Vec<u64> = self
            .ranks
            .iter()
            .map(|&r| {
                self.radix.digits_into(r, &mut src);
                for (slot, &p) in dst.iter_mut().zip(perm) {
                    *slot = src[p];
                }
                target.rank(&dst)
            })
            .collect();
        ranks.sort_unstable();
        Ok(TupleSet::from_sorted_ranks(target, ranks))
    }

    /// Exchange two positions.
    pub fn swapped(&self, i: usize, j: usize) -> Result<TupleSet, LatticeError> {
        let mut perm: Vec<usize> = (0..self.radix.len()).collect();
        if i >= perm.len() || j >= perm.len() {
            return Err(LatticeError::InvalidPermutation);
        }
        perm.swap(i, j);
        self.permuted(&perm)
    }
}
