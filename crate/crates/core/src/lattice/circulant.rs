use std::collections::BTreeSet;

use num_integer::Integer;

use super::LatticeError;

/// The `d × d` circulant matrix with entry `(i − j) mod d`.
///
/// Row `i` lists, for each column `j`, the leading digit that pairs with the
/// `(N−1)`-party set labelled `j` inside the `N`-party set labelled `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantMatrix {
    order: usize,
    first_row: Vec<usize>,
}

impl CirculantMatrix {
    pub fn new(d: usize) -> Result<Self, LatticeError> {
        if d < 2 {
            return Err(LatticeError::InvalidDimension { d });
        }
        let first_row = (0..d).map(|j| (d - j) % d).collect();
        Ok(Self {
            order: d,
            first_row,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `[0, d−1, …, 2, 1]`.
    pub fn first_row(&self) -> &[usize] {
        &self.first_row
    }

    /// Entry read off the first row by cyclic shift.
    pub fn entry(&self, i: usize, j: usize) -> usize {
        let d = self.order;
        self.first_row[(j + d - i % d) % d]
    }

    pub fn row(&self, i: usize) -> Vec<usize> {
        (0..self.order).map(|j| self.entry(i, j)).collect()
    }
}

/// Distance between two labels on the cycle `Z_d`.
pub fn cyclic_distance(i1: usize, i2: usize, d: usize) -> Result<usize, LatticeError> {
    if d < 2 {
        return Err(LatticeError::InvalidDimension { d });
    }
    for label in [i1, i2] {
        if label >= d {
            return Err(LatticeError::LabelOutOfRange { label, d });
        }
    }
    let diff = i1.abs_diff(i2);
    Ok(diff.min(d - diff))
}

/// Labels kept by the modified construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSelection {
    pub d: usize,
    /// Odd labels strictly between 0 and `⌊d/2⌋`.
    pub t1: Vec<usize>,
    /// `{0, ⌊d/2⌋}`.
    pub t2: Vec<usize>,
}

impl RowSelection {
    /// Sorted union of both parts.
    pub fn rows(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.t1.iter().chain(&self.t2).copied().collect();
        set.into_iter().collect()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.t1.contains(&label) || self.t2.contains(&label)
    }

    /// Set of pairwise cyclic distances over the selected rows.
    pub fn distances(&self) -> BTreeSet<usize> {
        let rows = self.rows();
        let mut out = BTreeSet::new();
        for (a, &x) in rows.iter().enumerate() {
            for &y in &rows[a + 1..] {
                out.insert(cyclic_distance(x, y, self.d).expect("rows lie in Z_d"));
            }
        }
        out
    }

    /// Whether the pairwise distances are exactly `1..=⌊d/2⌋`.
    pub fn covers_distances(&self) -> bool {
        self.distances() == (1..=self.d / 2).collect()
    }

    /// Below `d = 4` the construction carries no nonlocality guarantee.
    pub fn beyond_guarantee(&self) -> bool {
        self.d < 4
    }
}

pub fn select_rows(d: usize) -> Result<RowSelection, LatticeError> {
    if d < 2 {
        return Err(LatticeError::InvalidDimension { d });
    }
    let h = d / 2;
    let t1 = (1..h).filter(|t| t % 2 == 1).collect();
    Ok(RowSelection {
        d,
        t1,
        t2: vec![0, h],
    })
}

/// `N mod d`.
pub fn residue_class(n: usize, d: usize) -> usize {
    n % d
}

/// Additive order of `a` in `Z_d`.
pub fn element_order(a: usize, d: usize) -> usize {
    let a = a % d;
    if a == 0 {
        1
    } else {
        d / a.gcd(&d)
    }
}

/// Label of the set holding the constant tuple `(ξ, …, ξ)` of length `n`.
pub fn diagonal_home(xi: usize, n: usize, d: usize) -> usize {
    (xi % d) * (n % d) % d
}
