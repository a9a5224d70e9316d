use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{
    build_index_family_capped, diagonal_home, residue_class, select_rows, Label, LatticeError,
    RadixVector, RowSelection, SetFamily, Tuple, TupleSet,
};
use crate::limits::DEFAULT_ENUMERATION_CAP;

/// How the second removed diagonal is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XiPolicy {
    /// Smallest nonzero `ξ` whose diagonal lands on a selected row.
    #[default]
    Smallest,
    /// Target the row dictated by the residue class of `N`: `⌊d/2⌋` when
    /// `N mod d` is a unit, row 0 otherwise.
    ResidueClass,
    Explicit(usize),
}

/// Residue-class case of `a = N mod d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructionCase {
    /// `a = 0`.
    I,
    /// `gcd(a, d) = 1`.
    II,
    /// `a` a proper divisor of `d`, `a ≠ 1`.
    III,
    /// `gcd(a, d) > 1` but `a ∤ d`, e.g. `d = 6, a = 4`.
    SharedFactor,
}

impl ConstructionCase {
    pub fn of(n: usize, d: usize) -> Self {
        let a = residue_class(n, d);
        if a == 0 {
            ConstructionCase::I
        } else if a.gcd(&d) == 1 {
            ConstructionCase::II
        } else if d.is_multiple_of(a) {
            ConstructionCase::III
        } else {
            ConstructionCase::SharedFactor
        }
    }

    /// Row the policy aims the second diagonal at.
    fn target_row(self, d: usize) -> usize {
        match self {
            ConstructionCase::II => d / 2,
            _ => 0,
        }
    }
}

impl fmt::Display for ConstructionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstructionCase::I => "I",
            ConstructionCase::II => "II",
            ConstructionCase::III => "III",
            ConstructionCase::SharedFactor => "shared-factor",
        })
    }
}

fn check_xi(d: usize, n: usize, rows: &RowSelection, xi: usize) -> Result<usize, LatticeError> {
    let home = diagonal_home(xi, n, d);
    if xi == 0 || xi >= d || !rows.contains(home) {
        return Err(LatticeError::InadmissibleXi { xi, d, n, home });
    }
    Ok(xi)
}

pub fn choose_xi_prime(d: usize, n: usize, policy: XiPolicy) -> Result<usize, LatticeError> {
    if n == 0 {
        return Err(LatticeError::InvalidArity { n, min: 1 });
    }
    let rows = select_rows(d)?;
    let admissible = |xi: &usize| rows.contains(diagonal_home(*xi, n, d));
    let found = match policy {
        XiPolicy::Explicit(xi) => return check_xi(d, n, &rows, xi),
        XiPolicy::Smallest => (1..d).find(admissible),
        XiPolicy::ResidueClass => {
            let target = ConstructionCase::of(n, d).target_row(d);
            (1..d).find(|&xi| diagonal_home(xi, n, d) == target && admissible(&xi))
        }
    };
    found.ok_or(LatticeError::NoAdmissibleXi { d, n })
}

/// The reduced family: selected rows with the two diagonals `0…0` and
/// `ξ′…ξ′` pulled out into their own set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifiedFamily {
    pub family: SetFamily,
    pub case: ConstructionCase,
    pub xi_prime: usize,
    /// Row that held `ξ′…ξ′` before removal.
    pub xi_home: usize,
    pub removed: [Tuple; 2],
    pub rows: RowSelection,
}

impl ModifiedFamily {
    pub fn extra_label(&self) -> Label {
        Label::extra()
    }

    pub fn beyond_guarantee(&self) -> bool {
        self.rows.beyond_guarantee()
    }

    pub fn len(&self) -> usize {
        self.family.total_len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.total_len() == 0
    }
}

pub fn build_modified_family(
    d: usize,
    n: usize,
    xi: usize,
) -> Result<ModifiedFamily, LatticeError> {
    build_modified_family_capped(d, n, xi, DEFAULT_ENUMERATION_CAP)
}

pub fn build_modified_family_capped(
    d: usize,
    n: usize,
    xi: usize,
    cap: u64,
) -> Result<ModifiedFamily, LatticeError> {
    if n < 3 {
        return Err(LatticeError::InvalidArity { n, min: 3 });
    }
    let rows = select_rows(d)?;
    let xi_prime = check_xi(d, n, &rows, xi)?;
    let base = build_index_family_capped(d, n, cap)?;
    let removed = [Tuple::constant(0, n), Tuple::constant(xi_prime, n)];
    let radix = RadixVector::uniform(d, n)?;
    let mut sets: Vec<(Label, TupleSet)> = rows
        .rows()
        .into_iter()
        .map(|t| {
            let label = Label::Index(t);
            let set = base
                .get(&label)
                .expect("row label in Z_d")
                .without(&removed);
            (label, set)
        })
        .collect();
    sets.push((
        Label::extra(),
        TupleSet::from_tuples(radix.clone(), removed.clone())?,
    ));
    Ok(ModifiedFamily {
        family: SetFamily::new(radix, sets)?,
        case: ConstructionCase::of(n, d),
        xi_prime,
        xi_home: diagonal_home(xi_prime, n, d),
        removed,
        rows,
    })
}

fn pow(base: usize, exp: usize) -> u128 {
    (base as u128)
        .checked_pow(exp as u32)
        .expect("size exceeds 128 bits")
}

/// Closed-form size of the modified family.
pub fn construction_size(d: usize, n: usize) -> u128 {
    assert!(n >= 1, "at least one party");
    let h = d / 2;
    let per_block = if h % 2 == 1 {
        (h as u128).div_ceil(2) + 1
    } else {
        h as u128 / 2 + 2
    };
    per_block
        .checked_mul(pow(d, n - 1))
        .expect("size exceeds 128 bits")
}

/// Sizes used for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceSizes {
    /// `d^N − (d−1)^N + 1`, the earlier general construction.
    pub prior_general: u128,
    /// `d^{N−1} + 1`.
    pub lower_bound: u128,
    /// `3^N − 2^N`; informational unless `d = 3`.
    pub d3_case1: u128,
    /// `2·3^{N−1}`; informational unless `d = 3`.
    pub d3_minimum: u128,
    pub d3_applicable: bool,
}

pub fn reference_sizes(d: usize, n: usize) -> ReferenceSizes {
    assert!(n >= 1, "at least one party");
    ReferenceSizes {
        prior_general: pow(d, n) - pow(d.saturating_sub(1), n) + 1,
        lower_bound: pow(d, n - 1) + 1,
        d3_case1: pow(3, n) - pow(2, n),
        d3_minimum: 2 * pow(3, n - 1),
        d3_applicable: d == 3,
    }
}
