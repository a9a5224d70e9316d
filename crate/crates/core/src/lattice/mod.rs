//! Mixed-radix tuple combinatorics and the recursive set families.

mod circulant;
mod construction;
mod family;
mod index_family;
mod radix;
mod tuple_set;

pub use circulant::{
    cyclic_distance, diagonal_home, element_order, residue_class, select_rows, CirculantMatrix,
    RowSelection,
};
pub use construction::{
    build_modified_family, build_modified_family_capped, choose_xi_prime, construction_size,
    reference_sizes, ConstructionCase, ModifiedFamily, ReferenceSizes, XiPolicy,
};
pub use family::{Label, SetFamily};
pub use index_family::{
    build_index_family, build_index_family_capped, verify_partition, verify_permutation_invariance,
    verify_shift_relation,
};
pub use radix::{RadixVector, Tuple};
pub use tuple_set::TupleSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("local dimension must be at least 2, got {d}")]
    InvalidDimension { d: usize },
    #[error("radix must have at least one party")]
    EmptyRadix,
    #[error("number of parties must be at least {min}, got {n}")]
    InvalidArity { n: usize, min: usize },
    #[error("digit {digit} at position {position} is outside [0, {dim})")]
    DigitOutOfRange {
        position: usize,
        digit: usize,
        dim: usize,
    },
    #[error("tuple has {found} digits, radix expects {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("cube size overflows 64 bits")]
    CubeOverflow,
    #[error("rank {rank} is outside the cube")]
    RankOutOfRange { rank: u64 },
    #[error("sets are over different radices")]
    RadixMismatch,
    #[error("operation requires a uniform local dimension")]
    NonUniformRadix,
    #[error("duplicate tuple {0}")]
    DuplicateTuple(Tuple),
    #[error("duplicate label {0}")]
    DuplicateLabel(Label),
    #[error("empty label")]
    EmptyLabel,
    #[error("sets {first} and {second} share tuple {tuple}")]
    OverlappingSets {
        first: Label,
        second: Label,
        tuple: Tuple,
    },
    #[error("not a permutation of the positions")]
    InvalidPermutation,
    #[error("enumerating {requested} tuples exceeds the cap of {cap}")]
    EnumerationCap { requested: u64, cap: u64 },
    #[error("label {label} is outside Z_{d}")]
    LabelOutOfRange { label: usize, d: usize },
    #[error("no admissible nonzero diagonal for d={d}, N={n}")]
    NoAdmissibleXi { d: usize, n: usize },
    #[error(
        "diagonal {xi} is not admissible for d={d}, N={n} (home {home} is not a selected row)"
    )]
    InadmissibleXi {
        xi: usize,
        d: usize,
        n: usize,
        home: usize,
    },
    #[error("label {0} not present in family")]
    MissingLabel(Label),
}
