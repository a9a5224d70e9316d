use std::fmt;

use super::LatticeError;

/// Local dimensions `(d_1, …, d_N)`, one per party.
///
/// Tuples over a radix are identified with their mixed-radix rank, first
/// position most significant, so numeric rank order coincides with
/// lexicographic digit order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RadixVector {
    dims: Vec<usize>,
    strides: Vec<u64>,
    cube: u64,
}

impl RadixVector {
    pub fn new(dims: Vec<usize>) -> Result<Self, LatticeError> {
        if dims.is_empty() {
            return Err(LatticeError::EmptyRadix);
        }
        Self::build(dims)
    }

    pub fn uniform(d: usize, n: usize) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::InvalidArity { n, min: 1 });
        }
        Self::new(vec![d; n])
    }

    fn build(dims: Vec<usize>) -> Result<Self, LatticeError> {
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(LatticeError::InvalidDimension { d });
        }
        let mut strides = vec![1u64; dims.len()];
        let mut cube: u64 = 1;
        for p in (0..dims.len()).rev() {
            strides[p] = cube;
            cube = cube
                .checked_mul(dims[p] as u64)
                .ok_or(LatticeError::CubeOverflow)?;
        }
        Ok(Self {
            dims,
            strides,
            cube,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of parties `N`.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Common local dimension if every party has the same one.
    pub fn uniform_dim(&self) -> Option<usize> {
        let first = *self.dims.first()?;
        self.dims.iter().all(|&d| d == first).then_some(first)
    }

    /// Number of tuples in the full cube `∏ d_p`.
    pub fn cube_size(&self) -> u64 {
        self.cube
    }

    pub fn validate(&self, digits: &[usize]) -> Result<(), LatticeError> {
        if digits.len() != self.dims.len() {
            return Err(LatticeError::ArityMismatch {
                expected: self.dims.len(),
                found: digits.len(),
            });
        }
        for (position, (&digit, &dim)) in digits.iter().zip(&self.dims).enumerate() {
            if digit >= dim {
                return Err(LatticeError::DigitOutOfRange {
                    position,
                    digit,
                    dim,
                });
            }
        }
        Ok(())
    }

    /// Mixed-radix rank of an already validated digit string.
    pub fn rank(&self, digits: &[usize]) -> u64 {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.strides)
            .map(|(&g, &s)| g as u64 * s)
            .sum()
    }

    pub fn digit(&self, rank: u64, position: usize) -> usize {
        ((rank / self.strides[position]) % self.dims[position] as u64) as usize
    }

    pub fn digits_into(&self, rank: u64, out: &mut [usize]) {
        for (p, slot) in out.iter_mut().enumerate() {
            *slot = self.digit(rank, p);
        }
    }

    pub fn unrank(&self, rank: u64) -> Tuple {
        let mut digits = vec![0; self.dims.len()];
        self.digits_into(rank, &mut digits);
        Tuple(digits)
    }

    /// Radix with `position` removed. May be empty (zero parties) when the
    /// source has a single party; the empty radix has a one-point cube.
    pub fn without(&self, position: usize) -> RadixVector {
        let mut dims = self.dims.clone();
        dims.remove(position);
        Self::build(dims).expect("sub-radix of a valid radix is valid")
    }

    /// Rank of the tuple obtained by deleting `position` from the tuple with
    /// rank `rank`.
    pub fn residual_rank(&self, rank: u64, position: usize) -> u64 {
        let stride = self.strides[position];
        let high = rank / (stride * self.dims[position] as u64);
        let low = rank % stride;
        high * stride + low
    }

    /// Inverse of [`residual_rank`](Self::residual_rank): insert `digit` at
    /// `position` into a residual tuple.
    pub fn insert_rank(&self, residual: u64, position: usize, digit: usize) -> u64 {
        let stride = self.strides[position];
        let high = residual / stride;
        let low = residual % stride;
        (high * self.dims[position] as u64 + digit as u64) * stride + low
    }
}

impl fmt::Display for RadixVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// A digit string `(i_1, …, i_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple(pub Vec<usize>);

impl Tuple {
    /// The constant tuple `(ξ, …, ξ)` of length `n`.
    pub fn constant(xi: usize, n: usize) -> Self {
        Tuple(vec![xi; n])
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Tuple {
    fn from(digits: Vec<usize>) -> Self {
        Tuple(digits)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}
