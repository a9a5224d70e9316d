//! Phase states on tuple-set supports, orthogonality and Schmidt-rank checks.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{Label, RadixVector, SetFamily, TupleSet};

pub const DEFAULT_SCHMIDT_TOL: f64 = 1e-9;
/// Dense Gram off-diagonals must stay below this times the set size.
pub const GRAM_TOL_PER_STATE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("support of {0} is empty")]
    EmptySupport(Label),
    #[error("state has zero norm")]
    ZeroState,
    #[error("state sets are over different radices")]
    RadixMismatch,
    #[error("supports of {first} and {second} overlap")]
    OverlappingSupports { first: Label, second: Label },
    #[error("bipartition {0:?} is not a nonempty proper subset of the parties")]
    InvalidBipartition(Vec<usize>),
    #[error("entanglement needs at least two parties")]
    TooFewParties,
    #[error("bijection is not a permutation of 0..{0}")]
    InvalidBijection(usize),
    #[error("state index {k} out of range for a set of {s}")]
    IndexOutOfRange { k: usize, s: usize },
}

/// The `s` states `Σ_j ω_s^{k·f(j)} |j⟩`, `k ∈ Z_s`, on one support, left
/// unnormalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseStateSet {
    label: Label,
    support: TupleSet,
    /// `f` on the support in canonical order.
    bijection: Vec<usize>,
}

/// Uses the lexicographic rank inside the support as the bijection.
pub fn build_state_set(label: Label, support: TupleSet) -> Result<PhaseStateSet, StateError> {
    let s = support.len();
    PhaseStateSet::with_bijection(label, support, (0..s).collect())
}

/// One state set per family member, in label order.
pub fn state_sets(family: &SetFamily) -> Result<Vec<PhaseStateSet>, StateError> {
    family
        .iter()
        .map(|(l, s)| build_state_set(l.clone(), s.clone()))
        .collect()
}

impl PhaseStateSet {
    /// Explicit bijection: the `p`-th support tuple in canonical order gets
    /// phase index `bijection[p]`.
    pub fn with_bijection(
        label: Label,
        support: TupleSet,
        bijection: Vec<usize>,
    ) -> Result<Self, StateError> {
        let s = support.len();
        if s == 0 {
            return Err(StateError::EmptySupport(label));
        }
        let mut seen = vec![false; s];
        if bijection.len() != s
            || bijection
                .iter()
                .any(|&v| v >= s || std::mem::replace(&mut seen[v], true))
        {
            return Err(StateError::InvalidBijection(s));
        }
        Ok(Self {
            label,
            support,
            bijection,
        })
    }

    pub fn label(&self) -> &Label {
        &self.label
    }

    pub fn support(&self) -> &TupleSet {
        &self.support
    }

    pub fn radix(&self) -> &RadixVector {
        self.support.radix()
    }

    /// Phase modulus, equal to the support size.
    pub fn s(&self) -> usize {
        self.support.len()
    }

    pub fn bijection(&self) -> &[usize] {
        &self.bijection
    }

    /// Exponent of `ω_s` carried by state `k` on the `p`-th support tuple.
    pub fn exponent(&self, k: usize, p: usize) -> usize {
        (k % self.s()) * self.bijection[p] % self.s()
    }

    pub fn amplitude(&self, k: usize, p: usize) -> Complex64 {
        let e = self.exponent(k, p);
        Complex64::cis(TAU * e as f64 / self.s() as f64)
    }

    /// Amplitudes of state `k` over the support, in canonical order.
    pub fn support_amplitudes(&self, k: usize) -> Vec<Complex64> {
        (0..self.s()).map(|p| self.amplitude(k, p)).collect()
    }

    pub fn dense(&self, k: usize) -> Result<DenseState, StateError> {
        if k >= self.s() {
            return Err(StateError::IndexOutOfRange { k, s: self.s() });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.radix().cube_size() as usize];
        for (p, &r) in self.support.ranks().iter().enumerate() {
            amplitudes[r as usize] = self.amplitude(k, p);
        }
        Ok(DenseState {
            radix: self.radix().clone(),
            amplitudes,
        })
    }

    /// Exact orthogonality certificate.
    ///
    /// The overlap of states `k` and `k + m` is `Σ_t ω_s^{m t}`. For each
    /// `m ≢ 0` the multiset `{m t mod s}` is checked, in integers, to be
    /// invariant under translation by `h = gcd(m, s) < s`; the sum then equals
    /// itself times `ω_s^h ≠ 1` and must vanish.
    pub fn symbolic_orthogonal(&self) -> bool {
        let s = self.s();
        let mut hist = vec![0usize; s];
        for m in 1..s {
            hist.iter_mut().for_each(|c| *c = 0);
            for &t in &self.bijection {
                hist[m * t % s] += 1;
            }
            let h = m.gcd(&s);
            if h >= s || (0..s).any(|e| hist[e] != hist[(e + h) % s]) {
                return false;
            }
        }
        true
    }
}

/// A state vector over the full cube, indexed by tuple rank.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub radix: RadixVector,
    pub amplitudes: Vec<Complex64>,
}

impl DenseState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// A split of the parties into two nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(n: usize, left: &[usize]) -> Result<Self, StateError> {
        let mut mask = vec![false; n];
        for &p in left {
            if p >= n || std::mem::replace(&mut mask[p], true) {
                return Err(StateError::InvalidBipartition(left.to_vec()));
            }
        }
        if left.is_empty() || left.len() == n {
            return Err(StateError::InvalidBipartition(left.to_vec()));
        }
        let left = (0..n).filter(|&p| mask[p]).collect();
        let right = (0..n).filter(|&p| !mask[p]).collect();
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    /// The `2^{N−1} − 1` unordered bipartitions, each listed with party 0 on
    /// the left.
    pub fn all(n: usize) -> Vec<Bipartition> {
        if n < 2 {
            return Vec::new();
        }
        (0..(1u64 << (n - 1)) - 1)
            .map(|bits| {
                let left: Vec<usize> = std::iter::once(0)
                    .chain((1..n).filter(|p| bits >> (p - 1) & 1 == 1))
                    .collect();
                Bipartition::new(n, &left).expect("valid by construction")
            })
            .collect()
    }
}

fn group_index(radix: &RadixVector, digits: &[usize], parties: &[usize]) -> usize {
    parties
        .iter()
        .fold(0, |acc, &p| acc * radix.dims()[p] + digits[p])
}

fn group_size(radix: &RadixVector, parties: &[usize]) -> usize {
    parties.iter().map(|&p| radix.dims()[p]).product()
}

/// Number of singular values of the `left × right` reshaping above
/// `tol × σ_max`.
pub fn schmidt_rank(state: &DenseState, cut: &Bipartition, tol: f64) -> Result<usize, StateError> {
    let radix = &state.radix;
    let n = radix.len();
    if cut.left.iter().chain(&cut.right).any(|&p| p >= n) || cut.left.len() + cut.right.len() != n {
        return Err(StateError::InvalidBipartition(cut.left.clone()));
    }
    let rows = group_size(radix, &cut.left);
    let cols = group_size(radix, &cut.right);
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    let mut digits = vec![0; n];
    let mut any = false;
    for (r, &a) in state.amplitudes.iter().enumerate() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        any = true;
        radix.digits_into(r as u64, &mut digits);
        m[(
            group_index(radix, &digits, &cut.left),
            group_index(radix, &digits, &cut.right),
        )] = a;
    }
    if !any {
        return Err(StateError::ZeroState);
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max <= 0.0 {
        return Err(StateError::ZeroState);
    }
    Ok(sv.iter().filter(|&&x| x > tol * max).count())
}

fn check_shared_radix(sets: &[PhaseStateSet]) -> Result<(), StateError> {
    if let Some(first) = sets.first() {
        if sets.iter().any(|s| s.radix() != first.radix()) {
            return Err(StateError::RadixMismatch);
        }
    }
    Ok(())
}

fn check_disjoint(sets: &[PhaseStateSet]) -> Result<(), StateError> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if !a.support().is_disjoint(b.support()) {
                return Err(StateError::OverlappingSupports {
                    first: a.label().clone(),
                    second: b.label().clone(),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub states: usize,
    /// Every set passed the exact character-sum certificate.
    pub symbolic_ok: bool,
    /// Largest dense off-diagonal magnitude, when the dense path ran.
    pub max_off_diagonal: Option<f64>,
    /// Dense off-diagonals all within `GRAM_TOL_PER_STATE × s`.
    pub numeric_ok: Option<bool>,
}

impl GramReport {
    pub fn orthogonal(&self) -> bool {
        self.symbolic_ok && self.numeric_ok.unwrap_or(true)
    }
}

/// Orthogonality of all states across all sets. Sets with disjoint
/// supports are orthogonal outright; within a set the symbolic certificate
/// decides. With `dense`, the full Gram matrix is also formed numerically.
pub fn gram_check(sets: &[PhaseStateSet], dense: bool) -> Result<GramReport, StateError> {
    check_shared_radix(sets)?;
    check_disjoint(sets)?;
    let symbolic_ok = sets.par_iter().all(|s| s.symbolic_orthogonal());
    let states: usize = sets.iter().map(PhaseStateSet::s).sum();
    let (max_off_diagonal, numeric_ok) = if dense {
        let mut vecs = Vec::with_capacity(states);
        for set in sets {
            for k in 0..set.s() {
                vecs.push((set.s(), set.dense(k)?));
            }
        }
        let (max, ok) = (0..vecs.len())
            .into_par_iter()
            .map(|i| {
                let mut max = 0.0f64;
                let mut ok = true;
                for j in i + 1..vecs.len() {
                    let v = vecs[i].1.inner(&vecs[j].1).norm();
                    max = max.max(v);
                    let scale = vecs[i].0.max(vecs[j].0) as f64;
                    ok &= v <= GRAM_TOL_PER_STATE * scale;
                }
                (max, ok)
            })
            .reduce(|| (0.0, true), |a, b| (a.0.max(b.0), a.1 && b.1));
        (Some(max), Some(ok))
    } else {
        (None, None)
    };
    Ok(GramReport {
        states,
        symbolic_ok,
        max_off_diagonal,
        numeric_ok,
    })
}

/// A state that is a product across some cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductWitness {
    pub label: Label,
    pub k: usize,
    pub cut: Bipartition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntanglementReport {
    pub states: usize,
    pub cuts: usize,
    pub failures: Vec<ProductWitness>,
}

impl EntanglementReport {
    pub fn genuinely_entangled(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Schmidt rank at least 2 for every state across every bipartition.
pub fn genuine_entanglement_check(
    sets: &[PhaseStateSet],
    tol: f64,
) -> Result<EntanglementReport, StateError> {
    check_shared_radix(sets)?;
    let Some(first) = sets.first() else {
        return Ok(EntanglementReport {
            states: 0,
            cuts: 0,
            failures: Vec::new(),
        });
    };
    let n = first.radix().len();
    if n < 2 {
        return Err(StateError::TooFewParties);
    }
    let cuts = Bipartition::all(n);
    let jobs: Vec<(&PhaseStateSet, usize)> = sets
        .iter()
        .flat_map(|s| (0..s.s()).map(move |k| (s, k)))
        .collect();
    let results: Result<Vec<Vec<ProductWitness>>, StateError> = jobs
        .par_iter()
        .map(|&(set, k)| {
            let state = set.dense(k)?;
            let mut bad = Vec::new();
            for cut in &cuts {
                if schmidt_rank(&state, cut, tol)? < 2 {
                    bad.push(ProductWitness {
                        label: set.label().clone(),
                        k,
                        cut: cut.clone(),
                    });
                }
            }
            Ok(bad)
        })
        .collect();
    Ok(EntanglementReport {
        states: jobs.len(),
        cuts: cuts.len(),
        failures: results?.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_index_family, Tuple};

    fn support(d: usize, tuples: &[&[usize]]) -> TupleSet {
        TupleSet::from_tuples(
            RadixVector::uniform(d, tuples[0].len()).unwrap(),
            tuples.iter().map(|t| Tuple(t.to_vec())),
        )
        .unwrap()
    }

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn bell_pair_states() {
        let set = build_state_set(Label::Index(0), support(2, &[&[0, 0], &[1, 1]])).unwrap();
        let plus = set.dense(0).unwrap();
        let minus = set.dense(1).unwrap();
        assert!(close(plus.amplitudes[0], 1.0, 0.0) && close(plus.amplitudes[3], 1.0, 0.0));
        assert!(close(minus.amplitudes[0], 1.0, 0.0) && close(minus.amplitudes[3], -1.0, 0.0));
        assert_eq!(plus.amplitudes[1], Complex64::new(0.0, 0.0));
        let cut = Bipartition::new(2, &[0]).unwrap();
        assert_eq!(schmidt_rank(&plus, &cut, DEFAULT_SCHMIDT_TOL), Ok(2));
    }

    #[test]
    fn d3_phases_follow_lexicographic_rank() {
        let f = build_index_family(3, 2).unwrap();
        let set =
            build_state_set(Label::Index(0), f.get(&Label::Index(0)).unwrap().clone()).unwrap();
        // support order (0,0), (1,2), (2,1)
        assert_eq!(set.exponent(1, 0), 0);
        assert_eq!(set.exponent(1, 1), 1);
        assert_eq!(set.exponent(2, 2), 1);
        let psi = set.dense(1).unwrap();
        let w = Complex64::cis(TAU / 3.0);
        assert!((psi.amplitudes[5] - w).norm() < 1e-12);
        assert!((psi.amplitudes[7] - w * w).norm() < 1e-12);
    }

    #[test]
    fn singleton_support_is_basis_state() {
        let set = build_state_set(Label::Index(0), support(2, &[&[0, 0, 0]])).unwrap();
        assert_eq!(set.s(), 1);
        assert!(set.symbolic_orthogonal());
        let psi = set.dense(0).unwrap();
        for cut in Bipartition::all(3) {
            assert_eq!(schmidt_rank(&psi, &cut, DEFAULT_SCHMIDT_TOL), Ok(1));
        }
    }

    #[test]
    fn empty_and_zero_rejected() {
        let radix = RadixVector::uniform(2, 2).unwrap();
        assert!(matches!(
            build_state_set(Label::Index(0), TupleSet::empty(radix.clone())),
            Err(StateError::EmptySupport(_))
        ));
        let zero = DenseState {
            radix,
            amplitudes: vec![Complex64::new(0.0, 0.0); 4],
        };
        assert_eq!(
            schmidt_rank(&zero, &Bipartition::new(2, &[0]).unwrap(), 1e-9),
            Err(StateError::ZeroState)
        );
    }

    #[test]
    fn bipartition_enumeration() {
        assert_eq!(Bipartition::all(2).len(), 1);
        assert_eq!(Bipartition::all(4).len(), 7);
        assert!(Bipartition::all(4).iter().all(|b| b.left()[0] == 0));
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(3, &[0, 0]).is_err());
    }

    #[test]
    fn gram_on_bell_basis_and_overlap() {
        let f = build_index_family(2, 2).unwrap();
        let sets = state_sets(&f).unwrap();
        let report = gram_check(&sets, true).unwrap();
        assert!(report.orthogonal());
        assert_eq!(report.states, 4);
        assert!(report.max_off_diagonal.unwrap() < 1e-15);
        let dup = vec![sets[0].clone(), sets[0].clone()];
        assert!(matches!(
            gram_check(&dup, false),
            Err(StateError::OverlappingSupports { .. })
        ));
    }

    #[test]
    fn entanglement_of_bell_and_product_bases() {
        let bell = state_sets(&build_index_family(2, 2).unwrap()).unwrap();
        assert!(genuine_entanglement_check(&bell, DEFAULT_SCHMIDT_TOL)
            .unwrap()
            .genuinely_entangled());
        let product = state_sets(&SetFamily::computational_basis(
            RadixVector::uniform(2, 2).unwrap(),
        ))
        .unwrap();
        let report = genuine_entanglement_check(&product, DEFAULT_SCHMIDT_TOL).unwrap();
        assert_eq!(report.failures.len(), 4);
    }

    #[test]
    fn bad_bijection_rejected() {
        let s = support(2, &[&[0, 0], &[1, 1]]);
        assert!(PhaseStateSet::with_bijection(Label::Index(0), s.clone(), vec![0, 0]).is_err());
        assert!(PhaseStateSet::with_bijection(Label::Index(0), s, vec![1, 0]).is_ok());
    }
}
