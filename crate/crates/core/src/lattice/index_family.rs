use super::{CirculantMatrix, Label, LatticeError, RadixVector, SetFamily, TupleSet};
use crate::limits::DEFAULT_ENUMERATION_CAP;

/// The recursive partition `{G_i}` of `Z_d^N` with the default enumeration cap.
pub fn build_index_family(d: usize, n: usize) -> Result<SetFamily, LatticeError> {
    build_index_family_capped(d, n, DEFAULT_ENUMERATION_CAP)
}

/// Builds `G_i` for `i ∈ Z_d` level by level: `G^1_i = {i}` and
/// `G^N_i = ∪_j {(i − j) mod d} × G^{N−1}_j`.
pub fn build_index_family_capped(d: usize, n: usize, cap: u64) -> Result<SetFamily, LatticeError> {
    let radix = RadixVector::uniform(d, n)?;
    if radix.cube_size() > cap {
        return Err(LatticeError::EnumerationCap {
            requested: radix.cube_size(),
            cap,
        });
    }
    let m = CirculantMatrix::new(d)?;
    let mut level: Vec<Vec<u64>> = (0..d as u64).map(|i| vec![i]).collect();
    let mut block = d as u64;
    for _ in 1..n {
        let next = (0..d)
            .map(|i| {
                // Leading digit decreases as j increases, so emit columns in
                // reverse to keep ranks sorted without a sort.
                let mut ranks = Vec::with_capacity(level[0].len() * d);
                let mut cols: Vec<usize> = (0..d).collect();
                cols.sort_by_key(|&j| m.entry(i, j));
                for j in cols {
                    let lead = m.entry(i, j) as u64 * block;
                    ranks.extend(level[j].iter().map(|&r| lead + r));
                }
                ranks
            })
            .collect();
        level = next;
        block *= d as u64;
    }
    let sets = level.into_iter().enumerate().map(|(i, ranks)| {
        (
            Label::Index(i),
            TupleSet::from_sorted_ranks(radix.clone(), ranks),
        )
    });
    SetFamily::new(radix.clone(), sets)
}

/// Members pairwise disjoint and jointly covering the cube.
pub fn verify_partition(family: &SetFamily) -> bool {
    let union = family.union();
    union.len() == family.total_len() && union.len() as u64 == family.radix().cube_size()
}

/// Whether the set is fixed by every permutation of positions. Adjacent
/// transpositions generate the symmetric group, so only those are tried.
pub fn verify_permutation_invariance(set: &TupleSet) -> Result<bool, LatticeError> {
    if set.radix().uniform_dim().is_none() {
        return Err(LatticeError::NonUniformRadix);
    }
    for p in 1..set.radix().len() {
        if set.swapped(p - 1, p)? != *set {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that each `N`-party set is assembled from the `(N−1)`-party sets
/// along the circulant rows, and that shifting every label by one commutes
/// with that assembly.
pub fn verify_shift_relation(fam_n: &SetFamily, fam_nm1: &SetFamily) -> Result<bool, LatticeError> {
    let d = fam_n
        .radix()
        .uniform_dim()
        .ok_or(LatticeError::NonUniformRadix)?;
    if fam_nm1.radix().uniform_dim() != Some(d) {
        return Err(LatticeError::RadixMismatch);
    }
    let n = fam_n.radix().len();
    if fam_nm1.radix().len() + 1 != n {
        return Err(LatticeError::ArityMismatch {
            expected: n - 1,
            found: fam_nm1.radix().len(),
        });
    }
    let m = CirculantMatrix::new(d)?;
    let block = fam_nm1.radix().cube_size();
    let lower: Option<Vec<&TupleSet>> = (0..d).map(|j| fam_nm1.get(&Label::Index(j))).collect();
    let upper: Option<Vec<&TupleSet>> = (0..d).map(|i| fam_n.get(&Label::Index(i))).collect();
    let (Some(lower), Some(upper)) = (lower, upper) else {
        return Ok(false);
    };
    let assemble = |i: usize, shift: usize| -> Vec<u64> {
        let mut ranks: Vec<u64> = (0..d)
            .flat_map(|j| {
                let lead = m.entry(i, j) as u64 * block;
                lower[(j + d - shift) % d]
                    .ranks()
                    .iter()
                    .map(move |&r| lead + r)
            })
            .collect();
        ranks.sort_unstable();
        ranks
    };
    for i in 0..d {
        if assemble(i, 0) != upper[i].ranks() {
            return Ok(false);
        }
        // Label i−1 from row i with every lower label shifted down by one.
        if assemble(i, 1) != upper[(i + d - 1) % d].ranks() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Tuple;

    fn tuples(set: &TupleSet) -> Vec<Vec<usize>> {
        set.iter().map(|t| t.0).collect()
    }

    fn digit_sum_oracle(d: usize, n: usize, i: usize) -> Vec<Vec<usize>> {
        let radix = RadixVector::uniform(d, n).unwrap();
        (0..radix.cube_size())
            .map(|r| radix.unrank(r).0)
            .filter(|t| t.iter().sum::<usize>() % d == i)
            .collect()
    }

    #[test]
    fn small_families_by_hand() {
        let f = build_index_family(2, 2).unwrap();
        assert_eq!(
            tuples(f.get(&Label::Index(0)).unwrap()),
            vec![vec![0, 0], vec![1, 1]]
        );
        assert_eq!(
            tuples(f.get(&Label::Index(1)).unwrap()),
            vec![vec![0, 1], vec![1, 0]]
        );
        let f = build_index_family(3, 2).unwrap();
        assert_eq!(
            tuples(f.get(&Label::Index(0)).unwrap()),
            vec![vec![0, 0], vec![1, 2], vec![2, 1]]
        );
        assert_eq!(
            tuples(f.get(&Label::Index(2)).unwrap()),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        let f = build_index_family(3, 1).unwrap();
        for i in 0..3 {
            assert_eq!(tuples(f.get(&Label::Index(i)).unwrap()), vec![vec![i]]);
        }
    }

    #[test]
    fn matches_digit_sum_classes() {
        for d in 2..=5 {
            for n in 1..=4 {
                let f = build_index_family(d, n).unwrap();
                for i in 0..d {
                    let got = tuples(f.get(&Label::Index(i)).unwrap());
                    assert_eq!(got, digit_sum_oracle(d, n, i), "d={d} n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            build_index_family_capped(3, 4, 80),
            Err(LatticeError::EnumerationCap {
                requested: 81,
                cap: 80
            })
        ));
        assert!(build_index_family_capped(3, 4, 81).is_ok());
        assert!(build_index_family(1, 3).is_err());
    }

    #[test]
    fn partition_negatives() {
        let f = build_index_family(3, 2).unwrap();
        assert!(verify_partition(&f));
        let g0 = f.get(&Label::Index(0)).unwrap().clone();
        let dup = SetFamily::new_allow_overlap(
            f.radix().clone(),
            vec![
                (Label::Index(0), g0.clone()),
                (Label::Index(1), g0.clone()),
                (Label::Index(2), f.get(&Label::Index(2)).unwrap().clone()),
            ],
        )
        .unwrap();
        assert!(!verify_partition(&dup));
        let missing = f.without_label(&Label::Index(2)).unwrap();
        assert!(!verify_partition(&missing));
    }

    #[test]
    fn permutation_invariance_examples() {
        let f = build_index_family(3, 2).unwrap();
        assert_eq!(
            verify_permutation_invariance(f.get(&Label::Index(0)).unwrap()),
            Ok(true)
        );
        let radix = RadixVector::uniform(2, 2).unwrap();
        let single = TupleSet::from_tuples(radix, vec![Tuple(vec![0, 1])]).unwrap();
        assert_eq!(verify_permutation_invariance(&single), Ok(false));
        let mixed = TupleSet::empty(RadixVector::new(vec![2, 3]).unwrap());
        assert_eq!(
            verify_permutation_invariance(&mixed),
            Err(LatticeError::NonUniformRadix)
        );
    }

    #[test]
    fn shift_relation_examples() {
        let f3 = build_index_family(3, 3).unwrap();
        let f2 = build_index_family(3, 2).unwrap();
        assert_eq!(verify_shift_relation(&f3, &f2), Ok(true));
        assert_eq!(
            verify_shift_relation(
                &build_index_family(4, 2).unwrap(),
                &build_index_family(4, 1).unwrap()
            ),
            Ok(true)
        );
        let sets = f3.clone().into_sets();
        let swapped = SetFamily::new(
            f3.radix().clone(),
            vec![
                (Label::Index(0), sets[&Label::Index(1)].clone()),
                (Label::Index(1), sets[&Label::Index(0)].clone()),
                (Label::Index(2), sets[&Label::Index(2)].clone()),
            ],
        )
        .unwrap();
        assert_eq!(verify_shift_relation(&swapped, &f2), Ok(false));
        assert!(verify_shift_relation(&f3, &f3).is_err());
    }
}
