//! Orthogonality-preserving operators on an all-but-one cut, by linear algebra.
//!
//! On cut `k` an operator `I_k ⊗ Π` preserves orthogonality of a state set
//! when `⟨a|I_k ⊗ Π|b⟩ = 0` for every ordered pair of distinct states. With
//! `Π` Hermitian these are real-linear equations in `D²` real unknowns; the
//! measurement is forced to be trivial exactly when the solution space is the
//! span of the identity.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::RadixVector;
use crate::limits::DEFAULT_OPERATOR_CAP;
use crate::states::PhaseStateSet;

pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Coefficients below this are treated as exact zeros.
pub const SNAP_TOL: f64 = 1e-10;
/// Identity must satisfy each normalized row to this accuracy.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("operator dimension D={dim} gives {unknowns} unknowns, above the cap of {cap}; try --combinatorial-only or raise QNONLOC_CAP dim=")]
    OperatorCap { dim: usize, unknowns: u64, cap: u64 },
    #[error("party index {k} out of range for {n} parties")]
    CutOutOfRange { k: usize, n: usize },
    #[error("state sets are over different radices")]
    RadixMismatch,
    #[error("no states given")]
    NoStates,
    #[error("states are not orthogonal; the identity violates a constraint by {residual:e}")]
    IdentityInfeasible { residual: f64 },
    #[error("solution space has dimension {dim} and does not contain the identity (internal consistency failure)")]
    InternalConsistency { dim: usize },
    #[error("singular value decomposition did not converge")]
    SvdFailed,
}

/// Where a row came from: real or imaginary part of `⟨a|I⊗Π|b⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowOrigin {
    pub a: usize,
    pub b: usize,
    pub imaginary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub origin: RowOrigin,
    /// `(unknown index, coefficient)`, ascending by index, unit length.
    pub entries: Vec<(u32, f64)>,
}

/// Real-linear constraints on the Hermitian parametrization of `Π`.
///
/// Unknown `p·D + p` is `Π_pp`; for `p < q`, unknowns `p·D + q` and
/// `q·D + p` are `√2·Re Π_pq` and `√2·Im Π_pq`. The map is an isometry
/// between the Frobenius norm and the Euclidean one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub k: usize,
    pub dim: usize,
    pub states: usize,
    /// Rows generated, including those that vanished identically.
    pub total_rows: usize,
    pub zero_rows: usize,
    pub rows: Vec<SparseRow>,
    /// Largest `|Σ_p row[pD+p]|` over the normalized rows.
    pub identity_residual: f64,
}

impl ConstraintSystem {
    pub fn unknowns(&self) -> usize {
        self.dim * self.dim
    }
}

/// One state set's support, split by kept digit into `(residual, position)`.
struct CutSupport<'a> {
    set: &'a PhaseStateSet,
    by_digit: Vec<Vec<(u32, usize)>>,
}

impl<'a> CutSupport<'a> {
    fn new(set: &'a PhaseStateSet, k: usize) -> Self {
        let radix = set.radix();
        let mut by_digit = vec![Vec::new(); radix.dims()[k]];
        for (pos, &r) in set.support().ranks().iter().enumerate() {
            by_digit[radix.digit(r, k)].push((radix.residual_rank(r, k) as u32, pos));
        }
        Self { set, by_digit }
    }
}

fn check_cut(sets: &[PhaseStateSet], k: usize) -> Result<&RadixVector, OracleError> {
    let radix = sets.first().ok_or(OracleError::NoStates)?.radix();
    if sets.iter().any(|s| s.radix() != radix) {
        return Err(OracleError::RadixMismatch);
    }
    if k >= radix.len() {
        return Err(OracleError::CutOutOfRange { k, n: radix.len() });
    }
    Ok(radix)
}

/// Operator dimension `D = ∏_{p≠k} d_p`, guarded by the cap on `D²`.
pub fn operator_dim(radix: &RadixVector, k: usize, cap: u64) -> Result<usize, OracleError> {
    let dim = radix.without(k).cube_size();
    let unknowns = dim.saturating_mul(dim);
    if unknowns > cap {
        return Err(OracleError::OperatorCap {
            dim: dim as usize,
            unknowns,
            cap,
        });
    }
    Ok(dim as usize)
}

pub fn assemble_constraints(
    sets: &[PhaseStateSet],
    k: usize,
    operator_cap: u64,
) -> Result<ConstraintSystem, OracleError> {
    let radix = check_cut(sets, k)?;
    let dim = operator_dim(radix, k, operator_cap)?;
    let supports: Vec<CutSupport> = sets.iter().map(|s| CutSupport::new(s, k)).collect();
    let states: Vec<(usize, usize)> = supports
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.set.s()).map(move |j| (i, j)))
        .collect();
    let amplitudes: Vec<Vec<Vec<Complex64>>> = sets
        .iter()
        .map(|s| (0..s.s()).map(|j| s.support_amplitudes(j)).collect())
        .collect();

    let pairs: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|a| {
            (0..states.len())
                .filter(move |&b| b != a)
                .map(move |b| (a, b))
        })
        .collect();
    let total_rows = 2 * pairs.len();
    let n = dim * dim;

    let rows: Vec<(SparseRow, SparseRow)> = pairs
        .par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); n], Vec::new()),
            |(c, touched), &(a, b)| {
                let (sa, ka) = states[a];
                let (sb, kb) = states[b];
                let (amp_a, amp_b) = (&amplitudes[sa][ka], &amplitudes[sb][kb]);
                touched.clear();
                for (block_a, block_b) in supports[sa].by_digit.iter().zip(&supports[sb].by_digit) {
                    for &(p, pa) in block_a {
                        let ca = amp_a[pa].conj();
                        for &(q, pb) in block_b {
                            let idx = p as usize * dim + q as usize;
                            if c[idx] == Complex64::new(0.0, 0.0) {
                                touched.push(idx);
                            }
                            c[idx] += ca * amp_b[pb];
                        }
                    }
                }
                let rows = coefficient_rows(c, touched, dim, a, b);
                for &idx in touched.iter() {
                    c[idx] = Complex64::new(0.0, 0.0);
                }
                rows
            },
        )
        .collect();

    let mut kept = Vec::with_capacity(total_rows);
    let mut zero_rows = 0;
    let mut identity_residual = 0.0f64;
    for (re, im) in rows {
        for row in [re, im] {
            if row.entries.is_empty() {
                zero_rows += 1;
                continue;
            }
            let trace: f64 = row
                .entries
                .iter()
                .filter(|(i, _)| (*i as usize).is_multiple_of(dim + 1))
                .map(|(_, v)| v)
                .sum();
            identity_residual = identity_residual.max(trace.abs());
            kept.push(row);
        }
    }
    if identity_residual > IDENTITY_TOL {
        return Err(OracleError::IdentityInfeasible {
            residual: identity_residual,
        });
    }
    Ok(ConstraintSystem {
        k,
        dim,
        states: states.len(),
        total_rows,
        zero_rows,
        rows: kept,
        identity_residual,
    })
}

/// Real and imaginary rows of `Σ_{p,q} C_pq Π_pq = 0`, snapped and
/// normalized. `touched` lists the nonzero slots of `c` and is left sorted.
fn coefficient_rows(
    c: &[Complex64],
    touched: &mut Vec<usize>,
    dim: usize,
    a: usize,
    b: usize,
) -> (SparseRow, SparseRow) {
    let mut re: Vec<(u32, f64)> = Vec::new();
    let mut im: Vec<(u32, f64)> = Vec::new();
    touched.sort_unstable();
    touched.dedup();
    // Visit each unordered pair {p, q} once, from whichever slot is touched.
    let mut seen = std::collections::HashSet::new();
    for &idx in touched.iter() {
        let (p, q) = (idx / dim, idx % dim);
        if p == q {
            re.push((idx as u32, c[idx].re));
            im.push((idx as u32, c[idx].im));
            continue;
        }
        let (lo, hi) = (p.min(q), p.max(q));
        if !seen.insert((lo, hi)) {
            continue;
        }
        let upper = c[lo * dim + hi];
        let lower = c[hi * dim + lo];
        let (x, y) = ((lo * dim + hi) as u32, (hi * dim + lo) as u32);
        re.push((x, (upper.re + lower.re) * FRAC_1_SQRT_2));
        re.push((y, (lower.im - upper.im) * FRAC_1_SQRT_2));
        im.push((x, (upper.im + lower.im) * FRAC_1_SQRT_2));
        im.push((y, (upper.re - lower.re) * FRAC_1_SQRT_2));
    }
    let finish = |mut entries: Vec<(u32, f64)>, imaginary: bool| {
        entries.retain(|&(_, v)| v.abs() >= SNAP_TOL);
        entries.sort_unstable_by_key(|&(i, _)| i);
        let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        for e in &mut entries {
            e.1 /= norm;
        }
        SparseRow {
            origin: RowOrigin { a, b, imaginary },
            entries,
        }
    };
    (finish(re, false), finish(im, true))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullspaceResult {
    pub dim: usize,
    pub dimension: usize,
    /// Orthonormal basis in the real parametrization.
    pub basis: Vec<Vec<f64>>,
    /// All singular values of the accumulated triangular factor, descending.
    pub singular_values: Vec<f64>,
    /// Smallest kept singular value over the largest, if any was kept.
    pub sv_gap: Option<f64>,
    /// Largest discarded singular value over the largest, if any was discarded.
    pub largest_discarded: Option<f64>,
    pub warning: Option<String>,
}

impl NullspaceResult {
    pub fn basis_operator(&self, i: usize) -> HermitianMatrix {
        HermitianMatrix::from_params(self.dim, &self.basis[i])
    }
}

/// A dense `D × D` Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn from_params(dim: usize, u: &[f64]) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for p in 0..dim {
            entries[p * dim + p] = Complex64::new(u[p * dim + p], 0.0);
            for q in p + 1..dim {
                let z = Complex64::new(u[p * dim + q], u[q * dim + p]) * FRAC_1_SQRT_2;
                entries[p * dim + q] = z;
                entries[q * dim + p] = z.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        self.entries[p * self.dim + q]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|p| self.get(p, p).re).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖B − (tr B / D) I‖_F`.
    pub fn off_identity(&self) -> f64 {
        let mean = self.trace() / self.dim as f64;
        let mut acc = 0.0;
        for p in 0..self.dim {
            for q in 0..self.dim {
                let mut z = self.get(p, q);
                if p == q {
                    z -= mean;
                }
                acc += z.norm_sqr();
            }
        }
        acc.sqrt()
    }
}

fn rows_to_matrix(r: Option<&DMatrix<f64>>, batch: &[SparseRow], n: usize) -> DMatrix<f64> {
    let top = r.map_or(0, |m| m.nrows());
    let mut m = DMatrix::<f64>::zeros(top + batch.len(), n);
    if let Some(r) = r {
        m.rows_mut(0, top).copy_from(r);
    }
    for (i, row) in batch.iter().enumerate() {
        for &(j, v) in &row.entries {
            m[(top + i, j as usize)] = v;
        }
    }
    m
}

/// Right nullspace of the row matrix, accumulated batchwise into a
/// triangular factor and decided by its singular values.
pub fn hermitian_nullspace(
    system: &ConstraintSystem,
    tol: f64,
) -> Result<NullspaceResult, OracleError> {
    hermitian_nullspace_batched(system, tol, 0)
}

/// As [`hermitian_nullspace`] with an explicit batch size (0 picks `2n`).
pub fn hermitian_nullspace_batched(
    system: &ConstraintSystem,
    tol: f64,
    batch: usize,
) -> Result<NullspaceResult, OracleError> {
    let n = system.unknowns();
    let dim = system.dim;
    if system.rows.is_empty() {
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        return Ok(NullspaceResult {
            dim,
            dimension: n,
            basis,
            singular_values: Vec::new(),
            sv_gap: None,
            largest_discarded: None,
            warning: None,
        });
    }
    let batch = if batch == 0 { (2 * n).max(64) } else { batch };
    let mut r: Option<DMatrix<f64>> = None;
    for chunk in system.rows.chunks(batch) {
        let stacked = rows_to_matrix(r.as_ref(), chunk, n);
        r = Some(stacked.qr().r());
    }
    let r = r.expect("at least one batch");
    let mut square = DMatrix::<f64>::zeros(n, n);
    let h = r.nrows().min(n);
    square.rows_mut(0, h).copy_from(&r.rows(0, h));
    let svd = SVD::try_new(square, false, true, f64::EPSILON, 0).ok_or(OracleError::SvdFailed)?;
    let v_t = svd.v_t.as_ref().ok_or(OracleError::SvdFailed)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let max = singular_values[0];
    let threshold = tol * max;
    let rank = singular_values.iter().filter(|&&s| s > threshold).count();
    let basis: Vec<Vec<f64>> = order[rank..]
        .iter()
        .map(|&i| v_t.row(i).iter().copied().collect())
        .collect();
    let sv_gap = (rank > 0).then(|| singular_values[rank - 1] / max);
    let largest_discarded = (rank < n).then(|| singular_values[rank] / max);
    let warning = sv_gap.filter(|&g| g < 10.0 * tol).map(|g| {
        format!("ill-conditioned rank decision: smallest kept singular value ratio {g:e} is within 10x of the tolerance {tol:e}")
    });
    Ok(NullspaceResult {
        dim,
        dimension: n - rank,
        basis,
        singular_values,
        sv_gap,
        largest_discarded,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    /// Only multiples of the identity preserve orthogonality.
    Trivial,
    /// A Hermitian solution orthogonal to the identity, unit Frobenius norm.
    Nontrivial {
        dimension: usize,
        witness: HermitianMatrix,
    },
}

impl OracleVerdict {
    pub fn is_trivial(&self) -> bool {
        matches!(self, OracleVerdict::Trivial)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            OracleVerdict::Trivial => "trivial",
            OracleVerdict::Nontrivial { .. } => "nontrivial",
        }
    }
}

pub fn triviality_verdict(
    nullspace: &NullspaceResult,
    tol: f64,
) -> Result<OracleVerdict, OracleError> {
    let dim = nullspace.dim;
    match nullspace.dimension {
        0 => Err(OracleError::InternalConsistency { dim: 0 }),
        1 => {
            let b = nullspace.basis_operator(0);
            if b.off_identity() <= tol * b.frobenius() {
                Ok(OracleVerdict::Trivial)
            } else {
                Err(OracleError::InternalConsistency { dim: 1 })
            }
        }
        dimension => {
            // Project out the identity, whose parameter vector is the
            // diagonal indicator scaled by 1/√D.
            let scale = 1.0 / (dim as f64).sqrt();
            let diag = |i: usize| i.is_multiple_of(dim + 1);
            let witness = nullspace
                .basis
                .iter()
                .map(|v| {
                    let along: f64 = v
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| diag(*i))
                        .map(|(_, x)| x * scale)
                        .sum();
                    let w: Vec<f64> = v
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| if diag(i) { x - along * scale } else { x })
                        .collect();
                    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                    (norm, w)
                })
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("dimension at least 2");
            let (norm, mut w) = witness;
            let lead = w
                .iter()
                .copied()
                .reduce(|best, x| {
                    if x.abs() > best.abs() + 1e-12 {
                        x
                    } else {
                        best
                    }
                })
                .unwrap_or(1.0);
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            for x in &mut w {
                *x *= sign / norm;
            }
            Ok(OracleVerdict::Nontrivial {
                dimension,
                witness: HermitianMatrix::from_params(dim, &w),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub rank_tol: f64,
    /// Relative bound on the off-identity part for a trivial verdict.
    pub verdict_tol: f64,
    pub operator_cap: u64,
    /// Rows per QR batch, 0 for automatic.
    pub batch: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            verdict_tol: DEFAULT_RANK_TOL,
            operator_cap: DEFAULT_OPERATOR_CAP,
            batch: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Kept party, 0-based.
    pub k: usize,
    pub dim: usize,
    pub rows: usize,
    pub zero_rows: usize,
    pub nullspace_dim: usize,
    pub verdict: OracleVerdict,
    pub sv_gap: Option<f64>,
    pub largest_discarded: Option<f64>,
    pub identity_residual: f64,
    pub warning: Option<String>,
    pub seconds: f64,
    pub options: OracleOptions,
}

pub fn oracle_cut(
    sets: &[PhaseStateSet],
    k: usize,
    options: &OracleOptions,
) -> Result<OracleReport, OracleError> {
    let start = Instant::now();
    let system = assemble_constraints(sets, k, options.operator_cap)?;
    let nullspace = hermitian_nullspace_batched(&system, options.rank_tol, options.batch)?;
    let verdict = triviality_verdict(&nullspace, options.verdict_tol)?;
    Ok(OracleReport {
        k,
        dim: system.dim,
        rows: system.total_rows,
        zero_rows: system.zero_rows,
        nullspace_dim: nullspace.dimension,
        verdict,
        sv_gap: nullspace.sv_gap,
        largest_discarded: nullspace.largest_discarded,
        identity_residual: system.identity_residual,
        warning: nullspace.warning,
        seconds: start.elapsed().as_secs_f64(),
        options: *options,
    })
}

/// Runs the given cuts in parallel, reports in the order given.
pub fn oracle_verify_cuts(
    sets: &[PhaseStateSet],
    cuts: &[usize],
    options: &OracleOptions,
) -> Result<Vec<OracleReport>, OracleError> {
    cuts.par_iter()
        .map(|&k| oracle_cut(sets, k, options))
        .collect()
}

/// Every cut; the set is strongest nonlocal iff all reports are trivial.
pub fn oracle_verify(
    sets: &[PhaseStateSet],
    options: &OracleOptions,
) -> Result<Vec<OracleReport>, OracleError> {
    let n = sets.first().ok_or(OracleError::NoStates)?.radix().len();
    let cuts: Vec<usize> = (0..n).collect();
    oracle_verify_cuts(sets, &cuts, options)
}
