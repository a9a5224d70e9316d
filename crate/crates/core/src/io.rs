//! Canonical JSON documents for families, states and verification reports.
//!
//! Output is deterministic: labels in label order, tuples in lexicographic
//! order, struct fields in declaration order, two-space indentation and a
//! trailing newline.

use std::fmt;

use indexmap::IndexMap;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::checker::{CombinatorialVerdict, CutReport};
use crate::lattice::{
    Label, LatticeError, ModifiedFamily, RadixVector, SetFamily, Tuple, TupleSet,
};
use crate::oracle::{OracleReport, OracleVerdict};
use crate::states::PhaseStateSet;

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl fmt::Display) -> ImportError {
    ImportError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

/// Construction metadata carried alongside a modified family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyMeta {
    pub case: String,
    pub xi_prime: usize,
    pub removed: Vec<Vec<usize>>,
}

/// Label → tuples, keeping duplicate keys so they can be reported.
#[derive(Debug, Clone, Default)]
struct RawSets(Vec<(String, Vec<Vec<usize>>)>);

impl<'de> Deserialize<'de> for RawSets {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawSets;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping labels to arrays of tuples")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawSets, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<Vec<usize>>>()? {
                    out.push((k, v));
                }
                Ok(RawSets(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    d: Option<usize>,
    n: Option<usize>,
    radix: Option<Vec<usize>>,
    sets: RawSets,
    meta: Option<FamilyMeta>,
}

#[derive(Serialize)]
struct FamilyOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    radix: Option<&'a [usize]>,
    sets: IndexMap<String, Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<&'a FamilyMeta>,
}

/// A family plus optional construction metadata, as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyDocument {
    pub family: SetFamily,
    pub meta: Option<FamilyMeta>,
}

impl FamilyDocument {
    pub fn plain(family: SetFamily) -> Self {
        Self { family, meta: None }
    }

    pub fn from_modified(m: &ModifiedFamily) -> Self {
        Self {
            family: m.family.clone(),
            meta: Some(FamilyMeta {
                case: m.case.to_string(),
                xi_prime: m.xi_prime,
                removed: m.removed.iter().map(|t| t.0.clone()).collect(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let radix = self.family.radix();
        let uniform = radix.uniform_dim();
        let out = FamilyOut {
            d: uniform,
            n: radix.len(),
            radix: uniform.is_none().then_some(radix.dims()),
            sets: self
                .family
                .iter()
                .map(|(l, s)| (l.to_string(), s.iter().map(|t| t.0).collect()))
                .collect(),
            meta: self.meta.as_ref(),
        };
        pretty(&out)
    }

    /// Parses and validates radix bounds, duplicates and disjointness.
    pub fn from_json(text: &str) -> Result<Self, ImportError> {
        let raw: RawFamily = serde_json::from_str(text)?;
        let radix = match (raw.d, raw.n, raw.radix) {
            (Some(d), Some(n), None) => {
                RadixVector::uniform(d, n).map_err(|e| invalid("d/n", e))?
            }
            (None, n, Some(dims)) => {
                let r = RadixVector::new(dims).map_err(|e| invalid("radix", e))?;
                if n.is_some_and(|n| n != r.len()) {
                    return Err(invalid("n", "does not match the length of radix"));
                }
                r
            }
            _ => return Err(invalid("d/n/radix", "give either d and n, or radix")),
        };
        let mut sets: Vec<(Label, TupleSet)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (key, tuples) in raw.sets.0 {
            let field = format!("sets.{key:?}");
            let label: Label = key.parse().map_err(|e| invalid(&field, e))?;
            if !seen.insert(label.clone()) {
                return Err(invalid(&field, "duplicate label"));
            }
            for (i, t) in tuples.iter().enumerate() {
                radix
                    .validate(t)
                    .map_err(|e| invalid(format!("{field}[{i}]"), e))?;
            }
            let set = TupleSet::from_tuples(radix.clone(), tuples.into_iter().map(Tuple))
                .map_err(|e| invalid(&field, e))?;
            sets.push((label, set));
        }
        let family = SetFamily::new(radix, sets).map_err(|e| invalid("sets", e))?;
        if let Some(meta) = &raw.meta {
            for (i, t) in meta.removed.iter().enumerate() {
                family
                    .radix()
                    .validate(t)
                    .map_err(|e| invalid(format!("meta.removed[{i}]"), e))?;
            }
        }
        Ok(Self {
            family,
            meta: raw.meta,
        })
    }

    /// Constructions only make sense over a uniform local dimension.
    pub fn require_uniform(&self) -> Result<usize, LatticeError> {
        self.family
            .radix()
            .uniform_dim()
            .ok_or(LatticeError::NonUniformRadix)
    }
}

/// Two-space pretty JSON with a trailing newline.
pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRecord {
    pub label: String,
    pub s: usize,
    /// Support tuples listed by phase index `f`.
    pub support: Vec<Vec<usize>>,
    pub k: usize,
    /// Interleaved `re, im` over the whole cube.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<f64>>,
}

/// One record per state. `dense` adds full amplitude vectors.
pub fn state_records(sets: &[PhaseStateSet], dense: bool) -> Vec<StateRecord> {
    let mut out = Vec::new();
    for set in sets {
        let mut by_phase: Vec<(usize, Vec<usize>)> = set
            .support()
            .iter()
            .zip(set.bijection())
            .map(|(t, &f)| (f, t.0))
            .collect();
        by_phase.sort();
        let support: Vec<Vec<usize>> = by_phase.into_iter().map(|(_, t)| t).collect();
        for k in 0..set.s() {
            let dense = dense.then(|| {
                set.dense(k)
                    .expect("k in range")
                    .amplitudes
                    .iter()
                    .flat_map(|z| [z.re, z.im])
                    .collect()
            });
            out.push(StateRecord {
                label: set.label().to_string(),
                s: set.s(),
                support: support.clone(),
                k,
                dense,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutReportJson {
    /// Kept party, 1-based.
    pub k: usize,
    pub conditions: IndexMap<String, String>,
    pub pair_covering: bool,
    pub connectivity: bool,
    pub symmetric: bool,
    pub overall: String,
}

impl From<&CutReport> for CutReportJson {
    fn from(r: &CutReport) -> Self {
        Self {
            k: r.k + 1,
            conditions: r
                .conditions
                .conditions
                .iter()
                .map(|(l, c)| (l.to_string(), c.tag().to_string()))
                .collect(),
            pair_covering: r.pair_covering,
            connectivity: r.connectivity,
            symmetric: r.symmetric,
            overall: r.overall.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReportJson {
    /// Kept party, 1-based.
    pub k: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    pub rows: usize,
    pub nullspace_dim: usize,
    pub verdict: String,
    pub witness: Option<WitnessJson>,
    pub sv_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl From<&OracleReport> for OracleReportJson {
    fn from(r: &OracleReport) -> Self {
        let witness = match &r.verdict {
            OracleVerdict::Trivial => None,
            OracleVerdict::Nontrivial { witness, .. } => {
                let dim = witness.dim;
                let grid = |f: fn(num_complex::Complex64) -> f64| {
                    (0..dim)
                        .map(|p| (0..dim).map(|q| clean(f(witness.get(p, q)))).collect())
                        .collect()
                };
                Some(WitnessJson {
                    re: grid(|z| z.re),
                    im: grid(|z| z.im),
                })
            }
        };
        Self {
            k: r.k + 1,
            dim: r.dim,
            rows: r.rows,
            nullspace_dim: r.nullspace_dim,
            verdict: r.verdict.as_str().to_string(),
            witness,
            sv_gap: r.sv_gap,
            warning: r.warning.clone(),
        }
    }
}

/// Rounds float noise to zero so witnesses print cleanly.
fn clean(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

/// How the checker's and the oracle's verdicts relate on one cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Agree,
    /// The checker was inconclusive; the oracle decides.
    Deferred,
    Conflict,
}

pub fn agreement(comb: CombinatorialVerdict, oracle: &OracleVerdict) -> Agreement {
    match (comb, oracle.is_trivial()) {
        (CombinatorialVerdict::Inconclusive, _) => Agreement::Deferred,
        (CombinatorialVerdict::Trivial, true) | (CombinatorialVerdict::Nontrivial, false) => {
            Agreement::Agree
        }
        _ => Agreement::Conflict,
    }
}

/// Everything `verify` reports, in output order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyDocument {
    pub radix: Vec<usize>,
    pub states: usize,
    pub combinatorial: Vec<CutReportJson>,
    pub combinatorial_verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleReportJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Vec<Agreement>>,
    /// Oracle ground truth over the cuts examined; absent without the oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strongest_nonlocal: Option<bool>,
}

impl VerifyDocument {
    pub fn new(
        family: &SetFamily,
        combinatorial: &[CutReport],
        oracle: Option<&[OracleReport]>,
    ) -> Self {
        let agreement = oracle.map(|o| {
            combinatorial
                .iter()
                .zip(o)
                .map(|(c, r)| agreement(c.overall, &r.verdict))
                .collect()
        });
        Self {
            radix: family.radix().dims().to_vec(),
            states: family.total_len(),
            combinatorial: combinatorial.iter().map(CutReportJson::from).collect(),
            combinatorial_verdict: crate::checker::overall_verdict(combinatorial).to_string(),
            oracle: oracle.map(|o| o.iter().map(OracleReportJson::from).collect()),
            agreement,
            strongest_nonlocal: oracle.map(|o| o.iter().all(|r| r.verdict.is_trivial())),
        }
    }
}
