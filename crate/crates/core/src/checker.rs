//! Blockwise sufficient conditions for trivial orthogonality-preserving
//! measurements, and the pair-covering / connectivity test on every
//! all-but-one cut.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::lattice::{Label, RadixVector, SetFamily, TupleSet};

/// Tuples of one set sharing digit `digit` at the kept party, with that
/// party deleted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockClass {
    pub digit: usize,
    pub residual: TupleSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub label: Label,
    pub k: usize,
    /// One class per digit present at `k`, ascending by digit.
    pub classes: Vec<BlockClass>,
}

impl BlockDecomposition {
    pub fn class_with_digit(&self, g: usize) -> Option<(usize, &BlockClass)> {
        self.classes
            .binary_search_by_key(&g, |c| c.digit)
            .ok()
            .map(|i| (i, &self.classes[i]))
    }

    /// Reinsert the kept digit into every residual.
    pub fn reassemble(&self, radix: &RadixVector) -> TupleSet {
        let mut ranks: Vec<u64> = self
            .classes
            .iter()
            .flat_map(|c| {
                c.residual
                    .ranks()
                    .iter()
                    .map(move |&x| radix.insert_rank(x, self.k, c.digit))
            })
            .collect();
        ranks.sort_unstable();
        TupleSet::from_ranks(radix.clone(), ranks).expect("classes are disjoint")
    }
}

pub fn block_decompose(label: &Label, set: &TupleSet, k: usize) -> BlockDecomposition {
    let radix = set.radix();
    assert!(k < radix.len(), "party index out of range");
    let sub = radix.without(k);
    let mut by_digit: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for &r in set.ranks() {
        by_digit
            .entry(radix.digit(r, k))
            .or_default()
            .push(radix.residual_rank(r, k));
    }
    let classes = by_digit
        .into_iter()
        .map(|(digit, mut ranks)| {
            ranks.sort_unstable();
            BlockClass {
                digit,
                residual: TupleSet::from_ranks(sub.clone(), ranks).expect("distinct residuals"),
            }
        })
        .collect();
    BlockDecomposition {
        label: label.clone(),
        k,
        classes,
    }
}

/// A class of another set used to cover a target residual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contributor {
    pub label: Label,
    pub class: usize,
    /// Size of its overlap with the target residual.
    pub overlap: usize,
}

/// Other sets' classes, all at one common digit different from the target's,
/// whose residuals jointly contain the target residual. Only contributors
/// that actually meet the target are listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiSet {
    pub target_label: Label,
    pub target_class: usize,
    pub digit: usize,
    pub contributors: Vec<Contributor>,
    /// A contributor meeting the target in exactly one tuple.
    pub tight: Option<Contributor>,
}

impl BiSet {
    pub fn is_tight(&self) -> bool {
        self.tight.is_some()
    }
}

/// Cut-local view of a family: decompositions plus a rank → owner index.
struct CutView<'a> {
    family: &'a SetFamily,
    k: usize,
    labels: Vec<&'a Label>,
    blocks: Vec<BlockDecomposition>,
    owners: Vec<(u64, u32)>,
}

impl<'a> CutView<'a> {
    fn new(family: &'a SetFamily, k: usize) -> Self {
        let labels: Vec<&Label> = family.labels().collect();
        let blocks = family
            .iter()
            .map(|(l, s)| block_decompose(l, s, k))
            .collect();
        let mut owners: Vec<(u64, u32)> = family
            .iter()
            .enumerate()
            .flat_map(|(i, (_, s))| s.ranks().iter().map(move |&r| (r, i as u32)))
            .collect();
        owners.sort_unstable();
        Self {
            family,
            k,
            labels,
            blocks,
            owners,
        }
    }

    fn owner(&self, rank: u64) -> Option<usize> {
        self.owners
            .binary_search_by_key(&rank, |&(r, _)| r)
            .ok()
            .map(|i| self.owners[i].1 as usize)
    }

    fn label_index(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    /// BI search for class `tc` of label index `ti`. Contributors are
    /// restricted to labels with `allowed[v]` when given. A tight set at any
    /// digit is preferred over a loose one.
    fn find_bi(&self, ti: usize, tc: usize, allowed: Option<&[bool]>) -> Option<BiSet> {
        let radix = self.family.radix();
        let d_k = radix.dims()[self.k];
        let target = &self.blocks[ti].classes[tc];
        let mut first_loose = None;
        for g in (0..d_k).filter(|&g| g != target.digit) {
            let mut overlap: BTreeMap<usize, usize> = BTreeMap::new();
            let covered = target.residual.ranks().iter().all(|&x| {
                match self.owner(radix.insert_rank(x, self.k, g)) {
                    Some(v) if v != ti && allowed.is_none_or(|a| a[v]) => {
                        *overlap.entry(v).or_default() += 1;
                        true
                    }
                    _ => false,
                }
            });
            if !covered {
                continue;
            }
            let contributors: Vec<Contributor> = overlap
                .into_iter()
                .map(|(v, n)| Contributor {
                    label: self.labels[v].clone(),
                    class: self.blocks[v]
                        .class_with_digit(g)
                        .expect("owner has class")
                        .0,
                    overlap: n,
                })
                .collect();
            let tight = contributors.iter().find(|c| c.overlap == 1).cloned();
            let bi = BiSet {
                target_label: self.labels[ti].clone(),
                target_class: tc,
                digit: g,
                contributors,
                tight,
            };
            if bi.is_tight() {
                return Some(bi);
            }
            first_loose.get_or_insert(bi);
        }
        first_loose
    }
}

/// Looks for a BI set covering class `class` of `label` on cut `k`.
pub fn find_bi_set(family: &SetFamily, label: &Label, class: usize, k: usize) -> Option<BiSet> {
    let view = CutView::new(family, k);
    let ti = view.label_index(label)?;
    if class >= view.blocks[ti].classes.len() {
        return None;
    }
    view.find_bi(ti, class, None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    /// Some class has a single-tuple residual.
    I {
        class: usize,
    },
    /// Some class has a tight BI set.
    II(BiSet),
    /// Some class has a BI set whose contributors all satisfy I or II.
    III(BiSet),
    Unresolved,
}

impl Condition {
    pub fn tag(&self) -> &'static str {
        match self {
            Condition::I { .. } => "COND_I",
            Condition::II(_) => "COND_II",
            Condition::III(_) => "COND_III",
            Condition::Unresolved => "UNRESOLVED",
        }
    }

    pub fn is_resolved(&self) -> bool {
        !matches!(self, Condition::Unresolved)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Per-label classification on one cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionVerdict {
    pub k: usize,
    pub conditions: BTreeMap<Label, Condition>,
}

impl ConditionVerdict {
    pub fn all_resolved(&self) -> bool {
        self.conditions.values().all(Condition::is_resolved)
    }

    pub fn unresolved(&self) -> impl Iterator<Item = &Label> {
        self.conditions
            .iter()
            .filter(|(_, c)| !c.is_resolved())
            .map(|(l, _)| l)
    }
}

fn classify(view: &CutView) -> ConditionVerdict {
    let n = view.labels.len();
    let mut conds: Vec<Condition> = (0..n)
        .into_par_iter()
        .map(|ti| {
            let classes = &view.blocks[ti].classes;
            if let Some(class) = classes.iter().position(|c| c.residual.len() == 1) {
                return Condition::I { class };
            }
            (0..classes.len())
                .find_map(|tc| view.find_bi(ti, tc, None).filter(BiSet::is_tight))
                .map_or(Condition::Unresolved, Condition::II)
        })
        .collect();
    // Contributors to a third-condition witness must satisfy I or II
    // directly, so one pass over the remaining labels is the fixed point.
    let base: Vec<bool> = conds.iter().map(Condition::is_resolved).collect();
    for (ti, cond) in conds.iter_mut().enumerate() {
        if cond.is_resolved() {
            continue;
        }
        let classes = view.blocks[ti].classes.len();
        if let Some(bi) = (0..classes).find_map(|tc| view.find_bi(ti, tc, Some(&base))) {
            *cond = Condition::III(bi);
        }
    }
    ConditionVerdict {
        k: view.k,
        conditions: view
            .labels
            .iter()
            .map(|l| (*l).clone())
            .zip(conds)
            .collect(),
    }
}

pub fn classify_conditions(family: &SetFamily, k: usize) -> ConditionVerdict {
    classify(&CutView::new(family, k))
}

/// Which of the three conditions a label meets on one cut, each evaluated
/// independently. The third is judged against labels meeting the first or
/// second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConditionsMet {
    pub i: bool,
    pub ii: bool,
    pub iii: bool,
}

pub fn conditions_met(family: &SetFamily, k: usize) -> BTreeMap<Label, ConditionsMet> {
    let view = CutView::new(family, k);
    let mut met: Vec<ConditionsMet> = (0..view.labels.len())
        .map(|ti| {
            let classes = &view.blocks[ti].classes;
            ConditionsMet {
                i: classes.iter().any(|c| c.residual.len() == 1),
                ii: (0..classes.len())
                    .any(|tc| view.find_bi(ti, tc, None).is_some_and(|b| b.is_tight())),
                iii: false,
            }
        })
        .collect();
    let base: Vec<bool> = met.iter().map(|m| m.i || m.ii).collect();
    for (ti, m) in met.iter_mut().enumerate() {
        m.iii = (0..view.blocks[ti].classes.len())
            .any(|tc| view.find_bi(ti, tc, Some(&base)).is_some());
    }
    view.labels.iter().map(|l| (*l).clone()).zip(met).collect()
}

/// Residual-level facts about the family union on one cut.
struct ResidualSummary {
    pair_covering: bool,
    connected: bool,
    full_residuals: bool,
}

fn summarize_residuals(view: &CutView) -> ResidualSummary {
    let radix = view.family.radix();
    let k = view.k;
    let d_k = radix.dims()[k];
    let sub_cube = radix.without(k).cube_size();
    let mut entries: Vec<(u64, usize, u32)> = view
        .owners
        .iter()
        .map(|&(r, v)| (radix.residual_rank(r, k), radix.digit(r, k), v))
        .collect();
    entries.sort_unstable();

    let words = d_k.div_ceil(64);
    let mut mask_counts: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut parent: Vec<usize> = (0..view.labels.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut present = 0u64;
    for group in entries.chunk_by(|a, b| a.0 == b.0) {
        present += 1;
        let mut mask = vec![0u64; words];
        for &(_, g, _) in group {
            mask[g / 64] |= 1 << (g % 64);
        }
        *mask_counts.entry(mask).or_default() += 1;
        let root = find(&mut parent, group[0].2 as usize);
        for &(_, _, v) in &group[1..] {
            let rv = find(&mut parent, v as usize);
            parent[rv] = root;
        }
    }
    let absent = sub_cube - present;
    if absent > 0 {
        *mask_counts.entry(vec![0u64; words]).or_default() += absent as usize;
    }
    let masks: Vec<(&Vec<u64>, usize)> = mask_counts.iter().map(|(m, &c)| (m, c)).collect();
    let meets = |a: &[u64], b: &[u64]| a.iter().zip(b).any(|(x, y)| x & y != 0);
    let pair_covering = masks.iter().enumerate().all(|(i, (a, count))| {
        (*count < 2 || meets(a, a)) && masks[i + 1..].iter().all(|(b, _)| meets(a, b))
    });
    let roots: BTreeSet<usize> = (0..parent.len()).map(|x| find(&mut parent, x)).collect();
    ResidualSummary {
        pair_covering,
        connected: roots.len() <= 1,
        full_residuals: absent == 0,
    }
}

/// Any two residual tuples (including ones absent from the union) extend by
/// a common kept digit into the family union.
pub fn check_pair_covering(family: &SetFamily, k: usize) -> bool {
    summarize_residuals(&CutView::new(family, k)).pair_covering
}

/// Labels linked when their residual supports share a tuple form a single
/// component.
pub fn check_connectivity(family: &SetFamily, k: usize) -> bool {
    summarize_residuals(&CutView::new(family, k)).connected
}

/// Family union fixed by every permutation of the parties.
pub fn is_symmetric(family: &SetFamily) -> bool {
    let union = family.union();
    union.radix().uniform_dim().is_some()
        && (1..union.radix().len()).all(|p| union.swapped(p - 1, p).ok().as_ref() == Some(&union))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinatorialVerdict {
    Trivial,
    Nontrivial,
    Inconclusive,
}

impl CombinatorialVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            CombinatorialVerdict::Trivial => "trivial",
            CombinatorialVerdict::Nontrivial => "nontrivial",
            CombinatorialVerdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for CombinatorialVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutReport {
    /// Kept party, 0-based.
    pub k: usize,
    pub conditions: ConditionVerdict,
    pub pair_covering: bool,
    pub connectivity: bool,
    pub symmetric: bool,
    pub full_residuals: bool,
    pub overall: CombinatorialVerdict,
}

fn cut_report(family: &SetFamily, k: usize, symmetric: bool) -> CutReport {
    let view = CutView::new(family, k);
    let conditions = classify(&view);
    let summary = summarize_residuals(&view);
    let overall = if !conditions.all_resolved() {
        CombinatorialVerdict::Inconclusive
    } else if summary.pair_covering && summary.connected {
        CombinatorialVerdict::Trivial
    } else if symmetric && summary.full_residuals {
        CombinatorialVerdict::Nontrivial
    } else {
        CombinatorialVerdict::Inconclusive
    };
    CutReport {
        k,
        conditions,
        pair_covering: summary.pair_covering,
        connectivity: summary.connected,
        symmetric,
        full_residuals: summary.full_residuals,
        overall,
    }
}

/// Reports for the given kept parties, in the order given.
pub fn verify_cuts(family: &SetFamily, cuts: &[usize]) -> Vec<CutReport> {
    let symmetric = is_symmetric(family);
    cuts.par_iter()
        .map(|&k| cut_report(family, k, symmetric))
        .collect()
}

/// Reports for every kept party.
pub fn verify_strongest_nonlocality(family: &SetFamily) -> Vec<CutReport> {
    let cuts: Vec<usize> = (0..family.radix().len()).collect();
    verify_cuts(family, &cuts)
}

/// Trivial only if every cut is; nontrivial if any cut is.
pub fn overall_verdict(reports: &[CutReport]) -> CombinatorialVerdict {
    if reports
        .iter()
        .any(|r| r.overall == CombinatorialVerdict::Nontrivial)
    {
        CombinatorialVerdict::Nontrivial
    } else if reports
        .iter()
        .all(|r| r.overall == CombinatorialVerdict::Trivial)
    {
        CombinatorialVerdict::Trivial
    } else {
        CombinatorialVerdict::Inconclusive
    }
}
