//! Size comparison and diagonal-placement tables.

use std::fmt::Write as _;

use serde::Serialize;

use crate::lattice::{
    build_modified_family_capped, choose_xi_prime, construction_size, diagonal_home,
    reference_sizes, LatticeError, XiPolicy,
};

/// Parties covered by the published comparison tables.
pub const TABLE_PARTIES: std::ops::RangeInclusive<usize> = 3..=8;
/// Local dimensions covered by the published comparison tables.
pub const TABLE_DIMS: std::ops::RangeInclusive<usize> = 4..=7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeRow {
    pub n: usize,
    pub this_work: u128,
    pub prior_general: u128,
    pub lower_bound: u128,
    /// Materialized family size, when enumeration ran.
    pub enumerated: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeTable {
    pub d: usize,
    pub rows: Vec<SizeRow>,
}

impl SizeTable {
    /// Formula and enumeration agree wherever enumeration ran.
    pub fn consistent(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.enumerated.is_none_or(|e| e == r.this_work))
    }
}

/// Builds the comparison table for one `d`. With `enumerate_cap`, every
/// entry with `d^N` within the cap is also counted by materializing the
/// family.
pub fn size_table(
    d: usize,
    parties: impl IntoIterator<Item = usize>,
    enumerate_cap: Option<u64>,
) -> Result<SizeTable, LatticeError> {
    let mut rows = Vec::new();
    for n in parties {
        let refs = reference_sizes(d, n);
        let enumerated = match enumerate_cap {
            Some(cap) if n >= 3 && (d as u128).pow(n as u32) <= cap as u128 => {
                let xi = choose_xi_prime(d, n, XiPolicy::Smallest)?;
                Some(build_modified_family_capped(d, n, xi, cap)?.len() as u128)
            }
            _ => None,
        };
        rows.push(SizeRow {
            n,
            this_work: construction_size(d, n),
            prior_general: refs.prior_general,
            lower_bound: refs.lower_bound,
            enumerated,
        });
    }
    Ok(SizeTable { d, rows })
}

/// The four published comparison tables.
pub fn standard_size_tables(enumerate_cap: Option<u64>) -> Result<Vec<SizeTable>, LatticeError> {
    TABLE_DIMS
        .map(|d| size_table(d, TABLE_PARTIES, enumerate_cap))
        .collect()
}

/// CSV with one `Ref.` and one `This work` line per table.
pub fn size_tables_csv(tables: &[SizeTable]) -> String {
    let mut out = String::new();
    let parties: Vec<usize> = tables
        .first()
        .map(|t| t.rows.iter().map(|r| r.n).collect())
        .unwrap_or_default();
    out.push_str("d,References");
    for n in &parties {
        let _ = write!(out, ",N={n}");
    }
    out.push('\n');
    for t in tables {
        for (name, pick) in [
            (
                "Ref.",
                (|r: &SizeRow| r.prior_general) as fn(&SizeRow) -> u128,
            ),
            ("This work", |r: &SizeRow| r.this_work),
        ] {
            let _ = write!(out, "{},{}", t.d, name);
            for r in &t.rows {
                let _ = write!(out, ",{}", pick(r));
            }
            out.push('\n');
        }
    }
    out
}

pub fn size_tables_text(tables: &[SizeTable]) -> String {
    let mut out = String::new();
    for t in tables {
        let _ = writeln!(out, "d = {}", t.d);
        let _ = write!(out, "{:<12}", "References");
        for r in &t.rows {
            let _ = write!(out, "{:>12}", format!("N={}", r.n));
        }
        out.push('\n');
        let show_enumerated = t.rows.iter().any(|r| r.enumerated.is_some());
        for name in ["Ref.", "This work", "Lower bound", "Enumerated"] {
            if name == "Enumerated" && !show_enumerated {
                continue;
            }
            let _ = write!(out, "{name:<12}");
            for r in &t.rows {
                let cell = match name {
                    "Ref." => r.prior_general.to_string(),
                    "This work" => r.this_work.to_string(),
                    "Lower bound" => r.lower_bound.to_string(),
                    _ => r.enumerated.map_or("-".into(), |e| e.to_string()),
                };
                let _ = write!(out, "{cell:>12}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Home label of `(ξ,…,ξ)` for each residue class `[N] = [a]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalTable {
    pub d: usize,
    /// `homes[a][ξ]`.
    pub homes: Vec<Vec<usize>>,
}

pub fn diagonal_table(d: usize) -> DiagonalTable {
    let homes = (0..d)
        .map(|a| (0..d).map(|xi| diagonal_home(xi, a, d)).collect())
        .collect();
    DiagonalTable { d, homes }
}

pub fn diagonal_table_csv(t: &DiagonalTable) -> String {
    let mut out = String::from("System N");
    for xi in 0..t.d {
        let _ = write!(out, ",({xi})^N");
    }
    out.push('\n');
    for (a, row) in t.homes.iter().enumerate() {
        let _ = write!(out, "[N]=[{a}]");
        for j in row {
            let _ = write!(out, ",{j}");
        }
        out.push('\n');
    }
    out
}

pub fn diagonal_table_text(t: &DiagonalTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "System N");
    for xi in 0..t.d {
        let _ = write!(out, "{:>8}", format!("({xi})^N"));
    }
    out.push('\n');
    for (a, row) in t.homes.iter().enumerate() {
        let _ = write!(out, "{:<10}", format!("[N]=[{a}]"));
        for j in row {
            let _ = write!(out, "{:>8}", format!("G_{j}"));
        }
        out.push('\n');
    }
    out
}
