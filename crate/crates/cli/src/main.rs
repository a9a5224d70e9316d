use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qnonloc_core::checker::{overall_verdict, verify_cuts, CombinatorialVerdict};
use qnonloc_core::io::{pretty, state_records, FamilyDocument, VerifyDocument};
use qnonloc_core::oracle::{oracle_verify_cuts, OracleOptions, DEFAULT_RANK_TOL};
use qnonloc_core::report::{
    diagonal_table, diagonal_table_csv, diagonal_table_text, size_table, size_tables_csv,
    size_tables_text, standard_size_tables, TABLE_PARTIES,
};
use qnonloc_core::states::{gram_check, state_sets};
use qnonloc_core::{
    build_modified_family_capped, choose_xi_prime, construction_size, reference_sizes, Limits,
    ModifiedFamily, SetFamily, XiPolicy,
};

#[derive(Parser)]
#[command(
    name = "qnonloc",
    version,
    about = "Build and verify strongest-nonlocal entangled qudit sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the modified family for (d, N) and describe it.
    Construct {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every (or one) all-but-one cut, combinatorially and numerically.
    Verify {
        #[command(flatten)]
        family: FamilyArgs,
        /// Family JSON to verify instead of constructing one.
        #[arg(long, conflicts_with_all = ["d", "n", "xi"])]
        input: Option<PathBuf>,
        /// Kept party, 1-based, or `all`.
        #[arg(long, default_value = "all")]
        cut: String,
        /// Relative rank and verdict tolerance for the oracle.
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        tol: f64,
        /// Skip the numerical oracle.
        #[arg(long)]
        combinatorial_only: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size comparison tables, or the diagonal placement table.
    Tables {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Also count every family that fits under the enumeration cap.
        #[arg(long)]
        enumerate: bool,
        /// Show where each constant tuple lives for this local dimension.
        #[arg(long, value_name = "D")]
        diagonal: Option<usize>,
        /// Single local dimension instead of the standard four.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the canonical family JSON, or its states.
    Export {
        #[command(flatten)]
        family: FamilyArgs,
        /// Export phase states instead of tuple sets.
        #[arg(long)]
        states: bool,
        /// Include full amplitude vectors (with --states).
        #[arg(long, requires = "states")]
        dense: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a family JSON and print its canonical form.
    Import {
        path: PathBuf,
        /// `construct` additionally requires a uniform local dimension.
        #[arg(long, value_enum, default_value = "verify")]
        scope: Scope,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Explicit second removed diagonal; overrides --policy.
    #[arg(long)]
    xi: Option<usize>,
    #[arg(long, value_enum, default_value = "smallest")]
    policy: Policy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Smallest,
    Residue,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Verify,
    Construct,
}

impl FamilyArgs {
    fn build(&self, limits: &Limits) -> Result<ModifiedFamily> {
        let (Some(d), Some(n)) = (self.d, self.n) else {
            bail!("--d and --n are required");
        };
        let policy = match (self.xi, self.policy) {
            (Some(x), _) => XiPolicy::Explicit(x),
            (None, Policy::Smallest) => XiPolicy::Smallest,
            (None, Policy::Residue) => XiPolicy::ResidueClass,
        };
        let xi = choose_xi_prime(d, n, policy)?;
        let m = build_modified_family_capped(d, n, xi, limits.enumeration_cap)?;
        if m.beyond_guarantee() {
            eprintln!("warning: d={d} is below the range the construction is proven for");
        }
        Ok(m)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_cuts(spec: &str, n: usize) -> Result<Vec<usize>> {
    if spec == "all" {
        return Ok((0..n).collect());
    }
    let k: usize = spec
        .parse()
        .with_context(|| format!("--cut expects a number or `all`, got {spec:?}"))?;
    if k == 0 || k > n {
        bail!("--cut {k} is outside 1..={n}");
    }
    Ok(vec![k - 1])
}

fn construct_text(m: &ModifiedFamily) -> String {
    let radix = m.family.radix();
    let (d, n) = (radix.dims()[0], radix.len());
    let refs = reference_sizes(d, n);
    let mut s = format!(
        "d={d} N={n} case {} xi'={} (home row {})\nremoved: {} {}\nrows: {:?}\n",
        m.case,
        m.xi_prime,
        m.xi_home,
        m.removed[0],
        m.removed[1],
        m.rows.rows()
    );
    for (label, set) in m.family.iter() {
        s.push_str(&format!("  set {label}: {} tuples\n", set.len()));
    }
    s.push_str(&format!(
        "total {} (closed form {}); earlier construction {}; lower bound {}\n",
        m.len(),
        construction_size(d, n),
        refs.prior_general,
        refs.lower_bound
    ));
    s
}

fn verify_text(doc: &VerifyDocument) -> String {
    let mut s = format!("radix {:?}, {} states\n", doc.radix, doc.states);
    for (i, c) in doc.combinatorial.iter().enumerate() {
        s.push_str(&format!(
            "cut {}: checker {} (pair covering {}, connectivity {})",
            c.k, c.overall, c.pair_covering, c.connectivity
        ));
        if let Some(o) = doc.oracle.as_ref().map(|o| &o[i]) {
            s.push_str(&format!(
                "; oracle {} (D={}, {} rows, nullspace {})",
                o.verdict, o.dim, o.rows, o.nullspace_dim
            ));
            if let Some(w) = &o.warning {
                s.push_str(&format!(" warning: {w}"));
            }
        }
        s.push('\n');
        for (label, cond) in &c.conditions {
            s.push_str(&format!("    {label}: {cond}\n"));
        }
    }
    s.push_str(&format!("checker verdict: {}\n", doc.combinatorial_verdict));
    if let Some(strong) = doc.strongest_nonlocal {
        s.push_str(&format!("strongest nonlocal: {strong}\n"));
    }
    s
}

fn load_family(path: &PathBuf) -> Result<SetFamily> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = FamilyDocument::from_json(&text)
        .with_context(|| format!("importing {}", path.display()))?;
    Ok(doc.family)
}

fn run(cli: Cli) -> Result<u8> {
    let limits = Limits::from_env()?;
    match cli.command {
        Command::Construct {
            family,
            format,
            out,
        } => {
            let m = family.build(&limits)?;
            let text = match format {
                Format::Json => FamilyDocument::from_modified(&m).to_json(),
                Format::Text => construct_text(&m),
                Format::Csv => bail!("construct supports json or text"),
            };
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Verify {
            family,
            input,
            cut,
            tol,
            combinatorial_only,
            format,
            out,
        } => {
            let fam = match &input {
                Some(path) => load_family(path)?,
                None => family.build(&limits)?.family,
            };
            let cuts = parse_cuts(&cut, fam.radix().len())?;
            let sets = state_sets(&fam)?;
            let gram = gram_check(&sets, false)?;
            if !gram.symbolic_ok {
                bail!("phase states failed the orthogonality certificate");
            }
            let comb = verify_cuts(&fam, &cuts);
            let oracle = if combinatorial_only {
                None
            } else {
                let options = OracleOptions {
                    rank_tol: tol,
                    verdict_tol: tol,
                    operator_cap: limits.operator_cap,
                    ..OracleOptions::default()
                };
                Some(oracle_verify_cuts(&sets, &cuts, &options)?)
            };
            let doc = VerifyDocument::new(&fam, &comb, oracle.as_deref());
            let text = match format {
                Format::Json => pretty(&doc),
                Format::Text => verify_text(&doc),
                Format::Csv => bail!("verify supports json or text"),
            };
            emit(&out, &text)?;
            Ok(match doc.strongest_nonlocal {
                Some(true) => 0,
                Some(false) => 1,
                None => match overall_verdict(&comb) {
                    CombinatorialVerdict::Trivial => 0,
                    CombinatorialVerdict::Nontrivial => 1,
                    CombinatorialVerdict::Inconclusive => 3,
                },
            })
        }
        Command::Tables {
            format,
            enumerate,
            diagonal,
            d,
            out,
        } => {
            let text = if let Some(dd) = diagonal {
                if dd < 2 {
                    bail!("--diagonal needs d ≥ 2");
                }
                let t = diagonal_table(dd);
                match format {
                    Format::Csv => diagonal_table_csv(&t),
                    Format::Text => diagonal_table_text(&t),
                    Format::Json => pretty(&t),
                }
            } else {
                let cap = enumerate.then_some(limits.enumeration_cap);
                let tables = match d {
                    Some(d) if d < 2 => bail!("--d needs d ≥ 2"),
                    Some(d) => vec![size_table(d, TABLE_PARTIES, cap)?],
                    None => standard_size_tables(cap)?,
                };
                if tables.iter().any(|t| !t.consistent()) {
                    bail!("closed form and enumeration disagree");
                }
                match format {
                    Format::Csv => size_tables_csv(&tables),
                    Format::Text => size_tables_text(&tables),
                    Format::Json => pretty(&tables),
                }
            };
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Export {
            family,
            states,
            dense,
            out,
        } => {
            let m = family.build(&limits)?;
            let text = if states {
                pretty(&state_records(&state_sets(&m.family)?, dense))
            } else {
                FamilyDocument::from_modified(&m).to_json()
            };
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Import {
            path,
            scope,
            format,
            out,
        } => {
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let doc = FamilyDocument::from_json(&text)
                .with_context(|| format!("importing {}", path.display()))?;
            if let Scope::Construct = scope {
                doc.require_uniform()?;
            }
            let text = match format {
                Format::Json => doc.to_json(),
                Format::Text => {
                    let mut s = format!(
                        "radix {:?}: {} sets, {} tuples\n",
                        doc.family.radix().dims(),
                        doc.family.len(),
                        doc.family.total_len()
                    );
                    for (label, set) in doc.family.iter() {
                        s.push_str(&format!("  set {label}: {} tuples\n", set.len()));
                    }
                    s
                }
                Format::Csv => bail!("import supports json or text"),
            };
            emit(&out, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
