//! Batch front end: module atlases, table audits, the d²ω identity, the
//! Einstein checks, the consequence checks (a)-(d) and jet decomposition.
//!
//! Exit codes: 0 success, 1 a check or table cell disagreed, 2 usage or
//! input error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use curvlab::audit::checks::{verify_einstein, verify_gray, verify_remarks, verify_structure};
use curvlab::audit::identity::formula_dependence;
use curvlab::audit::{
    audit_table, decompose, derive_d2omega_relation_seeded, render, DimsReport, Fixture, Format, GrayReport,
    IdentityReport, Mode, RemarkReport, Render, TableId,
};
use curvlab::curvature::ModuleAtlas;
use curvlab::par::{with_jobs, Exec};
use curvlab::torsion::{random_jet, GHClass, TorsionJet};

/// Random curvature tensors per n for the structural checks in `dims`.
const STRUCTURE_SAMPLES: usize = 20;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(Parser, Debug)]
#[command(name = "curvlab", version, about = "Exact curvature audits for U(n) and SU(n) structures")]
struct Cli {
    /// Complex dimension n (real dimension 2n), 2 ≤ n ≤ 5.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Table id: ric8, cur8, ric6, cur6, ric4, cur4.
    #[arg(long, global = true)]
    table: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Md)]
    format: FormatArg,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, default_value = "fixtures")]
    fixtures: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Module ranks against the Weyl dimension formula, plus structural checks.
    Dims,
    /// Decide every cell of a contribution table and compare with its fixture.
    Audit,
    /// Derive the l20 relation satisfied by d²ω (n ≥ 3).
    Identity,
    /// Nearly Kähler and Kähler Einstein constants.
    Gray,
    /// Consequence checks (a)-(d) as exact rank statements.
    Remarks,
    /// Class norms and formula component norms of a jet. Without a file, a
    /// random jet from --seed and --n.
    Decompose { jet: Option<PathBuf> },
}

struct Output {
    text: String,
    ok: bool,
    /// Lines for stderr (warnings and summaries).
    notes: Vec<String>,
}

fn emit<T: Render>(body: &T, cli: &Cli, ok: bool, notes: Vec<String>) -> Result<Output> {
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Md => Format::Md,
    };
    let stamp = (!cli.no_timestamp).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    Ok(Output { text: render(body, format, stamp.as_deref())?, ok, notes })
}

fn check_n(n: usize) -> Result<usize> {
    if !(2..=5).contains(&n) {
        bail!("--n must be between 2 and 5, got {}", n);
    }
    Ok(n)
}

fn run(cli: &Cli, exec: Exec) -> Result<Output> {
    let mode = match cli.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Float => Mode::Float,
    };
    match &cli.command {
        Command::Dims => {
            let n = check_n(cli.n.unwrap_or(4))?;
            let atlas = ModuleAtlas::get(n)?.atlas();
            let structure = Some(verify_structure(n, STRUCTURE_SAMPLES, cli.seed)?);
            let r = DimsReport { atlas, structure };
            let ok = r.agree();
            emit(&r, cli, ok, vec![])
        }
        Command::Audit => {
            let label = cli.table.as_deref().context("audit needs --table")?;
            let table = TableId::parse(label)?;
            let n = check_n(cli.n.unwrap_or_else(|| table.default_n()))?;
            let fixture = Fixture::load(&cli.fixtures, table)?;
            let a = audit_table(table, n, Some(&fixture), mode, exec)?;
            let mut notes: Vec<String> =
                a.diffs().iter().map(|c| format!("diff: {} / {} computed {}", c.row, c.column, tick(c.tick))).collect();
            notes.extend(
                a.pi2_diffs().iter().map(|c| format!("warning (pi2-sensitive): {} / {} computed {}", c.row, c.column, tick(c.tick))),
            );
            if mode == Mode::Float {
                notes.push("float mode is a pre-filter; cells are not decided exactly".into());
            }
            let ok = a.matches();
            emit(&a, cli, ok, notes)
        }
        Command::Identity => {
            let n = check_n(cli.n.unwrap_or(4))?;
            let relation = derive_d2omega_relation_seeded(n, cli.seed)?;
            let ok = relation.validated && relation.mismatches().is_empty();
            let notes = relation.mismatches().iter().map(|m| format!("coefficient of {} differs from the display", m)).collect();
            let r = IdentityReport { relation, formula_dependence: Some(formula_dependence(n)?) };
            emit(&r, cli, ok, notes)
        }
        Command::Gray => {
            let ns: Vec<usize> = match cli.n {
                Some(n) => vec![check_n(n)?],
                None => vec![2, 3, 4],
            };
            let mut einstein = Vec::new();
            for n in ns {
                einstein.extend(verify_einstein(n)?);
            }
            let r = GrayReport { points: verify_gray()?, einstein };
            let ok = r.holds();
            emit(&r, cli, ok, vec![])
        }
        Command::Remarks => {
            let n = check_n(cli.n.unwrap_or(4))?;
            let r = RemarkReport { n, items: verify_remarks(n, exec)? };
            let ok = r.items.iter().all(|i| i.holds != Some(false));
            let notes = r
                .items
                .iter()
                .flat_map(|i| i.nonzero().into_iter().map(move |c| format!("({}) nonzero: {} -> {} rank {}", i.id, c.row, c.column, c.rank)))
                .collect();
            emit(&r, cli, ok, notes)
        }
        Command::Decompose { jet } => {
            let jet = match jet {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    TorsionJet::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => {
                    let n = check_n(cli.n.unwrap_or(3))?;
                    random_jet(n, &GHClass::un_classes(n), cli.seed)?
                }
            };
            let d = decompose(&jet)?;
            emit(&d, cli, true, vec![])
        }
    }
}

fn tick(t: bool) -> &'static str {
    if t {
        "tick"
    } else {
        "blank"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.jobs == 1 { Exec::Sequential } else { Exec::default() };
    let res = with_jobs(cli.jobs, || run(&cli, exec));
    let out = match res {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {:#}", e);
            return ExitCode::from(2);
        }
    };
    for n in &out.notes {
        eprintln!("{}", n);
    }
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &out.text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", out.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {:#}", e);
        return ExitCode::from(2);
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
