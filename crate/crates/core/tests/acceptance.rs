//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Every decision is exact (rational or certified integer rank), so the
//! tolerance is zero throughout. A criterion that fails on cells whose
//! deviation is analysed and pinned below prints FAIL but does not fail the
//! target; any other outcome exits nonzero.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use curvlab::audit::checks::{verify_einstein, verify_gray, verify_remarks, verify_structure};
use curvlab::audit::{audit_cells, audit_table, columns, derive_d2omega_relation, rows, Fixture, Mode, TableAudit, TableId};
use curvlab::par::Exec;
use curvlab::scalar::Rational;

/// Absolute tolerance on every compared quantity.
const TOLERANCE: i64 = 0;
/// Random curvature tensors per n for criterion 6.
const STRUCTURE_SAMPLES: usize = 20;
const STRUCTURE_SEED: u64 = 2024;

type CellSet = BTreeSet<(String, String, String)>;

/// Non-π₂ cells where the printed tables disagree with the exact maps.
const KNOWN_TABLE_DIFFS: [(&str, &str, &str); 7] = [
    ("ric6", "od2+2-", "Ric:l11"),
    ("ric4", "od24", "Ric*:psi+"),
    ("ric4", "od24", "Ric*:psi-"),
    ("ric4", "od24", "Ric:l11"),
    ("ric4", "od+-", "Ric*:psi+"),
    ("ric4", "od+-", "Ric*:psi-"),
    ("ric4", "od+-", "Ric:R"),
];

/// Remark (d) at n = 2: rank-one C6± components on these rows.
const KNOWN_REMARK_D: [(&str, &str); 4] = [
    ("od24", "C6+:ricstar-SU"),
    ("od24", "C6-:ricstar-SU"),
    ("od+-", "C6+:ricstar-SU"),
    ("od+-", "C6-:ricstar-SU"),
];

const KNOWN_PI2_DIFFS: [(&str, &str, &str); 7] = [
    ("cur6", "oo33", "C7"),
    ("cur4", "oo++", "C5++"),
    ("cur4", "oo++", "C5+-"),
    ("cur4", "oo--", "C5--"),
    ("cur4", "oo--", "C5+-"),
    ("cur4", "od+-", "C5++"),
    ("cur4", "od+-", "C5--"),
];

/// Columns of the 2n ≥ 8 curvature table covered by criterion 1.
const CUR8_CHECKED: [&str; 7] = ["K1", "K2", "K-1", "K-2", "C6:ricstar-AH-a", "C6:ricstar-AH-b", "C8"];

enum Outcome {
    Pass,
    /// Failed exactly as documented.
    KnownFail,
    /// Anything else.
    Unexpected,
}

struct Report {
    unexpected: usize,
}

impl Report {
    fn line(&mut self, k: usize, outcome: Outcome, detail: &str) {
        let tag = match outcome {
            Outcome::Pass => "PASS",
            Outcome::KnownFail => "FAIL",
            Outcome::Unexpected => {
                self.unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {}: {} ({})", k, tag, detail);
    }
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn audit(table: TableId, n: usize) -> TableAudit {
    let f = Fixture::load(&fixture_dir(), table).expect("fixture");
    audit_table(table, n, Some(&f), Mode::Exact, Exec::default()).expect("audit")
}

fn triple(t: TableId, row: &str, col: &str) -> (String, String, String) {
    (t.label().to_string(), row.to_string(), col.to_string())
}

fn criterion_1(r: &mut Report, audits: &[TableAudit]) {
    let mut diffs = CellSet::new();
    let mut cells = 0;
    for a in audits {
        for c in &a.cells {
            if c.pi2_sensitive {
                continue;
            }
            if a.table == TableId::Cur8 && !CUR8_CHECKED.contains(&c.column.as_str()) {
                continue;
            }
            cells += 1;
            if c.agrees() != Some(true) {
                diffs.insert(triple(a.table, &c.row, &c.column));
            }
        }
    }
    let known: CellSet = KNOWN_TABLE_DIFFS.iter().map(|(t, r, c)| (t.to_string(), r.to_string(), c.to_string())).collect();
    let listed: Vec<String> = diffs.iter().map(|(t, r, c)| format!("{} {}/{}", t, r, c)).collect();
    let detail = format!("{} cells, {} diffs: {}", cells, diffs.len(), if listed.is_empty() { "none".into() } else { listed.join(", ") });
    let outcome = if diffs.is_empty() {
        Outcome::Pass
    } else if diffs == known {
        Outcome::KnownFail
    } else {
        Outcome::Unexpected
    };
    r.line(1, outcome, &detail);
}

fn spot(table: TableId, n: usize, row: &str, col: &str) -> (bool, usize) {
    let rs: Vec<_> = rows(n).into_iter().filter(|x| x.label == row).collect();
    let cs: Vec<_> = columns(table, n).unwrap().into_iter().filter(|x| x.label == col).collect();
    let a = audit_cells(table, n, &rs, &cs, None, Mode::Exact, Exec::default()).expect("spot cell");
    let c = &a.cells[0];
    (c.tick, c.rank.unwrap_or(0))
}

fn criterion_2(r: &mut Report) {
    let (t4, r4) = spot(TableId::Cur8, 4, "oo11", "C4");
    let (t5, r5) = spot(TableId::Cur8, 5, "oo11", "C4");
    let ok = !t4 && t5;
    r.line(2, if ok { Outcome::Pass } else { Outcome::Unexpected }, &format!("oo11 -> C4 rank {} at n=4, rank {} at n=5", r4, r5));
}

fn criterion_3(r: &mut Report, cur8: &TableAudit) {
    let rank = |row: &str, col: &str| cur8.cell(row, col).and_then(|c| c.rank).unwrap_or(usize::MAX);
    let a = "C6:ricstar-AH-a";
    let b = "C6:ricstar-AH-b";
    let (d3a, o34a, d1a) = (rank("D3", a), rank("od34", a), rank("D1", a));
    let (d3b, o34b) = (rank("D3", b), rank("od34", b));
    let ok = d3a == 0 && o34a == 0 && d1a > 0 && d3b > 0 && o34b > 0;
    r.line(
        3,
        if ok { Outcome::Pass } else { Outcome::Unexpected },
        &format!(
            "ricstar-AH-a: D3 rank {}, od34 rank {}, D1 rank {}; ricstar-AH-b: D3 rank {}, od34 rank {}",
            d3a, o34a, d1a, d3b, o34b
        ),
    );
}

fn criterion_4(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 5] {
        let rel = derive_d2omega_relation(n).expect("relation");
        let c = |m: &str| rel.coefficient(m).cloned();
        let q = |v: i64| Some(Rational::from_integer(v.into()));
        let derivative = c("D1") == q(3) && c("D3") == q(-1) && c("D4") == q(n as i64 - 2);
        let xi14 = n != 5 || c("xi1.xi4") == q(0);
        ok &= rel.multiplicity == 1 && rel.validated && derivative && xi14;
        parts.push(format!(
            "n={}: multiplicity {}, (D1,D3,D4) = ({},{},{}), xi1.xi4 = {}",
            n,
            rel.multiplicity,
            rel.coefficients[0].as_deref().unwrap_or("-"),
            rel.coefficients[1].as_deref().unwrap_or("-"),
            rel.coefficients[2].as_deref().unwrap_or("-"),
            rel.coefficients[5].as_deref().unwrap_or("-"),
        ));
    }
    r.line(4, if ok { Outcome::Pass } else { Outcome::Unexpected }, &parts.join("; "));
}

fn criterion_5(r: &mut Report) {
    let gray = verify_gray().expect("gray");
    let alphas: BTreeSet<i64> = gray.iter().map(|p| p.alpha).collect();
    let gray_ok = gray.iter().all(|p| p.holds()) && [1, 4, 25].iter().all(|a| alphas.contains(a));
    let mut einstein = 0;
    let mut einstein_ok = true;
    for n in 2..=5 {
        for p in verify_einstein(n).expect("einstein") {
            einstein += 1;
            einstein_ok &= p.ric_is_n_lambda_g && p.ricstar_is_n_lambda_g;
        }
    }
    r.line(
        5,
        if gray_ok && einstein_ok { Outcome::Pass } else { Outcome::Unexpected },
        &format!("{} nearly Kaehler points (alpha in {:?}), {} Kaehler Einstein points at n=2..5", gray.len(), alphas, einstein),
    );
}

fn criterion_6(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 2..=4 {
        let s = verify_structure(n, STRUCTURE_SAMPLES, STRUCTURE_SEED).expect("structure");
        let vol_ok = if n <= 3 { s.volume_identity == Some(true) } else { true };
        ok &= s.holds() && vol_ok && s.samples == STRUCTURE_SAMPLES;
        parts.push(format!(
            "n={}: sum of ranks {} = dim R {}, pi2 pi1 = P_perp {}, volume identity {}",
            n,
            s.rank_sum,
            s.dim_r,
            s.pi2_pi1_is_perp_projection,
            s.volume_identity.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
        ));
    }
    r.line(6, if ok { Outcome::Pass } else { Outcome::Unexpected }, &parts.join("; "));
}

fn criterion_7(r: &mut Report) {
    let mut unexpected = false;
    let mut failing = BTreeSet::new();
    let mut parts = Vec::new();
    for n in 2..=4 {
        for item in verify_remarks(n, Exec::default()).expect("remarks") {
            match item.holds {
                Some(false) if n == 2 && item.id == 'd' => {
                    for c in item.nonzero() {
                        failing.insert((c.row.clone(), c.column.clone()));
                    }
                    parts.push(format!("({}) n={} fails", item.id, n));
                }
                Some(false) => {
                    unexpected = true;
                    parts.push(format!("({}) n={} fails", item.id, n));
                }
                _ => {}
            }
        }
    }
    let known: BTreeSet<(String, String)> = KNOWN_REMARK_D.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let outcome = if unexpected || (!failing.is_empty() && failing != known) {
        Outcome::Unexpected
    } else if failing.is_empty() {
        Outcome::Pass
    } else {
        Outcome::KnownFail
    };
    let listed: Vec<String> = failing.iter().map(|(a, b)| format!("{}/{}", a, b)).collect();
    let detail = if parts.is_empty() {
        "(a)-(d) hold wherever defined at n=2..4".to_string()
    } else {
        format!("(a)-(c) hold; {}; nonzero: {}", parts.join(", "), listed.join(", "))
    };
    r.line(7, outcome, &detail);
}

fn criterion_8(r: &mut Report, audits: &[TableAudit]) {
    let mut found = CellSet::new();
    let mut reported = 0;
    for a in audits {
        for c in a.cells.iter().filter(|c| c.pi2_sensitive) {
            reported += usize::from(c.rank.is_some());
            if c.agrees() == Some(false) {
                found.insert(triple(a.table, &c.row, &c.column));
            }
        }
    }
    let known: CellSet = KNOWN_PI2_DIFFS.iter().map(|(t, r, c)| (t.to_string(), r.to_string(), c.to_string())).collect();
    let listed: Vec<String> = found.iter().map(|(t, r, c)| format!("{} {}/{}", t, r, c)).collect();
    let ok = found == known;
    r.line(
        8,
        if ok { Outcome::Pass } else { Outcome::Unexpected },
        &format!("{} pi2 cells with rank witnesses, {} warnings: {}", reported, found.len(), listed.join(", ")),
    );
}

fn main() -> ExitCode {
    // Cargo passes harness flags such as --list; nothing to list here.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    println!("acceptance (tolerance {}: exact arithmetic)", TOLERANCE);
    let mut report = Report { unexpected: 0 };
    let audits: Vec<TableAudit> = [
        (TableId::Ric8, 4),
        (TableId::Cur8, 4),
        (TableId::Ric6, 3),
        (TableId::Cur6, 3),
        (TableId::Ric4, 2),
        (TableId::Cur4, 2),
    ]
    .into_iter()
    .map(|(t, n)| audit(t, n))
    .collect();
    criterion_1(&mut report, &audits);
    criterion_2(&mut report);
    let cur8 = audits.iter().find(|a| a.table == TableId::Cur8).expect("cur8");
    criterion_3(&mut report, cur8);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    criterion_8(&mut report, &audits);
    if report.unexpected > 0 {
        println!("{} criteria failed in an unexplained way", report.unexpected);
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
