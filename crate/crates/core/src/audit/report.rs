//! JSON, CSV and markdown renderings. Output depends only on the report
//! contents and the optional timestamp.

use std::fmt::Write as _;

use serde::Serialize;

use super::checks::{EinsteinPoint, GrayPoint, RemarkItem, StructuralReport};
use super::decompose::Decomposition;
use super::identity::{D2Relation, FormulaDependence};
use super::tables::TableAudit;
use crate::curvature::Atlas;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" => Ok(Format::Md),
            _ => Err(Error::UnknownName(s.into())),
        }
    }
}

/// A report body that can be rendered in every format.
pub trait Render: Serialize {
    const KIND: &'static str;
    fn markdown(&self, out: &mut String);
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    kind: &'static str,
    convention: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<&'a str>,
    data: &'a T,
}

pub fn render<T: Render>(body: &T, format: Format, timestamp: Option<&str>) -> Result<String> {
    match format {
        Format::Json => {
            let env = Envelope { kind: T::KIND, convention: crate::CONVENTION, timestamp, data: body };
            let mut s = serde_json::to_string_pretty(&env)?;
            s.push('\n');
            Ok(s)
        }
        Format::Md => {
            let mut s = String::new();
            if let Some(t) = timestamp {
                let _ = writeln!(s, "<!-- generated {} -->\n", t);
            }
            body.markdown(&mut s);
            Ok(s)
        }
        Format::Csv => {
            let mut head = Vec::new();
            if let Some(t) = timestamp {
                head.extend_from_slice(format!("# generated {}\n", t).as_bytes());
            }
            let mut w = csv::WriterBuilder::new().from_writer(head);
            w.write_record(body.csv_header())?;
            for r in body.csv_rows() {
                w.write_record(&r)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            String::from_utf8(bytes).map_err(|e| Error::Fixture(e.to_string()))
        }
    }
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl Render for TableAudit {
    const KIND: &'static str = "table-audit";

    fn markdown(&self, out: &mut String) {
        let _ = writeln!(out, "# Table {} at n = {} ({:?} mode)\n", self.table, self.n, self.mode);
        let _ = writeln!(out, "`x` tick, `.` blank, `!` differs from the fixture, `?` differs in a pi2 column.\n");
        let _ = writeln!(out, "| row | {} |", self.columns.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(self.columns.len()));
        for (r, row) in self.rows.iter().enumerate() {
            let cells = &self.cells[r * self.columns.len()..(r + 1) * self.columns.len()];
            let marks: Vec<String> = cells
                .iter()
                .map(|c| {
                    let m = if c.tick { "x" } else { "." };
                    match (c.agrees(), c.pi2_sensitive) {
                        (Some(false), false) => format!("{}!", m),
                        (Some(false), true) => format!("{}?", m),
                        _ => m.to_string(),
                    }
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", row, marks.join(" | "));
        }
        let _ = writeln!(out);
        if !self.fixture_loaded {
            let _ = writeln!(out, "No fixture loaded.\n");
            return;
        }
        let diffs = self.diffs();
        let _ = writeln!(out, "## Diffs against the fixture ({})\n", diffs.len());
        for c in diffs {
            let _ = writeln!(out, "- {} / {}: computed {}, rank {}, norm2 {}", c.row, c.column, tick_word(c.tick), opt(&c.rank), c.norm2);
        }
        let p = self.pi2_diffs();
        let _ = writeln!(out, "\n## pi2-sensitivity ({} cells differ, reported only)\n", p.len());
        for c in p {
            let _ = writeln!(out, "- {} / {}: computed {}, rank {}, norm2 {}", c.row, c.column, tick_word(c.tick), opt(&c.rank), c.norm2);
        }
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["row", "column", "tick", "rank", "norm2", "source_dim", "expected", "agrees", "pi2_sensitive"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                vec![
                    c.row.clone(),
                    c.column.clone(),
                    (c.tick as u8).to_string(),
                    opt(&c.rank),
                    c.norm2.clone(),
                    c.source_dim.to_string(),
                    opt(&c.expected.map(|e| e as u8)),
                    opt(&c.agrees().map(|e| e as u8)),
                    (c.pi2_sensitive as u8).to_string(),
                ]
            })
            .collect()
    }
}

fn tick_word(t: bool) -> &'static str {
    if t {
        "tick"
    } else {
        "blank"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub relation: D2Relation,
    pub formula_dependence: Option<FormulaDependence>,
}

impl Render for IdentityReport {
    const KIND: &'static str = "d2omega-identity";

    fn markdown(&self, out: &mut String) {
        let r = &self.relation;
        let _ = writeln!(out, "# l20 part of d2 omega at n = {}\n", r.n);
        let _ = writeln!(out, "Relation space dimension {}, validated on fresh jets: {}.", r.multiplicity, yn(r.validated));
        let _ = writeln!(out, "Coefficient of the d2 omega term: {}.\n", r.d2omega_coefficient);
        let _ = writeln!(out, "| monomial | derived | displayed |\n|---|---|---|");
        for ((m, c), d) in r.monomials.iter().zip(&r.coefficients).zip(&r.reference) {
            let _ = writeln!(out, "| {} | {} | {} |", m, c.as_deref().unwrap_or("(identically zero)"), d);
        }
        if let Some(f) = &self.formula_dependence {
            let _ = writeln!(out, "\n## ricstar-AH-a minus 2 ricstar-AH-b on the l20 part\n");
            let _ = writeln!(out, "In the span of the d2 omega part and the relation monomials: {}.", yn(f.in_span));
            let _ = writeln!(out, "d2 omega coefficient: {}.\n", f.d2omega_coefficient.as_deref().unwrap_or("0"));
            for (m, c) in &f.monomials {
                let _ = writeln!(out, "- {}: {}", m, c);
            }
        }
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["monomial", "derived", "displayed", "difference"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let r = &self.relation;
        let diff = |m: &str| {
            self.formula_dependence
                .as_ref()
                .and_then(|f| f.monomials.iter().find(|(x, _)| x == m).map(|(_, c)| c.clone()))
                .unwrap_or_default()
        };
        let mut rows: Vec<Vec<String>> = r
            .monomials
            .iter()
            .zip(&r.coefficients)
            .zip(&r.reference)
            .map(|((m, c), d)| vec![m.clone(), opt(c), d.clone(), diff(m)])
            .collect();
        let fd = self.formula_dependence.as_ref().and_then(|f| f.d2omega_coefficient.clone()).unwrap_or_default();
        rows.push(vec!["d2omega".into(), r.d2omega_coefficient.clone(), String::new(), fd]);
        rows
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrayReport {
    pub points: Vec<GrayPoint>,
    pub einstein: Vec<EinsteinPoint>,
}

impl GrayReport {
    pub fn holds(&self) -> bool {
        self.points.iter().all(GrayPoint::holds) && self.einstein.iter().all(|e| e.ric_is_n_lambda_g && e.ricstar_is_n_lambda_g)
    }
}

impl Render for GrayReport {
    const KIND: &'static str = "einstein-checks";

    fn markdown(&self, out: &mut String) {
        let _ = writeln!(out, "# Nearly Kähler jets at n = 3\n");
        let _ = writeln!(out, "| w+ | w- | alpha | Ric = 5 alpha g | Ric* = alpha g | xi.xi = alpha g |\n|---|---|---|---|---|---|");
        for p in &self.points {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                p.w_plus,
                p.w_minus,
                p.alpha,
                yn(p.ric_is_5_alpha_g),
                yn(p.ricstar_is_alpha_g),
                yn(p.xixi_is_alpha_g)
            );
        }
        let _ = writeln!(out, "\n# Kähler jets with deta = lambda omega\n");
        let _ = writeln!(out, "| n | lambda | Ric = n lambda g | Ric* = n lambda g |\n|---|---|---|---|");
        for e in &self.einstein {
            let _ = writeln!(out, "| {} | {} | {} | {} |", e.n, e.lambda, yn(e.ric_is_n_lambda_g), yn(e.ricstar_is_n_lambda_g));
        }
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["check", "n", "parameters", "ric", "ricstar", "xixi"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let b = |x: bool| (x as u8).to_string();
        let mut rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    "nearly-kahler".into(),
                    "3".into(),
                    format!("w+={} w-={}", p.w_plus, p.w_minus),
                    b(p.ric_is_5_alpha_g),
                    b(p.ricstar_is_alpha_g),
                    b(p.xixi_is_alpha_g),
                ]
            })
            .collect();
        rows.extend(self.einstein.iter().map(|e| {
            vec![
                "kahler-einstein".into(),
                e.n.to_string(),
                format!("lambda={}", e.lambda),
                b(e.ric_is_n_lambda_g),
                b(e.ricstar_is_n_lambda_g),
                String::new(),
            ]
        }));
        rows
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RemarkReport {
    pub n: usize,
    pub items: Vec<RemarkItem>,
}

impl Render for RemarkReport {
    const KIND: &'static str = "remarks";

    fn markdown(&self, out: &mut String) {
        let _ = writeln!(out, "# Consequence checks at n = {}\n", self.n);
        for it in &self.items {
            let status = match it.holds {
                None => "not applicable",
                Some(true) => "holds",
                Some(false) => "FAILS",
            };
            let _ = writeln!(out, "- ({}) {}: {} ({} maps checked)", it.id, it.statement, status, it.checks.len());
            for c in it.nonzero() {
                let _ = writeln!(out, "  - nonzero: {} -> {} (rank {})", c.row, c.column, c.rank);
            }
        }
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["item", "row", "column", "rank"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.items
            .iter()
            .flat_map(|it| it.checks.iter().map(move |c| vec![it.id.to_string(), c.row.clone(), c.column.clone(), c.rank.to_string()]))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DimsReport {
    pub atlas: Atlas,
    pub structure: Option<StructuralReport>,
}

impl DimsReport {
    pub fn agree(&self) -> bool {
        self.atlas.certified
            && self.atlas.modules.iter().chain(&self.atlas.refinements).all(|m| m.agree)
            && self.structure.as_ref().map(StructuralReport::holds).unwrap_or(true)
    }
}

impl Render for DimsReport {
    const KIND: &'static str = "dims";

    fn markdown(&self, out: &mut String) {
        let a = &self.atlas;
        let _ = writeln!(out, "# Curvature modules at n = {}\n", a.n);
        let _ = writeln!(out, "dim S2(L2) = {}, dim L4 = {}, dim R = {}, certified: {}.", a.dim_s2l2, a.dim_l4, a.dim_r, yn(a.certified));
        if !a.absent.is_empty() {
            let _ = writeln!(out, "Absent at this n: {}.", a.absent.join(", "));
        }
        let _ = writeln!(out, "\n| module | weight | weyl dim | rank | agree | schur |\n|---|---|---|---|---|---|");
        for m in a.modules.iter().chain(&a.refinements) {
            let w = m.weight.as_ref().map(|w| format!("{:?}", w)).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "| {} | {} | {} | {} | {} | {} |", m.name, w, m.weyl_dim, m.rank, yn(m.agree), m.schur);
        }
        let total: usize = a.modules.iter().map(|m| m.rank).sum();
        let _ = writeln!(out, "\nTotal rank {} of {}.", total, a.dim_r);
        if let Some(s) = &self.structure {
            let _ = writeln!(out, "\n## Structural checks on {} random tensors\n", s.samples);
            let _ = writeln!(out, "- pi2 pi1 = id - P_K: {}", yn(s.pi2_pi1_is_perp_projection));
            if let Some(v) = s.volume_identity {
                let _ = writeln!(out, "- <R_XY psi+, psi-> = -2^(n-1) Ric*(X, IY): {}", yn(v));
            }
        }
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["module", "weyl_dim", "rank", "agree", "schur"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.atlas
            .modules
            .iter()
            .chain(&self.atlas.refinements)
            .map(|m| vec![m.name.clone(), m.weyl_dim.to_string(), m.rank.to_string(), (m.agree as u8).to_string(), m.schur.clone()])
            .collect()
    }
}

impl Render for Decomposition {
    const KIND: &'static str = "decompose";

    fn markdown(&self, out: &mut String) {
        let _ = writeln!(out, "# Jet decomposition at n = {}\n", self.n);
        let _ = writeln!(out, "| class | norm2 |\n|---|---|");
        for c in &self.classes {
            let _ = writeln!(out, "| {} | {} |", c.name, c.norm2);
        }
        let _ = writeln!(out, "\neta norm2 {}, deta norm2 {}, Dxi norm2 {}.\n", self.eta_hat_norm2, self.d_eta_hat_norm2, self.dxi_norm2);
        let _ = writeln!(out, "| formula | component | norm2 |\n|---|---|---|");
        for c in &self.components {
            let _ = writeln!(out, "| {} | {} | {} |", c.formula, c.target, c.norm2);
        }
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["kind", "name", "target", "norm2"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> =
            self.classes.iter().map(|c| vec!["class".into(), c.name.clone(), String::new(), c.norm2.clone()]).collect();
        rows.push(vec!["jet".into(), "eta".into(), String::new(), self.eta_hat_norm2.clone()]);
        rows.push(vec!["jet".into(), "deta".into(), String::new(), self.d_eta_hat_norm2.clone()]);
        rows.push(vec!["jet".into(), "Dxi".into(), String::new(), self.dxi_norm2.clone()]);
        rows.extend(self.components.iter().map(|c| vec!["component".into(), c.formula.clone(), c.target.clone(), c.norm2.clone()]));
        rows
    }
}
