//! Contribution tables: which torsion monomials feed which curvature parts.
//!
//! A cell is decided by the exact rank of the linear map from the row's
//! source space to the column's target, assembled over a full basis.

use std::fmt;

use num::bigint::BigInt;
use serde::Serialize;

use crate::curvature::{CurvSpace, ModuleAtlas, ModuleName};
use crate::error::{Error, Result};
use crate::formulas::{eval_polarized, eval_raw, part_of, FormulaId, Inputs, Part, Terms, Value};
use crate::linalg::{certified_rank, norm2_big};
use crate::par::Exec;
use crate::scalar::{Int, Ring, FLOAT_TAU};
use crate::structure::UnStructure;
use crate::tensor::Tensor;
use crate::torsion::{GHClass, TorsionModel};

use super::fixture::{Expect, Fixture};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TableId {
    Ric8,
    Cur8,
    Ric6,
    Cur6,
    Ric4,
    Cur4,
}

impl TableId {
    pub const ALL: [TableId; 6] = [TableId::Ric8, TableId::Cur8, TableId::Ric6, TableId::Cur6, TableId::Ric4, TableId::Cur4];

    pub fn label(self) -> &'static str {
        match self {
            TableId::Ric8 => "ric8",
            TableId::Cur8 => "cur8",
            TableId::Ric6 => "ric6",
            TableId::Cur6 => "cur6",
            TableId::Ric4 => "ric4",
            TableId::Cur4 => "cur4",
        }
    }

    pub fn parse(s: &str) -> Result<TableId> {
        let t = s.trim().to_ascii_lowercase();
        TableId::ALL.iter().copied().find(|x| x.label() == t).ok_or_else(|| Error::UnknownName(s.into()))
    }

    pub fn default_n(self) -> usize {
        match self {
            TableId::Ric8 | TableId::Cur8 => 4,
            TableId::Ric6 | TableId::Cur6 => 3,
            TableId::Ric4 | TableId::Cur4 => 2,
        }
    }

    pub fn valid_at(self, n: usize) -> bool {
        match self {
            TableId::Ric8 | TableId::Cur8 => n == 4 || n == 5,
            _ => n == self.default_n(),
        }
    }

    fn check(self, n: usize) -> Result<()> {
        if self.valid_at(n) {
            Ok(())
        } else {
            Err(Error::InvalidClass { label: format!("table {}", self.label()), n })
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Source space of a table row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// dη̂ ∈ Λ².
    Deta,
    /// dη̂ restricted to Hermitian 2-forms.
    DetaHermitian,
    /// ∇̄ξ_c together with ηξ_c, realized as ∇̃ξ ∈ T*⊗W_c.
    Deriv(GHClass),
    /// ξ_c⊗ξ_c.
    Square(GHClass),
    /// ξ_c⊙ξ_d.
    Cross(GHClass, GHClass),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSpec {
    pub label: String,
    pub kind: RowKind,
}

impl RowSpec {
    pub fn new(kind: RowKind) -> RowSpec {
        let label = match kind {
            RowKind::Deta => "deta".to_string(),
            RowKind::DetaHermitian => "deta_H".to_string(),
            RowKind::Deriv(c) => format!("D{}", c.tag()),
            RowKind::Square(c) => format!("oo{}{}", c.tag(), c.tag()),
            RowKind::Cross(a, b) => format!("od{}{}", a.tag(), b.tag()),
        };
        RowSpec { label, kind }
    }

    /// Dimension of the source space.
    pub fn source_dim(&self, n: usize) -> Result<usize> {
        let m = TorsionModel::get(n)?;
        let d = 2 * n;
        Ok(match self.kind {
            RowKind::Deta => d * (d - 1) / 2,
            RowKind::DetaHermitian => n * n,
            RowKind::Deriv(c) => d * m.class_basis(c)?.len(),
            RowKind::Square(c) => {
                let k = m.class_basis(c)?.len();
                k * (k + 1) / 2
            }
            RowKind::Cross(a, b) => m.class_basis(a)?.len() * m.class_basis(b)?.len(),
        })
    }
}

/// Class groups whose rows make up a table at `n`: U(n) classes for n ≥ 4,
/// the SU(3) refinement at n = 3, and at n = 2 the U(2) classes followed by
/// the ξ± split.
pub fn row_groups(n: usize) -> Vec<Vec<GHClass>> {
    use GHClass::*;
    match n {
        2 => vec![vec![W2, W4], vec![WPlus, WMinus]],
        3 => vec![vec![W1Plus, W1Minus, W2Plus, W2Minus, W3, W4]],
        _ => vec![vec![W1, W2, W3, W4]],
    }
}

pub fn rows(n: usize) -> Vec<RowSpec> {
    let mut out = vec![RowSpec::new(RowKind::Deta)];
    for g in row_groups(n) {
        out.extend(g.iter().map(|&c| RowSpec::new(RowKind::Deriv(c))));
        out.extend(g.iter().map(|&c| RowSpec::new(RowKind::Square(c))));
        for (i, &a) in g.iter().enumerate() {
            out.extend(g[i + 1..].iter().map(|&b| RowSpec::new(RowKind::Cross(a, b))));
        }
    }
    out
}

pub fn find_row(n: usize, label: &str) -> Result<RowSpec> {
    if label == "deta_H" {
        return Ok(RowSpec::new(RowKind::DetaHermitian));
    }
    rows(n).into_iter().find(|r| r.label == label).ok_or_else(|| Error::UnknownName(format!("row {}", label)))
}

/// Target of a table column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColTarget {
    Part(Part),
    /// Component of π₂ applied to the pi1-jet value.
    Pi2(ModuleName),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColSpec {
    pub label: String,
    pub formula: FormulaId,
    pub target: ColTarget,
}

impl ColSpec {
    fn new(label: &str, formula: FormulaId, target: ColTarget) -> ColSpec {
        ColSpec { label: label.to_string(), formula, target }
    }

    /// Columns that go through the pseudo-inverse π₂; their diffs are
    /// warnings only.
    pub fn pi2_sensitive(&self) -> bool {
        matches!(self.target, ColTarget::Pi2(_))
    }

    /// Upper bound for the rank of any map into this column.
    pub fn target_dim(&self, n: usize) -> Result<usize> {
        Ok(match self.target {
            ColTarget::Part(p) => p.dim(n),
            ColTarget::Pi2(m) => ModuleAtlas::get(n)?.module(m)?.rank,
        })
    }
}

pub fn columns(table: TableId, n: usize) -> Result<Vec<ColSpec>> {
    use ColTarget::{Part as P, Pi2};
    use FormulaId as F;
    table.check(n)?;
    let ric = |psi: bool| {
        let mut v = vec![
            ColSpec::new("Ric*:R", F::RicstarSu, P(Part::Scalar)),
            ColSpec::new("Ric*:l11", F::RicstarSu, P(Part::L11)),
        ];
        if psi {
            v.push(ColSpec::new("Ric*:psi+", F::RicstarSu, P(Part::PsiPlus)));
            v.push(ColSpec::new("Ric*:psi-", F::RicstarSu, P(Part::PsiMinus)));
        } else {
            v.push(ColSpec::new("Ric*:l20", F::RicstarSu, P(Part::L20)));
        }
        v.push(ColSpec::new("Ric:R", F::RicSu, P(Part::Scalar)));
        v.push(ColSpec::new("Ric:l11", F::RicSu, P(Part::L11)));
        v.push(ColSpec::new("Ric:s20", F::RicSu, P(Part::S20)));
        v
    };
    let kahler_cols = || {
        vec![
            ColSpec::new("K1", F::Combo31, P(Part::Scalar)),
            ColSpec::new("K2", F::Combo31, P(Part::L11)),
            ColSpec::new("K-1", F::HermDiff, P(Part::Scalar)),
            ColSpec::new("K-2", F::HermDiff, P(Part::L11)),
            ColSpec::new("C6:ricstar-AH-a", F::RicstarAhA, P(Part::L20)),
        ]
    };
    Ok(match table {
        TableId::Ric8 | TableId::Ric6 => ric(false),
        TableId::Ric4 => ric(true),
        TableId::Cur8 => {
            let mut v = kahler_cols();
            v.push(ColSpec::new("C6:ricstar-AH-b", F::RicstarAhB, P(Part::L20)));
            v.push(ColSpec::new("C8", F::RicAh, P(Part::S20)));
            v.push(ColSpec::new("C4", F::Pi1Jet, Pi2(ModuleName::C4)));
            v.push(ColSpec::new("C5", F::Pi1Jet, Pi2(ModuleName::C5)));
            v.push(ColSpec::new("C7", F::Pi1Jet, Pi2(ModuleName::C7)));
            v
        }
        TableId::Cur6 => {
            let mut v = kahler_cols();
            v.push(ColSpec::new("C8", F::RicAh, P(Part::S20)));
            v.push(ColSpec::new("C5", F::Pi1Jet, Pi2(ModuleName::C5)));
            v.push(ColSpec::new("C7", F::Pi1Jet, Pi2(ModuleName::C7)));
            v
        }
        TableId::Cur4 => vec![
            ColSpec::new("K1", F::K1k2_4d, P(Part::Scalar)),
            ColSpec::new("K2", F::K1k2_4d, P(Part::L11)),
            ColSpec::new("K-1", F::Beta4d, P(Part::Scalar)),
            // The C6± lines pair with the opposite ψ: the ψ₋-coordinate of
            // Ric*_AH spans C6+.
            ColSpec::new("C6+", F::RicstarAhA, P(Part::PsiMinus)),
            ColSpec::new("C6-", F::RicstarAhA, P(Part::PsiPlus)),
            ColSpec::new("C8", F::RicAh, P(Part::S20)),
            ColSpec::new("C5++", F::Pi1Jet, Pi2(ModuleName::C5pp)),
            ColSpec::new("C5--", F::Pi1Jet, Pi2(ModuleName::C5mm)),
            ColSpec::new("C5+-", F::Pi1Jet, Pi2(ModuleName::C5pm)),
        ],
    })
}

pub fn find_column(table: TableId, n: usize, label: &str) -> Result<ColSpec> {
    columns(table, n)?
        .into_iter()
        .find(|c| c.label == label)
        .ok_or_else(|| Error::UnknownName(format!("column {} of {}", label, table)))
}

/// Column with an arbitrary formula/target pair, for checks outside the
/// fixed tables.
pub fn custom_column(label: &str, formula: FormulaId, target: ColTarget) -> ColSpec {
    ColSpec::new(label, formula, target)
}

enum Source<T: Ring> {
    Deta(Tensor<T>),
    Deriv(Tensor<T>),
    Quad(Tensor<T>, Tensor<T>),
}

fn int_to<T: Ring>(x: Int) -> T {
    T::from_i64(i64::try_from(x.0).expect("small basis entry"))
}

fn class_tensor<T: Ring>(d: usize, v: &[Int]) -> Tensor<T> {
    Tensor::from_vec(d, 3, v.iter().map(|&x| int_to(x)).collect()).expect("rank-3 data")
}

/// The `idx`-th basis element of a row's source space.
fn source<T: Ring>(s: &UnStructure, row: &RowSpec, idx: usize) -> Result<Source<T>> {
    let d = s.d;
    let m = TorsionModel::get(s.n)?;
    Ok(match row.kind {
        RowKind::Deta => {
            let (i, j) = pair_at(d, idx);
            Source::Deta(Tensor::<T>::basis_form(d, &[i, j]))
        }
        RowKind::DetaHermitian => Source::Deta(s.un_basis()[idx].map(|&x| int_to(x))),
        RowKind::Deriv(c) => {
            let b = m.class_basis(c)?;
            let (a, k) = (idx / b.len(), idx % b.len());
            let mut t = Tensor::zeros(d, 4);
            let m3 = d * d * d;
            for (o, &x) in t.data[a * m3..(a + 1) * m3].iter_mut().zip(&b[k]) {
                *o = int_to(x);
            }
            Source::Deriv(t)
        }
        RowKind::Square(c) => {
            let b = m.class_basis(c)?;
            let (i, j) = upper_pair_at(b.len(), idx);
            Source::Quad(class_tensor(d, &b[i]), class_tensor(d, &b[j]))
        }
        RowKind::Cross(a, c) => {
            let ba = m.class_basis(a)?;
            let bc = m.class_basis(c)?;
            let (i, j) = (idx / bc.len(), idx % bc.len());
            Source::Quad(class_tensor(d, &ba[i]), class_tensor(d, &bc[j]))
        }
    })
}

/// idx-th pair i < j in lexicographic order.
fn pair_at(d: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..d {
        let cnt = d - i - 1;
        if idx < cnt {
            return (i, i + 1 + idx);
        }
        idx -= cnt;
    }
    panic!("pair index out of range")
}

/// idx-th pair i ≤ j in lexicographic order.
fn upper_pair_at(k: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..k {
        let cnt = k - i;
        if idx < cnt {
            return (i, i + idx);
        }
        idx -= cnt;
    }
    panic!("pair index out of range")
}

fn eval_source<T: Ring>(s: &UnStructure, id: FormulaId, src: &Source<T>) -> Result<Value<T>> {
    let d = s.d;
    match src {
        Source::Deta(de) => {
            let (z4, z3) = (Tensor::zeros(d, 4), Tensor::zeros(d, 3));
            eval_raw(s, id, &Inputs { dxi: &z4, u: &z3, v: &z3, de }, Terms::DETA)
        }
        Source::Deriv(dxi) => {
            let (z3, z2) = (Tensor::zeros(d, 3), Tensor::zeros(d, 2));
            eval_raw(s, id, &Inputs { dxi, u: &z3, v: &z3, de: &z2 }, Terms::LIN)
        }
        Source::Quad(u, v) => eval_polarized(s, id, u, v),
    }
}

fn column_image<T: Ring>(s: &UnStructure, col: &ColSpec, value: &Value<T>) -> Result<Vec<T>> {
    match col.target {
        ColTarget::Part(p) => part_of(s, value.bilinear()?, p),
        ColTarget::Pi2(m) => {
            let Value::Pi1(x) = value else {
                return Err(Error::Domain(format!("column {} needs the pi1-jet formula", col.label)));
            };
            if m.in_kahler() {
                return Err(Error::InvalidClass { label: format!("{} (π₂ lands in 𝓚^⊥)", m.label()), n: s.n });
            }
            let cs = CurvSpace::get(s.n)?;
            let xv = cs.from_tensor(x);
            let basis = ModuleAtlas::get(s.n)?.module(m)?.basis();
            // P_M π₂ x = s_M⁻¹ P_M x vanishes iff x is orthogonal to M.
            Ok(basis
                .iter()
                .map(|b| {
                    let mut acc = T::zero();
                    for (xi, bi) in xv.iter().zip(b) {
                        if bi.0 != 0 && !xi.is_zero() {
                            acc.add_assign_ref(&(xi.clone() * int_to::<T>(*bi)));
                        }
                    }
                    acc
                })
                .collect())
        }
    }
}

/// Images of all source basis elements of a row, per column: `out[c][k]`.
pub fn row_images<T: Ring>(n: usize, row: &RowSpec, cols: &[ColSpec], exec: Exec) -> Result<Vec<Vec<Vec<T>>>> {
    let s = UnStructure::get(n)?;
    for c in cols {
        c.formula.check_n(n)?;
        if let ColTarget::Pi2(m) = c.target {
            ModuleAtlas::get(n)?.module(m)?;
        }
    }
    let len = row.source_dim(n)?;
    let mut formulas: Vec<FormulaId> = cols.iter().map(|c| c.formula).collect();
    formulas.sort();
    formulas.dedup();
    let per_elem: Vec<Result<Vec<Vec<T>>>> = exec.map_range(len, |k| {
        let src = source::<T>(s, row, k)?;
        let mut imgs: Vec<Option<Vec<T>>> = vec![None; cols.len()];
        for &f in &formulas {
            let v = eval_source(s, f, &src)?;
            for (ci, c) in cols.iter().enumerate() {
                if c.formula == f {
                    imgs[ci] = Some(column_image(s, c, &v)?);
                }
            }
        }
        Ok(imgs.into_iter().map(|x| x.expect("every column evaluated")).collect())
    });
    let mut out: Vec<Vec<Vec<T>>> = vec![Vec::with_capacity(len); cols.len()];
    for r in per_elem {
        for (ci, img) in r?.into_iter().enumerate() {
            out[ci].push(img);
        }
    }
    Ok(out)
}

/// Exact matrix of the map from a row's source space to a column's target
/// coordinates, one image vector per source basis element.
pub fn assemble_map(row: &RowSpec, col: &ColSpec, n: usize) -> Result<Vec<Vec<Int>>> {
    Ok(row_images::<Int>(n, row, std::slice::from_ref(col), Exec::default())?.remove(0))
}

/// Exact rank and Frobenius norm² of an assembled map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub rank: usize,
    pub norm2: BigInt,
}

pub fn witness(images: &[Vec<Int>], upper: usize) -> Witness {
    if images.is_empty() {
        return Witness { rank: 0, norm2: BigInt::from(0) };
    }
    Witness { rank: certified_rank(images, upper), norm2: norm2_big(images) }
}

/// Arithmetic used to decide cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    /// Floating-point pre-filter: cells are flagged, never decided.
    Float,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s.trim() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            _ => Err(Error::UnknownName(s.into())),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub row: String,
    pub column: String,
    pub tick: bool,
    /// Exact rank (exact mode only).
    pub rank: Option<usize>,
    /// Frobenius norm² of the assembled images, exact integer or float.
    pub norm2: String,
    pub source_dim: usize,
    pub expected: Option<bool>,
    pub pi2_sensitive: bool,
}

impl Cell {
    pub fn agrees(&self) -> Option<bool> {
        self.expected.map(|e| e == self.tick)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableAudit {
    pub table: TableId,
    pub n: usize,
    pub mode: Mode,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// Row-major.
    pub cells: Vec<Cell>,
    pub fixture_loaded: bool,
}

impl TableAudit {
    pub fn cell(&self, row: &str, col: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row && c.column == col)
    }

    /// Cells disagreeing with the fixture outside the π₂ columns.
    pub fn diffs(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| !c.pi2_sensitive && c.agrees() == Some(false)).collect()
    }

    /// Disagreeing cells in π₂-sensitive columns.
    pub fn pi2_diffs(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| c.pi2_sensitive && c.agrees() == Some(false)).collect()
    }

    pub fn matches(&self) -> bool {
        self.diffs().is_empty()
    }
}

/// Decide a set of rows × columns.
pub fn audit_cells(
    table: TableId,
    n: usize,
    rows: &[RowSpec],
    cols: &[ColSpec],
    fixture: Option<&Fixture>,
    mode: Mode,
    exec: Exec,
) -> Result<TableAudit> {
    table.check(n)?;
    if let Some(f) = fixture {
        if f.table != table {
            return Err(Error::Fixture(format!("fixture is for {}, not {}", f.table, table)));
        }
    }
    let mut cells = Vec::new();
    for row in rows {
        let dim = row.source_dim(n)?;
        let decided: Vec<(bool, Option<usize>, String)> = match mode {
            Mode::Exact => {
                let imgs = row_images::<Int>(n, row, cols, exec)?;
                imgs.iter()
                    .zip(cols)
                    .map(|(im, c)| {
                        let w = witness(im, c.target_dim(n)?);
                        Ok((w.rank > 0, Some(w.rank), w.norm2.to_string()))
                    })
                    .collect::<Result<_>>()?
            }
            Mode::Float => {
                let imgs = row_images::<f64>(n, row, cols, exec)?;
                imgs.iter()
                    .map(|im| {
                        let norm2: f64 = im.iter().flatten().map(|x| x * x).sum();
                        let maxabs = im.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
                        (maxabs > FLOAT_TAU, None, format!("{:.6e}", norm2))
                    })
                    .collect()
            }
        };
        for (c, (tick, rank, norm2)) in cols.iter().zip(decided) {
            let expected = fixture.and_then(|f| f.expect(&row.label, &c.label)).map(|e| e.tick_at(n));
            cells.push(Cell {
                row: row.label.clone(),
                column: c.label.clone(),
                tick,
                rank,
                norm2,
                source_dim: dim,
                expected,
                pi2_sensitive: c.pi2_sensitive(),
            });
        }
    }
    Ok(TableAudit {
        table,
        n,
        mode,
        rows: rows.iter().map(|r| r.label.clone()).collect(),
        columns: cols.iter().map(|c| c.label.clone()).collect(),
        cells,
        fixture_loaded: fixture.is_some(),
    })
}

/// Full table audit against an optional fixture.
pub fn audit_table(table: TableId, n: usize, fixture: Option<&Fixture>, mode: Mode, exec: Exec) -> Result<TableAudit> {
    let cols = columns(table, n)?;
    if let Some(f) = fixture {
        for c in &cols {
            if !f.columns.contains(&c.label) {
                return Err(Error::Fixture(format!("column {} missing from fixture {}", c.label, table)));
            }
        }
    }
    audit_cells(table, n, &rows(n), &cols, fixture, mode, exec)
}

impl Expect {
    /// Whether the fixture predicts a tick at `n`.
    pub fn tick_at(self, n: usize) -> bool {
        match self {
            Expect::Tick => true,
            Expect::Blank => false,
            Expect::AbsentAt8 => n != 4,
        }
    }
}
