//! Reproduction of the contribution tables, the d²ω identity and the
//! Einstein and consequence checks, with reports.

pub mod checks;
pub mod decompose;
pub mod fixture;
pub mod identity;
pub mod report;
pub mod tables;

pub use decompose::{decompose, Decomposition};
pub use fixture::{Expect, Fixture};
pub use identity::{derive_d2omega_relation, derive_d2omega_relation_seeded, formula_dependence, D2Relation, FormulaDependence};
pub use report::{render, DimsReport, Format, GrayReport, IdentityReport, RemarkReport, Render};
pub use tables::{assemble_map, audit_cells, audit_table, columns, rows, Cell, ColSpec, ColTarget, Mode, RowKind, RowSpec, TableAudit, TableId};
