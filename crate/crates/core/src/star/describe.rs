//! Plain-text description of a derived warehouse.

use std::fmt::Write;

use super::derive::{Placement, WarehouseSchema};
use crate::relational::TableSchema;

fn table_block(out: &mut String, table: &TableSchema, role: &str) {
    let _ = writeln!(
        out,
        "[{}] {role}, record length {}, business key ({})",
        table.name,
        table.record_length,
        table.primary_key.join(", ")
    );
    for f in &table.fields {
        let _ = writeln!(out, "  {:<20} {:<8} {:>3}", f.name, f.kind.label(), f.width);
    }
}

/// Stable text listing of every table, its fields and dimension placements.
pub fn describe_warehouse(w: &WarehouseSchema) -> String {
    let mut out = String::new();
    let tables = w.tables();
    let total: usize = tables.iter().map(|t| t.record_length).sum();
    let _ = writeln!(
        out,
        "warehouse: {} tables, {} dimension tables, total record length {total}",
        tables.len(),
        w.shared_dims.len()
    );
    for dim in &w.shared_dims {
        out.push('\n');
        table_block(&mut out, dim, "dimension");
        let _ = writeln!(out, "  used by: {}", w.dim_users(&dim.name).join(", "));
    }
    for star in &w.facts {
        out.push('\n');
        let role = format!("fact for report {} ({})", star.report_id, star.report_name);
        table_block(&mut out, &star.fact, &role);
        let _ = writeln!(out, "  dimensions:");
        for (name, placement) in &star.placements {
            let line = match placement {
                Placement::DimTable { table, foreign_key } => {
                    format!("dimension table {table} via {foreign_key}")
                }
                Placement::Inline { reason, fields } => {
                    format!("inline [{}] ({})", fields.join(", "), reason.code())
                }
                Placement::Absorbed { reason, into } => {
                    format!("absorbed into {into} ({})", reason.code())
                }
            };
            let _ = writeln!(out, "    {name:<14} {line}");
        }
        let split = format!("1 fact + {} dimension tables", star.dims.len());
        let _ = writeln!(out, "  split: {split}");
    }
    out
}
