//! Exhaustive foreign-key check over an OLTP database.

use std::collections::HashSet;

use super::schema::*;
use crate::relational::{Database, Value};

/// (child table, child field, parent table, parent field)
pub const FOREIGN_KEYS: [(&str, &str, &str, &str); 8] = [
    (MMAHASISWA, "kd_prodi", MPRODI, "kd_prodi"),
    (MPRODI, "kd_fakultas", MFAKULTAS, "kd_fakultas"),
    (MPRODI, "kd_jenjang", MJENJANG, "kd_jenjang"),
    (TRKRS, "nim", MMAHASISWA, "nim"),
    (TRKRS, "kd_mtk", MTBMTKL, "kd_mtk"),
    (TJADKUL, "kd_mtk", MTBMTKL, "kd_mtk"),
    (TJADKUL, "kd_dosen", TDOSFAK, "kd_dosen"),
    (TDOSFAK, "kd_fakultas", MFAKULTAS, "kd_fakultas"),
];

/// One message per dangling reference; empty when all keys resolve.
pub fn referential_violations(db: &Database) -> Vec<String> {
    let mut out = Vec::new();
    for (child, field, parent, key) in FOREIGN_KEYS {
        let (Some(c), Some(p)) = (db.get(child), db.get(parent)) else {
            out.push(format!("missing table {child} or {parent}"));
            continue;
        };
        let (Some(ci), Some(pi)) = (c.schema().field_index(field), p.schema().field_index(key)) else {
            out.push(format!("missing field {child}.{field} or {parent}.{key}"));
            continue;
        };
        let parents: HashSet<&Value> = p.rows().iter().map(|r| &r[pi]).collect();
        for (pos, row) in c.rows().iter().enumerate() {
            if !parents.contains(&row[ci]) {
                out.push(format!("{child}[{pos}].{field} = {} has no {parent}", row[ci]));
            }
        }
    }
    out
}
