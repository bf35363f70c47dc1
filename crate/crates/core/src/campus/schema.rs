//! The eight-table academic OLTP schema.
//!
//! Field layouts carry only the attributes the reports and ETL need; a
//! trailing `padding` field brings each record to its operational length.

use crate::relational::{define_table, FieldSpec, TableSchema};

pub const MMAHASISWA: &str = "MMAHASISWA";
pub const MPRODI: &str = "MPRODI";
pub const MFAKULTAS: &str = "MFAKULTAS";
pub const MJENJANG: &str = "MJENJANG";
pub const TRKRS: &str = "TRKRS";
pub const TJADKUL: &str = "TJADKUL";
pub const TDOSFAK: &str = "TDOSFAK";
pub const MTBMTKL: &str = "MTBMTKL";

/// Table order used for snapshots and capacity reports.
pub const OLTP_TABLES: [&str; 8] = [
    MMAHASISWA, MPRODI, MFAKULTAS, MJENJANG, TRKRS, TJADKUL, TDOSFAK, MTBMTKL,
];

pub const INT_WIDTH: usize = 4;
pub const DATE_WIDTH: usize = 10;

pub const GENDERS: [&str; 2] = ["P", "W"];
/// `-` marks a course whose exam was not taken.
pub const GRADES: [&str; 6] = ["A", "B", "C", "D", "E", "-"];
pub const NO_EXAM: &str = "-";

/// Degree-level codes: 30 = Diploma 3, 50 = Strata Satu, 60 is a reserve
/// level no study program uses.
pub const JENJANG: [(&str, &str, &str); 3] = [
    ("30", "D3", "Diploma 3"),
    ("50", "S1", "Strata Satu"),
    ("60", "S2", "Strata Dua"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Semester {
    /// Odd term, also called Ganjil.
    Gasal,
    /// Even term.
    Genap,
}

impl Semester {
    pub const ALL: [Semester; 2] = [Semester::Gasal, Semester::Genap];

    pub fn code(self) -> &'static str {
        match self {
            Semester::Gasal => "Gasal",
            Semester::Genap => "Genap",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Semester::Gasal => "Ganjil",
            Semester::Genap => "Genap",
        }
    }

    pub fn parse(s: &str) -> Option<Semester> {
        match s {
            "Gasal" | "Ganjil" => Some(Semester::Gasal),
            "Genap" => Some(Semester::Genap),
            _ => None,
        }
    }
}

pub fn nim() -> FieldSpec {
    FieldSpec::text("nim", 10)
}
pub fn kd_prodi() -> FieldSpec {
    FieldSpec::text("kd_prodi", 5)
}
pub fn kd_fakultas() -> FieldSpec {
    FieldSpec::text("kd_fakultas", 2)
}
pub fn kd_jenjang() -> FieldSpec {
    FieldSpec::enumeration("kd_jenjang", 2, JENJANG.iter().map(|j| j.0))
}
pub fn jenis_kelamin() -> FieldSpec {
    FieldSpec::enumeration("jenis_kelamin", 1, GENDERS)
}
pub fn angkatan() -> FieldSpec {
    FieldSpec::integer("angkatan", INT_WIDTH)
}
pub fn tahun_ajaran() -> FieldSpec {
    FieldSpec::integer("tahun_ajaran", INT_WIDTH)
}
pub fn semester() -> FieldSpec {
    FieldSpec::enumeration("semester", 5, Semester::ALL.map(Semester::code))
}
pub fn grade() -> FieldSpec {
    FieldSpec::enumeration("grade", 1, GRADES)
}
pub fn sks() -> FieldSpec {
    FieldSpec::integer("sks", INT_WIDTH)
}
pub fn kd_mtk() -> FieldSpec {
    FieldSpec::text("kd_mtk", 7)
}
pub fn kd_dosen() -> FieldSpec {
    FieldSpec::text("kd_dosen", 5)
}

fn padded(name: &str, mut fields: Vec<FieldSpec>, record_length: usize, key: &[&str]) -> TableSchema {
    let used: usize = fields.iter().map(|f| f.width).sum();
    fields.push(FieldSpec::text("padding", record_length - used));
    define_table(name, fields, key).expect("static OLTP layout is valid")
}

/// The OLTP table set, in [`OLTP_TABLES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct OltpSchema {
    pub tables: Vec<TableSchema>,
}

impl OltpSchema {
    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn total_record_length(&self) -> usize {
        self.tables.iter().map(|t| t.record_length).sum()
    }
}

pub fn build_oltp_schema() -> OltpSchema {
    let tables = vec![
        padded(
            MMAHASISWA,
            vec![
                nim(),
                FieldSpec::text("nm_mhs", 40),
                jenis_kelamin(),
                angkatan(),
                kd_prodi(),
            ],
            586,
            &["nim"],
        ),
        padded(
            MPRODI,
            vec![
                kd_prodi(),
                kd_fakultas(),
                kd_jenjang(),
                FieldSpec::text("singkatan_prodi", 4),
                FieldSpec::text("nm_prodi", 30),
            ],
            48,
            &["kd_prodi"],
        ),
        padded(
            MFAKULTAS,
            vec![
                kd_fakultas(),
                FieldSpec::text("singkatan_fakultas", 4),
                FieldSpec::text("nm_fakultas", 40),
            ],
            65,
            &["kd_fakultas"],
        ),
        padded(
            MJENJANG,
            vec![
                kd_jenjang(),
                FieldSpec::text("nm_jenjang", 2),
                FieldSpec::text("ket_jenjang", 15),
            ],
            24,
            &["kd_jenjang"],
        ),
        padded(
            TRKRS,
            vec![
                nim(),
                tahun_ajaran(),
                semester(),
                kd_mtk(),
                kd_prodi(),
                angkatan(),
                sks(),
                grade(),
            ],
            68,
            &["nim", "tahun_ajaran", "semester", "kd_mtk"],
        ),
        padded(
            TJADKUL,
            vec![
                tahun_ajaran(),
                semester(),
                kd_mtk(),
                FieldSpec::text("kelas", 2),
                FieldSpec::integer("pertemuan", INT_WIDTH),
                kd_dosen(),
            ],
            88,
            &["tahun_ajaran", "semester", "kd_mtk", "kelas", "pertemuan"],
        ),
        padded(
            TDOSFAK,
            vec![kd_dosen(), FieldSpec::text("nm_dosen", 30), kd_fakultas()],
            73,
            &["kd_dosen"],
        ),
        padded(
            MTBMTKL,
            vec![
                kd_mtk(),
                FieldSpec::text("nm_mtk", 40),
                FieldSpec::text("nm_singkat_mtk", 16),
                sks(),
                FieldSpec::text("nm_pembina", 30),
            ],
            147,
            &["kd_mtk"],
        ),
    ];
    OltpSchema { tables }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::FieldKind;

    #[test]
    fn record_lengths_match_operational_tables() {
        let schema = build_oltp_schema();
        let lengths: Vec<usize> = schema.tables.iter().map(|t| t.record_length).collect();
        assert_eq!(lengths, [586, 48, 65, 24, 68, 88, 73, 147]);
        assert_eq!(schema.total_record_length(), 1099);
        let names: Vec<&str> = schema.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, OLTP_TABLES);
    }

    #[test]
    fn jenjang_domain() {
        let schema = build_oltp_schema();
        let field = schema.table(MJENJANG).unwrap().field("kd_jenjang").unwrap();
        let FieldKind::Enum(domain) = &field.kind else {
            panic!("kd_jenjang should be an enum")
        };
        assert!(domain.contains(&"50".to_string()));
        assert!(domain.contains(&"30".to_string()));
        assert_eq!(domain.len(), 3);
    }

    #[test]
    fn semester_labels() {
        assert_eq!(Semester::parse("Ganjil"), Some(Semester::Gasal));
        assert_eq!(Semester::Gasal.label(), "Ganjil");
        assert_eq!(Semester::parse(Semester::Genap.code()), Some(Semester::Genap));
        assert_eq!(Semester::parse("x"), None);
    }
}
