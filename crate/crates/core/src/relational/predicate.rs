use super::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

/// Row filter evaluated during a scan.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    True,
    Cmp { field: String, op: CmpOp, value: Value },
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn cmp(field: impl Into<String>, op: CmpOp, value: impl Into<Value>) -> Self {
        Predicate::Cmp {
            field: field.into(),
            op,
            value: value.into(),
        }
    }

    pub fn eq(field: impl Into<String>, value: impl Into<Value>) -> Self {
        Self::cmp(field, CmpOp::Eq, value)
    }

    pub fn ne(field: impl Into<String>, value: impl Into<Value>) -> Self {
        Self::cmp(field, CmpOp::Ne, value)
    }

    pub fn and(self, other: Predicate) -> Self {
        match (self, other) {
            (Predicate::True, p) | (p, Predicate::True) => p,
            (Predicate::And(mut a), Predicate::And(b)) => {
                a.extend(b);
                Predicate::And(a)
            }
            (Predicate::And(mut a), p) => {
                a.push(p);
                Predicate::And(a)
            }
            (p, q) => Predicate::And(vec![p, q]),
        }
    }

    /// Field names referenced by this predicate.
    pub fn fields(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_fields(&mut out);
        out
    }

    fn collect_fields<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Predicate::True => {}
            Predicate::Cmp { field, .. } => out.push(field),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.collect_fields(out)),
            Predicate::Not(p) => p.collect_fields(out),
        }
    }

    /// Resolves field names to column positions.
    pub fn bind(&self, resolve: &impl Fn(&str) -> Option<usize>) -> Result<BoundPredicate, String> {
        Ok(match self {
            Predicate::True => BoundPredicate::True,
            Predicate::Cmp { field, op, value } => BoundPredicate::Cmp {
                index: resolve(field).ok_or_else(|| field.clone())?,
                op: *op,
                value: value.clone(),
            },
            Predicate::And(ps) => BoundPredicate::And(ps.iter().map(|p| p.bind(resolve)).collect::<Result<_, _>>()?),
            Predicate::Or(ps) => BoundPredicate::Or(ps.iter().map(|p| p.bind(resolve)).collect::<Result<_, _>>()?),
            Predicate::Not(p) => BoundPredicate::Not(Box::new(p.bind(resolve)?)),
        })
    }
}

#[derive(Debug, Clone)]
pub enum BoundPredicate {
    True,
    Cmp { index: usize, op: CmpOp, value: Value },
    And(Vec<BoundPredicate>),
    Or(Vec<BoundPredicate>),
    Not(Box<BoundPredicate>),
}

impl BoundPredicate {
    pub fn eval(&self, row: &[Value]) -> bool {
        match self {
            BoundPredicate::True => true,
            BoundPredicate::Cmp { index, op, value } => op.holds(row[*index].cmp(value)),
            BoundPredicate::And(ps) => ps.iter().all(|p| p.eval(row)),
            BoundPredicate::Or(ps) => ps.iter().any(|p| p.eval(row)),
            BoundPredicate::Not(p) => !p.eval(row),
        }
    }
}
