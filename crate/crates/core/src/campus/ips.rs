//! Semester grade-point average (IPS).

use super::schema::NO_EXAM;

/// Points on the 4-point scale; `None` for ungraded (`-`) or unknown letters.
pub fn grade_points(grade: &str) -> Option<i64> {
    match grade {
        "A" => Some(4),
        "B" => Some(3),
        "C" => Some(2),
        "D" => Some(1),
        "E" => Some(0),
        _ => None,
    }
}

/// Credit-weighted grade average over one student-semester's courses.
///
/// Courses graded `-` are left out of both sums. Returns `None` when no
/// graded credits remain.
pub fn compute_ips<'a>(courses: impl IntoIterator<Item = (&'a str, i64)>) -> Option<f64> {
    let (mut points, mut credits) = (0i64, 0i64);
    for (grade, sks) in courses {
        if grade == NO_EXAM {
            continue;
        }
        if let Some(p) = grade_points(grade) {
            points += p * sks;
            credits += sks;
        }
    }
    (credits > 0).then(|| points as f64 / credits as f64)
}
