//! Deterministic result formatting.
//!
//! Machine outputs are JSON rendered from typed documents plus CSV files
//! with fixed significant-digit formatting, no timestamps, and LF line
//! endings, so identical configurations reproduce byte-identical files.

use crate::dynamics::{AttractorClass, SweepResult, Trajectory};

/// 17 significant digits: round-trippable `f64`, used in summaries and
/// coordinate listings.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// 18 significant digits: trajectory CSV payload.
pub fn sig18(x: f64) -> String {
    format!("{x:.17e}")
}

/// `t,x1,x2,x3` rows at 18 significant digits.
pub fn trajectory_csv(traj: &Trajectory<f64>) -> String {
    let mut out = String::with_capacity(traj.len() * 80 + 16);
    out.push_str("t,x1,x2,x3\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        out.push_str(&sig18(*t));
        out.push(',');
        out.push_str(&sig18(s.x1));
        out.push(',');
        out.push_str(&sig18(s.x2));
        out.push(',');
        out.push_str(&sig18(s.x3));
        out.push('\n');
    }
    out
}

pub fn class_label(class: &AttractorClass) -> &'static str {
    match class {
        AttractorClass::Steady => "steady",
        AttractorClass::Periodic => "periodic",
        AttractorClass::Extinction { .. } => "extinction",
        AttractorClass::Diverged => "diverged",
        AttractorClass::Undetermined => "undetermined",
    }
}

/// One row per grid point; failed points carry `class=error` and empty
/// numeric fields.
pub fn sweep_csv(sweep: &SweepResult<f64>) -> String {
    let mut out = String::new();
    out.push_str(
        "r,x1_star,x2_star,x3_star,c2_sign,class,x1_min,x1_max,x2_min,x2_max,x3_min,x3_max,period\n",
    );
    for pt in &sweep.points {
        let mut cols: Vec<String> = vec![sig17(pt.r)];
        match &pt.interior {
            Some(s) => cols.extend([sig17(s.x1), sig17(s.x2), sig17(s.x3)]),
            None => cols.extend([String::new(), String::new(), String::new()]),
        }
        cols.push(pt.c2_sign.map(|s| s.to_string()).unwrap_or_default());
        match (&pt.cycle, &pt.error) {
            (Some(cy), _) => {
                cols.push(class_label(&cy.class).to_string());
                for j in 0..3 {
                    cols.push(sig17(cy.minima[j]));
                    cols.push(sig17(cy.maxima[j]));
                }
                cols.push(cy.period.map(sig17).unwrap_or_default());
            }
            (None, _) => {
                cols.push("error".to_string());
                cols.extend(std::iter::repeat(String::new()).take(7));
            }
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::State;

    #[test]
    fn sig18_roundtrips_f64_exactly() {
        for x in [
            1.0,
            -3.5,
            1.633264847742314e2,
            7.970e-2,
            f64::MIN_POSITIVE,
            1.0 / 3.0,
        ] {
            let s = sig18(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
    }

    #[test]
    fn trajectory_csv_shape() {
        let traj = Trajectory::from_samples(
            vec![0.0, 1.0],
            vec![State::new(1.0, 2.0, 3.0), State::new(4.0, 5.0, 6.0)],
        );
        let csv = trajectory_csv(&traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t,x1,x2,x3");
        assert!(!csv.contains('\r'));
        assert!(csv.ends_with('\n'));
    }
}
