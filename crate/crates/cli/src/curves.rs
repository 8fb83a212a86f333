//! Polar-angle-versus-reflectivity curve tables for two-outcome
//! measurements of fixed strength.
//!
//! For strength `epsilon` and splitter reflectivity `r`, the dominant
//! outcome direction satisfies `cos(theta) = (2 r^2 - 1) / epsilon`, defined
//! whenever `|2 r^2 - 1| <= epsilon`. Outside that window no arm overlap
//! realizes the strength and the pair is skipped. Every curve passes through
//! the balanced-splitter point `(1/sqrt(2), pi/2)`, which is injected into
//! the grid so the merge point is always present exactly.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub r: f64,
    pub theta: f64,
}

#[derive(Clone, Debug)]
pub struct CurveTable {
    /// Rows sorted by `(epsilon, r)`.
    pub points: Vec<CurvePoint>,
    /// Number of grid pairs with no feasible arm overlap.
    pub skipped: usize,
}

/// Evaluate the curves for every strength in `eps_list` on a reflectivity
/// grid of `grid_size` equispaced points over `[0, 1]` plus the injected
/// balanced point.
pub fn emit_theta_curves(eps_list: &[f64], grid_size: usize) -> Result<CurveTable, String> {
    if grid_size < 2 {
        return Err(format!("grid size {grid_size} is too small; need at least 2"));
    }
    if eps_list.is_empty() {
        return Err("at least one strength value is required".into());
    }
    for &epsilon in eps_list {
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 1.0 {
            return Err(format!("strength {epsilon} outside (0, 1]"));
        }
    }
    let mut strengths = eps_list.to_vec();
    strengths.sort_by(f64::total_cmp);
    strengths.dedup();

    let mut reflectivities: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / (grid_size - 1) as f64)
        .collect();
    reflectivities.push(FRAC_1_SQRT_2);
    reflectivities.sort_by(f64::total_cmp);
    reflectivities.dedup();

    let mut points = Vec::new();
    let mut skipped = 0;
    for &epsilon in &strengths {
        for &r in &reflectivities {
            let u = 2.0 * r * r - 1.0;
            if u.abs() <= epsilon {
                let theta = (u / epsilon).clamp(-1.0, 1.0).acos();
                points.push(CurvePoint { epsilon, r, theta });
            } else {
                skipped += 1;
            }
        }
    }
    Ok(CurveTable { points, skipped })
}

/// Render the table as CSV with 17-significant-digit floats and a footer
/// comment recording the skipped pairs.
pub fn format_csv(table: &CurveTable) -> String {
    let mut out = String::from("epsilon,r,theta\n");
    for point in &table.points {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            point.epsilon, point.r, point.theta
        );
    }
    let _ = writeln!(
        out,
        "# skipped {} infeasible (epsilon, r) pairs",
        table.skipped
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn every_curve_contains_the_balanced_merge_point() {
        let table = emit_theta_curves(&[0.3, 0.6, 0.9], 25).unwrap();
        for target in [0.3, 0.6, 0.9] {
            let hit = table
                .points
                .iter()
                .find(|p| p.epsilon == target && p.r == FRAC_1_SQRT_2)
                .expect("merge point must be injected");
            assert!((hit.theta - FRAC_PI_2).abs() < 1e-9);
        }
    }

    #[test]
    fn feasibility_window_matches_the_strength() {
        let table = emit_theta_curves(&[0.5], 1001).unwrap();
        let lo = (0.25f64).sqrt();
        let hi = (0.75f64).sqrt();
        for p in &table.points {
            assert!(p.r >= lo - 1e-12 && p.r <= hi + 1e-12);
        }
        assert!(table.skipped > 0);
        let total = table.points.len() + table.skipped;
        assert_eq!(total, 1002);
    }

    #[test]
    fn rows_are_sorted_and_theta_is_monotone() {
        let table = emit_theta_curves(&[0.9, 0.3], 400).unwrap();
        let mut previous: Option<&CurvePoint> = None;
        for point in &table.points {
            if let Some(prev) = previous {
                assert!(
                    (point.epsilon, point.r) > (prev.epsilon, prev.r),
                    "rows must be sorted by (epsilon, r)"
                );
                if point.epsilon == prev.epsilon {
                    assert!(point.theta < prev.theta, "theta must fall as r grows");
                }
            }
            previous = Some(point);
        }
        assert_eq!(table.points.first().unwrap().epsilon, 0.3);
    }

    #[test]
    fn full_strength_spans_the_whole_grid() {
        let table = emit_theta_curves(&[1.0], 11).unwrap();
        assert_eq!(table.skipped, 0);
        assert!((table.points.first().unwrap().theta - std::f64::consts::PI).abs() < 1e-12);
        assert!(table.points.last().unwrap().theta.abs() < 1e-12);
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(emit_theta_curves(&[0.5], 1).is_err());
        assert!(emit_theta_curves(&[], 10).is_err());
        assert!(emit_theta_curves(&[0.0], 10).is_err());
        assert!(emit_theta_curves(&[1.2], 10).is_err());
    }

    #[test]
    fn csv_uses_seventeen_significant_digits() {
        let table = emit_theta_curves(&[0.3], 3).unwrap();
        let csv = format_csv(&table);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "epsilon,r,theta");
        let first = lines.next().unwrap();
        for field in first.split(',') {
            let mantissa = field.split('e').next().unwrap();
            let decimals = mantissa.split('.').nth(1).unwrap();
            assert_eq!(decimals.len(), 16, "field {field} lost precision");
        }
        let eps_back: f64 = first.split(',').next().unwrap().parse().unwrap();
        assert_eq!(eps_back, 0.3, "formatting must round-trip exactly");
        assert!(csv.trim_end().ends_with("infeasible (epsilon, r) pairs"));
    }
}
