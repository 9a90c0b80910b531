use nalgebra::DVector;

/// Window upper bound for tail errors.
pub const TAIL_CEILING: f64 = 1e-2;
const MIN_TAIL_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateVerdict {
    Quadratic,
    NonQuadratic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Errors `e_k` used for the fit.
    pub errors: Vec<f64>,
    /// `e_{k+1} / e_k²`.
    pub ratios: Vec<f64>,
    /// Largest ratio.
    pub c_emp: f64,
    /// Least-squares slope of `ln e_{k+1}` against `ln e_k`.
    pub slope: f64,
    pub verdict: RateVerdict,
}

/// Rate statistics for an explicit error sequence (at least 3 positive values).
pub fn rate_from_errors(errors: &[f64]) -> RateReport {
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[1] / (w[0] * w[0])).collect();
    let c_emp = ratios.iter().copied().fold(f64::NAN, f64::max);
    let slope = loglog_slope(errors);
    let verdict =
        if errors.len() < 3 || errors.iter().any(|&e| e.is_nan() || e <= 0.0) || !slope.is_finite()
        {
            RateVerdict::Inconclusive
        } else if (1.7..=2.3).contains(&slope) {
            RateVerdict::Quadratic
        } else {
            RateVerdict::NonQuadratic
        };
    RateReport {
        errors: errors.to_vec(),
        ratios,
        c_emp,
        slope,
        verdict,
    }
}

fn loglog_slope(errors: &[f64]) -> f64 {
    let pairs: Vec<(f64, f64)> = errors.windows(2).map(|w| (w[0].ln(), w[1].ln())).collect();
    if pairs.is_empty() {
        return f64::NAN;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Measures the convergence order of `points` towards `x_star`.
///
/// The tail is the last strictly decreasing run of errors inside
/// `(floor, 1e-2]`; fewer than 4 such points gives an inconclusive report.
pub fn measure_quadratic_rate(
    points: &[DVector<f64>],
    x_star: &DVector<f64>,
    floor: f64,
) -> RateReport {
    let errors: Vec<f64> = points.iter().map(|p| (p - x_star).norm()).collect();
    let mut tail: Vec<f64> = Vec::new();
    for &e in &errors {
        let inside = e > floor && e <= TAIL_CEILING;
        match tail.last() {
            _ if !inside => {
                if e > TAIL_CEILING {
                    tail.clear();
                }
            }
            Some(&prev) if e >= prev => {
                tail.clear();
                tail.push(e);
            }
            _ => tail.push(e),
        }
    }
    let mut report = rate_from_errors(&tail);
    if tail.len() < MIN_TAIL_POINTS {
        report.verdict = RateVerdict::Inconclusive;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_sequence() {
        let r = rate_from_errors(&[0.1, 0.01, 1e-4, 1e-8]);
        assert!((r.slope - 2.0).abs() < 1e-12);
        for q in &r.ratios {
            assert!((q - 1.0).abs() < 1e-12);
        }
        assert_eq!(r.verdict, RateVerdict::Quadratic);
    }

    #[test]
    fn linear_sequence_is_flagged() {
        let r = rate_from_errors(&[0.1, 0.05, 0.025]);
        assert!((r.ratios[0] - 5.0).abs() < 1e-12);
        assert!((r.ratios[1] - 10.0).abs() < 1e-12);
        assert!((r.slope - 1.0).abs() < 1e-12);
        assert_eq!(r.verdict, RateVerdict::NonQuadratic);
    }

    #[test]
    fn tail_selection_skips_floor_and_far_points() {
        let star = DVector::zeros(1);
        let pts: Vec<DVector<f64>> = [1.0, 0.5, 1e-2, 1e-4, 1e-8, 1e-16, 0.0]
            .iter()
            .map(|&e| DVector::from_element(1, e))
            .collect();
        let r = measure_quadratic_rate(&pts, &star, 1e-14);
        assert_eq!(r.errors, vec![1e-2, 1e-4, 1e-8]);
        assert_eq!(r.verdict, RateVerdict::Inconclusive);
    }
}
