use serde::{Deserialize, Serialize};

use super::StudyError;

/// Least-squares line through `(ln R, ln err)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// `None` when every error is zero (`exact`).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Root-mean-square residual of the fit in log space.
    pub residual: Option<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub points_used: usize,
    pub exact: bool,
}

/// Fits `ln err = intercept + slope · ln R` over the points with `err > 0`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, StudyError> {
    if points.len() < 3 {
        return Err(StudyError::InsufficientPoints(points.len()));
    }
    let rs = points.iter().map(|p| p.0);
    let r_min = rs.clone().fold(f64::INFINITY, f64::min);
    let r_max = rs.fold(f64::NEG_INFINITY, f64::max);
    if points.iter().all(|p| p.1 == 0.0) {
        return Ok(RateFit {
            slope: None,
            intercept: None,
            residual: None,
            r_min,
            r_max,
            points_used: 0,
            exact: true,
        });
    }
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0 && p.1.is_finite())
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if used.len() < 3 {
        return Err(StudyError::InsufficientPoints(used.len()));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(StudyError::Invalid("all R values coincide".into()));
    }
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = used.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(RateFit {
        slope: Some(slope),
        intercept: Some(intercept),
        residual: Some((ss / n).sqrt()),
        r_min,
        r_max,
        points_used: used.len(),
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<_> = (2..9).map(|r| (r as f64, 7.0 / r as f64)).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope.unwrap() + 1.0).abs() < 1e-10);
        assert!((f.intercept.unwrap() - 7f64.ln()).abs() < 1e-10);
        let pts: Vec<_> = (2..9).map(|r| (r as f64, 0.3 * (r as f64).powi(-2))).collect();
        assert!((fit_rate(&pts).unwrap().slope.unwrap() + 2.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(fit_rate(&[(1.0, 1.0), (2.0, 0.5)]), Err(StudyError::InsufficientPoints(2)));
        let f = fit_rate(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]).unwrap();
        assert!(f.exact && f.slope.is_none());
    }
}
