//! Outcomes of estimate checks.
//!
//! A check measures a finite ratio (the empirical constant of an inequality)
//! on a grid, repeats the sweep on a refined grid, and optionally fits
//! log-log slopes. "Pass" means the ratio is finite, grows by less than
//! [`STABILITY_LIMIT`] under refinement, and every slope lies in its window.

use serde::{Deserialize, Serialize};

/// Maximal relative growth of a sup-ratio under refinement.
pub const STABILITY_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub target: f64,
    pub tol: f64,
    /// When set, only `slope <= target + tol` is required.
    pub one_sided: bool,
    pub passed: bool,
}

impl SlopeFit {
    pub fn new(label: impl Into<String>, xs: &[f64], ys: &[f64], target: f64, tol: f64, one_sided: bool) -> Self {
        let (slope, intercept) = fit_line(xs, ys);
        let passed = slope.is_finite()
            && if one_sided {
                slope <= target + tol
            } else {
                (slope - target).abs() <= tol
            };
        Self {
            label: label.into(),
            slope,
            intercept,
            target,
            tol,
            one_sided,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub sup_ratio: f64,
    pub refined_sup_ratio: Option<f64>,
    pub growth: Option<f64>,
    pub slopes: Vec<SlopeFit>,
    /// Grid points left out of the sup (for example below the quadrature noise floor).
    pub excluded: usize,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl BoundReport {
    pub fn new(check: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            check: check.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            sup_ratio: 0.0,
            refined_sup_ratio: None,
            growth: None,
            slopes: Vec::new(),
            excluded: 0,
            notes: Vec::new(),
            passed: false,
        }
    }

    /// Records the coarse and refined sups and recomputes the verdict.
    pub fn with_sups(mut self, coarse: f64, refined: f64) -> Self {
        self.sup_ratio = coarse;
        self.refined_sup_ratio = Some(refined);
        self.growth = Some(relative_growth(coarse, refined));
        self.finish()
    }

    pub fn with_slope(mut self, fit: SlopeFit) -> Self {
        self.slopes.push(fit);
        self.finish()
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Recomputes `passed` from the stored quantities.
    pub fn finish(mut self) -> Self {
        let finite = self.sup_ratio.is_finite() && self.refined_sup_ratio.map_or(true, f64::is_finite);
        let stable = self.growth.map_or(true, |g| g < STABILITY_LIMIT);
        let slopes = self.slopes.iter().all(|s| s.passed);
        self.passed = finite && stable && slopes;
        self
    }
}

/// Relative growth of `refined` over `coarse`; 0 when both vanish.
pub fn relative_growth(coarse: f64, refined: f64) -> f64 {
    if coarse == refined {
        return 0.0;
    }
    if coarse == 0.0 {
        return f64::INFINITY;
    }
    refined / coarse - 1.0
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `count` points from `lo` to `hi` inclusive, evenly spaced.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// `count` points from `lo` to `hi` inclusive, evenly spaced in the logarithm.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), count)
        .into_iter()
        .enumerate()
        .map(|(i, v)| if i == 0 { lo } else if i + 1 == count { hi } else { v.exp() })
        .collect()
}

/// Maximum of a slice, ignoring NaN.
pub fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| if v > m { v } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| -2.5 * x + 1.0).collect();
        let (s, c) = fit_line(&xs, &ys);
        assert!((s + 2.5).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn verdict_requires_stability() {
        let r = BoundReport::new("x", &[]).with_sups(1.0, 1.04);
        assert!(r.passed);
        let r = BoundReport::new("x", &[]).with_sups(1.0, 1.06);
        assert!(!r.passed);
        let r = BoundReport::new("x", &[]).with_sups(1.0, f64::INFINITY);
        assert!(!r.passed);
    }

    #[test]
    fn one_sided_slope() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, -3.0, -6.0];
        assert!(SlopeFit::new("s", &xs, &ys, -1.0, 0.1, true).passed);
        assert!(!SlopeFit::new("s", &xs, &ys, -1.0, 0.1, false).passed);
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = logspace(0.1, 20.0, 7);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[6], 20.0);
        assert_eq!(linspace(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
    }
}
