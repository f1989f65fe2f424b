//! Ordinary least squares on a line.

/// Slope and intercept of `y ≈ slope·x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub offset: f64,
    pub points: usize,
}

/// Least-squares line through `(x, y)`. Returns `None` for fewer than two
/// points or when all `x` coincide.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit { slope, offset: my - slope * mx, points: x.len() })
}
