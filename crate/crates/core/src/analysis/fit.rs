use serde::Serialize;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    pub insufficient_points: bool,
}

/// Fits `y = C x^slope`. Pairs with a nonpositive or non-finite coordinate
/// are dropped; fewer than two distinct `x` leave the fit flagged.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> PowerLawFit {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = pts.len();
    let flagged = PowerLawFit {
        slope: f64::NAN,
        intercept: f64::NAN,
        r_squared: f64::NAN,
        points: m,
        insufficient_points: true,
    };
    if m < 2 {
        return flagged;
    }
    let mf = m as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-300) {
        return flagged;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    PowerLawFit {
        slope,
        intercept,
        r_squared,
        points: m,
        insufficient_points: false,
    }
}
