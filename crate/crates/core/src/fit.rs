//! Least-squares fits and scalar searches used throughout the diagnostics:
//! log-log decay exponents, exponential tail fits, golden-section extrema.

/// Result of an ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points to fit a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Fit `y ~ C * x^p` by a line through (log x, log y); returns (p, C, R^2).
/// Non-positive samples are dropped.
pub fn power_fit(x: &[f64], y: &[f64]) -> LineFit {
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&xi, &yi)| xi > 0.0 && yi > 0.0)
        .map(|(&xi, &yi)| (xi.ln(), yi.ln()))
        .collect();
    let lx: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    linear_fit(&lx, &ly)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    (x, fx)
}

/// Golden-section maximization on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, fneg) = golden_min(|t| -f(t), a, b, tol);
    (x, -fneg)
}
