//! Log-log scaling fits.

/// Values at or below this are treated as cancellation noise.
pub const NOISE_FLOOR: f64 = 1e-14;
/// Surviving points needed for a fit.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// `value ≈ e^{intercept} · size^{exponent}`; `fit` is `None` when too few
/// points clear the noise floor.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSeries {
    pub quantity: String,
    pub points: Vec<(usize, f64)>,
    pub fit: Option<PowerFit>,
}

impl ScalingSeries {
    pub fn new(quantity: impl Into<String>, points: Vec<(usize, f64)>) -> Self {
        let fit = fit_power_law(&points);
        ScalingSeries { quantity: quantity.into(), points, fit }
    }

    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.exponent)
    }

    /// One summary line.
    pub fn describe(&self) -> String {
        match self.fit {
            Some(f) => format!("{}: exponent {:+.4} intercept {:+.4} r2 {:.6}", self.quantity, f.exponent, f.intercept, f.r2),
            None => format!("{}: unfit", self.quantity),
        }
    }
}

/// Least squares on `(ln size, ln value)` over points with `value > NOISE_FLOOR`.
pub fn fit_power_law(points: &[(usize, f64)]) -> Option<PowerFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(s, v)| *s > 0 && *v > NOISE_FLOOR && v.is_finite())
        .map(|(s, v)| ((*s as f64).ln(), v.ln()))
        .collect();
    if xy.len() < MIN_FIT_POINTS {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(PowerFit { exponent, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inverse_law() {
        let pts: Vec<_> = (2..=9).map(|n| (n, 3.0 / n as f64)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_floor_and_minimum_count() {
        let pts = vec![(2, 1.0), (3, 0.5), (4, 1e-15), (5, 0.2)];
        assert!(fit_power_law(&pts).is_none());
        let s = ScalingSeries::new("F_2", pts);
        assert_eq!(s.describe(), "F_2: unfit");
        assert!(fit_power_law(&[(2, 1.0), (3, 0.4), (4, 0.3), (5, 0.2)]).is_some());
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let f = fit_power_law(&[(2, 0.7), (4, 0.7), (8, 0.7), (16, 0.7)]).unwrap();
        assert!(f.exponent.abs() < 1e-14);
    }
}
