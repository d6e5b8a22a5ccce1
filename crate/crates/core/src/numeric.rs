//! Small numerical helpers shared by the solvers.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `max(0, x)^gamma`, the pressure-law convention for possibly negative arguments.
#[inline]
pub fn positive_power(x: f64, gamma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if let Some(k) = integer_exponent(gamma) {
        x.powi(k)
    } else {
        x.powf(gamma)
    }
}

/// One-sided derivative `gamma * max(0, x)^(gamma - 1)`; zero at `x <= 0` for every gamma.
#[inline]
pub fn positive_power_derivative(x: f64, gamma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma * positive_power(x, gamma - 1.0)
    }
}

#[inline]
fn integer_exponent(gamma: f64) -> Option<i32> {
    if gamma.fract() == 0.0 && gamma.abs() <= 1024.0 {
        Some(gamma as i32)
    } else {
        None
    }
}

pub fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Least-squares slope of `log(y)` against `log(x)`; `None` for fewer than two usable points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
