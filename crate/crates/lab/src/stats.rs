//! Estimators used by the experiments.

use std::collections::BTreeMap;

use bmap_core::series::pairwise_sum;

/// Normal 97.5% quantile.
pub const Z95: f64 = 1.959963984540054;

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let (_, se) = mean_se(xs);
    se * se * xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
}

impl LineFit {
    pub fn ci(&self) -> (f64, f64) {
        (self.slope - Z95 * self.se_slope, self.slope + Z95 * self.se_slope)
    }
}

/// Weighted least squares line with known per-point standard errors.
pub fn wls(x: &[f64], y: &[f64], se: &[f64]) -> Option<LineFit> {
    if x.len() < 2 || x.len() != y.len() || x.len() != se.len() {
        return None;
    }
    let w: Vec<f64> = se.iter().map(|s| 1.0 / (s * s)).collect();
    if w.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return None;
    }
    let sw = pairwise_sum(&w);
    let xm = pairwise_sum(&w.iter().zip(x).map(|(w, x)| w * x).collect::<Vec<_>>()) / sw;
    let ym = pairwise_sum(&w.iter().zip(y).map(|(w, y)| w * y).collect::<Vec<_>>()) / sw;
    let sxx = pairwise_sum(&w.iter().zip(x).map(|(w, x)| w * (x - xm) * (x - xm)).collect::<Vec<_>>());
    let sxy = pairwise_sum(
        &w.iter()
            .zip(x.iter().zip(y))
            .map(|(w, (x, y))| w * (x - xm) * (y - ym))
            .collect::<Vec<_>>(),
    );
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: ym - slope * xm,
        se_slope: (1.0 / sxx).sqrt(),
    })
}

/// Slope of log(mean) against log(k); log(mean) has standard error se/mean
/// by the delta method.
pub fn log_log_slope(k: &[f64], mean: &[f64], se: &[f64]) -> Option<LineFit> {
    let x: Vec<f64> = k.iter().map(|k| k.ln()).collect();
    let y: Vec<f64> = mean.iter().map(|m| m.ln()).collect();
    let s: Vec<f64> = se.iter().zip(mean).map(|(s, m)| s / m).collect();
    wls(&x, &y, &s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hill {
    pub index: f64,
    /// The (m+1)-th largest value.
    pub threshold: f64,
    pub top: usize,
    pub ci: (f64, f64),
}

/// Hill estimator of the tail index on the `top` largest values.
pub fn hill(xs: &[f64], top: usize) -> Option<Hill> {
    if top == 0 || top >= xs.len() {
        return None;
    }
    let mut s = xs.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let u = s[top];
    if u <= 0.0 {
        return None;
    }
    let logs: Vec<f64> = s[..top].iter().map(|x| (x / u).ln()).collect();
    let m = pairwise_sum(&logs) / top as f64;
    if m <= 0.0 {
        return None;
    }
    let index = 1.0 / m;
    let half = Z95 * index / (top as f64).sqrt();
    Some(Hill {
        index,
        threshold: u,
        top,
        ci: (index - half, index + half),
    })
}

/// Plug-in total variation distance between two empirical laws.
pub fn tv<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return f64::NAN;
    }
    let mut terms = Vec::with_capacity(a.len() + b.len());
    for (k, &ca) in a {
        let cb = b.get(k).copied().unwrap_or(0);
        terms.push((ca as f64 / na as f64 - cb as f64 / nb as f64).abs());
    }
    for (k, &cb) in b {
        if !a.contains_key(k) {
            terms.push(cb as f64 / nb as f64);
        }
    }
    0.5 * pairwise_sum(&terms)
}

pub fn counts<K: Ord, I: IntoIterator<Item = K>>(it: I) -> BTreeMap<K, u64> {
    let mut m = BTreeMap::new();
    for k in it {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|x| 0.5 + 2.0 * x).collect();
        let f = wls(&x, &y, &[1.0, 0.5, 2.0, 1.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 0.5).abs() < 1e-12);
        assert!(wls(&[1.0], &[1.0], &[1.0]).is_none());
    }

    #[test]
    fn wls_slope_variance_is_unweighted_ols_for_equal_errors() {
        let x = [0.0, 1.0, 2.0];
        let f = wls(&x, &[0.0, 1.0, 2.0], &[0.1, 0.1, 0.1]).unwrap();
        // 0.01 / Σ(x - 1)^2
        assert!((f.se_slope - (0.01f64 / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hill_on_exact_pareto_quantiles() {
        // x_i = (n / i)^{1/a} are the Pareto(a) quantiles
        let a = 1.5;
        let n = 100_000;
        let xs: Vec<f64> = (1..=n).map(|i| (n as f64 / i as f64).powf(1.0 / a)).collect();
        let h = hill(&xs, 1000).unwrap();
        assert!((h.index - a).abs() < 0.01, "{}", h.index);
        assert!(h.ci.0 < a && a < h.ci.1);
    }

    #[test]
    fn tv_values() {
        let a = counts([1, 1, 2, 3]);
        let b = counts([1, 2, 2, 4]);
        assert!((tv(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(tv(&a, &a), 0.0);
    }

    #[test]
    fn mean_and_error() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!((variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-15);
    }
}
