//! Small statistics toolkit for the Monte-Carlo checks.

use statrs::distribution::{Beta, Binomial, ContinuousCDF, DiscreteCDF};
use statrs::function::erf::erfc;

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// One-sided Clopper-Pearson upper bound on a binomial proportion at
/// confidence `conf` (e.g. 0.95).
pub fn clopper_pearson_upper(k: u64, n: u64, conf: f64) -> f64 {
    assert!(n > 0 && k <= n);
    if k == n {
        return 1.0;
    }
    Beta::new((k + 1) as f64, (n - k) as f64)
        .expect("positive shape parameters")
        .inverse_cdf(conf)
}

/// One-sided Clopper-Pearson lower bound.
pub fn clopper_pearson_lower(k: u64, n: u64, conf: f64) -> f64 {
    assert!(n > 0 && k <= n);
    if k == 0 {
        return 0.0;
    }
    Beta::new(k as f64, (n - k + 1) as f64)
        .expect("positive shape parameters")
        .inverse_cdf(1.0 - conf)
}

/// Two-sided interval at confidence `conf`.
pub fn clopper_pearson(k: u64, n: u64, conf: f64) -> (f64, f64) {
    let tail = (1.0 + conf) / 2.0;
    (clopper_pearson_lower(k, n, tail), clopper_pearson_upper(k, n, tail))
}

/// Exact one-sided McNemar test on paired outcomes: `b` pairs where only
/// the first condition failed, `c` where only the second did. Returns the
/// p-value for "the first condition fails more often".
pub fn mcnemar_one_sided(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 || b == 0 {
        return 1.0;
    }
    let bin = Binomial::new(0.5, n).expect("valid binomial");
    // P(X >= b) = P(X > b - 1)
    bin.sf(b - 1)
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of the ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    pearson(&ranks(x), &ranks(y))
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
