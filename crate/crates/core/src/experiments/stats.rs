//! Compensated sums and ratio-of-means statistics.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Kahan–Babuška (Neumaier) compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().copied().collect::<KahanSum>().value() / xs.len() as f64
}

/// Unbiased sample covariance; 0 for fewer than two points.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let (mx, my) = (mean(&xs[..n]), mean(&ys[..n]));
    let s: KahanSum = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    s.value() / (n - 1) as f64
}

/// Standard error of the mean.
pub fn stderr(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (covariance(xs, xs).max(0.0) / xs.len() as f64).sqrt()
}

/// `mean(num) / mean(den)` with a delta-method 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub mean_num: f64,
    pub mean_den: f64,
    pub stderr_num: f64,
    pub stderr_den: f64,
    pub ratio: f64,
    pub stderr_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn ratio_of_means(num: &[f64], den: &[f64]) -> RatioEstimate {
    let n = num.len().min(den.len()) as f64;
    let (mn, md) = (mean(num), mean(den));
    let ratio = if md > 0.0 { mn / md } else { f64::NAN };
    let (vn, vd, c) = (covariance(num, num), covariance(den, den), covariance(num, den));
    let var = (vn - 2.0 * ratio * c + ratio * ratio * vd).max(0.0) / (md * md * n);
    let se = var.sqrt();
    RatioEstimate {
        mean_num: mn,
        mean_den: md,
        stderr_num: stderr(num),
        stderr_den: stderr(den),
        ratio,
        stderr_ratio: se,
        ci_low: ratio - Z95 * se,
        ci_high: ratio + Z95 * se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn constant_denominator_gives_scaled_numerator_error() {
        let num = [1.0, 2.0, 3.0, 4.0];
        let den = [10.0; 4];
        let r = ratio_of_means(&num, &den);
        assert!((r.ratio - 0.25).abs() < 1e-15);
        assert_eq!(r.stderr_den, 0.0);
        assert!((r.stderr_ratio - stderr(&num) / 10.0).abs() < 1e-15);
        assert!(r.ci_low < 0.25 && r.ci_high > 0.25);
    }

    #[test]
    fn delta_method_matches_monte_carlo_spread() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            let num: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..2.0)).collect();
            let den: Vec<f64> = num.iter().map(|x| x + rng.gen_range(1.0..3.0)).collect();
            ratio_of_means(&num, &den)
        };
        let reps: Vec<RatioEstimate> = (0..400).map(|_| draw(&mut rng)).collect();
        let ratios: Vec<f64> = reps.iter().map(|r| r.ratio).collect();
        let empirical = covariance(&ratios, &ratios).sqrt();
        let predicted = mean(&reps.iter().map(|r| r.stderr_ratio).collect::<Vec<_>>());
        assert!((empirical / predicted - 1.0).abs() < 0.15, "{empirical} vs {predicted}");
    }
}
