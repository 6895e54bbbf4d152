use statrs::function::beta::beta_reg;

pub(crate) trait Merge {
    fn merge(&mut self, other: Self);
}

impl<T: Merge> Merge for Vec<T> {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

/// Running first and second moments of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl Merge for Moments {
    fn merge(&mut self, other: Self) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

impl Merge for u64 {
    fn merge(&mut self, other: Self) {
        *self += other;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub level: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Smallest `x` in `[0, 1]` with `I_x(a, b) >= p`, by bisection.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper–Pearson) two-sided binomial confidence interval for
/// `events` successes in `trials` trials.
///
/// # Panics
///
/// Panics if `trials == 0`, `events > trials`, or `level` is not in `(0, 1)`.
pub fn clopper_pearson(events: u64, trials: u64, level: f64) -> Interval {
    assert!(trials > 0 && events <= trials, "need 0 <= events <= trials, trials > 0");
    assert!(level > 0.0 && level < 1.0, "confidence level must be in (0, 1)");
    let alpha = 1.0 - level;
    let (k, n) = (events as f64, trials as f64);
    let low = if events == 0 {
        0.0
    } else if events == trials {
        (alpha / 2.0).powf(1.0 / n)
    } else {
        beta_quantile(alpha / 2.0, k, n - k + 1.0)
    };
    let high = if events == trials {
        1.0
    } else if events == 0 {
        1.0 - (alpha / 2.0).powf(1.0 / n)
    } else {
        beta_quantile(1.0 - alpha / 2.0, k + 1.0, n - k)
    };
    Interval { level, low, high }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_events_upper_bound() {
        let ci = clopper_pearson(0, 1_000_000, 0.95);
        assert_eq!(ci.low, 0.0);
        assert!((ci.high - 3.689e-6).abs() < 1e-8);
    }

    #[test]
    fn interval_brackets_estimate() {
        // reference: scipy.stats.beta.ppf for (k, n) = (12, 100) at 95%
        let ci = clopper_pearson(12, 100, 0.95);
        assert!((ci.low - 0.063_568_9).abs() < 1e-6, "{ci:?}");
        assert!((ci.high - 0.200_235_7).abs() < 1e-6, "{ci:?}");
        let wide = clopper_pearson(1210, 10_000_000, 0.99);
        assert!(wide.contains(1.21e-4));
        assert!(wide.high - wide.low < 2e-5);
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
    }
}
