//! Log-domain summation helpers.

/// `ln Σ exp(x_i)`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Streaming `ln Σ exp(x_i)`: keeps the running maximum and rescales the
/// partial sum whenever a new maximum arrives.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSum {
    pub fn add(&mut self, log_value: f64) {
        if log_value == f64::NEG_INFINITY {
            return;
        }
        if log_value > self.max {
            self.sum = self.sum * (self.max - log_value).exp() + 1.0;
            self.max = log_value;
        } else {
            self.sum += (log_value - self.max).exp();
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        } else {
            self.sum += other.sum * (other.max - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `ln(n!)` for `n` in `0..=max`.
pub(crate) fn ln_factorials(max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max + 1);
    let mut acc = 0.0f64;
    table.push(0.0);
    for n in 1..=max {
        acc += (n as f64).ln();
        table.push(acc);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn handles_huge_and_empty_inputs() {
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp([-1000.0, 0.0]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn factorial_table() {
        let t = ln_factorials(5);
        assert!((t[5] - 120f64.ln()).abs() < 1e-12);
        assert_eq!(t[0], 0.0);
    }

    proptest! {
        #[test]
        fn merge_order_does_not_matter(xs in prop::collection::vec(-700.0f64..700.0, 1..60), split in 0usize..60) {
            let split = split.min(xs.len());
            let whole = log_sum_exp(xs.iter().copied());
            let mut left = LogSum::default();
            let mut right = LogSum::default();
            xs[..split].iter().for_each(|&x| left.add(x));
            xs[split..].iter().for_each(|&x| right.add(x));
            let mut a = left;
            a.merge(&right);
            let mut b = right;
            b.merge(&left);
            prop_assert!((a.value() - whole).abs() <= 1e-12 * whole.abs().max(1.0));
            prop_assert!((b.value() - whole).abs() <= 1e-12 * whole.abs().max(1.0));
        }
    }
}
