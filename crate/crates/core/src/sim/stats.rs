use statrs::distribution::{ContinuousCDF, StudentsT};

/// Level of every confidence interval the simulator reports.
pub const CONFIDENCE: f64 = 0.99;

/// Mean over replications with a Student-t confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// `None` with fewer than two replications.
    pub half_width: Option<f64>,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: 0.0,
                half_width: None,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { mean, half_width: None };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.5 + CONFIDENCE / 2.0);
        Self {
            mean,
            half_width: Some(t * (var / n as f64).sqrt()),
        }
    }

    pub fn half_width_or_zero(&self) -> f64 {
        self.half_width.unwrap_or(0.0)
    }

    /// Interval bounds, clamped to `[0, 1]` for probabilities.
    pub fn probability_interval(&self) -> (f64, f64) {
        let h = self.half_width_or_zero();
        ((self.mean - h).max(0.0), (self.mean + h).min(1.0))
    }

    pub fn interval(&self) -> (f64, f64) {
        let h = self.half_width_or_zero();
        (self.mean - h, self.mean + h)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            half_width: self.half_width.map(|h| h * factor),
        }
    }
}
