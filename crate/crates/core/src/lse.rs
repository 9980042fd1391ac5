//! Log-domain summation.

/// Streaming `log Σ exp(x_i)` that never exponentiates a positive number.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = LogSumExp::new();
    for x in xs {
        acc.push(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_and_neg_inf() {
        assert_eq!(log_sum_exp(std::iter::empty()), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, 2.0]), 2.0);
    }

    #[test]
    fn huge_exponents_do_not_overflow() {
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matches_direct_sum(xs in prop::collection::vec(-30.0f64..30.0, 1..40)) {
            let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
            prop_assert!((log_sum_exp(xs.iter().copied()) - direct).abs() < 1e-12);
        }

        #[test]
        fn merge_is_concatenation(a in prop::collection::vec(-50.0f64..50.0, 0..20),
                                  b in prop::collection::vec(-50.0f64..50.0, 0..20)) {
            let mut left = LogSumExp::new();
            a.iter().for_each(|&x| left.push(x));
            let mut right = LogSumExp::new();
            b.iter().for_each(|&x| right.push(x));
            left.merge(&right);
            let all = log_sum_exp(a.iter().chain(&b).copied());
            if all.is_finite() {
                prop_assert!((left.value() - all).abs() < 1e-12);
            } else {
                prop_assert_eq!(left.value(), all);
            }
        }
    }
}
