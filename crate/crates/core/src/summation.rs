//! Compensated accumulation used by every quadrature loop.

/// Neumaier variant of Kahan summation. Order of `add` calls is part of the
/// result, so callers fix the order to stay deterministic.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let mut values = vec![1.0e16];
        values.extend(std::iter::repeat(1.0).take(1000));
        values.push(-1.0e16);
        let naive: f64 = values.iter().sum();
        assert_eq!(compensated_sum(values.iter().copied()), 1000.0);
        assert!(naive != 1000.0);
    }

    #[test]
    fn negation_is_exact() {
        let xs = [0.1, -0.7, 3.3e-9, 2.5, -1.0 / 3.0];
        let a = compensated_sum(xs.iter().copied());
        let b = compensated_sum(xs.iter().map(|x| -x));
        assert_eq!(a.to_bits(), (-b).to_bits());
    }
}
