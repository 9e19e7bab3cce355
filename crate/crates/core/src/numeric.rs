//! Small numerical kernels shared by the estimators.
//!
//! All powers `(1 - p)^n` are formed in log space so that tiny `p` and large
//! `n` keep full relative precision.

/// `(1 - p)^n` for `p` in `[0, 1]`.
pub(crate) fn survival_pow(p: f64, n: u64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    (n as f64 * (-p).ln_1p()).exp()
}

/// `1 - (1 - p)^n`, the probability that an outcome of mass `p` shows up at
/// least once in `n` draws.
pub(crate) fn inclusion_prob(p: f64, n: u64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    -(n as f64 * (-p).ln_1p()).exp_m1()
}

/// `(1 - a - b)^n - ((1 - a)(1 - b))^n`: the covariance of the indicators
/// "`a` observed" and "`b` observed" for two distinct outcomes.
///
/// Written as `s^n * expm1(n * ln(1 - ab/s))` with `s = (1-a)(1-b)`, which
/// avoids the cancellation in `1 - q_a^n - q_b^n + (1-a-b)^n`.
pub(crate) fn pair_covariance(a: f64, b: f64, n: u64) -> f64 {
    let s = (1.0 - a) * (1.0 - b);
    let ratio = a * b / s;
    if s <= 0.0 || ratio.is_nan() || ratio > 1.0 {
        return signed_pow(1.0 - a - b, n) - signed_pow(s, n);
    }
    let nf = n as f64;
    let ln_s = (-a).ln_1p() + (-b).ln_1p();
    (nf * ln_s).exp() * (nf * (-ratio).ln_1p()).exp_m1()
}

/// `P(a and b both observed) = incl(a) incl(b) + cov(a, b)` for distinct outcomes.
#[cfg(test)]
pub(crate) fn pair_inclusion(a: f64, b: f64, n: u64) -> f64 {
    inclusion_prob(a, n) * inclusion_prob(b, n) + pair_covariance(a, b, n)
}

/// Integer power that keeps the sign of a negative base.
pub(crate) fn signed_pow(base: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        base.powi(n as i32)
    } else {
        base.powf(n as f64)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Binomial coefficient as a float; exact for the sizes used here.
pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub(crate) fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = match acc.checked_mul(n as u128 - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_match_naive_forms() {
        for &p in &[0.0_f64, 1e-9, 0.1, 0.5, 0.99, 1.0] {
            for &n in &[1u64, 2, 7, 40] {
                let naive = (1.0 - p).powi(n as i32);
                assert!((survival_pow(p, n) - naive).abs() < 1e-14);
                assert!((inclusion_prob(p, n) - (1.0 - naive)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn covariance_matches_naive_form_where_stable() {
        for &(a, b) in &[(0.5_f64, 0.3_f64), (0.2, 0.2), (0.7, 0.3), (0.01, 0.4)] {
            for n in 1..8u64 {
                let naive = (1.0 - a - b).powi(n as i32) - ((1.0 - a) * (1.0 - b)).powi(n as i32);
                assert!(
                    (pair_covariance(a, b, n) - naive).abs() < 1e-15,
                    "{a} {b} {n}"
                );
            }
        }
        // single draw: two distinct outcomes cannot both be observed
        assert!(pair_inclusion(0.3, 0.5, 1).abs() < 1e-16);
    }

    #[test]
    fn covariance_keeps_precision_for_tiny_masses() {
        // (1-a-b)^n - ((1-a)(1-b))^n ~ -n a b for tiny a, b
        let (a, b, n) = (1e-9, 2e-9, 10u64);
        let cov = pair_covariance(a, b, n);
        let rel = (cov - (-(n as f64) * a * b)).abs() / (n as f64 * a * b);
        assert!(rel < 1e-6, "{cov}");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-17);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-14).abs() < 1e-20);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 10), 184_756.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial_u128(30, 15), 155_117_520);
    }
}
