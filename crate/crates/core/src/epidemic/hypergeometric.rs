//! Gauss hypergeometric function by direct power series.

use crate::error::{Error, Result};

const MAX_TERMS: usize = 10_000_000;

/// `₂F₁(a, b; c; z)` for `|z| < 1`, summed until the remainder, bounded by a
/// geometric series in the current term ratio, falls below `rel_tol` times
/// the partial sum.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64, rel_tol: f64) -> Result<f64> {
    if z.is_nan() || z.abs() >= 1.0 {
        return Err(Error::InvalidModel(format!(
            "2F1 series needs |z| < 1, got {z}"
        )));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::InvalidModel(format!(
            "2F1 undefined for nonpositive integer c = {c}"
        )));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // The term ratio tends to |z|; bounding by the larger of the two
        // covers ratios that increase toward the limit.
        let next = {
            let kn = kf + 1.0;
            ((a + kn) * (b + kn) / ((c + kn) * (kn + 1.0)) * z).abs()
        };
        let r = next.max(z.abs());
        if r < 1.0 && term.abs() * r / (1.0 - r) <= rel_tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::InvalidModel("2F1 series did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_case() {
        // 2F1(1, b; b; z) = 1 / (1 - z)
        let v = hyp2f1(1.0, 3.5, 3.5, 0.6, 1e-15).unwrap();
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn logarithm_identity() {
        // z 2F1(1, 1; 2; z) = -ln(1 - z)
        let z = 0.9;
        let v = z * hyp2f1(1.0, 1.0, 2.0, z, 1e-15).unwrap();
        assert!((v + (1.0 - z).ln()).abs() < 1e-12);
    }

    #[test]
    fn binomial_series() {
        // 2F1(-a, b; b; -z) = (1 + z)^a, terminating for integer a
        let v = hyp2f1(-3.0, 2.0, 2.0, -0.5, 1e-15).unwrap();
        assert!((v - 1.5_f64.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn rejects_outside_disc() {
        assert!(hyp2f1(1.0, 1.0, 2.0, 1.0, 1e-12).is_err());
        assert!(hyp2f1(1.0, 1.0, -2.0, 0.5, 1e-12).is_err());
    }
}
