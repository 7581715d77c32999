//! Least-squares power-law fits.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Least-squares line through `(x_i, y_i)`; returns `(slope, intercept)`.
pub fn linear_fit<T: Scalar>(x: &[T], y: &[T]) -> Result<(T, T)> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("a fit needs at least two points".into()));
    }
    let n = T::from_usize_exact(x.len());
    let mx = x.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = y.iter().fold(T::zero(), |s, &v| s + v) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == T::zero() {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Exponent `p` of the best fit `y ~ C x^p` in log-log coordinates.
pub fn loglog_slope<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    for (name, v) in [("x", x), ("y", y)] {
        if let Some(bad) = v.iter().find(|&&t| !(t > T::zero())) {
            return Err(Error::NonPositiveInput {
                name: if name == "x" { "fit abscissa" } else { "fit ordinate" },
                value: bad.to_f64_lossy(),
            });
        }
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [0.4, 0.3, 0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs() {
        assert!(loglog_slope(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0, 2.0], &[1.0]).is_err());
    }
}
