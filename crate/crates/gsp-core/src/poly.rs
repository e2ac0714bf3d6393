//! Small polynomial toolbox shared by the filter-design modules.
//!
//! Coefficients are stored constant-first: `c[0] + c[1] x + c[2] x^2 + ...`.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{GspError, Result};
use crate::linalg;

/// Horner evaluation.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Horner evaluation at a complex point.
pub fn eval_c(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// First derivative, constant-first.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

/// Product of two polynomials.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Roots via the companion-matrix eigenvalues.
///
/// Trailing zero coefficients are stripped first; a constant polynomial has
/// no roots.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    if lead == 0.0 {
        return Err(GspError::Singular("zero polynomial has no companion matrix".into()));
    }
    let mut comp = Array2::<f64>::zeros((deg, deg));
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    let (w, _) = linalg::eig(&comp.view())?;
    Ok(w.to_vec())
}

/// Map x in [lo, hi] affinely onto [-1, 1].
pub fn to_unit(x: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * x - (hi + lo)) / (hi - lo)
}

/// Chebyshev design matrix: row i holds T_0(t_i) .. T_deg(t_i).
pub fn cheb_vander(ts: &[f64], deg: usize) -> Array2<f64> {
    let mut m = Array2::<f64>::zeros((ts.len(), deg + 1));
    for (i, &t) in ts.iter().enumerate() {
        let mut prev = 1.0;
        let mut cur = t;
        m[(i, 0)] = 1.0;
        if deg >= 1 {
            m[(i, 1)] = t;
        }
        for j in 2..=deg {
            let next = 2.0 * t * cur - prev;
            m[(i, j)] = next;
            prev = cur;
            cur = next;
        }
    }
    m
}

/// Evaluate a Chebyshev series at t in [-1, 1] by Clenshaw recurrence.
pub fn cheb_eval(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    // Undo the doubling of the constant term.
    b1 - t * b2
}

/// Expand a Chebyshev series on [lo, hi] into monomial coefficients in x.
pub fn cheb_to_monomial(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    // t = alpha x + beta with T_{j+1} = 2 t T_j - T_{j-1}.
    let alpha = 2.0 / (hi - lo);
    let beta = -(hi + lo) / (hi - lo);
    let lin = [beta, alpha];
    let mut out = vec![0.0; c.len()];
    let mut prev: Vec<f64> = vec![1.0];
    let mut cur: Vec<f64> = lin.to_vec();
    for (j, &cj) in c.iter().enumerate() {
        let tj: &[f64] = match j {
            0 => &prev,
            1 => &cur,
            _ => {
                let mut next = mul(&lin, &cur);
                for v in next.iter_mut() {
                    *v *= 2.0;
                }
                for (k, &p) in prev.iter().enumerate() {
                    next[k] -= p;
                }
                prev = std::mem::replace(&mut cur, next);
                &cur
            }
        };
        for (k, &t) in tj.iter().enumerate() {
            out[k] += cj * t;
        }
    }
    out
}

/// Least-squares Chebyshev fit of samples (xs, ys) on [lo, hi].
pub fn cheb_fit(xs: &[f64], ys: &[f64], lo: f64, hi: f64, deg: usize) -> Result<Vec<f64>> {
    let ts: Vec<f64> = xs.iter().map(|&x| to_unit(x, lo, hi)).collect();
    let m = cheb_vander(&ts, deg);
    let y = Array1::from_vec(ys.to_vec());
    let fit = linalg::lstsq(&m.view(), &y, 1e-13)?;
    Ok(fit.x.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_and_derivative() {
        // 1 + 2x + 3x^2
        let p = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(eval(&p, 2.0), 17.0);
        assert_eq!(derivative(&p), vec![2.0, 6.0]);
        let z = eval_c(&p, Complex64::new(0.0, 1.0));
        assert_abs_diff_eq!(z.re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mul_matches_hand_product() {
        // (1 + x)(1 - x) = 1 - x^2
        assert_eq!(mul(&[1.0, 1.0], &[1.0, -1.0]), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn roots_of_quadratic() {
        // x^2 - 3x + 2 = (x-1)(x-2)
        let mut r: Vec<f64> = roots(&[2.0, -3.0, 1.0]).unwrap().iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r[1], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn cheb_series_round_trip() {
        // Fit a cubic exactly and recover it through the monomial expansion.
        let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0 * 3.0).collect();
        let target = |x: f64| 0.5 - x + 0.25 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| target(x)).collect();
        let c = cheb_fit(&xs, &ys, 0.0, 3.0, 3).unwrap();
        for &x in &xs {
            assert_abs_diff_eq!(cheb_eval(&c, to_unit(x, 0.0, 3.0)), target(x), epsilon = 1e-12);
        }
        let mono = cheb_to_monomial(&c, 0.0, 3.0);
        assert_abs_diff_eq!(mono[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(mono[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mono[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mono[3], 0.25, epsilon = 1e-12);
    }
}
