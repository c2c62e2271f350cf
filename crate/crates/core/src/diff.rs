//! Sup norms of derivatives by sixth-order central differences.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Highest derivative order with a stencil.
pub const MAX_ORDER: usize = 3;

/// Largest relative disagreement tolerated between steps `h` and `h/2`.
pub const STEP_HALVING_LIMIT: f64 = 1e-3;

const HALF_WIDTH: usize = 4;

fn stencil(k: usize) -> &'static [f64] {
    const D0: [f64; 9] = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    const D1: [f64; 9] = [0.0, -1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0, 0.0];
    const D2: [f64; 9] = [0.0, 1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0, 0.0];
    const D3: [f64; 9] = [
        -7.0 / 240.0,
        3.0 / 10.0,
        -169.0 / 120.0,
        61.0 / 30.0,
        0.0,
        -61.0 / 30.0,
        169.0 / 120.0,
        -3.0 / 10.0,
        7.0 / 240.0,
    ];
    match k {
        0 => &D0,
        1 => &D1,
        2 => &D2,
        _ => &D3,
    }
}

/// `sup_{[a,b]} |f^{(k)}|` for `k = 0..=k_max`, sampled at spacing `h/2`.
///
/// Each derivative is formed with steps `h` and `h/2`; a relative
/// disagreement of the two sups above [`STEP_HALVING_LIMIT`] is reported as
/// [`Error::DifferentiationUnderresolved`]. Sups below `floor * sup|f| / (b-a)^k`
/// are treated as zero and not compared.
pub fn sup_derivative_norms<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, h: f64, k_max: usize) -> Result<Vec<f64>> {
    if k_max > MAX_ORDER {
        return Err(Error::DerivativeDepth(k_max as u32));
    }
    if !(b > a && h > 0.0 && h.is_finite()) {
        return Err(invalid("differentiation needs a < b and h > 0"));
    }
    let d = 0.5 * h;
    let pad = 2 * HALF_WIDTH;
    let inner = ((b - a) / d).ceil() as usize;
    let samples: Vec<Complex64> = (0..inner + 1 + 2 * pad)
        .map(|i| f(a + (i as f64 - pad as f64) * d))
        .collect();
    let sup0 = samples[pad..=pad + inner].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let coef = stencil(k);
        let deriv = |i: usize, stride: usize, step: f64| -> f64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, c) in coef.iter().enumerate() {
                if *c != 0.0 {
                    acc += samples[i + m * stride - HALF_WIDTH * stride] * *c;
                }
            }
            acc.norm() / step.powi(k as i32)
        };
        let mut fine = 0.0f64;
        let mut coarse = 0.0f64;
        for i in pad..=pad + inner {
            fine = fine.max(deriv(i, 1, d));
            coarse = coarse.max(deriv(i, 2, h));
        }
        let scale = sup0 / (b - a).powi(k as i32);
        if k > 0 && fine > 1e-9 * scale {
            let rel = (coarse - fine).abs() / fine;
            if rel > STEP_HALVING_LIMIT {
                return Err(Error::DifferentiationUnderresolved {
                    rel,
                    limit: STEP_HALVING_LIMIT,
                });
            }
        }
        out.push(fine);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_polynomials() {
        // exact on polynomials of degree <= 6 for every order
        let p = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(6);
        let dp = [
            p(0.3),
            1.0 - 6.0 * 0.3f64.powi(2) + 3.0 * 0.3f64.powi(5),
            -12.0 * 0.3 + 15.0 * 0.3f64.powi(4),
            -12.0 + 60.0 * 0.3f64.powi(3),
        ];
        for (k, exact) in dp.iter().enumerate() {
            let h = 0.1;
            let v: f64 = stencil(k)
                .iter()
                .enumerate()
                .map(|(m, c)| c * p(0.3 + (m as f64 - 4.0) * h))
                .sum::<f64>()
                / h.powi(k as i32);
            assert!((v - exact).abs() < 1e-9 * exact.abs().max(1.0), "k = {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn sup_norms_of_sine() {
        let w = 3.0;
        let s = sup_derivative_norms(|x| Complex64::new((w * x).sin(), 0.0), 0.0, 2.0, 0.02, 3).unwrap();
        for (k, v) in s.iter().enumerate() {
            assert!((v / w.powi(k as i32) - 1.0).abs() < 1e-4, "k = {k}: {v}");
        }
    }

    #[test]
    fn underresolution_detected() {
        let r = sup_derivative_norms(|x| Complex64::new((40.0 * x).sin(), 0.0), 0.0, 1.0, 0.05, 2);
        assert!(matches!(r, Err(Error::DifferentiationUnderresolved { .. })));
        assert!(matches!(
            sup_derivative_norms(|x| Complex64::new(x, 0.0), 0.0, 1.0, 0.1, 4),
            Err(Error::DerivativeDepth(4))
        ));
    }
}
