//! Special functions: complex Gamma, Bessel `J_ν` of real order, the
//! normalized kernel `𝒥_ν(t) = t^{-ν} J_ν(t)` and its derivatives.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::report::{logspace, sup, BoundReport};

/// Largest derivative order supported by [`script_j_derivative`].
pub const MAX_DERIVATIVE_DEPTH: u32 = 6;

/// Below this argument (or while the series terms stay small) `J_ν` is summed
/// from its power series.
const SERIES_LIMIT: f64 = 2.0;

/// Switchover from backward recurrence to the Hankel asymptotic expansion.
pub const ASYMPTOTIC_SWITCH: f64 = 30.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Real Bessel order `ν >= -1/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < -0.5 {
            return Err(Error::UnsupportedOrder(nu));
        }
        Ok(Self(nu))
    }

    pub fn nu(self) -> f64 {
        self.0
    }

    pub fn shifted(self, by: f64) -> Self {
        Self(self.0 + by)
    }
}

/// The Riesz exponent `z` with `Re z >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexOrder {
    re: f64,
    im: f64,
}

impl ComplexOrder {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(invalid("z must be finite"));
        }
        if re < 0.0 {
            return Err(invalid(format!("Re z must be >= 0, got {re}")));
        }
        Ok(Self { re, im })
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(re, 0.0)
    }

    pub fn re(self) -> f64 {
        self.re
    }

    pub fn im(self) -> f64 {
        self.im
    }

    pub fn is_real(self) -> bool {
        self.im == 0.0
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `ln Γ(w)` on the principal branch of the Lanczos form.
pub fn ln_gamma_complex(w: Complex64) -> Result<Complex64> {
    if w.im == 0.0 && w.re <= 0.0 && w.re == w.re.round() {
        return Err(Error::GammaPole(w.re));
    }
    if w.re < 0.5 {
        // Γ(w) Γ(1 - w) = π / sin(πw)
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(w) - ln_gamma_complex(Complex64::new(1.0, 0.0) - w)?);
    }
    let w = w - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (w + i as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (w + 0.5) * t.ln() - t + x.ln())
}

/// `ln sin(πw)`, factoring out the exponential growth in `Im w`.
fn ln_sin_pi(w: Complex64) -> Complex64 {
    if w.im.abs() < 20.0 {
        return (PI * w).sin().ln();
    }
    // sin(πw) = e^{∓iπw} (1 - e^{±2iπw}) / (∓2i) for ±Im w > 0
    let i = Complex64::i();
    let sign = w.im.signum();
    let lead = -sign * i * PI * w;
    let corr = (1.0 - (sign * 2.0 * i * PI * w).exp()).ln();
    lead + corr - (-sign * 2.0 * i).ln()
}

/// `Γ(w)` on the strip `|Re w| <= 30`, `|Im w| <= 100`.
pub fn gamma_complex(w: Complex64) -> Result<Complex64> {
    if w.im == 0.0 && w.re <= 0.0 && w.re == w.re.round() {
        return Err(Error::GammaPole(w.re));
    }
    if w.re.abs() > 30.0 || w.im.abs() > 100.0 {
        return Err(Error::GammaOverflow { re: w.re, im: w.im });
    }
    if w.im == 0.0 {
        return Ok(Complex64::new(gamma_real(w.re)?, 0.0));
    }
    Ok(ln_gamma_complex(w)?.exp())
}

/// Real Gamma function via the same Lanczos sum.
pub fn gamma_real(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.round() {
        return Err(Error::GammaPole(x));
    }
    if x < 0.5 {
        return Ok(PI / ((PI * x).sin() * gamma_real(1.0 - x)?));
    }
    let w = x - 1.0;
    let mut s = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (w + i as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(w + 0.5) * (-t).exp() * s)
}

/// `J_ν(t)` for `t >= 0`.
pub fn bessel_j(order: BesselOrder, t: f64) -> Result<f64> {
    let nu = order.nu();
    if !(t >= 0.0) {
        return Err(invalid(format!("Bessel argument must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    if use_series(nu, t) {
        Ok(script_j_series(nu, t)? * t.powf(nu))
    } else if t <= ASYMPTOTIC_SWITCH {
        bessel_j_recurrence(nu, t)
    } else {
        Ok(bessel_j_asymptotic(nu, t))
    }
}

fn use_series(nu: f64, t: f64) -> bool {
    t <= SERIES_LIMIT || t * t <= 2.0 * (nu + 1.0)
}

/// Power series of `t^{-ν} J_ν(t)`; even in `t`, so negative arguments are accepted.
pub fn script_j_series(nu: f64, t: f64) -> Result<f64> {
    let x = 0.25 * t * t;
    let mut term = 1.0 / (2f64.powf(nu) * gamma_real(nu + 1.0)?);
    let mut total = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= -x / (kf * (kf + nu));
        total += term;
        if term.abs() <= 1e-17 * total.abs() {
            break;
        }
    }
    Ok(total)
}

/// Miller backward recurrence normalized by
/// `(t/2)^ν = Σ_k (ν + 2k) Γ(ν + k) / k! · J_{ν+2k}(t)`.
pub fn bessel_j_recurrence(nu: f64, t: f64) -> Result<f64> {
    let n_start = (t.ceil() as usize + 40) & !1;
    let mut upper = 0.0; // J_{ν+k+1}
    let mut current = 1e-30; // J_{ν+k}
    let mut norm = 0.0;
    // a_k = (ν + 2k) Γ(ν + k) / k!, with b_k = Γ(ν + k)/k!
    let coeff = |k: usize| -> Result<f64> {
        if k == 0 {
            gamma_real(nu + 1.0)
        } else {
            let kf = k as f64;
            let ln_b = ln_gamma_complex(Complex64::new(nu + kf, 0.0))?.re
                - ln_gamma_complex(Complex64::new(kf + 1.0, 0.0))?.re;
            Ok((nu + 2.0 * kf) * ln_b.exp())
        }
    };
    for k in (0..=n_start).rev() {
        if k % 2 == 0 {
            norm += coeff(k / 2)? * current;
        }
        if k == 0 {
            break;
        }
        let mu = nu + k as f64;
        let lower = 2.0 * mu / t * current - upper;
        upper = current;
        current = lower;
        if current.abs() > 1e250 {
            upper *= 1e-250;
            current *= 1e-250;
            norm *= 1e-250;
        }
    }
    Ok(current * (0.5 * t).powf(nu) / norm)
}

/// Hankel asymptotic expansion, summed until the terms stop decreasing.
pub fn bessel_j_asymptotic(nu: f64, t: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200usize {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * t);
        }
        let mag = term.abs();
        if mag > prev && k > 2 {
            break;
        }
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if mag < 1e-17 * (p.abs() + q.abs()) {
            break;
        }
        prev = mag;
    }
    let chi = t - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * t)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `𝒥_ν(t) = t^{-ν} J_ν(t)`, with the series limit `1/(2^ν Γ(ν+1))` at `t = 0`.
pub fn script_j(order: BesselOrder, t: f64) -> Result<f64> {
    let nu = order.nu();
    if !(t >= 0.0) {
        return Err(invalid(format!("argument must be >= 0, got {t}")));
    }
    if use_series(nu, t) {
        return script_j_series(nu, t);
    }
    Ok(bessel_j(order, t)? * t.powf(-nu))
}

/// One term `coeff · t^power · 𝒥_{ν+shift}(t)` of a derivative expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivativeTerm {
    pub power: u32,
    pub shift: u32,
    pub coeff: i64,
}

/// Expands `d^a/dt^a 𝒥_ν(t)` by iterating `𝒥'_μ(t) = -t 𝒥_{μ+1}(t)` symbolically.
///
/// Terms come back ordered by `j = a - shift`, so the first term is
/// `(-1)^a t^a 𝒥_{ν+a}` and term `j` carries `t^{a-2j} 𝒥_{ν+a-j}`.
pub fn derivative_terms(a: u32) -> Result<Vec<DerivativeTerm>> {
    if a > MAX_DERIVATIVE_DEPTH {
        return Err(Error::DerivativeDepth(a));
    }
    let mut terms = vec![DerivativeTerm { power: 0, shift: 0, coeff: 1 }];
    for _ in 0..a {
        let mut next: Vec<DerivativeTerm> = Vec::new();
        let mut add = |power: u32, shift: u32, coeff: i64| {
            if coeff == 0 {
                return;
            }
            match next.iter_mut().find(|t| t.power == power && t.shift == shift) {
                Some(t) => t.coeff += coeff,
                None => next.push(DerivativeTerm { power, shift, coeff }),
            }
        };
        for t in &terms {
            if t.power > 0 {
                add(t.power - 1, t.shift, t.coeff * t.power as i64);
            }
            add(t.power + 1, t.shift + 1, -t.coeff);
        }
        next.retain(|t| t.coeff != 0);
        terms = next;
    }
    terms.sort_by_key(|t| std::cmp::Reverse(t.shift));
    Ok(terms)
}

/// `d^a/dt^a 𝒥_ν(t)` for `t > 0`.
pub fn script_j_derivative(order: BesselOrder, a: u32, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("derivative argument must be > 0, got {t}")));
    }
    let mut total = 0.0;
    for term in derivative_terms(a)? {
        total += term.coeff as f64 * t.powi(term.power as i32) * script_j(order.shifted(term.shift as f64), t)?;
    }
    Ok(total)
}

fn decay_sweep(order: BesselOrder, t_min: f64, t_max: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    // spacing at the right end stays below 0.05
    let count = (((t_max / t_min).ln() * t_max / 0.05).ceil() as usize).max(64);
    let exponent = order.nu() + 0.5;
    let mut rows = Vec::with_capacity(count);
    for t in logspace(t_min, t_max, count) {
        let v = script_j(order, t)?.abs() * t.powf(exponent);
        rows.push(vec![t, v]);
    }
    let s = sup(rows.iter().map(|r| r[1]));
    Ok((s, rows))
}

/// Envelope check `sup_t |𝒥_ν(t)| t^{ν+1/2}` on `[t_min, t_max]`, repeated with `t_max` doubled.
pub fn script_j_decay_check(order: BesselOrder, t_min: f64, t_max: f64) -> Result<BoundReport> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(invalid(format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
    }
    let (coarse, rows) = decay_sweep(order, t_min, t_max)?;
    let (fine, _) = decay_sweep(order, t_min, 2.0 * t_max)?;
    let mut report = BoundReport::new("script-j-decay", &["t", "abs_script_j_times_t_pow"]);
    report.rows = rows;
    Ok(report
        .with_sups(coarse, fine)
        .note(format!("nu = {}, window = [{t_min}, {t_max}]", order.nu())))
}
