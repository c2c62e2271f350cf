//! Real hyperbolic space `H^n` in geodesic polar coordinates.
//!
//! Radial functions live on `r = d(x, x0) >= 0`. The volume element is
//! `δ(r) dr` with `δ(r) = ω_{n-1} sinh^{n-1} r`, so small balls have
//! Euclidean volume.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive, Nodes, QuadratureSpec};
use crate::report::{linspace, logspace, sup, BoundReport};
use crate::specfun::{gamma_real, ln_gamma_complex};

/// Rank-one symmetric space `H^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceParams {
    n: u32,
}

impl SpaceParams {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("dimension n must be >= 2, got {n}")));
        }
        if n > 64 {
            return Err(invalid(format!("dimension n = {n} is outside the supported range [2, 64]")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rank(&self) -> u32 {
        1
    }

    pub fn m_alpha(&self) -> f64 {
        (self.n - 1) as f64
    }

    pub fn m_2alpha(&self) -> f64 {
        0.0
    }

    /// `ρ = (m_α + 2 m_{2α}) / 2 = (n - 1) / 2`.
    pub fn rho(&self) -> f64 {
        0.5 * (self.m_alpha() + 2.0 * self.m_2alpha())
    }

    /// Number of positive indivisible roots.
    pub fn indivisible_roots(&self) -> u32 {
        1
    }

    /// Area of the Euclidean unit sphere `S^{n-1}`.
    pub fn sphere_area(&self) -> f64 {
        let half = 0.5 * self.n as f64;
        2.0 * PI.powf(half) / gamma_real(half).expect("n/2 > 0")
    }

    /// `c_n` normalizing the Harish-Chandra integral so that `φ_λ(0) = 1`.
    fn spherical_constant(&self) -> f64 {
        let n = self.n as f64;
        gamma_real(0.5 * n).unwrap() / (PI.sqrt() * gamma_real(0.5 * (n - 1.0)).unwrap())
    }
}

/// Geodesic distance from the base point.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RadialPoint(f64);

impl RadialPoint {
    pub fn new(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid(format!("radius must be finite and >= 0, got {r}")));
        }
        Ok(Self(r))
    }

    pub fn r(self) -> f64 {
        self.0
    }
}

fn ln_sinh(r: f64) -> f64 {
    if r > 20.0 {
        r - std::f64::consts::LN_2 + (-(-2.0 * r).exp()).ln_1p()
    } else {
        r.sinh().ln()
    }
}

/// `ω_{n-1} sinh^{n-1} r`.
pub fn density(sp: &SpaceParams, r: RadialPoint) -> f64 {
    density_at(sp, r.r())
}

pub(crate) fn density_at(sp: &SpaceParams, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    sp.sphere_area() * ((sp.n - 1) as f64 * ln_sinh(r)).exp()
}

/// `|B(x0, r)| = ∫_0^r δ(s) ds`.
pub fn ball_volume(sp: &SpaceParams, r: RadialPoint, q: &QuadratureSpec) -> Result<f64> {
    adaptive(|s| density_at(sp, s), 0.0, r.r(), q)
}

/// `ln(expm1(x) / x)` for `x >= 0`.
fn ln_expm1_ratio(x: f64) -> f64 {
    if x < 1e-300 {
        0.0
    } else if x > 30.0 {
        x + (-(-x).exp_m1()).ln() - x.ln()
    } else {
        (x.exp_m1() / x).ln()
    }
}

/// Quadrature nodes for the Harish-Chandra integral at a fixed radius.
///
/// With `A = cosh r - sinh r cos θ = e^u` and `u = r cos ψ` the integral
/// becomes a smooth, even-in-`u` cosine transform:
///
/// `φ_λ(r) = Σ_k w_k cos(λ u_k)`,
///
/// so that every `λ` reuses the same nodes and weights.
#[derive(Debug, Clone)]
pub struct SphericalNodes {
    r: f64,
    u: Vec<f64>,
    w: Vec<f64>,
}

impl SphericalNodes {
    /// Nodes resolving every `λ <= lambda_max`.
    pub fn new(sp: &SpaceParams, r: f64, lambda_max: f64, q: &QuadratureSpec) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid(format!("radius must be finite and >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(Self { r, u: vec![0.0], w: vec![1.0] });
        }
        let n = sp.n as f64;
        // The phase λ r cos ψ has ψ-frequency at most λ r; the amplitude varies
        // like e^{(n-3) r cos ψ / 2}.
        let min_panels = 2 + (0.25 * n * r).ceil() as usize;
        let nodes = Nodes::oscillatory(0.0, 0.5 * PI, lambda_max * r, min_panels, q)?;
        let pref = 2.0 * sp.spherical_constant();
        let ln_sinh_r = ln_sinh(r);
        let mut u = Vec::with_capacity(nodes.len());
        let mut w = Vec::with_capacity(nodes.len());
        for (&psi, &wt) in nodes.x.iter().zip(&nodes.w) {
            let uk = r * psi.cos();
            let rs = r * psi.sin();
            // ln of 2(cosh r - cosh u) / (r² - u²)
            let ln_q = (-(-(r + uk)).exp_m1()).ln() - (r + uk).ln() + uk + ln_expm1_ratio(r - uk);
            let ln_integrand = (n - 2.0) * (rs.ln() - ln_sinh_r) + 0.5 * (n - 3.0) * ln_q;
            u.push(uk);
            w.push(pref * wt * ln_integrand.exp());
        }
        Ok(Self { r, u, w })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Pairs `(u_k, w_k)`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.w.iter().copied())
    }

    /// `Σ_k w_k g(u_k)`: the spherical average of `g(u)` with `u` the
    /// substitution variable, so that `g = cos(λ·)` gives `φ_λ(r)`.
    pub fn integrate<T, G>(&self, g: G) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        G: Fn(f64) -> T,
    {
        self.u.iter().zip(&self.w).map(|(&u, &w)| g(u) * w).sum()
    }

    /// `φ_λ(r)`; even in `λ`.
    pub fn eval(&self, lambda: f64) -> f64 {
        self.u.iter().zip(&self.w).map(|(u, w)| w * (lambda * u).cos()).sum()
    }
}

/// Elementary spherical function `φ_λ(r)` from the Harish-Chandra integral.
pub fn spherical_function(sp: &SpaceParams, lambda: f64, r: RadialPoint, q: &QuadratureSpec) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(invalid("λ must be finite"));
    }
    if r.r() == 0.0 {
        return Ok(1.0);
    }
    Ok(SphericalNodes::new(sp, r.r(), lambda.abs(), q)?.eval(lambda))
}

/// `φ_0(r)`.
pub fn phi0(sp: &SpaceParams, r: f64, q: &QuadratureSpec) -> Result<f64> {
    spherical_function(sp, 0.0, RadialPoint::new(r)?, q)
}

/// Unnormalized Plancherel density `|c(λ)|^{-2}` from the Gindikin–Karpelevich
/// formula with multiplicities `(n - 1, 0)`:
///
/// `c(λ) ∝ 2^{-iλ} Γ(iλ) / (Γ((m_α/2 + 1 + iλ)/2) Γ((m_α/2 + m_{2α} + iλ)/2))`.
///
/// The overall constant is left to the transform calibration.
pub fn plancherel_density(sp: &SpaceParams, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!("λ must be >= 0, got {lambda}")));
    }
    if lambda > PLANCHEREL_WINDOW {
        return Err(Error::GammaOverflow { re: 0.0, im: lambda });
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let half_m = 0.5 * sp.m_alpha();
    let il = Complex64::new(0.0, lambda);
    let ln_c = -il * std::f64::consts::LN_2 + ln_gamma_complex(il)?
        - ln_gamma_complex(0.5 * (il + half_m + 1.0))?
        - ln_gamma_complex(0.5 * (il + half_m + sp.m_2alpha()))?;
    Ok((-2.0 * ln_c.re).exp())
}

/// Largest `λ` accepted by [`plancherel_density`].
pub const PLANCHEREL_WINDOW: f64 = 1.0e4;

fn phi0_ratio_sweep(sp: &SpaceParams, r_min: f64, r_max: f64, count: usize, q: &QuadratureSpec) -> Result<(f64, Vec<Vec<f64>>)> {
    let rho = sp.rho();
    let d = sp.indivisible_roots() as i32;
    let mut rows = Vec::with_capacity(count);
    for r in linspace(r_min, r_max, count) {
        let p = phi0(sp, r, q)?;
        let bound = (1.0 + r).powi(d) * (-rho * r).exp();
        rows.push(vec![r, p, p / bound]);
    }
    Ok((sup(rows.iter().map(|row| row[2])), rows))
}

/// `sup_r φ_0(r) / ((1 + r)^d e^{-ρ r})` on `[r_min, r_max]`, refined by
/// doubling both the grid density and `r_max`.
pub fn phi0_bound_check(sp: &SpaceParams, r_min: f64, r_max: f64, count: usize, q: &QuadratureSpec) -> Result<BoundReport> {
    if !(r_min > 0.0 && r_max > r_min && count >= 2) {
        return Err(invalid("phi0 check needs 0 < r_min < r_max and at least two points"));
    }
    let (coarse, rows) = phi0_ratio_sweep(sp, r_min, r_max, count, q)?;
    let (fine, _) = phi0_ratio_sweep(sp, r_min, 2.0 * r_max, 4 * count - 3, q)?;
    let mut report = BoundReport::new("phi0", &["r", "phi0", "ratio"]);
    report.rows = rows;
    Ok(report.with_sups(coarse, fine).note(format!("n = {}", sp.n)))
}

/// `δ(r) / e^{2ρ r}` bounded on `[0, r_max]` and converging to `ω_{n-1} 2^{1-n}`.
pub fn modular_check(sp: &SpaceParams, r_max: f64, count: usize) -> Result<BoundReport> {
    if !(r_max > 0.0 && count >= 2) {
        return Err(invalid("modular check needs r_max > 0 and at least two points"));
    }
    let rho = sp.rho();
    let sweep = |r_max: f64, count: usize| -> Vec<Vec<f64>> {
        linspace(0.0, r_max, count)
            .into_iter()
            .map(|r| vec![r, density_at(sp, r) / (2.0 * rho * r).exp()])
            .collect()
    };
    let rows = sweep(r_max, count);
    let coarse = sup(rows.iter().map(|r| r[1]));
    let fine = sup(sweep(2.0 * r_max, 2 * count).iter().map(|r| r[1]));
    let limit = sp.sphere_area() / 2f64.powi(sp.n as i32 - 1);
    let last = rows.last().map(|r| r[1]).unwrap_or(0.0);
    let mut report = BoundReport::new("modular", &["r", "density_over_exp"]);
    report.rows = rows;
    Ok(report
        .with_sups(coarse, fine)
        .note(format!("limit omega/2^(n-1) = {limit:.12e}, value at r_max = {last:.12e}")))
}

/// `|B(r)| / r^n` bounded for `r <= 1`.
pub fn volume_check(sp: &SpaceParams, count: usize, q: &QuadratureSpec) -> Result<BoundReport> {
    let sweep = |count: usize| -> Result<Vec<Vec<f64>>> {
        logspace(1e-3, 1.0, count)
            .into_iter()
            .map(|r| {
                let v = ball_volume(sp, RadialPoint::new(r)?, q)?;
                Ok(vec![r, v, v / r.powi(sp.n as i32)])
            })
            .collect()
    };
    let rows = sweep(count)?;
    let coarse = sup(rows.iter().map(|r| r[2]));
    let fine = sup(sweep(2 * count)?.iter().map(|r| r[2]));
    let euclid = sp.sphere_area() / sp.n as f64;
    let mut report = BoundReport::new("vol", &["r", "volume", "ratio"]);
    report.rows = rows;
    Ok(report.with_sups(coarse, fine).note(format!("Euclidean small-ball constant = {euclid:.12e}")))
}
