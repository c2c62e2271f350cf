//! Radial kernels on `H^n`: the Riesz kernel `κ_R^z`, the heat kernel `p_t`,
//! the split of `κ_R^z` at unit distance, and sweeps measuring the constants
//! of their pointwise and integral bounds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::multipliers::{eval_heat_multiplier, eval_riesz_multiplier, RieszParams};
use crate::quadrature::{Nodes, QuadratureSpec};
use crate::report::{fit_line, sup, BoundReport, SlopeFit};
use crate::space::{density_at, phi0, SpaceParams};
use crate::specfun::{script_j, script_j_derivative, BesselOrder, ComplexOrder};
use crate::sph_transform::{
    euclidean_inverse_ft, inverse_transform_with_floor, RadialFunction, RadialGrid, SpectralFunction, SpectralGrid, EDGE_LEVELS,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `e^{-t Λ²}` at the spectral cut-off of a heat multiplier.
pub const HEAT_EXPONENT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelKind {
    Riesz(RieszParams),
    Heat { t: f64 },
}

/// Which part of the split `κ = ζκ + (1 - ζ)κ` a profile holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelPart {
    Whole,
    Local,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    InverseSpherical,
    ClosedForm,
}

/// A kernel sampled at radii, with the cancellation floor of each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelProfile {
    pub kind: KernelKind,
    pub part: KernelPart,
    pub provenance: Provenance,
    pub profile: RadialFunction,
    /// Below these magnitudes a value is rounding noise; zero for closed forms.
    pub floor: Vec<f64>,
}

impl KernelProfile {
    pub fn radii(&self) -> &[f64] {
        self.profile.grid.nodes()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.profile.values
    }

    /// Whether sample `i` lies above its noise floor.
    pub fn resolved(&self, i: usize) -> bool {
        self.profile.values[i].norm() > self.floor[i]
    }
}

/// `ζ(r) = B(1 - r) / (B(1 - r) + B(r - 1/2))` with `B(s) = e^{-1/s²}` for
/// `s > 0`: equal to 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffZeta {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffZeta {
    fn default() -> Self {
        Self { inner: 0.5, outer: 1.0 }
    }
}

fn bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / (s * s)).exp()
    }
}

impl CutoffZeta {
    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let width = self.outer - self.inner;
        let a = bump((self.outer - r) / width);
        let b = bump((r - self.inner) / width);
        a / (a + b)
    }
}

/// `κ_R^z` at `rs` by the inverse spherical transform of `s_R^z`.
///
/// The spectral grid is graded towards the support edge `√(R - ρ²)`, where
/// `s_R^z` vanishes like `(√(R-ρ²) - λ)^z`. Needs a calibration for `n`.
pub fn riesz_kernel(sp: &SpaceParams, p: &RieszParams, rs: &[f64], q: &QuadratureSpec) -> Result<KernelProfile> {
    if p.space != *sp {
        return Err(invalid("Riesz parameters belong to another space"));
    }
    let support = p.support();
    let (profile, floor) = if support == 0.0 {
        (RadialFunction::new(RadialGrid::points(rs)?, vec![ZERO; rs.len()])?, vec![0.0; rs.len()])
    } else {
        let r_top = rs.last().copied().unwrap_or(0.0);
        let grid = SpectralGrid::with_support(support, support, r_top, EDGE_LEVELS, q)?;
        let m = SpectralFunction::sample(grid, |l| eval_riesz_multiplier(p, l))?;
        inverse_transform_with_floor(sp, &m, rs, q)?
    };
    Ok(KernelProfile {
        kind: KernelKind::Riesz(*p),
        part: KernelPart::Whole,
        provenance: Provenance::InverseSpherical,
        profile,
        floor,
    })
}

/// `(ζκ, (1 - ζ)κ)` on the grid of `k`.
pub fn split_kernel(k: &KernelProfile, zeta: &CutoffZeta) -> Result<(KernelProfile, KernelProfile)> {
    if !(k.profile.grid.r_max() > zeta.outer) {
        return Err(invalid(format!("kernel grid must extend beyond r = {}", zeta.outer)));
    }
    let part = |which: KernelPart, weight: &dyn Fn(f64) -> f64| -> Result<KernelProfile> {
        let values = k.profile.iter().map(|(r, v)| v * weight(r)).collect();
        let floor = k.radii().iter().zip(&k.floor).map(|(&r, f)| f * weight(r)).collect();
        Ok(KernelProfile {
            part: which,
            profile: RadialFunction::new(k.profile.grid.clone(), values)?,
            floor,
            ..k.clone()
        })
    };
    let local = part(KernelPart::Local, &|r| zeta.eval(r))?;
    // κ - ζκ keeps the sum exact on the grid
    let mut infinity = part(KernelPart::Infinity, &|r| 1.0 - zeta.eval(r))?;
    for ((inf, whole), loc) in infinity.profile.values.iter_mut().zip(k.values()).zip(local.values()) {
        *inf = whole - loc;
    }
    Ok((local, infinity))
}

/// Spectral cut-off `Λ` with `e^{-tΛ²} = e^{-HEAT_EXPONENT}`.
pub fn heat_lambda_max(t: f64) -> f64 {
    (HEAT_EXPONENT / t).sqrt()
}

/// `p_t` at `rs` by the inverse spherical transform of `e^{-t(λ² + ρ²)}`.
pub fn heat_kernel(sp: &SpaceParams, t: f64, rs: &[f64], q: &QuadratureSpec) -> Result<KernelProfile> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("heat time must be positive, got {t}")));
    }
    let r_top = rs.last().copied().unwrap_or(0.0);
    let grid = SpectralGrid::new(heat_lambda_max(t), r_top, q)?;
    let m = SpectralFunction::sample(grid, |l| Complex64::new(eval_heat_multiplier(sp, t, l), 0.0))?;
    let (profile, floor) = inverse_transform_with_floor(sp, &m, rs, q)?;
    Ok(KernelProfile {
        kind: KernelKind::Heat { t },
        part: KernelPart::Whole,
        provenance: Provenance::InverseSpherical,
        profile,
        floor,
    })
}

/// `(4πt)^{-3/2} e^{-t} (r / sinh r) e^{-r²/4t}`, the heat kernel of `H³`.
pub fn heat_kernel_h3(t: f64, r: f64) -> f64 {
    let shape = if r < 1e-8 { 1.0 - r * r / 6.0 } else { r / r.sinh() };
    (4.0 * PI * t).powf(-1.5) * (-t - r * r / (4.0 * t)).exp() * shape
}

/// The closed-form heat kernel as a profile; only for `n = 3`.
pub fn heat_kernel_closed_form(sp: &SpaceParams, t: f64, rs: &[f64]) -> Result<KernelProfile> {
    if sp.n() != 3 {
        return Err(invalid("the closed-form heat kernel is available for n = 3 only"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("heat time must be positive, got {t}")));
    }
    let profile = RadialFunction::sample_real(RadialGrid::points(rs)?, |r| heat_kernel_h3(t, r))?;
    Ok(KernelProfile {
        kind: KernelKind::Heat { t },
        part: KernelPart::Whole,
        provenance: Provenance::ClosedForm,
        profile,
        floor: vec![0.0; rs.len()],
    })
}

/// `R^{-z} (R - ρ²)^{z+1/2} 𝒥_{z+1/2}(√(R - ρ²) |H|)` for real `z`.
///
/// Up to an `H`-independent constant this is the Euclidean inverse Fourier
/// transform of `s_R^z` on the line.
pub fn bessel_pipeline_kernel(p: &RieszParams, hs: &[f64]) -> Result<Vec<f64>> {
    if !p.z.is_real() {
        return Err(invalid("the Bessel pipeline needs real z"));
    }
    let z = p.z.re();
    let order = BesselOrder::new(z + 0.5)?;
    let s = p.support();
    let scale = (-z * p.R().ln() + (2.0 * z + 1.0) * s.ln()).exp();
    hs.iter().map(|h| Ok(scale * script_j(order, s * h.abs())?)).collect()
}

/// The ratio `π^{-1/2} Γ(z+1) 2^{z-1/2}` of the Euclidean inverse transform
/// of `s_R^z` to [`bessel_pipeline_kernel`].
pub fn bessel_pipeline_constant(z: f64) -> Result<f64> {
    Ok(crate::specfun::gamma_real(z + 1.0)? * 2f64.powf(z - 0.5) / PI.sqrt())
}

/// Compares [`bessel_pipeline_kernel`] with [`euclidean_inverse_ft`] of
/// `s_R^z` at each `R` and `H`. Points where the Bessel profile is below
/// `1e-3` of its sup are skipped (zero crossings). The sup is the largest
/// relative deviation of the ratio from its mean.
pub fn check_bessel_vs_euclidean(sp: &SpaceParams, z: f64, big_rs: &[f64], hs: &[f64], tol: f64, q: &QuadratureSpec) -> Result<BoundReport> {
    let zc = ComplexOrder::real(z)?;
    let h_top = hs.iter().fold(0.0f64, |a, h| a.max(h.abs()));
    let mut report = BoundReport::new("bessel-euclidean", &["R", "H", "bessel", "euclidean", "ratio"]);
    let mut spread = 0.0f64;
    let mut excluded = 0;
    for &big_r in big_rs {
        let p = RieszParams::new(*sp, big_r, zc)?;
        if p.support() == 0.0 {
            return Err(invalid("the Bessel cross-check needs R > ρ²"));
        }
        let grid = SpectralGrid::with_support(p.support(), p.support(), h_top, EDGE_LEVELS, q)?;
        let m = SpectralFunction::sample(grid, |l| eval_riesz_multiplier(&p, l))?;
        let eucl = euclidean_inverse_ft(&m, hs)?;
        let bes = bessel_pipeline_kernel(&p, hs)?;
        let top = sup(bes.iter().map(|b| b.abs()));
        let mut ratios = Vec::new();
        for ((h, b), e) in hs.iter().zip(&bes).zip(&eucl) {
            if b.abs() < 1e-3 * top {
                excluded += 1;
                continue;
            }
            let ratio = e.re / b;
            ratios.push(ratio);
            report.rows.push(vec![big_r, *h, *b, e.re, ratio]);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        spread = spread.max(sup(ratios.iter().map(|r| (r / mean - 1.0).abs())));
        report = report.note(format!("R = {big_r}: ratio {mean:.12}"));
    }
    report.excluded = excluded;
    report.sup_ratio = spread;
    let constant = bessel_pipeline_constant(z)?;
    report = report.note(format!("expected ratio {constant:.12}")).finish();
    report.passed &= spread <= tol;
    Ok(report)
}

/// Sweep of `|∂_H^a 𝒥_{z+1/2}(√(R-ρ²) H)| (R-ρ²)^{-a/2 + z/2 + 1/2} H^{z+1}`
/// over `R` and `H`; the refined sweep halves the `H` spacing.
pub fn check_bessel_derivative_bound(sp: &SpaceParams, z: f64, a: u32, big_rs: &[f64], hs: &[f64]) -> Result<BoundReport> {
    if a > 3 {
        return Err(Error::DerivativeDepth(a));
    }
    let order = BesselOrder::new(z + 0.5)?;
    let rho2 = sp.rho().powi(2);
    let ratio = |big_r: f64, h: f64| -> Result<f64> {
        let s2 = big_r - rho2;
        if !(s2 > 0.0) {
            return Err(invalid("the Bessel derivative sweep needs R > ρ²"));
        }
        let s = s2.sqrt();
        let d = script_j_derivative(order, a, s * h)? * s.powi(a as i32);
        Ok(d.abs() * s2.powf(-0.5 * a as f64 + 0.5 * z + 0.5) * h.powf(z + 1.0))
    };
    let mut report = BoundReport::new("bessel-deriv", &["R", "H", "ratio"]);
    let mut refined = 0.0f64;
    for &big_r in big_rs {
        for (i, &h) in hs.iter().enumerate() {
            report.rows.push(vec![big_r, h, ratio(big_r, h)?]);
            if let Some(&next) = hs.get(i + 1) {
                refined = refined.max(ratio(big_r, 0.5 * (h + next))?);
            }
        }
    }
    let coarse = sup(report.rows.iter().map(|r| r[2]));
    Ok(report.with_sups(coarse, coarse.max(refined)))
}

/// Heat values more than this factor below `p_t` at the first radius are
/// left out of the heat sweeps.
pub const HEAT_FLOOR: f64 = 1e-10;

const HEAT_BLOCK: usize = 16;

/// Midpoints inserted between consecutive entries.
pub fn refine_linear(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * xs.len());
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(0.5 * (xs[i - 1] + x));
        }
        out.push(x);
    }
    out
}

/// Geometric midpoints inserted between consecutive positive entries.
pub fn refine_geometric(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * xs.len());
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            out.push((xs[i - 1] * x).sqrt());
        }
        out.push(x);
    }
    out
}

/// One heat value of a sweep; `coarse` marks points of the unrefined grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatSample {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub coarse: bool,
}

/// `p_t(r)` on the refined `(t, r)` grid. Radii are processed in increasing
/// blocks; since `p_t` decreases in `r`, the sweep stops at the first block
/// whose last value falls below [`HEAT_FLOOR`] or its noise floor. Returns the
/// samples above both floors and the count of the others.
pub fn heat_sweep(sp: &SpaceParams, ts: &[f64], rs: &[f64], q: &QuadratureSpec) -> Result<(Vec<HeatSample>, usize)> {
    if ts.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("heat times must be positive"));
    }
    let fine_t = refine_geometric(ts);
    let fine_r = refine_linear(rs);
    let mut samples = Vec::new();
    let mut excluded = 0;
    for (it, &t) in fine_t.iter().enumerate() {
        let mut reference = None;
        for (b, block) in fine_r.chunks(HEAT_BLOCK).enumerate() {
            let k = heat_kernel(sp, t, block, q)?;
            let mut last_ok = false;
            for (i, (r, v)) in k.profile.iter().enumerate() {
                let reference = *reference.get_or_insert(v.re);
                last_ok = v.re > k.floor[i] && v.re > HEAT_FLOOR * reference;
                if last_ok {
                    let ir = b * HEAT_BLOCK + i;
                    samples.push(HeatSample {
                        t,
                        r,
                        p: v.re,
                        coarse: it % 2 == 0 && ir % 2 == 0,
                    });
                } else {
                    excluded += 1;
                }
            }
            if !last_ok {
                excluded += fine_r.len() - ((b + 1) * HEAT_BLOCK).min(fine_r.len());
                break;
            }
        }
    }
    Ok((samples, excluded))
}

fn heat_report(name: &str, samples: &[HeatSample], excluded: usize, ratio: impl Fn(&HeatSample) -> f64) -> BoundReport {
    let mut report = BoundReport::new(name, &["t", "r", "p", "ratio"]);
    let mut fine = 0.0f64;
    for s in samples {
        let v = ratio(s);
        fine = fine.max(v);
        if s.coarse {
            report.rows.push(vec![s.t, s.r, s.p, v]);
        }
    }
    report.excluded = excluded;
    let coarse = sup(report.rows.iter().map(|r| r[3]));
    report.with_sups(coarse, fine)
}

/// Sweep of `p_t(r) / (t^{-n/2} e^{-r²/4t})`. With `r = 0` in the grid the
/// on-diagonal quantity `sup_t p_t(0) t^{n/2}` is reported as a note.
pub fn check_heat_crude_bound(sp: &SpaceParams, ts: &[f64], rs: &[f64], q: &QuadratureSpec) -> Result<BoundReport> {
    let (samples, excluded) = heat_sweep(sp, ts, rs, q)?;
    let half_n = 0.5 * sp.n() as f64;
    let mut report = heat_report("heat-crude", &samples, excluded, |s| s.p * s.t.powf(half_n) * (s.r * s.r / (4.0 * s.t)).exp());
    let diagonal = sup(samples.iter().filter(|s| s.r == 0.0).map(|s| s.p * s.t.powf(half_n)));
    if diagonal > 0.0 {
        report = report.note(format!("on-diagonal sup p_t(0) t^(n/2) = {diagonal:.12e}"));
    }
    Ok(report)
}

/// Sweep of `p_t(r)` against the rank-one sharp profile
/// `t^{-n/2} (1 + r) (1 + t + r)^{(n-1)/2 - 1} e^{-ρ²t - ρr - r²/4t}`.
pub fn check_heat_sharp_bound(sp: &SpaceParams, ts: &[f64], rs: &[f64], q: &QuadratureSpec) -> Result<BoundReport> {
    let (samples, excluded) = heat_sweep(sp, ts, rs, q)?;
    let n = sp.n() as f64;
    let rho = sp.rho();
    Ok(heat_report("heat-sharp", &samples, excluded, |s| {
        let ln_profile = -0.5 * n * s.t.ln() + (1.0 + s.r).ln() + (0.5 * (n - 1.0) - 1.0) * (1.0 + s.t + s.r).ln()
            - rho * rho * s.t
            - rho * s.r
            - s.r * s.r / (4.0 * s.t);
        s.p * (-ln_profile).exp()
    }))
}

/// Tails `∫_a^∞ p_t² δ dr` below this fraction of `‖p_t‖₂²` are at the level
/// of the heat kernel's rounding and left out.
pub const TAIL_FLOOR: f64 = 1e-18;

/// Tolerance on `‖p_t‖₂² / p_{2t}(0) - 1`.
pub const SEMIGROUP_TOL: f64 = 1e-6;

/// Outcome of [`check_heat_l2_and_tail`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatL2Report {
    /// `‖p_t‖₂ t^{n/4}`.
    pub l2: BoundReport,
    /// `t^{n/2} e^{a²/Dt} ∫_a^∞ p_t² δ dr`.
    pub tail: BoundReport,
    /// `max_t |‖p_t‖₂² / p_{2t}(0) - 1|`.
    pub semigroup_error: f64,
}

/// `‖p_t‖₂²` and the tails `∫_a^∞ p_t² δ dr` for each `a`, by radial
/// quadrature with breakpoints at every `a`.
pub fn heat_l2_tails(sp: &SpaceParams, t: f64, a_grid: &[f64], q: &QuadratureSpec) -> Result<(f64, Vec<f64>)> {
    // p_t² δ ≈ e^{-r²/2t} times a polynomial
    let r_max = (4.0 * HEAT_EXPONENT * t).sqrt() + 2.0;
    let lam = heat_lambda_max(t);
    let mut breaks: Vec<f64> = a_grid.iter().copied().filter(|&a| a > 0.0 && a < r_max).collect();
    breaks.push(0.0);
    breaks.push(r_max);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut nodes = Nodes::new();
    for w in breaks.windows(2) {
        nodes.extend(Nodes::oscillatory(w[0], w[1], lam, 2, q)?);
    }
    let k = heat_kernel(sp, t, &nodes.x, q)?;
    let terms: Vec<f64> = nodes
        .x
        .iter()
        .zip(&nodes.w)
        .zip(k.values())
        .map(|((&r, &w), v)| w * density_at(sp, r) * v.norm_sqr())
        .collect();
    let total: f64 = terms.iter().sum();
    let tails = a_grid
        .iter()
        .map(|&a| nodes.x.iter().zip(&terms).filter(|(&r, _)| r >= a).map(|(_, v)| v).sum())
        .collect();
    Ok((total, tails))
}

/// `‖p_t‖₂ t^{n/4}` over `ts`, the semigroup identity `‖p_t‖₂² = p_{2t}(0)`,
/// and `sup t^{n/2} e^{a²/Dt} ∫_a^∞ p_t² δ dr` over `ts × a_grid`. The
/// l2 report fails when the semigroup identity misses [`SEMIGROUP_TOL`].
pub fn check_heat_l2_and_tail(sp: &SpaceParams, ts: &[f64], a_grid: &[f64], d: f64, q: &QuadratureSpec) -> Result<HeatL2Report> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(format!("D must be positive, got {d}")));
    }
    if ts.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("heat times must be positive"));
    }
    let fine_t = refine_geometric(ts);
    let fine_a = refine_linear(a_grid);
    let half_n = 0.5 * sp.n() as f64;
    let mut l2 = BoundReport::new("heat-l2", &["t", "norm2", "p_2t(0)", "ratio"]);
    let mut tail = BoundReport::new("heat-tail", &["t", "a", "tail", "ratio"]);
    let (mut l2_fine, mut tail_fine, mut semigroup_error) = (0.0f64, 0.0f64, 0.0f64);
    for (it, &t) in fine_t.iter().enumerate() {
        let (norm2, tails) = heat_l2_tails(sp, t, &fine_a, q)?;
        let p2t = heat_kernel(sp, 2.0 * t, &[0.0], q)?.values()[0].re;
        semigroup_error = semigroup_error.max((norm2 / p2t - 1.0).abs());
        let ratio = norm2.sqrt() * t.powf(0.5 * half_n);
        l2_fine = l2_fine.max(ratio);
        if it % 2 == 0 {
            l2.rows.push(vec![t, norm2, p2t, ratio]);
        }
        for (ia, (&a, &tl)) in fine_a.iter().zip(&tails).enumerate() {
            if !(tl > TAIL_FLOOR * norm2) {
                tail.excluded += usize::from(it % 2 == 0 && ia % 2 == 0);
                continue;
            }
            let ratio = tl * t.powf(half_n) * (a * a / (d * t)).exp();
            tail_fine = tail_fine.max(ratio);
            if it % 2 == 0 && ia % 2 == 0 {
                tail.rows.push(vec![t, a, tl, ratio]);
            }
        }
    }
    let l2_coarse = sup(l2.rows.iter().map(|r| r[3]));
    let tail_coarse = sup(tail.rows.iter().map(|r| r[3]));
    let mut l2 = l2.note(format!("semigroup error {semigroup_error:.3e}")).with_sups(l2_coarse, l2_fine);
    l2.passed &= semigroup_error <= SEMIGROUP_TOL;
    Ok(HeatL2Report {
        l2,
        tail: tail.note(format!("D = {d}")).with_sups(tail_coarse, tail_fine),
        semigroup_error,
    })
}

/// `∫_0^1 |κ_R^z(r)| δ(r) dr`, for `Re z > n/2`.
///
/// Quadrature panels resolve the oscillation `e^{i√(R-ρ²) r}` of the kernel.
pub fn local_l1_norm(sp: &SpaceParams, p: &RieszParams, q: &QuadratureSpec) -> Result<f64> {
    let half_n = 0.5 * sp.n() as f64;
    if !(p.z.re() > half_n) {
        return Err(invalid(format!("the local L1 norm needs Re z > n/2 = {half_n}, got {}", p.z.re())));
    }
    if p.support() == 0.0 {
        return Ok(0.0);
    }
    let nodes = Nodes::oscillatory(0.0, 1.0, p.support().max(1.0), 8, q)?;
    let k = riesz_kernel(sp, p, &nodes.x, q)?;
    Ok(nodes.x.iter().zip(&nodes.w).zip(k.values()).map(|((&r, &w), v)| w * density_at(sp, r) * v.norm()).sum())
}

/// [`local_l1_norm`] over `R = ρ² + offset`. The sup is the largest norm;
/// the refined sweep doubles the quadrature density. Passes when, besides
/// stability, `max/min <= max_spread`.
pub fn check_local_l1(sp: &SpaceParams, z: ComplexOrder, offsets: &[f64], max_spread: f64, q: &QuadratureSpec) -> Result<BoundReport> {
    let rho2 = sp.rho().powi(2);
    let fine_q = QuadratureSpec {
        osc_points_per_period: 2 * q.osc_points_per_period,
        ..*q
    };
    let mut report = BoundReport::new("l1ball", &["R", "l1", "l1_refined"]);
    for &off in offsets {
        let p = RieszParams::new(*sp, rho2 + off, z)?;
        report.rows.push(vec![p.R(), local_l1_norm(sp, &p, q)?, local_l1_norm(sp, &p, &fine_q)?]);
    }
    let coarse = sup(report.rows.iter().map(|r| r[1]));
    let fine = sup(report.rows.iter().map(|r| r[2]));
    let low = report.rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    let spread = coarse / low;
    let mut report = report.note(format!("max/min = {spread:.6}")).with_sups(coarse, fine);
    report.passed &= spread <= max_spread;
    Ok(report)
}

/// Sweep of `|κ_R^z(r)|` in the region `r > 1` against
/// `φ_0(r) R^{-(Re z - n + 1/2)/2} r^{-Re z - 1/2}` for `R >= ρ² + 1`, and
/// against `φ_0(r) r^{-Re z - 1/2}` for `R < ρ² + 1`.
///
/// For each `z` the log-log slope of `sup_r |κ| / (φ_0 r^{-Re z-1/2})` in `R`
/// over `R >= ρ² + 1` must be at most `-(Re z - n + 1/2)/2 + slope_tol`.
/// Samples below the cancellation floor of the inverse transform are left
/// out. The refined sweep halves the `r` spacing.
pub fn infinity_kernel_bound_check(
    sp: &SpaceParams,
    zs: &[ComplexOrder],
    big_rs: &[f64],
    rs: &[f64],
    slope_tol: f64,
    q: &QuadratureSpec,
) -> Result<BoundReport> {
    if rs.iter().any(|r| !(*r > 1.0)) {
        return Err(invalid("the infinity region needs r > 1"));
    }
    let n = sp.n() as f64;
    let rho2 = sp.rho().powi(2);
    let fine_r = refine_linear(rs);
    let phi: Vec<f64> = fine_r.par_iter().map(|&r| phi0(sp, r, q)).collect::<Result<_>>()?;
    let mut report = BoundReport::new("kappa-inf", &["re_z", "im_z", "R", "r", "kappa", "normalized", "ratio"]);
    let mut fine_sup = 0.0f64;
    for &z in zs {
        let zr = z.re();
        let gain = 0.5 * (zr - n + 0.5);
        let mut fit = (Vec::new(), Vec::new());
        for &big_r in big_rs {
            let p = RieszParams::new(*sp, big_r, z)?;
            let k = riesz_kernel(sp, &p, &fine_r, q)?;
            let scale = if big_r >= rho2 + 1.0 { big_r.powf(gain) } else { 1.0 };
            let mut sup_normalized = 0.0f64;
            for (i, &r) in fine_r.iter().enumerate() {
                if !k.resolved(i) {
                    report.excluded += usize::from(i % 2 == 0);
                    continue;
                }
                let kappa = k.values()[i].norm();
                let normalized = kappa / (phi[i] * r.powf(-zr - 0.5));
                fine_sup = fine_sup.max(normalized * scale);
                if i % 2 == 0 {
                    sup_normalized = sup_normalized.max(normalized);
                    report.rows.push(vec![zr, z.im(), big_r, r, kappa, normalized, normalized * scale]);
                }
            }
            if big_r >= rho2 + 1.0 && sup_normalized > 0.0 {
                fit.0.push(big_r.ln());
                fit.1.push(sup_normalized.ln());
            }
        }
        if fit.0.len() >= 2 {
            report.slopes.push(SlopeFit::new(format!("R-slope z={zr}{:+}i", z.im()), &fit.0, &fit.1, -gain, slope_tol, true));
        }
    }
    if report.excluded > 0 {
        let excluded = report.excluded;
        report = report.note(format!("{excluded} samples below the cancellation floor"));
    }
    let coarse = sup(report.rows.iter().map(|r| r[6]));
    Ok(report.with_sups(coarse, fine_sup.max(coarse)))
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sph_transform::ensure_calibrated;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn sp(n: u32) -> SpaceParams {
        let sp = SpaceParams::new(n).unwrap();
        ensure_calibrated(&sp, &q()).unwrap();
        sp
    }

    #[test]
    fn heat_crude_bound_h3_is_sharp_at_the_diagonal() {
        let sp3 = sp(3);
        let ts = crate::report::logspace(0.005, 10.0, 12);
        let rs = crate::report::linspace(0.0, 10.0, 41);
        let r = check_heat_crude_bound(&sp3, &ts, &rs, &q()).unwrap();
        let target = (4.0 * PI).powf(-1.5);
        assert!(r.passed, "{:?}", r.growth);
        assert!((r.sup_ratio / target - 1.0).abs() < 0.01, "{} vs {target}", r.sup_ratio);
        for row in &r.rows {
            assert!((row[2] / heat_kernel_h3(row[0], row[1]) - 1.0).abs() < 1e-6, "{row:?}");
        }
        let sharp = check_heat_sharp_bound(&sp3, &ts, &rs, &q()).unwrap();
        assert!(sharp.passed && sharp.sup_ratio < 2.0 * target, "{}", sharp.sup_ratio);
    }

    #[test]
    fn heat_bounds_other_dimensions() {
        let ts = crate::report::logspace(0.01, 5.0, 8);
        let rs = crate::report::linspace(0.0, 8.0, 17);
        for n in [2, 5] {
            let s = sp(n);
            assert!(check_heat_crude_bound(&s, &ts, &rs, &q()).unwrap().passed, "n = {n}");
            assert!(check_heat_sharp_bound(&s, &ts, &rs, &q()).unwrap().passed, "n = {n}");
        }
    }

    #[test]
    fn heat_semigroup_and_tails() {
        let sp3 = sp(3);
        let (norm2, tails) = heat_l2_tails(&sp3, 1.0, &[0.0, 1.0], &q()).unwrap();
        let exact = (8.0 * PI).powf(-1.5) * (-2f64).exp();
        assert!((norm2 / exact - 1.0).abs() < 1e-6, "{norm2} vs {exact}");
        assert_eq!(tails[0], norm2);
        let ts = crate::report::logspace(0.05, 2.0, 6);
        let a = crate::report::linspace(0.5, 5.0, 10);
        let r = check_heat_l2_and_tail(&sp3, &ts, &a, 8.0, &q()).unwrap();
        assert!(r.semigroup_error < 1e-6, "{}", r.semigroup_error);
        assert!(r.l2.passed && r.tail.passed, "{:?} {:?}", r.l2.growth, r.tail.growth);
    }

    #[test]
    fn local_l1_bounded() {
        for n in [2, 3] {
            let s = sp(n);
            let z = ComplexOrder::real(0.5 * n as f64 + 0.6).unwrap();
            let r = check_local_l1(&s, z, &[10.0, 100.0, 1000.0, 10000.0], 10.0, &q()).unwrap();
            assert!(r.passed, "n = {n}: {:?}", r.notes);
        }
        let sp3 = sp(3);
        let z = ComplexOrder::real(2.1).unwrap();
        let zero = RieszParams::new(sp3, 1.0, z).unwrap();
        assert_eq!(local_l1_norm(&sp3, &zero, &q()).unwrap(), 0.0);
        let low = RieszParams::new(sp3, 5.0, ComplexOrder::real(1.5).unwrap()).unwrap();
        assert!(local_l1_norm(&sp3, &low, &q()).is_err());
    }

    #[test]
    fn infinity_bound_holds_on_h3() {
        let sp3 = sp(3);
        let rs = crate::report::linspace(1.1, 10.0, 21);
        let big_rs: Vec<f64> = [1.0, 10.0, 100.0, 1000.0].iter().map(|o| 1.0 + o).collect();
        let zs = [ComplexOrder::real(2.5).unwrap(), ComplexOrder::real(4.0).unwrap()];
        let r = infinity_kernel_bound_check(&sp3, &zs, &big_rs, &rs, 0.15, &q()).unwrap();
        assert!(r.passed, "{:?} {:?}", r.growth, r.slopes);
        // the kernel decays faster in R than the bound requires
        assert!(r.slopes.iter().all(|s| s.slope < s.target), "{:?}", r.slopes);
        assert!(infinity_kernel_bound_check(&sp3, &zs, &big_rs, &[0.9, 2.0], 0.15, &q()).is_err());
    }

    #[test]
    fn zeta_shape() {
        let z = CutoffZeta::default();
        assert_eq!(z.eval(0.3), 1.0);
        assert_eq!(z.eval(0.5), 1.0);
        assert_eq!(z.eval(1.0), 0.0);
        assert_eq!(z.eval(1.5), 0.0);
        assert!((z.eval(0.75) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..100 {
            let v = z.eval(0.5 + 0.005 * i as f64);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn heat_kernel_matches_h3_closed_form() {
        let sp = sp(3);
        let rs: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
        for t in [0.5, 1.0, 2.0] {
            let k = heat_kernel(&sp, t, &rs, &q()).unwrap();
            for (r, v) in k.profile.iter() {
                let exact = heat_kernel_h3(t, r);
                assert!((v.re / exact - 1.0).abs() < 1e-8, "t = {t}, r = {r}: {} vs {exact}", v.re);
                assert!(v.re > 0.0);
            }
        }
        let p0 = heat_kernel(&sp, 1.0, &[0.0, 2.0], &q()).unwrap();
        assert!((p0.values()[0].re - 0.008258_3).abs() < 1e-7);
        assert!(heat_kernel_closed_form(&SpaceParams::new(2).unwrap(), 1.0, &[0.0]).is_err());
    }

    #[test]
    fn riesz_kernel_edge_cases() {
        let sp3 = sp(3);
        let p = RieszParams::new(sp3, 1.0, ComplexOrder::real(2.0).unwrap()).unwrap();
        let k = riesz_kernel(&sp3, &p, &[0.0, 0.5, 2.0], &q()).unwrap();
        assert!(k.values().iter().all(|v| *v == ZERO));
        let other = RieszParams::new(SpaceParams::new(2).unwrap(), 10.0, p.z).unwrap();
        assert!(riesz_kernel(&sp3, &other, &[0.0], &q()).is_err());
    }

    #[test]
    fn riesz_kernel_h3_matches_bessel_derivative() {
        // on H³, κ(r) = -(2π sinh r)^{-1} ∂_r k(r) with k the Euclidean
        // inverse transform of s_R^z; for z = 3 that is the Bessel profile
        let sp3 = sp(3);
        let z = 3.0;
        let p = RieszParams::new(sp3, 101.0, ComplexOrder::real(z).unwrap()).unwrap();
        let rs: Vec<f64> = (1..=30).map(|i| 0.2 * i as f64).collect();
        let k = riesz_kernel(&sp3, &p, &rs, &q()).unwrap();
        let c = bessel_pipeline_constant(z).unwrap();
        let s = p.support();
        let order = BesselOrder::new(z + 0.5).unwrap();
        let scale = (-z * p.R().ln() + (2.0 * z + 1.0) * s.ln()).exp();
        for (r, v) in k.profile.iter() {
            let dk = c * scale * s * script_j_derivative(order, 1, s * r).unwrap();
            let exact = -dk / (2.0 * PI * r.sinh());
            assert!((v.re - exact).abs() < 1e-7 * exact.abs().max(1e-6), "r = {r}: {} vs {exact}", v.re);
        }
    }

    #[test]
    fn split_is_exact() {
        let sp3 = sp(3);
        let p = RieszParams::new(sp3, 11.0, ComplexOrder::real(2.0).unwrap()).unwrap();
        let rs: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64).collect();
        let k = riesz_kernel(&sp3, &p, &rs, &q()).unwrap();
        let (loc, inf) = split_kernel(&k, &CutoffZeta::default()).unwrap();
        for (i, &r) in rs.iter().enumerate() {
            assert_eq!(loc.values()[i] + inf.values()[i], k.values()[i]);
            if r <= 0.5 {
                assert_eq!(inf.values()[i], ZERO);
            }
            if r >= 1.0 {
                assert_eq!(loc.values()[i], ZERO);
            }
        }
        let short = riesz_kernel(&sp3, &p, &[0.0, 0.5], &q()).unwrap();
        assert!(split_kernel(&short, &CutoffZeta::default()).is_err());
    }

    #[test]
    fn bessel_pipeline_agrees_with_euclidean_transform() {
        let sp3 = SpaceParams::new(3).unwrap();
        let hs: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
        for z in [1.0, 2.5, 3.0] {
            let r = check_bessel_vs_euclidean(&sp3, z, &[2.0, 26.0, 401.0], &hs, 1e-4, &q()).unwrap();
            assert!(r.passed, "z = {z}: spread {}", r.sup_ratio);
            let expected = bessel_pipeline_constant(z).unwrap();
            let first = r.rows[0][4];
            assert!((first / expected - 1.0).abs() < 1e-6, "{first} vs {expected}");
        }
        let p = RieszParams::new(sp3, 5.0, ComplexOrder::real(0.5).unwrap()).unwrap();
        let at0 = bessel_pipeline_kernel(&p, &[0.0]).unwrap()[0];
        let s = p.support();
        let expect = 5f64.powf(-0.5) * s * s * script_j(BesselOrder::new(1.0).unwrap(), 0.0).unwrap();
        assert!((at0 - expect).abs() < 1e-14);
    }

    #[test]
    fn bessel_derivative_bound_is_finite() {
        let sp3 = SpaceParams::new(3).unwrap();
        let rs: Vec<f64> = (0..=10).map(|i| 2.0 + 10.0 * i as f64).collect();
        let hs: Vec<f64> = (0..=40).map(|i| 0.5 + 0.2375 * i as f64).collect();
        for (z, a) in [(2.0, 1), (3.0, 2), (2.0, 0)] {
            let r = check_bessel_derivative_bound(&sp3, z, a, &rs, &hs).unwrap();
            assert!(r.passed, "z = {z}, a = {a}: {:?}", r.growth);
        }
    }
}
