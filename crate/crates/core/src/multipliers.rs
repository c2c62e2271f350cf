//! Spectral multipliers: the Riesz multiplier `s_R^z`, the heat multiplier,
//! the factor `h_r^z`, its dyadic pieces `h_{j,r}^z`, and the Mellin
//! representation of `M(u) = (1-u)_+^z - e^{-u}`.
//!
//! Functions of the spectral variable take `ξ = λ = ‖λ‖ >= 0`; the scale is
//! `r = √R`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diff::sup_derivative_norms;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{Nodes, QuadratureSpec, UniformInterpolator};
use crate::report::{linspace, logspace, relative_growth, sup, BoundReport, SlopeFit};
use crate::space::SpaceParams;
use crate::specfun::ComplexOrder;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Riesz mean parameters: spectral scale `R >= ρ²` and order `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszParams {
    pub space: SpaceParams,
    big_r: f64,
    pub z: ComplexOrder,
}

impl RieszParams {
    pub fn new(space: SpaceParams, big_r: f64, z: ComplexOrder) -> Result<Self> {
        let rho2 = space.rho().powi(2);
        if !(big_r >= rho2 && big_r.is_finite()) {
            return Err(invalid(format!("R must be finite and >= ρ² = {rho2}, got {big_r}")));
        }
        Ok(Self { space, big_r, z })
    }

    #[allow(non_snake_case)]
    pub fn R(&self) -> f64 {
        self.big_r
    }

    /// `r = √R`.
    pub fn r(&self) -> f64 {
        self.big_r.sqrt()
    }

    /// `u = (λ² + ρ²) / R`.
    pub fn u(&self, lambda: f64) -> f64 {
        (lambda * lambda + self.space.rho().powi(2)) / self.big_r
    }

    /// Edge of the multiplier support, `√(R - ρ²)`.
    pub fn support(&self) -> f64 {
        (self.big_r - self.space.rho().powi(2)).max(0.0).sqrt()
    }
}

/// `(1 - u)_+^z`, exactly zero for `u >= 1`.
pub fn positive_part_power(u: f64, z: ComplexOrder) -> Complex64 {
    if u >= 1.0 {
        return ZERO;
    }
    if z.as_complex() == ZERO {
        return Complex64::new(1.0, 0.0);
    }
    (z.as_complex() * (1.0 - u).ln()).exp()
}

/// `s_R^z(λ) = (1 - (ρ² + λ²)/R)_+^z`.
pub fn eval_riesz_multiplier(p: &RieszParams, lambda: f64) -> Complex64 {
    positive_part_power(p.u(lambda), p.z)
}

/// `w_t(λ) = e^{-t(λ² + ρ²)}`.
pub fn eval_heat_multiplier(sp: &SpaceParams, t: f64, lambda: f64) -> f64 {
    (-t * (lambda * lambda + sp.rho().powi(2))).exp()
}

/// `h_r^z(ξ) = (1 - u)_+^z e^{u}` with `u = (ξ² + ρ²)/r²`, so that
/// `s_R^z = h_r^z · e^{-(ξ² + ρ²)/r²}`.
pub fn eval_h(p: &RieszParams, xi: f64) -> Complex64 {
    let u = p.u(xi);
    positive_part_power(u, p.z) * u.exp()
}

/// `ψ(ξ) = e^{-1/ξ²}` for `ξ > 0`, zero otherwise.
fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / (x * x)).exp()
    }
}

/// `ψ_1(ξ) = ψ(ξ) ψ(1 - ξ)`, supported on `[0, 1]`.
fn psi1(x: f64) -> f64 {
    psi(x) * psi(1.0 - x)
}

/// `φ_j(ξ) = ψ_1(2^j (ξ - 1) + 5/4)`, supported on `I_j`.
fn phi_j(j: u32, x: f64) -> f64 {
    psi1(2f64.powi(j as i32) * (x - 1.0) + 1.25)
}

/// `I_j = [1 - 5/2^{j+2}, 1 - 1/2^{j+2}]`.
pub fn partition_interval(j: u32) -> (f64, f64) {
    let s = 0.5f64.powi(j as i32 + 2);
    (1.0 - 5.0 * s, 1.0 - s)
}

/// Indices `i >= 0` with `φ_i(ξ) != 0`.
fn active_pieces(x: f64) -> std::ops::RangeInclusive<u32> {
    // 2^i (1 - ξ) ∈ (1/4, 5/4)
    let gap = 1.0 - x;
    let lo = (0.25 / gap).log2().floor().max(0.0) as u32;
    let hi = (1.25 / gap).log2().ceil().max(0.0) as u32;
    lo..=hi
}

/// Largest number of simultaneously nonzero `φ_i` on a fine sweep of `[0, 1)`.
pub fn partition_overlap() -> usize {
    let mut worst = 0;
    for j in 0..24 {
        let (a, b) = partition_interval(j);
        for x in linspace(a.max(0.0), b, 400) {
            let count = active_pieces(x).filter(|&i| phi_j(i, x) > 0.0).count();
            worst = worst.max(count);
        }
    }
    worst
}

/// Largest overlap of the `φ_i`, determined by [`partition_overlap`] and
/// asserted in the tests.
pub const PARTITION_OVERLAP: usize = 3;

fn chi_unchecked(j: u32, x: f64) -> f64 {
    let (a, b) = partition_interval(j);
    if x <= a || x >= b {
        return 0.0;
    }
    let num = phi_j(j, x);
    if num == 0.0 {
        return 0.0;
    }
    let den: f64 = active_pieces(x).map(|i| phi_j(i, x)).sum();
    num / den
}

/// `χ_j(ξ) = φ_j(ξ) / Σ_{i>=0} φ_i(ξ)` for `ξ ∈ [0, 1)`.
pub fn partition_chi(j: u32, xi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&xi) {
        return Err(invalid(format!("partition variable must lie in [0, 1), got {xi}")));
    }
    Ok(chi_unchecked(j, xi))
}

/// One dyadic piece `h_{j,r}^z = h_r^z · χ_j((ξ/r)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPiece {
    pub j: u32,
    pub r: f64,
}

impl DyadicPiece {
    pub fn new(j: u32, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(format!("r must be positive, got {r}")));
        }
        Ok(Self { j, r })
    }

    pub fn of(j: u32, p: &RieszParams) -> Self {
        Self { j, r: p.r() }
    }

    /// Support of `χ_j((ξ/r)²)` in `ξ >= 0`.
    pub fn chi_support(&self) -> (f64, f64) {
        let (a, b) = partition_interval(self.j);
        (self.r * a.max(0.0).sqrt(), self.r * b.sqrt())
    }

    /// Support of `h_{j,r}^z` in `ξ >= 0`: the `χ` support cut at `√(R - ρ²)`.
    /// `None` when the piece vanishes.
    pub fn support(&self, p: &RieszParams) -> Option<(f64, f64)> {
        let (a, b) = self.chi_support();
        let b = b.min(p.support());
        (b > a).then_some((a, b))
    }
}

/// `h_{j,r}^z(ξ)`; even in `ξ`.
pub fn eval_hjr(piece: &DyadicPiece, p: &RieszParams, xi: f64) -> Complex64 {
    let x = (xi / piece.r).powi(2);
    if x >= 1.0 {
        return ZERO;
    }
    let chi = chi_unchecked(piece.j, x);
    if chi == 0.0 {
        return ZERO;
    }
    eval_h(p, xi) * chi
}

/// `|supp h_{j,r}^z| / (r 2^{-j})` over `j_range` and the given `r` values,
/// refined by doubling the `j` range.
pub fn support_length_check(sp: &SpaceParams, z: ComplexOrder, j_max: u32, r_values: &[f64]) -> Result<BoundReport> {
    let sweep = |j_max: u32| -> Result<Vec<Vec<f64>>> {
        let mut rows = Vec::new();
        for &r in r_values {
            let p = RieszParams::new(*sp, r * r, z)?;
            for j in 0..=j_max {
                let piece = DyadicPiece::new(j, r)?;
                let len = piece.support(&p).map_or(0.0, |(a, b)| b - a);
                rows.push(vec![j as f64, r, len, len / (r * 0.5f64.powi(j as i32))]);
            }
        }
        Ok(rows)
    };
    let rows = sweep(j_max)?;
    let coarse = sup(rows.iter().map(|r| r[3]));
    let fine = sup(sweep(2 * j_max)?.iter().map(|r| r[3]));
    let mut report = BoundReport::new("alexo6", &["j", "r", "support_length", "ratio"]);
    report.rows = rows;
    Ok(report.with_sups(coarse, fine))
}

/// Derivative sups of `h_{j,r}^z` in `ξ` for `k = 0..=k_max`; zeros when the
/// piece vanishes.
pub fn hjr_derivative_norms(piece: &DyadicPiece, p: &RieszParams, k_max: usize) -> Result<Vec<f64>> {
    let Some((a, b)) = piece.support(p) else {
        return Ok(vec![0.0; k_max + 1]);
    };
    let h = (b - a) / 2048.0;
    sup_derivative_norms(|xi| eval_hjr(piece, p, xi), a, b, h, k_max)
}

/// Parameters of [`check_hjr_derivative_norms`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSweep {
    pub j_min: u32,
    pub j_max: u32,
    pub k_max: usize,
    /// Scales `r` for the r-exponent fit; the `j` fit uses the largest.
    pub r_values: Vec<f64>,
    pub j_tol: f64,
    pub r_tol: f64,
}

impl Default for DerivativeSweep {
    fn default() -> Self {
        Self {
            j_min: 3,
            j_max: 10,
            k_max: 2,
            r_values: vec![32.0, 128.0, 512.0],
            j_tol: 0.15,
            r_tol: 0.1,
        }
    }
}

/// `‖(h_{j,r}^z)^{(k)}‖_∞ <= c_k r^{-k} 2^{-(Re z - k) j}`.
///
/// Reports the sup of `‖·‖_∞ r^k 2^{(Re z - k) j}`, per `k` the least-squares
/// slope of `log₂ ‖·‖_∞` against `j` at the largest `r` (target `-(Re z - k)`),
/// and the slope of `log ‖·‖_∞` against `log r` at `j = j_min` (target `-k`).
/// The refined sweep doubles every `r`.
pub fn check_hjr_derivative_norms(sp: &SpaceParams, z: ComplexOrder, cfg: &DerivativeSweep) -> Result<BoundReport> {
    if cfg.k_max > crate::diff::MAX_ORDER {
        return Err(Error::DerivativeDepth(cfg.k_max as u32));
    }
    if !(z.re() > cfg.k_max as f64) {
        return Err(invalid(format!("need Re z > k_max = {}, got Re z = {}", cfg.k_max, z.re())));
    }
    if cfg.r_values.is_empty() || cfg.j_max <= cfg.j_min {
        return Err(invalid("derivative sweep needs r values and j_max > j_min"));
    }
    let zr = z.re();
    let norms_at = |j: u32, r: f64| -> Result<Vec<f64>> {
        let p = RieszParams::new(*sp, r * r, z)?;
        hjr_derivative_norms(&DyadicPiece::new(j, r)?, &p, cfg.k_max)
    };
    let ratio = |norm: f64, j: u32, r: f64, k: usize| norm * r.powi(k as i32) * 2f64.powf((zr - k as f64) * j as f64);

    let mut rows = Vec::new();
    let mut fine_sup = 0.0f64;
    for &r in &cfg.r_values {
        for j in cfg.j_min..=cfg.j_max {
            let norms = norms_at(j, r)?;
            let refined = norms_at(j, 2.0 * r)?;
            for k in 0..=cfg.k_max {
                rows.push(vec![k as f64, j as f64, r, norms[k], ratio(norms[k], j, r, k)]);
                fine_sup = fine_sup.max(ratio(refined[k], j, 2.0 * r, k));
            }
        }
    }
    let coarse_sup = sup(rows.iter().map(|r| r[4]));
    let mut report = BoundReport::new("alexo7", &["k", "j", "r", "norm", "ratio"]);
    let r_big = cfg.r_values.iter().copied().fold(0.0, f64::max);
    for k in 0..=cfg.k_max {
        let (js, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|row| row[0] == k as f64 && row[2] == r_big && row[3] > 0.0)
            .map(|row| (row[1], row[3].log2()))
            .unzip();
        report = report.with_slope(SlopeFit::new(format!("j-slope k={k}"), &js, &ys, -(zr - k as f64), cfg.j_tol, false));
        if cfg.r_values.len() >= 2 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|row| row[0] == k as f64 && row[1] == cfg.j_min as f64 && row[3] > 0.0)
                .map(|row| (row[2].ln(), row[3].ln()))
                .unzip();
            report = report.with_slope(SlopeFit::new(format!("r-exponent k={k}"), &xs, &ys, -(k as f64), cfg.r_tol, false));
        }
    }
    report.rows = rows;
    Ok(report.with_sups(coarse_sup, fine_sup.max(coarse_sup)))
}

/// Settings of the Fourier tail computation for `h_{j,r}^z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    /// `ĥ` is computed for `|t| <= tau_max / w`, `w` the support length.
    pub tau_max: f64,
    /// Points of the log-spaced `s` grid.
    pub s_points: usize,
    /// Start of the asymptotic window: `T(s) <= window · T(s_min)`.
    pub window: f64,
    /// `T(s)` below `floor · T(s_min)` is at the quadrature noise level and
    /// excluded from slope fits.
    pub floor: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            tau_max: 3000.0,
            s_points: 64,
            window: 1e-3,
            floor: 1e-9,
        }
    }
}

/// Points of the local interpolation stencil for `G`.
const STENCIL: usize = 14;

/// `T(s) = ∫_{|t|>=s} |ĥ_{j,r}^z(t)| dt` on a log-spaced `s` grid from
/// `0.1/w` to `tau_max/(2w)`, with `ĥ(t) = ∫_ℝ h_{j,r}^z(ξ) e^{-itξ} dξ` and
/// `h` extended evenly.
///
/// With `c` the centre of the support, `ĥ(t) = e^{itc} G(t) + e^{-itc} G(-t)`
/// where `G(t) = ∫ h(ξ) e^{it(ξ-c)} dξ` has bandwidth `w/2`. `G` is sampled at
/// spacing `1/w` by quadrature, interpolated onto a grid resolving the
/// carrier `e^{itc}`, and `|ĥ|` is integrated by the trapezoidal rule.
pub fn hhat_tail(piece: &DyadicPiece, p: &RieszParams, cfg: &TailConfig, q: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    let Some((a, b)) = piece.support(p) else {
        return Ok(Vec::new());
    };
    let w = b - a;
    let c = 0.5 * (a + b);
    let t_max = cfg.tau_max / w;
    let xi = Nodes::oscillatory(a, b, t_max, 32, q)?;
    let d: Vec<f64> = xi.x.iter().map(|x| x - c).collect();
    let hw: Vec<Complex64> = xi.x.iter().zip(&xi.w).map(|(&x, &wt)| eval_hjr(piece, p, x) * wt).collect();

    // G at t_m = (m - half) Δ by phasor recurrence, re-seeded every 256 steps
    let delta = 1.0 / w;
    let half = (t_max / delta).ceil() as usize + STENCIL;
    let count = 2 * half + 1;
    let step: Vec<Complex64> = d.iter().map(|&dk| Complex64::from_polar(1.0, delta * dk)).collect();
    let mut phasor = vec![ZERO; d.len()];
    let mut g = Vec::with_capacity(count);
    for m in 0..count {
        let t = (m as f64 - half as f64) * delta;
        if m % 256 == 0 {
            for (ph, &dk) in phasor.iter_mut().zip(&d) {
                *ph = Complex64::from_polar(1.0, t * dk);
            }
        }
        g.push(phasor.iter().zip(&hw).map(|(ph, v)| ph * v).sum::<Complex64>());
        for (ph, st) in phasor.iter_mut().zip(&step) {
            *ph *= st;
        }
    }

    let interp = UniformInterpolator::new(STENCIL);
    let dt = (2.0 * PI / (24.0 * c)).min(delta / 4.0);
    let fine = (t_max / dt).ceil() as usize;
    let mut ts = Vec::with_capacity(fine + 1);
    let mut abs_hat = Vec::with_capacity(fine + 1);
    for i in 0..=fine {
        let t = t_max * i as f64 / fine as f64;
        let gp = interp.eval(&g, t / delta + half as f64);
        let gm = interp.eval(&g, -t / delta + half as f64);
        let hat = Complex64::from_polar(1.0, t * c) * gp + Complex64::from_polar(1.0, -t * c) * gm;
        ts.push(t);
        abs_hat.push(hat.norm());
    }
    // cumulative tail integral from the right end
    let mut tail = vec![0.0; ts.len()];
    for i in (0..ts.len() - 1).rev() {
        tail[i] = tail[i + 1] + 0.5 * (ts[i + 1] - ts[i]) * (abs_hat[i] + abs_hat[i + 1]);
    }
    let s_grid = logspace(0.1 / w, 0.5 * t_max, cfg.s_points);
    Ok(s_grid
        .into_iter()
        .map(|s| {
            let i = ts.partition_point(|&t| t <= s).clamp(1, ts.len() - 1);
            let f = (s - ts[i - 1]) / (ts[i] - ts[i - 1]);
            (s, 2.0 * (tail[i - 1] * (1.0 - f) + tail[i] * f))
        })
        .collect())
}

/// `∫_{|t|>=s} |ĥ_{j,r}^z(t)| dt <= c_k s^{-k} r^{-k} 2^{(k - Re z) j}`.
///
/// For each `j` the log-log slope of `T(s)` over the asymptotic window
/// (`floor < T(s)/T(s_min) <= window`) must be at most `-k + tol`. The
/// `j`-scaling is measured on `Q_k(j) = sup_s s^k T(s)`, which by the bound
/// scales as `r^{-k} 2^{(k - Re z) j}`; its slope in `j` must be within `tol`
/// of `k - Re z`. The sup-ratio is `Q_k(j) r^k 2^{(Re z - k) j}`; the refined
/// sweep doubles `tau_max`.
pub fn check_hhat_tail(p: &RieszParams, js: &[u32], k: u32, tol: f64, cfg: &TailConfig, q: &QuadratureSpec) -> Result<BoundReport> {
    if !(1..=3).contains(&k) {
        return Err(invalid(format!("k must be 1, 2 or 3, got {k}")));
    }
    let kf = k as f64;
    let zr = p.z.re();
    let r = p.r();
    let mut report = BoundReport::new("hhat", &["j", "s", "tail", "s^k_tail"]);
    let mut q_rows: Vec<(f64, f64)> = Vec::new();
    let mut coarse = 0.0f64;
    let mut fine = 0.0f64;
    let mut excluded = 0;
    let refined_cfg = TailConfig {
        tau_max: 2.0 * cfg.tau_max,
        ..*cfg
    };
    for &j in js {
        let piece = DyadicPiece::of(j, p);
        if piece.support(p).is_none() {
            continue;
        }
        let tails = hhat_tail(&piece, p, cfg, q)?;
        let top = tails.first().map_or(0.0, |t| t.1);
        let qk = sup(tails.iter().map(|(s, t)| s.powf(kf) * t));
        let scale = r.powf(kf) * 2f64.powf((zr - kf) * j as f64);
        coarse = coarse.max(qk * scale);
        let refined = hhat_tail(&piece, p, &refined_cfg, q)?;
        fine = fine.max(sup(refined.iter().map(|(s, t)| s.powf(kf) * t)) * scale);
        if qk > 0.0 {
            q_rows.push((j as f64, qk.log2()));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = tails
            .iter()
            .filter(|(_, t)| *t <= cfg.window * top && *t > cfg.floor * top)
            .map(|(s, t)| (s.ln(), t.ln()))
            .unzip();
        excluded += tails.len() - xs.len();
        report = report.with_slope(SlopeFit::new(format!("s-slope j={j}"), &xs, &ys, -kf, tol, true));
        for (s, t) in tails {
            report.rows.push(vec![j as f64, s, t, s.powf(kf) * t]);
        }
    }
    if q_rows.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = q_rows.into_iter().unzip();
        report = report.with_slope(SlopeFit::new("j-slope", &xs, &ys, kf - zr, tol, false));
    }
    report.excluded = excluded;
    Ok(report.with_sups(coarse, fine).note(format!("r = {r}, k = {k}")))
}

/// `M(u) = (1 - u)_+^z - e^{-u}`, evaluated without cancellation near `u = 0`.
pub fn eval_m(u: f64, z: ComplexOrder) -> Complex64 {
    if u < 1.0 {
        complex_exp_m1(z.as_complex() * (-u).ln_1p()) - (-u).exp_m1()
    } else {
        Complex64::new(-(-u).exp(), 0.0)
    }
}

/// `e^w - 1` accurate for small `|w|`.
fn complex_exp_m1(w: Complex64) -> Complex64 {
    // e^{a+ib} - 1 = (e^a - 1) cos b + (cos b - 1) + i e^a sin b
    let (s, c) = w.im.sin_cos();
    let cm1 = -2.0 * (0.5 * w.im).sin().powi(2);
    Complex64::new(w.re.exp_m1() * c + cm1, w.re.exp() * s)
}

/// Left truncation of the Mellin integral in `v = ln u`; `|M(u)| = O(u)`.
const MELLIN_V_MIN: f64 = -38.0;

/// Right truncation: `e^{-u} < e^{-40}` beyond `u = 40`.
fn mellin_v_max() -> f64 {
    40f64.ln()
}

/// Quadrature for `𝓜(γ) = (2π)^{-1} ∫_0^∞ M(u) u^{-iγ-1} du
/// = (2π)^{-1} ∫ M(e^v) e^{-iγv} dv`, resolving `|γ| <= gamma_max`.
#[derive(Debug, Clone)]
pub struct MellinNodes {
    v: Vec<f64>,
    wm: Vec<Complex64>,
}

impl MellinNodes {
    pub fn new(z: ComplexOrder, gamma_max: f64, q: &QuadratureSpec) -> Result<Self> {
        if !(z.re() > 0.0) {
            return Err(invalid(format!("the Mellin representation needs Re z > 0, got {}", z.re())));
        }
        // M(u)/u must stay bounded as u -> 0
        let ratios: Vec<f64> = [1e-4, 1e-6, 1e-8].iter().map(|&u| eval_m(u, z).norm() / u).collect();
        if !ratios.iter().all(|r| r.is_finite()) || ratios[2] > 1.1 * ratios[1] + 1e-12 {
            return Err(Error::MellinEndpoint(ratios[2]));
        }
        let mut nodes = Nodes::graded_right(MELLIN_V_MIN, 0.0, 40, gamma_max, 8, q)?;
        nodes.extend(Nodes::oscillatory(0.0, mellin_v_max(), gamma_max, 8, q)?);
        let wm = nodes.x.iter().zip(&nodes.w).map(|(&v, &w)| eval_m(v.exp(), z) * (w / (2.0 * PI))).collect();
        Ok(Self { v: nodes.x, wm })
    }

    pub fn eval(&self, gamma: f64) -> Complex64 {
        self.v.iter().zip(&self.wm).map(|(&v, &w)| w * Complex64::from_polar(1.0, -gamma * v)).sum()
    }
}

/// `𝓜(γ)` at each `γ`.
pub fn mellin_transform_m(z: ComplexOrder, gammas: &[f64], q: &QuadratureSpec) -> Result<Vec<Complex64>> {
    let g_max = gammas.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let nodes = MellinNodes::new(z, g_max, q)?;
    Ok(gammas.iter().map(|&g| nodes.eval(g)).collect())
}

/// `∫_{-Γ}^{Γ} 𝓜(γ) u^{iγ} dγ`, which recovers `M(u)` as `Γ -> ∞`.
pub fn mellin_reconstruct(z: ComplexOrder, us: &[f64], gamma_max: f64, q: &QuadratureSpec) -> Result<Vec<Complex64>> {
    if us.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
        return Err(invalid("reconstruction points must be positive"));
    }
    let nodes = MellinNodes::new(z, gamma_max, q)?;
    let panels = (gamma_max / 2.0).ceil() as usize;
    let mut g = Nodes::new();
    g.push_uniform(-gamma_max, gamma_max, 2 * panels);
    let mut out = vec![ZERO; us.len()];
    for (&gamma, &w) in g.x.iter().zip(&g.w) {
        let m = nodes.eval(gamma) * w;
        for (o, &u) in out.iter_mut().zip(us) {
            *o += m * Complex64::from_polar(1.0, gamma * u.ln());
        }
    }
    Ok(out)
}

/// `|𝓜(γ)| <= c (1 + |γ|)^{-(Re z + 1)}`: sup of `|𝓜| (1+γ)^{Re z + 1}` over
/// `γ ∈ [γ_min, γ_max]`, refined by doubling `γ_max`, and the one-sided
/// log-log slope against `1 + γ`.
pub fn check_mellin_decay(z: ComplexOrder, gamma_min: f64, gamma_max: f64, points: usize, tol: f64, q: &QuadratureSpec) -> Result<BoundReport> {
    let target = -(z.re() + 1.0);
    let nodes = MellinNodes::new(z, 2.0 * gamma_max, q)?;
    let sweep = |g_max: f64, count: usize| -> Vec<Vec<f64>> {
        logspace(gamma_min, g_max, count)
            .into_iter()
            .map(|g| {
                let m = nodes.eval(g).norm();
                vec![g, m, m * (1.0 + g).powf(-target)]
            })
            .collect()
    };
    let rows = sweep(gamma_max, points);
    let refined = sweep(2.0 * gamma_max, 2 * points);
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 + r[0]).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r[1].ln()).collect();
    let coarse = sup(rows.iter().map(|r| r[2]));
    let fine = sup(refined.iter().map(|r| r[2]));
    let mut report = BoundReport::new("mellin", &["gamma", "abs_mellin", "ratio"]);
    report.rows = rows;
    Ok(report
        .with_slope(SlopeFit::new("gamma-slope", &xs, &ys, target, tol, true))
        .with_sups(coarse, fine)
        .note(format!("z = {} + {}i", z.re(), z.im())))
}

/// `(λ² + ρ²)^{iγ}`.
pub fn imaginary_power_multiplier(sp: &SpaceParams, gamma: f64, lambda: f64) -> Complex64 {
    Complex64::from_polar(1.0, gamma * (lambda * lambda + sp.rho().powi(2)).ln())
}

/// Smooth cut-off equal to 1 on `[0, 1]` and 0 on `[2, ∞)`.
fn theta(mu: f64) -> f64 {
    let mu = mu.abs();
    if mu <= 1.0 {
        1.0
    } else if mu >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - mu);
        a / (a + psi(mu - 1.0))
    }
}

/// `β(μ) = θ(μ) - θ(2μ)`, supported on `[1/2, 2]`; `θ + Σ_{k>=1} β(2^{-k}·) = 1`.
fn beta(mu: f64) -> f64 {
    theta(mu) - theta(2.0 * mu)
}

/// Unit-scale dyadic piece of `m^γ(λ) = (λ² + ρ²)^{iγ}`:
/// `m^γ(λ) = Σ_k m_k^γ(2^{-k} λ)` with `m_0^γ = θ m^γ` and
/// `m_k^γ(μ) = β(μ) m^γ(2^k μ)`.
pub fn dyadic_imaginary_piece(sp: &SpaceParams, gamma: f64, k: u32, mu: f64) -> Complex64 {
    let cut = if k == 0 { theta(mu) } else { beta(mu) };
    if cut == 0.0 {
        return ZERO;
    }
    imaginary_power_multiplier(sp, gamma, 2f64.powi(k as i32) * mu) * cut
}

/// `Σ_{a <= σ/2} sup |∂^a m_k^γ|` on the support of the piece, `σ/2 = [n/2] + 1`.
pub fn dyadic_sobolev_norm(sp: &SpaceParams, gamma: f64, k: u32) -> Result<f64> {
    let order = (sp.n() / 2 + 1) as usize;
    let (a, b) = if k == 0 { (0.0, 2.0) } else { (0.5, 2.0) };
    let rho = sp.rho();
    let omega = gamma.abs() * 4f64.max(1.0 / rho);
    let mut h: f64 = (b - a) / 256.0;
    if omega > 0.0 {
        h = h.min(2.0 * PI / (48.0 * omega));
    }
    let norms = sup_derivative_norms(|mu| dyadic_imaginary_piece(sp, gamma, k, mu), a, b, h, order)?;
    Ok(norms.iter().sum())
}

/// `‖m_k^γ‖ <= c (1 + |γ|)^{σ/2}` uniformly in `k`.
///
/// Rows hold the norm for each `(k, γ)`; the sup-ratio is
/// `norm / (1 + γ)^{σ/2}`, refined by extending `k` to `2 k_max`. Per `k`, the
/// slope of `log norm` against `log(1 + γ)` over the upper half of the `γ`
/// grid must not exceed `σ/2 + tol`.
pub fn check_dyadic_sobolev_growth(sp: &SpaceParams, gammas: &[f64], k_max: u32, tol: f64) -> Result<BoundReport> {
    let half_sigma = (sp.n() / 2 + 1) as f64;
    if gammas.len() < 4 {
        return Err(invalid("need at least four γ values"));
    }
    let mut report = BoundReport::new("sobolev-growth", &["k", "gamma", "norm", "ratio"]);
    let mut fine = 0.0f64;
    for k in 0..=2 * k_max {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, &g) in gammas.iter().enumerate() {
            let norm = dyadic_sobolev_norm(sp, g, k)?;
            let ratio = norm / (1.0 + g.abs()).powf(half_sigma);
            fine = fine.max(ratio);
            if k > k_max {
                continue;
            }
            report.rows.push(vec![k as f64, g, norm, ratio]);
            if 2 * i >= gammas.len() {
                xs.push((1.0 + g.abs()).ln());
                ys.push(norm.ln());
            }
        }
        if k <= k_max {
            report = report.with_slope(SlopeFit::new(format!("gamma-exponent k={k}"), &xs, &ys, half_sigma, tol, true));
        }
    }
    let coarse = sup(report.rows.iter().map(|r| r[3]));
    let growth = relative_growth(coarse, fine);
    let report = report.with_sups(coarse, fine);
    Ok(report.note(format!("sigma/2 = {half_sigma}, refinement growth {growth:.3e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp3() -> SpaceParams {
        SpaceParams::new(3).unwrap()
    }

    fn zr(x: f64) -> ComplexOrder {
        ComplexOrder::real(x).unwrap()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn riesz_multiplier_examples() {
        let p = RieszParams::new(sp3(), 1.0, ComplexOrder::new(0.5, 1.0).unwrap()).unwrap();
        assert_eq!(eval_riesz_multiplier(&p, 0.0), ZERO);
        let p = RieszParams::new(sp3(), 2.0, zr(1.0)).unwrap();
        assert!((eval_riesz_multiplier(&p, 0.0) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let p = RieszParams::new(sp3(), 2.0, ComplexOrder::new(0.0, 1.0).unwrap()).unwrap();
        let v = eval_riesz_multiplier(&p, 0.0);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!((v.arg() - 0.5f64.ln()).abs() < 1e-15);
        assert!(RieszParams::new(sp3(), 0.5, zr(1.0)).is_err());
    }

    #[test]
    fn heat_multiplier_examples() {
        let sp = sp3();
        assert!((eval_heat_multiplier(&sp, 1.0, 0.0) - (-1f64).exp()).abs() < 1e-16);
        assert!((eval_heat_multiplier(&sp, 0.5, 1.0) - (-1f64).exp()).abs() < 1e-16);
        assert!((eval_heat_multiplier(&sp, 1e-14, 7.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_factorization() {
        let p = RieszParams::new(sp3(), 2.0, zr(1.0)).unwrap();
        assert!((eval_h(&p, 0.0) - Complex64::new(0.5 * 0.5f64.exp(), 0.0)).norm() < 1e-15);
        for z in [zr(1.0), zr(2.5), ComplexOrder::new(1.5, -2.0).unwrap()] {
            let p = RieszParams::new(sp3(), 30.0, z).unwrap();
            for l in linspace(0.0, 7.0, 200) {
                let s = eval_riesz_multiplier(&p, l);
                let w = (-p.u(l)).exp();
                assert!((s - eval_h(&p, l) * w).norm() <= 1e-14);
            }
            assert!(eval_h(&p, p.support()).norm() < 1e-14);
            assert_eq!(eval_h(&p, p.support() * (1.0 + 1e-12)), ZERO);
        }
    }

    #[test]
    fn multiplier_continuous_at_edge() {
        let p = RieszParams::new(sp3(), 10.0, zr(0.3)).unwrap();
        let edge = p.support();
        let near: Vec<f64> = (1..12).map(|k| eval_riesz_multiplier(&p, edge * (1.0 - 10f64.powi(-k))).norm()).collect();
        assert!(near.windows(2).all(|w| w[1] < w[0]));
        assert!(near.last().unwrap() < &1e-3);
    }

    #[test]
    fn partition_of_unity() {
        for x in [0.0, 0.3, 0.9, 0.999] {
            let s: f64 = (0..40).map(|j| partition_chi(j, x).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12, "x = {x}");
        }
        let big_j = 20;
        let eps = 5.0 * 0.5f64.powi(big_j + 2);
        for x in linspace(0.0, 1.0 - eps, 2000) {
            let s: f64 = (0..=big_j as u32).map(|j| partition_chi(j, x).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-10, "x = {x}");
        }
        assert!(partition_chi(0, 1.0).is_err());
        assert!(partition_chi(0, -0.1).is_err());
    }

    #[test]
    fn partition_support_and_overlap() {
        for j in 0..10 {
            let (a, b) = partition_interval(j);
            for x in linspace(0.0, 0.9999, 3000) {
                if x < a || x > b {
                    assert_eq!(partition_chi(j, x).unwrap(), 0.0);
                }
            }
        }
        // supp φ_1 = [3/8, 7/8] excludes 0
        assert_eq!(phi_j(1, 0.0), 0.0);
        assert_eq!(partition_chi(0, 0.0).unwrap(), 1.0);
        assert_eq!(partition_overlap(), PARTITION_OVERLAP);
    }

    #[test]
    fn hjr_pieces_sum_to_h() {
        let p = RieszParams::new(sp3(), 1024.0, zr(2.5)).unwrap();
        let big_j = 8;
        let limit = p.r() * (1.0 - 5.0 * 0.5f64.powi(big_j + 2)).sqrt();
        for xi in linspace(0.0, limit, 500) {
            let sum: Complex64 = (0..=big_j as u32).map(|j| eval_hjr(&DyadicPiece::of(j, &p), &p, xi)).sum();
            assert!((sum - eval_h(&p, xi)).norm() <= 1e-10);
            let w = (-p.u(xi)).exp();
            assert!((sum * w - eval_riesz_multiplier(&p, xi)).norm() <= 1e-10);
        }
        for j in 0..5 {
            assert_eq!(eval_hjr(&DyadicPiece::of(j, &p), &p, p.r()), ZERO);
        }
    }

    #[test]
    fn support_lengths() {
        let r = support_length_check(&sp3(), zr(3.0), 8, &[2.0, 8.0, 32.0]).unwrap();
        assert!(r.passed, "{:?}", r.growth);
        // exact χ support endpoints
        let piece = DyadicPiece::new(3, 8.0).unwrap();
        let (a, b) = piece.chi_support();
        assert!((a - 8.0 * (1.0 - 5.0 / 32.0f64).sqrt()).abs() < 1e-14);
        assert!((b - 8.0 * (1.0 - 1.0 / 32.0f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn derivative_norm_slopes() {
        let r = check_hjr_derivative_norms(&sp3(), zr(3.0), &DerivativeSweep::default()).unwrap();
        assert!(r.passed, "{:?}", r.slopes);
    }

    #[test]
    fn hhat_tail_slopes() {
        let p = RieszParams::new(sp3(), 4096.0, zr(3.0)).unwrap();
        for k in [1, 2] {
            let r = check_hhat_tail(&p, &[3, 4, 5, 6, 7, 8], k, 0.2, &TailConfig::default(), &q()).unwrap();
            assert!(r.passed, "k = {k}: {:?}", r.slopes);
        }
        let empty = RieszParams::new(sp3(), 4.0, zr(3.0)).unwrap();
        assert!(hhat_tail(&DyadicPiece::of(6, &empty), &empty, &TailConfig::default(), &q()).unwrap().is_empty());
    }

    #[test]
    fn m_examples() {
        for z in [zr(1.0), ComplexOrder::new(2.0, 1.0).unwrap()] {
            assert_eq!(eval_m(0.0, z), ZERO);
            assert!((eval_m(1.0, z) + Complex64::new((-1f64).exp(), 0.0)).norm() < 1e-16);
            assert!(eval_m(800.0, z).norm() < 1e-300);
        }
        // agrees with the direct formula away from 0
        let z = zr(2.5);
        assert!((eval_m(0.3, z).re - (0.7f64.powf(2.5) - (-0.3f64).exp())).abs() < 1e-15);
    }

    /// `(2π)^{-1} Γ(-iγ) [Γ(z+1)/Γ(z+1-iγ) - 1]`, from the Mellin transforms
    /// of `(1-u)_+^z` (a Beta integral) and `e^{-u}`.
    fn mellin_oracle(z: f64, g: f64) -> Complex64 {
        use crate::specfun::ln_gamma_complex;
        let s = Complex64::new(0.0, -g);
        let a = ln_gamma_complex(Complex64::new(z + 1.0, 0.0)).unwrap() - ln_gamma_complex(s + z + 1.0).unwrap();
        (ln_gamma_complex(s).unwrap().exp() * (a.exp() - 1.0)) / (2.0 * PI)
    }

    #[test]
    fn mellin_matches_closed_form() {
        for z in [1.0, 2.5] {
            let gs = [-40.0, -3.0, 0.5, 5.0, 60.0, 200.0];
            let m = mellin_transform_m(zr(z), &gs, &q()).unwrap();
            for (g, v) in gs.iter().zip(&m) {
                let exact = mellin_oracle(z, *g);
                assert!((v - exact).norm() <= 1e-9 * exact.norm().max(1e-6), "z={z} γ={g}: {v} vs {exact}");
            }
            // Hermitian symmetry for real M
            let pair = mellin_transform_m(zr(z), &[-7.3, 7.3], &q()).unwrap();
            assert!((pair[0] - pair[1].conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn mellin_reconstruction_and_decay() {
        for z in [1.0, 2.5] {
            let us = [0.25, 0.5, 0.9];
            let rec = mellin_reconstruct(zr(z), &us, 400.0, &q()).unwrap();
            for (u, v) in us.iter().zip(&rec) {
                let err = (v - eval_m(*u, zr(z))).norm();
                assert!(err <= 1e-4, "z = {z}, u = {u}: {err:e}");
            }
            let r = check_mellin_decay(zr(z), 5.0, 200.0, 40, 0.2, &q()).unwrap();
            assert!(r.passed, "z = {z}: {:?}", r.slopes);
        }
        assert!(MellinNodes::new(zr(0.0), 10.0, &q()).is_err());
    }

    #[test]
    fn imaginary_powers() {
        let sp = sp3();
        assert_eq!(imaginary_power_multiplier(&sp, 0.0, 3.0), Complex64::new(1.0, 0.0));
        assert!((imaginary_power_multiplier(&sp, PI / 2f64.ln(), 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for l in linspace(0.0, 50.0, 101) {
            assert!((imaginary_power_multiplier(&sp, 17.0, l).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dyadic_partition_reassembles() {
        let sp = sp3();
        for l in [0.1, 1.7, 9.0, 100.0] {
            let sum: Complex64 = (0..12).map(|k| dyadic_imaginary_piece(&sp, 3.0, k, l * 0.5f64.powi(k as i32))).sum();
            assert!((sum - imaginary_power_multiplier(&sp, 3.0, l)).norm() < 1e-13);
        }
    }

    #[test]
    fn sobolev_growth() {
        let sp = sp3();
        let n0: Vec<f64> = (1..5).map(|k| dyadic_sobolev_norm(&sp, 0.0, k).unwrap()).collect();
        assert!(n0.iter().all(|v| (v / n0[0] - 1.0).abs() < 0.05));
        let gammas = logspace(1.0, 300.0, 10);
        let r = check_dyadic_sobolev_growth(&sp, &gammas, 3, 0.2).unwrap();
        assert!(r.passed, "{:?}", r.slopes);
    }
}
