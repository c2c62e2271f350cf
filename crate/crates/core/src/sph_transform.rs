//! Spherical Fourier transform of radial functions on `H^n`.
//!
//! `𝓗f(λ) = ∫_0^∞ f(r) φ_λ(r) δ(r) dr` and its inverse
//! `f(r) = C ∫_0^Λ 𝓗f(λ) φ_λ(r) |c(λ)|^{-2} dλ`, with the constant `C`
//! measured by [`calibrate`].

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{Nodes, QuadratureSpec, UniformInterpolator};
use crate::space::{density_at, plancherel_density, SpaceParams, SphericalNodes};

/// Radial nodes processed by one worker in the forward transform. Fixed so
/// that the summation order, and hence every bit of the result, does not
/// depend on the thread count.
const FORWARD_CHUNK: usize = 64;

/// Default number of geometric grading levels towards a support edge.
pub const EDGE_LEVELS: usize = 40;

fn check_increasing(grid: &[f64], what: &str) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(invalid(format!("{what} grid must be finite and nonnegative")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

/// Quadrature nodes on `[0, r_max]` with weights `w_k δ(r_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    resolved: Option<f64>,
}

impl RadialGrid {
    /// Gauss–Legendre panels resolving `φ_λ(r)` for `λ <= lambda_max`, with at
    /// least four panels per unit length, and a zero-weight node at `r = 0`.
    pub fn new(sp: &SpaceParams, r_max: f64, lambda_max: f64, q: &QuadratureSpec) -> Result<Self> {
        Self::with_feature(sp, r_max, lambda_max, 1.0, q)
    }

    /// As [`RadialGrid::new`], refining to four panels per `feature` length
    /// (for profiles concentrated near the origin).
    pub fn with_feature(sp: &SpaceParams, r_max: f64, lambda_max: f64, feature: f64, q: &QuadratureSpec) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(invalid(format!("r_max must be positive, got {r_max}")));
        }
        if !(lambda_max >= 0.0 && feature > 0.0) {
            return Err(invalid("lambda_max must be >= 0 and feature > 0"));
        }
        q.validate()?;
        let min_panels = (4.0 * r_max / feature).ceil() as usize;
        let gl = Nodes::oscillatory(0.0, r_max, lambda_max, min_panels, q)?;
        let mut nodes = vec![0.0];
        let mut weights = vec![0.0];
        for (&r, &w) in gl.x.iter().zip(&gl.w) {
            nodes.push(r);
            weights.push(w * density_at(sp, r));
        }
        Ok(Self {
            nodes,
            weights,
            resolved: Some(lambda_max),
        })
    }

    /// Bare evaluation points without quadrature weights.
    pub fn points(rs: &[f64]) -> Result<Self> {
        check_increasing(rs, "radial")?;
        Ok(Self {
            nodes: rs.to_vec(),
            weights: vec![0.0; rs.len()],
            resolved: None,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest `λ` whose oscillation the grid resolves; `None` for bare points.
    pub fn resolved(&self) -> Option<f64> {
        self.resolved
    }

    pub fn r_max(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }
}

/// Samples of a radial function together with the grid they live on.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
}

impl RadialFunction {
    pub fn sample<F: Fn(f64) -> Complex64>(grid: RadialGrid, f: F) -> Result<Self> {
        let values: Vec<Complex64> = grid.nodes.iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn sample_real<F: Fn(f64) -> f64>(grid: RadialGrid, f: F) -> Result<Self> {
        Self::sample(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.nodes.len() {
            return Err(invalid("radial values and grid differ in length"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("radial values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.grid.nodes.iter().copied().zip(self.values.iter().copied())
    }

    /// `∫ |f| δ dr` over the grid.
    pub fn l1_norm(&self) -> f64 {
        self.grid.weights.iter().zip(&self.values).map(|(w, v)| w * v.norm()).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Quadrature nodes on `[0, Λ_max]` in the spectral variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lambda_max: f64,
    resolved: Option<f64>,
}

impl SpectralGrid {
    /// Uniform panels on `[0, lambda_max]` resolving `cos(λ r)` for `r <= resolved`.
    pub fn new(lambda_max: f64, resolved: f64, q: &QuadratureSpec) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite() && resolved >= 0.0) {
            return Err(invalid("spectral grid needs lambda_max > 0 and resolved >= 0"));
        }
        q.validate()?;
        let gl = Nodes::oscillatory(0.0, lambda_max, resolved, envelope_panels(lambda_max), q)?;
        Ok(Self::assemble(gl, lambda_max, resolved))
    }

    /// Panels graded geometrically towards the support edge `support`, then
    /// uniform panels on `[support, lambda_max]`. The nodes on `[0, support]`
    /// do not depend on `lambda_max`.
    pub fn with_support(support: f64, lambda_max: f64, resolved: f64, levels: usize, q: &QuadratureSpec) -> Result<Self> {
        if !(support > 0.0 && lambda_max >= support && lambda_max.is_finite() && resolved >= 0.0) {
            return Err(invalid("spectral grid needs 0 < support <= lambda_max and resolved >= 0"));
        }
        q.validate()?;
        let mut gl = Nodes::graded_right(0.0, support, levels, resolved, envelope_panels(support), q)?;
        gl.push_marker(support);
        if lambda_max > support {
            gl.extend(Nodes::oscillatory(support, lambda_max, resolved, envelope_panels(lambda_max - support), q)?);
        }
        Ok(Self::assemble(gl, lambda_max, resolved))
    }

    fn assemble(gl: Nodes, lambda_max: f64, resolved: f64) -> Self {
        let mut nodes = vec![0.0];
        let mut weights = vec![0.0];
        nodes.extend(gl.x);
        weights.extend(gl.w);
        if *nodes.last().unwrap() < lambda_max {
            nodes.push(lambda_max);
            weights.push(0.0);
        }
        Self {
            nodes,
            weights,
            lambda_max,
            resolved: Some(resolved),
        }
    }

    /// Bare evaluation points without quadrature weights.
    pub fn points(lambdas: &[f64]) -> Result<Self> {
        check_increasing(lambdas, "spectral")?;
        Ok(Self {
            nodes: lambdas.to_vec(),
            weights: vec![0.0; lambdas.len()],
            lambda_max: lambdas.last().copied().unwrap_or(0.0),
            resolved: None,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Largest `r` (or `|H|`) whose oscillation the grid resolves.
    pub fn resolved(&self) -> Option<f64> {
        self.resolved
    }

    fn require_resolved(&self, requested: f64) -> Result<()> {
        match self.resolved {
            None => Err(invalid("spectral grid carries no quadrature weights")),
            Some(res) if requested > res * (1.0 + 1e-12) => Err(Error::SpectralUnderresolved { resolved: res, requested }),
            Some(_) => Ok(()),
        }
    }
}

fn envelope_panels(len: f64) -> usize {
    (len.ceil() as usize).max(2)
}

/// Samples of a function of `λ` together with their grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub grid: SpectralGrid,
    pub values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn sample<F: Fn(f64) -> Complex64>(grid: SpectralGrid, f: F) -> Result<Self> {
        let values = grid.nodes.iter().map(|&l| f(l)).collect();
        Self::new(grid, values)
    }

    pub fn try_sample<F: Fn(f64) -> Result<Complex64>>(grid: SpectralGrid, f: F) -> Result<Self> {
        let values = grid.nodes.iter().map(|&l| f(l)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn new(grid: SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.nodes.len() {
            return Err(invalid("spectral values and grid differ in length"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("spectral values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn lambda_max(&self) -> f64 {
        self.grid.lambda_max
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.grid.nodes.iter().copied().zip(self.values.iter().copied())
    }
}

/// `𝓗f` at the nodes of `lambdas`.
///
/// The tail `∫_{0.9 r_max}^{r_max} |f| δ dr` must stay below
/// `max(abs_tol, rel_tol ∫|f| δ dr)`; otherwise `f` is deemed not decaying.
pub fn forward_transform(sp: &SpaceParams, f: &RadialFunction, lambdas: SpectralGrid, q: &QuadratureSpec) -> Result<SpectralFunction> {
    q.validate()?;
    let lam_top = lambdas.nodes.last().copied().unwrap_or(0.0);
    match f.grid.resolved {
        None => return Err(invalid("radial grid carries no quadrature weights")),
        Some(res) if lam_top > res * (1.0 + 1e-12) => {
            return Err(Error::SpectralUnderresolved { resolved: res, requested: lam_top })
        }
        Some(_) => {}
    }
    let r_max = f.grid.r_max();
    let mass = f.l1_norm();
    let tail: f64 = f
        .iter()
        .zip(&f.grid.weights)
        .filter(|((r, _), _)| *r >= 0.9 * r_max)
        .map(|((_, v), w)| w * v.norm())
        .sum();
    let tol = q.abs_tol.max(q.rel_tol * mass);
    if tail > tol {
        return Err(Error::TailNotDecaying { tail, tol });
    }

    let active: Vec<(f64, Complex64)> = f
        .iter()
        .zip(&f.grid.weights)
        .filter(|(_, &w)| w != 0.0)
        .map(|((r, v), &w)| (r, v * w))
        .collect();
    // 𝓗f(λ) = Σ_j c_j cos(λ u_j) over all spherical nodes of all radii; the
    // c_j are spread onto a uniform u grid fine enough for λ <= lam_top.
    let interp = UniformInterpolator::new(TABLE_STENCIL);
    let pad = TABLE_STENCIL;
    let delta = PI / (8.0 * lam_top.max(1.0 / r_max));
    let count = (r_max / delta).ceil() as usize + 2 * pad + 1;
    let partials = active
        .par_chunks(FORWARD_CHUNK)
        .map(|chunk| -> Result<Vec<Complex64>> {
            let mut acc = vec![Complex64::new(0.0, 0.0); count];
            for &(r, wf) in chunk {
                let sph = SphericalNodes::new(sp, r, lam_top, q)?;
                for (u, w) in sph.nodes() {
                    interp.spread(&mut acc, u / delta + pad as f64, wf * w);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coef = vec![Complex64::new(0.0, 0.0); count];
    for part in partials {
        for (c, p) in coef.iter_mut().zip(part) {
            *c += p;
        }
    }
    let values = lambdas
        .nodes
        .par_iter()
        .map(|&l| {
            coef.iter()
                .enumerate()
                .map(|(m, c)| c * (l * delta * (m as f64 - pad as f64)).cos())
                .sum()
        })
        .collect();
    SpectralFunction::new(lambdas, values)
}

/// `C ∫ m(λ) φ_λ(r) |c(λ)|^{-2} dλ` at each `r`, using the cached calibration.
pub fn inverse_transform(sp: &SpaceParams, m: &SpectralFunction, rs: &[f64], q: &QuadratureSpec) -> Result<RadialFunction> {
    let cal = calibration(sp.n()).ok_or(Error::Uncalibrated(sp.n()))?;
    let values = inverse_raw(sp, m, rs, q)?.into_iter().map(|(v, _)| v * cal.constant).collect();
    RadialFunction::new(RadialGrid::points(rs)?, values)
}

/// Relative size of rounding in the inverse transform, measured against the
/// sum of absolute terms.
pub const INVERSE_NOISE: f64 = 1e-13;

/// [`inverse_transform`] together with a noise floor per point: values below
/// it are dominated by cancellation in the spectral sum.
pub fn inverse_transform_with_floor(sp: &SpaceParams, m: &SpectralFunction, rs: &[f64], q: &QuadratureSpec) -> Result<(RadialFunction, Vec<f64>)> {
    let cal = calibration(sp.n()).ok_or(Error::Uncalibrated(sp.n()))?;
    let (values, floors) = inverse_raw(sp, m, rs, q)?
        .into_iter()
        .map(|(v, s)| (v * cal.constant, INVERSE_NOISE * s * cal.constant))
        .unzip();
    Ok((RadialFunction::new(RadialGrid::points(rs)?, values)?, floors))
}

/// Samples of `F(u) = Σ_l W_l cos(λ_l u)` at `u = (m - PAD) Δ` with
/// `Δ = π / (8 λ_top)`, so every `φ_λ(r)` integral against the weights `W`
/// reduces to a spherical average of `F`.
struct CosineTable {
    delta: f64,
    values: Vec<Complex64>,
    interp: UniformInterpolator,
}

const TABLE_STENCIL: usize = 20;
const TABLE_CHUNK: usize = 64;

impl CosineTable {
    fn new(weighted: &[(f64, Complex64)], u_max: f64, lam_top: f64) -> Self {
        let interp = UniformInterpolator::new(TABLE_STENCIL);
        let pad = TABLE_STENCIL;
        let delta = if lam_top > 0.0 { PI / (8.0 * lam_top) } else { 1.0 };
        let count = (u_max / delta).ceil() as usize + 2 * pad + 1;
        let partials: Vec<Vec<Complex64>> = weighted
            .par_chunks(TABLE_CHUNK)
            .map(|chunk| {
                let mut acc = vec![Complex64::new(0.0, 0.0); count];
                for &(l, wm) in chunk {
                    let step = Complex64::from_polar(1.0, l * delta);
                    let mut ph = Complex64::new(1.0, 0.0);
                    for (m, a) in acc.iter_mut().enumerate() {
                        if m % 256 == 0 {
                            ph = Complex64::from_polar(1.0, l * delta * (m as f64 - pad as f64));
                        }
                        *a += wm * ph.re;
                        ph *= step;
                    }
                }
                acc
            })
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); count];
        for part in partials {
            for (v, p) in values.iter_mut().zip(part) {
                *v += p;
            }
        }
        Self { delta, values, interp }
    }

    fn eval(&self, u: f64) -> Complex64 {
        self.interp.eval(&self.values, u / self.delta + TABLE_STENCIL as f64)
    }
}

/// The inverse transform without the calibration constant, together with
/// `Σ_l |W_l| φ_0(r)`, which bounds the sum of absolute terms.
fn inverse_raw(sp: &SpaceParams, m: &SpectralFunction, rs: &[f64], q: &QuadratureSpec) -> Result<Vec<(Complex64, f64)>> {
    q.validate()?;
    check_increasing(rs, "radial")?;
    m.grid.require_resolved(rs.last().copied().unwrap_or(0.0))?;
    let lam_top = m.grid.nodes.last().copied().unwrap_or(0.0);
    let weighted = m
        .iter()
        .zip(&m.grid.weights)
        .filter(|((_, v), &w)| w != 0.0 && *v != Complex64::new(0.0, 0.0))
        .map(|((l, v), &w)| Ok((l, v * (w * plancherel_density(sp, l)?))))
        .collect::<Result<Vec<_>>>()?;
    let abs_sum: f64 = weighted.iter().map(|(_, w)| w.norm()).sum();
    let table = CosineTable::new(&weighted, rs.last().copied().unwrap_or(0.0), lam_top);
    rs.par_iter()
        .map(|&r| {
            let sph = SphericalNodes::new(sp, r, lam_top, q)?;
            let value: Complex64 = sph.integrate(|u| table.eval(u));
            Ok((value, abs_sum * sph.integrate(|_| 1.0)))
        })
        .collect()
}

/// `(2π)^{-1} ∫_ℝ m(λ) e^{iλH} dλ = π^{-1} ∫_0^Λ m(λ) cos(λH) dλ` for even `m`.
pub fn euclidean_inverse_ft(m: &SpectralFunction, hs: &[f64]) -> Result<Vec<Complex64>> {
    let h_top = hs.iter().fold(0.0f64, |a, h| a.max(h.abs()));
    if hs.iter().any(|h| !h.is_finite()) {
        return Err(invalid("H values must be finite"));
    }
    m.grid.require_resolved(h_top)?;
    let weighted: Vec<(f64, Complex64)> = m
        .iter()
        .zip(&m.grid.weights)
        .filter(|(_, &w)| w != 0.0)
        .map(|((l, v), &w)| (l, v * w))
        .collect();
    Ok(hs
        .par_iter()
        .map(|&h| weighted.iter().map(|&(l, wm)| wm * (l * h).cos()).sum::<Complex64>() / std::f64::consts::PI)
        .collect())
}

/// Format version of persisted calibrations.
pub const CALIBRATION_VERSION: u32 = 1;

/// Required round-trip accuracy of a calibration.
pub const CALIBRATION_TOL: f64 = 1e-6;

/// Radii at which the calibration round trip is tested.
pub const CALIBRATION_RADII: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

/// Measured inversion constant for one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub n: u32,
    pub constant: f64,
    /// `max |𝓗^{-1}𝓗g - g| / ‖g‖_∞` over [`CALIBRATION_RADII`].
    pub residual: f64,
}

fn cache() -> &'static RwLock<HashMap<u32, Calibration>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Calibration>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The cached calibration for dimension `n`, if any.
pub fn calibration(n: u32) -> Option<Calibration> {
    cache().read().unwrap().get(&n).copied()
}

/// Stores `cal` unless dimension `n` is already calibrated; returns the entry
/// that ends up in the cache.
pub fn install_calibration(cal: Calibration) -> Result<Calibration> {
    if cal.version != CALIBRATION_VERSION {
        return Err(invalid(format!(
            "calibration version {} does not match {}",
            cal.version, CALIBRATION_VERSION
        )));
    }
    if !(cal.constant > 0.0 && cal.constant.is_finite()) || !(cal.residual <= CALIBRATION_TOL) {
        return Err(Error::CalibrationResidual {
            n: cal.n,
            residual: cal.residual,
            tol: CALIBRATION_TOL,
        });
    }
    let mut map = cache().write().unwrap();
    Ok(*map.entry(cal.n).or_insert(cal))
}

/// Test profile `g(r) = e^{-r²/4}`.
fn calibration_profile(r: f64) -> f64 {
    (-0.25 * r * r).exp()
}

/// Measures `C` from the round trip of `g(r) = e^{-r²/4}` and caches it.
///
/// Always recomputes; the cache keeps the first value stored.
pub fn calibrate(sp: &SpaceParams, q: &QuadratureSpec) -> Result<Calibration> {
    let rho2 = 2.0 * sp.rho();
    // g δ < e^{-40} beyond r_max
    let r_max = 2.0 * rho2 + (4.0 * rho2 * rho2 + 160.0).sqrt() + 2.0;
    let lambda_max = 12.0;
    let grid = RadialGrid::new(sp, r_max, lambda_max, q)?;
    let g = RadialFunction::sample_real(grid, calibration_profile)?;
    let spectral = SpectralGrid::new(lambda_max, 2.0, q)?;
    let hg = forward_transform(sp, &g, spectral, q)?;
    let raw = inverse_raw(sp, &hg, &CALIBRATION_RADII, q)?;
    let constant = calibration_profile(0.0) / raw[0].0.re;
    let residual = CALIBRATION_RADII
        .iter()
        .zip(&raw)
        .map(|(&r, (v, _))| (v * constant - calibration_profile(r)).norm())
        .fold(0.0, f64::max);
    let cal = Calibration {
        version: CALIBRATION_VERSION,
        n: sp.n(),
        constant,
        residual,
    };
    if !(residual <= CALIBRATION_TOL) {
        return Err(Error::CalibrationResidual {
            n: sp.n(),
            residual,
            tol: CALIBRATION_TOL,
        });
    }
    install_calibration(cal)?;
    Ok(cal)
}

/// The cached calibration, computing it on first use.
pub fn ensure_calibrated(sp: &SpaceParams, q: &QuadratureSpec) -> Result<Calibration> {
    match calibration(sp.n()) {
        Some(c) => Ok(c),
        None => calibrate(sp, q),
    }
}
