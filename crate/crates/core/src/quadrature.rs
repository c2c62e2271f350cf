//! Gauss–Legendre panel quadrature.
//!
//! Every integral in the crate goes through [`Nodes`]: a flat list of abscissae
//! and weights assembled from Gauss–Legendre panels. Panels are sized so that
//! each oscillation of a known frequency receives a fixed number of nodes, and
//! may be graded geometrically towards an endpoint where the integrand has an
//! algebraic edge such as `(1 - u)_+^z`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Nodes per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 16;

/// Tolerances and budgets shared by all integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub osc_points_per_period: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-15,
            max_panels: 20_000,
            osc_points_per_period: 16,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(invalid(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(invalid(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if self.osc_points_per_period < 8 {
            return Err(invalid(format!(
                "osc_points_per_period must be >= 8, got {}",
                self.osc_points_per_period
            )));
        }
        if self.max_panels == 0 {
            return Err(invalid("max_panels must be positive"));
        }
        Ok(())
    }

    /// Number of panels needed on an interval of length `len` so that an
    /// oscillation of angular frequency `freq` is sampled at the configured density.
    pub fn oscillatory_panels(&self, len: f64, freq: f64) -> usize {
        let periods = len * freq.abs() / (2.0 * PI);
        let nodes = periods * self.osc_points_per_period as f64;
        ((nodes / PANEL_ORDER as f64).ceil() as usize).max(1)
    }
}

/// A Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Rule {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            dp = if d != 0.0 { d } else { dp };
            let wi = 2.0 / ((1.0 - z * z) * dp * dp);
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        Self { x, w }
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// The shared panel rule.
pub fn panel_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::gauss_legendre(PANEL_ORDER))
}

/// Abscissae and weights of a composite rule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Nodes {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Nodes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Appends one Gauss–Legendre panel on `[a, b]`.
    pub fn push_panel(&mut self, a: f64, b: f64) {
        let rule = panel_rule();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in rule.x.iter().zip(&rule.w) {
            self.x.push(mid + half * xi);
            self.w.push(half * wi);
        }
    }

    /// Appends `count` equal panels covering `[a, b]`.
    pub fn push_uniform(&mut self, a: f64, b: f64, count: usize) {
        let count = count.max(1);
        let h = (b - a) / count as f64;
        for k in 0..count {
            let lo = a + h * k as f64;
            let hi = if k + 1 == count { b } else { lo + h };
            self.push_panel(lo, hi);
        }
    }

    /// Appends a node carrying zero weight (used to pin grid points such as a
    /// support endpoint without affecting any integral).
    pub fn push_marker(&mut self, x: f64) {
        self.x.push(x);
        self.w.push(0.0);
    }

    /// Composite rule on `[a, b]` resolving angular frequency `freq`.
    pub fn oscillatory(a: f64, b: f64, freq: f64, min_panels: usize, q: &QuadratureSpec) -> Result<Self> {
        let count = q.oscillatory_panels(b - a, freq).max(min_panels);
        if count > q.max_panels {
            return Err(Error::QuadratureBudget {
                a,
                b,
                panels: count,
                estimate: f64::NAN,
            });
        }
        let mut nodes = Self::new();
        nodes.push_uniform(a, b, count);
        Ok(nodes)
    }

    /// Composite rule on `[a, b]` graded geometrically towards `b`, each graded
    /// piece further split to resolve `freq`.
    pub fn graded_right(
        a: f64,
        b: f64,
        levels: usize,
        freq: f64,
        min_panels: usize,
        q: &QuadratureSpec,
    ) -> Result<Self> {
        let mut nodes = Self::new();
        let len = b - a;
        let mut lo = a;
        let mut total = 0;
        for k in 1..=levels {
            let hi = b - len * 0.5f64.powi(k as i32);
            let count = if k == 1 {
                q.oscillatory_panels(hi - lo, freq).max(min_panels)
            } else {
                q.oscillatory_panels(hi - lo, freq)
            };
            total += count;
            nodes.push_uniform(lo, hi, count);
            lo = hi;
        }
        nodes.push_panel(lo, b);
        total += 1;
        if total > q.max_panels {
            return Err(Error::QuadratureBudget {
                a,
                b,
                panels: total,
                estimate: f64::NAN,
            });
        }
        Ok(nodes)
    }

    /// Graded towards `a` instead of `b`.
    pub fn graded_left(
        a: f64,
        b: f64,
        levels: usize,
        freq: f64,
        min_panels: usize,
        q: &QuadratureSpec,
    ) -> Result<Self> {
        let right = Self::graded_right(-b, -a, levels, freq, min_panels, q)?;
        let mut nodes = Self::new();
        for (x, w) in right.x.iter().zip(&right.w).rev() {
            nodes.x.push(-x);
            nodes.w.push(*w);
        }
        Ok(nodes)
    }

    pub fn extend(&mut self, other: Nodes) {
        self.x.extend(other.x);
        self.w.extend(other.w);
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.x.iter().zip(&self.w).map(|(&x, &w)| if w == 0.0 { 0.0 } else { w * f(x) }).sum()
    }
}

/// Local barycentric interpolation of samples on the uniform grid `x = 0, 1, 2, ...`.
#[derive(Debug, Clone)]
pub struct UniformInterpolator {
    bary: Vec<f64>,
}

impl UniformInterpolator {
    /// Uses `points` consecutive samples around each evaluation point.
    pub fn new(points: usize) -> Self {
        let mut bary = Vec::with_capacity(points);
        let mut c = 1.0;
        for i in 0..points {
            bary.push(if i % 2 == 0 { c } else { -c });
            c = c * (points - 1 - i) as f64 / (i + 1) as f64;
        }
        Self { bary }
    }

    pub fn points(&self) -> usize {
        self.bary.len()
    }

    /// Interpolated value at fractional index `x`; needs `g.len() >= points`.
    pub fn eval(&self, g: &[Complex64], x: f64) -> Complex64 {
        let m = self.bary.len();
        let first = ((x.floor() as isize) - (m as isize / 2 - 1)).clamp(0, (g.len() - m) as isize) as usize;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (i, wi) in self.bary.iter().enumerate() {
            let d = x - (first + i) as f64;
            if d == 0.0 {
                return g[first + i];
            }
            let c = wi / d;
            num += g[first + i] * c;
            den += c;
        }
        num / den
    }

    /// Adjoint of [`eval`](Self::eval): adds `v` times each stencil weight at
    /// fractional index `x` into `g`, so that `Σ g_m h_m` equals `v · eval(h, x)`.
    pub fn spread(&self, g: &mut [Complex64], x: f64, v: Complex64) {
        let m = self.bary.len();
        let first = ((x.floor() as isize) - (m as isize / 2 - 1)).clamp(0, (g.len() - m) as isize) as usize;
        let mut den = 0.0;
        for (i, wi) in self.bary.iter().enumerate() {
            let d = x - (first + i) as f64;
            if d == 0.0 {
                g[first + i] += v;
                return;
            }
            den += wi / d;
        }
        let scale = v / den;
        for (i, wi) in self.bary.iter().enumerate() {
            g[first + i] += scale * (wi / (x - (first + i) as f64));
        }
    }
}

/// Adaptive Gauss–Legendre integration by panel bisection.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &QuadratureSpec) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let panel = |lo: f64, hi: f64| -> f64 {
        let rule = panel_rule();
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        rule.x.iter().zip(&rule.w).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    };
    let mut stack = vec![(a, b, panel(a, b))];
    let mut total = 0.0;
    let mut panels = 1;
    let mut worst = 0.0f64;
    while let Some((lo, hi, coarse)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        let fine = left + right;
        let err = (fine - coarse).abs();
        let scale = (hi - lo).abs() / (b - a).abs();
        if err <= (q.abs_tol * scale).max(q.rel_tol * fine.abs()) || (hi - lo).abs() < 1e-14 * (b - a).abs() {
            total += fine;
            continue;
        }
        panels += 2;
        worst = worst.max(err);
        if panels > q.max_panels {
            return Err(Error::QuadratureBudget {
                a,
                b,
                panels,
                estimate: worst,
            });
        }
        stack.push((lo, mid, left));
        stack.push((mid, hi, right));
    }
    Ok(total)
}
