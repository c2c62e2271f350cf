//! Riesz means `S_R^z f = 𝓗^{-1}(s_R^z 𝓗f)` of radial functions, their
//! maximal function over a grid of `R`, and the convergence experiment.
//!
//! For radial `f` the convolution with `κ_R^z` is multiplication on the
//! spectral side, which is how the operator is realized here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::heat_kernel;
use crate::multipliers::{eval_heat_multiplier, eval_riesz_multiplier, RieszParams};
use crate::quadrature::QuadratureSpec;
use crate::report::logspace;
use crate::space::SpaceParams;
use crate::specfun::ComplexOrder;
use crate::sph_transform::{forward_transform, inverse_transform, RadialFunction, SpectralFunction, SpectralGrid, EDGE_LEVELS};

/// A radial input of the Riesz means.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `f ≡ 0`.
    Zero,
    /// The heat kernel `p_t`, with spherical transform `e^{-t(λ² + ρ²)}`.
    Heat { t: f64 },
    /// Samples on a quadrature grid; transformed by [`forward_transform`].
    Samples(RadialFunction),
}

impl TestFunction {
    pub fn id(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::Heat { t } => format!("heat(t={t})"),
            Self::Samples(_) => "samples".into(),
        }
    }

    /// `𝓗f` on `grid`.
    pub fn spectrum(&self, sp: &SpaceParams, grid: SpectralGrid, q: &QuadratureSpec) -> Result<SpectralFunction> {
        match self {
            Self::Zero => SpectralFunction::sample(grid, |_| Complex64::new(0.0, 0.0)),
            Self::Heat { t } => {
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(invalid(format!("heat time must be positive, got {t}")));
                }
                SpectralFunction::sample(grid, |l| Complex64::new(eval_heat_multiplier(sp, *t, l), 0.0))
            }
            Self::Samples(f) => forward_transform(sp, f, grid, q),
        }
    }

    /// `f` at `xs`; the heat kernel goes through the inverse transform so that
    /// `S_R^z f - f` compares like with like.
    pub fn values(&self, sp: &SpaceParams, xs: &[f64], q: &QuadratureSpec) -> Result<Vec<Complex64>> {
        match self {
            Self::Zero => Ok(vec![Complex64::new(0.0, 0.0); xs.len()]),
            Self::Heat { t } => Ok(heat_kernel(sp, *t, xs, q)?.values().to_vec()),
            Self::Samples(f) => {
                let nodes = f.grid.nodes();
                xs.iter()
                    .map(|x| {
                        nodes
                            .iter()
                            .position(|r| r == x)
                            .map(|i| f.values[i])
                            .ok_or_else(|| invalid(format!("sampled test function has no value at r = {x}")))
                    })
                    .collect()
            }
        }
    }
}

/// `S_R^z f` at `xs`.
///
/// The spectral grid covers the support `[0, √(R - ρ²)]` of `s_R^z`, graded
/// towards its edge.
pub fn apply_riesz_means(sp: &SpaceParams, p: &RieszParams, f: &TestFunction, xs: &[f64], q: &QuadratureSpec) -> Result<Vec<Complex64>> {
    if p.space != *sp {
        return Err(invalid("Riesz parameters belong to another space"));
    }
    let support = p.support();
    if support == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); xs.len()]);
    }
    let x_top = xs.last().copied().unwrap_or(0.0);
    let grid = SpectralGrid::with_support(support, support, x_top, EDGE_LEVELS, q)?;
    let fhat = f.spectrum(sp, grid.clone(), q)?;
    let values = fhat.iter().map(|(l, v)| v * eval_riesz_multiplier(p, l)).collect();
    Ok(inverse_transform(sp, &SpectralFunction::new(grid, values)?, xs, q)?.values)
}

/// `Z_0(n, p) = (n - 1/2)(2/p - 1)`.
pub fn critical_index(n: u32, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((n as f64 - 0.5) * (2.0 / p - 1.0))
}

/// The rank-one reference index `z_0(n, p) = ((n - 1)/2)(2/p - 1)`.
pub fn reference_index(n: u32, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(0.5 * (n as f64 - 1.0) * (2.0 / p - 1.0))
}

fn check_p(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(invalid(format!("p must lie in [1, 2], got {p}")));
    }
    Ok(())
}

/// `R = ρ² + s` for `count` values of `s` spaced logarithmically on `[lo, hi]`.
pub fn r_grid(sp: &SpaceParams, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite() && count > 0) {
        return Err(invalid("R grid needs 0 < min <= max and at least one point"));
    }
    let rho2 = sp.rho().powi(2);
    Ok(logspace(lo, hi, count).into_iter().map(|s| rho2 + s).collect())
}

/// Default number of points of the maximal-function `R` grid.
pub const DEFAULT_R_POINTS: usize = 32;

fn check_r_grid(sp: &SpaceParams, big_rs: &[f64]) -> Result<()> {
    let rho2 = sp.rho().powi(2);
    if big_rs.is_empty() || big_rs.iter().any(|r| !(*r > rho2 && r.is_finite())) {
        return Err(invalid(format!("R grid must be non-empty and lie in (ρ², ∞) = ({rho2}, ∞)")));
    }
    if big_rs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("R grid must be increasing"));
    }
    Ok(())
}

/// `|S_R^z f(x)|` for every `R` of the grid, row per `R`.
pub fn riesz_means_over_grid(sp: &SpaceParams, z: ComplexOrder, f: &TestFunction, xs: &[f64], big_rs: &[f64], q: &QuadratureSpec) -> Result<Vec<Vec<Complex64>>> {
    check_r_grid(sp, big_rs)?;
    big_rs
        .iter()
        .map(|&big_r| apply_riesz_means(sp, &RieszParams::new(*sp, big_r, z)?, f, xs, q))
        .collect()
}

/// `max_R |S_R^z f(x)|` over the grid: a lower bound for `S_*^z f(x)`.
pub fn maximal_operator(sp: &SpaceParams, z: ComplexOrder, f: &TestFunction, xs: &[f64], big_rs: &[f64], q: &QuadratureSpec) -> Result<Vec<f64>> {
    let rows = riesz_means_over_grid(sp, z, f, xs, big_rs, q)?;
    Ok(maximum(&rows, xs.len()))
}

fn maximum(rows: &[Vec<Complex64>], len: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; len];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(v.norm());
        }
    }
    out
}

/// Largest relative change of the maximal samples when the geometric
/// midpoints (in `R - ρ²`) are added to the grid.
pub fn maximal_grid_stability(sp: &SpaceParams, z: ComplexOrder, f: &TestFunction, xs: &[f64], big_rs: &[f64], q: &QuadratureSpec) -> Result<f64> {
    let coarse = maximal_operator(sp, z, f, xs, big_rs, q)?;
    let rho2 = sp.rho().powi(2);
    let mids: Vec<f64> = big_rs.windows(2).map(|w| rho2 + ((w[0] - rho2) * (w[1] - rho2)).sqrt()).collect();
    let extra = if mids.is_empty() { vec![0.0; xs.len()] } else { maximal_operator(sp, z, f, xs, &mids, q)? };
    Ok(coarse
        .iter()
        .zip(&extra)
        .map(|(c, e)| if *c == 0.0 { if *e == 0.0 { 0.0 } else { f64::INFINITY } } else { (c.max(*e) / c - 1.0).abs() })
        .fold(0.0, f64::max))
}

/// Default final-error threshold of the convergence verdict.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converging,
    NotConverging,
    /// `Re z <= Z_0(n, p)`: the run is for contrast only.
    NoClaim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub test_function: String,
    pub n: u32,
    pub p: f64,
    pub z: ComplexOrder,
    pub critical_index: f64,
    pub big_rs: Vec<f64>,
    pub xs: Vec<f64>,
    /// `sup_x |S_R^z f(x) - f(x)|` per `R`.
    pub sup_errors: Vec<f64>,
    /// `|S_R^z f(x) - f(x)|`, row per `R`.
    pub errors: Vec<Vec<f64>>,
    /// `max_R |S_R^z f(x)|` per `x`.
    pub maximal: Vec<f64>,
    /// Largest ratio of consecutive sup errors; below 1 for a decreasing sequence.
    pub monotonicity_ratio: f64,
    pub final_error: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Runs `S_R^z f` along the `R` grid and measures the sup error over `xs`.
///
/// The verdict is [`Verdict::Converging`] when the sup errors decrease along
/// the grid and the last one is at most `threshold`; below the critical
/// index it is [`Verdict::NoClaim`].
#[allow(clippy::too_many_arguments)]
pub fn convergence_experiment(
    sp: &SpaceParams,
    z: ComplexOrder,
    f: &TestFunction,
    p: f64,
    xs: &[f64],
    big_rs: &[f64],
    threshold: f64,
    q: &QuadratureSpec,
) -> Result<ConvergenceReport> {
    let z0 = critical_index(sp.n(), p)?;
    let target = f.values(sp, xs, q)?;
    let rows = riesz_means_over_grid(sp, z, f, xs, big_rs, q)?;
    let errors: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| row.iter().zip(&target).map(|(s, t)| (s - t).norm()).collect())
        .collect();
    let sup_errors: Vec<f64> = errors.iter().map(|e| e.iter().copied().fold(0.0, f64::max)).collect();
    let monotonicity_ratio = sup_errors
        .windows(2)
        .map(|w| if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max);
    let final_error = sup_errors.last().copied().unwrap_or(0.0);
    let verdict = if !(z.re() > z0) {
        Verdict::NoClaim
    } else if monotonicity_ratio < 1.0 && final_error <= threshold {
        Verdict::Converging
    } else {
        Verdict::NotConverging
    };
    Ok(ConvergenceReport {
        test_function: f.id(),
        n: sp.n(),
        p,
        z,
        critical_index: z0,
        big_rs: big_rs.to_vec(),
        xs: xs.to_vec(),
        maximal: maximum(&rows, xs.len()),
        sup_errors,
        errors,
        monotonicity_ratio,
        final_error,
        threshold,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat_kernel_h3;
    use crate::report::linspace;
    use crate::sph_transform::{ensure_calibrated, RadialGrid};

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn sp3() -> SpaceParams {
        let sp = SpaceParams::new(3).unwrap();
        ensure_calibrated(&sp, &q()).unwrap();
        sp
    }

    fn zr(z: f64) -> ComplexOrder {
        ComplexOrder::real(z).unwrap()
    }

    #[test]
    fn critical_indices() {
        assert_eq!(critical_index(3, 1.0).unwrap(), 2.5);
        assert_eq!(reference_index(3, 1.0).unwrap(), 1.0);
        for n in 2..8 {
            assert_eq!(critical_index(n, 2.0).unwrap(), 0.0);
        }
        assert!(critical_index(3, 3.0).is_err());
        assert!(critical_index(3, 0.5).is_err());
    }

    #[test]
    fn heat_means_recover_heat_kernel() {
        let sp = sp3();
        let p = RieszParams::new(sp, 1.0 + 1e4, zr(3.0)).unwrap();
        let v = apply_riesz_means(&sp, &p, &TestFunction::Heat { t: 1.0 }, &[0.0], &q()).unwrap();
        assert!((v[0].re - heat_kernel_h3(1.0, 0.0)).abs() < 1e-4);
        let zero = apply_riesz_means(&sp, &p, &TestFunction::Zero, &[0.0, 1.0], &q()).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn sharp_truncation_of_band_limited_spectrum() {
        // S_R^0 multiplies by the indicator of [0, √(R-ρ²)]; a spectrum that
        // is negligible beyond it passes through unchanged
        let sp = sp3();
        let p = RieszParams::new(sp, 1.0 + 400.0, zr(0.0)).unwrap();
        let xs = [0.0, 0.5, 1.0];
        let v = apply_riesz_means(&sp, &p, &TestFunction::Heat { t: 0.5 }, &xs, &q()).unwrap();
        for (x, v) in xs.iter().zip(&v) {
            assert!((v.re - heat_kernel_h3(0.5, *x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn sampled_input_matches_closed_form_spectrum() {
        let sp = sp3();
        let grid = RadialGrid::new(&sp, 14.0, 12.0, &q()).unwrap();
        let f = RadialFunction::sample_real(grid, |r| heat_kernel_h3(0.5, r)).unwrap();
        let xs: Vec<f64> = f.grid.nodes().iter().copied().filter(|&r| r < 2.0).step_by(7).collect();
        let p = RieszParams::new(sp, 1.0 + 100.0, zr(2.6)).unwrap();
        let a = apply_riesz_means(&sp, &p, &TestFunction::Samples(f), &xs, &q()).unwrap();
        let b = apply_riesz_means(&sp, &p, &TestFunction::Heat { t: 0.5 }, &xs, &q()).unwrap();
        for (a, b) in a.iter().zip(&b) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn convergence_above_critical_index() {
        let sp = sp3();
        let xs = linspace(0.0, 3.0, 13);
        let big_rs: Vec<f64> = [10.0, 100.0, 1000.0, 10000.0].iter().map(|s| 1.0 + s).collect();
        let f = TestFunction::Heat { t: 0.5 };
        let rep = convergence_experiment(&sp, zr(2.6), &f, 1.0, &xs, &big_rs, CONVERGENCE_THRESHOLD, &q()).unwrap();
        assert_eq!(rep.verdict, Verdict::Converging, "{:?}", rep.sup_errors);
        // 1 - (1 - u)^z ≈ z u for small u, so a larger order converges more slowly
        let high = convergence_experiment(&sp, zr(6.0), &f, 1.0, &xs, &big_rs, CONVERGENCE_THRESHOLD, &q()).unwrap();
        assert_eq!(high.verdict, Verdict::Converging);
        assert!(high.final_error > rep.final_error);
        let below = convergence_experiment(&sp, zr(2.0), &f, 1.0, &xs, &big_rs, CONVERGENCE_THRESHOLD, &q()).unwrap();
        assert_eq!(below.verdict, Verdict::NoClaim);
        let zero = convergence_experiment(&sp, zr(2.6), &TestFunction::Zero, 1.0, &xs, &big_rs, CONVERGENCE_THRESHOLD, &q()).unwrap();
        assert!(zero.sup_errors.iter().all(|e| *e == 0.0));
        for (row, big_r) in rep.errors.iter().zip(&big_rs) {
            assert!(row.iter().all(|e| *e >= 0.0), "R = {big_r}");
        }
    }

    #[test]
    fn maximal_dominates_and_is_grid_stable() {
        let sp = sp3();
        let xs = linspace(0.0, 2.0, 5);
        let f = TestFunction::Heat { t: 0.5 };
        let grid = r_grid(&sp, 1.0, 1e4, DEFAULT_R_POINTS).unwrap();
        let rows = riesz_means_over_grid(&sp, zr(3.0), &f, &xs, &grid, &q()).unwrap();
        let max = maximal_operator(&sp, zr(3.0), &f, &xs, &grid, &q()).unwrap();
        for row in &rows {
            for (m, v) in max.iter().zip(row) {
                assert!(*m >= v.norm());
            }
        }
        let single = maximal_operator(&sp, zr(3.0), &f, &xs, &grid[..1], &q()).unwrap();
        for (s, v) in single.iter().zip(&rows[0]) {
            assert_eq!(*s, v.norm());
        }
        let drift = maximal_grid_stability(&sp, zr(3.0), &f, &xs, &grid, &q()).unwrap();
        assert!(drift < 0.02, "{drift}");
        assert!(maximal_operator(&sp, zr(3.0), &f, &xs, &[0.5], &q()).is_err());
    }
}
