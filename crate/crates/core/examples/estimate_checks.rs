//! Runs a few of the estimate checks and prints their summaries.

use hyperriesz::kernels::{check_heat_sharp_bound, check_local_l1};
use hyperriesz::multipliers::{check_hjr_derivative_norms, DerivativeSweep};
use hyperriesz::quadrature::QuadratureSpec;
use hyperriesz::report::{linspace, logspace, BoundReport};
use hyperriesz::space::{phi0_bound_check, SpaceParams};
use hyperriesz::specfun::ComplexOrder;
use hyperriesz::sph_transform::ensure_calibrated;

fn show(r: &BoundReport) {
    println!("{:<10} passed={:<5} sup ratio {:.4e} refined {:?}", r.check, r.passed, r.sup_ratio, r.refined_sup_ratio);
    for s in &r.slopes {
        println!("    {:<18} slope {:>7.3} target {:>6.2} ± {}", s.label, s.slope, s.target, s.tol);
    }
    for n in &r.notes {
        println!("    note: {n}");
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = QuadratureSpec::default();
    let sp = SpaceParams::new(3)?;
    ensure_calibrated(&sp, &q)?;

    show(&phi0_bound_check(&sp, 0.1, 20.0, 100, &q)?);
    show(&check_heat_sharp_bound(&sp, &logspace(0.01, 5.0, 8), &linspace(0.0, 8.0, 17), &q)?);
    show(&check_hjr_derivative_norms(&sp, ComplexOrder::real(3.0)?, &DerivativeSweep::default())?);
    show(&check_local_l1(&sp, ComplexOrder::real(2.1)?, &[10.0, 100.0, 1000.0], 10.0, &q)?);
    Ok(())
}
