//! Riesz means of the heat kernel p_{1/2} on H³ above the critical index for
//! p = 1, and their convergence as R grows.

use hyperriesz::quadrature::QuadratureSpec;
use hyperriesz::report::linspace;
use hyperriesz::riesz::{convergence_experiment, critical_index, r_grid, TestFunction, CONVERGENCE_THRESHOLD};
use hyperriesz::space::SpaceParams;
use hyperriesz::specfun::ComplexOrder;
use hyperriesz::sph_transform::ensure_calibrated;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = QuadratureSpec::default();
    let sp = SpaceParams::new(3)?;
    ensure_calibrated(&sp, &q)?;

    let z0 = critical_index(3, 1.0)?;
    let z = ComplexOrder::real(z0 + 0.1)?;
    let big_rs = r_grid(&sp, 10.0, 1e4, 4)?;
    let xs = linspace(0.0, 3.0, 13);
    let rep = convergence_experiment(&sp, z, &TestFunction::Heat { t: 0.5 }, 1.0, &xs, &big_rs, CONVERGENCE_THRESHOLD, &q)?;

    println!("critical index {z0}, z = {}", z.re());
    for (r, e) in rep.big_rs.iter().zip(&rep.sup_errors) {
        println!("R = {r:>9.1}: sup_x |S_R f - f| = {e:.3e}");
    }
    println!("max_R |S_R f(0)| = {:.6e}", rep.maximal[0]);
    println!("verdict: {:?}", rep.verdict);
    Ok(())
}
