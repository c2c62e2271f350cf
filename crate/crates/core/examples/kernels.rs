//! Heat and Riesz kernels on H³ from the inverse spherical transform, and the
//! split of κ_R^z into a local part and a part at infinity.

use hyperriesz::kernels::{heat_kernel, heat_kernel_h3, riesz_kernel, split_kernel, CutoffZeta};
use hyperriesz::multipliers::RieszParams;
use hyperriesz::quadrature::QuadratureSpec;
use hyperriesz::report::linspace;
use hyperriesz::space::SpaceParams;
use hyperriesz::specfun::ComplexOrder;
use hyperriesz::sph_transform::ensure_calibrated;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = QuadratureSpec::default();
    let sp = SpaceParams::new(3)?;
    ensure_calibrated(&sp, &q)?;

    let rs = linspace(0.0, 3.0, 7);
    let heat = heat_kernel(&sp, 0.5, &rs, &q)?;
    for (r, v) in heat.profile.iter() {
        println!("p_0.5({r:.1}) = {:.10e}  closed form {:.10e}", v.re, heat_kernel_h3(0.5, r));
    }

    let p = RieszParams::new(sp, 1.0 + 400.0, ComplexOrder::real(2.1)?)?;
    let rs = linspace(0.0, 2.0, 9);
    let kappa = riesz_kernel(&sp, &p, &rs, &q)?;
    let (local, infinity) = split_kernel(&kappa, &CutoffZeta::default())?;
    println!("{:>5} {:>16} {:>16} {:>16}", "r", "κ", "ζκ", "(1-ζ)κ");
    for i in 0..rs.len() {
        println!(
            "{:>5.2} {:>16.8e} {:>16.8e} {:>16.8e}",
            rs[i],
            kappa.values()[i].re,
            local.values()[i].re,
            infinity.values()[i].re
        );
    }
    Ok(())
}
