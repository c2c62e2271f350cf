//! Spherical functions and the spherical Fourier transform on H³, checked
//! against φ_λ(r) = sin(λr) / (λ sinh r) and the heat kernel round trip.

use hyperriesz::kernels::heat_kernel_h3;
use hyperriesz::quadrature::QuadratureSpec;
use hyperriesz::space::{ball_volume, spherical_function, RadialPoint, SpaceParams};
use hyperriesz::sph_transform::{ensure_calibrated, forward_transform, inverse_transform, RadialFunction, RadialGrid, SpectralGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = QuadratureSpec::default();
    let sp = SpaceParams::new(3)?;

    for (lambda, r) in [(0.5, 1.0), (2.0, 3.0), (7.0, 0.4)] {
        let got = spherical_function(&sp, lambda, RadialPoint::new(r)?, &q)?;
        let exact = (lambda * r).sin() / (lambda * r.sinh());
        println!("φ_{lambda}({r}) = {got:.15}  closed form {exact:.15}");
    }
    println!("|B(1)| = {:.12}", ball_volume(&sp, RadialPoint::new(1.0)?, &q)?);

    let cal = ensure_calibrated(&sp, &q)?;
    println!("inversion constant {:.15} (1/(2π³) = {:.15})", cal.constant, 1.0 / (2.0 * std::f64::consts::PI.powi(3)));

    let t = 1.0;
    let grid = RadialGrid::new(&sp, 20.0, 9.0, &q)?;
    let f = RadialFunction::sample_real(grid, |r| heat_kernel_h3(t, r))?;
    let spectrum = forward_transform(&sp, &f, SpectralGrid::new(9.0, 4.0, &q)?, &q)?;
    let rs = [0.0, 1.0, 2.0, 4.0];
    let back = inverse_transform(&sp, &spectrum, &rs, &q)?;
    for (r, v) in back.iter() {
        println!("r = {r}: round trip {:.12e}, p_1 = {:.12e}", v.re, heat_kernel_h3(t, r));
    }
    Ok(())
}
