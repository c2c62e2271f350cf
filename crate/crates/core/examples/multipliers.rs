//! The Riesz multiplier, its dyadic decomposition near the support edge and
//! the Mellin representation of M(u) = (1 - u)_+^z - e^{-u}.

use hyperriesz::multipliers::{
    eval_h, eval_heat_multiplier, eval_hjr, eval_m, eval_riesz_multiplier, mellin_reconstruct, partition_chi, DyadicPiece, RieszParams,
};
use hyperriesz::quadrature::QuadratureSpec;
use hyperriesz::space::SpaceParams;
use hyperriesz::specfun::ComplexOrder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = QuadratureSpec::default();
    let sp = SpaceParams::new(3)?;
    let p = RieszParams::new(sp, 101.0, ComplexOrder::new(2.0, 0.5)?)?;
    println!("R = {}, support edge √(R - ρ²) = {}", p.R(), p.support());

    let r = p.r();
    for xi in [0.0, 3.0, 7.0, 9.9] {
        let s = eval_riesz_multiplier(&p, xi);
        let h = eval_h(&p, xi);
        // s_R^z = h_r^z · e^{-(ξ² + ρ²)/r²}
        let factored = h * eval_heat_multiplier(&sp, 1.0 / (r * r), xi);
        let pieces: num_complex::Complex64 = (0..40).map(|j| eval_hjr(&DyadicPiece::of(j, &p), &p, xi)).sum();
        println!("ξ = {xi}: s = {s:.6}, h·e^(-u) = {factored:.6}; h = {h:.6}, Σ_j h_j = {pieces:.6}");
    }

    let xi = 0.97;
    let weights: Vec<String> = (0..8).map(|j| partition_chi(j, xi).map(|c| format!("{c:.4}"))).collect::<Result<_, _>>()?;
    println!("χ_j({xi}) for j < 8: [{}]", weights.join(", "));

    let z = ComplexOrder::real(2.5)?;
    let us = [0.2, 0.5, 0.8];
    let rec = mellin_reconstruct(z, &us, 400.0, &q)?;
    for (u, v) in us.iter().zip(rec) {
        println!("M({u}) = {:.8}, from Mellin inversion {:.8}", eval_m(*u, z).re, v.re);
    }
    Ok(())
}
