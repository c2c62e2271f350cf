//! Complex Gamma, Bessel J and the derivative recursion for 𝒥_ν(t) = t^{-ν} J_ν(t).

use num_complex::Complex64;

use hyperriesz::specfun::{bessel_j, derivative_terms, gamma_complex, script_j, script_j_derivative, BesselOrder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for w in [Complex64::new(0.5, 0.0), Complex64::new(3.0, 2.0), Complex64::new(-1.5, 0.25)] {
        println!("Γ({w}) = {:.12}", gamma_complex(w)?);
    }

    let j0 = BesselOrder::new(0.0)?;
    for t in [1.0, 10.0, 50.0] {
        println!("J_0({t}) = {:.15}", bessel_j(j0, t)?);
    }

    for a in 0..=3 {
        let terms: Vec<String> = derivative_terms(a)?
            .iter()
            .map(|d| format!("{:+} t^{} 𝒥_(ν+{})", d.coeff, d.power, d.shift))
            .collect();
        println!("𝒥_ν^({a}) = {}", terms.join(" "));
    }

    let nu = BesselOrder::new(1.5)?;
    let t = 2.0;
    println!("𝒥_1.5({t}) = {:.12}", script_j(nu, t)?);
    for a in 1..=3 {
        println!("𝒥_1.5^({a})({t}) = {:.12}", script_j_derivative(nu, a, t)?);
    }
    Ok(())
}
